#!/usr/bin/env python3
"""Replay the bundled scenarios twice and show that the audit ledgers are
byte-identical, printing each run's tool trace and event walk."""
import argparse
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

from repoassist.audit import import_run  # noqa: E402
from repoassist.replay import ReplayRig  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs-dir", default="runs/scenario-replay")
    parser.add_argument("--scenarios", default=str(ROOT / "scenarios"))
    parser.add_argument("--repo-dir", default=str(ROOT / "fixture_repo"))
    args = parser.parse_args()

    hashes = {}
    for attempt in ("first", "second"):
        with ReplayRig(args.scenarios, args.repo_dir,
                       Path(args.runs_dir) / attempt) as rig:
            for scenario_id in sorted(rig.scenarios):
                outcome = rig.run_scenario(scenario_id)
                hashes.setdefault(scenario_id, []).append(outcome.content_hash)
                if attempt == "first":
                    events = import_run(outcome.ledger_path)
                    print(f"== {scenario_id}: {len(events)} events, "
                          f"ledger sha256 {outcome.content_hash[:16]}…")
                    for turn_no, turn in enumerate(outcome.turns, 1):
                        calls = " -> ".join(
                            s.call.tool_name + (" [error]" if s.is_error else "")
                            for s in turn.tool_trace
                        ) or "(no tool calls)"
                        print(f"   turn {turn_no}: {calls}")
                        print(f"   answer: {turn.text[:88]}…")
                    print()

    print("replay determinism:")
    for scenario_id, (first, second) in sorted(hashes.items()):
        verdict = "identical" if first == second else "DIFFERENT"
        print(f"  {scenario_id}: {verdict}")


if __name__ == "__main__":
    main()
