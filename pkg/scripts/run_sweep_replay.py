#!/usr/bin/env python3
"""Execute the full 42-run evaluation matrix in replay mode and render the
defect tables from the bundled annotation fixtures.

Every run gets a fresh chat against the scripted endpoint; ledgers and the
exactly-once state land under --runs-dir. Re-running skips completed runs.
"""
import argparse
import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

from repoassist.harness import (  # noqa: E402
    RunLedger,
    build_matrix,
    default_tasks,
    execute_plan,
    load_annotation_fixture,
    load_model_set,
    load_sampling_rows,
    render_report,
    summarize,
)
from repoassist.replay import ReplayRig  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs-dir", default="runs/sweep-replay")
    parser.add_argument("--scenarios", default=str(ROOT / "scenarios"))
    parser.add_argument("--repo-dir", default=str(ROOT / "fixture_repo"))
    parser.add_argument("--remote-repo", action="store_true",
                        help="route repository reads through the provider stub + proxy")
    args = parser.parse_args()

    fixtures = ROOT / "fixtures"
    sweep_model, rows = load_sampling_rows(fixtures / "table3_sampling.json")
    models, preset = load_model_set(fixtures / "models.json")
    tasks = default_tasks()
    plans = build_matrix(rows, models, tasks, sweep_model, preset)
    print(f"matrix: {len(plans)} runs "
          f"({sum(p.sweep == 'sampling' for p in plans)} sampling, "
          f"{sum(p.sweep == 'model' for p in plans)} model)")

    runs_dir = Path(args.runs_dir)
    ledger = RunLedger(runs_dir / "state.json")
    completed = failed = skipped = 0
    with ReplayRig(args.scenarios, args.repo_dir, runs_dir,
                   use_remote_repo=args.remote_repo) as rig:
        for plan in plans:
            if ledger.is_executed(plan.run_id):
                skipped += 1
                continue
            record = execute_plan(plan, rig, tasks, ledger)
            status = record.status
            if status == "completed":
                completed += 1
            else:
                failed += 1
            print(f"  {status:9s} {plan.run_id}")
        if args.remote_repo:
            methods = {t.method for t in rig.trace_store.by_direction("to_provider")}
            print(f"provider verbs observed through the proxy: {sorted(methods)}")
    print(f"executed {completed}, failed {failed}, skipped {skipped}\n")

    for fixture, sweep in (("table4_annotations.json", "sampling"),
                           ("table5_annotations.json", "model")):
        _, annotations = load_annotation_fixture(fixtures / fixture)
        print(render_report(annotations, plans, sweep).to_text())
        stats = summarize(annotations, plans)
        affected = {c: e["rows_affected"][sweep] for c, e in stats.items()
                    if e["rows_affected"][sweep]}
        print(f"{sweep} sweep rows affected per category: "
              f"{json.dumps(affected, indent=2)}\n")


if __name__ == "__main__":
    main()
