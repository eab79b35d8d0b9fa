"""`assist` command line: interactive chat, index building, servers, the
sweep harness and defect reporting."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .audit import AuditLog
from .chatclient import ChatCompletionsClient
from .docindex import DocIndex, RemoteEmbedder, build_index_from_dir
from .errors import AlreadyExecuted
from .gateway import make_gateway_app, sampling_presets_from_fixture
from .harness import (
    DefectAnnotation,
    DefectStore,
    RunLedger,
    RunPlan,
    build_matrix,
    default_tasks,
    execute_plan,
    load_annotation_fixture,
    load_model_set,
    load_sampling_rows,
    render_report,
    summarize,
)
from .orchestrator import Orchestrator, SamplingConfig
from .proxy import CapturingProxy, TraceStore
from .replay import LiveRig, ReplayRig
from .repoaccess import open_local_repo, open_remote_repo
from .scripted import load_scenarios, make_scripted_app
from .testing.gitlab_stub import make_provider_app
from .testing.serving import BackgroundServer
from .tools import build_repo_tool_registry

DEFAULT_FIXTURES = Path(__file__).resolve().parent.parent.parent / "fixtures"


def _sampling_option(f):
    f = click.option("--temperature", type=float, default=1.0, show_default=True)(f)
    f = click.option("--top-p", type=float, default=1.0, show_default=True)(f)
    f = click.option("--min-p", type=float, default=0.0, show_default=True)(f)
    return f


def _load_kb(kb_path: str | None) -> DocIndex | None:
    return DocIndex.load(kb_path) if kb_path else None


def _default_presets() -> dict:
    path = DEFAULT_FIXTURES / "table3_sampling.json"
    return sampling_presets_from_fixture(path) if path.exists() else {}


def _open_repo(repo_dir: str | None, provider_url: str | None,
               project_id: str, ref: str):
    if repo_dir:
        return open_local_repo(repo_dir, ref=ref)
    if provider_url:
        return open_remote_repo(provider_url, project_id, ref)
    raise click.UsageError("pass --repo-dir or --provider-url")


@click.group()
def main():
    """Repository-aware assistant workbench."""


# --- chat -----------------------------------------------------------------


@main.command()
@click.option("--model", "model_id", required=True)
@click.option("--endpoint", help="chat-completions base URL")
@click.option("--replay", "replay_dir", type=click.Path(exists=True),
              help="scenario directory; runs a local scripted endpoint instead of --endpoint")
@click.option("--scenario", "scenario_id", help="scenario id to bind in replay mode")
@click.option("--preset", help="sampling preset name from the sampling fixture")
@click.option("--kb", "kb_path", type=click.Path(exists=True), help="saved index file")
@click.option("--repo-dir", type=click.Path(exists=True))
@click.option("--provider-url", help="GitLab-v4-compatible API base URL")
@click.option("--project-id", default="fixture")
@click.option("--ref", default="workdir")
@click.option("--runs-dir", default="runs", show_default=True)
@click.option("--language", default="English", show_default=True)
@_sampling_option
def chat(model_id, endpoint, replay_dir, scenario_id, preset, kb_path, repo_dir,
         provider_url, project_id, ref, runs_dir, language,
         temperature, top_p, min_p):
    """Interactive chat with tool-call tracing (reads prompts from stdin)."""
    if preset:
        presets = _default_presets()
        if preset not in presets:
            raise click.UsageError(f"unknown preset {preset!r}; one of {sorted(presets)}")
        sampling = presets[preset]
    else:
        sampling = SamplingConfig(temperature, top_p, min_p)

    if replay_dir:
        rig = ReplayRig(replay_dir, repo_dir or "fixture_repo", runs_dir)
        scenarios = sorted(rig.scenarios)
        bound = scenario_id or scenarios[0]
        click.echo(f"replay mode: scenario {bound!r} (available: {', '.join(scenarios)})")
        session = rig.orchestrator.create_session(
            model_id=model_id, sampling=sampling,
            request_extra={"scenario": bound}, response_language=language,
        )
        orchestrator = rig.orchestrator
    else:
        if not endpoint:
            raise click.UsageError("pass --endpoint or --replay")
        repo = _open_repo(repo_dir, provider_url, project_id, ref)
        orchestrator = Orchestrator(
            client=ChatCompletionsClient(endpoint),
            audit=AuditLog(runs_dir),
            registry_factory=lambda: build_repo_tool_registry(repo),
            knowledge_base=_load_kb(kb_path),
            response_language=language,
        )
        session = orchestrator.create_session(model_id=model_id, sampling=sampling)

    click.echo(f"session {session.session_id} model={model_id} "
               f"sampling={session.sampling.as_dict()}")
    click.echo("type a prompt (ctrl-d to quit)")
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        result = orchestrator.send_user_message(session, text)
        for step in result.tool_trace:
            marker = "!" if step.is_error else "·"
            click.echo(f"  {marker} {step.call.tool_name}({json.dumps(step.call.arguments)})")
        click.echo(result.text)
        click.echo("")


# --- index ------------------------------------------------------------------


@main.group()
def index():
    """Build and inspect knowledge-base index files."""


@index.command("build")
@click.option("--docs", "docs_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--remote-embeddings", help="OpenAI-compatible embeddings base URL")
@click.option("--embedding-model", default="fallback", show_default=True)
def index_build(docs_dir, out_path, remote_embeddings, embedding_model):
    embedder = (RemoteEmbedder(remote_embeddings, embedding_model)
                if remote_embeddings else None)
    idx = build_index_from_dir(docs_dir, embedder)
    idx.save(out_path)
    click.echo(f"indexed {len(idx)} chunks from {docs_dir} -> {out_path}")


# --- servers ----------------------------------------------------------------


@main.command()
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--endpoint", required=True, help="upstream chat-completions base URL")
@click.option("--kb", "kb_path", type=click.Path(exists=True))
@click.option("--repo-dir", type=click.Path(exists=True))
@click.option("--provider-url")
@click.option("--project-id", default="fixture")
@click.option("--ref", default="workdir")
@click.option("--runs-dir", default="runs", show_default=True)
@click.option("--language", default="English", show_default=True)
def gateway(port, endpoint, kb_path, repo_dir, provider_url, project_id, ref,
            runs_dir, language):
    """Serve the session gateway consumed by the chat UI and harness."""
    repo = _open_repo(repo_dir, provider_url, project_id, ref)
    orchestrator = Orchestrator(
        client=ChatCompletionsClient(endpoint),
        audit=AuditLog(runs_dir),
        registry_factory=lambda: build_repo_tool_registry(repo),
        knowledge_base=_load_kb(kb_path),
        response_language=language,
    )
    app = make_gateway_app(orchestrator, _default_presets())
    server = BackgroundServer(app, port=port)
    click.echo(f"gateway listening on {server.base_url}")
    server.start()
    server._thread.join()


@main.command("scripted-model")
@click.option("--scenarios", "scenarios_dir", required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8091, show_default=True)
def scripted_model(scenarios_dir, port):
    """Serve the deterministic scripted chat-completions endpoint."""
    app = make_scripted_app(load_scenarios(scenarios_dir))
    server = BackgroundServer(app, port=port)
    click.echo(f"scripted model listening on {server.base_url}")
    server.start()
    server._thread.join()


@main.command()
@click.option("--repo-dir", required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8092, show_default=True)
@click.option("--project-id", default="fixture", show_default=True)
@click.option("--ref", default="workdir", show_default=True)
def provider(repo_dir, port, project_id, ref):
    """Serve a read-only GitLab-v4-compatible view of a directory."""
    app = make_provider_app(repo_dir, project_id=project_id, ref=ref)
    server = BackgroundServer(app, port=port)
    click.echo(f"provider listening on {server.base_url} "
               f"(project={project_id}, ref={ref})")
    server.start()
    server._thread.join()


@main.command("proxy")
@click.option("--upstream", required=True)
@click.option("--port", type=int, default=8093, show_default=True)
@click.option("--traces", "traces_dir", type=click.Path(), default="runs/traces",
              show_default=True)
@click.option("--direction", type=click.Choice(["to_model", "to_provider"]),
              default="to_provider", show_default=True)
def proxy_cmd(upstream, port, traces_dir, direction):
    """Capturing proxy that forwards verbatim and stores raw traces."""
    store = TraceStore(directory=Path(traces_dir))
    proxy = CapturingProxy(upstream, store, direction=direction, port=port)
    click.echo(f"proxy {proxy.base_url} -> {upstream} (traces in {traces_dir})")
    proxy.start()
    proxy._thread.join()


# --- sweep -------------------------------------------------------------------


def _plan_to_dict(plan: RunPlan) -> dict:
    return {
        "run_id": plan.run_id,
        "sweep": plan.sweep,
        "row_key": plan.row_key,
        "model_id": plan.model_id,
        "sampling": plan.sampling.as_dict(),
        "task_id": plan.task_id,
        "scenario_id": plan.scenario_id,
    }


def _plan_from_dict(raw: dict) -> RunPlan:
    return RunPlan(
        run_id=raw["run_id"],
        sweep=raw["sweep"],
        row_key=raw["row_key"],
        model_id=raw["model_id"],
        sampling=SamplingConfig(**raw["sampling"]),
        task_id=raw["task_id"],
        scenario_id=raw["scenario_id"],
    )


@main.group()
def sweep():
    """Plan and execute the evaluation matrix."""


@sweep.command("plan")
@click.option("--sampling", "sampling_path", required=True, type=click.Path(exists=True))
@click.option("--models", "models_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def sweep_plan(sampling_path, models_path, out_path):
    sweep_model, rows = load_sampling_rows(sampling_path)
    models, preset = load_model_set(models_path)
    plans = build_matrix(rows, models, default_tasks(), sweep_model, preset)
    Path(out_path).write_text(json.dumps([_plan_to_dict(p) for p in plans], indent=2))
    click.echo(f"{len(plans)} run plans -> {out_path}")


@sweep.command("run")
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True))
@click.option("--endpoint", help="live chat-completions base URL")
@click.option("--replay", "replay_dir", type=click.Path(exists=True),
              help="scenario directory for deterministic replay")
@click.option("--repo-dir", default="fixture_repo", show_default=True,
              type=click.Path(exists=True))
@click.option("--kb", "kb_path", type=click.Path(exists=True))
@click.option("--runs-dir", default="runs", show_default=True)
@click.option("--remote-repo/--local-repo", default=False, show_default=True,
              help="replay through the provider stub + capturing proxy")
def sweep_run(plan_path, endpoint, replay_dir, repo_dir, kb_path, runs_dir, remote_repo):
    plans = [_plan_from_dict(raw) for raw in json.loads(Path(plan_path).read_text())]
    tasks = default_tasks()
    run_ledger = RunLedger(Path(runs_dir) / "state.json")
    if replay_dir:
        rig = ReplayRig(replay_dir, repo_dir, runs_dir, use_remote_repo=remote_repo)
    elif endpoint:
        rig = LiveRig(endpoint, open_local_repo(repo_dir), runs_dir,
                      knowledge_base=_load_kb(kb_path))
    else:
        raise click.UsageError("pass --endpoint or --replay")
    completed = failed = skipped = 0
    with rig:
        for plan in plans:
            try:
                record = execute_plan(plan, rig, tasks, run_ledger)
            except AlreadyExecuted:
                skipped += 1
                click.echo(f"skip  {plan.run_id} (already executed)")
                continue
            if record.status == "completed":
                completed += 1
            else:
                failed += 1
            click.echo(f"{record.status:5s} {plan.run_id}")
    click.echo(f"done: {completed} completed, {failed} failed, {skipped} skipped")


# --- defects -----------------------------------------------------------------


@main.group()
def defects():
    """Record and render defect annotations."""


@defects.command("add")
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--run-id", required=True)
@click.option("--task", "task_id", required=True,
              type=click.Choice(["task1_ship_models", "task2_background_music"]))
@click.option("--category", required=True)
@click.option("--variant", type=click.Choice(["a", "b"]))
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--note", default="")
@click.option("--runs-state", type=click.Path(exists=True),
              help="state.json to enforce that the run exists")
def defects_add(store_path, run_id, task_id, category, variant, count, note, runs_state):
    known = None
    if runs_state:
        known = set(json.loads(Path(runs_state).read_text()))
    store = DefectStore(store_path, known_runs=known)
    store.add(DefectAnnotation(run_id, task_id, category, variant, count, note))
    click.echo(f"recorded {category} ({variant or 'no case'} x{count}) for {run_id}")


@defects.command("render")
@click.option("--sweep", "sweep_kind", required=True,
              type=click.Choice(["sampling", "model"]))
@click.option("--store", "store_path", type=click.Path(exists=True))
@click.option("--fixture", "fixture_path", type=click.Path(exists=True),
              help="annotation fixture file instead of a store")
@click.option("--sampling", "sampling_path", default=None, type=click.Path(exists=True))
@click.option("--models", "models_path", default=None, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]),
              default="text", show_default=True)
@click.option("--summary/--no-summary", default=False, show_default=True)
def defects_render(sweep_kind, store_path, fixture_path, sampling_path,
                   models_path, fmt, summary):
    sampling_path = sampling_path or DEFAULT_FIXTURES / "table3_sampling.json"
    models_path = models_path or DEFAULT_FIXTURES / "models.json"
    sweep_model, rows = load_sampling_rows(sampling_path)
    models, preset = load_model_set(models_path)
    plans = build_matrix(rows, models, default_tasks(), sweep_model, preset)
    if fixture_path:
        _, annotations = load_annotation_fixture(fixture_path)
    elif store_path:
        annotations = DefectStore(store_path).annotations
    else:
        raise click.UsageError("pass --store or --fixture")
    table = render_report(annotations, plans, sweep_kind)
    click.echo(table.to_text() if fmt == "text" else table.to_csv(), nl=False)
    if summary:
        stats = summarize(
            [a for a in annotations if a.run_id.startswith(f"{sweep_kind}--")], plans
        )
        click.echo("\nper-category summary:")
        for category, entry in stats.items():
            if entry["total_count"]:
                click.echo(
                    f"  {category}: rows affected {entry['rows_affected'][sweep_kind]}, "
                    f"total {entry['total_count']}"
                )


if __name__ == "__main__":
    main()
