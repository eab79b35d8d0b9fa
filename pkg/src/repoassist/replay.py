"""Deterministic replay runs: scripted endpoint + pinned repo + frozen clock.

A rig owns the scripted model server, the repository snapshot (local dir, or
a provider stub routed through the capturing proxy when the run should prove
read-only traffic), the fallback-embedded knowledge base, and a replay-clock
audit log. Executing the same scenario twice through fresh rigs yields
byte-identical ledgers.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .audit import AuditLog, replay_clock
from .chatclient import ChatCompletionsClient
from .docindex import DocIndex, build_index_from_dir
from .errors import ScenarioError
from .orchestrator import Orchestrator, SamplingConfig, TurnResult
from .proxy import CapturingProxy, LinkCell, TraceStore
from .repoaccess import open_local_repo, open_remote_repo
from .scripted import Scenario, load_scenarios, make_scripted_app
from .testing.gitlab_stub import make_provider_app
from .testing.serving import BackgroundServer
from .tools import build_repo_tool_registry

REPLAY_REF = "fixture-main"
REPLAY_MODEL_ID = "scripted-model"


@dataclass
class RunOutcome:
    session_id: str
    ledger_path: Path
    content_hash: str
    turns: list[TurnResult]


class ReplayRig:
    def __init__(self, scenarios_dir: str | Path, repo_dir: str | Path,
                 runs_dir: str | Path, docs_subdir: str = "docs",
                 use_remote_repo: bool = False, known_models: set[str] | None = None):
        self.scenarios: dict[str, Scenario] = load_scenarios(scenarios_dir)
        self._stack: list = []

        self.model_server = BackgroundServer(make_scripted_app(self.scenarios)).start()
        self._stack.append(self.model_server)

        self.trace_store = TraceStore()
        self.link_cell = LinkCell()
        if use_remote_repo:
            provider_app = make_provider_app(repo_dir, project_id="fixture", ref=REPLAY_REF)
            self.provider_server = BackgroundServer(provider_app).start()
            self._stack.append(self.provider_server)
            self.provider_proxy = CapturingProxy(
                self.provider_server.base_url, self.trace_store,
                direction="to_provider", link_source=self.link_cell,
            ).start()
            self._stack.append(self.provider_proxy)
            self.repo = open_remote_repo(self.provider_proxy.base_url, "fixture", REPLAY_REF)
        else:
            self.provider_server = None
            self.provider_proxy = None
            self.repo = open_local_repo(repo_dir, ref=REPLAY_REF)

        docs_dir = Path(repo_dir) / docs_subdir
        self.knowledge_base: DocIndex = build_index_from_dir(docs_dir).freeze()

        self.audit = AuditLog(runs_dir, clock=replay_clock)
        self.client = ChatCompletionsClient(
            self.model_server.base_url, trace_store=self.trace_store
        )
        self.orchestrator = Orchestrator(
            client=self.client,
            audit=self.audit,
            registry_factory=lambda: build_repo_tool_registry(self.repo),
            knowledge_base=self.knowledge_base,
            known_models=known_models,
            link_cell=self.link_cell,
        )

    # -- lifecycle -------------------------------------------------------

    def close(self) -> None:
        while self._stack:
            self._stack.pop().stop()

    def __enter__(self) -> "ReplayRig":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- execution -------------------------------------------------------

    def run_scenario(self, scenario_id: str, session_id: str | None = None,
                     model_id: str = REPLAY_MODEL_ID,
                     sampling: SamplingConfig | None = None,
                     prompts: list[str] | None = None) -> RunOutcome:
        if scenario_id not in self.scenarios:
            raise ScenarioError(f"unknown scenario {scenario_id!r}")
        scenario = self.scenarios[scenario_id]
        driving = list(prompts if prompts is not None else scenario.prompts)
        if not driving:
            raise ScenarioError(f"scenario {scenario_id} has no prompts to issue")
        session = self.orchestrator.create_session(
            model_id=model_id,
            sampling=sampling,
            session_id=session_id or scenario_id,
            request_extra={"scenario": scenario_id},
        )
        turns = [
            self.orchestrator.send_user_message(session, prompt) for prompt in driving
        ]
        self.orchestrator.close_session(session.session_id)
        ledger = self.audit.export_run(session.session_id)
        return RunOutcome(
            session_id=session.session_id,
            ledger_path=ledger,
            content_hash=self.audit.content_hash(session.session_id),
            turns=turns,
        )


class LiveRig:
    """Same run surface as ReplayRig, pointed at a live chat endpoint.

    Scenario bindings are accepted and ignored (a real model needs no turn
    script); timestamps are real and the knowledge base may be a prebuilt
    index file instead of a directory scan.
    """

    def __init__(self, endpoint: str, repo, runs_dir: str | Path,
                 knowledge_base: DocIndex | None = None,
                 known_models: set[str] | None = None):
        self.repo = repo
        self.trace_store = TraceStore()
        self.audit = AuditLog(runs_dir)
        self.client = ChatCompletionsClient(endpoint, trace_store=self.trace_store)
        self.knowledge_base = knowledge_base
        self.orchestrator = Orchestrator(
            client=self.client,
            audit=self.audit,
            registry_factory=lambda: build_repo_tool_registry(self.repo),
            knowledge_base=knowledge_base,
            known_models=known_models,
        )

    def close(self) -> None:
        pass

    def __enter__(self) -> "LiveRig":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def run_scenario(self, scenario_id: str, session_id: str | None = None,
                     model_id: str = REPLAY_MODEL_ID,
                     sampling: SamplingConfig | None = None,
                     prompts: list[str] | None = None) -> RunOutcome:
        if not prompts:
            raise ValueError("live runs need explicit prompts")
        session = self.orchestrator.create_session(
            model_id=model_id, sampling=sampling, session_id=session_id,
        )
        turns = [
            self.orchestrator.send_user_message(session, prompt) for prompt in prompts
        ]
        self.orchestrator.close_session(session.session_id)
        ledger = self.audit.export_run(session.session_id)
        return RunOutcome(
            session_id=session.session_id,
            ledger_path=ledger,
            content_hash=self.audit.content_hash(session.session_id),
            turns=turns,
        )
