"""Evaluation harness: the sampling/model sweep matrix over the two tasks,
exactly-once plan execution, defect annotations against the twelve-category
catalog, and table/summary rendering.

Annotation is manual-input data; the harness stores and renders human coding,
it never auto-detects defects.
"""
from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AlreadyExecuted, DuplicatePlan, IllegalVariant, UnknownRun
from .orchestrator import SamplingConfig
from .replay import ReplayRig

TASK1 = "task1_ship_models"
TASK2 = "task2_background_music"
TASK_IDS = (TASK1, TASK2)

# evaluation prompts, issued verbatim; task 2 runs both within the same chat
TASK_PROMPTS = {
    TASK1: (
        "Ships are currently rendered as boxes whose length corresponds to ship "
        "size. Add a 3D model representation that assigns models based on ship "
        "length. If no model exists for a given length (or if parameters "
        "change), revert to the box representation to keep the game functional.",
    ),
    TASK2: (
        "How can I implement background music in the game?",
        "How can I implement a way to enable or disable the background music "
        "independently of the sound effects? Use the class Menu.java.",
    ),
}

DEFAULT_SCENARIO_BINDING = {TASK1: "doc-only", TASK2: "menu-toggle"}

CATEGORIES = (
    "hallucination",
    "tool_misuse",
    "task_misunderstanding",
    "insufficient_robustness",
    "use_before_initialization",
    "duplicate_variable_declaration",
    "missing_resource_entry",
    "type_mismatched_comparison",
    "invalid_invocation",
    "integration_omission",
    "wrapper_only_method",
    "code_duplication",
)

CATEGORY_TITLES = {
    "hallucination": "Hallucination",
    "tool_misuse": "Tool misuse",
    "task_misunderstanding": "Task misunderstanding",
    "insufficient_robustness": "Insufficient robustness",
    "use_before_initialization": "Use-before-initialization",
    "duplicate_variable_declaration": "Duplicate variable declaration",
    "missing_resource_entry": "Missing resource entry",
    "type_mismatched_comparison": "Type-mismatched comparison",
    "invalid_invocation": "Invalid invocation",
    "integration_omission": "Integration omission",
    "wrapper_only_method": "Wrapper-only method",
    "code_duplication": "Code duplication",
}

# only these categories define case variants a/b
VARIANT_CATEGORIES = frozenset({
    "hallucination",
    "tool_misuse",
    "insufficient_robustness",
    "use_before_initialization",
})


@dataclass(frozen=True)
class TaskFixture:
    task_id: str
    prompts: tuple[str, ...]

    def __post_init__(self):
        if self.task_id == TASK1 and len(self.prompts) != 1:
            raise ValueError("task 1 carries exactly one prompt")
        if self.task_id == TASK2 and len(self.prompts) != 2:
            raise ValueError("task 2 carries exactly two prompts, issued in the same chat")


def default_tasks() -> dict[str, TaskFixture]:
    return {tid: TaskFixture(tid, TASK_PROMPTS[tid]) for tid in TASK_IDS}


@dataclass(frozen=True)
class SamplingRow:
    label: str
    group: str  # standard | isolated | combined
    config: SamplingConfig


def load_sampling_rows(path: str | Path) -> tuple[str, list[SamplingRow]]:
    """Returns (sweep_model, rows) from a sampling fixture file."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = [
        SamplingRow(
            label=r["label"],
            group=r["group"],
            config=SamplingConfig(r["temperature"], r["top_p"], r["min_p"]),
        )
        for r in raw["rows"]
    ]
    return raw["sweep_model"], rows


def load_model_set(path: str | Path) -> tuple[list[str], SamplingConfig]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = raw["model_sweep_sampling"]
    return list(raw["models"]), SamplingConfig(cfg["temperature"], cfg["top_p"], cfg["min_p"])


def slugify(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def make_run_id(sweep: str, row_key: str, task_id: str) -> str:
    return f"{sweep}--{slugify(row_key)}--{task_id}"


@dataclass(frozen=True)
class RunPlan:
    run_id: str
    sweep: str  # "sampling" | "model"
    row_key: str  # sampling row label, or model id
    model_id: str
    sampling: SamplingConfig
    task_id: str
    scenario_id: str


def build_matrix(sampling_rows: list[SamplingRow], model_ids: list[str],
                 tasks: dict[str, TaskFixture], sweep_model: str,
                 model_sweep_sampling: SamplingConfig,
                 scenario_binding: dict[str, str] | None = None) -> list[RunPlan]:
    """Sampling sweep (each config x fixed model) plus model sweep (each model
    x fixed preset), every plan crossed with both tasks."""
    binding = scenario_binding or DEFAULT_SCENARIO_BINDING
    plans: list[RunPlan] = []
    seen: set[tuple] = set()

    def add(plan: RunPlan) -> None:
        key = (plan.model_id, plan.sampling, plan.task_id)
        if key in seen:
            raise DuplicatePlan(f"duplicate plan for {key}")
        seen.add(key)
        plans.append(plan)

    for row in sampling_rows:
        for task_id in tasks:
            add(RunPlan(
                run_id=make_run_id("sampling", row.label, task_id),
                sweep="sampling",
                row_key=row.label,
                model_id=sweep_model,
                sampling=row.config,
                task_id=task_id,
                scenario_id=binding[task_id],
            ))
    for model_id in model_ids:
        for task_id in tasks:
            add(RunPlan(
                run_id=make_run_id("model", model_id, task_id),
                sweep="model",
                row_key=model_id,
                model_id=model_id,
                sampling=model_sweep_sampling,
                task_id=task_id,
                scenario_id=binding[task_id],
            ))
    return plans


@dataclass
class RunRecord:
    run_id: str
    status: str  # "completed" | "failed"
    ledger_path: str | None
    content_hash: str | None
    error: str | None = None


class RunLedger:
    """Completed-run registry; the exactly-once guard lives here."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._records: dict[str, RunRecord] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            for run_id, rec in json.loads(self.path.read_text()).items():
                self._records[run_id] = RunRecord(**rec)

    def is_executed(self, run_id: str) -> bool:
        with self._lock:
            return run_id in self._records

    def record(self, record: RunRecord) -> None:
        with self._lock:
            if record.run_id in self._records:
                raise AlreadyExecuted(record.run_id)
            self._records[record.run_id] = record
            self._flush()

    def get(self, run_id: str) -> RunRecord:
        with self._lock:
            if run_id not in self._records:
                raise UnknownRun(run_id)
            return self._records[run_id]

    def run_ids(self) -> set[str]:
        with self._lock:
            return set(self._records)

    def _flush(self) -> None:
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(
                {rid: vars(rec) for rid, rec in sorted(self._records.items())},
                indent=2,
            ))


def execute_plan(plan: RunPlan, rig: ReplayRig, tasks: dict[str, TaskFixture],
                 run_ledger: RunLedger) -> RunRecord:
    """One fresh chat per plan; failures are recorded, never retried."""
    if run_ledger.is_executed(plan.run_id):
        raise AlreadyExecuted(plan.run_id)
    task = tasks[plan.task_id]
    try:
        outcome = rig.run_scenario(
            plan.scenario_id,
            session_id=plan.run_id,
            model_id=plan.model_id,
            sampling=plan.sampling,
            prompts=list(task.prompts),
        )
        record = RunRecord(plan.run_id, "completed",
                           str(outcome.ledger_path), outcome.content_hash)
    except Exception as exc:
        record = RunRecord(plan.run_id, "failed", None, None, error=str(exc))
    run_ledger.record(record)
    return record


# --- defect annotations -------------------------------------------------


@dataclass(frozen=True)
class DefectAnnotation:
    run_id: str
    task_id: str
    category: str
    variant: str | None  # "a" | "b", only for categories with case variants
    count: int
    note: str = ""

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown defect category {self.category!r}")
        if self.task_id not in TASK_IDS:
            raise ValueError(f"unknown task {self.task_id!r}")
        if self.variant is not None:
            if self.variant not in ("a", "b"):
                raise IllegalVariant(f"variant must be 'a' or 'b', got {self.variant!r}")
            if self.category not in VARIANT_CATEGORIES:
                raise IllegalVariant(
                    f"category {self.category} has no case variants"
                )
        if self.count < 1:
            raise ValueError("count must be >= 1")


class DefectStore:
    """Append-only annotation store; run existence is enforced when a run
    registry is attached (fixture annotation sets load without one)."""

    def __init__(self, path: str | Path | None = None,
                 known_runs: set[str] | None = None):
        self.path = Path(path) if path else None
        self.known_runs = known_runs
        self.annotations: list[DefectAnnotation] = []
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    self.annotations.append(DefectAnnotation(**json.loads(line)))

    def add(self, annotation: DefectAnnotation) -> DefectAnnotation:
        if self.known_runs is not None and annotation.run_id not in self.known_runs:
            raise UnknownRun(annotation.run_id)
        with self._lock:
            self.annotations.append(annotation)
            if self.path:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(vars(annotation)) + "\n")
        return annotation


def load_annotation_fixture(path: str | Path) -> tuple[str, list[DefectAnnotation]]:
    """Fixture rows carry (row, task, category, variant, count); run ids are
    derived with the same naming the matrix uses."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    sweep = raw["sweep"]
    annotations = [
        DefectAnnotation(
            run_id=make_run_id(sweep, r["row"], r["task"]),
            task_id=r["task"],
            category=r["category"],
            variant=r.get("variant"),
            count=r["count"],
        )
        for r in raw["annotations"]
    ]
    return sweep, annotations


# --- rendering ----------------------------------------------------------


def render_entry(variant: str | None, count: int) -> str:
    if variant is not None:
        return variant if count == 1 else f"{variant} x{count}"
    return "x" if count == 1 else f"x{count}"


def parse_entry(text: str) -> tuple[str | None, int]:
    text = text.strip()
    m = re.fullmatch(r"([ab]) x(\d+)", text)
    if m:
        return m.group(1), int(m.group(2))
    if text in ("a", "b"):
        return text, 1
    m = re.fullmatch(r"x(\d+)", text)
    if m:
        return None, int(m.group(1))
    if text == "x":
        return None, 1
    raise ValueError(f"unparseable defect entry {text!r}")


@dataclass
class DefectTable:
    sweep: str
    row_labels: list[str]
    # cells[row_label][category] = {task_id: [(variant, count), ...]}
    cells: dict[str, dict[str, dict[str, list[tuple[str | None, int]]]]] = field(default_factory=dict)

    def cell_text(self, row: str, category: str) -> str:
        per_task = self.cells.get(row, {}).get(category, {})
        parts = []
        for task_id, tag in ((TASK1, "T1"), (TASK2, "T2")):
            for variant, count in per_task.get(task_id, []):
                parts.append(f"{tag}:{render_entry(variant, count)}")
        return "; ".join(parts)

    def to_text(self) -> str:
        headers = ["Row"] + [CATEGORY_TITLES[c] for c in CATEGORIES]
        grid = [headers]
        for row in self.row_labels:
            grid.append([row] + [self.cell_text(row, c) for c in CATEGORIES])
        widths = [max(len(line[i]) for line in grid) for i in range(len(headers))]
        rendered = []
        for line_no, line in enumerate(grid):
            rendered.append(" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)))
            if line_no == 0:
                rendered.append("-+-".join("-" * w for w in widths))
        return f"{self.sweep} sweep defect table\n" + "\n".join(rendered) + "\n"

    def to_csv(self) -> str:
        lines = ["row,category,task,variant,count"]
        for row in self.row_labels:
            for category in CATEGORIES:
                per_task = self.cells.get(row, {}).get(category, {})
                for task_id in TASK_IDS:
                    for variant, count in per_task.get(task_id, []):
                        lines.append(f"{row},{category},{task_id},{variant or ''},{count}")
        return "\n".join(lines) + "\n"


def render_report(annotations: list[DefectAnnotation], plans: list[RunPlan],
                  sweep: str) -> DefectTable:
    """One row per configuration (matrix order) or model (alphabetical);
    annotations aggregate by (row, task, category, variant)."""
    sweep_plans = [p for p in plans if p.sweep == sweep]
    by_run = {p.run_id: p for p in sweep_plans}
    if sweep == "model":
        row_labels = sorted({p.row_key for p in sweep_plans})
    else:
        row_labels = list(dict.fromkeys(p.row_key for p in sweep_plans))
    table = DefectTable(sweep=sweep, row_labels=row_labels)
    totals: dict[tuple, int] = {}
    for ann in annotations:
        plan = by_run.get(ann.run_id)
        if plan is None:
            if any(ann.run_id.startswith(f"{s}--") for s in ("sampling", "model") if s != sweep):
                continue  # annotation belongs to the other sweep
            raise UnknownRun(f"annotation references unplanned run {ann.run_id}")
        if ann.task_id != plan.task_id:
            raise ValueError(f"annotation task {ann.task_id} != plan task {plan.task_id}")
        key = (plan.row_key, ann.category, ann.task_id, ann.variant)
        totals[key] = totals.get(key, 0) + ann.count
    for (row, category, task_id, variant), count in totals.items():
        per_cat = table.cells.setdefault(row, {}).setdefault(category, {})
        per_cat.setdefault(task_id, []).append((variant, count))
    for row_cells in table.cells.values():
        for per_cat in row_cells.values():
            for entries in per_cat.values():
                entries.sort(key=lambda e: (e[0] is None, e[0] or ""))
    return table


def parse_text_table(text: str) -> dict[tuple, int]:
    """Inverse of DefectTable.to_text: multiset keyed by
    (row, category, task, variant) -> count."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = [h.strip() for h in lines[1].split(" | ")]
    title_to_cat = {v: k for k, v in CATEGORY_TITLES.items()}
    out: dict[tuple, int] = {}
    for line in lines[3:]:
        cells = [c.strip() for c in line.split(" | ")]
        row = cells[0]
        for title, cell in zip(header[1:], cells[1:]):
            if not cell:
                continue
            category = title_to_cat[title]
            for part in cell.split("; "):
                tag, entry = part.split(":", 1)
                task_id = TASK1 if tag == "T1" else TASK2
                variant, count = parse_entry(entry)
                out[(row, category, task_id, variant)] = count
    return out


def summarize(annotations: list[DefectAnnotation], plans: list[RunPlan]) -> dict:
    """Per category: rows affected, total count, split by task and sweep."""
    by_run = {p.run_id: p for p in plans}
    summary = {
        c: {
            "rows_affected": {"sampling": set(), "model": set()},
            "total_count": 0,
            "by_task": {TASK1: 0, TASK2: 0},
        }
        for c in CATEGORIES
    }
    for ann in annotations:
        plan = by_run.get(ann.run_id)
        if plan is None:
            raise UnknownRun(ann.run_id)
        entry = summary[ann.category]
        entry["rows_affected"][plan.sweep].add(plan.row_key)
        entry["total_count"] += ann.count
        entry["by_task"][ann.task_id] += ann.count
    for entry in summary.values():
        entry["rows_affected"] = {
            sweep: len(rows) for sweep, rows in entry["rows_affected"].items()
        }
    return summary
