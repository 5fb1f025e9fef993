"""Attack-grid sweeps: forge, detect and score once per parameter."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

from .config import DetectorConfig, worker_count
from .image_core import RasterImage, load_image, quantize
from .matching import detect
from .metrics import MetricsReport, compute_metrics
from .tamper import ATTACK_PARAMS, AttackOp, ForgeryError, ForgerySpec, apply_forgery, load_specs

TARGETS = ("patch", "whole")
PATCH_ONLY = ("shift", "rotate")
CSV_COLUMNS = ["attack", "param", "target", "d_percent", "f_percent", "error"]


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class SweepPlan:
    image: Path
    spec: Path
    attack: str
    params: tuple
    targets: tuple[str, ...] = ("patch",)
    config: DetectorConfig = field(default_factory=DetectorConfig)
    seed: int = 0
    axis: Optional[str] = None

    def __post_init__(self):
        if self.attack not in ATTACK_PARAMS:
            raise PlanError(f"unknown attack {self.attack!r}; expected one of {sorted(ATTACK_PARAMS)}")
        if not self.params:
            raise PlanError("parameter list is empty")
        for t in self.targets:
            if t not in TARGETS:
                raise PlanError(f"unknown target {t!r}; expected patch or whole")
            if t == "whole" and self.attack in PATCH_ONLY:
                raise PlanError(f"{self.attack} applies to the copied patch only")
        if self.attack == "shift" and self.axis not in (None, "horizontal", "vertical"):
            raise PlanError(f"shift axis must be horizontal or vertical, got {self.axis!r}")
        for p in self.params:
            try:
                self.op(p)
            except ForgeryError as exc:
                raise PlanError(str(exc)) from None

    def op(self, param) -> AttackOp:
        if self.attack == "shift" and not isinstance(param, (list, tuple)):
            if self.axis is None:
                raise ForgeryError("scalar shift parameters need an axis")
            param = (0, param) if self.axis == "horizontal" else (param, 0)
        return AttackOp(self.attack, param)


def load_plan(path: Union[str, Path]) -> SweepPlan:
    """Read a JSON sweep plan; file paths in it are relative to the plan."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PlanError(f"{path}: invalid plan ({exc})") from None
    missing = [k for k in ("image", "spec", "attack", "params") if k not in doc]
    if missing:
        raise PlanError(f"{path}: plan is missing {', '.join(missing)}")
    targets = doc.get("target", "patch")
    targets = (targets,) if isinstance(targets, str) else tuple(targets)
    try:
        config = DetectorConfig().with_overrides(**doc.get("config", {}))
    except TypeError as exc:
        raise PlanError(f"{path}: bad config ({exc})") from None
    return SweepPlan(
        image=path.parent / doc["image"],
        spec=path.parent / doc["spec"],
        attack=doc["attack"],
        params=tuple(tuple(p) if isinstance(p, list) else p for p in doc["params"]),
        targets=targets,
        config=config,
        seed=int(doc.get("seed", 0)),
        axis=doc.get("axis"),
    )


@dataclass(frozen=True)
class SweepRow:
    attack: str
    param: str
    target: str
    metrics: Optional[MetricsReport] = None
    error: str = ""

    def as_csv(self) -> list[str]:
        if self.metrics is None:
            return [self.attack, self.param, self.target, "", "", self.error]
        return [
            self.attack, self.param, self.target,
            f"{self.metrics.d_percent:.4f}", f"{self.metrics.f_percent:.4f}", "",
        ]


def format_param(op: AttackOp) -> str:
    if op.kind == "shift":
        return f"{op.value[0]}:{op.value[1]}"
    return f"{op.value:g}"


def attacked_specs(specs: Sequence[ForgerySpec], op: AttackOp, target: str) -> list[ForgerySpec]:
    """Add ``op`` to every copy (patch) or once after all pastes (whole)."""
    if target == "patch":
        return [replace(s, pre_paste_ops=s.pre_paste_ops + (op,)) for s in specs]
    last = specs[-1]
    return list(specs[:-1]) + [replace(last, post_paste_ops=last.post_paste_ops + (op,))]


def evaluate_forgery(
    base: RasterImage, specs: Sequence[ForgerySpec], config: DetectorConfig, seed: int
) -> MetricsReport:
    """Forge, quantize to 8 bits as a saved PNG would be, detect and score."""
    forged, truth = apply_forgery(base, specs, seed)
    mask, _ = detect(quantize(forged), config)
    return compute_metrics(mask, truth)


def _run_row(base, specs, plan: SweepPlan, target: str, param) -> SweepRow:
    label = str(param)
    try:
        op = plan.op(param)
        label = format_param(op)
        report = evaluate_forgery(base, attacked_specs(specs, op, target), plan.config, plan.seed)
        return SweepRow(plan.attack, label, target, report)
    except (ValueError, OSError) as exc:
        return SweepRow(plan.attack, label, target, error=str(exc) or type(exc).__name__)


def run_sweep(plan: SweepPlan, workers: Optional[int] = None) -> list[SweepRow]:
    """One row per (target, parameter), in plan order."""
    base = load_image(plan.image)
    specs = load_specs(plan.spec)
    jobs = [(t, p) for t in plan.targets for p in plan.params]
    n = min(worker_count(workers), len(jobs))
    if n == 1:
        return [_run_row(base, specs, plan, t, p) for t, p in jobs]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(lambda job: _run_row(base, specs, plan, *job), jobs))


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()
