"""End-to-end experiments: generate, split, train, predict, compare.

Reports carry the per-row table (normalized and physical) from which every
aggregate metric can be recomputed, see :func:`compute_metrics`.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .circuits import (
    ann_architecture,
    circuit_class,
    circuit_from_features,
    feature_names,
    features_of,
    target_names,
)
from .data import (
    Dataset,
    NormalizationContext,
    SamplerConfig,
    apply_noise_offset,
    default_sampler,
    denormalize_features,
    generate_dataset,
    normalize_features,
    normalize_targets,
    split_train_test,
)
from .mlp import NetworkWeights, TrainConfig, TrainReport, forward_batch, init_network, train
from .solver import BranchResponse, solve_amplifier_electronic, solve_ohm

__all__ = [
    "SATURATION_LEVEL",
    "THRESHOLDS",
    "ExperimentConfig",
    "ExperimentReport",
    "SweepCriterion",
    "SweepHit",
    "SweepTooLargeError",
    "compute_metrics",
    "default_ohm_grid",
    "emit_report",
    "evaluate",
    "ohm_dataset",
    "run_amplifier_experiment",
    "run_class_experiment",
    "run_ohm_experiment",
    "sweep",
]

# Held-out normalized RMSE regarded as a successful reproduction.
THRESHOLDS = {
    "1a": 0.05,
    "2a": 0.05,
    "1b": 0.15,
    "1c": 0.15,
    "2b": 0.15,
    "2c": 0.15,
    "amp_electrical": 0.05,
    "amp_electronic": 0.05,
    "ohm": 0.05,
}

# Normalized targets above this are out of practical reach of a sigmoid.
SATURATION_LEVEL = 0.95


@dataclass(frozen=True)
class ExperimentConfig:
    sampler: SamplerConfig
    train: TrainConfig = TrainConfig()
    test_fraction: float = 0.2
    seed: int = 0
    noise_offset: float = 0.0
    noise_all: bool = False

    @classmethod
    def default(cls, class_id: str, seed: int = 0, **kw) -> "ExperimentConfig":
        return cls(sampler=default_sampler(class_id, seed=seed), train=TrainConfig(seed=seed), seed=seed, **kw)


@dataclass
class ExperimentReport:
    label: str
    class_id: str
    n_train: int
    n_test: int
    train_report: TrainReport
    feature_names: list[str]
    target_names: list[str]
    features_phys: np.ndarray
    true_norm: np.ndarray
    pred_norm: np.ndarray
    true_phys: np.ndarray
    pred_phys: np.ndarray
    metrics: dict
    threshold: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool | None:
        if self.threshold is None or self.metrics["nrmse"] is None:
            return None
        return self.metrics["nrmse"] <= self.threshold


def _phase_error(pred_deg, true_deg):
    """Signed phase difference wrapped onto [-180, 180)."""
    return (np.asarray(pred_deg) - np.asarray(true_deg) + 180.0) % 360.0 - 180.0


def compute_metrics(true_norm, pred_norm, true_phys, pred_phys) -> dict:
    """Aggregate errors of a per-row table; ``None`` when the table is empty."""
    true_norm = np.asarray(true_norm, dtype=float)
    n_out = true_norm.shape[1] if true_norm.ndim == 2 else 1
    if true_norm.size == 0:
        return {
            "nrmse": None,
            "max_abs_err_norm": None,
            "mean_abs_current_err": None,
            "mean_abs_phase_err": None,
        }
    pred_norm = np.asarray(pred_norm, dtype=float)
    true_phys = np.asarray(true_phys, dtype=float)
    pred_phys = np.asarray(pred_phys, dtype=float)
    err = pred_norm - true_norm
    out = {
        "nrmse": float(np.sqrt(np.mean(err**2))),
        "max_abs_err_norm": float(np.max(np.abs(err))),
        "mean_abs_current_err": float(np.mean(np.abs(pred_phys[:, 0] - true_phys[:, 0]))),
        "mean_abs_phase_err": None,
    }
    if n_out > 1:
        out["mean_abs_phase_err"] = float(np.mean(np.abs(_phase_error(pred_phys[:, 1], true_phys[:, 1]))))
    return out


def _to_phys(targets: np.ndarray, ctx: NormalizationContext) -> np.ndarray:
    phys = np.empty_like(targets)
    phys[:, 0] = targets[:, 0] * 0.1 * ctx.e_max
    if targets.shape[1] > 1:
        phys[:, 1] = 360.0 * targets[:, 1] - 180.0
    return phys


def evaluate(net: NetworkWeights, test: Dataset, *, label: str | None = None, train_report=None,
             n_train: int = 0, input_offset: float = 0.0, output_offset: float = 0.0,
             threshold: float | None = None) -> ExperimentReport:
    """Compare network predictions on ``test`` with its hidden targets.

    ``input_offset`` is added to the test features before prediction and
    ``output_offset`` subtracted from the raw network output, mirroring any
    noise offset used in training.
    """
    ctx = test.context
    true_norm = test.clean_targets()
    n_out = len(test.target_names)
    if len(test):
        pred_norm = forward_batch(net, test.features + input_offset) - output_offset
    else:
        pred_norm = np.zeros((0, n_out))
    true_phys = _to_phys(true_norm, ctx)
    pred_phys = _to_phys(pred_norm, ctx)
    warnings = []
    n_sat = int(np.sum(true_norm[:, 0] > SATURATION_LEVEL))
    if n_sat:
        warnings.append(f"{n_sat} held-out current targets exceed {SATURATION_LEVEL} (sigmoid ceiling)")
    return ExperimentReport(
        label=label or test.cls,
        class_id=test.cls,
        n_train=n_train,
        n_test=len(test),
        train_report=train_report or TrainReport(),
        feature_names=test.feature_names,
        target_names=test.target_names,
        features_phys=denormalize_features(test.cls, test.features, ctx).reshape(len(test), len(test.feature_names)),
        true_norm=true_norm,
        pred_norm=pred_norm,
        true_phys=true_phys,
        pred_phys=pred_phys,
        metrics=compute_metrics(true_norm, pred_norm, true_phys, pred_phys),
        threshold=threshold,
        warnings=warnings,
    )


def _train_warnings(train_set: Dataset) -> list[str]:
    n_sat = int(np.sum(train_set.clean_targets()[:, 0] > SATURATION_LEVEL))
    if n_sat:
        return [f"{n_sat} training current targets exceed {SATURATION_LEVEL} (sigmoid ceiling)"]
    return []


def train_and_evaluate(dataset: Dataset, cfg: ExperimentConfig, label: str | None = None,
                       threshold: float | None = None, test_rows=None):
    """Split, train and evaluate; returns ``(net, report)``.

    ``test_rows`` forces specific row indices into the held-out set; the
    remaining rows are split as usual.
    """
    if test_rows is None:
        train_set, test_set = split_train_test(dataset, cfg.test_fraction, cfg.seed)
    else:
        forced = np.asarray(sorted(set(int(i) for i in test_rows)), dtype=int)
        rest = np.setdiff1d(np.arange(len(dataset)), forced)
        tr, te = split_train_test(dataset.subset(rest), cfg.test_fraction, cfg.seed)
        train_set, test_set = tr, _concat(dataset.subset(forced), te)
    train_set = apply_noise_offset(train_set, cfg.noise_offset)
    net = init_network(ann_architecture(dataset.cls), cfg.seed)
    net, treport = train(net, train_set, cfg.train)
    report = evaluate(
        net,
        test_set,
        label=label,
        train_report=treport,
        n_train=len(train_set),
        input_offset=cfg.noise_offset if cfg.noise_all else 0.0,
        output_offset=cfg.noise_offset,
        threshold=threshold,
    )
    report.warnings = _train_warnings(train_set) + report.warnings
    return net, report


def _concat(a: Dataset, b: Dataset) -> Dataset:
    circuits = None if a.circuits is None or b.circuits is None else a.circuits + b.circuits
    return replace(a, features=np.vstack([a.features, b.features]),
                   targets=np.vstack([a.targets, b.targets]), circuits=circuits)


def run_class_experiment(class_id: str, cfg: ExperimentConfig | None = None):
    """Full pipeline for one circuit class; returns ``(net, dataset, report)``."""
    class_id = circuit_class(class_id).id
    cfg = cfg or ExperimentConfig.default(class_id)
    dataset = generate_dataset(cfg.sampler)
    net, report = train_and_evaluate(dataset, cfg, threshold=THRESHOLDS.get(class_id))
    return net, dataset, report


# -- Ohm's law ------------------------------------------------------------------


def default_ohm_grid():
    """Quantized (V, R) lattice restricted to sigmoid-representable currents.

    V runs 1..25 V in 1 V steps and R 4..20 ohm in 1 ohm steps; points whose
    normalized current ``(V / R) / (0.1 * 25)`` would exceed 0.9 are dropped.
    """
    volts = np.arange(1.0, 26.0)
    ohms = np.arange(4.0, 21.0)
    e_max = volts.max()
    return [(float(v), float(r)) for v in volts for r in ohms if (v / r) / (0.1 * e_max) <= 0.9]


def ohm_dataset(grid: Sequence[tuple[float, float]], r_max: float | None = None, e_max: float | None = None) -> Dataset:
    """Class-1a dataset over explicit (V, R) points, currents from Ohm's law."""
    grid = [(float(v), float(r)) for v, r in grid]
    if not grid:
        raise ValueError("Ohm grid is empty")
    r_max = r_max or max(r for _, r in grid)
    e_max = e_max or max(v for v, _ in grid)
    ctx = NormalizationContext(r_max, 1.0, 1.0, e_max)
    circuits = tuple(circuit_from_features("1a", (r, v)) for v, r in grid)
    features = np.array([normalize_features("1a", (r, v), ctx) for v, r in grid])
    targets = np.array([normalize_targets(BranchResponse(solve_ohm(v, r), 0.0), ctx, 1) for v, r in grid])
    return Dataset("1a", ctx, features, targets, seed=None, circuits=circuits)


def run_ohm_experiment(grid=None, train_cfg: TrainConfig = TrainConfig(), test_fraction: float = 0.2,
                       seed: int = 0, held_out: Sequence[tuple[float, float]] = ((10.0, 5.0),)):
    """Train the 2-[3]-1 network on ``i = V / R``; returns ``(net, dataset, report)``.

    Points listed in ``held_out`` always land in the test set.
    """
    grid = list(default_ohm_grid() if grid is None else grid)
    # small custom grids keep the default scales so targets stay below 1
    base = default_ohm_grid()
    r_max = max([r for _, r in base] + [float(r) for _, r in grid])
    e_max = max([v for v, _ in base] + [float(v) for v, _ in grid])
    dataset = ohm_dataset(grid, r_max=r_max, e_max=e_max)
    cfg = ExperimentConfig(default_sampler("1a"), train_cfg, test_fraction, seed)
    forced = [i for i, p in enumerate(grid) if p in {tuple(map(float, h)) for h in held_out}]
    if len(grid) == 1:
        # a single point is both the training and the recall set
        net = init_network(ann_architecture("1a"), seed)
        net, treport = train(net, dataset, train_cfg)
        report = evaluate(net, dataset, label="ohm", train_report=treport, n_train=1,
                          threshold=THRESHOLDS["ohm"])
        return net, dataset, report
    net, report = train_and_evaluate(dataset, cfg, label="ohm", threshold=THRESHOLDS["ohm"], test_rows=forced)
    return net, dataset, report


# -- amplifier pair ---------------------------------------------------------------


def amplifier_datasets(cfg: SamplerConfig) -> tuple[Dataset, Dataset]:
    """Electrical and electronic datasets over one shared set of (R1, R6, V) rows."""
    electrical = generate_dataset(replace(cfg, cls="amp_electrical"))
    ctx = electrical.context
    targets = []
    for c in electrical.circuits:
        i6 = solve_amplifier_electronic(c.branches[0].r, c.branches[2].r, c.branches[0].e)
        targets.append(normalize_targets(BranchResponse(i6, 0.0), ctx, 1))
    circuits = tuple(circuit_from_features("amp_electronic", features_of(c)) for c in electrical.circuits)
    electronic = Dataset("amp_electronic", ctx, electrical.features.copy(), np.array(targets).reshape(-1, 1),
                         seed=cfg.seed, circuits=circuits)
    return electrical, electronic


def run_amplifier_experiment(sampler: SamplerConfig | None = None, train_cfg: TrainConfig | None = None,
                             test_fraction: float = 0.2, seed: int = 0):
    """Two independent 3-[3,3]-1 networks; returns ``{class_id: (net, dataset, report)}``."""
    sampler = sampler or default_sampler("amp_electrical", seed=seed)
    train_cfg = train_cfg or TrainConfig(seed=seed)
    out = {}
    for ds in amplifier_datasets(sampler):
        cfg = ExperimentConfig(replace(sampler, cls=ds.cls), train_cfg, test_fraction, seed)
        net, report = train_and_evaluate(ds, cfg, threshold=THRESHOLDS[ds.cls])
        out[ds.cls] = (net, ds, report)
    return out


# -- sweep ------------------------------------------------------------------------


class SweepTooLargeError(ValueError):
    """The sweep grid exceeds the enumeration cap."""


@dataclass(frozen=True)
class SweepCriterion:
    """Accepted band on predicted current (A) and optionally phase (deg)."""

    current: tuple[float, float]
    phase: tuple[float, float] | None = None

    def __post_init__(self):
        for band in (self.current, self.phase):
            if band is not None and not band[0] < band[1]:
                raise ValueError(f"band {band} must satisfy min < max")

    def distance(self, current, phase=None):
        """Band-relative distance from the centre; <= 1 means inside."""
        lo, hi = self.current
        d = np.abs(np.asarray(current) - (lo + hi) / 2) / ((hi - lo) / 2)
        if self.phase is not None:
            plo, phi_ = self.phase
            dp = np.abs(np.asarray(phase) - (plo + phi_) / 2) / ((phi_ - plo) / 2)
            d = np.maximum(d, dp)
        return d

    def contains(self, current, phase=None):
        lo, hi = self.current
        ok = (np.asarray(current) >= lo) & (np.asarray(current) <= hi)
        if self.phase is not None:
            ok &= (np.asarray(phase) >= self.phase[0]) & (np.asarray(phase) <= self.phase[1])
        return ok


@dataclass(frozen=True)
class SweepHit:
    values: dict
    current: float
    phase: float | None
    distance: float


def sweep(class_id: str, net: NetworkWeights, ctx: NormalizationContext, grid: Mapping[str, Sequence[float]],
          criterion: SweepCriterion, cap: int = 100_000, output_offset: float = 0.0) -> list[SweepHit]:
    """Enumerate a quantized design grid, predict, keep the in-band designs.

    ``grid`` maps every feature name of the class to the values it takes.
    Hits come back sorted by distance to the band centre.
    """
    names = feature_names(class_id)
    missing = [n for n in names if n not in grid]
    extra = [n for n in grid if n not in names]
    if missing or extra:
        raise ValueError(f"grid must cover exactly {names}; missing {missing}, unknown {extra}")
    axes = [np.asarray(grid[n], dtype=float).ravel() for n in names]
    size = math.prod(len(a) for a in axes)
    if size > cap:
        raise SweepTooLargeError(f"grid has {size} designs, cap is {cap}; use a coarser step")
    if size == 0:
        return []
    points = np.array(list(itertools.product(*axes)))
    pred = forward_batch(net, normalize_features(class_id, points, ctx)) - output_offset
    phys = _to_phys(pred, ctx)
    current = phys[:, 0]
    phase = phys[:, 1] if phys.shape[1] > 1 else None
    keep = criterion.contains(current, phase)
    dist = criterion.distance(current, phase)
    idx = np.flatnonzero(keep)
    idx = idx[np.argsort(dist[idx], kind="stable")]
    return [
        SweepHit(
            values=dict(zip(names, map(float, points[i]))),
            current=float(current[i]),
            phase=None if phase is None else float(phase[i]),
            distance=float(dist[i]),
        )
        for i in idx
    ]


def write_sweep(hits: Sequence[SweepHit], class_id: str, path) -> None:
    names = feature_names(class_id)
    has_phase = len(target_names(class_id)) > 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["i_pred"] + (["phi_pred"] if has_phase else []) + ["distance"])
        for h in hits:
            row = [_fmt(h.values[n]) for n in names] + [_fmt(h.current)]
            if has_phase:
                row.append(_fmt(h.phase))
            w.writerow(row + [_fmt(h.distance)])


# -- report emission --------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _columns(report: ExperimentReport) -> list[str]:
    cols = ["row"] + list(report.feature_names)
    for t in report.target_names:
        cols += [f"{t}_true_norm", f"{t}_pred_norm", f"{t}_true", f"{t}_pred"]
    return cols


def _rows(report: ExperimentReport):
    for k in range(report.n_test):
        row = [str(k)] + [_fmt(x) for x in report.features_phys[k]]
        for j in range(len(report.target_names)):
            row += [_fmt(report.true_norm[k, j]), _fmt(report.pred_norm[k, j]),
                    _fmt(report.true_phys[k, j]), _fmt(report.pred_phys[k, j])]
        yield row


def report_to_dict(report: ExperimentReport) -> dict:
    cols = _columns(report)
    return {
        "label": report.label,
        "class": report.class_id,
        "n_train": report.n_train,
        "n_test": report.n_test,
        "threshold": report.threshold,
        "passed": report.passed,
        "metrics": report.metrics,
        "warnings": list(report.warnings),
        "train": {
            "cycles": len(report.train_report.loss_per_cycle),
            "initial_loss": _num(report.train_report.initial_loss),
            "final_loss": _num(report.train_report.final_loss),
            "loss_per_cycle": [float(v) for v in report.train_report.loss_per_cycle],
        },
        "columns": cols,
        "rows": [[float(x) for x in row] for row in _rows(report)],
    }


def _num(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)


def render_report(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_columns(report))
        w.writerows(_rows(report))
        return buf.getvalue()
    if fmt in ("md", "markdown", "markdown-table"):
        cols = _columns(report)
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        for row in _rows(report):
            lines.append("| " + " | ".join(_short(x) for x in row) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def _short(cell: str) -> str:
    try:
        return format(float(cell), ".6g")
    except ValueError:
        return cell


_EXT = {"json": "json", "csv": "csv", "md": "md", "markdown": "md", "markdown-table": "md"}


def emit_report(report: ExperimentReport, fmt: str, path) -> str:
    """Write one report format to ``path`` (a directory gets ``report.<ext>``)."""
    text = render_report(report, fmt)
    path = os.fspath(path)
    if os.path.isdir(path):
        path = os.path.join(path, f"report.{_EXT[fmt]}")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror}") from exc
    return path


def metrics_from_csv(path) -> dict:
    """Recompute the aggregate metrics from a CSV report."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    targets = [c[: -len("_true_norm")] for c in header if c.endswith("_true_norm")]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))

    def col(name):
        return arr[:, header.index(name)]

    t_norm = np.column_stack([col(f"{t}_true_norm") for t in targets]) if len(arr) else np.zeros((0, len(targets)))
    p_norm = np.column_stack([col(f"{t}_pred_norm") for t in targets]) if len(arr) else np.zeros((0, len(targets)))
    t_phys = np.column_stack([col(f"{t}_true") for t in targets]) if len(arr) else np.zeros((0, len(targets)))
    p_phys = np.column_stack([col(f"{t}_pred") for t in targets]) if len(arr) else np.zeros((0, len(targets)))
    return compute_metrics(t_norm, p_norm, t_phys, p_phys)
