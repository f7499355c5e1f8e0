"""Training and test data: sampling, sanitization, normalization, CSV I/O.

Scaling rules: every impedance or voltage feature is divided by the
maximum of its kind, currents are divided by ``0.1 * e_max`` and phases map
through ``(phi + 180) / 360``. Degenerate element values are replaced by
finite stand-ins before anything is solved (open path 100 ohm, short path
0.1 ohm, missing voltage 0.1 V).
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .circuits import (
    CircuitInstance,
    circuit_class,
    circuit_from_features,
    feature_kinds,
    feature_names,
    features_of,
    target_names,
)
from .solver import (
    BranchResponse,
    DegenerateCircuitError,
    probe_response,
    solve_amplifier_electrical,
    solve_amplifier_electronic,
    solve_by_superposition,
    solve_mesh,
)

__all__ = [
    "OPEN_RESISTANCE",
    "SHORT_RESISTANCE",
    "ZERO_VOLTAGE",
    "NOISE_OFFSET",
    "Dataset",
    "DatasetFormatError",
    "ElementRange",
    "NormalizationContext",
    "RawSample",
    "SamplerConfig",
    "apply_noise_offset",
    "default_sampler",
    "denormalize_features",
    "denormalize_outputs",
    "feature_scales",
    "generate_dataset",
    "normalize_features",
    "normalize_sample",
    "normalize_targets",
    "oracle_response",
    "read_dataset",
    "sanitize",
    "split_train_test",
    "write_dataset",
]

OPEN_RESISTANCE = 100.0
SHORT_RESISTANCE = 0.1
ZERO_VOLTAGE = 0.1
NOISE_OFFSET = 0.01

_REPLACEMENT = {
    "open_resistance": OPEN_RESISTANCE,
    "short_resistance": SHORT_RESISTANCE,
    "zero_voltage": ZERO_VOLTAGE,
}


class DatasetFormatError(ValueError):
    """A dataset file could not be parsed."""


def sanitize(value: float, kind: str) -> float:
    """Replace a degenerate (non-finite or zero) value by its stand-in.

    ``kind`` is one of ``open_resistance``, ``short_resistance`` or
    ``zero_voltage``. Ordinary values are returned unchanged.
    """
    try:
        replacement = _REPLACEMENT[kind]
    except KeyError:
        raise ValueError(f"unknown degeneracy kind {kind!r}") from None
    if not math.isfinite(value) or value == 0:
        return replacement
    return value


@dataclass(frozen=True)
class ElementRange:
    """Quantized sampling range ``min, min + step, ..., <= max``."""

    min: float
    max: float
    step: float

    def __post_init__(self):
        if not self.min > 0:
            raise ValueError("range minimum must be positive")
        if not self.step > 0:
            raise ValueError("range step must be positive")
        if self.max < self.min:
            raise ValueError("range maximum below minimum")

    def values(self) -> np.ndarray:
        n = int(math.floor((self.max - self.min) / self.step + 1e-9))
        return self.min + self.step * np.arange(n + 1)

    @classmethod
    def parse(cls, text: str) -> "ElementRange":
        """Parse ``min:max:step``."""
        try:
            lo, hi, step = (float(t) for t in text.split(":"))
        except ValueError:
            raise ValueError(f"range must read min:max:step, got {text!r}") from None
        return cls(lo, hi, step)

    def __str__(self):
        return f"{self.min!r}:{self.max!r}:{self.step!r}"


@dataclass(frozen=True)
class NormalizationContext:
    r_max: float
    xl_max: float
    xc_max: float
    e_max: float

    def __post_init__(self):
        for name in ("r_max", "xl_max", "xc_max", "e_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def scale(self, kind: str) -> float:
        return {"r": self.r_max, "xl": self.xl_max, "xc": self.xc_max, "e": self.e_max}[kind]


@dataclass(frozen=True)
class RawSample:
    circuit: CircuitInstance
    response: BranchResponse


@dataclass(frozen=True)
class SamplerConfig:
    cls: str
    count: int = 50
    ranges: Mapping[str, ElementRange] = field(default_factory=dict)
    open_prob: float = 0.05
    short_prob: float = 0.05
    zero_volt_prob: float = 0.05
    seed: int = 0

    def __post_init__(self):
        circuit_class(self.cls)
        if self.count < 0:
            raise ValueError("count must be non-negative")
        for name in ("open_prob", "short_prob", "zero_volt_prob"):
            p = getattr(self, name)
            if not 0 <= p < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        needed = set(feature_kinds(self.cls))
        missing = needed - set(self.ranges)
        if missing:
            raise ValueError(f"missing sampling ranges for {sorted(missing)}")

    def context(self) -> NormalizationContext:
        """Scaling maxima taken from the sampling ranges.

        When open paths can occur the resistance scale covers the 100 ohm
        stand-in. Kinds a class does not use get a unit scale.
        """
        def top(kind):
            return self.ranges[kind].max if kind in self.ranges else 1.0

        r_max = top("r")
        if self.open_prob > 0:
            r_max = max(r_max, OPEN_RESISTANCE)
        return NormalizationContext(r_max, top("xl"), top("xc"), top("e"))


# Per-class defaults keep the normalized current i / (0.1 e_max) inside the
# sigmoid's range for the bulk of the samples.
_DEFAULT_RANGES = {
    "1a": dict(r=ElementRange(12.0, 60.0, 0.5), e=ElementRange(1.0, 20.0, 0.5)),
    "2a": dict(
        r=ElementRange(12.0, 60.0, 0.5),
        xl=ElementRange(0.5, 50.0, 0.5),
        xc=ElementRange(0.5, 50.0, 0.5),
        e=ElementRange(1.0, 20.0, 0.5),
    ),
    "1b": dict(r=ElementRange(5.0, 50.0, 0.5), e=ElementRange(1.0, 20.0, 0.5)),
    "1c": dict(r=ElementRange(5.0, 50.0, 0.5), e=ElementRange(1.0, 20.0, 0.5)),
    "2b": dict(
        r=ElementRange(0.5, 50.0, 0.5),
        xl=ElementRange(0.5, 50.0, 0.5),
        xc=ElementRange(0.5, 50.0, 0.5),
        e=ElementRange(1.0, 20.0, 0.5),
    ),
    "2c": dict(
        r=ElementRange(0.5, 50.0, 0.5),
        xl=ElementRange(0.5, 50.0, 0.5),
        xc=ElementRange(0.5, 50.0, 0.5),
        e=ElementRange(1.0, 20.0, 0.5),
    ),
    "amp_electrical": dict(r=ElementRange(2.0, 20.0, 0.5), e=ElementRange(1.0, 20.0, 0.5)),
    "amp_electronic": dict(r=ElementRange(2.0, 20.0, 0.5), e=ElementRange(1.0, 20.0, 0.5)),
}

_DEFAULT_COUNTS = {"1a": 50, "2a": 200, "1b": 1000, "1c": 1000, "2b": 300, "2c": 300,
                   "amp_electrical": 300, "amp_electronic": 300}

_DEFAULT_PROBS = {
    # a shorted series loop carries an unrepresentable current
    "1a": dict(short_prob=0.0),
    "2a": dict(short_prob=0.0),
    # the 100 ohm stand-in would squeeze the 2..20 ohm inputs into [0.02, 0.2]
    "amp_electrical": dict(short_prob=0.0, open_prob=0.0),
    "amp_electronic": dict(short_prob=0.0, open_prob=0.0),
}


def default_sampler(cls: str, count: int | None = None, seed: int = 0, **overrides) -> SamplerConfig:
    """Default sampling configuration for a class."""
    cls = circuit_class(cls).id
    kw = dict(
        cls=cls,
        count=_DEFAULT_COUNTS[cls] if count is None else count,
        ranges=dict(_DEFAULT_RANGES[cls]),
        seed=seed,
    )
    kw.update(_DEFAULT_PROBS.get(cls, {}))
    kw.update(overrides)
    return SamplerConfig(**kw)


def oracle_response(circuit: CircuitInstance) -> BranchResponse:
    """Exact probe response for any class, amplifiers included."""
    cid = circuit.cls.id
    if cid == "amp_electronic":
        b = circuit.branches
        return BranchResponse(solve_amplifier_electronic(b[0].r, b[2].r, b[0].e), 0.0)
    if cid == "amp_electrical":
        b = circuit.branches
        return BranchResponse(solve_amplifier_electrical(b[0].r, b[2].r, b[0].e), 0.0)
    return probe_response(circuit)


def feature_scales(cls: str, ctx: NormalizationContext) -> np.ndarray:
    """Divisor of every feature column of a class."""
    return np.array([ctx.scale(k) for k in feature_kinds(cls)])


def normalize_features(cls: str, values, ctx: NormalizationContext) -> np.ndarray:
    """Scale physical feature values; works on a vector or on rows."""
    return np.asarray(values, dtype=float) / feature_scales(cls, ctx)


def denormalize_features(cls: str, features, ctx: NormalizationContext) -> np.ndarray:
    return np.asarray(features, dtype=float) * feature_scales(cls, ctx)


def normalize_targets(response: BranchResponse, ctx: NormalizationContext, n_out: int) -> np.ndarray:
    current = response.current_mag / (0.1 * ctx.e_max)
    if n_out == 1:
        return np.array([current])
    return np.array([current, (response.phase_deg + 180.0) / 360.0])


def normalize_sample(raw: RawSample, ctx: NormalizationContext) -> tuple[np.ndarray, np.ndarray]:
    """Scale a raw sample to ``(features, targets)``."""
    cls = raw.circuit.cls
    features = normalize_features(cls.id, features_of(raw.circuit), ctx)
    return features, normalize_targets(raw.response, ctx, len(target_names(cls)))


def denormalize_outputs(targets: Sequence[float], ctx: NormalizationContext) -> BranchResponse:
    """Map normalized ``(current[, phase])`` back to amperes and degrees."""
    current = float(targets[0]) * 0.1 * ctx.e_max
    phase = 360.0 * float(targets[1]) - 180.0 if len(targets) > 1 else 0.0
    return BranchResponse(current, phase)


@dataclass(frozen=True)
class Dataset:
    """Normalized rows of one circuit class.

    ``noise_offset`` records a constant added after normalization; targets
    of rows carrying it are ``true + noise_offset``. ``circuits`` holds the
    sanitized source circuits when the dataset was generated in-process.
    """

    cls: str
    context: NormalizationContext
    features: np.ndarray
    targets: np.ndarray
    seed: int | None = None
    noise_offset: float = 0.0
    circuits: tuple[CircuitInstance, ...] | None = None

    def __post_init__(self):
        n_f = len(feature_names(self.cls))
        n_t = len(target_names(self.cls))
        f = np.asarray(self.features, dtype=float).reshape(-1, n_f)
        t = np.asarray(self.targets, dtype=float).reshape(-1, n_t)
        if len(f) != len(t):
            raise ValueError("features and targets differ in row count")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "targets", t)

    def __len__(self):
        return len(self.features)

    @property
    def feature_names(self) -> list[str]:
        return feature_names(self.cls)

    @property
    def target_names(self) -> list[str]:
        return target_names(self.cls)

    def clean_targets(self) -> np.ndarray:
        """Targets with any noise offset removed."""
        return self.targets - self.noise_offset

    def responses(self) -> list[BranchResponse]:
        return [denormalize_outputs(t, self.context) for t in self.clean_targets()]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        circuits = None if self.circuits is None else tuple(self.circuits[i] for i in idx)
        return replace(self, features=self.features[idx], targets=self.targets[idx], circuits=circuits)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.cls == other.cls
            and self.context == other.context
            and self.seed == other.seed
            and self.noise_offset == other.noise_offset
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.targets, other.targets)
        )


def _draw_row(cfg: SamplerConfig, kinds, rng) -> list[float]:
    row = []
    for kind in kinds:
        grid = cfg.ranges[kind].values()
        value = float(grid[rng.integers(len(grid))])
        if kind == "r":
            u = rng.random()
            if u < cfg.open_prob:
                value = sanitize(math.inf, "open_resistance")
            elif u < cfg.open_prob + cfg.short_prob:
                value = sanitize(0.0, "short_resistance")
        elif kind == "e":
            if rng.random() < cfg.zero_volt_prob:
                value = sanitize(0.0, "zero_voltage")
        row.append(value)
    return row


def generate_dataset(cfg: SamplerConfig, verify: bool = True, max_retries: int = 100) -> Dataset:
    """Sample circuits, solve them exactly and normalize.

    With ``verify`` every mesh response is re-derived by superposition and
    must agree to 1e-9.
    """
    rng = np.random.default_rng(cfg.seed)
    ctx = cfg.context()
    kinds = feature_kinds(cfg.cls)
    n_out = len(target_names(cfg.cls))
    circuits, features, targets = [], [], []
    for _ in range(cfg.count):
        for _attempt in range(max_retries):
            circuit = circuit_from_features(cfg.cls, _draw_row(cfg, kinds, rng))
            try:
                response = oracle_response(circuit)
            except DegenerateCircuitError:
                continue
            break
        else:
            raise DegenerateCircuitError(f"no solvable circuit after {max_retries} draws")
        if verify and not circuit.cls.is_amplifier:
            _check_superposition(circuit)
        circuits.append(circuit)
        f, t = normalize_sample(RawSample(circuit, response), ctx)
        features.append(f)
        targets.append(t)
    n_f = len(kinds)
    return Dataset(
        cls=cfg.cls,
        context=ctx,
        features=np.array(features).reshape(-1, n_f),
        targets=np.array(targets).reshape(-1, n_out),
        seed=cfg.seed,
        circuits=tuple(circuits),
    )


def _check_superposition(circuit: CircuitInstance, tol: float = 1e-9):
    direct = solve_mesh(circuit).branch_currents
    summed = solve_by_superposition(circuit).branch_currents
    scale = max(1.0, max(abs(c) for c in direct))
    dev = max(abs(a - b) for a, b in zip(direct, summed))
    if dev > tol * scale:
        raise AssertionError(f"superposition deviates from mesh solution by {dev:.3g}")


def apply_noise_offset(ds: Dataset, offset: float = NOISE_OFFSET) -> Dataset:
    """Add a constant to every feature and target of ``ds``."""
    if offset == 0:
        return ds
    return replace(
        ds,
        features=ds.features + offset,
        targets=ds.targets + offset,
        noise_offset=ds.noise_offset + offset,
    )


def split_train_test(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then the last ``round(n * test_fraction)`` rows are held out."""
    if not 0 <= test_fraction < 1:
        raise ValueError("test_fraction must lie in [0, 1)")
    order = np.random.default_rng(seed).permutation(len(ds))
    n_test = int(round(len(ds) * test_fraction))
    n_train = len(ds) - n_test
    return ds.subset(order[:n_train]), ds.subset(order[n_train:])


# -- CSV ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sidecar_path(path) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return os.path.join(os.path.dirname(root), "context.json")


def write_dataset(ds: Dataset, path, context_path=None) -> None:
    """Write ``ds`` as CSV plus a JSON context sidecar.

    The sidecar defaults to ``context.json`` next to the CSV.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.feature_names + ds.target_names)
        for f, t in zip(ds.features, ds.targets):
            writer.writerow([_fmt(x) for x in f] + [_fmt(x) for x in t])
    ctx = ds.context
    doc = {
        "r_max": ctx.r_max,
        "xl_max": ctx.xl_max,
        "xc_max": ctx.xc_max,
        "e_max": ctx.e_max,
        "class": ds.cls,
        "seed": ds.seed,
        "noise_offset": ds.noise_offset,
    }
    with open(context_path or _sidecar_path(path), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_context(path) -> tuple[NormalizationContext, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    try:
        ctx = NormalizationContext(
            float(doc["r_max"]), float(doc["xl_max"]), float(doc["xc_max"]), float(doc["e_max"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetFormatError(f"{path}: bad context document ({exc})") from exc
    return ctx, doc


def read_dataset(path, context_path=None) -> Dataset:
    ctx, doc = read_context(context_path or _sidecar_path(path))
    cls = doc.get("class")
    try:
        names = feature_names(cls) + target_names(cls)
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from exc
    n_f = len(feature_names(cls))
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != names:
            raise DatasetFormatError(f"{path}: row 1: header {header} does not match class {cls}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(names):
                raise DatasetFormatError(
                    f"{path}: row {line_no}: expected {len(names)} columns, got {len(row)}"
                )
            values = []
            for col, cell in enumerate(row, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}: row {line_no}, column {col}: not a number: {cell!r}"
                    ) from None
            rows.append(values)
    arr = np.array(rows, dtype=float).reshape(-1, len(names))
    return Dataset(
        cls=cls,
        context=ctx,
        features=arr[:, :n_f],
        targets=arr[:, n_f:],
        seed=doc.get("seed"),
        noise_offset=float(doc.get("noise_offset", 0.0)),
    )
