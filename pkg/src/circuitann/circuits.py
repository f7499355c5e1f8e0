"""Circuit classes, grid-mesh topologies and branch elements.

Every circuit handled by the package belongs to one of a fixed set of
classes. Category-1 classes (``1a``, ``1b``, ``1c``) are purely resistive,
category-2 classes (``2a``, ``2b``, ``2c``) carry series R, X_L and X_C on
every branch. The two amplifier classes share a three-branch two-mesh
layout with the middle resistance pinned to 1 ohm.

Multi-mesh classes are planar grid graphs. A grid with ``rows x cols``
nodes has its branches numbered row-major over the horizontal branches
first, then row-major over the vertical branches. Perimeter branches are
oriented clockwise around the outer loop; interior branches point left to
right or top to bottom. Every mesh is traversed clockwise and every EMF
drives current along its branch's orientation, so sources on the perimeter
all aid the same circulation. Branch index 5 is the probe branch ("i6") of
the two- and four-mesh classes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

__all__ = [
    "CLASS_IDS",
    "GRID_CLASS_IDS",
    "AMPLIFIER_MIDDLE_R",
    "ArchitectureSpec",
    "BranchElement",
    "CircuitClass",
    "CircuitInstance",
    "MechanicalParams",
    "Topology",
    "ann_architecture",
    "circuit_class",
    "circuit_from_features",
    "circuit_from_json",
    "circuit_to_json",
    "electrical_to_mechanical",
    "feature_names",
    "features_of",
    "grid_topology",
    "impedance",
    "mechanical_to_electrical",
    "reactance_from_components",
    "target_names",
]

GRID_CLASS_IDS = ("1a", "1b", "1c", "2a", "2b", "2c")
CLASS_IDS = GRID_CLASS_IDS + ("amp_electrical", "amp_electronic")

AMPLIFIER_MIDDLE_R = 1.0


@dataclass(frozen=True)
class CircuitClass:
    id: str
    mesh_count: int
    branch_count: int
    probe_branch: int

    @property
    def category(self) -> int:
        """1 for resistive classes, 2 for L,C,R classes."""
        return 2 if self.id.startswith("2") else 1

    @property
    def is_amplifier(self) -> bool:
        return self.id.startswith("amp_")


_CLASSES = {
    "1a": CircuitClass("1a", 1, 1, 0),
    "2a": CircuitClass("2a", 1, 1, 0),
    "1b": CircuitClass("1b", 2, 7, 5),
    "2b": CircuitClass("2b", 2, 7, 5),
    "1c": CircuitClass("1c", 4, 12, 5),
    "2c": CircuitClass("2c", 4, 12, 5),
    "amp_electrical": CircuitClass("amp_electrical", 2, 3, 2),
    "amp_electronic": CircuitClass("amp_electronic", 2, 3, 2),
}


def circuit_class(cls: str | CircuitClass) -> CircuitClass:
    """Look up a circuit class by id (instances pass through)."""
    if isinstance(cls, CircuitClass):
        return cls
    try:
        return _CLASSES[cls]
    except KeyError:
        raise ValueError(
            f"unknown circuit class {cls!r}; expected one of {', '.join(CLASS_IDS)}"
        ) from None


@dataclass(frozen=True)
class BranchElement:
    """One series branch: resistance, reactances (ohm) and an optional EMF.

    The EMF drives current along the branch orientation.
    """

    r: float
    xl: float = 0.0
    xc: float = 0.0
    e: float = 0.0
    source_phase: float = 0.0

    def __post_init__(self):
        for name in ("r", "xl", "xc", "e", "source_phase"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"branch field {name} must be finite, got {value!r}")
        for name in ("r", "xl", "xc", "e"):
            if getattr(self, name) < 0:
                raise ValueError(f"branch field {name} must be non-negative")


@dataclass(frozen=True)
class CircuitInstance:
    cls: CircuitClass
    branches: tuple[BranchElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "cls", circuit_class(self.cls))
        object.__setattr__(self, "branches", tuple(self.branches))
        if len(self.branches) != self.cls.branch_count:
            raise ValueError(
                f"class {self.cls.id} needs {self.cls.branch_count} branches, "
                f"got {len(self.branches)}"
            )
        if self.cls.category == 1 and any(b.xl or b.xc for b in self.branches):
            raise ValueError(f"class {self.cls.id} is resistive; xl and xc must be 0")
        if self.cls.id == "2b":
            if sum(1 for b in self.branches if b.e > 0) > 1:
                raise ValueError("class 2b carries a single source")
        if self.cls.is_amplifier and self.branches[1].r != AMPLIFIER_MIDDLE_R:
            raise ValueError("amplifier classes fix the middle resistance to 1 ohm")

    @property
    def probe_branch(self) -> int:
        return self.cls.probe_branch

    def with_sources(self, emfs: Sequence[float]) -> "CircuitInstance":
        """Copy of the circuit with every branch EMF replaced."""
        branches = tuple(replace(b, e=float(e)) for b, e in zip(self.branches, emfs))
        # bypass the 2b single-source check: superposition needs arbitrary EMFs
        inst = object.__new__(CircuitInstance)
        object.__setattr__(inst, "cls", self.cls)
        object.__setattr__(inst, "branches", branches)
        return inst


@dataclass(frozen=True)
class MechanicalParams:
    """Forced damped oscillator ``m x'' + b x' + k x = f0 sin(omega t)``."""

    m: float
    b: float
    k: float
    f0: float
    omega: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")
        if not self.k > 0:
            raise ValueError("stiffness must be positive")
        if not self.b >= 0:
            raise ValueError("damping must be non-negative")
        if not self.omega > 0:
            raise ValueError("omega must be positive")


@dataclass(frozen=True)
class ArchitectureSpec:
    input_count: int
    hidden_layers: tuple[int, ...]
    output_count: int

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        if self.input_count < 1 or self.output_count < 1 or any(h < 1 for h in self.hidden_layers):
            raise ValueError(f"invalid architecture {self}")

    @property
    def sizes(self) -> tuple[int, ...]:
        """All layer widths, input first."""
        return (self.input_count, *self.hidden_layers, self.output_count)


@dataclass(frozen=True)
class Topology:
    """Mesh incidence of a planar circuit.

    ``meshes[p]`` lists ``(branch, orientation)`` pairs traversed by mesh
    ``p``; ``nodes[b]`` gives the ``(tail, head)`` node ids of branch ``b``
    in its reference direction.
    """

    meshes: tuple[tuple[tuple[int, int], ...], ...]
    nodes: tuple[tuple[int, int], ...] = field(default=())

    @property
    def branch_count(self) -> int:
        return 1 + max(b for mesh in self.meshes for b, _ in mesh)

    def incidence(self) -> list[list[int]]:
        """Dense mesh-by-branch orientation matrix."""
        rows = [[0] * self.branch_count for _ in self.meshes]
        for p, mesh in enumerate(self.meshes):
            for b, o in mesh:
                rows[p][b] = o
        return rows


def _grid(rows: int, cols: int) -> Topology:
    n_h = rows * (cols - 1)

    def h(r, c):
        return r * (cols - 1) + c

    def v(r, c):
        return n_h + r * cols + c

    def node(r, c):
        return r * cols + c

    nodes = [None] * (n_h + (rows - 1) * cols)
    for r in range(rows):
        for c in range(cols - 1):
            ends = (node(r, c), node(r, c + 1))
            nodes[h(r, c)] = ends[::-1] if r == rows - 1 else ends
    for r in range(rows - 1):
        for c in range(cols):
            ends = (node(r, c), node(r + 1, c))
            nodes[v(r, c)] = ends[::-1] if c == 0 else ends

    meshes = []
    for r in range(rows - 1):
        for c in range(cols - 1):
            cycle = [node(r, c), node(r, c + 1), node(r + 1, c + 1), node(r + 1, c), node(r, c)]
            mesh = []
            for b in (h(r, c), v(r, c + 1), h(r + 1, c), v(r, c)):
                tail, head = nodes[b]
                forward = any(cycle[k] == tail and cycle[k + 1] == head for k in range(4))
                mesh.append((b, 1 if forward else -1))
            meshes.append(tuple(mesh))
    return Topology(tuple(meshes), tuple(nodes))


_TOPOLOGIES = {
    1: Topology((((0, 1),),), ((0, 0),)),
    7: _grid(2, 3),
    12: _grid(3, 3),
    # R1 | R3 (shared) | R6; node 0 is the common return rail
    3: Topology((((0, 1), (1, 1)), ((1, -1), (2, 1))), ((0, 1), (1, 0), (1, 0))),
}


def grid_topology(cls: str | CircuitClass) -> Topology:
    """Mesh incidence for a circuit class."""
    return _TOPOLOGIES[circuit_class(cls).branch_count]


def impedance(branch: BranchElement) -> complex:
    """Series impedance ``r + j(xl - xc)`` of a branch."""
    return complex(branch.r, branch.xl - branch.xc)


def reactance_from_components(l: float, c: float, omega: float) -> tuple[float, float]:
    """Inductive and capacitive reactance of an inductance/capacitance pair."""
    if not c > 0:
        raise ValueError("capacitance must be positive")
    if not omega > 0:
        raise ValueError("omega must be positive")
    if l < 0:
        raise ValueError("inductance must be non-negative")
    return omega * l, 1.0 / (omega * c)


def mechanical_to_electrical(p: MechanicalParams) -> tuple[float, float, float, float, float]:
    """Map oscillator coefficients onto a series LCR driven by a sine EMF.

    Returns ``(L, R, C, E0, omega)`` from mass -> inductance,
    damping -> resistance, stiffness -> inverse capacitance and force
    amplitude -> EMF amplitude.
    """
    if not p.k > 0:
        raise ValueError("stiffness must be positive")
    return p.m, p.b, 1.0 / p.k, p.f0, p.omega


def electrical_to_mechanical(l: float, r: float, c: float, e0: float, omega: float) -> MechanicalParams:
    if not c > 0:
        raise ValueError("capacitance must be positive")
    return MechanicalParams(m=l, b=r, k=1.0 / c, f0=e0, omega=omega)


# -- feature layout ---------------------------------------------------------
#
# Feature order follows the input listing of each class: 1a (R, V),
# category-1 grids (R1..Rn, E1..En), 2a (XL, XC, R, E), category-2 grids
# (R1, XC1, XL1, ..., Rn, XCn, XLn, then the voltages), amplifiers (R1, R6, V).


def _feature_layout(cls: CircuitClass) -> list[tuple[str, str, int]]:
    """``(name, field, branch)`` triples in feature order."""
    n = cls.branch_count
    cid = cls.id
    if cid == "1a":
        return [("R", "r", 0), ("V", "e", 0)]
    if cid == "2a":
        return [("XL", "xl", 0), ("XC", "xc", 0), ("R", "r", 0), ("E", "e", 0)]
    if cls.is_amplifier:
        return [("R1", "r", 0), ("R6", "r", 2), ("V", "e", 0)]
    if cls.category == 1:
        return [(f"R{i + 1}", "r", i) for i in range(n)] + [(f"E{i + 1}", "e", i) for i in range(n)]
    out = []
    for i in range(n):
        out += [(f"R{i + 1}", "r", i), (f"XC{i + 1}", "xc", i), (f"XL{i + 1}", "xl", i)]
    if cid == "2b":
        out.append(("E", "e", 0))
    else:
        out += [(f"E{i + 1}", "e", i) for i in range(n)]
    return out


def feature_names(cls: str | CircuitClass) -> list[str]:
    return [name for name, _, _ in _feature_layout(circuit_class(cls))]


def feature_kinds(cls: str | CircuitClass) -> list[str]:
    """Element kind (``r``, ``xl``, ``xc`` or ``e``) of every feature."""
    return [kind for _, kind, _ in _feature_layout(circuit_class(cls))]


def target_names(cls: str | CircuitClass) -> list[str]:
    cls = circuit_class(cls)
    current = "i" if cls.id in ("1a", "2a") else "i6"
    return [current, "phi"] if cls.category == 2 else [current]


def features_of(circuit: CircuitInstance) -> list[float]:
    """Raw (physical-unit) feature vector of a circuit."""
    return [getattr(circuit.branches[b], kind) for _, kind, b in _feature_layout(circuit.cls)]


def circuit_from_features(cls: str | CircuitClass, values: Sequence[float]) -> CircuitInstance:
    """Inverse of :func:`features_of`; branch fields not listed stay 0."""
    cls = circuit_class(cls)
    layout = _feature_layout(cls)
    if len(values) != len(layout):
        raise ValueError(f"class {cls.id} has {len(layout)} features, got {len(values)}")
    fields = [dict(r=0.0, xl=0.0, xc=0.0, e=0.0) for _ in range(cls.branch_count)]
    for (_, kind, b), value in zip(layout, values):
        fields[b][kind] = float(value)
    if cls.is_amplifier:
        fields[1]["r"] = AMPLIFIER_MIDDLE_R
    return CircuitInstance(cls, tuple(BranchElement(**f) for f in fields))


def ann_architecture(cls: str | CircuitClass) -> ArchitectureSpec:
    """Network shape for a class: inputs, hidden widths, outputs."""
    cls = circuit_class(cls)
    hidden = {
        "1a": (3,),
        "1b": (8, 8),
        "1c": (16, 16),
        "2a": (3, 3),
        "2b": (15, 15),
        "2c": (25, 25),
        "amp_electrical": (3, 3),
        "amp_electronic": (3, 3),
    }[cls.id]
    return ArchitectureSpec(len(_feature_layout(cls)), hidden, len(target_names(cls)))


# -- JSON ---------------------------------------------------------------------

_BRANCH_FIELDS = ("r", "xl", "xc", "e", "source_phase")


def circuit_to_json(circuit: CircuitInstance) -> str:
    doc = {
        "class": circuit.cls.id,
        "branches": [{k: getattr(b, k) for k in _BRANCH_FIELDS} for b in circuit.branches],
    }
    return json.dumps(doc)


def circuit_from_json(text: str) -> CircuitInstance:
    doc = json.loads(text)
    try:
        branches = [BranchElement(**{k: float(b[k]) for k in _BRANCH_FIELDS}) for b in doc["branches"]]
        return CircuitInstance(circuit_class(doc["class"]), tuple(branches))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed circuit document: {exc}") from exc
