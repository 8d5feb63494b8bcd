"""Radial meshes, sampled profiles, difference quotients, derivative numbers."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BoundaryIndex, GridMismatch, InvalidSpec, OutsideDomain,
                     WindowTooSmall)


class DomainKind(str, enum.Enum):
    BALL = "Ball"
    ANNULUS = "Annulus"


class Grading(str, enum.Enum):
    UNIFORM = "Uniform"
    GRADED_AT_ORIGIN = "GradedAtOrigin"


@dataclass(frozen=True)
class Domain:
    kind: DomainKind
    R: float
    R1: float = 0.0
    bc_inner: float = 0.0
    bc_outer: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        if self.R <= 0:
            raise InvalidSpec("outer radius must be positive")
        if self.kind is DomainKind.BALL and self.R1 != 0.0:
            raise InvalidSpec("ball domains have R1 = 0")
        if self.kind is DomainKind.ANNULUS and not 0 < self.R1 < self.R:
            raise InvalidSpec("annulus requires 0 < R1 < R")

    @classmethod
    def ball(cls, R, bc_outer=0.0):
        return cls(DomainKind.BALL, R, 0.0, 0.0, bc_outer)

    @classmethod
    def annulus(cls, R1, R, bc_inner=0.0, bc_outer=0.0):
        return cls(DomainKind.ANNULUS, R, R1, bc_inner, bc_outer)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind.value, "R": self.R, "R1": self.R1,
                "bc_inner": self.bc_inner, "bc_outer": self.bc_outer}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Domain":
        return cls(DomainKind(doc["kind"]), float(doc["R"]),
                   float(doc.get("R1", 0.0)), float(doc.get("bc_inner", 0.0)),
                   float(doc.get("bc_outer", 0.0)))


# Default grading exponent: solutions behave like r^{(alpha+2)/(alpha+1)}
# near a degenerate origin, so mild clustering there improves resolution.
GRADING_EXPONENT = 1.5


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    grading: Grading = Grading.UNIFORM

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "grading", Grading(self.grading))
        if nodes.ndim != 1 or len(nodes) < 2:
            raise InvalidSpec("grid needs at least two nodes")
        if not np.all(np.diff(nodes) > 0):
            raise InvalidSpec("grid nodes must be strictly increasing")

    @classmethod
    def for_domain(cls, dom: Domain, n: int,
                   grading: Grading = Grading.UNIFORM) -> "RadialGrid":
        grading = Grading(grading)
        s = np.linspace(0.0, 1.0, n + 1)
        if grading is Grading.GRADED_AT_ORIGIN:
            s = s ** GRADING_EXPONENT
        r1 = dom.R1 if dom.kind is DomainKind.ANNULUS else 0.0
        return cls(r1 + (dom.R - r1) * s, grading)

    @property
    def n(self) -> int:
        return len(self.nodes) - 1

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def max_spacing(self) -> float:
        return float(np.max(self.spacing))

    @property
    def min_spacing(self) -> float:
        return float(np.min(self.spacing))

    def local_spacing(self, i: int) -> float:
        h = self.spacing
        if i == 0:
            return float(h[0])
        if i == self.n:
            return float(h[-1])
        return float(max(h[i - 1], h[i]))

    def nearest_index(self, r: float) -> int:
        return int(np.argmin(np.abs(self.nodes - r)))

    def spans(self, dom: Domain, tol: float = 1e-12) -> bool:
        r1 = dom.R1 if dom.kind is DomainKind.ANNULUS else 0.0
        return (abs(self.nodes[0] - r1) <= tol * max(1.0, dom.R)
                and abs(self.nodes[-1] - dom.R) <= tol * max(1.0, dom.R))


@dataclass(frozen=True)
class DiscreteRadialFunction:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.nodes.shape:
            raise GridMismatch("values and nodes differ in length")
        if not np.all(np.isfinite(values)):
            raise InvalidSpec("values must be finite")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        nodes = self.grid.nodes
        if np.any(s < nodes[0] - 1e-12) or np.any(s > nodes[-1] + 1e-12):
            raise OutsideDomain("evaluation point outside the grid")
        return np.interp(s, nodes, self.values)

    def same_grid(self, other: "DiscreteRadialFunction") -> bool:
        return (self.grid.nodes.shape == other.grid.nodes.shape
                and np.array_equal(self.grid.nodes, other.grid.nodes))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["r", "u"])
            for r, u in zip(self.grid.nodes, self.values):
                writer.writerow(["%.17g" % r, "%.17g" % u])

    @classmethod
    def from_csv(cls, path, grading: Grading = Grading.UNIFORM) -> "DiscreteRadialFunction":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(RadialGrid(rows[:, 0], grading), rows[:, 1])


@dataclass(frozen=True)
class Paraboloid:
    """Quadratic comparison function anchored at (anchor_r, anchor_value)."""

    p: float
    q: float
    anchor_r: float
    anchor_value: float


def paraboloid_eval(w: Paraboloid, s):
    d = np.asarray(s, dtype=float) - w.anchor_r
    return w.anchor_value + w.p * d + 0.5 * w.q * d * d


@dataclass(frozen=True)
class DerivativeNumbers:
    """Finite surrogate of the four one-sided liminf/limsup quotients."""

    lambda_g: float
    Lambda_g: float
    lambda_d: float
    Lambda_d: float
    window: float
    scales: int
    left_defined: bool = True

    @property
    def spread(self) -> float:
        return max(self.Lambda_g, self.Lambda_d) - min(self.lambda_g, self.lambda_d)


def difference_quotients(u: DiscreteRadialFunction, i: int) -> tuple[float, float]:
    """Second-order first and second difference quotients at interior node i.

    Exact on quadratics for any (possibly nonuniform) spacing.
    """
    n = u.grid.n
    if not 0 < i < n:
        raise BoundaryIndex("difference quotients need an interior node")
    r = u.grid.nodes
    v = u.values
    hm = r[i] - r[i - 1]
    hp = r[i + 1] - r[i]
    denom = hp * hm * (hp + hm)
    q = (hm * hm * v[i + 1] + (hp * hp - hm * hm) * v[i] - hp * hp * v[i - 1]) / denom
    m = 2.0 * (hm * v[i + 1] - (hp + hm) * v[i] + hp * v[i - 1]) / denom
    return float(q), float(m)


def interior_quotients(u: DiscreteRadialFunction) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized difference_quotients over all interior nodes (index 1..n-1)."""
    r = u.grid.nodes
    v = u.values
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hp * hm * (hp + hm)
    q = (hm * hm * v[2:] + (hp * hp - hm * hm) * v[1:-1] - hp * hp * v[:-2]) / denom
    m = 2.0 * (hm * v[2:] - (hp + hm) * v[1:-1] + hp * v[:-2]) / denom
    return q, m


def derivative_numbers(u: DiscreteRadialFunction, r: float, window: float,
                       scales: int) -> DerivativeNumbers:
    """Approximate the derivative numbers at a grid node.

    Difference quotients (u(s) - u(r)) / (s - r) are probed at the geometric
    scales s = r +/- window * 2^-k, k = 0..scales-1, with linear interpolation
    off the grid; the min over scales stands in for liminf, the max for
    limsup.  At the left end of the grid only the right numbers exist and the
    left fields mirror them (left_defined = False).
    """
    nodes = u.grid.nodes
    if r < nodes[0] - 1e-12 or r > nodes[-1] + 1e-12:
        raise OutsideDomain("derivative numbers requested outside the grid")
    if scales < 2:
        raise InvalidSpec("need at least two scales")
    i = u.grid.nearest_index(r)
    r = float(nodes[i])
    if window < 2 * u.grid.local_spacing(i) * (1 - 1e-12):
        raise WindowTooSmall("window below twice the local spacing")
    ur = u.values[i]
    offsets = window * 2.0 ** (-np.arange(scales))

    def one_side(sign):
        s = r + sign * offsets
        s = s[(s >= nodes[0] - 1e-15) & (s <= nodes[-1] + 1e-15)]
        if len(s) == 0:
            return None
        quot = (u(s) - ur) / (s - r)
        return float(np.min(quot)), float(np.max(quot))

    right = one_side(+1.0)
    left = one_side(-1.0)
    if right is None and left is None:
        raise WindowTooSmall("no probe points inside the grid")
    left_defined = left is not None
    if right is None:
        # right end of the grid: mirror the left numbers
        right = left
    if left is None:
        left = right
    return DerivativeNumbers(lambda_g=left[0], Lambda_g=left[1],
                             lambda_d=right[0], Lambda_d=right[1],
                             window=window, scales=scales,
                             left_defined=left_defined)


def lipschitz_constant(u: DiscreteRadialFunction) -> float:
    """Max adjacent-node slope magnitude."""
    return float(np.max(np.abs(np.diff(u.values)) / u.grid.spacing))
