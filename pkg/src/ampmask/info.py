"""Finite-alphabet information measures and rate-region geometry.

All quantities are in bits.  Probabilities below ``ZERO_PROB`` are treated
as exact zeros inside entropy sums (0 log 0 = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import UsageError, ValidationError

MASS_TOL = 1e-9
ZERO_PROB = 1e-15
CLAMP_TOL = 1e-12
HULL_TOL = 1e-12


def _clamp_small_negative(value):
    """Map values in [-CLAMP_TOL, 0) to 0; leave anything else untouched."""
    if np.ndim(value) == 0:
        value = float(value)
        return 0.0 if -CLAMP_TOL <= value < 0.0 else value
    value = np.asarray(value, dtype=float)
    return np.where((value < 0.0) & (value >= -CLAMP_TOL), 0.0, value)


def _check_mass(probs: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{what}: non-finite probability")
    if np.any(probs < 0.0):
        raise ValidationError(f"{what}: negative probability {probs.min():.3g}")
    total = float(probs.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(f"{what}: total mass {total!r} differs from 1")


def entropy_bits(probs) -> float:
    """Shannon entropy of an arbitrary nonnegative array (no validation)."""
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > ZERO_PROB]
    return float(-(p * np.log2(p)).sum())


def batch_entropy(probs: np.ndarray) -> np.ndarray:
    """Entropy of every row of ``probs`` after flattening trailing axes."""
    p = probs.reshape(probs.shape[0], -1)
    safe = np.where(p > ZERO_PROB, p, 1.0)
    return -(np.where(p > ZERO_PROB, p * np.log2(safe), 0.0)).sum(axis=1)


@dataclass(frozen=True)
class FiniteDist:
    """Probability vector over ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        _check_mass(p, "FiniteDist")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.size)


@dataclass(frozen=True)
class JointDist:
    """Dense joint law with one named axis per random variable."""

    probs: np.ndarray
    axis_names: tuple[str, ...]

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        names = tuple(self.axis_names)
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate axis names in {names}")
        if p.ndim != len(names):
            raise UsageError(f"{p.ndim}-d array but {len(names)} axis names")
        _check_mass(p, "JointDist")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "axis_names", names)

    @property
    def axis_sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    def _axes(self, names: Iterable[str]) -> tuple[int, ...]:
        idx = []
        for n in names:
            try:
                idx.append(self.axis_names.index(n))
            except ValueError:
                raise UsageError(f"unknown axis {n!r}; have {self.axis_names}") from None
        return tuple(idx)

    def marginal(self, names: Iterable[str]) -> np.ndarray:
        """Marginal table over ``names`` (axes kept in the joint's order)."""
        keep = set(self._axes(names))
        drop = tuple(i for i in range(self.probs.ndim) if i not in keep)
        return self.probs.sum(axis=drop)

    def entropy(self, names: Iterable[str]) -> float:
        names = tuple(names)
        if not names:
            return 0.0
        return entropy_bits(self.marginal(names))


def _group(g) -> tuple[str, ...]:
    if isinstance(g, str):
        return (g,)
    return tuple(g)


def _disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        if not g:
            raise UsageError("empty variable group")
        if seen.intersection(g):
            raise UsageError(f"variable groups overlap: {groups}")
        seen.update(g)


def entropy(d: FiniteDist | Sequence[float]) -> float:
    """Entropy in bits of a finite distribution.

    Plain sequences are validated by wrapping them in :class:`FiniteDist`.
    """
    if not isinstance(d, FiniteDist):
        d = FiniteDist(np.asarray(d, dtype=float))
    return entropy_bits(d.probs)


def mutual_information(j: JointDist, group_a, group_b) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B) for disjoint axis groups of ``j``."""
    a, b = _group(group_a), _group(group_b)
    _disjoint(a, b)
    value = j.entropy(a) + j.entropy(b) - j.entropy(a + b)
    return _clamp_small_negative(value)


def conditional_mutual_information(j: JointDist, group_a, group_b, group_c) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)."""
    a, b, c = _group(group_a), _group(group_b), _group(group_c)
    _disjoint(a, b, c)
    value = j.entropy(a + c) + j.entropy(b + c) - j.entropy(a + b + c) - j.entropy(c)
    return _clamp_small_negative(value)


def _check_unit(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def binary_convolution(p, q):
    """Crossover of two cascaded binary symmetric noises, p(1-q) + q(1-p)."""
    p = _check_unit(p, "p")
    q = _check_unit(q, "q")
    return _scalar_or_array(p * (1.0 - q) + q * (1.0 - p))


def binary_entropy(p):
    """Binary entropy h(p) in bits; accepts scalars or arrays."""
    p = _check_unit(p, "p")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > ZERO_PROB, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        q = 1.0 - p
        terms = terms + np.where(q > ZERO_PROB, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return _scalar_or_array(terms)


def ternary_entropy(p: float, q: float, r: float) -> float:
    for name, v in (("p", p), ("q", q), ("r", r)):
        _check_unit(v, name)
    if abs(p + q + r - 1.0) > MASS_TOL:
        raise ValidationError(f"ternary masses sum to {p + q + r!r}, not 1")
    return entropy_bits([p, q, r])


# --------------------------------------------------------------------------
# Rate points and frontiers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RatePoint:
    """An (amplification, leakage) pair in bits per channel use.

    ``r_u``, ``u_card`` and ``policy`` record how the point was produced and
    take no part in equality.
    """

    r_a: float
    r_l: float
    r_u: float = field(default=0.0, compare=False)
    u_card: int | None = field(default=None, compare=False)
    policy: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "r_a", float(_clamp_small_negative(self.r_a)))
        object.__setattr__(self, "r_l", float(_clamp_small_negative(self.r_l)))
        if not (self.r_a >= 0.0 and self.r_l >= 0.0):
            raise ValidationError(f"rates must be nonnegative, got ({self.r_a!r}, {self.r_l!r})")

    def dominates(self, other: "RatePoint") -> bool:
        ge = self.r_a >= other.r_a and self.r_l <= other.r_l
        return ge and (self.r_a > other.r_a or self.r_l < other.r_l)


@dataclass(frozen=True)
class Frontier:
    """Non-dominated rate points sorted by increasing leakage."""

    points: tuple[RatePoint, ...]
    kind: str = "inner"
    hull_applied: bool = False
    label: str = ""
    note: str = ""

    def __post_init__(self):
        if self.kind not in ("inner", "outer"):
            raise UsageError(f"frontier kind must be inner|outer, got {self.kind!r}")
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def r_a(self) -> np.ndarray:
        return np.array([p.r_a for p in self.points])

    @property
    def r_l(self) -> np.ndarray:
        return np.array([p.r_l for p in self.points])

    def max_difference(self) -> float:
        """Largest r_a - r_l over the frontier (-inf when empty)."""
        if not self.points:
            return -math.inf
        return float(np.max(self.r_a - self.r_l))

    def envelope_at(self, r_l: float) -> float:
        """Best amplification available at leakage ``r_l``.

        Hull frontiers interpolate linearly between vertices; plain
        frontiers are read as a staircase.  Both extend flat to the right
        and return -inf left of the first point.
        """
        if not self.points or r_l < self.points[0].r_l:
            return -math.inf
        xs, ys = self.r_l, self.r_a
        if self.hull_applied:
            return float(np.interp(r_l, xs, ys))
        return float(ys[xs <= r_l].max())

    def covers(self, point: RatePoint, tol: float = 1e-6) -> bool:
        """True if ``point`` lies under this frontier within ``tol``."""
        return self.envelope_at(point.r_l + tol) >= point.r_a - tol


def pareto_mask(r_a: np.ndarray, r_l: np.ndarray) -> np.ndarray:
    """Indices of the non-dominated points, sorted by increasing r_l.

    Exact duplicates keep the first occurrence in input order.
    """
    r_a = np.asarray(r_a, dtype=float)
    r_l = np.asarray(r_l, dtype=float)
    if r_a.size == 0:
        return np.zeros(0, dtype=int)
    # lexsort: last key is primary
    order = np.lexsort((np.arange(r_a.size), -r_a, r_l))
    sorted_a = r_a[order]
    best_before = np.maximum.accumulate(np.concatenate(([-np.inf], sorted_a[:-1])))
    return order[sorted_a > best_before]


def pareto_frontier(points: Sequence[RatePoint], kind: str = "inner", label: str = "") -> Frontier:
    if len(points) == 0:
        raise UsageError("pareto_frontier needs at least one point")
    r_a = np.array([p.r_a for p in points])
    r_l = np.array([p.r_l for p in points])
    keep = pareto_mask(r_a, r_l)
    return Frontier(tuple(points[i] for i in keep), kind=kind, hull_applied=False, label=label)


def _upper_hull(points: Sequence[RatePoint]) -> list[RatePoint]:
    hull: list[RatePoint] = []
    for p in points:
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (a.r_l - o.r_l) * (p.r_a - o.r_a) - (a.r_a - o.r_a) * (p.r_l - o.r_l)
            # a on or below the chord o -> p
            if cross >= -HULL_TOL:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def convex_hull_envelope(f: Frontier) -> Frontier:
    """Upper concave envelope of r_a over r_l (time-sharing closure)."""
    if not f.points:
        raise UsageError("convex_hull_envelope needs a nonempty frontier")
    pts = f.points
    if not all(pts[i].r_l <= pts[i + 1].r_l for i in range(len(pts) - 1)):
        pts = pareto_frontier(pts, kind=f.kind).points
    return Frontier(tuple(_upper_hull(pts)), kind=f.kind, hull_applied=True, label=f.label, note=f.note)
