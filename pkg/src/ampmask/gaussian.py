"""Gaussian state channel Y = X + S + N, Z = X + S + N_z with E[X^2] <= P.

The un-coded input X = rho (sigma_x / sigma_s) S + sqrt(1 - rho^2) sigma_x V
is described by an :class:`UncodedScheme`.  Every quantity is closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, PreconditionError, UsageError, ValidationError
from .info import Frontier, RatePoint, convex_hull_envelope, pareto_frontier
from .regions import Bound, CdResult, RegionEvalResult

POWER_TOL = 1e-12


def _half_log2(x):
    return 0.5 * np.log2(x)


@dataclass(frozen=True)
class GaussianParams:
    sigma_s2: float
    sigma_n2: float
    sigma_nz2: float
    power: float

    def __post_init__(self):
        for name in ("sigma_s2", "sigma_n2", "sigma_nz2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name}={v!r} must be strictly positive")
        if not (math.isfinite(self.power) and self.power >= 0.0):
            raise ValidationError(f"power={self.power!r} must be nonnegative")

    @property
    def sigma_s(self) -> float:
        return math.sqrt(self.sigma_s2)

    @property
    def degraded(self) -> bool:
        return self.sigma_n2 <= self.sigma_nz2


@dataclass(frozen=True)
class UncodedScheme:
    rho: float
    sigma_x: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValidationError(f"rho={self.rho!r} must lie in [-1, 1]")
        if not self.sigma_x >= 0.0:
            raise ValidationError(f"sigma_x={self.sigma_x!r} must be nonnegative")


def _check_power(gp: GaussianParams, sigma_x) -> None:
    if np.any(np.asarray(sigma_x) ** 2 > gp.power + POWER_TOL):
        raise ValidationError(f"sigma_x^2 exceeds the power budget P={gp.power}")


def _uncoded_rates(gp: GaussianParams, rho, sigma_x):
    s = gp.sigma_s
    signal = gp.sigma_s2 + 2.0 * rho * s * sigma_x + rho**2 * sigma_x**2
    # rounding can push (sigma_s - sigma_x)^2 slightly below zero at rho = -1
    signal = np.maximum(signal, 0.0)
    extra = (1.0 - rho**2) * sigma_x**2
    r_a = _half_log2(1.0 + signal / (gp.sigma_n2 + extra))
    r_l = _half_log2(1.0 + signal / (gp.sigma_nz2 + extra))
    return r_a, r_l


def _outer_amplification(gp: GaussianParams, rho, sigma_x):
    total = np.maximum(gp.sigma_s2 + sigma_x**2 + 2.0 * rho * gp.sigma_s * sigma_x, 0.0)
    return _half_log2(1.0 + total / gp.sigma_n2)


def uncoded_point(gp: GaussianParams, sch: UncodedScheme) -> RatePoint:
    """(I(S;Y), I(S;Z)) achieved by forwarding the state plus fresh noise."""
    _check_power(gp, sch.sigma_x)
    r_a, r_l = _uncoded_rates(gp, sch.rho, sch.sigma_x)
    return RatePoint(float(r_a), float(r_l), policy=(sch.rho, sch.sigma_x))


def scheme_grid(gp: GaussianParams, grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (rho, sigma_x) grid: rho on [-1, 1], sigma_x^2 on [0, P]."""
    if grid < 2:
        raise UsageError("grid must be >= 2")
    rho = np.linspace(-1.0, 1.0, grid)
    sx = np.sqrt(np.linspace(0.0, gp.power, grid))
    r, x = np.meshgrid(rho, sx, indexing="ij")
    r, x = r.ravel(), x.ravel()
    if gp.power >= gp.sigma_s2:
        # X = -S, the zero-leakage scheme
        r = np.append(r, -1.0)
        x = np.append(x, gp.sigma_s)
    return r, x


def _frontier(r_a, r_l, rho, sx, kind: str, label: str, hull: bool) -> Frontier:
    pts = [RatePoint(a, l, policy=(float(p), float(s))) for a, l, p, s in zip(r_a, r_l, rho, sx)]
    f = pareto_frontier(pts, kind=kind, label=label)
    return convex_hull_envelope(f) if hull else f


def uncoded_region(gp: GaussianParams, grid: int = 101, hull: bool = True) -> Frontier:
    rho, sx = scheme_grid(gp, grid)
    r_a, r_l = _uncoded_rates(gp, rho, sx)
    return _frontier(r_a, r_l, rho, sx, "inner", "uncoded", hull)


def outer_point(gp: GaussianParams, sch: UncodedScheme) -> RegionEvalResult:
    """Quadrant corner (A, L) of the outer bound for correlation rho and power sigma_x^2."""
    _check_power(gp, sch.sigma_x)
    a = _outer_amplification(gp, sch.rho, sch.sigma_x)
    _, l = _uncoded_rates(gp, sch.rho, sch.sigma_x)
    pt = RatePoint(float(a), float(l), policy=(sch.rho, sch.sigma_x))
    return RegionEvalResult(pt, True, 0.0, Bound.ROUT2)


def outer_region(gp: GaussianParams, grid: int = 101, hull: bool = True) -> Frontier:
    rho, sx = scheme_grid(gp, grid)
    a = _outer_amplification(gp, rho, sx)
    _, l = _uncoded_rates(gp, rho, sx)
    return _frontier(a, l, rho, sx, "outer", "outer", hull)


def _require_degraded(gp: GaussianParams) -> None:
    if not gp.degraded:
        raise PreconditionError(
            f"needs sigma_n2 <= sigma_nz2 (got {gp.sigma_n2} > {gp.sigma_nz2})"
        )


def rarl_difference_bound(gp: GaussianParams, sch: UncodedScheme) -> float:
    """Upper bound on R_a - R_l for a given (rho, sigma_x), degraded case only."""
    _require_degraded(gp)
    _check_power(gp, sch.sigma_x)
    total = max(gp.sigma_s2 + 2.0 * sch.rho * gp.sigma_s * sch.sigma_x + sch.sigma_x**2, 0.0)
    return float(_half_log2(1.0 + total / gp.sigma_n2) - _half_log2(1.0 + total / gp.sigma_nz2))


def cd_gaussian(gp: GaussianParams) -> CdResult:
    """Differential amplification capacity, attained by X = sqrt(P)/sigma_s * S."""
    _require_degraded(gp)
    v = (gp.sigma_s + math.sqrt(gp.power)) ** 2
    c_d = _half_log2(1.0 + v / gp.sigma_n2) - _half_log2(1.0 + v / gp.sigma_nz2)
    return CdResult(float(c_d), None, "closed_form")


def cd_curve(sigma_s2: float, sigma_n2: float, sigma_nz2: float, powers_db) -> list[tuple[float, float, float]]:
    """C_d against input power; rows are (P in dB, P, C_d)."""
    rows = []
    for db in powers_db:
        p = 10.0 ** (db / 10.0)
        rows.append((float(db), p, cd_gaussian(GaussianParams(sigma_s2, sigma_n2, sigma_nz2, p)).c_d))
    return rows


def gap_ra(gp: GaussianParams, sch: UncodedScheme) -> float:
    """I(X;Y|S): outer amplification minus un-coded amplification."""
    return float(_half_log2(1.0 + sch.sigma_x**2 * (1.0 - sch.rho**2) / gp.sigma_n2))


def gap_rl(gp: GaussianParams, sch: UncodedScheme) -> float:
    """Bound on the leakage excess of the matched pure-forwarding scheme."""
    return float(_half_log2(1.0 + sch.sigma_x**2 * (1.0 - sch.rho**2) / gp.sigma_nz2))


def matched_sigma_x(gp: GaussianParams, sch: UncodedScheme) -> float:
    """Power sigma_x' of pure forwarding X = sign(rho) sigma_x'/sigma_s S with the same outer R_a.

    Solves t^2 + 2 sign(rho) sigma_s t = sigma_x^2 + 2 rho sigma_s sigma_x on
    [0, sqrt(P)], taking the smallest admissible root.  rho = 0 uses sign +1
    and emits a RuntimeWarning.
    """
    _check_power(gp, sch.sigma_x)
    if sch.rho == 0.0:
        warnings.warn("rho = 0: sign(rho) taken as +1", RuntimeWarning, stacklevel=2)
        sign = 1.0
    else:
        sign = math.copysign(1.0, sch.rho)
    s = gp.sigma_s
    c = sch.sigma_x**2 + 2.0 * sch.rho * s * sch.sigma_x
    disc = max(s * s + c, 0.0)
    root = math.sqrt(disc)
    candidates = sorted((-sign * s - root, -sign * s + root))
    top = math.sqrt(gp.power)
    tol = 1e-12 * max(1.0, top)
    for t in candidates:
        if -tol <= t <= top + tol:
            return float(min(max(t, 0.0), top))
    raise ConsistencyError(
        f"no sigma_x' in [0, {top:.6g}] matches rho={sch.rho}, sigma_x={sch.sigma_x}"
    )
