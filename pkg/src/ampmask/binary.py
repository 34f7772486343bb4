"""Modulo-additive binary channel Y = X+S+N, Z = X+S+N_z (mod 2)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Policy, StateDMC
from .errors import ValidationError
from .info import (
    FiniteDist,
    Frontier,
    RatePoint,
    binary_convolution,
    binary_entropy,
    convex_hull_envelope,
    pareto_frontier,
)
from .regions import CdResult, SearchConfig, cd_sweep


@dataclass(frozen=True)
class BinaryParams:
    p_s: float
    p_n: float
    p_nz: float

    def __post_init__(self):
        for name in ("p_s", "p_n", "p_nz"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValidationError(f"{name}={v!r} must lie in [0, 0.5]")


def _bern(p: float) -> np.ndarray:
    return np.array([1.0 - p, p])


def build_binary_channel(bp: BinaryParams) -> StateDMC:
    """Independent noises N ~ Bern(p_n) at Bob and N_z ~ Bern(p_nz) at Eve."""
    n, nz = _bern(bp.p_n), _bern(bp.p_nz)
    k = np.zeros((2, 2, 2, 2))
    for s, x, y, z in np.ndindex(k.shape):
        k[s, x, y, z] = n[y ^ x ^ s] * nz[z ^ x ^ s]
    return StateDMC(FiniteDist(_bern(bp.p_s)), k)


def build_binary_cascade(p_s: float, p_first: float, p_second: float, reverse: bool = False) -> StateDMC:
    """Physically degraded binary cascade.

    Forward: Y = X+S+N1 and Z = Y+N2.  With ``reverse`` the receivers swap
    roles, Z = X+S+N1 and Y = Z+N2, so Bob sees a degraded copy of Eve.
    """
    first, second = _bern(p_first), _bern(p_second)
    k = np.zeros((2, 2, 2, 2))
    for s, x, y, z in np.ndindex(k.shape):
        near, far = (z, y) if reverse else (y, z)
        k[s, x, y, z] = first[near ^ x ^ s] * second[far ^ near]
    return StateDMC(FiniteDist(_bern(p_s)), k)


def cancelation_policy(p_u: float) -> Policy:
    """U ~ Bern(p_u) independent of S, X = U xor S."""
    t = np.zeros((2, 2, 2))
    for s in range(2):
        for u in range(2):
            t[s, u, u ^ s] = (1.0 - p_u, p_u)[u]
    return Policy(t)


def sc_point(bp: BinaryParams, p_u: float) -> RatePoint:
    ra = min(binary_entropy(bp.p_s),
             binary_entropy(binary_convolution(p_u, bp.p_n)) - binary_entropy(bp.p_n))
    rl = binary_entropy(binary_convolution(p_u, bp.p_nz)) - binary_entropy(bp.p_nz)
    return RatePoint(ra, rl, policy=float(p_u), u_card=2)


def sc_points(bp: BinaryParams, p_u_grid: int) -> list[tuple[float, RatePoint]]:
    """Raw state-cancelation points on an evenly spaced p_u grid over [0, 0.5]."""
    if p_u_grid < 2:
        raise ValidationError("p_u grid resolution must be >= 2")
    out = []
    for p_u in np.linspace(0.0, 0.5, p_u_grid):
        # always true for p_u, p_s in [0, 0.5]; kept as the region's stated constraint
        if binary_convolution(p_u, bp.p_s) <= 0.5 + 1e-12:
            out.append((float(p_u), sc_point(bp, float(p_u))))
    return out


def sc_region(bp: BinaryParams, p_u_grid: int = 101) -> Frontier:
    pts = [p for _, p in sc_points(bp, p_u_grid)]
    f = pareto_frontier(pts, kind="inner", label="sc")
    return convex_hull_envelope(f)


def cd_closed_form_applies(bp: BinaryParams) -> bool:
    return bp.p_n <= bp.p_nz and binary_entropy(bp.p_s) >= 1.0 - binary_entropy(bp.p_n) - 1e-12


def binary_cd(bp: BinaryParams, cfg: SearchConfig | None = None) -> CdResult:
    """C_d = h(p_nz) - h(p_n) when p_n <= p_nz and h(p_s) >= 1 - h(p_n).

    Outside those hypotheses no closed form is known and the value is an
    inner estimate from a p(x|s) sweep (``method == "sweep"``).
    """
    if cd_closed_form_applies(bp):
        value = binary_entropy(bp.p_nz) - binary_entropy(bp.p_n)
        return CdResult(float(value), cancelation_policy(0.5), "closed_form")
    return cd_sweep(build_binary_channel(bp), cfg)
