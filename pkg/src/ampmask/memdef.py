"""Memory with stuck-at defective cells, read by Eve through a BSC.

States: 0 stuck at 0 (prob p), 1 stuck at 1 (prob q), 2 good cell (prob r),
where Bob reads y = x.  Eve observes z = y xor Bern(n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Policy, StateDMC
from .errors import UsageError, ValidationError
from .info import (
    MASS_TOL,
    FiniteDist,
    Frontier,
    RatePoint,
    binary_convolution as conv,
    binary_entropy as h2,
    convex_hull_envelope,
    pareto_frontier,
    pareto_mask,
    ternary_entropy,
)
from .regions import batch_terms, eval_r1, eval_r2, eval_rout1


@dataclass(frozen=True)
class MemdefParams:
    p: float
    q: float
    r: float
    n: float
    # Pr{X=1}: one float for X independent of S, or a triple (per state)
    alpha: float | tuple[float, float, float] = 0.5

    def __post_init__(self):
        for name in ("p", "q", "r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v!r} must lie in [0, 1]")
        if abs(self.p + self.q + self.r - 1.0) > MASS_TOL:
            raise ValidationError(f"p + q + r = {self.p + self.q + self.r!r}, not 1")
        if not 0.0 <= self.n <= 0.5:
            raise ValidationError(f"n={self.n!r} must lie in [0, 0.5]")
        alphas = self.alpha if isinstance(self.alpha, tuple) else (self.alpha,)
        if len(alphas) not in (1, 3) or any(not 0.0 <= a <= 1.0 for a in alphas):
            raise ValidationError(f"alpha must be one or three values in [0, 1], got {self.alpha!r}")

    @property
    def single_alpha(self) -> bool:
        return not isinstance(self.alpha, tuple)

    def input_law(self) -> np.ndarray:
        """p(x|s) as a (3, 2) array."""
        a = (self.alpha,) * 3 if self.single_alpha else self.alpha
        return np.array([[1.0 - ai, ai] for ai in a])


def _bob_output(s: int, x: int) -> int:
    return (0, 1, x)[s]


def build_memdef_channel(mp: MemdefParams) -> StateDMC:
    k = np.zeros((3, 2, 2, 2))
    for s in range(3):
        for x in range(2):
            y = _bob_output(s, x)
            k[s, x, y, y] = 1.0 - mp.n
            k[s, x, y, 1 - y] = mp.n
    return StateDMC(FiniteDist([mp.p, mp.q, mp.r]), k)


def memdef_entropies(mp: MemdefParams) -> dict[str, float]:
    """Closed-form entropies for X independent of S with Pr{X=1} = alpha."""
    if not mp.single_alpha:
        raise UsageError("closed forms need a single alpha; use generic evaluation for p(x|s)")
    a, n = mp.alpha, mp.n
    return {
        "H_S": ternary_entropy(mp.p, mp.q, mp.r),
        "H_Y_given_S": mp.r * h2(a),
        "H_Y": h2(mp.q + mp.r * a),
        "H_Z_given_S": (mp.p + mp.q) * h2(n) + mp.r * h2(conv(a, n)),
        "H_Z": h2(conv(mp.q + mp.r * a, n)),
    }


def coded_policy(mp: MemdefParams) -> Policy:
    """U = Y: the auxiliary is Bob's (deterministic) output."""
    px = mp.input_law()
    t = np.zeros((3, 2, 2))
    for s in range(3):
        for x in range(2):
            t[s, _bob_output(s, x), x] += px[s, x]
    return Policy(t)


def memdef_points(mp: MemdefParams) -> dict[str, RatePoint]:
    """Un-coded, coded (U=Y) and outer-corner points at the params' alpha.

    Leakage is capped at H(S), since any R_l >= H(S) is trivially met.
    """
    if mp.single_alpha:
        e = memdef_entropies(mp)
        i_sy = e["H_Y"] - e["H_Y_given_S"]
        i_sz = e["H_Z"] - e["H_Z_given_S"]
        amp = min(e["H_S"], e["H_Y"])
        pts = {
            "uncoded": (i_sy, i_sz),
            "coded": (amp, e["H_Z"] - h2(mp.n)),
            "outer": (amp, i_sz),
        }
        h_s = e["H_S"]
    else:
        ch = build_memdef_channel(mp)
        flat = Policy.from_input_law(mp.input_law())
        r1, rout = eval_r1(ch, flat), eval_rout1(ch, flat)
        r2 = eval_r2(ch, coded_policy(mp))
        pts = {
            "uncoded": (r1.point.r_a, r1.point.r_l),
            "coded": (r2.point.r_a, r2.point.r_l),
            "outer": (rout.point.r_a, rout.point.r_l),
        }
        h_s = ternary_entropy(mp.p, mp.q, mp.r)
    return {k: RatePoint(a, min(l, h_s)) for k, (a, l) in pts.items()}


def _cube_points(mp: MemdefParams, alphas: np.ndarray, chunk: int = 50_000) -> dict[str, tuple]:
    """Batch version of the generic branch of :func:`memdef_points` for (K, 3) alphas."""
    ch = build_memdef_channel(mp)
    h_s = ternary_entropy(mp.p, mp.q, mp.r)
    out = {name: ([], []) for name in ("uncoded", "coded", "outer")}
    for start in range(0, len(alphas), chunk):
        a = alphas[start:start + chunk]
        px = np.stack([1.0 - a, a], axis=-1)  # (K, 3, 2)
        flat = batch_terms(ch, px[:, :, None, :])
        coded = np.zeros((len(a), 3, 2, 2))
        coded[:, 0, 0, :] = px[:, 0]
        coded[:, 1, 1, :] = px[:, 1]
        coded[:, 2, 0, 0] = px[:, 2, 0]
        coded[:, 2, 1, 1] = px[:, 2, 1]
        ct = batch_terms(ch, coded)
        rows = {
            "uncoded": (flat.i_s_y, flat.i_s_z),
            "coded": (np.minimum(ct.h_s, ct.i_us_y), ct.i_us_z),
            "outer": (np.minimum(flat.h_s, flat.i_xs_y), flat.i_s_z),
        }
        for name, (r_a, r_l) in rows.items():
            out[name][0].append(r_a)
            out[name][1].append(np.minimum(r_l, h_s))
    return {k: (np.concatenate(a), np.concatenate(l)) for k, (a, l) in out.items()}


def memdef_regions(p: float, q: float, r: float, n: float, grid: int = 101,
                   general: bool = False, hull: bool = True) -> dict[str, Frontier]:
    """Sweep the input law and return the un-coded, coded and outer frontiers.

    By default alpha = Pr{X=1} is swept on ``grid`` points with X
    independent of S; ``general`` sweeps the per-state cube instead.
    """
    if grid < 2:
        raise UsageError("grid must be >= 2")
    values = np.linspace(0.0, 1.0, grid)
    found: dict[str, list[RatePoint]] = {"uncoded": [], "coded": [], "outer": []}
    if general:
        cube = np.array(np.meshgrid(values, values, values, indexing="ij")).reshape(3, -1).T
        arrays = _cube_points(MemdefParams(p, q, r, n), cube)
        for name, (r_a, r_l) in arrays.items():
            # filter before building point objects; the cube can hold ~10^6 policies
            for i in pareto_mask(r_a, r_l):
                found[name].append(RatePoint(r_a[i], r_l[i], policy=tuple(float(v) for v in cube[i])))
    else:
        for a in values:
            pts = memdef_points(MemdefParams(p, q, r, n, float(a)))
            for name, pt in pts.items():
                found[name].append(RatePoint(pt.r_a, pt.r_l, policy=float(a)))
    out = {}
    for name, pts in found.items():
        kind = "outer" if name == "outer" else "inner"
        f = pareto_frontier(pts, kind=kind, label=name)
        out[name] = convex_hull_envelope(f) if hull else f
    return out
