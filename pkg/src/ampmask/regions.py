"""Inner and outer amplification-leakage bounds for state-dependent DMCs.

Each bound is evaluated at a single policy p(u,x|s) from a handful of
information terms.  The formulas live in ``_bound_arrays`` and operate on
numpy arrays, so the same code serves single evaluations (terms computed
through :mod:`ampmask.info` on an explicit joint) and vectorised sweeps
(terms computed by :func:`batch_terms`).

Inner bounds (R1 ... R5) report the best point of a policy: maximal
amplification, minimal leakage.  Outer bounds report quadrant corners; a
rate pair can only be achievable if some corner dominates it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np

from .channel import (
    MI_TERMS,
    DegradednessReport,
    Policy,
    StateDMC,
    build_joint,
    check_degraded,
    physically_degraded_version,
)
from .errors import PreconditionError, UsageError
from .info import (
    Frontier,
    RatePoint,
    batch_entropy,
    convex_hull_envelope,
    pareto_mask,
)

FEAS_SLACK = 1e-9
RU_STEPS = 8
RU_FRACTIONS = np.linspace(0.0, 1.0, RU_STEPS + 1)
# tangent weights for the scalarised local refinement, r_a - lam * r_l
REFINE_WEIGHTS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 16.0)


class Bound(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R5 = "R5"
    ROUT1 = "Rout1"
    ROUT2 = "Rout2"

    @classmethod
    def parse(cls, name) -> "Bound":
        if isinstance(name, cls):
            return name
        for b in cls:
            if b.value.lower() == str(name).lower():
                return b
        raise UsageError(f"unknown bound {name!r}; choose from {[b.value for b in cls]}")

    @property
    def is_outer(self) -> bool:
        return self in (Bound.ROUT1, Bound.ROUT2)

    @property
    def uses_refinement_rate(self) -> bool:
        return self in (Bound.R3, Bound.R4, Bound.R5)


@dataclass(frozen=True)
class PolicyTerms:
    """Information terms of one policy (floats) or of a batch (arrays)."""

    h_s: object
    i_u_y: object
    i_u_s: object
    i_u_z: object
    i_s_y: object
    i_s_z: object
    i_s_yu: object
    i_s_zu: object
    i_us_y: object
    i_us_z: object
    i_xs_y: object
    i_xs_z: object
    h_s_given_yu: object


_TERM_KEYS = {
    "h_s": "H(S)", "i_u_y": "I(U;Y)", "i_u_s": "I(U;S)", "i_u_z": "I(U;Z)",
    "i_s_y": "I(S;Y)", "i_s_z": "I(S;Z)", "i_s_yu": "I(S;Y,U)", "i_s_zu": "I(S;Z,U)",
    "i_us_y": "I(U,S;Y)", "i_us_z": "I(U,S;Z)", "i_xs_y": "I(X,S;Y)", "i_xs_z": "I(X,S;Z)",
    "h_s_given_yu": "H(S|Y,U)",
}


def policy_terms(ch: StateDMC, pol: Policy) -> PolicyTerms:
    """All terms of one policy, through the explicit five-variable joint."""
    j = build_joint(ch, pol)
    return PolicyTerms(**{f: float(MI_TERMS[key](j)) for f, key in _TERM_KEYS.items()})


def batch_terms(ch: StateDMC, tables: np.ndarray) -> PolicyTerms:
    """Vectorised :func:`policy_terms` for policy tables of shape (B, S, U, X)."""
    ps = ch.state_law.probs
    k = ch.kernel
    b = tables.shape[0]
    psux = ps[None, :, None, None] * tables
    joint = psux[..., None, None] * k[None, :, None, :, :, :]  # (B,S,U,X,Y,Z)
    p_suy = joint.sum(axis=(3, 5))
    p_suz = joint.sum(axis=(3, 4))
    p_su = psux.sum(axis=3)
    p_sx = psux.sum(axis=2)
    p_sxy = np.einsum("bsx,sxy->bsxy", p_sx, ch.p_y)
    p_sxz = np.einsum("bsx,sxz->bsxz", p_sx, ch.p_z)
    p_y = p_suy.sum(axis=(1, 2))
    p_z = p_suz.sum(axis=(1, 2))

    H = batch_entropy
    h_s = np.full(b, H(ps[None, :])[0])
    h_u = H(p_su.sum(axis=1))
    h_su = H(p_su)
    h_y, h_z = H(p_y), H(p_z)
    h_uy, h_uz = H(p_suy.sum(axis=1)), H(p_suz.sum(axis=1))
    h_sy, h_sz = H(p_suy.sum(axis=2)), H(p_suz.sum(axis=2))
    h_suy, h_suz = H(p_suy), H(p_suz)
    h_sx, h_sxy, h_sxz = H(p_sx), H(p_sxy), H(p_sxz)

    def clamp(v):
        return np.where((v < 0) & (v >= -1e-12), 0.0, v)

    return PolicyTerms(
        h_s=h_s,
        i_u_y=clamp(h_u + h_y - h_uy),
        i_u_s=clamp(h_u + h_s - h_su),
        i_u_z=clamp(h_u + h_z - h_uz),
        i_s_y=clamp(h_s + h_y - h_sy),
        i_s_z=clamp(h_s + h_z - h_sz),
        i_s_yu=clamp(h_s + h_uy - h_suy),
        i_s_zu=clamp(h_s + h_uz - h_suz),
        i_us_y=clamp(h_su + h_y - h_suy),
        i_us_z=clamp(h_su + h_z - h_suz),
        i_xs_y=clamp(h_sx + h_y - h_sxy),
        i_xs_z=clamp(h_sx + h_z - h_sxz),
        h_s_given_yu=np.maximum(h_suy - h_uy, 0.0),
    )


def _index_terms(t: PolicyTerms, idx) -> PolicyTerms:
    return PolicyTerms(**{f.name: np.asarray(getattr(t, f.name))[idx] for f in fields(t)})


# --------------------------------------------------------------------------
# Bound formulas
# --------------------------------------------------------------------------


def refinement_cap(bound: Bound, t: PolicyTerms):
    """Largest admissible refinement rate R_u (clamped at zero)."""
    if bound in (Bound.R3, Bound.R4):
        cap = np.minimum(t.i_u_y - t.i_u_s, t.h_s_given_yu)
    elif bound is Bound.R5:
        cap = np.minimum(t.i_u_y - np.maximum(t.i_u_s, t.i_u_z), t.h_s_given_yu)
    else:
        cap = np.zeros_like(np.asarray(t.i_u_y, dtype=float))
    return np.maximum(cap, 0.0)


def feasible_mask(bound: Bound, t: PolicyTerms):
    gp = np.asarray(t.i_u_y - t.i_u_s) >= -FEAS_SLACK
    if bound is Bound.R4:
        return gp & (np.asarray(t.i_u_y - t.i_u_z) >= -FEAS_SLACK)
    if bound is Bound.ROUT1:
        return np.asarray(t.i_u_z - t.i_u_s) >= -FEAS_SLACK
    return gp


def _bound_arrays(bound: Bound, t: PolicyTerms, r_u, d_xs_y_z=None):
    """(r_a, r_l) of a bound for refinement rates ``r_u`` (broadcast).

    For Rout2, ``d_xs_y_z`` is I(X,S;Y|Z) and the result has two columns:
    the extreme points of the quadrant clipped by r_a - r_l <= d.
    """
    if bound is Bound.R1:
        return t.i_s_yu, np.minimum(t.i_s_zu, t.i_us_z)
    if bound is Bound.R2:
        return np.minimum(t.h_s, t.i_us_y), t.i_us_z
    if bound is Bound.R3:
        return t.i_s_yu + r_u, np.minimum(t.i_us_z, t.i_s_zu + r_u)
    if bound is Bound.R4:
        secured = np.minimum(r_u, np.maximum(t.i_u_z - t.i_u_s, 0.0))
        return t.i_s_yu + r_u, np.minimum(t.i_us_z, t.i_s_zu + secured)
    if bound is Bound.R5:
        r_a = t.i_s_yu + r_u
        return r_a, np.minimum(t.i_us_z, t.i_s_zu) + np.zeros_like(r_a)
    a = np.minimum(t.h_s, t.i_xs_y)
    low = t.i_s_zu
    if bound is Bound.ROUT1:
        return a, low
    d = np.maximum(d_xs_y_z, 0.0)
    r_a = np.stack([np.minimum(a, low + d), a], axis=-1)
    r_l = np.stack([low, np.maximum(a - d, low)], axis=-1)
    return r_a, r_l


@dataclass(frozen=True)
class RegionEvalResult:
    point: RatePoint
    feasible: bool
    r_u_used: float
    bound_name: Bound
    # Rout2 only: both ends of the clipped quadrant boundary
    vertices: tuple[RatePoint, ...] = ()


def _resolve_r_u(bound: Bound, t: PolicyTerms, r_u, feasible: bool) -> float:
    cap = float(refinement_cap(bound, t))
    if isinstance(r_u, str):
        if r_u != "max":
            raise UsageError(f"r_u must be a number or 'max', got {r_u!r}")
        return cap
    r_u = float(r_u)
    if r_u < -1e-12 or (feasible and r_u > cap + FEAS_SLACK):
        raise UsageError(f"r_u={r_u:.6g} outside [0, {cap:.6g}] for {bound.value}")
    return min(max(r_u, 0.0), cap)


def _evaluate(bound: Bound, ch: StateDMC, pol: Policy, r_u=0.0) -> RegionEvalResult:
    t = policy_terms(ch, pol)
    feas = bool(feasible_mask(bound, t))
    ru = _resolve_r_u(bound, t, r_u, feas) if bound.uses_refinement_rate else 0.0
    r_a, r_l = _bound_arrays(bound, t, ru)
    point = RatePoint(float(r_a), float(r_l), r_u=ru, u_card=pol.u_cardinality, policy=pol.table)
    return RegionEvalResult(point, feas, ru, bound)


def eval_r1(ch: StateDMC, pol: Policy) -> RegionEvalResult:
    """State covering: (I(S;Y,U), min{I(S;Z,U), I(U,S;Z)})."""
    return _evaluate(Bound.R1, ch, pol)


def eval_r2(ch: StateDMC, pol: Policy) -> RegionEvalResult:
    """State-enhanced messaging: (min{H(S), I(U,S;Y)}, I(U,S;Z))."""
    return _evaluate(Bound.R2, ch, pol)


def eval_r3(ch: StateDMC, pol: Policy, r_u="max") -> RegionEvalResult:
    return _evaluate(Bound.R3, ch, pol, r_u)


def eval_r4(ch: StateDMC, pol: Policy, r_u="max") -> RegionEvalResult:
    """Secure refinement; also requires I(U;Y) >= I(U;Z)."""
    return _evaluate(Bound.R4, ch, pol, r_u)


def eval_r5(ch: StateDMC, pol: Policy, r_u="max") -> RegionEvalResult:
    return _evaluate(Bound.R5, ch, pol, r_u)


def eval_rout1(ch: StateDMC, pol: Policy) -> RegionEvalResult:
    return _evaluate(Bound.ROUT1, ch, pol)


def _require_degraded(ch: StateDMC, report: DegradednessReport | None) -> DegradednessReport:
    if report is None or report.factor_forward is None:
        report = check_degraded(ch, "forward")
    if not report.degraded:
        raise PreconditionError(
            f"Rout2 needs a degraded channel; best q(z|y) leaves residual {report.residual_forward:.3e}"
        )
    return report


def eval_rout2(ch: StateDMC, pol: Policy, report: DegradednessReport | None = None) -> RegionEvalResult:
    """Degraded-channel converse.

    I(X,S;Y|Z) is evaluated on the physically degraded channel
    p(y|x,s) q(z|y), which has the same marginals as ``ch``.
    """
    report = _require_degraded(ch, report)
    t = policy_terms(ch, pol)
    surrogate = physically_degraded_version(ch, report.factor_forward)
    d = MI_TERMS["I(X,S;Y|Z)"](build_joint(surrogate, pol))
    r_a, r_l = _bound_arrays(Bound.ROUT2, t, 0.0, d)
    meta = dict(u_card=pol.u_cardinality, policy=pol.table)
    verts = tuple(RatePoint(float(a), float(l), **meta) for a, l in zip(r_a, r_l))
    feas = bool(feasible_mask(Bound.ROUT2, t))
    return RegionEvalResult(verts[0], feas, 0.0, Bound.ROUT2, vertices=verts)


def equivocation_of(point: RatePoint, h_s: float) -> float:
    """Eve's residual uncertainty H(S) - R_l, clamped at zero."""
    if h_s < 0:
        raise UsageError("h_s must be nonnegative")
    return max(h_s - point.r_l, 0.0)


# --------------------------------------------------------------------------
# Policy enumeration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    u_cardinalities: tuple[int, ...] = (1, 2)
    grid_resolution: int = 5
    random_samples: int = 200
    seed: int = 42
    refine_iters: int = 20
    apply_hull: bool = True
    max_grid_policies: int = 2_000_000

    def __post_init__(self):
        cards = tuple(int(u) for u in self.u_cardinalities)
        if not cards or min(cards) < 1:
            raise UsageError("u_cardinalities must be positive integers")
        if self.grid_resolution < 2:
            raise UsageError("grid_resolution must be >= 2")
        if self.random_samples < 0 or self.refine_iters < 0:
            raise UsageError("random_samples and refine_iters must be nonnegative")
        object.__setattr__(self, "u_cardinalities", cards)


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the (k-1)-simplex with coordinates in {0, 1/N, ..., 1}, N = resolution - 1."""
    n = resolution - 1
    if k == 1:
        return np.ones((1, 1))
    bars = np.array(list(itertools.combinations(range(n + k - 1), k - 1)), dtype=int)
    edges = np.concatenate(
        [np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), n + k - 1)], axis=1
    )
    return (np.diff(edges, axis=1) - 1) / n


def grid_tables(n_s: int, n_u: int, n_x: int, resolution: int, limit: int = 2_000_000) -> np.ndarray:
    """Product grid of per-state simplices, shape (M, S, U, X)."""
    g = simplex_grid(n_u * n_x, resolution)
    total = len(g) ** n_s
    if total > limit:
        raise UsageError(
            f"policy grid has {total} points (> {limit}); lower grid_resolution or |U|"
        )
    idx = np.indices((len(g),) * n_s).reshape(n_s, -1).T
    return g[idx].reshape(-1, n_s, n_u, n_x)


def random_tables(rng: np.random.Generator, count: int, n_s: int, n_u: int, n_x: int) -> np.ndarray:
    draws = rng.dirichlet(np.ones(n_u * n_x), size=(count, n_s))
    return draws.reshape(count, n_s, n_u, n_x)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------


class _Pool:
    """Running Pareto set of candidate points with their policies."""

    def __init__(self):
        self.r_a = np.zeros(0)
        self.r_l = np.zeros(0)
        self.r_u = np.zeros(0)
        self.tables: list[np.ndarray] = []

    def add(self, r_a, r_l, r_u, tables):
        r_a = np.concatenate([self.r_a, r_a])
        r_l = np.concatenate([self.r_l, r_l])
        r_u = np.concatenate([self.r_u, r_u])
        all_tables = self.tables + list(tables)
        keep = pareto_mask(r_a, r_l)
        self.r_a, self.r_l, self.r_u = r_a[keep], r_l[keep], r_u[keep]
        self.tables = [all_tables[i] for i in keep]


class _BoundSearch:
    """Per-bound bookkeeping: Pareto pool plus incumbents for each weight."""

    def __init__(self, bound: Bound, weights):
        self.bound = bound
        self.weights = tuple(weights)
        self.pool = _Pool()
        self.best: dict[tuple[int, float], tuple[float, np.ndarray]] = {}

    def points(self, t: PolicyTerms, d):
        """Candidate arrays (B, F) plus feasibility (B,)."""
        b = self.bound
        feas = np.asarray(feasible_mask(b, t))
        if b.uses_refinement_rate:
            cap = refinement_cap(b, t)
            r_u = cap[:, None] * RU_FRACTIONS[None, :]
            tt = PolicyTerms(**{f.name: np.asarray(getattr(t, f.name))[:, None] for f in fields(t)})
            r_a, r_l = _bound_arrays(b, tt, r_u)
        else:
            r_a, r_l = _bound_arrays(b, t, 0.0, d)
            if r_a.ndim == 1:
                r_a, r_l = r_a[:, None], r_l[:, None]
            r_u = np.zeros_like(r_a)
        return r_a, r_l, r_u, feas

    def scores(self, r_a, r_l, feas, lam):
        s = (r_a - lam * r_l).max(axis=1)
        return np.where(feas, s, -np.inf)

    def ingest(self, tables: np.ndarray, t: PolicyTerms, d):
        r_a, r_l, r_u, feas = self.points(t, d)
        n_u = tables.shape[2]
        for lam in self.weights:
            s = self.scores(r_a, r_l, feas, lam)
            i = int(np.argmax(s))
            key = (n_u, lam)
            if np.isfinite(s[i]) and (key not in self.best or s[i] > self.best[key][0]):
                self.best[key] = (float(s[i]), tables[i].copy())
        rows, cols = np.nonzero(feas[:, None] & np.ones_like(r_a, dtype=bool))
        if rows.size == 0:
            return
        ca, cl, cu = r_a[rows, cols], r_l[rows, cols], r_u[rows, cols]
        keep = pareto_mask(ca, cl)
        self.pool.add(ca[keep], cl[keep], cu[keep], tables[rows[keep]])


def _terms_and_d(ch: StateDMC, tables: np.ndarray, need_d: bool):
    t = batch_terms(ch, tables)
    # for a stochastically degraded channel the physically degraded
    # surrogate gives I(X,S;Y|Z) = I(X,S;Y) - I(X,S;Z)
    d = t.i_xs_y - t.i_xs_z if need_d else None
    return t, d


def _chunks(tables: np.ndarray, cells: int):
    size = max(1, 2_000_000 // max(cells, 1))
    for start in range(0, len(tables), size):
        yield tables[start:start + size]


def _neighbours(table: np.ndarray, step: float) -> np.ndarray:
    """Coordinate moves: shift up to ``step`` mass between two cells of one state row."""
    n_s, n_u, n_x = table.shape
    flat = table.reshape(n_s, n_u * n_x)
    out = []
    for s in range(n_s):
        for i in range(flat.shape[1]):
            for j in range(flat.shape[1]):
                if i == j:
                    continue
                delta = min(step, flat[s, j])
                if delta <= 0.0:
                    continue
                nb = flat.copy()
                nb[s, i] += delta
                nb[s, j] -= delta
                out.append(nb.reshape(n_s, n_u, n_x))
    return np.array(out) if out else np.zeros((0, n_s, n_u, n_x))


def _refine(ch: StateDMC, search: _BoundSearch, cfg: SearchConfig, need_d: bool) -> None:
    start_step = 0.5 / (cfg.grid_resolution - 1)
    for (n_u, lam), (score, table) in sorted(search.best.items(), key=lambda kv: kv[0]):
        current = table.copy()
        best = score
        step = start_step
        for _ in range(cfg.refine_iters):
            if step < 1e-6:
                break
            nbs = _neighbours(current, step)
            if len(nbs) == 0:
                break
            t, d = _terms_and_d(ch, nbs, need_d)
            search.ingest(nbs, t, d)
            r_a, r_l, _, feas = search.points(t, d)
            s = search.scores(r_a, r_l, feas, lam)
            i = int(np.argmax(s))
            if s[i] > best + 1e-12:
                best, current = float(s[i]), nbs[i]
            else:
                step /= 2.0


def _candidate_tables(ch: StateDMC, n_u: int, cfg: SearchConfig, rng: np.random.Generator):
    n_s, n_x = ch.sizes[0], ch.sizes[1]
    grid = grid_tables(n_s, n_u, n_x, cfg.grid_resolution, cfg.max_grid_policies)
    if cfg.random_samples:
        rand = random_tables(rng, cfg.random_samples, n_s, n_u, n_x)
        return np.concatenate([grid, rand])
    return grid


def _run_search(ch: StateDMC, bounds, cfg: SearchConfig, weights=REFINE_WEIGHTS):
    bounds = [Bound.parse(b) for b in bounds]
    need_d = Bound.ROUT2 in bounds
    searches = {b: _BoundSearch(b, weights) for b in bounds}
    rng = np.random.default_rng(cfg.seed)
    n_s, n_x, n_y, n_z = ch.sizes
    for n_u in cfg.u_cardinalities:
        cells = n_s * n_u * n_x * n_y * n_z
        for chunk in _chunks(_candidate_tables(ch, n_u, cfg, rng), cells):
            t, d = _terms_and_d(ch, chunk, need_d)
            for s in searches.values():
                s.ingest(chunk, t, d)
    if cfg.refine_iters:
        for s in searches.values():
            _refine(ch, s, cfg, need_d)
    return searches


def _frontier_from_pool(bound: Bound, pool: _Pool, cfg: SearchConfig) -> Frontier:
    kind = "outer" if bound.is_outer else "inner"
    label = f"{bound.value} |U| in {list(cfg.u_cardinalities)}"
    if bound.is_outer:
        label += " (sampled converse)"
    if pool.r_a.size == 0:
        return Frontier((), kind=kind, label=label, note="empty feasible set")
    pts = tuple(
        RatePoint(a, l, r_u=u, u_card=int(tab.shape[1]), policy=tab)
        for a, l, u, tab in zip(pool.r_a, pool.r_l, pool.r_u, pool.tables)
    )
    f = Frontier(pts, kind=kind, label=label)
    return convex_hull_envelope(f) if cfg.apply_hull else f


def sweep_regions(ch: StateDMC, bounds, cfg: SearchConfig | None = None) -> dict[Bound, Frontier]:
    """Sweep several bounds over one shared set of policies."""
    cfg = cfg or SearchConfig()
    bounds = [Bound.parse(b) for b in bounds]
    if Bound.ROUT2 in bounds:
        _require_degraded(ch, None)
    searches = _run_search(ch, bounds, cfg)
    return {b: _frontier_from_pool(b, searches[b].pool, cfg) for b in bounds}


def sweep_region(ch: StateDMC, bound, cfg: SearchConfig | None = None) -> Frontier:
    """Frontier of one bound over the policy family described by ``cfg``.

    Policies come from a product grid of per-state simplices, seeded
    Dirichlet draws and coordinate-wise refinement of the incumbents; the
    result is therefore an inner approximation of the bound's union.
    """
    b = Bound.parse(bound)
    return sweep_regions(ch, [b], cfg)[b]


# --------------------------------------------------------------------------
# Differential amplification capacity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CdResult:
    c_d: float
    argmax_policy: Policy | None
    method: str  # "closed_form" | "sweep"

    def to_dict(self) -> dict:
        out = {"c_d": self.c_d, "method": self.method}
        if self.argmax_policy is not None:
            out["argmax_policy"] = self.argmax_policy.table.tolist()
        return out


def cd_sweep(ch: StateDMC, cfg: SearchConfig | None = None) -> CdResult:
    """max over p(x|s) of I(S;Y) - I(S;Z), by grid, sampling and refinement."""
    cfg = replace(cfg or SearchConfig(), u_cardinalities=(1,))
    search = _run_search(ch, [Bound.R1], cfg, weights=(1.0,))[Bound.R1]
    score, table = search.best[(1, 1.0)]
    return CdResult(float(score), Policy(table), "sweep")


def cd_reversely_degraded(ch: StateDMC, cfg: SearchConfig | None = None) -> CdResult:
    rep = check_degraded(ch, "reverse")
    if not rep.reversely_degraded:
        raise PreconditionError(
            f"channel is not reversely degraded; best q(y|z) leaves residual {rep.residual_reverse:.3e}"
        )
    return cd_sweep(ch, cfg)


def max_difference(f: Frontier) -> float:
    return f.max_difference() if len(f) else -math.inf
