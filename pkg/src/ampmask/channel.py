"""State-dependent DMCs, input policies and degradedness checks.

Kernel arrays are indexed ``[s][x][y][z]`` and hold p(y,z|x,s); policy
tables are indexed ``[s][u][x]`` and hold p(u,x|s).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .errors import UsageError, ValidationError
from .info import (
    MASS_TOL,
    FiniteDist,
    JointDist,
    conditional_mutual_information,
    entropy_bits,
    mutual_information,
)

AXES = ("S", "U", "X", "Y", "Z")
DEGRADED_TOL = 1e-7


@dataclass(frozen=True)
class StateDMC:
    """Channel p(y,z|x,s) together with the state law p(s)."""

    state_law: FiniteDist
    kernel: np.ndarray

    def __post_init__(self):
        law = self.state_law
        if not isinstance(law, FiniteDist):
            law = FiniteDist(np.asarray(law, dtype=float))
        k = np.array(self.kernel, dtype=float)
        if k.ndim != 4:
            raise ValidationError(f"kernel must be 4-d [s][x][y][z], got {k.ndim}-d")
        if k.shape[0] != law.alphabet_size:
            raise ValidationError(
                f"kernel has {k.shape[0]} states but state law has {law.alphabet_size}"
            )
        if not np.all(np.isfinite(k)) or np.any(k < 0.0):
            bad = np.argwhere(~np.isfinite(k) | (k < 0.0))[0]
            raise ValidationError(f"kernel row (s={bad[0]}, x={bad[1]}) has a negative or non-finite entry")
        rows = k.sum(axis=(2, 3))
        off = np.abs(rows - 1.0) > MASS_TOL
        if off.any():
            s, x = np.argwhere(off)[0]
            raise ValidationError(f"kernel row (s={s}, x={x}) sums to {rows[s, x]!r}, not 1")
        k.setflags(write=False)
        object.__setattr__(self, "state_law", law)
        object.__setattr__(self, "kernel", k)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return self.kernel.shape

    @property
    def p_y(self) -> np.ndarray:
        """Bob's marginal channel p(y|x,s), indexed [s][x][y]."""
        return self.kernel.sum(axis=3)

    @property
    def p_z(self) -> np.ndarray:
        """Eve's marginal channel p(z|x,s), indexed [s][x][z]."""
        return self.kernel.sum(axis=2)


@dataclass(frozen=True)
class Policy:
    """Auxiliary-and-input law p(u,x|s)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 3:
            raise ValidationError(f"policy table must be 3-d [s][u][x], got {t.ndim}-d")
        if not np.all(np.isfinite(t)) or np.any(t < 0.0):
            raise ValidationError("policy table has a negative or non-finite entry")
        rows = t.sum(axis=(1, 2))
        off = np.abs(rows - 1.0) > MASS_TOL
        if off.any():
            s = int(np.argmax(off))
            raise ValidationError(f"policy row s={s} sums to {rows[s]!r}, not 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def u_cardinality(self) -> int:
        return int(self.table.shape[1])

    @classmethod
    def from_input_law(cls, p_x_given_s) -> "Policy":
        """Policy with a constant auxiliary (|U| = 1) and input law p(x|s)."""
        p = np.asarray(p_x_given_s, dtype=float)
        return cls(p[:, None, :])


def build_joint(ch: StateDMC, pol: Policy) -> JointDist:
    """Joint law of (S, U, X, Y, Z) induced by the channel and policy."""
    n_s, n_x, _, _ = ch.sizes
    t = pol.table
    if t.shape[0] != n_s or t.shape[2] != n_x:
        raise UsageError(
            f"policy shape {t.shape} does not match |S|={n_s}, |X|={n_x}"
        )
    ps = ch.state_law.probs
    joint = ps[:, None, None, None, None] * t[:, :, :, None, None] * ch.kernel[:, None, :, :, :]
    return JointDist(joint, AXES)


# --------------------------------------------------------------------------
# Named information terms
# --------------------------------------------------------------------------

def _mi(a, b):
    return lambda j: mutual_information(j, a, b)


MI_TERMS = {
    "H(S)": lambda j: j.entropy("S"),
    "I(U;Y)": _mi("U", "Y"),
    "I(U;S)": _mi("U", "S"),
    "I(U;Z)": _mi("U", "Z"),
    "I(S;Y)": _mi("S", "Y"),
    "I(S;Z)": _mi("S", "Z"),
    "I(S;Y,U)": _mi("S", ("Y", "U")),
    "I(S;Z,U)": _mi("S", ("Z", "U")),
    "I(U,S;Y)": _mi(("U", "S"), "Y"),
    "I(U,S;Z)": _mi(("U", "S"), "Z"),
    "I(X,S;Y)": _mi(("X", "S"), "Y"),
    "I(X,S;Z)": _mi(("X", "S"), "Z"),
    "H(S|Y,U)": lambda j: max(j.entropy(("S", "Y", "U")) - j.entropy(("Y", "U")), 0.0),
    "I(X,S;Y|Z)": lambda j: conditional_mutual_information(j, ("X", "S"), "Y", "Z"),
}


def marginal_channel_mi(ch: StateDMC, pol: Policy, expr: str) -> float:
    """Evaluate one named information term (e.g. ``"I(S;Y,U)"``) in bits."""
    key = expr.replace(" ", "").replace("{", "").replace("}", "")
    try:
        fn = MI_TERMS[key]
    except KeyError:
        raise UsageError(f"unknown information term {expr!r}; known: {sorted(MI_TERMS)}") from None
    return float(fn(build_joint(ch, pol)))


# --------------------------------------------------------------------------
# Degradedness
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DegradednessReport:
    """Outcome of the stochastic-degradedness feasibility problems.

    ``factor_forward[y][z]`` is the best q(z|y) found; ``factor_reverse[z][y]``
    the best q(y|z).  Unchecked directions carry ``nan`` residuals.
    """

    degraded: bool
    reversely_degraded: bool
    residual_forward: float = float("nan")
    residual_reverse: float = float("nan")
    factor_forward: np.ndarray | None = field(default=None, repr=False, compare=False)
    factor_reverse: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def residual(self) -> float:
        vals = [r for r in (self.residual_forward, self.residual_reverse) if not np.isnan(r)]
        return max(vals) if vals else float("nan")

    def to_dict(self) -> dict:
        return {
            "degraded": self.degraded,
            "reversely_degraded": self.reversely_degraded,
            "residual_forward": self.residual_forward,
            "residual_reverse": self.residual_reverse,
        }


def _fit_stochastic_factor(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, float]:
    """Find a stochastic q[a][b] minimising max |sum_a src[r,a] q[a,b] - dst[r,b]|.

    ``src`` has shape (R, A) and ``dst`` shape (R, B), one row per (s, x).
    Returns the factor and its residual after projection onto the simplex.
    """
    n_r, n_a = src.shape
    n_b = dst.shape[1]
    n_q = n_a * n_b
    # variables: q (row-major over a, b) then the bound t
    c = np.zeros(n_q + 1)
    c[-1] = 1.0
    a_ub, b_ub = [], []
    for r in range(n_r):
        for b in range(n_b):
            row = np.zeros(n_q + 1)
            row[b:n_q:n_b] = src[r]
            row[-1] = -1.0
            a_ub.append(row)
            b_ub.append(dst[r, b])
            neg = -row
            neg[-1] = -1.0
            a_ub.append(neg)
            b_ub.append(-dst[r, b])
    a_eq = np.zeros((n_a, n_q + 1))
    for a in range(n_a):
        a_eq[a, a * n_b:(a + 1) * n_b] = 1.0
    res = linprog(
        c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), A_eq=a_eq, b_eq=np.ones(n_a),
        bounds=[(0.0, 1.0)] * n_q + [(0.0, None)], method="highs",
        # default HiGHS tolerances (1e-7) would sit exactly on DEGRADED_TOL
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        # the problem is always feasible with t large; treat solver trouble as maximal violation
        q = np.full((n_a, n_b), 1.0 / n_b)
    else:
        q = np.clip(res.x[:n_q].reshape(n_a, n_b), 0.0, None)
        q /= q.sum(axis=1, keepdims=True)
    resid = float(np.abs(src @ q - dst).max())
    return q, resid


def check_degraded(ch: StateDMC, direction: str = "both") -> DegradednessReport:
    """Test whether Eve's channel is a degraded copy of Bob's (or vice versa).

    ``forward`` asks for q(z|y) with p(z|x,s) = sum_y p(y|x,s) q(z|y);
    ``reverse`` asks for q(y|z) with the roles exchanged.
    """
    if direction not in ("forward", "reverse", "both"):
        raise UsageError(f"direction must be forward|reverse|both, got {direction!r}")
    n_s, n_x, n_y, n_z = ch.sizes
    py = ch.p_y.reshape(n_s * n_x, n_y)
    pz = ch.p_z.reshape(n_s * n_x, n_z)
    fwd = rev = float("nan")
    q_f = q_r = None
    if direction in ("forward", "both"):
        q_f, fwd = _fit_stochastic_factor(py, pz)
    if direction in ("reverse", "both"):
        q_r, rev = _fit_stochastic_factor(pz, py)
    return DegradednessReport(
        degraded=bool(fwd <= DEGRADED_TOL),
        reversely_degraded=bool(rev <= DEGRADED_TOL),
        residual_forward=fwd,
        residual_reverse=rev,
        factor_forward=q_f,
        factor_reverse=q_r,
    )


def physically_degraded_version(ch: StateDMC, q_z_given_y: np.ndarray) -> StateDMC:
    """Channel p(y|x,s) q(z|y): same marginals, Markov (X,S) -> Y -> Z."""
    kernel = ch.p_y[:, :, :, None] * np.asarray(q_z_given_y)[None, None, :, :]
    return StateDMC(ch.state_law, kernel)


# --------------------------------------------------------------------------
# JSON channel files
# --------------------------------------------------------------------------


def channel_from_dict(data: dict) -> StateDMC:
    try:
        sizes = tuple(int(data[k]) for k in ("s_size", "x_size", "y_size", "z_size"))
        p_s = np.asarray(data["p_s"], dtype=float)
        kernel = np.asarray(data["kernel"], dtype=float)
    except KeyError as e:
        raise ValidationError(f"channel spec is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ValidationError(f"channel spec has malformed arrays: {e}") from None
    if p_s.shape != (sizes[0],):
        raise ValidationError(f"p_s has shape {p_s.shape}, expected ({sizes[0]},)")
    if kernel.shape != sizes:
        raise ValidationError(f"kernel has shape {kernel.shape}, expected {sizes}")
    return StateDMC(FiniteDist(p_s), kernel)


def channel_to_dict(ch: StateDMC) -> dict:
    n_s, n_x, n_y, n_z = ch.sizes
    return {
        "s_size": n_s, "x_size": n_x, "y_size": n_y, "z_size": n_z,
        "p_s": ch.state_law.probs.tolist(),
        "kernel": ch.kernel.tolist(),
    }


def load_channel(path) -> StateDMC:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not valid JSON ({e})") from None
    return channel_from_dict(data)


def save_channel(ch: StateDMC, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(ch), indent=1) + "\n")


def h_state(ch: StateDMC) -> float:
    return entropy_bits(ch.state_law.probs)
