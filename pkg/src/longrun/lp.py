"""Dense linear programming kernel and the matrix-game value solver.

Every metric and limit-value computation in this package reduces to a
dense LP.  Solving is delegated to scipy's HiGHS backend, which is
deterministic for identical input; the surface here fixes the row-sense
conventions, returns dual multipliers in terms of the *original* rows, and
exposes the residuals (primal feasibility, complementary slackness,
duality gap) that downstream modules rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import InvalidArgumentError

LE, EQ, GE = "<=", "=", ">="

#: residual tolerances guaranteed on optimal solutions
FEAS_TOL = 1e-9
GAP_TOL = 1e-8


class LpSolverError(RuntimeError):
    """The backend failed to classify the program (must not happen)."""


@dataclass(frozen=True, init=False)
class LinearProgram:
    """minimize c.x  subject to  A x (sense) b,  lb <= x <= ub.

    ``senses`` holds one of ``"<="``, ``"="``, ``">="`` per row; bounds may
    be ``-inf`` / ``+inf``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: tuple
    lb: np.ndarray
    ub: np.ndarray

    def __init__(self, c, A, b, senses, lb=None, ub=None):
        c = np.asarray(c, dtype=float)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float)
        m, n = A.shape
        if c.shape != (n,) or b.shape != (m,):
            raise InvalidArgumentError(
                f"inconsistent LP dimensions: A is {m}x{n}, |c|={c.size}, |b|={b.size}"
            )
        senses = tuple(senses)
        if len(senses) != m or any(s not in (LE, EQ, GE) for s in senses):
            raise InvalidArgumentError("row senses must be one of <=, =, >= per row")
        lb = np.full(n, 0.0) if lb is None else np.asarray(lb, dtype=float)
        ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
        if lb.shape != (n,) or ub.shape != (n,):
            raise InvalidArgumentError("bound vectors do not match variable count")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("c, A, b must be finite")
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)):
            raise InvalidArgumentError("bounds must not be NaN")
        for name, arr in (("c", c), ("A", A), ("b", b), ("lb", lb), ("ub", ub)):
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "senses", senses)


@dataclass(frozen=True)
class LpSolution:
    """Outcome of :func:`solve_lp`.

    For optimal solutions, ``y`` holds one dual multiplier per original
    row (sign convention: objective equals ``y.b`` plus the finite-bound
    dual terms), ``z_lower``/``z_upper`` the reduced costs of the bounds.
    """

    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray = None
    objective: float = None
    y: np.ndarray = None
    z_lower: np.ndarray = None
    z_upper: np.ndarray = None
    lp: LinearProgram = None

    def primal_residual(self) -> float:
        """Max constraint violation, scaled per row by max(1, ||row||_inf)."""
        lp = self.lp
        res = 0.0
        Ax = lp.A @ self.x
        for i, sense in enumerate(lp.senses):
            scale = max(1.0, np.abs(lp.A[i]).max(initial=0.0))
            gap = Ax[i] - lp.b[i]
            if sense == LE:
                viol = max(gap, 0.0)
            elif sense == GE:
                viol = max(-gap, 0.0)
            else:
                viol = abs(gap)
            res = max(res, viol / scale)
        res = max(res, np.max(lp.lb - self.x, initial=0.0))
        res = max(res, np.max(self.x - lp.ub, initial=0.0))
        return float(res)

    def complementary_slackness(self) -> float:
        """Max of |dual * slack| over rows and finite bounds."""
        lp = self.lp
        Ax = lp.A @ self.x
        res = 0.0
        for i, sense in enumerate(lp.senses):
            if sense != EQ:
                res = max(res, abs(self.y[i] * (Ax[i] - lp.b[i])))
        finite_l = np.isfinite(lp.lb)
        finite_u = np.isfinite(lp.ub)
        if np.any(finite_l):
            res = max(
                res,
                np.abs(self.z_lower[finite_l] * (self.x - lp.lb)[finite_l]).max(),
            )
        if np.any(finite_u):
            res = max(
                res,
                np.abs(self.z_upper[finite_u] * (self.x - lp.ub)[finite_u]).max(),
            )
        return float(res)

    def duality_gap(self) -> float:
        """|primal objective - dual objective|."""
        lp = self.lp
        dual = float(np.dot(self.y, lp.b))
        finite_l = np.isfinite(lp.lb)
        finite_u = np.isfinite(lp.ub)
        dual += float(np.dot(self.z_lower[finite_l], lp.lb[finite_l]))
        dual += float(np.dot(self.z_upper[finite_u], lp.ub[finite_u]))
        return abs(self.objective - dual)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve a dense LP; deterministic for identical input.

    Raises :class:`LpSolverError` if the backend reports anything other
    than optimal / infeasible / unbounded.
    """
    senses = np.array(lp.senses)
    le_rows = np.nonzero(senses == LE)[0]
    ge_rows = np.nonzero(senses == GE)[0]
    eq_rows = np.nonzero(senses == EQ)[0]

    A_ub = b_ub = None
    if le_rows.size or ge_rows.size:
        A_ub = np.vstack([lp.A[le_rows], -lp.A[ge_rows]])
        b_ub = np.concatenate([lp.b[le_rows], -lp.b[ge_rows]])
    A_eq = b_eq = None
    if eq_rows.size:
        A_eq = lp.A[eq_rows]
        b_eq = lp.b[eq_rows]
    bounds = [
        (None if np.isneginf(l) else l, None if np.isposinf(u) else u)
        for l, u in zip(lp.lb, lp.ub)
    ]

    res = linprog(
        lp.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LpSolution(status="infeasible", lp=lp)
    if res.status == 3:
        return LpSolution(status="unbounded", lp=lp)
    if res.status != 0:
        raise LpSolverError(f"LP solve failed: {res.message}")

    # map duals of the split system back onto the original rows; a >= row
    # was negated, so its multiplier flips sign
    y = np.zeros(len(lp.senses))
    if le_rows.size or ge_rows.size:
        marg = res.ineqlin.marginals
        y[le_rows] = marg[: le_rows.size]
        y[ge_rows] = -marg[le_rows.size :]
    if eq_rows.size:
        y[eq_rows] = res.eqlin.marginals
    return LpSolution(
        status="optimal",
        x=res.x,
        objective=float(res.fun),
        y=y,
        z_lower=np.asarray(res.lower.marginals, dtype=float),
        z_upper=np.asarray(res.upper.marginals, dtype=float),
        lp=lp,
    )


@dataclass(frozen=True, init=False)
class MatrixGame:
    """Zero-sum matrix game; rows maximize, columns minimize.

    Entries must lie in [-1, 1] (construction slack 1e-12).
    """

    payoff: np.ndarray

    def __init__(self, payoff):
        payoff = np.atleast_2d(np.asarray(payoff, dtype=float))
        if payoff.size == 0:
            raise InvalidArgumentError("matrix game needs a nonempty payoff matrix")
        if np.any(np.abs(payoff) > 1.0 + 1e-12) or not np.all(np.isfinite(payoff)):
            raise InvalidArgumentError("matrix game entries must lie in [-1, 1]")
        payoff = np.clip(payoff, -1.0, 1.0)
        payoff = np.ascontiguousarray(payoff)
        payoff.flags.writeable = False
        object.__setattr__(self, "payoff", payoff)

    @property
    def shape(self):
        return self.payoff.shape


def _solve_maximizer(G: np.ndarray):
    """Value and optimal row strategy of max_x min_y x'Gy via one LP.

    Variables (x, v): minimize -v subject to  v - sum_i x_i G[i,j] <= 0 for
    all j and sum_i x_i = 1.  The column player's optimal strategy is read
    off the duals of the j-rows.
    """
    m, n = G.shape
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A = np.zeros((n + 1, m + 1))
    A[:n, :m] = -G.T
    A[:n, -1] = 1.0
    A[n, :m] = 1.0
    b = np.zeros(n + 1)
    b[n] = 1.0
    senses = [LE] * n + [EQ]
    lb = np.zeros(m + 1)
    lb[-1] = -np.inf
    sol = solve_lp(LinearProgram(c, A, b, senses, lb=lb))
    if sol.status != "optimal":
        raise LpSolverError(f"matrix game LP came back {sol.status}")
    value = float(sol.x[-1])
    x_opt = np.maximum(sol.x[:m], 0.0)
    x_opt /= x_opt.sum()
    y_opt = np.maximum(-sol.y[:n], 0.0)
    total = y_opt.sum()
    y_opt = np.full(n, 1.0 / n) if total <= 0 else y_opt / total
    return value, x_opt, y_opt


def matrix_game_value(game: MatrixGame):
    """Minmax value and a pair of optimal mixed strategies.

    Returns ``(value, x_opt, y_opt)`` with ``min_j (x'G)_j >= value - 1e-8``
    and ``max_i (Gy)_i <= value + 1e-8``.
    """
    G = game.payoff
    value, x_opt, y_opt = _solve_maximizer(G)
    # duals can be degenerate; if the recovered column strategy is not
    # certifiably optimal, solve the column player's own LP
    if np.max(G @ y_opt) > value + 0.5e-8:
        neg_value, y_opt, _ = _solve_maximizer(-G.T)
        if abs(-neg_value - value) > 1e-8:
            raise LpSolverError("matrix game values of the two sides disagree")
    return value, x_opt, y_opt
