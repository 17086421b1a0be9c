"""General-evaluation dynamic programming for gambling houses and MDPs.

Values under an arbitrary finitely supported evaluation are computed by
exact backward induction (the supremum over mixed transitions is attained
at a listed extreme point, because the recursive objective is affine in
the chosen distribution).  The limit value of a finite MDP is the optimum
of a small LP over pairs (w, h) where w is excessive and (w, h) is
superharmonic; its dual side -- stationary occupation measures -- is
exposed as a separation oracle and a feasibility check for invariant
couples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Evaluation, InvalidArgumentError, impatience
from .lp import EQ, LE, LinearProgram, LpSolverError, solve_lp

RESIDUAL_TOL = 1e-9


def _as_distribution_rows(rows, n, what):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != n:
        raise InvalidArgumentError(f"{what}: distribution length does not match state count")
    if np.any(rows < -1e-12) or not np.all(np.isfinite(rows)):
        raise InvalidArgumentError(f"{what}: negative or non-finite probability")
    rows = np.maximum(rows, 0.0)
    sums = rows.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise InvalidArgumentError(f"{what}: probabilities do not sum to one")
    return rows / sums[:, None]


@dataclass(frozen=True, init=False)
class GamblingHouse:
    """States, a payoff per state, and per state a nonempty finite list of
    distributions over states the player may move with.

    The stage payoff accrues at the state *reached*: a play
    ``x0 -> x1 -> ...`` evaluated by theta is worth
    ``sum_t theta_t r(x_t)``.
    """

    states: tuple
    payoffs: np.ndarray
    options: tuple  # one (n_options_x, n_states) array per state

    def __init__(self, states, payoffs, options):
        states = tuple(states)
        n = len(states)
        payoffs = np.asarray(payoffs, dtype=float)
        if payoffs.shape != (n,):
            raise InvalidArgumentError("payoff vector does not match state count")
        if np.any(payoffs < -1e-12) or np.any(payoffs > 1.0 + 1e-12):
            raise InvalidArgumentError("house payoffs must lie in [0, 1]")
        payoffs = np.clip(payoffs, 0.0, 1.0)
        if len(options) != n:
            raise InvalidArgumentError("need one option list per state")
        rows = []
        for x, opts in enumerate(options):
            opts = _as_distribution_rows(opts, n, f"options of state {states[x]!r}")
            if opts.shape[0] == 0:
                raise InvalidArgumentError(f"state {states[x]!r} has no options")
            opts.flags.writeable = False
            rows.append(opts)
        payoffs.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "payoffs", payoffs)
        object.__setattr__(self, "options", tuple(rows))

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, state) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise InvalidArgumentError(f"unknown state {state!r}") from None


@dataclass(frozen=True, init=False)
class FiniteMDP:
    """Finite states and actions, transition kernel q and payoff g.

    The stage payoff accrues at the *current* state:
    ``gamma_theta = E sum_t theta_t g(x_t, a_t)`` with ``x_1`` the initial
    state.
    """

    states: tuple
    actions: tuple
    q: np.ndarray  # (K, A, K)
    g: np.ndarray  # (K, A)

    def __init__(self, states, actions, q, g):
        states = tuple(states)
        actions = tuple(actions)
        nk, na = len(states), len(actions)
        q = np.asarray(q, dtype=float)
        g = np.asarray(g, dtype=float)
        if q.shape != (nk, na, nk):
            raise InvalidArgumentError(f"transition tensor must have shape {(nk, na, nk)}")
        if g.shape != (nk, na):
            raise InvalidArgumentError(f"payoff matrix must have shape {(nk, na)}")
        q = _as_distribution_rows(q.reshape(nk * na, nk), nk, "mdp transitions").reshape(
            nk, na, nk
        )
        if np.any(g < -1e-12) or np.any(g > 1.0 + 1e-12):
            raise InvalidArgumentError("mdp payoffs must lie in [0, 1]")
        g = np.clip(g, 0.0, 1.0)
        q.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "g", g)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def state_index(self, state) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise InvalidArgumentError(f"unknown state {state!r}") from None


def value_theta_house(house: GamblingHouse, theta: Evaluation) -> np.ndarray:
    """theta-value of every state, by exact backward induction.

    Works with unnormalized continuation sums: ``w_t`` is the optimal
    payoff of the remaining weights ``theta_t..theta_T``, so no shift
    renormalization is needed.
    """
    stacked = np.vstack(house.options)
    starts = np.cumsum([0] + [o.shape[0] for o in house.options])[:-1]
    w = np.zeros(house.n_states)
    for t in range(theta.horizon - 1, -1, -1):
        target = theta.weights[t] * house.payoffs + w
        w = np.maximum.reduceat(stacked @ target, starts)
    return w


def value_theta_mdp(mdp: FiniteMDP, theta: Evaluation) -> np.ndarray:
    """theta-value of every state of a finite MDP (backward induction)."""
    w = np.zeros(mdp.n_states)
    for t in range(theta.horizon - 1, -1, -1):
        w = (theta.weights[t] * mdp.g + mdp.q @ w).max(axis=1)
    return w


def window_transform(theta: Evaluation, n: int) -> Evaluation:
    """Sliding-window smoothing of an evaluation.

    The input weights are read as masses ``theta_0..theta_T`` on stages
    0..T; the output puts on stage ``l`` (1-based) the average
    ``(1/n) sum_{t=max(0,l-n)}^{min(T,l-1)} theta_t`` and is supported on
    stages 1..T+n.  Its impatience is at most ``3/n``.
    """
    if n < 1:
        raise InvalidArgumentError("window length must be >= 1")
    w0 = theta.weights
    T = w0.size - 1
    cs = np.concatenate([[0.0], np.cumsum(w0)])
    ls = np.arange(1, T + n + 1)
    lo = np.maximum(0, ls - n)
    hi = np.minimum(T, ls - 1)
    return Evaluation((cs[hi + 1] - cs[lo]) / n)


@dataclass(frozen=True)
class InvariantCouple:
    """A stationary occupation measure pi certifying that (p, y) is an
    invariant couple: marginal(pi) = p, pi is stationary for q, and the
    mean payoff of pi equals y."""

    p: np.ndarray
    y: float
    pi: np.ndarray  # (K, A)

    def residuals(self, mdp: FiniteMDP) -> dict:
        marg = self.pi.sum(axis=1)
        flow = np.einsum("ka,kaj->j", self.pi, mdp.q)
        return {
            "mass": abs(self.pi.sum() - 1.0),
            "marginal": float(np.abs(marg - self.p).max()),
            "stationarity": float(np.abs(marg - flow).max()),
            "payoff": abs(float((self.pi * mdp.g).sum()) - self.y),
        }


def _stationarity_rows(mdp: FiniteMDP):
    """Rows of (sum_a pi(k,a) - sum_{k',a'} pi(k',a') q(k',a')(k))_k."""
    nk, na = mdp.n_states, mdp.n_actions
    A = np.zeros((nk, nk * na))
    flat_q = mdp.q.reshape(nk * na, nk)
    for k in range(nk):
        A[k, k * na : (k + 1) * na] += 1.0
        A[k, :] -= flat_q[:, k]
    return A


def check_invariant_couple(mdp: FiniteMDP, p, y):
    """Feasibility LP for an invariant couple; returns a witness or None."""
    p = np.asarray(p, dtype=float)
    if p.shape != (mdp.n_states,):
        raise InvalidArgumentError("p must be a distribution over the states")
    nk, na = mdp.n_states, mdp.n_actions
    nv = nk * na
    marginal = np.zeros((nk, nv))
    for k in range(nk):
        marginal[k, k * na : (k + 1) * na] = 1.0
    A = np.vstack([marginal, _stationarity_rows(mdp), mdp.g.reshape(1, nv)])
    b = np.concatenate([p, np.zeros(nk), [float(y)]])
    sol = solve_lp(LinearProgram(np.zeros(nv), A, b, [EQ] * (2 * nk + 1)))
    if sol.status != "optimal":
        return None
    pi = np.maximum(sol.x.reshape(nk, na), 0.0)
    return InvariantCouple(p=p, y=float(y), pi=pi)


def max_invariant_payoff(mdp: FiniteMDP, w) -> float:
    """Separation oracle for the invariant-couple constraint.

    Maximizes ``sum pi(k,a) g(k,a) - sum_k w(k) marginal(pi)(k)`` over
    stationary occupation measures pi; the result is <= 0 (up to 1e-8)
    exactly when w dominates the payoff of every invariant couple.
    """
    w = np.asarray(w, dtype=float)
    nk, na = mdp.n_states, mdp.n_actions
    nv = nk * na
    c = -(mdp.g - w[:, None]).reshape(nv)
    A = np.vstack([np.ones((1, nv)), _stationarity_rows(mdp)])
    b = np.concatenate([[1.0], np.zeros(nk)])
    sol = solve_lp(LinearProgram(c, A, b, [EQ] * (nk + 1)))
    if sol.status != "optimal":
        raise LpSolverError(f"separation LP came back {sol.status}")
    return -float(sol.objective)


@dataclass(frozen=True)
class LimitValueCertificate:
    """An excessive w with a Denardo-Fox companion h:
    ``w(k) >= sum_k' q(k,a)(k') w(k')`` and
    ``w(k) + h(k) >= g(k,a) + sum_k' q(k,a)(k') h(k')`` for all k, a."""

    w: np.ndarray
    h: np.ndarray

    def excess_residual(self, mdp: FiniteMDP) -> float:
        return float((mdp.q @ self.w - self.w[:, None]).max())

    def superharmonic_residual(self, mdp: FiniteMDP) -> float:
        lhs = (self.w + self.h)[:, None]
        rhs = mdp.g + mdp.q @ self.h
        return float((rhs - lhs).max())


def excessive_check(mdp: FiniteMDP, w) -> bool:
    """True iff ``w(k) >= sum_k' q(k,a)(k') w(k') - 1e-9`` for all k, a."""
    w = np.asarray(w, dtype=float)
    return bool((mdp.q @ w - w[:, None]).max() <= RESIDUAL_TOL)


def limit_value_lp(mdp: FiniteMDP, k0) -> tuple:
    """Limit value at a start state, with its optimality certificate.

    minimize w(k0) over w in [0,1]^K and h in R^K subject to excessivity
    and superharmonicity; always feasible (w = 1, h = 0).
    Returns ``(v_star, LimitValueCertificate(w, h))``.
    """
    k0 = mdp.state_index(k0) if not isinstance(k0, (int, np.integer)) else int(k0)
    if not 0 <= k0 < mdp.n_states:
        raise InvalidArgumentError("start state index out of range")
    nk, na = mdp.n_states, mdp.n_actions
    nv = 2 * nk  # [w, h]
    c = np.zeros(nv)
    c[k0] = 1.0

    rows, rhs = [], []
    eye = np.eye(nk)
    for k in range(nk):
        for a in range(na):
            row = np.zeros(nv)
            row[:nk] = mdp.q[k, a] - eye[k]  # excessivity: q.w - w(k) <= 0
            rows.append(row)
            rhs.append(0.0)
            row = np.zeros(nv)
            row[:nk] = -eye[k]
            row[nk:] = mdp.q[k, a] - eye[k]  # q.h - h(k) - w(k) <= -g
            rows.append(row)
            rhs.append(-mdp.g[k, a])
    lb = np.concatenate([np.zeros(nk), np.full(nk, -np.inf)])
    ub = np.concatenate([np.ones(nk), np.full(nk, np.inf)])
    sol = solve_lp(
        LinearProgram(c, np.array(rows), np.array(rhs), [LE] * len(rows), lb=lb, ub=ub)
    )
    if sol.status != "optimal":
        raise LpSolverError(f"limit value LP came back {sol.status}")
    return float(sol.objective), LimitValueCertificate(w=sol.x[:nk], h=sol.x[nk:])


def block_strategy_payoff_bound(mdp: FiniteMDP, n0: int, theta: Evaluation, v_vec=None) -> float:
    """Degradation bound ``n0 * I(theta)`` for block strategies.

    A play that is near-optimal on every window of ``n0`` stages loses at
    most this much of ``v_vec`` under the evaluation theta; the bound
    itself does not depend on the model.
    """
    if n0 < 1:
        raise InvalidArgumentError("block length must be >= 1")
    return n0 * impatience(theta)
