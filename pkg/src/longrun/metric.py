"""Belief-space metrics.

Two distances on finitely supported distributions over a simplex:

* ``kr_distance`` -- the Kantorovich-Rubinstein (L1 ground cost) optimal
  transport distance;
* ``dstar_distance`` -- the smaller metric that makes posterior
  (disintegration) maps non-expansive.  It is computed by a transport-like
  LP over pairs (alpha, beta) of nonnegative kernels with prescribed
  one-sided marginals, minimizing ``sum_{x,y} ||x a(x,y) - y b(x,y)||_1``.

Lower bounds on ``dstar`` come from "non-revealing" test functions
``p -> Val(sum_k p^k G^k)`` built from families of matrix games; these are
one-sided certificates, dense in the full test class only in the limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BeliefDist,
    InvalidArgumentError,
    JointDist,
    SimplexPoint,
)
from .lp import EQ, LE, LinearProgram, LpSolverError, MatrixGame, matrix_game_value, solve_lp

MARGINAL_TOL = 1e-9


def _check_same_index_set(u: BeliefDist, v: BeliefDist):
    if u.dim != v.dim:
        raise InvalidArgumentError("belief distributions live on different simplexes")


def ground_cost_matrix(u: BeliefDist, v: BeliefDist) -> np.ndarray:
    """Pairwise L1 distances between the supports, shape (|U|, |V|)."""
    U = u.points_matrix()
    V = v.points_matrix()
    return np.abs(U[:, None, :] - V[None, :, :]).sum(axis=2)


@dataclass(frozen=True)
class TransportPlan:
    """Coupling gamma(x, y) >= 0 with marginals u and v."""

    gamma: np.ndarray
    u: BeliefDist
    v: BeliefDist

    def marginal_residual(self) -> float:
        r1 = np.abs(self.gamma.sum(axis=1) - self.u.weights).max()
        r2 = np.abs(self.gamma.sum(axis=0) - self.v.weights).max()
        return float(max(r1, r2))

    def cost(self) -> float:
        return float((self.gamma * ground_cost_matrix(self.u, self.v)).sum())


@dataclass(frozen=True)
class DualityWitness:
    """A feasible pair (alpha, beta): alpha has row marginals u, beta has
    column marginals v, both over support(u) x support(v)."""

    alpha: np.ndarray
    beta: np.ndarray
    u: BeliefDist
    v: BeliefDist

    def marginal_residual(self) -> float:
        r1 = np.abs(self.alpha.sum(axis=1) - self.u.weights).max()
        r2 = np.abs(self.beta.sum(axis=0) - self.v.weights).max()
        return float(max(r1, r2))

    def objective(self) -> float:
        """``sum_{x,y} ||x alpha(x,y) - y beta(x,y)||_1``."""
        U = self.u.points_matrix()
        V = self.v.points_matrix()
        diff = (
            U[:, None, :] * self.alpha[:, :, None]
            - V[None, :, :] * self.beta[:, :, None]
        )
        return float(np.abs(diff).sum())


def kr_distance(u: BeliefDist, v: BeliefDist):
    """Optimal transport distance with ground cost ``||x - y||_1``.

    Returns ``(distance, plan)`` with a feasible optimal
    :class:`TransportPlan`.
    """
    _check_same_index_set(u, v)
    nu, nv = len(u), len(v)
    cost = ground_cost_matrix(u, v)

    c = cost.reshape(-1)
    A = np.zeros((nu + nv, nu * nv))
    b = np.concatenate([u.weights, v.weights])
    idx = np.arange(nu * nv).reshape(nu, nv)
    for i in range(nu):
        A[i, idx[i, :]] = 1.0
    for j in range(nv):
        A[nu + j, idx[:, j]] = 1.0
    sol = solve_lp(LinearProgram(c, A, b, [EQ] * (nu + nv)))
    if sol.status != "optimal":
        raise LpSolverError(f"transport LP came back {sol.status}")
    gamma = np.maximum(sol.x.reshape(nu, nv), 0.0)
    return float(sol.objective), TransportPlan(gamma, u, v)


def dstar_distance(u: BeliefDist, v: BeliefDist):
    """The belief-space metric, via its duality LP.

    minimize  sum_{x,y,k} t(x,y,k)
    s.t.      sum_y alpha(x,y) = u(x),   sum_x beta(x,y) = v(y),
              t(x,y,k) >= +(x^k alpha(x,y) - y^k beta(x,y)),
              t(x,y,k) >= -(x^k alpha(x,y) - y^k beta(x,y)),
              alpha, beta, t >= 0.

    Returns ``(distance, witness)`` where the optimal
    :class:`DualityWitness` attains the distance as its objective.
    The distance lies in [0, 2].
    """
    _check_same_index_set(u, v)
    nu, nv, k = len(u), len(v), u.dim
    U = u.points_matrix()
    V = v.points_matrix()

    n_pair = nu * nv
    n_var = 2 * n_pair + n_pair * k
    a_of = np.arange(n_pair).reshape(nu, nv)
    b_of = n_pair + a_of
    t_of = 2 * n_pair + np.arange(n_pair * k).reshape(nu, nv, k)

    c = np.zeros(n_var)
    c[2 * n_pair :] = 1.0

    n_rows = nu + nv + 2 * n_pair * k
    A = np.zeros((n_rows, n_var))
    b = np.zeros(n_rows)
    senses = []
    row = 0
    for i in range(nu):
        A[row, a_of[i, :]] = 1.0
        b[row] = u.weights[i]
        senses.append(EQ)
        row += 1
    for j in range(nv):
        A[row, b_of[:, j]] = 1.0
        b[row] = v.weights[j]
        senses.append(EQ)
        row += 1
    for i in range(nu):
        for j in range(nv):
            for kk in range(k):
                # +(x^k a - y^k b) - t <= 0
                A[row, a_of[i, j]] = U[i, kk]
                A[row, b_of[i, j]] = -V[j, kk]
                A[row, t_of[i, j, kk]] = -1.0
                senses.append(LE)
                row += 1
                # -(x^k a - y^k b) - t <= 0
                A[row, a_of[i, j]] = -U[i, kk]
                A[row, b_of[i, j]] = V[j, kk]
                A[row, t_of[i, j, kk]] = -1.0
                senses.append(LE)
                row += 1

    sol = solve_lp(LinearProgram(c, A, b, senses))
    if sol.status != "optimal":
        raise LpSolverError(f"duality LP came back {sol.status}")
    alpha = np.maximum(sol.x[:n_pair].reshape(nu, nv), 0.0)
    beta = np.maximum(sol.x[n_pair : 2 * n_pair].reshape(nu, nv), 0.0)
    return float(sol.objective), DualityWitness(alpha, beta, u, v)


@dataclass(frozen=True, init=False)
class MatrixFamily:
    """One payoff matrix per simplex coordinate, all of the same shape.

    Induces the test function ``f(p) = Val(sum_k p^k G^k)``; entries must
    lie in [-1, 1] so that f is an admissible certificate.
    """

    matrices: np.ndarray  # shape (dim, |I|, |J|)

    def __init__(self, matrices):
        matrices = np.asarray(matrices, dtype=float)
        if matrices.ndim != 3 or matrices.shape[0] == 0 or matrices.shape[1] == 0 or matrices.shape[2] == 0:
            raise InvalidArgumentError(
                "matrix family needs shape (dim, |I|, |J|) with nonempty axes"
            )
        if np.any(np.abs(matrices) > 1.0 + 1e-12) or not np.all(np.isfinite(matrices)):
            raise InvalidArgumentError("matrix family entries must lie in [-1, 1]")
        matrices = np.ascontiguousarray(np.clip(matrices, -1.0, 1.0))
        matrices.flags.writeable = False
        object.__setattr__(self, "matrices", matrices)

    @property
    def dim(self) -> int:
        return self.matrices.shape[0]

    @property
    def shape(self):
        return self.matrices.shape[1:]

    def value_at(self, p) -> float:
        """``Val(sum_k p^k G^k)``, the non-revealing value at belief p."""
        coords = p.coords if isinstance(p, SimplexPoint) else np.asarray(p, float)
        if coords.size != self.dim:
            raise InvalidArgumentError("belief dimension does not match family")
        avg = np.tensordot(coords, self.matrices, axes=1)
        value, _, _ = matrix_game_value(MatrixGame(avg))
        return value


def random_matrix_families(dim, count, seed, max_actions=3):
    """Seeded pseudo-random certificate families.

    Shapes up to ``max_actions`` x ``max_actions``, entries uniform in
    [-1, 1].
    """
    rng = np.random.default_rng(seed)
    fams = []
    for _ in range(count):
        ni = int(rng.integers(1, max_actions + 1))
        nj = int(rng.integers(1, max_actions + 1))
        fams.append(MatrixFamily(rng.uniform(-1.0, 1.0, size=(dim, ni, nj))))
    return fams


def dstar_lower_bound(u: BeliefDist, v: BeliefDist, fams) -> float:
    """Best certificate value ``max_f |u(f) - v(f)|`` over the families.

    Every returned value is a valid lower bound for
    :func:`dstar_distance`; returns 0.0 for an empty family list.
    """
    _check_same_index_set(u, v)
    best = 0.0
    for fam in fams:
        if fam.dim != u.dim:
            raise InvalidArgumentError("family dimension does not match beliefs")
        fu = u.expectation([fam.value_at(x) for x in u.support])
        fv = v.expectation([fam.value_at(y) for y in v.support])
        best = max(best, abs(fu - fv))
    return best


def posterior_map(pi: JointDist) -> BeliefDist:
    """Distribution of Bayesian posteriors on K given the signal.

    ``psi(pi) = sum_s pi(s) delta_{p(s)}`` with
    ``p^k(s) = pi(k, s) / pi(s)``; zero-probability signals produce no
    atom, and equal posteriors are merged by the BeliefDist rules.
    """
    marg = pi.signal_marginal()
    points, weights = [], []
    for s in range(pi.shape[1]):
        if marg[s] <= 0.0:
            continue
        points.append(SimplexPoint(pi.table[:, s] / marg[s], labels=pi.row_labels))
        weights.append(marg[s])
    return BeliefDist(points, weights)


def disintegration_pair(u: BeliefDist, v: BeliefDist, w: DualityWitness):
    """Joint laws realizing the witness objective as an L1 distance.

    With signals S = support(u) x support(v), builds
    ``pi(k, (x,y)) = x^k alpha(x,y)`` and ``pi'(k, (x,y)) = y^k beta(x,y)``.
    Then ``posterior_map(pi) == u``, ``posterior_map(pi') == v`` and
    ``||pi - pi'||_1`` equals the witness objective exactly.
    """
    _check_same_index_set(u, v)
    if w.u is not u and w.u != u or w.v is not v and w.v != v:
        raise InvalidArgumentError("witness was built for different distributions")
    if w.marginal_residual() > MARGINAL_TOL:
        raise InvalidArgumentError("witness marginals do not match u, v")
    U = u.points_matrix()
    V = v.points_matrix()
    nu, nv, k = len(u), len(v), u.dim
    # columns ordered (x0,y0), (x0,y1), ..., matching alpha.reshape(-1)
    pi = (U[:, None, :] * w.alpha[:, :, None]).transpose(2, 0, 1).reshape(k, nu * nv)
    pi_prime = (V[None, :, :] * w.beta[:, :, None]).transpose(2, 0, 1).reshape(k, nu * nv)
    labels = tuple((i, j) for i in range(nu) for j in range(nv))
    return (
        JointDist(pi, col_labels=labels),
        JointDist(pi_prime, col_labels=labels),
    )
