"""Reductions of partially observed problems to belief MDPs on the simplex.

A POMDP (or a repeated game with an informed controller) becomes a
full-observation MDP whose state is the posterior belief over the hidden
state.  Values are approximated by backward induction on a finite belief
grid; every theta-value is 1-Lipschitz in the belief, so the reported
error bound is ``2 * mesh`` independently of the horizon.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import BeliefDist, Evaluation, InvalidArgumentError, SimplexPoint
from .metric import MatrixFamily
from .lp import EQ, LinearProgram, solve_lp


def _coords(p) -> np.ndarray:
    return p.coords if isinstance(p, SimplexPoint) else np.asarray(p, dtype=float)


@dataclass(frozen=True, init=False)
class PomdpModel:
    """Finite POMDP: after playing a at hidden state k, a pair (signal,
    next state) is drawn from q(k, a); only the signal is observed."""

    states: tuple
    actions: tuple
    signals: tuple
    q: np.ndarray  # (K, A, S, K')
    g: np.ndarray  # (K, A)
    p1: np.ndarray  # initial belief over K

    def __init__(self, states, actions, signals, q, g, p1):
        states, actions, signals = tuple(states), tuple(actions), tuple(signals)
        nk, na, ns = len(states), len(actions), len(signals)
        q = np.asarray(q, dtype=float)
        g = np.asarray(g, dtype=float)
        if q.shape != (nk, na, ns, nk):
            raise InvalidArgumentError(f"pomdp transition must have shape {(nk, na, ns, nk)}")
        if g.shape != (nk, na):
            raise InvalidArgumentError(f"pomdp payoff must have shape {(nk, na)}")
        if np.any(q < -1e-12) or not np.all(np.isfinite(q)):
            raise InvalidArgumentError("pomdp transition has negative entries")
        q = np.maximum(q, 0.0)
        sums = q.reshape(nk, na, ns * nk).sum(axis=2)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise InvalidArgumentError("pomdp transition rows do not sum to one")
        q = q / sums[:, :, None, None]
        if np.any(g < -1e-12) or np.any(g > 1.0 + 1e-12):
            raise InvalidArgumentError("pomdp payoffs must lie in [0, 1]")
        g = np.clip(g, 0.0, 1.0)
        p1 = SimplexPoint(p1).coords
        for name, arr in (("q", q), ("g", g), ("p1", p1)):
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "signals", signals)

    def action_index(self, a) -> int:
        return a if isinstance(a, (int, np.integer)) else self.actions.index(a)

    def signal_index(self, s) -> int:
        return s if isinstance(s, (int, np.integer)) else self.signals.index(s)


def belief_update(pomdp: PomdpModel, p, a, s):
    """One Bayes step: probability of the signal and the next belief.

    Returns ``(prob, next_point)`` with
    ``prob = sum_k p^k q(k,a)(s)`` and
    ``next(k') = sum_k p^k q(k,a)(s,k') / prob``.  When the signal has
    probability zero the returned belief is the uniform point and must be
    ignored downstream.
    """
    p = _coords(p)
    a = pomdp.action_index(a)
    s = pomdp.signal_index(s)
    joint = p @ pomdp.q[:, a, s, :]  # (K',)
    prob = float(joint.sum())
    if prob <= 0.0:
        return 0.0, SimplexPoint(np.full(p.size, 1.0 / p.size))
    return prob, SimplexPoint(joint / prob)


@dataclass(frozen=True)
class BeliefMdp:
    """Full-observation MDP on the simplex.

    ``reward(P, a)`` and ``step(P, a)`` are vectorized over a batch P of
    beliefs (shape (n, K)); ``step`` returns one ``(probs, posteriors)``
    pair per signal.  Payoff and kernel are 1-Lipschitz in the belief for
    the metric this package computes (spot-checked in tests).
    """

    dim: int
    actions: tuple
    reward: callable
    step: callable

    def reward_at(self, p, a) -> float:
        return float(self.reward(_coords(p)[None, :], a)[0])

    def kernel_at(self, p, a) -> BeliefDist:
        points, weights = [], []
        for probs, posts in self.step(_coords(p)[None, :], a):
            if probs[0] > 0.0:
                points.append(SimplexPoint(posts[0]))
                weights.append(float(probs[0]))
        return BeliefDist(points, weights)


def pomdp_to_belief_mdp(pomdp: PomdpModel) -> BeliefMdp:
    """The belief MDP of a POMDP: linear payoff, Bayes-step kernel."""
    q, g = pomdp.q, pomdp.g
    nk, ns = len(pomdp.states), len(pomdp.signals)

    def reward(P, a):
        return P @ g[:, a]

    def step(P, a):
        out = []
        for s in range(ns):
            joint = P @ q[:, a, s, :]  # (n, K')
            probs = joint.sum(axis=1)
            posts = np.full((P.shape[0], nk), 1.0 / nk)
            pos = probs > 0.0
            posts[pos] = joint[pos] / probs[pos, None]
            out.append((probs, posts))
        return out

    return BeliefMdp(dim=nk, actions=pomdp.actions, reward=reward, step=step)


def _simplex_lattice(dim: int, subdivisions: int) -> np.ndarray:
    """All points of the simplex with coordinates multiples of 1/m."""
    pts = []
    for comp in itertools.combinations(range(subdivisions + dim - 1), dim - 1):
        prev, row = -1, []
        for c in comp:
            row.append(c - prev - 1)
            prev = c
        row.append(subdivisions + dim - 2 - prev)
        pts.append(row)
    return np.array(pts, dtype=float)[::-1] / subdivisions


@dataclass(frozen=True, init=False)
class BeliefGrid:
    """Finite set of beliefs covering the simplex.

    ``mesh`` bounds the L1 distance from any belief to its nearest grid
    point.  Interpolation is piecewise linear for dim 2 (exact along the
    segment) and nearest-neighbor otherwise.
    """

    points: np.ndarray  # (n, dim)
    mesh: float
    mode: str  # "linear" | "nearest"

    def __init__(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n, dim = points.shape
        if n < 2 or dim < 2:
            raise InvalidArgumentError("belief grid needs at least two points on a simplex")
        if np.any(points < -1e-12) or np.any(np.abs(points.sum(axis=1) - 1.0) > 1e-9):
            raise InvalidArgumentError("belief grid points must lie on the simplex")
        points = np.maximum(points, 0.0)
        points /= points.sum(axis=1)[:, None]
        for k in range(dim):
            if not np.any(np.abs(points - np.eye(dim)[k]).sum(axis=1) <= 1e-9):
                raise InvalidArgumentError("belief grid must contain every vertex")
        mode = "linear" if dim == 2 else "nearest"
        if mode == "linear":
            order = np.argsort(points[:, 0], kind="stable")
            points = points[order]
            # L1 distance to the nearest of two neighbors at spacing h is
            # at most 2 * h/2 = h
            mesh = float(np.diff(points[:, 0]).max())
        else:
            # covering radius of the grid, estimated on a dense sample and
            # inflated by the sample's own resolution
            sample = _simplex_lattice(dim, 23)
            d = np.abs(sample[:, None, :] - points[None, :, :]).sum(axis=2).min(axis=1)
            mesh = float(d.max()) + dim / 23.0
        points = np.ascontiguousarray(points)
        points.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "mode", mode)

    @classmethod
    def uniform(cls, dim: int, resolution: int) -> "BeliefGrid":
        """Lattice grid with ``resolution`` points per edge."""
        if resolution < 2:
            raise InvalidArgumentError("grid resolution must be >= 2")
        if dim == 2:
            x = np.linspace(0.0, 1.0, resolution)
            return cls(np.column_stack([x, 1.0 - x]))
        return cls(_simplex_lattice(dim, resolution - 1))

    def __len__(self) -> int:
        return self.points.shape[0]

    def interpolation_weights(self, P):
        """Sparse interpolation of a batch of beliefs onto the grid.

        Returns ``(idx0, w0, idx1, w1)``; nearest-neighbor mode has
        ``w1 = 0``.
        """
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if self.mode == "linear":
            x = np.clip(P[:, 0], 0.0, 1.0)
            gx = self.points[:, 0]
            hi = np.clip(np.searchsorted(gx, x), 1, len(self) - 1)
            lo = hi - 1
            span = gx[hi] - gx[lo]
            w_hi = np.where(span > 0, (x - gx[lo]) / np.where(span > 0, span, 1.0), 0.0)
            return lo, 1.0 - w_hi, hi, w_hi
        d = np.abs(P[:, None, :] - self.points[None, :, :]).sum(axis=2)
        idx = d.argmin(axis=1)
        return idx, np.ones(len(P)), idx, np.zeros(len(P))

    def interpolate(self, values, P) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        idx0, w0, idx1, w1 = self.interpolation_weights(P)
        return w0 * values[idx0] + w1 * values[idx1]


def grid_value_theta(bmdp: BeliefMdp, grid: BeliefGrid, theta: Evaluation):
    """theta-values on the grid by backward induction with interpolation.

    Off-grid posteriors are projected through the grid's interpolation;
    every exact theta-value is 1-Lipschitz, so the returned
    ``error_bound = 2 * mesh`` is horizon-independent.
    Returns ``(values, error_bound)``.
    """
    if len(grid) == 0:
        raise InvalidArgumentError("empty belief grid")
    n_a = len(bmdp.actions)
    n_g = len(grid)
    P = grid.points

    R = np.empty((n_a, n_g))
    rows, cols, vals = [], [], []
    for a in range(n_a):
        R[a] = bmdp.reward(P, a)
        for probs, posts in bmdp.step(P, a):
            pos = np.nonzero(probs > 0.0)[0]
            if pos.size == 0:
                continue
            idx0, w0, idx1, w1 = grid.interpolation_weights(posts[pos])
            base = a * n_g + pos
            rows.append(base)
            cols.append(idx0)
            vals.append(probs[pos] * w0)
            rows.append(base)
            cols.append(idx1)
            vals.append(probs[pos] * w1)
    T = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_a * n_g, n_g),
    )
    R_flat = R.reshape(-1)

    w = np.zeros(n_g)
    for t in range(theta.horizon - 1, -1, -1):
        w = (theta.weights[t] * R_flat + T @ w).reshape(n_a, n_g).max(axis=0)
    return w, 2.0 * grid.mesh


@dataclass(frozen=True, init=False)
class InformedGame:
    """Repeated game where player 1 knows the state and alone drives the
    (state, signal) transition; player 2 observes the signal d.

    ``qbar(k, i)`` is the controlled marginal on K x D; the payoff
    ``g(k, i, j)`` lies in [0, 1]; ``initial`` is a joint law on K x D.
    """

    states: tuple
    actions1: tuple
    actions2: tuple
    signals: tuple
    qbar: np.ndarray  # (K, I, K', D)
    g: np.ndarray  # (K, I, J)
    initial: np.ndarray  # (K, D)

    def __init__(self, states, actions1, actions2, signals, qbar, g, initial):
        states, actions1 = tuple(states), tuple(actions1)
        actions2, signals = tuple(actions2), tuple(signals)
        nk, ni, nj, nd = len(states), len(actions1), len(actions2), len(signals)
        qbar = np.asarray(qbar, dtype=float)
        g = np.asarray(g, dtype=float)
        initial = np.asarray(initial, dtype=float)
        if qbar.shape != (nk, ni, nk, nd):
            raise InvalidArgumentError(f"qbar must have shape {(nk, ni, nk, nd)}")
        if g.shape != (nk, ni, nj):
            raise InvalidArgumentError(f"payoff must have shape {(nk, ni, nj)}")
        if initial.shape != (nk, nd):
            raise InvalidArgumentError(f"initial joint law must have shape {(nk, nd)}")
        if np.any(qbar < -1e-12) or not np.all(np.isfinite(qbar)):
            raise InvalidArgumentError("qbar has negative entries")
        qbar = np.maximum(qbar, 0.0)
        sums = qbar.reshape(nk, ni, nk * nd).sum(axis=2)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise InvalidArgumentError("qbar rows do not sum to one")
        qbar = qbar / sums[:, :, None, None]
        if np.any(g < -1e-12) or np.any(g > 1.0 + 1e-12):
            raise InvalidArgumentError("payoffs must lie in [0, 1]")
        g = np.clip(g, 0.0, 1.0)
        if np.any(initial < -1e-12) or initial.sum() <= 0:
            raise InvalidArgumentError("initial joint law must be a probability")
        initial = np.maximum(initial, 0.0) / max(initial.sum(), 1e-300)
        for name, arr in (("qbar", qbar), ("g", g), ("initial", initial)):
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions1", actions1)
        object.__setattr__(self, "actions2", actions2)
        object.__setattr__(self, "signals", signals)


def _mixed_action_grid(n_actions: int, resolution: int) -> np.ndarray:
    """Grid over the mixed actions of one player, ``resolution`` points
    per edge of the simplex."""
    if n_actions == 1:
        return np.ones((1, 1))
    if n_actions == 2:
        x = np.linspace(0.0, 1.0, resolution)
        return np.column_stack([x, 1.0 - x])
    return _simplex_lattice(n_actions, resolution - 1)


def informed_to_belief_mdp(game: InformedGame, action_grid_res: int) -> BeliefMdp:
    """Auxiliary belief MDP of an informed-controller game.

    Actions are state-contingent mixed actions gridded with
    ``action_grid_res`` points per mixed-action coordinate; the payoff is
    the stage minimum over player 2's replies,
    ``r(p, a) = min_j sum_{k,i} p^k a^k(i) g(k,i,j)``, and the kernel is
    the posterior split of the controlled marginal given the signal.
    """
    if action_grid_res < 2:
        raise InvalidArgumentError("action grid resolution must be >= 2")
    nk, ni = len(game.states), len(game.actions1)
    nd = len(game.signals)
    base = _mixed_action_grid(ni, action_grid_res)
    actions = tuple(itertools.product(range(len(base)), repeat=nk))

    # per action: payoff-by-reply matrix (K, J) and signal kernel (K, K', D)
    payoff_by_reply = []
    kernels = []
    for combo in actions:
        a = base[list(combo)]  # (K, I)
        payoff_by_reply.append(np.einsum("ki,kij->kj", a, game.g))
        kernels.append(np.einsum("ki,kizd->kzd", a, game.qbar))
    payoff_by_reply = np.array(payoff_by_reply)  # (nA, K, J)
    kernels = np.array(kernels)  # (nA, K, K', D)

    def reward(P, a):
        return (P @ payoff_by_reply[a]).min(axis=1)

    def step(P, a):
        lam = np.tensordot(P, kernels[a], axes=([1], [0]))  # (n, K', D)
        out = []
        for d in range(nd):
            probs = lam[:, :, d].sum(axis=1)
            posts = np.full((P.shape[0], nk), 1.0 / nk)
            pos = probs > 0.0
            posts[pos] = lam[pos, :, d] / probs[pos, None]
            out.append((probs, posts))
        return out

    return BeliefMdp(dim=nk, actions=actions, reward=reward, step=step)


def cav_u(fam: MatrixFamily, grid: BeliefGrid) -> np.ndarray:
    """Least concave majorant of the non-revealing value on the grid.

    For dim 2 this is the exact 1-d upper envelope; for larger simplexes
    each grid value is the LP optimum over convex combinations of grid
    points, i.e. the upper concave envelope restricted to the grid.
    """
    if fam.dim != grid.points.shape[1]:
        raise InvalidArgumentError("family and grid dimensions differ")
    f = np.array([fam.value_at(p) for p in grid.points])
    if grid.mode == "linear":
        x = grid.points[:, 0]
        hull_x, hull_f = [x[0]], [f[0]]
        for xi, fi in zip(x[1:], f[1:]):
            hull_x.append(xi)
            hull_f.append(fi)
            while len(hull_x) >= 3:
                (x0, y0), (x1, y1), (x2, y2) = (
                    (hull_x[-3], hull_f[-3]),
                    (hull_x[-2], hull_f[-2]),
                    (hull_x[-1], hull_f[-1]),
                )
                if (y1 - y0) * (x2 - x1) <= (y2 - y1) * (x1 - x0) + 1e-15:
                    del hull_x[-2], hull_f[-2]
                else:
                    break
        return np.interp(x, hull_x, hull_f)

    n = len(grid)
    out = np.empty(n)
    pts = grid.points
    A = np.vstack([pts.T, np.ones((1, n))])
    for i in range(n):
        b = np.concatenate([pts[i], [1.0]])
        sol = solve_lp(LinearProgram(-f, A, b, [EQ] * A.shape[0]))
        out[i] = -sol.objective
    return out
