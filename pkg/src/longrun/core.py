"""Core value types: simplex points, belief distributions, evaluations.

Everything here is an immutable value with a canonical normalized form, so
objects can be shared freely between threads and compared in tests.  Two
tolerances are used throughout the package:

* ``CONSTRUCT_TOL = 1e-12`` -- slack accepted when normalizing inputs
  (negative coordinates above ``-1e-12`` are clamped, support points at L1
  distance below ``1e-12`` are merged);
* ``NUM_TOL = 1e-9`` -- default tolerance for downstream numeric
  comparisons, two orders of magnitude above the LP solver residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CONSTRUCT_TOL = 1e-12
NUM_TOL = 1e-9


class InvalidArgumentError(ValueError):
    """Raised when an input violates a documented precondition."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _clamp_nonnegative(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError(f"{what} must be finite")
    if np.any(values < -CONSTRUCT_TOL):
        raise InvalidArgumentError(
            f"{what} has a negative entry below -{CONSTRUCT_TOL:g}: "
            f"{values.min()!r}"
        )
    return np.maximum(values, 0.0)


@dataclass(frozen=True)
class SimplexPoint:
    """A probability vector over a finite index set K.

    The canonical ground metric between two points with the same index set
    is the L1 norm ``sum_k |p^k - q^k|``.
    """

    coords: np.ndarray
    labels: tuple = None

    def __init__(self, coords, labels=None):
        coords = _clamp_nonnegative(coords, "simplex coordinates")
        if coords.ndim != 1 or coords.size == 0:
            raise InvalidArgumentError("simplex point needs a 1-d nonempty vector")
        total = coords.sum()
        if total <= 0:
            raise InvalidArgumentError("simplex coordinates sum to zero")
        object.__setattr__(self, "coords", _readonly(coords / total))
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != coords.size:
                raise InvalidArgumentError("labels do not match coordinate count")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.coords.size

    def __getitem__(self, k: int) -> float:
        return float(self.coords[k])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimplexPoint)
            and self.dim == other.dim
            and bool(np.all(self.coords == other.coords))
        )

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"SimplexPoint({np.array2string(self.coords, precision=6)})"


def l1_distance(p: SimplexPoint, q: SimplexPoint) -> float:
    """L1 distance ``sum_k |p^k - q^k|``, in [0, 2]."""
    if p.dim != q.dim:
        raise InvalidArgumentError("simplex points live on different index sets")
    if p.labels is not None and q.labels is not None and p.labels != q.labels:
        raise InvalidArgumentError("simplex points live on different index sets")
    return float(np.abs(p.coords - q.coords).sum())


@dataclass(frozen=True, init=False)
class BeliefDist:
    """Finitely supported probability over simplex points.

    The constructor normalizes: zero-weight atoms are dropped, support
    points at L1 distance at most 1e-12 are merged (weights summed), and
    atoms are stored sorted lexicographically by coordinates so equal
    distributions compare equal.
    """

    support: tuple  # tuple of SimplexPoint
    weights: np.ndarray

    def __init__(self, support, weights):
        support = list(support)
        weights = _clamp_nonnegative(weights, "belief weights")
        if len(support) != weights.size or not support:
            raise InvalidArgumentError("support and weights sizes differ or empty")
        dim = support[0].dim
        if any(x.dim != dim for x in support):
            raise InvalidArgumentError("support points live on different index sets")

        # merge near-duplicate support points (first occurrence is the
        # representative), then drop zero-weight atoms
        reps: list[SimplexPoint] = []
        merged: list[float] = []
        for x, w in zip(support, weights):
            for i, r in enumerate(reps):
                if np.abs(x.coords - r.coords).sum() <= CONSTRUCT_TOL:
                    merged[i] += w
                    break
            else:
                reps.append(x)
                merged.append(float(w))
        pairs = [(x, w) for x, w in zip(reps, merged) if w > 0.0]
        if not pairs:
            raise InvalidArgumentError("belief distribution has zero total mass")
        pairs.sort(key=lambda xw: tuple(xw[0].coords))
        total = sum(w for _, w in pairs)
        object.__setattr__(self, "support", tuple(x for x, _ in pairs))
        object.__setattr__(
            self, "weights", _readonly(np.array([w / total for _, w in pairs]))
        )

    @property
    def dim(self) -> int:
        return self.support[0].dim

    def __len__(self) -> int:
        return len(self.support)

    def points_matrix(self) -> np.ndarray:
        """Support points stacked as a (len, dim) array."""
        return np.vstack([x.coords for x in self.support])

    def expectation(self, values) -> float:
        """Integrate a function given by its values on the support."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BeliefDist)
            and len(self) == len(other)
            and self.support == other.support
            and bool(np.all(self.weights == other.weights))
        )

    def __hash__(self):
        return hash((self.support, self.weights.tobytes()))

    def __repr__(self):
        atoms = ", ".join(
            f"{w:.6g}*d{np.array2string(x.coords, precision=4)}"
            for x, w in zip(self.support, self.weights)
        )
        return f"BeliefDist({atoms})"


def dirac(p: SimplexPoint) -> BeliefDist:
    return BeliefDist([p], [1.0])


@dataclass(frozen=True, init=False)
class Evaluation:
    """Probability over stages t = 1..T weighting a payoff stream.

    ``weights[t-1]`` is the weight of stage ``t``.  Trailing zero weights
    are stripped; the vector is renormalized to total mass one.
    """

    weights: np.ndarray

    def __init__(self, weights):
        weights = _clamp_nonnegative(weights, "evaluation weights")
        if weights.ndim != 1 or weights.size == 0:
            raise InvalidArgumentError("evaluation needs a 1-d nonempty vector")
        nz = np.nonzero(weights)[0]
        if nz.size == 0:
            raise InvalidArgumentError("evaluation has zero total mass")
        weights = weights[: nz[-1] + 1]
        object.__setattr__(self, "weights", _readonly(weights / weights.sum()))

    @property
    def horizon(self) -> int:
        return self.weights.size

    def __getitem__(self, t: int) -> float:
        """Weight of stage t (1-based); zero beyond the horizon."""
        if t < 1:
            raise InvalidArgumentError("stages are numbered from 1")
        return float(self.weights[t - 1]) if t <= self.horizon else 0.0

    def shift(self) -> "Evaluation":
        """The evaluation ``(theta_{t+1} / (1 - theta_1))_t``.

        Only defined when ``theta_1 < 1``.
        """
        if self.horizon < 2 or self.weights[0] >= 1.0 - CONSTRUCT_TOL:
            raise InvalidArgumentError("shift undefined: all mass on stage 1")
        return Evaluation(self.weights[1:])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Evaluation)
            and self.horizon == other.horizon
            and bool(np.all(self.weights == other.weights))
        )

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"Evaluation({np.array2string(self.weights, precision=6)})"


def impatience(theta: Evaluation) -> float:
    """Total variation of increments ``sum_t |theta_{t+1} - theta_t|``.

    The trailing term uses the convention ``theta_{T+1} = 0``, so for a
    non-increasing evaluation the impatience equals ``theta_1``.  The
    result lies in (0, 2].
    """
    w = np.append(theta.weights, 0.0)
    return float(np.abs(np.diff(w)).sum())


def make_evaluation_cesaro(n: int) -> Evaluation:
    """Uniform weight 1/n on stages 1..n; impatience 1/n."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError("cesaro evaluation needs n >= 1")
    return Evaluation(np.full(int(n), 1.0 / n))


def make_evaluation_window(m: int, n: int) -> Evaluation:
    """Uniform weight 1/n on the n stages m..m+n-1.

    The literal impatience is 1/n for m = 1 and 2/n for m >= 2 (entry step
    plus decreasing tail).
    """
    if m < 1 or n < 1:
        raise InvalidArgumentError("window evaluation needs m >= 1 and n >= 1")
    w = np.zeros(m + n - 1)
    w[m - 1 :] = 1.0 / n
    return Evaluation(w)


def make_evaluation_discounted(lam: float, tail_tol: float = 1e-10) -> Evaluation:
    """Truncated geometric weights ``lam * (1-lam)**(t-1)``, renormalized.

    The horizon is the smallest T with ``(1-lam)**T < tail_tol``; the mass
    dropped by truncation is below ``tail_tol``, so the impatience is
    within ``tail_tol`` of ``lam``.
    """
    if not (0.0 < lam <= 1.0):
        raise InvalidArgumentError("discount factor must lie in (0, 1]")
    if not (0.0 < tail_tol <= 1e-6):
        raise InvalidArgumentError("tail_tol must lie in (0, 1e-6]")
    if lam == 1.0:
        return Evaluation([1.0])
    horizon = max(1, math.ceil(math.log(tail_tol) / math.log(1.0 - lam)))
    t = np.arange(horizon, dtype=float)
    return Evaluation(lam * np.power(1.0 - lam, t))


@dataclass(frozen=True, init=False)
class JointDist:
    """Probability on a product K x S, stored as a (|K|, |S|) table."""

    table: np.ndarray
    row_labels: tuple = None
    col_labels: tuple = None

    def __init__(self, table, row_labels=None, col_labels=None):
        table = _clamp_nonnegative(table, "joint probability table")
        if table.ndim != 2 or table.size == 0:
            raise InvalidArgumentError("joint distribution needs a 2-d table")
        total = table.sum()
        if total <= 0:
            raise InvalidArgumentError("joint distribution has zero mass")
        object.__setattr__(self, "table", _readonly(table / total))
        for name, labels, size in (
            ("row_labels", row_labels, table.shape[0]),
            ("col_labels", col_labels, table.shape[1]),
        ):
            if labels is not None:
                labels = tuple(labels)
                if len(labels) != size:
                    raise InvalidArgumentError(f"{name} do not match table shape")
            object.__setattr__(self, name, labels)

    @property
    def shape(self):
        return self.table.shape

    def signal_marginal(self) -> np.ndarray:
        """Marginal over the second coordinate, ``pi(s) = sum_k pi(k, s)``."""
        return self.table.sum(axis=0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JointDist)
            and self.shape == other.shape
            and bool(np.all(self.table == other.table))
        )

    def __hash__(self):
        return hash(self.table.tobytes())


def joint_l1_distance(pi: JointDist, pi_prime: JointDist) -> float:
    """``sum_{k,s} |pi(k,s) - pi'(k,s)|``."""
    if pi.shape != pi_prime.shape:
        raise InvalidArgumentError("joint distributions have different shapes")
    return float(np.abs(pi.table - pi_prime.table).sum())
