"""Built-in example models and their convergence curves.

Each builder returns a model from the other modules; the ``*_curve``
helpers produce the rows emitted by the command line ``examples``
subcommand, together with the closed-form reference column when one
exists.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Evaluation, InvalidArgumentError, make_evaluation_discounted
from .dp import FiniteMDP, GamblingHouse, value_theta_house
from .metric import MatrixFamily
from .partialobs import (
    BeliefGrid,
    InformedGame,
    PomdpModel,
    grid_value_theta,
    informed_to_belief_mdp,
    pomdp_to_belief_mdp,
)

EXAMPLE_NAMES = ("ex39", "circle", "infini", "dark", "am", "horner")


# -- two-state alternating chain -------------------------------------------

def ex39_house() -> GamblingHouse:
    """States {0, 1}, forced move to the other state, payoff = state."""
    return GamblingHouse(
        states=("0", "1"),
        payoffs=[0.0, 1.0],
        options=[[[0.0, 1.0]], [[1.0, 0.0]]],
    )


def ex39_mdp() -> FiniteMDP:
    """The same chain as a one-action MDP (payoff at the current state)."""
    return FiniteMDP(
        states=("0", "1"),
        actions=("move",),
        q=[[[0.0, 1.0]], [[1.0, 0.0]]],
        g=[[0.0], [1.0]],
    )


def even_stage_evaluation(n: int) -> Evaluation:
    """Weight 1/n on stages 2, 4, ..., 2n; small weights, impatience 2/n."""
    w = np.zeros(2 * n)
    w[1::2] = 1.0 / n
    return Evaluation(w)


# -- rotation on the circle -------------------------------------------------

def circle_payoff(angle) -> float:
    return (1.0 + np.cos(angle)) / 2.0


def circle_value(start: float, n: int) -> float:
    """Average payoff along the deterministic orbit alpha -> alpha + 1.

    The single-transition house has no choices, so the theta-value is the
    orbit average itself.
    """
    t = np.arange(1, n + 1, dtype=float)
    return float(np.mean(circle_payoff(start + t)))


CIRCLE_REFERENCE = 0.5  # Riemann mean of (1 + cos a) / 2 over the circle


# -- slow-convergence absorption house --------------------------------------

def infini_house(l: float = 2.0, alpha_mesh: float = 1e-3) -> GamblingHouse:
    """Three-point house: from a, a gridded move puts mass alpha on the
    rewarding absorbing point b and alpha**l on the worthless absorbing
    point c.

    The stage payoff is the mass at b (so the discounted value from a
    satisfies ``x = max_alpha alpha + (1-lam)(1-alpha-alpha**l) x``, the
    fixed point with the closed form used as reference).
    """
    if l <= 1.0:
        raise InvalidArgumentError("the exponent l must exceed 1")
    alphas = np.linspace(0.0, 0.5, int(round(0.5 / alpha_mesh)) + 1)
    opts_a = np.column_stack([1.0 - alphas - alphas**l, alphas, alphas**l])
    return GamblingHouse(
        states=("a", "b", "c"),
        payoffs=[0.0, 1.0, 0.0],
        options=[opts_a, [[0.0, 1.0, 0.0]], [[0.0, 0.0, 1.0]]],
    )


def infini_closed_form(lam: float, l: float = 2.0) -> float:
    """Discounted value at the initial point a."""
    return (1.0 / (1.0 - lam)) / (
        l * (lam / ((1.0 - lam) * (l - 1.0))) ** ((l - 1.0) / l) + 1.0
    )


def infini_value(lam: float, l: float = 2.0, alpha_mesh: float = 1e-3,
                 tail_tol: float = 1e-10) -> float:
    house = infini_house(l, alpha_mesh)
    v = value_theta_house(house, make_evaluation_discounted(lam, tail_tol))
    return float(v[0])


def infini_exponent_fit(lambdas, l: float = 2.0, alpha_mesh: float = 1e-3):
    """Least-squares slope of log(1 - v_lambda) against log(lambda)."""
    lambdas = np.asarray(sorted(lambdas), dtype=float)
    house = infini_house(l, alpha_mesh)
    gaps = []
    for lam in lambdas:
        v = value_theta_house(house, make_evaluation_discounted(lam, 1e-10))[0]
        gaps.append(1.0 - v)
    slope = np.polyfit(np.log(lambdas), np.log(gaps), 1)[0]
    return float(slope), np.array(gaps)


# -- uninformative-signal POMDP ---------------------------------------------

def dark_pomdp() -> PomdpModel:
    """Two hidden states, a single blank signal.

    Action ``a`` keeps the state and pays on the second state; action
    ``b`` pays nothing and moves half of the first-state mass over.  The
    belief MDP is deterministic: (p, 1-p) stays put under a and becomes
    (p/2, 1-p/2) under b.
    """
    #                     s: (signal, next-state) laid out as (S=1, K'=2)
    q = [
        [  # state k1
            [[1.0, 0.0]],  # a: stay
            [[0.5, 0.5]],  # b: halve
        ],
        [  # state k2
            [[0.0, 1.0]],  # a: stay
            [[0.0, 1.0]],  # b: stay
        ],
    ]
    return PomdpModel(
        states=("k1", "k2"),
        actions=("a", "b"),
        signals=("s",),
        q=q,
        g=[[0.0, 0.0], [1.0, 0.0]],
        p1=[1.0, 0.0],
    )


def dark_oracle(lam: float, max_n: int = 200) -> float:
    """Best payoff of the pure plans b^n a^infinity (a lower bound)."""
    n = np.arange(0, max_n + 1, dtype=float)
    return float(np.max((1.0 - lam) ** n * (1.0 - 0.5**n)))


def dark_value(lam: float, grid_points: int = 2001, tail_tol: float = 1e-9) -> float:
    """Grid value iteration of the dark belief MDP at the initial belief."""
    bmdp = pomdp_to_belief_mdp(dark_pomdp())
    grid = BeliefGrid.uniform(2, grid_points)
    values, _ = grid_value_theta(bmdp, grid, make_evaluation_discounted(lam, tail_tol))
    return float(grid.interpolate(values, np.array([[1.0, 0.0]]))[0])


def dark_gap_ratio(lam: float, value: float) -> float:
    """(1 - v_lambda) / (lambda log2(1/lambda)), expected near 1."""
    return (1.0 - value) / (lam * math.log2(1.0 / lam))


# -- fixed-state incomplete-information game ---------------------------------

def am_default_matrices() -> np.ndarray:
    return np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])


def am_game(matrices=None) -> InformedGame:
    """Repeated game with a fixed hidden state; player 2 observes player
    1's action, which here is the only information channel."""
    g = am_default_matrices() if matrices is None else np.asarray(matrices, float)
    nk, ni, nj = g.shape
    qbar = np.zeros((nk, ni, nk, ni))
    for k in range(nk):
        for i in range(ni):
            qbar[k, i, k, i] = 1.0
    return InformedGame(
        states=tuple(f"k{x+1}" for x in range(nk)),
        actions1=tuple(f"i{x+1}" for x in range(ni)),
        actions2=tuple(f"j{x+1}" for x in range(nj)),
        signals=tuple(f"i{x+1}" for x in range(ni)),
        qbar=qbar,
        g=g,
        initial=np.full((nk, ni), 1.0 / (nk * ni)),
    )


def am_values(matrices=None, n: int = 2000, grid_res: int = 201,
              action_res: int = 41):
    """Grid value iteration against the concavified non-revealing value.

    Returns ``(grid, values, cav_reference)``.
    """
    from .core import make_evaluation_cesaro
    from .partialobs import cav_u

    g = am_default_matrices() if matrices is None else np.asarray(matrices, float)
    game = am_game(g)
    bmdp = informed_to_belief_mdp(game, action_res)
    grid = BeliefGrid.uniform(2, grid_res)
    values, _ = grid_value_theta(bmdp, grid, make_evaluation_cesaro(n))
    reference = cav_u(MatrixFamily(g), grid)
    return grid, values, reference


# -- persistent-state informed-controller game --------------------------------

def horner_game(p: float) -> InformedGame:
    """Two states following a symmetric stay-probability-p chain; only
    player 1 sees the state, both see player 1's past actions."""
    if not (0.0 <= p <= 1.0):
        raise InvalidArgumentError("persistence must lie in [0, 1]")
    g = am_default_matrices()
    chain = np.array([[p, 1.0 - p], [1.0 - p, p]])
    qbar = np.zeros((2, 2, 2, 2))
    for k in range(2):
        for i in range(2):
            qbar[k, i, :, i] = chain[k]
    return InformedGame(
        states=("k1", "k2"),
        actions1=("T", "B"),
        actions2=("L", "R"),
        signals=("T", "B"),
        qbar=qbar,
        g=g,
        initial=np.full((2, 2), 0.25),
    )


def horner_closed_form(p: float):
    """Known value p / (4p - 1) on [1/2, 2/3); None elsewhere."""
    if 0.5 <= p < 2.0 / 3.0:
        return p / (4.0 * p - 1.0)
    return None


def horner_value(p: float, n: int = 2000, grid_res: int = 201,
                 action_res: int = 41) -> float:
    """Cesaro grid value at the uniform belief."""
    from .core import make_evaluation_cesaro

    bmdp = informed_to_belief_mdp(horner_game(p), action_res)
    grid = BeliefGrid.uniform(2, grid_res)
    values, _ = grid_value_theta(bmdp, grid, make_evaluation_cesaro(n))
    return float(grid.interpolate(values, np.array([[0.5, 0.5]]))[0])
