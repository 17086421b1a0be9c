import numpy as np
import pytest

from longrun import (
    Evaluation,
    FiniteMDP,
    GamblingHouse,
    InvalidArgumentError,
    block_strategy_payoff_bound,
    check_invariant_couple,
    excessive_check,
    impatience,
    limit_value_lp,
    make_evaluation_cesaro,
    make_evaluation_discounted,
    make_evaluation_window,
    max_invariant_payoff,
    value_theta_house,
    value_theta_mdp,
    window_transform,
)
from longrun.gallery import even_stage_evaluation, ex39_house, ex39_mdp
from longrun.lp import GE, LinearProgram, solve_lp
from oracles import mdp_policy_payoff_by_simulation, random_mdp


# -- house values -----------------------------------------------------------------

def test_ex39_two_stage_average():
    v = value_theta_house(ex39_house(), make_evaluation_cesaro(2))
    assert np.allclose(v, 0.5)


def test_ex39_even_stage_evaluation_returns_start():
    for n in (1, 3, 8):
        v = value_theta_house(ex39_house(), even_stage_evaluation(n))
        assert abs(v[0] - 0.0) < 1e-12 and abs(v[1] - 1.0) < 1e-12


def test_constant_payoff_house():
    house = GamblingHouse(
        ("x", "y"),
        [0.4, 0.4],
        [[[0.5, 0.5], [1.0, 0.0]], [[0.0, 1.0]]],
    )
    for theta in (make_evaluation_cesaro(5), make_evaluation_discounted(0.3)):
        assert np.allclose(value_theta_house(house, theta), 0.4, atol=1e-12)


def _random_house(rng, n_states=4, max_options=3):
    options = []
    for _ in range(n_states):
        k = int(rng.integers(1, max_options + 1))
        options.append(rng.dirichlet(np.ones(n_states), size=k))
    return GamblingHouse(
        tuple(str(i) for i in range(n_states)),
        rng.uniform(0, 1, size=n_states),
        options,
    )


def test_value_iteration_inequality_on_random_houses():
    # |v(x) - sup_{u in F(x)} v(u)| <= theta_1 + sum_{t>=2} |theta_t - theta_{t-1}|
    rng = np.random.default_rng(21)
    for _ in range(10):
        house = _random_house(rng)
        w = rng.uniform(0.05, 1.0, size=int(rng.integers(2, 12)))
        theta = Evaluation(w)
        v = value_theta_house(house, theta)
        bound = theta.weights[0] + np.abs(np.diff(theta.weights)).sum()
        for x in range(house.n_states):
            best = max(row @ v for row in house.options[x])
            assert abs(v[x] - best) <= bound + 1e-9
        assert np.all(v >= -1e-12) and np.all(v <= 1.0 + 1e-12)


# -- MDP values ---------------------------------------------------------------------

def test_dominant_action_single_state():
    mdp = FiniteMDP(("s",), ("a", "b"), [[[1.0], [1.0]]], [[0.3, 0.7]])
    for theta in (make_evaluation_cesaro(3), make_evaluation_discounted(0.2)):
        assert abs(value_theta_mdp(mdp, theta)[0] - 0.7) < 1e-12


def test_ex39_mdp_cesaro_bound():
    mdp = ex39_mdp()
    for n in (1, 2, 3, 10, 101, 1000):
        v = value_theta_mdp(mdp, make_evaluation_cesaro(n))
        assert abs(v[0] - 0.5) <= 0.5 / n + 1e-12
        assert abs(v[1] - 0.5) <= 0.5 / n + 1e-12


def test_mdp_value_matches_monte_carlo_of_optimal_policy():
    rng = np.random.default_rng(100)
    mdp = random_mdp(rng, 3, 2)
    lam = 0.5
    theta = make_evaluation_discounted(lam, tail_tol=1e-10)
    v = value_theta_mdp(mdp, theta)

    # policy iteration (independent of backward induction)
    policy = np.zeros(mdp.n_states, dtype=np.int64)
    for _ in range(50):
        P = mdp.q[np.arange(mdp.n_states), policy]
        g = mdp.g[np.arange(mdp.n_states), policy]
        V = np.linalg.solve(np.eye(mdp.n_states) - (1 - lam) * P, lam * g)
        Q = lam * mdp.g + (1 - lam) * (mdp.q @ V)
        new = Q.argmax(axis=1)
        if np.array_equal(new, policy):
            break
        policy = new

    means, ses = mdp_policy_payoff_by_simulation(
        mdp, policy, lam, n_paths=1_000_000, horizon=theta.horizon,
        rng=np.random.default_rng(7),
    )
    assert np.all(np.abs(v - means) <= 3 * ses + 1e-6)


# -- window transform -----------------------------------------------------------------

def test_window_of_point_mass_at_zero_is_cesaro():
    for n in (1, 4, 9):
        assert window_transform(Evaluation([1.0]), n) == make_evaluation_cesaro(n)


def test_window_of_point_mass_at_T():
    T, n = 5, 4
    theta = Evaluation([0.0] * T + [1.0])  # mass on stage index T
    out = window_transform(theta, n)
    assert out == make_evaluation_window(T + 1, n)
    assert abs(impatience(out) - 2.0 / n) < 1e-12
    assert impatience(out) <= 3.0 / n


def test_window_of_uniform_is_triangular():
    T = 6
    n = T
    theta = Evaluation(np.full(T + 1, 1.0 / (T + 1)))
    out = window_transform(theta, n)
    # direct summation oracle for every output stage
    w0 = theta.weights
    expected = [
        sum(w0[t] for t in range(max(0, l - n), min(T, l - 1) + 1)) / n
        for l in range(1, T + n + 1)
    ]
    assert np.allclose(out.weights, expected, atol=1e-15)
    assert abs(out.weights.sum() - 1.0) < 1e-12
    assert np.all(np.diff(out.weights[:n]) >= -1e-15)  # rising edge
    assert np.all(np.diff(out.weights[n:]) <= 1e-15)  # falling edge
    assert impatience(out) <= 3.0 / n + 1e-12


def test_window_impatience_bound_random():
    rng = np.random.default_rng(31)
    for _ in range(50):
        T = int(rng.integers(1, 40))
        n = int(rng.integers(1, 20))
        theta = Evaluation(rng.uniform(0, 1, size=T) + 1e-6)
        out = window_transform(theta, n)
        assert abs(out.weights.sum() - 1.0) < 1e-9
        assert impatience(out) <= 3.0 / n + 1e-12


def test_window_rejects_zero_length():
    with pytest.raises(InvalidArgumentError):
        window_transform(Evaluation([1.0]), 0)


# -- invariant couples -----------------------------------------------------------------

def test_invariant_couple_of_ex39():
    couple = check_invariant_couple(ex39_mdp(), [0.5, 0.5], 0.5)
    assert couple is not None
    residuals = couple.residuals(ex39_mdp())
    assert max(residuals.values()) <= 1e-9


def test_invariant_couple_rejects_non_stationary_marginal():
    assert check_invariant_couple(ex39_mdp(), [1.0, 0.0], 0.0) is None
    assert check_invariant_couple(ex39_mdp(), [1.0, 0.0], 1.0) is None


def test_invariant_couple_absorbing_state():
    mdp = FiniteMDP(("s",), ("a",), [[[1.0]]], [[0.7]])
    assert check_invariant_couple(mdp, [1.0], 0.7) is not None
    assert check_invariant_couple(mdp, [1.0], 0.2) is None


def test_max_invariant_payoff_examples():
    mdp = ex39_mdp()
    assert max_invariant_payoff(mdp, np.ones(2)) <= 1e-8
    assert abs(max_invariant_payoff(mdp, np.zeros(2)) - 0.5) <= 1e-8
    v_star, cert = limit_value_lp(mdp, "0")
    assert max_invariant_payoff(mdp, cert.w) <= 1e-8


def test_excessive_check_examples():
    mdp = ex39_mdp()
    assert excessive_check(mdp, [0.3, 0.3])
    assert not excessive_check(mdp, [0.0, 1.0])
    _, cert = limit_value_lp(mdp, "1")
    assert excessive_check(mdp, cert.w)


# -- limit value LP ----------------------------------------------------------------------

def test_limit_value_of_ex39_is_half():
    mdp = ex39_mdp()
    for start in ("0", "1"):
        v_star, cert = limit_value_lp(mdp, start)
        assert abs(v_star - 0.5) <= 1e-9
        assert cert.excess_residual(mdp) <= 1e-9
        assert cert.superharmonic_residual(mdp) <= 1e-9


def test_limit_value_absorbing():
    mdp = FiniteMDP(("s",), ("a",), [[[1.0]]], [[0.42]])
    v_star, _ = limit_value_lp(mdp, "s")
    assert abs(v_star - 0.42) <= 1e-9


def test_limit_value_close_to_long_cesaro_on_random_mdps():
    rng = np.random.default_rng(77)
    for _ in range(5):
        mdp = random_mdp(rng, 4, 3)
        v_n = value_theta_mdp(mdp, make_evaluation_cesaro(2000))
        for k0 in range(4):
            v_star, cert = limit_value_lp(mdp, k0)
            assert abs(v_star - v_n[k0]) <= 0.02
            assert max_invariant_payoff(mdp, cert.w) <= 1e-8


def test_discounted_and_cesaro_limits_agree():
    rng = np.random.default_rng(78)
    mdp = random_mdp(rng, 4, 3)
    n = 2000
    v_n = value_theta_mdp(mdp, make_evaluation_cesaro(n))
    v_lam = value_theta_mdp(mdp, make_evaluation_discounted(1.0 / n, tail_tol=1e-9))
    assert np.abs(v_n - v_lam).max() <= 0.03


def _h_feasible(mdp, w):
    """Feasibility of the companion system in h, by its own LP."""
    nk, na = mdp.n_states, mdp.n_actions
    rows, rhs = [], []
    for k in range(nk):
        for a in range(na):
            row = np.eye(nk)[k] - mdp.q[k, a]
            rows.append(row)
            rhs.append(mdp.g[k, a] - w[k])
    lb = np.full(nk, -np.inf)
    sol = solve_lp(
        LinearProgram(np.zeros(nk), np.array(rows), np.array(rhs), [GE] * len(rows), lb=lb)
    )
    return sol.status == "optimal"


def test_farkas_equivalence_both_directions():
    rng = np.random.default_rng(55)
    for _ in range(12):
        mdp = random_mdp(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)))
        w = rng.uniform(0, 1, size=mdp.n_states)
        violation = max_invariant_payoff(mdp, w)
        feasible = _h_feasible(mdp, w)
        if violation > 1e-8:
            assert not feasible
        if feasible:
            assert violation <= 1e-8
        if violation < -1e-8:
            assert feasible


def test_general_limit_value_convergence_under_small_impatience():
    rng = np.random.default_rng(99)
    for _ in range(3):
        mdp = random_mdp(rng, 4, 3)
        v_star = np.array([limit_value_lp(mdp, k)[0] for k in range(4)])
        for _ in range(3):
            rough = Evaluation(rng.uniform(0.0, 1.0, size=int(rng.integers(1, 50))) + 1e-6)
            theta = window_transform(rough, 3000)  # impatience <= 1e-3
            assert impatience(theta) <= 1e-3
            v_theta = value_theta_mdp(mdp, theta)
            assert np.abs(v_theta - v_star).max() <= 0.05


# -- block strategy bound -------------------------------------------------------------

def test_block_bound_examples():
    mdp = ex39_mdp()
    assert abs(block_strategy_payoff_bound(mdp, 10, make_evaluation_cesaro(1000)) - 0.01) < 1e-12
    assert abs(block_strategy_payoff_bound(mdp, 7, make_evaluation_cesaro(7)) - 1.0) < 1e-12
    bound = block_strategy_payoff_bound(mdp, 50, make_evaluation_discounted(1e-3))
    assert abs(bound - 0.05) < 1e-9
    with pytest.raises(InvalidArgumentError):
        block_strategy_payoff_bound(mdp, 0, make_evaluation_cesaro(2))
