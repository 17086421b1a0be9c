import numpy as np
import pytest

from longrun import (
    BeliefGrid,
    InvalidArgumentError,
    MatrixFamily,
    PomdpModel,
    SimplexPoint,
    belief_update,
    cav_u,
    dstar_lower_bound,
    grid_value_theta,
    informed_to_belief_mdp,
    l1_distance,
    make_evaluation_cesaro,
    make_evaluation_discounted,
    pomdp_to_belief_mdp,
    random_matrix_families,
    value_theta_mdp,
)
from longrun.gallery import (
    am_game,
    dark_oracle,
    dark_pomdp,
    horner_game,
)
from oracles import concave_envelope_by_chords, random_mdp


# -- belief updates ------------------------------------------------------------

def test_dark_update_action_a_keeps_belief():
    pomdp = dark_pomdp()
    for p in ([1.0, 0.0], [0.4, 0.6], [0.0, 1.0]):
        prob, nxt = belief_update(pomdp, SimplexPoint(p), "a", "s")
        assert abs(prob - 1.0) < 1e-12
        assert np.allclose(nxt.coords, p)


def test_dark_update_action_b_halves_first_mass():
    pomdp = dark_pomdp()
    prob, nxt = belief_update(pomdp, SimplexPoint([0.8, 0.2]), "b", "s")
    assert abs(prob - 1.0) < 1e-12
    assert np.allclose(nxt.coords, [0.4, 0.6])


def test_fully_revealing_signals_give_dirac_posteriors():
    rng = np.random.default_rng(2)
    base = random_mdp(rng, 3, 2)
    nk = 3
    q = np.zeros((nk, 2, nk, nk))  # signals = next states
    for k in range(nk):
        for a in range(2):
            for k2 in range(nk):
                q[k, a, k2, k2] = base.q[k, a, k2]
    pomdp = PomdpModel(base.states, base.actions, base.states, q, base.g, np.full(nk, 1 / 3))
    p = SimplexPoint(rng.dirichlet(np.ones(nk)))
    for a in range(2):
        for s in range(nk):
            prob, nxt = belief_update(pomdp, p, a, s)
            expected = float(p.coords @ base.q[:, a, s])
            assert abs(prob - expected) < 1e-12
            if prob > 0:
                assert abs(nxt.coords[s] - 1.0) < 1e-12


# -- belief MDP reduction --------------------------------------------------------

def test_dark_belief_mdp_is_deterministic():
    bmdp = pomdp_to_belief_mdp(dark_pomdp())
    p = SimplexPoint([0.6, 0.4])
    assert abs(bmdp.reward_at(p, 0) - 0.4) < 1e-12  # r((p,1-p), a) = 1 - p
    assert abs(bmdp.reward_at(p, 1) - 0.0) < 1e-12
    ka = bmdp.kernel_at(p, 0)
    assert len(ka) == 1 and l1_distance(ka.support[0], p) < 1e-12
    kb = bmdp.kernel_at(p, 1)
    assert len(kb) == 1 and np.allclose(kb.support[0].coords, [0.3, 0.7])


def test_full_observation_pomdp_collapses_to_mdp_values():
    rng = np.random.default_rng(3)
    base = random_mdp(rng, 3, 2)
    nk = 3
    q = np.zeros((nk, 2, nk, nk))
    for k in range(nk):
        for a in range(2):
            for k2 in range(nk):
                q[k, a, k2, k2] = base.q[k, a, k2]
    pomdp = PomdpModel(base.states, base.actions, base.states, q, base.g, np.full(nk, 1 / 3))
    bmdp = pomdp_to_belief_mdp(pomdp)
    grid = BeliefGrid(np.eye(nk))  # the vertices close the recursion
    for theta in (
        make_evaluation_cesaro(7),
        make_evaluation_discounted(0.3),
        make_evaluation_cesaro(1),
    ):
        v_grid, _ = grid_value_theta(bmdp, grid, theta)
        v_mdp = value_theta_mdp(base, theta)
        assert np.abs(v_grid - v_mdp).max() < 1e-9


def test_single_action_constant_payoff():
    pomdp = PomdpModel(
        ("x", "y"), ("a",), ("s",),
        [[[[0.5, 0.5]]], [[[0.2, 0.8]]]],
        [[0.25], [0.25]],
        [0.5, 0.5],
    )
    bmdp = pomdp_to_belief_mdp(pomdp)
    grid = BeliefGrid.uniform(2, 11)
    for theta in (make_evaluation_cesaro(5), make_evaluation_discounted(0.4)):
        values, _ = grid_value_theta(bmdp, grid, theta)
        assert np.allclose(values, 0.25, atol=1e-12)


# -- grids ------------------------------------------------------------------------

def test_uniform_grid_properties():
    grid = BeliefGrid.uniform(2, 201)
    assert len(grid) == 201
    assert abs(grid.mesh - 1.0 / 200.0) < 1e-12
    assert grid.mode == "linear"
    grid3 = BeliefGrid.uniform(3, 6)
    assert grid3.mode == "nearest"
    # contains all vertices
    for k in range(3):
        assert np.any(np.abs(grid3.points - np.eye(3)[k]).sum(axis=1) < 1e-12)


def test_grid_rejects_missing_vertices():
    with pytest.raises(InvalidArgumentError):
        BeliefGrid(np.array([[0.5, 0.5], [0.25, 0.75]]))


def test_linear_interpolation_is_exact_for_affine_functions():
    grid = BeliefGrid.uniform(2, 51)
    values = 0.3 * grid.points[:, 0] + 0.9 * grid.points[:, 1]
    queries = np.column_stack([np.linspace(0, 1, 17), 1 - np.linspace(0, 1, 17)])
    out = grid.interpolate(values, queries)
    assert np.allclose(out, 0.3 * queries[:, 0] + 0.9 * queries[:, 1], atol=1e-12)


def test_nearest_interpolation_on_three_states():
    grid = BeliefGrid.uniform(3, 5)
    values = np.arange(len(grid), dtype=float)
    out = grid.interpolate(values, grid.points)
    assert np.allclose(out, values)


def test_grid_value_error_bound_under_refinement():
    bmdp = pomdp_to_belief_mdp(dark_pomdp())
    theta = make_evaluation_discounted(0.05)
    coarse = BeliefGrid.uniform(2, 251)
    fine = BeliefGrid.uniform(2, 501)
    v_c, bound_c = grid_value_theta(bmdp, coarse, theta)
    v_f, _ = grid_value_theta(bmdp, fine, theta)
    v_f_on_coarse = fine.interpolate(v_f, coarse.points)
    assert np.abs(v_c - v_f_on_coarse).max() <= bound_c


def test_dark_grid_value_against_plan_oracle():
    from longrun.gallery import dark_value

    v = dark_value(0.1, grid_points=2001)
    assert v >= dark_oracle(0.1) - 1e-3
    assert v <= 1.0


def test_dark_value_monotone_in_patience():
    from longrun.gallery import dark_value

    lams = [0.3, 0.1, 0.03, 0.01]
    values = [dark_value(lam, grid_points=801) for lam in lams]
    assert all(values[i] <= values[i + 1] + 1e-9 for i in range(len(values) - 1))


# -- Lipschitz audits ---------------------------------------------------------------

def test_reward_and_kernel_are_nonexpansive():
    rng = np.random.default_rng(17)
    nk, na, ns = 3, 2, 2
    q = rng.dirichlet(np.ones(ns * nk), size=(nk, na)).reshape(nk, na, ns, nk)
    pomdp = PomdpModel(
        tuple("abc"), ("l", "r"), ("s1", "s2"), q,
        rng.uniform(0, 1, size=(nk, na)), np.full(nk, 1 / 3),
    )
    bmdp = pomdp_to_belief_mdp(pomdp)
    fams = random_matrix_families(nk, 12, seed=5)
    for _ in range(20):
        p = SimplexPoint(rng.dirichlet(np.ones(nk)))
        p2 = SimplexPoint(rng.dirichlet(np.ones(nk)))
        gap = l1_distance(p, p2)
        for a in range(na):
            assert abs(bmdp.reward_at(p, a) - bmdp.reward_at(p2, a)) <= gap + 1e-9
            ku, kv = bmdp.kernel_at(p, a), bmdp.kernel_at(p2, a)
            for fam in fams:
                fu = ku.expectation([fam.value_at(x) for x in ku.support])
                fv = kv.expectation([fam.value_at(x) for x in kv.support])
                assert abs(fu - fv) <= gap + 1e-8


# -- informed controller ---------------------------------------------------------------

def test_single_action_informed_game_is_a_markov_chain():
    # player 1 has one action: the auxiliary MDP is an uncontrolled belief
    # chain and the value is a direct forward evaluation
    rng = np.random.default_rng(19)
    chain = rng.dirichlet(np.ones(2), size=2)
    g = rng.uniform(0, 1, size=(2, 1, 2))
    qbar = np.zeros((2, 1, 2, 1))
    qbar[:, 0, :, 0] = chain
    from longrun import InformedGame

    game = InformedGame(("k1", "k2"), ("i",), ("L", "R"), ("d",), qbar, g,
                        np.array([[0.5], [0.5]]))
    bmdp = informed_to_belief_mdp(game, 2)
    assert len(bmdp.actions) == 1

    theta = make_evaluation_cesaro(40)
    # a grid containing the whole belief orbit makes the induction exact
    start = np.array([0.5, 0.5])
    orbit = [start]
    for _ in range(theta.horizon + 1):
        orbit.append(orbit[-1] @ chain)
    grid = BeliefGrid(np.vstack([np.eye(2)] + orbit))
    values, _ = grid_value_theta(bmdp, grid, theta)
    got = float(grid.interpolate(values, start[None, :])[0])

    belief = start.copy()
    expected = 0.0
    for t in range(theta.horizon):
        stage = min(float(belief @ g[:, 0, j]) for j in range(2))
        expected += theta.weights[t] * stage
        belief = belief @ chain
    assert abs(got - expected) <= 1e-9


def test_am_kernel_is_bayesian_splitting():
    game = am_game()
    bmdp = informed_to_belief_mdp(game, 5)  # per-state mixes on {0,.25,...,1}
    p = SimplexPoint([0.4, 0.6])
    # action: play T with prob 1 in k1, T with prob 0.25 in k2
    idx = None
    base = np.linspace(0, 1, 5)
    for n, combo in enumerate(bmdp.actions):
        if abs(base[combo[0]] - 1.0) < 1e-12 and abs(base[combo[1]] - 0.25) < 1e-12:
            idx = n
            break
    kernel = bmdp.kernel_at(p, idx)
    prob_T = 0.4 * 1.0 + 0.6 * 0.25
    post_T = np.array([0.4 * 1.0, 0.6 * 0.25]) / prob_T
    match = [w for x, w in zip(kernel.support, kernel.weights)
             if l1_distance(x, SimplexPoint(post_T)) < 1e-9]
    assert match and abs(match[0] - prob_T) < 1e-12


def test_horner_kernel_composes_bayes_and_chain_step():
    p = 0.7
    game = horner_game(p)
    bmdp = informed_to_belief_mdp(game, 3)  # mixes {0, .5, 1}
    belief = SimplexPoint([0.3, 0.7])
    base = np.linspace(0, 1, 3)
    idx = next(
        n for n, combo in enumerate(bmdp.actions)
        if abs(base[combo[0]] - 0.5) < 1e-12 and abs(base[combo[1]] - 1.0) < 1e-12
    )
    kernel = bmdp.kernel_at(belief, idx)
    # observing T: posterior on the current state, then the chain step
    a = np.array([[0.5, 0.5], [1.0, 0.0]])  # rows: per-state law of (T, B)
    prob_T = 0.3 * a[0, 0] + 0.7 * a[1, 0]
    post = np.array([0.3 * a[0, 0], 0.7 * a[1, 0]]) / prob_T
    chain = np.array([[p, 1 - p], [1 - p, p]])
    moved = post @ chain
    match = [w for x, w in zip(kernel.support, kernel.weights)
             if l1_distance(x, SimplexPoint(moved)) < 1e-9]
    assert match and abs(match[0] - prob_T) < 1e-12

    # Monte-Carlo cross-check of the same kernel atom
    rng = np.random.default_rng(11)
    n = 200_000
    states = rng.random(n) < 0.7  # True = k2
    acts_T = np.where(states, rng.random(n) < 1.0, rng.random(n) < 0.5)
    seen_T = acts_T
    stay = rng.random(n) < p
    next_states = np.where(stay, states, ~states)
    mc_prob = seen_T.mean()
    mc_post2 = next_states[seen_T].mean()  # P(next = k2 | saw T)
    assert abs(mc_prob - prob_T) < 5e-3
    assert abs(mc_post2 - moved[1]) < 5e-3


def test_horner_reward_is_worst_case_reply():
    game = horner_game(0.6)
    bmdp = informed_to_belief_mdp(game, 3)
    base = np.linspace(0, 1, 3)
    idx = next(
        n for n, combo in enumerate(bmdp.actions)
        if abs(base[combo[0]] - 1.0) < 1e-12 and abs(base[combo[1]] - 0.0) < 1e-12
    )
    # belief (1/2,1/2), play T in k1 and B in k2: both replies yield 1/2
    assert abs(bmdp.reward_at(SimplexPoint([0.5, 0.5]), idx) - 0.5) < 1e-12


# -- concavification ---------------------------------------------------------------------

def test_cav_of_affine_family_is_itself():
    fam = MatrixFamily(np.array([0.3, -0.2]).reshape(2, 1, 1))
    grid = BeliefGrid.uniform(2, 41)
    f = np.array([fam.value_at(q) for q in grid.points])
    assert np.allclose(cav_u(fam, grid), f, atol=1e-12)


def test_cav_of_concave_function_is_itself():
    fam = MatrixFamily([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])
    grid = BeliefGrid.uniform(2, 101)
    f = np.array([fam.value_at(q) for q in grid.points])
    x = grid.points[:, 0]
    assert np.allclose(f, x * (1 - x), atol=1e-9)  # value of the mixed game
    out = cav_u(fam, grid)
    assert np.allclose(out, f, atol=1e-9)
    second = np.diff(out, 2)
    assert np.all(second <= 1e-9)  # concave along the grid line


def test_cav_matches_chord_oracle_on_a_convex_kink():
    # max of two affine functions crossing at 1/2: cav is the upper chord
    fam = MatrixFamily([
        [[1.0], [0.0]],
        [[0.0], [1.0]],
    ])
    grid = BeliefGrid.uniform(2, 81)
    x = grid.points[:, 0]
    f = np.array([fam.value_at(q) for q in grid.points])
    assert np.allclose(f, np.maximum(x, 1 - x), atol=1e-9)
    out = cav_u(fam, grid)
    oracle = concave_envelope_by_chords(x, f)
    assert np.allclose(out, oracle, atol=1e-9)
    assert np.allclose(out, 1.0, atol=1e-9)  # the chord between the tops
    assert np.all(out >= f - 1e-12)


def test_cav_least_majorant_on_dim_3_grid():
    rng = np.random.default_rng(29)
    fam = MatrixFamily(rng.uniform(-1, 1, size=(3, 2, 2)))
    grid = BeliefGrid.uniform(3, 5)
    f = np.array([fam.value_at(q) for q in grid.points])
    out = cav_u(fam, grid)
    assert np.all(out >= f - 1e-9)
    # concavity along grid segments through the barycentric combinations:
    # every grid value equals its own LP over combinations, so lowering a
    # value by 1e-6 must break domination or the envelope property
    assert np.all(out <= 1.0 + 1e-9)
