import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from eqsearch import _rm_py, regret
from eqsearch.errors import ContractError
from eqsearch.games.matrix import MatrixGame, matching_pennies, random_zero_sum_game, rock_paper_scissors
from eqsearch.regret import (EquilibriumResult, RegretState, RmConfig, acting_policy, policy_from_regrets,
                             rm_update, run_rm, sample_final_action)
from eqsearch.subgame import SubgameSpec, total_exploitability


@pytest.mark.parametrize("r, expected", [
    ((0, 0, 0), (1 / 3, 1 / 3, 1 / 3)),
    ((2, 1, -3), (2 / 3, 1 / 3, 0)),
    ((-1, -2), (0.5, 0.5)),
])
def test_policy_from_regrets_examples(r, expected):
    np.testing.assert_allclose(policy_from_regrets(r), expected, atol=1e-15)


def test_policy_from_regrets_empty():
    with pytest.raises(ContractError):
        policy_from_regrets([])


@given(arrays(float, st.integers(1, 12), elements=st.floats(-1e6, 1e6)))
def test_policy_is_distribution(r):
    p = policy_from_regrets(r)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) < 1e-9


def test_update_matching_pennies_by_hand():
    state = RegretState.zeros((2, 2), linear=False, optimism=False)
    # opponent sampled T: heads loses, tails wins for the matcher
    rm_update(state, 0, (1,), [-1.0, 1.0])
    np.testing.assert_array_equal(state.players[0].regrets, [-1, 1])
    np.testing.assert_array_equal(state.players[0].last_instant, [-1, 1])
    assert state.players[0].iteration == 1


def test_linear_discount():
    state = RegretState.zeros((1,), linear=True, optimism=False)
    pr = state.players[0]
    pr.regrets[:] = 4.0
    pr.avg_weights[:] = 4.0
    pr.iteration = 3
    rm_update(state, 0, (), [0.0])
    assert pr.regrets[0] == pytest.approx(3.0)  # 4 * 3/4 plus a zero increment
    assert pr.avg_weights[0] == pytest.approx(3.0 + 1.0)
    assert pr.iteration == 4


def test_update_length_mismatch():
    state = RegretState.zeros((3,))
    with pytest.raises(ContractError):
        rm_update(state, 0, (), [1.0, 2.0])


def test_acting_policy_examples():
    state = RegretState.zeros((2,), optimism=True)
    np.testing.assert_array_equal(acting_policy(state, 0), [0.5, 0.5])
    pr = state.players[0]
    pr.regrets[:] = (1, 0)
    pr.last_instant[:] = (1, 0)
    pr.iteration = 1
    np.testing.assert_array_equal(acting_policy(state, 0), [1, 0])
    state.optimism = False
    pr.regrets[:] = (-1, 2)
    pr.last_instant[:] = (5, -5)
    np.testing.assert_array_equal(acting_policy(state, 0), policy_from_regrets([-1, 2]))


@settings(max_examples=60)
@given(st.integers(1, 6), st.integers(0, 10 ** 6), st.booleans(), st.booleans())
def test_zero_inner_product(k, seed, linear, optimism):
    rng = np.random.default_rng(seed)
    state = RegretState.zeros((k,), linear, optimism)
    for _ in range(20):
        pol = acting_policy(state, 0)
        assert abs(pol.sum() - 1) < 1e-9 and np.all(pol >= 0)
        rm_update(state, 0, (), rng.normal(size=k) * 10)
        assert abs(pol @ state.players[0].last_instant) < 1e-9


def _linf(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_matching_pennies_converges():
    res = run_rm(SubgameSpec.from_matrix(matching_pennies()), RmConfig(5000, seed=3))
    for p in res.average_policies:
        assert _linf(p, [0.5, 0.5]) < 0.05


def test_dominant_row():
    a = np.array([[3.0, 2.0], [1.0, 0.0]])
    game = MatrixGame(np.stack([a, -a], axis=-1))
    res = run_rm(SubgameSpec.from_matrix(game), RmConfig(2000, seed=1))
    assert res.average_policies[0][0] > 0.95


def test_rps_converges():
    res = run_rm(SubgameSpec.from_matrix(rock_paper_scissors()), RmConfig(10000, seed=5))
    for p in res.average_policies:
        assert _linf(p, np.full(3, 1 / 3)) < 0.05


def test_seed_determinism():
    spec = SubgameSpec.from_matrix(random_zero_sum_game(6, 5, 2))
    a = run_rm(spec, RmConfig(300, seed=9, trace_every=50))
    b = run_rm(spec, RmConfig(300, seed=9, trace_every=50))
    assert a.to_dict() == b.to_dict()
    c = run_rm(spec, RmConfig(300, seed=10, trace_every=50))
    assert a.to_dict() != c.to_dict()


def test_three_player_game_runs():
    rng = np.random.default_rng(0)
    spec = SubgameSpec.from_matrix(MatrixGame(rng.random((2, 3, 2, 3))))
    res = run_rm(spec, RmConfig(200, trace_every=100))
    assert [len(p) for p in res.final_policies] == [2, 3, 2]
    assert [t for t, _ in res.trace] == [1, 100, 200]
    assert res.trace_oracle == "matrix"


def test_single_action_player():
    a = np.array([[1.0, 2.0, 0.5]])
    spec = SubgameSpec.from_matrix(MatrixGame(np.stack([a, -a], axis=-1)))
    res = run_rm(spec, RmConfig(100))
    np.testing.assert_array_equal(res.final_policies[0], [1.0])
    assert res.average_policies[1][2] > 0.5


def test_stochastic_oracle_has_no_trace():
    rng = np.random.default_rng(0)
    spec = SubgameSpec([["a", "b"], ["c", "d"]], lambda j: rng.random(2), deterministic=False)
    res = run_rm(spec, RmConfig(20, trace_every=5))
    assert res.trace == [] and res.trace_oracle.startswith("unavailable")


def test_deterministic_oracle_trace_is_enumerated():
    game = random_zero_sum_game(3, 4, 1)
    spec = SubgameSpec([["x", "y", "z"], list("abcd")], lambda j: game.utility(j), deterministic=True)
    res = run_rm(spec, RmConfig(64, trace_every=16))
    assert res.trace_oracle == "enumerated" and len(res.trace) == 5
    ref = run_rm(SubgameSpec.from_matrix(game), RmConfig(64, trace_every=16, backend="python"))
    np.testing.assert_allclose([e for _, e in res.trace], [e for _, e in ref.trace], atol=1e-12)


def _result(final):
    return EquilibriumResult(actions=[list(range(len(final)))], final_policies=[np.asarray(final)],
                             average_policies=[np.asarray(final)], avg_utilities=[np.zeros(len(final))],
                             iterations=1)


def test_sample_final_action():
    rng = np.random.default_rng(0)
    assert all(sample_final_action(_result([1.0, 0, 0]), 0, rng) == 0 for _ in range(100))
    assert sample_final_action(_result([1.0]), 0, rng) == 0
    draws = np.bincount([sample_final_action(_result([0.25] * 4), 0, rng) for _ in range(10_000)],
                        minlength=4)
    sigma = np.sqrt(10_000 * 0.25 * 0.75)
    assert np.all(np.abs(draws - 2500) < 3 * sigma)


def test_sublinear_regret():
    """max_a R^t(a)/t shrinks from t=256 to t=4096 in at least 90% of seeds."""
    ok = 0
    for seed in range(50):
        A = random_zero_sum_game(10, 10, 1000 + seed).payoffs[..., 0]
        uniforms = np.random.default_rng(seed).random((1, 4096, 2))
        early = _rm_py.rm_matrix2_batch(A, -A, uniforms[:, :256], False, False, np.zeros(0, np.int64))
        late = _rm_py.rm_matrix2_batch(A, -A, uniforms, False, False, np.zeros(0, np.int64))
        ok += late["regrets"][0].max() / 4096 < early["regrets"][0].max() / 256
    assert ok >= 45


def test_result_serializes():
    res = run_rm(SubgameSpec.from_matrix(matching_pennies()), RmConfig(10, trace_every=5))
    doc = res.to_dict()
    assert doc["players"][0]["actions"] == ["H", "T"]
    assert [row[0] for row in doc["trace"]] == [1, 5, 10]
    assert doc["trace"][-1][1] == pytest.approx(
        total_exploitability(matching_pennies().payoffs, res.average_policies))


def test_config_validation():
    with pytest.raises(ContractError):
        RmConfig(iterations=0)
    with pytest.raises(ContractError):
        RmConfig(backend="gpu")
