import numpy as np
import pytest

from influence_game import engine
from influence_game.engine import (
    GameParams,
    acceptance_gain,
    acceptance_probability,
    forecast,
    local_majority,
    new_game_state,
    run,
    settle_rewards,
    speaker_offer,
    step,
)
from influence_game.errors import ConfigError
from influence_game.graph import make_custom, make_lattice2d_pbc
from influence_game.rng import Xoshiro256StarStar
from influence_game.scenarios import init_random_uniform


def star_state(ball_opinions, self_opinion, num_opinions=2, **params):
    """Center node 0 with one leaf per ball opinion; radius-1 knowledge."""
    leaves = list(range(1, len(ball_opinions) + 1))
    g = make_custom(len(leaves) + 1, [(0, leaf) for leaf in leaves])
    opinions = np.array([self_opinion] + list(ball_opinions), dtype=np.int8)
    p = GameParams(num_opinions=num_opinions, **params)
    return new_game_state(g, p, opinions)


# --- forecast -------------------------------------------------------------

def test_forecast_worked_examples():
    assert forecast(0, 0, 0.0, 10.0) == 10.0
    assert forecast(0, 1, 3.0, 10.0) == 3.0
    assert forecast(0, 0, 2.5, 10.0) == 12.5


# --- local_majority --------------------------------------------------------

def test_majority_simple():
    state = star_state([0, 0, 1, 1], self_opinion=0)
    assert local_majority(state, 0) == 0  # 3 vs 2 including self


def test_majority_with_override_on_ball_node():
    state = star_state([1, 1, 1, 1], self_opinion=0)
    assert local_majority(state, 0, override=(1, 0)) == 1  # still 3 vs 2


def test_majority_tie_goes_to_own_opinion():
    state = star_state([1, 2, 3, 4], self_opinion=0, num_opinions=5)
    assert local_majority(state, 0) == 0  # five-way tie, self participates


def test_majority_tie_without_self_goes_to_lowest_id():
    # ball {1,1,2,2}, self 2: counts {1:2, 2:3} -> 2; override self to 0:
    # counts {0:1, 1:2, 2:2}: tie between 1 and 2, own opinion 2 participates
    state = star_state([1, 1, 2, 2], self_opinion=2, num_opinions=3)
    assert local_majority(state, 0, override=(0, 0)) == 2
    # ball {1,1,2,2}, self 0 overridden to 3: 1 and 2 tie, own opinion absent
    state = star_state([1, 1, 2, 2], self_opinion=0, num_opinions=4)
    assert local_majority(state, 0, override=(0, 3)) == 1


def test_majority_override_outside_ball_is_noop():
    g = make_custom(3, [(0, 1), (1, 2)])
    p = GameParams(num_opinions=2)
    state = new_game_state(g, p, np.array([0, 1, 1], dtype=np.int8))
    assert local_majority(state, 0) == local_majority(state, 0, override=(2, 0))


def test_majority_override_on_self():
    state = star_state([1, 1, 0, 0], self_opinion=0)
    assert local_majority(state, 0) == 0  # 3 vs 2
    assert local_majority(state, 0, override=(0, 1)) == 1  # 2 vs 3


# --- speaker_offer ------------------------------------------------------------

def lattice_state(rows, cols, opinions, **params):
    g = make_lattice2d_pbc(rows, cols)
    p = GameParams(**params)
    return new_game_state(g, p, np.asarray(opinions, dtype=np.int8)), g


def test_offer_zero_for_same_opinion():
    state, _ = lattice_state(3, 3, [0] * 9)
    assert speaker_offer(state, 4, 1) == 0.0


def test_offer_zero_when_flip_cannot_change_majority():
    # speaker 4 alone with opinion 0 among 1s: even a flipped listener
    # leaves the local majority at 1
    opinions = [1] * 9
    opinions[4] = 0
    state, _ = lattice_state(3, 3, opinions)
    assert speaker_offer(state, 4, 1) == 0.0


def test_offer_paid_when_flip_tips_speaker_majority():
    # speaker 4 (opinion 0) sees {1, 3, 5, 7}; with one supporter the flip
    # of one listener moves its 5-cell majority from 1 to 0
    opinions = [1] * 9
    opinions[4] = 0
    opinions[1] = 0
    state, _ = lattice_state(3, 3, opinions, offer_amounts=(1.0, 1.0))
    assert state.counts[0] == 2
    assert speaker_offer(state, 4, 3) == 1.0


def test_offer_uses_per_opinion_amount():
    opinions = [1] * 9
    opinions[4] = 0
    opinions[1] = 0
    state, _ = lattice_state(3, 3, opinions, offer_amounts=(7.5, 1.0))
    assert speaker_offer(state, 4, 3) == 7.5


def test_offer_zero_when_listener_outside_knowledge_ball():
    # knowledge radius 1 but influence radius 2: a listener two hops away
    # cannot change the speaker's view, so no offer
    g = make_custom(4, [(0, 1), (1, 2), (2, 3)])
    p = GameParams(knowledge_radius=1, influence_radius=2)
    state = new_game_state(g, p, np.array([0, 1, 1, 1], dtype=np.int8))
    # node 0 speaks to node 2 (distance 2)
    assert state.influence.contains(0, 2)
    assert not state.knowledge.contains(0, 2)
    assert speaker_offer(state, 0, 2) == 0.0


# --- acceptance_gain ------------------------------------------------------------

def test_gain_same_opinion_zero_cost_is_zero():
    state = star_state([0, 1, 0, 1], self_opinion=0, change_cost=0.0)
    assert acceptance_gain(state, 1, 0, 0.0) == 0.0


def test_gain_when_own_flip_tips_local_majority():
    # listener 0 holds 1, ball {0,0,1,1}: majority 1 (3v2); flipping self to 0
    # makes it 0 (3v2). Speaker's opinion 0, cost 1, offer 1.
    state = star_state(
        [0, 0, 1, 1], self_opinion=1, change_cost=1.0,
        gain_baseline="speaker-opinion",
    )
    assert acceptance_gain(state, 1, 0, 1.0) == 10.0  # 10*(1-0) - 1 + 1
    # own-opinion baseline subtracts the aligned status quo instead
    state_own = star_state([0, 0, 1, 1], self_opinion=1, change_cost=1.0)
    assert acceptance_gain(state_own, 1, 0, 1.0) == 0.0


def test_gain_when_majority_already_speakers_opinion():
    # listener 0 holds 1 but its whole ball holds 0: the hypothetical and
    # current majorities are both the speaker's opinion, terms cancel, -C stays
    state = star_state(
        [0, 0, 0, 0], self_opinion=1, change_cost=1.0,
        gain_baseline="speaker-opinion",
    )
    assert acceptance_gain(state, 1, 0, 0.0) == -1.0
    # the own-opinion baseline instead rewards joining the perceived majority
    state_own = star_state([0, 0, 0, 0], self_opinion=1, change_cost=1.0)
    assert acceptance_gain(state_own, 1, 0, 0.0) == 9.0


def test_gain_face_cell_resistance_differs_by_baseline():
    # listener embedded in its own opinion's region, flip cannot tip its view
    state = star_state(
        [1, 1, 1, 0], self_opinion=1, change_cost=1.0,
        gain_baseline="speaker-opinion",
    )
    assert acceptance_gain(state, 4, 0, 0.0) == -1.0
    state_own = star_state([1, 1, 1, 0], self_opinion=1, change_cost=1.0)
    assert acceptance_gain(state_own, 4, 0, 0.0) == -11.0


# --- acceptance_probability -------------------------------------------------------

def test_probability_worked_examples():
    assert acceptance_probability(0.0, False) == 0.5
    assert abs(acceptance_probability(10.0, False) - 0.9999546021312976) < 1e-12
    assert acceptance_probability(123.0, True) == 0.0
    assert acceptance_probability(-5.0, True) == 0.0


def test_probability_monotone_and_bounded():
    deltas = np.linspace(-40, 40, 401)
    values = [acceptance_probability(d, False) for d in deltas]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_probability_extreme_deltas_do_not_overflow():
    assert acceptance_probability(-1e6, False) == 0.0
    assert acceptance_probability(1e6, False) == 1.0


# --- step ------------------------------------------------------------------------

GOLDEN_TRACE = [
    (1, 14, 10, 1, 1, 0.0, -1.0, 0.2689414213699951, True, "same-opinion"),
    (2, 11, 15, 1, 0, 0.0, 9.0, 0.9998766054240137, True, "homophily"),
    (3, 8, 4, 0, 1, 1.0, 10.0, 0.9999546021312976, True, "influence"),
    (4, 4, 0, 0, 0, 0.0, -1.0, 0.2689414213699951, False, "same-opinion"),
    (5, 6, 5, 0, 0, 0.0, -1.0, 0.2689414213699951, False, "same-opinion"),
    (6, 5, 4, 0, 0, 0.0, -1.0, 0.2689414213699951, False, "same-opinion"),
    (7, 9, 13, 0, 0, 0.0, -1.0, 0.2689414213699951, False, "same-opinion"),
    (8, 13, 12, 0, 1, 1.0, 10.0, 0.9999546021312976, True, "influence"),
    (9, 3, 2, 1, 0, 0.0, 9.0, 0.9998766054240137, True, "homophily"),
    (10, 12, 15, 0, 1, 0.0, -11.0, 1.670142184809518e-05, False, "rejected"),
    (11, 15, 11, 1, 1, 0.0, -1.0, 0.2689414213699951, True, "same-opinion"),
    (12, 11, 10, 1, 1, 0.0, -1.0, 0.2689414213699951, False, "same-opinion"),
]

GOLDEN_INIT = np.array(
    [0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0], dtype=np.int8
)


def as_tuple(r):
    return (
        r.round, r.speaker, r.listener, r.speaker_opinion,
        r.listener_opinion_before, r.offer, r.delta, r.p_accept,
        r.accepted, r.attribution,
    )


def test_golden_trace_via_run():
    g = make_lattice2d_pbc(4, 4)
    res = run(g, GameParams(rounds=12), GOLDEN_INIT, seed=2024, record=True)
    assert [as_tuple(r) for r in res.records] == GOLDEN_TRACE
    assert res.state.counts.tolist() == [8, 8]


def test_golden_trace_via_step():
    g = make_lattice2d_pbc(4, 4)
    state = new_game_state(g, GameParams(rounds=12), GOLDEN_INIT)
    rng = Xoshiro256StarStar(2024)
    records = [step(state, rng) for _ in range(12)]
    assert [as_tuple(r) for r in records] == GOLDEN_TRACE


def test_step_committed_listener_never_accepts():
    g = make_lattice2d_pbc(4, 4)
    opinions = np.array([0, 1] * 8, dtype=np.int8)
    state = new_game_state(
        g, GameParams(rounds=1000), opinions, committed=np.ones(16, dtype=bool)
    )
    rng = Xoshiro256StarStar(3)
    for _ in range(1000):
        record = step(state, rng)
        assert not record.accepted
        assert record.p_accept == 0.0
    assert np.array_equal(state.opinions, opinions)


def test_step_homogeneous_region_same_opinion():
    g = make_lattice2d_pbc(4, 4)
    state = new_game_state(g, GameParams(rounds=100), np.zeros(16, dtype=np.int8))
    rng = Xoshiro256StarStar(5)
    for _ in range(100):
        assert step(state, rng).attribution == "same-opinion"
    assert state.counts.tolist() == [16, 0]


def test_kernel_matches_step_reference():
    g = make_lattice2d_pbc(6, 6)
    for baseline in ("own-opinion", "speaker-opinion"):
        for seed in (1, 77, 2**61):
            params = GameParams(
                rounds=500, num_opinions=3, offer_amounts=(2.0, 1.0, 1.5),
                gain_baseline=baseline,
            )
            ops = init_random_uniform(g.n, 3, Xoshiro256StarStar(55))
            committed = ops == 2
            res = run(g, params, ops, seed=seed, committed=committed, record=True)
            state = new_game_state(g, params, ops, committed=committed)
            rng = Xoshiro256StarStar(seed)
            for rec in res.records:
                assert as_tuple(step(state, rng)) == as_tuple(rec)
            assert np.array_equal(state.opinions, res.state.opinions)
            assert np.array_equal(state.budgets, res.state.budgets)
            assert state.t_absorbed == res.state.t_absorbed


def test_record_mode_does_not_change_outcome():
    g = make_lattice2d_pbc(6, 6)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(9))
    a = run(g, GameParams(rounds=3000), ops, seed=4, record=True)
    b = run(g, GameParams(rounds=3000), ops, seed=4, record=False)
    assert np.array_equal(a.state.opinions, b.state.opinions)
    assert np.array_equal(a.state.budgets, b.state.budgets)
    assert a.state.flips_homophily == b.state.flips_homophily
    assert a.state.flips_influence == b.state.flips_influence


# --- run ---------------------------------------------------------------------------

def test_run_conserves_population():
    g = make_lattice2d_pbc(30, 30)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(1))
    res = run(g, GameParams(rounds=5000), ops, seed=2)
    assert res.state.counts.sum() == 900
    assert np.array_equal(res.state.counts, res.state.recount_opinions())


def test_run_absorbing_state_never_flips():
    g = make_lattice2d_pbc(5, 5)
    res = run(g, GameParams(rounds=5000), np.zeros(25, dtype=np.int8), seed=3)
    assert res.state.flips_homophily == 0
    assert res.state.flips_influence == 0
    assert res.state.t_absorbed == 0


def test_run_droplet_minority_survives_short_horizon():
    from influence_game.scenarios import init_droplet

    g = make_lattice2d_pbc(30, 30)
    ops = init_droplet(g, droplet_fraction=0.09)
    res = run(g, GameParams(rounds=1000), ops, seed=11)
    assert res.state.counts[0] > 0  # echo chamber resilient at this scale


def test_run_determinism():
    g = make_lattice2d_pbc(8, 8)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(21))
    a = run(g, GameParams(rounds=2000), ops, seed=5, record=True)
    b = run(g, GameParams(rounds=2000), ops, seed=5, record=True)
    assert [as_tuple(r) for r in a.records] == [as_tuple(r) for r in b.records]
    assert a.samples == b.samples


def test_run_rejects_bad_inputs():
    g = make_lattice2d_pbc(3, 3)
    with pytest.raises(ConfigError):
        run(g, GameParams(rounds=10), np.zeros(5, dtype=np.int8), seed=0)
    with pytest.raises(ConfigError):
        run(g, GameParams(rounds=10, num_opinions=2),
            np.full(9, 3, dtype=np.int8), seed=0)
    with pytest.raises(ConfigError):
        GameParams(rounds=0)
    with pytest.raises(ConfigError):
        GameParams(knowledge_radius=0)


def test_run_early_stop_produces_identical_samples():
    # a biased initial state that absorbs quickly
    g = make_lattice2d_pbc(5, 5)
    ops = np.zeros(25, dtype=np.int8)
    ops[:2] = 1
    params = GameParams(rounds=20_000)
    plain = run(g, params, ops, seed=13, sample_every=1000)
    stopped = run(g, params, ops, seed=13, sample_every=1000, early_stop=True)
    assert plain.state.t_absorbed is not None  # else the fixture is useless
    assert plain.samples == stopped.samples
    assert np.array_equal(plain.state.opinions, stopped.state.opinions)
    assert np.array_equal(plain.state.budgets, stopped.state.budgets)
    assert stopped.state.round == stopped.state.t_absorbed


def test_run_offer_positive_implies_cross_opinion():
    g = make_lattice2d_pbc(8, 8)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(31))
    res = run(g, GameParams(rounds=5000), ops, seed=7, record=True)
    paid = [r for r in res.records if r.offer > 0]
    assert paid, "expected some offers in a mixed state"
    for r in paid:
        assert r.speaker_opinion != r.listener_opinion_before


def test_budget_accounting_no_debit():
    g = make_lattice2d_pbc(6, 6)
    params = GameParams(rounds=2000, initial_budget=2.0)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(41))
    state = new_game_state(g, params, ops)
    rng = Xoshiro256StarStar(17)
    accepted_offers = 0.0
    for t in range(2000):
        record = step(state, rng)
        if record.accepted:
            accepted_offers += record.offer
        if t % 100 == 0:
            assert state.budgets.sum() == pytest.approx(
                g.n * 2.0 + accepted_offers, abs=1e-9
            )
            assert np.array_equal(state.counts, state.recount_opinions())


def test_budget_conservation_with_debit():
    g = make_lattice2d_pbc(6, 6)
    params = GameParams(rounds=2000, initial_budget=1.0, debit_speaker=True)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(43))
    state = new_game_state(g, params, ops)
    rng = Xoshiro256StarStar(19)
    for t in range(2000):
        step(state, rng)
        if t % 100 == 0:
            assert state.budgets.sum() == pytest.approx(g.n * 1.0, abs=1e-9)


def test_committed_opinions_constant_over_long_run():
    g = make_lattice2d_pbc(10, 10)
    ops = init_random_uniform(g.n, 2, Xoshiro256StarStar(51))
    committed = ops == 0
    res = run(g, GameParams(rounds=10_000), ops, seed=23, committed=committed)
    assert np.array_equal(res.state.opinions[committed], ops[committed])


# --- settle_rewards ------------------------------------------------------------------

def test_settle_majority_gains_reward():
    g = make_lattice2d_pbc(30, 30)
    ops = np.zeros(900, dtype=np.int8)
    ops[:300] = 1
    state = new_game_state(g, GameParams(rounds=1), ops)
    settle_rewards(state)
    assert np.all(state.budgets[state.opinions == 0] == 10.0)
    assert np.all(state.budgets[state.opinions == 1] == 0.0)


def test_settle_tie_pays_nobody():
    g = make_lattice2d_pbc(30, 30)
    ops = np.zeros(900, dtype=np.int8)
    ops[:450] = 1
    state = new_game_state(g, GameParams(rounds=1), ops)
    settle_rewards(state)
    assert np.all(state.budgets == 0.0)


def test_settle_consensus_pays_everyone():
    g = make_lattice2d_pbc(5, 5)
    state = new_game_state(g, GameParams(rounds=1), np.zeros(25, dtype=np.int8))
    settle_rewards(state)
    assert np.all(state.budgets == 10.0)
