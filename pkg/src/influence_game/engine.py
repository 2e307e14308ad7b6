"""The influence game: one speaker/listener interaction per round.

Each round a random speaker picks a random listener inside its influence
ball, decides whether a currency offer would flip its own perceived local
majority, and the listener accepts with a logistic probability of its
expected gain. Accepted interactions transfer the speaker's opinion (and
offer) to the listener.

`step` is the readable reference implementation of a single round;
`run` drives the compiled kernel, which reproduces `step` bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel, metrics
from .errors import ConfigError
from .graph import Graph, NeighborhoodTable, precompute_neighborhoods
from .rng import Xoshiro256StarStar

#: Listener's gain compares committing to the speaker's opinion against
#: keeping its own opinion under the current majority view.
OWN_OPINION = "own-opinion"
#: Baseline instead evaluates the speaker's opinion under the current view.
SPEAKER_OPINION = "speaker-opinion"

GAIN_BASELINES = (OWN_OPINION, SPEAKER_OPINION)

ATTRIBUTION_NAMES = ("same-opinion", "homophily", "influence", "rejected")


@dataclass(frozen=True)
class GameParams:
    """All tunables of the game. Defaults are the standard lattice setup:
    unit change cost, reward 10, zero starting budget, unit offers."""

    num_opinions: int = 2
    rounds: int = 50_000
    reward: float = 10.0
    change_cost: float = 1.0
    knowledge_radius: int = 1
    influence_radius: int = 1
    offer_amounts: tuple[float, ...] = (1.0,)
    initial_budget: float = 0.0
    debit_speaker: bool = False
    gain_baseline: str = OWN_OPINION

    def __post_init__(self):
        if self.num_opinions < 2:
            raise ConfigError(f"num_opinions must be >= 2, got {self.num_opinions}")
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1, got {self.rounds}")
        if self.reward < 0:
            raise ConfigError(f"reward must be >= 0, got {self.reward}")
        if self.knowledge_radius < 1 or self.influence_radius < 1:
            raise ConfigError("radii must be >= 1")
        if len(self.offer_amounts) not in (1, self.num_opinions):
            raise ConfigError(
                f"offer_amounts needs 1 or {self.num_opinions} entries, "
                f"got {len(self.offer_amounts)}"
            )
        if any(a < 0 for a in self.offer_amounts):
            raise ConfigError("offer amounts must be >= 0")
        if self.gain_baseline not in GAIN_BASELINES:
            raise ConfigError(
                f"gain_baseline must be one of {GAIN_BASELINES}, got {self.gain_baseline!r}"
            )

    def resolved_offers(self) -> np.ndarray:
        """Per-opinion offer table, broadcasting a single value to all opinions."""
        if len(self.offer_amounts) == 1:
            return np.full(self.num_opinions, self.offer_amounts[0], dtype=np.float64)
        return np.asarray(self.offer_amounts, dtype=np.float64)


@dataclass(frozen=True)
class AgentState:
    """Read-only view of one agent."""

    opinion: int
    budget: float
    change_cost: float
    committed: bool


@dataclass(frozen=True)
class InteractionRecord:
    """Everything observable about one round."""

    round: int
    speaker: int
    listener: int
    speaker_opinion: int
    listener_opinion_before: int
    offer: float
    delta: float
    p_accept: float
    accepted: bool
    attribution: str


@dataclass
class GameState:
    """Mutable per-run state over flat numpy arrays."""

    graph: Graph
    knowledge: NeighborhoodTable
    influence: NeighborhoodTable
    params: GameParams
    opinions: np.ndarray      # int8
    budgets: np.ndarray       # float64
    change_costs: np.ndarray  # float64
    committed: np.ndarray     # bool
    counts: np.ndarray        # int64 per opinion
    round: int = 0
    t_absorbed: int | None = None
    flips_homophily: int = 0
    flips_influence: int = 0
    total_accepted_offers: float = 0.0
    _offers: np.ndarray = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_opinions(self) -> int:
        return self.params.num_opinions

    def agent(self, node: int) -> AgentState:
        return AgentState(
            opinion=int(self.opinions[node]),
            budget=float(self.budgets[node]),
            change_cost=float(self.change_costs[node]),
            committed=bool(self.committed[node]),
        )

    def recount_opinions(self) -> np.ndarray:
        """Brute-force recount, for checking the incremental counters."""
        return np.bincount(self.opinions, minlength=self.num_opinions).astype(np.int64)


def new_game_state(
    graph: Graph,
    params: GameParams,
    opinions: np.ndarray,
    committed: np.ndarray | None = None,
    change_costs: np.ndarray | None = None,
    knowledge: NeighborhoodTable | None = None,
    influence: NeighborhoodTable | None = None,
) -> GameState:
    """Assemble a ready-to-run state; neighborhood tables are built if absent."""
    opinions = np.asarray(opinions, dtype=np.int8)
    if opinions.shape != (graph.n,):
        raise ConfigError(f"opinion assignment must cover all {graph.n} nodes")
    if opinions.min() < 0 or opinions.max() >= params.num_opinions:
        raise ConfigError("opinion ids out of range for num_opinions")
    if committed is None:
        committed = np.zeros(graph.n, dtype=bool)
    committed = np.asarray(committed, dtype=bool)
    if committed.shape != (graph.n,):
        raise ConfigError("committed flags must cover all nodes")
    if change_costs is None:
        change_costs = np.full(graph.n, params.change_cost, dtype=np.float64)
    change_costs = np.asarray(change_costs, dtype=np.float64)
    if knowledge is None:
        knowledge = precompute_neighborhoods(graph, params.knowledge_radius)
    if influence is None:
        if params.influence_radius == params.knowledge_radius:
            influence = knowledge
        else:
            influence = precompute_neighborhoods(graph, params.influence_radius)
    if knowledge.radius != params.knowledge_radius:
        raise ConfigError("knowledge table radius does not match params")
    if influence.radius != params.influence_radius:
        raise ConfigError("influence table radius does not match params")
    counts = np.bincount(opinions, minlength=params.num_opinions).astype(np.int64)
    state = GameState(
        graph=graph,
        knowledge=knowledge,
        influence=influence,
        params=params,
        opinions=opinions.copy(),
        budgets=np.full(graph.n, params.initial_budget, dtype=np.float64),
        change_costs=change_costs,
        committed=committed.copy(),
        counts=counts,
        _offers=params.resolved_offers(),
    )
    winner = metrics.is_absorbed_counts(counts, graph.n)
    if winner is not None:
        state.t_absorbed = 0
    return state


def forecast(opinion: int, majority: int, budget: float, reward: float) -> float:
    """Expected end-of-game winnings: the reward if the perceived majority
    matches the held opinion, plus the current budget."""
    return (reward if opinion == majority else 0.0) + budget


def local_majority(
    state: GameState,
    agent: int,
    override: tuple[int, int] | None = None,
) -> int:
    """Most common opinion over the agent's knowledge ball plus itself.

    `override=(node, opinion)` evaluates the hypothetical where that node
    (the agent itself, or a ball member) holds `opinion`; an override
    outside the ball has no effect. Ties go to the agent's current opinion
    when it is among the tied leaders, otherwise to the lowest opinion id.
    """
    cnt = np.zeros(state.num_opinions, dtype=np.int64)
    for v in state.knowledge.ball(agent):
        cnt[state.opinions[v]] += 1
    own = int(state.opinions[agent])
    cnt[own] += 1
    if override is not None:
        node, hyp = override
        if node == agent:
            cnt[own] -= 1
            cnt[hyp] += 1
        elif state.knowledge.contains(agent, node):
            cnt[state.opinions[node]] -= 1
            cnt[hyp] += 1
    maxc = cnt.max()
    if cnt[own] == maxc:
        return own
    return int(np.argmax(cnt == maxc))


def speaker_offer(state: GameState, s: int, l: int) -> float:
    """Currency the speaker puts on the table: its per-opinion amount if the
    listener's flip would turn the speaker's perceived majority into the
    speaker's opinion, else zero. Same-opinion pairs never pay."""
    o_s = int(state.opinions[s])
    o_l = int(state.opinions[l])
    if o_s == o_l:
        return 0.0
    m_now = local_majority(state, s)
    m_flip = local_majority(state, s, override=(l, o_s))
    reward = state.params.reward
    budget = float(state.budgets[s])
    if forecast(o_s, m_flip, budget, reward) > forecast(o_s, m_now, budget, reward):
        return float(state._offers[o_s])
    return 0.0


def acceptance_gain(state: GameState, s: int, l: int, offer: float) -> float:
    """Listener's expected gain from committing to the speaker's opinion.

    The first term values the speaker's opinion under the listener's
    hypothetical majority view; the baseline subtracted is either the
    listener's own opinion under the current view (own-opinion, default)
    or the speaker's opinion under the current view (speaker-opinion).
    """
    o_s = int(state.opinions[s])
    o_l = int(state.opinions[l])
    reward = state.params.reward
    budget = float(state.budgets[l])
    m_now = local_majority(state, l)
    m_flip = local_majority(state, l, override=(l, o_s))
    e_flip = forecast(o_s, m_flip, budget, reward)
    if state.params.gain_baseline == OWN_OPINION:
        e_base = forecast(o_l, m_now, budget, reward)
    else:
        e_base = forecast(o_s, m_now, budget, reward)
    return e_flip - float(state.change_costs[l]) + offer - e_base


def acceptance_probability(delta: float, committed: bool) -> float:
    """Logistic acceptance in the expected gain; committed agents never accept."""
    if committed:
        return 0.0
    if delta >= 0.0:
        return 1.0 / (1.0 + math.exp(-delta))
    e = math.exp(delta)
    return e / (1.0 + e)


def step(state: GameState, rng: Xoshiro256StarStar) -> InteractionRecord:
    """Execute one round: pick speaker and listener, evaluate the offer and
    the listener's gain, draw acceptance, and apply the outcome."""
    n = state.n
    s = rng.randbelow(n)
    ball = state.influence.ball(s)
    l = int(ball[rng.randbelow(len(ball))])
    o_s = int(state.opinions[s])
    o_l = int(state.opinions[l])
    offer = speaker_offer(state, s, l)
    delta = acceptance_gain(state, s, l, offer)
    p = acceptance_probability(delta, bool(state.committed[l]))
    u = rng.random()
    accepted = u < p
    state.round += 1
    if accepted and o_l != o_s:
        state.opinions[l] = o_s
        state.counts[o_l] -= 1
        state.counts[o_s] += 1
        state.budgets[l] += offer
        state.total_accepted_offers += offer
        if state.params.debit_speaker:
            state.budgets[s] -= offer
        if offer > 0.0:
            state.flips_influence += 1
        else:
            state.flips_homophily += 1
        if state.counts[o_s] == n and state.t_absorbed is None:
            state.t_absorbed = state.round
    if o_s == o_l:
        attribution = "same-opinion"
    elif accepted and offer > 0.0:
        attribution = "influence"
    elif accepted:
        attribution = "homophily"
    else:
        attribution = "rejected"
    return InteractionRecord(
        round=state.round,
        speaker=s,
        listener=l,
        speaker_opinion=o_s,
        listener_opinion_before=o_l,
        offer=offer,
        delta=delta,
        p_accept=p,
        accepted=accepted,
        attribution=attribution,
    )


@dataclass
class RunResult:
    """Everything a finished run produced."""

    state: GameState
    records: list[InteractionRecord] | None
    samples: list[metrics.MetricsSample]
    snapshots: list[tuple[int, np.ndarray]] | None


def _sample(state: GameState) -> metrics.MetricsSample:
    fractions = tuple(float(c) / state.n for c in state.counts)
    components = metrics.components_per_opinion(
        state.graph, state.opinions, state.num_opinions
    )
    return metrics.MetricsSample(
        t=state.round,
        fractions=fractions,
        components=components,
        flips_homophily=state.flips_homophily,
        flips_influence=state.flips_influence,
    )


def run(
    graph: Graph,
    params: GameParams,
    opinions: np.ndarray,
    seed: int,
    committed: np.ndarray | None = None,
    change_costs: np.ndarray | None = None,
    knowledge: NeighborhoodTable | None = None,
    influence: NeighborhoodTable | None = None,
    sample_every: int = 50,
    snapshot_every: int | None = None,
    early_stop: bool = False,
    record: bool = False,
) -> RunResult:
    """Run the game for params.rounds interactions from the given assignment.

    Metrics are sampled at round 0, every `sample_every` rounds, and at the
    final round. With `early_stop`, stepping halts once a single opinion
    holds every node; the remaining samples and snapshots repeat the frozen
    state, so emitted series are identical with or without early stopping.
    """
    if sample_every < 1:
        raise ConfigError(f"sample_every must be >= 1, got {sample_every}")
    if snapshot_every is not None and snapshot_every < 1:
        raise ConfigError(f"snapshot_every must be >= 1, got {snapshot_every}")
    state = new_game_state(
        graph, params, opinions, committed, change_costs, knowledge, influence
    )
    rounds = params.rounds
    sample_times = set(range(0, rounds + 1, sample_every)) | {0, rounds}
    snapshot_times: set[int] = set()
    if snapshot_every is not None:
        snapshot_times = set(range(0, rounds + 1, snapshot_every))
    boundaries = sorted(sample_times | snapshot_times)

    rng_state = Xoshiro256StarStar(seed).state_array()
    rec_arrays = _allocate_records(rounds if record else 0)
    records: list[InteractionRecord] | None = [] if record else None
    samples: list[metrics.MetricsSample] = []
    snapshots: list[tuple[int, np.ndarray]] | None = (
        [] if snapshot_every is not None else None
    )

    def emit(t: int) -> None:
        if t in sample_times:
            sample = _sample(state)
            samples.append(replace(sample, t=t))
        if snapshots is not None and t in snapshot_times:
            snapshots.append((t, state.opinions.copy()))

    emit(0)
    stopped = False
    done = 0
    t_absorbed = -1 if state.t_absorbed is None else state.t_absorbed
    for boundary in boundaries:
        if boundary == 0:
            continue
        n_steps = boundary - done
        if not stopped and n_steps > 0:
            t_end, t_absorbed, fh, fi, total = _kernel.run_steps(
                rng_state,
                state.opinions,
                state.budgets,
                state.change_costs,
                state.committed,
                state.counts,
                state.knowledge.indptr,
                state.knowledge.indices,
                state.influence.indptr,
                state.influence.indices,
                state._offers,
                float(params.reward),
                params.debit_speaker,
                params.gain_baseline == OWN_OPINION,
                done,
                n_steps,
                early_stop,
                t_absorbed,
                state.flips_homophily,
                state.flips_influence,
                state.total_accepted_offers,
                record,
                *rec_arrays,
            )
            state.flips_homophily = fh
            state.flips_influence = fi
            state.total_accepted_offers = total
            state.round = t_end
            if t_absorbed >= 0:
                state.t_absorbed = t_absorbed
                if early_stop:
                    stopped = True
        done = boundary
        emit(boundary)
    if record:
        records = _materialize_records(rec_arrays, state.round)
    state.round = min(state.round, rounds) if stopped else rounds
    return RunResult(state=state, records=records, samples=samples, snapshots=snapshots)


def settle_rewards(state: GameState) -> np.ndarray:
    """Pay the end-of-game reward to every holder of the strict global
    majority opinion; a tie for the top count pays nobody. Returns budgets."""
    counts = state.counts
    top = counts.max()
    leaders = np.flatnonzero(counts == top)
    if len(leaders) == 1:
        winner = int(leaders[0])
        state.budgets[state.opinions == winner] += state.params.reward
    return state.budgets


def _allocate_records(size: int):
    return (
        np.zeros(size, dtype=np.int32),
        np.zeros(size, dtype=np.int32),
        np.zeros(size, dtype=np.int8),
        np.zeros(size, dtype=np.int8),
        np.zeros(size, dtype=np.float64),
        np.zeros(size, dtype=np.float64),
        np.zeros(size, dtype=np.float64),
        np.zeros(size, dtype=bool),
        np.zeros(size, dtype=np.int8),
    )


def _materialize_records(rec_arrays, n_done: int) -> list[InteractionRecord]:
    speaker, listener, s_op, l_op, offer, delta, p, accepted, attribution = rec_arrays
    return [
        InteractionRecord(
            round=t + 1,
            speaker=int(speaker[t]),
            listener=int(listener[t]),
            speaker_opinion=int(s_op[t]),
            listener_opinion_before=int(l_op[t]),
            offer=float(offer[t]),
            delta=float(delta[t]),
            p_accept=float(p[t]),
            accepted=bool(accepted[t]),
            attribution=ATTRIBUTION_NAMES[attribution[t]],
        )
        for t in range(n_done)
    ]
