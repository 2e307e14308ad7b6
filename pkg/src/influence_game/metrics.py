"""Observables: opinion fractions, same-opinion connected components,
absorption detection, and per-run summaries with flip attribution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

if TYPE_CHECKING:
    from .engine import GameState, InteractionRecord
from .graph import Graph


@dataclass(frozen=True)
class MetricsSample:
    """One point of the per-run time series."""

    t: int
    fractions: tuple[float, ...]
    components: tuple[int, ...]
    flips_homophily: int
    flips_influence: int


@dataclass(frozen=True)
class RunSummary:
    """End-of-run verdict and aggregates for one simulation."""

    seed: int
    absorbed: bool
    winner: int | None
    t_absorb: int | None
    final_fractions: tuple[float, ...]
    final_components: tuple[int, ...]
    flips_homophily: int
    flips_influence: int
    budget_min: float
    budget_mean: float
    budget_max: float


def opinion_fractions(opinions: np.ndarray, num_opinions: int) -> tuple[float, ...]:
    """Share of the population holding each opinion."""
    counts = np.bincount(opinions, minlength=num_opinions)
    n = len(opinions)
    return tuple(float(c) / n for c in counts[:num_opinions])


def components_per_opinion(
    graph: Graph, opinions: np.ndarray, num_opinions: int
) -> tuple[int, ...]:
    """Connected components of each opinion's induced subgraph.

    Components are taken over the direct graph edges (not knowledge balls):
    an edge survives iff both endpoints hold the same opinion. An absent
    opinion has zero components.
    """
    src = np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    dst = graph.indices
    keep = (opinions[src] == opinions[dst]).astype(np.int8)
    # copies: eliminate_zeros compacts its buffers in place, and csr_matrix
    # aliases the arrays it is handed
    masked = csr_matrix(
        (keep, dst.copy(), graph.indptr.copy()), shape=(graph.n, graph.n)
    )
    masked.eliminate_zeros()  # csgraph treats stored zeros as edges
    _, labels = connected_components(masked, directed=False)
    # distinct component labels among the holders of each opinion
    out = []
    for k in range(num_opinions):
        holders = labels[opinions == k]
        out.append(int(len(np.unique(holders))) if len(holders) else 0)
    return tuple(out)


def is_absorbed_counts(counts: np.ndarray, n: int) -> int | None:
    """Winner opinion if a single opinion holds all n agents, else None."""
    winners = np.flatnonzero(counts == n)
    return int(winners[0]) if len(winners) else None


def is_absorbed(state: "GameState") -> int | None:
    """The unique opinion held by every agent, if any."""
    return is_absorbed_counts(state.counts, state.n)


def summarize_run(
    records: "list[InteractionRecord] | None",
    state: "GameState",
    seed: int,
) -> RunSummary:
    """Build the per-run summary from the final state.

    With a recorded trajectory, flip attribution is re-tallied from the
    records (and must agree with the state's incremental counters); without
    one, the counters are used directly.
    """
    if records is not None:
        flips_influence = sum(
            1 for r in records if r.accepted and r.offer > 0.0
        )
        flips_homophily = sum(
            1
            for r in records
            if r.accepted
            and r.offer == 0.0
            and r.speaker_opinion != r.listener_opinion_before
        )
    else:
        flips_influence = state.flips_influence
        flips_homophily = state.flips_homophily
    winner = is_absorbed(state)
    return RunSummary(
        seed=seed,
        absorbed=winner is not None,
        winner=winner,
        t_absorb=state.t_absorbed,
        final_fractions=tuple(float(c) / state.n for c in state.counts),
        final_components=components_per_opinion(
            state.graph, state.opinions, state.num_opinions
        ),
        flips_homophily=flips_homophily,
        flips_influence=flips_influence,
        budget_min=float(state.budgets.min()),
        budget_mean=float(state.budgets.mean()),
        budget_max=float(state.budgets.max()),
    )
