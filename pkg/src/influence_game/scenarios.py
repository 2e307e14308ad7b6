"""Initial opinion assignments: uniform random, exact fractions, a minority
droplet embedded in a majority background, degree-preferential seeding, and
committed subpopulations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedTopologyError
from .graph import Graph, Lattice2d
from .rng import Xoshiro256StarStar

KINDS = ("random-uniform", "fractions", "droplet", "degree-preferential")

FRACTION_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioSpec:
    """Which initializer to run and its parameters.

    `committed_opinion`, when set, marks every initial holder of that
    opinion as committed (they never change opinion).
    """

    kind: str = "random-uniform"
    fractions: tuple[float, ...] | None = None
    droplet_fraction: float = 0.09
    committed_opinion: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if self.fractions is not None:
            if any(f < 0 for f in self.fractions):
                raise ConfigError("fractions must be nonnegative")
            if abs(sum(self.fractions) - 1.0) > FRACTION_SUM_TOL:
                raise ConfigError(
                    f"fractions must sum to 1, got {sum(self.fractions)!r}"
                )
        if not 0.0 < self.droplet_fraction < 1.0:
            raise ConfigError(
                f"droplet_fraction must be in (0, 1), got {self.droplet_fraction}"
            )
        if self.kind in ("fractions", "degree-preferential") and self.fractions is None:
            raise ConfigError(f"scenario kind {self.kind!r} requires fractions")


def init_random_uniform(n: int, num_opinions: int, rng: Xoshiro256StarStar) -> np.ndarray:
    """Each node draws its opinion independently and uniformly."""
    if num_opinions < 2:
        raise ConfigError("need at least two opinions")
    opinions = np.empty(n, dtype=np.int8)
    for i in range(n):
        opinions[i] = rng.randbelow(num_opinions)
    return opinions


def exact_counts(n: int, fractions: tuple[float, ...]) -> list[int]:
    """Integer counts for each fraction by the largest-remainder rule:
    floors first, then leftover units to the largest fractional parts
    (ties broken toward the lower opinion id)."""
    raw = [n * f for f in fractions]
    counts = [math.floor(x) for x in raw]
    leftover = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda k: (-(raw[k] - counts[k]), k))
    for k in order[:leftover]:
        counts[k] += 1
    return counts


def init_fractions(
    n: int, fractions: tuple[float, ...], rng: Xoshiro256StarStar
) -> np.ndarray:
    """Exact per-opinion counts (largest-remainder), positions shuffled."""
    counts = exact_counts(n, fractions)
    opinions = np.empty(n, dtype=np.int8)
    pos = 0
    for k, c in enumerate(counts):
        opinions[pos:pos + c] = k
        pos += c
    rng.shuffle(opinions)
    return opinions


def init_droplet(
    graph: Graph,
    minority_opinion: int = 0,
    majority_opinion: int = 1,
    droplet_fraction: float = 0.09,
) -> np.ndarray:
    """A centered square block of the minority opinion inside the majority.

    The block side is ceil(sqrt(fraction * n)), clamped so at least one
    ring of majority cells always surrounds the block.
    """
    if not isinstance(graph.kind, Lattice2d):
        raise UnsupportedTopologyError("droplet initialization needs a lattice graph")
    if not 0.0 < droplet_fraction < 1.0:
        raise ConfigError(f"droplet_fraction must be in (0, 1), got {droplet_fraction}")
    rows, cols = graph.kind.rows, graph.kind.cols
    side = math.ceil(math.sqrt(droplet_fraction * graph.n))
    side = min(side, rows - 1, cols - 1)
    r0 = (rows - side) // 2
    c0 = (cols - side) // 2
    opinions = np.full(graph.n, majority_opinion, dtype=np.int8)
    for r in range(r0, r0 + side):
        opinions[r * cols + c0:r * cols + c0 + side] = minority_opinion
    return opinions


def init_degree_preferential(
    graph: Graph, opinion_a_count: int, rng: Xoshiro256StarStar | None = None
) -> np.ndarray:
    """The `opinion_a_count` highest-degree nodes get opinion 0, the rest 1.

    Degree ties break toward the lower node id, so the assignment is a pure
    function of the graph; the rng parameter is accepted for interface
    uniformity and unused.
    """
    if not 0 <= opinion_a_count <= graph.n:
        raise ConfigError(
            f"opinion count must be in [0, {graph.n}], got {opinion_a_count}"
        )
    degrees = np.diff(graph.indptr)
    order = np.lexsort((np.arange(graph.n), -degrees))
    opinions = np.ones(graph.n, dtype=np.int8)
    opinions[order[:opinion_a_count]] = 0
    return opinions


def apply_committed(
    opinions: np.ndarray, committed_opinion: int | None
) -> np.ndarray:
    """Flag every holder of the designated opinion as committed."""
    if committed_opinion is None:
        return np.zeros(len(opinions), dtype=bool)
    if committed_opinion not in np.unique(opinions):
        raise ConfigError(
            f"committed opinion {committed_opinion} has no initial holders"
        )
    return opinions == committed_opinion


def build_assignment(
    graph: Graph,
    spec: ScenarioSpec,
    num_opinions: int,
    rng: Xoshiro256StarStar,
) -> tuple[np.ndarray, np.ndarray]:
    """Dispatch a ScenarioSpec to its initializer; returns (opinions, committed)."""
    if spec.fractions is not None and len(spec.fractions) != num_opinions:
        raise ConfigError(
            f"got {len(spec.fractions)} fractions for {num_opinions} opinions"
        )
    if spec.kind == "random-uniform":
        opinions = init_random_uniform(graph.n, num_opinions, rng)
    elif spec.kind == "fractions":
        opinions = init_fractions(graph.n, spec.fractions, rng)
    elif spec.kind == "droplet":
        if num_opinions != 2:
            raise ConfigError("droplet scenario is binary")
        opinions = init_droplet(graph, droplet_fraction=spec.droplet_fraction)
    elif spec.kind == "degree-preferential":
        if num_opinions != 2:
            raise ConfigError("degree-preferential scenario is binary")
        count = exact_counts(graph.n, spec.fractions)[0]
        opinions = init_degree_preferential(graph, count)
    else:  # unreachable; ScenarioSpec validates kind
        raise ConfigError(f"unknown scenario kind {spec.kind!r}")
    committed = apply_committed(opinions, spec.committed_opinion)
    return opinions, committed
