"""Agent-based simulator of a resource-mediated influence game on graphs.

Agents on a lattice or scale-free network trade a game currency to sway
each other's opinions; depending on knowledge radius, resource disparity,
topology, and committed agents, the population forms echo chambers or
reaches consensus. Ships as a library plus the `influence-game` CLI.
"""

from .config import ExperimentConfig, ScenarioSpec, SweepSpec, TopologyConfig, load_config
from .engine import (
    GameParams,
    GameState,
    InteractionRecord,
    acceptance_gain,
    acceptance_probability,
    forecast,
    local_majority,
    run,
    settle_rewards,
    speaker_offer,
    step,
)
from .errors import ConfigError, InvalidDimensionError, InvalidParameterError, UnsupportedTopologyError
from .experiments import derive_run_seeds, execute_run, run_batch, sweep
from .graph import (
    Graph,
    NeighborhoodTable,
    diameter,
    k_ball,
    make_barabasi_albert,
    make_custom,
    make_lattice2d_pbc,
    precompute_neighborhoods,
)
from .metrics import (
    MetricsSample,
    RunSummary,
    components_per_opinion,
    is_absorbed,
    opinion_fractions,
    summarize_run,
)
from .rng import Xoshiro256StarStar, derive_seeds, mix64, seed_at

__version__ = "0.1.0"
