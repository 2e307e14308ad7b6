"""Experiment configuration: a sectioned key=value file, strict validation,
dotted-path overrides, and sweep specifications.

Sections and keys (all optional; defaults reproduce the standard setup of a
30x30 periodic lattice with unit offers):

    [topology]
    kind = lattice | barabasi-albert     (default lattice)
    rows, cols = int                     (lattice, default 30x30)
    nodes = int                          (barabasi-albert, default 1000)
    edges_per_node = int                 (barabasi-albert attachment m, default 4)

    [game]
    num_opinions = int                   (default 2)
    rounds = int                         (default 50000)
    reward = float                       (default 10)
    change_cost = float                  (default 1)
    knowledge_radius = int               (default 1)
    influence_radius = int               (default 1)
    offer_amounts = float[,float...]     (one value broadcasts; default 1)
    initial_budget = float               (default 0)
    debit_speaker = true|false           (default false)
    gain_baseline = own-opinion | speaker-opinion   (default own-opinion)

    [scenario]
    kind = random-uniform | fractions | droplet | degree-preferential
    fractions = float,float,...          (must sum to 1)
    droplet_fraction = float             (default 0.09)
    committed_opinion = int | none       (default none)

    [experiment]
    runs = int                           (default 1)
    seed = int                           (master seed, default 1)
    sample_every = int                   (default 50)
    snapshot_every = int | none          (default none)
    early_stop = true|false              (default false)
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .engine import GameParams
from .errors import ConfigError
from .graph import (
    DIAMETER_NODE_LIMIT,
    Graph,
    diameter,
    make_barabasi_albert,
    make_lattice2d_pbc,
)
from .rng import Xoshiro256StarStar
from .scenarios import ScenarioSpec

TOPOLOGY_KINDS = ("lattice", "barabasi-albert")


@dataclass(frozen=True)
class TopologyConfig:
    kind: str = "lattice"
    rows: int = 30
    cols: int = 30
    nodes: int = 1000
    edges_per_node: int = 4

    def __post_init__(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise ConfigError(f"topology.kind must be one of {TOPOLOGY_KINDS}")
        if self.kind == "lattice" and (self.rows < 3 or self.cols < 3):
            raise ConfigError("lattice dimensions must be at least 3x3")
        if self.kind == "barabasi-albert" and self.nodes <= self.edges_per_node:
            raise ConfigError("barabasi-albert needs nodes > edges_per_node")

    @property
    def n(self) -> int:
        return self.rows * self.cols if self.kind == "lattice" else self.nodes

    def deterministic(self) -> bool:
        """True when every run shares the same graph (no generator randomness)."""
        return self.kind == "lattice"

    def build(self, rng: Xoshiro256StarStar) -> Graph:
        if self.kind == "lattice":
            return make_lattice2d_pbc(self.rows, self.cols)
        return make_barabasi_albert(self.nodes, self.edges_per_node, rng)


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig = TopologyConfig()
    game: GameParams = GameParams()
    scenario: ScenarioSpec = ScenarioSpec()
    runs: int = 1
    master_seed: int = 1
    sample_every: int = 50
    snapshot_every: int | None = None
    early_stop: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"experiment.runs must be >= 1, got {self.runs}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("experiment.seed must be an unsigned 64-bit integer")
        if self.sample_every < 1:
            raise ConfigError("experiment.sample_every must be >= 1")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ConfigError("experiment.snapshot_every must be >= 1")
        if self.scenario.fractions is not None and len(
            self.scenario.fractions
        ) != self.game.num_opinions:
            raise ConfigError(
                "scenario.fractions length must equal game.num_opinions"
            )
        if self.scenario.committed_opinion is not None and not (
            0 <= self.scenario.committed_opinion < self.game.num_opinions
        ):
            raise ConfigError("scenario.committed_opinion out of range")


def _parse_bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def _parse_int(raw: str, where: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None


def _parse_float(raw: str, where: str) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from None


def _parse_floats(raw: str, where: str) -> tuple[float, ...]:
    parts = [p for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{where}: expected comma-separated numbers, got {raw!r}")
    return tuple(_parse_float(p, where) for p in parts)


def _parse_opt_int(raw: str, where: str) -> int | None:
    if raw.strip().lower() in ("none", ""):
        return None
    return _parse_int(raw, where)


def _parse_str(raw: str, where: str) -> str:
    return raw.strip()


_PARSERS = {
    ("topology", "kind"): _parse_str,
    ("topology", "rows"): _parse_int,
    ("topology", "cols"): _parse_int,
    ("topology", "nodes"): _parse_int,
    ("topology", "edges_per_node"): _parse_int,
    ("game", "num_opinions"): _parse_int,
    ("game", "rounds"): _parse_int,
    ("game", "reward"): _parse_float,
    ("game", "change_cost"): _parse_float,
    ("game", "knowledge_radius"): _parse_int,
    ("game", "influence_radius"): _parse_int,
    ("game", "offer_amounts"): _parse_floats,
    ("game", "initial_budget"): _parse_float,
    ("game", "debit_speaker"): _parse_bool,
    ("game", "gain_baseline"): _parse_str,
    ("scenario", "kind"): _parse_str,
    ("scenario", "fractions"): _parse_floats,
    ("scenario", "droplet_fraction"): _parse_float,
    ("scenario", "committed_opinion"): _parse_opt_int,
    ("experiment", "runs"): _parse_int,
    ("experiment", "seed"): _parse_int,
    ("experiment", "sample_every"): _parse_int,
    ("experiment", "snapshot_every"): _parse_opt_int,
    ("experiment", "early_stop"): _parse_bool,
}

_FIELD_NAMES = {
    ("experiment", "seed"): "master_seed",
}


def _assemble(values: dict[tuple[str, str], object]) -> ExperimentConfig:
    def section(name: str) -> dict[str, object]:
        out = {}
        for (sec, key), val in values.items():
            if sec == name:
                out[_FIELD_NAMES.get((sec, key), key)] = val
        return out

    topology = TopologyConfig(**section("topology"))
    game = GameParams(**section("game"))
    scenario = ScenarioSpec(**section("scenario"))
    return ExperimentConfig(
        topology=topology, game=game, scenario=scenario, **section("experiment")
    )


def _read_pairs(path) -> dict[tuple[str, str], object]:
    parser = configparser.ConfigParser(
        delimiters=("=",), inline_comment_prefixes=("#",), strict=True
    )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    values: dict[tuple[str, str], object] = {}
    for sec in parser.sections():
        for key, raw in parser.items(sec):
            parse = _PARSERS.get((sec, key))
            if parse is None:
                raise ConfigError(f"unknown configuration key '{sec}.{key}'")
            values[(sec, key)] = parse(raw, f"{sec}.{key}")
    return values


def load_config(path, overrides: list[str] | None = None) -> ExperimentConfig:
    """Parse and validate a config file, applying --set style overrides.

    Unknown sections or keys are rejected by name; every override goes
    through the same parser and validation as file values.
    """
    values = _read_pairs(path)
    config = _assemble(values)
    if overrides:
        config = apply_overrides(config, overrides)
    return config


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def apply_overrides(config: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply "section.key=value" overrides and re-validate the result."""
    updates: dict[tuple[str, str], object] = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, raw = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {path!r} is not of the form section.key")
        sec, key = parts[0].strip(), parts[1].strip()
        parse = _PARSERS.get((sec, key))
        if parse is None:
            raise ConfigError(f"unknown configuration key '{sec}.{key}'")
        updates[(sec, key)] = parse(raw, f"{sec}.{key}")
    return _rebuild(config, updates)


def _rebuild(
    config: ExperimentConfig, updates: dict[tuple[str, str], object]
) -> ExperimentConfig:
    sections = {
        "topology": dict(config.topology.__dict__),
        "game": dict(config.game.__dict__),
        "scenario": dict(config.scenario.__dict__),
        "experiment": {
            "runs": config.runs,
            "master_seed": config.master_seed,
            "sample_every": config.sample_every,
            "snapshot_every": config.snapshot_every,
            "early_stop": config.early_stop,
        },
    }
    for (sec, key), val in updates.items():
        sections[sec][_FIELD_NAMES.get((sec, key), key)] = val
    return ExperimentConfig(
        topology=TopologyConfig(**sections["topology"]),
        game=GameParams(**sections["game"]),
        scenario=ScenarioSpec(**sections["scenario"]),
        **sections["experiment"],
    )


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep: a dotted config path and the values to visit."""

    parameter: str
    values: tuple[float, ...]
    runs: int | None = None  # per value; defaults to config.runs

    def __post_init__(self):
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if self.runs is not None and self.runs < 1:
            raise ConfigError("sweep runs must be >= 1")


def set_parameter(config: ExperimentConfig, path: str, value: float) -> ExperimentConfig:
    """Set a scalar config field by dotted path.

    Paths are section.key, plus an index segment for list-valued keys,
    e.g. game.offer_amounts.0 or scenario.fractions.1.
    """
    parts = path.split(".")
    if len(parts) == 3 and (parts[0], parts[1]) in (
        ("game", "offer_amounts"),
        ("scenario", "fractions"),
    ):
        sec, key, idx_raw = parts
        idx = _parse_int(idx_raw, path)
        current = (
            config.game.resolved_offers().tolist()
            if key == "offer_amounts"
            else list(config.scenario.fractions or ())
        )
        if not 0 <= idx < max(len(current), config.game.num_opinions):
            raise ConfigError(f"{path}: index {idx} out of range")
        if key == "offer_amounts":
            amounts = config.game.resolved_offers().tolist()
            amounts[idx] = float(value)
            return _rebuild(config, {("game", "offer_amounts"): tuple(amounts)})
        if config.scenario.fractions is None:
            raise ConfigError(f"{path}: scenario has no fractions to index")
        fracs = list(config.scenario.fractions)
        if idx >= len(fracs):
            raise ConfigError(f"{path}: index {idx} out of range")
        old = fracs[idx]
        rest = 1.0 - float(value)
        scale_base = 1.0 - old
        if scale_base <= 0:
            raise ConfigError(f"{path}: cannot rescale remaining fractions")
        for j in range(len(fracs)):
            if j != idx:
                fracs[j] = fracs[j] * rest / scale_base
        fracs[idx] = float(value)
        return _rebuild(config, {("scenario", "fractions"): tuple(fracs)})
    if len(parts) != 2:
        raise ConfigError(f"sweep parameter {path!r} is not a valid config path")
    sec, key = parts
    parse = _PARSERS.get((sec, key))
    if parse is None:
        raise ConfigError(f"sweep parameter {path!r} is not a valid config path")
    if parse is _parse_int:
        if value != int(value):
            raise ConfigError(f"{path}: expected an integer value, got {value}")
        return _rebuild(config, {(sec, key): int(value)})
    if parse is _parse_float:
        return _rebuild(config, {(sec, key): float(value)})
    raise ConfigError(f"sweep parameter {path!r} does not resolve to a scalar field")


def validate_radii(config: ExperimentConfig) -> int | None:
    """Check both radii against the diameter of a probe graph.

    The probe is the actual graph for deterministic topologies, or the
    instance grown from the first run's topology stream otherwise. Graphs
    above the node limit skip the check (all-pairs BFS cost) and return None.
    Radii of 1 are valid on any connected graph and skip the probe.
    """
    if config.game.knowledge_radius <= 1 and config.game.influence_radius <= 1:
        return None
    if config.topology.n > DIAMETER_NODE_LIMIT:
        import warnings

        warnings.warn(
            f"graph has {config.topology.n} nodes; skipping radius-vs-diameter check",
            stacklevel=2,
        )
        return None
    from .experiments import topology_seed  # local import to avoid a cycle

    probe = config.topology.build(Xoshiro256StarStar(topology_seed(config.master_seed, 0)))
    d = diameter(probe)
    for name, radius in (
        ("game.knowledge_radius", config.game.knowledge_radius),
        ("game.influence_radius", config.game.influence_radius),
    ):
        if radius > d:
            raise ConfigError(f"{name}={radius} exceeds the graph diameter {d}")
    return d
