"""Monte-Carlo batches, one-parameter sweeps, and delimited output.

Seeds form a documented hash tree: the master seed derives one seed per
run (per value and run for sweeps), and each run seed derives separate
streams for topology growth, initial opinions, and game dynamics. Results
are therefore independent of execution order and machine.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import engine, metrics, scenarios
from .config import ExperimentConfig, SweepSpec, set_parameter, validate_radii
from .errors import ConfigError
from .graph import Graph, Lattice2d, NeighborhoodTable, precompute_neighborhoods
from .metrics import MetricsSample, RunSummary
from .rng import Xoshiro256StarStar, seed_at

# stream tags inside one run's seed
_STREAM_TOPOLOGY = 0
_STREAM_INIT = 1
_STREAM_GAME = 2

#: final_p_* and fraction columns carry this many decimals; aggregates are
#: computed from the rounded values so they are recomputable from the CSV.
DECIMALS = 6


def derive_run_seeds(master_seed: int, count: int) -> list[int]:
    """Per-run seeds: pairwise distinct, prefix-stable in count."""
    if count < 1:
        raise ConfigError("count must be >= 1")
    return [seed_at(master_seed, i) for i in range(count)]


def topology_seed(master_seed: int, run_index: int = 0) -> int:
    """Topology stream of the run_index-th run of a batch."""
    return seed_at(master_seed, run_index, _STREAM_TOPOLOGY)


@dataclass(frozen=True)
class RunOutput:
    """Summary plus sampled series (and optional snapshots) for one run."""

    run_id: int
    summary: RunSummary
    samples: list[MetricsSample]
    snapshots: list[tuple[int, np.ndarray]] | None
    final_opinions: np.ndarray


@dataclass(frozen=True)
class BatchResult:
    outputs: list[RunOutput]

    @property
    def summaries(self) -> list[RunSummary]:
        return [o.summary for o in self.outputs]


def shared_structures(
    config: ExperimentConfig,
) -> tuple[Graph, NeighborhoodTable, NeighborhoodTable] | None:
    """Build graph and tables once when the topology is run-independent."""
    if not config.topology.deterministic():
        return None
    graph = config.topology.build(Xoshiro256StarStar(0))
    knowledge = precompute_neighborhoods(graph, config.game.knowledge_radius)
    if config.game.influence_radius == config.game.knowledge_radius:
        influence = knowledge
    else:
        influence = precompute_neighborhoods(graph, config.game.influence_radius)
    return graph, knowledge, influence


def execute_run(
    config: ExperimentConfig,
    run_seed: int,
    run_id: int = 0,
    shared=None,
    record: bool = False,
) -> RunOutput:
    """One full simulation from a run seed: grow/load the topology,
    initialize opinions, run the game, settle rewards, summarize."""
    if shared is None:
        shared = shared_structures(config)
    if shared is None:
        graph = config.topology.build(
            Xoshiro256StarStar(seed_at(run_seed, _STREAM_TOPOLOGY))
        )
        knowledge = precompute_neighborhoods(graph, config.game.knowledge_radius)
        if config.game.influence_radius == config.game.knowledge_radius:
            influence = knowledge
        else:
            influence = precompute_neighborhoods(graph, config.game.influence_radius)
    else:
        graph, knowledge, influence = shared
    init_rng = Xoshiro256StarStar(seed_at(run_seed, _STREAM_INIT))
    opinions, committed = scenarios.build_assignment(
        graph, config.scenario, config.game.num_opinions, init_rng
    )
    result = engine.run(
        graph,
        config.game,
        opinions,
        seed_at(run_seed, _STREAM_GAME),
        committed=committed,
        knowledge=knowledge,
        influence=influence,
        sample_every=config.sample_every,
        snapshot_every=config.snapshot_every,
        early_stop=config.early_stop,
        record=record,
    )
    engine.settle_rewards(result.state)
    summary = metrics.summarize_run(result.records, result.state, run_seed)
    return RunOutput(
        run_id=run_id,
        summary=summary,
        samples=result.samples,
        snapshots=result.snapshots,
        final_opinions=result.state.opinions.copy(),
    )


def run_batch(config: ExperimentConfig, workers: int = 1) -> BatchResult:
    """Execute config.runs independent simulations.

    Run i uses the i-th child of the master seed, so results are identical
    for any `workers` value; outputs are ordered by run index.
    """
    validate_radii(config)
    seeds = derive_run_seeds(config.master_seed, config.runs)
    shared = shared_structures(config)
    if workers <= 1:
        outputs = [
            execute_run(config, seed, run_id=i, shared=shared)
            for i, seed in enumerate(seeds)
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(execute_run, config, seed, i, shared)
                for i, seed in enumerate(seeds)
            ]
            outputs = [f.result() for f in futures]
    outputs.sort(key=lambda o: o.run_id)
    return BatchResult(outputs=outputs)


@dataclass(frozen=True)
class SweepCell:
    """Aggregate results for one sweep value."""

    parameter: str
    value: float
    runs: int
    frac_not_absorbed: float
    mean_final_p_a: float
    mean_t_absorb: float | None
    summaries: list[RunSummary]


@dataclass(frozen=True)
class SweepResult:
    cells: list[SweepCell]


def aggregate_cell(
    parameter: str, value: float, summaries: list[RunSummary]
) -> SweepCell:
    """Fold run summaries into one sweep row.

    Means are taken over values rounded to the CSV precision, so the row is
    exactly recomputable from a written summary file.
    """
    runs = len(summaries)
    not_absorbed = sum(1 for s in summaries if not s.absorbed)
    p_a = [round(s.final_fractions[0], DECIMALS) for s in summaries]
    absorb_times = [s.t_absorb for s in summaries if s.t_absorb is not None]
    return SweepCell(
        parameter=parameter,
        value=value,
        runs=runs,
        frac_not_absorbed=round(not_absorbed / runs, DECIMALS),
        mean_final_p_a=round(sum(p_a) / runs, DECIMALS),
        mean_t_absorb=(
            round(sum(absorb_times) / len(absorb_times), DECIMALS)
            if absorb_times
            else None
        ),
        summaries=summaries,
    )


def sweep(config: ExperimentConfig, spec: SweepSpec, workers: int = 1,
          progress=None) -> SweepResult:
    """Run a batch per sweep value.

    The value-index/run-index seed tree guarantees no seed reuse between
    cells. Each cell gets a fresh random initialization per run.
    """
    runs = spec.runs if spec.runs is not None else config.runs
    cells = []
    for vi, value in enumerate(spec.values):
        cell_config = set_parameter(config, spec.parameter, value)
        cell_config = _with_runs_and_seed(
            cell_config, runs, seed_at(config.master_seed, vi)
        )
        batch = run_batch(cell_config, workers=workers)
        cells.append(aggregate_cell(spec.parameter, value, batch.summaries))
        if progress is not None:
            progress(spec.parameter, value, cells[-1])
    return SweepResult(cells=cells)


def _with_runs_and_seed(config: ExperimentConfig, runs: int, seed: int):
    from dataclasses import replace

    return replace(config, runs=runs, master_seed=seed)


def _fmt(x: float) -> str:
    return f"{x:.{DECIMALS}f}"


def write_summary_csv(summaries: list[RunSummary], path, num_opinions: int) -> None:
    """run_id,seed,absorbed,winner,t_absorb,final_p_*,components_*,flips_*"""
    header = (
        ["run_id", "seed", "absorbed", "winner", "t_absorb"]
        + [f"final_p_{k}" for k in range(num_opinions)]
        + [f"components_{k}" for k in range(num_opinions)]
        + ["flips_homophily", "flips_influence"]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, s in enumerate(summaries):
            writer.writerow(
                [
                    i,
                    s.seed,
                    "true" if s.absorbed else "false",
                    "" if s.winner is None else s.winner,
                    "" if s.t_absorb is None else s.t_absorb,
                ]
                + [_fmt(f) for f in s.final_fractions]
                + [str(c) for c in s.final_components]
                + [s.flips_homophily, s.flips_influence]
            )


def write_timeseries_csv(outputs: list[RunOutput], path) -> None:
    """run_id,t,opinion,fraction,components — one row per opinion per sample."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run_id", "t", "opinion", "fraction", "components"])
        for out in outputs:
            for sample in out.samples:
                for k, (frac, comp) in enumerate(
                    zip(sample.fractions, sample.components)
                ):
                    writer.writerow([out.run_id, sample.t, k, _fmt(frac), comp])


def write_sweep_csv(result: SweepResult, path) -> None:
    """param,value,runs,frac_not_absorbed,mean_final_p_A,mean_t_absorb"""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["param", "value", "runs", "frac_not_absorbed", "mean_final_p_A",
             "mean_t_absorb"]
        )
        for cell in result.cells:
            value = int(cell.value) if cell.value == int(cell.value) else cell.value
            writer.writerow(
                [
                    cell.parameter,
                    value,
                    cell.runs,
                    _fmt(cell.frac_not_absorbed),
                    _fmt(cell.mean_final_p_a),
                    "" if cell.mean_t_absorb is None else _fmt(cell.mean_t_absorb),
                ]
            )


def write_snapshot(path, t: int, opinions: np.ndarray, graph: Graph) -> None:
    """Lattice snapshots are a grid of opinion ids under a '# t= rows= cols='
    header; other graphs get 'node_id,opinion' lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if isinstance(graph.kind, Lattice2d):
            rows, cols = graph.kind.rows, graph.kind.cols
            fh.write(f"# t={t} rows={rows} cols={cols}\n")
            for r in range(rows):
                row = opinions[r * cols:(r + 1) * cols]
                fh.write(",".join(str(int(o)) for o in row) + "\n")
        else:
            fh.write(f"# t={t}\n")
            for node, opinion in enumerate(opinions):
                fh.write(f"{node},{int(opinion)}\n")
