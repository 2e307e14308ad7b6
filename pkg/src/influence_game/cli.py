"""Command-line harness: run experiments, sweep a parameter, plot CSV
columns, and dump graphs.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime/IO error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments, plotting
from .config import ExperimentConfig, SweepSpec, load_config, apply_overrides
from .errors import ConfigError
from .graph import write_edge_list
from .rng import Xoshiro256StarStar


class UsageError(SystemExit):
    def __init__(self, code: int, message: str):
        super().__init__(code)
        self.message = message


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1
        self.print_usage(sys.stderr)
        raise UsageError(1, f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="influence-game", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="experiment config file (defaults apply if omitted)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--runs", type=int, default=None, help="run count override")

    run_p = sub.add_parser("run", help="run one experiment batch")
    common(run_p)
    run_p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default ./out)")

    sweep_p = sub.add_parser("sweep", help="sweep one config parameter")
    common(sweep_p)
    sweep_p.add_argument("--out", type=Path, default=Path("out"))
    sweep_p.add_argument("--param", required=True,
                         help="dotted config path, e.g. game.knowledge_radius")
    sweep_p.add_argument("--values", required=True,
                         help="comma list (1,2,3) or range lo:hi[:step]")

    plot_p = sub.add_parser("plot", help="render CSV columns as a line chart")
    plot_p.add_argument("--input", type=Path, required=True)
    plot_p.add_argument("--x", required=True, help="x column name")
    plot_p.add_argument("--y", required=True, help="comma-separated y column names")
    plot_p.add_argument("--output", type=Path, required=True)

    dump_p = sub.add_parser("graph-dump", help="write the topology as an edge list")
    common(dump_p)
    dump_p.add_argument("--output", type=Path, required=True)
    return parser


def _load(args) -> ExperimentConfig:
    if args.config is not None:
        config = load_config(args.config, args.overrides)
    else:
        config = apply_overrides(ExperimentConfig(), args.overrides)
    extra = []
    if args.seed is not None:
        extra.append(f"experiment.seed={args.seed}")
    if args.runs is not None:
        extra.append(f"experiment.runs={args.runs}")
    if extra:
        config = apply_overrides(config, extra)
    return config


def _parse_values(raw: str) -> tuple[float, ...]:
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad values range {raw!r}, expected lo:hi[:step]")
        lo, hi = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad values range {raw!r}")
        values = []
        v = lo
        while v <= hi + 1e-9:
            values.append(round(v, 10))
            v += step
        return tuple(values)
    return tuple(float(p) for p in raw.split(",") if p.strip())


def cmd_run(args) -> int:
    config = _load(args)
    out_dir: Path = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    batch = experiments.run_batch(config)
    experiments.write_summary_csv(
        batch.summaries, out_dir / "summary.csv", config.game.num_opinions
    )
    experiments.write_timeseries_csv(batch.outputs, out_dir / "timeseries.csv")

    shared = experiments.shared_structures(config)
    report_graph = (
        shared[0]
        if shared is not None
        else config.topology.build(
            Xoshiro256StarStar(experiments.topology_seed(config.master_seed, 0))
        )
    )
    if config.snapshot_every is not None:
        width = max(8, len(str(config.game.rounds)))
        for out in batch.outputs:
            for t, opinions in out.snapshots or []:
                name = f"snapshot_r{out.run_id:03d}_t{t:0{width}d}.txt"
                experiments.write_snapshot(out_dir / name, t, opinions, report_graph)
    plotting.timeseries_figure(
        batch.outputs, config.game.num_opinions, out_dir / "timeseries.svg"
    )
    if config.topology.kind == "lattice":
        plotting.lattice_figure(
            batch.outputs[0].final_opinions,
            report_graph,
            config.game.num_opinions,
            out_dir / "final_state.svg",
            title=f"final state, run 0, t={config.game.rounds}",
        )
    for out in batch.outputs:
        s = out.summary
        if s.absorbed:
            print(f"run {out.run_id}: absorbed winner={s.winner} t={s.t_absorb}")
        else:
            fracs = " ".join(f"{f:.3f}" for f in s.final_fractions)
            print(f"run {out.run_id}: not absorbed, final fractions {fracs}")
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    values = _parse_values(args.values)
    spec = SweepSpec(parameter=args.param, values=values, runs=args.runs)
    out_dir: Path = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(param, value, cell):
        print(
            f"{param}={value}: runs={cell.runs} "
            f"frac_not_absorbed={cell.frac_not_absorbed:.3f} "
            f"mean_final_p_A={cell.mean_final_p_a:.3f}"
        )

    result = experiments.sweep(config, spec, progress=progress)
    experiments.write_sweep_csv(result, out_dir / "sweep.csv")
    plotting.sweep_figure(result, out_dir / "sweep.svg")
    return 0


def cmd_plot(args) -> int:
    ys = [y.strip() for y in args.y.split(",") if y.strip()]
    if not ys:
        raise ConfigError("no y columns given")
    plotting.plot_csv_columns(args.input, args.x, ys, args.output)
    return 0


def cmd_graph_dump(args) -> int:
    config = _load(args)
    rng = Xoshiro256StarStar(experiments.topology_seed(config.master_seed, 0))
    graph = config.topology.build(rng)
    write_edge_list(graph, args.output)
    print(f"wrote {graph.n} nodes, {graph.num_edges} edges to {args.output}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "plot": cmd_plot,
    "graph-dump": cmd_graph_dump,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
