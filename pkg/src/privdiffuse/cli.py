"""Command-line entry point: ``privdiffuse <command> [flags]``.

Exit status is 0 on success, 1 when a verification check fails and 2 on
usage or validation errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import make_stream
from .errors import DomainError, ParameterError, ParseError
from .graph import SYNTHETIC_NODES, SYNTHETIC_RADIUS, distances, generate_geometric_network, load_edge_list
from .mechanism import project_binary
from .process import sample_trace, serialize
from .simulator import (
    PRESETS,
    ScenarioConfig,
    equal_distance_group,
    load_scenario,
    run_coalition_experiment,
    run_diffusion,
    run_gossip,
    run_independent_baseline,
)
from .verify import SHIPPED_SEED, run_suite, write_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
NEGATIVE_CONTROL_BIAS = 0.1


@dataclass
class CommandResult:
    exit_code: int
    outputs: list = field(default_factory=list)
    summary: str = ""


def _emit(text: str, path) -> str:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return "-"
    Path(path).write_text(text)
    return str(path)


def _emit_bytes(data: bytes, path) -> str:
    if path is None or str(path) == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return "-"
    Path(path).write_bytes(data)
    return str(path)


# --------------------------------------------------------------------------
# commands


def cmd_sample(args) -> CommandResult:
    trace = sample_trace(args.n, args.eps_lo, args.eps_hi, make_stream(args.seed))
    outputs = [_emit_bytes(serialize(trace), args.out)]
    if args.norm_csv:
        rows = ["eps,norm"]
        bounds = list(trace.levels) + [trace.eps_lo]
        for i, v in enumerate(trace.values):
            r = float(np.linalg.norm(v))
            rows.append(f"{float(bounds[i])!r},{r!r}")
            rows.append(f"{float(bounds[i + 1])!r},{r!r}")
        outputs.append(_emit("\n".join(rows) + "\n", args.norm_csv))
    return CommandResult(EXIT_OK, outputs, f"trace with {trace.num_jumps} jumps on [{args.eps_lo}, {args.eps_hi}]")


def cmd_distances(args) -> CommandResult:
    if args.generate:
        net = generate_geometric_network(args.nodes, args.radius, make_stream(args.network_seed))
    elif args.edge_list:
        net = load_edge_list(Path(args.edge_list).read_text())
    else:
        raise ParameterError("give an edge-list file or --generate")
    d = distances(net, args.source, args.metric)
    rows = ["node,distance"] + [f"{k},{float(x)!r}" for k, x in enumerate(d)]
    out = _emit("\n".join(rows) + "\n", args.out)
    return CommandResult(EXIT_OK, [out], f"{args.metric} distances from node {args.source} over {net.node_count} nodes")


_DEFAULT_NODES = {"path": 3, "star": 6}


def _config_from_flags(args) -> ScenarioConfig:
    include_ego = args.include_ego
    if include_ego is None:
        # edge-list files are taken to be ego networks that omit the ego
        include_ego = args.network not in ("generated", "path", "star")
    return ScenarioConfig(
        network=args.network,
        nodes=args.nodes if args.nodes is not None else _DEFAULT_NODES.get(args.network, SYNTHETIC_NODES),
        radius=args.radius,
        network_seed=args.network_seed,
        owner=args.owner if args.owner is not None else (PRESETS["synthetic"]().owner if args.network == "generated" else 0),
        n=args.n,
        u=tuple(float(x) for x in args.u.split(",")) if args.u else (),
        metric=args.metric,
        schedule=args.schedule,
        schedule_a=args.schedule_a,
        schedule_b=args.schedule_b,
        seed=args.seed,
        include_ego=include_ego,
    )


def _binary_csv(responses) -> str:
    n = len(responses.responses[0].y) if len(responses) else 0
    rows = [",".join(["recipient", "distance", "epsilon"] + [f"y_{k}" for k in range(n)])]
    for r in responses:
        bits = [str(project_binary(x)) for x in r.y]
        rows.append(",".join([str(r.recipient), repr(float(r.distance)), repr(float(r.epsilon))] + bits))
    return "\n".join(rows) + "\n"


def cmd_diffuse(args) -> CommandResult:
    cfg = _config_from_flags(args)
    result = run_diffusion(cfg)
    text = _binary_csv(result.responses) if args.binary else result.responses.to_csv()
    outputs = [_emit(text, args.out)]
    if args.errors_csv:
        outputs.append(_emit(result.errors_csv(), args.errors_csv))
    return CommandResult(EXIT_OK, outputs, f"{len(result.responses)} responses from owner {result.setup.owner}")


def _out_path(out_dir, name):
    if out_dir is None:
        return None
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    return Path(out_dir) / name


def cmd_simulate(args) -> CommandResult:
    if not Path(args.scenario).is_file():
        raise ParameterError(f"scenario file {args.scenario!r} not found")
    cfg = load_scenario(args.scenario)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ParameterError("trials must be at least 1")
        cfg.trials = args.trials
    outputs = []
    if args.mode == "centralized":
        res = run_diffusion(cfg)
        outputs.append(_emit(res.responses.to_csv(), _out_path(args.out_dir, "responses.csv")))
        if args.out_dir:
            outputs.append(_emit(res.errors_csv(), _out_path(args.out_dir, "errors.csv")))
        summary = f"centralized: {len(res.responses)} responses"
    elif args.mode == "gossip":
        state = run_gossip(cfg)
        rows = ["node,hops,cap," + ",".join(f"y_{k}" for k in range(cfg.n))]
        for node in sorted(state.held):
            if node == state.owner:
                continue
            y = state.response(node)
            rows.append(f"{node},{state.hops[node]},{state.caps[node]!r}," + ",".join(repr(float(v)) for v in y))
        outputs.append(_emit("\n".join(rows) + "\n", _out_path(args.out_dir, "gossip_responses.csv")))
        if args.out_dir:
            outputs.append(_emit(state.messages_csv(), _out_path(args.out_dir, "messages.csv")))
        summary = f"gossip: {len(state.held) - 1} nodes reached with {len(state.messages)} messages"
    elif args.mode == "coalition":
        group = list(cfg.group) or equal_distance_group(cfg, 4)
        trials = cfg.trials if cfg.trials > 1 else 100_000
        rep = run_coalition_experiment(cfg, group, mechanism=args.mechanism, trials=trials)
        outputs.append(_emit(rep.to_json(), _out_path(args.out_dir, f"coalition_{args.mechanism}.json")))
        summary = f"coalition ({args.mechanism}, group {group}): {rep.verdict}"
    else:
        res = run_independent_baseline(cfg)
        outputs.append(_emit(res.to_csv(), _out_path(args.out_dir, "baseline_responses.csv")))
        summary = f"baseline: {len(res)} responses"
    return CommandResult(EXIT_OK, outputs, summary)


def cmd_verify(args) -> CommandResult:
    bias = NEGATIVE_CONTROL_BIAS if args.inject_bias else 0.0
    reports = run_suite(args.suite, seed=args.seed, jump_bias=bias,
                        on_report=lambda r: print(r.summary(), file=sys.stderr, flush=True))
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            write_report(reports, fh)
        out = args.out
    else:
        write_report(reports, sys.stdout)
        out = "-"
    failed = [r.name for r in reports if not r.passed]
    total = sum(r.wall_time for r in reports)
    summary = f"{len(reports) - len(failed)}/{len(reports)} checks passed in {total:.1f}s"
    return CommandResult(EXIT_FAIL if failed else EXIT_OK, [out], summary)


def cmd_gen_network(args) -> CommandResult:
    net = generate_geometric_network(args.nodes, args.radius, make_stream(args.seed))
    outputs = [_emit(net.to_edge_list(), args.out)]
    if args.positions_csv:
        outputs.append(_emit(net.positions_csv(), args.positions_csv))
    return CommandResult(EXIT_OK, outputs, f"{net.node_count} nodes, {len(net.edges)} edges")


# --------------------------------------------------------------------------
# parser


def _network_flags(p):
    p.add_argument("--network", default="generated",
                   help="'generated', 'path', 'star' or an edge-list file (default: generated)")
    p.add_argument("--nodes", type=int, default=None, help="node count for generated/path/star networks")
    p.add_argument("--radius", type=float, default=SYNTHETIC_RADIUS, help="connection radius for generated networks")
    p.add_argument("--network-seed", type=int, default=PRESETS["synthetic"]().network_seed,
                   help="seed of the generated network")
    ego = p.add_mutually_exclusive_group()
    ego.add_argument("--include-ego", dest="include_ego", action="store_true", default=None,
                     help="append an owner node joined to every listed node (default for edge-list files)")
    ego.add_argument("--no-include-ego", dest="include_ego", action="store_false",
                     help="use the edge list as is")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privdiffuse", description="Distance-graded private data diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample one process trace")
    p.add_argument("--n", type=int, required=True, help="data dimension")
    p.add_argument("--eps-lo", type=float, required=True, help="lowest privacy level of the trace")
    p.add_argument("--eps-hi", type=float, required=True, help="highest privacy level of the trace")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", default=None, help="trace document path (default stdout)")
    p.add_argument("--norm-csv", default=None, help="also write eps,norm step data here")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("distances", help="graph distances from a source node")
    p.add_argument("edge_list", nargs="?", help="edge-list file")
    p.add_argument("--generate", action="store_true", help="use a generated geometric network instead")
    p.add_argument("--nodes", type=int, default=SYNTHETIC_NODES, help="nodes of the generated network")
    p.add_argument("--radius", type=float, default=SYNTHETIC_RADIUS, help="radius of the generated network")
    p.add_argument("--network-seed", type=int, default=PRESETS["synthetic"]().network_seed,
                   help="seed of the generated network")
    p.add_argument("--metric", choices=("hops", "resistance"), default="hops", help="distance metric")
    p.add_argument("--source", type=int, default=0, help="source node (default 0)")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("diffuse", help="release one datum to every reachable node")
    _network_flags(p)
    p.add_argument("--owner", type=int, default=None, help="data owner node")
    p.add_argument("--n", type=int, default=2, help="data dimension (default 2)")
    p.add_argument("--u", default=None, help="private value, comma separated (default zeros)")
    p.add_argument("--metric", choices=("hops", "resistance"), default="hops", help="distance metric")
    p.add_argument("--schedule", default="synthetic", help="schedule preset: synthetic or facebook")
    p.add_argument("--schedule-a", type=float, default=None, help="schedule slope a in exp(a d + b)")
    p.add_argument("--schedule-b", type=float, default=None, help="schedule offset b in exp(a d + b)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--binary", action="store_true", help="project each response component onto {0, 1}")
    p.add_argument("--out", default=None, help="responses CSV path (default stdout)")
    p.add_argument("--errors-csv", default=None, help="per-node error CSV path")
    p.set_defaults(func=cmd_diffuse)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario", help="scenario file of key = value lines")
    p.add_argument("--mode", choices=("centralized", "gossip", "coalition", "baseline"), default="centralized")
    p.add_argument("--mechanism", choices=("coupled", "independent"), default="coupled",
                   help="noise model for coalition mode")
    p.add_argument("--trials", type=int, default=None, help="override the scenario trial count")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out-dir", default=None, help="directory for outputs (default: primary output to stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the statistical verification suite")
    p.add_argument("--suite", choices=("default", "full"), default="default")
    p.add_argument("--seed", type=int, default=SHIPPED_SEED, help=f"suite seed (default {SHIPPED_SEED})")
    p.add_argument("--out", default=None, help="JSON-lines report path (default stdout)")
    p.add_argument("--inject-bias", action="store_true",
                   help=f"negative control: add {NEGATIVE_CONTROL_BIAS} to every jump radius")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-network", help="generate a random geometric network")
    p.add_argument("--nodes", type=int, default=SYNTHETIC_NODES)
    p.add_argument("--radius", type=float, default=SYNTHETIC_RADIUS)
    p.add_argument("--seed", type=int, default=PRESETS["synthetic"]().network_seed)
    p.add_argument("--out", default=None, help="edge-list path (default stdout)")
    p.add_argument("--positions-csv", default=None, help="also write node,x,y here")
    p.set_defaults(func=cmd_gen_network)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (ParameterError, DomainError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if result.summary:
        print(result.summary, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
