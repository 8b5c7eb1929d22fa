"""Command-line front end: validate, run, train, graph, shortest-path."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from .agents import build_behaviors, dump_tables, load_tables
from .agents.config import QLEARNING
from .agents.training import CURVE_FIELDS, parse_phases, train_curriculum
from .core import ATTACKER, DEFENDER, MCASError
from .environment import Environment, run_episode
from .scenario import ParseError, SchemaError, ScenarioSpec, ValidationError, parse_scenario, validate
from .search import DEFAULT_BUDGET, FOUND, UNREACHABLE, search_goal_path

log = logging.getLogger("mcas")

SUMMARY_FIELDS = (
    "episode", "seed", "cycles", "status",
    "attacker_return", "defender_return",
    "attacker_path_length", "defender_path_length",
    "attacker_success",
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_UNKNOWN = 3


def _load(path: str) -> ScenarioSpec:
    """Parse and validate; warnings go to stderr, errors raise."""
    spec = parse_scenario(Path(path).read_bytes())
    diagnostics = validate(spec)
    for d in diagnostics:
        if d.severity == "warning":
            print(_format_diagnostic(d), file=sys.stderr)
    if any(d.severity == "error" for d in diagnostics):
        raise ValidationError(diagnostics)
    return spec


def _format_diagnostic(d) -> str:
    return f"{d.severity}: {d.location or '/'}: [{d.code}] {d.message}"


def _write_csv(path: Path, fields, rows) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def cmd_validate(args) -> int:
    try:
        spec = parse_scenario(Path(args.file).read_bytes())
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    diagnostics = validate(spec)
    for d in diagnostics:
        print(_format_diagnostic(d))
    errors = sum(1 for d in diagnostics if d.severity == "error")
    if errors:
        return EXIT_INVALID
    print(f"ok: {spec.name} ({len(spec.nodes)} nodes, {len(spec.actions)} actions, {len(spec.agents)} agents)")
    return EXIT_OK


def summary_row(ep) -> dict:
    return {
        "episode": ep.episode,
        "seed": ep.seed,
        "cycles": ep.cycles,
        "status": ep.status.value,
        "attacker_return": ep.team_return(ATTACKER),
        "defender_return": ep.team_return(DEFENDER),
        "attacker_path_length": ep.path_length(team=ATTACKER),
        "defender_path_length": ep.path_length(team=DEFENDER),
        "attacker_success": int(ep.attacker_success),
    }


def cmd_run(args) -> int:
    if args.episodes < 1:
        print("error: --episodes must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    spec = _load(args.file)
    tables = None
    if args.qtables:
        tables = load_tables(Path(args.qtables).read_bytes())
    passive = (DEFENDER,) if args.defenders == "passive" else ()
    behaviors = build_behaviors(spec, passive_teams=passive, tables=tables, greedy=True)
    env = Environment(spec, check=False)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    wins = 0
    with open(out / "episodes.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for i in range(args.episodes):
            ep = run_episode(spec, behaviors, seed=args.seed + i, episode=i, env=env)
            fh.write(ep.to_jsonl())
            rows.append(summary_row(ep))
            wins += ep.attacker_success
            log.info("episode %d: %s after %d cycles", i, ep.status.value, ep.cycles)
    _write_csv(out / "summary.csv", SUMMARY_FIELDS, rows)
    print(f"attacker success rate: {wins / args.episodes:.4f} ({wins}/{args.episodes})")
    return EXIT_OK


def cmd_train(args) -> int:
    spec = _load(args.file)
    if not any(a.behavior.kind == QLEARNING for a in spec.agents):
        print("error: scenario has no qlearning agents", file=sys.stderr)
        return EXIT_INVALID
    try:
        phases = parse_phases(args.phases)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    tables = load_tables(Path(args.qtables).read_bytes()) if args.qtables else None
    result = train_curriculum(spec, phases, seed=args.seed, tables=tables)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "curves.csv", CURVE_FIELDS, result.curves)
    (out / "qtables.json").write_text(dump_tables(result.tables), encoding="utf-8")
    for (start, stop), phase in zip(result.phase_bounds, phases):
        window = result.episode_success[max(start, stop - 100):stop]
        rate = sum(window) / len(window) if window else 0.0
        print(f"phase {'+'.join(phase.active_teams)} x{phase.episodes}: final attacker success {rate:.2f}")
    return EXIT_OK


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(spec: ScenarioSpec) -> str:
    """Undirected DOT graph: one cluster per ``net.subnet`` value, edges from ``net.links``."""
    state = spec.initial_state()
    names = sorted(n.id for n in spec.nodes)
    subnets: dict[str, list[str]] = {}
    loose = []
    for n in names:
        subnet = state.get(f"{n}.net.subnet")
        if subnet:
            subnets.setdefault(subnet, []).append(n)
        else:
            loose.append(n)
    edges = set()
    known = set(names)
    for n in names:
        for other in filter(None, (s.strip() for s in (state.get(f"{n}.net.links") or "").split(","))):
            if other in known and other != n:
                edges.add(tuple(sorted((n, other))))

    lines = [f"graph {_dot_id(spec.name)} {{", "  node [shape=box];"]
    for i, subnet in enumerate(sorted(subnets)):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_dot_id(subnet)};")
        for n in subnets[subnet]:
            lines.append(f"    {_dot_id(n)};")
        lines.append("  }")
    for n in loose:
        lines.append(f"  {_dot_id(n)};")
    for a, b in sorted(edges):
        lines.append(f"  {_dot_id(a)} -- {_dot_id(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_graph(args) -> int:
    spec = _load(args.file)
    text = to_dot(spec)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_shortest_path(args) -> int:
    spec = _load(args.file)
    result = search_goal_path(spec, budget=args.budget)
    if result.status == FOUND:
        print(len(result.path))
        for agent, action in result.path:
            print(f"{agent} {action}")
        return EXIT_OK
    if result.status == UNREACHABLE:
        print("unreachable")
        return EXIT_INVALID
    print(f"unknown: budget of {args.budget} expansions exhausted")
    return EXIT_UNKNOWN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcas", description="Multi-agent cyber attack/defense simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="play seeded episodes and log them")
    p.add_argument("file")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--defenders", choices=("active", "passive"), default="active")
    p.add_argument("--out", default="out")
    p.add_argument("--qtables", help="trained tables for qlearning agents (played greedily)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train", help="curriculum q-learning")
    p.add_argument("file")
    p.add_argument("--phases", default="attackers:1000", help="e.g. attackers:1000,all:1000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.add_argument("--qtables", help="start from these tables instead of empty ones")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("graph", help="export the topology as DOT")
    p.add_argument("file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("shortest-path", help="fewest attacker actions to the goal")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_shortest_path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = os.environ.get("MCAS_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        for d in exc.diagnostics:
            if d.severity == "error":
                print(_format_diagnostic(d), file=sys.stderr)
        return EXIT_INVALID
    except (MCASError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
