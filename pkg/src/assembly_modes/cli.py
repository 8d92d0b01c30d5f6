"""Command-line front end.

Every subcommand prints a short human summary, or one JSON document with
``--json``. Files written by a command get a ``<file>.manifest.json``
sidecar recording the command, configuration, seed and timestamps.

Exit codes: 0 success, 1 malformed input, 2 solver failure.
"""
from __future__ import annotations

import argparse
import collections
import datetime as _dt
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Sequence

from .assembly import assembly_count, embeddable_solutions, oracle_coordinate_count, topology_system
from .distance import (
    DistanceAssignment,
    canonical_system_v17,
    cm_matrix,
    select_minor_system,
    topology_edge_order,
    unknown_name,
)
from .graph import (
    FAN_GROWTH_CONSTANT,
    TopologyId,
    builtin_topology,
    closed_form_bounds,
    is_laman,
    pebble_game_is_laman,
)
from .homotopy import TrackerConfig
from .mixed_volume import bezout_bound, system_mixed_volume
from .optimizer import METHODS, OptimizerConfig, run_optimizer, runs_csv
from .realization import embeddings_json, export_svg

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2
SCHEMA_PATH = Path(__file__).with_name("cli_output.schema.json")


class InputError(Exception):
    """Malformed or invalid user input (exit code 1)."""


class SolverFailure(Exception):
    """Every path was lost (exit code 2)."""


def _version() -> str:
    try:
        return metadata.version("assembly-modes")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


@dataclass
class RunManifest:
    command: list[str]
    config: dict
    seed: int | None
    version: str = field(default_factory=_version)
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    started: str = ""
    finished: str = ""
    python: str = field(default_factory=platform.python_version)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def read_lengths(path: str | os.PathLike, topology: TopologyId | str = TopologyId.V17) -> DistanceAssignment:
    """Parse a length file and check it covers every bar of ``topology``.

    Accepted layouts: ``{"edges": {"1-2": 180, ...}}``, ``{"vector": [...]}``
    or a bare JSON list. Vectors follow the topology's edge order
    (lexicographic with 5-7 last; for V17 that is l_0..l_10).
    """
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc.msg})") from exc
    g = builtin_topology(topology)
    order = topology_edge_order(g)
    if isinstance(data, dict) and "edges" in data:
        raw = data["edges"]
        if not isinstance(raw, dict):
            raise InputError('"edges" must map "i-j" keys to lengths')
        values = {}
        for key, val in raw.items():
            try:
                i, j = (int(t) for t in str(key).replace(",", "-").split("-"))
            except ValueError as exc:
                raise InputError(f"bad edge key {key!r}; expected 'i-j'") from exc
            values[(min(i, j), max(i, j))] = val
    else:
        vec = data.get("vector") if isinstance(data, dict) else data
        if not isinstance(vec, list):
            raise InputError('expected {"edges": {...}}, {"vector": [...]} or a JSON list')
        if len(vec) != len(order):
            raise InputError(f"vector has {len(vec)} entries, topology needs {len(order)}")
        values = dict(zip(order, vec))
    missing = [e for e in order if e not in values]
    if missing:
        raise InputError(f"missing lengths for edges {missing}")
    extra = [e for e in values if e not in g.edges]
    if extra:
        raise InputError(f"edges {extra} are not bars of {TopologyId.parse(topology).value}")
    for e, v in values.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InputError(f"length of {e} is not a number")
    try:
        return DistanceAssignment(values)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(str(exc)) from exc


def _topology(value: str) -> TopologyId:
    try:
        return TopologyId.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _write(path: str, text: str, manifest: RunManifest) -> None:
    Path(path).write_text(text)
    manifest.outputs.append(path)


def _write_manifests(manifest: RunManifest) -> None:
    manifest.finished = _now()
    for out in manifest.outputs:
        Path(out + ".manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")


# --- subcommands -----------------------------------------------------------


def cmd_topology(args, manifest):
    g = builtin_topology(args.id)
    m = cm_matrix(g)
    result = {
        "topology": TopologyId.parse(args.id).value,
        "n": g.n,
        "edges": [list(e) for e in g.sorted_edges()],
        "edge_order": [list(e) for e in topology_edge_order(g)],
        "laman": is_laman(g),
        "pebble_game": pebble_game_is_laman(g),
        "unknowns": [unknown_name(*e) for e in m.unknowns],
    }
    lines = [
        f"{result['topology']}: {g.n} vertices, {len(g.edges)} bars, Laman={result['laman']}",
        "bars: " + " ".join(f"{a}-{b}" for a, b in g.sorted_edges()),
        "unknown distances: " + " ".join(result["unknowns"]),
    ]
    return result, lines


def cmd_bounds(args, manifest):
    try:
        b = closed_form_bounds(args.n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    result = {**b.as_dict(), "growth_constant": FAN_GROWTH_CONSTANT}
    lines = [f"{k}: {v}" for k, v in result.items()]
    return result, lines


def _system_for(tid: TopologyId):
    if tid is TopologyId.V17:
        system = canonical_system_v17()
        system.mixed_volume = system_mixed_volume(system.polynomials, system.variable_names)
        return system
    return topology_system(tid)


def cmd_system(args, manifest):
    tid = args.topology
    if args.enumerate:
        systems = select_minor_system(builtin_topology(tid), topology=tid)
        hist = collections.Counter(s.mixed_volume for s in systems)
        best = systems[0]
        result = {
            "topology": tid.value,
            "candidates": len(systems),
            "histogram": {str(k): hist[k] for k in sorted(hist)},
            "minimum": best.to_dict(),
        }
        lines = [f"{tid.value}: {len(systems)} certified systems, minimum mixed volume {best.mixed_volume}"]
        lines.append("histogram: " + ", ".join(f"{k}:{hist[k]}" for k in sorted(hist)))
        lines.append(f"minimum: variables {best.variable_names}, minors {best.minors}")
        if args.out:
            _write(args.out, json.dumps([s.to_dict() for s in systems], indent=1) + "\n", manifest)
        return result, lines
    system = _system_for(tid)
    result = system.to_dict()
    result["bezout"] = bezout_bound(system.polynomials, system.variable_names)
    result["degrees"] = system.total_degrees()
    lines = [
        f"{tid.value}: variables {system.variable_names}",
        f"minors {system.minors}",
        f"degrees {result['degrees']}, Bezout {result['bezout']}, mixed volume {system.mixed_volume}",
    ]
    if args.out:
        _write(args.out, json.dumps(result, indent=1) + "\n", manifest)
    return result, lines


def cmd_mixed_volume(args, manifest):
    system = _system_for(args.topology)
    bez = bezout_bound(system.polynomials, system.variable_names)
    result = {"topology": args.topology.value, "mixed_volume": system.mixed_volume, "bezout": bez,
              "variables": system.variable_names, "minors": [list(s) for s in system.minors]}
    return result, [str(system.mixed_volume)]


def _count_payload(tid, lengths, seed):
    count = assembly_count(tid, lengths, TrackerConfig(), seed=seed)
    sols = count.solutions
    if sols is None or sols.finite == 0:
        raise SolverFailure("all paths were lost")
    return count


def cmd_count(args, manifest):
    lengths = read_lengths(args.lengths, args.topology)
    manifest.inputs.append(args.lengths)
    count = _count_payload(args.topology, lengths, args.seed)
    real = embeddable_solutions(args.topology, lengths, count)
    result = {
        "topology": args.topology.value,
        "N": count.N,
        "degenerate": count.degenerate,
        "attempts": count.attempts,
        "real": count.real,
        "real_positive": count.real_positive,
        "borderline": count.borderline,
        "embeddable": len(real.embeddings),
        "infeasible": real.infeasible,
        "notes": count.notes,
        "solutions": count.solutions.to_dict(),
    }
    lines = [
        f"N = {count.N}" + (" (degenerate instance)" if count.degenerate else ""),
        f"real {count.real}, real positive {count.real_positive}, borderline {count.borderline}",
        f"embeddable {len(real.embeddings)}, infeasible {real.infeasible}",
    ] + count.notes
    return result, lines


def cmd_oracle(args, manifest):
    lengths = read_lengths(args.lengths, args.topology)
    manifest.inputs.append(args.lengths)
    oracle = oracle_coordinate_count(args.topology, lengths, TrackerConfig(), seed=args.seed)
    if oracle.solutions.finite == 0:
        raise SolverFailure("all paths were lost")
    result = {
        "topology": args.topology.value,
        "complex": oracle.complex,
        "real": oracle.real,
        "congruence_classes": oracle.congruence_classes,
        "degenerate": oracle.degenerate,
        "paths": {"tracked": oracle.solutions.tracked, "diverged": oracle.solutions.diverged,
                  "failed": oracle.solutions.failed},
    }
    lines = [
        f"finite {oracle.complex}, real {oracle.real}, congruence classes {oracle.congruence_classes}",
    ]
    if oracle.degenerate:
        lines.append("warning: odd real count, some configuration is degenerate")
    return result, lines


def cmd_realize(args, manifest):
    lengths = read_lengths(args.lengths, args.topology)
    manifest.inputs.append(args.lengths)
    count = _count_payload(args.topology, lengths, args.seed)
    real = embeddable_solutions(args.topology, lengths, count)
    if not real.embeddings:
        raise SolverFailure("no embeddable solution to draw")
    title = f"{args.topology.value}: {len(real.embeddings)} embeddable solutions" + (" + mirrors" if args.mirror else "")
    _write(args.out, export_svg(real.embeddings, mirror=args.mirror, title=title), manifest)
    if args.coords:
        _write(args.coords, embeddings_json(real.embeddings) + "\n", manifest)
    cells = len(real.embeddings) * (2 if args.mirror else 1)
    result = {"topology": args.topology.value, "N": count.N, "embeddable": len(real.embeddings),
              "cells": cells, "svg": args.out,
              "max_residual": max(e.max_residual for e in real.embeddings)}
    return result, [f"wrote {cells} cells to {args.out}"]


def cmd_optimize(args, manifest):
    runs = []
    lines = []
    for r in range(args.runs):
        try:
            cfg = OptimizerConfig(method=args.method, budget=args.budget, seed=args.seed + r,
                                  fixed_value=args.fixed_value, memoize=not args.no_memo)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        run = run_optimizer(cfg, workers=args.threads)
        runs.append(run)
        lines.append(f"{args.method} seed {cfg.seed}: {run.display()}  best {list(run.best_candidate)}")
        if args.verbose:
            print(lines[-1], file=sys.stderr, flush=True)
    manifest.config["optimizer"] = OptimizerConfig(method=args.method, budget=args.budget, seed=args.seed,
                                                   fixed_value=args.fixed_value).as_dict()
    if args.out:
        _write(args.out, runs_csv(runs), manifest)
    if args.trajectories:
        _write(args.trajectories, json.dumps([r.to_dict() for r in runs]) + "\n", manifest)
    result = {"method": args.method, "runs": [r.csv_row() for r in runs],
              "best": max(r.best_value for r in runs)}
    return result, lines


# --- parser ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    def flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands repeat the global flags without defaults, so a flag
        # given before the subcommand is not reset by the subparser
        kw = {"default": argparse.SUPPRESS} if suppress else {}
        f = _Parser(add_help=False)
        f.add_argument("--json", action="store_true", help="print one JSON document to stdout", **kw)
        f.add_argument("--threads", type=int, help="worker threads (results do not depend on it)",
                       **(kw or {"default": os.cpu_count() or 1}))
        f.add_argument("-v", "--verbose", action="store_true", help="progress on stderr (or set ASSEMBLY_MODES_VERBOSE=1)",
                       **(kw or {"default": os.environ.get("ASSEMBLY_MODES_VERBOSE", "") not in ("", "0")}))
        return f

    common = flags(True)
    p = _Parser(prog="assembly-modes", description="Assembly modes of rigid 11-bar linkages.", parents=[flags(False)])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    topo = sub.add_parser("topology", help="describe a built-in topology", parents=[common])
    topo_sub = topo.add_subparsers(dest="action", required=True, parser_class=_Parser)
    show = topo_sub.add_parser("show", parents=[common])
    show.add_argument("id", type=_topology)
    show.set_defaults(func=cmd_topology)

    b = sub.add_parser("bounds", help="closed-form bounds for n vertices", parents=[common])
    b.add_argument("--n", type=int, required=True)
    b.set_defaults(func=cmd_bounds)

    sy = sub.add_parser("system", help="minor systems", parents=[common])
    sy_sub = sy.add_subparsers(dest="action", required=True, parser_class=_Parser)
    build = sy_sub.add_parser("build", parents=[common])
    build.add_argument("--topology", type=_topology, required=True)
    build.add_argument("--enumerate", action="store_true", help="list every certified system with its mixed volume")
    build.add_argument("--out")
    build.set_defaults(func=cmd_system)

    mv = sub.add_parser("mixed-volume", help="mixed volume of the counting system", parents=[common])
    mv.add_argument("--topology", type=_topology, required=True)
    mv.set_defaults(func=cmd_mixed_volume)

    for name, func, helptext in (
        ("count", cmd_count, "number N of real positive solutions"),
        ("oracle", cmd_oracle, "coordinate-formulation cross-check"),
        ("realize", cmd_realize, "draw embeddable solutions as SVG"),
    ):
        sp = sub.add_parser(name, help=helptext, parents=[common])
        sp.add_argument("--topology", type=_topology, default=TopologyId.V17)
        sp.add_argument("--lengths", required=True)
        sp.add_argument("--seed", type=int, default=0)
        if name == "realize":
            sp.add_argument("--out", required=True)
            sp.add_argument("--mirror", action="store_true")
            sp.add_argument("--coords", help="also write embedding coordinates as JSON")
        sp.set_defaults(func=func)

    op = sub.add_parser("optimize", help="search for lengths with many modes", parents=[common])
    op.add_argument("--method", choices=METHODS, required=True)
    op.add_argument("--budget", type=int, default=600)
    op.add_argument("--runs", type=int, default=10)
    op.add_argument("--seed", type=int, default=0, help="run r uses seed + r")
    op.add_argument("--fixed-value", type=int, default=100)
    op.add_argument("--no-memo", action="store_true", help="score repeated candidates again")
    op.add_argument("--out", help="CSV run log")
    op.add_argument("--trajectories", help="JSON file with every evaluation")
    op.set_defaults(func=cmd_optimize)
    return p


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    config = {k: (v.value if isinstance(v, TopologyId) else v) for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(command=list(sys.argv[1:] if argv is None else argv), config=config,
                           seed=getattr(args, "seed", None), started=_now())
    try:
        result, lines = args.func(args, manifest)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write_manifests(manifest)
    if args.json:
        doc = {"command": args.command, "result": result, "manifest": manifest.to_dict()}
        print(json.dumps(doc, indent=2, default=str))
    else:
        print("\n".join(lines))
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
