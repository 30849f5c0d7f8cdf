"""Command-line front end: solve, scan, critical-beta, ground, verify, mul.

All subcommands read a graph file (JSON with vertices/edges/bundles), write a
report to stdout as JSON or an aligned table, and exit 0 on success, 1 on
input or precondition errors, 2 when ``--expect-feasible`` is given and the
system is infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .algebra import elem_mul
from .errors import GraphKmsError, InputError, ParseError
from .graph import WeightedGraph, load_graph
from .render import parse_element, render_element
from .solver import (
    DEFAULT_CAP,
    beta_scan,
    critical_beta,
    ground_simplex,
    solve,
)
from .verify import case_coverage, k1_violation_detect, positivity_sample

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2


@dataclass
class RunConfig:
    subcommand: str
    graph_path: str | None = None
    beta: float | None = None
    grid: list[float] = field(default_factory=list)
    tol: float = 1e-9
    seed: int = 0
    fmt: str = "json"
    cap: int = DEFAULT_CAP
    expect_feasible: bool = False
    require_weights_above_one: bool = False
    trials: int = 500
    max_path_length: int = 3
    exprs: tuple[str, str] | None = None

    def validate(self) -> None:
        if self.beta is not None and not self.beta > 0.0:
            raise InputError(f"--beta must be positive, got {self.beta}")
        if self.grid:
            if any(not b > 0.0 for b in self.grid):
                raise InputError("grid values must be positive")
            if any(b2 <= b1 for b1, b2 in zip(self.grid, self.grid[1:])):
                raise InputError("grid must be strictly increasing")
        if self.cap < 1:
            raise InputError(f"--cap must be >= 1, got {self.cap}")
        if not self.tol > 0.0:
            raise InputError(f"--tol must be positive, got {self.tol}")


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--grid expects a:b:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InputError(f"--grid expects numeric a:b:step, got {text!r}") from None
    if step <= 0.0 or stop < start:
        raise InputError(f"--grid needs step > 0 and b >= a, got {text!r}")
    grid = []
    value = start
    while value <= stop + 1e-12:
        grid.append(round(value, 12))
        value += step
    return grid


def _fmt_cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return format(v, ".10g")
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt_cell(x)}" for k, x in v.items())
    if isinstance(v, list):
        return ", ".join(_fmt_cell(x) for x in v)
    return str(v)


def _render_table(data: dict) -> str:
    lines: list[str] = []
    tables: list[tuple[str, list[dict]]] = []
    for key, value in data.items():
        if isinstance(value, list) and value and all(isinstance(r, dict) for r in value):
            tables.append((key, value))
        elif isinstance(value, dict):
            if not value:
                lines.append(f"{key} = {{}}")
            for sub, v in value.items():
                lines.append(f"{key}.{sub} = {_fmt_cell(v)}")
        else:
            lines.append(f"{key} = {_fmt_cell(value)}")
    for name, rows in tables:
        lines.append("")
        lines.append(f"[{name}]")
        headers = list(rows[0].keys())
        cells = [[_fmt_cell(r.get(h)) for h in headers] for r in rows]
        widths = [
            max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(headers)
        ]
        lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
        for row in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        print(_render_table(report))


def _load(config: RunConfig) -> WeightedGraph:
    assert config.graph_path is not None
    return load_graph(
        config.graph_path,
        require_weights_above_one=config.require_weights_above_one,
    )


def cmd_solve(config: RunConfig) -> int:
    g = _load(config)
    report = solve(g, config.beta, cap=config.cap, tol=config.tol)
    _emit(report.to_dict(), config.fmt)
    if config.expect_feasible and not report.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_critical_beta(config: RunConfig) -> int:
    g = _load(config)
    value = critical_beta(g, tol=config.tol)
    _emit({"beta_critical": value, "tol": config.tol}, config.fmt)
    return EXIT_OK


def cmd_scan(config: RunConfig) -> int:
    g = _load(config)
    report = beta_scan(g, config.grid, cap=config.cap)
    _emit(report.to_dict(), config.fmt)
    if config.expect_feasible and not any(r.feasible for r in report.rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_ground(config: RunConfig) -> int:
    g = _load(config)
    report = ground_simplex(g)
    _emit(report.to_dict(), config.fmt)
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    g = _load(config)
    sol = solve(g, config.beta, cap=config.cap, tol=config.tol)
    report: dict = {"beta": config.beta, "feasible": sol.feasible, "seed": config.seed}
    if sol.feasible:
        tau = sol.witness
        coverage = case_coverage(
            g,
            tau,
            config.beta,
            max_path_length=config.max_path_length,
            trials=config.trials,
            seed=config.seed,
        )
        positivity = positivity_sample(
            g,
            tau,
            config.beta,
            max_level=min(config.max_path_length, 2),
            trials=config.trials,
            seed=config.seed,
        )
        report["tau"] = tau.to_dict()
        report["coverage"] = coverage.to_dict()
        report["positivity"] = positivity.to_dict()
        report["k1_violations"] = [
            {"vertex": v, "residual": r}
            for v, r in k1_violation_detect(g, tau, config.beta)
        ]
    _emit(report, config.fmt)
    if config.expect_feasible and not sol.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_mul(config: RunConfig) -> int:
    g = _load(config)
    assert config.exprs is not None
    left = parse_element(g, config.exprs[0])
    right = parse_element(g, config.exprs[1])
    rendered = render_element(elem_mul(left, right))
    if config.fmt == "json":
        _emit({"product": rendered}, "json")
    else:
        print(rendered)
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "critical-beta": cmd_critical_beta,
    "scan": cmd_scan,
    "ground": cmd_ground,
    "verify": cmd_verify,
    "mul": cmd_mul,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="graph file (JSON)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", dest="fmt", choices=("json", "table"), default="json")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="extreme-point enumeration cap")
    p.add_argument("--expect-feasible", action="store_true")
    p.add_argument(
        "--require-weights-above-one",
        action="store_true",
        help="reject the graph unless every weight exceeds 1",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphkms",
        description="KMS and ground states for weighted graph algebras",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("solve", help="decide and describe admissible traces at one beta")
    _add_common(p)
    p.add_argument("--beta", type=float, required=True)

    p = sub.add_parser("critical-beta", help="least beta with unit spectral radius / series")
    _add_common(p)

    p = sub.add_parser("scan", help="solve over a beta grid")
    _add_common(p)
    p.add_argument("--grid", required=True, help="a:b:step")

    p = sub.add_parser("ground", help="singular vertices and the ground-state simplex")
    _add_common(p)

    p = sub.add_parser("verify", help="identity coverage, positivity, violation detection")
    _add_common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--max-path-length", type=int, default=3)

    p = sub.add_parser("mul", help="multiply two rendered algebra expressions")
    _add_common(p)
    p.add_argument("left", help="first expression, e.g. 's[e] s*[f]'")
    p.add_argument("right", help="second expression")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(
        subcommand=args.subcommand,
        graph_path=args.graph,
        tol=args.tol,
        seed=args.seed,
        fmt=args.fmt,
        cap=args.cap,
        expect_feasible=args.expect_feasible,
        require_weights_above_one=args.require_weights_above_one,
    )
    if hasattr(args, "beta"):
        config.beta = args.beta
    if hasattr(args, "grid"):
        config.grid = _parse_grid(args.grid)
    if hasattr(args, "trials"):
        config.trials = args.trials
    if hasattr(args, "max_path_length"):
        config.max_path_length = args.max_path_length
    if hasattr(args, "left"):
        config.exprs = (args.left, args.right)
    config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return _COMMANDS[args.subcommand](config)
    except json.JSONDecodeError as exc:
        print(
            f"graph parse error: line {exc.lineno} column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_INPUT_ERROR
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename!r}: no such file", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ParseError as exc:
        position = f" (column {exc.position + 1})" if exc.position is not None else ""
        print(f"expression parse error{position}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except GraphKmsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
