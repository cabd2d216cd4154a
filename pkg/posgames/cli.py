"""
posgames command line.

Artifacts (JSON, DOT, PNG) go to files or standard output; diagnostics go to
standard error. Exit codes: 0 pass, 1 claim failure, 2 input error, 3 budget.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from .errors import BudgetExceeded, InputError
from .geography import GEO_STATE_BUDGET, GeoInstance, GeoPlayer, GeoSolver, classify_nodes, optimal_oracle, to_dot, validate_geo
from .hypergraph import Hypergraph, Outcome, Player, dump_json, find_pairing, is_pairing
from .plots import make_scaling_plot, scaling_points
from .reduction import ClaimReport, Variant, check_gadget_claims, load_variant, reduce, size_bounds
from .solvers import NODE_BUDGET, solve_mb, solve_mb_report, solve_mm, solve_mm_report
from .strategies import check_punishments, verify_mb_strategy, verify_mm_claims
from .sweeps import DESK_VERTICES, SUITES, run_suites


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _log(msg: str) -> None:
    print(f"[{_now_iso()}] [cli] {msg}", file=sys.stderr)


def _load_json(path: str) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _emit(data: Any, out: Optional[str] = None) -> None:
    text = dump_json(data)
    if out:
        Path(out).write_text(text)
        _log(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _validate_command(args: argparse.Namespace) -> int:
    inst = GeoInstance.from_json(_load_json(args.input))
    report = validate_geo(inst)
    _emit(report.to_json())
    if args.dot:
        types = classify_nodes(inst) if report.ok else None
        Path(args.dot).write_text(to_dot(inst, types))
    for v in report.violations:
        _log(f"{v.condition}: {v.detail}")
    return 0 if report.ok else 2


def _solve_geo_command(args: argparse.Namespace) -> int:
    inst = GeoInstance.from_json(_load_json(args.input))
    solver = GeoSolver(inst, args.budget)
    winner = solver.winner()
    _emit({"winner": winner.value, "states": solver.table_size})
    return 0


def _reduce_command(args: argparse.Namespace) -> int:
    inst = GeoInstance.from_json(_load_json(args.input))
    red = reduce(inst, load_variant(args.variant))
    _emit(red.board.to_json(), args.output)
    if args.meta:
        _emit(red.metadata_json(), args.meta)
    if args.dot:
        Path(args.dot).write_text(to_dot(inst, dict(red.types)))
    bounds = size_bounds(red)
    _log(f"reduced to {bounds['vertices']} vertices, {bounds['edges']} edges")
    if args.output:
        _emit(bounds)
    return 0


def _parse_moves(raw: Optional[str]) -> List[str]:
    if not raw:
        return []
    return [m.strip() for m in raw.split(",") if m.strip()]


def _solve_command(args: argparse.Namespace) -> int:
    board = Hypergraph.from_json(_load_json(args.input))
    moves = _parse_moves(args.moves)
    first, second = moves[0::2], moves[1::2]
    if args.convention == "mb":
        report = solve_mb_report(board, args.budget, maker=first, breaker=second, workers=args.workers)
    else:
        report = solve_mm_report(board, args.budget, fp=first, sp=second, workers=args.workers)
    _emit(report.to_json())
    return 0


def _pair_command(args: argparse.Namespace) -> int:
    board = Hypergraph.from_json(_load_json(args.input))
    search = find_pairing(board, args.budget)
    out = search.to_json()
    if search.pairing is not None:
        out["check"] = is_pairing(board, search.pairing).to_json()
    _emit(out)
    if not search.complete:
        _log("pairing search stopped at the budget")
        return 3
    return 0


def _timed(timings: Dict[str, float], name: str, fn: Callable[[], ClaimReport]) -> ClaimReport:
    started = time.perf_counter()
    report = fn()
    timings[name] = round(time.perf_counter() - started, 3)
    _log(f"{name}: ok={report.ok} in {timings[name]}s")
    return report


def _verify_mb(inst: GeoInstance, budget: int, workers: int, timings: Dict[str, float]) -> ClaimReport:
    report = ClaimReport("mb")
    winner = GeoSolver(inst).winner()
    red = reduce(inst, Variant.RANK4)
    oracle = optimal_oracle(inst)
    bounds = size_bounds(red)
    report.add("size-bounds", inst.start, bounds["ok"], f"|V|={bounds['vertices']} |E|={bounds['edges']}")

    win_side = Player.MAKER if winner is GeoPlayer.ALICE else Player.BREAKER
    lose_side = win_side.other
    report.extend(_timed(timings, f"strategy-{win_side.value}", lambda: verify_mb_strategy(red, win_side, oracle, budget)))
    loser = _timed(timings, f"strategy-{lose_side.value}", lambda: verify_mb_strategy(red, lose_side, oracle, budget))
    report.add("losing-side-refuted", lose_side.value, not loser.ok, "" if not loser.ok else "losing strategy survived")
    report.extend(_timed(timings, "punishments", lambda: check_punishments(red)))

    if len(red.board.vertices) <= DESK_VERTICES:
        started = time.perf_counter()
        mb = solve_mb(red.board, budget, workers=workers)
        timings["solve_mb"] = round(time.perf_counter() - started, 3)
        want = Outcome.MAKER_WIN if winner is GeoPlayer.ALICE else Outcome.BREAKER_WIN
        report.add("solver-matches-geography", winner.value, mb is want, mb.value)
    report.stats["geography_winner"] = winner.value
    return report


def _verify_mm(inst: GeoInstance, budget: int, workers: int, timings: Dict[str, float]) -> ClaimReport:
    report = ClaimReport("mm")
    winner = GeoSolver(inst).winner()
    oracle = optimal_oracle(inst)
    for variant in (Variant.RANK4, Variant.MM_UNIFORM):
        red = reduce(inst, variant)
        part = _timed(timings, f"mm-{variant.value}", lambda: verify_mm_claims(red, oracle))
        report.extend(part)
        fp_wins = bool(part.stats.get("maker_wins_at_end"))
        report.add("mm-end-matches-geography", variant.value, fp_wins == (winner is GeoPlayer.ALICE), winner.value)
        if variant is Variant.RANK4 and len(red.board.vertices) <= DESK_VERTICES:
            started = time.perf_counter()
            mm = solve_mm(red.board, budget, workers=workers)
            timings["solve_mm"] = round(time.perf_counter() - started, 3)
            want = Outcome.FP_WIN if winner is GeoPlayer.ALICE else Outcome.DRAW
            report.add("mm-solver-matches-geography", winner.value, mm is want, mm.value)
    return report


def _verify_command(args: argparse.Namespace) -> int:
    inst = GeoInstance.from_json(_load_json(args.input))
    suites = ["gadgets", "mb", "mm"] if args.suite == "all" else [args.suite]
    report = ClaimReport(f"verify-{args.suite}")
    timings: Dict[str, float] = {}
    for suite in suites:
        if suite == "gadgets":
            report.extend(_timed(timings, "gadgets", check_gadget_claims))
        elif suite == "mb":
            report.extend(_verify_mb(inst, args.budget, args.workers, timings))
        else:
            report.extend(_verify_mm(inst, args.budget, args.workers, timings))
    if args.timings:
        report.stats["timings"] = timings
    _emit(report.to_json(), args.output)
    for failure in report.failures():
        _log(f"FAILED {failure.claim} [{failure.subject}] {failure.detail}")
    return 0 if report.ok else 1


def _sweep_command(args: argparse.Namespace) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    report = run_suites(names, args.samples, args.seed, args.budget, args.max_nodes)
    _emit(report.to_json(), args.output)
    return 0 if report.ok else 1


def _scaling_command(args: argparse.Namespace) -> int:
    points = scaling_points(args.max_nodes)
    Path(args.output).write_bytes(make_scaling_plot(points))
    _log(f"wrote {args.output}")
    _emit(points)
    return 0


def _add_input(parser: argparse.ArgumentParser, what: str) -> None:
    parser.add_argument("-i", "--input", required=True, help=f"{what} JSON file")


def _add_budget(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget", type=int, default=NODE_BUDGET, help="node budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posgames", description="Positional games workbench.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("validate", help="Check a Geography instance against the restricted class.")
    _add_input(p, "Geography")
    p.add_argument("--dot", help="also write the digraph as DOT")
    p.set_defaults(func=_validate_command)

    p = subparsers.add_parser("solve-geo", help="Solve a Geography instance.")
    _add_input(p, "Geography")
    p.add_argument("--budget", type=int, default=GEO_STATE_BUDGET, help="state budget")
    p.set_defaults(func=_solve_geo_command)

    p = subparsers.add_parser("reduce", help="Build the hypergraph for a Geography instance.")
    _add_input(p, "Geography")
    p.add_argument("--variant", default=Variant.RANK4.value, choices=[v.value for v in Variant])
    p.add_argument("-o", "--output", help="hypergraph JSON (default: stdout)")
    p.add_argument("--meta", help="metadata JSON")
    p.add_argument("--dot", help="typed digraph as DOT")
    p.set_defaults(func=_reduce_command)

    p = subparsers.add_parser("solve", help="Solve a hypergraph game exactly.")
    _add_input(p, "hypergraph")
    p.add_argument("--convention", required=True, choices=["mb", "mm"])
    p.add_argument("--moves", help="comma-separated picks, first mover first")
    p.add_argument("--workers", type=int, default=1)
    _add_budget(p)
    p.set_defaults(func=_solve_command)

    p = subparsers.add_parser("verify", help="Run the claim checks for a Geography instance.")
    _add_input(p, "Geography")
    p.add_argument("--suite", default="all", choices=["gadgets", "mb", "mm", "all"])
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", help="report JSON (default: stdout)")
    _add_budget(p)
    p.set_defaults(func=_verify_command)

    p = subparsers.add_parser("pair", help="Search for a pairing of a hypergraph.")
    _add_input(p, "hypergraph")
    p.add_argument("--budget", type=int, default=1_000_000)
    p.set_defaults(func=_pair_command)

    p = subparsers.add_parser("sweep", help="Run randomized or exhaustive property suites.")
    p.add_argument("--suite", default="all", choices=list(SUITES) + ["all"])
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=3, help="largest tiny instance")
    p.add_argument("-o", "--output", help="report JSON (default: stdout)")
    _add_budget(p)
    p.set_defaults(func=_sweep_command)

    p = subparsers.add_parser("scaling", help="Plot reduced-board size on chain instances.")
    p.add_argument("-o", "--output", required=True, help="PNG file")
    p.add_argument("--max-nodes", type=int, default=12)
    p.set_defaults(func=_scaling_command)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except BudgetExceeded as exc:
        _log(f"budget exhausted: {exc}")
        return 3
    except InputError as exc:
        _log(f"input error: {exc}")
        return 2
