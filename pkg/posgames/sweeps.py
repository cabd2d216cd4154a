"""
Randomized and exhaustive property suites.

Each suite returns a ClaimReport; one ClaimResult per sampled board, so a failing
sample carries the board as its counterexample detail.
"""

from __future__ import annotations

import itertools
import os
import sys
from datetime import datetime, timezone
from typing import Callable, Dict, Iterator, List, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import BudgetExceeded
from .geography import GeoInstance, GeoPlayer, optimal_oracle, solve_geo, validate_geo
from .hypergraph import Hypergraph, Outcome, Pairing, Player, dump_json, greedy_pairs_mb, is_pairing, uniformize_mb
from .reduction import ClaimReport, Variant, reduce
from .solvers import NODE_BUDGET, SearchRules, solve_mb, solve_mb_against_pairing, solve_mm
from .strategies import verify_mb_strategy


DESK_VERTICES = int(os.environ.get("POSGAMES_DESK_VERTICES", "18"))
SUITES = ("uniformize", "greedy", "pairing", "stealing", "rules", "monotone", "tiny")


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _log(msg: str) -> None:
    print(f"[{_now_iso()}] [sweep] {msg}", file=sys.stderr)


def _vertex_names(n: int) -> List[str]:
    return [f"v{i:02d}" for i in range(n)]


def random_board(rng: np.random.Generator, n_vertices: int, n_edges: int, min_size: int = 1, max_size: int = 4) -> Hypergraph:
    names = _vertex_names(n_vertices)
    edges = []
    for _ in range(n_edges):
        size = int(rng.integers(min_size, min(max_size, n_vertices) + 1))
        members = rng.choice(n_vertices, size=size, replace=False)
        edges.append([names[int(i)] for i in members])
    return Hypergraph.build(names, edges)


def random_paired_board(rng: np.random.Generator, n_pairs: int, n_edges: int, extra: int = 2) -> Tuple[Hypergraph, Pairing]:
    """Every edge contains one of the planted pairs, so the planted pairs form a pairing."""
    names = _vertex_names(2 * n_pairs)
    pairs = [(names[2 * i], names[2 * i + 1]) for i in range(n_pairs)]
    edges = []
    for _ in range(n_edges):
        p = pairs[int(rng.integers(0, n_pairs))]
        k = int(rng.integers(0, extra + 1))
        others = [v for v in names if v not in p]
        chosen = rng.choice(len(others), size=min(k, len(others)), replace=False)
        edges.append(list(p) + [others[int(i)] for i in chosen])
    return Hypergraph.build(names, edges), Pairing.of(pairs)


def _with_greedy_pair(rng: np.random.Generator, board: Hypergraph) -> Hypergraph:
    """Add a fresh vertex y and the edge {x, y}, which makes (x, y) a greedy pair."""
    x = board.vertices[int(rng.integers(0, len(board.vertices)))]
    y = f"v{len(board.vertices):02d}"
    return Hypergraph.build(board.vertices + (y,), [list(e) for e in board.edges] + [[x, y]])


def _board_text(board: Hypergraph) -> str:
    return dump_json(board.to_json()).replace("\n", "").replace("  ", "")


def uniformize_suite(samples: int, seed: int, budget: int = NODE_BUDGET) -> ClaimReport:
    report = ClaimReport("sweep-uniformize")
    rng = np.random.default_rng(seed)
    skipped = 0
    for i in range(samples):
        board = random_board(rng, int(rng.integers(4, 9)), int(rng.integers(1, 5)), min_size=2, max_size=4)
        wide = uniformize_mb(board, 4)
        if len(wide.vertices) > 16:
            skipped += 1
            continue
        ok = solve_mb(board, budget) == solve_mb(wide, budget)
        report.add("uniformize-preserves-mb", f"sample {i}", ok, "" if ok else _board_text(board))
    report.stats.update({"samples": samples, "skipped": skipped})
    return report


def greedy_suite(samples: int, seed: int, budget: int = NODE_BUDGET) -> ClaimReport:
    report = ClaimReport("sweep-greedy")
    rng = np.random.default_rng(seed)
    pairs_checked = 0
    for i in range(samples):
        board = _with_greedy_pair(rng, random_board(rng, int(rng.integers(4, 12)), int(rng.integers(2, 7))))
        base = solve_mb(board, budget)
        for x, y in greedy_pairs_mb(board):
            pairs_checked += 1
            ok = solve_mb(board, budget, maker=(x,), breaker=(y,)) == base
            report.add("greedy-round-preserves-mb", f"sample {i} ({x},{y})", ok, "" if ok else _board_text(board))
    report.stats.update({"samples": samples, "greedy_pairs": pairs_checked})
    return report


def pairing_suite(samples: int, seed: int, budget: int = NODE_BUDGET) -> ClaimReport:
    report = ClaimReport("sweep-pairing")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        board, pairing = random_paired_board(rng, int(rng.integers(2, 7)), int(rng.integers(1, 7)))
        subject = f"sample {i}"
        report.add("planted-pairing-valid", subject, is_pairing(board, pairing).ok)
        report.add("pairing-implies-breaker-win", subject, solve_mb(board, budget) is Outcome.BREAKER_WIN)
        report.add("pairing-move-never-loses", subject, solve_mb_against_pairing(board, pairing, budget).outcome is Outcome.BREAKER_WIN)
        report.add("pairing-implies-no-fp-win", subject, solve_mm(board, budget) is not Outcome.FP_WIN)
    report.stats["samples"] = samples
    return report


def stealing_suite(samples: int, seed: int, budget: int = NODE_BUDGET) -> ClaimReport:
    """No initial position is a second-player win; a Breaker win in MB is a draw in MM."""
    report = ClaimReport("sweep-stealing")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        board = random_board(rng, int(rng.integers(3, 11)), int(rng.integers(1, 7)))
        mm = solve_mm(board, budget)
        report.add("no-sp-win", f"sample {i}", mm is not Outcome.SP_WIN, "" if mm is not Outcome.SP_WIN else _board_text(board))
        if solve_mb(board, budget) is Outcome.BREAKER_WIN:
            report.add("mb-breaker-win-is-mm-draw", f"sample {i}", mm is Outcome.DRAW)
    report.stats["samples"] = samples
    return report


_TOGGLES = {
    "no-forced-singletons": SearchRules(forced_singletons=False),
    "no-double-threat": SearchRules(double_threat=False),
    "no-dead-vertices": SearchRules(dead_vertices=False),
    "plain": SearchRules(False, False, False),
}


def rules_suite(samples: int, seed: int, budget: int = NODE_BUDGET) -> ClaimReport:
    report = ClaimReport("sweep-rules")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        board = random_board(rng, int(rng.integers(3, 10)), int(rng.integers(1, 6)))
        mb, mm = solve_mb(board, budget), solve_mm(board, budget)
        for name, rules in _TOGGLES.items():
            same = solve_mb(board, budget, rules=rules) == mb and solve_mm(board, budget, rules=rules) == mm
            report.add("reduction-preserves-outcome", f"sample {i} {name}", same, "" if same else _board_text(board))
    report.stats["samples"] = samples
    return report


def monotone_suite(samples: int, seed: int, budget: int = NODE_BUDGET) -> ClaimReport:
    report = ClaimReport("sweep-monotone")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        board = random_board(rng, int(rng.integers(3, 11)), int(rng.integers(1, 6)))
        extra = random_board(rng, len(board.vertices), 1)
        bigger = Hypergraph(board.vertices, board.edges | extra.edges)
        if solve_mb(board, budget) is Outcome.MAKER_WIN:
            ok = solve_mb(bigger, budget) is Outcome.MAKER_WIN
            report.add("edge-addition-keeps-maker-win", f"sample {i}", ok, "" if ok else _board_text(bigger))
    report.stats["samples"] = samples
    return report


def _digraph_key(inst: GeoInstance) -> nx.DiGraph:
    g = inst.digraph()
    nx.set_node_attributes(g, {n: n == inst.start for n in inst.nodes}, "start")
    return g


def _same_start(a: dict, b: dict) -> bool:
    return a["start"] == b["start"]


def tiny_instances(max_nodes: int) -> Iterator[GeoInstance]:
    """Validated instances with up to max_nodes nodes, one per isomorphism class fixing s."""
    found: List[nx.DiGraph] = []
    for n in range(2, max_nodes + 1):
        nodes = ["s"] + [f"v{i}" for i in range(1, n)]
        candidates = [(t, h) for t in nodes for h in nodes if t != h and h != "s"]
        for k in range(1, len(candidates) + 1):
            for chosen in itertools.combinations(candidates, k):
                arcs = [(t, h, chr(ord("a") + j)) for j, (t, h) in enumerate(chosen)]
                inst = GeoInstance.build(arcs, "s", nodes)
                if not validate_geo(inst).ok:
                    continue
                g = _digraph_key(inst)
                if any(nx.is_isomorphic(g, h, node_match=_same_start) for h in found):
                    continue
                found.append(g)
                yield inst


def tiny_suite(max_nodes: int = 3, budget: int = NODE_BUDGET) -> ClaimReport:
    """Geography winner against the strategy-verified reduced-game winner, per tiny instance."""
    report = ClaimReport("sweep-tiny")
    count = 0
    for inst in tiny_instances(max_nodes):
        count += 1
        arcs = " ".join(f"{a.tail}>{a.head}" for a in inst.arcs)
        winner = solve_geo(inst)
        red = reduce(inst, Variant.RANK4)
        side = Player.MAKER if winner is GeoPlayer.ALICE else Player.BREAKER
        verified = verify_mb_strategy(red, side, optimal_oracle(inst), budget)
        report.add("strategy-verified-winner", f"{arcs} ({winner.value})", verified.ok)
        if len(red.board.vertices) <= DESK_VERTICES:
            mb = solve_mb(red.board, budget)
            want = Outcome.MAKER_WIN if winner is GeoPlayer.ALICE else Outcome.BREAKER_WIN
            report.add("solver-agrees", f"{arcs} ({winner.value})", mb is want, mb.value)
        _log(f"tiny: {arcs} -> {winner.value}")
    report.stats["instances"] = count
    return report


_RANDOM_SUITES: Dict[str, Callable[[int, int, int], ClaimReport]] = {
    "uniformize": uniformize_suite,
    "greedy": greedy_suite,
    "pairing": pairing_suite,
    "stealing": stealing_suite,
    "rules": rules_suite,
    "monotone": monotone_suite,
}


def run_suite(name: str, samples: int, seed: int, budget: int = NODE_BUDGET, max_nodes: int = 3) -> ClaimReport:
    if name == "tiny":
        return tiny_suite(max_nodes, budget)
    _log(f"{name}: {samples} samples, seed {seed}")
    try:
        return _RANDOM_SUITES[name](samples, seed, budget)
    except BudgetExceeded:
        _log(f"{name}: budget exhausted")
        raise


def run_suites(names: Sequence[str], samples: int, seed: int, budget: int = NODE_BUDGET, max_nodes: int = 3) -> ClaimReport:
    report = ClaimReport("sweep")
    for name in names:
        part = run_suite(name, samples, seed, budget, max_nodes)
        report.extend(part)
    return report
