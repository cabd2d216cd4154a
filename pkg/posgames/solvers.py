"""Exact Maker-Breaker and Maker-Maker solvers over bitmask positions."""

from __future__ import annotations

import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded, PreconditionError
from .hypergraph import Hypergraph, MBPosition, Outcome, Pairing, Player, is_pairing, pairing_move


NODE_BUDGET = int(os.environ.get("POSGAMES_NODE_BUDGET", "1000000000"))
PROGRESS_EVERY = int(os.environ.get("POSGAMES_PROGRESS_EVERY", "0"))


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _log(msg: str) -> None:
    print(f"[{_now_iso()}] {msg}", file=sys.stderr)


@dataclass(frozen=True)
class SearchRules:
    """Mandatory reductions applied before branching; each may be switched off."""

    forced_singletons: bool = True
    double_threat: bool = True
    dead_vertices: bool = True


@dataclass(frozen=True)
class SolveReport:
    outcome: Outcome
    nodes: int
    table_size: int
    pv: Tuple[str, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"outcome": self.outcome.value, "nodes": self.nodes, "table_size": self.table_size, "pv": list(self.pv)}


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class _Search:
    """Shared plumbing: vertex indexing, node budget, progress lines, the table."""

    name = "search"

    def __init__(self, board: Hypergraph, budget: int, rules: SearchRules) -> None:
        self.board = board
        self.budget = budget
        self.rules = rules
        self.index = {v: i for i, v in enumerate(board.vertices)}
        self.edges = sorted({self.mask(e) for e in board.edges})
        self.full = (1 << len(board.vertices)) - 1
        self.nodes = 0
        self.table: Dict[Tuple[int, int], Any] = {}
        self._lock = threading.Lock()

    def mask(self, vertices: Iterable[str]) -> int:
        m = 0
        for v in vertices:
            if v not in self.index:
                raise PreconditionError(f"pick {v} is not a board vertex")
            m |= 1 << self.index[v]
        return m

    def name_of(self, bit: int) -> str:
        return self.board.vertices[bit]

    def expand(self) -> None:
        with self._lock:
            self.nodes += 1
            n = self.nodes
        if n > self.budget:
            raise BudgetExceeded(self.name, n)
        if PROGRESS_EVERY and n % PROGRESS_EVERY == 0:
            _log(f"{self.name}: {n} nodes, table {len(self.table)}")

    def start_masks(self, first: Sequence[str], second: Sequence[str]) -> Tuple[int, int]:
        a, b = self.mask(first), self.mask(second)
        if a & b:
            raise PreconditionError("starting pick sets overlap")
        if len(first) - len(second) not in (0, 1):
            raise PreconditionError("starting picks do not alternate")
        return a, b


class MBSolver(_Search):
    """
    Memoized AND/OR search. The table maps (maker_mask, breaker_mask) to True when
    Maker wins; the side to move follows from the pick counts.
    """

    name = "solve_mb"

    def _live(self, m: int, b: int) -> List[int]:
        return [e & ~m for e in self.edges if not e & b]

    def maker_wins(self, m: int, b: int) -> bool:
        key = (m, b)
        hit = self.table.get(key)
        if hit is not None:
            return hit
        self.expand()
        result = self._evaluate(m, b)
        return self.table.setdefault(key, result)

    def _children(self, m: int, b: int) -> Tuple[Optional[bool], List[int]]:
        """Either a decided result, or the candidate bits for the side to move."""
        live = self._live(m, b)
        if 0 in live:
            return True, []
        if not live:
            return False, []
        free = self.full & ~(m | b)
        if not free:
            return False, []
        singles = sorted({e for e in live if e & (e - 1) == 0})
        maker_turn = bin(m).count("1") == bin(b).count("1")
        if maker_turn:
            if self.rules.forced_singletons and singles:
                return True, []
        else:
            if self.rules.double_threat and len(singles) >= 2:
                return True, []
            if self.rules.forced_singletons and len(singles) == 1:
                return None, _bits(singles[0])
        candidates = free
        if self.rules.dead_vertices:
            alive = 0
            for e in live:
                alive |= e
            if alive & free:
                candidates = alive & free
        return None, _bits(candidates)

    def _evaluate(self, m: int, b: int) -> bool:
        decided, moves = self._children(m, b)
        if decided is not None:
            return decided
        if bin(m).count("1") == bin(b).count("1"):
            return any(self.maker_wins(m | (1 << i), b) for i in moves)
        return all(self.maker_wins(m, b | (1 << i)) for i in moves)

    def root(self, m: int, b: int, workers: int) -> bool:
        if workers <= 1:
            return self.maker_wins(m, b)
        decided, moves = self._children(m, b)
        if decided is not None:
            return decided
        maker_turn = bin(m).count("1") == bin(b).count("1")
        children = [(m | (1 << i), b) if maker_turn else (m, b | (1 << i)) for i in moves]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda c: self.maker_wins(*c), children))
        result = any(values) if maker_turn else all(values)
        return self.table.setdefault((m, b), result)

    def principal_variation(self, m: int, b: int) -> Tuple[str, ...]:
        line: List[str] = []
        while True:
            live = self._live(m, b)
            if 0 in live or not live or not self.full & ~(m | b):
                return tuple(line)
            maker_turn = bin(m).count("1") == bin(b).count("1")
            singles = sorted({e for e in live if e & (e - 1) == 0})
            if maker_turn and singles:
                return tuple(line + [self.name_of(_bits(singles[0])[0])])
            if not maker_turn and len(singles) >= 2:
                block, fill = _bits(singles[0])[0], _bits(singles[1])[0]
                return tuple(line + [self.name_of(block), self.name_of(fill)])
            _, moves = self._children(m, b)
            if not moves:
                return tuple(line)
            want = self.maker_wins(m, b)
            pick = moves[0]
            for i in moves:
                child = (m | (1 << i), b) if maker_turn else (m, b | (1 << i))
                if self.maker_wins(*child) == want:
                    pick = i
                    break
            line.append(self.name_of(pick))
            if maker_turn:
                m |= 1 << pick
            else:
                b |= 1 << pick


def solve_mb_report(
    board: Hypergraph,
    budget: int = NODE_BUDGET,
    maker: Sequence[str] = (),
    breaker: Sequence[str] = (),
    rules: SearchRules = SearchRules(),
    workers: int = 1,
) -> SolveReport:
    solver = MBSolver(board, budget, rules)
    m, b = solver.start_masks(maker, breaker)
    win = solver.root(m, b, workers)
    pv = solver.principal_variation(m, b)
    outcome = Outcome.MAKER_WIN if win else Outcome.BREAKER_WIN
    _log(f"solve_mb: {outcome.value} after {solver.nodes} nodes, table {len(solver.table)}")
    return SolveReport(outcome, solver.nodes, len(solver.table), pv)


def solve_mb(board: Hypergraph, budget: int = NODE_BUDGET, **kwargs: Any) -> Outcome:
    return solve_mb_report(board, budget, **kwargs).outcome


class MMSolver(_Search):
    """
    Exact negamax for the Maker-Maker game. Values are relative to the side to
    move: 1 win, 0 draw, -1 loss. A pick wins when it completes an edge the
    opponent has not touched.
    """

    name = "solve_mm"

    def value(self, mine: int, theirs: int) -> int:
        key = (mine, theirs)
        hit = self.table.get(key)
        if hit is not None:
            return hit
        self.expand()
        result = self._evaluate(mine, theirs)
        return self.table.setdefault(key, result)

    def _moves(self, mine: int, theirs: int) -> Tuple[Optional[int], List[int]]:
        mine_live = [e & ~mine for e in self.edges if not e & theirs]
        their_live = [e & ~theirs for e in self.edges if not e & mine]
        if not mine_live and not their_live:
            return 0, []
        free = self.full & ~(mine | theirs)
        if not free:
            return 0, []
        if self.rules.forced_singletons and any(e & (e - 1) == 0 for e in mine_live):
            return 1, []
        threats = sorted({e for e in their_live if e & (e - 1) == 0})
        if self.rules.double_threat and len(threats) >= 2 and not any(e & (e - 1) == 0 for e in mine_live):
            return -1, []
        if self.rules.forced_singletons and len(threats) == 1:
            return None, _bits(threats[0])
        candidates = free
        if self.rules.dead_vertices:
            alive = 0
            for e in mine_live + their_live:
                alive |= e
            if alive & free:
                candidates = alive & free
        return None, _bits(candidates)

    def _completes(self, mine: int, theirs: int, bit: int) -> bool:
        after = mine | (1 << bit)
        return any(e & (1 << bit) and e & after == e and not e & theirs for e in self.edges)

    def _evaluate(self, mine: int, theirs: int) -> int:
        decided, moves = self._moves(mine, theirs)
        if decided is not None:
            return decided
        best = -2
        for i in moves:
            if self._completes(mine, theirs, i):
                return 1
            score = -self.value(theirs, mine | (1 << i))
            if score > best:
                best = score
                if best == 1:
                    break
        return best

    def principal_variation(self, mine: int, theirs: int) -> Tuple[str, ...]:
        line: List[str] = []
        while True:
            decided, moves = self._moves(mine, theirs)
            if decided == 1:
                singles = [e & ~mine for e in self.edges if not e & theirs and (e & ~mine) & ((e & ~mine) - 1) == 0]
                return tuple(line + [self.name_of(_bits(min(singles))[0])])
            if not moves:
                return tuple(line)
            target = self.value(mine, theirs)
            pick = moves[0]
            for i in moves:
                if self._completes(mine, theirs, i):
                    return tuple(line + [self.name_of(i)])
                if -self.value(theirs, mine | (1 << i)) == target:
                    pick = i
                    break
            line.append(self.name_of(pick))
            mine, theirs = theirs, mine | (1 << pick)


_MM_OUTCOME = {1: Outcome.FP_WIN, 0: Outcome.DRAW, -1: Outcome.SP_WIN}


def solve_mm_report(
    board: Hypergraph,
    budget: int = NODE_BUDGET,
    fp: Sequence[str] = (),
    sp: Sequence[str] = (),
    rules: SearchRules = SearchRules(),
    workers: int = 1,
) -> SolveReport:
    solver = MMSolver(board, budget, rules)
    f, s = solver.start_masks(fp, sp)
    for e in solver.edges:
        if e & f == e and not e & s:
            return SolveReport(Outcome.FP_WIN, 0, 0, ())
        if e & s == e and not e & f:
            return SolveReport(Outcome.SP_WIN, 0, 0, ())
    fp_turn = len(fp) == len(sp)
    mine, theirs = (f, s) if fp_turn else (s, f)
    if workers > 1:
        decided, moves = solver._moves(mine, theirs)
        if decided is None:
            # Children first, in parallel; the root then reads them from the table.
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(lambda i: solver.value(theirs, mine | (1 << i)), moves))
    v = solver.value(mine, theirs)
    pv = solver.principal_variation(mine, theirs)
    outcome = _MM_OUTCOME[v if fp_turn else -v]
    _log(f"solve_mm: {outcome.value} after {solver.nodes} nodes, table {len(solver.table)}")
    return SolveReport(outcome, solver.nodes, len(solver.table), pv)


def solve_mm(board: Hypergraph, budget: int = NODE_BUDGET, **kwargs: Any) -> Outcome:
    return solve_mm_report(board, budget, **kwargs).outcome


def solve_mb_against_pairing(board: Hypergraph, pairing: Pairing, budget: int = NODE_BUDGET) -> SolveReport:
    """
    Every Maker line against Breaker's pairing_move. BreakerWin unless some line
    fills an edge, in which case the pv is that line.
    """
    check = is_pairing(board, pairing)
    if not check:
        raise PreconditionError(f"not a pairing of the board: {check.reason} {list(check.detail)}")
    seen: Dict[Tuple[frozenset, frozenset], Optional[Tuple[str, ...]]] = {}
    nodes = 0

    def explore(pos: MBPosition) -> Optional[Tuple[str, ...]]:
        nonlocal nodes
        key = (pos.maker_picks, pos.breaker_picks)
        if key in seen:
            return seen[key]
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded("solve_mb_against_pairing", nodes)
        updated = pos.updated()
        free = pos.unpicked()
        if updated.has_empty_edge():
            found: Optional[Tuple[str, ...]] = pos.history
        elif not free:
            found = None
        elif pos.to_move is Player.MAKER:
            found = None
            for v in free:
                found = explore(pos.play(v))
                if found is not None:
                    break
        else:
            found = explore(pos.play(pairing_move(board, pairing, pos.last_pick, free)))
        seen[key] = found
        return found

    line = explore(MBPosition(board))
    outcome = Outcome.BREAKER_WIN if line is None else Outcome.MAKER_WIN
    return SolveReport(outcome, nodes, len(seen), line or ())
