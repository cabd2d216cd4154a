"""
Hypergraph boards and the two position-update conventions.

Flow:
  - A board is an immutable Hypergraph (sorted vertex ids + a set of frozenset edges).
  - Maker-Breaker positions reduce to one updated family:  {e - M : e & B empty}.
  - Maker-Maker positions reduce to a red family for FP and a blue family for SP.
  - Pairings are disjoint vertex pairs covering every edge; they certify Breaker wins and
    second-player draws and are checked by is_pairing.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import InputError, PreconditionError


Edge = FrozenSet[str]

REASON_OVERLAP = "overlapping pairs"
REASON_OUTSIDE = "vertex outside board"
REASON_UNCOVERED = "uncovered edge"


class Player(str, Enum):
    MAKER = "Maker"
    BREAKER = "Breaker"

    @property
    def other(self) -> "Player":
        return Player.BREAKER if self is Player.MAKER else Player.MAKER


class Seat(str, Enum):
    FP = "FP"
    SP = "SP"


class Outcome(str, Enum):
    MAKER_WIN = "MakerWin"
    BREAKER_WIN = "BreakerWin"
    FP_WIN = "FPWin"
    DRAW = "Draw"
    SP_WIN = "SPWin"


def edge_key(edge: Iterable[str]) -> Tuple[int, Tuple[str, ...]]:
    """Sort key for edges: size first, then lexicographic members."""
    members = tuple(sorted(edge))
    return (len(members), members)


def sorted_edges(edges: Iterable[Edge]) -> List[Tuple[str, ...]]:
    return [tuple(sorted(e)) for e in sorted(edges, key=edge_key)]


def dump_json(obj: Any) -> str:
    """Byte-stable JSON text used for every artifact."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Hypergraph:
    vertices: Tuple[str, ...]
    edges: FrozenSet[Edge]
    _vertex_set: FrozenSet[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        vset = frozenset(self.vertices)
        if len(vset) != len(self.vertices):
            raise InputError("duplicate vertex ids")
        for e in self.edges:
            if not e <= vset:
                raise InputError(f"edge {sorted(e)} leaves the vertex set")
        object.__setattr__(self, "_vertex_set", vset)

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[Iterable[str]]) -> "Hypergraph":
        """
        Construct a fresh board: vertex ids must be nonempty and whitespace-free,
        and no edge may be empty.
        """
        verts = list(vertices)
        for v in verts:
            if not isinstance(v, str) or not v or any(ch.isspace() for ch in v):
                raise InputError(f"bad vertex id {v!r}")
        family = set()
        for e in edges:
            fe = frozenset(e)
            if not fe:
                raise InputError("empty edge on a fresh board")
            family.add(fe)
        return cls(vertices=tuple(sorted(set(verts))), edges=frozenset(family))

    @property
    def vertex_set(self) -> FrozenSet[str]:
        return self._vertex_set

    def rank(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    def is_uniform(self, k: int) -> bool:
        return all(len(e) == k for e in self.edges)

    def has_empty_edge(self) -> bool:
        return frozenset() in self.edges

    def to_json(self) -> Dict[str, Any]:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in sorted_edges(self.edges)]}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Hypergraph":
        try:
            return cls.build(data["vertices"], data["edges"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed hypergraph JSON: {exc}") from exc


def _check_picks(board: Hypergraph, first: Iterable[str], second: Iterable[str]) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    a, b = frozenset(first), frozenset(second)
    if a & b:
        raise PreconditionError(f"pick sets overlap on {sorted(a & b)}")
    outside = (a | b) - board.vertex_set
    if outside:
        raise PreconditionError(f"picks outside the board: {sorted(outside)}")
    return a, b


def _prune_supersets(edges: FrozenSet[Edge]) -> FrozenSet[Edge]:
    return frozenset(e for e in edges if not any(f < e for f in edges))


def mb_update(board: Hypergraph, maker: Iterable[str], breaker: Iterable[str], prune_supersets: bool = False) -> Hypergraph:
    """
    E(H') = {e - M : e in E(H), e & B empty}; V(H') = V - (M | B).
    The result may contain the empty edge (Maker has filled something).
    """
    m, b = _check_picks(board, maker, breaker)
    edges = frozenset(e - m for e in board.edges if not (e & b))
    if prune_supersets:
        edges = _prune_supersets(edges)
    gone = m | b
    return Hypergraph(vertices=tuple(v for v in board.vertices if v not in gone), edges=edges)


def mm_update(board: Hypergraph, fp: Iterable[str], sp: Iterable[str]) -> Tuple[FrozenSet[Edge], FrozenSet[Edge]]:
    f, s = _check_picks(board, fp, sp)
    red = frozenset(e - f for e in board.edges if not (e & s))
    blue = frozenset(e - s for e in board.edges if not (e & f))
    return red, blue


@dataclass(frozen=True)
class MBPosition:
    """Maker-Breaker position; picks alternate in `history`, Maker first."""

    board: Hypergraph
    history: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.history)) != len(self.history):
            raise PreconditionError("a vertex was picked twice")
        _check_picks(self.board, self.history[0::2], self.history[1::2])

    @property
    def maker_picks(self) -> FrozenSet[str]:
        return frozenset(self.history[0::2])

    @property
    def breaker_picks(self) -> FrozenSet[str]:
        return frozenset(self.history[1::2])

    @property
    def to_move(self) -> Player:
        return Player.MAKER if len(self.history) % 2 == 0 else Player.BREAKER

    @property
    def last_pick(self) -> Optional[str]:
        return self.history[-1] if self.history else None

    def unpicked(self) -> Tuple[str, ...]:
        picked = set(self.history)
        return tuple(v for v in self.board.vertices if v not in picked)

    def updated(self) -> Hypergraph:
        return mb_update(self.board, self.maker_picks, self.breaker_picks)

    def play(self, vertex: str) -> "MBPosition":
        return MBPosition(self.board, self.history + (vertex,))


@dataclass(frozen=True)
class MMPosition:
    board: Hypergraph
    history: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.history)) != len(self.history):
            raise PreconditionError("a vertex was picked twice")
        _check_picks(self.board, self.history[0::2], self.history[1::2])

    @property
    def fp_picks(self) -> FrozenSet[str]:
        return frozenset(self.history[0::2])

    @property
    def sp_picks(self) -> FrozenSet[str]:
        return frozenset(self.history[1::2])

    @property
    def to_move(self) -> Seat:
        return Seat.FP if len(self.history) % 2 == 0 else Seat.SP

    def unpicked(self) -> Tuple[str, ...]:
        picked = set(self.history)
        return tuple(v for v in self.board.vertices if v not in picked)

    def families(self) -> Tuple[FrozenSet[Edge], FrozenSet[Edge]]:
        return mm_update(self.board, self.fp_picks, self.sp_picks)

    def play(self, vertex: str) -> "MMPosition":
        return MMPosition(self.board, self.history + (vertex,))


@dataclass(frozen=True)
class Pairing:
    """
    A set of two-vertex pairs. Construction checks pair size only; disjointness is
    checked by is_disjoint and reported by is_pairing as an overlap.
    """

    pairs: FrozenSet[FrozenSet[str]] = frozenset()

    def __post_init__(self) -> None:
        for p in self.pairs:
            if len(p) != 2:
                raise InputError(f"pair {sorted(p)} does not have exactly two vertices")

    @classmethod
    def of(cls, pairs: Iterable[Iterable[str]]) -> "Pairing":
        return cls(frozenset(frozenset(p) for p in pairs))

    def vertices(self) -> FrozenSet[str]:
        return frozenset(v for p in self.pairs for v in p)

    def uses(self, vertex: str) -> bool:
        return any(vertex in p for p in self.pairs)

    def partner(self, vertex: str) -> Optional[str]:
        for p in self.pairs:
            if vertex in p:
                (other,) = p - {vertex}
                return other
        return None

    def is_disjoint(self) -> bool:
        seen: set = set()
        for p in self.pairs:
            if seen & p:
                return False
            seen |= p
        return True

    def union(self, other: "Pairing") -> "Pairing":
        return Pairing(self.pairs | other.pairs)

    def without(self, pairs: Iterable[FrozenSet[str]]) -> "Pairing":
        return Pairing(self.pairs - frozenset(pairs))

    def restrict_to(self, alive: FrozenSet[str]) -> "Pairing":
        """Keep only pairs whose both members are still unpicked."""
        return Pairing(frozenset(p for p in self.pairs if p <= alive))

    def sorted_pairs(self) -> List[Tuple[str, str]]:
        return sorted(tuple(sorted(p)) for p in self.pairs)

    def to_json(self) -> List[List[str]]:
        return [list(p) for p in self.sorted_pairs()]


@dataclass(frozen=True)
class PairingCheck:
    ok: bool
    reason: Optional[str] = None
    detail: Tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> Dict[str, Any]:
        return {"ok": self.ok, "reason": self.reason, "detail": list(self.detail)}


def is_pairing(board: Hypergraph, candidate: Pairing) -> PairingCheck:
    seen: set = set()
    for p in sorted(candidate.pairs, key=edge_key):
        clash = seen & p
        if clash:
            return PairingCheck(False, REASON_OVERLAP, tuple(sorted(clash)))
        seen |= p
    outside = seen - board.vertex_set
    if outside:
        return PairingCheck(False, REASON_OUTSIDE, tuple(sorted(outside)))
    for e in sorted(board.edges, key=edge_key):
        if not any(p <= e for p in candidate.pairs):
            return PairingCheck(False, REASON_UNCOVERED, tuple(sorted(e)))
    return PairingCheck(True)


def pairing_move(board: Hypergraph, pairing: Pairing, opponent_last: Optional[str], unpicked: Iterable[str]) -> str:
    """
    Breaker's pairing strategy: answer inside the pair, otherwise take the
    lowest-ordered unpicked vertex.
    """
    free = sorted(unpicked)
    if not free:
        raise PreconditionError("no unpicked vertex left")
    if opponent_last is not None:
        partner = pairing.partner(opponent_last)
        if partner is not None and partner in free:
            return partner
    return free[0]


@dataclass(frozen=True)
class PairingSearch:
    pairing: Optional[Pairing]
    complete: bool
    nodes: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "found": self.pairing is not None,
            "pairing": self.pairing.to_json() if self.pairing is not None else None,
            "complete": self.complete,
            "nodes": self.nodes,
        }


class _SearchStopped(Exception):
    pass


def find_pairing(board: Hypergraph, budget: int = 1_000_000) -> PairingSearch:
    """
    Backtracking search for a pairing: always branch on the first uncovered edge
    (edges sorted by size, then lexicographically) over the pairs inside it.
    """
    edges = sorted(board.edges, key=edge_key)
    nodes = 0

    def search(used: FrozenSet[str], chosen: Tuple[FrozenSet[str], ...]) -> Optional[Tuple[FrozenSet[str], ...]]:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _SearchStopped()
        target = next((e for e in edges if not any(p <= e for p in chosen)), None)
        if target is None:
            return chosen
        for a, b in itertools.combinations(sorted(target), 2):
            if a in used or b in used:
                continue
            found = search(used | {a, b}, chosen + (frozenset((a, b)),))
            if found is not None:
                return found
        return None

    try:
        result = search(frozenset(), ())
    except _SearchStopped:
        return PairingSearch(None, False, nodes)
    if result is None:
        return PairingSearch(None, True, nodes)
    return PairingSearch(Pairing(frozenset(result)), True, nodes)


def greedy_pairs_mb(board: Hypergraph) -> List[Tuple[str, str]]:
    """All (x, y) with {x, y} an edge and every edge through y also through x."""
    found = []
    for e in board.edges:
        if len(e) != 2:
            continue
        a, b = sorted(e)
        for x, y in ((a, b), (b, a)):
            if all(x in f for f in board.edges if y in f):
                found.append((x, y))
    return sorted(found)


def uniformize_mb(board: Hypergraph, k: int) -> Hypergraph:
    """
    Pad every edge below size k by splitting it into e+{x}, e+{y} with fresh x, y
    until the board is k-uniform. Fresh ids are "<edge-key>.u<n>" where the key
    joins the original edge's members with "+".
    """
    if board.has_empty_edge():
        raise PreconditionError("cannot uniformize a board with an empty edge")
    if k < board.rank():
        raise PreconditionError(f"k={k} is below the board rank {board.rank()}")
    vertices = set(board.vertices)
    result = set()
    for original in sorted(board.edges, key=edge_key):
        key = "+".join(sorted(original))
        counter = itertools.count(1)

        def fresh() -> str:
            while True:
                name = f"{key}.u{next(counter)}"
                if name not in vertices:
                    vertices.add(name)
                    return name

        queue = deque([original])
        while queue:
            e = queue.popleft()
            if len(e) >= k:
                result.add(e)
                continue
            x, y = fresh(), fresh()
            queue.append(e | {x})
            queue.append(e | {y})
    return Hypergraph(vertices=tuple(sorted(vertices)), edges=frozenset(result))


def board_from_edges(edges: Sequence[Iterable[str]], extra_vertices: Iterable[str] = ()) -> Hypergraph:
    """Convenience constructor: vertex set = union of edges plus extras."""
    verts = set(extra_vertices)
    for e in edges:
        verts |= set(e)
    return Hypergraph.build(verts, edges)
