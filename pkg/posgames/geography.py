"""
Generalized Geography on the restricted digraph class used by the reduction.

Flow:
  - GeoInstance holds nodes, labeled arcs and the start node s.
  - validate_geo checks weak connectivity, bipartiteness and the degree profile
    (s: in 0 / out 1; every other node: (1,1), (2,1) or (1,2)).
  - two_coloring / classify_nodes produce the seven node types.
  - GeoSolver runs the memoized token game; Bob makes the first move away from s and
    whoever moves onto a visited node loses.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from .errors import BudgetExceeded, InputError


GEO_STATE_BUDGET = int(os.environ.get("POSGAMES_GEO_STATE_BUDGET", "5000000"))


class NodeType(str, Enum):
    B01 = "B01"
    B11 = "B11"
    B21 = "B21"
    B12 = "B12"
    M11 = "M11"
    M21 = "M21"
    M12 = "M12"

    @property
    def is_maker_node(self) -> bool:
        return self.value.startswith("M")


class GeoPlayer(str, Enum):
    ALICE = "Alice"
    BOB = "Bob"


# (color, in-degree, out-degree) -> type; s is handled separately.
_TYPE_TABLE: Dict[Tuple[int, int, int], NodeType] = {
    (0, 1, 1): NodeType.B11,
    (0, 2, 1): NodeType.B21,
    (0, 1, 2): NodeType.B12,
    (1, 1, 1): NodeType.M11,
    (1, 2, 1): NodeType.M21,
    (1, 1, 2): NodeType.M12,
}

ALLOWED_DEGREES = {(1, 1), (2, 1), (1, 2)}


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    label: str


@dataclass(frozen=True)
class GeoInstance:
    nodes: Tuple[str, ...]
    arcs: Tuple[Arc, ...]
    start: str
    _out: Dict[str, Tuple[Arc, ...]] = field(init=False, repr=False, compare=False)
    _in: Dict[str, Tuple[Arc, ...]] = field(init=False, repr=False, compare=False)
    _by_label: Dict[str, Arc] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise InputError("duplicate node ids")
        if self.start not in node_set:
            raise InputError(f"start node {self.start!r} is not a node")
        by_label: Dict[str, Arc] = {}
        seen_pairs = set()
        for arc in self.arcs:
            if arc.tail not in node_set or arc.head not in node_set:
                raise InputError(f"arc {arc.label} has an endpoint outside the node set")
            if arc.tail == arc.head:
                raise InputError(f"arc {arc.label} is a self-loop")
            if arc.label in by_label:
                raise InputError(f"duplicate arc label {arc.label!r}")
            if not arc.label or any(ch.isspace() for ch in arc.label) or "." in arc.label:
                raise InputError(f"bad arc label {arc.label!r}")
            if (arc.tail, arc.head) in seen_pairs:
                raise InputError(f"parallel arc {arc.tail}->{arc.head}")
            seen_pairs.add((arc.tail, arc.head))
            by_label[arc.label] = arc
        out: Dict[str, List[Arc]] = {n: [] for n in self.nodes}
        inn: Dict[str, List[Arc]] = {n: [] for n in self.nodes}
        for arc in self.arcs:
            out[arc.tail].append(arc)
            inn[arc.head].append(arc)
        object.__setattr__(self, "_out", {n: tuple(sorted(a, key=lambda x: x.label)) for n, a in out.items()})
        object.__setattr__(self, "_in", {n: tuple(sorted(a, key=lambda x: x.label)) for n, a in inn.items()})
        object.__setattr__(self, "_by_label", by_label)

    def out_arcs(self, node: str) -> Tuple[Arc, ...]:
        return self._out[node]

    def in_arcs(self, node: str) -> Tuple[Arc, ...]:
        return self._in[node]

    def arc(self, label: str) -> Arc:
        return self._by_label[label]

    def degrees(self, node: str) -> Tuple[int, int]:
        return len(self._in[node]), len(self._out[node])

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for arc in self.arcs:
            g.add_edge(arc.tail, arc.head, label=arc.label)
        return g

    @classmethod
    def build(cls, arcs: Sequence[Tuple[str, str, str]], start: str = "s", nodes: Optional[Sequence[str]] = None) -> "GeoInstance":
        """Shorthand used by fixtures: arcs as (tail, head, label) triples."""
        if nodes is None:
            ordered: List[str] = [start]
            for tail, head, _ in arcs:
                for n in (tail, head):
                    if n not in ordered:
                        ordered.append(n)
            nodes = ordered
        return cls(tuple(nodes), tuple(Arc(t, h, lbl) for t, h, lbl in arcs), start)

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "GeoInstance":
        try:
            nodes = tuple(data["nodes"])
            arcs = []
            for i, raw in enumerate(data["arcs"]):
                label = raw.get("label") or f"a{i}"
                arcs.append(Arc(raw["tail"], raw["head"], label))
            start = data.get("start", "s")
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed Geography JSON: {exc}") from exc
        return cls(nodes, tuple(arcs), start)

    def to_json(self) -> Dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "arcs": [{"tail": a.tail, "head": a.head, "label": a.label} for a in self.arcs],
            "start": self.start,
        }


@dataclass(frozen=True)
class Violation:
    condition: str
    nodes: Tuple[str, ...]
    detail: str

    def to_json(self) -> Dict[str, Any]:
        return {"condition": self.condition, "nodes": list(self.nodes), "detail": self.detail}


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> Dict[str, Any]:
        return {"valid": self.ok, "violations": [v.to_json() for v in self.violations]}


def validate_geo(inst: GeoInstance) -> ValidationReport:
    violations: List[Violation] = []
    ug = inst.digraph().to_undirected()
    if not nx.is_connected(ug):
        parts = sorted(sorted(c) for c in nx.connected_components(ug))
        stray = tuple(n for comp in parts if inst.start not in comp for n in comp)
        violations.append(Violation("weakly-connected", stray, f"{len(parts)} components"))
    if not nx.is_bipartite(ug):
        violations.append(Violation("bipartite", tuple(_odd_cycle_nodes(ug)), "these nodes close an odd cycle in the underlying graph"))
    if inst.degrees(inst.start) != (0, 1):
        d_in, d_out = inst.degrees(inst.start)
        violations.append(Violation("start-degree", (inst.start,), f"s has in-degree {d_in}, out-degree {d_out}; need (0,1)"))
    bad = [n for n in inst.nodes if n != inst.start and inst.degrees(n) not in ALLOWED_DEGREES]
    if bad:
        detail = ", ".join(f"{n}={inst.degrees(n)}" for n in bad)
        violations.append(Violation("node-degree", tuple(bad), f"(in,out) must be (1,1), (2,1) or (1,2): {detail}"))
    return ValidationReport(tuple(violations))


def _odd_cycle_nodes(ug: nx.Graph) -> List[str]:
    """Endpoints of the first edge whose ends get the same BFS color."""
    color: Dict[str, int] = {}
    for part in sorted(nx.connected_components(ug), key=min):
        root = min(part)
        color[root] = 0
        for u, v in nx.bfs_edges(ug, root):
            color[v] = 1 - color[u]
    for u, v in sorted(ug.edges()):
        if color[u] == color[v]:
            return sorted({u, v})
    return []


def require_valid(inst: GeoInstance) -> None:
    report = validate_geo(inst)
    if not report.ok:
        summary = "; ".join(f"{v.condition}: {v.detail}" for v in report.violations)
        raise InputError(f"instance outside the restricted class: {summary}")


def two_coloring(inst: GeoInstance) -> Dict[str, int]:
    """BFS 2-coloring of the underlying graph with s colored 0."""
    ug = inst.digraph().to_undirected()
    color = {inst.start: 0}
    for u, v in nx.bfs_edges(ug, inst.start):
        color[v] = 1 - color[u]
    if len(color) != len(inst.nodes):
        raise InputError("digraph is not weakly connected; coloring undefined")
    for arc in inst.arcs:
        if color[arc.tail] == color[arc.head]:
            raise InputError(f"digraph is not bipartite (arc {arc.label})")
    return color


def classify_nodes(inst: GeoInstance) -> Dict[str, NodeType]:
    require_valid(inst)
    color = two_coloring(inst)
    types = {}
    for n in inst.nodes:
        if n == inst.start:
            types[n] = NodeType.B01
            continue
        d_in, d_out = inst.degrees(n)
        types[n] = _TYPE_TABLE[(color[n], d_in, d_out)]
    return types


@dataclass(frozen=True)
class GeoState:
    current: str
    visited: FrozenSet[str]
    mover: GeoPlayer


GeoOracle = Callable[[GeoState], str]


def mover_for(visited: FrozenSet[str]) -> GeoPlayer:
    return GeoPlayer.BOB if len(visited) % 2 == 1 else GeoPlayer.ALICE


class GeoSolver:
    """
    Memoized search over (current, visited). The table maps a state to whether the
    player about to move wins. A private table per solver instance.
    """

    def __init__(self, inst: GeoInstance, budget: int = GEO_STATE_BUDGET) -> None:
        self.inst = inst
        self.budget = budget
        self.nodes = 0
        self._table: Dict[Tuple[str, FrozenSet[str]], bool] = {}
        try:
            self._color: Optional[Dict[str, int]] = two_coloring(inst) if validate_geo(inst).ok else None
        except InputError:
            self._color = None

    def mover_wins(self, current: str, visited: FrozenSet[str]) -> bool:
        key = (current, visited)
        cached = self._table.get(key)
        if cached is not None:
            return cached
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded("solve_geo", self.nodes)
        if self._color is not None:
            bob_moves = mover_for(visited) is GeoPlayer.BOB
            assert bob_moves == (self._color[current] == self._color[self.inst.start]), f"parity broken at {current}"
        win = False
        for arc in self.inst.out_arcs(current):
            if arc.head in visited:
                continue
            if not self.mover_wins(arc.head, visited | {arc.head}):
                win = True
                break
        self._table[key] = win
        return win

    def winner(self) -> GeoPlayer:
        start = self.inst.start
        return GeoPlayer.BOB if self.mover_wins(start, frozenset({start})) else GeoPlayer.ALICE

    def best_arc(self, state: GeoState) -> str:
        arcs = self.inst.out_arcs(state.current)
        if not arcs:
            raise InputError(f"node {state.current} has no out-arc")
        for arc in arcs:
            if arc.head not in state.visited and not self.mover_wins(arc.head, state.visited | {arc.head}):
                return arc.label
        for arc in arcs:
            if arc.head not in state.visited:
                return arc.label
        return arcs[0].label

    @property
    def table_size(self) -> int:
        return len(self._table)


def solve_geo(inst: GeoInstance, budget: int = GEO_STATE_BUDGET) -> GeoPlayer:
    return GeoSolver(inst, budget).winner()


def optimal_oracle(inst: GeoInstance, budget: int = GEO_STATE_BUDGET) -> GeoOracle:
    """Oracle for both players: a winning arc when one exists, else the lowest label."""
    solver = GeoSolver(inst, budget)
    return solver.best_arc


def path_oracle(inst: GeoInstance, path: Sequence[str]) -> GeoOracle:
    """Oracle that walks a fixed node path s, n1, n2, ..."""

    def choose(state: GeoState) -> str:
        step = len(state.visited)
        if step >= len(path):
            return inst.out_arcs(state.current)[0].label
        for arc in inst.out_arcs(state.current):
            if arc.head == path[step]:
                return arc.label
        raise InputError(f"path leaves {state.current} toward {path[step]} without an arc")

    return choose


_DOT_SHAPES = {"B": "box", "M": "ellipse"}


def to_dot(inst: GeoInstance, types: Optional[Dict[str, NodeType]] = None) -> str:
    lines = ["digraph geography {", "  rankdir=LR;"]
    for n in inst.nodes:
        if n == inst.start:
            shape = "doublecircle"
        elif types is not None:
            shape = _DOT_SHAPES[types[n].value[0]]
        else:
            shape = "circle"
        label = f"{n}\\n{types[n].value}" if types is not None else n
        lines.append(f'  "{n}" [shape={shape}, label="{label}"];')
    for arc in inst.arcs:
        lines.append(f'  "{arc.tail}" -> "{arc.head}" [label="{arc.label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
