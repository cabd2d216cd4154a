"""
Geography -> 4-uniform hypergraph compiler.

Flow:
  - classify every node of a validated instance;
  - instantiate the node's gadget template over its junction pairs ("<arc>.p", "<arc>.q")
    and its interior vertices ("<node>.<role>");
  - union the gadgets (rank4), then optionally pad the start gadget (mb-uniform via the
    two-new-vertices splitting, mm-uniform via ten fresh z vertices);
  - check_gadget_claims re-derives every published gadget property from the templates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import gadgets
from .errors import InputError
from .geography import GeoInstance, NodeType, classify_nodes
from .hypergraph import Edge, Hypergraph, greedy_pairs_mb, is_pairing, mb_update, uniformize_mb


class Variant(str, Enum):
    RANK4 = "rank4"
    MB_UNIFORM = "mb-uniform"
    MM_UNIFORM = "mm-uniform"


@dataclass(frozen=True, eq=False)
class GadgetInfo:
    node: str
    node_type: NodeType
    in_arcs: Tuple[str, ...]
    out_arcs: Tuple[str, ...]
    slots: Mapping[str, str]
    vertices: FrozenSet[str]
    edges: FrozenSet[Edge]

    def vertex(self, role: str) -> str:
        return gadgets.vertex_id(self.node, role, self.slots)

    def role(self, vertex: str) -> Optional[str]:
        if vertex not in self.vertices:
            return None
        return gadgets.role_of(self.node, vertex, self.slots)

    def slot_of(self, arc: str) -> str:
        for slot, label in self.slots.items():
            if label == arc:
                return slot
        raise KeyError(f"arc {arc} does not touch {self.node}")


@dataclass(frozen=True, eq=False)
class ReductionOutput:
    instance: GeoInstance
    variant: Variant
    board: Hypergraph
    arc_to_junction: Mapping[str, Tuple[str, str]]
    node_to_gadget: Mapping[str, GadgetInfo]
    types: Mapping[str, NodeType]
    work: int
    _owners: Dict[str, Tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        owners: Dict[str, List[str]] = {}
        for node, info in self.node_to_gadget.items():
            for v in info.vertices:
                owners.setdefault(v, []).append(node)
        object.__setattr__(self, "_owners", {v: tuple(sorted(ns)) for v, ns in owners.items()})

    def gadget(self, node: str) -> GadgetInfo:
        return self.node_to_gadget[node]

    def owners(self, vertex: str) -> Tuple[str, ...]:
        """Nodes whose gadget holds the vertex: one for interior, two for junction vertices."""
        return self._owners.get(vertex, ())

    def is_junction(self, vertex: str) -> bool:
        return len(self.owners(vertex)) == 2

    def twin(self, vertex: str) -> str:
        arc, side = vertex.rsplit(".", 1)
        return f"{arc}.{'q' if side == 'p' else 'p'}"

    def z_vertex(self, node: str, arc: str) -> str:
        info = self.gadget(node)
        return info.vertex(f"z_{info.slot_of(arc)}")

    def metadata_json(self) -> Dict[str, Any]:
        return {
            "variant": self.variant.value,
            "arcs": {label: list(pq) for label, pq in sorted(self.arc_to_junction.items())},
            "nodes": {
                node: {
                    "type": info.node_type.value,
                    "vertices": sorted(info.vertices),
                    "in": list(info.in_arcs),
                    "out": list(info.out_arcs),
                }
                for node, info in sorted(self.node_to_gadget.items())
            },
            "counts": {"vertices": len(self.board.vertices), "edges": len(self.board.edges)},
        }


def gadget_edges(t: NodeType, node: str, in_arcs: Sequence[str], out_arcs: Sequence[str]) -> FrozenSet[Edge]:
    slots = gadgets.bind_slots(t, in_arcs, out_arcs)
    return frozenset(
        frozenset(gadgets.vertex_id(node, role, slots) for role in template)
        for template in gadgets.EDGE_TEMPLATES[t]
    )


def _build_gadget(t: NodeType, node: str, in_arcs: Sequence[str], out_arcs: Sequence[str]) -> GadgetInfo:
    slots = gadgets.bind_slots(t, in_arcs, out_arcs)
    vertices = frozenset(gadgets.vertex_id(node, r, slots) for r in gadgets.roles_of(t))
    return GadgetInfo(
        node=node,
        node_type=t,
        in_arcs=tuple(sorted(in_arcs)),
        out_arcs=tuple(sorted(out_arcs)),
        slots=slots,
        vertices=vertices,
        edges=gadget_edges(t, node, in_arcs, out_arcs),
    )


def mm_start_edges(start: GadgetInfo) -> Tuple[FrozenSet[str], FrozenSet[Edge]]:
    """Ten fresh z vertices; {p_a,y1,zi,zj} for i<j<=5 and {q_a,y2,zi,zj} for 6<=i<j."""
    zs = [f"{start.node}.z{i}" for i in range(1, 11)]
    p_a, q_a = start.vertex("p_a"), start.vertex("q_a")
    y1, y2 = start.vertex("y1"), start.vertex("y2")
    edges = set()
    for zi, zj in itertools.combinations(zs[:5], 2):
        edges.add(frozenset({p_a, y1, zi, zj}))
    for zi, zj in itertools.combinations(zs[5:], 2):
        edges.add(frozenset({q_a, y2, zi, zj}))
    return frozenset(zs), frozenset(edges)


def reduce(inst: GeoInstance, variant: Variant = Variant.RANK4) -> ReductionOutput:
    types = classify_nodes(inst)
    work = 0
    node_to_gadget: Dict[str, GadgetInfo] = {}
    for node in inst.nodes:
        work += 1
        ins = [a.label for a in inst.in_arcs(node)]
        outs = [a.label for a in inst.out_arcs(node)]
        work += len(ins) + len(outs)
        node_to_gadget[node] = _build_gadget(types[node], node, ins, outs)
    arc_to_junction = {a.label: (f"{a.label}.p", f"{a.label}.q") for a in inst.arcs}

    vertices = set()
    edges = set()
    for info in node_to_gadget.values():
        vertices |= info.vertices
        edges |= info.edges
    board = Hypergraph.build(vertices, edges)

    start = node_to_gadget[inst.start]
    if variant is Variant.MB_UNIFORM:
        board = uniformize_mb(board, 4)
        fresh = frozenset(board.vertices) - frozenset(vertices)
        others = set()
        for node, info in node_to_gadget.items():
            if node != inst.start:
                others |= info.edges
        node_to_gadget[inst.start] = _replace_start(start, start.vertices | fresh, board.edges - others)
    elif variant is Variant.MM_UNIFORM:
        zs, z_edges = mm_start_edges(start)
        board = Hypergraph.build(vertices | zs, (edges - start.edges) | z_edges)
        node_to_gadget[inst.start] = _replace_start(start, start.vertices | zs, z_edges)

    return ReductionOutput(
        instance=inst,
        variant=variant,
        board=board,
        arc_to_junction=arc_to_junction,
        node_to_gadget=node_to_gadget,
        types=types,
        work=work,
    )


def _replace_start(start: GadgetInfo, vertices: FrozenSet[str], edges: FrozenSet[Edge]) -> GadgetInfo:
    return GadgetInfo(start.node, start.node_type, start.in_arcs, start.out_arcs, start.slots, vertices, edges)


def size_bounds(red: ReductionOutput) -> Dict[str, Any]:
    n, a = len(red.instance.nodes), len(red.instance.arcs)
    v, e = len(red.board.vertices), len(red.board.edges)
    return {
        "vertices": v,
        "edges": e,
        "vertex_bound": 9 * n + 2 * a + 10,
        "edge_bound": 7 * n + 18,
        "work": red.work,
        "ok": v <= 9 * n + 2 * a + 10 and e <= 7 * n + 18,
    }


# -- claim reports ----------------------------------------------------------------


@dataclass(frozen=True)
class ClaimResult:
    claim: str
    subject: str
    ok: bool
    detail: str = ""
    counterexample: Tuple[str, ...] = ()

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"claim": self.claim, "subject": self.subject, "ok": self.ok}
        if self.detail:
            out["detail"] = self.detail
        if self.counterexample:
            out["counterexample"] = list(self.counterexample)
        return out


@dataclass
class ClaimReport:
    name: str
    results: List[ClaimResult] = field(default_factory=list)
    stats: Dict[str, Any] = field(default_factory=dict)

    def add(self, claim: str, subject: str, ok: bool, detail: str = "", counterexample: Iterable[str] = ()) -> bool:
        # Only failures carry a line.
        kept = () if ok else tuple(counterexample)
        self.results.append(ClaimResult(claim, subject, ok, detail, kept))
        return ok

    def extend(self, other: "ClaimReport") -> None:
        self.results.extend(other.results)
        for key, value in other.stats.items():
            self.stats[f"{other.name}.{key}"] = value

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> List[ClaimResult]:
        return [r for r in self.results if not r.ok]

    def to_json(self) -> Dict[str, Any]:
        return {
            "report": self.name,
            "ok": self.ok,
            "checked": len(self.results),
            "failed": [r.to_json() for r in self.failures()],
            "results": [r.to_json() for r in self.results],
            "stats": self.stats,
        }


# -- gadget claims ----------------------------------------------------------------

_STANDALONE_ARCS = {"a": "a", "b": "b", "c": "c"}


def standalone_gadget(t: NodeType, node: str = "v") -> Tuple[Hypergraph, Dict[str, str]]:
    ins, outs = gadgets.SLOTS[t]
    slots = {s: _STANDALONE_ARCS[s] for s in ins + outs}
    info = _build_gadget(t, node, [slots[s] for s in ins], [slots[s] for s in outs])
    return Hypergraph.build(info.vertices, info.edges), dict(info.slots)


def _check_pairings(report: ClaimReport, t: NodeType, board: Hypergraph, slots: Dict[str, str]) -> None:
    inputs = set(gadgets.input_roles(t))
    for avoid in (None,) + gadgets.roles_of(t):
        pairs = gadgets.gadget_pairing_roles(t, avoid)
        subject = f"{t.value} pairing({avoid or 'gadget'})"
        concrete = gadgets.concrete_pairing("v", slots, pairs)
        check = is_pairing(board, concrete)
        if not report.add("gadget-pairing-valid", subject, check.ok, "" if check.ok else f"{check.reason}: {list(check.detail)}"):
            continue
        if avoid is not None:
            report.add("gadget-pairing-avoids", subject, not any(avoid in p for p in pairs))
        kinds = [(gadgets.classify_pair(p), p) for p in pairs]
        mixed = [p for kind, p in kinds if kind == "mixed"]
        unclean = [p for kind, p in kinds if kind == "unclean"]
        if avoid in inputs:
            twin = gadgets.twin_role(avoid)
            ok = not unclean and len(mixed) == 1 and twin in mixed[0]
            report.add("gadget-pairing-mixed", subject, ok, f"mixed pairs {mixed}")
        else:
            report.add("gadget-pairing-clean", subject, not mixed and not unclean, f"mixed pairs {mixed}")


def _check_input_law(report: ClaimReport, t: NodeType) -> None:
    for slot in gadgets.SLOTS[t][0]:
        p, q = f"p_{slot}", f"q_{slot}"
        ok = all((p in e) == (q in e) for e in gadgets.EDGE_TEMPLATES[t])
        report.add("input-pair-law", f"{t.value} slot {slot}", ok)


def play_sequence_checked(
    report: ClaimReport,
    board: Hypergraph,
    steps: Sequence[gadgets.Step],
    node: str,
    slots: Mapping[str, str],
    maker: FrozenSet[str],
    breaker: FrozenSet[str],
    subject: str,
) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Play a sequence on a board, checking every g/f label; returns the final pick sets."""
    history: List[str] = []
    for i, step in enumerate(steps):
        v = gadgets.vertex_id(node, step.role, slots)
        if v in maker or v in breaker:
            report.add("sequence-legal", subject, False, f"{v} already picked", history)
            return maker, breaker
        current = mb_update(board, maker, breaker)
        if step.label == "g":
            nxt = gadgets.vertex_id(node, steps[i + 1].role, slots)
            report.add("sequence-greedy", f"{subject} {step.role}", (v, nxt) in greedy_pairs_mb(current), "", history)
        elif step.label == "f":
            report.add("sequence-forced", f"{subject} {step.role}", frozenset({v}) in current.edges, "", history)
        history.append(v)
        if step.player is gadgets.M:
            maker = maker | {v}
        else:
            breaker = breaker | {v}
    return maker, breaker


def _roles_to_ids(node: str, slots: Mapping[str, str], roles: Iterable[str]) -> FrozenSet[str]:
    return frozenset(gadgets.vertex_id(node, r, slots) for r in roles)


def _check_sequences(report: ClaimReport, t: NodeType, board: Hypergraph, slots: Dict[str, str]) -> None:
    ins, outs = gadgets.SLOTS[t]
    entries: Tuple[Optional[str], ...] = ins if ins else (None,)
    for entry in entries:
        template = gadgets.sequence_template(t, entry)
        choices: Tuple[Optional[str], ...] = tuple(template.branches) if template.has_choice else (None,)
        for choice in choices:
            subject = f"{t.value} entry={entry} choice={choice}"
            start_m = _roles_to_ids("v", slots, [f"p_{entry}", f"q_{entry}"]) if entry else frozenset()
            m, b = play_sequence_checked(report, board, template.steps(choice), "v", slots, start_m, frozenset(), subject)
            _check_residue(report, t, board, slots, m, b, entry, choice, False, subject)
            if t in (NodeType.B21, NodeType.M21):
                (other,) = [s for s in ins if s != entry]
                m2 = m | _roles_to_ids("v", slots, [f"p_{other}", f"q_{other}"])
                _check_residue(report, t, board, slots, m2, b, entry, choice, True, subject + " reactivated")


def _check_residue(
    report: ClaimReport,
    t: NodeType,
    board: Hypergraph,
    slots: Mapping[str, str],
    maker: FrozenSet[str],
    breaker: FrozenSet[str],
    entry: Optional[str],
    choice: Optional[str],
    reactivated: bool,
    subject: str,
) -> None:
    after = mb_update(board, maker, breaker)
    roles, role_edges = gadgets.expected_residue_roles(t, entry, choice, reactivated)
    want_v = _roles_to_ids("v", slots, roles)
    want_e = frozenset(_roles_to_ids("v", slots, e) for e in role_edges)
    ok = frozenset(after.vertices) == want_v and after.edges == want_e
    detail = "" if ok else f"got V={sorted(after.vertices)} E={[sorted(e) for e in after.edges]}"
    report.add("sequence-residue", subject, ok, detail)


def check_gadget_claims() -> ClaimReport:
    report = ClaimReport("gadgets")
    for t in NodeType:
        board, slots = standalone_gadget(t)
        if t is not NodeType.B01:
            _check_pairings(report, t, board, slots)
            _check_input_law(report, t)
        _check_sequences(report, t, board, slots)

    board, slots = standalone_gadget(NodeType.M12)
    literal = gadgets.concrete_pairing("v", slots, gadgets.M12_LITERAL_P_B)
    substituted = gadgets.concrete_pairing("v", slots, gadgets.gadget_pairing_roles(NodeType.M12, "p_b"))
    report.add(
        "m12-z3-reading",
        "M12 pairing(p_b)",
        not is_pairing(board, literal).ok and is_pairing(board, substituted).ok,
        "pair {z1,z3} names no vertex; read as {z1,z_b}",
    )
    report.stats["types"] = [t.value for t in NodeType]
    return report


def gadget_residue(red: ReductionOutput, node: str, maker: FrozenSet[str], breaker: FrozenSet[str]) -> Tuple[FrozenSet[str], FrozenSet[Edge]]:
    """Updated (vertices, edges) of one gadget under the given picks."""
    info = red.gadget(node)
    vertices = info.vertices - maker - breaker
    edges = frozenset(e - maker for e in info.edges if not (e & breaker))
    return vertices, edges


def load_variant(name: str) -> Variant:
    try:
        return Variant(name)
    except ValueError as exc:
        raise InputError(f"unknown variant {name!r}; expected one of {[v.value for v in Variant]}") from exc
