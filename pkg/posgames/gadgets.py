"""
Gadget library: edge templates, regular-play sequences and the gadget pairings.

Role names:
  - "p_a", "q_a", ... are junction roles; the letter is a slot (a/b/c) bound to a
    concrete arc label when a gadget is instantiated, giving "<arc>.p" / "<arc>.q".
  - Everything else ("x1", "y3", "z_b", "z1") is interior and becomes "<node>.<role>".

Slots per type: in-slots come first in alphabetical order, then out-slots.
Two in-arcs (B21/M21) or two out-arcs (B12/M12) are bound to slots in arc-label order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .errors import PreconditionError
from .geography import NodeType
from .hypergraph import Pairing, Player


M = Player.MAKER
B = Player.BREAKER

SLOTS: Dict[NodeType, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    NodeType.B01: ((), ("a",)),
    NodeType.B11: (("a",), ("b",)),
    NodeType.M11: (("a",), ("b",)),
    NodeType.B21: (("a", "b"), ("c",)),
    NodeType.M21: (("a", "b"), ("c",)),
    NodeType.B12: (("a",), ("b", "c")),
    NodeType.M12: (("a",), ("b", "c")),
}

_ONE_IN_ONE_OUT = (
    ("p_a", "q_a", "x1", "y1"),
    ("p_a", "q_a", "p_b", "y2"),
    ("x1", "p_b", "q_b", "y3"),
)

EDGE_TEMPLATES: Dict[NodeType, Tuple[Tuple[str, ...], ...]] = {
    NodeType.B01: (("p_a", "y1"), ("q_a", "y2")),
    NodeType.B11: _ONE_IN_ONE_OUT,
    NodeType.M11: _ONE_IN_ONE_OUT,
    NodeType.B21: (
        ("p_a", "q_a", "x1", "y1"),
        ("p_b", "q_b", "x1", "y1"),
        ("p_a", "q_a", "p_c", "y2"),
        ("p_b", "q_b", "p_c", "y2"),
        ("x1", "p_c", "q_c", "y3"),
    ),
    NodeType.M21: (
        ("p_a", "q_a", "x1", "z_a"),
        ("p_b", "q_b", "x1", "z_b"),
        ("p_a", "q_a", "p_c", "y1"),
        ("p_b", "q_b", "p_c", "y1"),
        ("x1", "p_c", "q_c", "y2"),
    ),
    NodeType.B12: (
        ("p_a", "q_a", "x1", "y1"),
        ("p_a", "q_a", "x2", "y2"),
        ("x1", "x2", "y3", "y4"),
        ("x1", "x3", "p_b", "y3"),
        ("x2", "x3", "p_c", "y4"),
        ("p_b", "q_b", "x3", "y5"),
        ("p_c", "q_c", "x3", "y5"),
    ),
    NodeType.M12: (
        ("p_a", "q_a", "y1", "x1"),
        ("p_a", "q_a", "y2", "x2"),
        ("x1", "x2", "z1", "z2"),
        ("x1", "z1", "p_b", "y3"),
        ("x2", "z2", "y3", "p_c"),
        ("z1", "p_b", "q_b", "z_b"),
        ("z2", "p_c", "q_c", "z_c"),
    ),
}


def is_junction_role(role: str) -> bool:
    return role[:2] in ("p_", "q_")


def twin_role(role: str) -> str:
    return ("q_" if role.startswith("p_") else "p_") + role[2:]


def roles_of(t: NodeType) -> Tuple[str, ...]:
    return tuple(sorted({r for e in EDGE_TEMPLATES[t] for r in e}))


def interior_roles(t: NodeType) -> Tuple[str, ...]:
    return tuple(r for r in roles_of(t) if not is_junction_role(r))


def input_roles(t: NodeType) -> Tuple[str, ...]:
    ins, _ = SLOTS[t]
    return tuple(f"{pq}_{s}" for s in ins for pq in ("p", "q"))


def bind_slots(t: NodeType, in_arcs: Iterable[str], out_arcs: Iterable[str]) -> Dict[str, str]:
    """Slot letter -> arc label; arcs are ordered by label inside each direction."""
    ins, outs = SLOTS[t]
    in_sorted, out_sorted = sorted(in_arcs), sorted(out_arcs)
    if len(in_sorted) != len(ins) or len(out_sorted) != len(outs):
        raise PreconditionError(
            f"{t.value} needs {len(ins)} in-arc(s) and {len(outs)} out-arc(s), got {len(in_sorted)} and {len(out_sorted)}"
        )
    return {**dict(zip(ins, in_sorted)), **dict(zip(outs, out_sorted))}


def vertex_id(node: str, role: str, slots: Mapping[str, str]) -> str:
    if is_junction_role(role):
        return f"{slots[role[2:]]}.{role[0]}"
    return f"{node}.{role}"


def role_of(node: str, vertex: str, slots: Mapping[str, str]) -> Optional[str]:
    """Inverse of vertex_id for one gadget; None when the vertex is not in it."""
    for slot, arc in slots.items():
        if vertex == f"{arc}.p":
            return f"p_{slot}"
        if vertex == f"{arc}.q":
            return f"q_{slot}"
    if vertex.startswith(node + "."):
        return vertex[len(node) + 1:]
    return None


# -- regular play -------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    player: Player
    role: str
    label: str = ""  # "g" greedy Maker move, "f" forced Breaker reply, "" neither


@dataclass(frozen=True)
class SequenceTemplate:
    prefix: Tuple[Step, ...]
    branches: Mapping[str, Tuple[Step, ...]]  # out-slot -> tail; empty for one-exit gadgets
    exit_slot: Optional[str] = None

    @property
    def has_choice(self) -> bool:
        return bool(self.branches)

    def chooser(self) -> Optional[Player]:
        if not self.branches:
            return None
        return next(iter(self.branches.values()))[0].player

    def steps(self, choice_slot: Optional[str]) -> Tuple[Step, ...]:
        if not self.branches:
            return self.prefix
        return self.prefix + self.branches[choice_slot]


def _seq(*items: Tuple[Player, str, str]) -> Tuple[Step, ...]:
    return tuple(Step(p, r, lbl) for p, r, lbl in items)


_B01_SEQ = _seq((M, "p_a", "g"), (B, "y1", "f"), (M, "q_a", "g"), (B, "y2", "f"))
_ONE_OUT_SEQ = _seq((M, "x1", "g"), (B, "y1", "f"), (M, "p_b", "g"), (B, "y2", "f"), (M, "q_b", "g"), (B, "y3", "f"))
_B21_SEQ = _seq((M, "x1", "g"), (B, "y1", "f"), (M, "p_c", "g"), (B, "y2", "f"), (M, "q_c", "g"), (B, "y3", "f"))
_B12_PREFIX = _seq((M, "x1", "g"), (B, "y1", "f"), (M, "x2", "g"), (B, "y2", "f"), (M, "x3", ""))
_B12_BRANCHES = {
    "b": _seq((B, "y4", ""), (M, "p_b", "g"), (B, "y3", "f"), (M, "q_b", ""), (B, "y5", "f")),
    "c": _seq((B, "y3", ""), (M, "p_c", "g"), (B, "y4", "f"), (M, "q_c", ""), (B, "y5", "f")),
}
_M12_PREFIX = _seq((M, "x1", "g"), (B, "y1", "f"), (M, "x2", "g"), (B, "y2", "f"))
_M12_BRANCHES = {
    "b": _seq((M, "z1", ""), (B, "z2", "f"), (M, "p_b", "g"), (B, "y3", "f"), (M, "q_b", "g"), (B, "z_b", "f")),
    "c": _seq((M, "z2", ""), (B, "z1", "f"), (M, "p_c", "g"), (B, "y3", "f"), (M, "q_c", "g"), (B, "z_c", "f")),
}


def sequence_template(t: NodeType, entry_slot: Optional[str]) -> SequenceTemplate:
    if t is NodeType.B01:
        if entry_slot is not None:
            raise PreconditionError("the start gadget has no entry arc")
        return SequenceTemplate(_B01_SEQ, {}, "a")
    if entry_slot is None:
        raise PreconditionError(f"{t.value} needs an entry arc")
    if entry_slot not in SLOTS[t][0]:
        raise PreconditionError(f"slot {entry_slot!r} is not an input of {t.value}")
    if t in (NodeType.B11, NodeType.M11):
        return SequenceTemplate(_ONE_OUT_SEQ, {}, "b")
    if t is NodeType.B21:
        return SequenceTemplate(_B21_SEQ, {}, "c")
    if t is NodeType.M21:
        z = f"z_{entry_slot}"
        return SequenceTemplate(
            _seq((M, "x1", "g"), (B, z, "f"), (M, "p_c", "g"), (B, "y1", "f"), (M, "q_c", "g"), (B, "y2", "f")),
            {},
            "c",
        )
    if t is NodeType.B12:
        return SequenceTemplate(_B12_PREFIX, _B12_BRANCHES)
    return SequenceTemplate(_M12_PREFIX, _M12_BRANCHES)


# -- gadget pairings ------------------------------------------------------------
# Key "" is the gadget pairing; any other key is a pairing that avoids that role.
# Roles without an entry fall back to the gadget pairing, which avoids them.

_P = Tuple[Tuple[str, str], ...]

_PAIRINGS_1_1: Dict[str, _P] = {
    "": (("p_a", "q_a"), ("p_b", "q_b")),
    "p_a": (("q_a", "y2"), ("p_b", "q_b"), ("x1", "y1")),
    "q_a": (("p_a", "y2"), ("p_b", "q_b"), ("x1", "y1")),
    "p_b": (("p_a", "q_a"), ("x1", "y3")),
    "q_b": (("p_a", "q_a"), ("x1", "y3")),
}

GADGET_PAIRINGS: Dict[NodeType, Dict[str, _P]] = {
    NodeType.B11: _PAIRINGS_1_1,
    NodeType.M11: _PAIRINGS_1_1,
    NodeType.B21: {
        "": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c")),
        "p_a": (("q_a", "y2"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "y1")),
        "q_a": (("p_a", "y2"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "y1")),
        "p_b": (("q_b", "y2"), ("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y1")),
        "q_b": (("p_b", "y2"), ("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y1")),
        "p_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x1", "y3")),
        "q_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x1", "y3")),
    },
    NodeType.M21: {
        "": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c")),
        "p_a": (("q_a", "y1"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "z_a")),
        "q_a": (("p_a", "y1"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "z_a")),
        "p_b": (("q_b", "y1"), ("p_a", "q_a"), ("p_c", "q_c"), ("x1", "z_b")),
        "q_b": (("p_b", "y1"), ("p_a", "q_a"), ("p_c", "q_c"), ("x1", "z_b")),
        "p_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x1", "y2")),
        "q_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x1", "y2")),
    },
    NodeType.B12: {
        "": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "y4")),
        "x1": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x3", "y3"), ("x2", "y4")),
        "x2": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x3", "y4"), ("x1", "y3")),
        "y3": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "x3"), ("x2", "y4")),
        "y4": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x2", "x3"), ("x1", "y3")),
        "p_a": (("q_a", "y1"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "y2"), ("x3", "y4")),
        "q_a": (("p_a", "y1"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "y2"), ("x3", "y4")),
        # {p_c,q_c} is redundant here but listed as published.
        "p_b": (("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "y4"), ("x3", "y5")),
        "q_b": (("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "y4"), ("x3", "y5")),
        "p_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x1", "y3"), ("x2", "y4"), ("x3", "y5")),
        "q_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x1", "y3"), ("x2", "y4"), ("x3", "y5")),
    },
    NodeType.M12: {
        "": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "z1"), ("x2", "z2")),
        "x1": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("y3", "z1"), ("x2", "z2")),
        "x2": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("y3", "z2"), ("x1", "z1")),
        "z1": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "z2")),
        "z2": (("p_a", "q_a"), ("p_b", "q_b"), ("p_c", "q_c"), ("x2", "y3"), ("x1", "z1")),
        "p_a": (("q_a", "y1"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "z1"), ("x2", "y2"), ("y3", "z2")),
        "q_a": (("p_a", "y1"), ("p_b", "q_b"), ("p_c", "q_c"), ("x1", "z1"), ("x2", "y2"), ("y3", "z2")),
        "p_b": (("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "z2"), ("z1", "z_b")),
        "q_b": (("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "z2"), ("z1", "z_b")),
        "p_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x2", "y3"), ("x1", "z1"), ("z2", "z_c")),
        "q_c": (("p_a", "q_a"), ("p_b", "q_b"), ("x2", "y3"), ("x1", "z1"), ("z2", "z_c")),
    },
}

# The published M12 list for a missing p_b ends in a pair naming an undefined z_3.
M12_LITERAL_P_B: _P = (("p_a", "q_a"), ("p_c", "q_c"), ("x1", "y3"), ("x2", "z2"), ("z1", "z3"))


def gadget_pairing_roles(t: NodeType, avoid: Optional[str] = None) -> _P:
    table = GADGET_PAIRINGS[t]
    if avoid is None:
        return table[""]
    return table.get(avoid, table[""])


def concrete_pairing(node: str, slots: Mapping[str, str], pairs: _P) -> Pairing:
    return Pairing(frozenset(frozenset((vertex_id(node, a, slots), vertex_id(node, b, slots))) for a, b in pairs))


def classify_pair(pair: Tuple[str, str]) -> str:
    """'junction' for a twin pair, 'interior' for two interior roles, else 'mixed' / 'unclean'."""
    a, b = pair
    ja, jb = is_junction_role(a), is_junction_role(b)
    if ja and jb:
        return "junction" if a[2:] == b[2:] and a[0] != b[0] else "unclean"
    if not ja and not jb:
        return "interior"
    return "mixed"


def template_edges(t: NodeType) -> List[FrozenSet[str]]:
    return [frozenset(e) for e in EDGE_TEMPLATES[t]]


def expected_residue_roles(
    t: NodeType,
    entry_slot: Optional[str],
    choice_slot: Optional[str],
    reactivated: bool = False,
) -> Tuple[FrozenSet[str], FrozenSet[FrozenSet[str]]]:
    """
    Updated (vertices, edges) of a gadget, in role names, once its regular-play
    sequence has been played. With reactivated=True, the unused input pair has
    since been picked by Maker as well.
    """
    none: FrozenSet[FrozenSet[str]] = frozenset()
    ins, outs = SLOTS[t]
    if t in (NodeType.B01, NodeType.B11, NodeType.M11):
        return frozenset(), none
    if t in (NodeType.B21, NodeType.M21):
        (g,) = [s for s in ins if s != entry_slot]
        if t is NodeType.B21:
            return (frozenset(), none) if reactivated else (frozenset({f"p_{g}", f"q_{g}"}), none)
        z = f"z_{g}"
        if reactivated:
            return frozenset({z}), frozenset({frozenset({z})})
        trio = frozenset({f"p_{g}", f"q_{g}", z})
        return trio, frozenset({trio})
    (g,) = [s for s in outs if s != choice_slot]
    if t is NodeType.B12:
        return frozenset({f"p_{g}", f"q_{g}"}), none
    return frozenset({f"p_{g}", f"q_{g}", f"z_{g}"}), none
