import json

import pytest

from posgames.geography import GeoInstance
from posgames.hypergraph import Hypergraph
from posgames.reduction import Variant, reduce


G1_ARCS = [("s", "v1", "a"), ("v1", "v2", "b"), ("v2", "v1", "c")]
G2_ARCS = [("s", "v1", "a"), ("v1", "v2", "b"), ("v2", "v3", "c"), ("v3", "v2", "d")]
MAZE_ARCS = [
    ("s", "v1", "a"),
    ("v1", "v2", "b"),
    ("v2", "v3", "c"),
    ("v2", "v4", "d"),
    ("v3", "v5", "e"),
    ("v3", "v6", "f"),
    ("v4", "v6", "g"),
    ("v5", "v7", "h"),
    ("v6", "v7", "i"),
    ("v7", "v8", "j"),
    ("v8", "v4", "k"),
]
MAZE_NODES = ["s"] + [f"v{i}" for i in range(1, 9)]


@pytest.fixture
def g1():
    """s -> v1 -> v2 -> v1: Alice wins."""
    return GeoInstance.build(G1_ARCS)


@pytest.fixture
def g2():
    """s -> v1 -> v2 -> v3 -> v2: Bob wins."""
    return GeoInstance.build(G2_ARCS)


@pytest.fixture
def maze():
    return GeoInstance.build(MAZE_ARCS, "s", MAZE_NODES)


@pytest.fixture
def g1_rank4(g1):
    return reduce(g1, Variant.RANK4)


@pytest.fixture
def g2_rank4(g2):
    return reduce(g2, Variant.RANK4)


@pytest.fixture
def maze_rank4(maze):
    return reduce(maze, Variant.RANK4)


@pytest.fixture
def sample_board():
    return Hypergraph.build(
        [f"x{i}" for i in range(1, 9)],
        [
            ["x1", "x2"],
            ["x1", "x3", "x4"],
            ["x2", "x4", "x5"],
            ["x1", "x3", "x6", "x7"],
            ["x2", "x5", "x7", "x8"],
        ],
    )


@pytest.fixture
def write_json(tmp_path):
    def _write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return _write
