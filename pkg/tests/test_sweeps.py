import numpy as np
import pytest

from posgames.errors import InputError
from posgames.hypergraph import is_pairing
from posgames.plots import chain_instance, make_scaling_plot, scaling_points
from posgames.sweeps import (
    SUITES,
    uniformize_suite,
    greedy_suite,
    monotone_suite,
    pairing_suite,
    random_board,
    random_paired_board,
    rules_suite,
    run_suites,
    stealing_suite,
    tiny_instances,
    tiny_suite,
)


def test_random_board_is_reproducible():
    a = random_board(np.random.default_rng(7), 6, 4)
    b = random_board(np.random.default_rng(7), 6, 4)
    assert a == b
    assert a.vertices == ("v00", "v01", "v02", "v03", "v04", "v05")
    assert a.rank() <= 4


def test_planted_pairing_is_valid():
    board, pairing = random_paired_board(np.random.default_rng(3), 4, 6)
    assert is_pairing(board, pairing).ok
    assert len(pairing.pairs) == 4


@pytest.mark.parametrize(
    "suite",
    [uniformize_suite, greedy_suite, pairing_suite, stealing_suite, rules_suite, monotone_suite],
)
def test_random_suites_hold(suite):
    report = suite(6, 11)
    assert report.ok, [r.to_json() for r in report.failures()]
    assert report.stats["samples"] == 6


def test_tiny_instances_up_to_three_nodes():
    found = list(tiny_instances(3))
    assert len(found) == 1
    (inst,) = found
    assert len(inst.arcs) == 3


def test_run_suites_prefixes_stats():
    report = run_suites(["pairing", "stealing"], 3, 0)
    assert report.ok
    assert report.stats["sweep-pairing.samples"] == 3
    assert "tiny" in SUITES


@pytest.mark.slow
def test_tiny_suite():
    report = tiny_suite(3)
    assert report.ok, [r.to_json() for r in report.failures()]
    assert report.stats["instances"] == 1


def test_chain_instances_grow_linearly():
    assert [a.label for a in chain_instance(2).arcs] == ["a0", "a1", "a2"]
    with pytest.raises(InputError):
        chain_instance(1)
    points = scaling_points(5)
    assert [p["nodes"] for p in points] == [3, 4, 5, 6]
    assert all(p["ok"] for p in points)
    assert points[0]["vertices"] == 17


def test_scaling_plot_is_png():
    assert make_scaling_plot(scaling_points(3)).startswith(b"\x89PNG")
    assert make_scaling_plot([]).startswith(b"\x89PNG")
