import io
from typing import Any, Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import InputError  # noqa: E402
from .geography import GeoInstance  # noqa: E402
from .reduction import Variant, reduce, size_bounds  # noqa: E402


def chain_instance(n: int) -> GeoInstance:
    """s -> v1 -> ... -> vn -> v(n-1); n >= 2."""
    if n < 2:
        raise InputError("a chain needs at least two nodes after s")
    names = ["s"] + [f"v{i}" for i in range(1, n + 1)]
    arcs = [(names[i], names[i + 1], f"a{i}") for i in range(n)]
    arcs.append((names[n], names[n - 1], f"a{n}"))
    return GeoInstance.build(arcs)


def scaling_points(max_nodes: int) -> List[Dict[str, Any]]:
    points = []
    for n in range(2, max_nodes + 1):
        inst = chain_instance(n)
        bounds = size_bounds(reduce(inst, Variant.RANK4))
        bounds["nodes"] = len(inst.nodes)
        points.append(bounds)
    return points


def make_scaling_plot(points: List[Dict[str, Any]]) -> bytes:
    """
    Reduced-board size against Geography size, with the linear bounds dashed.
    """
    fig, ax = plt.subplots()
    if not points:
        ax.text(0.5, 0.5, "No data", ha="center", va="center")
    else:
        nodes = [p["nodes"] for p in points]
        ax.plot(nodes, [p["vertices"] for p in points], marker="o", label="|V|")
        ax.plot(nodes, [p["edges"] for p in points], marker="s", label="|E|")
        ax.plot(nodes, [p["vertex_bound"] for p in points], linestyle="--", label="|V| bound")
        ax.plot(nodes, [p["edge_bound"] for p in points], linestyle="--", label="|E| bound")
        ax.set_xlabel("Geography nodes")
        ax.set_ylabel("count")
        ax.set_title("Reduced board size")
        ax.legend()
        plt.tight_layout()

    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    buf.seek(0)
    return buf.read()
