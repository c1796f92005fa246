"""Optional figure for a computed regular neighbourhood.

The left panel is the output graph of groups, the right panel the tree
realised from the CCC pretree inside the window.  V0 vertices are drawn as
grey squares and V1 vertices as white circles.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

V0_STYLE = {"node_shape": "s", "node_color": "#bbbbbb", "edgecolors": "black"}
V1_STYLE = {"node_shape": "o", "node_color": "white", "edgecolors": "black"}


def _quotient_graph(gog):
    g = nx.MultiGraph()
    for v in sorted(gog.vertices):
        g.add_node(v, part=gog.labels.get(v, "V1"))
    for e in sorted(gog.edges):
        d = gog.edges[e]
        g.add_edge(d.source, d.target, name=e)
    return g


def _draw(ax, graph, labels, title):
    pos = nx.kamada_kawai_layout(nx.Graph(graph)) if len(graph) > 2 else \
        {n: (k, 0) for k, n in enumerate(sorted(graph.nodes, key=repr))}
    for part, style in (("V0", V0_STYLE), ("V1", V1_STYLE)):
        nodes = [n for n, d in graph.nodes(data=True) if d.get("part") == part]
        nx.draw_networkx_nodes(graph, pos, nodelist=nodes, ax=ax, node_size=600, **style)
    nx.draw_networkx_edges(nx.Graph(graph), pos, ax=ax)
    nx.draw_networkx_labels(graph, pos, labels=labels, ax=ax, font_size=8)
    ax.set_title(title, fontsize=10)
    ax.set_axis_off()


def render_figure(result, path, title=None):
    """Write a PNG (or any format matplotlib infers from ``path``)."""
    quotient = _quotient_graph(result.gog)
    panels = [(quotient, {n: n for n in quotient.nodes}, "graph of groups")]
    tree = result.realized
    if tree is not None and len(tree) > 1:
        part = result.partition
        names = {}
        for n in tree.nodes:
            kind, key = n
            if kind == "V0":
                first = part.members_of(key)[0] if part is not None else None
                names[n] = first.name if first is not None else str(key)
            else:
                names[n] = ""
        panels.append((tree, names, "window tree of CCCs"))
    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4), squeeze=False)
    for ax, (graph, labels, sub) in zip(axes[0], panels):
        _draw(ax, graph, labels, sub)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
