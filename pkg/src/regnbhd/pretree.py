"""Finite pretrees: axiom checks, stars and realisation as a bipartite tree."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import networkx as nx

from .errors import AxiomsFail

__all__ = ["Pretree", "check_axioms", "is_discrete", "stars", "realize_tree",
           "vertex_pretree", "subdivide_tree", "tree_to_dot"]


@dataclass(frozen=True)
class Pretree:
    """Points with a betweenness relation; ``(x, y, z)`` means y lies
    strictly between x and z.  Triples are stored in both directions."""

    points: tuple
    triples: frozenset = field(default=frozenset())

    @classmethod
    def from_triples(cls, points, triples):
        closed = set()
        for x, y, z in triples:
            closed.add((x, y, z))
            closed.add((z, y, x))
        return cls(tuple(points), frozenset(closed))

    def between(self, x, y, z):
        return (x, y, z) in self.triples

    def between_set(self, x, z):
        return {y for y in self.points if (x, y, z) in self.triples}

    def adjacent(self, x, z):
        return x != z and (x, z) not in self._separated

    @cached_property
    def _separated(self):
        return frozenset((x, z) for x, _, z in self.triples)

    def to_json(self):
        pts = list(self.points)
        return {"points": [str(p) for p in pts],
                "triples": sorted([str(x), str(y), str(z)] for x, y, z in self.triples)}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_triples(data["points"], [tuple(t) for t in data["triples"]])


def check_axioms(p):
    """Return None when T0-T3 hold, else ``(axiom, witness)``.

    T0: xyz implies x != z.  T1: xyz implies zyx.  T2: xyz excludes xzy.
    T3: xyz and w != y imply xyw or wyz.
    """
    pts = set(p.points)
    for x, y, z in sorted(p.triples, key=repr):
        if not {x, y, z} <= pts:
            return ("T0", (x, y, z))
        if x == z or y in (x, z):
            return ("T0", (x, y, z))
    for x, y, z in sorted(p.triples, key=repr):
        if (z, y, x) not in p.triples:
            return ("T1", (x, y, z))
        if (x, z, y) in p.triples:
            return ("T2", (x, y, z))
    for x, y, z in sorted(p.triples, key=repr):
        for w in p.points:
            if w != y and (x, y, w) not in p.triples and (w, y, z) not in p.triples:
                return ("T3", (x, y, z, w))
    return None


def is_discrete(p, stable=None):
    """Finite pretrees are discrete; windowed callers pass the stability
    flag of their between-counts."""
    return True if stable is None else bool(stable)


def _require_axioms(p):
    bad = check_axioms(p)
    if bad is not None:
        raise AxiomsFail(*bad)


def stars(p, check=True):
    """Maximal sets of pairwise adjacent points."""
    if check:
        _require_axioms(p)
    if len(p.points) == 1:
        return [frozenset(p.points)]
    g = nx.Graph()
    g.add_nodes_from(p.points)
    g.add_edges_from((x, z) for x, z in combinations(p.points, 2) if p.adjacent(x, z))
    return sorted((frozenset(c) for c in nx.find_cliques(g)), key=lambda s: sorted(map(repr, s)))


def realize_tree(p, check=True):
    """Bipartite tree: points are ``("V0", x)`` nodes, stars ``("V1", k)``.
    A one-point pretree realises as a single vertex."""
    if check:
        _require_axioms(p)
    t = nx.Graph()
    for x in p.points:
        t.add_node(("V0", x), part="V0")
    for k, s in enumerate(s for s in stars(p, check=False) if len(s) > 1):
        node = ("V1", k)
        t.add_node(node, part="V1", members=s)
        for x in s:
            t.add_edge(("V0", x), node)
    return t


def vertex_pretree(tree):
    """Betweenness of the vertices of a finite tree (a networkx graph)."""
    triples = set()
    paths = dict(nx.all_pairs_shortest_path(tree))
    for x, z in combinations(tree.nodes, 2):
        for y in paths[x][z][1:-1]:
            triples.add((x, y, z))
    return Pretree.from_triples(list(tree.nodes), triples)


def subdivide_tree(tree):
    """Insert a midpoint on every edge of a tree."""
    out = nx.Graph()
    out.add_nodes_from(("V0", v) for v in tree.nodes)
    for u, v in tree.edges:
        mid = ("V1", frozenset((u, v)))
        out.add_edge(("V0", u), mid)
        out.add_edge(mid, ("V0", v))
    return out


def tree_to_dot(tree, name="realized"):
    ids = {n: f"n{k}" for k, n in enumerate(sorted(tree.nodes, key=repr))}
    lines = [f"graph {name} {{"]
    for n, i in ids.items():
        shape = "box" if tree.nodes[n].get("part", n[0]) == "V0" else "ellipse"
        label = str(n[1]).replace('"', "'")
        lines.append(f'  {i} [label="{label}", shape={shape}];')
    for u, v in sorted(tree.edges, key=lambda e: (ids[e[0]], ids[e[1]])):
        lines.append(f"  {ids[u]} -- {ids[v]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
