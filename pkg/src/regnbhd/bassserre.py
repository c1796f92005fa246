"""Bass-Serre trees, halfspaces and surgery on graphs of groups.

Tree vertices are canonical coset chains: the syllable tuple of a normal
form.  The chain of ``g`` is the vertex ``g . base``; a vertex lies below an
edge exactly when the edge's lower endpoint chain is a prefix of its own
chain, which makes halfspace membership a prefix test.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import gcd

import networkx as nx
from networkx.algorithms.isomorphism import MultiGraphMatcher

from .errors import (BallTooLarge, EdgeGroupNotElliptic, InfiniteValence, NotASubgraph,
                     NotMinimal, SchemaError)
from .groupcore import (CompositeGroup, EdgeDesc, GraphOfGroups, NormalForm,
                        SubgroupDesc, VertexGroupDesc, ball_cap, cyclic_power,
                        finite_cyclic, free_group, infinite_cyclic, multiply, vertex_path,
                        whole)

__all__ = [
    "GraphOfGroups", "TreeBall", "HalfspaceRef", "OUT_OF_WINDOW", "EdgeOrder",
    "universal_ball", "halfspace_membership", "edge_order", "act_on_vertex",
    "collapse", "subdivide", "remove_redundant", "refine_at_vertex", "SplitData",
    "edge_splitting", "is_minimal", "gog_isomorphic", "gog_to_dot", "tree_to_dot",
]


class _OutOfWindow:
    def __repr__(self):
        return "OutOfWindow"

    def __bool__(self):
        raise TypeError("OutOfWindow has no truth value")


OUT_OF_WINDOW = _OutOfWindow()


# ---------------------------------------------------------------- vertices

def vertex_type(chain, gog, base):
    return gog.terminus(chain[-1][1]) if chain else base


def act_on_vertex(g, chain):
    """The chain of ``g . v`` where ``v`` is the vertex with the given chain."""
    if not chain:
        return g.syllables
    return multiply(g, vertex_path(chain, g.gog, g.start)).syllables


def is_below(chain, top):
    """True when ``chain`` lies in the subtree hanging below ``top``."""
    return len(chain) >= len(top) and chain[:len(top)] == top


def geodesic(u, v):
    """Vertices on the tree geodesic from ``u`` to ``v`` (inclusive)."""
    k = 0
    while k < len(u) and k < len(v) and u[k] == v[k]:
        k += 1
    up = [u[:i] for i in range(len(u), k - 1, -1)]
    down = [v[:i] for i in range(k + 1, len(v) + 1)]
    return up + down


def hull(chains):
    """Vertex set of the smallest subtree containing the given vertices."""
    chains = list(chains)
    if not chains:
        return set()
    out = set()
    first = chains[0]
    for c in chains:
        out.update(geodesic(first, c))
    # the union of geodesics from one point is already convex
    return out


@dataclass(frozen=True)
class HalfspaceRef:
    """An oriented tree edge, named by its lower endpoint ``child``.

    ``down`` is True when the edge points away from the base, so the
    halfspace ``Y`` is the subtree below ``child``.
    """

    child: tuple
    down: bool = True

    def contains(self, chain):
        return is_below(chain, self.child) == self.down

    def reverse(self):
        return HalfspaceRef(self.child, not self.down)

    @property
    def parent(self):
        return self.child[:-1]

    def terminal(self):
        return self.child if self.down else self.parent

    def origin(self):
        return self.parent if self.down else self.child

    def translate(self, g):
        p, c = act_on_vertex(g, self.parent), act_on_vertex(g, self.child)
        if len(c) > len(p):
            return HalfspaceRef(c, self.down)
        return HalfspaceRef(p, not self.down)


def edge_at(chain, other):
    """The edge joining adjacent vertices ``chain`` and ``other``, oriented toward ``other``."""
    if len(other) == len(chain) + 1:
        return HalfspaceRef(other, True)
    return HalfspaceRef(chain, False)


# -------------------------------------------------------------------- balls

class TreeBall:
    """A finite ball in the Bass-Serre tree around the base vertex."""

    def __init__(self, gog, base, radius, rep_cap, vertices):
        self.gog = gog
        self.base = base
        self.radius = radius
        self.rep_cap = rep_cap
        self.vertices = vertices          # chain -> distance from base

    def __contains__(self, chain):
        return chain in self.vertices

    def type_of(self, chain):
        return vertex_type(chain, self.gog, self.base)

    @property
    def edges(self):
        return sorted((HalfspaceRef(c) for c in self.vertices if c), key=_chain_sort)

    def counts_by_distance(self):
        out = [0] * (self.radius + 1)
        for d in self.vertices.values():
            out[d] += 1
        return tuple(out)

    def neighbours(self, chain):
        out = [c for c in self.vertices if len(c) == len(chain) + 1 and c[:-1] == chain]
        if chain:
            out.append(chain[:-1])
        return out


def _chain_sort(ref):
    return (len(ref.child), repr(ref.child), ref.down)


def children(chain, gog, base, rep_cap):
    """Chains one step further from the base than ``chain``."""
    u = vertex_type(chain, gog, base)
    back = (chain[-1][1][0], -chain[-1][1][1]) if chain else None
    out = []
    for letter in gog.letters_at(u):
        img = gog.alpha(letter)
        if img.index() is None:
            if rep_cap is None:
                raise InfiniteValence(f"edge {letter[0]} has infinite index at {u}")
            reps = img.left_transversal(rep_cap)
        else:
            reps = img.left_transversal()
        ident = gog.vertices[u].identity()
        for t in reps:
            if t == ident and letter == back:
                continue
            out.append(chain + ((t, letter),))
    return out


def universal_ball(gog, base, radius, rep_cap=None, cap=None):
    """Ball of the given edge radius; ``rep_cap`` bounds coset representatives
    across edges of infinite index (required when such edges are crossed)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if base not in gog.vertices:
        raise SchemaError(f"unknown base vertex {base!r}")
    cap = cap if cap is not None else ball_cap()
    verts = {(): 0}
    layer = [()]
    for d in range(1, radius + 1):
        nxt = []
        for c in layer:
            for ch in children(c, gog, base, rep_cap):
                verts[ch] = d
                nxt.append(ch)
                if len(verts) > cap:
                    raise BallTooLarge(f"tree ball exceeds cap {cap}")
        layer = nxt
    return TreeBall(gog, base, radius, rep_cap, verts)


def halfspace_membership(t, s, g):
    """Whether ``g`` lies in ``Z_s``; ``OUT_OF_WINDOW`` if ``g . base`` is outside."""
    chain = g.syllables
    if chain not in t.vertices:
        return OUT_OF_WINDOW
    return s.contains(chain)


class EdgeOrder(Enum):
    EQUAL = "Equal"
    LESS_EQ = "LessEq"
    GREATER_EQ = "GreaterEq"
    OPPOSITE_NESTED = "OppositeNested"
    INCOMPARABLE = "Incomparable"


def halfspace_subset(s, u):
    """Whether the vertex set ``Y_s`` is contained in ``Y_u``."""
    if s.child == u.child:
        return s.down == u.down
    below_su = is_below(s.child, u.child)
    below_us = is_below(u.child, s.child)
    if s.down:
        return below_su if u.down else not (below_su or below_us)
    # the complement of a subtree always contains the base vertex
    return False if u.down else below_us


def edge_order(t, s, u):
    """Compare two oriented edges by containment of their halfspaces.

    ``LESS_EQ`` means ``Y_s`` is inside ``Y_u`` (so ``Z_s`` is inside
    ``Z_u``); ``OPPOSITE_NESTED`` covers the disjoint and the covering cases.
    """
    if t is not None and (s.child not in t.vertices or u.child not in t.vertices):
        return EdgeOrder.INCOMPARABLE
    if s == u:
        return EdgeOrder.EQUAL
    if halfspace_subset(s, u):
        return EdgeOrder.LESS_EQ
    if halfspace_subset(u, s):
        return EdgeOrder.GREATER_EQ
    return EdgeOrder.OPPOSITE_NESTED


# ------------------------------------------------------------------ surgery

def _edge_group_desc(img, name):
    kind, k = img.abstract_type()
    if kind == "finite":
        return finite_cyclic(k, name)
    if k == 1:
        return infinite_cyclic(name)
    return free_group(*[f"{name}{i + 1}" for i in range(k)])


def _fresh(name, taken):
    out, k = name, 1
    while out in taken:
        k += 1
        out = f"{name}{k}"
    return out


def subdivide(gog, edge):
    """Insert a valence-two vertex carrying the edge group in the middle of ``edge``."""
    if edge not in gog.edges:
        raise NotASubgraph(f"unknown edge {edge!r}")
    d = gog.edges[edge]
    mid = _fresh(f"{edge}_mid", gog.vertices)
    gens = set()
    for v in gog.vertices.values():
        gens.update(getattr(v, "generator_names", ()))
    desc = _edge_group_desc(d.source_image, _fresh(f"c_{edge}", gens))
    verts = dict(gog.vertices)
    verts[mid] = desc
    edges = {k: v for k, v in gog.edges.items() if k != edge}
    ea, eb = _fresh(f"{edge}_a", gog.edges), _fresh(f"{edge}_b", gog.edges)
    edges[ea] = EdgeDesc(d.source, mid, d.source_image, whole(desc), d.source_attach, None)
    edges[eb] = EdgeDesc(mid, d.target, whole(desc), d.target_image, None, d.target_attach)
    return GraphOfGroups(verts, edges, name=gog.name)


def _ends_at(gog, v):
    """Edge ends at ``v`` as ``(edge, is_source)`` pairs."""
    out = []
    for e in sorted(gog.edges):
        d = gog.edges[e]
        if d.source == v:
            out.append((e, True))
        if d.target == v:
            out.append((e, False))
    return out


def _image(d, at_source):
    return d.source_image if at_source else d.target_image


def _transport(sub, img_here, img_there):
    """Carry the subgroup ``sub`` of the vertex group at one end of an edge,
    assumed inside that edge's image ``img_here``, across to the other end.
    Returns a SubgroupDesc or None when the image is not a supported kind."""
    there = img_there.ambient
    gens = [img_there.from_abstract(img_here.to_abstract(x)) for x in sub.generators()]
    if not gens:
        return SubgroupDesc(there, "trivial")
    if there.kind == "free":
        if all(len(x) == 1 for x in gens):
            basis = tuple(abs(x[0]) - 1 for x in gens)
            if len(set(basis)) == len(basis):
                if len(basis) == there.rank and sorted(basis) == list(basis):
                    return whole(there)
                return SubgroupDesc(there, "free_factor", basis)
        return None
    m = 0
    for x in gens:
        m = gcd(m, x)
    if there.kind == "finite":
        m = gcd(m, there.order)
    if m in (0,):
        return SubgroupDesc(there, "trivial")
    return whole(there) if m == 1 else cyclic_power(there, m)


def _contained(sub, img):
    """Whether subgroup ``sub`` lies inside ``img`` (same ambient)."""
    return all(img.contains(x) for x in sub.generators())


def remove_redundant(gog):
    """Amalgamate across redundant vertices until none remain.

    A vertex is redundant when it has valence two, is not the base of a
    loop, and both incident edge groups map onto its vertex group.
    """
    changed = True
    while changed:
        changed = False
        for v in sorted(gog.vertices):
            if gog.is_composite(v):
                continue
            ends = _ends_at(gog, v)
            if len(ends) != 2 or ends[0][0] == ends[1][0]:
                continue
            (e1, s1), (e2, s2) = ends
            d1, d2 = gog.edges[e1], gog.edges[e2]
            i1, i2 = _image(d1, s1), _image(d2, s2)
            if not (i1.is_onto() and i2.is_onto()):
                continue
            x = d1.target if s1 else d1.source
            y = d2.target if s2 else d2.source
            if x == v or y == v:
                continue
            far1 = _image(d1, not s1)
            far2 = _image(d2, not s2)
            # carry the abstract generators of e1 through v into the far end of e2
            rebased = [far2.from_abstract(i2.to_abstract(i1.from_abstract(w)))
                       for w in _abstract_generators(far1)]
            new2 = _recognise(far2.ambient, rebased, far1)
            if new2 is None:
                continue
            att1 = d1.target_attach if s1 else d1.source_attach
            att2 = d2.target_attach if s2 else d2.source_attach
            verts = {k: g for k, g in gog.vertices.items() if k != v}
            edges = {k: d for k, d in gog.edges.items() if k not in (e1, e2)}
            edges[_fresh(e1, edges)] = EdgeDesc(x, y, far1, new2, att1, att2)
            gog = GraphOfGroups(verts, edges, name=gog.name)
            changed = True
            break
    return gog


def _abstract_generators(img):
    kind, k = img.abstract_type()
    if kind == "finite":
        return [1] if k > 1 else []
    return [(j + 1,) for j in range(k)]


def _recognise(amb, gens, model):
    """A SubgroupDesc of ``amb`` whose i-th abstract generator is ``gens[i]``."""
    kind, k = model.abstract_type()
    if amb.kind == "free":
        if all(len(x) == 1 and x[0] > 0 for x in gens):
            basis = tuple(x[0] - 1 for x in gens)
            if len(set(basis)) == len(basis):
                if basis == tuple(range(amb.rank)):
                    return whole(amb)
                return SubgroupDesc(amb, "free_factor", basis)
        if not gens:
            return SubgroupDesc(amb, "trivial")
        return None
    if not gens:
        return SubgroupDesc(amb, "trivial")
    if len(gens) != 1:
        return None
    m = gens[0]
    if amb.kind == "cyclic":
        if m <= 0:
            return None
        return whole(amb) if m == 1 else cyclic_power(amb, m)
    sub = cyclic_power(amb, m % amb.order or amb.order)
    return sub if sub.abstract_type() == model.abstract_type() else None


def collapse(gog, subgraph):
    """Collapse each connected component of ``subgraph`` (a set of edge names)
    to a single vertex.  Components that reduce to one vertex group by
    absorbing leaves are replaced by that group; others keep a symbolic
    composite label."""
    sub = set(subgraph)
    bad = sub - set(gog.edges)
    if bad:
        raise NotASubgraph(f"unknown edges {sorted(bad)}")
    g = nx.MultiGraph()
    g.add_nodes_from(gog.vertices)
    for e in sub:
        d = gog.edges[e]
        g.add_edge(d.source, d.target, key=e)
    comp_of, verts = {}, {}
    attach_map = {}
    for comp in sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0]):
        inner = [e for e in sorted(sub) if gog.edges[e].source in comp]
        if not inner:
            v = comp[0]
            comp_of[v] = v
            verts[v] = gog.vertices[v]
            continue
        name = "+".join(comp)
        subgog = GraphOfGroups({v: gog.vertices[v] for v in comp},
                               {e: gog.edges[e] for e in inner}, name=name)
        for v in comp:
            comp_of[v] = name
        verts[name] = CompositeGroup(subgog)
        attach_map[name] = subgog
    edges = {}
    for e, d in gog.edges.items():
        if e in sub:
            continue
        s, t = comp_of[d.source], comp_of[d.target]
        sa = d.source if isinstance(verts[s], CompositeGroup) else d.source_attach
        ta = d.target if isinstance(verts[t], CompositeGroup) else d.target_attach
        edges[e] = EdgeDesc(s, t, d.source_image, d.target_image, sa, ta)
    out = GraphOfGroups(verts, edges, name=gog.name)
    for name in sorted(attach_map):
        out = _simplify_composite(out, name)
    return out


def _simplify_composite(gog, name):
    """Absorb onto-leaves of a composite vertex; flatten it if one vertex remains."""
    comp = gog.vertices[name].sub
    edges = dict(gog.edges)
    inner_verts = dict(comp.vertices)
    inner_edges = dict(comp.edges)
    progress = True
    while progress and len(inner_verts) > 1:
        progress = False
        for leaf in sorted(inner_verts):
            ends = [(e, d.source == leaf) for e, d in inner_edges.items()
                    if leaf in (d.source, d.target)]
            if len(ends) != 1:
                continue
            e, at_src = ends[0]
            d = inner_edges[e]
            if d.source == d.target:
                continue
            here, there = _image(d, at_src), _image(d, not at_src)
            if not here.is_onto():
                continue
            nb = d.target if at_src else d.source
            new_edges = {}
            ok = True
            for k, od in edges.items():
                nd = od
                for end in ("source", "target"):
                    if getattr(nd, end) == name and getattr(nd, end + "_attach") == leaf:
                        img = getattr(nd, end + "_image")
                        moved = _transport(img, here, there)
                        if moved is None:
                            ok = False
                            break
                        kw = {end + "_image": moved, end + "_attach": nb}
                        nd = EdgeDesc(**{**nd.__dict__, **kw})
                if not ok:
                    break
                new_edges[k] = nd
            if not ok:
                continue
            edges = new_edges
            del inner_verts[leaf]
            del inner_edges[e]
            progress = True
            break
    verts = dict(gog.vertices)
    if len(inner_verts) == 1:
        (only,) = inner_verts
        verts[name] = inner_verts[only]
        edges = {k: EdgeDesc(d.source, d.target, d.source_image, d.target_image,
                             None if d.source == name else d.source_attach,
                             None if d.target == name else d.target_attach)
                 for k, d in edges.items()}
        if only != name:
            verts[only] = verts.pop(name)
            edges = {k: EdgeDesc(only if d.source == name else d.source,
                                 only if d.target == name else d.target,
                                 d.source_image, d.target_image, d.source_attach,
                                 d.target_attach) for k, d in edges.items()}
    else:
        verts[name] = CompositeGroup(GraphOfGroups(inner_verts, inner_edges, name=name))
    return GraphOfGroups(verts, edges, name=gog.name)


@dataclass(frozen=True)
class SplitData:
    """A one-edge splitting ``G(v) = left *_{left & right} right`` of a vertex group.

    ``left`` and ``right`` are subgroups of the vertex group: two free
    factors whose bases cover the generators, or, for a cyclic vertex group,
    a cyclic power and the whole group.  ``attach`` optionally pins edge ends
    (``(edge, is_source)``) to ``"left"`` or ``"right"`` when both would do.
    """

    left: SubgroupDesc
    right: SubgroupDesc
    attach: tuple = ()

    def edge_group(self):
        amb = self.left.ambient
        if self.right.kind == "whole":
            return self.left
        if self.left.kind == "whole":
            return self.right
        if amb.kind == "free":
            common = tuple(sorted(set(self.left.basis) & set(self.right.basis)))
            return SubgroupDesc(amb, "free_factor", common) if common else SubgroupDesc(
                amb, "trivial")
        return self.left if self.right.kind == "whole" else self.right


def _side_group(sub, tag):
    amb = sub.ambient
    if sub.kind == "whole":
        return amb
    if amb.kind == "free":
        return free_group(*[amb.generator_names[i] for i in sub.basis])
    name = f"{amb.generator_names[0]}_{sub.exponent}"
    if amb.kind == "cyclic":
        return infinite_cyclic(name)
    return finite_cyclic(sub.abstract_type()[1], name)


def _restrict(img, side, side_group):
    """Express ``img`` (inside ``side``) as a subgroup of ``side_group``."""
    amb = img.ambient
    if side.kind == "whole":
        return SubgroupDesc(side_group, img.kind, img.basis, img.exponent)
    if amb.kind == "free":
        gens = [side.to_abstract(x) for x in img.generators()]
        return _recognise(side_group, gens, img)
    if img.kind == "trivial":
        return SubgroupDesc(side_group, "trivial")
    m = img._modulus() // side._modulus()
    return whole(side_group) if m == 1 else cyclic_power(side_group, m)


def refine_at_vertex(gog, vertex, split):
    """Split ``vertex`` into two vertices joined by a new edge.

    Every incident edge group must lie in one side of ``split``.  The result
    records vertices made redundant by the move in ``meta['redundant']``.
    """
    if vertex not in gog.vertices:
        raise NotASubgraph(f"unknown vertex {vertex!r}")
    amb = gog.vertices[vertex]
    if split.left.ambient != amb or split.right.ambient != amb:
        raise SchemaError("split data does not live in the vertex group")
    if amb.kind == "free":
        if set(split.left.basis) | set(split.right.basis) != set(range(amb.rank)) and not (
                split.left.kind == "whole" or split.right.kind == "whole"):
            raise SchemaError("free factor split must cover all generators")
    elif "whole" not in (split.left.kind, split.right.kind):
        raise SchemaError("a cyclic vertex group only splits trivially")
    pins = dict(split.attach)
    lname, rname = _fresh(f"{vertex}_L", gog.vertices), _fresh(f"{vertex}_R", gog.vertices)
    lgrp, rgrp = _side_group(split.left, "L"), _side_group(split.right, "R")
    if lgrp == rgrp and split.left != split.right:
        rgrp = VertexGroupDesc(rgrp.kind, tuple(n + "_r" for n in rgrp.generator_names),
                               rgrp.order)
    verts = {k: v for k, v in gog.vertices.items() if k != vertex}
    verts[lname], verts[rname] = lgrp, rgrp
    edges = {}
    for e, d in gog.edges.items():
        nd = d
        for at_src in (True, False):
            if (d.source if at_src else d.target) != vertex:
                continue
            img = _image(d, at_src)
            in_l, in_r = _contained(img, split.left), _contained(img, split.right)
            if not (in_l or in_r):
                raise EdgeGroupNotElliptic(f"edge {e} lies in neither side at {vertex}")
            side = pins.get((e, at_src)) or ("left" if in_l else "right")
            if side == "left" and not in_l or side == "right" and not in_r:
                raise EdgeGroupNotElliptic(f"edge {e} cannot attach on the {side}")
            name, sgrp, ssub = ((lname, lgrp, split.left) if side == "left"
                                else (rname, rgrp, split.right))
            new_img = _restrict(img, ssub, sgrp)
            end = "source" if at_src else "target"
            nd = EdgeDesc(**{**nd.__dict__, end: name, end + "_image": new_img})
        edges[e] = nd
    common = split.edge_group()
    new_edge = _fresh(f"{vertex}_split", gog.edges)
    edges[new_edge] = EdgeDesc(lname, rname, _restrict(common, split.left, lgrp),
                               _restrict(common, split.right, rgrp))
    out = GraphOfGroups(verts, edges, name=gog.name)
    out.meta["new_edge"] = new_edge
    out.meta["redundant"] = [v for v in (lname, rname) if _is_redundant(out, v)]
    return out


def _is_redundant(gog, v):
    ends = _ends_at(gog, v)
    if len(ends) != 2 or ends[0][0] == ends[1][0]:
        return False
    return all(_image(gog.edges[e], s).is_onto() for e, s in ends)


def is_minimal(gog):
    """No valence-one vertex whose edge group maps onto its vertex group."""
    for v in gog.vertices:
        ends = _ends_at(gog, v)
        if len(ends) == 1:
            e, s = ends[0]
            d = gog.edges[e]
            if d.source != d.target and not gog.is_composite(v) and _image(d, s).is_onto():
                return False
    return True


def edge_splitting(gog, edge):
    """The one-edge splitting given by ``edge``: collapse everything else."""
    if edge not in gog.edges:
        raise NotASubgraph(f"unknown edge {edge!r}")
    if not is_minimal(gog):
        raise NotMinimal("edge splittings are only defined for minimal graphs of groups")
    return collapse(gog, set(gog.edges) - {edge})


# -------------------------------------------------------------- isomorphism

def _group_sig(g):
    if isinstance(g, CompositeGroup):
        return ("composite", _gog_sig(g.sub))
    if g.kind == "named":
        return ("named", g.name)
    if g.kind == "cyclic" or (g.kind == "free" and g.rank == 1):
        return ("Z",)
    if g.kind == "finite":
        return ("Zn", g.order)
    return ("F", g.rank)


def _image_sig(img):
    kind, k = img.abstract_type()
    return (kind, k, img.index(), img.kind if img.ambient.kind == "free" else "c",
            img.exponent if img.kind == "cyclic_power" else 0)


def _gog_sig(gog):
    vs = sorted(repr(_group_sig(v)) for v in gog.vertices.values())
    es = sorted(repr(sorted([repr(_image_sig(d.source_image)), repr(_image_sig(d.target_image))]))
                for d in gog.edges.values())
    return (tuple(vs), tuple(es))


def _as_graph(gog, use_labels):
    g = nx.MultiGraph()
    for v, grp in sorted(gog.vertices.items()):
        g.add_node(("v", v), sig=(repr(_group_sig(grp)),
                                  gog.labels.get(v) if use_labels else None))
    for e, d in sorted(gog.edges.items()):
        g.add_node(("e", e), sig=("edge", repr(_image_sig(d.source_image)[:2])))
        g.add_edge(("v", d.source), ("e", e), sig=repr(_image_sig(d.source_image)))
        g.add_edge(("v", d.target), ("e", e), sig=repr(_image_sig(d.target_image)))
    return g


def gog_isomorphic(g1, g2, use_labels=True):
    """Structural isomorphism up to renaming; returns ``(bool, witness)``.

    The witness maps vertex and edge names of ``g1`` to those of ``g2``.
    """
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return False, None
    a, b = _as_graph(g1, use_labels), _as_graph(g2, use_labels)
    # prefer the identity so that witnesses are reproducible
    if set(a.nodes) == set(b.nodes) and all(a.nodes[n] == b.nodes[n] for n in a.nodes) and \
            sorted(a.edges(data="sig")) == sorted(b.edges(data="sig")):
        return True, {n[1]: n[1] for n in sorted(a.nodes)}
    gm = MultiGraphMatcher(a, b, node_match=lambda x, y: x["sig"] == y["sig"],
                           edge_match=lambda x, y: sorted(d["sig"] for d in x.values())
                           == sorted(d["sig"] for d in y.values()))
    for m in gm.isomorphisms_iter():
        return True, {k[1]: v[1] for k, v in sorted(m.items())}
    return False, None


# ---------------------------------------------------------------------- DOT

def _dot_id(s):
    return '"' + str(s).replace('"', r'\"') + '"'


def gog_to_dot(gog, name="gog"):
    lines = [f"graph {_dot_id(name)} {{"]
    for v in sorted(gog.vertices):
        lab = gog.labels.get(v)
        shape = {"V0": "box", "V1": "ellipse"}.get(lab, "ellipse")
        style = ', style=filled, fillcolor="#dddddd"' if lab == "V0" else ""
        text = f"{v}\\n{gog.vertices[v].describe()}" + (f"\\n{lab}" if lab else "")
        lines.append(f"  {_dot_id(v)} [label={_dot_id(text)}, shape={shape}{style}];")
    for e in sorted(gog.edges):
        d = gog.edges[e]
        text = f"{e}: {d.source_image.describe()} | {d.target_image.describe()}"
        lines.append(f"  {_dot_id(d.source)} -- {_dot_id(d.target)} [label={_dot_id(text)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def chain_label(chain, gog):
    if not chain:
        return "*"
    parts = []
    for t, (e, s) in chain:
        v = gog.origin((e, s))
        grp = gog.vertices[v]
        if t != grp.identity():
            parts.append(grp.format(t))
        parts.append(e if s > 0 else e + "^-1")
    return ".".join(parts)


def tree_to_dot(ball, name="tree"):
    gog = ball.gog
    lines = [f"graph {_dot_id(name)} {{"]
    for c in sorted(ball.vertices, key=lambda c: (len(c), repr(c))):
        lines.append(f"  {_dot_id(chain_label(c, gog))} "
                     f"[label={_dot_id(ball.type_of(c) + ':' + chain_label(c, gog))}];")
    for c in sorted(ball.vertices, key=lambda c: (len(c), repr(c))):
        if c:
            lines.append(f"  {_dot_id(chain_label(c[:-1], gog))} -- {_dot_id(chain_label(c, gog))};")
    lines.append("}")
    return "\n".join(lines) + "\n"
