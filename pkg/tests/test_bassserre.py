from __future__ import annotations

import random

import pytest

from regnbhd.bassserre import (OUT_OF_WINDOW, EdgeOrder, HalfspaceRef, SplitData, collapse,
                               edge_order, edge_splitting, gog_isomorphic, gog_to_dot,
                               halfspace_membership, is_minimal, refine_at_vertex,
                               remove_redundant, subdivide, universal_ball)
from regnbhd.errors import EdgeGroupNotElliptic, InfiniteValence, NotASubgraph, NotMinimal
from regnbhd.groupcore import (EdgeDesc, GraphOfGroups, cyclic_power, enumerate_ball,
                               free_factor, free_group, parse_element, whole)
from regnbhd.presentations import (g1_presentation, g2_presentation, g3_presentation,
                                   gpq_presentation)

G32 = gpq_presentation(3, 2)
G2 = g2_presentation()
G1 = g1_presentation()


def branch_counts(gog, base, radius, rep_cap):
    """Vertices per distance from edge indices alone (no coset chains)."""
    def width(letter):
        img = gog.alpha(letter)
        return img.index() if img.index() is not None else len(img.left_transversal(rep_cap))

    counts = [1]
    layer = {(base, None): 1}
    for _ in range(radius):
        nxt = {}
        for (v, came), n in layer.items():
            for letter in gog.letters_at(v):
                k = width(letter) - (1 if came == (letter[0], -letter[1]) else 0)
                key = (gog.terminus(letter), letter)
                nxt[key] = nxt.get(key, 0) + n * k
        counts.append(sum(nxt.values()))
        layer = nxt
    return tuple(counts)


# -------------------------------------------------------------------- balls

def test_g32_ball_counts():
    assert universal_ball(G32, "A", 2).counts_by_distance() == (1, 3, 3)
    b0 = universal_ball(G32, "A", 0)
    assert b0.counts_by_distance() == (1,) and b0.edges == []


@pytest.mark.parametrize("gog,base,cap", [(G2, "A", 1), (G2, "D", 1), (G32, "B", None)])
def test_ball_counts_match_index_recursion(gog, base, cap):
    ball = universal_ball(gog, base, 3, rep_cap=cap)
    assert ball.counts_by_distance() == branch_counts(gog, base, 3, cap)


def test_infinite_valence_needs_a_cap():
    with pytest.raises(InfiniteValence):
        universal_ball(G2, "A", 1)


def test_ball_is_a_tree():
    ball = universal_ball(G32, "A", 4)
    for v, d in ball.vertices.items():
        if v:
            assert ball.vertices[v[:-1]] == d - 1
    assert len(ball.edges) == len(ball.vertices) - 1


# --------------------------------------------------------------- halfspaces

def reachable_below(ball, child):
    seen, todo = {child}, [child]
    while todo:
        v = todo.pop()
        for w in ball.neighbours(v):
            if w not in seen and w != child[:-1]:
                seen.add(w)
                todo.append(w)
    return seen


def test_membership_at_identity():
    ball = universal_ball(G32, "A", 2)
    s = ball.edges[0]
    ident = G32.identity("A")
    assert halfspace_membership(ball, s.reverse(), ident) is True
    assert halfspace_membership(ball, s, ident) is False


def test_membership_matches_ball_adjacency():
    ball = universal_ball(G32, "A", 3)
    elements = enumerate_ball(G32, 8, "A")
    a = parse_element("a", G32, "A")
    for s in ball.edges:
        below = reachable_below(ball, s.child)
        for g in elements:
            got = halfspace_membership(ball, s, g)
            if g.syllables not in ball:
                assert got is OUT_OF_WINDOW
                continue
            assert got == (g.syllables in below)
            ag = halfspace_membership(ball, s, a * g)
            if ag is not OUT_OF_WINDOW:
                # a fixes the base vertex, so it moves g.base across s only
                # when it moves the whole branch
                assert ag == ((a * g).syllables in below)


def test_edge_order_examples():
    ball = universal_ball(G32, "A", 3)
    deep = next(e for e in ball.edges if len(e.child) == 2)
    top = HalfspaceRef(deep.child[:1])
    assert edge_order(ball, top, top) is EdgeOrder.EQUAL
    assert edge_order(ball, deep, top) is EdgeOrder.LESS_EQ
    assert edge_order(ball, top, deep) is EdgeOrder.GREATER_EQ
    assert edge_order(ball, top, top.reverse()) is EdgeOrder.OPPOSITE_NESTED


def test_edge_order_coherent_with_membership():
    ball = universal_ball(G32, "A", 3)
    refs = ball.edges + [e.reverse() for e in ball.edges]
    elements = [g for g in enumerate_ball(G32, 8, "A") if g.syllables in ball]
    for s in refs:
        for u in refs:
            o = edge_order(ball, s, u)
            back = edge_order(ball, u, s)
            flip = {EdgeOrder.LESS_EQ: EdgeOrder.GREATER_EQ,
                    EdgeOrder.GREATER_EQ: EdgeOrder.LESS_EQ}
            assert back == flip.get(o, o)
            if o is EdgeOrder.LESS_EQ:
                assert all(halfspace_membership(ball, u, g) for g in elements
                           if halfspace_membership(ball, s, g))


def test_halfspaces_of_a_minimal_tree_meet_the_base_orbit():
    ball = universal_ball(G32, "A", 4)
    base_type = [v for v in ball.vertices if ball.type_of(v) == "A"]
    for s in ball.edges:
        if len(s.child) > 2:
            continue
        inside = sum(1 for v in base_type if s.contains(v))
        assert 0 < inside < len(base_type)


# ------------------------------------------------------------------ surgery

def test_subdivide_inserts_the_edge_group():
    s = subdivide(G1, "e")
    assert len(s.vertices) == 3 and len(s.edges) == 2
    mid = next(v for v in s.vertices if v not in G1.vertices)
    assert s.vertices[mid].kind == "cyclic"
    assert gog_isomorphic(remove_redundant(s), G1)[0]


def test_remove_redundant_keeps_a_proper_inclusion():
    assert set(remove_redundant(G2).vertices) == {"A", "D", "B"}


def random_tree_gog(rng, n):
    verts = {f"V{k}": free_group(*[f"x{k}_{j}" for j in range(rng.randint(2, 3))])
             for k in range(n)}
    edges = {}
    for k in range(1, n):
        p = rng.randrange(k)
        a, b = verts[f"V{p}"], verts[f"V{k}"]
        ga, gb = rng.choice(a.generator_names), rng.choice(b.generator_names)
        edges[f"e{k}"] = EdgeDesc(f"V{p}", f"V{k}", free_factor(a, ga), free_factor(b, gb))
    return GraphOfGroups(verts, edges, name=f"random{n}")


def test_subdivision_round_trip_on_random_graphs():
    rng = random.Random(7)
    for _ in range(50):
        g = random_tree_gog(rng, rng.randint(2, 5))
        e = rng.choice(sorted(g.edges))
        assert gog_isomorphic(remove_redundant(subdivide(g, e)), g)[0]


def test_collapse_examples():
    s = subdivide(G1, "e")
    assert gog_isomorphic(collapse(s, {"e_a"}), G1)[0]
    whole_graph = collapse(s, set(s.edges))
    assert len(whole_graph.vertices) == 1 and not whole_graph.edges
    for e in G2.edges:
        assert gog_isomorphic(collapse(G2, set(G2.edges) - {e}), edge_splitting(G2, e))[0]
    with pytest.raises(NotASubgraph):
        collapse(G1, {"nope"})


def test_refine_d_by_its_index_two_subgroup():
    D = G2.vertices["D"]
    r = refine_at_vertex(G2, "D", SplitData(cyclic_power(D, 2), whole(D)))
    assert len(r.vertices) == 4 and len(r.edges) == 3
    new = r.edges[r.meta["new_edge"]]
    # A -6D- 2D -2D- D -D- B
    assert new.source_image.kind == "whole"
    assert new.target_image.kind == "cyclic_power" and new.target_image.exponent == 2
    assert r.edges["e"].target_image.exponent == 3
    assert r.edges["f"].source_image.kind == "whole"
    assert r.meta["redundant"] == []
    assert gog_isomorphic(collapse(r, {r.meta["new_edge"]}), G2)[0]


def test_refine_with_a_whole_side_flags_a_redundant_vertex():
    A = G1.vertices["A"]
    r = refine_at_vertex(G1, "A", SplitData(free_factor(A, "a1"), whole(A)))
    assert r.meta["redundant"] == ["A_L"]
    assert gog_isomorphic(collapse(r, {r.meta["new_edge"]}), G1)[0]
    assert gog_isomorphic(remove_redundant(r), G1)[0]


def test_refine_rejects_non_elliptic_edge_groups():
    g3 = g3_presentation()
    L = g3.vertices["L0"]
    with pytest.raises(EdgeGroupNotElliptic):
        refine_at_vertex(g3, "L0", SplitData(free_factor(L, "a", "b"), free_factor(L, "d", "e")))


def test_is_minimal_examples():
    assert is_minimal(G1)
    assert is_minimal(G2)
    A, B = free_group("a1", "a2"), free_group("b1", "b2")
    leaf = GraphOfGroups({"A": A, "B": B},
                         {"e": EdgeDesc("A", "B", whole(A), free_factor(B, "b1", "b2"))})
    assert not is_minimal(leaf)
    with pytest.raises(NotMinimal):
        edge_splitting(leaf, "e")


def test_edge_splitting_examples():
    assert gog_isomorphic(edge_splitting(G1, "e"), G1)[0]
    s = subdivide(G1, "e")
    for e in s.edges:
        assert gog_isomorphic(edge_splitting(s, e), G1)[0]
    out = edge_splitting(G2, "e")
    assert len(out.vertices) == 2 and out.is_composite("B+D")


def test_gog_isomorphic_examples():
    renamed = GraphOfGroups({"P": G1.vertices["A"], "Q": G1.vertices["B"]},
                            {"x": EdgeDesc("Q", "P", G1.edges["e"].target_image,
                                           G1.edges["e"].source_image)})
    ok, witness = gog_isomorphic(G1, renamed)
    assert ok and witness["A"] in ("P", "Q")
    assert not gog_isomorphic(G1, subdivide(G1, "e"))[0]


def test_dot_marks_v0_vertices():
    s = subdivide(G1, "e")
    labelled = GraphOfGroups(s.vertices, s.edges, labels={"A": "V1", "B": "V1", "e_mid": "V0"})
    dot = gog_to_dot(labelled, name="g1")
    assert '"e_mid"' in dot and "shape=box" in dot and dot.count("shape=ellipse") == 2
