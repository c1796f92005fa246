from __future__ import annotations

from itertools import combinations, permutations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regnbhd.errors import AxiomsFail
from regnbhd.pretree import (Pretree, check_axioms, is_discrete, realize_tree, stars,
                             subdivide_tree, tree_to_dot, vertex_pretree)


@st.composite
def random_trees(draw, max_nodes=60):
    n = draw(st.integers(1, max_nodes))
    t = nx.Graph()
    t.add_node(0)
    for k in range(1, n):
        t.add_edge(draw(st.integers(0, k - 1)), k)
    return t


def canonical(tree):
    """Name each V1 node by its set of V0 neighbours."""
    names = {}
    for node in tree.nodes:
        if node[0] == "V1":
            names[node] = ("V1", frozenset(w[1] for w in tree.neighbors(node)))
        else:
            names[node] = node
    return {frozenset((names[u], names[v])) for u, v in tree.edges}, set(names.values())


def clique_oracle(p):
    """Maximal pairwise-adjacent subsets by exhaustive search."""
    pts = list(p.points)
    good = [set(c) for r in range(1, len(pts) + 1) for c in combinations(pts, r)
            if all(p.adjacent(x, y) for x, y in combinations(c, 2))]
    return {frozenset(s) for s in good if not any(s < t for t in good)}


def path_pretree():
    return Pretree.from_triples("abc", [("a", "b", "c")])


def test_path_passes_and_swap_fails_t2():
    assert check_axioms(path_pretree()) is None
    bad = Pretree.from_triples("abc", [("a", "b", "c"), ("a", "c", "b")])
    axiom, _ = check_axioms(bad)
    assert axiom == "T2"
    with pytest.raises(AxiomsFail):
        stars(bad)
    with pytest.raises(AxiomsFail):
        realize_tree(bad)


def test_t0_and_t3_violations_are_reported():
    assert check_axioms(Pretree.from_triples("ab", [("a", "b", "a")]))[0] == "T0"
    # b between a and c, d adjacent to b on neither side
    p = Pretree.from_triples("abcd", [("a", "b", "c"), ("a", "d", "c")])
    assert check_axioms(p)[0] in ("T2", "T3")
    only_t3 = Pretree("abcd", frozenset({("a", "b", "c"), ("c", "b", "a")}))
    assert check_axioms(only_t3)[0] == "T3"


def test_stars_of_small_pretrees():
    assert stars(path_pretree()) == [frozenset("ab"), frozenset("bc")]
    antichain = Pretree.from_triples("wxyz", [])
    assert stars(antichain) == [frozenset("wxyz")]


def test_k14_stars_match_clique_oracle():
    k14 = nx.star_graph(4)
    p = vertex_pretree(k14)
    assert set(stars(p)) == clique_oracle(p)
    assert len(stars(p)) == 4


def test_single_point_and_empty():
    t = realize_tree(Pretree.from_triples(["x"], []))
    assert list(t.nodes) == [("V0", "x")] and t.number_of_edges() == 0
    assert is_discrete(Pretree(()))
    assert check_axioms(Pretree(())) is None


def test_is_discrete_reports_the_stability_flag():
    assert is_discrete(path_pretree())
    assert not is_discrete(path_pretree(), stable=False)


def test_three_edge_path_realises_with_six_edges():
    t = realize_tree(vertex_pretree(nx.path_graph(4)))
    assert t.number_of_edges() == 6
    assert canonical(t) == canonical(subdivide_tree(nx.path_graph(4)))


def test_one_edge_tree_gives_two_adjacent_points():
    p = vertex_pretree(nx.path_graph(2))
    assert not p.triples and p.adjacent(0, 1)
    assert vertex_pretree(nx.path_graph(3)).between(0, 1, 2)


@settings(max_examples=120, deadline=None)
@given(random_trees())
def test_random_tree_pretrees(tree):
    p = vertex_pretree(tree)
    assert check_axioms(p) is None
    realized = realize_tree(p)
    assert canonical(realized) == canonical(subdivide_tree(tree))
    assert nx.is_tree(realized)
    assert realized.number_of_edges() == realized.number_of_nodes() - 1
    back = vertex_pretree(realized)
    for x, y, z in p.triples:
        assert back.between(("V0", x), ("V0", y), ("V0", z))
    assert all(p.between(x[1], y[1], z[1]) for x, y, z in back.triples
               if x[0] == y[0] == z[0] == "V0")
    assert set(stars(p)) == {frozenset(e) for e in tree.edges} or tree.number_of_nodes() == 1


@pytest.mark.parametrize("n_leaves", [3, 4])
def test_point_permutations_extend_to_tree_automorphisms(n_leaves):
    tree = nx.star_graph(n_leaves)
    p = vertex_pretree(tree)
    base = canonical(realize_tree(p))
    for perm in permutations(range(1, n_leaves + 1)):
        pi = {0: 0, **dict(zip(range(1, n_leaves + 1), perm))}
        q = Pretree.from_triples([pi[x] for x in p.points],
                                 [(pi[x], pi[y], pi[z]) for x, y, z in p.triples])
        assert q.triples == p.triples
        assert canonical(realize_tree(q)) == base


def test_json_and_dot_round_trip():
    p = path_pretree()
    assert Pretree.from_json(p.to_json()).triples == p.triples
    dot = tree_to_dot(realize_tree(p))
    assert dot.count("shape=box") == 3 and dot.count("shape=ellipse") == 2
