from __future__ import annotations

import pytest

from _support import ball, double_coset_count, gallery_run
from regnbhd.bassserre import (HalfspaceRef, SplitData, gog_isomorphic, is_minimal,
                               subdivide, universal_ball)
from regnbhd.corners import CornerClass, halfspace_set, load_direct_table, pair_classes
from regnbhd.errors import NonzeroIntersection, NotEnclosed, NoStabilization, WindowTooSmall
from regnbhd.gallery import g2_sets, g3_sets, gallery_scenario
from regnbhd.groupcore import GraphOfGroups, cyclic_power, parse_element, whole
from regnbhd.neighbourhood import (build_from_table, build_regnbhd, check_regnbhd_axioms,
                                   compatible_realize, encloses, intersection_number,
                                   isolated_vertex_check, nest_isolated, normalize_B,
                                   translate_adjacent, translates)
from regnbhd.presentations import g1_presentation, g2_presentation

# ---------------------------------------------------------------- translates


def test_g1_translates_match_translated_edges():
    sc = gallery_scenario("g1")
    (x,) = sc.family
    (s,) = x.terms
    wf = translates(sc.family, 2)
    edges = {s.translate(g) for g in ball(sc.gog, 2, sc.base)}
    assert len(wf) == len(edges) == 9
    assert {m.aiset.terms[0].translate(m.g) if hasattr(m.aiset, "terms") else None
            for m in wf.members} <= edges | {None}


def test_empty_family_has_no_translates():
    assert len(translates([], 3)) == 0


def test_g2_translates_match_membership_vectors():
    g, base, fam = g2_sets()
    wf = translates(fam, 4)
    probe = ball(g, 7, base)
    vectors = set()
    for h in ball(g, 4, base):
        for i, x in enumerate(fam):
            y = x.translate(h)
            vectors.add((i, tuple(y.contains(p) for p in probe)))
    assert len(wf) == len(vectors)


# ----------------------------------------------------------------- partition

def base_ccc(result):
    part = result.partition
    return part.members_of(part.base_class[0])


def test_g1_classes_are_singletons():
    _, res, _ = gallery_run("g1")
    assert all(len(c) == 1 for c in res.partition.classes)


def test_g2_ccc_has_exactly_five_members():
    sc, res, _ = gallery_run("g2")
    part = res.partition
    d = lambda k: parse_element(f"d^{k}", sc.gog, sc.base)
    expected = {part.wf.find(0, d(0)), part.wf.find(0, d(3)), part.wf.find(1, d(0)),
                part.wf.find(1, d(2)), part.wf.find(1, d(4))}
    assert None not in expected
    assert set(part.classes[part.base_class[0]]) == expected


def test_g3_sigma_and_tau_share_a_class():
    _, res, _ = gallery_run("g3")
    names = {m.name for m in base_ccc(res)}
    assert {"sigma", "tau"} <= names


def test_g2_translates_by_vertex_groups_are_adjacent():
    sc, res, _ = gallery_run("g2")
    a = parse_element("e^-1*a2*e", sc.gog, sc.base)
    b = parse_element("f*b2*f^-1", sc.gog, sc.base)
    assert translate_adjacent(res, a)
    assert translate_adjacent(res, b)
    # a*b moves the base class two stars away, past the computed window
    with pytest.raises(WindowTooSmall):
        translate_adjacent(res, a * b)


def test_g1_pretree_is_a_path_of_edges():
    _, res, _ = gallery_run("g1")
    stars = res.realized
    assert all(stars.degree(n) <= 2 or n[0] == "V1" for n in stars.nodes)


def test_pairwise_crossing_sets_give_one_point():
    rows = [{"i": i, "eps_i": a, "j": j, "eps_j": b, "class": "Large"}
            for i in range(3) for j in range(3) if i != j for a in (0, 1) for b in (0, 1)]
    table = load_direct_table({"schemaVersion": 1, "group": "G", "sets": ["P", "Q", "R"],
                               "entries": rows})
    out = build_from_table(table)
    assert list(out.gog.vertices) == ["G"] and out.gog.labels == {"G": "V0"}


# ------------------------------------------------------------------- builds

def test_g1_output_is_the_subdivided_edge():
    _, res, _ = gallery_run("g1")
    g1 = g1_presentation()
    expected = subdivide(g1, "e")
    expected.labels.update({"A": "V1", "B": "V1", "e_mid": "V0"})
    expected = GraphOfGroups(expected.vertices, expected.edges, labels=expected.labels)
    assert gog_isomorphic(res.gog, expected)[0]
    (v0,) = [v for v, lab in res.gog.labels.items() if lab == "V0"]
    assert res.gog.vertices[v0].kind == "cyclic"


def test_g2_output_is_the_amalgam_over_d():
    _, res, _ = gallery_run("g2")
    expected = g2_presentation()
    expected = GraphOfGroups(expected.vertices, expected.edges,
                             labels={"A": "V1", "D": "V0", "B": "V1"})
    assert gog_isomorphic(res.gog, expected)[0]
    assert [v for v, lab in res.gog.labels.items() if lab == "V0"] == ["D"]


def test_empty_family_gives_one_vertex():
    _, res, report = gallery_run("g5")
    assert list(res.gog.vertices) == ["G"]
    assert res.gog.labels == {"G": "V0"} and not res.gog.edges
    assert report.passed


def test_short_schedule_does_not_stabilise():
    sc = gallery_scenario("g2")
    with pytest.raises(NoStabilization):
        build_regnbhd(sc.family, (1,), gog=sc.gog)


@pytest.mark.parametrize("name", ["g1", "g2", "g3", "g4a", "g5"])
def test_outputs_are_minimal_and_bipartite(name):
    _, res, _ = gallery_run(name)
    assert is_minimal(res.gog)
    for d in res.gog.edges.values():
        assert {res.gog.labels[d.source], res.gog.labels[d.target]} == {"V0", "V1"}


def test_workers_do_not_change_the_answer():
    sc, res, _ = gallery_run("g2")
    out = build_regnbhd(sc.family, sc.schedule, gog=sc.gog, workers=2)
    assert out.to_json() == res.to_json()


# ---------------------------------------------------------- isolated members

def toggled(x, radius=5):
    b = ball(x.gog, radius, x.base)
    inside = next(h for h in b if x.contains(h) and not h.is_identity())
    outside = next(h for h in b if not x.contains(h))
    return x.with_toggles([inside, outside], name=x.name + "'")


def test_nest_isolated():
    sc = gallery_scenario("g1")
    assert nest_isolated(sc.family) == sc.family
    (x,) = nest_isolated([toggled(sc.family[0])])
    assert not x.toggle_points()
    g, base, fam = g2_sets()
    assert nest_isolated(fam) == fam
    # two copies of one splitting collapse to one
    assert len(nest_isolated([sc.family[0], toggled(sc.family[0])])) == 1


def d_split(m):
    g = g2_presentation()
    D = g.vertices["D"]
    return g, ("refine", "D", SplitData(cyclic_power(D, m), whole(D)))


def test_compatible_realize_chain():
    g, s2 = d_split(2)
    out = compatible_realize(g, "D", [s2, ("edge", "e")], radii=(2, 3))
    assert len(out.edges) == 2 and len(out.vertices) == 3
    groups = sorted(v.describe() for v in out.vertices.values())
    assert any(t.startswith("pi1[") for t in groups)
    assert "F(a1,a2)" in groups


def test_compatible_realize_single_splitting():
    g = g1_presentation()
    assert gog_isomorphic(compatible_realize(g, "A", [("edge", "e")]), g)[0]


def test_crossing_splittings_are_incompatible():
    g, s2 = d_split(2)
    _, s3 = d_split(3)
    with pytest.raises(NonzeroIntersection) as info:
        compatible_realize(g, "D", [s2, s3], radii=(2, 3))
    assert (info.value.i, info.value.j, info.value.value) == (0, 1, 1)


# ------------------------------------------------------------------ enclosing

def g2_halfspace(t=0):
    g = g2_presentation()
    return halfspace_set(g, "D", HalfspaceRef(((t, ("e", -1)),)), name=f"Z{t}")


def test_halfspace_enclosed_by_both_endpoints():
    z = g2_halfspace()
    (s,) = z.terms
    assert encloses(("vertex", s.parent), z)
    assert encloses(("vertex", s.child), z)
    assert encloses(s, z)


def test_g2_sets_enclosed_by_the_d_vertex_only():
    _, _, (z2, z3) = g2_sets()
    assert encloses(("vertex", ()), z2) and encloses(("vertex", ()), z3)
    a_vertex = z2.terms[0].child
    assert not encloses(("vertex", a_vertex), z2)


def test_equivalent_variant_is_enclosed_like_the_halfspace():
    z = g2_halfspace()
    v = toggled(z)
    (s,) = z.terms
    assert encloses(("vertex", s.parent), v) and encloses(("vertex", s.child), v)


def test_normalize_b_fixes_a_halfspace():
    z = g2_halfspace()
    b = normalize_B(z, ("vertex", ()))
    assert all(b.contains(x) == z.contains(x) for x in ball(z.gog, 6, "D"))


def nested_against_window(b, gog, base, radius=2):
    tb = universal_ball(gog, base, radius, rep_cap=1)
    for s in tb.edges:
        z = halfspace_set(gog, base, s)
        if CornerClass.EMPTY not in pair_classes(b, z).values():
            return False
    return True


def test_normalize_b_on_g2_and_g3():
    g, base, (z2, _) = g2_sets()
    b = normalize_B(z2, ("vertex", ()))
    assert nested_against_window(b, g, base)
    g3, base3, (sigma, _) = g3_sets()
    b3 = normalize_B(sigma, ("vertex", ()))
    assert b3.local is not None
    assert all(b3.contains(x) == sigma.contains(x) for x in ball(g3, 3, base3))
    assert nested_against_window(b3, g3, base3)
    with pytest.raises(NotEnclosed):
        normalize_B(z2, ("vertex", z2.terms[0].child))


# ---------------------------------------------------------- intersections

def test_intersection_of_a_splitting_with_itself():
    x = gallery_scenario("g1").family[0]
    assert intersection_number(x, x, radii=(2, 3))[0] == 0


def test_g3_intersection_number_is_one():
    _, _, (sigma, tau) = g3_sets()
    assert intersection_number(sigma, tau, radii=(2, 3))[0] == 1
    assert double_coset_count(sigma, tau, 2, (3, 4)) == 1


def test_g2_intersection_numbers_match_double_coset_oracle():
    _, _, (z2, z3) = g2_sets()
    for x, y in ((z2, z3), (z3, z2), (z2, z2), (z3, z3)):
        value, _ = intersection_number(x, y)
        assert value == double_coset_count(x, y, 4)
    assert intersection_number(z2, z3)[0] == 1


# -------------------------------------------------------------- axioms

@pytest.mark.parametrize("name", ["g1", "g2", "g3", "g4a", "g5"])
def test_gallery_outputs_pass_the_axioms(name):
    _, _, report = gallery_run(name)
    assert report.passed, report.to_json()


def test_relabelled_output_is_rejected():
    sc, res, _ = gallery_run("g1")
    flipped = {v: ("V1" if lab == "V0" else "V0") for v, lab in res.gog.labels.items()}
    swapped = GraphOfGroups(res.gog.vertices, res.gog.edges, labels=flipped, name="swapped")
    swapped.meta.update(res.gog.meta)
    report = check_regnbhd_axioms(res, sc.family, sc.tests, gog=swapped)
    assert not report.passed


def test_isolated_vertex_check():
    for name in ("g1", "g2", "g5"):
        _, res, _ = gallery_run(name)
        assert isolated_vertex_check(res) is None
    _, res, _ = gallery_run("g2")
    assert res.gog.valence("D") >= 3


def test_direct_table_single_ccc():
    sc = gallery_scenario("g4b")
    out = build_from_table(sc.table)
    assert list(out.gog.vertices) == ["G22"]
