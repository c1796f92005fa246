"""Graphs of groups used by the built-in gallery scenarios."""
from .groupcore import (EdgeDesc, GraphOfGroups, cyclic_power, free_factor, free_group,
                        infinite_cyclic, whole)


def g1_presentation():
    """F(a1,a2) amalgamated with F(b1,b2) along a1 = b1."""
    A, B = free_group("a1", "a2"), free_group("b1", "b2")
    return GraphOfGroups({"A": A, "B": B},
                         {"e": EdgeDesc("A", "B", free_factor(A, "a1"), free_factor(B, "b1"))},
                         name="g1")


def g2_presentation():
    """F(a1,a2) amalgamated with F(b1,b2) along a1 = b1^6.

    The root b1^6 is not a supported subgroup of a free vertex group, so the
    cyclic group D = <d> with d = b1 sits between the two free groups.
    """
    A, D, B = free_group("a1", "a2"), infinite_cyclic("d"), free_group("b1", "b2")
    return GraphOfGroups(
        {"A": A, "D": D, "B": B},
        {"e": EdgeDesc("A", "D", free_factor(A, "a1"), cyclic_power(D, 6)),
         "f": EdgeDesc("D", "B", whole(D), free_factor(B, "b1"))},
        name="g2")


G3_QUADRANTS = {"s1": ("a", "d"), "s2": ("d", "b"), "s3": ("b", "e"), "s4": ("e", "a")}


def g3_presentation():
    """A tree of groups with centre F(a,b,d,e) and four leaves F(x,y,z).

    The centre is H *_C K with H = <a,b>, K = <d,e> and C trivial; the
    leaves properly contain the four quadrant subgroups <a,d>, <d,b>, <b,e>
    and <e,a>.
    """
    L0 = free_group("a", "b", "d", "e")
    verts, edges = {"L0": L0}, {}
    for k, (name, pair) in enumerate(sorted(G3_QUADRANTS.items()), start=1):
        Gk = free_group(f"x{k}", f"y{k}", f"z{k}")
        verts[f"G{k}"] = Gk
        edges[name] = EdgeDesc("L0", f"G{k}", free_factor(L0, *pair),
                               free_factor(Gk, f"x{k}", f"y{k}"))
    return GraphOfGroups(verts, edges, name="g3")


def gpq_presentation(p, q):
    """<a> amalgamated with <b> along a^p = b^q."""
    A, B = infinite_cyclic("a"), infinite_cyclic("b")
    return GraphOfGroups({"A": A, "B": B},
                         {"e": EdgeDesc("A", "B", cyclic_power(A, p), cyclic_power(B, q))},
                         name=f"G{p},{q}")


def free2_presentation():
    return GraphOfGroups({"F": free_group("a1", "a2")}, {}, name="F2")
