from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import token_ball
from regnbhd.errors import BallTooLarge, MalformedWord, MixedPresentations, UnknownGenerator
from regnbhd.groupcore import (GraphOfGroups, LocatedSubgroup, coset_query, cyclic_power,
                               enumerate_ball, free_factor, infinite_cyclic, invert, multiply,
                               parse_element, reduce)
from regnbhd.presentations import (free2_presentation, g1_presentation, g2_presentation,
                                   gpq_presentation)

G2 = g2_presentation()
F2 = free2_presentation()

# SL(2, Z) images; a tree of groups maps edge letters to the identity.
N = ((1, 2), (0, 1))
M = ((1, 0), (2, 1))
ID = ((1, 0), (0, 1))


def mat_mul(x, y):
    return tuple(tuple(sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2))
                 for i in range(2))


def mat_inv(x):
    (a, b), (c, d) = x
    return ((d, -b), (-c, a))


def mat_pow(x, n):
    out = ID
    for _ in range(abs(n)):
        out = mat_mul(out, x)
    return out if n >= 0 else mat_inv(out)


G2_IMAGES = {"a1": mat_pow(N, 6), "a2": M, "d": N, "b1": N, "b2": mat_mul(M, mat_mul(N, M))}


def vertex_tokens(gog):
    """Token steps available at each vertex, each with its matrix image."""
    out = {v: [] for v in gog.vertices}
    for v, vg in gog.vertices.items():
        for i, name in enumerate(vg.generator_names):
            for p in (1, -1):
                img = mat_pow(G2_IMAGES.get(name, ID), p)
                out[v].append((("v", v, vg.generator(i, p)), img, v))
    for e, d in gog.edges.items():
        out[d.source].append((("e", e, 1), ID, d.target))
        out[d.target].append((("e", e, -1), ID, d.source))
    return out


STEPS = vertex_tokens(G2)


@st.composite
def loops(draw, start="A", max_len=12):
    """A random token word closed at ``start`` and its matrix image."""
    at, word, img = start, [], ID
    n = draw(st.integers(0, max_len))
    for _ in range(n):
        tok, m, nxt = draw(st.sampled_from(STEPS[at]))
        word.append(tok)
        img = mat_mul(img, m)
        at = nxt
    # walk home along the unique path in the tree
    home = {"A": [], "D": [("e", "e", -1)], "B": [("e", "f", -1), ("e", "e", -1)]}
    word += [(k, e, s) for k, e, s in home[at]]
    return word, img


def image_of(nf):
    img, v = ID, nf.start
    for t, letter in nf.syllables:
        img = mat_mul(img, element_image(v, t))
        v = G2.terminus(letter)
    return mat_mul(img, element_image(v, nf.last))


def element_image(v, x):
    text = G2.vertices[v].format(x)
    img = ID
    if text == "1":
        return img
    for part in text.split("*"):
        name, _, power = part.partition("^")
        img = mat_mul(img, mat_pow(G2_IMAGES[name], int(power or 1)))
    return img


def rewrite(word, data):
    """An equal word: insert a cancelling pair or trade a1 for e d^6 e^-1."""
    out = list(word)
    at_a = [k for k in range(len(out) + 1)
            if k == 0 or out[k - 1][:2] == ("e", "e") and out[k - 1][2] == -1
            or out[k - 1][0] == "v" and out[k - 1][1] == "A"]
    k = data.draw(st.sampled_from(at_a))
    a = G2.vertices["A"]
    if data.draw(st.booleans()):
        out[k:k] = [("v", "A", a.generator(1, 1)), ("v", "A", a.generator(1, -1))]
    else:
        d = G2.vertices["D"]
        out[k:k] = [("v", "A", a.generator(0, -1)), ("e", "e", 1),
                    ("v", "D", d.generator(0, 6)), ("e", "e", -1)]
    return out


# ------------------------------------------------------------------ reduce

def test_edge_relation_collapses_to_identity():
    assert reduce("a1*e*d^-6*e^-1", G2, "A").is_identity()


def test_free_reduction_in_f2():
    assert reduce("a1*a2*a2^-1*a1", F2, "F").format() == "a1^2"


@settings(max_examples=200, deadline=None)
@given(loops())
def test_reduce_is_idempotent(case):
    word, _ = case
    nf = reduce(word, G2, "A")
    assert reduce(nf.format(), G2, "A") == nf
    tokens = []
    v = nf.start
    for t, letter in nf.syllables:
        tokens += [("v", v, t), ("e", letter[0], letter[1])]
        v = G2.terminus(letter)
    tokens.append(("v", v, nf.last))
    assert reduce(tokens, G2, "A") == nf


@settings(max_examples=250, deadline=None)
@given(loops(), st.data())
def test_rewritten_words_share_a_normal_form(case, data):
    word, img = case
    other = rewrite(word, data)
    nf = reduce(word, G2, "A")
    assert reduce(other, G2, "A") == nf
    assert image_of(nf) == img


@settings(max_examples=250, deadline=None)
@given(loops(), loops())
def test_normal_forms_separate_what_the_matrix_image_separates(u, v):
    x, y = reduce(u[0], G2, "A"), reduce(v[0], G2, "A")
    if u[1] != v[1]:
        assert x != y
    if x == y:
        assert u[1] == v[1]


def test_unknown_generator_and_malformed_words():
    with pytest.raises(UnknownGenerator):
        reduce("a1*zz", G2, "A")
    with pytest.raises(MalformedWord):
        reduce("a1*f", G2, "A")
    with pytest.raises(MalformedWord):
        reduce("a1^x", G2, "A")
    with pytest.raises(MalformedWord):
        reduce([("v", "B", G2.vertices["B"].generator(0))], G2, "A")


# ----------------------------------------------------------- word operations

def test_multiply_and_invert_in_f2():
    a1 = parse_element("a1", F2, "F")
    assert multiply(a1, invert(a1)).is_identity()
    assert invert(parse_element("a1*a2", F2, "F")).format() == "a2^-1*a1^-1"


SAMPLE = enumerate_ball(G2, 4, "A")


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(SAMPLE), st.sampled_from(SAMPLE), st.sampled_from(SAMPLE))
def test_group_laws(x, y, z):
    assert multiply(multiply(x, y), z) == multiply(x, multiply(y, z))
    assert invert(invert(x)) == x
    assert multiply(x, invert(x)).is_identity()
    assert invert(multiply(x, y)) == multiply(invert(y), invert(x))


def test_mixed_presentations_are_rejected():
    with pytest.raises(MixedPresentations):
        multiply(parse_element("a1", F2, "F"), parse_element("a1", G2, "A"))


# -------------------------------------------------------------------- balls

def test_f2_ball_counts():
    assert len(enumerate_ball(F2, 1, "F")) == 5
    assert len(enumerate_ball(F2, 2, "F")) == 17


def test_g32_ball_matches_token_bfs():
    g = gpq_presentation(3, 2)
    got = set(enumerate_ball(g, 3, "A"))
    assert got == token_ball(g, "A", 3)
    assert len(got) == 9


@pytest.mark.parametrize("gog,base", [(g1_presentation(), "A"), (G2, "D"),
                                      (gpq_presentation(3, 2), "B")])
def test_ball_monotone_and_closed_under_inversion(gog, base):
    prev = set()
    for r in range(4):
        cur = set(enumerate_ball(gog, r, base))
        assert prev <= cur
        assert gog.identity(base) in cur
        assert all(invert(x) in cur for x in cur)
        prev = cur


def test_ball_cap(monkeypatch):
    with pytest.raises(BallTooLarge):
        enumerate_ball(F2, 6, "F", cap=50)
    monkeypatch.setenv("REGNBHD_BALL_CAP", "10")
    with pytest.raises(BallTooLarge):
        enumerate_ball(F2, 3, "F")


# ------------------------------------------------------------------- cosets

def test_coset_query_examples():
    H = free_factor(F2.vertices["F"], "a1")
    x, y = parse_element("a1^3*a2", F2, "F"), parse_element("a2", F2, "F")
    assert coset_query(H, x, "right")[1] == coset_query(H, y, "right")[1]
    assert coset_query(H, x, "left")[1] != coset_query(H, y, "left")[1]
    assert not coset_query(H, parse_element("a2*a1*a2^-1", F2, "F"))[0]
    assert coset_query(H, parse_element("a1^-4", F2, "F"))[0]

    Z = GraphOfGroups({"Z": infinite_cyclic("a")}, {})
    two = cyclic_power(Z.vertices["Z"], 2)
    a, a3 = parse_element("a", Z, "Z"), parse_element("a^3", Z, "Z")
    assert coset_query(two, a, "left")[1] == coset_query(two, a3, "left")[1]
    assert coset_query(two, a, "left")[1] != coset_query(two, parse_element("a^2", Z, "Z"))[1]


LOCATED = [LocatedSubgroup(G2.identity("A"), free_factor(G2.vertices["A"], "a1")),
           LocatedSubgroup(parse_element("a2*e", G2, "A"), cyclic_power(G2.vertices["D"], 2)),
           LocatedSubgroup(parse_element("e*f", G2, "A"), free_factor(G2.vertices["B"], "b2"))]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(LOCATED), st.sampled_from(SAMPLE), st.integers(0, 2))
def test_coset_representatives_are_stable(H, g, k):
    from regnbhd.groupcore import words_ball
    hs = sorted(words_ball(H.generators(), 2, G2.identity("A")), key=str)
    h = hs[k * len(hs) // 3]
    assert coset_query(H, multiply(h, g), "right")[1] == coset_query(H, g, "right")[1]
    assert coset_query(H, multiply(g, h), "left")[1] == coset_query(H, g, "left")[1]
    assert H.contains(h)
    inside, _ = coset_query(H, g)
    assert inside == (coset_query(H, g, "left")[1] == coset_query(H, G2.identity("A"))[1])
