"""Words, normal forms and coset arithmetic for fundamental groups of graphs of groups.

Vertex groups are free groups, infinite cyclic groups or finite cyclic groups.
Elements of a vertex group are encoded as follows:

* free group: a freely reduced tuple of nonzero ints, ``i+1`` for the i-th
  generator and ``-(i+1)`` for its inverse;
* infinite cyclic: an ``int`` exponent;
* finite cyclic of order n: an ``int`` in ``range(n)``.

An element of the fundamental groupoid is a :class:`NormalForm`: a start
vertex, a tuple of ``(coset representative, edge letter)`` syllables and a
terminal vertex-group element.  Edge letters are ``(edge name, +1 | -1)``.
"""
from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Iterator

from .errors import (BallTooLarge, MalformedWord, MixedPresentations, SchemaError,
                     UnknownGenerator)

DEFAULT_BALL_CAP = 400_000


def ball_cap():
    return int(os.environ.get("REGNBHD_BALL_CAP", DEFAULT_BALL_CAP))


# ---------------------------------------------------------------- free words

def free_reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def free_mul(u, v):
    i = 0
    while i < len(u) and i < len(v) and u[-1 - i] == -v[i]:
        i += 1
    return u[:len(u) - i] + v[i:]


def free_inv(u):
    return tuple(-x for x in reversed(u))


def _letter_rank(x):
    return 2 * (abs(x) - 1) + (x < 0)


def _power_word(n):
    return (1,) * n if n >= 0 else (-1,) * (-n)


def _word_exponent(w):
    return sum(1 if x > 0 else -1 for x in w)


# ------------------------------------------------------------ vertex groups

@dataclass(frozen=True)
class VertexGroupDesc:
    """A vertex group: ``kind`` is ``free``, ``cyclic`` or ``finite``."""

    kind: str
    generator_names: tuple
    order: int | None = None

    def __post_init__(self):
        if self.kind not in ("free", "cyclic", "finite"):
            raise SchemaError(f"unknown vertex group kind {self.kind!r}")
        if len(set(self.generator_names)) != len(self.generator_names):
            raise SchemaError("generator names must be unique within a group")
        if self.kind != "free" and len(self.generator_names) != 1:
            raise SchemaError("cyclic groups take exactly one generator name")
        if self.kind == "finite" and (self.order is None or self.order < 1):
            raise SchemaError("finite cyclic groups need a positive order")

    @property
    def rank(self):
        return len(self.generator_names)

    def identity(self):
        return () if self.kind == "free" else 0

    def mul(self, x, y):
        if self.kind == "free":
            return free_mul(x, y)
        if self.kind == "cyclic":
            return x + y
        return (x + y) % self.order

    def inv(self, x):
        if self.kind == "free":
            return free_inv(x)
        if self.kind == "cyclic":
            return -x
        return (-x) % self.order

    def length(self, x):
        if self.kind == "free":
            return len(x)
        if self.kind == "cyclic":
            return abs(x)
        return min(x, self.order - x)

    def sort_key(self, x):
        """Shortlex key under the generator order a1 < a1^-1 < a2 < ..."""
        if self.kind == "free":
            return (len(x), tuple(_letter_rank(c) for c in x))
        if self.kind == "cyclic":
            return (abs(x), x < 0)
        short = min(x, self.order - x)
        return (short, x != short)

    def letters(self):
        """Generators and their inverses, in shortlex order."""
        if self.kind == "free":
            return [(s * (i + 1),) for i in range(self.rank) for s in (1, -1)]
        if self.kind == "cyclic":
            return [1, -1]
        return sorted({1 % self.order, (-1) % self.order}, key=self.sort_key)

    def generator(self, i, power=1):
        if self.kind == "free":
            return tuple([(i + 1) if power > 0 else -(i + 1)] * abs(power))
        if self.kind == "cyclic":
            return power
        return power % self.order

    def is_finite(self):
        return self.kind == "finite" or (self.kind == "free" and self.rank == 0)

    def elements(self, max_len):
        """All elements of length at most ``max_len`` in shortlex order."""
        if self.kind == "cyclic":
            out = [0]
            for k in range(1, max_len + 1):
                out += [k, -k]
            return out
        if self.kind == "finite":
            return sorted({x for x in range(self.order) if self.length(x) <= max_len},
                          key=self.sort_key)
        out, layer = [()], [()]
        for _ in range(max_len):
            nxt = []
            for w in layer:
                for (c,) in self.letters():
                    if not w or w[-1] != -c:
                        nxt.append(w + (c,))
            out += nxt
            layer = nxt
        return out

    def format(self, x):
        if self.kind == "free":
            if not x:
                return "1"
            parts, i = [], 0
            while i < len(x):
                j = i
                while j < len(x) and x[j] == x[i]:
                    j += 1
                name = self.generator_names[abs(x[i]) - 1]
                p = (j - i) * (1 if x[i] > 0 else -1)
                parts.append(name if p == 1 else f"{name}^{p}")
                i = j
            return "*".join(parts)
        if x == 0:
            return "1"
        name = self.generator_names[0]
        if self.kind == "finite":
            x = x if x <= self.order - x else x - self.order
        return name if x == 1 else f"{name}^{x}"

    def describe(self):
        if self.kind == "free":
            return f"F({','.join(self.generator_names)})"
        if self.kind == "cyclic":
            return f"Z({self.generator_names[0]})"
        return f"Z{self.order}({self.generator_names[0]})"

    def to_json(self):
        d = {"kind": self.kind, "generators": list(self.generator_names)}
        if self.kind == "finite":
            d["order"] = self.order
        return d

    @classmethod
    def from_json(cls, d):
        try:
            return cls(d["kind"], tuple(d["generators"]), d.get("order"))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad vertex group {d!r}") from exc


def free_group(*names):
    return VertexGroupDesc("free", tuple(names))


def infinite_cyclic(name):
    return VertexGroupDesc("cyclic", (name,))


def finite_cyclic(order, name):
    return VertexGroupDesc("finite", (name,), order)


# ------------------------------------------------------------------ subgroups

@dataclass(frozen=True)
class SubgroupDesc:
    """A subgroup of a vertex group.

    ``kind`` is ``free_factor`` (``basis`` lists generator indices),
    ``cyclic_power`` (``exponent`` m, the subgroup generated by a^m),
    ``whole`` or ``trivial``.
    """

    ambient: VertexGroupDesc
    kind: str
    basis: tuple = ()
    exponent: int = 1

    def __post_init__(self):
        if self.kind == "free_factor":
            if self.ambient.kind != "free":
                raise SchemaError("free factors live in free vertex groups")
            if len(set(self.basis)) != len(self.basis) or any(
                    not 0 <= i < self.ambient.rank for i in self.basis):
                raise SchemaError(f"bad free factor basis {self.basis}")
        elif self.kind == "cyclic_power":
            if self.ambient.kind == "free":
                raise SchemaError("cyclic powers live in cyclic vertex groups")
            if self.exponent < 1:
                raise SchemaError("cyclic power exponent must be positive")
        elif self.kind not in ("whole", "trivial"):
            raise SchemaError(f"unknown subgroup kind {self.kind!r}")

    # -- abstract structure of the subgroup itself
    def abstract_type(self):
        amb = self.ambient
        if self.kind == "trivial":
            return ("free", 0)
        if self.kind == "free_factor":
            return ("free", len(self.basis))
        if self.kind == "whole":
            if amb.kind == "finite":
                return ("finite", amb.order)
            return ("free", amb.rank)
        if amb.kind == "cyclic":
            return ("free", 1)
        return ("finite", amb.order // gcd(amb.order, self.exponent))

    def _letter_set(self):
        if self.kind == "free_factor":
            return {i + 1 for i in self.basis}
        if self.kind == "whole":
            return set(range(1, self.ambient.rank + 1))
        return set()

    def _modulus(self):
        amb = self.ambient
        if self.kind == "whole":
            return 1
        if self.kind == "trivial":
            return 0 if amb.kind == "cyclic" else amb.order
        if amb.kind == "cyclic":
            return self.exponent
        return gcd(amb.order, self.exponent)

    def contains(self, x):
        if self.ambient.kind == "free":
            letters = self._letter_set()
            return all(abs(c) in letters for c in x)
        m = self._modulus()
        return x == 0 if m == 0 else x % m == 0

    def generators(self):
        amb = self.ambient
        if self.kind == "trivial":
            return []
        if amb.kind == "free":
            return [(i,) for i in sorted(self._letter_set())]
        m = self._modulus()
        return [m % amb.order if amb.kind == "finite" else m]

    def to_abstract(self, x):
        amb = self.ambient
        if amb.kind == "free":
            if self.kind == "whole":
                return x
            pos = {i + 1: j + 1 for j, i in enumerate(self.basis)}
            return tuple(pos[abs(c)] * (1 if c > 0 else -1) for c in x)
        if amb.kind == "cyclic":
            if self.kind == "trivial":
                return ()
            return _power_word(x // (1 if self.kind == "whole" else self.exponent))
        if self.kind == "trivial":
            return 0
        if self.kind == "whole":
            return x
        k = self.abstract_type()[1]
        for j in range(k):
            if (self.exponent * j) % amb.order == x % amb.order:
                return j
        raise ValueError(f"{x} not in subgroup")

    def from_abstract(self, w):
        amb = self.ambient
        if amb.kind == "free":
            if self.kind == "whole":
                return w
            return tuple((self.basis[abs(c) - 1] + 1) * (1 if c > 0 else -1) for c in w)
        if amb.kind == "cyclic":
            if self.kind == "trivial":
                return 0
            e = 1 if self.kind == "whole" else self.exponent
            return e * _word_exponent(w)
        if self.kind == "trivial":
            return 0
        if self.kind == "whole":
            return w % amb.order
        return (self.exponent * w) % amb.order

    # -- cosets
    def left_split(self, x):
        """Return ``(t, h)`` with ``x = t h``, ``h`` in the subgroup, t canonical."""
        amb = self.ambient
        if self.kind == "whole":
            return amb.identity(), x
        if amb.kind == "free":
            letters = self._letter_set()
            i = len(x)
            while i > 0 and abs(x[i - 1]) in letters:
                i -= 1
            return x[:i], x[i:]
        t = self._residue(x)
        return t, amb.mul(amb.inv(t), x)

    def right_split(self, x):
        """Return ``(h, t)`` with ``x = h t``, ``h`` in the subgroup, t canonical."""
        amb = self.ambient
        if self.kind == "whole":
            return x, amb.identity()
        if amb.kind == "free":
            letters = self._letter_set()
            i = 0
            while i < len(x) and abs(x[i]) in letters:
                i += 1
            return x[:i], x[i:]
        t = self._residue(x)
        return amb.mul(x, amb.inv(t)), t

    def _residue(self, x):
        amb = self.ambient
        m = self._modulus()
        if amb.kind == "cyclic":
            if m == 0:
                return x
            r = x % m
            cands = [r, r - m]
            return min(cands, key=amb.sort_key)
        if m == 0:
            return x
        cands = [y for y in range(amb.order) if (y - x) % m == 0]
        return min(cands, key=amb.sort_key)

    def index(self):
        amb = self.ambient
        if self.kind == "whole":
            return 1
        if amb.kind == "free":
            return 1 if len(self.basis) == amb.rank else None
        m = self._modulus()
        if amb.kind == "cyclic":
            return None if m == 0 else m
        return m if m else amb.order

    def is_onto(self):
        return self.index() == 1

    def left_transversal(self, max_len=None):
        """Canonical left coset representatives, shortlex sorted."""
        amb = self.ambient
        idx = self.index()
        if idx is None and max_len is None:
            raise ValueError("infinite index needs a length cap")
        if amb.kind == "free":
            letters = self._letter_set()
            if idx == 1:
                return [()]
            return [w for w in amb.elements(max_len) if not w or abs(w[-1]) not in letters]
        if amb.kind == "cyclic" and idx is None:
            return amb.elements(max_len)
        reps = {self._residue(x) for x in range(idx)} if amb.kind == "cyclic" else {
            self._residue(x) for x in range(amb.order)}
        reps = sorted(reps, key=amb.sort_key)
        if max_len is not None:
            reps = [r for r in reps if amb.length(r) <= max_len]
        return reps

    def describe(self):
        amb = self.ambient
        if self.kind == "whole":
            return amb.describe()
        if self.kind == "trivial":
            return "1"
        if self.kind == "free_factor":
            return "<" + ",".join(amb.generator_names[i] for i in self.basis) + ">"
        return f"<{amb.generator_names[0]}^{self.exponent}>"

    def to_json(self):
        d = {"kind": self.kind}
        if self.kind == "free_factor":
            d["basis"] = [self.ambient.generator_names[i] for i in self.basis]
        if self.kind == "cyclic_power":
            d["exponent"] = self.exponent
        return d

    @classmethod
    def from_json(cls, ambient, d):
        kind = d.get("kind")
        if kind == "free_factor":
            names = list(ambient.generator_names)
            try:
                basis = tuple(names.index(n) for n in d["basis"])
            except (ValueError, KeyError) as exc:
                raise SchemaError(f"bad free factor basis {d!r}") from exc
            return cls(ambient, kind, basis)
        if kind == "cyclic_power":
            return cls(ambient, kind, exponent=int(d.get("exponent", 1)))
        return cls(ambient, kind)


def free_factor(ambient, *names):
    return SubgroupDesc(ambient, "free_factor",
                        tuple(ambient.generator_names.index(n) for n in names))


def cyclic_power(ambient, m):
    return SubgroupDesc(ambient, "cyclic_power", exponent=m)


def whole(ambient):
    return SubgroupDesc(ambient, "whole")


def trivial(ambient):
    return SubgroupDesc(ambient, "trivial")


# ------------------------------------------------------------ graph of groups

@dataclass(frozen=True)
class EdgeDesc:
    """An edge; ``*_attach`` names the inner vertex when an endpoint is composite."""

    source: str
    target: str
    source_image: SubgroupDesc
    target_image: SubgroupDesc
    source_attach: str | None = None
    target_attach: str | None = None


class CompositeGroup:
    """Symbolic fundamental group of a collapsed sub-graph-of-groups."""

    kind = "composite"

    def __init__(self, sub):
        self.sub = sub

    def describe(self):
        return "pi1[" + self.sub.describe() + "]"

    def __eq__(self, other):
        return isinstance(other, CompositeGroup) and self.sub.to_json() == other.sub.to_json()

    def __hash__(self):
        return hash(self.describe())

    def to_json(self):
        return {"kind": "composite", "graph": self.sub.to_json()}


@dataclass(frozen=True)
class NamedGroup:
    """An opaque group known only by name (direct corner tables carry no
    presentation)."""

    name: str
    kind: str = field(default="named", init=False)

    def describe(self):
        return self.name

    def to_json(self):
        return {"kind": "named", "name": self.name}


class GraphOfGroups:
    """A finite connected graph of groups.

    ``labels`` optionally maps vertices to ``"V0"``/``"V1"``; ``composites``
    maps a vertex to the symbolic sub-graph-of-groups it was collapsed from.
    """

    def __init__(self, vertices, edges, labels=None, composites=None, name=""):
        self.vertices = dict(vertices)
        self.edges = dict(edges)
        self.labels = dict(labels or {})
        self.composites = dict(composites or {})
        self.name = name
        self._validate()
        self._letters = {v: [] for v in self.vertices}
        for e in sorted(self.edges):
            d = self.edges[e]
            self._letters[d.source].append((e, 1))
            self._letters[d.target].append((e, -1))
        self.meta = {}
        self._gen_index = {}
        for v in sorted(self.vertices):
            if self.is_composite(v):
                continue
            for i, n in enumerate(self.vertices[v].generator_names):
                self._gen_index.setdefault(n, []).append((v, i))

    def _validate(self):
        if not self.vertices:
            raise SchemaError("a graph of groups needs at least one vertex")
        for e, d in self.edges.items():
            for end, img, att in ((d.source, d.source_image, d.source_attach),
                                  (d.target, d.target_image, d.target_attach)):
                if end not in self.vertices:
                    raise SchemaError(f"edge {e} has unknown endpoint {end}")
                group = self.vertices[end]
                if isinstance(group, NamedGroup):
                    raise SchemaError(f"edge {e}: a named group has no subgroups to attach")
                if isinstance(group, CompositeGroup):
                    if att not in group.sub.vertices:
                        raise SchemaError(f"edge {e}: composite endpoint needs an attachment")
                    group = group.sub.vertices[att]
                if img.ambient != group:
                    raise SchemaError(f"edge {e}: image ambient differs from vertex {end}")
            if d.source_image.abstract_type() != d.target_image.abstract_type():
                raise SchemaError(f"edge {e}: the two inclusions have different domains")
        seen, todo = set(), [min(self.vertices)]
        while todo:
            v = todo.pop()
            if v in seen:
                continue
            seen.add(v)
            for d in self.edges.values():
                if d.source == v:
                    todo.append(d.target)
                if d.target == v:
                    todo.append(d.source)
        if seen != set(self.vertices):
            raise SchemaError("graph of groups must be connected")
        for v, lab in self.labels.items():
            if lab not in ("V0", "V1"):
                raise SchemaError(f"bad bipartite label {lab!r}")
        if self.labels:
            for e, d in self.edges.items():
                if self.labels.get(d.source) == self.labels.get(d.target):
                    raise SchemaError(f"edge {e} does not join V0 to V1")

    # -- edge letters
    def letters_at(self, v):
        return self._letters[v]

    def origin(self, letter):
        d = self.edges[letter[0]]
        return d.source if letter[1] > 0 else d.target

    def terminus(self, letter):
        d = self.edges[letter[0]]
        return d.target if letter[1] > 0 else d.source

    def alpha(self, letter):
        d = self.edges[letter[0]]
        return d.source_image if letter[1] > 0 else d.target_image

    def omega(self, letter):
        d = self.edges[letter[0]]
        return d.target_image if letter[1] > 0 else d.source_image

    def cross(self, letter, x):
        """Carry ``x`` in the edge image at the origin to the terminus."""
        return self.omega(letter).from_abstract(self.alpha(letter).to_abstract(x))

    def is_composite(self, v):
        return isinstance(self.vertices[v], (CompositeGroup, NamedGroup))

    def valence(self, v):
        """Valence of a lift of ``v`` in the Bass-Serre tree (None if infinite)."""
        if self.is_composite(v):
            return None
        total = 0
        for letter in self._letters[v]:
            idx = self.alpha(letter).index()
            if idx is None:
                return None
            total += idx
        return total

    def lookup_generator(self, name, vertex=None):
        hits = self._gen_index.get(name)
        if not hits:
            raise UnknownGenerator(f"unknown generator {name!r}")
        if vertex is not None:
            hits = [h for h in hits if h[0] == vertex] or hits
        return hits[0]

    def identity(self, base):
        return NormalForm(base, (), self.vertices[base].identity(), self)

    def vertex_element(self, v, x):
        return NormalForm(v, (), x, self)

    def describe(self):
        parts = []
        for v in sorted(self.vertices):
            parts.append(f"{v}:{self.vertices[v].describe()}")
        for e in sorted(self.edges):
            d = self.edges[e]
            parts.append(f"{e}:{d.source}[{d.source_image.describe()}]-"
                         f"{d.target}[{d.target_image.describe()}]")
        return " ".join(parts)

    def to_json(self):
        return {
            "vertices": {v: self.vertices[v].to_json() for v in sorted(self.vertices)},
            "edges": {e: _edge_json(d) for e, d in sorted(self.edges.items())},
            "labels": dict(sorted(self.labels.items())),
        }

    @classmethod
    def from_json(cls, d, name=""):
        try:
            verts = {}
            for v, g in d["vertices"].items():
                if isinstance(g, dict) and g.get("kind") == "composite":
                    verts[v] = CompositeGroup(cls.from_json(g["graph"], name=v))
                elif isinstance(g, dict) and g.get("kind") == "named":
                    verts[v] = NamedGroup(str(g["name"]))
                else:
                    verts[v] = VertexGroupDesc.from_json(g)
            edges = {}
            for e, ed in d.get("edges", {}).items():
                s, t = ed["source"], ed["target"]
                if s not in verts or t not in verts:
                    raise SchemaError(f"edge {e} has unknown endpoint")
                sa, ta = ed.get("source_attach"), ed.get("target_attach")
                sg = verts[s].sub.vertices[sa] if isinstance(verts[s], CompositeGroup) else verts[s]
                tg = verts[t].sub.vertices[ta] if isinstance(verts[t], CompositeGroup) else verts[t]
                edges[e] = EdgeDesc(s, t, SubgroupDesc.from_json(sg, ed["source_image"]),
                                    SubgroupDesc.from_json(tg, ed["target_image"]), sa, ta)
        except (KeyError, TypeError, AttributeError) as exc:
            raise SchemaError(f"malformed graph of groups: {exc}") from exc
        return cls(verts, edges, d.get("labels"), name=name)


def _edge_json(d):
    out = {"source": d.source, "target": d.target,
           "source_image": d.source_image.to_json(),
           "target_image": d.target_image.to_json()}
    if d.source_attach is not None:
        out["source_attach"] = d.source_attach
    if d.target_attach is not None:
        out["target_attach"] = d.target_attach
    return out


# -------------------------------------------------------------- normal forms

@dataclass(frozen=True)
class NormalForm:
    """Reduced path ``t0 e1 t1 ... ek last`` in the fundamental groupoid."""

    start: str
    syllables: tuple
    last: object
    gog: GraphOfGroups = field(compare=False, repr=False)

    @property
    def end(self):
        if self.syllables:
            return self.gog.terminus(self.syllables[-1][1])
        return self.start

    @property
    def vertex(self):
        """The tree vertex ``self . base`` as a canonical coset chain."""
        return self.syllables

    def length(self):
        g = self.gog
        total, v = 0, self.start
        for t, letter in self.syllables:
            total += g.vertices[v].length(t) + 1
            v = g.terminus(letter)
        return total + g.vertices[v].length(self.last)

    def is_identity(self):
        return not self.syllables and self.last == self.gog.vertices[self.start].identity()

    def __mul__(self, other):
        return multiply(self, other)

    def __invert__(self):
        return invert(self)

    def format(self):
        g = self.gog
        parts, v = [], self.start
        for t, (e, s) in self.syllables:
            if t != g.vertices[v].identity():
                parts.append(g.vertices[v].format(t))
            parts.append(e if s > 0 else f"{e}^-1")
            v = g.terminus((e, s))
        if self.last != g.vertices[v].identity() or not parts:
            parts.append(g.vertices[v].format(self.last))
        return "*".join(parts)

    def __str__(self):
        return self.format()


class _Builder:
    __slots__ = ("gog", "start", "syl", "last", "cur")

    def __init__(self, gog, start, syl=(), last=None, cur=None):
        self.gog = gog
        self.start = start
        self.syl = list(syl)
        self.cur = cur if cur is not None else (gog.terminus(syl[-1][1]) if syl else start)
        self.last = last if last is not None else gog.vertices[self.cur].identity()

    def elem(self, x):
        self.last = self.gog.vertices[self.cur].mul(self.last, x)

    def edge(self, letter):
        g = self.gog
        if g.origin(letter) != self.cur:
            raise MalformedWord(f"edge {letter} does not start at {self.cur}")
        alpha = g.alpha(letter)
        t, h = alpha.left_split(self.last)
        vg = g.vertices[self.cur]
        if self.syl and t == vg.identity() and self.syl[-1][1] == (letter[0], -letter[1]):
            pt, pl = self.syl.pop()
            prev = g.origin(pl)
            # omega of the reversed letter is alpha(pl), the image at the previous vertex
            back = g.cross(letter, h)
            self.cur = prev
            self.last = g.vertices[prev].mul(pt, back)
            return
        self.syl.append((t, letter))
        self.cur = g.terminus(letter)
        self.last = g.cross(letter, h)

    def result(self):
        return NormalForm(self.start, tuple(self.syl), self.last, self.gog)


def _absorb(b, nf):
    for t, letter in nf.syllables:
        b.elem(t)
        b.edge(letter)
    b.elem(nf.last)


def reduce(word, gog, start=None):
    """Normal form of a word.

    ``word`` is a string such as ``"a1*e1*b1^-6*e1^-1"`` or a sequence of tokens
    ``("v", vertex, element)`` / ``("e", edge, sign)``.

    >>> from regnbhd.presentations import g2_presentation
    >>> G = g2_presentation()
    >>> reduce("a1*e*d^-6*e^-1", G, "A").is_identity()
    True
    """
    if isinstance(word, str):
        word = parse_word(word, gog, start)
    if start is None:
        start = next((tok[1] for tok in word if tok[0] == "v"), None)
        if start is None:
            start = gog.origin((word[0][1], word[0][2])) if word else min(gog.vertices)
    b = _Builder(gog, start)
    for tok in word:
        if tok[0] == "v":
            if tok[1] != b.cur:
                raise MalformedWord(f"letter of {tok[1]} used at vertex {b.cur}")
            b.elem(tok[2])
        elif tok[0] == "e":
            if tok[1] not in gog.edges:
                raise UnknownGenerator(f"unknown edge {tok[1]!r}")
            b.edge((tok[1], tok[2]))
        else:
            raise MalformedWord(f"bad token {tok!r}")
    return b.result()


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")


def parse_word(text, gog, start=None):
    """Tokenise ``text`` (factors separated by ``*`` or whitespace)."""
    toks = []
    cur = start
    for part in re.split(r"[*\s]+", text.strip()):
        if not part or part == "1":
            continue
        m = _TOKEN.match(part)
        if not m:
            raise MalformedWord(f"cannot parse {part!r}")
        name, power = m.group(1), int(m.group(2) or 1)
        if name in gog.edges:
            if power not in (1, -1):
                raise MalformedWord("edge letters take exponent 1 or -1")
            letter = (name, power)
            if cur is not None and gog.origin(letter) != cur:
                raise MalformedWord(f"edge {part} does not start at {cur}")
            toks.append(("e", name, power))
            cur = gog.terminus(letter)
            continue
        v, i = gog.lookup_generator(name, cur)
        if cur is not None and v != cur:
            raise MalformedWord(f"generator {name} used at vertex {cur}")
        cur = v
        toks.append(("v", v, gog.vertices[v].generator(i, power)))
    return toks


def parse_element(text, gog, base):
    return reduce(parse_word(text, gog, base), gog, base)


def multiply(x, y):
    if x.gog is not y.gog:
        raise MixedPresentations("elements come from different graphs of groups")
    if x.end != y.start:
        raise MalformedWord(f"path ending at {x.end} cannot be followed by one at {y.start}")
    if not y.syllables:
        vg = x.gog.vertices[x.end]
        return NormalForm(x.start, x.syllables, vg.mul(x.last, y.last), x.gog)
    b = _Builder(x.gog, x.start, x.syllables, x.last, x.end)
    _absorb(b, y)
    return b.result()


def invert(x):
    g = x.gog
    b = _Builder(g, x.end)
    verts = [x.start] + [g.terminus(l) for _, l in x.syllables]
    b.elem(g.vertices[verts[-1]].inv(x.last))
    for k in range(len(x.syllables) - 1, -1, -1):
        t, letter = x.syllables[k]
        b.edge((letter[0], -letter[1]))
        b.elem(g.vertices[verts[k]].inv(t))
    return b.result()


def vertex_path(chain, gog, base):
    """The groupoid element with the given syllables and trivial tail."""
    end = gog.terminus(chain[-1][1]) if chain else base
    return NormalForm(base, tuple(chain), gog.vertices[end].identity(), gog)


def enumerate_ball(gog, radius, base=None, cap=None):
    """All group elements of word length at most ``radius``.

    Word length counts one per vertex-group letter and one per edge
    traversal.  The search runs over the fundamental groupoid so that paths
    through other vertices are found; only closed paths at ``base`` are
    returned, in breadth-first order.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    base = base if base is not None else min(gog.vertices)
    cap = cap if cap is not None else ball_cap()
    start = gog.identity(base)
    dist = {start: 0}
    order = [start]
    q = deque([start])
    while q:
        x = q.popleft()
        d = dist[x]
        if d == radius:
            continue
        v = x.end
        vg = gog.vertices[v]
        steps = [NormalForm(x.start, x.syllables, vg.mul(x.last, a), gog) for a in vg.letters()]
        for letter in gog.letters_at(v):
            b = _Builder(gog, x.start, x.syllables, x.last, v)
            b.edge(letter)
            steps.append(b.result())
        for y in steps:
            if y not in dist:
                dist[y] = d + 1
                order.append(y)
                q.append(y)
                if len(dist) > cap:
                    raise BallTooLarge(f"ball exceeds cap {cap}")
    return [x for x in order if x.end == base]


# ---------------------------------------------------------- located subgroups

@dataclass(frozen=True)
class LocatedSubgroup:
    """The subgroup ``p K p^-1`` of G where ``p`` is a path from the base to
    the vertex carrying ``K``."""

    path: NormalForm
    desc: SubgroupDesc

    @property
    def gog(self):
        return self.path.gog

    def generators(self):
        p = self.path
        u = p.end
        out = []
        for k in self.desc.generators():
            out.append(multiply(multiply(p, NormalForm(u, (), k, p.gog)), invert(p)))
        return out

    def left_key(self, g):
        """Canonical representative of the left coset ``g H``."""
        y = multiply(g, self.path)
        t, _ = self.desc.left_split(y.last)
        return NormalForm(y.start, y.syllables, t, y.gog)

    def right_key(self, g):
        """Canonical key of the right coset ``H g`` (the left key of g^-1)."""
        return self.left_key(invert(g))

    def contains(self, g):
        return self.left_key(g) == self.left_key(g.gog.identity(g.start))

    def describe(self):
        return f"{self.path.format()}.{self.desc.describe()}"


def coset_query(H, g, side="left"):
    """Membership and canonical coset representative.

    For ``side='left'`` the representative is of ``gH``; for ``'right'`` of
    ``Hg``.  ``H`` is a :class:`LocatedSubgroup` (or a :class:`SubgroupDesc`
    of the base vertex group).
    """
    if isinstance(H, SubgroupDesc):
        H = LocatedSubgroup(g.gog.identity(g.start), H)
    if side == "left":
        key = H.left_key(g)
        rep = multiply(key, invert(H.path))
    elif side == "right":
        rep = invert(multiply(H.left_key(invert(g)), invert(H.path)))
    else:
        raise ValueError("side must be 'left' or 'right'")
    return H.contains(g), rep


# ------------------------------------------------------------ generating sets

def group_generators(gog, base):
    """Generators of the fundamental group at ``base``.

    Vertex-group letters are conjugated along a spanning tree of the graph;
    every edge outside the spanning tree contributes one stable letter.
    """
    paths = {base: gog.identity(base)}
    tree_edges = set()
    order = [base]
    for v in order:
        for letter in gog.letters_at(v):
            w = gog.terminus(letter)
            if w in paths:
                continue
            b = _Builder(gog, base, paths[v].syllables, paths[v].last, v)
            b.edge(letter)
            paths[w] = b.result()
            tree_edges.add(letter[0])
            order.append(w)
    gens = []
    for v in order:
        p = paths[v]
        for a in gog.vertices[v].letters():
            x = multiply(multiply(p, NormalForm(v, (), a, gog)), invert(p))
            if not x.is_identity() and x not in gens and invert(x) not in gens:
                gens.append(x)
    for e in sorted(gog.edges):
        if e in tree_edges:
            continue
        d = gog.edges[e]
        b = _Builder(gog, base, paths[d.source].syllables, paths[d.source].last, d.source)
        b.edge((e, 1))
        gens.append(multiply(b.result(), invert(paths[d.target])))
    return gens


def words_ball(generators, radius, identity):
    """Products of at most ``radius`` generators or their inverses."""
    steps = list(generators) + [invert(g) for g in generators]
    seen = {identity}
    layer = [identity]
    for _ in range(radius):
        nxt = []
        for x in layer:
            for s in steps:
                y = multiply(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        layer = nxt
    return seen


def _fold(rank, words):
    """Stallings folding of a bouquet of loops; returns the folded edge map."""
    out = {}      # (vertex, letter) -> vertex, letters signed
    parent = {}

    def find(v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    fresh = [1]
    for w in words:
        cur = 0
        for k, c in enumerate(w):
            nxt = 0 if k == len(w) - 1 else fresh[0]
            if k != len(w) - 1:
                fresh[0] += 1
            out.setdefault((cur, c), set()).add(nxt)
            out.setdefault((nxt, -c), set()).add(cur)
            cur = nxt
    changed = True
    while changed:
        changed = False
        norm = {}
        for (v, c), targets in out.items():
            key = (find(v), c)
            norm.setdefault(key, set()).update(find(t) for t in targets)
        for key, targets in norm.items():
            if len(targets) > 1:
                keep = min(targets)
                for t in targets:
                    if t != keep:
                        parent[t] = keep
                changed = True
        out = norm
    return {k: next(iter(v)) for k, v in out.items()}, find


def generates_whole(group, elements):
    """Whether ``elements`` generate the whole vertex group ``group``."""
    if group.kind == "cyclic":
        m = 0
        for x in elements:
            m = gcd(m, x)
        return m == 1
    if group.kind == "finite":
        m = group.order
        for x in elements:
            m = gcd(m, x)
        return m == 1
    words = [w for w in elements if w]
    if group.rank == 0:
        return True
    edges, find = _fold(group.rank, words)
    verts = {find(0)} | {find(v) for v, _ in edges} | {find(t) for t in edges.values()}
    if len(verts) != 1:
        return False
    return all((find(0), c) in edges for c in range(1, group.rank + 1))
