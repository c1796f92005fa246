"""Almost-invariant sets, their corners, crossing and the partial order.

An almost-invariant set is described symbolically through the tree:

* :class:`SideSpec` is a union of halfspaces of the Bass-Serre tree, an
  optional *local term* (one side of a splitting of the base vertex group,
  pulled back to the tree through the edges at the base vertex), finitely
  many toggled right cosets ``Hx`` and a complement flag.
* :class:`Translate` is ``gX`` for another description ``X``.
* :class:`Combination` is a Boolean combination of two descriptions.

Every description reports the *status* of a tree vertex (``IN``, ``OUT`` or
``MIXED``; only vertices where the local rule applies are ``MIXED``), the
membership of a group element, a finite *core* of vertices outside of which
the status is constant on every hanging branch, and its stabiliser.
"""
from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

from .bassserre import HalfspaceRef, SplitData, act_on_vertex, children, hull, vertex_type
from .errors import (BallTooLarge, InconsistentDirectTable, SchemaError, UnresolvedCorners)
from .groupcore import (LocatedSubgroup, NormalForm, SubgroupDesc, enumerate_ball,
                        group_generators, invert, multiply, reduce, parse_word, words_ball)

__all__ = [
    "IN", "OUT", "MIXED", "SideSpec", "LocalTerm", "Translate", "Combination",
    "CornerClass", "Strength", "Window", "CornerTable", "pair_classes", "classify_corner",
    "crosses", "classify_strength", "leq", "side_of", "check_condition_star",
    "good_enough_position", "is_isolated", "is_discrete_window", "load_direct_table",
    "halfspace_set", "local_side",
]

OUT, IN, MIXED = 0, 1, 2


def _flip(s):
    return s if s == MIXED else 1 - s


class CornerClass(Enum):
    EMPTY = "Empty"
    SMALL = "SmallNonEmpty"
    LARGE = "Large"
    UNKNOWN = "Unknown"

    @property
    def is_small(self):
        return self in (CornerClass.EMPTY, CornerClass.SMALL)


class Strength(Enum):
    STRONG = "Strong"
    WEAK = "Weak"
    NOT_CROSSING = "NotCrossing"


@dataclass(frozen=True)
class Window:
    """Finite search parameters for corner and strength decisions.

    Coset counts are compared at ``radius`` and ``radius + 1``;
    ``rep_radius`` caps coset representatives when branches at a vertex of
    infinite valence are searched.
    """

    radius: int = 3
    rep_radius: int = 2


# ------------------------------------------------------------------ local rule

def local_side(split, ell, which):
    """Side (``"left"``/``"right"``) of the base edge holding vertex ``ell.which``
    of the local tree of ``split``."""
    amb = split.left.ambient
    if amb.kind == "free":
        left, right, common = _split_letters(split)
        for c in ell:
            if abs(c) not in common:
                return "right" if abs(c) in right else "left"
        return which
    # one side is the whole cyclic group; the other is the edge group
    small = "left" if split.right.kind == "whole" else "right"
    if which != small:
        return which
    return small if getattr(split, small).contains(ell) else _other_side(small)


@lru_cache(maxsize=None)
def _split_letters(split):
    left, right = split.left._letter_set(), split.right._letter_set()
    return frozenset(left), frozenset(right), frozenset(left & right)


def _other_side(side):
    return "right" if side == "left" else "left"


@dataclass(frozen=True)
class LocalTerm:
    """One side of a splitting of the base vertex group.

    ``attach`` maps each letter at the base vertex to the side of the split
    containing its edge group; ``fibre`` is the side whose base vertex the
    identity element is sent to.
    """

    split: SplitData
    attach: tuple          # ((letter, side), ...)
    side: str = "right"
    fibre: str = "left"

    def __post_init__(self):
        for letter, s in self.attach:
            if s not in ("left", "right"):
                raise SchemaError(f"bad attachment side {s!r}")
        if self.side not in ("left", "right") or self.fibre not in ("left", "right"):
            raise SchemaError("local term sides must be 'left' or 'right'")

    def side_of_branch(self, t, letter):
        return local_side(self.split, t, dict(self.attach)[letter])

    def side_of_point(self, ell):
        return local_side(self.split, ell, self.fibre)

    def stabilizer_desc(self):
        return self.split.edge_group()


# ---------------------------------------------------------------- descriptions

class AISet:
    """Common interface; see the module docstring.  Subclasses provide
    ``gog``, ``base`` and ``name`` attributes."""

    def status(self, chain):
        raise NotImplementedError

    def contains(self, x):
        raise NotImplementedError

    @property
    def core(self):
        raise NotImplementedError

    @property
    def stabilizer(self):
        raise NotImplementedError

    def toggle_points(self):
        return ()

    def complement(self):
        raise NotImplementedError

    def translate(self, g):
        return Translate(self, g)

    def describe(self):
        return self.name or repr(self)

    def core_hull(self):
        return hull(self.core)


@dataclass(frozen=True, eq=False)
class SideSpec(AISet):
    gog: object
    base: str
    stab: LocatedSubgroup
    terms: tuple = ()
    local: LocalTerm | None = None
    toggles: tuple = ()
    complemented: bool = False
    name: str = ""
    _toggle_keys: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        terms = tuple(_canonical_ref(t, self.gog, self.base) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        keys = frozenset(self.stab.right_key(x) for x in self.toggles)
        object.__setattr__(self, "_toggle_keys", keys)

    @property
    def stabilizer(self):
        return self.stab

    def _raw_status(self, chain):
        if any(t.contains(chain) for t in self.terms):
            return IN
        if self.local is None:
            return OUT
        if not chain:
            return MIXED
        t, letter = chain[0]
        return IN if self.local.side_of_branch(t, letter) == self.local.side else OUT

    def status(self, chain):
        s = self._raw_status(chain)
        return _flip(s) if self.complemented else s

    def contains(self, x):
        chain = x.syllables
        s = self._raw_status(chain)
        if s == MIXED:
            s = IN if self.local.side_of_point(x.last) == self.local.side else OUT
        inside = (s == IN) != self.complemented
        if self._toggle_keys and self.stab.right_key(x) in self._toggle_keys:
            inside = not inside
        return inside

    @property
    def core(self):
        out = set()
        for t in self.terms:
            out.add(t.child)
            out.add(t.parent)
        if self.local is not None:
            out.add(())
        return frozenset(out)

    def toggle_points(self):
        return tuple((self.stab, x) for x in self.toggles)

    def complement(self):
        return SideSpec(self.gog, self.base, self.stab, self.terms, self.local, self.toggles,
                        not self.complemented, _star_name(self.name))

    def with_toggles(self, toggles, name=None):
        return SideSpec(self.gog, self.base, self.stab, self.terms, self.local,
                        tuple(toggles), self.complemented, name or self.name)

    def untoggled(self):
        return self.with_toggles(())

    # -- serialisation
    def to_json(self):
        g = self.gog
        d = {"name": self.name,
             "stabilizer": {"path": _path_text(self.stab.path),
                            "subgroup": self.stab.desc.to_json()},
             "terms": [{"edge": _path_text(vertex_path_nf(t.child, g, self.base)),
                        "down": t.down} for t in self.terms]}
        if self.local is not None:
            loc = self.local
            d["local"] = {"left": loc.split.left.to_json(), "right": loc.split.right.to_json(),
                          "attach": {f"{e}{'' if s > 0 else '^-1'}": side
                                     for (e, s), side in loc.attach},
                          "side": loc.side, "fibre": loc.fibre}
        if self.toggles:
            d["toggles"] = [_path_text(x) for x in self.toggles]
        if self.complemented:
            d["complement"] = True
        return d

    @classmethod
    def from_json(cls, d, gog, base):
        if not isinstance(d, dict):
            raise SchemaError("a set description must be an object")
        try:
            st = d["stabilizer"]
            path = _parse_path(st.get("path", ""), gog, base)
            desc = SubgroupDesc.from_json(gog.vertices[path.end], st["subgroup"])
            terms = []
            for t in d.get("terms", []):
                chain = _parse_path(t["edge"], gog, base).syllables
                if not chain:
                    raise SchemaError("a halfspace term needs a nonempty path")
                terms.append(HalfspaceRef(chain, bool(t.get("down", True))))
            local = None
            if "local" in d:
                loc = d["local"]
                amb = gog.vertices[base]
                split = SplitData(SubgroupDesc.from_json(amb, loc["left"]),
                                  SubgroupDesc.from_json(amb, loc["right"]))
                attach = []
                for text, side in sorted(loc["attach"].items()):
                    e, _, power = text.partition("^")
                    letter = (e, -1 if power == "-1" else 1)
                    if letter not in gog.letters_at(base):
                        raise SchemaError(f"{text} is not a letter at {base}")
                    attach.append((letter, side))
                local = LocalTerm(split, tuple(attach), loc.get("side", "right"),
                                  loc.get("fibre", "left"))
            toggles = tuple(_parse_path(w, gog, base) for w in d.get("toggles", []))
            if any(x.end != base for x in toggles):
                raise SchemaError("toggled cosets need closed paths at the base")
        except (KeyError, TypeError, AttributeError) as exc:
            raise SchemaError(f"malformed set description: {exc}") from exc
        return cls(gog, base, LocatedSubgroup(path, desc), tuple(terms), local, toggles,
                   bool(d.get("complement", False)), d.get("name", ""))


def _canonical_ref(ref, gog, base):
    """The same oriented edge named by its reduced coset chain."""
    chain = act_on_vertex(gog.identity(base), ref.child)
    return ref if chain == ref.child else HalfspaceRef(chain, ref.down)


def _star_name(name):
    if not name:
        return name
    return name[:-1] if name.endswith("*") else name + "*"


def vertex_path_nf(chain, gog, base):
    end = vertex_type(chain, gog, base)
    return NormalForm(base, tuple(chain), gog.vertices[end].identity(), gog)


def _path_text(x):
    text = x.format()
    return "" if x.is_identity() or text == "1" else text


def _parse_path(text, gog, base):
    return reduce(parse_word(text, gog, base), gog, base) if text.strip() else gog.identity(base)


class Translate(AISet):
    """The translate ``g X``."""

    def __init__(self, inner, g):
        if isinstance(inner, Translate):
            g = multiply(g, inner.g)
            inner = inner.inner
        self.inner, self.g = inner, g
        self.ginv = invert(g)
        self.gog, self.base = inner.gog, inner.base
        self.name = f"{g.format()}.{inner.name}" if not g.is_identity() else inner.name
        self._core = None
        self._status = {}

    def status(self, chain):
        out = self._status.get(chain)
        if out is None:
            out = self._status[chain] = self.inner.status(act_on_vertex(self.ginv, chain))
        return out

    def contains(self, x):
        return self.inner.contains(multiply(self.ginv, x))

    @property
    def core(self):
        if self._core is None:
            self._core = frozenset(act_on_vertex(self.g, c) for c in self.inner.core)
        return self._core

    @property
    def stabilizer(self):
        h = self.inner.stabilizer
        return LocatedSubgroup(multiply(self.g, h.path), h.desc)

    def toggle_points(self):
        return tuple((LocatedSubgroup(multiply(self.g, h.path), h.desc), multiply(self.g, x))
                     for h, x in self.inner.toggle_points())

    def complement(self):
        return Translate(self.inner.complement(), self.g)

    def translate(self, g):
        return Translate(self.inner, multiply(g, self.g))


def _combine(op, x, y):
    if op == "union":
        if IN in (x, y):
            return IN
        return MIXED if MIXED in (x, y) else OUT
    if op == "intersection":
        if OUT in (x, y):
            return OUT
        return MIXED if MIXED in (x, y) else IN
    if MIXED in (x, y):
        return MIXED
    return x ^ y


class Combination(AISet):
    """Union, intersection or symmetric difference of two descriptions with a
    common stabiliser (the first one's is reported)."""

    def __init__(self, op, first, second, negate=False, name=""):
        if op not in ("union", "intersection", "symdiff"):
            raise ValueError(f"unknown operation {op!r}")
        self.op, self.first, self.second, self.negate = op, first, second, negate
        self.gog, self.base = first.gog, first.base
        sym = {"union": "+", "intersection": "&", "symdiff": "^"}[op]
        self.name = name or f"({first.name}{sym}{second.name})" + ("*" if negate else "")

    def status(self, chain):
        s = _combine(self.op, self.first.status(chain), self.second.status(chain))
        return _flip(s) if self.negate else s

    def contains(self, x):
        a, b = self.first.contains(x), self.second.contains(x)
        r = {"union": a or b, "intersection": a and b, "symdiff": a != b}[self.op]
        return r != self.negate

    @property
    def core(self):
        return self.first.core | self.second.core

    @property
    def stabilizer(self):
        return self.first.stabilizer

    def toggle_points(self):
        return self.first.toggle_points() + self.second.toggle_points()

    def complement(self):
        return Combination(self.op, self.first, self.second, not self.negate)


def halfspace_set(gog, base, ref, name=""):
    """``Z_s`` for the oriented tree edge ``ref``, stabilised by its edge group."""
    ref = _canonical_ref(ref, gog, base)
    t, letter = ref.child[-1]
    parent_path = vertex_path_nf(ref.parent, gog, base)
    p = NormalForm(base, parent_path.syllables, t, gog)
    return SideSpec(gog, base, LocatedSubgroup(p, gog.alpha(letter)), (ref,), name=name)


# ------------------------------------------------------------- classification

def _frames(x):
    """Elements ``c`` such that ``x`` looks like an untranslated description
    around ``c``: windows are sampled in each frame, not only at the identity."""
    if isinstance(x, Translate):
        return [multiply(x.g, c) for c in _frames(x.inner)]
    if isinstance(x, Combination):
        return _frames(x.first) + _frames(x.second)
    # halfspace unions are constant on fibres, so only local layers need a frame
    return [x.gog.identity(x.base)] if getattr(x, "local", None) is not None else []


def _tree_neighbours(u, gog, base, rep_radius):
    out = children(u, gog, base, rep_radius)
    if u:
        out.append(u[:-1])
    return out


def _deg_in(u, region):
    d = 1 if u and u[:-1] in region else 0
    return d + sum(1 for w in region if len(w) == len(u) + 1 and w[:-1] == u)


def _want(eps):
    return IN if eps == 0 else OUT


def _fibre_points(u, gog, base, radius):
    vg = gog.vertices[base]
    return [NormalForm(base, u, k, gog) for k in vg.elements(radius)]


def _toggle_samples(toggles, radius):
    out = []
    for h, x in toggles:
        ident = h.gog.identity(h.path.start)
        for k in words_ball(h.generators(), radius, ident):
            out.append(multiply(k, x))
    return out


def pair_classes(a, b, window=Window()):
    """Classes of the four corners ``a^e1 & b^e2``, keyed by ``(e1, e2)`` with
    0 for the set and 1 for its complement.  Smallness is relative to the
    stabiliser of ``a``."""
    gog, base = a.gog, a.base
    region = hull(a.core | b.core)
    st_a = {u: a.status(u) for u in region}
    st_b = {u: b.status(u) for u in region}
    frames = [c for c in {*_frames(a), *_frames(b)} if not c.is_identity()]
    base_near = _tree_neighbours((), gog, base, window.rep_radius) if frames else []
    branch = set()
    for u in region:
        val = gog.valence(vertex_type(u, gog, base))
        if val is not None and val <= _deg_in(u, region):
            continue
        if MIXED in (st_a[u], st_b[u]):
            near = _tree_neighbours(u, gog, base, window.rep_radius)
            for c in frames:
                if act_on_vertex(c, ()) == u:
                    near += [act_on_vertex(c, w) for w in base_near]
            for w in near:
                if w not in region:
                    branch.add((a.status(w), b.status(w)))
        else:
            branch.add((st_a[u], st_b[u]))
    out = {}
    pending = []
    for ea in (0, 1):
        for eb in (0, 1):
            if (_want(ea), _want(eb)) in branch:
                out[(ea, eb)] = CornerClass.LARGE
            else:
                pending.append((ea, eb))
    if not pending:
        return out
    H = a.stabilizer
    toggles = a.toggle_points() + b.toggle_points()
    fibres = [u for u in region if vertex_type(u, gog, base) == base]
    counts = {k: [] for k in pending}
    try:
        for radius in (window.radius, window.radius + 1):
            keys = {k: set() for k in pending}
            cands = []
            for u in fibres:
                if any((st_a[u] in (_want(ea), MIXED)) and (st_b[u] in (_want(eb), MIXED))
                       for ea, eb in pending) or toggles:
                    cands.extend(_fibre_points(u, gog, base, radius))
            cands.extend(_toggle_samples(toggles, radius))
            for c in frames:
                cands.extend(multiply(c, k) for k in _fibre_points((), gog, base, radius))
            for x in set(cands):
                ia, ib = a.contains(x), b.contains(x)
                k = (0 if ia else 1, 0 if ib else 1)
                if k in keys:
                    keys[k].add(H.right_key(x))
            for k in pending:
                counts[k].append(len(keys[k]))
    except BallTooLarge:
        for k in pending:
            out[k] = CornerClass.UNKNOWN
        return out
    for k in pending:
        n1, n2 = counts[k]
        if n2 == 0:
            out[k] = CornerClass.EMPTY
        elif n1 == n2:
            out[k] = CornerClass.SMALL
        else:
            out[k] = CornerClass.LARGE
    return out


def classify_corner(x, y, selector=(0, 0), window=Window()):
    """Class of the corner ``x^e1 & y^e2`` (0 keeps a set, 1 complements it)."""
    return pair_classes(x, y, window)[tuple(selector)]


def crosses(x, y, window=Window()):
    """All four corners large.  Disjoint core hulls never cross."""
    if not (x.core_hull() & y.core_hull()):
        return False
    return all(c == CornerClass.LARGE for c in pair_classes(x, y, window).values())


def classify_strength(x, y, window=Window(), radii=None):
    """Whether ``y`` crosses ``x`` strongly.

    The coboundary of ``y`` is sampled in a ball of the group; ``y`` crosses
    strongly exactly when the parts of it inside ``x`` and inside ``x*`` both
    meet unboundedly many right cosets of the stabiliser of ``x``.  The
    counts are compared at two consecutive ball radii, by default
    ``window.radius + 3`` and the next one.
    """
    if not crosses(x, y, window):
        return Strength.NOT_CROSSING
    gog, base = x.gog, x.base
    gens = group_generators(gog, base)
    steps = gens + [invert(s) for s in gens]
    H = x.stabilizer
    counts = []
    radii = radii or (window.radius + 3, window.radius + 4)
    for radius in radii:
        sides = (set(), set())
        for g in enumerate_ball(gog, radius, base):
            inside = y.contains(g)
            if any(y.contains(multiply(g, s)) != inside for s in steps):
                sides[0 if x.contains(g) else 1].add(H.right_key(g))
        counts.append((len(sides[0]), len(sides[1])))
    grows = [counts[1][k] > counts[0][k] for k in (0, 1)]
    return Strength.STRONG if all(grows) else Strength.WEAK


# ------------------------------------------------------------------ the table

class CornerTable:
    """Corner classes of a finite family.

    ``provenance`` is ``"Computed"`` when classes come from
    :func:`pair_classes` (filled lazily) and ``"Direct"`` for a loaded table.
    """

    def __init__(self, family, window=Window(), provenance="Computed", names=None):
        self.family = list(family)
        self.window = window
        self.provenance = provenance
        self.names = names or [getattr(s, "name", str(k)) for k, s in enumerate(self.family)]
        self.entries = {}
        self.strengths = {}

    def __len__(self):
        return len(self.names)

    def _fill(self, i, j):
        if self.provenance != "Computed":
            raise UnresolvedCorners(f"no entry for the pair ({i}, {j})")
        cls = pair_classes(self.family[i], self.family[j], self.window)
        for (ei, ej), c in cls.items():
            self.entries[(i, ei, j, ej)] = c
            self.entries.setdefault((j, ej, i, ei), c)

    def corner(self, i, ei, j, ej):
        key = (i, ei, j, ej)
        if key not in self.entries:
            self._fill(i, j)
        return self.entries[key]

    def pair(self, i, j):
        return {(ei, ej): self.corner(i, ei, j, ej) for ei in (0, 1) for ej in (0, 1)}

    def crosses(self, i, j):
        if i == j:
            return False
        if self.provenance == "Computed":
            hi, hj = self.family[i].core_hull(), self.family[j].core_hull()
            if not hi & hj:
                return False
        return all(c == CornerClass.LARGE for c in self.pair(i, j).values())

    def strength(self, i, j):
        """Strength of ``j`` crossing ``i``."""
        if (i, j) in self.strengths:
            return self.strengths[(i, j)]
        if self.provenance != "Computed":
            raise UnresolvedCorners(f"no strength recorded for ({i}, {j})")
        s = classify_strength(self.family[i], self.family[j], self.window)
        self.strengths[(i, j)] = s
        return s

    def check_symmetry(self):
        for (i, ei, j, ej), c in self.entries.items():
            other = self.entries.get((j, ej, i, ei))
            if other is not None and other != c:
                raise InconsistentDirectTable(
                    f"corner ({i},{ei},{j},{ej}) is {c.value} but its mirror is {other.value}")

    def to_json(self):
        rows = []
        for (i, ei, j, ej), c in sorted(self.entries.items()):
            row = {"i": i, "eps_i": ei, "j": j, "eps_j": ej, "class": c.value}
            if ei == 0 and ej == 0 and (i, j) in self.strengths:
                row["strength"] = self.strengths[(i, j)].value
            rows.append(row)
        return {"schemaVersion": 1, "sets": list(self.names), "entries": rows}


def load_direct_table(data):
    """Build a ``Direct`` table from parsed JSON (or a JSON string)."""
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict) or data.get("schemaVersion") != 1:
        raise SchemaError("direct tables need schemaVersion 1")
    names = data.get("sets")
    if not isinstance(names, list) or not names:
        raise SchemaError("direct tables list their sets under 'sets'")
    table = CornerTable([], provenance="Direct", names=[str(n) for n in names])
    table.group = data.get("group", "G")
    table.orbits = data.get("orbits")
    n = len(names)
    by_value = {c.value: c for c in CornerClass}
    by_strength = {s.value: s for s in Strength}
    for row in data.get("entries", []):
        try:
            i, ei, j, ej = (int(row[k]) for k in ("i", "eps_i", "j", "eps_j"))
            c = by_value[row["class"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed table entry {row!r}") from exc
        if not (0 <= i < n and 0 <= j < n) or ei not in (0, 1) or ej not in (0, 1) or i == j:
            raise SchemaError(f"table entry out of range: {row!r}")
        key = (i, ei, j, ej)
        if key in table.entries and table.entries[key] != c:
            raise InconsistentDirectTable(f"conflicting entries for {key}")
        table.entries[key] = c
        if "strength" in row:
            try:
                table.strengths[(i, j)] = by_strength[row["strength"]]
            except KeyError as exc:
                raise SchemaError(f"unknown strength {row['strength']!r}") from exc
    for (i, ei, j, ej), c in list(table.entries.items()):
        mirror = (j, ej, i, ei)
        if mirror not in table.entries:
            raise InconsistentDirectTable(f"entry {(i, ei, j, ej)} has no mirror entry")
    table.check_symmetry()
    for i, j in combinations(range(n), 2):
        cls = [table.entries.get((i, ei, j, ej)) for ei in (0, 1) for ej in (0, 1)]
        if all(c is None for c in cls):
            continue
        if any(c is None for c in cls):
            raise InconsistentDirectTable(f"pair ({i}, {j}) lists only some corners")
        if sum(c != CornerClass.LARGE for c in cls) > 2:
            raise InconsistentDirectTable(f"pair ({i}, {j}) has more than two small corners")
    return table


# ---------------------------------------------------------------- the order

def leq(table, u, v):
    """``U <= V`` for oriented sets ``u = (i, eps)``, ``v = (j, eps)``.

    Returns True or False, or None when the pair violates condition (*)
    (two small nonempty corners and no empty one).
    """
    (i, ei), (j, ej) = u, v
    if i == j:
        return ei == ej
    cls = table.pair(i, j)
    target = (ei, 1 - ej)
    small = [k for k, c in cls.items() if c.is_small]
    unknown = any(c == CornerClass.UNKNOWN for c in cls.values())
    if unknown:
        return None
    if len(small) >= 2 and not any(cls[k] == CornerClass.EMPTY for k in small):
        return None
    if cls[target] == CornerClass.EMPTY:
        return True
    if cls[target] == CornerClass.SMALL and small == [target]:
        return True
    return False


def side_of(table, i, j):
    """Orientation of ``j`` containing ``i`` (up to a small set): 0 for
    ``X_j``, 1 for ``X_j*``; None if ``i`` and ``j`` cross or are undefined."""
    for ei in (0, 1):
        for ej in (0, 1):
            if leq(table, (i, ei), (j, ej)):
                return ej
    return None


def check_condition_star(table, pairs=None):
    """Pairs with two small corners neither of which is empty."""
    n = len(table)
    pairs = pairs if pairs is not None else combinations(range(n), 2)
    bad = []
    for i, j in pairs:
        cls = list(table.pair(i, j).values())
        small = [c for c in cls if c.is_small]
        if len(small) >= 2 and CornerClass.EMPTY not in small:
            bad.append((i, j))
    return bad


def _comparable(table, i, j):
    return any(leq(table, (i, a), (j, b)) for a in (0, 1) for b in (0, 1))


def good_enough_position(table):
    """Every incomparable, non-crossing pair must share a set crossing both.
    Returns the list of offending pairs (empty when in good enough position)."""
    n = len(table)
    bad = []
    for i, j in combinations(range(n), 2):
        if table.crosses(i, j) or _comparable(table, i, j):
            continue
        if not any(table.crosses(i, k) and table.crosses(j, k)
                   for k in range(n) if k not in (i, j)):
            bad.append((i, j))
    return bad


def is_isolated(table, i):
    """``X_i`` crosses no other member of the table's family."""
    return not any(table.crosses(i, j) for j in range(len(table)) if j != i)


def _between_counts(table, keys):
    pos = {k: n for n, k in enumerate(keys)}
    ids = [pos[k] for k in keys]
    oriented = [(i, e) for i in ids for e in (0, 1)]
    out = {}
    for u in oriented:
        for w in oriented:
            if u[0] == w[0] or not leq(table, u, w):
                continue
            out[(keys[u[0]], u[1], keys[w[0]], w[1])] = sum(
                1 for v in oriented
                if v[0] not in (u[0], w[0]) and leq(table, u, v) and leq(table, v, w))
    return out


def is_discrete_window(table, table_next, keys=None, keys_next=None):
    """Between-counts of comparable pairs agree between two windows.

    ``keys`` name the members of each table so that pairs can be matched;
    only pairs present in the smaller window are compared.
    """
    keys = keys or list(range(len(table)))
    keys_next = keys_next or list(range(len(table_next)))
    common = [k for k in keys if k in set(keys_next)]
    sub = _restricted(table, keys, common)
    sub_next = _restricted(table_next, keys_next, common)
    return _between_counts(sub, common) == _between_counts(sub_next, common)


class _Restricted:
    def __init__(self, table, idx):
        self.table, self.idx = table, idx

    def __len__(self):
        return len(self.idx)

    def pair(self, i, j):
        return self.table.pair(self.idx[i], self.idx[j])

    def crosses(self, i, j):
        return self.table.crosses(self.idx[i], self.idx[j])


def _restricted(table, keys, common):
    pos = {k: n for n, k in enumerate(keys)}
    return _Restricted(table, [pos[k] for k in common])
