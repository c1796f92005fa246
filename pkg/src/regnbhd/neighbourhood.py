"""Regular neighbourhoods of finite families of almost-invariant sets.

The pipeline materialises the translates of the input sets over a ball of
the group, partitions them into cross-connected components (CCCs), computes
betweenness of CCCs near the base ones, realises the resulting pretree and
reads the quotient graph of groups off the reference Bass-Serre tree:

* a V0 vertex sits at the centre of the hull of a base CCC (a tree vertex or
  an edge midpoint);
* a V1 vertex sits at the centre of a star, located where the hulls of the
  star's members meet.

Two consecutive radii of a schedule giving isomorphic quotients certify the
answer.
"""
from __future__ import annotations

import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx

from .bassserre import (HalfspaceRef, SplitData, _edge_group_desc, _fresh, act_on_vertex,
                        collapse, edge_at, geodesic, gog_isomorphic, hull, is_minimal,
                        refine_at_vertex, vertex_type)
from .corners import (IN, MIXED, OUT, AISet, CornerClass, LocalTerm, SideSpec, Translate,
                      Window, check_condition_star, good_enough_position, halfspace_set,
                      is_isolated, leq, pair_classes, side_of, vertex_path_nf)
from .errors import (NoSplittingRealization, NonzeroIntersection, NoStabilization,
                     NotEnclosed, PositionFailure, SchemaError, UndecidableForDesc,
                     UnresolvedCorners, WindowTooSmall)
from .groupcore import (CompositeGroup, EdgeDesc, GraphOfGroups, LocatedSubgroup, NamedGroup,
                        NormalForm,
                        enumerate_ball, finite_cyclic, free_group, generates_whole, invert,
                        multiply, whole)
from .pretree import Pretree, check_axioms, realize_tree, stars

__all__ = [
    "WindowedFamily", "translates", "MemberTable", "CCCPartition", "ccc_partition",
    "betweenness_pretree", "RegularNeighbourhood", "StabilizationCertificate",
    "build_regnbhd", "nest_isolated", "compatible_realize", "encloses", "normalize_B",
    "intersection_number", "check_regnbhd_axioms", "isolated_vertex_check", "AxiomReport",
    "tree_distance", "splitting_set", "build_from_table",
]


CCC_LISTING = 24


def _member_name(part, m):
    return part.wf.members[m].name


def tree_distance(u, v):
    k = 0
    while k < len(u) and k < len(v) and u[k] == v[k]:
        k += 1
    return len(u) + len(v) - 2 * k


# --------------------------------------------------------------- translates

@dataclass(frozen=True)
class Member:
    index: int
    g: NormalForm
    aiset: AISet
    hull: frozenset

    @property
    def name(self):
        return self.aiset.name


class WindowedFamily:
    """Distinct translates ``g X_i`` for ``g`` in a ball of the group."""

    def __init__(self, family, radius, members, keys):
        self.family = list(family)
        self.radius = radius
        self.members = members
        self.keys = keys
        self.position = {k: n for n, k in enumerate(keys)}

    def __len__(self):
        return len(self.members)

    def find(self, i, g):
        """Position of the member ``g X_i`` (None when outside the window)."""
        return self.position.get((i, self.family[i].stabilizer.left_key(g)))


def _common_frame(family):
    gog, base = family[0].gog, family[0].base
    for x in family:
        if x.gog is not gog or x.base != base:
            raise SchemaError("all sets must live over one graph of groups and base vertex")
    return gog, base


def translates(family, radius):
    """All distinct translates of the family over the ball of the given radius.

    Translates are identified by the left coset of the stabiliser, so the
    recorded stabilisers must be the full stabilisers.
    """
    family = list(family)
    if not family:
        return WindowedFamily([], radius, [], [])
    gog, base = _common_frame(family)
    members, keys, seen = [], [], set()
    for g in enumerate_ball(gog, radius, base):
        for i, x in enumerate(family):
            key = (i, x.stabilizer.left_key(g))
            if key in seen:
                continue
            seen.add(key)
            t = x if g.is_identity() else Translate(x, g)
            members.append(Member(i, g, t, frozenset(t.core_hull())))
            keys.append(key)
    return WindowedFamily(family, radius, members, keys)


class MemberTable:
    """Corner classes between window members, cached up to translation."""

    provenance = "Computed"

    def __init__(self, wf, window=Window(), cache=None):
        self.wf = wf
        self.window = window
        # keyed up to translation, so one cache serves every radius
        self._cache = cache if cache is not None else {}
        self._by_position = {}
        self.classified = 0

    def __len__(self):
        return len(self.wf.members)

    def relative(self, a, b):
        ma, mb = self.wf.members[a], self.wf.members[b]
        rel = multiply(invert(ma.g), mb.g)
        xj = self.wf.family[mb.index]
        return (ma.index, mb.index, xj.stabilizer.left_key(rel)), rel

    def pair(self, a, b):
        out = self._by_position.get((a, b))
        if out is not None:
            return out
        key, rel = self.relative(a, b)
        out = self._cache.get(key)
        if out is None:
            xi, xj = self.wf.family[key[0]], self.wf.family[key[1]]
            other = xj if rel.is_identity() else Translate(xj, rel)
            out = pair_classes(xi, other, self.window)
            self._cache[key] = out
            self.classified += 1
        if any(c == CornerClass.UNKNOWN for c in out.values()):
            raise UnresolvedCorners(f"corners of {self.wf.members[a].name} and "
                                    f"{self.wf.members[b].name} are unresolved")
        self._by_position[(a, b)] = out
        return out

    def contact(self, a, b):
        """The single shared hull vertex of two members, when neither has a
        local layer there; such members are nested around that vertex."""
        ma, mb = self.wf.members[a], self.wf.members[b]
        common = ma.hull & mb.hull
        if len(common) != 1:
            return None
        (v,) = common
        if ma.aiset.status(v) == MIXED or mb.aiset.status(v) == MIXED:
            return None
        return v

    def crosses(self, a, b):
        if a == b or not (self.wf.members[a].hull & self.wf.members[b].hull):
            return False
        if self.contact(a, b) is not None:
            return False
        return all(c == CornerClass.LARGE for c in self.pair(a, b).values())

    def positions(self):
        """Window position pairs ``(a, b)`` whose corners were looked up."""
        return sorted(self._by_position)

    def entries(self):
        """Every classified relative pair: ``{(i, j, key): classes}``."""
        return dict(self._cache)


# ---------------------------------------------------------------- partition

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


@dataclass
class CCCPartition:
    wf: WindowedFamily
    classes: list                 # sorted member positions per class
    class_of: list                # member position -> class id
    witnesses: list               # crossing pairs used to merge
    orbit_of_index: dict          # base index -> orbit id
    base_class: dict              # orbit id -> class containing the smallest identity member
    certificates: dict = field(default_factory=dict)

    def members_of(self, c):
        return [self.wf.members[m] for m in self.classes[c]]

    def hull_of(self, c):
        return frozenset(hull(set().union(*(self.wf.members[m].hull for m in self.classes[c]))))

    def is_singleton(self, c):
        return len(self.classes[c]) == 1


def ccc_partition(wf, table):
    """Union-find closure of crossing among window members."""
    n = len(wf.members)
    uf = _UnionFind(n)
    witnesses = []
    by_vertex = defaultdict(list)
    for m, mem in enumerate(wf.members):
        for v in mem.hull:
            by_vertex[v].append(m)
    # g X_i against g X_j first: one classification serves the whole ball, and
    # the stabiliser cosets then chain most of a component together
    for g in enumerate_ball(wf.family[0].gog, wf.radius, wf.family[0].base):
        here = [wf.find(i, g) for i in range(len(wf.family))]
        for a, b in combinations(here, 2):
            if uf.find(a) != uf.find(b) and table.crosses(a, b):
                uf.union(a, b)
                witnesses.append((a, b))
    for v in sorted(by_vertex, key=lambda c: (len(c), repr(c))):
        ms = by_vertex[v]
        roots = defaultdict(list)
        for m in ms:
            roots[uf.find(m)].append(m)
        if len(roots) < 2:
            continue
        for a, b in combinations(ms, 2):
            if uf.find(a) != uf.find(b) and table.crosses(a, b):
                uf.union(a, b)
                witnesses.append((a, b))
    groups = defaultdict(list)
    for m in range(n):
        groups[uf.find(m)].append(m)
    classes = sorted(groups.values())
    class_of = [0] * n
    for c, ms in enumerate(classes):
        for m in ms:
            class_of[m] = c
    # G permutes CCCs, so classes sharing a base index lie in one orbit
    iuf = _UnionFind(len(wf.family))
    for ms in classes:
        idx = [wf.members[m].index for m in ms]
        for k in idx[1:]:
            iuf.union(idx[0], k)
    roots = sorted({iuf.find(i) for i in range(len(wf.family))})
    orbit_of_index = {i: roots.index(iuf.find(i)) for i in range(len(wf.family))}
    base_class = {}
    for i in range(len(wf.family)):
        o = orbit_of_index[i]
        if o not in base_class:
            base_class[o] = class_of[wf.find(i, wf.family[i].gog.identity(wf.family[i].base))]
    part = CCCPartition(wf, classes, class_of, witnesses, orbit_of_index, base_class)
    for o, c in base_class.items():
        part.certificates[o] = _certificate(part, c)
    return part


def _certificate(part, c):
    """Stabiliser generators of a base CCC: the stabilisers of its members at
    the identity and one witness element per further base index."""
    wf = part.wf
    members = part.members_of(c)
    gens, witnesses, seen_idx = [], [], set()
    for mem in sorted(members, key=lambda m: (m.g.length(), m.index)):
        if mem.index in seen_idx:
            continue
        seen_idx.add(mem.index)
        witnesses.append((mem.index, mem.g))
        h = mem.aiset.stabilizer
        gens.extend(h.generators())
    extra = []
    by_index = defaultdict(list)
    for mem in members:
        by_index[mem.index].append(mem.g)
    for i, gs in sorted(by_index.items()):
        g0 = min(gs, key=lambda g: g.length())
        for g in gs:
            if g is not g0:
                extra.append(multiply(g, invert(g0)))
    extra.sort(key=lambda g: g.length())
    # crossings joining the family members of this class, one per merge
    iuf = _UnionFind(len(wf.family))
    crossings = []
    inside = set(part.classes[c])
    for a, b in sorted(part.witnesses,
                       key=lambda ab: wf.members[ab[0]].g.length() + wf.members[ab[1]].g.length()):
        if a in inside and iuf.union(wf.members[a].index, wf.members[b].index):
            crossings.append((a, b))
    return {"generators": gens, "witnesses": witnesses, "extra": extra, "crossings": crossings}


# --------------------------------------------------------------- betweenness

def _side(table, wf, a, v):
    """Orientation (0 for V, 1 for V*) of member ``v`` containing member ``a``."""
    ma, mv = wf.members[a], wf.members[v]
    if not (ma.hull & mv.hull):
        s = mv.aiset.status(next(iter(sorted(ma.hull, key=len))))
        return 0 if s == IN else 1
    contact = table.contact(a, v)
    if contact is not None:
        return 0 if mv.aiset.status(contact) == IN else 1
    cls = table.pair(a, v)
    for eps in (0, 1):
        # a equals v^eps up to a small set: its hull lies on the other side
        if cls[(0, 1 - eps)].is_small and cls[(1, eps)].is_small:
            return 1 - eps
    s = side_of(table, a, v)
    if s is None:
        raise PositionFailure(f"{ma.name} and {mv.name} lie in different CCCs but "
                              "are not comparable")
    return s


def _relevant_classes(part, reach):
    hulls = {c: part.hull_of(c) for c in range(len(part.classes))}
    bases = set(part.base_class.values())
    out = []
    for c in range(len(part.classes)):
        if c in bases or any(
                min(tree_distance(u, v) for u in hulls[c] for v in hulls[b]) <= reach
                for b in bases):
            out.append(c)
    return out, hulls


def _gate(h_from, h_to):
    """First vertex off ``h_from`` on the way to the disjoint subtree ``h_to``."""
    u, w = min(((u, w) for u in h_from for w in h_to),
               key=lambda uw: (tree_distance(*uw), repr(uw)))
    return geodesic(u, w)[1]


def betweenness_pretree(part, table, reach=2):
    """Pretree on the CCCs within ``reach`` of the base CCCs."""
    wf = part.wf
    relevant, hulls = _relevant_classes(part, reach)
    reps = {c: part.classes[c][0] for c in relevant}
    sig, by_gate = {}, {}
    for b in relevant:
        for a in relevant:
            if a == b:
                continue
            if hulls[a] & hulls[b]:
                sig[(a, b)] = tuple(_side(table, wf, reps[a], v) for v in part.classes[b])
                continue
            # every member of b is constant beyond the gate
            gate = _gate(hulls[b], hulls[a])
            key = (b, gate)
            if key not in by_gate:
                by_gate[key] = tuple(0 if wf.members[v].aiset.status(gate) == IN else 1
                                     for v in part.classes[b])
            sig[(a, b)] = by_gate[key]
    triples = []
    for a, c in combinations(relevant, 2):
        for b in relevant:
            if b not in (a, c) and sig[(a, b)] != sig[(c, b)]:
                triples.append((a, b, c))
    p = Pretree.from_triples(relevant, triples)
    return p, hulls


# ------------------------------------------------------------ tree geometry

def _site_of(vertices):
    """Centre of a finite subtree: ``("vertex", chain)`` or ``("edge", child)``."""
    vs = list(vertices)
    if not vs:
        raise PositionFailure("empty locus")
    y = max(vs, key=lambda v: (tree_distance(vs[0], v), repr(v)))
    z = max(vs, key=lambda v: (tree_distance(y, v), repr(v)))
    path = geodesic(y, z)
    n = len(path) - 1
    if n % 2 == 0:
        return ("vertex", path[n // 2])
    p, q = path[n // 2], path[n // 2 + 1]
    return ("edge", p if len(p) > len(q) else q)


def _bridge(h1, h2):
    common = h1 & h2
    if common:
        return set(common)
    u, v = min(((u, v) for u in h1 for v in h2), key=lambda uv: (tree_distance(*uv), repr(uv)))
    return set(geodesic(u, v))


def _site_type(site, gog, base):
    kind, chain = site
    if kind == "vertex":
        return ("vertex", vertex_type(chain, gog, base))
    return ("edge", chain[-1][1][0])


def _site_label(site, gog, base):
    kind, chain = site
    return f"{kind}:{vertex_path_nf(chain, gog, base).format()}"


# ------------------------------------------------------------------ quotient

@dataclass
class StabilizationCertificate:
    radii: tuple
    isomorphism: dict
    orbit_counts: tuple
    status: str | None = None

    def to_json(self):
        status = self.status or f"certified-at-radius-{self.radii[-1]}"
        return {"radii": list(self.radii), "isomorphism": dict(sorted(self.isomorphism.items())),
                "orbitCounts": list(self.orbit_counts), "status": status}


@dataclass
class RegularNeighbourhood:
    gog: GraphOfGroups
    v0: dict                      # vertex name -> info dict
    v1: dict                      # vertex name -> info dict
    radius: int | None = None
    certificate: StabilizationCertificate | None = None
    partition: CCCPartition | None = None
    table: MemberTable | None = None
    pretree: Pretree | None = None
    realized: nx.Graph | None = None
    family: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self):
        return {"schemaVersion": 1,
                "gog": self.gog.to_json(),
                "v0": {k: _info_json(v) for k, v in sorted(self.v0.items())},
                "v1": {k: _info_json(v) for k, v in sorted(self.v1.items())},
                "certificate": self.certificate.to_json() if self.certificate else None}


def _info_json(info):
    out = {}
    for k, v in sorted(info.items()):
        if k.startswith("_"):
            continue
        out[k] = v
    return out


def _conjugate_into(g, site, gog, base):
    """Abstract element of the centre stabiliser, or None if ``g`` moves the site."""
    kind, chain = site
    if kind == "vertex":
        p = vertex_path_nf(chain, gog, base)
        y = multiply(multiply(invert(p), g), p)
        return y.last if not y.syllables else None
    parent = chain[:-1]
    t, letter = chain[-1]
    p = vertex_path_nf(parent, gog, base)
    y = multiply(multiply(invert(p), g), p)
    if y.syllables:
        return None
    vg = gog.vertices[vertex_type(parent, gog, base)]
    z = vg.mul(vg.mul(vg.inv(t), y.last), t)
    img = gog.alpha(letter)
    return img.to_abstract(z) if img.contains(z) else None


def _site_group(site, gog, base):
    kind, chain = site
    if kind == "vertex":
        return gog.vertices[vertex_type(chain, gog, base)]
    # abstract edge elements are free words (or residues), never integers
    kind, k = gog.alpha(chain[-1][1]).abstract_type()
    return finite_cyclic(k, "c") if kind == "finite" else free_group(*[f"c{i}" for i in range(k)])


def _check_certificate(cert, site, gog, base):
    group = _site_group(site, gog, base)
    if isinstance(group, CompositeGroup):
        raise UndecidableForDesc("composite vertex groups cannot be certified")
    elems = []
    for g in cert["generators"]:
        y = _conjugate_into(g, site, gog, base)
        if y is None:
            raise PositionFailure(f"stabiliser generator {g.format()} moves the CCC centre")
        elems.append(y)
    used = []
    for g in cert["extra"]:
        if generates_whole(group, elems):
            break
        y = _conjugate_into(g, site, gog, base)
        if y is None:
            raise PositionFailure(f"CCC stabiliser element {g.format()} moves the centre")
        elems.append(y)
        used.append(g)
    if not generates_whole(group, elems):
        raise PositionFailure("the CCC stabiliser is a proper subgroup of the stabiliser "
                              "of its centre in the reference tree")
    return used


def _letter_between(site, w, gog, base):
    """The letter at a V0 site leading to the adjacent star centre ``w``."""
    kind, chain = site
    if kind == "vertex":
        if tree_distance(chain, w) != 1:
            raise PositionFailure("a star centre is not adjacent to its V0 centre")
        ref = edge_at(chain, w)
        letter = ref.child[-1][1]
        return letter if ref.down else (letter[0], -letter[1])
    parent = chain[:-1]
    letter = chain[-1][1]
    if w == chain:
        return ("end", 1)
    if w == parent:
        return ("end", -1)
    raise PositionFailure("a star centre is not an endpoint of its V0 edge")


def _build_at_radius(family, radius, window, reach, cache=None):
    t0 = time.perf_counter()
    gog, base = _common_frame(family)
    wf = translates(family, radius)
    table = MemberTable(wf, window, cache)
    part = ccc_partition(wf, table)
    t1 = time.perf_counter()
    pre, hulls = betweenness_pretree(part, table, reach)
    bad = check_axioms(pre)
    if bad is not None:
        raise PositionFailure(f"betweenness of CCCs violates {bad[0]} at {bad[1]}")
    realized = realize_tree(pre, check=False)
    all_stars = stars(pre, check=False)
    t2 = time.perf_counter()

    taken_v, edges, labels, v0, v1 = {}, {}, {}, {}, {}
    v1_names = {}
    for orbit, c in sorted(part.base_class.items()):
        site = _site_of(hulls[c])
        cert = part.certificates[orbit]
        used = _check_certificate(cert, site, gog, base)
        kind, chain = site
        if kind == "vertex":
            vtype = vertex_type(chain, gog, base)
            name = _fresh(vtype, taken_v)
            taken_v[name] = gog.vertices[vtype]
        else:
            e = chain[-1][1][0]
            d = gog.edges[e]
            name = _fresh(f"{e}_mid", taken_v)
            taken_v[name] = _edge_group_desc(d.source_image, _fresh(f"c_{e}", _gen_names(gog)))
        labels[name] = "V0"
        indices = sorted(i for i, o in part.orbit_of_index.items() if o == orbit)
        v0[name] = {"site": _site_label(site, gog, base), "orbit": orbit,
                    "ccc": [m.name for m in part.members_of(c)][:CCC_LISTING],
                    "cccSize": len(part.classes[c]),
                    "sets": [family[i].name for i in indices],
                    "generators": [g.format() for g in cert["generators"]],
                    "witnesses": [[family[i].name, g.format()] for i, g in cert["witnesses"]],
                    "crossings": [[_member_name(part, a), _member_name(part, b)] for a, b in cert["crossings"]],
                    "extraGenerators": [g.format() for g in used],
                    "isolated": part.is_singleton(c),
                    "_site": site, "_class": c}
        star_sites = []
        for s in all_stars:
            if c not in s or len(s) < 2:
                continue
            locus = None
            for a, b in combinations(sorted(s), 2):
                br = _bridge(hulls[a], hulls[b])
                locus = br if locus is None else locus & br
            if not locus:
                raise PositionFailure("a star has no common centre")
            w = _site_of(locus)
            if w[0] != "vertex":
                raise PositionFailure("a star centre falls on an edge midpoint")
            star_sites.append(w[1])
        found = {}
        for w in star_sites:
            letter = _letter_between(site, w, gog, base)
            found.setdefault(letter, w)
        if kind == "vertex":
            expected = set(gog.letters_at(vertex_type(chain, gog, base)))
        else:
            expected = {("end", 1), ("end", -1)}
        if set(found) != expected:
            raise WindowTooSmall(f"stars around {name} cover {sorted(found)} of {sorted(expected)}")
        for letter in sorted(found):
            w = found[letter]
            wtype = vertex_type(w, gog, base)
            if wtype not in v1_names:
                vname = _fresh(wtype, set(taken_v) | set(v1_names.values()))
                v1_names[wtype] = vname
                v1[vname] = {"site": _site_label(("vertex", w), gog, base), "type": wtype}
            vname = v1_names[wtype]
            taken_v[vname] = gog.vertices[wtype]
            labels[vname] = "V1"
            if kind == "vertex":
                ename = _fresh(letter[0], edges)
                img_here, img_there = gog.alpha(letter), gog.omega(letter)
                if letter[1] > 0:
                    edges[ename] = EdgeDesc(name, vname, img_here, img_there)
                else:
                    edges[ename] = EdgeDesc(vname, name, img_there, img_here)
            else:
                e = chain[-1][1][0]
                d = gog.edges[e]
                # the parent end of the edge is the origin of the child's letter
                ltr = chain[-1][1]
                at_source = (letter == ("end", -1)) == (ltr[1] > 0)
                img = d.source_image if at_source else d.target_image
                ename = _fresh(f"{e}_a" if at_source else f"{e}_b", edges)
                grp = taken_v[name]
                if at_source:
                    edges[ename] = EdgeDesc(vname, name, img, whole(grp))
                else:
                    edges[ename] = EdgeDesc(name, vname, whole(grp), img)
    out = GraphOfGroups(taken_v, edges, labels=labels, name=f"regnbhd[{gog.name}]")
    if not is_minimal(out):
        raise PositionFailure("quotient graph of groups is not minimal")
    out.meta["sites"] = {n: _site_type(info["_site"], gog, base) for n, info in v0.items()}
    out.meta["sites"].update({n: ("vertex", info["type"]) for n, info in v1.items()})
    out.meta["orbits"] = {n: info["orbit"] for n, info in v0.items()}
    t3 = time.perf_counter()
    return RegularNeighbourhood(out, v0, v1, radius, None, part, table, pre, realized,
                                list(family),
                                {"partition": t1 - t0, "pretree": t2 - t1, "quotient": t3 - t2})


def _gen_names(gog):
    out = set()
    for v in gog.vertices.values():
        out.update(getattr(v, "generator_names", ()))
    return out


def _empty_result(gog):
    if len(gog.vertices) == 1 and not gog.edges:
        group = next(iter(gog.vertices.values()))
    else:
        group = CompositeGroup(gog)
    out = GraphOfGroups({"G": group}, {}, labels={"G": "V0"}, name=f"regnbhd[{gog.name}]")
    out.meta["sites"] = {"G": ("whole", None)}
    out.meta["orbits"] = {}
    info = {"site": "whole group", "orbit": None, "ccc": [], "sets": [], "isolated": False}
    return RegularNeighbourhood(out, {"G": info}, {}, None,
                                StabilizationCertificate((), {"G": "G"}, (0, 0), "empty-family"))


def _attempt(family, radius, window, reach, cache=None):
    try:
        return _build_at_radius(family, radius, window, reach, cache)
    except WindowTooSmall as exc:
        return exc


def _attempts(family, schedule, window, reach, workers):
    if workers > 1 and len(schedule) > 1:
        # radii are independent, so each goes to its own process
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_attempt, family, r, window, reach) for r in schedule]
            yield from zip(schedule, (f.result() for f in futures))
        return
    cache = {}
    for r in schedule:
        yield r, _attempt(family, r, window, reach, cache)


def build_regnbhd(family, schedule=(3, 4), *, gog=None, window=Window(), reach=2,
                  nest=True, workers=1):
    """Regular neighbourhood of ``family`` certified over the radius schedule.

    The first two consecutive radii whose quotients are isomorphic (with the
    same number of CCC orbits) certify the answer.  ``gog`` is only needed
    for an empty family.  With ``workers > 1`` the radii are evaluated in a
    process pool.
    """
    family = list(family)
    schedule = sorted(set(int(r) for r in schedule))
    if not schedule or schedule[0] < 0:
        raise SchemaError("the radius schedule needs nonnegative radii")
    if not family:
        if gog is None:
            raise SchemaError("an empty family needs its graph of groups")
        return _empty_result(gog)
    if nest:
        family = nest_isolated(family, window, radius=schedule[0])
    previous, notes = None, []
    for r, res in _attempts(family, schedule, window, reach, workers):
        if isinstance(res, WindowTooSmall):
            notes.append(f"radius {r}: {res}")
            previous = None
            continue
        if previous is not None:
            same, witness = gog_isomorphic(previous.gog, res.gog)
            counts = (len(previous.v0), len(res.v0))
            if same and counts[0] == counts[1]:
                res.certificate = StabilizationCertificate((previous.radius, r), witness, counts)
                return res
            notes.append(f"radii {previous.radius} and {r} disagree")
        else:
            notes.append(f"radius {r}: no earlier radius to compare with")
        previous = res
    raise NoStabilization("no two consecutive radii agree: " + "; ".join(notes))


def build_from_table(table):
    """Regular neighbourhood read off a direct corner table.

    A direct table lists every set it cares about (translates included) and
    carries no presentation, so only the one-CCC case has a quotient: a
    single V0 vertex carrying the whole group.
    """
    bad = check_condition_star(table)
    if bad:
        raise PositionFailure(f"pairs {bad} violate condition (*)")
    n = len(table)
    uf = _UnionFind(n)
    witnesses = []
    for a, b in combinations(range(n), 2):
        if uf.find(a) != uf.find(b) and table.crosses(a, b):
            uf.union(a, b)
            witnesses.append((a, b))
    roots = sorted({uf.find(k) for k in range(n)})
    if len(roots) > 1:
        if good_enough_position(table):
            raise PositionFailure("the table is not in good enough position")
        raise UndecidableForDesc(f"the table splits into {len(roots)} CCCs; a quotient needs "
                                 "group data that direct tables do not carry")
    name = str(getattr(table, "group", "G"))
    out = GraphOfGroups({name: NamedGroup(name)}, {}, labels={name: "V0"},
                        name=f"regnbhd[{name}]")
    out.meta["sites"] = {name: ("whole", None)}
    out.meta["orbits"] = {name: 0}
    info = {"site": "whole group", "orbit": 0, "ccc": list(table.names)[:CCC_LISTING],
            "cccSize": n, "sets": list(table.names),
            "crossings": [[table.names[a], table.names[b]] for a, b in witnesses],
            "isolated": n == 1}
    cert = StabilizationCertificate((), {name: name}, (1, 1), status="direct-table")
    return RegularNeighbourhood(out, {name: info}, {}, None, cert)


# ------------------------------------------------------------ isolated sets

def _same_set(a, b, window):
    cls = pair_classes(a, b, window)
    empty = {k for k, c in cls.items() if c == CornerClass.EMPTY}
    return {(0, 1), (1, 0)} <= empty or {(0, 0), (1, 1)} <= empty


def nest_isolated(family, window=Window(), radius=2):
    """Replace isolated members by their untoggled splitting realisations.

    A member is isolated when it crosses no translate of any member in the
    window.  Realisations that coincide (up to complement) are merged.
    """
    family = list(family)
    if not any(x.toggle_points() for x in family):
        return _dedup(family, window)
    wf = translates(family, radius)
    table = MemberTable(wf, window)
    out = []
    for i, x in enumerate(family):
        me = wf.find(i, x.gog.identity(x.base))
        isolated = not any(table.crosses(me, m) for m in range(len(wf.members))
                           if m != me and wf.members[m].hull & wf.members[me].hull)
        if isolated and x.toggle_points():
            if not hasattr(x, "untoggled"):
                raise NoSplittingRealization(f"{x.name} carries no splitting realisation")
            x = x.untoggled()
        out.append(x)
    return _dedup(out, window)


def _dedup(family, window):
    kept = []
    for x in family:
        if not x.toggle_points() and any(not y.toggle_points() and _same_set(x, y, window)
                                         for y in kept):
            continue
        kept.append(x)
    return kept


# ----------------------------------------------------------------- enclosing

def _as_site(site):
    if isinstance(site, HalfspaceRef):
        return ("edge", site.child)
    if isinstance(site, tuple) and len(site) == 2 and site[0] in ("vertex", "edge"):
        return site
    return ("vertex", tuple(site))


def _edges_to_check(x, site):
    """Edges at the site pointing into the hull of the site and the core of
    ``x``; every other branch misses the core, where ``x`` is constant."""
    kind, chain = _as_site(site)
    if kind == "edge":
        return [HalfspaceRef(chain, True), HalfspaceRef(chain, False)]
    region = hull(set(x.core) | {chain})
    out = []
    for w in region:
        if tree_distance(w, chain) == 1:
            out.append(edge_at(chain, w))
    return out


def encloses(site, x, window=Window()):
    """Whether the tree vertex (or edge midpoint) ``site`` encloses ``x``.

    For each edge at the site, with ``Z`` the halfspace beyond it, one of
    ``x & Z`` and ``x* & Z`` must be small.  Returns None when a corner is
    unresolved.
    """
    gog, base = x.gog, x.base
    for far in _edges_to_check(x, site):
        z = halfspace_set(gog, base, far)
        cls = pair_classes(x, z, window)
        pair = (cls[(0, 0)], cls[(1, 0)])
        if CornerClass.UNKNOWN in pair:
            return None
        if not any(c.is_small for c in pair):
            return False
    return True


def normalize_B(x, site, window=Window()):
    """The set ``B(x)``: the branches at the site on the ``x``-side, together
    with ``x`` restricted to the site itself.  Toggles are dropped."""
    if not encloses(site, x, window):
        raise NotEnclosed(f"{x.name} is not enclosed by {site}")
    kind, chain = _as_site(site)
    if isinstance(x, Translate):
        if kind == "edge":
            inner_site = ("edge", HalfspaceRef(chain).translate(x.ginv).child)
        else:
            inner_site = ("vertex", act_on_vertex(x.ginv, chain))
        return normalize_B(x.inner, inner_site, window).translate(x.g)
    gog, base = x.gog, x.base
    sides = []
    for far in _edges_to_check(x, (kind, chain)):
        z = halfspace_set(gog, base, far)
        cls = pair_classes(x, z, window)
        sides.append((far, 0 if cls[(1, 0)].is_small else 1))
    status = x.status(chain) if kind == "vertex" else None
    stab = x.stabilizer
    if kind == "vertex" and status == MIXED:
        if not isinstance(x, SideSpec) or x.local is None or chain != ():
            raise UndecidableForDesc("local layers are supported at the base vertex only")
        loc = x.local
        extra = []
        for far, s in sides:
            t, letter = far.child[0] if far.down else (None, None)
            rule = loc.side_of_branch(t, letter) == loc.side
            inside = (s == 0) != x.complemented
            if rule != inside:
                if rule:
                    raise UndecidableForDesc("branch sides disagree with the local rule")
                extra.append(far)
        return SideSpec(gog, base, stab, tuple(extra), loc, (), x.complemented,
                        f"B({x.name})")
    if kind == "edge":
        inside = [far for far, s in sides if s == 0]
        return SideSpec(gog, base, stab, tuple(inside), None, (), False, f"B({x.name})")
    if status == IN:
        outside = [far for far, s in sides if s == 1]
        return SideSpec(gog, base, stab, tuple(outside), None, (), True, f"B({x.name})")
    inside = [far for far, s in sides if s == 0]
    return SideSpec(gog, base, stab, tuple(inside), None, (), False, f"B({x.name})")


# ------------------------------------------------------- intersection number

def intersection_number(x, y, window=Window(), radii=(3, 4)):
    """Number of double cosets ``K g H`` (H, K the stabilisers of x, y) with
    ``g x`` crossing ``y``; stable over two radii or NoStabilization.

    Returns ``(value, radius)``.
    """
    gog, base = _common_frame([x, y])
    H, K = x.stabilizer, y.stabilizer
    kgens = K.generators()
    steps = kgens + [invert(k) for k in kgens]
    yh = y.core_hull()
    counts = []
    for radius in radii:
        crossing = {}
        cache = {}
        for g in enumerate_ball(gog, radius, base):
            key = H.left_key(g)
            if key in cache:
                continue
            # crossing is constant on double cosets K g H
            hit = next((cache[k2] for k2 in (H.left_key(multiply(s, g)) for s in steps)
                        if k2 in cache), None)
            if hit is None:
                gx = x if g.is_identity() else Translate(x, g)
                hit = bool(gx.core_hull() & yh) and all(
                    c == CornerClass.LARGE for c in pair_classes(gx, y, window).values())
            cache[key] = hit
            if hit:
                crossing[key] = g
        uf = _UnionFind(len(crossing))
        pos = {k: n for n, k in enumerate(crossing)}
        for k, g in crossing.items():
            for s in steps:
                k2 = H.left_key(multiply(s, g))
                if k2 in pos:
                    uf.union(pos[k], pos[k2])
        counts.append(len({uf.find(n) for n in range(len(crossing))}))
    if len(set(counts)) != 1:
        raise NoStabilization(f"double coset counts {counts} at radii {list(radii)}")
    return counts[-1], radii[-1]


# ------------------------------------------------------------- compatibility

def splitting_set(gog, base, spec):
    """The standard set of a one-edge splitting given as ``("edge", name)``
    or ``("refine", vertex, SplitData)`` at the base vertex."""
    if spec[0] == "edge":
        e = spec[1]
        if e not in gog.edges:
            raise SchemaError(f"unknown edge {e!r}")
        d = gog.edges[e]
        letter = (e, 1) if d.source == base else (e, -1)
        if gog.origin(letter) != base:
            raise UndecidableForDesc("edge splittings are realised at edges of the base vertex")
        return halfspace_set(gog, base, HalfspaceRef(((gog.vertices[base].identity(), letter),)),
                             name=f"sigma[{e}]")
    if spec[0] == "refine":
        _, v, split = spec
        if v != base:
            raise UndecidableForDesc("vertex refinements are realised at the base vertex")
        attach = []
        pins = dict(split.attach)
        for letter in gog.letters_at(base):
            e, sign = letter
            img = gog.alpha(letter)
            side = pins.get((e, sign > 0))
            if side is None:
                side = "left" if all(split.left.contains(g) for g in img.generators()) \
                    else "right"
            attach.append((letter, side))
        local = LocalTerm(split, tuple(attach), "left", "left")
        stab = LocatedSubgroup(gog.identity(base), split.edge_group())
        return SideSpec(gog, base, stab, (), local, name=f"sigma[{v}:{split.left.describe()}]")
    raise SchemaError(f"unknown splitting form {spec[0]!r}")


def compatible_realize(gog, base, splittings, window=Window(), radii=(3, 4)):
    """One graph of groups carrying every given splitting as an edge.

    Splittings are ``("edge", name)`` or ``("refine", vertex, SplitData)``
    over the reference graph ``gog``; pairwise intersection numbers must
    vanish.
    """
    sets = [splitting_set(gog, base, s) for s in splittings]
    for i, j in combinations(range(len(sets)), 2):
        value, _ = intersection_number(sets[i], sets[j], window, radii)
        if value:
            raise NonzeroIntersection(i, j, value)
    g = gog
    keep = set()
    refined = set()
    for s in splittings:
        if s[0] == "refine":
            if s[1] in refined:
                raise UndecidableForDesc("two refinements of one vertex are not supported")
            refined.add(s[1])
            g = refine_at_vertex(g, s[1], s[2])
            keep.add(g.meta["new_edge"])
    for s in splittings:
        if s[0] == "edge":
            keep.add(s[1])
    drop = set(g.edges) - keep
    out = collapse(g, drop) if drop else g
    out.name = f"compatible[{gog.name}]"
    return out


# ------------------------------------------------------------ axiom checker

@dataclass
class AxiomReport:
    results: dict                 # condition number -> (passed, witness)

    @property
    def passed(self):
        return all(ok for ok, _ in self.results.values())

    def to_json(self):
        return {str(k): {"pass": ok, "witness": w} for k, (ok, w) in sorted(self.results.items())}


def _candidate_sites(x, kind_by_name, wanted_label, labels):
    region = x.core_hull()
    out = []
    for name, label in sorted(labels.items()):
        if label != wanted_label:
            continue
        kind = kind_by_name.get(name)
        if kind is None:
            continue
        gog, base = x.gog, x.base
        if kind[0] == "vertex":
            out += [(name, ("vertex", v)) for v in sorted(region, key=repr)
                    if vertex_type(v, gog, base) == kind[1]]
        elif kind[0] == "edge":
            out += [(name, ("edge", v)) for v in sorted(region, key=repr)
                    if v and v[:-1] in region and v[-1][1][0] == kind[1]]
        elif kind[0] == "whole":
            out.append((name, None))
    return out


def _tree_valence(gog, v):
    if gog.is_composite(v):
        return None
    return gog.valence(v)


def isolated_vertex_check(result):
    """V0 vertices have valence two in the tree exactly when their CCC is a
    singleton.  Returns None on success, else a witness."""
    gog = result.gog
    orbits = gog.meta.get("orbits", {})
    part = result.partition
    isolated_orbits = set()
    if part is not None:
        isolated_orbits = {o for o, c in part.base_class.items() if part.is_singleton(c)}
    matched = set()
    for v, lab in sorted(gog.labels.items()):
        if lab != "V0":
            continue
        two = _tree_valence(gog, v) == 2
        o = orbits.get(v)
        iso = o in isolated_orbits
        if two != iso:
            return {"vertex": v, "valence2": two, "isolatedCCC": iso}
        if iso:
            matched.add(o)
    if matched != isolated_orbits:
        return {"unmatchedIsolatedOrbits": sorted(isolated_orbits - matched)}
    return None


def check_regnbhd_axioms(result, family=None, tests=(), window=Window(), gog=None):
    """Check the four defining conditions on ``result`` (optionally with a
    replacement graph of groups ``gog`` that shares its vertex metadata)."""
    gog = gog or result.gog
    family = list(family if family is not None else result.family)
    kinds = result.gog.meta.get("sites", {})
    labels = gog.labels
    res = {}

    failures = []
    for x in family:
        sites = _candidate_sites(x, kinds, "V0", labels)
        if not any(s is None or encloses(s, x, window) for _, s in sites):
            failures.append(x.name)
    res[1] = (not failures, failures)

    failures = []
    members = None
    for t in tests:
        sites = _candidate_sites(t, kinds, "V1", labels)
        if any(s is not None and encloses(s, t, window) for _, s in sites):
            continue
        # only tests crossing no member may go unenclosed
        if members is None:
            members = translates(family, result.radius or 2).members if family else []
        th = t.core_hull()
        crossing = any(m.hull & th and all(c == CornerClass.LARGE for c in
                                           pair_classes(t, m.aiset, window).values())
                       for m in members)
        if not crossing:
            failures.append(t.name)
    res[2] = (not failures, failures)

    res[3] = (is_minimal(gog), None)
    shadow = RegularNeighbourhood(gog, result.v0, result.v1, result.radius, None,
                                  result.partition)
    gog.meta.setdefault("orbits", result.gog.meta.get("orbits", {}))
    witness = isolated_vertex_check(shadow)
    res[4] = (witness is None, witness)
    return AxiomReport(res)


def translate_adjacent(result, g, orbit=0):
    """Whether the base CCC of ``orbit`` and its translate by ``g`` are
    adjacent points of the computed pretree."""
    part = result.partition
    c = part.base_class[orbit]
    i = next(k for k, o in sorted(part.orbit_of_index.items()) if o == orbit)
    m = part.wf.find(i, g)
    if m is None:
        raise WindowTooSmall(f"{g.format()} moves the CCC outside the window")
    d = part.class_of[m]
    if d == c or d not in result.pretree.points or c not in result.pretree.points:
        raise WindowTooSmall(f"{g.format()} moves the CCC outside the pretree")
    return result.pretree.adjacent(c, d)
