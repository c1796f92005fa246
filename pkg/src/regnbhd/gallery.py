"""Scenario files and the built-in gallery.

A scenario is a JSON document::

    {"schemaVersion": 1, "name": ..., "gog": {...}, "base": "A",
     "sets": [<set description>, ...], "tests": [...], "schedule": [3, 4]}

or, for inputs without a common reference tree, ``{"schemaVersion": 1,
"name": ..., "directTable": {...}}``.  Set descriptions use the layout of
:meth:`regnbhd.corners.SideSpec.to_json`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path

from .bassserre import HalfspaceRef, SplitData
from .corners import (CornerClass, CornerTable, LocalTerm, SideSpec, Strength, Window,
                      halfspace_set, load_direct_table)
from .errors import MixedPresentations, SchemaError, UnknownGallery
from .groupcore import GraphOfGroups, LocatedSubgroup, cyclic_power, free_factor
from .neighbourhood import build_from_table, build_regnbhd, check_regnbhd_axioms
from .presentations import (G3_QUADRANTS, g1_presentation, g2_presentation, g3_presentation,
                            gpq_presentation)

GALLERY_NAMES = ("g1", "g2", "g3", "g4a", "g4b", "g5")

SUMMARIES = {
    "g1": "one edge splitting of F2 *_Z F2; the edge gets subdivided",
    "g2": "Z2 and Z3 over 2D and 3D in A *_{6D} D *_D B; one V0 vertex carrying D",
    "g3": "two crossing splittings of F(a,b,d,e) with four leaves",
    "g4a": "the unique two-ended splitting of G(3,2)",
    "g4b": "G(2,2) from a brute-force Klein bottle group corner table; one vertex",
    "g5": "the empty family; one V0 vertex carrying G",
}


@dataclass
class Scenario:
    name: str
    gog: GraphOfGroups | None = None
    base: str | None = None
    family: list = field(default_factory=list)
    tests: list = field(default_factory=list)
    schedule: tuple = (3, 4)
    table: CornerTable | None = None

    @property
    def direct(self):
        return self.table is not None


# ------------------------------------------------------------------ loading

def _sets(docs, gog, base, what):
    if not isinstance(docs, list):
        raise SchemaError(f"'{what}' must be a list")
    return [SideSpec.from_json(d, gog, base) for d in docs]


def load_scenario(data, name=""):
    """Parse a scenario document (a dict or JSON text)."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("a scenario must be a JSON object")
    if data.get("schemaVersion") != 1:
        raise SchemaError("scenarios need schemaVersion 1")
    name = str(data.get("name", name))
    schedule = data.get("schedule", [3, 4])
    if not isinstance(schedule, list) or not all(isinstance(r, int) for r in schedule):
        raise SchemaError("'schedule' must be a list of integers")
    if "directTable" in data:
        if "sets" in data or "gog" in data:
            raise MixedPresentations("a scenario gives either a direct table or a presentation")
        return Scenario(name, schedule=tuple(schedule), table=load_direct_table(data["directTable"]))
    if "gog" not in data:
        raise SchemaError("a scenario needs 'gog' or 'directTable'")
    gog = GraphOfGroups.from_json(data["gog"], name=name)
    base = data.get("base", min(gog.vertices))
    if base not in gog.vertices:
        raise SchemaError(f"unknown base vertex {base!r}")
    family = _sets(data.get("sets", []), gog, base, "sets")
    tests = _sets(data.get("tests", []), gog, base, "tests")
    return Scenario(name, gog, base, family, tests, tuple(schedule))


def read_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    return load_scenario(text, name=path.stem)


# ------------------------------------------------------------------ running

def run_scenario(scenario, schedule=None, window=Window(), workers=1):
    """Build the regular neighbourhood and check the four conditions on it."""
    if scenario.direct:
        result = build_from_table(scenario.table)
        return result, None
    result = build_regnbhd(scenario.family, schedule or scenario.schedule, gog=scenario.gog,
                           window=window, workers=workers)
    report = check_regnbhd_axioms(result, scenario.family, scenario.tests, window)
    return result, report


def result_json(scenario, result, report):
    """The byte-stable output document (no timings)."""
    doc = result.to_json()
    doc["scenario"] = scenario.name
    doc["axioms"] = report.to_json() if report is not None else None
    return doc


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ------------------------------------------------------------------ gallery

def _g1_sets():
    g = g1_presentation()
    ident = g.vertices["A"].identity()
    x = halfspace_set(g, "A", HalfspaceRef(((ident, ("e", 1)),)), name="X")
    return g, "A", [x], [x], (3, 4)


def g2_sets():
    """Z2 and Z3: unions of e-halfspaces at D whose coset representatives
    lie in 2D and in 3D."""
    g = g2_presentation()
    d = g.vertices["D"]

    def zbar(m, name):
        terms = tuple(HalfspaceRef(((t, ("e", -1)),)) for t in range(0, 6, m))
        return SideSpec(g, "D", LocatedSubgroup(g.identity("D"), cyclic_power(d, m)), terms,
                        name=name)

    return g, "D", [zbar(2, "Z2"), zbar(3, "Z3")]


def _g2_sets():
    g, base, fam = g2_sets()
    tests = [halfspace_set(g, base, HalfspaceRef(((0, ("e", -1)),)), name="Ze"),
             halfspace_set(g, base, HalfspaceRef(((0, ("f", 1)),)), name="Zf")]
    return g, base, fam, tests, (4, 5)


def g3_sets():
    """sigma and tau: the splittings of L0 over <a,b> and over <d,e> that
    keep the quadrant edge groups elliptic."""
    g = g3_presentation()
    amb = g.vertices["L0"]

    def split(left, right, on_left, name):
        sp = SplitData(free_factor(amb, *left), free_factor(amb, *right))
        attach = tuple(((s, 1), "left" if s in on_left else "right")
                       for s in sorted(G3_QUADRANTS))
        return SideSpec(g, "L0", LocatedSubgroup(g.identity("L0"), sp.edge_group()), (),
                        LocalTerm(sp, attach, "right", "left"), name=name)

    sigma = split("abd", "abe", ("s1", "s2"), "sigma")
    tau = split("ade", "bde", ("s1", "s4"), "tau")
    return g, "L0", [sigma, tau]


def _g3_sets():
    g, base, fam = g3_sets()
    ident = g.vertices[base].identity()
    tests = [halfspace_set(g, base, HalfspaceRef(((ident, (s, 1)),)), name=f"Z{s}")
             for s in sorted(G3_QUADRANTS)]
    return g, base, fam, tests, (3, 4)


def _g4a_sets():
    g = gpq_presentation(3, 2)
    x = halfspace_set(g, "A", HalfspaceRef(((0, ("e", 1)),)), name="X")
    return g, "A", [x], [x], (3, 4)


def _g5_sets():
    g = g1_presentation()
    return g, "A", [], [], (3, 4)


def _presented(name, builder):
    g, base, fam, tests, schedule = builder()
    return {"schemaVersion": 1, "name": name, "gog": g.to_json(), "base": base,
            "sets": [x.to_json() for x in fam], "tests": [t.to_json() for t in tests],
            "schedule": list(schedule)}


# Klein bottle group Z x| Z: (m1, n1)(m2, n2) = (m1 + (-1)^n1 m2, n1 + n2)

def _kmul(x, y):
    return (x[0] + (-1) ** (x[1] % 2) * y[0], x[1] + y[1])


def _kinv(x):
    return (-((-1) ** (x[1] % 2)) * x[0], -x[1])


KLEIN_SETS = {
    # name: (translating element, base set)
    "X": ((0, 0), "X"),
    "bX": ((0, 1), "X"),
    "aX": ((1, 0), "X"),
    "Y": ((0, 0), "Y"),
    "bY": ((0, 1), "Y"),
}


def _klein_member(which, x):
    return x[0] >= 1 if which == "X" else x[1] >= 1


def _klein_key(which, x):
    # right cosets of <(0,2)> (stabiliser of X) and of <(1,0)> (stabiliser of Y)
    return (x[0], x[1] % 2) if which == "X" else x[1]


def _klein_corner(a, ea, b, eb, radius):
    ga, wa = KLEIN_SETS[a]
    gb, wb = KLEIN_SETS[b]
    ia, ib = _kinv(ga), _kinv(gb)
    keys = set()
    for x in product(range(-radius, radius + 1), repeat=2):
        if _klein_member(wa, _kmul(ia, x)) == (ea == 0) and \
                _klein_member(wb, _kmul(ib, x)) == (eb == 0):
            keys.add(_klein_key(wa, _kmul(ia, x)))
    return len(keys)


def klein_direct_table(radius=8):
    """Corner table of a few translates of X = {m >= 1} and Y = {n >= 1}
    in the Klein bottle group, by counting stabiliser cosets in two boxes."""
    names = list(KLEIN_SETS)
    rows = []
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if i == j:
                continue
            for ea, eb in product((0, 1), repeat=2):
                n1 = _klein_corner(a, ea, b, eb, radius)
                n2 = _klein_corner(a, ea, b, eb, 2 * radius)
                if n2 == 0:
                    c = CornerClass.EMPTY
                elif n1 == n2:
                    c = CornerClass.SMALL
                else:
                    c = CornerClass.LARGE
                rows.append({"i": i, "eps_i": ea, "j": j, "eps_j": eb, "class": c.value})
    return {"schemaVersion": 1, "group": "G22", "sets": names, "entries": rows,
            "orbits": {n: KLEIN_SETS[n][1] for n in names}}


def surface_direct_table():
    """A closed curve S and an arc L on a surface with boundary: the sets
    cross, S crosses L strongly and L crosses S only weakly."""
    rows = []
    for i, j in ((0, 1), (1, 0)):
        for ei, ej in product((0, 1), repeat=2):
            rows.append({"i": i, "eps_i": ei, "j": j, "eps_j": ej, "class": "Large"})
    # strength(i, j) is the strength of j crossing i
    rows[0]["strength"] = Strength.WEAK.value          # L crossing S
    rows[4]["strength"] = Strength.STRONG.value        # S crossing L
    return {"schemaVersion": 1, "group": "pi1(M)", "sets": ["S", "L"], "entries": rows}


def _direct(name, table):
    return {"schemaVersion": 1, "name": name, "directTable": table}


def gallery_document(name):
    """The built-in scenario ``name`` as a scenario document."""
    builders = {"g1": _g1_sets, "g2": _g2_sets, "g3": _g3_sets, "g4a": _g4a_sets,
                "g5": _g5_sets}
    if name in builders:
        return _presented(name, builders[name])
    if name == "g4b":
        return _direct(name, klein_direct_table())
    raise UnknownGallery(f"unknown gallery scenario {name!r}; choose from "
                         f"{', '.join(GALLERY_NAMES)}")


def gallery_scenario(name):
    return load_scenario(gallery_document(name), name)


def golden_text(name):
    """Stored output document for a gallery scenario."""
    if name not in GALLERY_NAMES:
        raise UnknownGallery(f"unknown gallery scenario {name!r}")
    return resources.files("regnbhd").joinpath("golden", f"{name}.json").read_text()
