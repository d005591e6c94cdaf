"""Offline surgery for the vertex-weighted pipeline: classify and break
length-4 cycles, apply the twelve-case neighborhood rebalancing producing H',
and sample preference lists from H'."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

EdgeKey = tuple[str, str]

X1 = 0.2744
X2 = 0.15877

THIN, THICK = 1, 2  # edge values in thirds


@dataclass(frozen=True)
class ThirdsVector:
    """Edge values in exact thirds: 0, 1 or 2 (i.e. H_e in {0, 1/3, 2/3}).

    Integer storage keeps every conservation assertion exact.
    """

    thirds: dict[EdgeKey, int]

    def __post_init__(self):
        for e, h in self.thirds.items():
            if h not in (0, 1, 2):
                raise ValueError(f"thirds value must be 0, 1 or 2; got {h} at {e}")

    def nonzero(self) -> dict[EdgeKey, int]:
        return {e: h for e, h in self.thirds.items() if h > 0}

    def vertex_thirds(self, side: int) -> dict[str, int]:
        out: dict[str, int] = {}
        for (u, v), h in self.thirds.items():
            w = (u, v)[side]
            out[w] = out.get(w, 0) + h
        return out

    def as_float(self) -> dict[EdgeKey, float]:
        return {e: h / 3.0 for e, h in self.thirds.items()}


@dataclass(frozen=True)
class Cycle4:
    """A length-4 cycle (u1, v1, u2, v2) with u1 < u2, v1 < v2."""

    u1: str
    u2: str
    v1: str
    v2: str

    def edges(self) -> tuple[EdgeKey, EdgeKey, EdgeKey, EdgeKey]:
        return ((self.u1, self.v1), (self.u1, self.v2), (self.u2, self.v1), (self.u2, self.v2))


@dataclass(frozen=True)
class CycleReport:
    c1: tuple[Cycle4, ...]
    c2: tuple[Cycle4, ...]
    c3: tuple[Cycle4, ...]

    def counts(self) -> tuple[int, int, int]:
        return (len(self.c1), len(self.c2), len(self.c3))


def find_cycles4(H: ThirdsVector) -> CycleReport:
    """Enumerate all 4-cycles of the support graph and classify by thick count.

    Two thick edges sharing a vertex would exceed H_w <= 1, so a 4-cycle holds
    0, 1 or 2 thick edges (2 necessarily opposite): types C3, C2, C1.
    """
    nz = H.nonzero()
    pairs: dict[tuple[str, str], list[str]] = {}
    by_u: dict[str, list[str]] = {}
    for (u, v) in sorted(nz):
        by_u.setdefault(u, []).append(v)
    for u, vs in by_u.items():
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                pairs.setdefault((vs[i], vs[j]), []).append(u)
    c1, c2, c3 = [], [], []
    for (v1, v2), us in sorted(pairs.items()):
        for i in range(len(us)):
            for j in range(i + 1, len(us)):
                cyc = Cycle4(us[i], us[j], v1, v2)
                thick = [e for e in cyc.edges() if nz[e] == THICK]
                if len(thick) == 2:
                    e1, e2 = thick
                    if e1[0] == e2[0] or e1[1] == e2[1]:
                        raise AssertionError("two thick edges share a vertex")
                    c1.append(cyc)
                elif len(thick) == 1:
                    c2.append(cyc)
                elif len(thick) == 0:
                    c3.append(cyc)
                else:
                    raise AssertionError("more than two thick edges in a 4-cycle")
    return CycleReport(tuple(c1), tuple(c2), tuple(c3))


def _orient(cyc: Cycle4, nz: dict[EdgeKey, int], want_thick: bool) -> tuple[str, str, str, str]:
    """Relabel so the thick edge (C2) or the canonical corner (C3) is (u1,v1)."""
    if want_thick:
        for u in (cyc.u1, cyc.u2):
            for v in (cyc.v1, cyc.v2):
                if nz[(u, v)] == THICK:
                    return (u, cyc.u2 if u == cyc.u1 else cyc.u1,
                            v, cyc.v2 if v == cyc.v1 else cyc.v1)
        raise AssertionError("no thick edge in a C2 cycle")
    return (cyc.u1, cyc.u2, cyc.v1, cyc.v2)


def break_cycles(H: ThirdsVector) -> ThirdsVector:
    """Remove every C2 and C3 cycle without creating new C1 cycles.

    Loop: break all current C2 cycles (thick edge thins out, the two cross
    edges thicken, the opposite corner drops), then break exactly one C3 (two
    opposite corners thicken, the others drop), and re-scan. Every break
    deletes an edge, so the loop terminates. Checked on exit: per-vertex sums
    unchanged, no C2/C3 left, C1 count did not grow.
    """
    nz = dict(H.nonzero())
    before_u = ThirdsVector(nz).vertex_thirds(0)
    before_v = ThirdsVector(nz).vertex_thirds(1)
    c1_before = len(find_cycles4(ThirdsVector(nz)).c1)

    def intact(cyc: Cycle4, thick_count: int) -> bool:
        es = cyc.edges()
        return (all(nz.get(e, 0) > 0 for e in es)
                and sum(nz[e] == THICK for e in es) == thick_count)

    while True:
        report = find_cycles4(ThirdsVector(nz))
        if not report.c2 and not report.c3:
            break
        for cyc in report.c2:
            if not intact(cyc, 1):
                continue  # an earlier break in this sweep dissolved it
            u1, u2, v1, v2 = _orient(cyc, nz, want_thick=True)
            nz[(u1, v1)] = THIN
            nz[(u1, v2)] = THICK
            nz[(u2, v1)] = THICK
            del nz[(u2, v2)]
        if report.c2:
            continue  # re-scan; C3 breaks wait until no C2 remains
        cyc = report.c3[0]
        u1, u2, v1, v2 = _orient(cyc, nz, want_thick=False)
        nz[(u1, v1)] = THICK
        nz[(u2, v2)] = THICK
        del nz[(u1, v2)]
        del nz[(u2, v1)]

    out = ThirdsVector(nz)
    if out.vertex_thirds(0) != before_u or out.vertex_thirds(1) != before_v:
        raise AssertionError("cycle breaking changed a vertex sum")
    report = find_cycles4(out)
    if report.c2 or report.c3:
        raise AssertionError("C2/C3 cycle survived breaking")
    if len(report.c1) > c1_before:
        raise AssertionError("cycle breaking created a C1 cycle")
    return out


@dataclass(frozen=True)
class ModifiedVector:
    """Real-valued H' after the per-online-vertex rebalancing, plus an audit
    tag per modified vertex recording which case fired."""

    values: dict[EdgeKey, float]
    case_tags: dict[str, int] = field(default_factory=dict)

    def vertex_sum(self, vertex: str, side: int) -> float:
        return sum(x for (u, v), x in self.values.items() if (u, v)[side] == vertex)

    def to_json(self) -> bytes:
        doc = {
            "values": [{"u": u, "v": v, "h": x} for (u, v), x in sorted(self.values.items())],
            "cases": dict(sorted(self.case_tags.items())),
        }
        return json.dumps(doc, separators=(",", ":")).encode("utf-8")


# Case table: signature is the sorted multiset of (edge thirds, endpoint thirds
# sum) over ∂(v); outputs follow the signature's sort order. Cases 11/12 share
# a signature and split on the thin partner's outside structure.
_CASES_2 = {
    ((1, 1), (2, 3)): (1, (0.1, 0.9)),
    ((1, 2), (2, 3)): (2, (0.15, 0.85)),
    ((1, 3), (2, 2)): (3, (0.4, 0.6)),
    ((1, 1), (2, 2)): (8, (0.25, 0.75)),
    ((1, 2), (2, 2)): (9, (0.3, 0.7)),
}
_CASES_3 = {
    ((1, 1), (1, 3), (1, 3)): (4, (0.1, 0.45, 0.45)),
    ((1, 2), (1, 3), (1, 3)): (5, (0.2, 0.4, 0.4)),
    ((1, 1), (1, 2), (1, 3)): (6, (0.15, 0.2, 0.65)),
    ((1, 1), (1, 1), (1, 3)): (7, (0.1, 0.1, 0.8)),
    ((1, 2), (1, 2), (1, 3)): (10, (0.25, 0.25, 0.5)),
}


def second_modification(H: ThirdsVector) -> ModifiedVector:
    """Rewrite each online vertex's edge values per the twelve-case table.

    Signatures use post-cycle-breaking values. Unlisted signatures pass
    through unchanged, as do online vertices inside a C1 cycle (those carry
    the untouched worst-case structure). Per-vertex mass is conserved by
    construction of the table.
    """
    nz = H.nonzero()
    hu = H.vertex_thirds(0)
    by_v: dict[str, list[EdgeKey]] = {}
    by_u: dict[str, list[EdgeKey]] = {}
    for e in sorted(nz):
        by_v.setdefault(e[1], []).append(e)
        by_u.setdefault(e[0], []).append(e)
    in_c1 = {v for cyc in find_cycles4(H).c1 for v in (cyc.v1, cyc.v2)}

    values = {e: h / 3.0 for e, h in nz.items()}
    tags: dict[str, int] = {}
    for v, edges in by_v.items():
        if v in in_c1:
            continue
        sig = tuple(sorted((nz[e], hu[e[0]]) for e in edges))
        case = None
        if len(edges) == 2:
            case = _CASES_2.get(sig)
            if case is None and sig == ((1, 3), (2, 3)):
                # thin partner with H_u = 1 splits by its outside edges
                thin = next(e for e in edges if nz[e] == THIN)
                outside = [nz[e2] for e2 in by_u[thin[0]] if e2 != thin]
                if outside == [THICK]:
                    case = (11, (X1, 1 - X1))
                elif sorted(outside) == [THIN, THIN]:
                    case = (12, (X2, 1 - X2))
                else:
                    raise AssertionError("H_u=1 thin partner lacks 2/3 outside mass")
        elif len(edges) == 3:
            case = _CASES_3.get(sig)
        if case is None:
            continue
        case_id, outputs = case
        order = sorted(edges, key=lambda e: (nz[e], hu[e[0]], e))
        if [(nz[e], hu[e[0]]) for e in order] != list(sig):
            raise AssertionError("signature ordering mismatch")
        total_before = sum(values[e] for e in order)
        for e, x in zip(order, outputs):
            values[e] = x
        if abs(sum(values[e] for e in order) - total_before) > 1e-12:
            raise AssertionError("modification changed the vertex sum")
        tags[v] = case_id
    return ModifiedVector(values, tags)


DROP = "\x00drop"  # sentinel list entry: absorbs the arrival


def list_distribution(v: str, hp: ModifiedVector) -> list[tuple[tuple[str, ...], float]]:
    """Exact distribution over preference lists for one online vertex."""
    inc = sorted((e for e in hp.values if e[1] == v and hp.values[e] > 0))
    names = [u for u, _ in inc]
    mass = [hp.values[e] for e in inc]
    slack = 1.0 - sum(mass)
    if slack > 1e-9:
        names.append(DROP)
        mass.append(slack)
    elif slack < -1e-9:
        raise ValueError(f"online vertex {v!r} carries mass above one")
    if len(names) == 1:
        return [((names[0],), 1.0)]
    if len(names) == 2:
        return [((names[0], names[1]), mass[0]), ((names[1], names[0]), mass[1])]
    if len(names) == 3:
        out = []
        for i in range(3):
            for j in range(3):
                if j == i:
                    continue
                k = 3 - i - j
                p = mass[i] * mass[j] / (mass[j] + mass[k])
                out.append(((names[i], names[j], names[k]), p))
        return out
    raise ValueError(f"online vertex {v!r} has more than three positive entries")


def sample_list(v: str, hp: ModifiedVector, rng: np.random.Generator) -> tuple[str, ...]:
    """Draw a preference list over ∂(v) from H'.

    Two entries: first item w.p. its own mass. Three entries: first ~ mass,
    then the second of the remaining two w.p. proportional to mass. Deficient
    vertices get a drop entry carrying the missing mass.
    """
    inc = sorted((e for e in hp.values if e[1] == v and hp.values[e] > 0))
    names = [u for u, _ in inc]
    mass = np.array([hp.values[e] for e in inc])
    slack = 1.0 - mass.sum()
    if slack > 1e-9:
        names.append(DROP)
        mass = np.append(mass, slack)
    elif slack < -1e-9:
        raise ValueError(f"online vertex {v!r} carries mass above one")
    if np.any(mass <= 0):
        raise ValueError("list masses must be positive")
    if len(names) == 1:
        return (names[0],)
    if len(names) == 2:
        return (names[0], names[1]) if rng.random() < mass[0] else (names[1], names[0])
    if len(names) != 3:
        raise ValueError(f"online vertex {v!r} has more than three positive entries")
    x = rng.random()
    i = 0 if x < mass[0] else (1 if x < mass[0] + mass[1] else 2)
    j, k = [t for t in range(3) if t != i]
    if rng.random() >= mass[j] / (mass[j] + mass[k]):
        j, k = k, j
    return (names[i], names[j], names[k])
