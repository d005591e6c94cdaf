"""Problem instances: data model, validation, generators, JSON persistence.

An instance is a bipartite graph with offline vertices (weights), online
types (arrival rates), weighted/probed edges, and a horizon n. Instances are
immutable after construction and safe to share across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

E_INV = 1.0 / math.e

RATE_TOL = 1e-9

GADGET_KINDS = ("c1_cycle", "c2_cycle", "c3_cycle", "second_mod_chain", "single_edge_padded")


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    weight: float = 1.0
    probe_prob: float = 1.0

    @property
    def key(self) -> tuple[str, str]:
        return (self.u, self.v)


@dataclass(frozen=True)
class Instance:
    """Bipartite matching instance under the known-IID arrival model.

    ``target_thirds``/``target_frac`` are optional gadget annotations (exact
    sparse structures in thirds space, or an exact fractional vector) that let
    downstream stages bypass the LP when a test requires a specific structure.
    They are in-memory only: excluded from equality and from the JSON schema.
    """

    offline: tuple[tuple[str, float], ...]        # (id, weight)
    online: tuple[tuple[str, float], ...]         # (id, rate)
    edges: tuple[Edge, ...]
    horizon: int
    target_thirds: dict[tuple[str, str], int] | None = field(default=None, compare=False)
    target_frac: dict[tuple[str, str], float] | None = field(default=None, compare=False)
    tracked_edges: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    @property
    def integral_rates(self) -> bool:
        return all(abs(r - round(r)) <= RATE_TOL and round(r) >= 1 for _, r in self.online)

    @property
    def uniform_p(self) -> float | None:
        ps = {e.probe_prob for e in self.edges}
        return ps.pop() if len(ps) == 1 else None

    @property
    def offline_ids(self) -> list[str]:
        return [u for u, _ in self.offline]

    @property
    def online_ids(self) -> list[str]:
        return [v for v, _ in self.online]

    def weight_of(self, u: str) -> float:
        return dict(self.offline)[u]

    def rate_of(self, v: str) -> float:
        return dict(self.online)[v]

    def index(self) -> "IndexedInstance":
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = IndexedInstance(self)
            object.__setattr__(self, "_index_cache", cached)
        return cached


class IndexedInstance:
    """Array view of an instance for the numeric stages.

    Edges are ordered lexicographically by (u, v); that order defines edge
    indices everywhere downstream (rounding replay, plan arrays, reports).
    """

    def __init__(self, inst: Instance):
        self.instance = inst
        self.u_ids = sorted(u for u, _ in inst.offline)
        self.v_ids = sorted(v for v, _ in inst.online)
        self.u_pos = {u: i for i, u in enumerate(self.u_ids)}
        self.v_pos = {v: i for i, v in enumerate(self.v_ids)}
        w = dict(inst.offline)
        r = dict(inst.online)
        self.u_weight = np.array([w[u] for u in self.u_ids])
        self.v_rate = np.array([r[v] for v in self.v_ids])
        es = sorted(inst.edges, key=lambda e: (e.u, e.v))
        self.edge_keys = [e.key for e in es]
        self.edge_pos = {e.key: i for i, e in enumerate(es)}
        self.edge_u = np.array([self.u_pos[e.u] for e in es], dtype=np.int64)
        self.edge_v = np.array([self.v_pos[e.v] for e in es], dtype=np.int64)
        self.edge_w = np.array([e.weight for e in es])
        self.edge_p = np.array([e.probe_prob for e in es])
        self.n_u = len(self.u_ids)
        self.n_v = len(self.v_ids)
        self.n_edges = len(es)

    def adjacency_u(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_u)]
        for i in range(self.n_edges):
            out[self.edge_u[i]].append(i)
        return out

    def adjacency_v(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_v)]
        for i in range(self.n_edges):
            out[self.edge_v[i]].append(i)
        return out


def validate(inst: Instance) -> list[str]:
    """Check all instance invariants; returns one message per violation."""
    out: list[str] = []
    uids = [u for u, _ in inst.offline]
    vids = [v for v, _ in inst.online]
    if len(set(uids)) != len(uids):
        out.append("duplicate offline vertex ids")
    if len(set(vids)) != len(vids):
        out.append("duplicate online type ids")
    if set(uids) & set(vids):
        out.append("offline and online id sets overlap")
    if inst.horizon < 1:
        out.append("horizon must be a positive integer")
    for u, w in inst.offline:
        if not (w >= 0) or not math.isfinite(w):
            out.append(f"offline weight out of range for {u!r}: {w}")
    for v, r in inst.online:
        if not (r > 0) or not math.isfinite(r):
            out.append(f"rate must be positive for {v!r}: {r}")
    useen = set(uids)
    vseen = set(vids)
    keys = set()
    for e in inst.edges:
        if e.u not in useen or e.v not in vseen:
            out.append(f"edge ({e.u!r},{e.v!r}) has an unknown endpoint")
        if e.key in keys:
            out.append(f"duplicate edge ({e.u!r},{e.v!r})")
        keys.add(e.key)
        if not (e.weight >= 0) or not math.isfinite(e.weight):
            out.append(f"edge weight out of range for ({e.u!r},{e.v!r}): {e.weight}")
        if not (0 < e.probe_prob <= 1):
            out.append(f"probe_prob out of (0,1] for ({e.u!r},{e.v!r}): {e.probe_prob}")
    total = sum(r for _, r in inst.online)
    if abs(total - inst.horizon) > RATE_TOL * max(1, inst.horizon):
        out.append(f"rate-sum mismatch: sum(r_v)={total!r} != n={inst.horizon}")
    return out


def canonicalize(inst: Instance) -> Instance:
    """Split every integral rate r_v = k into k unit-rate copies so |V| = n.

    The reduction to unit rates is applied explicitly rather than assumed;
    copies of a type inherit all its edges (suffix ``#i`` on the id).
    """
    if not inst.integral_rates:
        raise ValueError("canonicalize requires integral rates")
    online: list[tuple[str, float]] = []
    copy_map: dict[str, list[str]] = {}
    split = False
    for v, r in inst.online:
        k = round(r)
        if k == 1:
            copy_map[v] = [v]
            online.append((v, 1.0))
        else:
            split = True
            names = [f"{v}#{i}" for i in range(k)]
            copy_map[v] = names
            online.extend((nm, 1.0) for nm in names)
    edges = []
    for e in inst.edges:
        for nm in copy_map[e.v]:
            edges.append(Edge(e.u, nm, e.weight, e.probe_prob))
    # gadget annotations are per-edge exact structures: they survive the
    # identity canonicalization but have no meaning once a type is split
    return Instance(inst.offline, tuple(online), tuple(edges), inst.horizon,
                    target_thirds=None if split else inst.target_thirds,
                    target_frac=None if split else inst.target_frac,
                    tracked_edges=() if split else inst.tracked_edges)


def _disjoint_union(parts: list[Instance]) -> Instance:
    offline: list[tuple[str, float]] = []
    online: list[tuple[str, float]] = []
    edges: list[Edge] = []
    thirds: dict[tuple[str, str], int] = {}
    frac: dict[tuple[str, str], float] = {}
    tracked: list[tuple[str, str]] = []
    n = 0
    for j, p in enumerate(parts):
        ren = lambda s: f"{s}.{j}"  # noqa: E731
        offline.extend((ren(u), w) for u, w in p.offline)
        online.extend((ren(v), r) for v, r in p.online)
        edges.extend(Edge(ren(e.u), ren(e.v), e.weight, e.probe_prob) for e in p.edges)
        if p.target_thirds:
            thirds.update({(ren(u), ren(v)): h for (u, v), h in p.target_thirds.items()})
        if p.target_frac:
            frac.update({(ren(u), ren(v)): f for (u, v), f in p.target_frac.items()})
        tracked.extend((ren(u), ren(v)) for u, v in p.tracked_edges)
        n += p.horizon
    return Instance(tuple(offline), tuple(online), tuple(edges), n,
                    target_thirds=thirds or None, target_frac=frac or None,
                    tracked_edges=tuple(tracked))


def _cycle4(pattern: tuple[int, int, int, int]) -> Instance:
    # pattern: thirds for edges (u1,v1), (u1,v2), (u2,v1), (u2,v2)
    edges = (Edge("u1", "v1"), Edge("u1", "v2"), Edge("u2", "v1"), Edge("u2", "v2"))
    thirds = {e.key: h for e, h in zip(edges, pattern)}
    return Instance((("u1", 1.0), ("u2", 1.0)), (("v1", 1.0), ("v2", 1.0)),
                    edges, 2, target_thirds=thirds)


def gen_gadget(kind: str, m: int) -> Instance:
    """Build m disjoint copies of a named worst-case structure.

    Every gadget uses unit rates, so n equals the number of online types.
    Gadgets carry exact target annotations (thirds or fractional) so tests can
    drive the rounding/online stages on the precise structure.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if kind == "c1_cycle":
        part = _cycle4((2, 1, 1, 2))
    elif kind == "c2_cycle":
        part = _cycle4((2, 1, 1, 1))
    elif kind == "c3_cycle":
        part = _cycle4((1, 1, 1, 1))
    elif kind == "second_mod_chain":
        # Offline u (total 1), u1 (1/3), u2 (2/3); online v1, v2.
        edges = (Edge("u", "v1"), Edge("u1", "v1"), Edge("u", "v2"), Edge("u2", "v2"))
        thirds = {("u", "v1"): 2, ("u1", "v1"): 1, ("u", "v2"): 1, ("u2", "v2"): 2}
        part = Instance((("u", 1.0), ("u1", 1.0), ("u2", 1.0)),
                        (("v1", 1.0), ("v2", 1.0)), edges, 2, target_thirds=thirds)
    elif kind == "single_edge_padded":
        # Tracked edge at fractional mass 1-1/e; zero-weight fillers absorb the
        # residual 1/e on each side so the worst-case blocking pattern of the
        # two-matching analysis realizes after DR2.
        f = 1.0 - E_INV
        edges = (Edge("u0", "v0", 1.0), Edge("u0", "vf", 0.0), Edge("uf", "v0", 0.0))
        frac = {("u0", "v0"): f, ("u0", "vf"): 1 - f, ("uf", "v0"): 1 - f}
        part = Instance((("u0", 1.0), ("uf", 0.0)), (("v0", 1.0), ("vf", 1.0)),
                        edges, 2, target_frac=frac, tracked_edges=(("u0", "v0"),))
    else:
        raise ValueError(f"unknown gadget kind {kind!r}; expected one of {GADGET_KINDS}")
    return _disjoint_union([part] * m)


def gen_random(n_offline: int, n_online: int, density: float,
               weight_range: tuple[float, float], p_range: tuple[float, float],
               seed: int) -> Instance:
    """Random bipartite instance with unit integral rates, deterministic per seed.

    Every offline vertex gets at least one edge; remaining pairs are kept with
    probability ``density``.
    """
    if n_offline < 1 or n_online < 1:
        raise ValueError("sizes must be >= 1")
    if not (0 < density <= 1):
        raise ValueError("density must be in (0, 1]")
    if weight_range[0] > weight_range[1] or p_range[0] > p_range[1]:
        raise ValueError("empty parameter range")
    rng = np.random.default_rng(seed)
    offline = tuple((f"u{i}", float(rng.uniform(*weight_range))) for i in range(n_offline))
    online = tuple((f"v{j}", 1.0) for j in range(n_online))
    edges = []
    for i in range(n_offline):
        keep = rng.random(n_online) < density
        if not keep.any():
            keep[rng.integers(n_online)] = True
        for j in np.flatnonzero(keep):
            edges.append(Edge(f"u{i}", f"v{j}",
                              float(rng.uniform(*weight_range)),
                              float(rng.uniform(*p_range))))
    return Instance(offline, online, tuple(edges), n_online)


# --- JSON persistence -------------------------------------------------------
# Schema: {"offline":[{"id","w"}],"online":[{"id","r"}],"edges":[{"u","v","w","p"}],"n":int}
# Canonical form: ids sorted, fields in schema order, UTF-8.

def to_json(inst: Instance) -> bytes:
    doc = {
        "offline": [{"id": u, "w": w} for u, w in sorted(inst.offline)],
        "online": [{"id": v, "r": r} for v, r in sorted(inst.online)],
        "edges": [{"u": e.u, "v": e.v, "w": e.weight, "p": e.probe_prob}
                  for e in sorted(inst.edges, key=lambda e: e.key)],
        "n": inst.horizon,
    }
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


class SchemaError(ValueError):
    """Raised on a malformed instance document; carries a JSON-pointer path."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")


def _need(doc: dict, key: str, pointer: str):
    if key not in doc:
        raise SchemaError(f"{pointer}/{key}", "missing required field")
    return doc[key]


def _number(x, pointer: str, *, lo=None, hi=None, lo_strict=False) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(pointer, f"expected a number, got {type(x).__name__}")
    x = float(x)
    if lo is not None and (x < lo or (lo_strict and x == lo)):
        raise SchemaError(pointer, f"value {x} below bound {lo}")
    if hi is not None and x > hi:
        raise SchemaError(pointer, f"value {x} above bound {hi}")
    return x


def from_json(data: bytes | str) -> Instance:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("", "document root must be an object")
    for key in ("offline", "online", "edges", "n"):
        _need(doc, key, "")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("/n", "horizon must be a positive integer")
    offline = []
    for i, item in enumerate(doc["offline"]):
        ptr = f"/offline/{i}"
        if not isinstance(item, dict):
            raise SchemaError(ptr, "expected an object")
        uid = _need(item, "id", ptr)
        if not isinstance(uid, str):
            raise SchemaError(f"{ptr}/id", "id must be a string")
        offline.append((uid, _number(_need(item, "w", ptr), f"{ptr}/w", lo=0.0)))
    online = []
    for i, item in enumerate(doc["online"]):
        ptr = f"/online/{i}"
        if not isinstance(item, dict):
            raise SchemaError(ptr, "expected an object")
        vid = _need(item, "id", ptr)
        if not isinstance(vid, str):
            raise SchemaError(f"{ptr}/id", "id must be a string")
        online.append((vid, _number(_need(item, "r", ptr), f"{ptr}/r", lo=0.0, lo_strict=True)))
    edges = []
    for i, item in enumerate(doc["edges"]):
        ptr = f"/edges/{i}"
        if not isinstance(item, dict):
            raise SchemaError(ptr, "expected an object")
        u, v = _need(item, "u", ptr), _need(item, "v", ptr)
        if not isinstance(u, str) or not isinstance(v, str):
            raise SchemaError(ptr, "endpoints must be strings")
        w = _number(_need(item, "w", ptr), f"{ptr}/w", lo=0.0)
        p = _number(_need(item, "p", ptr), f"{ptr}/p", lo=0.0, hi=1.0, lo_strict=True)
        edges.append(Edge(u, v, w, p))
    return Instance(tuple(offline), tuple(online), tuple(edges), n)
