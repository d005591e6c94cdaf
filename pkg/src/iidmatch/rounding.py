"""DR[k]: scale a fractional solution by k and round by bipartite dependent
rounding, preserving per-edge marginals and per-vertex degrees."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels

EdgeKey = tuple[str, str]


@dataclass(frozen=True)
class IntegralVector:
    """Nonnegative integer value per edge, from rounding k times a fractional
    vector; k is carried for downstream scaling (H = F/k)."""

    values: dict[EdgeKey, int]
    k: int

    def degree(self, vertex: str, side: int) -> int:
        return sum(F for (u, v), F in self.values.items() if (u, v)[side] == vertex)

    def nonzero(self) -> dict[EdgeKey, int]:
        return {e: F for e, F in self.values.items() if F > 0}


def _edge_values(f) -> dict[EdgeKey, float]:
    """Accept a FracSolution or a plain mapping edge-key -> value."""
    v = getattr(f, "values", None)
    return dict(v) if isinstance(v, dict) else dict(f)


class _RoundingGraph:
    """Reusable index of the bipartite residue graph for one edge-key set."""

    def __init__(self, keys: list[EdgeKey]):
        self.keys = sorted(keys)
        us = sorted({u for u, _ in self.keys})
        vs = sorted({v for _, v in self.keys})
        upos = {u: i for i, u in enumerate(us)}
        vpos = {v: i + len(us) for i, v in enumerate(vs)}
        self.eu = np.array([upos[u] for u, _ in self.keys], dtype=np.int64)
        self.ev = np.array([vpos[v] for _, v in self.keys], dtype=np.int64)
        self.n_vertices = len(us) + len(vs)
        self.indptr, self.incid = _kernels.build_csr(self.n_vertices, self.eu, self.ev)

    def round_scaled(self, scaled: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        base = np.floor(scaled).astype(np.int64)
        frac = scaled - base
        uniforms = rng.random(len(self.keys) + 1)
        _kernels.dr_round_core(self.eu, self.ev, self.indptr, self.incid, frac, uniforms)
        up = frac > 0.5  # residues are exactly 0.0 or 1.0 here
        F = base + up.astype(np.int64)
        self._assert_degrees(scaled, F)
        return F

    def _assert_degrees(self, scaled: np.ndarray, F: np.ndarray) -> None:
        want = np.zeros(self.n_vertices)
        got = np.zeros(self.n_vertices, dtype=np.int64)
        for ends in (self.eu, self.ev):
            np.add.at(want, ends, scaled)
            np.add.at(got, ends, F)
        ok = (got >= np.floor(want + 1e-9)) & (got <= np.ceil(want - 1e-9))
        if not ok.all():
            raise AssertionError("dependent rounding broke a vertex degree")


@lru_cache(maxsize=64)
def _graph_for(keys: tuple[EdgeKey, ...]) -> _RoundingGraph:
    # the graph depends only on the key set; callers round many vectors on it
    return _RoundingGraph(list(keys))


def dr(f, k: int, rng: np.random.Generator, *, extended: bool = False) -> IntegralVector:
    """Round k*f by dependent rounding on the bipartite residue graph.

    f is a mapping edge-key -> value in [0,1] (a FracSolution works).
    Guarantees: Pr[F_e = ceil(k f_e)] equals the fractional part of k f_e,
    and every vertex's integral degree lands in {floor(k f_w), ceil(k f_w)}.
    """
    values = _edge_values(f)
    if k not in (2, 3) and not extended:
        raise ValueError("k must be 2 or 3 (pass extended=True for other k)")
    if k < 1:
        raise ValueError("k must be a positive integer")
    for e, x in values.items():
        if not (-1e-12 <= x <= 1 + 1e-12):
            raise ValueError(f"fractional value out of [0,1] at {e}: {x}")
    graph = _graph_for(tuple(sorted(values)))
    scaled = np.clip(np.array([values[e] for e in graph.keys]), 0.0, 1.0) * k
    F = graph.round_scaled(scaled, rng)
    return IntegralVector({e: int(F[i]) for i, e in enumerate(graph.keys)}, k)


def dr_thirds(f, rng: np.random.Generator):
    """DR3 then divide by three: every edge lands in {0, 1/3, 2/3}.

    Requires f_e <= 2/3 (holds for any base-LP solution via f_e <= 1-1/e).
    """
    from .sparsify import ThirdsVector

    values = _edge_values(f)
    for e, x in values.items():
        if x > 2.0 / 3.0 + 1e-9:
            raise ValueError(f"dr_thirds requires f_e <= 2/3; got {x} at {e}")
    F = dr(values, 3, rng)
    return ThirdsVector(F.values)
