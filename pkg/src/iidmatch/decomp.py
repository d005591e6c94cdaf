"""Turn an integral edge vector into ordered matchings: exact k-matching
decomposition of the multigraph, PM[3], and the PM* pseudo-matching sampler."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .rounding import IntegralVector

EdgeKey = tuple[str, str]


@dataclass(frozen=True)
class MatchingPlan:
    """Ordered matchings guiding the online phase.

    Proper plans partition the multigraph (F_e copies of e) exactly; pseudo
    plans (PM*) may repeat an offline vertex across the pair.
    """

    matchings: tuple[frozenset[EdgeKey], ...]
    kind: str  # "proper" | "pseudo"

    def partner_maps(self) -> list[dict[str, str]]:
        """Per matching: online id -> offline id (valid because each matching
        uses every online vertex at most once, pseudo plans included)."""
        out = []
        for M in self.matchings:
            d = {}
            for u, v in M:
                if v in d:
                    raise AssertionError("online vertex repeated inside one matching")
                d[v] = u
            out.append(d)
        return out


def color_copies(cu: np.ndarray, cv: np.ndarray, n_u: int, n_v: int,
                 k: int) -> np.ndarray:
    """Proper k-edge-coloring of the copy multigraph; validity is re-checked
    (per-color vertex-disjointness on both sides)."""
    colors = _kernels.color_core(cu, cv, n_u, n_v, k)
    for side, width in ((cu, n_u), (cv, n_v)):
        slots = side * k + colors
        if len(np.unique(slots)) != len(slots):
            raise AssertionError("matching is not vertex-disjoint")
    return colors


def decompose(F: IntegralVector, k: int) -> list[set[EdgeKey]]:
    """Split the multigraph with F_e copies per edge into k matchings.

    Bipartite edge coloring with exactly k colors; requires max degree <= k.
    Deterministic: copies are colored in lexicographic edge order. Every call
    re-checks vertex-disjointness and that the union restores F.
    """
    nz = sorted(F.nonzero().items())
    us = sorted({u for (u, _), _ in nz})
    vs = sorted({v for (_, v), _ in nz})
    upos = {u: i for i, u in enumerate(us)}
    vpos = {v: i for i, v in enumerate(vs)}
    cu, cv, copy_key = [], [], []
    for (u, v), c in nz:
        for _ in range(c):
            cu.append(upos[u])
            cv.append(vpos[v])
            copy_key.append((u, v))
    if not cu:
        return [set() for _ in range(k)]
    colors = color_copies(np.array(cu, dtype=np.int64), np.array(cv, dtype=np.int64),
                          len(us), len(vs), k)
    matchings: list[set[EdgeKey]] = [set() for _ in range(k)]
    for i, c in enumerate(colors):
        if copy_key[i] in matchings[int(c)]:
            raise AssertionError("edge copy repeated inside one matching")
        matchings[int(c)].add(copy_key[i])
    if sum(len(m) for m in matchings) != len(copy_key):
        raise AssertionError("matchings do not partition the multigraph")
    return matchings


def pm3(F: IntegralVector, rng: np.random.Generator) -> MatchingPlan:
    """Decompose into three matchings and put them in uniformly random order."""
    ms = decompose(F, 3)
    order = rng.permutation(3)
    return MatchingPlan(tuple(frozenset(ms[i]) for i in order), "proper")


def pm_star(F: IntegralVector, y1: float, y2: float, rng: np.random.Generator) -> MatchingPlan:
    """Pseudo-matching pair from F (DR3 of a base-LP solution).

    Per online v: a large edge (F=2) goes to the primary matching and the
    small companion to the secondary; an all-small neighborhood is padded with
    dummy slots to three, permuted, and the first/second slots enter the
    matchings with probabilities y1/y2. Offline clashes are allowed.
    """
    if not (0 <= y1 <= 1 and 0 <= y2 <= 1):
        raise ValueError("y1, y2 must lie in [0,1]")
    by_v: dict[str, list[tuple[EdgeKey, int]]] = {}
    for (u, v), c in sorted(F.nonzero().items()):
        by_v.setdefault(v, []).append(((u, v), c))
    m1: set[EdgeKey] = set()
    m2: set[EdgeKey] = set()
    for v in sorted(by_v):
        inc = by_v[v]
        large = [e for e, c in inc if c == 2]
        small = [e for e, c in inc if c == 1]
        if large:
            m1.add(large[0])
            if small:
                m2.add(small[0])
            continue
        slots: list[EdgeKey | None] = list(small) + [None] * (3 - len(small))
        perm = rng.permutation(3)
        first, second = slots[perm[0]], slots[perm[1]]
        take1 = rng.random() < y1
        take2 = rng.random() < y2
        if first is not None and take1:
            m1.add(first)
        if second is not None and take2:
            m2.add(second)
    return MatchingPlan((frozenset(m1), frozenset(m2)), "pseudo")
