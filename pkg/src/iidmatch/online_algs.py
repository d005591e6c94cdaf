"""Online algorithms over arrival sequences.

The EW family is played by an exact reformulation: every (online type,
arrival index) consults one matching, each offline vertex holds at most one
edge per matching, so an offline vertex is claimed by its earliest attempt.
Attempt times come from per-type arrival order statistics, which makes a
trial a handful of array operations. Equivalence with the literal
round-by-round player is covered by tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bench_lp import FracSolution
from .decomp import MatchingPlan, pm3, pm_star
from .instance import Instance, IndexedInstance
from .rounding import IntegralVector, dr, dr_thirds
from .sparsify import ModifiedVector, ThirdsVector, break_cycles, second_modification

EdgeKey = tuple[str, str]

H_DEFAULT = 0.537815
Y1_DEFAULT = 0.687
Y2_DEFAULT = 1.0
ETA_DEFAULT = 0.0142
Q_EW1_DEFAULT = 0.850749  # balanced weight on EW1; the text's 0.149251 is EW2's share


@dataclass(frozen=True)
class ArrivalSequence:
    rounds: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.rounds)

    def indices(self, idx: IndexedInstance) -> np.ndarray:
        return np.array([idx.v_pos[v] for v in self.rounds], dtype=np.int64)


@dataclass(frozen=True)
class AlgorithmParams:
    q_ew1: float = Q_EW1_DEFAULT
    h: float = H_DEFAULT
    y1: float = Y1_DEFAULT
    y2: float = Y2_DEFAULT
    eta: float = ETA_DEFAULT
    b: int = 1
    p: float | None = None
    two_probe: bool = False

    def __post_init__(self):
        if not (0 <= self.q_ew1 <= 1 and 0 <= self.h <= 1):
            raise ValueError("q_ew1 and h must lie in [0,1]")
        if not (0 <= self.y1 <= 1 and 0 <= self.y2 <= 1):
            raise ValueError("y1 and y2 must lie in [0,1]")
        if self.eta < 0 or self.b < 1:
            raise ValueError("eta must be >= 0 and b >= 1")
        if self.p is not None and not (0 < self.p <= 1):
            raise ValueError("p must lie in (0,1]")


@dataclass
class RunResult:
    total_weight: float
    edge_matched: dict[EdgeKey, int]
    offline_matched: dict[str, int]
    probes_attempted: int = 0
    probes_succeeded: int = 0
    edge_probes: dict[EdgeKey, int] = field(default_factory=dict)

    def matches(self) -> int:
        return sum(self.edge_matched.values())


def sample_arrivals(inst: Instance, rng: np.random.Generator) -> ArrivalSequence:
    """n i.i.d. draws over types, each round hitting v w.p. r_v / n."""
    ids = [v for v, _ in inst.online]
    rates = np.array([r for _, r in inst.online], dtype=float)
    probs = rates / rates.sum()
    draws = rng.choice(len(ids), size=inst.horizon, p=probs)
    return ArrivalSequence(tuple(map(ids.__getitem__, draws.tolist())))


def _arrival_times(arr_idx: np.ndarray, n_types: int, depth: int) -> np.ndarray:
    """times[d, v] = round of v's (d+1)-th arrival, or n+1 when absent."""
    n = len(arr_idx)
    inf = n + 1
    order = np.argsort(arr_idx, kind="stable").astype(np.int64)
    sorted_types = arr_idx[order]
    grid = np.arange(n_types)
    starts = np.searchsorted(sorted_types, grid, side="left")
    ends = np.searchsorted(sorted_types, grid, side="right")
    times = np.full((depth, n_types), inf, dtype=np.int64)
    for d in range(depth):
        has = starts + d < ends
        times[d, np.flatnonzero(has)] = order[starts[has] + d]
    return times


def _resolve_attempts(n_u: int, att_u: np.ndarray, att_time: np.ndarray,
                      att_edge: np.ndarray, inf: int) -> np.ndarray:
    """Earliest attempt per offline vertex wins; returns winning edge indices
    into the attempt arrays' edge labels."""
    best = np.full(n_u, inf, dtype=np.int64)
    np.minimum.at(best, att_u, att_time)
    win = (att_time < inf) & (att_time == best[att_u])
    return att_edge[win]


class _EwPlayer:
    """Replays EW-style plans against an arrival sequence."""

    def __init__(self, inst: Instance):
        self.idx = inst.index()

    def play(self, plan: MatchingPlan, arrivals: ArrivalSequence,
             third_keep: dict[EdgeKey, bool] | None = None,
             weights: np.ndarray | None = None) -> RunResult:
        idx = self.idx
        arr = arrivals.indices(idx)
        depth = len(plan.matchings)
        times = _arrival_times(arr, idx.n_v, depth)
        inf = len(arr) + 1
        att_u, att_t, att_e = [], [], []
        for d, matching in enumerate(plan.matchings):
            for e in sorted(matching):
                if d == 2 and third_keep is not None and not third_keep.get(e, True):
                    continue
                att_u.append(idx.u_pos[e[0]])
                att_t.append(times[d, idx.v_pos[e[1]]])
                att_e.append(idx.edge_pos[e])
        if not att_u:
            return RunResult(0.0, {}, {u: 0 for u in idx.u_ids})
        winners = _resolve_attempts(idx.n_u, np.array(att_u), np.array(att_t),
                                    np.array(att_e), inf)
        w = idx.edge_w if weights is None else weights
        edge_matched = {idx.edge_keys[j]: 1 for j in winners}
        offline = {u: 0 for u in idx.u_ids}
        for j in winners:
            offline[idx.u_ids[idx.edge_u[j]]] += 1
        if any(c > 1 for c in offline.values()):
            raise AssertionError("offline capacity exceeded")
        total = float(sum(w[j] for j in winners))
        return RunResult(total, edge_matched, offline)


def run_ew0(inst: Instance, plan: MatchingPlan, arrivals: ArrivalSequence) -> RunResult:
    """Two-matching play: v's first arrival tries its primary partner, the
    second tries the secondary, later arrivals are ignored."""
    if len(plan.matchings) != 2:
        raise ValueError("run_ew0 expects a two-matching plan")
    return _EwPlayer(inst).play(plan, arrivals)


def make_ew0_plan(F: IntegralVector, rng: np.random.Generator) -> MatchingPlan:
    """Decompose the DR2 multigraph into two matchings in random order."""
    from .decomp import decompose

    ms = decompose(F, 2)
    order = rng.permutation(2)
    return MatchingPlan(tuple(frozenset(ms[i]) for i in order), "proper")


def attenuate(f, eta: float = ETA_DEFAULT) -> FracSolution:
    """Shift mass from small edges toward large ones before rounding.

    Large edges (f > 1/2) gain eta; each small edge with a large neighbor is
    scaled by (1-(fl+eta))/(1-fl) for its largest such neighbor fl. Vertex
    sums stay at most one.
    """
    from .rounding import _edge_values

    values = _edge_values(f)
    large_at: dict[str, float] = {}
    for (u, v), x in values.items():
        if x > 0.5:
            if max(large_at.get(u, 0.0), large_at.get(v, 0.0)) > 0.5:
                raise AssertionError("two large edges share a vertex")
            large_at[u] = max(large_at.get(u, 0.0), x)
            large_at[v] = max(large_at.get(v, 0.0), x)
    out = {}
    for (u, v), x in values.items():
        if x > 0.5:
            out[(u, v)] = x + eta
            continue
        fl = max(large_at.get(u, 0.0), large_at.get(v, 0.0))
        if fl > 0.5:
            out[(u, v)] = x * (1.0 - (fl + eta)) / (1.0 - fl)
        else:
            out[(u, v)] = x
    sums: dict[tuple[int, str], float] = {}
    for (u, v), x in out.items():
        sums[(0, u)] = sums.get((0, u), 0.0) + x
        sums[(1, v)] = sums.get((1, v), 0.0) + x
    if any(s > 1 + 1e-9 for s in sums.values()):
        raise AssertionError("attenuation pushed a vertex sum above one")
    return FracSolution(out, getattr(f, "objective", float("nan")))


def run_ew07(inst: Instance, f, arrivals: ArrivalSequence, rng: np.random.Generator,
             eta: float = ETA_DEFAULT) -> RunResult:
    """Attenuate, DR2, decompose, randomly order, then play as in run_ew0."""
    fa = attenuate(f, eta)
    F = dr(fa, 2, rng)
    return run_ew0(inst, make_ew0_plan(F, rng), arrivals)


def gamma2_smalls(F: IntegralVector) -> set[EdgeKey]:
    """Small edges whose offline endpoint also carries a large edge.

    With dummy padding to degree three, a small edge is type Gamma2 exactly
    when some other incident edge is large, and Gamma1 otherwise.
    """
    large_u = {u for (u, _), c in F.values.items() if c == 2}
    return {(u, v) for (u, v), c in F.values.items() if c == 1 and u in large_u}


def play_ew1(inst: Instance, plan: MatchingPlan, gamma2: set[EdgeKey], h: float,
             arrivals: ArrivalSequence, rng: np.random.Generator) -> RunResult:
    """Third-arrival attempts on Gamma2 small edges fire only w.p. h."""
    third_keep = {e: True for e in plan.matchings[2]}
    for e in sorted(plan.matchings[2]):
        if e in gamma2:
            third_keep[e] = bool(rng.random() < h)
    return _EwPlayer(inst).play(plan, arrivals, third_keep=third_keep)


def run_ew1(inst: Instance, F: IntegralVector, arrivals: ArrivalSequence,
            rng: np.random.Generator, h: float = H_DEFAULT) -> RunResult:
    plan = pm3(F, rng)
    return play_ew1(inst, plan, gamma2_smalls(F), h, arrivals, rng)


def run_ew2(inst: Instance, F: IntegralVector, arrivals: ArrivalSequence,
            rng: np.random.Generator, y1: float = Y1_DEFAULT,
            y2: float = Y2_DEFAULT) -> RunResult:
    plan = pm_star(F, y1, y2, rng)
    return _EwPlayer(inst).play(plan, arrivals)


def run_ew(inst: Instance, F: IntegralVector, params: AlgorithmParams,
           arrivals: ArrivalSequence, rng: np.random.Generator) -> RunResult:
    """One Bernoulli(q_ew1) coin selects which sub-algorithm plays the trial."""
    if rng.random() < params.q_ew1:
        return run_ew1(inst, F, arrivals, rng, params.h)
    return run_ew2(inst, F, arrivals, rng, params.y1, params.y2)


# --- vertex-weighted pipeline ------------------------------------------------

def vw_offline(f_or_thirds, rng: np.random.Generator) -> ModifiedVector:
    """DR3 (unless given thirds directly), cycle surgery, second modification."""
    if isinstance(f_or_thirds, ThirdsVector):
        H = f_or_thirds
    else:
        H = dr_thirds(f_or_thirds, rng)
    return second_modification(break_cycles(H))


def _rla_tables(idx: IndexedInstance, hp: ModifiedVector):
    slot_u = np.full((idx.n_v, 3), -1, dtype=np.int64)
    slot_edge = np.zeros((idx.n_v, 3), dtype=np.int64)
    slot_prob = np.zeros((idx.n_v, 3))
    n_slots = np.zeros(idx.n_v, dtype=np.int64)
    per_v: dict[str, list[EdgeKey]] = {}
    for e in sorted(hp.values):
        if hp.values[e] > 0:
            per_v.setdefault(e[1], []).append(e)
    for v, edges in per_v.items():
        vi = idx.v_pos[v]
        if len(edges) > 3:
            raise ValueError(f"online vertex {v!r} has more than three positive entries")
        total = 0.0
        for s, e in enumerate(edges):
            slot_u[vi, s] = idx.u_pos[e[0]]
            slot_edge[vi, s] = idx.edge_pos[e]
            slot_prob[vi, s] = hp.values[e]
            total += hp.values[e]
        k = len(edges)
        if total > 1 + 1e-9:
            raise AssertionError(f"online mass above one at {v!r}")
        if total < 1 - 1e-9:
            if k >= 3:
                raise AssertionError(f"deficient online vertex {v!r} already has 3 slots")
            slot_prob[vi, k] = 1.0 - total  # drop slot; slot_u stays -1
            k += 1
        n_slots[vi] = k
    return slot_u, slot_edge, slot_prob, n_slots


def run_vw(inst: Instance, arrivals: ArrivalSequence, rng: np.random.Generator,
           hprime: ModifiedVector | None = None, f=None) -> RunResult:
    """Random-list play on the modified thirds structure.

    Pass ``hprime`` to replay a fixed offline stage, or ``f`` to run the whole
    pipeline (DR3, cycle breaking, second modification) inside the trial.
    """
    if hprime is None:
        if f is None:
            raise ValueError("run_vw needs hprime or a fractional solution f")
        hprime = vw_offline(f, rng)
    idx = inst.index()
    slot_u, slot_edge, slot_prob, n_slots = _rla_tables(idx, hprime)
    arr = arrivals.indices(idx)
    uniforms = rng.random((len(arr), 2))
    matched = np.zeros(idx.n_u, dtype=np.bool_)
    edge_hits = np.zeros(idx.n_edges, dtype=np.int64)
    _kernels.rla_play_core(arr, slot_u, slot_edge, slot_prob, n_slots,
                           uniforms, matched, edge_hits)
    edge_matched = {idx.edge_keys[j]: int(edge_hits[j])
                    for j in np.flatnonzero(edge_hits)}
    offline = {u: int(matched[i]) for i, u in enumerate(idx.u_ids)}
    total = float((matched * idx.u_weight).sum())
    return RunResult(total, edge_matched, offline)


# --- stochastic rewards -------------------------------------------------------

def run_sm(inst: Instance, f, arrivals: ArrivalSequence, rng: np.random.Generator,
           b: int = 1) -> RunResult:
    """Non-adaptive probing: on v's arrival, pick neighbor u w.p. f_e / r_v;
    if u is safe, probe once (success realizes the edge and consumes u)."""
    from .rounding import _edge_values

    values = _edge_values(f)
    idx = inst.index()
    rates = dict(inst.online)
    by_v: dict[str, tuple[list[EdgeKey], np.ndarray]] = {}
    for v in idx.v_ids:
        inc = sorted(e for e in values if e[1] == v and values[e] > 0)
        probs = np.array([values[e] / rates[v] for e in inc])
        if probs.sum() > 1 + 1e-9:
            raise ValueError(f"assignment probabilities exceed one at {v!r}")
        by_v[v] = (inc, np.cumsum(probs))
    p = {e.key: e.probe_prob for e in inst.edges}
    w = {e.key: e.weight for e in inst.edges}
    matched_count: dict[str, int] = {u: 0 for u in idx.u_ids}
    edge_matched: dict[EdgeKey, int] = {}
    edge_probes: dict[EdgeKey, int] = {}
    attempted = succeeded = 0
    total = 0.0
    for v in arrivals.rounds:
        inc, cum = by_v[v]
        if not inc:
            continue
        x = rng.random()
        j = int(np.searchsorted(cum, x, side="right"))
        if j >= len(inc):
            continue
        e = inc[j]
        if matched_count[e[0]] >= b:
            continue
        attempted += 1
        edge_probes[e] = edge_probes.get(e, 0) + 1
        if rng.random() < p[e]:
            succeeded += 1
            matched_count[e[0]] += 1
            edge_matched[e] = edge_matched.get(e, 0) + 1
            total += w[e]
    if any(c > b for c in matched_count.values()):
        raise AssertionError("offline capacity exceeded")
    return RunResult(total, edge_matched, matched_count, attempted, succeeded,
                     edge_probes)


def run_smb(inst: Instance, b: int, f, arrivals: ArrivalSequence,
            rng: np.random.Generator) -> RunResult:
    """Capacity-b probing; identical to run_sm with u safe until b matches."""
    if b < 1:
        raise ValueError("b must be >= 1")
    return run_sm(inst, f, arrivals, rng, b=b)


def gen_two_choice_list(masses, rng: np.random.Generator) -> tuple[int | None, int | None]:
    """Two choices over slots with the stated marginal and overlap laws.

    Slots partition [0,1) by mass (a deficit becomes a drop slot -> None);
    the first choice covers X, the second covers X+1/2 mod 1, so each slot is
    chosen by either draw w.p. its mass and by both w.p. max(2*mass-1, 0).
    """
    m = np.asarray(masses, dtype=float)
    if (m < 0).any():
        raise ValueError("masses must be nonnegative")
    total = m.sum()
    if total > 1 + 1e-9:
        raise ValueError("masses must sum to at most one")
    cum = np.cumsum(m)
    x = rng.random()
    y = (x + 0.5) % 1.0

    def locate(z: float) -> int | None:
        j = int(np.searchsorted(cum, z, side="right"))
        return j if j < len(m) else None

    return locate(x), locate(y)


def run_unifp(inst: Instance, fstar, p: float, arrivals: ArrivalSequence,
              rng: np.random.Generator, two_probe: bool = False) -> RunResult:
    """Two-choice probing under a uniform probe probability.

    The second choice is consulted when the first is unavailable (or a drop
    slot); a failed probe ends the round unless ``two_probe`` is set.
    """
    if inst.uniform_p is None or abs(inst.uniform_p - p) > 1e-12:
        raise ValueError("instance probe probabilities are not uniformly p")
    from .rounding import _edge_values

    values = _edge_values(fstar)
    idx = inst.index()
    by_v: dict[str, list[EdgeKey]] = {}
    for v in idx.v_ids:
        by_v[v] = sorted(e for e in values if e[1] == v and values[e] > 0)
    matched: dict[str, int] = {u: 0 for u in idx.u_ids}
    edge_matched: dict[EdgeKey, int] = {}
    edge_probes: dict[EdgeKey, int] = {}
    attempted = succeeded = 0
    total = 0.0
    w = {e.key: e.weight for e in inst.edges}
    for v in arrivals.rounds:
        inc = by_v[v]
        if not inc:
            continue
        first, second = gen_two_choice_list([values[e] for e in inc], rng)
        choices = [first] if second == first else [first, second]
        for choice in choices:
            if choice is None:
                continue
            e = inc[choice]
            if matched[e[0]]:
                continue
            attempted += 1
            edge_probes[e] = edge_probes.get(e, 0) + 1
            if rng.random() < p:
                succeeded += 1
                matched[e[0]] = 1
                edge_matched[e] = edge_matched.get(e, 0) + 1
                total += w[e]
                break
            if not two_probe:
                break
    return RunResult(total, edge_matched, matched, attempted, succeeded, edge_probes)
