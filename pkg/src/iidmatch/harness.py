"""Experiment runner: per-algorithm pipelines, seeded parallel trials,
ratio estimates against the LP bound, and per-edge reports.

The ratio denominator is always the LP bound, not a simulated offline
optimum, so reported ratios are conservative. Trials derive independent
seeds from (seed, trial index); merging is order-independent, which makes
results identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bench_lp, online_algs
from .instance import Instance, canonicalize, validate
from .online_algs import AlgorithmParams, RunResult, sample_arrivals
from .rounding import dr
from .sparsify import ThirdsVector

EdgeKey = tuple[str, str]

ALGORITHMS = ("ew0", "ew07", "ew1", "ew2", "ew", "vw", "sm", "unifp", "smb")


class ValidationError(ValueError):
    """Instance or configuration rejected before any simulation ran."""


@dataclass(frozen=True)
class RatioEstimate:
    algorithm: str
    trials: int
    seed: int
    alg_mean: float
    lp_bound: float
    ratio: float
    ci95: float
    edge_freq: dict[EdgeKey, float]
    offline_freq: dict[str, float]

    def run_row(self) -> dict:
        return {"alg": self.algorithm, "trials": self.trials, "seed": self.seed,
                "alg_mean": self.alg_mean, "lp_bound": self.lp_bound,
                "ratio": self.ratio, "ci95": self.ci95}


class _Context:
    """Shared read-only state for one experiment: the instance, its
    fractional guide (LP solve or gadget bypass), and scoring weights."""

    def __init__(self, inst: Instance, algorithm: str, params: AlgorithmParams):
        if algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {algorithm!r}")
        problems = validate(inst)
        if problems:
            raise ValidationError("; ".join(problems))
        self.algorithm = algorithm
        self.params = params
        needs_units = algorithm in ("ew0", "ew07", "ew1", "ew2", "ew", "vw", "unifp")
        if needs_units:
            if not inst.integral_rates:
                raise ValidationError(f"{algorithm} requires integral arrival rates")
            inst = canonicalize(inst)
        self.inst = inst
        self.idx = inst.index()
        self.frac = None
        self.thirds = None
        self.hprime = None
        objective = {"vw": "vertex_weighted"}.get(algorithm, "edge_weighted")
        if algorithm == "vw" and inst.target_thirds is not None:
            self.thirds = ThirdsVector(dict(inst.target_thirds))
            self.hprime = online_algs.vw_offline(self.thirds, np.random.default_rng(0))
            hu = {u: 0.0 for u in self.idx.u_ids}
            for (u, _), h in self.thirds.nonzero().items():
                hu[u] += h / 3.0
            self.lp_bound = sum(dict(inst.offline)[u] * m for u, m in hu.items())
        elif algorithm in ("ew0", "ew07", "ew1", "ew2", "ew", "vw"):
            if inst.target_frac is not None:
                score = self._score_map()
                self.frac = bench_lp.FracSolution(
                    dict(inst.target_frac),
                    sum(score[e] * x for e, x in inst.target_frac.items()))
                self.lp_bound = self.frac.objective
            else:
                lp = bench_lp.build_base_lp(inst, objective)
                self.frac = bench_lp.solve(lp)
                self.lp_bound = self.frac.objective
        elif algorithm == "sm":
            self.frac = bench_lp.solve(bench_lp.build_stoch_lp(inst))
            self.lp_bound = self.frac.objective
        elif algorithm == "smb":
            self.frac = bench_lp.solve(bench_lp.build_bmatch_lp(inst, params.b))
            self.lp_bound = self.frac.objective
        elif algorithm == "unifp":
            p = params.p if params.p is not None else inst.uniform_p
            if p is None or inst.uniform_p is None:
                raise ValidationError("unifp requires a uniform probe probability")
            self.p = float(p)
            try:
                _, self.frac = bench_lp.solve_uniform(inst, self.p)
            except ValueError as exc:
                raise ValidationError(str(exc)) from exc
            self.lp_bound = self.frac.objective
        self.edge_score = self._edge_scores()
        # arrival draws happen in instance order; plays index by sorted ids
        ids = [v for v, _ in inst.online]
        rates = np.array([r for _, r in inst.online], dtype=float)
        self.sample_probs = rates / rates.sum()
        self.sample_perm = np.array([self.idx.v_pos[v] for v in ids], dtype=np.int64)
        if algorithm == "ew0":
            from .rounding import _graph_for

            self.rgraph = _graph_for(tuple(sorted(self.frac.values)))
            self.scaled2 = 2.0 * np.clip(
                np.array([self.frac.values[e] for e in self.rgraph.keys]), 0.0, 1.0)

    def _score_map(self) -> dict[EdgeKey, float]:
        if self.algorithm == "vw":
            wu = dict(self.inst.offline)
            return {e.key: wu[e.u] for e in self.inst.edges}
        return {e.key: e.weight for e in self.inst.edges}

    def _edge_scores(self) -> np.ndarray:
        if self.algorithm == "vw":
            return self.idx.u_weight[self.idx.edge_u]
        return self.idx.edge_w.copy()

    def run_trial_fast(self, rng: np.random.Generator):
        """Array-level ew0 trial, draw-for-draw identical to run_trial.

        Returns (total, edge match vector, offline match vector).
        """
        from .decomp import color_copies
        from .online_algs import _arrival_times, _resolve_attempts

        idx = self.idx
        draws = rng.choice(len(self.sample_perm), size=self.inst.horizon,
                           p=self.sample_probs)
        arr_idx = self.sample_perm[draws]
        F_vec = self.rgraph.round_scaled(self.scaled2, rng)
        copy_edge = np.repeat(np.arange(idx.n_edges), F_vec)
        cu = idx.edge_u[copy_edge]
        cv = idx.edge_v[copy_edge]
        colors = color_copies(cu, cv, idx.n_u, idx.n_v, 2)
        order = rng.permutation(2)
        matching_of = np.argsort(order)[colors]
        times = _arrival_times(arr_idx, idx.n_v, 2)
        att_t = times[matching_of, cv]
        winners = _resolve_attempts(idx.n_u, cu, att_t, copy_edge, len(arr_idx) + 1)
        ev = np.zeros(idx.n_edges)
        ev[winners] = 1.0
        uv = np.zeros(idx.n_u)
        uv[idx.edge_u[winners]] = 1.0
        return float(ev @ self.edge_score), ev, uv

    def run_trial(self, rng: np.random.Generator) -> RunResult:
        inst, params = self.inst, self.params
        arrivals = sample_arrivals(inst, rng)
        alg = self.algorithm
        if alg == "ew0":
            F = dr(self.frac, 2, rng)
            return online_algs.run_ew0(inst, online_algs.make_ew0_plan(F, rng), arrivals)
        if alg == "ew07":
            return online_algs.run_ew07(inst, self.frac, arrivals, rng, params.eta)
        if alg == "ew1":
            return online_algs.run_ew1(inst, dr(self.frac, 3, rng), arrivals, rng, params.h)
        if alg == "ew2":
            return online_algs.run_ew2(inst, dr(self.frac, 3, rng), arrivals, rng,
                                       params.y1, params.y2)
        if alg == "ew":
            return online_algs.run_ew(inst, dr(self.frac, 3, rng), params, arrivals, rng)
        if alg == "vw":
            if self.hprime is not None:
                return online_algs.run_vw(inst, arrivals, rng, hprime=self.hprime)
            return online_algs.run_vw(inst, arrivals, rng, f=self.frac)
        if alg == "sm":
            return online_algs.run_sm(inst, self.frac, arrivals, rng)
        if alg == "smb":
            return online_algs.run_smb(inst, params.b, self.frac, arrivals, rng)
        if alg == "unifp":
            return online_algs.run_unifp(inst, self.frac, self.p, arrivals, rng,
                                         params.two_probe)
        raise AssertionError(alg)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def estimate_ratio(inst: Instance, algorithm: str, params: AlgorithmParams | None = None,
                   trials: int = 1000, seed: int = 0, threads: int = 1) -> RatioEstimate:
    """Monte Carlo competitive-ratio estimate against the LP bound.

    The offline stage (rounding, decomposition, modification) re-randomizes
    per trial; output is a pure function of (instance, algorithm, params,
    trials, seed), independent of the worker count.
    """
    params = params or AlgorithmParams()
    return _estimate(_Context(inst, algorithm, params), trials, seed, threads)


def _estimate(ctx: _Context, trials: int, seed: int, threads: int) -> RatioEstimate:
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    algorithm = ctx.algorithm
    n_edges = ctx.idx.n_edges
    totals = np.zeros(trials)
    edge_counts = np.zeros(n_edges)
    u_counts = np.zeros(ctx.idx.n_u)

    def one(t: int):
        if algorithm == "ew0":
            total, ev, uv = ctx.run_trial_fast(_trial_rng(seed, t))
            return t, total, ev, uv
        res = ctx.run_trial(_trial_rng(seed, t))
        ev = np.zeros(n_edges)
        for e, cnt in res.edge_matched.items():
            ev[ctx.idx.edge_pos[e]] = cnt
        recomputed = float(ev @ ctx.edge_score)
        if not math.isclose(recomputed, res.total_weight, rel_tol=0, abs_tol=1e-6):
            raise AssertionError("per-edge weights do not sum to the trial total")
        uv = np.zeros(ctx.idx.n_u)
        for u, cnt in res.offline_matched.items():
            uv[ctx.idx.u_pos[u]] = cnt
        return t, res.total_weight, ev, uv

    if threads <= 1:
        results = map(one, range(trials))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(trials)))
    for t, total, ev, uv in results:
        totals[t] = total
        edge_counts += ev
        u_counts += uv

    mean = float(totals.mean())
    stderr = float(totals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    bound = ctx.lp_bound
    return RatioEstimate(
        algorithm=algorithm, trials=trials, seed=seed, alg_mean=mean,
        lp_bound=bound, ratio=mean / bound if bound > 0 else math.nan,
        ci95=1.96 * stderr / bound if bound > 0 else math.nan,
        edge_freq={e: float(edge_counts[j] / trials)
                   for j, e in enumerate(ctx.idx.edge_keys)},
        offline_freq={u: float(u_counts[i] / trials)
                      for i, u in enumerate(ctx.idx.u_ids)},
    )


def per_edge_report(inst: Instance, algorithm: str, params: AlgorithmParams | None = None,
                    trials: int = 1000, seed: int = 0,
                    threads: int = 1) -> tuple[RatioEstimate, list[dict]]:
    """Edge-level view: fractional guide, empirical match frequency, and the
    frequency-to-guide ratio per edge."""
    params = params or AlgorithmParams()
    ctx = _Context(inst, algorithm, params)
    est = _estimate(ctx, trials, seed, threads)
    if ctx.frac is not None:
        fvals = dict(ctx.frac.values)
    else:
        fvals = {e: h / 3.0 for e, h in ctx.thirds.nonzero().items()}
    rows = []
    for e in ctx.idx.edge_keys:
        f_e = fvals.get(e, 0.0)
        p_match = est.edge_freq.get(e, 0.0)
        rows.append({"u": e[0], "v": e[1], "f_e": f_e, "p_match": p_match,
                     "ratio_e": p_match / f_e if f_e > 1e-12 else 0.0})
    return est, rows


def sm_edge_match_frequencies(inst: Instance, f, trials: int, seed: int,
                              b: int = 1) -> dict[EdgeKey, float]:
    """Exact-marginal batch sampler for the probing algorithm's per-edge
    match frequencies.

    Each round probes edge e successfully w.p. f_e p_e / n independently
    across rounds, and offline vertices evolve independently, so per vertex
    the number of successes is Binomial(n, q_u) (capped at b) and successful
    edges are i.i.d. proportional to f_e p_e. Agreement with the sequential
    player is covered by tests.
    """
    from .rounding import _edge_values

    values = _edge_values(f)
    idx = inst.index()
    n = inst.horizon
    p = {e.key: e.probe_prob for e in inst.edges}
    rng = np.random.default_rng(seed)
    freq: dict[EdgeKey, float] = {}
    for i, u in enumerate(idx.u_ids):
        inc = sorted(e for e in values if e[0] == u and values[e] > 0)
        if not inc:
            continue
        mass = np.array([values[e] * p[e] for e in inc])
        q_u = mass.sum() / n
        if q_u > 1 + 1e-12:
            raise ValidationError("per-round success mass exceeds one")
        probs = mass / mass.sum()
        K = np.minimum(rng.binomial(n, min(q_u, 1.0), size=trials), b)
        counts = np.zeros(len(inc))
        for kval in np.unique(K):
            if kval == 0:
                continue
            rows = int((K == kval).sum())
            counts += rng.multinomial(int(kval), probs, size=rows).sum(axis=0)
        for j, e in enumerate(inc):
            freq[e] = float(counts[j] / trials)
    return freq
