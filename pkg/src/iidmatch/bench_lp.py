"""The four benchmark LPs and their solver.

Row layout for every LP built here (and for the MPS export): offline-vertex
rows, online-vertex rows, single-edge rows, pairwise rows, then cutting
planes in the order they were separated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _simplex
from .instance import Instance, IndexedInstance

E_INV = 1.0 / math.e

FEAS_TOL = 1e-8
SEP_TOL = 1e-8
PAIR_ROW_DEGREE_CAP = 64

OBJECTIVES = ("unweighted", "vertex_weighted", "edge_weighted")


@dataclass
class Row:
    coeffs: dict[int, float]  # variable index -> coefficient; sense is <=
    rhs: float
    name: str


@dataclass
class LinearProgram:
    """max objective . f subject to rows (all <=) and 0 <= f <= upper."""

    idx: IndexedInstance
    objective: np.ndarray
    rows: list[Row]
    upper: np.ndarray
    kind: str

    @property
    def n_vars(self) -> int:
        return self.idx.n_edges

    def check(self) -> None:
        for row in self.rows:
            if not math.isfinite(row.rhs):
                raise ValueError(f"row {row.name}: rhs not finite")
            for j, a in row.coeffs.items():
                if not (0 <= j < self.n_vars):
                    raise ValueError(f"row {row.name}: unknown variable {j}")
                if not math.isfinite(a):
                    raise ValueError(f"row {row.name}: coefficient not finite")

    def row_value(self, row: Row, x: np.ndarray) -> float:
        return sum(a * x[j] for j, a in row.coeffs.items())

    def residuals(self, x: np.ndarray) -> list[tuple[str, float]]:
        """Positive entries are violations."""
        out = [(row.name, self.row_value(row, x) - row.rhs) for row in self.rows]
        for j in range(self.n_vars):
            out.append((f"ub({j})", x[j] - self.upper[j]))
            out.append((f"lb({j})", -x[j]))
        return out


@dataclass(frozen=True)
class FracSolution:
    values: dict[tuple[str, str], float]
    objective: float

    def vector(self, idx: IndexedInstance) -> np.ndarray:
        return np.array([self.values[e] for e in idx.edge_keys])

    def vertex_sum(self, vertex: str, side: int) -> float:
        return sum(x for (u, v), x in self.values.items() if (u, v)[side] == vertex)


def _require_unit_rates(idx: IndexedInstance) -> None:
    if not np.allclose(idx.v_rate, 1.0, atol=1e-9):
        raise ValueError("this LP requires canonicalized unit integral rates")


def _matching_rows(idx: IndexedInstance, u_coeff=None, u_rhs=1.0,
                   v_rhs=None) -> list[Row]:
    rows = []
    adj_u = idx.adjacency_u()
    adj_v = idx.adjacency_v()
    for i, u in enumerate(idx.u_ids):
        coeffs = {j: (1.0 if u_coeff is None else u_coeff[j]) for j in adj_u[i]}
        rows.append(Row(coeffs, u_rhs, f"u({u})"))
    for i, v in enumerate(idx.v_ids):
        rhs = 1.0 if v_rhs is None else v_rhs[i]
        rows.append(Row({j: 1.0 for j in adj_v[i]}, rhs, f"v({v})"))
    return rows


def build_base_lp(inst: Instance, objective: str = "unweighted") -> LinearProgram:
    """The integral-rates benchmark LP.

    Per-vertex matching rows, the per-edge cap 1 - 1/e (a vertex misses all n
    rounds w.p. 1/e), and the pairwise cap 1 - 1/e^2 for any two edges at one
    offline vertex.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    idx = inst.index()
    _require_unit_rates(idx)
    rows = _matching_rows(idx)
    for j, e in enumerate(idx.edge_keys):
        rows.append(Row({j: 1.0}, 1.0 - E_INV, f"cap({e[0]},{e[1]})"))
    adj_u = idx.adjacency_u()
    for i, u in enumerate(idx.u_ids):
        deg = len(adj_u[i])
        if deg > PAIR_ROW_DEGREE_CAP:
            raise ValueError(f"offline degree {deg} exceeds the pair-row cap "
                             f"{PAIR_ROW_DEGREE_CAP} at {u!r}")
        for a in range(deg):
            for b in range(a + 1, deg):
                j1, j2 = adj_u[i][a], adj_u[i][b]
                rows.append(Row({j1: 1.0, j2: 1.0}, 1.0 - E_INV**2, f"pair({u},{a},{b})"))
    if objective == "unweighted":
        obj = np.ones(idx.n_edges)
    elif objective == "edge_weighted":
        obj = idx.edge_w.copy()
    else:
        obj = idx.u_weight[idx.edge_u]
    return LinearProgram(idx, obj, rows, np.ones(idx.n_edges), "base")


def build_stoch_lp(inst: Instance) -> LinearProgram:
    """Stochastic-rewards LP: expected probes per edge, probe-weighted
    objective, u-rows weighted by probe probabilities, v-rows capped by
    rates, and f_e capped at r_v."""
    idx = inst.index()
    rows = _matching_rows(idx, u_coeff=idx.edge_p, v_rhs=idx.v_rate)
    obj = idx.edge_w * idx.edge_p
    upper = idx.v_rate[idx.edge_v].astype(float)
    return LinearProgram(idx, obj, rows, upper, "stoch")


def build_bmatch_lp(inst: Instance, b: int) -> LinearProgram:
    """Stochastic LP with offline capacity b."""
    if not isinstance(b, int) or b < 1:
        raise ValueError("b must be an integer >= 1")
    idx = inst.index()
    rows = _matching_rows(idx, u_coeff=idx.edge_p, u_rhs=float(b), v_rhs=idx.v_rate)
    obj = idx.edge_w * idx.edge_p
    upper = idx.v_rate[idx.edge_v].astype(float)
    return LinearProgram(idx, obj, rows, upper, "bmatch")


def build_uniform_lp(inst: Instance, p: float) -> LinearProgram:
    """Uniform-probe LP: base matching rows scaled by the uniform p, with the
    exponential prefix family added lazily through separate_uniform.

    This benchmark is for the unweighted setting; weighted edges would make
    the played value incomparable to the bound."""
    if inst.uniform_p is None or abs(inst.uniform_p - p) > 1e-12:
        raise ValueError("instance probe probabilities are not uniformly p")
    if any(e.weight != 1.0 for e in inst.edges):
        raise ValueError("the uniform-probe benchmark requires unit edge weights")
    idx = inst.index()
    _require_unit_rates(idx)
    rows = _matching_rows(idx, u_coeff=np.full(idx.n_edges, p), u_rhs=1.0)
    obj = np.full(idx.n_edges, p)
    return LinearProgram(idx, obj, rows, np.ones(idx.n_edges), "uniform")


def separate_uniform(lp: LinearProgram, f: FracSolution, p: float) -> Row | None:
    """Most violated prefix row of the family sum_{e in S} f_e <= (1-e^{-sp})/p.

    For fixed s the descending-f prefix maximizes the left side over all S of
    size s, so checking prefixes is an exact separation oracle.
    """
    idx = lp.idx
    x = f.vector(idx)
    s_max = int(math.floor(2.0 / p + 1e-12))
    adj_u = idx.adjacency_u()
    best: tuple[float, Row] | None = None
    for i, u in enumerate(idx.u_ids):
        inc = sorted(adj_u[i], key=lambda j: -x[j])
        prefix = 0.0
        for s in range(1, min(s_max, len(inc)) + 1):
            prefix += x[inc[s - 1]]
            bound = (1.0 - math.exp(-s * p)) / p
            violation = prefix - bound
            if violation > SEP_TOL and (best is None or violation > best[0]):
                row = Row({j: 1.0 for j in inc[:s]}, bound, f"cut({u},s={s})")
                best = (violation, row)
    return None if best is None else best[1]


def solve(lp: LinearProgram, separator=None) -> FracSolution:
    """Optimal basic solution; with a separator, loops solve/separate/add-row
    until no violated row remains. Every row (including lazy ones) is
    re-checked within 1e-8 after the final solve."""
    lp.check()
    # every added row cuts off the current optimum, so each is a distinct
    # subset row; the generous cap below only guards against cycling bugs
    for _ in range(200 + 20 * lp.idx.n_edges):
        A = np.zeros((len(lp.rows) + lp.n_vars, lp.n_vars))
        b = np.empty(len(lp.rows) + lp.n_vars)
        for r, row in enumerate(lp.rows):
            for j, a in row.coeffs.items():
                A[r, j] = a
            b[r] = row.rhs
        for j in range(lp.n_vars):
            A[len(lp.rows) + j, j] = 1.0
            b[len(lp.rows) + j] = lp.upper[j]
        x, obj, _ = _simplex.solve_canonical(A, b, lp.objective)
        sol = FracSolution({e: max(0.0, float(x[j]))
                            for j, e in enumerate(lp.idx.edge_keys)}, obj)
        if separator is None:
            break
        row = separator(lp, sol)
        if row is None:
            break
        lp.rows.append(row)
    else:
        raise RuntimeError("cutting-plane loop failed to terminate")
    worst = max(v for _, v in lp.residuals(x))
    if worst > FEAS_TOL:
        raise AssertionError(f"solver output violates a row by {worst:.3e}")
    return sol


def solve_uniform(inst: Instance, p: float) -> tuple[LinearProgram, FracSolution]:
    """Build and solve the uniform-probe LP with its cutting-plane loop."""
    lp = build_uniform_lp(inst, p)
    sol = solve(lp, separator=lambda lp_, f: separate_uniform(lp_, f, p))
    return lp, sol


def export_mps(lp: LinearProgram, name: str = "IIDMATCH") -> str:
    """Fixed-column MPS text, rows in the documented order, for cross-checks
    against external solvers. The objective is negated (MPS minimizes); the
    short row names map back through the trailing comment block."""
    short = {row.name: f"R{i:07d}" for i, row in enumerate(lp.rows)}
    lines = [f"NAME          {name}", "ROWS", " N  COST"]
    for row in lp.rows:
        lines.append(f" L  {short[row.name]}")
    lines.append("COLUMNS")
    for j in range(lp.n_vars):
        col = f"F{j}"
        entries = [("COST", -lp.objective[j])]
        entries += [(short[row.name], row.coeffs[j]) for row in lp.rows if j in row.coeffs]
        for k in range(0, len(entries), 2):
            chunk = entries[k:k + 2]
            body = "".join(f"  {rn:<10}{val:>12.6f}" for rn, val in chunk)
            lines.append(f"    {col:<10}{body}")
    lines.append("RHS")
    for row in lp.rows:
        lines.append(f"    RHS       {short[row.name]:<10}{row.rhs:>12.6f}")
    lines.append("BOUNDS")
    for j in range(lp.n_vars):
        lines.append(f" UP BND       {'F' + str(j):<10}{lp.upper[j]:>12.6f}")
    lines.append("ENDATA")
    for row in lp.rows:
        lines.append(f"* {short[row.name]} = {row.name}")
    return "\n".join(lines) + "\n"
