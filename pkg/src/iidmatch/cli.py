"""Command-line surface.

Exit codes: 0 success, 2 validation failure (bad instance/arguments),
3 internal assertion.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analytic, bench_lp, harness, instance, online_algs, rounding

RUN_COLUMNS = ["alg", "trials", "seed", "alg_mean", "lp_bound", "ratio", "ci95"]
EDGE_COLUMNS = ["u", "v", "f_e", "p_match", "ratio_e"]


def _load_instance(path: str) -> instance.Instance:
    with open(path, "rb") as fh:
        inst = instance.from_json(fh.read())
    problems = instance.validate(inst)
    if problems:
        raise harness.ValidationError("; ".join(problems))
    return inst


def _parse_params(pairs: list[str]) -> online_algs.AlgorithmParams:
    kwargs = {}
    for pair in pairs:
        if "=" not in pair:
            raise harness.ValidationError(f"--param expects k=v, got {pair!r}")
        k, v = pair.split("=", 1)
        if k not in online_algs.AlgorithmParams.__dataclass_fields__:
            raise harness.ValidationError(f"unknown parameter {k!r}")
        field = online_algs.AlgorithmParams.__dataclass_fields__[k]
        if field.type in ("int", int):
            kwargs[k] = int(v)
        elif field.type in ("bool", bool):
            kwargs[k] = v.lower() in ("1", "true", "yes")
        else:
            kwargs[k] = float(v)
    try:
        return online_algs.AlgorithmParams(**kwargs)
    except ValueError as exc:
        raise harness.ValidationError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_to_text(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, default=float) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in columns})
    return buf.getvalue()


def cmd_solve(args) -> None:
    inst = _load_instance(args.instance)
    if args.lp in ("base", "vertex", "edge"):
        if inst.integral_rates:
            inst = instance.canonicalize(inst)
        objective = {"base": "unweighted", "vertex": "vertex_weighted",
                     "edge": "edge_weighted"}[args.lp]
        lp = bench_lp.build_base_lp(inst, objective)
        sol = bench_lp.solve(lp)
    elif args.lp == "stoch":
        lp = bench_lp.build_stoch_lp(inst)
        sol = bench_lp.solve(lp)
    elif args.lp == "bmatch":
        lp = bench_lp.build_bmatch_lp(inst, args.b)
        sol = bench_lp.solve(lp)
    elif args.lp == "uniform":
        if inst.integral_rates:
            inst = instance.canonicalize(inst)
        p = inst.uniform_p
        if p is None:
            raise harness.ValidationError("uniform LP needs uniform probe probabilities")
        lp, sol = bench_lp.solve_uniform(inst, p)
    else:  # pragma: no cover - argparse restricts choices
        raise harness.ValidationError(args.lp)
    doc = {"objective": sol.objective,
           "values": [{"u": u, "v": v, "f": x} for (u, v), x in sorted(sol.values.items())]}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if args.mps:
        with open(args.mps, "w", encoding="utf-8") as fh:
            fh.write(bench_lp.export_mps(lp))


def cmd_round(args) -> None:
    inst = _load_instance(args.instance)
    if inst.integral_rates:
        inst = instance.canonicalize(inst)
    if inst.target_frac is not None:
        values = dict(inst.target_frac)
    else:
        sol = bench_lp.solve(bench_lp.build_base_lp(inst, "edge_weighted"))
        values = sol.values
    F = rounding.dr(values, args.k, np.random.default_rng(args.seed))
    doc = {"k": args.k, "seed": args.seed,
           "values": [{"u": u, "v": v, "F": c} for (u, v), c in sorted(F.values.items())]}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)


def cmd_simulate(args) -> None:
    inst = _load_instance(args.instance)
    params = _parse_params(args.param)
    est = harness.estimate_ratio(inst, args.alg, params, args.trials, args.seed,
                                 threads=args.threads)
    _emit(_rows_to_text([est.run_row()], RUN_COLUMNS, args.format), args.out)


def cmd_report(args) -> None:
    inst = _load_instance(args.instance)
    params = _parse_params(args.param)
    est, rows = harness.per_edge_report(inst, args.alg, params, args.trials, args.seed,
                                        threads=args.threads)
    if args.format == "json":
        _emit(json.dumps({"run": est.run_row(), "edges": rows}, indent=2) + "\n", args.out)
    else:
        text = (_rows_to_text([est.run_row()], RUN_COLUMNS, "csv")
                + _rows_to_text(rows, EDGE_COLUMNS, "csv"))
        _emit(text, args.out)


def cmd_analytic(args) -> None:
    rows = [{"name": r.name, "computed": f"{r.computed:.9f}", "reference": r.printed,
             "abs_diff": f"{r.diff:.3e}", "verdict": r.verdict, "note": r.note}
            for r in analytic.constants_report(args.chain_n)]
    cols = ["name", "computed", "reference", "abs_diff", "verdict", "note"]
    _emit(_rows_to_text(rows, cols, args.format), args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iidmatch",
                                 description="Online stochastic matching toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a benchmark LP, emit the fractional solution")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--lp", choices=["base", "vertex", "edge", "stoch", "uniform", "bmatch"],
                    default="edge")
    sp.add_argument("--b", type=int, default=1)
    sp.add_argument("--mps", help="also write the LP in MPS format here")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve)

    rp = sub.add_parser("round", help="DR[k] rounding of the LP solution")
    rp.add_argument("--instance", required=True)
    rp.add_argument("--k", type=int, choices=[2, 3], default=3)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_round)

    for name, fn in (("simulate", cmd_simulate), ("report", cmd_report)):
        xp = sub.add_parser(name, help=f"{name} an online algorithm")
        xp.add_argument("--instance", required=True)
        xp.add_argument("--alg", required=True, choices=list(harness.ALGORITHMS))
        xp.add_argument("--trials", type=int, default=1000)
        xp.add_argument("--seed", type=int, default=0)
        xp.add_argument("--threads", type=int, default=1)
        xp.add_argument("--param", action="append", default=[], metavar="k=v")
        xp.add_argument("--out")
        xp.add_argument("--format", choices=["csv", "json"], default="csv")
        xp.set_defaults(func=fn)

    an = sub.add_parser("analytic", help="emit the constants report")
    an.add_argument("--chain-n", type=int, default=2000)
    an.add_argument("--out")
    an.add_argument("--format", choices=["csv", "json"], default="csv")
    an.set_defaults(func=cmd_analytic)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (harness.ValidationError, instance.SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
