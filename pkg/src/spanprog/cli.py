"""Command-line interface.

Verbs: ``sp eval|compile|scale|normalize|square|reduce|realify``,
``alg run|to-sp|verify``, ``mono check|to-span|to-pea|grover|verify-bounds``,
``lb fourier|adeg|pattern|measure|certificate|assignment|extract``,
``verify all``.

Exit codes: 0 success, 2 validation failure, 3 bound/assertion violation,
4 IO/parse failure.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import sys

import numpy as np

from . import __version__, acceptance
from . import bounds as bd
from . import monotone as mo
from . import qsim
from . import query_alg as qa
from . import span_core as sc
from .errors import BoundViolated, MalformedProgram, ValidationError
from .io import (
    alg_from_dict,
    alg_to_dict,
    load_json,
    matrix_from_list,
    pea_from_dict,
    pea_to_dict,
    save_json,
    span_from_dict,
    span_to_dict,
    table_from_dict,
)
from .numerics import TolerancePolicy

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BOUND = 3
EXIT_IO = 4


def _policy(args) -> TolerancePolicy:
    return TolerancePolicy(rank_cutoff_factor=args.tol_rank,
                           witness_equality_tol=args.tol_witness)


def _report(args, command: str, result) -> dict:
    return {
        "tool": "spanprog",
        "version": __version__,
        "command": command,
        "seed": args.seed,
        "tolerances": {"rank": args.tol_rank, "witness": args.tol_witness},
        "result": result,
    }


def _emit(args, report: dict) -> None:
    if args.format == "csv":
        rows = report["result"]
        if isinstance(rows, dict):
            rows = rows.get("per_input") or [
                {k: v for k, v in rows.items()
                 if not isinstance(v, (dict, list))}]
        buf = _stdio.StringIO()
        keys = sorted({k for r in rows for k in r})
        writer = csv.DictWriter(buf, fieldnames=keys)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: r.get(k, "") for k in keys})
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, default=_jsonable) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def _load(path: str, loader):
    try:
        payload = load_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise _IOFailure(f"{path}: {exc}")
    try:
        return loader(payload)
    except MalformedProgram as exc:
        raise _IOFailure(f"{path}: {exc}")


class _IOFailure(Exception):
    pass


def _parse_inputs(P_n, tokens):
    out = []
    for tok in tokens:
        bits = tuple(int(ch) for ch in tok)
        if len(bits) != P_n or any(b not in (0, 1) for b in bits):
            raise MalformedProgram(f"input {tok!r} is not a {P_n}-bit string")
        out.append(bits)
    return out


def _all_or_given(P, tokens):
    if tokens:
        return _parse_inputs(P.n, tokens)
    return list(sc.all_inputs(P.n))


def _save_program(args, P) -> None:
    if args.out:
        save_json(args.out, span_to_dict(P))


# ---------------------------------------------------------------- sp verbs

def cmd_sp_eval(args) -> dict:
    policy = _policy(args)
    P = _load(args.file, span_from_dict)
    rows = []
    for x in _all_or_given(P, args.inputs):
        verdict = sc.evaluate(P, x, policy)
        row = {"x": "".join(map(str, x)), "verdict": verdict}
        if verdict == "accepted":
            row["w_plus"] = sc.positive_witness(P, x, policy)[1]
        else:
            try:
                row["w_minus"] = sc.negative_witness(P, x, policy)[1]
            except ValidationError as exc:
                row["w_minus"] = None
                row["note"] = str(exc)
        row["min_error"] = sc.min_error_witness(P, x, policy)[1]
        rows.append(row)
    result = {"per_input": rows}
    if args.table:
        n, f = _load(args.table, table_from_dict)
        if n != P.n:
            raise MalformedProgram("table arity differs from program arity")
        rep = sc.complexity_report(P, f, args.kappa, policy)
        result["complexity"] = {
            "W_plus": rep.W_plus, "W_minus": rep.W_minus,
            "W_hat_plus": rep.W_hat_plus, "C": rep.C,
            "C_kappa": rep.C_kappa, "kappa": rep.kappa,
            "approximates": rep.approximates,
            "failures": [{"x": "".join(map(str, x)), "why": why}
                         for x, why in rep.failures],
        }
    return result


def cmd_sp_compile(args) -> dict:
    policy = _policy(args)
    P = _load(args.file, span_from_dict)
    n, f = _load(args.table, table_from_dict)
    if n != P.n:
        raise MalformedProgram("table arity differs from program arity")
    decider, Pc = qsim.compile_program(P, f, kappa=args.kappa,
                                       reduce=args.reduce, policy=policy)
    rows = []
    for x in sorted(f):
        rep = qsim.decide(decider, Pc, x, policy)
        rows.append({"x": "".join(map(str, x)), "expected": f[x],
                     "output": rep.output, "prob_output": rep.prob_output,
                     "mass_zero": rep.mass_zero, "mass_theta": rep.mass_theta})
    return {
        "decider": {
            "Theta": decider.Theta, "q0": decider.q0, "q1": decider.q1,
            "kappa": decider.kappa, "W_minus": decider.W_minus,
            "W_hat_plus": decider.W_hat_plus,
            "repetitions": decider.repetitions,
            "pe_steps": decider.pe_steps, "ae_steps": decider.ae_steps,
            "space_qubits": decider.reported_space,
            "queries": decider.reported_queries,
        },
        "size": Pc.size,
        "per_input": rows,
    }


def _sp_transform(args, fn, name) -> dict:
    P = _load(args.file, span_from_dict)
    out = fn(P)
    _save_program(args, out)
    return {"operation": name, "size": out.size, "dim_v": out.dim_v,
            "saved_to": args.out}


def cmd_sp_scale(args) -> dict:
    return _sp_transform(args, lambda P: sc.scale(P, args.beta),
                         f"scale beta={args.beta}")


def cmd_sp_normalize(args) -> dict:
    return _sp_transform(args, sc.normalize, "normalize")


def cmd_sp_square(args) -> dict:
    return _sp_transform(args, sc.tensor_square, "square")


def cmd_sp_reduce(args) -> dict:
    policy = _policy(args)
    P = _load(args.file, span_from_dict)
    n, f = _load(args.table, table_from_dict)
    if n != P.n:
        raise MalformedProgram("table arity differs from program arity")
    out, d = sc.reduce_kappa(P, f, args.kappa, args.kappa_prime, policy)
    _save_program(args, out)
    return {"operation": "reduce", "squarings": d, "size": out.size,
            "dim_v": out.dim_v, "saved_to": args.out}


def cmd_sp_realify(args) -> dict:
    return _sp_transform(args, sc.realify, "realify")


# --------------------------------------------------------------- alg verbs

def cmd_alg_run(args) -> dict:
    alg = _load(args.file, alg_from_dict)
    rows = []
    for x in _all_or_given(alg, args.inputs):
        res = qa.run(alg, x)
        rows.append({"x": "".join(map(str, x)), "p0": res.p0,
                     "output_bit": res.output_bit})
    return {"T": alg.T, "per_input": rows}


def cmd_alg_to_sp(args) -> dict:
    alg = _load(args.file, alg_from_dict)
    P = qa.alg_to_span(alg, args.c)
    if args.out:
        save_json(args.out, span_to_dict(P))
    checks = []
    for x in sc.all_inputs(alg.n):
        res = qa.run(alg, x)
        _, _, err = qa.build_pos_witness(alg, x, args.c)
        row = {"x": "".join(map(str, x)), "p0": res.p0,
               "pos_error": err,
               "pos_error_law": abs(err - res.p0 / (args.c * alg.T)) <= 1e-8}
        if res.p0 > 1e-12:
            omega, _ = qa.build_neg_witness(alg, x, args.c)
            val = qa.neg_witness_value(alg, omega, args.c)
            row["neg_value"] = val
            row["neg_value_law"] = (
                abs(val - (4.0 + args.c) * alg.T / res.p0)
                <= 1e-6 * max(1.0, val))
        checks.append(row)
    return {"size": P.size, "dim_v": P.dim_v, "saved_to": args.out,
            "witness_checks": checks}


def cmd_alg_verify(args) -> dict:
    policy = _policy(args)
    alg = _load(args.file, alg_from_dict)
    n, f = _load(args.table, table_from_dict)
    if n != alg.n:
        raise MalformedProgram("table arity differs from algorithm arity")
    rep = qa.verify_conversion(alg, f, args.c, policy)
    if args.out:
        save_json(args.out, span_to_dict(rep.program))
    return {"one_sided": rep.one_sided, "kappa": rep.kappa,
            "W_minus": rep.W_minus, "W_hat_plus": rep.W_hat_plus,
            "C_kappa": rep.C_kappa, "decides_exactly": rep.decides_exactly,
            "W_minus_cap": 27.0 * alg.T / 2.0,
            "W_hat_plus_cap": 2.0 * alg.T + 2.0,
            "saved_to": args.out}


# -------------------------------------------------------------- mono verbs

def cmd_mono_check(args) -> dict:
    pea = _load(args.file, pea_from_dict)
    return {"monotone": mo.is_monotone(pea, policy=_policy(args))}


def cmd_mono_to_span(args) -> dict:
    pea = _load(args.file, pea_from_dict)
    P = mo.pea_to_span(pea)
    _save_program(args, P)
    return {"size": P.size, "dim_v": P.dim_v, "saved_to": args.out}


def cmd_mono_to_pea(args) -> dict:
    P = _load(args.file, span_from_dict)
    pea, suffix = mo.span_to_pea(P, _policy(args))
    if args.out:
        save_json(args.out, pea_to_dict(pea))
    return {"n": pea.n, "T": pea.T, "M": pea.M, "delta": pea.delta,
            "fixed_suffix": list(suffix), "saved_to": args.out}


def cmd_mono_grover(args) -> dict:
    pea = mo.grover(args.n)
    if args.out:
        save_json(args.out, pea_to_dict(pea))
    return {"n": pea.n, "T": pea.T, "M": pea.M, "delta": pea.delta,
            "saved_to": args.out}


def cmd_mono_verify_bounds(args) -> dict:
    policy = _policy(args)
    pea = _load(args.file, pea_from_dict)
    n, f = _load(args.table, table_from_dict)
    if n != pea.n:
        raise MalformedProgram("table arity differs from algorithm arity")
    rep = mo.verify_pe_bounds(pea, f, policy=policy)
    return {"one_sided": rep.one_sided,
            "zero_input_masses": {"".join(map(str, x)): m
                                  for x, m in rep.zero_input_masses.items()},
            "one_input_masses": {"".join(map(str, x)): m
                                 for x, m in rep.one_input_masses.items()}}


# ---------------------------------------------------------------- lb verbs

def _load_table(path):
    return _load(path, table_from_dict)


def _pm1_table(path) -> bd.BooleanFunctionTable:
    n, f = _load_table(path)
    bits = [f[tuple((z >> i) & 1 for i in range(n))] for z in range(1 << n)]
    return bd.to_pm1(bits, n)


def cmd_lb_fourier(args) -> dict:
    p = _pm1_table(args.table)
    spec = bd.fourier(p)
    return {"m": p.m,
            "coefficients": {format(S, f"0{p.m}b")[::-1]: c
                            for S, c in enumerate(spec.coefficients)},
            "degree": bd.degree(p)}


def cmd_lb_adeg(args) -> dict:
    p = _pm1_table(args.table)
    return {"m": p.m, "eps": args.eps,
            "approx_degree": bd.approx_degree(p, args.eps)}


def cmd_lb_pattern(args) -> dict:
    p = _pm1_table(args.table)
    F = bd.pattern_matrix(p, args.lam)
    return {"shape": list(F.shape),
            "rank": bd.numerical_rank(F, _policy(args)),
            "sherstov_rank": bd.sherstov_rank(p, args.lam)}


def cmd_lb_measure(args) -> dict:
    policy = _policy(args)
    payload = _load(args.matrix, lambda d: d)
    try:
        M = matrix_from_list(payload["M"], bool(payload.get("complex", False)))
        cover = bd.RectangleCover(
            row_masks=tuple(tuple(r) for r in payload["row_masks"]),
            col_masks=tuple(tuple(c) for c in payload["col_masks"]))
    except (KeyError, TypeError) as exc:
        raise MalformedProgram(f"bad measure payload: {exc}")
    if args.kappa > 0.0:
        rep = bd.approx_rank_measure(M, cover, args.kappa,
                                     args.analytic_lower, policy)
        return {"value": rep.value, "interval": rep.interval,
                "details": rep.details}
    rep = bd.rank_measure(M, cover, policy)
    return {"value": rep.value, "details": rep.details}


def _parse_assignments(tokens):
    out = []
    for tok in tokens:
        try:
            s, a = tok.split(":")
            out.append((int(s, 2), int(a, 2)))
        except ValueError:
            raise MalformedProgram(
                f"assignment {tok!r} is not of the form Sbits:alphabits")
    return out


def cmd_lb_certificate(args) -> dict:
    p = _pm1_table(args.table)
    rep = bd.certificate_bound(p, _parse_assignments(args.certs), args.lam,
                               args.kappa, args.eps, _policy(args))
    return {"value": rep.value, "details": rep.details}


def cmd_lb_assignment(args) -> dict:
    p = _pm1_table(args.table)
    rep = bd.assignment_bound(p, _parse_assignments(args.certs), args.lam,
                              args.kappa, args.eps, _policy(args))
    return {"value": rep.value, "details": rep.details}


def cmd_lb_extract(args) -> dict:
    policy = _policy(args)
    P = _load(args.file, span_from_dict)
    n, f = _load(args.table, table_from_dict)
    if n != P.n:
        raise MalformedProgram("table arity differs from program arity")
    lambdas, residual, rank_sum = bd.lambda_extract(P, f, args.kappa, policy)
    return {"residual": residual, "rank_sum": rank_sum, "size": P.size,
            "blocks": {str(j + 1): list(L.shape)
                       for j, L in enumerate(lambdas)}}


# ------------------------------------------------------------ verify verbs

def cmd_verify_all(args) -> dict:
    if args.list:
        return {"criteria": sorted(acceptance.CRITERIA)}
    names = args.only or None
    results = acceptance.run_all(names)
    out = {name: ("pass" if err is None else f"fail: {err}")
           for name, err in results.items()}
    if any(err is not None for err in results.values()):
        raise BoundViolated(json.dumps(out))
    return {"criteria": out, "all_passed": True}


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spanprog",
        description="Span-program toolkit: evaluation, compilation, "
                    "algorithm conversion, and lower-bound machinery.")
    parser.add_argument("--tol-rank", type=float, default=1e-10,
                        help="relative singular-value cutoff for ranks")
    parser.add_argument("--tol-witness", type=float, default=1e-6,
                        help="tolerance for witness equality checks")
    parser.add_argument("--seed", type=int, default=acceptance.SEED)
    parser.add_argument("--out", help="write the report (or emitted file) here")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="group", required=True)

    sp = sub.add_parser("sp", help="span-program operations")
    spsub = sp.add_subparsers(dest="verb", required=True)
    p = spsub.add_parser("eval")
    p.add_argument("file")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--table")
    p.add_argument("--kappa", type=float, default=0.0)
    p.set_defaults(run=cmd_sp_eval)
    p = spsub.add_parser("compile")
    p.add_argument("file")
    p.add_argument("table")
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--reduce", action="store_true")
    p.set_defaults(run=cmd_sp_compile)
    p = spsub.add_parser("scale")
    p.add_argument("file")
    p.add_argument("beta", type=float)
    p.set_defaults(run=cmd_sp_scale)
    for verb, fn in (("normalize", cmd_sp_normalize),
                     ("square", cmd_sp_square),
                     ("realify", cmd_sp_realify)):
        p = spsub.add_parser(verb)
        p.add_argument("file")
        p.set_defaults(run=fn)
    p = spsub.add_parser("reduce")
    p.add_argument("file")
    p.add_argument("table")
    p.add_argument("kappa", type=float)
    p.add_argument("kappa_prime", type=float)
    p.set_defaults(run=cmd_sp_reduce)

    alg = sub.add_parser("alg", help="query-algorithm operations")
    algsub = alg.add_subparsers(dest="verb", required=True)
    p = algsub.add_parser("run")
    p.add_argument("file")
    p.add_argument("inputs", nargs="*")
    p.set_defaults(run=cmd_alg_run)
    p = algsub.add_parser("to-sp")
    p.add_argument("file")
    p.add_argument("--c", type=float, default=5.0)
    p.set_defaults(run=cmd_alg_to_sp)
    p = algsub.add_parser("verify")
    p.add_argument("file")
    p.add_argument("table")
    p.add_argument("--c", type=float, default=5.0)
    p.set_defaults(run=cmd_alg_verify)

    mono = sub.add_parser("mono", help="monotone phase-estimation operations")
    monosub = mono.add_subparsers(dest="verb", required=True)
    p = monosub.add_parser("check")
    p.add_argument("file")
    p.set_defaults(run=cmd_mono_check)
    p = monosub.add_parser("to-span")
    p.add_argument("file")
    p.set_defaults(run=cmd_mono_to_span)
    p = monosub.add_parser("to-pea")
    p.add_argument("file")
    p.set_defaults(run=cmd_mono_to_pea)
    p = monosub.add_parser("grover")
    p.add_argument("n", type=int)
    p.set_defaults(run=cmd_mono_grover)
    p = monosub.add_parser("verify-bounds")
    p.add_argument("file")
    p.add_argument("table")
    p.set_defaults(run=cmd_mono_verify_bounds)

    lb = sub.add_parser("lb", help="lower-bound machinery")
    lbsub = lb.add_subparsers(dest="verb", required=True)
    p = lbsub.add_parser("fourier")
    p.add_argument("table")
    p.set_defaults(run=cmd_lb_fourier)
    p = lbsub.add_parser("adeg")
    p.add_argument("table")
    p.add_argument("eps", type=float)
    p.set_defaults(run=cmd_lb_adeg)
    p = lbsub.add_parser("pattern")
    p.add_argument("table")
    p.add_argument("lam", type=int)
    p.set_defaults(run=cmd_lb_pattern)
    p = lbsub.add_parser("measure")
    p.add_argument("matrix")
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--analytic-lower", type=float, default=0.0)
    p.set_defaults(run=cmd_lb_measure)
    for verb, fn in (("certificate", cmd_lb_certificate),
                     ("assignment", cmd_lb_assignment)):
        p = lbsub.add_parser(verb)
        p.add_argument("table")
        p.add_argument("lam", type=int)
        p.add_argument("kappa", type=float)
        p.add_argument("eps", type=float)
        p.add_argument("certs", nargs="+",
                       help="partial assignments Sbits:alphabits "
                            "(little-endian bitstrings)")
        p.set_defaults(run=fn)
    p = lbsub.add_parser("extract")
    p.add_argument("file")
    p.add_argument("table")
    p.add_argument("--kappa", type=float, default=0.0)
    p.set_defaults(run=cmd_lb_extract)

    ver = sub.add_parser("verify", help="acceptance suite")
    versub = ver.add_subparsers(dest="verb", required=True)
    p = versub.add_parser("all")
    p.add_argument("--list", action="store_true")
    p.add_argument("--only", nargs="*", help="criterion names to run")
    p.set_defaults(run=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = f"{args.group} {args.verb}"
    try:
        result = args.run(args)
    except _IOFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except BoundViolated as exc:
        sys.stderr.write(f"bound violated: {exc}\n")
        return EXIT_BOUND
    except AssertionError as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return EXIT_BOUND
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    saved_file = isinstance(result, dict) and result.get("saved_to")
    if saved_file:
        # --out already holds the emitted artifact; report goes to stdout
        out_backup, args.out = args.out, None
        _emit(args, _report(args, command, result))
        args.out = out_backup
    else:
        _emit(args, _report(args, command, result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
