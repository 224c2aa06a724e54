"""``ncqh``: verify, fuse, derive ω and pretty-print elements from the command line.

Exit codes: 0 all requested checks passed, 1 a check failed (or ω could not
be derived), 2 usage, configuration or input errors.  Reports are JSON with
sorted keys so that identical inputs give byte-identical files; progress and
timings go to standard error only.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import algebroid, repspace, structures
from .ncalg import ElementSyntaxError, PathAlgebra, parse_element
from .quiver_core import BASIC, QuiverError, parse_quiver, serialize_quiver

CHECKS = ("p1", "p2", "p3", "b1", "b2", "b3", "c", "lemma72", "prop54", "prop74", "thm53", "lemma77", "lemma710", "rep")
NEEDS_OMEGA = {"b1", "b2", "b3", "c", "prop74", "lemma77", "lemma710"}


class UsageError(Exception):
    pass


def _log(msg: str, quiet: bool = False) -> None:
    if not quiet:
        print(msg, file=sys.stderr)


def _load_quiver(path: str | None):
    if path is None:
        return BASIC
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read quiver file: {exc}") from None
    try:
        return parse_quiver(text)
    except QuiverError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _parse_checks(text: str) -> list:
    names = [c.strip().lower() for c in text.split(",") if c.strip()]
    if not names:
        raise UsageError("--checks must name at least one check")
    bad = [c for c in names if c not in CHECKS]
    if bad:
        raise UsageError(f"unknown check {bad[0]!r}; choose from {', '.join(CHECKS)}")
    return list(dict.fromkeys(names))


def _result_doc(r: structures.CheckResult, mode: str = "symbolic") -> dict:
    doc = {"passed": bool(r.passed), "detail": r.detail, "mode": r.data.get("method", mode) if r.data else mode}
    if doc["mode"] == "numeric":
        doc["mode"] = "numeric-fallback"
    return doc


def _rep_campaign(S, Q, alpha, seed: int, samples: int) -> structures.CheckResult:
    alg = S.alg
    rng = random.Random(seed)
    pts = repspace.random_points(alg, alpha, samples, seed)
    failed = []
    ranks = []
    phi = repspace.total_phi(S)
    for k, pt in enumerate(pts):
        x, y = alg.random_element(rng), alg.random_element(rng)
        lhs = repspace.evaluate(x * y, pt)
        if (lhs != repspace.evaluate(x, pt) @ repspace.evaluate(y, pt)).any():
            failed.append(f"homomorphism at point {k}")
        if not repspace.check_gl_action(pt, [x]):
            failed.append(f"gl action at point {k}")
        rk = repspace.nondegeneracy_rank(S, pt, "P3")
        ranks.append(rk["rank"])
        if not rk["full"]:
            failed.append(f"rank {rk['rank']} < {rk['dim']} at point {k}")
        if Q is not None and not repspace.moment_check(S.P, Q.omega, phi, pt)[0]:
            failed.append(f"compatibility at point {k}")
        ok, _ = repspace.check_quasi_jacobi(S, pt, rng, trials=2)
        if not ok:
            failed.append(f"quasi-Jacobi at point {k}")
    data = {"method": "numeric", "ranks": ranks, "retries": [p.retries for p in pts]}
    return structures.CheckResult("rep", not failed, "; ".join(failed), data)


def _run_check(name, S, Q, args, alpha):
    if name == "p1":
        return structures.check_P1(S)
    if name == "p2":
        return structures.check_P2(S)
    if name == "p3":
        return structures.check_P3(S)
    if name == "b1":
        return structures.check_B1(Q)
    if name == "b2":
        return structures.check_B2(Q)
    if name == "b3":
        return structures.check_B3(Q)
    if name == "c":
        return structures.check_C(S.P, Q.omega, Q.phi, Q.phi_inv)
    if name == "lemma72":
        return structures.check_lemma72(S, Q.omega if Q is not None else None)
    if name == "prop54":
        return algebroid.check_prop54(S)
    if name == "prop74":
        return structures.check_prop74(S, Q)
    if name == "thm53":
        return algebroid.check_theorem53(S)
    if name == "lemma77":
        return algebroid.check_lemma77(S, Q)
    if name == "lemma710":
        return algebroid.check_lemma710(S, Q)
    if name == "rep":
        return _rep_campaign(S, Q, alpha, args.seed, args.samples)
    raise UsageError(name)


def cmd_verify(args) -> int:
    q = _load_quiver(args.quiver)
    checks = _parse_checks(args.checks)
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if NEEDS_OMEGA.intersection(checks) and not args.derive_omega:
        raise UsageError("omega required: run omega first or pass --derive-omega")
    S = structures.quiver_qp(q)
    alg = S.alg
    try:
        alpha = repspace.DimensionVector.parse(args.alpha) if args.alpha else repspace.DimensionVector.uniform(alg, 1)
        missing = [p for p in alg.vertices if p not in alpha.alpha]
        if missing:
            raise UsageError(f"--alpha misses vertices {missing}")
    except (ValueError, repspace.RepError) as exc:
        raise UsageError(f"bad --alpha: {exc}") from None
    Q = None
    report = {"quiver": json.loads(serialize_quiver(q)), "seed": args.seed, "alpha": {str(k): v for k, v in sorted(alpha.alpha.items())}, "checks": {}}
    if args.derive_omega:
        try:
            Q = structures.omega_from_P(S)
        except structures.StructureError as exc:
            report["checks"]["omega"] = {"passed": False, "detail": f"NonDegeneracyNotEstablished: {exc}", "mode": "symbolic"}
            _write(report, args.output)
            return 1
    for name in checks:
        t0 = time.perf_counter()
        if name in NEEDS_OMEGA and Q is None:
            res = structures.CheckResult(name, False, "omega unavailable")
        else:
            res = _run_check(name, S, Q, args, alpha)
        _log(f"{name}: {'pass' if res.passed else 'FAIL'} ({time.perf_counter() - t0:.2f}s)", args.quiet)
        report["checks"][name] = _result_doc(res)
    report["passed"] = all(c["passed"] for c in report["checks"].values())
    _write(report, args.output)
    return 0 if report["passed"] else 1


def _write(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_fuse(args) -> int:
    q = _load_quiver(args.quiver)
    if args.v == args.w or args.v not in q.vertices or args.w not in q.vertices:
        raise UsageError(f"cannot fuse vertices {args.v} and {args.w} of a quiver with vertices {list(q.vertices)}")
    S = structures.quiver_qp(q)
    F = structures.fuse_structure(S, args.v, args.w)
    fused = F.alg.dq.base
    if args.output:
        Path(args.output).write_text(serialize_quiver(fused), encoding="utf-8")
    doc = {
        "quiver": json.loads(serialize_quiver(fused)),
        "P": str(F.P),
        "Phi": {str(p): str(F.phi[p]) for p in F.alg.vertices},
        "Phi_inv": {str(p): str(F.phi_inv[p]) for p in F.alg.vertices},
    }
    _write(doc, args.transcript)
    return 0


def cmd_omega(args) -> int:
    q = _load_quiver(args.quiver)
    S = structures.quiver_qp(q)
    if args.bivector is not None:
        try:
            S.P = parse_element(S.alg, args.bivector)
        except ElementSyntaxError as exc:
            raise UsageError(f"--bivector: {exc}") from None
    try:
        Q = structures.omega_from_P(S)
    except structures.StructureError as exc:
        print(f"NonDegeneracyNotEstablished: {exc}", file=sys.stderr)
        return 1
    doc = {"quiver": json.loads(serialize_quiver(q)), "omega": str(Q.omega), "Phi": {str(p): str(Q.phi[p]) for p in Q.alg.vertices}}
    _write(doc, args.output)
    return 0


def cmd_show(args) -> int:
    alg = PathAlgebra(_load_quiver(args.quiver))
    try:
        x = parse_element(alg, args.expression)
    except ElementSyntaxError as exc:
        raise UsageError(str(exc)) from None
    print(str(x))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncqh", description="Quasi-Poisson and quasi-bisymplectic structures on quiver algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run symbolic and numeric checks")
    v.add_argument("-q", "--quiver", help="quiver file (JSON); defaults to the one-arrow quiver")
    v.add_argument("--checks", default="p1,p2,p3", help=f"comma separated subset of {','.join(CHECKS)}")
    v.add_argument("--alpha", help="dimension vector for numeric checks, e.g. 1:2,2:2")
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--samples", type=int, default=3, help="number of random points for numeric checks")
    v.add_argument("-o", "--output", help="report file (default: standard output)")
    v.add_argument("--derive-omega", action="store_true", help="construct ω from P before running ω checks")
    v.add_argument("--quiet", action="store_true", help="no progress on standard error")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fuse", help="fuse two vertices and transport (P, Φ)")
    f.add_argument("-q", "--quiver")
    f.add_argument("v", type=int)
    f.add_argument("w", type=int)
    f.add_argument("-o", "--output", help="write the fused quiver file here")
    f.add_argument("--transcript", help="write the (P, Φ) transcript here (default: standard output)")
    f.set_defaults(func=cmd_fuse)

    o = sub.add_parser("omega", help="derive the compatible 2-form ω")
    o.add_argument("-q", "--quiver")
    o.add_argument("-o", "--output")
    o.add_argument("--bivector", help="replace the quiver bivector by this expression")
    o.set_defaults(func=cmd_omega)

    s = sub.add_parser("show", help="print an element in normal form")
    s.add_argument("expression")
    s.add_argument("-q", "--quiver")
    s.set_defaults(func=cmd_show)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ncqh: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
