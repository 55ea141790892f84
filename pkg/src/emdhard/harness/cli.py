"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 internal invariant violation.  Verdicts go to stdout as JSON, reports
are CSV, logs go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction

from .. import kernels
from ..errors import (
    ArithmeticCapacityError,
    CapacityError,
    InconsistencyError,
    InstanceShapeError,
    InvariantViolation,
    ParameterError,
    PromiseViolation,
)
from ..exact import (
    ReducedExactInstance,
    build_exact_reduction,
    build_lowrank_assignment,
    original_edges,
    recover_closest_pair,
    recover_closest_pair_sq,
)
from ..gadgets import (
    MomGadget,
    SymmetrizedInstance,
    build_mom_gadget,
    decode_mom,
    decode_symmetrized,
    mom_via_emd,
    symmetrize,
)
from ..matching import CostOracle, Matching, asymmetric_emd, emd, sqemd
from ..numeric import as_fraction
from ..ov import (
    FindOvConfig,
    find_ov_oracle,
    find_ov_promise,
    find_ov_sampling,
    hitting_set_phased,
    hs_oracle,
    hs_via_promise_findov,
    mom_oracle,
    ov_oracle,
    ov_via_promise_findov,
)
from ..vectors import PointSetPair
from .bench import BENCH_HEADER, run_bench
from .generators import FAMILIES, GeneratorSpec, generate
from .pipeline import pipeline_hs_via_emd
from .verify import CHECKS, VerificationReport, run_check

log = logging.getLogger("emdhard")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceShapeError(f"{path} is not valid JSON: {exc}") from exc


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
        return
    try:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise ParameterError(f"cannot write {path}: {exc.strerror}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _load_pair(path: str) -> PointSetPair:
    return PointSetPair.from_json_obj(_read_json(path))


def _rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


# ----------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        args.family, args.n, args.d, args.seed, args.density, args.count, args.bound, args.n_right
    )
    _write_text(args.out, generate(spec).to_json())
    return EXIT_OK


def cmd_solve(args) -> int:
    pair = _load_pair(args.inp)
    p = args.problem
    out: dict = {"problem": p}
    if p in ("emd", "asym-emd", "sqemd"):
        fn = {"emd": emd, "asym-emd": asymmetric_emd, "sqemd": sqemd}[p]
        _, m = fn(pair, canonical=not args.fast)
        out["matching"] = m.to_json_obj()
        if args.out:
            _write_text(args.out, _dump(m.to_json_obj()))
    elif p == "ov":
        if args.algo == "appendix-c":
            hit = ov_via_promise_findov(pair, args.delta)
        else:
            hit = ov_oracle(pair)
        out["pair"] = list(hit) if hit else None
    elif p == "hs":
        if args.algo == "phased":
            tr = hitting_set_phased(pair, find_ov_oracle)
            out.update(tr.to_json_obj())
            if args.trace:
                _write_trace(args.trace, tr)
        elif args.algo == "appendix-c":
            out.update(hs_via_promise_findov(pair, args.epsilon, args.seed).to_json_obj())
        else:
            h = hs_oracle(pair)
            out["hitting_id"] = h
            out["verdict"] = "hitting vector exists" if h is not None else "none"
    elif p == "find-ov":
        if args.algo == "sampling":
            res = find_ov_sampling(pair, FindOvConfig(args.alpha, args.seed, args.floor))
        elif args.algo == "appendix-c":
            res = None
            try:
                out["pairs"] = [list(x) for x in find_ov_promise(pair, args.k)]
            except PromiseViolation as exc:
                out["pairs"] = [list(x) for x in exc.partial]
                out["promise_violated"] = True
                _emit(out)
                log.error("promise violated: %s", exc)
                return EXIT_VERIFY
        else:
            res = find_ov_oracle(pair)
        if res is not None:
            out.update(res.to_json_obj())
    elif p == "mom":
        if args.algo == "emd":
            dec = mom_via_emd(pair, "symmetrized")
            out["m"] = dec.orthogonal_count
            out["pi"] = list(dec.pi)
        else:
            m_opt, pi = mom_oracle(pair)
            out["m"] = m_opt
            out["pi"] = list(pi)
    _emit(out)
    return EXIT_OK


def _write_trace(path: str, tr) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("phase", "remaining", "found_copies", "found", "verdict"))
        for ph in tr.phases:
            w.writerow((ph.i, ph.remaining, ph.found_copies, ph.found, ph.verdict))


def _sidecar_path(args) -> str:
    if args.sidecar:
        return args.sidecar
    if not args.out or args.out == "-":
        raise ParameterError("--sidecar is required when the instance goes to stdout")
    return args.out + ".meta.json"


def cmd_reduce(args) -> int:
    pair = _load_pair(args.inp)
    kind = args.reduction
    if kind in ("exact-emd", "lowrank"):
        if kind == "exact-emd":
            inst = build_exact_reduction(pair, args.k, args.mode, args.N)
            meta = {"reduction": kind, **inst.sidecar()}
        else:
            fac, inst = build_lowrank_assignment(pair, args.k, args.mode, args.N)
            meta = {"reduction": kind, **inst.sidecar(), "r": fac.r}
            meta["U"] = [list(r) for r in fac.U]
            meta["V"] = [list(r) for r in fac.V]
        out_pair = inst.pair
    elif kind == "mom-gadget":
        g = build_mom_gadget(pair)
        out_pair, meta = g.pair, {"reduction": kind, **g.sidecar()}
    else:
        s = symmetrize(pair)
        out_pair, meta = s.pair, {"reduction": kind, **s.sidecar()}
    side = _sidecar_path(args)
    _write_text(args.out, out_pair.to_json())
    _write_text(side, _dump(meta))
    _emit({"reduction": kind, "n_left": out_pair.n_left, "n_right": out_pair.n_right, "dim": out_pair.dim, "sidecar": side})
    return EXIT_OK


def cmd_decode(args) -> int:
    pair = _load_pair(args.inp)
    meta = _read_json(args.sidecar)
    m = Matching.from_json_obj(_read_json(args.matching))
    kind = meta.get("reduction")
    out: dict = {"reduction": kind}
    if kind == "exact-emd":
        inst = ReducedExactInstance.from_sidecar(pair, meta)
        cost = CostOracle.euclidean(pair).total(m.pairs)
        lifted = recover_closest_pair(cost, inst, snap=args.snap)
        out["lifted_distance"] = str(lifted)
        out["distance"] = str(lifted / 2)
        out["original_edges"] = [list(e) for e in original_edges(m, inst)]
    elif kind == "lowrank":
        inst = ReducedExactInstance.from_sidecar(pair, meta)
        cost = CostOracle.factorized(meta["U"], meta["V"]).total(m.pairs)
        sq = recover_closest_pair_sq(cost, inst)
        out["lifted_sq_distance"] = sq
        out["sq_distance"] = sq // 4
    elif kind == "symmetrize":
        sym = SymmetrizedInstance.from_sidecar(pair, meta)
        full = Matching(m.pairs, m.cost, "bijection", pair.n_left, pair.n_right)
        report, proj = decode_symmetrized(full, sym)
        out["report"] = report.to_json_obj()
        out["matching"] = proj.to_json_obj()
    elif kind == "mom-gadget":
        g = MomGadget.from_sidecar(pair, meta)
        dec = decode_mom(g, Matching(m.pairs, m.cost, "injection", pair.n_left, pair.n_right))
        out["orthogonal_count"] = dec.orthogonal_count
        out["pi"] = list(dec.pi)
        out["matching"] = dec.matching.to_json_obj()
    else:
        raise ParameterError(f"sidecar names an unknown reduction {kind!r}")
    _emit(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = run_check(args.check, args.trials, args.seed)
    for s, msg in rep.failures[:20]:
        log.error("%s failed (seed %d): %s", args.check, s, msg)
    if args.format == "csv":
        w = csv.writer(sys.stdout)
        w.writerow(VerificationReport.CSV_HEADER)
        w.writerow(rep.csv_row())
    else:
        _emit(rep.to_json_obj())
    if args.report:
        with open(args.report, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(VerificationReport.CSV_HEADER)
            w.writerow(rep.csv_row())
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_pipeline(args) -> int:
    if args.inp:
        pair = _load_pair(args.inp)
    else:
        pair = generate(GeneratorSpec(args.family, args.n, args.d, args.seed, args.density))
    res = pipeline_hs_via_emd(pair, args.seed, args.alpha)
    out = res.to_json_obj()
    oracle = hs_oracle(pair) is not None
    out["oracle_hitting_exists"] = oracle
    out["agrees"] = oracle == res.trace.hitting_exists
    _emit(out)
    if args.trace:
        _write_trace(args.trace, res.trace)
    return EXIT_OK if out["agrees"] else EXIT_VERIFY


def cmd_bench(args) -> int:
    rows = run_bench(args.sizes, args.seed, args.repeat)
    fh = sys.stdout if not args.out or args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(BENCH_HEADER)
    for r in rows:
        w.writerow(r.as_tuple())
    if fh is not sys.stdout:
        fh.close()
    return EXIT_OK if all(r.agree for r in rows) else EXIT_VERIFY


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="emdhard", description="Reductions between EMD and orthogonal vectors problems.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--density", type=_rational, default=Fraction(1, 2))
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--bound", type=int)
    g.add_argument("--n-right", type=int)
    g.add_argument("--out", default="-")
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("problem", choices=("emd", "asym-emd", "sqemd", "ov", "hs", "find-ov", "mom"))
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", help="matching JSON (EMD problems)")
    s.add_argument("--algo", choices=("oracle", "sampling", "phased", "appendix-c", "emd"), default="oracle")
    s.add_argument("--alpha", type=_rational, default=Fraction(1, 2))
    s.add_argument("--delta", type=_rational, default=Fraction(1, 2))
    s.add_argument("--epsilon", type=_rational, default=Fraction(7, 10))
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--floor", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--fast", action="store_true", help="skip lexicographic tie-breaking")
    s.add_argument("--trace", help="per-phase CSV (hs --algo phased)")
    s.set_defaults(fn=cmd_solve)

    r = sub.add_parser("reduce", help="build a reduced instance plus sidecar")
    r.add_argument("reduction", choices=("exact-emd", "lowrank", "mom-gadget", "symmetrize"))
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out", default="-")
    r.add_argument("--sidecar")
    r.add_argument("--k", type=_rational, default=Fraction(1))
    r.add_argument("--mode", choices=("desk", "paper"), default="desk")
    r.add_argument("--N", type=int)
    r.set_defaults(fn=cmd_reduce)

    d = sub.add_parser("decode", help="map a matching on a reduced instance back")
    d.add_argument("--in", dest="inp", required=True, help="reduced instance")
    d.add_argument("--sidecar", required=True)
    d.add_argument("--matching", required=True)
    d.add_argument("--snap", action="store_true", help="round the recovered squared distance")
    d.set_defaults(fn=cmd_decode)

    v = sub.add_parser("verify", help="run a named invariant suite")
    v.add_argument("check", choices=CHECKS)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.add_argument("--report", help="CSV report path")
    v.set_defaults(fn=cmd_verify)

    p = sub.add_parser("pipeline", help="hitting set through the full EMD stack")
    p.add_argument("--in", dest="inp")
    p.add_argument("--family", choices=FAMILIES, default="uniform-binary")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--density", type=_rational, default=Fraction(1, 2))
    p.add_argument("--alpha", type=_rational, default=Fraction(1, 4))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace")
    p.set_defaults(fn=cmd_pipeline)

    b = sub.add_parser("bench", help="compiled vs fallback kernels (CSV)")
    b.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        return args.fn(args)
    except (ParameterError, InstanceShapeError, ArithmeticCapacityError, CapacityError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (InconsistencyError, PromiseViolation) as exc:
        log.error("verification failed: %s", exc)
        return EXIT_VERIFY
    except InvariantViolation as exc:
        log.error("internal invariant violated: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
