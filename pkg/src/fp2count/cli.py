"""Command-line surface: count, classify, family, search, bench.

Exit codes: 0 success, 2 usage error (argparse), 3 engine/computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from multiprocessing import Pool
from typing import List, Optional, Tuple

from .curve import Curve, TraceResult
from .engine import EngineConfig, admissible_trace, sea_trace
from .errors import Fp2CountError, SupersingularInputError, TableExhaustedError
from .field import FieldCtx, field_ctx, is_probable_prime
from .isogeny import AdmissiblePair, hasegawa_curve
from .modpoly import ModPolyTable, classify_prime, default_table


@dataclass
class SearchPolicy:
    """Secure-curve search policy: cofactor targets and congruence filters."""

    cofactor: int = 2
    twist_cofactor: int = 2
    twist_secure: bool = False

    def __post_init__(self):
        if self.cofactor < 1 or self.twist_cofactor < 1:
            raise ValueError("cofactors must be >= 1")


def _add_common(sub):
    sub.add_argument("--p", required=True, help="base prime (decimal or 0x hex)")
    sub.add_argument("--delta", default=None,
                     help="nonresidue for F_p(sqrt(delta)); default: smallest")
    sub.add_argument("--modpoly-path", default=None,
                     help="directory or file overriding the bundled tables")
    sub.add_argument("--seed", type=int, default=0xC0DE)


def _add_engine_opts(sub):
    sub.add_argument("--engine", choices=("sea", "admissible", "both"),
                     default="both")
    sub.add_argument("--use-atkin", action="store_true",
                     help="enable the full-torsion Atkin fallback")
    sub.add_argument("--atkin-cap", type=int, default=13)
    sub.add_argument("--bsgs-threshold", type=int, default=None,
                     help="stop the admissible loop at this modulus and "
                          "finish with BSGS")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fp2count",
        description="Point counting for elliptic curves over F_{p^2}")
    subs = ap.add_subparsers(dest="command", required=True)

    c = subs.add_parser("count", help="count points on one curve")
    _add_common(c)
    _add_engine_opts(c)
    c.add_argument("--family", choices=("hasegawa",), default=None)
    c.add_argument("--s", default=None, help="family parameter in F_p")
    c.add_argument("--A", default=None, help="curve A as 'a+b*w'")
    c.add_argument("--B", default=None, help="curve B as 'a+b*w'")
    c.add_argument("--curve", default=None,
                   help='JSON record {"p": .., "delta": .., "A": .., "B": ..}')
    c.add_argument("--csv", action="store_true")

    cl = subs.add_parser("classify", help="prime classification table")
    _add_common(cl)
    cl.add_argument("--family", choices=("hasegawa",), default=None)
    cl.add_argument("--s", default=None)
    cl.add_argument("--A", default=None)
    cl.add_argument("--B", default=None)
    cl.add_argument("--lmax", type=int, default=31)
    cl.add_argument("--csv", action="store_true")

    f = subs.add_parser("family", help="emit a family curve and its isogeny")
    _add_common(f)
    f.add_argument("--s", required=True)

    s = subs.add_parser("search", help="search for secure curves")
    _add_common(s)
    _add_engine_opts(s)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--s-range", default="1:100",
                   help="family parameter range a:b (half-open)")
    s.add_argument("--cofactor", type=int, default=2)
    s.add_argument("--twist-cofactor", type=int, default=2)
    s.add_argument("--twist-secure", action="store_true")
    s.add_argument("--no-abort-filters", action="store_true",
                   help="disable the early-abort residue filters")
    s.add_argument("--force-ell-on-r", type=int, default=None,
                   help="only keep curves where this ell divides r "
                        "(volcanic prefilter; off by default)")
    s.add_argument("--jobs", type=int, default=1)

    b = subs.add_parser("bench", help="compare the two engines on a family sweep")
    _add_common(b)
    _add_engine_opts(b)
    b.add_argument("--s-range", default="1:11")
    b.add_argument("--csv", action="store_true")
    return ap


def _ctx_from(args) -> FieldCtx:
    return field_ctx(args.p, args.delta)


def _curve_from(args, ctx: FieldCtx) -> Tuple[Curve, Optional[AdmissiblePair]]:
    if getattr(args, "curve", None):
        rec = json.loads(args.curve)
        ctx = field_ctx(str(rec["p"]), str(rec.get("delta"))
                        if rec.get("delta") is not None else None)
        A = ctx.parse(str(rec["A"]))
        B = ctx.parse(str(rec["B"]))
        return Curve(A, B, ctx), None
    if args.family == "hasegawa":
        if args.s is None:
            raise Fp2CountError("--family hasegawa requires --s")
        pair = hasegawa_curve(ctx, int(args.s, 0))
        return pair.E, pair
    if args.A is None or args.B is None:
        raise Fp2CountError("need --family/--s, --curve, or --A and --B")
    return Curve(ctx.parse(args.A), ctx.parse(args.B), ctx), None


def _engine_config(args) -> EngineConfig:
    table = ModPolyTable(args.modpoly_path) if args.modpoly_path else None
    return EngineConfig(
        use_atkin_fallback=getattr(args, "use_atkin", False),
        atkin_ell_cap=getattr(args, "atkin_cap", 13),
        bsgs_finish_threshold=getattr(args, "bsgs_threshold", None),
        seed=args.seed,
        table=table,
    )


def _report_result(name: str, res: TraceResult, ctx: FieldCtx, csv: bool):
    if csv:
        print(f"{name},t,{res.t}")
        if res.r is not None:
            print(f"{name},r,{res.r}")
            print(f"{name},eps,{res.eps}")
        print(f"{name},card,{res.card}")
        print(f"{name},twist_card,{res.twist_card}")
        for (r, m, tag) in res.residues:
            print(f"{name},residue,{m},{r},{tag}")
        return
    print(f"[{name}]")
    print(f"  t  = {res.t}")
    if res.r is not None:
        print(f"  r  = {res.r}  (d = {res.d}, eps = {res.eps:+d})")
    print(f"  #E  = {res.card}")
    print(f"  #E' = {res.twist_card}")
    if res.residues:
        print("  residues:")
        for (r, m, tag) in res.residues:
            print(f"    mod {m:>4}: {r:>4}  ({tag})")
    st = res.stats
    if "total_time" in st:
        print(f"  time: {st['total_time']:.3f}s"
              f" (X^q stage {st.get('xq_time', 0.0):.3f}s,"
              f" max ell {st.get('max_ell')}, {st.get('n_primes')} primes)")
    if st.get("supersingular"):
        print("  supersingular curve (r = 0 closed form)")


def cmd_count(args) -> int:
    ctx = _ctx_from(args)
    E, pair = _curve_from(args, ctx)
    ctx = E.ctx
    cfg = _engine_config(args)
    print(f"curve: {E.serialize()}")
    print(f"j(E) = {ctx.fmt(E.j_invariant())}")
    results = {}
    if args.engine in ("sea", "both"):
        try:
            results["sea"] = sea_trace(E, cfg)
        except SupersingularInputError as exc:
            results["sea"] = exc.result
    if args.engine in ("admissible", "both"):
        if pair is None:
            from .isogeny import d_isogenies_to_conjugate, make_admissible
            from .errors import NotAdmissibleError
            pair = None
            for d in (2, 3, 5, 7):
                for phi in d_isogenies_to_conjugate(E, d):
                    try:
                        pair = make_admissible(E, phi)
                        break
                    except NotAdmissibleError:
                        continue
                if pair:
                    break
            if pair is None:
                print("curve is not d-admissible for d in {2, 3, 5, 7}; "
                      "admissible engine skipped")
        if pair is not None:
            try:
                results["admissible"] = admissible_trace(pair, cfg)
            except SupersingularInputError as exc:
                results["admissible"] = exc.result
    for name, res in results.items():
        _report_result(name, res, ctx, args.csv)
    if len(results) == 2:
        a, b = results["sea"], results["admissible"]
        agree = a.t == b.t
        print(f"engines agree: {agree}")
        if not agree:
            return 3
    return 0


def cmd_classify(args) -> int:
    ctx = _ctx_from(args)
    E, _ = _curve_from(args, ctx)
    table = ModPolyTable(args.modpoly_path) if args.modpoly_path \
        else default_table()
    if args.csv:
        print("ell,class,deg_j")
    for ell in table.levels():
        if ell > args.lmax:
            break
        if ell == E.ctx.p:
            continue
        try:
            pc = classify_prime(ell, E, table)
            tag, deg = pc.tag, pc.deg_j
        except Fp2CountError as exc:
            tag, deg = f"unexpected({exc})", -1
        if args.csv:
            print(f"{ell},{tag},{deg}")
        else:
            print(f"ell = {ell:>4}: {tag} (deg J = {deg})")
    return 0


def cmd_family(args) -> int:
    ctx = _ctx_from(args)
    pair = hasegawa_curve(ctx, int(args.s, 0))
    E = pair.E
    print(f"curve: {E.serialize()}")
    print(f"j(E) = {ctx.fmt(E.j_invariant())}")
    print(f"d = {pair.d}, eps = {pair.eps:+d}")
    step = pair.phi.steps[0]
    print(f"phi: E -> sigma(E), kernel D(x) = {_poly_str(step.D, ctx)}")
    print(f"  N(x) = {_poly_str(step.N, ctx)}")
    print(f"  M(x) = {_poly_str(step.M, ctx)}")
    return 0


def _poly_str(f, ctx) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for i, c in enumerate(f.c):
        if c != (0, 0):
            cs = ctx.fmt(c)
            parts.append(cs if i == 0 else
                         (f"({cs})*x" if i == 1 else f"({cs})*x^{i}"))
    return " + ".join(parts)


def _search_one(task) -> Optional[dict]:
    (p, delta, s, d, policy, use_filters, force_ell,
     seed, modpoly_path) = task
    cof, tcof, twist_secure = (policy.cofactor, policy.twist_cofactor,
                               policy.twist_secure)
    ctx = field_ctx(p, delta)
    if d != 2:
        raise Fp2CountError("search currently generates the d = 2 family")
    try:
        pair = hasegawa_curve(ctx, s)
    except Fp2CountError:
        return None
    eps = pair.eps
    # congruence pre-filters: d | #E iff p = -eps (mod d), and the twist
    # analogue with eps negated
    if p % d == (-eps) % d and cof % d != 0:
        return None
    if twist_secure and p % d == eps % d and tcof % d != 0:
        return None
    if force_ell is not None:
        from .modpoly import classify_prime as _cp
        pc = _cp(force_ell, pair.E)
        if pc.deg_j not in (1, force_ell + 1):
            return None
    q = p * p

    def abort_filter(ell: int, r_ell: int, _tag: str) -> bool:
        if not use_filters:
            return True
        if cof % ell != 0 \
                and (p + eps) ** 2 % ell == eps * d * r_ell * r_ell % ell:
            return False
        if twist_secure and tcof % ell != 0 \
                and (p - eps) ** 2 % ell == (-eps * d) * r_ell * r_ell % ell:
            return False
        return True

    cfg = EngineConfig(seed=seed, residue_callback=abort_filter,
                       table=ModPolyTable(modpoly_path) if modpoly_path
                       else None)
    try:
        res = admissible_trace(pair, cfg)
    except SupersingularInputError:
        return None
    except TableExhaustedError:
        return None  # cannot settle this curve; skip it
    if res.stats.get("aborted"):
        return None
    if res.card % cof:
        return None
    n = res.card // cof
    if not is_probable_prime(n):
        return None
    record = {
        "s": s, "p": p, "delta": ctx.delta, "d": d, "eps": eps,
        "t": res.t, "r": res.r, "card": res.card, "cofactor": cof,
        "n": n, "twist_card": res.twist_card,
        "cofactor_factors": _tiny_factor(cof),
    }
    if twist_secure:
        if res.twist_card % tcof:
            return None
        n2 = res.twist_card // tcof
        if not is_probable_prime(n2):
            return None
        record["twist_cofactor"] = tcof
        record["n_twist"] = n2
    return record


def _tiny_factor(c: int) -> List[int]:
    out = []
    f = 2
    while f * f <= c:
        while c % f == 0:
            out.append(f)
            c //= f
        f += 1
    if c > 1:
        out.append(c)
    return out


def cmd_search(args) -> int:
    ctx = _ctx_from(args)
    p = ctx.p
    lo, hi = (int(x, 0) for x in args.s_range.split(":"))
    policy = SearchPolicy(cofactor=args.cofactor,
                          twist_cofactor=args.twist_cofactor,
                          twist_secure=args.twist_secure)
    tasks = [(p, ctx.delta, s, args.d, policy,
              not args.no_abort_filters,
              args.force_ell_on_r, args.seed, args.modpoly_path)
             for s in range(lo, hi)]
    found = 0
    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            for rec in pool.imap(_search_one, tasks):
                if rec:
                    print(json.dumps(rec))
                    found += 1
    else:
        for task in tasks:
            rec = _search_one(task)
            if rec:
                print(json.dumps(rec))
                found += 1
    print(f"# searched s in [{lo}, {hi}), found {found}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    ctx = _ctx_from(args)
    lo, hi = (int(x, 0) for x in args.s_range.split(":"))
    cfg = _engine_config(args)
    rows = []
    for s in range(lo, hi):
        try:
            pair = hasegawa_curve(ctx, s)
        except Fp2CountError:
            continue
        try:
            r_adm = admissible_trace(pair, cfg)
            r_sea = sea_trace(pair.E, cfg)
        except (SupersingularInputError, TableExhaustedError):
            continue
        if r_sea.t != r_adm.t:
            print(f"# DISAGREEMENT at s = {s}", file=sys.stderr)
            return 3
        rows.append((s, r_sea.stats, r_adm.stats))
    if not rows:
        print("no ordinary curves in range", file=sys.stderr)
        return 3
    hdr = ("s", "sea_max_ell", "sea_nprimes", "sea_xq_time", "sea_total",
           "adm_max_ell", "adm_nprimes", "adm_xq_time", "adm_total")
    if args.csv:
        print(",".join(hdr))
    else:
        print(f"{'s':>6} | {'max ell':>8} {'X^q t':>8} {'total':>8} |"
              f" {'max ell':>8} {'X^q t':>8} {'total':>8}")
        print(f"{'':>6} | {'Alg 1 (SEA)':^26} | {'Alg 2 (admissible)':^26}")
    for (s, st1, st2) in rows:
        vals = (s, st1["max_ell"], st1["n_primes"], f"{st1['xq_time']:.3f}",
                f"{st1['total_time']:.3f}", st2["max_ell"], st2["n_primes"],
                f"{st2['xq_time']:.3f}", f"{st2['total_time']:.3f}")
        if args.csv:
            print(",".join(str(v) for v in vals))
        else:
            print(f"{s:>6} | {vals[1]:>8} {vals[3]:>8} {vals[4]:>8} |"
                  f" {vals[5]:>8} {vals[7]:>8} {vals[8]:>8}")
    n = len(rows)
    avg = lambda idx, key: sum(r[idx][key] for r in rows) / n  # noqa: E731
    sea_t, adm_t = avg(1, "total_time"), avg(2, "total_time")
    summary = {
        "curves": n,
        "sea_avg_max_ell": avg(1, "max_ell"),
        "adm_avg_max_ell": avg(2, "max_ell"),
        "sea_avg_nprimes": avg(1, "n_primes"),
        "adm_avg_nprimes": avg(2, "n_primes"),
        "sea_avg_xq_time": round(avg(1, "xq_time"), 4),
        "adm_avg_xq_time": round(avg(2, "xq_time"), 4),
        "sea_avg_total": round(sea_t, 4),
        "adm_avg_total": round(adm_t, 4),
        "speedup": round(sea_t / adm_t, 3) if adm_t else float("inf"),
    }
    print(("# " if not args.csv else "") + json.dumps(summary))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        handler = {
            "count": cmd_count,
            "classify": cmd_classify,
            "family": cmd_family,
            "search": cmd_search,
            "bench": cmd_bench,
        }[args.command]
        return handler(args)
    except Fp2CountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
