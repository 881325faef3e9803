"""Command-line entry point: ``beatty <command> ...`` or ``python -m beatty``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import identities
from .errors import BeattyError
from .jumps import FrequencyConfig, recover_linear
from .nested import empirical_moments, recover_nested
from .primes import PrimalityConfig
from .product import recover_product
from .reals import DEFAULT_PRECISION_CAP, parse_real_list
from .seqgen import IntegerSequence, ParameterVector, gen_linear_sum, gen_nested, gen_poly_of_floors
from .symmetric import SymmetricForm, recover_symmetric

FAMILIES = ("linear", "poly", "product", "symmetric", "nested")


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.rpartition(":")
    if not sep:
        raise argparse.ArgumentTypeError("range must look like LO:HI")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None


def _fractions(text: str) -> list[Fraction]:
    return [Fraction(t.strip()) for t in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beatty", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="seed for randomized primality rounds")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a sequence file")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--alphas", required=True, help='comma-separated reals, e.g. "sqrt(2),sqrt(3)"')
    g.add_argument("--gammas", help="shifts for the linear family")
    g.add_argument("--poly", help="classical polynomial K for the poly family, or R added to S for symmetric")
    g.add_argument("--form", help="symmetric form: product:d, powersum:d:r, quadratic:d")
    g.add_argument("--n", type=int, required=True, dest="N")
    g.add_argument("--out", required=True)
    g.add_argument("--workers", type=int, default=1)

    r = sub.add_parser("recover", help="recover parameters from a sequence file")
    r.add_argument("--family", choices=("linear", "product", "symmetric", "nested"), required=True)
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out", help="JSON report path (default: stdout only)")
    r.add_argument("--d", type=int)
    r.add_argument("--form")
    r.add_argument("--gammas", action="store_true", help="also recover shifts (linear)")
    r.add_argument("--alphas", help="known alphas for shift recovery (linear)")
    r.add_argument("--method", default="jumps", choices=("jumps", "hamming", "moments"),
                   help="nested-floor route")
    r.add_argument("--window", type=_range, help="index window LO:HI for symmetric jumps")
    r.add_argument("--cluster-gap", type=float, help="split threshold for symmetric clustering")
    r.add_argument("--mr-rounds", type=int, default=40)
    r.add_argument("--branch", type=int, choices=(-1, 1), help="force the d=3 moment branch sign")

    v = sub.add_parser("verify", help="check an identity on a range, or decide a rational nested pair")
    v.add_argument("--lhs")
    v.add_argument("--rhs")
    v.add_argument("--range", type=_range, default=(-1000, 1000))
    v.add_argument("--rational", nargs=2, metavar=("A", "B"), help='two lists like "3/7,2/9"')
    v.add_argument("--precision-cap", type=int, default=DEFAULT_PRECISION_CAP)
    v.add_argument("--out")

    s = sub.add_parser("search-collisions", help="census of rational nested-floor collisions")
    s.add_argument("--max-den", type=int, required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--include-trivial", action="store_true")
    s.add_argument("--out")

    m = sub.add_parser("moments", help="empirical deficit moments of a nested sequence")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--d", type=int, required=True)
    m.add_argument("--ks", default="1,2,3")
    m.add_argument("--method", default="lsq", choices=("lsq", "endpoint"))
    m.add_argument("--out")
    return p


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _generate(a) -> int:
    alphas = parse_real_list(a.alphas)
    if a.family == "linear":
        gammas = parse_real_list(a.gammas) if a.gammas else ()
        seq = gen_linear_sum(ParameterVector(tuple(alphas), tuple(gammas)), a.N, a.workers)
    elif a.family == "nested":
        seq = gen_nested(alphas, a.N, a.workers)
    else:
        if a.family == "product":
            K = "*".join(f"x{i}" for i in range(1, len(alphas) + 1))
        elif a.family == "symmetric":
            if not a.form:
                raise SystemExit("generate --family symmetric needs --form")
            K = SymmetricForm.parse(a.form).polynomial() + (f" + {a.poly}" if a.poly else "")
        else:
            if not a.poly:
                raise SystemExit("generate --family poly needs --poly")
            K = a.poly
        seq = gen_poly_of_floors(K, alphas, a.N, a.workers)
        seq.meta["family"] = a.family
        if a.form:
            seq.meta["form"] = a.form
    seq.write(a.out)
    print(f"wrote {len(seq)} terms to {a.out}")
    return 0


def _recover(a) -> int:
    seq = IntegerSequence.read(a.inp)
    d = a.d
    if a.family == "symmetric":
        form = SymmetricForm.parse(a.form or seq.meta.get("form", ""))
        res = recover_symmetric(seq, form, window=a.window, gap=a.cluster_gap)
    else:
        if d is None:
            raise SystemExit("recover needs --d")
        if a.family == "linear":
            alphas = parse_real_list(a.alphas) if a.alphas else None
            res = recover_linear(seq, d, gammas=a.gammas, alphas=alphas, cfg=FrequencyConfig())
        elif a.family == "product":
            res = recover_product(seq, d, PrimalityConfig(miller_rabin_rounds=a.mr_rounds, seed=a.seed))
        else:
            res = recover_nested(seq, d, a.method, branch=a.branch)
    _emit(res.to_json(), a.out)
    return 0


def _verify(a) -> int:
    if a.rational:
        rep = identities.rational_nested_equiv(_fractions(a.rational[0]), _fractions(a.rational[1]))
    else:
        if not (a.lhs and a.rhs):
            raise SystemExit("verify needs --lhs and --rhs, or --rational A B")
        lo, hi = a.range
        rep = identities.verify_range(a.lhs, a.rhs, lo, hi, max_p=a.precision_cap)
    _emit(rep.to_json(), a.out)
    print(rep.verdict, file=sys.stderr)
    return 0 if rep.holds else 1


def _search(a) -> int:
    pairs = identities.search_collisions(a.max_den, a.d, a.include_trivial)
    _emit([c.to_json() for c in pairs], a.out)
    print(f"{len(pairs)} collisions", file=sys.stderr)
    return 0


def _moments(a) -> int:
    seq = IntegerSequence.read(a.inp)
    ks = tuple(int(k) for k in a.ks.split(","))
    _emit(empirical_moments(seq, a.d, ks, a.method).to_json(), a.out)
    return 0


COMMANDS = {
    "generate": _generate,
    "recover": _recover,
    "verify": _verify,
    "search-collisions": _search,
    "moments": _moments,
}


def _glue_ranges(argv):
    # "--range -5:5" would otherwise read the negative bound as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--range", "--window"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_ranges(argv))
    try:
        return COMMANDS[args.command](args)
    except (BeattyError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
