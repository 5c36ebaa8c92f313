"""Command line front end.

Exit status: 0 success, 1 verification failure, 2 invalid parameters.
Servers, records and coalition members are numbered from 0.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import _backend
from . import array_code as ac
from . import audit, bench, harness
from .field import GF
from .plan import ParameterError, derive_parameters, format_plan_report

OK, FAILED, INVALID = 0, 1, 2

QUOTA_ENUMERATION_LIMIT = 500


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="number of servers N")
    p.add_argument("--t", type=int, required=True, help="collusion threshold T")
    p.add_argument("--m", type=int, required=True, help="number of records M")
    p.add_argument("--q", type=int, default=None, help="field size (default: smallest admissible)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="write a machine-readable result here")


def _parse_subsets(values):
    if not values or values == ["all"]:
        return None if not values else "all"
    return [tuple(int(x) for x in v.split(",")) for v in values]


# -- plan ------------------------------------------------------------------------

def cmd_plan(args) -> int:
    params = derive_parameters(args.n, args.t, args.m, args.q)
    text = format_plan_report(params)
    sys.stdout.write(text)
    if args.out:
        args.out.write_text(text)
    return OK


# -- run -------------------------------------------------------------------------

def _corrupt_hook(args):
    server, slot = (int(x) for x in args.corrupt.split(":"))
    gf = GF(derive_parameters(args.n, args.t, args.m, args.q).q)

    def hook(theta, answers):
        answers[server][slot] = gf.add(int(answers[server][slot]), 1)
        return answers

    return hook


def cmd_run(args) -> int:
    config = harness.RunConfig(args.n, args.t, args.m, args.q, args.seed, args.records,
                               args.mode or "inprocess", args.out)
    hook = _corrupt_hook(args) if args.corrupt else None
    result = harness.run(config, answer_hook=hook)
    sys.stdout.write(result.summary())
    return OK if result.ok else FAILED


# -- verify-code -----------------------------------------------------------------

def _all_quotas(N: int, T: int, ell: int):
    for m in itertools.product(range(ell + 1), repeat=N):
        if sum(m) == T * ell:
            yield m


def _count_quotas(N: int, T: int, ell: int) -> int:
    # coefficient of x^(T*ell) in (1 + x + ... + x^ell)^N
    poly = [1]
    for _ in range(N):
        nxt = [0] * (len(poly) + ell)
        for i, c in enumerate(poly):
            for j in range(ell + 1):
                nxt[i + j] += c
        poly = nxt
    return poly[T * ell]


def random_quota(N: int, T: int, ell: int, rng: np.random.Generator) -> tuple[int, ...]:
    m = [0] * N
    for _ in range(T * ell):
        open_ = [i for i in range(N) if m[i] < ell]
        m[open_[rng.integers(len(open_))]] += 1
    return tuple(m)


def verify_code(G: ac.BlockGenerator, quotas=None, samples: int = 100, seed: int = 0) -> tuple[bool, list[str]]:
    lines = []
    rep = ac.check_mds(G)
    if rep.passed:
        lines.append(f"MDS: pass ({rep.checked} subsets of {G.T} thick columns have rank {G.dim})")
    else:
        bad = " ".join("{" + ",".join(str(i) for i in s) + "}" for s in rep.violations)
        lines.append(f"MDS: FAIL on {len(rep.violations)} of {rep.checked} subsets: {bad}")
    if quotas is None:
        total = _count_quotas(G.N, G.T, G.ell)
        if total <= QUOTA_ENUMERATION_LIMIT:
            quotas = list(_all_quotas(G.N, G.T, G.ell))
            lines.append(f"quotas: all {total}")
        else:
            rng = np.random.default_rng(seed)
            quotas = sorted({random_quota(G.N, G.T, G.ell, rng) for _ in range(samples)})
            lines.append(f"quotas: {len(quotas)} sampled of {total}")
    recovery_ok = True
    cross = 0
    for m in quotas:
        try:
            arr = ac.find_recovery_arrangement(G, m)
        except ac.ArrangementError as exc:
            recovery_ok = False
            lines.append(f"recovery: FAIL for quota {m}: {exc}")
            continue
        if G.length <= 16:
            oracle = ac.brute_force_arrangement(G, m)
            cross += 1
            if oracle is None:
                recovery_ok = False
                lines.append(f"recovery: solver found {arr.subsets} but brute force found none for {m}")
        if len(quotas) <= 3:
            cols = arr.columns(G.ell)
            lines.append(f"recovery: pass for quota {m}: columns {cols}")
    if recovery_ok:
        lines.append(f"recovery: pass for {len(quotas)} quota vectors"
                     + (f" ({cross} cross-checked by brute force)" if cross else ""))
    return rep.passed and recovery_ok, lines


def cmd_verify_code(args) -> int:
    if args.matrix:
        G = ac.parse_generator(Path(args.matrix).read_text())
    else:
        if args.ell is None or args.q is None:
            raise ParameterError("give --matrix or all of --n --t --ell --q")
        G = ac.build_array_code(args.n, args.t, args.ell, args.q)
        sys.stdout.write(f"code: {ac.code_recipe(args.n, args.t, args.ell, args.q).describe()}\n")
    quotas = None
    if args.quota:
        quotas = [tuple(int(x) for x in s.split(",")) for s in args.quota]
    ok, lines = verify_code(G, quotas, seed=args.seed)
    sys.stdout.write(f"generator {G.dim}x{G.length} over GF({G.q}), N={G.N} T={G.T} ell={G.ell}\n")
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stdout.write("PASS\n" if ok else "FAIL\n")
    return OK if ok else FAILED


# -- audit-privacy -----------------------------------------------------------------

def cmd_audit(args) -> int:
    params = derive_parameters(args.n, args.t, args.m, args.q)
    subsets = _parse_subsets(args.subset)
    mode = args.mode or "sampled"
    if mode == "exhaustive":
        report = audit.exhaustive_audit(params, subsets)
    elif mode == "sampled":
        report = audit.sampled_audit(params, None if subsets is None else subsets,
                                     samples=args.samples, seed=args.seed)
    else:
        raise ParameterError(f"unknown audit mode {mode!r}")
    sys.stdout.write(report.format())
    if args.out:
        args.out.write_text(json.dumps({
            "mode": report.mode, "passed": report.passed, "samples": report.samples,
            "results": [{"subset": r.subset, "thetas": r.thetas, "passed": r.passed,
                         "statistic": r.statistic, "dof": r.dof, "pvalue": r.pvalue}
                        for r in report.results],
        }))
    return OK if report.passed else FAILED


# -- bench ---------------------------------------------------------------------------

def cmd_bench(args) -> int:
    names = _backend.available() if args.backend == "all" else [args.backend or _backend.NAME]
    reports = [bench.run_bench(args.n, args.t, args.m, args.q, args.seed, args.repeat, backend=n)
               for n in names]
    for r in reports:
        sys.stdout.write(r.format())
    if len(reports) > 1:
        base = reports[0]
        for r in reports[1:]:
            sys.stdout.write(f"speedup {base.backend} over {r.backend}: " + "  ".join(
                f"{ph} {r.best(ph) / max(base.best(ph), 1e-9):.1f}x" for ph in bench.PHASES) + "\n")
    if args.out:
        args.out.write_text(json.dumps([r.to_dict() for r in reports], indent=1))
    return OK if all(r.ok for r in reports) else FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdspir", description="Multi-server private retrieval "
                                 "that tolerates T colluding servers, built on MDS array codes.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="derive and print scheme parameters")
    _shared(p)
    p.add_argument("--mode", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="end-to-end retrieval of every record")
    _shared(p)
    p.add_argument("--mode", choices=harness.MODES, default="inprocess")
    p.add_argument("--records", type=Path, default=None, help="records file ('q L M' header)")
    p.add_argument("--corrupt", default=None, metavar="SERVER:SLOT",
                   help="test hook: perturb one answer symbol before reconstruction")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify-code", help="check MDS and recovery properties of an array code")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--matrix", type=Path, help="generator file ('N T ell q' header)")
    p.add_argument("--quota", action="append", help="comma separated quota vector (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify_code)

    p = sub.add_parser("audit-privacy", help="compare coalition views across retrieval indices")
    _shared(p)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="sampled")
    p.add_argument("--subset", action="append",
                   help="comma separated coalition, repeatable, or 'all' (default: a fixed list)")
    p.add_argument("--samples", type=int, default=100_000, help="samples per index (sampled mode)")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("bench", help="time every protocol phase")
    _shared(p)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--backend", choices=("cython", "python", "all"), default=None)
    p.add_argument("--mode", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # every input-validation error derives from it
        print(f"error: {exc}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
