"""Empirical privacy checks on the queries seen by a coalition of T servers.

The exhaustive audit enumerates every tuple of scrambling matrices and
compares the exact distributions of the coalition's view for each retrieval
index.  The sampled audit hashes the coalition's view of many random queries
to 16 bits and runs a two-sample chi-square test between retrieval indices.
"""

from __future__ import annotations

import hashlib
import itertools
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy import stats

from . import linalg
from .field import element_width
from .plan import QueryPlan, SchemeParams, build_query_plan
from .wire import encode_elements

EXHAUSTIVE_LIMITS = {"q": 2, "L": 3, "M": 2}
HASH_BITS = 16


class AuditError(ValueError):
    pass


@dataclass(frozen=True)
class SubsetResult:
    subset: tuple[int, ...]
    thetas: tuple[int, int]
    passed: bool
    statistic: float = 0.0
    dof: int = 0
    pvalue: float = 1.0
    support: tuple[int, int] = (0, 0)  # distinct views (exhaustive) or occupied bins (sampled)


@dataclass(frozen=True)
class PrivacyAuditReport:
    mode: str
    N: int
    T: int
    M: int
    q: int
    samples: int
    results: tuple[SubsetResult, ...] = dc_field(default=())
    alpha: float = 0.001

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def format(self) -> str:
        lines = [f"privacy audit ({self.mode}) N={self.N} T={self.T} M={self.M} q={self.q} "
                 f"samples/theta={self.samples}"]
        for r in self.results:
            verdict = "identical" if r.passed else "DIFFERENT"
            if self.mode == "exhaustive":
                lines.append(f"  subset {list(r.subset)} theta {r.thetas[0]} vs {r.thetas[1]}: {verdict} "
                             f"({r.support[0]} / {r.support[1]} distinct views)")
            else:
                verdict = "no rejection" if r.passed else "REJECTED"
                lines.append(f"  subset {list(r.subset)} theta {r.thetas[0]} vs {r.thetas[1]}: "
                             f"chi2={r.statistic:.1f} dof={r.dof} p={r.pvalue:.4f} {verdict}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"


def default_subsets(N: int, T: int, count: int = 5) -> list[tuple[int, ...]]:
    """A fixed, evenly spread list of T-subsets (all of them when there are few)."""
    allsub = list(itertools.combinations(range(N), T))
    if len(allsub) <= count:
        return allsub
    idx = sorted({round(i * (len(allsub) - 1) / (count - 1)) for i in range(count)})
    return [allsub[i] for i in idx]


def _check_subsets(params: SchemeParams, subsets) -> list[tuple[int, ...]]:
    if subsets is None or subsets == "all":
        return list(itertools.combinations(range(params.N), params.T))
    out = []
    for s in subsets:
        s = tuple(sorted(int(x) for x in s))
        if len(s) != params.T or len(set(s)) != len(s) or not all(0 <= x < params.N for x in s):
            raise AuditError(f"coalition {s} must be {params.T} distinct servers in [0, {params.N})")
        out.append(s)
    return out


def restricted_columns(plan: QueryPlan, subset: Sequence[int]) -> np.ndarray:
    off = plan.offsets
    return np.concatenate([np.arange(off[j], off[j + 1]) for j in subset])


def all_views(plan: QueryPlan, S: np.ndarray, cols: np.ndarray | None = None) -> np.ndarray:
    """Query coefficients for a batch of secrets S with shape (B, M, L, L).

    Returns (B, slots, M, L) for the slot columns ``cols`` (default: all),
    i.e. exactly the arrays the servers receive.
    """
    P = plan.params
    gf = P.field
    B = S.shape[0]
    maps = plan.coefficient_maps if cols is None else plan.coefficient_maps[:, :, cols]
    width = maps.shape[2]
    out = np.empty((B, width, P.M, P.L), dtype=np.int64)
    for m in range(P.M):
        flat = linalg.matmul(gf, S[:, m].reshape(B * P.L, P.L), maps[m])
        out[:, :, m, :] = flat.reshape(B, P.L, width).transpose(0, 2, 1)
    return out


def restricted_views(plan: QueryPlan, S: np.ndarray, subset: Sequence[int]) -> np.ndarray:
    """What the servers in ``subset`` see, in server then slot order."""
    return all_views(plan, S, restricted_columns(plan, subset))


def _view_bytes(views: np.ndarray, q: int) -> list[bytes]:
    if element_width(q) == 1:
        raw = np.ascontiguousarray(views.astype(np.uint8)).reshape(views.shape[0], -1)
        return [row.tobytes() for row in raw]
    return [encode_elements(v, q) for v in views]


def exhaustive_audit(params: SchemeParams, subsets=None, thetas: Sequence[int] | None = None
                     ) -> PrivacyAuditReport:
    P = params
    if (P.q, P.M) != (EXHAUSTIVE_LIMITS["q"], EXHAUSTIVE_LIMITS["M"]) or P.L > EXHAUSTIVE_LIMITS["L"]:
        raise AuditError(f"exhaustive audit needs q=2, M=2 and L<=3 (got q={P.q} M={P.M} L={P.L})")
    subsets = _check_subsets(P, subsets)
    thetas = list(range(P.M)) if thetas is None else list(thetas)
    gl = linalg.enumerate_invertible(P.field, P.L)
    tuples = np.array(list(itertools.product(range(len(gl)), repeat=P.M)), dtype=np.int64)
    S = gl[tuples]  # (|GL|^M, M, L, L)
    plans = {th: build_query_plan(P, th) for th in set(thetas)}
    results = []
    for sub in subsets:
        dists = {th: Counter(_view_bytes(restricted_views(plans[th], S, sub), P.q)) for th in plans}
        for a, b in itertools.combinations(thetas, 2):
            same = dists[a] == dists[b]
            results.append(SubsetResult(sub, (a, b), same, support=(len(dists[a]), len(dists[b]))))
    return PrivacyAuditReport("exhaustive", P.N, P.T, P.M, P.q, len(S), tuple(results))


def hash_views(views: np.ndarray, q: int, bits: int = HASH_BITS) -> np.ndarray:
    size = (bits + 7) // 8
    out = np.empty(views.shape[0], dtype=np.int64)
    for i, b in enumerate(_view_bytes(views, q)):
        out[i] = int.from_bytes(hashlib.blake2b(b, digest_size=size).digest(), "big")
    return out & ((1 << bits) - 1)


def _histograms(plan: QueryPlan, subsets, samples: int, rng: np.random.Generator,
                chunk: int = 4096) -> dict[tuple[int, ...], np.ndarray]:
    P = plan.params
    hists = {s: np.zeros(1 << HASH_BITS, dtype=np.int64) for s in subsets}
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        S, _ = linalg.sample_invertible_batch(P.field, P.L, b * P.M, rng)
        views = all_views(plan, S.reshape(b, P.M, P.L, P.L))
        for s in subsets:
            h = hash_views(views[:, restricted_columns(plan, s)], P.q)
            hists[s] += np.bincount(h, minlength=1 << HASH_BITS)
        done += b
    return hists


def two_sample_chi2(h1: np.ndarray, h2: np.ndarray) -> tuple[float, int, float]:
    """Chi-square homogeneity test on two histograms; empty bins are dropped."""
    keep = (h1 + h2) > 0
    table = np.vstack([h1[keep], h2[keep]])
    if table.shape[1] < 2:
        return 0.0, 0, 1.0
    stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    return float(stat), int(dof), float(p)


def sampled_audit(params: SchemeParams, subsets=None, samples: int = 100_000, seed: int = 0,
                  thetas: Sequence[int] | None = None, alpha: float = 0.001) -> PrivacyAuditReport:
    """Compare retrieval indices pairwise.  Repeating an index in ``thetas``
    samples it independently, which gives the self-comparison control."""
    P = params
    subsets = default_subsets(P.N, P.T) if subsets is None else _check_subsets(P, subsets)
    thetas = list(range(P.M)) if thetas is None else [int(t) for t in thetas]
    for th in thetas:
        if not 0 <= th < P.M:
            raise AuditError(f"theta {th} out of range")
    plans = {th: build_query_plan(P, th) for th in set(thetas)}
    streams = np.random.SeedSequence(seed).spawn(len(thetas))
    hists = [_histograms(plans[th], subsets, samples, np.random.default_rng(ss))
             for th, ss in zip(thetas, streams)]
    results = []
    for s in subsets:
        for a, b in itertools.combinations(range(len(thetas)), 2):
            stat, dof, p = two_sample_chi2(hists[a][s], hists[b][s])
            occupied = (int(np.count_nonzero(hists[a][s])), int(np.count_nonzero(hists[b][s])))
            results.append(SubsetResult(s, (thetas[a], thetas[b]), p >= alpha, stat, dof, p, occupied))
    return PrivacyAuditReport("sampled", P.N, P.T, P.M, P.q, samples, tuple(results), alpha)
