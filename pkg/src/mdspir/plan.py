"""Scheme constants and the public slot layout of a query.

Servers, records and slots are 0-based throughout.  ``k`` always denotes a
support size and runs from 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import array_code as ac
from .array_code import BlockGenerator, CodeRecipe
from .field import MAX_ORDER, GF, GaloisField, is_prime_power, iter_prime_powers


class ParameterError(ValueError):
    pass


def capacity(N: int, T: int, M: int) -> Fraction:
    """(1 - T/N) / (1 - (T/N)^M) as an exact rational."""
    if not N > T >= 1:
        raise ParameterError(f"need N > T >= 1, got N={N} T={T}")
    if M < 1:
        raise ParameterError("need M >= 1")
    r = Fraction(T, N)
    return (1 - r) / (1 - r**M)


def minimal_binary_M(N: int, T: int) -> int | None:
    """Smallest M with M >= 2 + ceil(log_mu log_2 N), or None when mu <= 1."""
    d = math.gcd(N, T)
    n, t = N // d, T // d
    mu = min(t, n - t)
    if mu <= 1:
        return None
    j = 0
    # ceil(log_mu(log2 N)) is the least j with 2^(mu^j) >= N
    while 2 ** (mu**j) < N:
        j += 1
    return 2 + j


def ell_values(N: int, T: int, M: int) -> tuple[int, ...]:
    d = math.gcd(N, T)
    n, t = N // d, T // d
    return tuple((n - t) ** (k - 1) * t ** (M - 1 - k) for k in range(1, M))


def solve_alpha_beta(N: int, T: int, M: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Per-server sum counts for servers < T (alpha) and >= T (beta).

    Scans alpha_1 upward and returns the first solution of
    alpha_k + alpha_{k+1} = ell_k, beta_k + beta_{k+1} = ell_k and
    T*alpha_k + (N-T)*beta_k = T*ell_k in nonnegative integers.
    """
    d = math.gcd(N, T)
    n, t = N // d, T // d
    ell = ell_values(N, T, M)
    for a1 in range(ell[0] + 1):
        alpha = [a1]
        for k in range(M - 1):
            alpha.append(ell[k] - alpha[k])
        if min(alpha) < 0:
            continue
        beta = []
        for k in range(M - 1):
            num = t * alpha[k + 1]
            if num % (n - t):
                break
            beta.append(num // (n - t))
        else:
            beta.append(ell[M - 2] - beta[M - 2])
            if min(beta) < 0:
                continue
            ok = all(beta[k] + beta[k + 1] == ell[k] for k in range(M - 1)) and all(
                T * alpha[k] + (N - T) * beta[k] == T * ell[k] for k in range(M - 1)
            )
            if ok:
                return tuple(alpha), tuple(beta)
    raise ParameterError(f"no nonnegative integer sum counts for N={N} T={T} M={M}")


def _check_counts(N: int, T: int, M: int) -> None:
    if not N > T >= 1:
        raise ParameterError(f"need N > T >= 1, got N={N} T={T}")
    if M < 2:
        raise ParameterError("need M >= 2 records (a single record needs no private retrieval)")


def minimal_q(N: int, T: int, M: int) -> int:
    """Smallest prime power for which every (N,T;ell_k) code can be built."""
    _check_counts(N, T, M)
    for q in iter_prime_powers(MAX_ORDER):
        if all(ac.code_recipe(N, T, e, q) is not None for e in ell_values(N, T, M)):
            return q
    raise ParameterError("no admissible field size")  # pragma: no cover


def array_field_bound(N: int, T: int, M: int) -> tuple[int, int]:
    """(ell, least prime power q with q^ell >= N) for ell = min(t^(M-2), (n-t)^(M-2))."""
    d = math.gcd(N, T)
    n, t = N // d, T // d
    ell = min(t ** (M - 2), (n - t) ** (M - 2))
    q = next(q for q in iter_prime_powers() if q**ell >= N)
    return ell, q


@dataclass(frozen=True)
class SchemeParams:
    N: int
    T: int
    M: int
    q: int
    d: int
    n: int
    t: int
    ell: tuple[int, ...]
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    L: int
    D: int
    downloads: tuple[int, ...]
    capacity: Fraction
    recipes: tuple[CodeRecipe, ...]

    @property
    def rate(self) -> Fraction:
        return Fraction(self.L, self.D)

    @property
    def field(self) -> GaloisField:
        return GF(self.q)

    def ell_k(self, k: int) -> int:
        return self.ell[k - 1]

    def gamma(self, server: int, k: int) -> int:
        """Number of sums with a given k-subset support at ``server``."""
        return self.alpha[k - 1] if server < self.T else self.beta[k - 1]

    def quota(self, k: int) -> tuple[int, ...]:
        return tuple(self.gamma(i, k) for i in range(self.N))

    @property
    def fresh_per_interferer(self) -> int:
        return sum(math.comb(self.M - 2, k - 1) * self.T * self.ell[k - 1] for k in range(1, self.M))


def derive_parameters(N: int, T: int, M: int, q: int | None = None) -> SchemeParams:
    _check_counts(N, T, M)
    if q is None:
        q = minimal_q(N, T, M)
    if not is_prime_power(q) or q > MAX_ORDER:
        raise ParameterError(f"q={q} is not a supported prime power")
    d = math.gcd(N, T)
    n, t = N // d, T // d
    ell = ell_values(N, T, M)
    alpha, beta = solve_alpha_beta(N, T, M)
    recipes = []
    for e in ell:
        r = ac.code_recipe(N, T, e, q)
        if r is None:
            raise ParameterError(
                f"q={q} is too small for an ({N},{T};{e}) MDS array code "
                f"(smallest admissible q is {minimal_q(N, T, M)})")
        recipes.append(r)
    downloads = tuple(
        sum(math.comb(M, k) * (alpha[k - 1] if i < T else beta[k - 1]) for k in range(1, M + 1))
        for i in range(N)
    )
    D = sum(downloads)
    L = N * n ** (M - 2)
    desired = T * ell[0] + sum(math.comb(M - 1, k) * T * ell[k] for k in range(1, M - 1))
    desired += T * alpha[M - 1] + (N - T) * beta[M - 1]
    if desired != L:
        raise ParameterError(f"desired-symbol count {desired} differs from L={L}")
    cap = capacity(N, T, M)
    if Fraction(L, D) != cap:
        raise ParameterError(f"rate {L}/{D} differs from capacity {cap}")
    return SchemeParams(N, T, M, q, d, n, t, ell, alpha, beta, L, D, downloads, cap, tuple(recipes))


# -- query plan ----------------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    server: int
    support: tuple[int, ...]
    group: int
    coord: int
    desired: int | None


@dataclass(frozen=True, eq=False)
class CodeGroup:
    """All sums whose interference comes from the records in ``others``.

    Group 0 (``others == ()``) holds the pure desired sums and has no code.
    """

    others: tuple[int, ...]
    code: BlockGenerator | None
    fresh: tuple[tuple[int, int], ...]  # (record, first column of S_record)

    @property
    def k(self) -> int:
        return len(self.others)


@lru_cache(maxsize=64)
def scheme_codes(params: SchemeParams) -> tuple[BlockGenerator, ...]:
    """One (N,T;ell_k) code per k, permuted so the leading quota columns are an
    information set."""
    out = []
    for k, e in enumerate(params.ell, start=1):
        G = ac.build_array_code(params.N, params.T, e, params.q)
        arrangement = ac.find_recovery_arrangement(G, params.quota(k))
        out.append(ac.permute_blocks(G, arrangement))
    return tuple(out)


class QueryPlan:
    """The public layout of sums for retrieving record ``theta``.

    Slot order per server: support size, then support (lexicographic), then
    group, then codeword coordinate.
    """

    def __init__(self, params: SchemeParams, theta: int,
                 codes: Sequence[BlockGenerator] | None = None, verify: bool = True):
        if not 0 <= theta < params.M:
            raise ParameterError(f"theta must lie in [0, {params.M})")
        self.params = params
        self.theta = theta
        codes = tuple(scheme_codes(params) if codes is None else codes)
        self._check_codes(codes, verify)
        self.codes = codes
        self._build()

    def _check_codes(self, codes, verify: bool) -> None:
        P = self.params
        if len(codes) != P.M - 1:
            raise ParameterError(f"expected {P.M - 1} codes, got {len(codes)}")
        for k, G in enumerate(codes, start=1):
            if (G.N, G.T, G.ell, G.q) != (P.N, P.T, P.ell_k(k), P.q):
                raise ParameterError(f"code {k} has parameters {(G.N, G.T, G.ell, G.q)}")
            if not ac.is_normal_form(G, P.quota(k)):
                raise ParameterError(f"code {k} is not in normal form for quota {P.quota(k)}")
            if verify and not ac.check_mds(G).passed:
                raise ParameterError(f"code {k} is not MDS")

    def _build(self) -> None:
        P, theta = self.params, self.theta
        others_all = [m for m in range(P.M) if m != theta]
        groups = [CodeGroup((), None, ())]
        offset = {m: 0 for m in others_all}
        for k in range(1, P.M):
            for lam in itertools.combinations(others_all, k):
                fresh = []
                for m in lam:
                    fresh.append((m, offset[m]))
                    offset[m] += P.T * P.ell_k(k)
                groups.append(CodeGroup(lam, self.codes[k - 1], tuple(fresh)))
        slots: list[list[Slot]] = [[] for _ in range(P.N)]
        desired = 0
        for i in range(P.N):
            for j in range(P.gamma(i, 1)):
                slots[i].append(Slot(i, (theta,), 0, j, desired))
                desired += 1
        for g, grp in enumerate(groups[1:], start=1):
            e = P.ell_k(grp.k)
            under = tuple(sorted(grp.others + (theta,)))
            for i in range(P.N):
                for j in range(e):
                    if j < P.gamma(i, grp.k):
                        slots[i].append(Slot(i, grp.others, g, i * e + j, None))
                    else:
                        slots[i].append(Slot(i, under, g, i * e + j, desired))
                        desired += 1
        if desired != P.L:
            raise ParameterError(f"plan allocates {desired} desired symbols, expected {P.L}")
        self.groups = tuple(groups)
        self.slots = tuple(
            tuple(sorted(s, key=lambda x: (len(x.support), x.support, x.group, x.coord)))
            for s in slots
        )
        self.fresh_used = dict(offset)

    # -- derived views ------------------------------------------------------

    @property
    def slot_counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.slots)

    def support_profile(self, server: int) -> tuple[tuple[int, ...], ...]:
        return tuple(s.support for s in self.slots[server])

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.slot_counts)]))

    @cached_property
    def coefficient_maps(self) -> np.ndarray:
        """P with shape (M, L, total slots): record m's coefficients are S_m @ P[m]."""
        Pm = self.params
        total = sum(self.slot_counts)
        out = np.zeros((Pm.M, Pm.L, total), dtype=np.int64)
        col = 0
        for server_slots in self.slots:
            for s in server_slots:
                if s.desired is not None:
                    out[self.theta, s.desired, col] = 1
                grp = self.groups[s.group]
                for m, start in grp.fresh:
                    rows = grp.code.dim
                    out[m, start : start + rows, col] = grp.code.matrix[:, s.coord]
                col += 1
        out.setflags(write=False)
        return out

    @cached_property
    def recovery_index(self):
        """Per group: slot locations of information-set and desired-bearing sums."""
        where = {}
        pure = []
        for i, server_slots in enumerate(self.slots):
            for pos, s in enumerate(server_slots):
                if s.group == 0:
                    pure.append((i, pos, s.desired))
                else:
                    where[(s.group, s.coord)] = (i, pos, s)
        out = [(None, None, pure)]
        for g in range(1, len(self.groups)):
            info, under = [], []
            for (gg, coord), (i, pos, s) in sorted(where.items()):
                if gg != g:
                    continue
                (info if s.desired is None else under).append((coord, i, pos, s.desired))
            out.append((info, under, None))
        return tuple(out)


def build_query_plan(params: SchemeParams, theta: int,
                     codes: Sequence[BlockGenerator] | None = None) -> QueryPlan:
    return QueryPlan(params, theta, codes)


def format_plan_report(params: SchemeParams) -> str:
    P = params
    ell_bound, q_bound = array_field_bound(P.N, P.T, P.M)
    q_n = next(q for q in iter_prime_powers() if q >= P.N)
    lines = [
        f"N={P.N} T={P.T} M={P.M} q={P.q}",
        f"d={P.d} n={P.n} t={P.t}",
        "ell_k = " + " ".join(str(x) for x in P.ell),
        "alpha_k = " + " ".join(str(x) for x in P.alpha),
        "beta_k = " + " ".join(str(x) for x in P.beta),
        f"L = {P.L}",
        "downloads = " + " ".join(str(x) for x in P.downloads),
        f"D = {P.D}",
        f"rate = {P.rate}",
        f"capacity = {P.capacity}",
        f"rate_equals_capacity = {P.rate == P.capacity}",
    ]
    for k, r in enumerate(P.recipes, start=1):
        lines.append(f"code k={k}: ({P.N},{P.T};{r.ell}) from {r.describe()}")
    lines.append(f"field bound (array codes): ell = min(t^(M-2), (n-t)^(M-2)) = {ell_bound}, "
                 f"q >= {P.N}^(1/{ell_bound}), least prime power {q_bound}")
    lines.append(f"field bound (q >= N): least prime power {q_n}")
    mb = minimal_binary_M(P.N, P.T)
    lines.append(f"binary field certified for M >= {mb}" if mb is not None
                 else "binary field certificate: none (mu <= 1)")
    return "\n".join(lines) + "\n"
