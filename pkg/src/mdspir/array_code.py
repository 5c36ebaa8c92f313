"""(N, T; ell) MDS array codes over GF(q).

A block generator is a ``T*ell x N*ell`` matrix split into N thick columns
of width ell.  Codes are built from Generalized Reed-Solomon codes over
GF(q^ell) by replacing each symbol with its companion-matrix image.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .embedding import FieldExtension, extension
from .field import MAX_ORDER, GaloisField, GF

MODES = ("plain", "extended", "doubly_extended")
_EXTRA_COLUMNS = {"plain": 0, "extended": 1, "doubly_extended": 2}


class CodeError(ValueError):
    pass


class ArrangementError(RuntimeError):
    """No full-rank quota selection was found; G is not MDS or the solver is wrong."""


def max_length(mode: str, order: int) -> int:
    return order + _EXTRA_COLUMNS[mode]


@dataclass(frozen=True, eq=False)
class BlockGenerator:
    field: GaloisField
    N: int
    T: int
    ell: int
    matrix: np.ndarray

    def __post_init__(self):
        if not self.N >= self.T >= 1 or self.ell < 1:
            raise CodeError(f"invalid parameters N={self.N} T={self.T} ell={self.ell}")
        M = np.array(self.matrix, dtype=np.int64)
        if M.shape != (self.T * self.ell, self.N * self.ell):
            raise CodeError(f"generator has shape {M.shape}, expected "
                            f"{(self.T * self.ell, self.N * self.ell)}")
        self.field.validate(M)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def q(self) -> int:
        return self.field.order

    @property
    def dim(self) -> int:
        return self.T * self.ell

    @property
    def length(self) -> int:
        return self.N * self.ell

    def thick(self, i: int) -> np.ndarray:
        return self.matrix[:, i * self.ell : (i + 1) * self.ell]

    def thick_columns(self, subset: Sequence[int]) -> np.ndarray:
        return np.hstack([self.thick(i) for i in subset])

    def encode(self, message) -> np.ndarray:
        return linalg.matmul(self.field, np.asarray(message, dtype=np.int64), self.matrix)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BlockGenerator)
            and self.field == other.field
            and (self.N, self.T, self.ell) == (other.N, other.T, other.ell)
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class RecoveryArrangement:
    """Per-block column subsets Gamma_i (0-based positions inside the block)."""

    subsets: tuple[tuple[int, ...], ...]

    @property
    def quota(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.subsets)

    def columns(self, ell: int) -> list[int]:
        return [i * ell + j for i, s in enumerate(self.subsets) for j in s]


@dataclass(frozen=True)
class MDSReport:
    passed: bool
    checked: int
    violations: tuple[tuple[int, ...], ...] = dc_field(default=())


# -- GRS codes over the extension field --------------------------------------

def evaluation_points(field: GaloisField, count: int) -> list[int]:
    """Field elements in the order 0, 1, alpha, alpha^2, ..."""
    if count > field.order:
        raise CodeError(f"only {field.order} evaluation points in {field}")
    pts = [0] + [field.alpha_power(j) for j in range(field.order - 1)]
    return pts[:count]


def is_mds_symbol(field: GaloisField, G) -> bool:
    """Every dim x dim minor of a symbol-level generator is nonzero."""
    G = np.asarray(G, dtype=np.int64)
    k, n = G.shape
    return all(linalg.det(field, G[:, list(c)]) != 0 for c in itertools.combinations(range(n), k))


def grs_generator(length: int, dim: int, field: GaloisField, mode: str = "plain") -> np.ndarray:
    """Generator of a [length, dim] GRS code over ``field`` (column multipliers 1).

    ``extended`` appends the point at infinity (0, ..., 0, 1)^T; ``doubly_extended``
    also appends (0, ..., 0, 1, 0)^T and is rejected unless the result is MDS.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= dim <= length:
        raise CodeError(f"need 1 <= dim <= length, got dim={dim} length={length}")
    if length > max_length(mode, field.order):
        raise CodeError(f"length {length} exceeds {max_length(mode, field.order)} "
                        f"for {mode} GRS over GF({field.order})")
    extra = min(_EXTRA_COLUMNS[mode], length)
    pts = evaluation_points(field, length - extra)
    G = linalg.zeros(dim, length)
    for j, x in enumerate(pts):
        for r in range(dim):
            G[r, j] = field.power(x, r)
    if extra >= 1:
        G[dim - 1, length - extra] = 1
    if extra == 2:
        G[max(dim - 2, 0), length - 1] = 1
        if not is_mds_symbol(field, G):
            raise CodeError(f"doubly-extended [{length},{dim}] GRS over GF({field.order}) is not MDS")
    return G


def trivial_generator(length: int, dim: int, field: GaloisField) -> np.ndarray:
    """Repetition (dim 1), single-parity (dim length-1) or identity code.

    These are MDS over every field, so they impose no length bound.
    """
    if dim == 1:
        return np.ones((1, length), dtype=np.int64)
    if dim == length:
        return linalg.identity(length)
    if dim == length - 1:
        return np.hstack([linalg.identity(dim), np.ones((dim, 1), dtype=np.int64)])
    raise CodeError(f"no trivial MDS code with length {length} and dim {dim}")


def expand_to_array_code(Gsym, ext: FieldExtension) -> BlockGenerator:
    Gsym = np.asarray(Gsym, dtype=np.int64)
    T, N = Gsym.shape
    return BlockGenerator(ext.base, N, T, ext.ell, ext.phi_matrix(Gsym))


def lift_array_code(G: BlockGenerator, factor: int) -> BlockGenerator:
    """(N,T;ell) -> (N,T;ell*factor) via G (x) I_factor; MDS is preserved."""
    if factor == 1:
        return G
    M = np.kron(G.matrix, np.eye(factor, dtype=np.int64))
    return BlockGenerator(G.field, G.N, G.T, G.ell * factor, M)


# -- verification ------------------------------------------------------------

def check_mds(G: BlockGenerator) -> MDSReport:
    subsets = list(itertools.combinations(range(G.N), G.T))
    stack = np.stack([G.thick_columns(s) for s in subsets])
    ranks = linalg.batch_rank(G.field, stack)
    bad = tuple(s for s, r in zip(subsets, ranks) if r != G.dim)
    return MDSReport(passed=not bad, checked=len(subsets), violations=bad)


def _check_quota(G: BlockGenerator, quota: Sequence[int]) -> tuple[int, ...]:
    quota = tuple(int(m) for m in quota)
    if len(quota) != G.N:
        raise ValueError(f"quota has {len(quota)} entries, expected {G.N}")
    if any(m < 0 or m > G.ell for m in quota):
        raise ValueError(f"quota entries must lie in [0, {G.ell}]")
    if sum(quota) != G.dim:
        raise ValueError(f"quota sums to {sum(quota)}, expected {G.dim}")
    return quota


def _augmenting_path(gf, A, selected, block, quota):
    """Shortest exchange-graph path between the column matroid and the
    partition matroid with capacities ``quota``; None if I is maximum."""
    n = A.shape[1]
    in_set = set(selected)
    outside = [c for c in range(n) if c not in in_set]
    k = len(selected)
    pos_out = {c: j for j, c in enumerate(outside)}
    if k:
        R, _ = linalg.rref(gf, np.hstack([A[:, selected], A[:, outside]]), pivot_cols=k)
        rest = R[:, k:]
        free = rest[k:].any(axis=0)
        coef = rest[:k] != 0
    else:
        free = A[:, outside].any(axis=0)
        coef = np.zeros((0, len(outside)), dtype=bool)
    count = np.bincount(block[selected], minlength=len(quota)) if k else np.zeros(len(quota), int)
    is_sink = {c: count[block[c]] < quota[block[c]] for c in outside}
    prev: dict[int, int | None] = {}
    queue: deque[int] = deque()
    for c in outside:
        if free[pos_out[c]]:
            prev[c] = None
            queue.append(c)
    while queue:
        u = queue.popleft()
        if u not in in_set:
            if is_sink[u]:
                path = [u]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path
            # x -> y when swapping y for x keeps every block within quota
            for y in selected:
                if y not in prev and block[y] == block[u]:
                    prev[y] = u
                    queue.append(y)
        else:
            row = selected.index(u)
            for c in outside:
                j = pos_out[c]
                if c not in prev and (free[j] or coef[row, j]):
                    prev[c] = u
                    queue.append(c)
    return None


def find_recovery_arrangement(G: BlockGenerator, quota: Sequence[int]) -> RecoveryArrangement:
    """Quota-respecting columns of full rank T*ell (matroid intersection)."""
    quota = _check_quota(G, quota)
    gf, A, ell = G.field, G.matrix, G.ell
    n = A.shape[1]
    block = np.arange(n) // ell
    selected: list[int] = []
    count = [0] * G.N
    for c in range(n):
        b = c // ell
        if count[b] < quota[b] and linalg.rank(gf, A[:, selected + [c]]) == len(selected) + 1:
            selected.append(c)
            count[b] += 1
    while len(selected) < G.dim:
        path = _augmenting_path(gf, A, selected, block, quota)
        if path is None:
            raise ArrangementError(
                f"no full-rank selection for quota {quota}; is the generator MDS?")
        selected = sorted(set(selected).symmetric_difference(path))
    subsets = tuple(tuple(c % ell for c in selected if c // ell == i) for i in range(G.N))
    arrangement = RecoveryArrangement(subsets)
    if arrangement.quota != quota or linalg.rank(gf, A[:, arrangement.columns(ell)]) != G.dim:
        raise ArrangementError("solver produced an invalid arrangement")
    return arrangement


def brute_force_arrangement(G: BlockGenerator, quota: Sequence[int],
                            limit: int = 16) -> RecoveryArrangement | None:
    """Exhaustive oracle; None when no quota-respecting selection has full rank."""
    if G.length > limit:
        raise ValueError(f"N*ell = {G.length} exceeds the oracle limit {limit}")
    quota = _check_quota(G, quota)
    choices = [list(itertools.combinations(range(G.ell), m)) for m in quota]
    combos = list(itertools.product(*choices))
    stack = np.stack([
        G.matrix[:, RecoveryArrangement(tuple(c)).columns(G.ell)] for c in combos
    ])
    ranks = linalg.batch_rank(G.field, stack)
    hits = np.flatnonzero(ranks == G.dim)
    if hits.size == 0:
        return None
    return RecoveryArrangement(tuple(combos[int(hits[0])]))


def block_permutation(G: BlockGenerator, arrangement: RecoveryArrangement) -> list[int]:
    """perm[old column] = new column, moving each Gamma_i to the block front."""
    ell = G.ell
    perm = [0] * G.length
    for i, chosen in enumerate(arrangement.subsets):
        order = list(chosen) + [j for j in range(ell) if j not in chosen]
        for new, old in enumerate(order):
            perm[i * ell + old] = i * ell + new
    return perm


def permute_blocks(G: BlockGenerator, arrangement: RecoveryArrangement) -> BlockGenerator:
    if len(arrangement.subsets) != G.N:
        raise ValueError("arrangement does not match the generator")
    perm = block_permutation(G, arrangement)
    inverse = np.argsort(perm)
    return BlockGenerator(G.field, G.N, G.T, G.ell, G.matrix[:, inverse])


def leading_columns(G: BlockGenerator, quota: Sequence[int]) -> list[int]:
    return [i * G.ell + j for i, m in enumerate(quota) for j in range(m)]


def is_normal_form(G: BlockGenerator, quota: Sequence[int]) -> bool:
    quota = _check_quota(G, quota)
    return linalg.rank(G.field, G.matrix[:, leading_columns(G, quota)]) == G.dim


def recover_full_codeword(G: BlockGenerator, positions: Sequence[int], values) -> np.ndarray:
    """The unique codeword u @ G agreeing with ``values`` at ``positions``."""
    positions = list(positions)
    sub = G.matrix[:, positions]
    try:
        u = linalg.solve(G.field, sub.T, np.asarray(values, dtype=np.int64))
    except linalg.NotUnique as exc:
        raise CodeError(f"positions do not form an information set: {exc}") from exc
    except linalg.NoSolution as exc:
        raise CodeError("values are not consistent with any codeword") from exc
    return linalg.matmul(G.field, u, G.matrix)


def recovery_matrix(G: BlockGenerator, positions: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """R with ``c[targets] == c[positions] @ R`` for every codeword c."""
    sub = G.matrix[:, list(positions)]
    if sub.shape[0] != sub.shape[1]:
        raise CodeError("positions must have exactly T*ell entries")
    try:
        inv = linalg.invert(G.field, sub)
    except linalg.Singular as exc:
        raise CodeError("positions do not form an information set") from exc
    return linalg.matmul(G.field, inv, G.matrix[:, list(targets)])


# -- codes for the scheme ----------------------------------------------------

@dataclass(frozen=True)
class CodeRecipe:
    """How an (N,T;ell) code over GF(q) is obtained.

    A [N,T] GRS code in ``mode`` over GF(q^base_ell), or a repetition,
    parity or identity code when ``mode`` is ``trivial``, expanded to a
    (N,T;base_ell) array code and lifted by ``ell // base_ell``.
    """

    N: int
    T: int
    ell: int
    q: int
    base_ell: int
    mode: str

    @property
    def lift(self) -> int:
        return self.ell // self.base_ell

    def describe(self) -> str:
        if self.mode == "trivial":
            kind = {1: "repetition", self.N: "identity"}.get(self.T, "single-parity")
            s = f"{kind} code [{self.N},{self.T}] over GF({self.q})"
        else:
            s = f"{self.mode} GRS [{self.N},{self.T}] over GF({self.q}^{self.base_ell})"
        if self.lift > 1:
            s += f" lifted x{self.lift}"
        return s


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@lru_cache(maxsize=None)
def code_recipe(N: int, T: int, ell: int, q: int) -> CodeRecipe | None:
    """Smallest extension degree dividing ell that admits an MDS GRS code.

    Repetition and parity codes (T in {1, N-1, N}) need no extension at all.
    """
    if T in (1, N - 1, N):
        return CodeRecipe(N, T, ell, q, 1, "trivial")
    for d in _divisors(ell):
        if q**d > MAX_ORDER:
            break
        for mode in MODES:
            if N > max_length(mode, q**d):
                continue
            if mode == "doubly_extended":
                try:
                    grs_generator(N, T, GF(q**d), mode)
                except CodeError:
                    continue
            return CodeRecipe(N, T, ell, q, d, mode)
    return None


@lru_cache(maxsize=None)
def build_array_code(N: int, T: int, ell: int, q: int) -> BlockGenerator:
    recipe = code_recipe(N, T, ell, q)
    if recipe is None:
        raise CodeError(f"no ({N},{T};{ell}) MDS array code over GF({q}) from GRS codes")
    ext = extension(q, recipe.base_ell)
    if recipe.mode == "trivial":
        Gsym = trivial_generator(N, T, ext.field)
    else:
        Gsym = grs_generator(N, T, ext.field, recipe.mode)
    G = lift_array_code(expand_to_array_code(Gsym, ext), recipe.lift)
    report = check_mds(G)
    if not report.passed:  # pragma: no cover - construction guarantees MDS
        raise CodeError(f"constructed code violates MDS on {report.violations}")
    return G


# -- text format: header "N T ell q" then T*ell rows of N*ell integers ---------

def format_generator(G: BlockGenerator) -> str:
    lines = [f"{G.N} {G.T} {G.ell} {G.q}"]
    lines += [" ".join(str(int(v)) for v in row) for row in G.matrix]
    return "\n".join(lines) + "\n"


def parse_generator(text: str, field: GaloisField | None = None) -> BlockGenerator:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 4:
        raise CodeError("header must be 'N T ell q'")
    N, T, ell, q = (int(x) for x in rows[0])
    body = rows[1:]
    if len(body) != T * ell or any(len(r) != N * ell for r in body):
        raise CodeError(f"expected {T * ell} rows of {N * ell} integers")
    gf = field or GF(q)
    if gf.order != q:
        raise CodeError("field does not match header")
    return BlockGenerator(gf, N, T, ell, np.array(body, dtype=np.int64))
