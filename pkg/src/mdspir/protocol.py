"""User query generation, server answers and reconstruction.

A query to server j is an ``(count_j, M, L)`` array: one coefficient vector
per record for every sum the server must return.  Records outside a sum's
support get the zero vector, so every message has a fixed shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import array_code as ac
from . import linalg
from .field import GaloisField
from .plan import QueryPlan, SchemeParams


class ProtocolError(ValueError):
    pass


class IntegrityError(RuntimeError):
    """Answers are inconsistent with the query (corrupted or wrong server)."""


@dataclass(frozen=True, eq=False)
class RecordSet:
    field: GaloisField
    records: np.ndarray  # (M, L)

    def __post_init__(self):
        W = np.array(self.records, dtype=np.int64)
        if W.ndim != 2:
            raise ProtocolError("records must be an (M, L) array")
        self.field.validate(W)
        W.setflags(write=False)
        object.__setattr__(self, "records", W)

    @property
    def M(self) -> int:
        return self.records.shape[0]

    @property
    def L(self) -> int:
        return self.records.shape[1]

    @classmethod
    def random(cls, field: GaloisField, M: int, L: int, rng: np.random.Generator) -> "RecordSet":
        return cls(field, field.random((M, L), rng))


@dataclass(frozen=True, eq=False)
class UserSecret:
    """The retrieval index and the private scrambling matrices S_0..S_{M-1}."""

    theta: int
    S: np.ndarray  # (M, L, L), each invertible
    seed: int | None = None

    @property
    def M(self) -> int:
        return self.S.shape[0]

    @property
    def L(self) -> int:
        return self.S.shape[1]

    def __repr__(self) -> str:
        # keep the matrices out of logs
        return f"UserSecret(theta={self.theta}, M={self.M}, L={self.L}, seed={self.seed})"


def sample_secret(params: SchemeParams, theta: int, seed: int | None = None,
                  rng: np.random.Generator | None = None) -> UserSecret:
    if rng is None:
        rng = np.random.default_rng(seed)
    gf = params.field
    S = np.stack([linalg.sample_invertible(gf, params.L, rng) for _ in range(params.M)])
    return UserSecret(theta, S, seed)


def identity_secret(params: SchemeParams, theta: int) -> UserSecret:
    """All S_m = I.  Only for inspecting the raw query pattern; offers no privacy."""
    S = np.broadcast_to(linalg.identity(params.L), (params.M, params.L, params.L)).copy()
    return UserSecret(theta, S, None)


@dataclass(frozen=True, eq=False)
class Query:
    params: SchemeParams
    per_server: tuple[np.ndarray, ...]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.per_server[j]

    def __len__(self) -> int:
        return len(self.per_server)


def _check_secret(plan: QueryPlan, secret: UserSecret) -> None:
    P = plan.params
    if secret.theta != plan.theta:
        raise ProtocolError(f"secret is for theta={secret.theta}, plan for theta={plan.theta}")
    if secret.S.shape != (P.M, P.L, P.L):
        raise ProtocolError(f"secret matrices have shape {secret.S.shape}, expected {(P.M, P.L, P.L)}")


def coefficients(plan: QueryPlan, S: np.ndarray) -> np.ndarray:
    """All coefficient vectors, shape (M, L, total slots): column c of record m is
    S_m times record m's column of the plan's coefficient map."""
    gf = plan.params.field
    maps = plan.coefficient_maps
    return np.stack([linalg.matmul(gf, S[m], maps[m]) for m in range(plan.params.M)])


def generate_queries(plan: QueryPlan, secret: UserSecret) -> Query:
    _check_secret(plan, secret)
    C = coefficients(plan, secret.S)
    off = plan.offsets
    per_server = tuple(
        np.ascontiguousarray(C[:, :, off[j] : off[j + 1]].transpose(2, 0, 1))
        for j in range(plan.params.N)
    )
    return Query(plan.params, per_server)


def server_answer(query: np.ndarray, records: RecordSet) -> np.ndarray:
    """sum_m <W_m, coeff_m> for every sum in the query."""
    query = np.asarray(query, dtype=np.int64)
    if query.ndim != 3 or query.shape[1:] != records.records.shape:
        raise ProtocolError(f"query shape {query.shape} does not fit records {records.records.shape}")
    count = query.shape[0]
    flat = query.reshape(count, -1)
    return linalg.matmul(records.field, flat, records.records.reshape(-1))


def reconstruct(answers: Sequence[np.ndarray], plan: QueryPlan, secret: UserSecret) -> np.ndarray:
    _check_secret(plan, secret)
    P = plan.params
    gf = P.field
    if len(answers) != P.N:
        raise ProtocolError(f"need {P.N} answers, got {len(answers)}")
    answers = [np.asarray(a, dtype=np.int64) for a in answers]
    for j, a in enumerate(answers):
        if a.shape != (plan.slot_counts[j],):
            raise ProtocolError(f"server {j} answered {a.shape[0]} symbols, expected {plan.slot_counts[j]}")
    y = np.zeros(P.L, dtype=np.int64)
    for g, (info, under, pure) in enumerate(plan.recovery_index):
        if g == 0:
            for i, pos, idx in pure:
                y[idx] = answers[i][pos]
            continue
        code = plan.groups[g].code
        coords = [c for c, _, _, _ in info]
        vals = np.array([answers[i][pos] for _, i, pos, _ in info], dtype=np.int64)
        try:
            word = ac.recover_full_codeword(code, coords, vals)
        except ac.CodeError as exc:  # pragma: no cover - normal form guarantees an information set
            raise IntegrityError(f"group {g}: {exc}") from exc
        for coord, i, pos, idx in under:
            y[idx] = gf.sub(int(answers[i][pos]), int(word[coord]))
    try:
        return linalg.solve(gf, secret.S[plan.theta].T, y)
    except linalg.LinAlgError as exc:
        raise IntegrityError(f"scrambling matrix is not invertible: {exc}") from exc


def answer_all(query: Query, records: RecordSet) -> list[np.ndarray]:
    return [server_answer(q, records) for q in query.per_server]


# -- transcripts ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Transcript:
    N: int
    T: int
    M: int
    q: int
    L: int
    theta: int
    seed: int | None
    queries: tuple[np.ndarray, ...]
    answers: tuple[np.ndarray, ...]
    retrieved: np.ndarray

    @property
    def download(self) -> int:
        return sum(len(a) for a in self.answers)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "T": self.T, "M": self.M, "q": self.q, "L": self.L,
            "theta": self.theta, "seed": self.seed,
            "queries": [q.tolist() for q in self.queries],
            "answers": [a.tolist() for a in self.answers],
            "retrieved": self.retrieved.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Transcript":
        M, L = d["M"], d["L"]
        queries = tuple(np.array(q, dtype=np.int64).reshape(-1, M, L) for q in d["queries"])
        answers = tuple(np.array(a, dtype=np.int64).reshape(-1) for a in d["answers"])
        return cls(d["N"], d["T"], M, d["q"], L, d["theta"], d["seed"], queries, answers,
                   np.array(d["retrieved"], dtype=np.int64))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Transcript):
            return NotImplemented
        head = (self.N, self.T, self.M, self.q, self.L, self.theta, self.seed)
        if head != (other.N, other.T, other.M, other.q, other.L, other.theta, other.seed):
            return False
        pairs = list(zip(self.queries, other.queries)) + list(zip(self.answers, other.answers))
        return (len(self.queries) == len(other.queries) and len(self.answers) == len(other.answers)
                and all(np.array_equal(a, b) for a, b in pairs)
                and np.array_equal(self.retrieved, other.retrieved))

    __hash__ = None  # type: ignore[assignment]


def transcript(plan: QueryPlan, secret: UserSecret, records: RecordSet) -> Transcript:
    P = plan.params
    query = generate_queries(plan, secret)
    answers = answer_all(query, records)
    W = reconstruct(answers, plan, secret)
    return Transcript(P.N, P.T, P.M, P.q, P.L, plan.theta, secret.seed,
                      query.per_server, tuple(answers), W)
