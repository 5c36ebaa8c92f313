"""Per-phase timings of one full retrieval, with deterministic operation counts."""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _backend
from . import array_code as ac
from . import protocol as pr
from .plan import QueryPlan, derive_parameters

PHASES = ("plan", "codegen", "query", "answer", "reconstruct")


@dataclass
class BenchReport:
    N: int
    T: int
    M: int
    q: int
    L: int
    D: int
    backend: str
    repeat: int
    seconds: dict[str, list[float]] = dc_field(default_factory=dict)
    ops: dict[str, int] = dc_field(default_factory=dict)
    ok: bool = True

    def best(self, phase: str) -> float:
        return min(self.seconds[phase])

    def to_dict(self) -> dict:
        return {
            "N": self.N, "T": self.T, "M": self.M, "q": self.q, "L": self.L, "D": self.D,
            "backend": self.backend, "repeat": self.repeat, "ok": self.ok,
            "seconds": self.seconds, "ops": self.ops,
        }

    def format(self) -> str:
        lines = [f"bench N={self.N} T={self.T} M={self.M} q={self.q} L={self.L} D={self.D} "
                 f"backend={self.backend} repeat={self.repeat}"]
        for ph in PHASES:
            s = self.seconds[ph]
            lines.append(f"  {ph:<12} best {min(s) * 1e3:9.2f} ms   mean {np.mean(s) * 1e3:9.2f} ms")
        for k, v in self.ops.items():
            lines.append(f"  {k:<24} {v}")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines) + "\n"


def _codes(params):
    """Rebuild every code from scratch (bypassing caches) and normalise it."""
    out = []
    for k, e in enumerate(params.ell, start=1):
        G = ac.build_array_code.__wrapped__(params.N, params.T, e, params.q)
        arr = ac.find_recovery_arrangement(G, params.quota(k))
        out.append(ac.permute_blocks(G, arr))
    return tuple(out)


def run_bench(N: int, T: int, M: int, q: int | None = None, seed: int = 0, repeat: int = 3,
              theta: int = 0, backend: str | None = None) -> BenchReport:
    name = backend or _backend.NAME
    with _backend.use(name):
        params = derive_parameters(N, T, M, q)
        rep = BenchReport(N, T, M, params.q, params.L, params.D, name, repeat,
                          {ph: [] for ph in PHASES})
        records = pr.RecordSet.random(params.field, M, params.L, np.random.default_rng([seed, 0]))
        for _ in range(repeat):
            t = time.perf_counter()
            codes = _codes(params)
            rep.seconds["codegen"].append(time.perf_counter() - t)
            t = time.perf_counter()
            plan = QueryPlan(params, theta, codes, verify=False)
            plan.coefficient_maps, plan.recovery_index  # build the cached layouts now
            rep.seconds["plan"].append(time.perf_counter() - t)
            secret = pr.sample_secret(params, theta, rng=np.random.default_rng([seed, 1, theta]))
            t = time.perf_counter()
            query = pr.generate_queries(plan, secret)
            rep.seconds["query"].append(time.perf_counter() - t)
            t = time.perf_counter()
            answers = pr.answer_all(query, records)
            rep.seconds["answer"].append(time.perf_counter() - t)
            t = time.perf_counter()
            W = pr.reconstruct(answers, plan, secret)
            rep.seconds["reconstruct"].append(time.perf_counter() - t)
            rep.ok &= bool(np.array_equal(W, records.records[theta]))
        rep.ops = {
            "downloaded_symbols": int(sum(len(a) for a in answers)),
            "query_elements": int(sum(x.size for x in query.per_server)),
            "nonzero_coefficients": int(sum(np.count_nonzero(x) for x in query.per_server)),
            "decode_groups": len(plan.groups) - 1,
            "decode_unknowns": int(sum(g.code.dim for g in plan.groups[1:])),
        }
    return rep


def compare_backends(N: int, T: int, M: int, q: int | None = None, seed: int = 0,
                     repeat: int = 3) -> list[BenchReport]:
    return [run_bench(N, T, M, q, seed, repeat, backend=name) for name in _backend.available()]
