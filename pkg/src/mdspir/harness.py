"""End-to-end runs: in one process, or with one server process per server
talking the framed wire format over loopback TCP."""

from __future__ import annotations

import json
import multiprocessing as mp
import socket
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import protocol as pr
from . import wire
from .field import GF
from .plan import SchemeParams, build_query_plan, derive_parameters

MODES = ("inprocess", "sockets")

# (theta, answers) -> answers; lets tests tamper with what the user receives
AnswerHook = Callable[[int, list], list]


@dataclass
class RunConfig:
    N: int
    T: int
    M: int
    q: int | None = None
    seed: int = 0
    records: str | Path | None = None
    mode: str = "inprocess"
    out: str | Path | None = None
    thetas: Sequence[int] | None = None


@dataclass
class ThetaResult:
    theta: int
    ok: bool
    download: int
    mismatch: tuple[int, int, int] | None = None  # (index, expected, got)


@dataclass
class RunResult:
    params: SchemeParams
    results: list[ThetaResult]
    transcripts: list[pr.Transcript] = dc_field(default_factory=list)
    timings: dict[str, float] = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def summary(self) -> str:
        P = self.params
        lines = [f"run N={P.N} T={P.T} M={P.M} q={P.q} L={P.L} D={P.D}"]
        for r in self.results:
            line = f"  theta={r.theta}: {'ok' if r.ok else 'MISMATCH'} download={r.download}"
            if r.mismatch:
                i, want, got = r.mismatch
                line += f" first mismatch at symbol {i}: expected {want}, got {got}"
            lines.append(line)
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines) + "\n"


def load_records(params: SchemeParams, path: str | Path | None, seed: int) -> pr.RecordSet:
    if path is None:
        return pr.RecordSet.random(params.field, params.M, params.L, np.random.default_rng([seed, 0]))
    q, W = wire.parse_records(Path(path).read_text())
    if (q, W.shape) != (params.q, (params.M, params.L)):
        raise ValueError(f"records file has q={q} shape {W.shape}, scheme needs "
                         f"q={params.q} shape {(params.M, params.L)}")
    return pr.RecordSet(params.field, W)


# -- server processes ----------------------------------------------------------

def _serve(records: np.ndarray, q: int, conn) -> None:
    """Answer framed queries until an empty frame arrives.  Holds no state
    besides the records."""
    rs = pr.RecordSet(GF(q), records)
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    srv.bind(("127.0.0.1", 0))
    srv.listen()
    conn.send(srv.getsockname()[1])
    conn.close()
    try:
        while True:
            sock, _ = srv.accept()
            with sock, sock.makefile("rb") as rf:
                while True:
                    try:
                        payload = wire.read_frame(rf)
                    except EOFError:
                        break
                    if not payload:
                        return
                    header, coeffs = wire.decode_query(payload)
                    if header.q != q or (header.M, header.L) != records.shape:
                        # an empty answer makes the client fail loudly
                        sock.sendall(wire.frame(wire.encode_answer([], q)))
                        continue
                    ans = pr.server_answer(coeffs, rs)
                    sock.sendall(wire.frame(wire.encode_answer(ans, q)))
    finally:
        srv.close()


class ServerPool:
    """N independent server processes on loopback with persistent connections."""

    def __init__(self, records: pr.RecordSet, N: int):
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
        self.q = records.field.order
        self.procs = []
        self.ports = []
        for _ in range(N):
            parent, child = ctx.Pipe(duplex=False)
            p = ctx.Process(target=_serve, args=(np.asarray(records.records), self.q, child), daemon=True)
            p.start()
            child.close()
            self.ports.append(parent.recv())
            parent.close()
            self.procs.append(p)
        self.socks = [socket.create_connection(("127.0.0.1", port)) for port in self.ports]
        self.readers = [s.makefile("rb") for s in self.socks]
        self._pool = ThreadPoolExecutor(max_workers=N)

    def _ask(self, j: int, payload: bytes) -> np.ndarray:
        self.socks[j].sendall(wire.frame(payload))
        return wire.decode_answer(wire.read_frame(self.readers[j]), self.q)

    def ask_all(self, params: SchemeParams, query: pr.Query) -> list[np.ndarray]:
        P = params
        payloads = [
            wire.encode_query(wire.QueryHeader(P.N, P.T, P.M, P.L, P.q, j, len(qj)), qj)
            for j, qj in enumerate(query.per_server)
        ]
        futures = [self._pool.submit(self._ask, j, pl) for j, pl in enumerate(payloads)]
        return [f.result() for f in futures]

    def close(self) -> None:
        for s, r in zip(self.socks, self.readers):
            try:
                s.sendall(wire.frame(b""))
            except OSError:
                pass
            r.close()
            s.close()
        for p in self.procs:
            p.join(timeout=5)
            if p.is_alive():
                p.terminate()
        self._pool.shutdown()


@contextmanager
def server_pool(records: pr.RecordSet, N: int):
    pool = ServerPool(records, N)
    try:
        yield pool
    finally:
        pool.close()


# -- runs ------------------------------------------------------------------------

def _compare(expected: np.ndarray, got: np.ndarray) -> tuple[int, int, int] | None:
    got = np.asarray(got)
    if expected.shape != got.shape:
        return (-1, len(expected), len(got))
    bad = np.flatnonzero(expected != got)
    if bad.size == 0:
        return None
    i = int(bad[0])
    return (i, int(expected[i]), int(got[i]))


def run(config: RunConfig, answer_hook: AnswerHook | None = None) -> RunResult:
    if config.mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    t0 = time.perf_counter()
    params = derive_parameters(config.N, config.T, config.M, config.q)
    records = load_records(params, config.records, config.seed)
    thetas = range(params.M) if config.thetas is None else config.thetas
    results, transcripts = [], []
    timings = {"plan": 0.0, "query": 0.0, "answer": 0.0, "reconstruct": 0.0}

    def one(theta: int, ask) -> None:
        t = time.perf_counter()
        plan = build_query_plan(params, theta)
        secret = pr.sample_secret(params, theta, seed=config.seed,
                                  rng=np.random.default_rng([config.seed, 1, theta]))
        timings["plan"] += time.perf_counter() - t
        t = time.perf_counter()
        query = pr.generate_queries(plan, secret)
        timings["query"] += time.perf_counter() - t
        t = time.perf_counter()
        answers = ask(query)
        timings["answer"] += time.perf_counter() - t
        if answer_hook is not None:
            answers = answer_hook(theta, [np.array(a) for a in answers])
        t = time.perf_counter()
        try:
            W = pr.reconstruct(answers, plan, secret)
        except (pr.ProtocolError, pr.IntegrityError):
            W = np.full(params.L, -1, dtype=np.int64)
        timings["reconstruct"] += time.perf_counter() - t
        mismatch = _compare(records.records[theta], W)
        results.append(ThetaResult(theta, mismatch is None, sum(len(a) for a in answers), mismatch))
        transcripts.append(pr.Transcript(params.N, params.T, params.M, params.q, params.L, theta,
                                         secret.seed, query.per_server,
                                         tuple(np.asarray(a) for a in answers), W))

    if config.mode == "inprocess":
        for theta in thetas:
            one(theta, lambda query: pr.answer_all(query, records))
    else:
        with server_pool(records, params.N) as pool:
            for theta in thetas:
                one(theta, lambda query: pool.ask_all(params, query))
    timings["total"] = time.perf_counter() - t0
    result = RunResult(params, results, transcripts, timings)
    if config.out is not None:
        write_transcripts(config.out, result)
    return result


def write_transcripts(path: str | Path, result: RunResult) -> None:
    doc = {"ok": result.ok, "transcripts": [t.to_dict() for t in result.transcripts]}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")))


def read_transcripts(path: str | Path) -> list[pr.Transcript]:
    doc = json.loads(Path(path).read_text())
    return [pr.Transcript.from_dict(d) for d in doc["transcripts"]]
