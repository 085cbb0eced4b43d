"""Seeded simulation of the embedded chain.

Replications are cut into fixed blocks of ``BLOCK`` trajectories.  Block
``b`` draws from a Philox generator seeded with
``SeedSequence(seed, spawn_key=(b,))``, so the counts depend only on
``(model, replications, seed)`` and never on how many workers ran the
blocks.

Sampling compares one float64 uniform per step with ``rho_j`` rounded to
float64 once per phase; that rounding is below ``2**-52`` per step.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import Model

BLOCK = 1 << 16
ALGORITHM = f"philox4x64/seedsequence-spawn-per-block/block={BLOCK}/uniform<rho_j"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TRANSQ_WORKERS", "1")))
    except ValueError:
        return 1


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def simulate_chain(model: Model, rng) -> tuple[int, ...]:
    """One trajectory from ``(0, 0)`` to ``(N, N)`` as right-jump counts per phase.

    ``rng`` needs a ``random()`` method returning a uniform on ``[0, 1)``.
    """
    N = model.n_customers
    rhos = [float(r) for r in model.rhos]
    u = [0] * N
    i = j = 0
    while i < N:
        if i == j:
            j += 1
        elif rng.random() < rhos[j - 1]:
            u[j - 1] += 1
            i += 1
        else:
            j += 1
    return tuple(u)


def _simulate_block(rhos: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` trajectories as a ``(count, N)`` matrix of jump counts."""
    N = len(rhos)
    draws = rng.random((count, 2 * N))
    i = np.zeros(count, dtype=np.int64)
    j = np.zeros(count, dtype=np.int64)
    u = np.zeros((count, N), dtype=np.int16)
    rows = np.arange(count)
    # index 0 is a dummy for j = 0, which is always on the diagonal
    rho_by_phase = np.concatenate(([0.0], rhos))
    for t in range(2 * N):
        on_diag = i == j
        right = ~on_diag & (draws[:, t] < rho_by_phase[j])
        u[rows[right], j[right] - 1] += 1
        i += right
        j += ~right
    return u


def _hit_codes(u: np.ndarray) -> np.ndarray:
    """Bitmask with bit ``k-1`` set when the path touches the diagonal at ``(k, k)``."""
    N = u.shape[1]
    hits = np.cumsum(u, axis=1) == np.arange(1, N + 1)
    weights = np.left_shift(np.int64(1), np.arange(N, dtype=np.int64))
    return hits.astype(np.int64) @ weights


def decode_composition(code: int, n: int) -> tuple[int, ...]:
    hits = [k for k in range(1, n + 1) if code >> (k - 1) & 1]
    return tuple(b - a for a, b in zip([0] + hits, hits))


def _block_sizes(replications: int) -> list[int]:
    full, rest = divmod(replications, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class SimulationReport:
    replications: int
    counts: tuple[int, ...]
    seed: int
    model_digest: str
    algorithm: str = ALGORITHM
    joint_counts: dict[tuple[int, ...], int] | None = field(default=None)

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.replications for c in self.counts)

    @property
    def std_errors(self) -> tuple[float, ...]:
        R = self.replications
        return tuple(math.sqrt(f * (1 - f) / R) for f in self.frequencies)

    def joint_frequencies(self) -> dict[tuple[int, ...], float]:
        if self.joint_counts is None:
            return {}
        return {k: c / self.replications for k, c in self.joint_counts.items()}

    def to_json(self) -> dict:
        R = self.replications
        doc = {
            "replications": R,
            "seed": self.seed,
            "model_digest": self.model_digest,
            "algorithm": self.algorithm,
            "first_busy_period": [
                {"i": i, "count": c, "frequency": f, "std_error": se}
                for i, (c, f, se) in enumerate(
                    zip(self.counts, self.frequencies, self.std_errors), start=1)
            ],
        }
        if self.joint_counts is not None:
            doc["joint"] = [
                {"composition": list(k), "count": c, "frequency": c / R,
                 "std_error": math.sqrt((c / R) * (1 - c / R) / R)}
                for k, c in sorted(self.joint_counts.items())
            ]
        return doc


def _run_blocks(model: Model, replications: int, seed: int, workers: int, job):
    rhos = np.array([float(r) for r in model.rhos])
    sizes = _block_sizes(replications)

    def one(b):
        return job(_simulate_block(rhos, sizes[b], block_generator(seed, b)))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(len(sizes))))
    return [one(b) for b in range(len(sizes))]


def estimate_busy_dist(model: Model, replications: int, seed: int = 0,
                       workers: int | None = None, joint: bool = False) -> SimulationReport:
    """Empirical law of the first busy-period size (and optionally of all sizes)."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    N = model.n_customers
    workers = default_workers() if workers is None else workers

    def job(u):
        hits = np.cumsum(u, axis=1) == np.arange(1, N + 1)
        counts = np.bincount(hits.argmax(axis=1), minlength=N)
        jc = None
        if joint:
            vals, cnt = np.unique(_hit_codes(u), return_counts=True)
            jc = dict(zip(vals.tolist(), cnt.tolist()))
        return counts, jc

    counts = np.zeros(N, dtype=np.int64)
    joint_codes: Counter = Counter()
    for c, jc in _run_blocks(model, replications, seed, workers, job):
        counts += c
        if jc:
            joint_codes.update(jc)
    joint_counts = None
    if joint:
        joint_counts = {decode_composition(code, N): c for code, c in sorted(joint_codes.items())}
    return SimulationReport(replications, tuple(int(x) for x in counts), seed, model.digest,
                            ALGORITHM, joint_counts)


def estimate_joint_busy(model: Model, replications: int, seed: int = 0,
                        workers: int | None = None) -> SimulationReport:
    return estimate_busy_dist(model, replications, seed, workers, joint=True)


def path_counts(model: Model, replications: int, seed: int = 0,
                workers: int | None = None) -> Counter:
    """How often each full trajectory was drawn."""
    workers = default_workers() if workers is None else workers

    def job(u):
        rows, cnt = np.unique(u, axis=0, return_counts=True)
        return Counter({tuple(int(x) for x in r): int(c) for r, c in zip(rows, cnt)})

    total: Counter = Counter()
    for c in _run_blocks(model, replications, seed, workers, job):
        total.update(c)
    return total
