"""Low-energy sampling of QUBO instances.

``simulated_anneal`` is the annealer stand-in: multi-read single-bit-flip
Metropolis with a geometric inverse-temperature ladder.  ``brute_force``
enumerates every assignment (the oracle for small instances) and
``greedy_descent`` is the cheap classical baseline.

Each read r draws its own random stream seeded with ``seed + r``, so reads
are order-independent and the sampler is deterministic per (instance,
schedule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qubo import QuboMatrix

BRUTE_FORCE_MAX = 20

# Sweeps whose uniforms are drawn per chunk; each read's stream is generated
# sequentially, so the chunk size cannot change results.
_SWEEP_CHUNK = 200


@dataclass(frozen=True)
class AnnealSchedule:
    """Annealing parameters: restarts, sweeps per restart and the inverse
    temperature range of the geometric ladder."""

    num_reads: int = 50
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not 0.0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")


@dataclass
class SampleResult:
    """Best assignment found, its energy, and the per-read best energies."""

    best_assignment: np.ndarray
    best_energy: float
    energies: np.ndarray

    def __post_init__(self):
        self.best_assignment = np.asarray(self.best_assignment, dtype=int)
        self.energies = np.asarray(self.energies, dtype=float)


def energy(q: QuboMatrix, alpha) -> float:
    """E(alpha) = sum_ij q[i][j] alpha_i alpha_j.

    Accumulated strictly left to right in row-major order via cumsum (sum
    would use pairwise reduction), so the result matches a plain double
    loop bit for bit on binary assignments.
    """
    qm = q.q
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (qm.shape[0],):
        raise ValueError(f"assignment length {alpha.shape} does not match size {qm.shape[0]}")
    terms = (qm * np.outer(alpha, alpha)).ravel()
    if terms.size == 0:
        return 0.0
    return float(np.cumsum(terms)[-1])


def _anneal_reads(q: QuboMatrix, schedule: AnnealSchedule):
    """All reads in lockstep.  Returns per-read best assignments, their
    exact energies, the per-sweep best-so-far energy trace, and the final
    states with their incrementally tracked energies (the latter two exist
    so tests can check the incremental bookkeeping against energy())."""
    qm = q.q
    n = qm.shape[0]
    reads = schedule.num_reads
    betas = np.geomspace(schedule.beta_start, schedule.beta_end, schedule.sweeps)
    diag = np.diag(qm).copy()
    coupling = qm + qm.T
    np.fill_diagonal(coupling, 0.0)

    rngs = [np.random.default_rng(schedule.seed + r) for r in range(reads)]
    state = np.stack([rng.integers(0, 2, size=n) for rng in rngs]).astype(float)
    running = np.array([energy(q, row) for row in state])
    # field[r, i] = sum_{j != i} (q[i][j] + q[j][i]) * state[r, j]
    field = state @ coupling.T
    best_energy = running.copy()
    best_state = state.copy()
    trace = np.empty((reads, schedule.sweeps))

    done = 0
    while done < schedule.sweeps:
        count = min(_SWEEP_CHUNK, schedule.sweeps - done)
        # -log(u)/beta as the acceptance threshold on the energy delta is
        # equivalent to u < exp(-beta * delta) and needs no exp per step.
        log_u = np.stack([-np.log(rng.random((count, n))) for rng in rngs])
        for s in range(count):
            threshold = log_u[:, s, :] / betas[done + s]
            for i in range(n):
                sign = 1.0 - 2.0 * state[:, i]
                delta = sign * (diag[i] + field[:, i])
                flip = sign * (delta < threshold[:, i])
                state[:, i] += flip
                running += delta * np.abs(flip)
                field += flip[:, None] * coupling[i]
            improved = running < best_energy
            if improved.any():
                best_energy[improved] = running[improved]
                best_state[improved] = state[improved]
            trace[:, done + s] = best_energy
        done += count

    exact = np.array([energy(q, row) for row in best_state])
    return best_state.astype(int), exact, trace, state.astype(int), running


def simulated_anneal(q: QuboMatrix, schedule: AnnealSchedule) -> SampleResult:
    """Best assignment over ``num_reads`` independent Metropolis anneals.

    Equal best energies resolve to the lowest read index.
    """
    assignments, energies, _, _, _ = _anneal_reads(q, schedule)
    k = int(np.argmin(energies))
    return SampleResult(assignments[k], float(energies[k]), energies)


def brute_force(q: QuboMatrix) -> SampleResult:
    """Exact global minimum by full enumeration; instances above
    ``BRUTE_FORCE_MAX`` variables are refused.

    Ties resolve to the assignment whose bits, read left to right as a
    binary numeral, form the smallest integer.
    """
    n = q.n
    if n > BRUTE_FORCE_MAX:
        raise ValueError(f"brute force is capped at {BRUTE_FORCE_MAX} variables, got {n}")
    codes = np.arange(2**n)
    # Bit 0 of the assignment is the most significant bit of the numeral,
    # so argmin's first-hit tie behaviour picks the smallest numeral.
    bits = ((codes[:, None] >> (n - 1 - np.arange(n))) & 1).astype(float)
    energies = ((bits @ q.q) * bits).sum(axis=1)
    k = int(np.argmin(energies))
    best = bits[k].astype(int)
    return SampleResult(best, energy(q, best), np.array([energy(q, best)]))


def greedy_descent(q: QuboMatrix, seed: int = 0) -> SampleResult:
    """Best-improvement single-bit-flip descent from one random start."""
    n = q.n
    qm = q.q
    diag = np.diag(qm).copy()
    coupling = qm + qm.T
    np.fill_diagonal(coupling, 0.0)
    state = np.random.default_rng(seed).integers(0, 2, size=n).astype(float)
    field = coupling @ state
    while True:
        sign = 1.0 - 2.0 * state
        deltas = sign * (diag + field)
        i = int(np.argmin(deltas))
        if deltas[i] >= 0.0:
            break
        state[i] += sign[i]
        field += sign[i] * coupling[i]
    best = state.astype(int)
    e = energy(q, best)
    return SampleResult(best, e, np.array([e]))
