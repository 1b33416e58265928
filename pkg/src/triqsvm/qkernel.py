"""Dense statevector simulation of the two-repetition Pauli-Z feature map.

The feature circuit alternates a Hadamard layer with a diagonal phase
evolution whose angles come from a data map.  States are stored as full
complex amplitude vectors of length 2**n.  Qubit 0 is the most significant
bit of the basis index, so for n=2 the basis order is |00>, |01>, |10>, |11>.

A basis state |b> picks up the phase

    exp(i * [sum_i phi_i (1 - 2 b_i) + sum_{i<j} phi_ij (1 - 2 b_i)(1 - 2 b_j)])

under the phase evolution, which is the action of exp(i sum phi_S prod_S Z).
Kernels are exact squared overlaps of statevectors; there is no shot
sampling anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

NORM_ATOL = 1e-10

# Amplitude of the bounded one-body detuning used by the "zz-detune" data
# map.  The detuning is periodic in theta and vanishes at every integer
# theta, so theta=(1,...,1) reproduces the plain angles phi_i(x) = x_i used
# to label generated data.
DETUNE_AMPLITUDE = np.pi / 8

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


@lru_cache(maxsize=None)
def _z_table(n: int) -> np.ndarray:
    """Rows of (1 - 2 b_i) over all basis indices, one row per qubit."""
    idx = np.arange(2**n)
    return np.stack([1.0 - 2.0 * ((idx >> (n - 1 - i)) & 1) for i in range(n)])


def pair_order(n: int) -> list[tuple[int, int]]:
    """Qubit pairs (i, j), i < j, in the order two-body angles are given."""
    return list(combinations(range(n), 2))


@dataclass(frozen=True)
class StateVector:
    """Normalized n-qubit state; amplitudes indexed with qubit 0 as MSB."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        if self.n < 1:
            raise ValueError("qubit count must be >= 1")
        if amp.shape != (2**self.n,):
            raise ValueError(f"expected {2 ** self.n} amplitudes, got {amp.shape}")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: sum |a|^2 = {norm!r}")


def zero_state(n: int) -> StateVector:
    """The all-zeros computational basis state |0...0>."""
    amp = np.zeros(2**n, dtype=complex)
    amp[0] = 1.0
    return StateVector(amp, n)


def _zz_detune_map(x: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # One-body: data angle plus a bounded periodic detuning controlled by
    # theta.  Two-body: the usual (pi - x_i)(pi - x_j) pair interaction,
    # independent of theta.  At integer theta the detuning is exactly zero.
    one = x + DETUNE_AMPLITUDE * np.sin(np.pi * (theta - 1.0))
    two = np.array([(np.pi - x[i]) * (np.pi - x[j]) for i, j in combinations(range(len(x)), 2)])
    return one, two


DATA_MAPS = {
    "zz-detune": _zz_detune_map,
}


@dataclass(frozen=True)
class FeatureMapSpec:
    """Configuration of the feature circuit: qubit count, training
    parameters theta (one per qubit), repetition count and data-map name."""

    n: int = 2
    theta: np.ndarray = field(default_factory=lambda: np.ones(2))
    reps: int = 2
    data_map: str = "zz-detune"

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if self.n < 1:
            raise ValueError("qubit count must be >= 1")
        if self.reps != 2:
            raise ValueError("the feature block is applied exactly twice (reps must be 2)")
        if theta.shape != (self.n,):
            raise ValueError(f"theta must have one entry per qubit, got shape {theta.shape}")
        if np.any(np.abs(theta) > 2 * np.pi):
            raise ValueError("all |theta_k| must be <= 2*pi")
        if self.data_map not in DATA_MAPS:
            raise ValueError(f"unknown data map {self.data_map!r}")

    def angles(self, x) -> tuple[np.ndarray, np.ndarray]:
        """One-body and two-body phase angles for data point x."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"data point must have dimension {self.n}, got shape {x.shape}")
        return DATA_MAPS[self.data_map](x, self.theta)


def apply_hadamard_layer(state: StateVector) -> StateVector:
    """Apply a Hadamard gate to every qubit."""
    t = state.amplitudes.reshape((2,) * state.n)
    for ax in range(state.n):
        t = np.moveaxis(np.tensordot(_HADAMARD, t, axes=([1], [ax])), 0, ax)
    return StateVector(t.reshape(-1), state.n)


def apply_phase_evolution(state: StateVector, one_body, two_body) -> StateVector:
    """Apply the diagonal phase evolution with the given angle sets.

    ``one_body`` holds one angle per qubit, ``two_body`` one angle per qubit
    pair in :func:`pair_order` order.  Only phases change; amplitude
    magnitudes are untouched.
    """
    n = state.n
    one_body = np.asarray(one_body, dtype=float)
    two_body = np.asarray(two_body, dtype=float)
    n_pairs = n * (n - 1) // 2
    if one_body.shape != (n,):
        raise ValueError(f"expected {n} one-body angles, got shape {one_body.shape}")
    if two_body.shape != (n_pairs,):
        raise ValueError(f"expected {n_pairs} two-body angles, got shape {two_body.shape}")
    z = _z_table(n)
    phase = one_body @ z
    for k, (i, j) in enumerate(pair_order(n)):
        phase = phase + two_body[k] * z[i] * z[j]
    return StateVector(state.amplitudes * np.exp(1j * phase), n)


def feature_state(x, spec: FeatureMapSpec) -> StateVector:
    """Run the feature circuit on |0...0> for data point x."""
    one, two = spec.angles(x)
    state = zero_state(spec.n)
    for _ in range(spec.reps):
        state = apply_hadamard_layer(state)
        state = apply_phase_evolution(state, one, two)
    return state


def kernel_entry(x, z, spec: FeatureMapSpec) -> float:
    """Squared overlap |<Phi(x)|Phi(z)>|^2, in [0, 1]."""
    a = feature_state(x, spec).amplitudes
    b = feature_state(z, spec).amplitudes
    return float(np.abs(np.vdot(a, b)) ** 2)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric matrix of pairwise kernel values, unit diagonal."""

    entries: np.ndarray
    m: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", entries)
        if entries.shape != (self.m, self.m):
            raise ValueError(f"expected a {self.m}x{self.m} matrix, got {entries.shape}")


def gram(points, spec: FeatureMapSpec) -> GramMatrix:
    """Gram matrix of the quantum kernel over a list of data points.

    Each off-diagonal entry is computed once and mirrored, so the result is
    symmetric by construction.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[0]
    if m < 1 or points.size == 0:
        raise ValueError("at least one data point is required")
    states = np.stack([feature_state(p, spec).amplitudes for p in points])
    k = np.empty((m, m))
    for i in range(m):
        row = np.abs(states[i:].conj() @ states[i]) ** 2
        k[i, i:] = row
        k[i:, i] = row
    return GramMatrix(k, m)


def expectation_zz(state: StateVector, v: np.ndarray) -> float:
    """Expectation <psi| V^dag (Z x ... x Z) V |psi>, a real in [-1, 1]."""
    v = np.asarray(v, dtype=complex)
    dim = 2**state.n
    if v.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got {v.shape}")
    residual = np.max(np.abs(v.conj().T @ v - np.eye(dim)))
    if residual > 1e-10:
        raise ValueError(f"matrix is not unitary (max |V^dag V - I| = {residual:.2e})")
    w = v @ state.amplitudes
    signs = np.prod(_z_table(state.n), axis=0)
    value = np.vdot(w, signs * w)
    if abs(value.imag) >= 1e-10:
        raise ArithmeticError(f"expectation has imaginary residue {value.imag!r}")
    return float(value.real)
