"""Kernel descriptors and uniform evaluation helpers.

A kernel is either a :class:`~triqsvm.qkernel.FeatureMapSpec` (the quantum
kernel) or one of the classical descriptors below.  The helpers here give
the decision function and the trainer a single calling convention for all
of them, plus a JSON round trip for model files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qkernel
from .qkernel import FeatureMapSpec


@dataclass(frozen=True)
class RbfKernel:
    """K(x, z) = exp(-gamma * ||x - z||^2)."""

    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class LinearKernel:
    """K(x, z) = <x, z>."""


Kernel = FeatureMapSpec | RbfKernel | LinearKernel


def default_rbf_gamma(points) -> float:
    """1 / (2 d var), with var the pooled variance of all feature entries."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    var = float(points.var())
    if var == 0.0:
        return 1.0
    return 1.0 / (2.0 * points.shape[1] * var)


def kernel_cross(kernel: Kernel, points, queries) -> np.ndarray:
    """Matrix of kernel values, shape (len(points), len(queries))."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if points.shape[1] != queries.shape[1]:
        raise ValueError(
            f"dimension mismatch: points are {points.shape[1]}-dimensional, "
            f"queries {queries.shape[1]}-dimensional"
        )
    if isinstance(kernel, FeatureMapSpec):
        sp = np.stack([qkernel.feature_state(p, kernel).amplitudes for p in points])
        sq = np.stack([qkernel.feature_state(q, kernel).amplitudes for q in queries])
        return np.abs(sp.conj() @ sq.T) ** 2
    if isinstance(kernel, RbfKernel):
        d2 = ((points[:, None, :] - queries[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-kernel.gamma * d2)
    if isinstance(kernel, LinearKernel):
        return points @ queries.T
    raise TypeError(f"unsupported kernel {kernel!r}")


def kernel_gram(kernel: Kernel, points) -> np.ndarray:
    """Symmetric kernel matrix over one point set."""
    if isinstance(kernel, FeatureMapSpec):
        return qkernel.gram(points, kernel).entries
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k = kernel_cross(kernel, points, points)
    # Mirror the upper triangle so the matrix is exactly symmetric.
    return np.triu(k) + np.triu(k, 1).T


def kernel_to_dict(kernel: Kernel) -> dict:
    if isinstance(kernel, FeatureMapSpec):
        return {
            "kind": "quantum-zz",
            "n": kernel.n,
            "reps": kernel.reps,
            "theta": [float(t) for t in kernel.theta],
            "data_map": kernel.data_map,
        }
    if isinstance(kernel, RbfKernel):
        return {"kind": "rbf", "gamma": kernel.gamma}
    if isinstance(kernel, LinearKernel):
        return {"kind": "linear"}
    raise TypeError(f"unsupported kernel {kernel!r}")


def kernel_from_dict(data: dict) -> Kernel:
    kind = data.get("kind")
    if kind == "quantum-zz":
        return FeatureMapSpec(
            n=int(data["n"]),
            theta=np.asarray(data["theta"], dtype=float),
            reps=int(data.get("reps", 2)),
            data_map=data.get("data_map", "zz-detune"),
        )
    if kind == "rbf":
        return RbfKernel(gamma=float(data["gamma"]))
    if kind == "linear":
        return LinearKernel()
    raise ValueError(f"unknown kernel kind {kind!r}")
