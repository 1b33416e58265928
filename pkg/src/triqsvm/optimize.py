"""Derivative-free training of the kernel parameters.

``cobyla_minimize`` wraps the linear-approximation trust-region method
(COBYLA) behind a bounds-aware, budget-aware interface that always returns
the best feasible point actually evaluated.  ``train`` runs the outer
cycle: build the kernel matrix for the current parameters, build and solve
the QUBO, compute the offset, score the validation set, and feed
1 - accuracy back to the optimizer.  The reported model is the iteration
with the highest validation accuracy (earliest on ties).
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .anneal import AnnealSchedule, SampleResult, brute_force, greedy_descent, simulated_anneal
from .datagen import Dataset
from .kernels import LinearKernel, RbfKernel, default_rbf_gamma, kernel_gram
from .qkernel import FeatureMapSpec
from .qubo import TrainedModel, accuracy, build_qubo_dual, build_qubo_paper, compute_beta

BACKENDS = ("anneal", "exact", "greedy")
BUILDERS = ("paper", "dual")
KERNEL_KINDS = ("quantum-zz", "rbf", "linear")

THETA_BOUND = 2.0 * np.pi


@dataclass(frozen=True)
class OptimizerConfig:
    """Trust-region radii and evaluation budget for the optimizer."""

    rho_begin: float = 0.5
    rho_end: float = 1e-4
    max_evals: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.rho_end < self.rho_begin:
            raise ValueError("need 0 < rho_end < rho_begin")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")


@dataclass(frozen=True)
class MinimizeResult:
    """Best feasible point found, its value, the evaluation count, and
    whether the trust region shrank to rho_end within budget."""

    x: np.ndarray
    fun: float
    evaluations: int
    converged: bool


def cobyla_minimize(objective: Callable, x0, bounds, config: OptimizerConfig) -> MinimizeResult:
    """Minimize a black-box function over a box via COBYLA.

    ``bounds`` is a sequence of (low, high) per coordinate, enforced as
    linear inequality constraints; trial points may overshoot them by at
    most ``rho_begin``.  Exhausting ``max_evals`` before the trust region
    reaches ``rho_end`` is not an error: the best point seen so far comes
    back with ``converged=False``.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a nonempty vector")
    lows = np.array([b[0] for b in bounds], dtype=float)
    highs = np.array([b[1] for b in bounds], dtype=float)
    if lows.shape != x0.shape or highs.shape != x0.shape:
        raise ValueError("one (low, high) pair per coordinate is required")
    if np.any(x0 < lows) or np.any(x0 > highs):
        raise ValueError("x0 must lie within bounds")

    evaluations = [0]
    best = {"x": x0.copy(), "fun": np.inf}

    def wrapped(x):
        evaluations[0] += 1
        value = float(objective(np.asarray(x, dtype=float)))
        # Track the best point that actually respects the box (tiny slack
        # for constraint-boundary arithmetic).
        if value < best["fun"] and np.all(x >= lows - 1e-9) and np.all(x <= highs + 1e-9):
            best["x"] = np.array(x, dtype=float)
            best["fun"] = value
        return value

    constraints = []
    for i in range(x0.size):
        constraints.append({"type": "ineq", "fun": lambda x, i=i: x[i] - lows[i]})
        constraints.append({"type": "ineq", "fun": lambda x, i=i: highs[i] - x[i]})

    result = _scipy_minimize(
        wrapped,
        x0,
        method="COBYLA",
        constraints=constraints,
        options={
            "rhobeg": config.rho_begin,
            "tol": config.rho_end,
            "maxiter": config.max_evals,
        },
    )
    if not np.isfinite(best["fun"]):
        best["x"], best["fun"] = np.asarray(result.x, dtype=float), float(result.fun)
    return MinimizeResult(
        x=best["x"],
        fun=float(best["fun"]),
        evaluations=evaluations[0],
        converged=bool(result.status == 1),
    )


def initial_theta(p: int, seed: int) -> np.ndarray:
    """Uniform starting parameters in [-2*pi, 2*pi]^p."""
    if p < 1:
        raise ValueError("parameter count must be >= 1")
    return np.random.default_rng(seed).uniform(-THETA_BOUND, THETA_BOUND, p)


@dataclass(frozen=True)
class TrainConfig:
    """Outer-loop settings: iteration cap, early-stop threshold, solver
    backend, QUBO builder, kernel kind and the master seed."""

    max_iterations: int = 10
    target_accuracy: float = 1.0
    solver_backend: str = "anneal"
    qubo_builder: str = "paper"
    kernel_kind: str = "quantum-zz"
    seed: int = 0
    slack_c: float = 0.0
    schedule: AnnealSchedule | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 <= self.target_accuracy <= 1.0:
            raise ValueError("target_accuracy must lie in [0, 1]")
        if self.solver_backend not in BACKENDS:
            raise ValueError(f"solver_backend must be one of {BACKENDS}")
        if self.qubo_builder not in BUILDERS:
            raise ValueError(f"qubo_builder must be one of {BUILDERS}")
        if self.kernel_kind not in KERNEL_KINDS:
            raise ValueError(f"kernel_kind must be one of {KERNEL_KINDS}")


@dataclass
class TrainReport:
    """Outcome of one training run."""

    best_theta: np.ndarray
    best_model: TrainedModel
    best_accuracy: float
    accuracy_per_iteration: list[float]
    iterations_used: int
    wall_time: float
    config: dict
    solver: dict
    failures: list[str] = field(default_factory=list)


def report_to_dict(report: TrainReport) -> dict:
    from .qubo import model_to_dict

    return {
        "best_theta": [float(t) for t in report.best_theta],
        "best_accuracy": report.best_accuracy,
        "accuracy_per_iteration": [float(a) for a in report.accuracy_per_iteration],
        "iterations_used": report.iterations_used,
        "wall_time": report.wall_time,
        "config": report.config,
        "solver": report.solver,
        "failures": list(report.failures),
        "best_model": model_to_dict(report.best_model),
    }


def _solve_qubo(q, cfg: TrainConfig) -> tuple[SampleResult, dict]:
    if cfg.solver_backend == "anneal":
        schedule = cfg.schedule if cfg.schedule is not None else AnnealSchedule(seed=cfg.seed)
        result = simulated_anneal(q, schedule)
        info = {"backend": "anneal", **asdict(schedule)}
    elif cfg.solver_backend == "exact":
        result = brute_force(q)
        info = {"backend": "exact", "global_optimum": True}
    else:
        result = greedy_descent(q, seed=cfg.seed)
        info = {"backend": "greedy", "seed": cfg.seed}
    info["best_energy"] = float(result.best_energy)
    info["selected"] = int(result.best_assignment.sum())
    return result, info


def _kernel_for(cfg: TrainConfig, theta: np.ndarray, d: int, base_gamma: float):
    if cfg.kernel_kind == "quantum-zz":
        return FeatureMapSpec(n=d, theta=theta)
    if cfg.kernel_kind == "rbf":
        # theta[0] tunes gamma on a log scale around the data-driven default.
        return RbfKernel(gamma=base_gamma * float(np.exp(theta[0])))
    return LinearKernel()


def train(
    train_set: Dataset,
    val_set: Dataset,
    cfg: TrainConfig,
    opt: OptimizerConfig | None = None,
) -> TrainReport:
    """Run the outer training cycle and keep the best-scoring iteration.

    Each objective evaluation is one full pass: kernel matrix, QUBO,
    solve, offset, validation accuracy.  Evaluations after the target
    accuracy has been met are short-circuited and not counted.  An
    iteration that raises is recorded with accuracy 0 and loss 1.
    """
    if train_set.m == 0 or val_set.m == 0:
        raise ValueError("training and validation sets must be nonempty")
    if train_set.d != val_set.d:
        raise ValueError("training and validation dimensions differ")
    opt = opt if opt is not None else OptimizerConfig()
    d = train_set.d
    p = d if cfg.kernel_kind == "quantum-zz" else 1
    base_gamma = default_rbf_gamma(train_set.points) if cfg.kernel_kind == "rbf" else 1.0

    start = time.perf_counter()
    x0 = initial_theta(p, cfg.seed)
    accuracies: list[float] = []
    failures: list[str] = []
    state = {"best_acc": -1.0, "best": None, "met": False, "last_loss": 1.0}

    def objective(theta: np.ndarray) -> float:
        if state["met"]:
            return state["last_loss"]
        iteration = len(accuracies) + 1
        try:
            kernel = _kernel_for(cfg, theta, d, base_gamma)
            k = kernel_gram(kernel, train_set.points)
            builder = build_qubo_paper if cfg.qubo_builder == "paper" else build_qubo_dual
            q = builder(k, train_set.labels, slack_c=cfg.slack_c)
            sample, solver_info = _solve_qubo(q, cfg)
            beta = compute_beta(sample.best_assignment, train_set.labels, k)
            model = TrainedModel(
                alpha=sample.best_assignment,
                beta=beta,
                train_points=train_set.points,
                train_labels=train_set.labels,
                kernel=kernel,
                builder=cfg.qubo_builder,
            )
            acc = accuracy(model, val_set)
        except Exception as exc:  # noqa: BLE001 - failed iterations score 0
            failures.append(f"iteration {iteration}: {exc}")
            accuracies.append(0.0)
            return 1.0
        accuracies.append(acc)
        if acc > state["best_acc"]:
            state["best_acc"] = acc
            state["best"] = (np.array(theta, dtype=float), model, solver_info)
        if acc >= cfg.target_accuracy:
            state["met"] = True
        state["last_loss"] = 1.0 - acc
        return 1.0 - acc

    budget = min(opt.max_evals, cfg.max_iterations)
    effective = OptimizerConfig(rho_begin=opt.rho_begin, rho_end=opt.rho_end, max_evals=budget)
    bounds = [(-THETA_BOUND, THETA_BOUND)] * p
    cobyla_minimize(objective, x0, bounds, effective)

    if state["best"] is None:
        raise RuntimeError(f"every training iteration failed: {failures}")
    best_theta, best_model, solver_info = state["best"]
    config_echo = {
        **{k: v for k, v in asdict(cfg).items() if k != "schedule"},
        "schedule": asdict(cfg.schedule) if cfg.schedule is not None else None,
        "optimizer": asdict(opt),
        "initial_theta": [float(t) for t in x0],
        "parameter_count": p,
    }
    return TrainReport(
        best_theta=best_theta,
        best_model=best_model,
        best_accuracy=state["best_acc"],
        accuracy_per_iteration=accuracies,
        iterations_used=len(accuracies),
        wall_time=time.perf_counter() - start,
        config=config_echo,
        solver=solver_info,
        failures=failures,
    )
