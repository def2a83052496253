"""Projected SGD over ordered oracle phases, with paired noisy/noiseless runs.

The update at global step t is

    w_{t+1} = project(w_t - (c_phase / t) * G_phase(w_t), radius)

where the step index t runs continuously across phases and never resets.
Mini-batched oracle calls count as a single t increment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .core import project
from .oracles import GradientOracle


class NonpositiveRate(ValueError):
    """A phase was configured with a rate constant c <= 0."""


class PatternMismatch(ValueError):
    """An interleave pattern does not match the oracles' step budgets."""


@dataclass(frozen=True)
class PhasePlan:
    """Ordered (oracle_id, rate constant) phases sharing one global step clock."""

    phases: tuple
    lam: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple((str(k), float(c)) for k, c in self.phases))
        if len(self.phases) == 0:
            raise ValueError("need at least one phase")
        ids = [k for k, _ in self.phases]
        if len(set(ids)) != len(ids):
            raise ValueError("each oracle may be referenced by exactly one phase")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class InterleavePattern:
    """Per-step oracle choice for arbitrary-order runs."""

    sequence: tuple

    def __post_init__(self):
        object.__setattr__(self, "sequence", tuple(str(s) for s in self.sequence))
        if len(self.sequence) == 0:
            raise ValueError("empty pattern")


@dataclass
class Trajectory:
    final_w: np.ndarray
    steps: int
    iterates: Optional[list] = None          # [(t, w_{t+1}) ...] at the snapshot stride
    objective_curve: Optional[list] = None   # [(t, f(w_{t+1})) ...] when eval_fn given


def _run_steps(step_schedule: Sequence, lam: float, radius: float,
               w0: Optional[np.ndarray], d: int,
               snapshot_stride: Optional[int] = None,
               eval_fn: Optional[Callable[[np.ndarray], float]] = None) -> Trajectory:
    total = len(step_schedule)
    if snapshot_stride is None:
        snapshot_stride = max(1, total // 1000)
    w = np.zeros(d) if w0 is None else np.asarray(w0, dtype=np.float64).copy()
    if np.linalg.norm(w) > radius * (1.0 + 1e-12):
        raise ValueError("w0 lies outside the feasible ball")
    iterates: list = []
    curve: Optional[list] = [] if eval_fn is not None else None
    for t0, (oracle, c) in enumerate(step_schedule):
        t = t0 + 1
        g = oracle.call(w).gradient
        w = project(w - (c / t) * g, radius)
        assert not np.isfinite(radius) or np.linalg.norm(w) <= radius * (1.0 + 1e-9)
        if t % snapshot_stride == 0 or t == total:
            iterates.append((t, w.copy()))
            if curve is not None:
                curve.append((t, eval_fn(w)))
    return Trajectory(final_w=w, steps=total, iterates=iterates, objective_curve=curve)


def _plan_schedule(plan: PhasePlan, oracles: Mapping[str, GradientOracle]) -> list:
    schedule = []
    for oracle_id, c in plan.phases:
        if c <= 0:
            raise NonpositiveRate(f"phase {oracle_id!r} has nonpositive rate {c}")
        oracle = oracles[oracle_id]
        schedule.extend([(oracle, c)] * oracle.steps_remaining)
    return schedule


def run_sgd(plan: PhasePlan, oracles: Mapping[str, GradientOracle],
            w0: Optional[np.ndarray] = None,
            snapshot_stride: Optional[int] = None,
            eval_fn: Optional[Callable[[np.ndarray], float]] = None) -> Trajectory:
    """Run each phase's oracle to exhaustion in order, then return the result."""
    schedule = _plan_schedule(plan, oracles)
    d = next(iter(oracles.values())).dataset.d
    return _run_steps(schedule, plan.lam, plan.radius, w0, d,
                      snapshot_stride=snapshot_stride, eval_fn=eval_fn)


def run_sgd_interleaved(pattern: InterleavePattern, c: float, lam: float, radius: float,
                        oracles: Mapping[str, GradientOracle],
                        w0: Optional[np.ndarray] = None,
                        snapshot_stride: Optional[int] = None,
                        eval_fn: Optional[Callable[[np.ndarray], float]] = None) -> Trajectory:
    """Same update rule with the oracle chosen per pattern entry at each step."""
    if c <= 0:
        raise NonpositiveRate(f"nonpositive rate {c}")
    counts: dict = {}
    for s in pattern.sequence:
        counts[s] = counts.get(s, 0) + 1
    for oracle_id, oracle in oracles.items():
        if counts.get(oracle_id, 0) != oracle.steps_remaining:
            raise PatternMismatch(
                f"pattern uses oracle {oracle_id!r} {counts.get(oracle_id, 0)} times, "
                f"budget allows {oracle.steps_remaining} steps")
    extra = set(counts) - set(oracles)
    if extra:
        raise PatternMismatch(f"pattern references unknown oracles {sorted(extra)}")
    schedule = [(oracles[s], c) for s in pattern.sequence]
    d = next(iter(oracles.values())).dataset.d
    return _run_steps(schedule, lam, radius, w0, d,
                      snapshot_stride=snapshot_stride, eval_fn=eval_fn)


def run_paired(plan: PhasePlan, oracles: Mapping[str, GradientOracle],
               w0: Optional[np.ndarray] = None) -> tuple:
    """Noisy trajectory plus its noiseless twin over the identical data order.

    The twin oracles replay the same permutations with injected noise forced
    to zero, so in expectation the squared gap isolates the noise effect.
    """
    for oracle in oracles.values():
        oracle.reset()
    noisy = run_sgd(plan, oracles, w0)
    twins = {k: o.twin() for k, o in oracles.items()}
    noiseless = run_sgd(plan, twins, w0)
    return noisy, noiseless


def run_paired_interleaved(pattern: InterleavePattern, c: float, lam: float, radius: float,
                           oracles: Mapping[str, GradientOracle],
                           w0: Optional[np.ndarray] = None) -> tuple:
    for oracle in oracles.values():
        oracle.reset()
    noisy = run_sgd_interleaved(pattern, c, lam, radius, oracles, w0)
    twins = {k: o.twin() for k, o in oracles.items()}
    noiseless = run_sgd_interleaved(pattern, c, lam, radius, twins, w0)
    return noisy, noiseless


def simulate_linear_paired_gaps(step_noise_sq: np.ndarray, c: float, lam: float,
                                d: int, n_trials: int, seed: int) -> np.ndarray:
    """Monte Carlo fan-out of paired runs on the linear loss, trials vectorized.

    Simulates the full noisy and noiseless dynamics (projection disabled,
    rate c/t, fresh data each step, step-t additive noise with second moment
    step_noise_sq[t-1]) for n_trials independent trials at once and returns
    the squared final gaps ||v_{T+1} - w_{T+1}||^2. Iterating run_paired over
    trials measures the same distribution one run at a time.
    """
    step_noise_sq = np.asarray(step_noise_sq, dtype=np.float64)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    W = np.zeros((n_trials, d))
    V = np.zeros((n_trials, d))
    for t0, var in enumerate(step_noise_sq):
        eta = c / (t0 + 1)
        yx = rng.standard_normal((n_trials, d)) / np.sqrt(d)
        shrink = 1.0 - eta * lam
        if var > 0:
            z = rng.standard_normal((n_trials, d)) * np.sqrt(var / d)
            W = shrink * W + eta * (yx - z)
        else:
            W = shrink * W + eta * yx
        V = shrink * V + eta * yx
    return np.sum((V - W) ** 2, axis=1)
