"""Sampling reference for system failure probabilities and Sobol' indices.

Everything is drawn in U-space and mapped to X through the problem's random
vector, so the estimators see exactly the same model as the FORM path.
Sampling is split into blocks with seeds spawned from one root seed; block
results are reduced in block order, which makes estimates reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, ValidationError
from .limit_state import ReliabilityProblem, SystemDefinition

N_BATCHES = 20
CHUNK = 500_000


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int


@dataclass(frozen=True)
class PickFreezeResult:
    names: tuple[str, ...]
    first_order: np.ndarray
    first_order_std_error: np.ndarray
    total_effect: np.ndarray
    total_effect_std_error: np.ndarray
    p_f: float
    n_samples: int
    n_evaluations: int
    seed: int

    def as_dict(self):
        return {
            "first_order": dict(zip(self.names, self.first_order.tolist())),
            "first_order_std_error": dict(zip(self.names, self.first_order_std_error.tolist())),
            "total_effect": dict(zip(self.names, self.total_effect.tolist())),
            "total_effect_std_error": dict(zip(self.names, self.total_effect_std_error.tolist())),
            "p_f": self.p_f,
            "n_samples": self.n_samples,
            "n_evaluations": self.n_evaluations,
            "seed": self.seed,
        }


def indicator(system: SystemDefinition, g) -> np.ndarray:
    """1 where some cut set has all of its components at ``g <= 0``.

    ``g`` has shape ``(m,)`` or ``(N, m)``.
    """
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != system.m:
        raise ValidationError(f"expected {system.m} limit-state values, got {g.shape[-1]}")
    failed = g <= 0.0
    out = np.zeros(g.shape[:-1], dtype=bool)
    for c in system.cut_sets:
        out |= np.all(failed[..., list(c)], axis=-1)
    return out.astype(np.int8)


def system_indicator_u(problem: ReliabilityProblem, u: np.ndarray) -> np.ndarray:
    return indicator(problem.system, problem.g_values_u(u))


def _block_sizes(total, block):
    sizes = [block] * (total // block)
    if total % block:
        sizes.append(total % block)
    return sizes


def crude_mc_probability(problem: ReliabilityProblem, n_samples: int = 10**6,
                         seed: int = 42) -> McEstimate:
    if n_samples < 1000:
        raise ValidationError("n_samples must be >= 1000")
    sizes = _block_sizes(int(n_samples), CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    hits = 0
    for size, child in zip(sizes, children):
        u = np.random.default_rng(child).standard_normal((size, problem.rv.n))
        hits += int(system_indicator_u(problem, u).sum())
    p = hits / n_samples
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n_samples), int(n_samples), int(seed))


def _batch_sums(problem, size, rng):
    n = problem.rv.n
    A = rng.standard_normal((size, n))
    B = rng.standard_normal((size, n))
    fA = system_indicator_u(problem, A).astype(float)
    fB = system_indicator_u(problem, B).astype(float)
    s1 = np.empty(n)
    st = np.empty(n)
    for i in range(n):
        ABi = A.copy()
        ABi[:, i] = B[:, i]
        fABi = system_indicator_u(problem, ABi).astype(float)
        s1[i] = np.sum(fB * (fABi - fA))
        st[i] = np.sum((fA - fABi) ** 2)
    return fA.sum() + fB.sum(), s1, st


def pick_freeze_indices(problem: ReliabilityProblem, n_samples: int = 10**6,
                        seed: int = 42) -> PickFreezeResult:
    """First-order (Saltelli covariance form) and total-effect (Jansen) indices.

    Uses two base matrices and ``n`` hybrids, i.e. ``n_samples * (n + 2)``
    indicator evaluations.  Standard errors come from the spread of the
    estimates over 20 equal batches.
    """
    if n_samples < 10**4:
        raise ValidationError("pick-freeze needs n_samples >= 1e4")
    n = problem.rv.n
    sizes = _block_sizes(int(n_samples), -(-int(n_samples) // N_BATCHES))
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    batch = []
    for size, child in zip(sizes, children):
        batch.append((size,) + _batch_sums(problem, size, np.random.default_rng(child)))

    count = sum(b[0] for b in batch)
    p = sum(b[1] for b in batch) / (2 * count)
    if p <= 0.0 or p >= 1.0:
        raise DegenerateVariance(f"estimated failure probability {p} has no variance")
    var = p * (1.0 - p)
    S1 = sum(b[2] for b in batch) / count / var
    ST = sum(b[3] for b in batch) / (2 * count) / var

    s1_b, st_b = [], []
    for size, hits, s1, st in batch:
        pb = hits / (2 * size)
        vb = pb * (1.0 - pb)
        if vb == 0.0:
            continue
        s1_b.append(s1 / size / vb)
        st_b.append(st / (2 * size) / vb)
    if len(s1_b) < 2:
        raise DegenerateVariance("too few batches with failures to estimate errors")
    k = len(s1_b)
    se1 = np.std(s1_b, axis=0, ddof=1) / math.sqrt(k)
    seT = np.std(st_b, axis=0, ddof=1) / math.sqrt(k)
    return PickFreezeResult(problem.rv.names, S1, se1, ST, seT, p, count,
                            count * (n + 2), int(seed))
