"""Standard multivariate normal CDF by randomised quasi-Monte Carlo.

Sequential conditioning (Genz) with Gibson-Glasbey-Elston variable
ordering, on a rank-revealing pivoted Cholesky factor.  Rows whose
conditional variance vanishes are not dropped: each becomes an extra upper
or lower bound on the last latent variable it loads on, so exactly singular
matrices (duplicated blocks, ``[[R, R_v], [R_v, R]]`` with ``rank < 2m``)
are integrated without jitter tricks.

Error estimates come from independently scrambled Sobol' replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.stats import qmc

from .errors import NotPSD, ValidationError

DUPLICATE_TOL = 1e-12
NEG_EIG_TOL = 1e-10
JITTER_BELOW = 1e-8
JITTER = 1e-10
PIVOT_TOL = 1e-9
LOAD_TOL = 1e-10


@dataclass(frozen=True)
class MvnProblem:
    """P(Y <= upper) for Y ~ N(0, corr)."""

    upper: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        R = np.atleast_2d(np.asarray(self.corr, dtype=float)).copy()
        if b.ndim != 1 or R.shape != (b.size, b.size):
            raise ValidationError(f"corr must be {b.size}x{b.size}, got {R.shape}")
        if b.size < 1:
            raise ValidationError("dimension must be >= 1")
        if np.any(np.isnan(b)) or not np.all(np.isfinite(R)):
            raise ValidationError("non-finite MVN input")
        R = 0.5 * (R + R.T)
        if np.max(np.abs(np.diag(R) - 1.0)) > 1e-8:
            raise ValidationError("correlation matrix must have unit diagonal")
        np.fill_diagonal(R, 1.0)
        object.__setattr__(self, "upper", b)
        object.__setattr__(self, "corr", R)

    @property
    def d(self) -> int:
        return self.upper.size


@dataclass(frozen=True)
class MvnEstimate:
    value: float
    std_error: float
    samples_used: int


@dataclass(frozen=True)
class MvnOptions:
    n_samples: int = 10**6
    replicates: int = 25
    seed: int = 42


def degenerate_reduce(problem: MvnProblem) -> MvnProblem:
    """Collapse perfectly correlated coordinates onto their tightest limit."""
    R = problem.corr
    b = problem.upper
    keep: list[int] = []
    upper: list[float] = []
    for i in range(problem.d):
        for slot, j in enumerate(keep):
            if R[i, j] >= 1.0 - DUPLICATE_TOL:
                upper[slot] = min(upper[slot], b[i])
                break
        else:
            keep.append(i)
            upper.append(b[i])
    if len(keep) == problem.d:
        return problem
    return MvnProblem(np.array(upper), R[np.ix_(keep, keep)])


def _regularise(R: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(R)[0]
    if lam < -NEG_EIG_TOL:
        raise NotPSD(f"correlation matrix has eigenvalue {lam:.3e}")
    if lam < JITTER_BELOW:
        R = R + JITTER * np.eye(R.shape[0])
        s = 1.0 / np.sqrt(np.diag(R))
        R = R * s[:, None] * s[None, :]
    return R


@dataclass
class _Factor:
    b: np.ndarray            # limits, permuted to factor order
    L: np.ndarray            # d x r lower-trapezoidal factor
    rank: int
    extra: list              # per column k: list of (row, loading) bounds


def _truncated_mean(ub):
    # E[Z | Z < ub] for a standard normal Z
    if ub == math.inf:
        return 0.0
    return -math.exp(-0.5 * ub * ub - 0.5 * math.log(2 * math.pi) - special.log_ndtr(ub))


def _factorize(b: np.ndarray, R: np.ndarray) -> _Factor:
    d = b.size
    b = b.copy()
    R = R.copy()
    L = np.zeros((d, d))
    y = np.zeros(d)
    rank = 0
    for k in range(d):
        s = np.diag(R)[k:] - np.sum(L[k:, :k] ** 2, axis=1)
        ok = np.flatnonzero(s > PIVOT_TOL)
        if ok.size == 0:
            break
        mu = L[k:, :k] @ y[:k]
        with np.errstate(divide="ignore", invalid="ignore"):
            ub = (b[k:][ok] - mu[ok]) / np.sqrt(s[ok])
        j = k + ok[np.argmin(special.log_ndtr(ub))]
        if j != k:
            b[[k, j]] = b[[j, k]]
            R[[k, j], :] = R[[j, k], :]
            R[:, [k, j]] = R[:, [j, k]]
            L[[k, j], :] = L[[j, k], :]
        piv = math.sqrt(R[k, k] - L[k, :k] @ L[k, :k])
        L[k, k] = piv
        L[k + 1:, k] = (R[k + 1:, k] - L[k + 1:, :k] @ L[k, :k]) / piv
        y[k] = _truncated_mean((b[k] - L[k, :k] @ y[:k]) / piv)
        rank += 1
    L = L[:, :rank]
    extra: list[list[tuple[int, float]]] = [[] for _ in range(rank)]
    for i in range(rank, d):
        loads = np.flatnonzero(np.abs(L[i]) > LOAD_TOL)
        if loads.size == 0:
            continue  # zero-variance row; handled by the caller
        extra[loads[-1]].append((i, L[i, loads[-1]]))
    return _Factor(b, L, rank, extra)


def _integrand(W: np.ndarray, fac: _Factor) -> np.ndarray:
    L, b, r = fac.L, fac.b, fac.rank
    N = W.shape[0]
    z = np.zeros((N, r))
    f = np.ones(N)
    for k in range(r):
        shift = z[:, :k] @ L[k, :k] if k else 0.0
        hi = (b[k] - shift) / L[k, k]
        lo = None
        for i, c in fac.extra[k]:
            t = (b[i] - (z[:, :k] @ L[i, :k] if k else 0.0)) / c
            if c > 0:
                hi = np.minimum(hi, t)
            else:
                lo = t if lo is None else np.maximum(lo, t)
        hi = np.broadcast_to(hi, (N,))
        if lo is None:
            p_lo = np.zeros(N)
            e = special.ndtr(hi)
        else:
            lo = np.broadcast_to(lo, (N,))
            p_lo = special.ndtr(lo)
            upper_tail = lo > 0
            e = np.where(upper_tail, special.ndtr(-lo) - special.ndtr(-hi),
                         special.ndtr(hi) - p_lo)
            e = np.maximum(e, 0.0)
        f *= e
        if k < r - 1:
            p = np.clip(p_lo + W[:, k] * e, 1e-300, 1.0 - 1e-16)
            z[:, k] = np.clip(special.ndtri(p), -40.0, 40.0)
    return f


def _as_seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def mvn_cdf(problem: MvnProblem, n_samples: int = 10**6, seed=42,
            replicates: int = 25) -> MvnEstimate:
    """Estimate ``Phi_d(upper, corr)``.

    ``n_samples`` is the total budget, split into ``replicates`` scrambled
    Sobol' point sets of a power-of-two size each.  The returned standard
    error is the spread of the replicate means.
    """
    if n_samples < 1000:
        raise ValidationError("n_samples must be >= 1000")
    if replicates < 2:
        raise ValidationError("at least two replicates are needed for an error estimate")
    b = problem.upper
    if np.any(b == -np.inf):
        return MvnEstimate(0.0, 0.0, 0)
    active = np.flatnonzero(b < np.inf)
    if active.size == 0:
        return MvnEstimate(1.0, 0.0, 0)
    prob = MvnProblem(b[active], problem.corr[np.ix_(active, active)])
    prob = degenerate_reduce(prob)
    if prob.d == 1:
        return MvnEstimate(float(special.ndtr(prob.upper[0])), 0.0, 0)

    R = _regularise(prob.corr)
    fac = _factorize(prob.upper, R)
    if fac.rank < prob.d:
        zero_rows = [i for i in range(fac.rank, prob.d)
                     if not np.any(np.abs(fac.L[i]) > LOAD_TOL)]
        if any(fac.b[i] < 0 for i in zero_rows):
            return MvnEstimate(0.0, 0.0, 0)
    dim = fac.rank - 1
    if dim == 0 and not fac.extra[0]:
        return MvnEstimate(float(special.ndtr(fac.b[0] / fac.L[0, 0])), 0.0, 0)

    per_rep = 2 ** max(1, int(round(math.log2(max(n_samples / replicates, 2)))))
    means = np.empty(replicates)
    for r, child in enumerate(_as_seed_sequence(seed).spawn(replicates)):
        if dim == 0:
            W = np.zeros((per_rep, 0))
        else:
            engine = qmc.Sobol(d=dim, scramble=True, seed=np.random.default_rng(child))
            W = engine.random(per_rep)
        means[r] = _integrand(W, fac).mean()
    value = float(np.clip(means.mean(), 0.0, 1.0))
    se = float(means.std(ddof=1) / math.sqrt(replicates))
    return MvnEstimate(value, se, per_rep * replicates)


def mvn_cdf_from(upper, corr, options: MvnOptions | None = None, seed=None) -> MvnEstimate:
    options = options or MvnOptions()
    return mvn_cdf(MvnProblem(upper, corr), options.n_samples,
                   options.seed if seed is None else seed, options.replicates)
