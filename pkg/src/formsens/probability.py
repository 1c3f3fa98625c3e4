"""Independent input random vectors and the map to standard-normal space.

Only the normal and lognormal marginals are provided.  New marginals subclass
:class:`MarginalDistribution` and implement ``cdf``, ``sf``, ``ppf``, ``pdf``
and ``support``; the closed-form ``to_u``/``from_u`` overrides on the built-in
classes are an accuracy optimisation, not part of the contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import NonFinite, OutOfSupport, ValidationError

# CDF values below this (or survival values below it) have no finite image
# in U-space worth trusting.
CDF_EPS = 1e-300
_LOG_CDF_EPS = math.log(CDF_EPS)


def std_normal_cdf(u):
    return special.ndtr(u)


def std_normal_ppf(p):
    return special.ndtri(p)


def std_normal_pdf(u):
    return np.exp(-0.5 * np.square(u)) / math.sqrt(2.0 * math.pi)


class MarginalDistribution:
    """Base class for a continuous marginal with strictly increasing CDF."""

    kind = "abstract"

    def __init__(self, mean: float, std_dev: float):
        mean = float(mean)
        std_dev = float(std_dev)
        if not (math.isfinite(mean) and math.isfinite(std_dev)):
            raise ValidationError("distribution moments must be finite")
        if std_dev <= 0.0:
            raise ValidationError(f"std_dev must be > 0, got {std_dev}")
        self.mean = mean
        self.std_dev = std_dev

    def __repr__(self):
        return f"{type(self).__name__}(mean={self.mean!r}, std_dev={self.std_dev!r})"

    def __eq__(self, other):
        return (type(self) is type(other) and self.mean == other.mean
                and self.std_dev == other.std_dev)

    def __hash__(self):
        return hash((self.kind, self.mean, self.std_dev))

    # generic interface -------------------------------------------------
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def ppf(self, p):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def _check_support(self, x):
        lo, hi = self.support()
        x = np.asarray(x, dtype=float)
        if np.any(~np.isfinite(x)) or np.any(x <= lo) or np.any(x >= hi):
            raise OutOfSupport(f"{self!r}: value outside support ({lo}, {hi})")
        return x

    def to_u(self, x):
        """Phi^-1(F(x)), computed from whichever tail is smaller."""
        x = self._check_support(x)
        p = np.asarray(self.cdf(x), dtype=float)
        q = np.asarray(self.sf(x), dtype=float)
        if np.any(np.minimum(p, q) < CDF_EPS):
            raise NonFinite(f"{self!r}: CDF rounds to 0 or 1")
        u = np.where(p < 0.5, special.ndtri(p), -special.ndtri(q))
        return u[()] if u.ndim == 0 else u

    def from_u(self, u):
        u = np.asarray(u, dtype=float)
        x = np.where(u < 0, self.ppf(special.ndtr(u)), self.isf(special.ndtr(-u)))
        return x[()] if x.ndim == 0 else x

    def isf(self, q):
        return self.ppf(1.0 - np.asarray(q))

    def dx_du(self, u):
        """Derivative of the inverse map, phi(u) / f(x(u))."""
        x = self.from_u(u)
        return std_normal_pdf(u) / self.pdf(x)


class Normal(MarginalDistribution):
    kind = "normal"

    def support(self):
        return (-math.inf, math.inf)

    def _check_support(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~np.isfinite(x)):
            raise OutOfSupport(f"{self!r}: non-finite value")
        return x

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.std_dev)

    def sf(self, x):
        return special.ndtr((self.mean - np.asarray(x, dtype=float)) / self.std_dev)

    def ppf(self, p):
        return self.mean + self.std_dev * special.ndtri(p)

    def isf(self, q):
        return self.mean - self.std_dev * special.ndtri(q)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.std_dev
        return std_normal_pdf(z) / self.std_dev

    def to_u(self, x):
        x = self._check_support(x)
        u = (x - self.mean) / self.std_dev
        _check_tail(u, self)
        return u[()] if np.ndim(u) == 0 else u

    def from_u(self, u):
        return self.mean + self.std_dev * np.asarray(u, dtype=float)

    def dx_du(self, u):
        return self.std_dev + 0.0 * np.asarray(u, dtype=float)


class Lognormal(MarginalDistribution):
    """Lognormal parameterised by the mean and std of the variable itself."""

    kind = "lognormal"

    def __init__(self, mean: float, std_dev: float):
        super().__init__(mean, std_dev)
        if self.mean <= 0.0:
            raise ValidationError(f"lognormal mean must be > 0, got {self.mean}")
        # moment matching
        self.zeta = math.sqrt(math.log1p((self.std_dev / self.mean) ** 2))
        self.lam = math.log(self.mean) - 0.5 * self.zeta ** 2

    def support(self):
        return (0.0, math.inf)

    def _z(self, x):
        return (np.log(np.asarray(x, dtype=float)) - self.lam) / self.zeta

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, special.ndtr(self._z(np.where(x > 0, x, 1.0))), 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, special.ndtr(-self._z(np.where(x > 0, x, 1.0))), 1.0)

    def ppf(self, p):
        return np.exp(self.lam + self.zeta * special.ndtri(p))

    def isf(self, q):
        return np.exp(self.lam - self.zeta * special.ndtri(q))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return std_normal_pdf(self._z(x)) / (self.zeta * x)

    def to_u(self, x):
        x = self._check_support(x)
        u = self._z(x)
        _check_tail(u, self)
        return u[()] if np.ndim(u) == 0 else u

    def from_u(self, u):
        return np.exp(self.lam + self.zeta * np.asarray(u, dtype=float))

    def dx_du(self, u):
        return self.zeta * self.from_u(u)


def _check_tail(u, dist):
    if np.any(special.log_ndtr(-np.abs(u)) < _LOG_CDF_EPS):
        raise NonFinite(f"{dist!r}: CDF rounds to 0 or 1")


DISTRIBUTIONS = {"normal": Normal, "lognormal": Lognormal}


def marginal(kind: str, mean: float, std_dev: float) -> MarginalDistribution:
    try:
        cls = DISTRIBUTIONS[kind.lower()]
    except KeyError:
        raise ValidationError(
            f"unknown distribution {kind!r}; expected one of {sorted(DISTRIBUTIONS)}"
        ) from None
    return cls(mean, std_dev)


@dataclass(frozen=True)
class RandomVector:
    """Ordered, named vector of independent marginals."""

    marginals: tuple[MarginalDistribution, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        marginals = tuple(self.marginals)
        names = tuple(self.names) or tuple(f"U{i + 1}" for i in range(len(marginals)))
        if len(names) != len(marginals):
            raise ValidationError("names and marginals differ in length")
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate variable names in {names}")
        if not marginals:
            raise ValidationError("random vector needs at least one variable")
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "names", names)

    @classmethod
    def standard_normal(cls, n: int, names: Sequence[str] = ()):
        return cls(tuple(Normal(0.0, 1.0) for _ in range(n)), tuple(names))

    def __len__(self):
        return len(self.marginals)

    @property
    def n(self) -> int:
        return len(self.marginals)

    def index(self, name: str) -> int:
        return self.names.index(name)


def to_standard_normal(x, rv: RandomVector) -> np.ndarray:
    """Map X-space points (shape ``(n,)`` or ``(N, n)``) to U-space."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != rv.n:
        raise ValidationError(f"expected {rv.n} coordinates, got {x.shape[-1]}")
    cols = [m.to_u(x[..., i]) for i, m in enumerate(rv.marginals)]
    return np.stack(cols, axis=-1)


def from_standard_normal(u, rv: RandomVector) -> np.ndarray:
    """Map U-space points (shape ``(n,)`` or ``(N, n)``) to X-space."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != rv.n:
        raise ValidationError(f"expected {rv.n} coordinates, got {u.shape[-1]}")
    cols = [m.from_u(u[..., i]) for i, m in enumerate(rv.marginals)]
    return np.stack(cols, axis=-1)


def from_standard_normal_jacobian(u, rv: RandomVector) -> np.ndarray:
    """Diagonal of dx/du at a single U-space point."""
    u = np.asarray(u, dtype=float)
    return np.array([float(m.dx_du(u[i])) for i, m in enumerate(rv.marginals)])
