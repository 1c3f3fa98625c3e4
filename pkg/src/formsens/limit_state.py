"""Limit-state functions, their U-space gradients, and cut-set systems."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from . import expression
from .dual import Dual
from .errors import DomainError, UnknownIdentifier, ValidationError
from .probability import RandomVector, from_standard_normal


@dataclass(frozen=True)
class LimitStateFunction:
    """Parsed limit state ``g(x)``; failure is ``g <= 0``.

    ``parameters`` holds deterministic constants referenced by the
    expression; everything else in ``variables`` must be bound on evaluation.
    """

    name: str
    text: str
    ast: expression.Node
    parameters: Mapping[str, float] = field(default_factory=dict)
    variables: tuple[str, ...] = ()

    def with_parameters(self, **values) -> "LimitStateFunction":
        params = dict(self.parameters)
        for k, v in values.items():
            if k in params:
                params[k] = float(v)
        return LimitStateFunction(self.name, self.text, self.ast, params, self.variables)

    def __str__(self):
        return f"{self.name}: {self.text}"


def parse_limit_state(text: str, vocabulary, parameters: Mapping[str, float] | None = None,
                      name: str = "g") -> LimitStateFunction:
    """Parse ``text``; identifiers must come from ``vocabulary`` or ``parameters``."""
    if not text or not text.strip():
        raise ValidationError(f"limit state {name!r} has an empty expression")
    parameters = {k: float(v) for k, v in (parameters or {}).items()}
    ast = expression.parse(text)
    allowed = set(vocabulary) | set(parameters)
    expression.check_identifiers(ast, allowed)
    used = expression.identifiers(ast)
    variables = tuple(sorted(used - set(parameters)))
    return LimitStateFunction(name, text.strip(), ast, parameters, variables)


def evaluate(lsf: LimitStateFunction, x: Mapping[str, float]) -> float:
    env = dict(lsf.parameters)
    for v in lsf.variables:
        if v not in x:
            raise UnknownIdentifier(v)
        env[v] = x[v]
    value = expression.evaluate(lsf.ast, env)
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{lsf.name} evaluated to {value}")
    return value


def evaluate_samples(lsf: LimitStateFunction, x: np.ndarray, rv: RandomVector) -> np.ndarray:
    """Vectorised evaluation on X-space samples of shape ``(N, n)``."""
    env = dict(lsf.parameters)
    for v in lsf.variables:
        env[v] = x[:, rv.index(v)]
    with np.errstate(all="ignore"):
        out = expression.evaluate(lsf.ast, env)
    return np.broadcast_to(np.asarray(out, dtype=float), (x.shape[0],)).copy()


def evaluate_in_u(lsf: LimitStateFunction, u, rv: RandomVector) -> tuple[float, np.ndarray]:
    """Value and exact gradient of ``G(u) = g(T^-1(u))``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (rv.n,) or not np.all(np.isfinite(u)):
        raise ValidationError(f"expected {rv.n} finite U-space coordinates")
    env: dict[str, object] = dict(lsf.parameters)
    for i, (name, m) in enumerate(zip(rv.names, rv.marginals)):
        g = np.zeros(rv.n)
        g[i] = float(m.dx_du(u[i]))
        env[name] = Dual(float(m.from_u(u[i])), g)
    out = expression.evaluate(lsf.ast, env)
    if not isinstance(out, Dual):
        out = Dual(out, np.zeros(rv.n))
    if not (math.isfinite(out.val) and np.all(np.isfinite(out.grad))):
        raise DomainError(f"{lsf.name} is not finite at u={u.tolist()}")
    return out.val, out.grad


def u_space_function(lsf: LimitStateFunction, rv: RandomVector):
    """Closure ``u -> (G(u), grad G(u))`` for the design-point solvers."""
    for v in lsf.variables:
        if v not in rv.names:
            raise UnknownIdentifier(v)

    def G(u):
        return evaluate_in_u(lsf, u, rv)

    G.name = lsf.name
    return G


def finite_difference_gradient(lsf, u, rv, step=1e-5):
    u = np.asarray(u, dtype=float)
    grad = np.empty(rv.n)
    for i in range(rv.n):
        e = np.zeros(rv.n)
        e[i] = step
        hi = evaluate_in_u(lsf, u + e, rv)[0]
        lo = evaluate_in_u(lsf, u - e, rv)[0]
        grad[i] = (hi - lo) / (2 * step)
    return grad


class SystemMode(str, Enum):
    COMPONENT = "component"
    SERIES = "series"
    PARALLEL = "parallel"
    GENERAL = "general"


@dataclass(frozen=True)
class SystemDefinition:
    """Union of cut-set intersections; indices are 0-based component ids."""

    cut_sets: tuple[tuple[int, ...], ...]
    m: int

    def __post_init__(self):
        cuts = tuple(tuple(sorted(set(int(i) for i in c))) for c in self.cut_sets)
        if self.m < 1:
            raise ValidationError("system needs at least one component")
        if not cuts:
            raise ValidationError("system needs at least one cut set")
        for c in cuts:
            if not c:
                raise ValidationError("empty cut set")
            if c[0] < 0 or c[-1] >= self.m:
                raise ValidationError(f"cut set {c} references a component outside 0..{self.m - 1}")
        object.__setattr__(self, "cut_sets", cuts)

    @classmethod
    def component(cls, i: int = 0, m: int = 1):
        return cls(((i,),), m)

    @classmethod
    def series(cls, m: int):
        return cls(tuple((i,) for i in range(m)), m)

    @classmethod
    def parallel(cls, m: int):
        return cls((tuple(range(m)),), m)

    @property
    def K(self) -> int:
        return len(self.cut_sets)

    @property
    def mode(self) -> SystemMode:
        if self.K == 1 and len(self.cut_sets[0]) == 1:
            return SystemMode.COMPONENT
        if self.K == 1:
            return SystemMode.PARALLEL
        if all(len(c) == 1 for c in self.cut_sets) and self.K == self.m:
            return SystemMode.SERIES
        return SystemMode.GENERAL

    def expand(self, counts: Sequence[int]) -> "SystemDefinition":
        """Replace component ``i`` by ``counts[i]`` alternatives in series.

        Used when a component has several design points: each cut set is
        distributed over the alternatives of its members.
        """
        if len(counts) != self.m:
            raise ValidationError("one count per component required")
        offsets = np.concatenate([[0], np.cumsum(counts)]).astype(int)
        new_cuts = []
        for c in self.cut_sets:
            choices = [range(offsets[i], offsets[i + 1]) for i in c]
            new_cuts.extend(itertools.product(*choices))
        return SystemDefinition(tuple(new_cuts), int(offsets[-1]))


@dataclass(frozen=True)
class ReliabilityProblem:
    rv: RandomVector
    limit_states: tuple[LimitStateFunction, ...]
    system: SystemDefinition

    def __post_init__(self):
        object.__setattr__(self, "limit_states", tuple(self.limit_states))
        if len(self.limit_states) != self.system.m:
            raise ValidationError(
                f"system has {self.system.m} components but {len(self.limit_states)} limit states")
        for lsf in self.limit_states:
            for v in lsf.variables:
                if v not in self.rv.names:
                    raise UnknownIdentifier(v)

    def g_values_u(self, u: np.ndarray) -> np.ndarray:
        """Limit-state values ``(N, m)`` at U-space samples ``(N, n)``."""
        x = from_standard_normal(u, self.rv)
        return np.column_stack([evaluate_samples(g, x, self.rv) for g in self.limit_states])
