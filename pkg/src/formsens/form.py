"""Design-point search and linearisation of limit states in U-space.

Functions here take ``G`` as a callable ``u -> (value, gradient)``; see
:func:`formsens.limit_state.u_space_function`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import optimize

from .errors import (DimensionMismatch, DomainError, Infeasible, NoConvergence,
                     NumericalError, ZeroGradient)
from .limit_state import SystemDefinition


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 200
    g_tol: float = 1e-6
    stat_tol: float = 1e-6
    n_starts: int = 1
    dedup_radius: float = 0.05
    joint_linearization: bool = False
    seed: int = 42


@dataclass(frozen=True)
class ComponentLinearization:
    alpha: np.ndarray
    beta: float
    u_star: np.ndarray
    converged: bool = True
    iterations: int = 0
    g_value: float = 0.0

    @property
    def reliability_index(self) -> float:
        return self.beta


@dataclass(frozen=True)
class LinearizedSystem:
    """FORM linearisation: rows of ``A`` are alpha vectors, ``B`` the betas.

    ``term_blocks`` optionally overrides the linearisation used by a
    particular inclusion-exclusion term (keyed by the frozenset of cut-set
    indices); each value is ``(component_indices, A_sub, B_sub)``.
    """

    A: np.ndarray
    B: np.ndarray
    R: np.ndarray
    system: SystemDefinition
    names: tuple[str, ...] = ()
    term_blocks: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]


def _grad_norm(grad):
    norm = float(np.linalg.norm(grad))
    if not norm >= 1e-14:
        raise ZeroGradient(f"gradient norm {norm:.3e} below 1e-14")
    return norm


def _safe_eval(G, u):
    try:
        g, dg = G(u)
    except (DomainError, NumericalError):
        return None
    return float(g), np.asarray(dg, dtype=float)


def hlrf_step(u, g, dg):
    return (dg @ u - g) / (dg @ dg) * dg


def find_design_point(G, u0=None, opts: SolverOptions = SolverOptions(), n: int | None = None
                      ) -> ComponentLinearization:
    """Improved HL-RF iteration with Armijo line search.

    Without ``u0`` the search starts at the origin pushed by one HL-RF step.
    The merit function is ``|u|^2/2 + c|G(u)|`` with ``c`` kept above
    ``|u| / |grad G|``.
    """
    if u0 is None:
        if n is None:
            raise ValueError("n is required when u0 is not given")
        u0 = np.zeros(n)
        origin = True
    else:
        u0 = np.asarray(u0, dtype=float)
        origin = False
    g0, _ = G(np.zeros(u0.size))
    scale = abs(g0) if abs(g0) > 1e-300 else 1.0

    u = u0.copy()
    g, dg = G(u)
    if origin:
        _grad_norm(dg)
        u = hlrf_step(u, g, dg)
        g, dg = G(u)

    for it in range(1, opts.max_iter + 1):
        norm = _grad_norm(dg)
        alpha = -dg / norm
        beta = float(alpha @ u)
        if abs(g) <= opts.g_tol * scale and np.linalg.norm(u - beta * alpha) <= opts.stat_tol:
            return ComponentLinearization(alpha, beta, u, True, it - 1, g)

        d = hlrf_step(u, g, dg) - u
        c = 2.0 * np.linalg.norm(u) / norm + 10.0
        merit = 0.5 * u @ u + c * abs(g)
        slope = (u + c * np.sign(g) * dg) @ d
        lam = 1.0
        while True:
            trial = u + lam * d
            res = _safe_eval(G, trial)
            if res is not None:
                m_trial = 0.5 * trial @ trial + c * abs(res[0])
                if slope >= 0 or m_trial <= merit + 0.5 * lam * slope:
                    break
            lam *= 0.5
            if lam < 1e-10:
                if res is None:
                    raise DomainError(f"line search left the domain of G at u={u.tolist()}")
                break
        u = trial
        g, dg = res

    raise NoConvergence(f"design point search did not converge in {opts.max_iter} iterations")


def multi_start_design_points(G, n: int, opts: SolverOptions = SolverOptions(),
                              n_starts: int | None = None, seed: int | None = None
                              ) -> list[ComponentLinearization]:
    """Distinct design points from an origin start plus random sphere starts."""
    n_starts = opts.n_starts if n_starts is None else n_starts
    seed = opts.seed if seed is None else seed
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    rng = np.random.default_rng(seed)
    radii = (1.0, 2.0, 3.0)
    starts = [None]
    for j in range(n_starts - 1):
        d = rng.standard_normal(n)
        starts.append(radii[j % 3] * d / np.linalg.norm(d))

    found: list[ComponentLinearization] = []
    for u0 in starts:
        try:
            lin = find_design_point(G, u0, opts, n=n)
        except (NoConvergence, ZeroGradient, DomainError):
            continue
        if all(np.linalg.norm(lin.u_star - f.u_star) >= opts.dedup_radius for f in found):
            found.append(lin)
    found.sort(key=lambda f: float(np.linalg.norm(f.u_star)))
    return found


def linearize_at(G, u_star) -> ComponentLinearization:
    """First-order Taylor expansion of ``G`` at an arbitrary point.

    ``beta`` includes the ``G(u*)`` offset so that inactive constraints at a
    joint design point are still linearised exactly at their value.
    """
    u_star = np.asarray(u_star, dtype=float)
    g, dg = G(u_star)
    norm = _grad_norm(dg)
    alpha = -dg / norm
    beta = float(alpha @ u_star + g / norm)
    return ComponentLinearization(alpha, beta, u_star, True, 0, float(g))


def find_joint_design_point(G_list, n: int, u0=None, opts: SolverOptions = SolverOptions()):
    """Minimum-norm point of ``{G_i(u) <= 0 for all i}``.

    Quadratic penalty with escalating weight, followed by a Newton
    projection onto the active constraints.  Returns ``(u_star, lins)``.
    """
    if len(G_list) == 1:
        lin = find_design_point(G_list[0], u0, opts, n=n)
        return lin.u_star, [lin]

    scales = []
    for G in G_list:
        g0, _ = G(np.zeros(n))
        scales.append(abs(g0) if abs(g0) > 1e-300 else 1.0)
    scales = np.array(scales)

    def constraints(u):
        vals = np.empty(len(G_list))
        grads = np.empty((len(G_list), n))
        for i, G in enumerate(G_list):
            g, dg = G(u)
            vals[i] = g / scales[i]
            grads[i] = dg / scales[i]
        return vals, grads

    def objective(u, c):
        try:
            vals, grads = constraints(u)
        except (DomainError, NumericalError):
            return 1e300, np.zeros(n)
        viol = np.maximum(vals, 0.0)
        f = 0.5 * u @ u + c * viol @ viol
        return f, u + 2.0 * c * viol @ grads

    if u0 is None:
        # start from the component design point that is farthest out
        best = None
        for G in G_list:
            try:
                lin = find_design_point(G, None, opts, n=n)
            except (NoConvergence, ZeroGradient, DomainError):
                continue
            if best is None or np.linalg.norm(lin.u_star) > np.linalg.norm(best):
                best = lin.u_star
        u = np.zeros(n) if best is None else best.copy()
    else:
        u = np.asarray(u0, dtype=float).copy()

    c = 1.0
    while True:
        res = optimize.minimize(objective, u, args=(c,), jac=True, method="BFGS",
                                options={"gtol": 1e-12, "maxiter": 2000})
        u = res.x
        vals, _ = constraints(u)
        if np.max(vals) <= opts.g_tol or c >= 1e12:
            break
        c *= 10.0

    u = _project_active(constraints, u)
    vals, _ = constraints(u)
    if np.max(vals) > opts.g_tol:
        raise Infeasible(f"no feasible joint point found (violation {np.max(vals):.3e})")
    return u, [linearize_at(G, u) for G in G_list]


def _project_active(constraints, u, iters=50):
    vals, grads = constraints(u)
    active = vals > -1e-4
    for _ in range(iters):
        vals, grads = constraints(u)
        Ja = grads[active]
        ga = vals[active]
        # least squares copes with duplicated (coincident) constraints
        lam = np.linalg.lstsq(Ja @ Ja.T, Ja @ u - ga, rcond=None)[0]
        new = Ja.T @ lam
        step = np.linalg.norm(new - u)
        u = new
        if step < 1e-12:
            break
    return u


def assemble_system(linearizations, system: SystemDefinition, names=()) -> LinearizedSystem:
    if len(linearizations) != system.m:
        raise DimensionMismatch(
            f"{len(linearizations)} linearisations for a system of {system.m} components")
    dims = {lin.alpha.size for lin in linearizations}
    if len(dims) != 1:
        raise DimensionMismatch(f"alpha vectors of different lengths {sorted(dims)}")
    A = np.vstack([lin.alpha for lin in linearizations])
    B = np.array([lin.beta for lin in linearizations], dtype=float)
    return LinearizedSystem(A, B, correlation(A), system, tuple(names))


def correlation(A: np.ndarray) -> np.ndarray:
    R = np.clip(A @ A.T, -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return R


def linear_system(alphas, betas, system: SystemDefinition | None = None, names=()
                  ) -> LinearizedSystem:
    """Linearised system straight from alpha rows and betas (U-space linear LSFs)."""
    A = np.atleast_2d(np.asarray(alphas, dtype=float))
    A = A / np.linalg.norm(A, axis=1)[:, None]
    B = np.atleast_1d(np.asarray(betas, dtype=float))
    system = system or SystemDefinition.series(A.shape[0])
    if B.size != A.shape[0] or system.m != A.shape[0]:
        raise DimensionMismatch("alphas, betas and system disagree on the component count")
    return LinearizedSystem(A, B, correlation(A), system, tuple(names))


def joint_term_blocks(G_list, system: SystemDefinition, n: int,
                      opts: SolverOptions = SolverOptions()) -> dict:
    """Per inclusion-exclusion term linearisation at that term's joint design point."""
    blocks = {}
    cache = {}
    K = system.K
    for size in range(1, K + 1):
        for z in combinations(range(K), size):
            comps = tuple(sorted(set().union(*(system.cut_sets[k] for k in z))))
            if comps not in cache:
                _, lins = find_joint_design_point([G_list[i] for i in comps], n, None, opts)
                A_sub = np.vstack([lin.alpha for lin in lins])
                B_sub = np.array([lin.beta for lin in lins])
                cache[comps] = (comps, A_sub, B_sub)
            blocks[frozenset(z)] = cache[comps]
    return blocks
