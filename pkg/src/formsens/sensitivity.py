"""FORM system probabilities and variance-based reliability sensitivities.

Each linearised component fails when ``alpha_i . U >= beta_i``.  With
``Y = A U`` the conditional failure probability given ``U_v`` is a
multinormal CDF in ``A_v u_v``, and the second moment of that conditional
probability is a single multinormal integral of twice the dimension whose
cross-covariance block is ``A_v A_v^T``.  General systems expand the
conditional probability by inclusion-exclusion over cut sets, which turns
the second moment into a signed double sum over pairs of terms.

All quantities come back as :class:`Estimate` (value, std_error); the error
is first-order propagation of the multinormal replicate errors under an
independence assumption across calls.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (DegenerateProbability, InconsistentEstimate, SubsetTooLarge,
                     TooManyCutSets, ValidationError)
from .form import LinearizedSystem, correlation
from .limit_state import SystemMode
from .mvn import MvnOptions, MvnProblem, mvn_cdf

MAX_CUT_SETS_PROBABILITY = 20
MAX_CUT_SETS_SENSITIVITY = 8
MAX_MVN_DIM = 25
MAX_SUBSET = 12

# tags that keep the seed streams of distinct integrals apart
_TAG_P, _TAG_VAR = 1, 2


class Estimate(NamedTuple):
    value: float
    std_error: float


@dataclass
class SensitivityReport:
    p_f: float
    p_f_std_error: float
    mode: str
    names: tuple[str, ...]
    first_order: dict = field(default_factory=dict)
    total_effect: dict = field(default_factory=dict)
    closed: dict = field(default_factory=dict)
    variance_components: dict = field(default_factory=dict)
    mvn_std_errors: dict = field(default_factory=dict)


def _seed(mvn: MvnOptions, *parts) -> list[int]:
    return [int(mvn.seed), *(int(p) for p in parts)]


def _mvn(upper, corr, mvn: MvnOptions, seed) -> Estimate:
    if np.size(upper) > MAX_MVN_DIM:
        raise TooManyCutSets(f"multinormal dimension {np.size(upper)} exceeds {MAX_MVN_DIM}")
    e = mvn_cdf(MvnProblem(upper, corr), mvn.n_samples, np.random.SeedSequence(seed),
                mvn.replicates)
    return Estimate(e.value, e.std_error)


def resolve_mode(ls: LinearizedSystem, mode=None) -> str:
    if mode is None:
        mode = ls.system.mode
    mode = SystemMode(mode).value if not isinstance(mode, SystemMode) else mode.value
    if mode == "component":
        return "parallel"
    return mode


def resolve_subset(ls: LinearizedSystem, v: Iterable) -> tuple[int, ...]:
    out = set()
    for item in v:
        if isinstance(item, str):
            if item not in ls.names:
                raise ValidationError(f"unknown variable {item!r}")
            out.add(ls.names.index(item))
        else:
            i = int(item)
            if not 0 <= i < ls.n:
                raise ValidationError(f"variable index {i} outside 0..{ls.n - 1}")
            out.add(i)
    return tuple(sorted(out))


def _mask(cols) -> int:
    return sum(1 << c for c in cols)


def _complement(ls, cols):
    return tuple(i for i in range(ls.n) if i not in cols)


# inclusion-exclusion terms --------------------------------------------------

def _terms(ls: LinearizedSystem):
    """(sign, components, A_z, B_z) for every non-empty set of cut sets."""
    K = ls.system.K
    out = []
    for size in range(1, K + 1):
        for z in itertools.combinations(range(K), size):
            key = frozenset(z)
            if key in ls.term_blocks:
                comps, A_z, B_z = ls.term_blocks[key]
            else:
                comps = tuple(sorted(set().union(*(ls.system.cut_sets[k] for k in z))))
                A_z, B_z = ls.A[list(comps)], ls.B[list(comps)]
            out.append(((-1) ** (size - 1), comps, np.asarray(A_z), np.asarray(B_z)))
    return out


# probabilities ----------------------------------------------------------------

def form_series_probability(ls: LinearizedSystem, mvn: MvnOptions = MvnOptions()) -> Estimate:
    e = _mvn(ls.B, ls.R, mvn, _seed(mvn, _TAG_P, 0))
    return Estimate(1.0 - e.value, e.std_error)


def form_parallel_probability(ls: LinearizedSystem, mvn: MvnOptions = MvnOptions()) -> Estimate:
    return _mvn(-ls.B, ls.R, mvn, _seed(mvn, _TAG_P, 1))


def form_system_probability(ls: LinearizedSystem, mvn: MvnOptions = MvnOptions()) -> Estimate:
    if ls.system.K > MAX_CUT_SETS_PROBABILITY:
        raise TooManyCutSets(f"{ls.system.K} cut sets exceed {MAX_CUT_SETS_PROBABILITY}")
    total = 0.0
    var = 0.0
    for t, (sign, _, A_z, B_z) in enumerate(_terms(ls)):
        e = _mvn(-B_z, correlation(A_z), mvn, _seed(mvn, _TAG_P, 2, t))
        total += sign * e.value
        var += e.std_error ** 2
    return Estimate(min(max(total, 0.0), 1.0), math.sqrt(var))


def form_probability(ls: LinearizedSystem, mode=None, mvn: MvnOptions = MvnOptions()) -> Estimate:
    mode = resolve_mode(ls, mode)
    if mode == "series":
        return form_series_probability(ls, mvn)
    if mode == "parallel":
        return form_parallel_probability(ls, mvn)
    return form_system_probability(ls, mvn)


# conditional variances ------------------------------------------------------

def _check_p(p: Estimate):
    if not 0.0 < p.value < 1.0:
        raise DegenerateProbability(f"failure probability {p.value} leaves no variance to decompose")


def _clamp(value, se, label):
    if value >= 0.0:
        return value
    if value >= -3.0 * se - 1e-14:
        return 0.0
    raise InconsistentEstimate(
        f"{label}: variance estimate {value:.3e} below -3 standard errors ({se:.3e})")


def _second_moment_series_parallel(ls, cols, sign, mvn, key):
    Ac = ls.A[:, list(cols)]
    cross = Ac @ Ac.T
    big = np.block([[ls.R, cross], [cross.T, ls.R]])
    upper = sign * np.concatenate([ls.B, ls.B])
    return _mvn(upper, big, mvn, key)


def _second_moment_general(ls, cols, mvn, tag):
    if ls.system.K > MAX_CUT_SETS_SENSITIVITY:
        raise TooManyCutSets(f"{ls.system.K} cut sets exceed {MAX_CUT_SETS_SENSITIVITY}")
    cols = list(cols)
    terms = _terms(ls)
    total = 0.0
    var = 0.0
    for a, b in itertools.combinations_with_replacement(range(len(terms)), 2):
        sz, _, Az, Bz = terms[a]
        sw, _, Aw, Bw = terms[b]
        cross = Az[:, cols] @ Aw[:, cols].T
        big = np.block([[correlation(Az), cross], [cross.T, correlation(Aw)]])
        e = _mvn(-np.concatenate([Bz, Bw]), big, mvn,
                 _seed(mvn, _TAG_VAR, tag, a, b))
        weight = sz * sw * (1 if a == b else 2)  # (z, w) and (w, z) are equal
        total += weight * e.value
        var += (weight * e.std_error) ** 2
    return Estimate(total, math.sqrt(var))


def conditional_variance(ls: LinearizedSystem, cols, mode=None,
                         mvn: MvnOptions = MvnOptions(), p: Estimate | None = None
                         ) -> Estimate:
    """Var(Pr(F | U_cols)) of the linearised system event."""
    mode = resolve_mode(ls, mode)
    cols = resolve_subset(ls, cols)
    if mode == "general" and ls.system.K > MAX_CUT_SETS_SENSITIVITY:
        raise TooManyCutSets(f"{ls.system.K} cut sets exceed {MAX_CUT_SETS_SENSITIVITY}")
    p = form_probability(ls, mode, mvn) if p is None else p
    key_tag = _mask(cols)
    if mode == "series":
        m2 = _second_moment_series_parallel(ls, cols, 1.0, mvn, _seed(mvn, _TAG_VAR, 0, key_tag))
        value = m2.value - (1.0 - p.value) ** 2
        se = math.hypot(m2.std_error, 2.0 * (1.0 - p.value) * p.std_error)
    elif mode == "parallel":
        m2 = _second_moment_series_parallel(ls, cols, -1.0, mvn, _seed(mvn, _TAG_VAR, 1, key_tag))
        value = m2.value - p.value ** 2
        se = math.hypot(m2.std_error, 2.0 * p.value * p.std_error)
    else:
        m2 = _second_moment_general(ls, cols, mvn, key_tag)
        value = m2.value - p.value ** 2
        se = math.hypot(m2.std_error, 2.0 * p.value * p.std_error)
    return Estimate(_clamp(value, se, f"Var(E[Z|U_{list(cols)}])"), se)


def var_cond_exp(ls: LinearizedSystem, v, mode=None, mvn: MvnOptions = MvnOptions(),
                 p: Estimate | None = None) -> Estimate:
    return conditional_variance(ls, v, mode, mvn, p)


def _index_se(var_se, p):
    return var_se / (p.value * (1.0 - p.value))


def first_order_index(ls: LinearizedSystem, i, mode=None, mvn: MvnOptions = MvnOptions(),
                      p: Estimate | None = None) -> Estimate:
    p = form_probability(ls, mode, mvn) if p is None else p
    _check_p(p)
    var = conditional_variance(ls, [i], mode, mvn, p)
    denom = p.value * (1.0 - p.value)
    return Estimate(var.value / denom, _index_se(var.std_error, p))


def total_effect_index(ls: LinearizedSystem, v, mode=None, mvn: MvnOptions = MvnOptions(),
                       p: Estimate | None = None) -> Estimate:
    p = form_probability(ls, mode, mvn) if p is None else p
    _check_p(p)
    if isinstance(v, (int, np.integer, str)):
        v = [v]
    cols = resolve_subset(ls, v)
    var = conditional_variance(ls, _complement(ls, cols), mode, mvn, p)
    denom = p.value * (1.0 - p.value)
    return Estimate(1.0 - var.value / denom, _index_se(var.std_error, p))


def closed_index(ls: LinearizedSystem, v, mode=None, mvn: MvnOptions = MvnOptions(),
                 p: Estimate | None = None) -> Estimate:
    p = form_probability(ls, mode, mvn) if p is None else p
    _check_p(p)
    var = conditional_variance(ls, v, mode, mvn, p)
    return Estimate(var.value / (p.value * (1.0 - p.value)), _index_se(var.std_error, p))


def variance_component(ls: LinearizedSystem, v, mode=None, mvn: MvnOptions = MvnOptions(),
                       p: Estimate | None = None, _memo: dict | None = None) -> Estimate:
    """Sobol' variance component of subset ``v`` by the subset recursion."""
    cols = resolve_subset(ls, v)
    if len(cols) > MAX_SUBSET:
        raise SubsetTooLarge(f"|v| = {len(cols)} exceeds {MAX_SUBSET}")
    p = form_probability(ls, mode, mvn) if p is None else p
    memo = {} if _memo is None else _memo
    return _component(ls, cols, mode, mvn, p, memo)


def _component(ls, cols, mode, mvn, p, memo):
    if cols in memo:
        return memo[cols]
    top = conditional_variance(ls, cols, mode, mvn, p)
    value, var = top.value, top.std_error ** 2
    for size in range(1, len(cols)):
        for w in itertools.combinations(cols, size):
            sub = _component(ls, w, mode, mvn, p, memo)
            value -= sub.value
            var += sub.std_error ** 2
    memo[cols] = Estimate(value, math.sqrt(var))
    return memo[cols]


def system_sensitivity(ls: LinearizedSystem, v=None, mode=None,
                       mvn: MvnOptions = MvnOptions(), closed_subsets=(),
                       component_subsets=()) -> SensitivityReport:
    """First-order and total-effect indices for every variable (or those in ``v``).

    ``closed_subsets`` adds closed indices and ``component_subsets`` adds
    Sobol' variance components for the given variable groups.
    """
    mode = resolve_mode(ls, mode)
    names = ls.names or tuple(f"U{i + 1}" for i in range(ls.n))
    ls_named = ls if ls.names else LinearizedSystem(ls.A, ls.B, ls.R, ls.system, names,
                                                    ls.term_blocks)
    p = form_probability(ls_named, mode, mvn)
    _check_p(p)
    report = SensitivityReport(p.value, p.std_error, mode, names)
    report.mvn_std_errors["p_f"] = p.std_error
    cols = range(ls.n) if v is None else resolve_subset(ls_named, v)
    for i in cols:
        s = first_order_index(ls_named, i, mode, mvn, p)
        t = total_effect_index(ls_named, i, mode, mvn, p)
        report.first_order[names[i]] = s.value
        report.total_effect[names[i]] = t.value
        report.mvn_std_errors[f"first_order[{names[i]}]"] = s.std_error
        report.mvn_std_errors[f"total_effect[{names[i]}]"] = t.std_error
    for sub in closed_subsets:
        idx = resolve_subset(ls_named, sub)
        key = tuple(names[i] for i in idx)
        c = closed_index(ls_named, idx, mode, mvn, p)
        report.closed[key] = c.value
        report.mvn_std_errors[f"closed[{','.join(key)}]"] = c.std_error
    memo: dict = {}
    for sub in component_subsets:
        idx = resolve_subset(ls_named, sub)
        key = tuple(names[i] for i in idx)
        c = variance_component(ls_named, idx, mode, mvn, p, memo)
        report.variance_components[key] = c.value
        report.mvn_std_errors[f"variance_component[{','.join(key)}]"] = c.std_error
    return report
