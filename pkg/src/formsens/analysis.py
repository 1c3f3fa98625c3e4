"""End-to-end pipeline: design points, linearisation, FORM indices, MC reference."""

from __future__ import annotations

import datetime
import math
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ProblemConfig
from .errors import ConfigError, DegenerateProbability, InconsistentEstimate, NoConvergence
from .form import (LinearizedSystem, assemble_system,
                   find_design_point, find_joint_design_point, joint_term_blocks,
                   multi_start_design_points)
from .limit_state import SystemDefinition, u_space_function
from .mc import crude_mc_probability, pick_freeze_indices
from .probability import from_standard_normal
from .sensitivity import Estimate, SensitivityReport, form_probability, system_sensitivity

SCHEMA_VERSION = "1.0"


@dataclass
class Linearized:
    """Output of the FORM stage for one configuration."""

    system: LinearizedSystem
    design_points: list      # dicts, one per row of A
    components: tuple[str, ...]  # limit-state name of each row
    sensitivity_mode: str


def _design_points(cfg: ProblemConfig, rv, lsfs):
    lins, owners, counts = [], [], []
    for k, lsf in enumerate(lsfs):
        G = u_space_function(lsf, rv)
        if cfg.solver.n_starts > 1:
            pts = multi_start_design_points(G, rv.n, cfg.solver)
            if not pts:
                raise NoConvergence(f"no start converged for {lsf.name}")
        else:
            pts = [find_design_point(G, None, cfg.solver, n=rv.n)]
        lins.extend(pts)
        owners.extend([k] * len(pts))
        counts.append(len(pts))
    return lins, owners, counts


def linearize(cfg: ProblemConfig) -> Linearized:
    rv = cfg.random_vector()
    lsfs = cfg.limit_state_functions()
    system = cfg.system()
    direct = cfg.formula == "direct"

    if cfg.solver.joint_linearization and system.mode.value in ("parallel", "general"):
        if cfg.solver.n_starts > 1:
            raise ConfigError("joint_linearization cannot be combined with n_starts > 1")
        Gs = [u_space_function(g, rv) for g in lsfs]
        if system.mode.value == "parallel" and direct:
            _, lins = find_joint_design_point(Gs, rv.n, None, cfg.solver)
            ls = assemble_system(lins, system, rv.names)
            mode = "parallel"
        else:
            lins = [find_design_point(G, None, cfg.solver, n=rv.n) for G in Gs]
            base = assemble_system(lins, system, rv.names)
            blocks = joint_term_blocks(Gs, system, rv.n, cfg.solver)
            ls = LinearizedSystem(base.A, base.B, base.R, system, rv.names, blocks)
            mode = "general"
        owners = list(range(len(lsfs)))
    else:
        lins, owners, counts = _design_points(cfg, rv, lsfs)
        expanded = system.expand(counts)
        ls = assemble_system(lins, expanded, rv.names)
        # several design points of one component turn it into a series system
        mode = expanded.mode.value if direct else "general"

    points = []
    for lin, k in zip(lins, owners):
        x = from_standard_normal(lin.u_star, rv)
        points.append({
            "component": lsfs[k].name,
            "u_star": lin.u_star.tolist(),
            "x_star": np.asarray(x).tolist(),
            "alpha": lin.alpha.tolist(),
            "beta": float(lin.beta),
            "iterations": int(lin.iterations),
            "converged": bool(lin.converged),
        })
    return Linearized(ls, points, tuple(lsfs[k].name for k in owners), mode)


def _est(e: Estimate) -> dict:
    return {"value": float(e.value), "std_error": float(e.std_error)}


def _row_system(ls: LinearizedSystem, rows, system: SystemDefinition) -> LinearizedSystem:
    A = ls.A[list(rows)]
    return LinearizedSystem(A, ls.B[list(rows)], ls.R[np.ix_(rows, rows)], system, ls.names)


def probabilities(lin: Linearized, mvn) -> dict:
    """FORM probability of the configured system plus series/parallel/components."""
    ls = lin.system
    out = {"system": _est(form_probability(ls, lin.sensitivity_mode, mvn))}
    m = ls.m
    rows = list(range(m))
    out["series"] = _est(form_probability(_row_system(ls, rows, SystemDefinition.series(m)),
                                          "series", mvn))
    out["parallel"] = _est(form_probability(_row_system(ls, rows, SystemDefinition.parallel(m)),
                                            "parallel", mvn))
    out["components"] = {
        f"{name}#{i}" if lin.components.count(name) > 1 else name:
            {"value": float(0.5 * math.erfc(ls.B[i] / math.sqrt(2.0))), "std_error": 0.0}
        for i, name in enumerate(lin.components)}
    return out


def _report_dict(rep: SensitivityReport) -> dict:
    se = rep.mvn_std_errors

    def pack(values, kind):
        return {name: {"value": float(v), "std_error": float(se[f"{kind}[{name}]"])}
                for name, v in values.items()}

    def pack_subsets(values, kind):
        return [{"subset": list(k), "value": float(v),
                 "std_error": float(se[f"{kind}[{','.join(k)}]"])} for k, v in values.items()]

    return {
        "mode": rep.mode,
        "p_f": {"value": float(rep.p_f), "std_error": float(rep.p_f_std_error)},
        "first_order": pack(rep.first_order, "first_order"),
        "total_effect": pack(rep.total_effect, "total_effect"),
        "closed": pack_subsets(rep.closed, "closed"),
        "variance_components": pack_subsets(rep.variance_components, "variance_component"),
    }


def analyze(cfg: ProblemConfig) -> dict:
    started = time.perf_counter()
    lin = linearize(cfg)
    ls = lin.system
    rep = system_sensitivity(ls, mode=lin.sensitivity_mode, mvn=cfg.mvn,
                             closed_subsets=cfg.closed_subsets,
                             component_subsets=cfg.variance_components)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "formsens", "version": __version__},
        "config": cfg.as_dict(),
        "seeds": {"solver": cfg.solver.seed, "mvn": cfg.mvn.seed, "mc": cfg.mc.seed},
        "design_points": lin.design_points,
        "linearization": {"components": list(lin.components), "A": ls.A.tolist(),
                          "B": ls.B.tolist(), "R": ls.R.tolist()},
        "probabilities": probabilities(lin, cfg.mvn),
        "sensitivity": _report_dict(rep),
    }
    if cfg.mc.enabled:
        report["mc"] = monte_carlo(cfg)
    report["run_info"] = {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "wall_clock_s": round(time.perf_counter() - started, 3),
    }
    return report


def monte_carlo(cfg: ProblemConfig) -> dict:
    problem = cfg.problem()
    p = crude_mc_probability(problem, cfg.mc.n_samples, cfg.mc.seed)
    pf = pick_freeze_indices(problem, cfg.mc.pick_freeze_samples, cfg.mc.seed + 1)
    names = problem.rv.names
    return {
        "p_f": {"value": p.value, "std_error": p.std_error, "n_samples": p.n_samples},
        "pick_freeze": {
            "n_samples": pf.n_samples,
            "n_evaluations": pf.n_evaluations,
            "first_order": {n: {"value": float(pf.first_order[i]),
                                "std_error": float(pf.first_order_std_error[i])}
                            for i, n in enumerate(names)},
            "total_effect": {n: {"value": float(pf.total_effect[i]),
                                 "std_error": float(pf.total_effect_std_error[i])}
                             for i, n in enumerate(names)},
        },
    }


# parameter sweeps -------------------------------------------------------------

def _sweep_groups(cfg: ProblemConfig):
    systems = (["system"] if cfg.mode == "general" else []) + ["series", "parallel"]
    return systems, [n for n, _ in cfg.limit_states]


def sweep_columns(cfg: ProblemConfig, parameter: str) -> list[str]:
    systems, components = _sweep_groups(cfg)
    cols = [parameter]
    for mode in systems:
        cols += [f"p_{mode}", f"p_{mode}_se"]
    for mode in systems + components:
        for v in cfg.variable_names:
            cols += [f"S_{mode}_{v}", f"S_{mode}_{v}_se", f"ST_{mode}_{v}", f"ST_{mode}_{v}_se"]
    return cols


def _indices(ls, how, mvn, label, names) -> dict:
    """S/ST columns for one sweep group; left empty (NaN) when p is 0 or 1."""
    try:
        rep = system_sensitivity(ls, mode=how, mvn=mvn)
    except (DegenerateProbability, InconsistentEstimate):
        return {}
    se = rep.mvn_std_errors
    row = {}
    for v in names:
        row[f"S_{label}_{v}"] = rep.first_order[v]
        row[f"S_{label}_{v}_se"] = se[f"first_order[{v}]"]
        row[f"ST_{label}_{v}"] = rep.total_effect[v]
        row[f"ST_{label}_{v}_se"] = se[f"total_effect[{v}]"]
    return row


def sweep_point(cfg: ProblemConfig, parameter: str, value: float) -> dict:
    point = cfg.with_parameter(parameter, value)
    if point.solver.n_starts > 1:
        raise ConfigError("sweeps use one design point per limit state (n_starts = 1)")
    lin = linearize(point)
    ls = lin.system
    rows = list(range(ls.m))
    names = cfg.variable_names
    systems, components = _sweep_groups(cfg)
    subs = {"system": (ls, lin.sensitivity_mode),
            "series": (_row_system(ls, rows, SystemDefinition.series(ls.m)), "series"),
            "parallel": (_row_system(ls, rows, SystemDefinition.parallel(ls.m)), "parallel")}
    out = {parameter: float(value)}
    for label in systems:
        sub, how = subs[label]
        p = form_probability(sub, how, point.mvn)
        out[f"p_{label}"], out[f"p_{label}_se"] = p.value, p.std_error
        out.update(_indices(sub, how, point.mvn, label, names))
    for i, label in enumerate(components):
        sub = _row_system(ls, [i], SystemDefinition.component())
        out.update(_indices(sub, "parallel", point.mvn, label, names))
    return out


def sweep(cfg: ProblemConfig, parameter: str, start: float, stop: float, steps: int):
    """CSV-ready sweep of ``parameter`` over ``steps`` evenly spaced values."""
    if parameter not in cfg.parameters:
        raise ConfigError(f"parameter {parameter!r} is not declared in [parameters]")
    if steps < 1 or (steps > 1 and start == stop):
        raise ConfigError("sweep range is empty")
    grid = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    cols = sweep_columns(cfg, parameter)
    rows = []
    for value in grid:
        point = sweep_point(cfg, parameter, float(value))
        rows.append([point.get(c, math.nan) for c in cols])
    return cols, rows
