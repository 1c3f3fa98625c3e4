"""Problem files: a sectioned ``key = value`` text format read with configparser.

Sections (``#`` and ``;`` start comments)::

    [problem]       name, description
    [variables]     NAME = normal|lognormal MEAN STD
    [parameters]    NAME = VALUE            deterministic constants
    [limit_states]  NAME = EXPRESSION       failure is EXPRESSION <= 0
    [system]        mode = component|series|parallel|general
                    cut_sets = g1 g2; g3 g4 (names or 1-based indices)
                    formula = direct|inclusion_exclusion
    [solver]        max_iter, g_tol, stat_tol, n_starts, dedup_radius,
                    joint_linearization, seed
    [mvn]           n_samples, replicates, seed
    [mc]            enabled, n_samples, pick_freeze_samples, seed
    [outputs]       closed_subsets = M T; M P
                    variance_components = M; T; M T

Order of entries in ``[variables]`` and ``[limit_states]`` is significant.
"""

from __future__ import annotations

import configparser
import copy
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError, ValidationError
from .form import SolverOptions
from .limit_state import (LimitStateFunction, ReliabilityProblem, SystemDefinition,
                          parse_limit_state)
from .mvn import MvnOptions
from .probability import DISTRIBUTIONS, RandomVector, marginal

SECTIONS = ("problem", "variables", "parameters", "limit_states", "system", "solver",
            "mvn", "mc", "outputs")
FORMULAS = ("direct", "inclusion_exclusion")


@dataclass(frozen=True)
class McOptions:
    enabled: bool = False
    n_samples: int = 10**6
    pick_freeze_samples: int = 10**5
    seed: int = 42


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    variables: tuple[tuple[str, str, float, float], ...]
    parameters: dict
    limit_states: tuple[tuple[str, str], ...]
    mode: str
    cut_sets: tuple[tuple[int, ...], ...]
    formula: str = "direct"
    solver: SolverOptions = SolverOptions()
    mvn: MvnOptions = MvnOptions()
    mc: McOptions = McOptions()
    closed_subsets: tuple[tuple[str, ...], ...] = ()
    variance_components: tuple[tuple[str, ...], ...] = ()
    description: str = ""
    source: str = field(default="", compare=False)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v[0] for v in self.variables)

    def random_vector(self) -> RandomVector:
        return RandomVector(tuple(marginal(kind, mean, std)
                                  for _, kind, mean, std in self.variables),
                            self.variable_names)

    def limit_state_functions(self) -> tuple[LimitStateFunction, ...]:
        return tuple(parse_limit_state(text, self.variable_names, self.parameters, name)
                     for name, text in self.limit_states)

    def system(self) -> SystemDefinition:
        return SystemDefinition(self.cut_sets, len(self.limit_states))

    def problem(self) -> ReliabilityProblem:
        return ReliabilityProblem(self.random_vector(), self.limit_state_functions(),
                                  self.system())

    def with_parameter(self, name: str, value: float) -> "ProblemConfig":
        if name not in self.parameters:
            raise ConfigError(f"parameter {name!r} is not declared in [parameters]")
        params = dict(self.parameters)
        params[name] = float(value)
        return replace(self, parameters=params)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "variables": [{"name": n, "distribution": k, "mean": m, "std": s}
                          for n, k, m, s in self.variables],
            "parameters": dict(self.parameters),
            "limit_states": [{"name": n, "expression": t} for n, t in self.limit_states],
            "system": {"mode": self.mode, "formula": self.formula,
                       "cut_sets": [[self.limit_states[i][0] for i in c] for c in self.cut_sets]},
            "solver": dict(vars(self.solver)),
            "mvn": dict(vars(self.mvn)),
            "mc": dict(vars(self.mc)),
            "outputs": {"closed_subsets": [list(s) for s in self.closed_subsets],
                        "variance_components": [list(s) for s in self.variance_components]},
        }


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str  # keep variable names case-sensitive
    return cp


def _number(text, what):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{what}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{what}: value must be finite")
    return value


def _int(section, key, default):
    if key not in section:
        return default
    try:
        return int(float(section[key]))
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: {section[key]!r} is not an integer") from None


def _float(section, key, default):
    if key not in section:
        return default
    return _number(section[key], f"[{section.name}] {key}")


def _bool(section, key, default):
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected true/false") from None


def _groups(text: str) -> list[list[str]]:
    return [g.split() for g in text.split(";") if g.strip()]


def _resolve_component(token, names):
    if token in names:
        return names.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise ConfigError(f"cut set references unknown limit state {token!r}") from None
    if not 1 <= idx <= len(names):
        raise ConfigError(f"cut set index {idx} outside 1..{len(names)}")
    return idx - 1


def _default_cut_sets(mode, m):
    if mode == "series":
        return tuple((i,) for i in range(m))
    if mode == "parallel":
        return (tuple(range(m)),)
    if mode == "component":
        if m != 1:
            raise ConfigError("mode = component needs exactly one limit state")
        return ((0,),)
    raise ConfigError("mode = general requires cut_sets")


def loads(text: str, source: str = "<string>") -> ProblemConfig:
    cp = _parser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = [s for s in cp.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigError(f"unknown section [{unknown[0]}]")
    for needed in ("variables", "limit_states"):
        if not cp.has_section(needed) or not cp[needed]:
            raise ConfigError(f"section [{needed}] is missing or empty")
    sec = {s: cp[s] if cp.has_section(s) else cp[configparser.DEFAULTSECT] for s in SECTIONS}

    variables = []
    for name, spec in cp["variables"].items():
        if not name.isidentifier():
            raise ConfigError(f"variable name {name!r} is not an identifier")
        parts = spec.split()
        if len(parts) != 3:
            raise ConfigError(f"variable {name}: expected 'distribution mean std', got {spec!r}")
        kind = parts[0].lower()
        if kind not in DISTRIBUTIONS:
            raise ConfigError(f"variable {name}: unknown distribution {parts[0]!r}")
        mean = _number(parts[1], f"variable {name} mean")
        std = _number(parts[2], f"variable {name} std")
        try:
            marginal(kind, mean, std)
        except ValidationError as exc:
            raise ConfigError(f"variable {name}: {exc.args[0]}") from None
        variables.append((name, kind, mean, std))
    var_names = [v[0] for v in variables]

    parameters = {}
    for name, value in (cp["parameters"].items() if cp.has_section("parameters") else ()):
        if name in var_names:
            raise ConfigError(f"{name!r} is declared both as variable and parameter")
        parameters[name] = _number(value, f"parameter {name}")

    limit_states = tuple((name, text.strip()) for name, text in cp["limit_states"].items())
    ls_names = [n for n, _ in limit_states]
    for name, text in limit_states:
        parse_limit_state(text, var_names, parameters, name)  # raises on bad input

    system = sec["system"]
    mode = system.get("mode", "series" if len(limit_states) > 1 else "component").strip().lower()
    if mode not in ("component", "series", "parallel", "general"):
        raise ConfigError(f"[system] mode: unknown mode {mode!r}")
    if "cut_sets" in system:
        groups = _groups(system["cut_sets"])
        if not groups:
            raise ConfigError("[system] cut_sets is empty")
        cut_sets = tuple(tuple(_resolve_component(t, ls_names) for t in g) for g in groups)
        declared = SystemDefinition(cut_sets, len(limit_states)).mode.value
        if mode != "general" and declared != mode:
            raise ConfigError(f"[system] cut_sets describe a {declared} system, not {mode}")
    else:
        cut_sets = _default_cut_sets(mode, len(limit_states))
    formula = system.get("formula", "direct").strip().lower()
    if formula not in FORMULAS:
        raise ConfigError(f"[system] formula must be one of {', '.join(FORMULAS)}")

    s = sec["solver"]
    solver = SolverOptions(
        max_iter=_int(s, "max_iter", 200), g_tol=_float(s, "g_tol", 1e-6),
        stat_tol=_float(s, "stat_tol", 1e-6), n_starts=_int(s, "n_starts", 1),
        dedup_radius=_float(s, "dedup_radius", 0.05),
        joint_linearization=_bool(s, "joint_linearization", False), seed=_int(s, "seed", 42))
    if solver.n_starts < 1 or solver.max_iter < 1:
        raise ConfigError("[solver] n_starts and max_iter must be >= 1")
    s = sec["mvn"]
    mvn = MvnOptions(n_samples=_int(s, "n_samples", 10**6), replicates=_int(s, "replicates", 25),
                     seed=_int(s, "seed", 42))
    s = sec["mc"]
    mc = McOptions(enabled=_bool(s, "enabled", False), n_samples=_int(s, "n_samples", 10**6),
                   pick_freeze_samples=_int(s, "pick_freeze_samples", 10**5),
                   seed=_int(s, "seed", 42))

    out = sec["outputs"]

    def subsets(key):
        groups = _groups(out.get(key, ""))
        for g in groups:
            for name in g:
                if name not in var_names:
                    raise ConfigError(f"[outputs] {key}: unknown variable {name!r}")
        return tuple(tuple(g) for g in groups)

    prob = sec["problem"]
    return ProblemConfig(
        name=prob.get("name", Path(source).stem), description=prob.get("description", ""),
        variables=tuple(variables), parameters=parameters, limit_states=limit_states,
        mode=mode, cut_sets=cut_sets, formula=formula, solver=solver, mvn=mvn, mc=mc,
        closed_subsets=subsets("closed_subsets"),
        variance_components=subsets("variance_components"), source=source)


def load(path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def with_overrides(cfg: ProblemConfig, *, seed=None, mvn_samples=None, mc_samples=None,
                   mc=None, n_starts=None, joint_linearization=None) -> ProblemConfig:
    solver, mvn_opts, mc_opts = cfg.solver, cfg.mvn, cfg.mc
    if seed is not None:
        solver = replace(solver, seed=seed)
        mvn_opts = replace(mvn_opts, seed=seed)
        mc_opts = replace(mc_opts, seed=seed)
    if mvn_samples is not None:
        mvn_opts = replace(mvn_opts, n_samples=mvn_samples)
    if mc_samples is not None:
        mc_opts = replace(mc_opts, n_samples=mc_samples, pick_freeze_samples=mc_samples)
    if mc is not None:
        mc_opts = replace(mc_opts, enabled=mc)
    if n_starts is not None:
        if n_starts < 1:
            raise ConfigError("--n-starts must be >= 1")
        solver = replace(solver, n_starts=n_starts)
    if joint_linearization is not None:
        solver = replace(solver, joint_linearization=joint_linearization)
    return replace(cfg, solver=solver, mvn=mvn_opts, mc=mc_opts,
                   parameters=copy.copy(cfg.parameters))


def bundled(name: str) -> Path:
    """Path of a problem file shipped with the package (``frame``, ``parabola``...)."""
    path = Path(__file__).with_name("problems") / f"{name}.ini"
    if not path.exists():
        raise ConfigError(f"no bundled problem named {name!r}")
    return path
