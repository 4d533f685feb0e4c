"""Experiment configuration files (TOML, schema ``shecli/1``).

Parsing validates everything that can be checked before computing: unknown
keys, value ranges, and the preconditions of the chosen engine. Any problem
is a ``ConfigError``; numeric failures (e.g. a model violating Dalang's
condition) are left to the engines.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .groups import Cyclic, Isomorphism, Lattice, Product, RealLine, Torus
from .initial import InitialCondition
from .montecarlo import SimConfig, check_config, induced_grid_model
from .sigma import Bounded, Linear, SinPlusSlope
from .spectral import (CyclicRates, LatticeWalk, ProductIndependent, Stable, TorusBrownian,
                       Zero, psi_values)
from .excitation import SOURCES

__all__ = ["SCHEMA", "EXPERIMENTS", "ExperimentConfig", "ModelEntry", "Numerics", "load_config",
           "parse_config", "default_config", "default_config_text", "schema_text", "build_group", "build_model"]

SCHEMA = "shecli/1"
EXPERIMENTS = ("kernel", "upsilon", "volterra", "mc", "sweep", "localtime", "invariance",
               "dichotomy", "verify-all")
DEFAULT_SEED = 20140415

# allowed keys per table; values are (type checker, default)
_TOP = {"schema", "experiment", "t", "group", "levy", "sigma", "u0", "lambda", "beta",
        "numerics", "isomorphism", "output", "models"}
_GROUP_KEYS = {"Trivial": set(), "Cyclic": {"n"}, "Lattice": {"d", "delta", "radius"},
               "Torus": {"resolution"}, "RealLine": {"halfwidth", "resolution"},
               "Product": {"factors"}}
_LEVY_KEYS = {"Zero": set(), "CyclicRates": {"rates", "nearest_neighbour"},
              "LatticeWalk": {"rate", "jumps"}, "Stable": {"alpha"},
              "TorusBrownian": {"kappa"}, "ProductIndependent": {"parts"}}
_SIGMA_KEYS = {"Linear": {"slope"}, "Bounded": {"cap", "floor"},
               "SinPlusSlope": {"slope", "amp"}}
_U0_KEYS = {"kind", "scale", "values", "factors"}
_LAMBDA_KEYS = {"value", "min", "max", "points", "log_spaced"}
_BETA_KEYS = {"min", "max", "points"}
_NUMERICS = {"dt": 1e-3, "n_paths": 10_000, "seed": DEFAULT_SEED, "threads": 1, "t_points": 11,
             "eps": 0.5, "source": "volterra", "tail_fraction": 0.5, "keep_paths": False,
             "block": 4096}
_ISO_KEYS = {"kind", "param"}
_OUTPUT_KEYS = {"directory", "formats"}
_MODEL_KEYS = {"id", "group", "levy", "sigma", "u0"}


@dataclass(frozen=True)
class Numerics:
    dt: float = 1e-3
    n_paths: int = 10_000
    seed: int = DEFAULT_SEED
    threads: int = 1
    t_points: int = 11
    eps: float = 0.5
    source: str = "volterra"
    tail_fraction: float = 0.5
    keep_paths: bool = False
    block: int = 4096


@dataclass(frozen=True)
class ModelEntry:
    model_id: str
    model: object
    sigma: object
    u0: InitialCondition


@dataclass
class ExperimentConfig:
    experiment: str
    t: float
    model: object | None
    sigma: object | None
    u0: InitialCondition
    lambdas: np.ndarray
    betas: np.ndarray
    numerics: Numerics
    isomorphism: Isomorphism | None
    output_dir: str
    formats: tuple
    models: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    def sim_config(self, t_end: float | None = None) -> SimConfig:
        n = self.numerics
        return SimConfig(dt=n.dt, t_end=self.t if t_end is None else t_end, n_paths=n.n_paths,
                         seed=n.seed, threads=n.threads, block=n.block)


def _keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a table")
    extra = set(table) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _num(table, key, where, default=None, *, positive=False, integer=False, minimum=None):
    v = table.get(key, default)
    if v is None:
        raise ConfigError(f"{where}.{key} is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"{where}.{key} must be an integer")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be positive")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}")
    return int(v) if integer else float(v)


def _kind(table, allowed, where):
    k = table.get("kind")
    if k not in allowed:
        raise ConfigError(f"{where}.kind must be one of {sorted(allowed)}, got {k!r}")
    _keys(table, allowed[k] | {"kind"}, where)
    return k


def build_group(table: dict, where: str = "group"):
    k = _kind(table, _GROUP_KEYS, where)
    try:
        if k == "Trivial":
            return Cyclic(1)
        if k == "Cyclic":
            return Cyclic(_num(table, "n", where, integer=True, minimum=1))
        if k == "Lattice":
            return Lattice(_num(table, "d", where, integer=True, minimum=1),
                           _num(table, "delta", where, 1.0, positive=True),
                           _num(table, "radius", where, 10, integer=True, minimum=1))
        if k == "Torus":
            return Torus(_num(table, "resolution", where, 64, integer=True, minimum=1))
        if k == "RealLine":
            return RealLine(_num(table, "halfwidth", where, 10.0, positive=True),
                            _num(table, "resolution", where, 2000, integer=True, minimum=2))
        fs = table.get("factors")
        if not isinstance(fs, list) or not fs:
            raise ConfigError(f"{where}.factors must be a non-empty list of group tables")
        return Product(tuple(build_group(f, f"{where}.factors[{i}]") for i, f in enumerate(fs)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build_model(table: dict, group, where: str = "levy"):
    """Levy model on ``group``; the group fixes the model's state space."""
    k = _kind(table, _LEVY_KEYS, where)
    try:
        if k == "Zero":
            return Zero(group)
        if k == "CyclicRates":
            if not isinstance(group, Cyclic):
                raise ConfigError(f"{where}: CyclicRates needs a Cyclic or Trivial group")
            if "nearest_neighbour" in table:
                if "rates" in table:
                    raise ConfigError(f"{where}: give either rates or nearest_neighbour")
                kap = _num(table, "nearest_neighbour", where, minimum=0)
                return CyclicRates.nearest_neighbour(group.n, kap)
            rates = table.get("rates", [0.0] * (group.n - 1))
            if not isinstance(rates, list) or len(rates) != group.n - 1:
                raise ConfigError(f"{where}.rates needs {group.n - 1} entries for Cyclic({group.n})")
            return CyclicRates(tuple(float(r) for r in rates))
        if k == "LatticeWalk":
            if not isinstance(group, Lattice):
                raise ConfigError(f"{where}: LatticeWalk needs a Lattice group")
            jumps = table.get("jumps")
            if jumps is not None:
                try:
                    jumps = tuple((tuple(j["offset"]), float(j["prob"])) for j in jumps)
                except (KeyError, TypeError):
                    raise ConfigError(f"{where}.jumps must be a list of {{offset, prob}} tables") from None
                if any(len(y) != group.d for y, _ in jumps):
                    raise ConfigError(f"{where}.jumps offsets must have length d = {group.d}")
            return LatticeWalk(group, _num(table, "rate", where, 1.0, minimum=0), jumps)
        if k == "Stable":
            if not isinstance(group, RealLine):
                raise ConfigError(f"{where}: Stable needs a RealLine group")
            return Stable(_num(table, "alpha", where), group)
        if k == "TorusBrownian":
            if not isinstance(group, Torus):
                raise ConfigError(f"{where}: TorusBrownian needs a Torus group")
            return TorusBrownian(_num(table, "kappa", where, 1.0, positive=True), group)
        parts = table.get("parts")
        if not isinstance(group, Product):
            raise ConfigError(f"{where}: ProductIndependent needs a Product group")
        if not isinstance(parts, list) or len(parts) != len(group.factors):
            raise ConfigError(f"{where}.parts needs one model table per group factor")
        return ProductIndependent(tuple(build_model(p, f, f"{where}.parts[{i}]")
                                        for i, (p, f) in enumerate(zip(parts, group.factors))))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build_sigma(table: dict, where: str = "sigma"):
    k = _kind(table, _SIGMA_KEYS, where)
    try:
        if k == "Linear":
            return Linear(_num(table, "slope", where, 1.0))
        if k == "Bounded":
            return Bounded(_num(table, "cap", where, 1.0), _num(table, "floor", where, 0.0))
        return SinPlusSlope(_num(table, "slope", where, 1.0), _num(table, "amp", where, 0.5))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build_u0(table: dict | None, where: str = "u0") -> InitialCondition:
    if table is None:
        return InitialCondition()
    _keys(table, _U0_KEYS, where)
    facs = table.get("factors")
    try:
        if facs is not None:
            facs = tuple(build_u0(f, f"{where}.factors[{i}]") for i, f in enumerate(facs))
        vals = table.get("values")
        return InitialCondition(table.get("kind", "values" if vals is not None else "default"),
                                _num(table, "scale", where, 1.0, positive=True),
                                tuple(vals) if vals is not None else None, facs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _lambda_grid(table: dict | None) -> np.ndarray:
    if table is None:
        return np.logspace(1, 3, 21)
    _keys(table, _LAMBDA_KEYS, "lambda")
    if "value" in table:
        if set(table) - {"value"}:
            raise ConfigError("lambda: give either value or a min/max/points grid")
        return np.array([_num(table, "value", "lambda", positive=True)])
    lo = _num(table, "min", "lambda", positive=True)
    hi = _num(table, "max", "lambda", positive=True)
    n = _num(table, "points", "lambda", 21, integer=True, minimum=1)
    if hi < lo or (n > 1 and hi == lo):
        raise ConfigError("lambda.max must exceed lambda.min")
    log = table.get("log_spaced", True)
    if not isinstance(log, bool):
        raise ConfigError("lambda.log_spaced must be true or false")
    return np.logspace(np.log10(lo), np.log10(hi), n) if log else np.linspace(lo, hi, n)


def _beta_grid(table: dict | None) -> np.ndarray:
    if table is None:
        return np.logspace(-2, 3, 20)
    _keys(table, _BETA_KEYS, "beta")
    lo = _num(table, "min", "beta", positive=True)
    hi = _num(table, "max", "beta", positive=True)
    n = _num(table, "points", "beta", 20, integer=True, minimum=1)
    if hi < lo:
        raise ConfigError("beta.max must be >= beta.min")
    return np.logspace(np.log10(lo), np.log10(hi), n)


def _numerics(table: dict | None) -> Numerics:
    table = table or {}
    _keys(table, _NUMERICS, "numerics")
    w = "numerics"
    src = table.get("source", "volterra")
    if src not in SOURCES:
        raise ConfigError(f"numerics.source must be one of {SOURCES}")
    keep = table.get("keep_paths", False)
    if not isinstance(keep, bool):
        raise ConfigError("numerics.keep_paths must be true or false")
    tf = _num(table, "tail_fraction", w, 0.5, positive=True)
    if tf > 1:
        raise ConfigError("numerics.tail_fraction must lie in (0, 1]")
    return Numerics(dt=_num(table, "dt", w, 1e-3, positive=True),
                    n_paths=_num(table, "n_paths", w, 10_000, integer=True, minimum=1),
                    seed=_num(table, "seed", w, DEFAULT_SEED, integer=True, minimum=0),
                    threads=_num(table, "threads", w, 1, integer=True, minimum=0),
                    t_points=_num(table, "t_points", w, 11, integer=True, minimum=2),
                    eps=_num(table, "eps", w, 0.5, positive=True),
                    source=src, tail_fraction=tf, keep_paths=keep,
                    block=_num(table, "block", w, 4096, integer=True, minimum=1))


def _isomorphism(table: dict | None, group):
    if table is None:
        return None
    _keys(table, _ISO_KEYS, "isomorphism")
    kind = table.get("kind")
    param = table.get("param")
    if isinstance(param, list):
        param = tuple(param)
    try:
        return Isomorphism(group, group, kind, param)
    except Exception as exc:
        raise ConfigError(f"isomorphism: {exc}") from None


def _needs_model(exp: str) -> bool:
    return exp not in ("dichotomy", "verify-all")


def _validate(cfg: ExperimentConfig) -> None:
    """Engine preconditions checked before any computation."""
    exp, m, n = cfg.experiment, cfg.model, cfg.numerics
    linear_engine = exp == "volterra" or (exp == "sweep" and n.source in ("volterra",))
    if linear_engine and not isinstance(cfg.sigma, Linear):
        raise ConfigError("NotLinear: the exact Volterra engine needs sigma kind = \"Linear\"")
    if exp in ("mc", "invariance", "localtime") or (exp == "sweep" and n.source == "mc"):
        g = m.group
        if exp == "localtime" and not g.is_finite:
            raise ConfigError("localtime needs a finite discrete group")
        if exp == "invariance" and cfg.isomorphism is None:
            raise ConfigError("invariance needs an [isomorphism] table")
        if exp != "localtime":
            sim = cfg.sim_config()
            try:
                if g.is_finite:
                    check_config(m, sim)
                else:
                    cyc, _ = induced_grid_model(m)
                    top = float(np.max(psi_values(cyc).real))
                    if sim.dt * top > 0.5:
                        raise ConfigError(f"dt * max Re Psi = {sim.dt * top:.3g} exceeds 0.5 "
                                          "on the simulation grid; reduce dt")
            except ConfigError:
                raise
            except Exception as exc:
                raise ConfigError(f"{exp}: {exc}") from None


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a config mapping and build the engine objects."""
    raw = copy.deepcopy(raw)
    _keys(raw, _TOP, "config")
    if raw.get("schema") != SCHEMA:
        raise ConfigError(f"schema must be {SCHEMA!r}, got {raw.get('schema')!r}")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
    t = _num(raw, "t", "config", 1.0, positive=True)
    model = sigma = iso = None
    if _needs_model(exp):
        for key in ("group", "levy"):
            if key not in raw:
                raise ConfigError(f"experiment {exp!r} needs a [{key}] table")
        group = build_group(raw["group"])
        model = build_model(raw["levy"], group)
        iso = _isomorphism(raw.get("isomorphism"), group)
    elif "isomorphism" in raw:
        raise ConfigError(f"experiment {exp!r} does not use [isomorphism]")
    sigma = build_sigma(raw.get("sigma", {"kind": "Linear"}))
    u0 = build_u0(raw.get("u0"))
    out = raw.get("output", {})
    _keys(out, _OUTPUT_KEYS, "output")
    fmts = out.get("formats", ["csv", "json"])
    if not isinstance(fmts, list) or not fmts or set(fmts) - {"csv", "json"}:
        raise ConfigError("output.formats must be a non-empty subset of [\"csv\", \"json\"]")
    directory = out.get("directory", "she_output")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory must be a non-empty string")
    models = []
    for i, e in enumerate(raw.get("models", [])):
        w = f"models[{i}]"
        _keys(e, _MODEL_KEYS, w)
        if not isinstance(e.get("id"), str):
            raise ConfigError(f"{w}.id must be a string")
        g = build_group(e.get("group", {}), f"{w}.group")
        models.append(ModelEntry(e["id"], build_model(e.get("levy", {}), g, f"{w}.levy"),
                                 build_sigma(e.get("sigma", {"kind": "Linear"}), f"{w}.sigma"),
                                 build_u0(e.get("u0"), f"{w}.u0")))
    if "models" in raw and exp != "dichotomy":
        raise ConfigError("[[models]] is only used by the dichotomy experiment")
    cfg = ExperimentConfig(exp, t, model, sigma, u0, _lambda_grid(raw.get("lambda")),
                           _beta_grid(raw.get("beta")), _numerics(raw.get("numerics")), iso,
                           directory, tuple(fmts), models, raw)
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Parse a TOML config, or the config embedded in a run manifest (JSON)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    text = data.decode("utf-8", errors="replace")
    if text.lstrip().startswith("{"):
        try:
            man = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON manifest: {exc}") from None
        if not isinstance(man, dict) or "config" not in man:
            raise ConfigError(f"{path}: JSON input must be a run manifest with a config entry")
        return parse_config(man["config"])
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw)


def default_config_text() -> str:
    return resources.files("lcashe").joinpath("data/default.toml").read_text(encoding="utf-8")


def default_config() -> ExperimentConfig:
    """The bundled ``verify-all`` configuration."""
    return parse_config(tomllib.loads(default_config_text()))


def schema_text() -> str:
    return resources.files("lcashe").joinpath("data/schema.toml").read_text(encoding="utf-8")
