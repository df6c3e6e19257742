"""Strict JSON run configuration.

A configuration is a JSON object with a ``mode`` key and mode-specific
parameters.  Defaults are filled in during parsing, and the normalized
document (every key explicit) is what the run manifest hashes.  Unknown keys,
wrong types and out-of-range values raise :class:`ConfigError` with the
dotted path of the offending entry.

Potentials are objects with a ``family`` key::

    {"family": "homogeneous"}
    {"family": "hex", "a": 0.228, "b": -0.1, "delta": 0.1}
    {"family": "random", "delta": 0.1, "m_sub": 40, "low": 0, "high": 2, "seed": 0}
    {"family": "wells", "delta": 0.1}
    {"family": "exponent", "delta": 0.1}
    {"family": "tabulated", "csv": "whom.csv"}      or  {"u": [...], "W": [...]}
    {"family": "sum", "terms": [ ... ]}
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .analysis import CounterexampleConfig
from .dynamics import FlowConfig
from .grid import GridSpec
from .potentials import (
    HexWeight,
    Homogeneous,
    PotentialSpec,
    RandomTile,
    Sum,
    Tabulated,
    VaryingExponent,
    VaryingWells,
    read_tabulated_csv,
)

__all__ = [
    "ConfigError",
    "MODES",
    "FAMILIES",
    "PRESETS",
    "ParsedConfig",
    "HomogenizeJob",
    "ProfileJob",
    "StochasticJob",
    "EnergyJob",
    "parse_config",
    "build_potential",
    "preset",
    "apply_override",
]

MODES = ("flow", "homogenize", "profile", "counterexample", "stochastic", "energy")
FAMILIES = ("homogeneous", "hex", "random", "wells", "exponent", "tabulated", "sum")
PRESETS = ("hex", "random", "wells", "exponent", "homogeneous")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


@dataclass(frozen=True)
class HomogenizeJob:
    spec: PotentialSpec
    cell_quadrature_n: int
    u_min: float
    u_max: float
    u_points: int


@dataclass(frozen=True)
class ProfileJob:
    spec: PotentialSpec
    cell_quadrature_n: int
    x_min: float
    x_max: float
    x_points: int


@dataclass(frozen=True)
class StochasticJob:
    n: int
    m: int
    d: int
    dist: str
    p: float | None
    trials: int
    seed: int


@dataclass(frozen=True)
class EnergyJob:
    eps: float
    spec: PotentialSpec
    grid: GridSpec
    initial: object
    seed: int
    gradient: str
    tv: bool
    delta: float


@dataclass(frozen=True)
class ParsedConfig:
    """A validated run: ``target`` is the typed object for ``mode``; ``document`` the normalized JSON."""

    mode: str
    target: object
    document: dict


# -- low-level readers ---------------------------------------------------------


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


class _Obj:
    """Reads keys out of one JSON object and remembers which ones it used."""

    def __init__(self, doc, path):
        if not isinstance(doc, dict):
            raise ConfigError(f"{path or 'config'} must be a JSON object")
        self.doc = doc
        self.path = path
        self.used = set()
        self.out = {}

    def _get(self, key, default, required):
        self.used.add(key)
        if key in self.doc:
            return self.doc[key]
        if required:
            raise ConfigError(f"{_join(self.path, key)} is required")
        return default

    def real(self, key, default=None, *, required=False, gt=None, ge=None, lt=None):
        p = _join(self.path, key)
        v = self._get(key, default, required)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{p} must be a number")
        v = float(v)
        if v != v or v in (float("inf"), float("-inf")):
            raise ConfigError(f"{p} must be finite")
        if gt is not None and not v > gt:
            raise ConfigError(f"{p} must be > {gt:g}")
        if ge is not None and not v >= ge:
            raise ConfigError(f"{p} must be >= {ge:g}")
        if lt is not None and not v < lt:
            raise ConfigError(f"{p} must be < {lt:g}")
        self.out[key] = v
        return v

    def integer(self, key, default=None, *, required=False, ge=None):
        p = _join(self.path, key)
        v = self._get(key, default, required)
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{p} must be an integer")
        if ge is not None and v < ge:
            raise ConfigError(f"{p} must be >= {ge}")
        self.out[key] = v
        return v

    def boolean(self, key, default):
        v = self._get(key, default, False)
        if not isinstance(v, bool):
            raise ConfigError(f"{_join(self.path, key)} must be true or false")
        self.out[key] = v
        return v

    def choice(self, key, options, default=None, *, required=False):
        v = self._get(key, default, required)
        if v not in options:
            raise ConfigError(
                f"{_join(self.path, key)}: unknown value {v!r}; expected one of {', '.join(options)}"
            )
        self.out[key] = v
        return v

    def raw(self, key, default=None, *, required=False):
        v = self._get(key, default, required)
        self.out[key] = v
        return v

    def finish(self):
        extra = sorted(set(self.doc) - self.used)
        if extra:
            raise ConfigError(f"{_join(self.path, extra[0])} is not a recognized key")
        return self.out


def _wrap(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError, OSError) as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


# -- sections ------------------------------------------------------------------


def _grid(doc, path, default_n=256):
    r = _Obj({} if doc is None else doc, path)
    n = r.integer("n", default_n, ge=8)
    L = r.real("L", 4.0, gt=0)
    dim = r.integer("dim", 2)
    origin = r.real("origin", -L / 2)
    norm = r.finish()
    return _wrap(path, GridSpec, n=n, L=L, dim=dim, origin=origin), norm


def build_potential(doc, path="potential", dim=2, base_dir=None):
    """Construct a :class:`PotentialSpec` from its JSON description.

    Returns ``(spec, normalized_document)``.  ``dim`` is used by the random
    tile family; ``base_dir`` resolves a relative ``csv`` path.
    """
    r = _Obj(doc, path)
    fam = r.choice("family", FAMILIES, required=True)
    if fam == "homogeneous":
        spec = Homogeneous()
    elif fam == "hex":
        a = r.real("a", 0.228)
        b = r.real("b", -0.1)
        delta = r.real("delta", 0.1, gt=0)
        spec = _wrap(path, HexWeight, a=a, b=b, delta=delta)
    elif fam == "random":
        delta = r.real("delta", 0.1, gt=0)
        m_sub = r.integer("m_sub", 40, ge=1)
        low = r.real("low", 0.0)
        high = r.real("high", 2.0)
        seed = r.integer("seed", 0, ge=0)
        spec = _wrap(path, RandomTile, delta=delta, m_sub=m_sub, low=low, high=high, seed=seed, dim=dim)
    elif fam == "wells":
        spec = _wrap(path, VaryingWells, delta=r.real("delta", 0.1, gt=0))
    elif fam == "exponent":
        spec = _wrap(path, VaryingExponent, delta=r.real("delta", 0.1, gt=0))
    elif fam == "tabulated":
        if "csv" in doc:
            name = r.raw("csv")
            if not isinstance(name, str):
                raise ConfigError(f"{path}.csv must be a file path string")
            p = Path(name)
            if base_dir is not None and not p.is_absolute():
                p = Path(base_dir) / p
            spec = _wrap(f"{path}.csv", read_tabulated_csv, p)
        else:
            u = r.raw("u", required=True)
            w = r.raw("W", required=True)
            for key, arr in (("u", u), ("W", w)):
                if not isinstance(arr, list) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in arr
                ):
                    raise ConfigError(f"{path}.{key} must be a list of numbers")
            spec = _wrap(path, Tabulated, tuple(float(v) for v in u), tuple(float(v) for v in w))
    else:  # sum
        terms = r.raw("terms", required=True)
        if not isinstance(terms, list) or not terms:
            raise ConfigError(f"{path}.terms must be a non-empty list")
        built = [build_potential(t, f"{path}.terms[{i}]", dim, base_dir) for i, t in enumerate(terms)]
        r.out["terms"] = [d for _, d in built]
        spec = _wrap(path, Sum, tuple(s for s, _ in built))
    return spec, r.finish()


def _potential_delta(spec):
    return float(getattr(spec, "delta", 0.0))


def _initial(r, path):
    v = r.raw("initial", "strip")
    if v in ("strip", "random"):
        return v
    if isinstance(v, dict) and set(v) == {"file"} and isinstance(v["file"], str):
        return v["file"]
    raise ConfigError(f"{_join(path, 'initial')} must be \"strip\", \"random\" or {{\"file\": path}}")


def _parse_flow(r, base_dir):
    eps = r.real("eps", 0.025, gt=0)
    tau = r.real("tau", 1e-3, gt=0)
    steps = r.integer("steps", 100, ge=0)
    grid, r.out["grid"] = _grid(r.raw("grid", {}), "grid")
    spec, r.out["potential"] = build_potential(
        r.raw("potential", {"family": "homogeneous"}), "potential", grid.dim, base_dir
    )
    initial = _initial(r, "")
    record_every = r.integer("record_every", 1, ge=1)
    snapshot_every = r.integer("snapshot_every", 0, ge=0)
    seed = r.integer("seed", 0, ge=0)
    M = r.real("M", 1.5, gt=0)
    tv = r.boolean("tv", False)
    delta = r.real("delta", _potential_delta(spec), ge=0)
    energy_gradient = r.choice("energy_gradient", ("fd", "spectral"), "spectral")
    if isinstance(initial, str) and initial not in ("strip", "random") and base_dir is not None:
        p = Path(initial)
        initial = str(p if p.is_absolute() else Path(base_dir) / p)
    return _wrap(
        "config",
        FlowConfig,
        eps=eps,
        tau=tau,
        steps=steps,
        spec=spec,
        grid=grid,
        delta=delta,
        initial=initial,
        record_every=record_every,
        snapshot_every=snapshot_every,
        seed=seed,
        M=M,
        tv=tv,
        energy_gradient=energy_gradient,
    )


def _parse_homogenize(r, base_dir):
    spec, r.out["potential"] = build_potential(r.raw("potential", required=True), "potential", 2, base_dir)
    job = HomogenizeJob(
        spec=spec,
        cell_quadrature_n=r.integer("cell_quadrature_n", 256, ge=32),
        u_min=r.real("u_min", -1.5),
        u_max=r.real("u_max", 1.5),
        u_points=r.integer("u_points", 1201, ge=4),
    )
    if not job.u_max > job.u_min:
        raise ConfigError("u_max must be > u_min")
    if not (job.u_min <= -1.0 and job.u_max >= 1.0):
        raise ConfigError("u_min and u_max must bracket [-1, 1]")
    return job


def _parse_profile(r, base_dir):
    spec, r.out["potential"] = build_potential(
        r.raw("potential", {"family": "homogeneous"}), "potential", 2, base_dir
    )
    job = ProfileJob(
        spec=spec,
        cell_quadrature_n=r.integer("cell_quadrature_n", 256, ge=32),
        x_min=r.real("x_min", -5.0),
        x_max=r.real("x_max", 5.0),
        x_points=r.integer("x_points", 1001, ge=2),
    )
    if not job.x_max > job.x_min:
        raise ConfigError("x_max must be > x_min")
    return job


def _parse_counterexample(r, base_dir):
    eps = r.real("eps", 0.01, gt=0)
    delta = r.real("delta", 0.005, gt=0, lt=1)
    alpha = r.real("alpha", 0.03, ge=0)
    n_1d = r.integer("n_1d", 200_000, ge=1)
    psi_sign = r.choice("psi_sign", (1, -1), 1)
    return _wrap("config", CounterexampleConfig, eps=eps, delta=delta, alpha=alpha, n_1d=n_1d, psi_sign=psi_sign)


def _parse_stochastic(r, base_dir):
    n = r.integer("n", 8, ge=1)
    m = r.integer("m", 10, ge=1)
    d = r.integer("d", 2, ge=1)
    dist = r.choice("dist", ("uniform01", "bernoulli"), "uniform01")
    p = None
    if dist == "bernoulli":
        p = r.real("p", required=True, ge=0)
        if p > 1:
            raise ConfigError("p must be <= 1")
    elif "p" in r.doc:
        raise ConfigError("p is only valid with dist \"bernoulli\"")
    trials = r.integer("trials", 200, ge=1)
    seed = r.integer("seed", 0, ge=0)
    return StochasticJob(n=n, m=m, d=d, dist=dist, p=p, trials=trials, seed=seed)


def _parse_energy(r, base_dir):
    eps = r.real("eps", 0.025, gt=0)
    grid, r.out["grid"] = _grid(r.raw("grid", {}), "grid")
    spec, r.out["potential"] = build_potential(
        r.raw("potential", {"family": "homogeneous"}), "potential", grid.dim, base_dir
    )
    initial = _initial(r, "")
    if initial not in ("strip", "random") and base_dir is not None:
        p = Path(initial)
        initial = str(p if p.is_absolute() else Path(base_dir) / p)
    seed = r.integer("seed", 0, ge=0)
    gradient = r.choice("gradient", ("fd", "spectral"), "fd")
    tv = r.boolean("tv", False)
    delta = r.real("delta", _potential_delta(spec), ge=0)
    if tv and not delta > 0:
        raise ConfigError("delta must be > 0 when tv is true")
    return EnergyJob(eps=eps, spec=spec, grid=grid, initial=initial, seed=seed, gradient=gradient, tv=tv, delta=delta)


_PARSERS = {
    "flow": _parse_flow,
    "homogenize": _parse_homogenize,
    "profile": _parse_profile,
    "counterexample": _parse_counterexample,
    "stochastic": _parse_stochastic,
    "energy": _parse_energy,
}


def parse_config(doc, base_dir=None) -> ParsedConfig:
    """Validate a configuration given as JSON text or an already-decoded dict.

    ``base_dir`` anchors relative file paths (tabulated CSVs, initial
    snapshots); by default they are taken relative to the working directory.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
    r = _Obj(doc, "")
    mode = r.choice("mode", MODES, required=True)
    target = _PARSERS[mode](r, base_dir)
    return ParsedConfig(mode, target, r.finish())


# -- presets and overrides -----------------------------------------------------


_PRESET_POTENTIALS = {
    "homogeneous": lambda delta: {"family": "homogeneous"},
    "hex": lambda delta: {"family": "hex", "a": 0.228, "b": -0.1, "delta": delta},
    "random": lambda delta: {"family": "random", "delta": delta, "m_sub": 40, "low": 0.0, "high": 2.0, "seed": 0},
    "wells": lambda delta: {"family": "wells", "delta": delta},
    "exponent": lambda delta: {"family": "exponent", "delta": delta},
}


def preset(name: str, delta: float = 0.1, n: int = 256) -> dict:
    """Flow configuration document for one of the reference experiments.

    All presets share ``eps = 0.025``, ``tau = 1e-3``, 100 steps, the strip
    initial state and the periodic square ``(-2, 2)^2``.  ``delta`` is
    ignored by ``homogeneous``.
    """
    if name not in _PRESET_POTENTIALS:
        raise ConfigError(f"preset: unknown name {name!r}; expected one of {', '.join(PRESETS)}")
    return {
        "mode": "flow",
        "eps": 0.025,
        "tau": 1e-3,
        "steps": 100,
        "grid": {"n": n, "L": 4.0},
        "potential": _PRESET_POTENTIALS[name](delta),
        "initial": "strip",
    }


def apply_override(doc: dict, assignment: str) -> dict:
    """Return a copy of ``doc`` with ``"a.b.c=value"`` applied.

    ``value`` is decoded as JSON when possible (numbers, booleans, objects)
    and kept as a plain string otherwise.
    """
    if "=" not in assignment:
        raise ConfigError(f"--set {assignment!r}: expected key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"--set {assignment!r}: empty key component")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    out = copy.deepcopy(doc)
    node = out
    for i, part in enumerate(parts[:-1]):
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        elif not isinstance(child, dict):
            raise ConfigError(f"--set {key}: {'.'.join(parts[: i + 1])} is not an object")
        node = child
    node[parts[-1]] = value
    return out
