"""Run configuration: TOML documents, dotted overrides and initial-data presets.

A minimal document::

    dimension = 1
    n = 512
    L = 12.0
    mu = -1
    preset = "soliton"

Optional top-level keys: ``seed``, ``morawetz_R``, ``cutoff``,
``sample_times``, ``output_dir``.  Tables ``[preset_params]``,
``[evolution]``, ``[ground_state]`` and ``[transform]`` hold the rest; see
``DEFAULTS`` for every key and its default.
"""
from __future__ import annotations

import copy
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigurationError
from .evolve import EvolutionConfig
from .grid import ComplexField, Grid
from .symmetry import GroupElement, dilate, galilean_boost

log = logging.getLogger(__name__)

PRESETS = ("gaussian", "soliton", "boosted_soliton", "perturbed_soliton", "scaled_soliton")

# None marks a key that is optional with no default value.
DEFAULTS = {
    "dimension": None,
    "n": None,
    "L": None,
    "mu": None,
    "preset": None,
    "seed": 0,
    "morawetz_R": None,
    "cutoff": None,
    "sample_times": [],
    "output_dir": "out",
    "preset_params": {
        "amplitude": 1.0,
        "width": 1.0,
        "boost": 0.0,
        "perturbation": 1e-2,
        "scale": 1.0,
    },
    "evolution": {
        "dt0": 1e-3,
        "t_end": 1.0,
        "cfl_safety": 1.0,
        "blowup_gradient_factor": 20.0,
        "record_stride": 10,
        "record_dt": None,
        "rate_constant": 0.1,
        "nyquist_guard": 0.1,
    },
    "ground_state": {
        "tol": None,
        "seed": "gaussian",
    },
    "transform": {
        "kind": "group",
        "lam": 1.0,
        "x0": 0.0,
        "xi0": 0.0,
        "gamma0": 0.0,
        "boost": 0.0,
        "t": 1.0,
    },
}
REQUIRED = ("dimension", "n", "L", "mu", "preset")
_TYPES = {
    "dimension": int, "n": int, "L": float, "mu": int, "preset": str, "seed": int,
    "morawetz_R": float, "cutoff": float, "sample_times": "floats", "output_dir": str,
    "preset_params.amplitude": float, "preset_params.width": float,
    "preset_params.boost": "vector", "preset_params.perturbation": float,
    "preset_params.scale": float,
    "evolution.dt0": float, "evolution.t_end": float, "evolution.cfl_safety": float,
    "evolution.blowup_gradient_factor": float, "evolution.record_stride": int,
    "evolution.record_dt": float, "evolution.rate_constant": float,
    "evolution.nyquist_guard": float,
    "ground_state.tol": float, "ground_state.seed": str,
    "transform.kind": str, "transform.lam": float, "transform.x0": "vector",
    "transform.xi0": "vector", "transform.gamma0": float, "transform.boost": "vector",
    "transform.t": float,
}
TRANSFORMS = ("group", "inverse_group", "boost", "pseudoconformal")


@dataclass
class RunConfig:
    dimension: int
    n: int
    L: float
    mu: int
    preset: str
    seed: int
    amplitude: float
    width: float
    boost: tuple
    perturbation: float
    scale: float
    evolution: EvolutionConfig
    morawetz_R: Optional[float]
    cutoff: Optional[float]
    sample_times: tuple
    output_dir: Path
    gs_tol: Optional[float]
    gs_seed: str
    transform: dict

    @property
    def grid(self) -> Grid:
        return Grid(self.dimension, self.n, self.L)

    @property
    def preset_file(self) -> Optional[Path]:
        return Path(self.preset[5:]) if self.preset.startswith("file:") else None


def _merge(doc: dict, defaults: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in doc.items():
        path = prefix + key
        if key not in defaults:
            raise ConfigurationError(f"{path}: unknown key")
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigurationError(f"{path}: expected a table")
            out[key] = _merge(val, defaults[key], path + ".")
        else:
            out[key] = val
    for key, val in defaults.items():
        if key not in out:
            if isinstance(val, dict):
                out[key] = _merge({}, val, prefix + key + ".")
            else:
                out[key] = copy.deepcopy(val)
    return out


def _coerce(path: str, val):
    kind = _TYPES[path]
    if val is None:
        return None
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigurationError(f"{path}: expected an integer, got {val!r}")
        return val
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigurationError(f"{path}: expected a number, got {val!r}")
        if not np.isfinite(val):
            raise ConfigurationError(f"{path}: must be finite")
        return float(val)
    if kind is str:
        if not isinstance(val, str):
            raise ConfigurationError(f"{path}: expected a string, got {val!r}")
        return val
    items = val if isinstance(val, list) else [val]
    out = []
    for v in items:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            raise ConfigurationError(f"{path}: expected finite numbers, got {val!r}")
        out.append(float(v))
    return tuple(out)


def _vector(path: str, v: tuple, d: int) -> tuple:
    if len(v) == 1:
        return v * d
    if len(v) != d:
        raise ConfigurationError(f"{path}: expected {d} components, got {len(v)}")
    return v


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(doc: dict, item: str) -> dict:
    """Apply ``key.path=value``; the value is read as a TOML literal when possible."""
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not of the form key=value")
    key, text = item.split("=", 1)
    parts = key.strip().split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"{key}: not a table")
    node[parts[-1]] = _parse_value(text.strip())
    return doc


def parse_config(text: str, overrides: Sequence[str] = (), base_dir=None) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    for item in overrides:
        apply_override(doc, item)
    merged = _merge(doc, DEFAULTS)
    for key in REQUIRED:
        if merged[key] is None:
            raise ConfigurationError(f"{key}: required key missing")

    def get(path):
        node = merged
        for p in path.split("."):
            node = node[p]
        return _coerce(path, node)

    d = get("dimension")
    try:
        grid = Grid(d, get("n"), get("L"))
    except ConfigurationError as exc:
        raise ConfigurationError(f"dimension/n/L: {exc}") from exc
    mu = get("mu")
    if mu not in (-1, 1):
        raise ConfigurationError(f"mu: must be -1 or +1, got {mu}")
    preset = get("preset")
    if preset.startswith("file:"):
        p = Path(preset[5:])
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        if not p.is_file():
            raise ConfigurationError(f"preset: file {p} does not exist")
        preset = "file:" + str(p)
    elif preset not in PRESETS:
        raise ConfigurationError(f"preset: unknown preset {preset!r} (choose from {', '.join(PRESETS)})")

    ev = {k: get("evolution." + k) for k in DEFAULTS["evolution"]}
    try:
        evolution = EvolutionConfig(mu=mu, **ev)
    except ConfigurationError as exc:
        raise ConfigurationError(f"evolution: {exc}") from exc

    amplitude = get("preset_params.amplitude")
    width = get("preset_params.width")
    if width <= 0:
        raise ConfigurationError("preset_params.width: must be positive")
    scale = get("preset_params.scale")
    if not 0.25 <= scale <= 4.0:
        raise ConfigurationError("preset_params.scale: must lie in [0.25, 4]")
    perturbation = get("preset_params.perturbation")
    if perturbation < 0:
        raise ConfigurationError("preset_params.perturbation: must be nonnegative")
    R = get("morawetz_R")
    if R is not None and R <= 0:
        raise ConfigurationError("morawetz_R: must be positive")
    cutoff = get("cutoff")
    if cutoff is not None and cutoff < 0:
        raise ConfigurationError("cutoff: must be nonnegative")
    times = get("sample_times")
    if list(times) != sorted(times) or any(t < 0 for t in times):
        raise ConfigurationError("sample_times: must be nonnegative and increasing")
    tr = {k: get("transform." + k) for k in DEFAULTS["transform"]}
    if tr["kind"] not in TRANSFORMS:
        raise ConfigurationError(f"transform.kind: choose from {', '.join(TRANSFORMS)}")
    for k in ("x0", "xi0", "boost"):
        tr[k] = _vector("transform." + k, tr[k], d)
    gs_tol = get("ground_state.tol")
    if gs_tol is not None and not 0 < gs_tol <= 1e-4:
        raise ConfigurationError("ground_state.tol: must lie in (0, 1e-4]")
    return RunConfig(
        dimension=d, n=grid.n, L=grid.L, mu=mu, preset=preset, seed=get("seed"),
        amplitude=amplitude, width=width,
        boost=_vector("preset_params.boost", get("preset_params.boost"), d),
        perturbation=perturbation, scale=scale, evolution=evolution, morawetz_R=R,
        cutoff=cutoff, sample_times=tuple(times), output_dir=Path(get("output_dir")),
        gs_tol=gs_tol, gs_seed=get("ground_state.seed"), transform=tr,
    )


def load_config(path, overrides: Sequence[str] = ()) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"{path}: not UTF-8 text") from exc
    return parse_config(text, overrides, base_dir=path.parent)


# ---------------------------------------------------------------------------
# presets

def seeded_perturbation(grid: Grid, seed: int, size: float, kmax: float = 4.0) -> np.ndarray:
    """Band-limited noise under a Gaussian window, scaled to L2 norm ``size``."""
    rng = np.random.default_rng(seed)
    spec = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spec = spec * (grid.ksq <= kmax * kmax)
    noise = np.fft.ifftn(spec) * np.exp(-grid.r2 / 4.0)
    norm = np.sqrt(np.sum(np.abs(noise) ** 2) * grid.dV)
    return noise * (size / norm) if norm > 0 else noise


def initial_field(cfg: RunConfig, q=None) -> ComplexField:
    """Initial data for the configured preset; ``q`` is solved on demand."""
    from .groundstate import solve_ground_state
    from .io import read_snapshot

    grid = cfg.grid
    if cfg.preset_file is not None:
        f = read_snapshot(cfg.preset_file)
        if f.grid != grid:
            raise ConfigurationError(f"preset: snapshot grid {f.grid} differs from configured {grid}")
        return f
    if cfg.preset == "gaussian":
        f = ComplexField(grid, cfg.amplitude * np.exp(-grid.r2 / (2.0 * cfg.width ** 2)))
    else:
        if q is None:
            q = solve_ground_state(grid, tol=cfg.gs_tol, seed=cfg.gs_seed)
        f = q.field
        if cfg.preset == "perturbed_soliton":
            u = f.samples + seeded_perturbation(grid, cfg.seed, cfg.perturbation)
            u = u * np.sqrt(q.mass / (np.sum(np.abs(u) ** 2) * grid.dV))
            f = f.replace(u)
        elif cfg.preset == "scaled_soliton":
            s = cfg.scale
            f = f.replace(cfg.amplitude * s ** (grid.d / 2) * dilate(f, s))
        elif cfg.amplitude != 1.0:
            f = cfg.amplitude * f
    if any(cfg.boost):
        f = galilean_boost(f, cfg.boost, 0.0)
    return f


def transform_element(cfg: RunConfig) -> GroupElement:
    tr = cfg.transform
    return GroupElement(tr["lam"], tr["x0"], tr["xi0"], tr["gamma0"])
