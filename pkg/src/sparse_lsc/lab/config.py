"""Experiment configuration.

Configs are YAML documents with flat keys, for example::

    {N: 1000, q: 10, experiment: identities}

Ensemble keys: ``N, q, f, kind, zero_diagonal, seed``. Domain keys:
``sigma, eta_min, eta_max``. Everything else is listed in ``LabConfig``.
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from ..ensemble import EnsembleParams, Kind
from ..semicircle import DomainSpec

__all__ = ["ConfigError", "LabConfig", "EXPERIMENTS", "DEFAULT_TOLERANCES",
           "config_from_dict", "load_config", "dump_config"]

EXPERIMENTS = ("identities", "lsc", "dos", "rigidity", "deloc", "topeig", "clt",
               "concentration", "pi")

DEFAULT_TOLERANCES = {
    "identities": {"residual_max": 1e-8},
    "lsc": {"slack_max": 2.0, "quantile": 0.95},
    "dos": {"rel_err_max": 0.05},
    "rigidity": {"polylog": 4.0, "quantile": 0.95, "bulk_factor": 5.0},
    "deloc": {"polylog": 2.0, "quantile": 0.95},
    "topeig": {"mu_band": 0.15, "overlap_band": 0.01},
    "clt": {"var_lo": 0.7, "var_hi": 1.4, "skew_max": 0.5, "kurt_max": 1.0},
    "concentration": {"quantile": 0.99, "sd_band": 0.1},
    "pi": {"ratio_max": 20.0, "quantile": 1.0},
}

_ENSEMBLE_KEYS = ("N", "q", "f", "kind", "zero_diagonal", "seed")
_DOMAIN_KEYS = ("sigma", "eta_min", "eta_max")


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message names the field."""


@dataclass(frozen=True)
class LabConfig:
    ensemble: EnsembleParams
    domain: DomainSpec
    experiment: str
    trials: int = 20
    eta_grid: tuple = ()
    e_grid: tuple = ()
    points: tuple = ()
    windows: tuple = ((-1.0, 1.0),)
    slack_exponent: float = 1.0
    tolerances: dict = field(default_factory=dict)
    workers: int = 1
    out_dir: str = "lab_out"
    offdiag: bool = True

    @property
    def N(self) -> int:
        return self.ensemble.N

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def grid(self):
        """Spectral parameters ``E + i eta``.

        Explicit ``points`` win; otherwise the product grid in row-major
        ``(eta, E)`` order.
        """
        if self.points:
            return [complex(E, eta) for E, eta in self.points]
        return [complex(E, eta) for eta in self.eta_grid for E in self.e_grid]

    def to_dict(self) -> dict:
        ens = self.ensemble
        return {
            "N": ens.N, "q": ens.q, "f": ens.f, "kind": ens.kind.value,
            "zero_diagonal": ens.zero_diagonal, "seed": ens.seed,
            "sigma": self.domain.sigma, "eta_min": self.domain.eta_min,
            "eta_max": self.domain.eta_max,
            "experiment": self.experiment, "trials": self.trials,
            "eta_grid": list(self.eta_grid), "e_grid": list(self.e_grid),
            "points": [list(p) for p in self.points],
            "windows": [list(w) for w in self.windows],
            "slack_exponent": self.slack_exponent,
            "tolerances": dict(self.tolerances), "workers": self.workers,
            "out_dir": self.out_dir, "offdiag": self.offdiag,
        }

    def replace(self, **changes) -> "LabConfig":
        d = self.to_dict()
        d.update(changes)
        return config_from_dict(d)


_DEFAULT_POINTS = {
    "identities": ((0.0, 2.0), (1.0, 0.1), (-2.0, 0.01)),
    "pi": ((0.5, 0.05),),
}


def _default_grids(N: int):
    lo = min(math.log(N) ** 2 / N, 3.0)
    eta = tuple(float(x) for x in np.geomspace(lo, 3.0, 8))
    E = tuple(float(x) for x in np.linspace(-3.0, 3.0, 13))
    return eta, E


def _number(d, key, kind=float):
    try:
        value = kind(d[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{key}': expected {kind.__name__}, got {d[key]!r}") from exc
    return value


def config_from_dict(d: dict) -> LabConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(d) - set(_ENSEMBLE_KEYS) - set(_DOMAIN_KEYS) - {
        f.name for f in dataclasses.fields(LabConfig)}
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    for key in ("N", "q", "experiment"):
        if key not in d:
            raise ConfigError(f"field '{key}' is required")
    experiment = str(d["experiment"])
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"field 'experiment': must be one of {', '.join(EXPERIMENTS)}")

    N = _number(d, "N", int)
    q = _number(d, "q")
    if N < 2:
        raise ConfigError("field 'N': must be >= 2")
    if q ** 2 >= N:
        raise ConfigError(f"field 'q': the invariant q^2 < N is violated (q={q}, N={N})")
    f = d.get("f", "auto")
    if f != "auto":
        f = _number(d, "f")
    try:
        ensemble = EnsembleParams(
            N=N, q=q, f=f, kind=Kind(d.get("kind", Kind.ERDOS_RENYI.value)),
            zero_diagonal=bool(d.get("zero_diagonal", False)), seed=int(d.get("seed", 0)))
    except ValueError as exc:
        raise ConfigError(f"ensemble: {exc}") from exc

    eta_default, e_default = _default_grids(N)
    try:
        eta_grid = tuple(float(x) for x in d.get("eta_grid") or eta_default)
        e_grid = tuple(float(x) for x in d.get("e_grid") or e_default)
        points = d.get("points")
        if points is None:
            points = _DEFAULT_POINTS.get(experiment, ())
        points = tuple((float(E), float(eta)) for E, eta in points)
    except (TypeError, ValueError) as exc:
        raise ConfigError("fields 'eta_grid'/'e_grid'/'points': expected numbers") from exc
    etas = [eta for _, eta in points] or list(eta_grid)
    try:
        domain = DomainSpec(
            sigma=float(d.get("sigma", 3.0)),
            eta_min=float(d.get("eta_min", min(etas))),
            eta_max=float(d.get("eta_max", max(3.0, max(etas)))))
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from exc
    all_E = [E for E, _ in points] + list(e_grid)
    if not domain.contains(all_E, etas):
        raise ConfigError("fields 'e_grid'/'eta_grid'/'points': grid points must lie in the domain")

    windows = d.get("windows") or ((-1.0, 1.0),)
    try:
        windows = tuple((float(a), float(b)) for a, b in windows)
    except (TypeError, ValueError) as exc:
        raise ConfigError("field 'windows': expected a list of [E1, E2] pairs") from exc
    if any(a >= b for a, b in windows):
        raise ConfigError("field 'windows': each window needs E1 < E2")

    trials = _number(d, "trials", int) if "trials" in d else 20
    if trials < 1:
        raise ConfigError("field 'trials': must be >= 1")
    workers = d.get("workers")
    if workers is None:
        workers = os.environ.get("LAB_WORKERS", 1)
    try:
        workers = int(workers)
    except ValueError as exc:
        raise ConfigError(f"field 'workers': expected int, got {workers!r}") from exc
    if workers < 1:
        raise ConfigError("field 'workers': must be >= 1")
    slack = float(d.get("slack_exponent", 1.0))
    if slack < 0:
        raise ConfigError("field 'slack_exponent': must be >= 0")

    tolerances = dict(DEFAULT_TOLERANCES[experiment])
    user_tol = d.get("tolerances") or {}
    if not isinstance(user_tol, dict):
        raise ConfigError("field 'tolerances': expected a mapping")
    for key, value in user_tol.items():
        if key not in tolerances:
            raise ConfigError(f"field 'tolerances': unknown key '{key}' for {experiment}")
        tolerances[key] = float(value)

    return LabConfig(
        ensemble=ensemble, domain=domain, experiment=experiment, trials=trials,
        eta_grid=eta_grid, e_grid=e_grid, points=points, windows=windows, slack_exponent=slack,
        tolerances=tolerances, workers=workers, out_dir=str(d.get("out_dir", "lab_out")),
        offdiag=bool(d.get("offdiag", True)))


def load_config(path, overrides: Optional[dict] = None) -> LabConfig:
    """Read a YAML config file; ``overrides`` replace file values before validation."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_dict(data)


def dump_config(cfg: LabConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)
