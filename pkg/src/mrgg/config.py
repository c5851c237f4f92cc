"""Experiment configuration: one flat JSON document per run, fully validated up front."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import (
    ConstantEnvelope,
    GegenbauerEnvelope,
    HeavisideEnvelope,
    LatitudeDistribution,
    beta_mixture,
    scaled_beta,
    uniform_latitude,
)
from .harmonics import EnvelopeSpectrum
from .inference import TestPipeline

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    """Invalid or malformed run configuration (maps to exit status 2)."""


_ENVELOPES = ("heaviside", "constant", "gegenbauer")
_LATITUDES = ("uniform", "beta-mixture", "scaled-beta")
_ZETA_RULES = ("dense", "log2", "log3", "log4")

_KEYS = {
    "scenario": str,
    "n": int,
    "n_list": list,
    "d": int,
    "envelope": str,
    "envelope_level": (int, float),
    "envelope_coefficients": list,
    "latitude": str,
    "latitude_params": list,
    "zeta": (str, int, float),
    "seeds": list,
    "graph_file": str,
    "alpha": (int, float),
    "bins": int,
    "calibration_trials": int,
    "evaluation_trials": int,
    "reuse_distances": bool,
    "bandwidth": (int, float),
    "link_nodes": int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated run parameters shared by all commands.

    ``zeta`` is either the string "dense" (factor 1), one of "log2"/"log3"/
    "log4" for log(n)^k / n clamped into (0, 1], or an explicit number.
    """

    scenario: str = "run"
    n: Optional[int] = None
    n_list: Optional[tuple] = None
    d: int = 3
    envelope: str = "heaviside"
    envelope_level: float = 0.5
    envelope_coefficients: Optional[tuple] = None
    latitude: str = "beta-mixture"
    latitude_params: tuple = (2.0, 2.0)
    zeta: object = "dense"
    seeds: tuple = (0,)
    graph_file: Optional[str] = None
    alpha: float = 0.05
    bins: int = 70
    calibration_trials: int = 200
    evaluation_trials: int = 100
    reuse_distances: bool = False
    bandwidth: Optional[float] = None
    link_nodes: int = 10
    provided: frozenset = frozenset()  # keys explicitly present in the source document

    def resolve_zeta(self, n: int) -> float:
        if self.zeta == "dense":
            return 1.0
        if isinstance(self.zeta, str):
            k = int(self.zeta[3:])
            return min(1.0, math.log(n) ** k / n)
        return float(self.zeta)

    def build_envelope(self):
        if self.envelope == "heaviside":
            return HeavisideEnvelope()
        if self.envelope == "constant":
            return ConstantEnvelope(self.envelope_level)
        return GegenbauerEnvelope(
            EnvelopeSpectrum(np.asarray(self.envelope_coefficients, dtype=float), self.d)
        )

    def build_latitude(self) -> LatitudeDistribution:
        if self.latitude == "uniform":
            return uniform_latitude(self.d)
        if self.latitude == "beta-mixture":
            return beta_mixture(*self.latitude_params)
        return scaled_beta(*self.latitude_params)

    def pipeline(self, n: int) -> TestPipeline:
        return TestPipeline(
            envelope=self.envelope,
            envelope_level=self.envelope_level,
            envelope_coefficients=self.envelope_coefficients,
            latitude=self.latitude,
            latitude_params=self.latitude_params,
            zeta=self.resolve_zeta(n),
            bins=self.bins,
            reuse_distances=self.reuse_distances,
            bandwidth=self.bandwidth,
        )

    def sizes(self) -> tuple:
        if self.n_list is not None:
            return self.n_list
        if self.n is None:
            raise ConfigError("config needs 'n' or 'n_list'")
        return (self.n,)


def load_config(source) -> ExperimentConfig:
    """Parse and validate a config dict or a JSON file path; unknown keys are rejected."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")

    unknown = set(doc) - set(_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, val in doc.items():
        if val is None:
            continue
        if not isinstance(val, _KEYS[key]) or isinstance(val, bool) and _KEYS[key] is int:
            raise ConfigError(f"config key {key!r} has the wrong type: {val!r}")

    merged = {k: v for k, v in doc.items() if v is not None}
    merged["provided"] = frozenset(merged)
    if "n_list" in merged:
        merged["n_list"] = tuple(int(v) for v in merged["n_list"])
    if "seeds" in merged:
        merged["seeds"] = tuple(int(v) for v in merged["seeds"])
    if "latitude_params" in merged:
        merged["latitude_params"] = tuple(float(v) for v in merged["latitude_params"])
    if "envelope_coefficients" in merged:
        merged["envelope_coefficients"] = tuple(float(v) for v in merged["envelope_coefficients"])
    cfg = ExperimentConfig(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.d < 3:
        raise ConfigError(f"latent dimension must be >= 3, got {cfg.d}")
    if cfg.n is not None and cfg.n < 1:
        raise ConfigError(f"graph size must be positive, got {cfg.n}")
    if cfg.n_list is not None and any(v < 1 for v in cfg.n_list):
        raise ConfigError("all graph sizes must be positive")
    if cfg.envelope not in _ENVELOPES:
        raise ConfigError(f"envelope must be one of {_ENVELOPES}, got {cfg.envelope!r}")
    if cfg.envelope == "constant" and not 0.0 <= cfg.envelope_level <= 1.0:
        raise ConfigError("envelope level must lie in [0, 1]")
    if cfg.envelope == "gegenbauer" and not cfg.envelope_coefficients:
        raise ConfigError("gegenbauer envelope needs 'envelope_coefficients'")
    if cfg.latitude not in _LATITUDES:
        raise ConfigError(f"latitude must be one of {_LATITUDES}, got {cfg.latitude!r}")
    if cfg.latitude in ("beta-mixture", "scaled-beta"):
        if len(cfg.latitude_params) != 2 or any(v <= 0 for v in cfg.latitude_params):
            raise ConfigError("Beta latitude needs two positive parameters")
    if isinstance(cfg.zeta, str):
        if cfg.zeta not in _ZETA_RULES:
            raise ConfigError(f"zeta rule must be one of {_ZETA_RULES} or a number")
    elif not 0.0 < float(cfg.zeta) <= 1.0:
        raise ConfigError("numeric zeta must lie in (0, 1]")
    if not cfg.seeds:
        raise ConfigError("need at least one seed")
    if not 0.0 < cfg.alpha <= 1.0:
        raise ConfigError("test level must lie in (0, 1]")
    if cfg.bins < 2:
        raise ConfigError("need at least 2 bins")
    if cfg.calibration_trials < 1 or cfg.evaluation_trials < 1:
        raise ConfigError("trial counts must be positive")
    if cfg.bandwidth is not None and cfg.bandwidth <= 0:
        raise ConfigError("bandwidth must be positive")
    if cfg.link_nodes < 1:
        raise ConfigError("link_nodes must be positive")
