"""Scenario description files.

A scenario file is JSON (always supported) or TOML (on interpreters that
ship ``tomllib``) with the top-level keys ``grid``, ``model``,
``weights``, ``boundary`` and ``xi``.  The exact schema is documented in
the README; :class:`ScenarioSpec` keeps the parsed description around so
the same experiment can be rebuilt at a different resolution, which is
what the convergence-table command does.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .core import DisturbanceSignal, WeightField, build_grid, sample_coefficients
from .models import (EulerParams, SaintVenantParams, Scenario,
                     build_linear_benchmark, euler_scenario,
                     saint_venant_scenario)

__all__ = ["ScenarioError", "ScenarioSpec", "load_scenario"]


class ScenarioError(ValueError):
    """Unusable scenario file; the message names the offending field."""


def _require(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ScenarioError(f"missing field '{context}.{key}'")
    return mapping[key]


def _number(mapping: dict, key: str, context: str) -> float:
    v = _require(mapping, key, context)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(f"field '{context}.{key}' must be a number, got {v!r}")
    return float(v)


def _ic_fn(spec: Any, context: str):
    """Componentwise initial-data profile: constant, sine or cosine."""
    if isinstance(spec, (list, tuple)):
        spec = {"kind": "constant", "values": list(spec)}
    if not isinstance(spec, dict):
        raise ScenarioError(f"field '{context}' must be an object or a list")
    kind = spec.get("kind", "constant")
    if kind == "constant":
        vals = np.asarray(_require(spec, "values", context), dtype=float)
        return lambda x: vals
    if kind in ("sin", "cos"):
        amp = np.asarray(_require(spec, "amplitude", context), dtype=float)
        off = np.asarray(spec.get("offset", np.zeros_like(amp)), dtype=float)
        freq = float(spec.get("frequency", 1.0))
        trig = math.sin if kind == "sin" else math.cos
        return lambda x: off + amp * trig(math.pi * freq * x)
    raise ScenarioError(f"unknown initial-condition kind '{kind}' in '{context}'")


def _disturbance(spec: Any, k: int) -> DisturbanceSignal:
    if spec is None:
        return DisturbanceSignal.zero(k)
    if not isinstance(spec, dict):
        raise ScenarioError("field 'boundary.disturbance' must be an object")
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return DisturbanceSignal.zero(k)
    if kind == "constant":
        return DisturbanceSignal.constant(_require(spec, "values", "boundary.disturbance"))
    if kind == "pulsed_sine":
        return DisturbanceSignal.pulsed_sine(
            k, amplitude=float(spec.get("amplitude", 0.01)),
            cutoff=float(spec.get("cutoff", 5.0)),
            pattern=spec.get("pattern"))
    if kind == "table":
        return DisturbanceSignal.tabulated(
            _require(spec, "times", "boundary.disturbance"),
            _require(spec, "values", "boundary.disturbance"))
    raise ScenarioError(f"unknown disturbance kind '{kind}'")


@dataclass
class ScenarioSpec:
    """Parsed scenario description, rebuildable at other resolutions."""

    raw: dict
    path: Optional[str] = None

    def __post_init__(self):
        for key in ("grid", "model", "weights", "boundary", "xi"):
            if key not in self.raw:
                raise ScenarioError(f"missing top-level field '{key}'")
        model = self.raw["model"]
        if not isinstance(model, dict) or "name" not in model:
            raise ScenarioError("field 'model' must be an object with a 'name'")
        if model["name"] not in ("linear2x2", "saint_venant", "isothermal_euler"):
            raise ScenarioError(f"unknown model '{model['name']}'")

    @property
    def model_name(self) -> str:
        return self.raw["model"]["name"]

    def build(self, J: Optional[int] = None, cfl: Optional[float] = None) -> Scenario:
        grid_cfg = self.raw["grid"]
        l = _number(grid_cfg, "l", "grid")
        J = int(J if J is not None else _number(grid_cfg, "J", "grid"))
        T = _number(grid_cfg, "T", "grid")
        cfl = float(cfl if cfl is not None else _number(grid_cfg, "cfl", "grid"))
        xi = _number(self.raw, "xi", "")
        weights_cfg = self.raw["weights"]
        boundary = self.raw["boundary"]
        model = self.raw["model"]
        name = model["name"]

        mu = None
        if "table" not in weights_cfg:
            mu = _number(weights_cfg, "mu", "weights")

        if name == "linear2x2":
            scenario = self._build_linear(l, J, T, cfl, xi, model, weights_cfg, boundary, mu)
        elif name == "saint_venant":
            scenario = self._build_saint_venant(l, J, T, cfl, xi, model, weights_cfg,
                                                boundary, mu)
        else:
            scenario = self._build_euler(l, J, T, cfl, xi, model, weights_cfg, boundary, mu)

        if "table" in weights_cfg:
            table = np.asarray(weights_cfg["table"], dtype=float)
            if table.shape != (J + 2, scenario.coefficients.k):
                raise ScenarioError(
                    f"weights.table must have shape (J+2, k) = ({J + 2}, "
                    f"{scenario.coefficients.k}), got {table.shape}")
            scenario.weights = WeightField.from_samples(table)
        return scenario

    def _build_linear(self, l, J, T, cfl, xi, model, weights_cfg, boundary, mu):
        speeds = model.get("speeds", [1.0, -1.0])
        source = model.get("source", [[0.3, -0.1], [-0.1, 0.3]])
        ic = _ic_fn(model.get("ic", [-0.5, 0.5]), "model.ic")
        kappa12 = _number(boundary, "kappa12", "boundary")
        kappa21 = _number(boundary, "kappa21", "boundary")
        m_diag = boundary.get("M", [1.0, 1.0])
        p_plus = weights_cfg.get("p_plus", [1.0])
        p_minus = weights_cfg.get("p_minus", [1.0])
        lam = np.asarray(speeds, dtype=float)
        grid = build_grid(l=l, J=J, T=T, cfl=cfl, lambda_max=float(np.max(np.abs(lam))))
        gamma = np.asarray(source, dtype=float)
        b = _disturbance(boundary.get("disturbance"), lam.size)
        K = np.array([[0.0, kappa12], [kappa21, 0.0]])
        coeffs = sample_coefficients(lambda x: lam, lambda x: gamma, grid, K=K,
                                     M=np.asarray(m_diag, dtype=float), b=b)
        weights = WeightField.implicit(p_plus, p_minus, mu, grid) if mu is not None \
            else WeightField.from_samples(np.ones((J + 2, lam.size)))
        initial = np.array([ic(x) for x in grid.centers[1:-1]])
        return Scenario(name="linear2x2", grid=grid, coefficients=coeffs,
                        weights=weights, xi=xi, initial=initial)

    def _build_saint_venant(self, l, J, T, cfl, xi, model, weights_cfg, boundary, mu):
        params = SaintVenantParams(
            g=float(model.get("g", 9.81)),
            Cf=float(model.get("Cf", 0.1)),
            Sb=float(model.get("Sb", 0.0459)),
            Hstar=float(model.get("Hstar", 2.0)),
            Vstar=float(model.get("Vstar", 3.0)),
            k0=model.get("k0"), kl=model.get("kl"))
        kappa = None
        if "kappa_override" in model:
            pair = model["kappa_override"]
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ScenarioError("model.kappa_override must be [kappa12, kappa21]")
            kappa = (float(pair[0]), float(pair[1]))
        elif "kappa12" in boundary and "kappa21" in boundary:
            kappa = (_number(boundary, "kappa12", "boundary"),
                     _number(boundary, "kappa21", "boundary"))
        elif "k0" in boundary or "kl" in boundary:
            params.k0 = _number(boundary, "k0", "boundary")
            params.kl = _number(boundary, "kl", "boundary")
        gamma_override = model.get("gamma_override")
        ic_cfg = model.get("ic", {})
        H0 = ic_cfg.get("H0", 2.5)
        V0_cfg = ic_cfg.get("V0")
        if V0_cfg is None:
            V0 = None
        elif isinstance(V0_cfg, (int, float)):
            V0 = float(V0_cfg)
        else:
            fn = _ic_fn(V0_cfg, "model.ic.V0")
            V0 = lambda x: float(np.atleast_1d(fn(x))[0])
        if mu is None:
            raise ScenarioError("saint_venant scenarios need implicit weights (mu)")
        return saint_venant_scenario(
            J=J, cfl=cfl, T=T, mu=mu, xi=xi, params=params, kappa=kappa,
            p=(float(weights_cfg.get("p_plus", [0.0992])[0]),
               float(weights_cfg.get("p_minus", [0.2008])[0])),
            gamma_override=gamma_override, l=l, H0=float(H0), V0=V0)

    def _build_euler(self, l, J, T, cfl, xi, model, weights_cfg, boundary, mu):
        params = EulerParams(
            a=float(model.get("a", 1.0)),
            f_over_D=float(model.get("f_over_D", 1.0)),
            rho0=float(model.get("rho0", 3.0)),
            q_star=float(model.get("q_star", 0.2)))
        kappa = (float(boundary.get("kappa12", 0.5)),
                 float(boundary.get("kappa21", 0.5)))
        if mu is None:
            raise ScenarioError("isothermal_euler scenarios need implicit weights (mu)")
        return euler_scenario(
            J=J, cfl=cfl, T=T, mu=mu, xi=xi, params=params, kappa=kappa,
            p=(float(weights_cfg.get("p_plus", [1.0])[0]),
               float(weights_cfg.get("p_minus", [1.0])[0])), l=l)


def load_scenario(path: str) -> ScenarioSpec:
    """Parse a scenario file; raises ScenarioError with a line/field hint."""
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    text = p.read_bytes()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError as exc:
            raise ScenarioError(
                "TOML scenarios need Python >= 3.11 (tomllib); use JSON instead") from exc
        try:
            raw = tomllib.loads(text.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return ScenarioSpec(raw=raw, path=str(p))
