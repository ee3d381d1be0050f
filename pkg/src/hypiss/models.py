"""Scenario builders: the constant-coefficient 2x2 benchmark, the
linearized Saint-Venant channel flow, and the linearized isothermal Euler
pipe flow with its Lambert-W equilibrium density.

All builders return a :class:`Scenario`, the complete input of both the
certifier and the solver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (DisturbanceSignal, Grid1D, SystemCoefficients, WeightField,
                   build_grid, sample_coefficients)
from .lambertw import lambert_w_minus1

__all__ = [
    "Scenario",
    "build_linear_benchmark",
    "SaintVenantParams",
    "linearize_saint_venant",
    "saint_venant_scenario",
    "EulerParams",
    "linearize_euler",
    "euler_scenario",
    "integrate_steady_state",
    "linear_steady_state_rhs",
]

logger = logging.getLogger(__name__)

ScalarField = Union[float, Callable[[float], float]]


def _as_fn(v: ScalarField) -> Callable[[float], float]:
    if callable(v):
        return v
    vv = float(v)
    return lambda x: vv


@dataclass
class Scenario:
    """Everything needed to certify and run one experiment."""

    name: str
    grid: Grid1D
    coefficients: SystemCoefficients
    weights: WeightField
    xi: float
    initial: np.ndarray
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        self.initial = np.atleast_2d(np.asarray(self.initial, dtype=float))
        if self.initial.shape != (self.grid.J, self.coefficients.k):
            raise ValueError("initial data must be (J, k)")


def build_linear_benchmark(J: int, cfl: float, T: float, mu: float, xi: float,
                           kappa12: float, kappa21: float,
                           l: float = 1.0,
                           speeds: Tuple[float, float] = (1.0, -1.0),
                           source: Sequence[Sequence[float]] = ((0.3, -0.1), (-0.1, 0.3)),
                           ic: Tuple[float, float] = (-0.5, 0.5),
                           p: Tuple[float, float] = (1.0, 1.0),
                           m_diag: Tuple[float, float] = (1.0, 1.0),
                           amplitude: float = 0.01,
                           cutoff: float = 5.0) -> Scenario:
    """Constant-coefficient 2x2 benchmark with a pulsed boundary disturbance.

    Defaults reproduce the standard test problem: speeds diag(1, -1),
    symmetric source matrix, constant initial data (-0.5, 0.5), implicit
    exponential weights with p1 = p2 = 1, and the disturbance pair
    b1 = -b2 = amplitude * sin^2(pi t) switched off at ``cutoff``.
    """
    lam = np.asarray(speeds, dtype=float)
    if not (lam[0] > 0 > lam[1]):
        raise ValueError("benchmark needs one positive and one negative speed")
    gamma = np.asarray(source, dtype=float)
    grid = build_grid(l=l, J=J, T=T, cfl=cfl, lambda_max=float(np.max(np.abs(lam))))
    b = DisturbanceSignal.pulsed_sine(2, amplitude=amplitude, cutoff=cutoff)
    K = np.array([[0.0, kappa12], [kappa21, 0.0]])
    coeffs = sample_coefficients(lambda x: lam, lambda x: gamma, grid,
                                 K=K, M=np.asarray(m_diag, dtype=float), b=b)
    weights = WeightField.implicit([p[0]], [p[1]], mu, grid)
    initial = np.tile(np.asarray(ic, dtype=float), (J, 1))
    return Scenario(name="linear2x2", grid=grid, coefficients=coeffs,
                    weights=weights, xi=xi, initial=initial)


@dataclass
class SaintVenantParams:
    """Channel-flow model data around a sub-critical equilibrium."""

    g: float = 9.81
    Cf: float = 0.1
    Sb: float = 0.0459
    Hstar: ScalarField = 2.0
    Vstar: ScalarField = 3.0
    k0: Optional[float] = None
    kl: Optional[float] = None


def _sv_lambdas(params: SaintVenantParams) -> Tuple[Callable, Callable]:
    H, V = _as_fn(params.Hstar), _as_fn(params.Vstar)
    g = params.g

    def lam1(x: float) -> float:
        return V(x) + math.sqrt(g * H(x))

    def lam2(x: float) -> float:
        return V(x) - math.sqrt(g * H(x))

    return lam1, lam2


def _sv_gammas(params: SaintVenantParams) -> Callable[[float], np.ndarray]:
    H, V = _as_fn(params.Hstar), _as_fn(params.Vstar)
    g, Cf, Sb = params.g, params.Cf, params.Sb
    lam1, lam2 = _sv_lambdas(params)

    def gamma(x: float) -> np.ndarray:
        h, v = H(x), V(x)
        c = math.sqrt(g * h)
        imbalance = (Sb * h - Cf * v * v) * g / h
        fric = g * Cf * v * v / (2.0 * h)
        lo = 2.0 / v - 1.0 / c
        hi = 2.0 / v + 1.0 / c
        return np.array([
            [0.75 * imbalance / lam1(x) + fric * lo,
             0.25 * imbalance / lam1(x) + fric * hi],
            [0.25 * imbalance / lam2(x) + fric * lo,
             0.75 * imbalance / lam2(x) + fric * hi],
        ])

    return gamma


def saint_venant_kappa(params: SaintVenantParams, l: float) -> Tuple[float, float]:
    """Feedback gains induced by the physical boundary gains k0, kl."""
    if params.k0 is None or params.kl is None:
        raise ValueError("physical boundary gains k0, kl not set")
    H = _as_fn(params.Hstar)
    s0 = params.k0 * math.sqrt(H(0.0) / params.g)
    sl = params.kl * math.sqrt(H(l) / params.g)
    kappa12 = (s0 - 1.0) / (1.0 + s0)
    kappa21 = (sl - 1.0) / (1.0 + sl)
    if abs(kappa12 - 1.0) < 1e-14 or abs(kappa21 - 1.0) < 1e-14:
        raise ValueError("boundary gain maps to the excluded value kappa = 1")
    return kappa12, kappa21


def saint_venant_transform(params: SaintVenantParams):
    """(H, V) <-> characteristic coordinates, both directions.

    Returns ``(to_w, from_w)`` where ``to_w(x, H, V) -> (w1, w2)`` and
    ``from_w(x, w1, w2) -> (H, V)``.
    """
    Hs, Vs = _as_fn(params.Hstar), _as_fn(params.Vstar)
    g = params.g

    def to_w(x: float, H: float, V: float) -> Tuple[float, float]:
        c = math.sqrt(g / Hs(x))
        dv, dh = V - Vs(x), H - Hs(x)
        return dv + dh * c, dv - dh * c

    def from_w(x: float, w1: float, w2: float) -> Tuple[float, float]:
        c = math.sqrt(g / Hs(x))
        return Hs(x) + (w1 - w2) / (2.0 * c), Vs(x) + (w1 + w2) / 2.0

    return to_w, from_w


def linearize_saint_venant(params: SaintVenantParams, grid: Grid1D,
                           kappa: Optional[Tuple[float, float]] = None,
                           m_diag: Optional[Tuple[float, float]] = None,
                           gamma_override: Optional[Sequence[Sequence[float]]] = None,
                           b: Optional[DisturbanceSignal] = None,
                           ) -> Tuple[SystemCoefficients, List[str]]:
    """Sampled coefficients of the channel flow around its equilibrium.

    ``kappa`` overrides the physical-gain boundary map; ``gamma_override``
    replaces the source matrix with constants (the sampled formula values
    are still evaluated, and a disagreement beyond 1e-6 is flagged in the
    returned notes).  ``m_diag`` defaults to (1 - kappa12, 1 - kappa21).
    """
    H, V = _as_fn(params.Hstar), _as_fn(params.Vstar)
    for x in grid.centers:
        if V(x) ** 2 >= params.g * H(x):
            raise ValueError(f"equilibrium not sub-critical at x={x:.6g}")
    lam1, lam2 = _sv_lambdas(params)
    gamma_formula = _sv_gammas(params)
    notes: List[str] = []
    if gamma_override is not None:
        override = np.asarray(gamma_override, dtype=float)
        dev = max(float(np.max(np.abs(gamma_formula(x) - override)))
                  for x in grid.centers[1:-1])
        if dev > 1e-6:
            msg = (f"source override differs from the sampled formula by up to "
                   f"{dev:.3g}; using the override")
            logger.warning(msg)
            notes.append(msg)
        gamma_fn: Callable[[float], np.ndarray] = lambda x: override
    else:
        gamma_fn = gamma_formula
    if kappa is None:
        kappa = saint_venant_kappa(params, grid.l)
    kappa12, kappa21 = kappa
    if m_diag is None:
        m_diag = (1.0 - kappa12, 1.0 - kappa21)
    if b is None:
        b = DisturbanceSignal.pulsed_sine(2)
    K = np.array([[0.0, kappa12], [kappa21, 0.0]])
    coeffs = sample_coefficients(lambda x: np.array([lam1(x), lam2(x)]), gamma_fn,
                                 grid, K=K, M=np.asarray(m_diag, dtype=float), b=b)
    return coeffs, notes


def saint_venant_scenario(J: int = 1600, cfl: float = 0.75, T: float = 10.0,
                          mu: float = 0.575, xi: float = 0.125,
                          params: Optional[SaintVenantParams] = None,
                          kappa: Optional[Tuple[float, float]] = None,
                          p: Tuple[float, float] = (0.0992, 0.2008),
                          gamma_override: Optional[Sequence[Sequence[float]]] = ((0.0992, 0.2008),
                                                                                 (0.0992, 0.2008)),
                          l: float = 1.0,
                          H0: ScalarField = 2.5,
                          V0: Optional[ScalarField] = None) -> Scenario:
    """Channel-flow decay experiment around the constant equilibrium.

    Defaults reproduce the shipped experiment: constant equilibrium
    (H* = 2, V* = 3), source constants via override, weights
    (0.0992, 0.2008), gains kappa12 = 0.5 and kappa21 = 1.5 exp(-mu),
    initial depth 2.5 and velocity 4 sin(pi x).
    """
    params = params or SaintVenantParams()
    if V0 is None:
        V0 = lambda x: 4.0 * math.sin(math.pi * x)
    if kappa is None:
        kappa = (0.5, 1.5 * math.exp(-mu))
    lam1, lam2 = _sv_lambdas(params)
    probe = np.linspace(-l / (2 * J), l + l / (2 * J), 2 * J + 3)
    lam_max = max(max(abs(lam1(x)) for x in probe), max(abs(lam2(x)) for x in probe))
    grid = build_grid(l=l, J=J, T=T, cfl=cfl, lambda_max=lam_max)
    coeffs, notes = linearize_saint_venant(params, grid, kappa=kappa,
                                           gamma_override=gamma_override)
    weights = WeightField.implicit([p[0]], [p[1]], mu, grid)
    to_w, _ = saint_venant_transform(params)
    Hfn, Vfn = _as_fn(H0), _as_fn(V0)
    initial = np.array([to_w(x, Hfn(x), Vfn(x)) for x in grid.centers[1:-1]])
    return Scenario(name="saint_venant", grid=grid, coefficients=coeffs,
                    weights=weights, xi=xi, initial=initial, notes=notes)


@dataclass
class EulerParams:
    """Isothermal pipe-flow model data: sound speed, friction ratio and
    the equilibrium (rho*, q*) with q* constant."""

    a: float = 1.0
    f_over_D: float = 1.0
    rho0: float = 3.0
    q_star: float = 0.2

    def rho_star(self, x: float) -> float:
        """Equilibrium density via the branch -1 Lambert W closed form.

        With c = (a rho0 / q*)^2 and theta = (f/D)/2 the density is
        (q*/a) sqrt(-W_{-1}(-c exp(2 theta x - c))); the exponential
        argument is tiny in magnitude but stays inside the branch domain.
        """
        if self.q_star == 0.0:
            return self.rho0
        c = (self.a * self.rho0 / self.q_star) ** 2
        theta = self.f_over_D / 2.0
        z = -c * math.exp(2.0 * theta * x - c)
        if z == 0.0:
            raise ValueError("equilibrium argument underflows; parameters too extreme")
        w = lambert_w_minus1(z)
        return (abs(self.q_star) / self.a) * math.sqrt(-w)


def linearize_euler(params: EulerParams, grid: Grid1D,
                    kappa: Tuple[float, float] = (0.5, 0.5),
                    m_diag: Tuple[float, float] = (1.0, 1.0),
                    b: Optional[DisturbanceSignal] = None,
                    gamma_override: Optional[Sequence[Sequence[float]]] = None,
                    ) -> SystemCoefficients:
    """Sampled coefficients of the isothermal pipe flow.

    Speeds lambda1 = q*/rho* + a and lambda2 = q*/rho* - a must straddle
    zero at every sample.  Speed derivatives entering the source matrix
    are taken by centered differences with step dx/10 on the analytic
    equilibrium.
    """
    a, fD, q = params.a, params.f_over_D, params.q_star
    rho = params.rho_star

    def lam1(x: float) -> float:
        return q / rho(x) + a

    def lam2(x: float) -> float:
        return q / rho(x) - a

    for x in grid.centers:
        if not lam2(x) < 0.0 < lam1(x):
            raise ValueError(f"speed sign condition violated at x={x:.6g}")

    h = grid.dx / 10.0

    def deriv(f: Callable[[float], float], x: float) -> float:
        return (f(x + h) - f(x - h)) / (2.0 * h)

    def gamma(x: float) -> np.ndarray:
        if gamma_override is not None:
            return np.asarray(gamma_override, dtype=float)
        r = rho(x)
        l1, l2 = lam1(x), lam2(x)
        dl1, dl2 = deriv(lam1, x), deriv(lam2, x)
        drift = l2 * dl1 + l1 * dl2 + fD * q * q / (2.0 * r * r)
        mixing = 2.0 * q / (r * r) - fD * q / r
        half = 1.0 / (2.0 * a)
        return np.array([
            [-half * drift - half * l1 * mixing + half * dl2,
             +half * drift + half * l2 * mixing - half * dl2],
            [-half * drift - half * l1 * mixing + half * l1 * dl1,
             +half * drift + half * l1 * mixing - half * l2 * dl1],
        ])

    if b is None:
        b = DisturbanceSignal.pulsed_sine(2)
    K = np.array([[0.0, kappa[0]], [kappa[1], 0.0]])
    return sample_coefficients(lambda x: np.array([lam1(x), lam2(x)]), gamma, grid,
                               K=K, M=np.asarray(m_diag, dtype=float), b=b)


def euler_scenario(J: int = 1600, cfl: float = 0.75, T: float = 10.0,
                   mu: float = 0.575, xi: float = 0.125,
                   params: Optional[EulerParams] = None,
                   kappa: Tuple[float, float] = (0.5, 0.5),
                   p: Tuple[float, float] = (1.0, 1.0),
                   l: float = 1.0) -> Scenario:
    """Pipe-flow scenario with initial data cos(2 pi x) in both components.

    This is the shipped counterexample: its source matrices are not
    positive semi-definite, so certification fails at the source check.
    """
    params = params or EulerParams()
    rho = params.rho_star
    probe = np.linspace(-l / (2 * J), l + l / (2 * J), 257)
    lam_max = max(abs(params.q_star / rho(x)) + params.a for x in probe)
    grid = build_grid(l=l, J=J, T=T, cfl=cfl, lambda_max=lam_max)
    coeffs = linearize_euler(params, grid, kappa=kappa)
    weights = WeightField.implicit([p[0]], [p[1]], mu, grid)
    initial = np.array([[math.cos(2.0 * math.pi * x)] * 2 for x in grid.centers[1:-1]])
    return Scenario(name="isothermal_euler", grid=grid, coefficients=coeffs,
                    weights=weights, xi=xi, initial=initial)


def linear_steady_state_rhs(lambda_fn: Callable[[float], Sequence[float]],
                            gamma_fn: Callable[[float], Sequence[Sequence[float]]]
                            ) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side of the equilibrium ODE dw*/dx = -diag(1/lambda) Gamma w*."""

    def rhs(x: float, w: np.ndarray) -> np.ndarray:
        lam = np.asarray(lambda_fn(x), dtype=float)
        gam = np.asarray(gamma_fn(x), dtype=float)
        return -(gam @ w) / lam

    return rhs


def integrate_steady_state(ode_rhs: Callable[[float, np.ndarray], np.ndarray],
                           w0: Sequence[float], grid: Grid1D) -> np.ndarray:
    """Sample the equilibrium ODE solution at all cell and ghost centers.

    ``w0`` is the value at x = 0.  A classical RK4 march with step dx/10
    runs rightwards to x_J and leftwards to the left ghost center;
    returns an array of shape (J+2, len(w0)).
    """
    w0 = np.asarray(w0, dtype=float)
    h = grid.dx / 10.0

    def rk4_to(x_from: float, x_to: float, w: np.ndarray) -> np.ndarray:
        span = x_to - x_from
        steps = max(1, int(round(abs(span) / h)))
        step = span / steps
        x = x_from
        for _ in range(steps):
            k1 = np.asarray(ode_rhs(x, w))
            k2 = np.asarray(ode_rhs(x + 0.5 * step, w + 0.5 * step * k1))
            k3 = np.asarray(ode_rhs(x + 0.5 * step, w + 0.5 * step * k2))
            k4 = np.asarray(ode_rhs(x + step, w + step * k3))
            w = w + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            x += step
            if not np.all(np.isfinite(w)):
                raise RuntimeError(f"equilibrium integration blew up near x={x:.6g}")
        return w

    xs = grid.centers
    out = np.empty((xs.size, w0.size))
    out[0] = rk4_to(0.0, xs[0], w0)
    w = w0
    x_prev = 0.0
    for i in range(1, xs.size):
        w = rk4_to(x_prev, xs[i], w)
        out[i] = w
        x_prev = xs[i]
    return out
