"""Quartic effective theory of the second-order transition and its scaling laws.

Writing lam_x = (lam_p + lam_m)/2, lam_y = (lam_p - lam_m)/2 and

    alpha_x = 1 - lam_x^2,  alpha_y = 1 - lam_y^2,
    alpha^2 = alpha_x alpha_y + kappa_ratio^2            (distance to criticality)
    beta^3  = alpha_y lam_x^4 - (kappa_ratio lam_y)^4 / alpha_y^3
    T       = (kappa_ratio^2 + alpha_y^2) / 4            (noise temperature, omega_c = 1)

the slow cavity quadrature x feels the potential
V(x) = alpha^2 x^2 / 2 + beta^3 x^4 / (4 eta) at temperature T, giving

    <x^2> = 2 P_- sqrt(eta T / beta^3) Q(-(alpha^2/2) sqrt(eta/(beta^3 T)))
    Q(x)  = int z^2 e^{-(x - z^2)^2} dz / int e^{-(x - z^2)^2} dz   (over the real line)

with P_- = lam_m^2/(lam_m^2 + lam_p^2) the weight of the soft normal attractor.
Q(0) = Gamma(3/4)/Gamma(1/4); Q -> -1/(4x) deep in the normal phase and
Q -> x deep in the ordered phase.

Along a fixed-r ray crossing the boundary at lam_c_minus, alpha^2 linearizes
as -LAMBDA dlam with LAMBDA = lam_c_minus [1 + r^2 - ((1-r^2)^2/4) lam_c_minus^2],
and the curves collapse as y = F(X), X = c1^2 eta dlam^2, y = c2 dlam <x^2>,
F(X) = sqrt(X) Q(sqrt(X)), with critical exponents nu = 1 (for eta) and
zeta = 1/2 (for <x^2> at criticality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .meanfield import boundary_lambda_c
from .model import DimlessParams, ParameterError


@dataclass(frozen=True)
class QuarticCoeffs:
    alpha_x: float
    alpha_y: float
    alpha_sq: float
    beta_cu: float
    temperature: float
    big_lambda: float  # boundary slope of alpha^2 at fixed r; NaN when no boundary


@dataclass(frozen=True)
class ScalingCoeffs:
    c1: float
    c2: float
    nu: float = 1.0
    zeta: float = 0.5


def _big_lambda(r: float, kappa_ratio: float) -> float:
    lc_minus, _ = boundary_lambda_c(r, kappa_ratio)
    return lc_minus * (1.0 + r ** 2 - 0.25 * (1.0 - r ** 2) ** 2 * lc_minus ** 2)


def quartic_coeffs(d: DimlessParams) -> QuarticCoeffs:
    """Quartic-theory coefficients at the given couplings; requires alpha_y != 0."""
    kr = d.kappa_ratio
    alpha_x = 1.0 - d.lam_x ** 2
    alpha_y = 1.0 - d.lam_y ** 2
    if alpha_y == 0:
        raise ParameterError("alpha_y = 0: quartic reduction singular at |lam_y| = 1")
    alpha_sq = alpha_x * alpha_y + kr ** 2
    beta_cu = alpha_y * d.lam_x ** 4 - (kr * d.lam_y) ** 4 / alpha_y ** 3
    temperature = 0.25 * (kr ** 2 + alpha_y ** 2)
    if d.r is not None and d.r > 0:
        try:
            lam = _big_lambda(d.r, kr)
        except ParameterError:
            lam = math.nan
    else:
        lam = math.nan
    return QuarticCoeffs(alpha_x=alpha_x, alpha_y=alpha_y, alpha_sq=alpha_sq,
                         beta_cu=beta_cu, temperature=temperature, big_lambda=lam)


def potential(x, coeffs: QuarticCoeffs, eta: float):
    """V(x) of the slow quadrature (omega_c = 1)."""
    x = np.asarray(x, dtype=float)
    return 0.5 * coeffs.alpha_sq * x ** 2 + 0.25 * coeffs.beta_cu * x ** 4 / eta


def q_function(x: float) -> float:
    """Q(x) as defined in the module docstring; relative accuracy ~ 1e-9.

    The integrand is rescaled by its maximum so the tails never underflow;
    the window [0, sqrt(max(x,0)+6)+6] bounds the support to < 1e-12 tails.
    """
    x = float(x)
    z_hi = math.sqrt(max(x, 0.0) + 6.0) + 6.0
    shift = x ** 2 if x < 0 else 0.0

    def w(z):
        return math.exp(shift - (x - z * z) ** 2)

    pts = [math.sqrt(x)] if x > 0 else None
    den = quad(w, 0.0, z_hi, epsabs=1e-13, epsrel=1e-11, limit=200, points=pts)[0]
    num = quad(lambda z: z * z * w(z), 0.0, z_hi,
               epsabs=1e-13, epsrel=1e-11, limit=200, points=pts)[0]
    if den == 0.0:
        # far normal side: asymptotic tail
        return -0.25 / x
    return num / den


def collapse_f(x_scaled: float) -> float:
    """Universal collapse curve F(X) = sqrt(X) Q(sqrt(X)) for X >= 0."""
    if x_scaled < 0:
        raise ParameterError("collapse variable must be non-negative")
    s = math.sqrt(x_scaled)
    return s * q_function(s)


def x2_stationary(d: DimlessParams, eta: float) -> float:
    """Stationary <x^2> of the quartic theory at finite eta (full alpha^2)."""
    qc = quartic_coeffs(d)
    if qc.beta_cu <= 0:
        raise ParameterError(f"beta^3 = {qc.beta_cu:.3e} <= 0: outside the "
                             "quartic-stability domain")
    lm2, lp2 = d.lam_m ** 2, d.lam_p ** 2
    if lm2 + lp2 == 0:
        raise ParameterError("x2 undefined at zero coupling")
    p_minus = lm2 / (lm2 + lp2)
    arg = -(qc.alpha_sq / 2.0) * math.sqrt(eta / (qc.beta_cu * qc.temperature))
    return 2.0 * p_minus * math.sqrt(eta * qc.temperature / qc.beta_cu) * q_function(arg)


def _boundary_quartic(r: float, kappa_ratio: float):
    """Quartic coefficients evaluated on the boundary point of the fixed-r ray."""
    lc_minus, _ = boundary_lambda_c(r, kappa_ratio)
    lam_x = 0.5 * (1.0 + r) * lc_minus
    lam_y = 0.5 * (r - 1.0) * lc_minus
    alpha_y = 1.0 - lam_y ** 2
    if alpha_y <= 0:
        raise ParameterError("boundary point outside the quartic domain (alpha_y <= 0)")
    temperature = 0.25 * (kappa_ratio ** 2 + alpha_y ** 2)
    beta_cu = alpha_y * lam_x ** 4 - (kappa_ratio * lam_y) ** 4 / alpha_y ** 3
    if beta_cu <= 0:
        raise ParameterError("beta^3 <= 0 on the boundary: first-order regime")
    big_lambda = _big_lambda(r, kappa_ratio)
    return lc_minus, temperature, beta_cu, big_lambda


def x2_scaling_form(r: float, kappa_ratio: float, eta: float, dlam: float) -> float:
    """<x^2> with boundary-frozen coefficients and linearized alpha^2 = -LAMBDA dlam.

    This is the form that collapses exactly onto F(X); dlam = lam_m - lam_c_minus
    along the fixed-r ray.
    """
    _, temperature, beta_cu, big_lambda = _boundary_quartic(r, kappa_ratio)
    p_minus = 1.0 / (1.0 + r ** 2)
    arg = 0.5 * big_lambda * dlam * math.sqrt(eta / (beta_cu * temperature))
    return 2.0 * p_minus * math.sqrt(eta * temperature / beta_cu) * q_function(arg)


def critical_x2(r: float, kappa_ratio: float, eta: float) -> float:
    """<x^2> exactly on the boundary: (2 Q(0)/(1+r^2)) sqrt(T/beta^3) sqrt(eta)."""
    _, temperature, beta_cu, _ = _boundary_quartic(r, kappa_ratio)
    return (2.0 * q_function(0.0) / (1.0 + r ** 2)
            * math.sqrt(temperature / beta_cu) * math.sqrt(eta))


def scaling_coeffs(r: float, kappa_ratio: float) -> ScalingCoeffs:
    """Collapse coefficients c1, c2 and exponents (nu, zeta) for the fixed-r ray."""
    _, temperature, beta_cu, big_lambda = _boundary_quartic(r, kappa_ratio)
    p_minus = 1.0 / (1.0 + r ** 2)
    c1 = 0.5 * big_lambda / math.sqrt(beta_cu * temperature)
    c2 = big_lambda / (4.0 * p_minus * temperature)
    return ScalingCoeffs(c1=c1, c2=c2)


def photon_from_x2(d: DimlessParams, x2: float) -> float:
    """Photon number implied by <x^2> near the boundary.

    The conjugate quadrature is slaved, <p^2> ~= (kappa_ratio/alpha_y)^2 <x^2>,
    so <a^dag a> = (<x^2> + <p^2> - 1)/2, floored at zero.
    """
    qc = quartic_coeffs(d)
    n = 0.5 * (x2 * (1.0 + (d.kappa_ratio / qc.alpha_y) ** 2) - 1.0)
    return max(0.0, n)
