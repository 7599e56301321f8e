"""Effective spin-flip rate theory on top of the mean-field attractors.

At large eta the cavity is slaved to the spin, and quantum jumps between the
mean-field attractors occur at rates set by the couplings dressed with the
attractor geometry.  In the normal sector the flip rates (units of omega_c,
dimensionless eta = Omega/omega_c) are

    Gamma(NP_up -> NP_down) = lam_m^2 kappa_ratio / (2 eta)
    Gamma(NP_down -> NP_up) = lam_p^2 kappa_ratio / (2 eta)

giving stationary populations P_pm = lam_pm'^2 ... explicitly
P_up = lam_p^2/(lam_p^2 + lam_m^2), P_down = lam_m^2/(lam_p^2 + lam_m^2) and
an effective temperature T_eff = Omega / (2 ln(lambda_minus/lambda_plus)).

Around a superradiant attractor with spin angles (theta, phi) the couplings
are dressed,

    chi_pm = lam_pm e^{i phi} cos^2(theta/2) + lam_mp e^{-i phi} sin^2(theta/2)
    chi_z  = -(1/2) sin(theta) (lam_m e^{i phi} + lam_p e^{-i phi})

and the dominant escape/return channel through NP_up gives the stationary
superradiant weight

    P_SP = lam_m^2 / (lam_m^2 + |chi_plus|^2 cos^2(theta)).

Predictions for the steady phase: photon number <a^dag a>/eta = P_SP |c|^2
in the superradiant regime, zero in the normal one; sigma_z mixes the
attractor values with these weights.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import meanfield
from .model import DimlessParams, ModelParams, ParameterError

PHASE_NP = "NP"
PHASE_SP = "SP"


@dataclass(frozen=True)
class ChiCouplings:
    chi_minus: complex
    chi_plus: complex
    chi_z: complex


@dataclass(frozen=True)
class RateSet:
    gamma_up_down: float
    gamma_down_up: float
    context: str  # 'NP' or 'SP'


@dataclass(frozen=True)
class StationaryPrediction:
    phase: str                   # 'NP' or 'SP'
    mf_region: str               # underlying mean-field region ('NP', 'SP', 'C')
    populations: dict            # attractor -> stationary weight
    n_photon_over_eta: float
    sigma_z: float


def _require_canonical(d: DimlessParams):
    if d.lam_m < 0 or d.lam_p < 0 or d.eta <= 0:
        raise ParameterError("effective layer expects canonical parameters "
                             "(eta > 0, lam_pm >= 0)")


def np_rates(d: DimlessParams) -> RateSet:
    """Spin-flip rates between the two normal attractors, units of omega_c."""
    _require_canonical(d)
    pref = d.kappa_ratio / (2.0 * d.eta)
    return RateSet(gamma_up_down=d.lam_m ** 2 * pref,
                   gamma_down_up=d.lam_p ** 2 * pref,
                   context="NP")


def np_populations(d: DimlessParams) -> tuple:
    """Stationary normal-sector populations (P_up, P_down)."""
    _require_canonical(d)
    lm2, lp2 = d.lam_m ** 2, d.lam_p ** 2
    tot = lm2 + lp2
    if tot == 0:
        raise ParameterError("populations undefined at zero coupling")
    return lp2 / tot, lm2 / tot


def effective_temperature(p: ModelParams) -> float:
    """T_eff = Omega / (2 ln(lambda_minus/lambda_plus)).

    Positive infinity in the isotropic limit; signed zero when one coupling
    vanishes: +0.0 for lambda_plus = 0 (ground-state pumping), -0.0 for
    lambda_minus = 0 (population inversion).
    """
    if p.lambda_minus < 0 or p.lambda_plus < 0:
        raise ParameterError("effective temperature defined for canonical couplings")
    if p.lambda_minus == 0 and p.lambda_plus == 0:
        raise ParameterError("effective temperature undefined at zero coupling")
    if p.lambda_minus == p.lambda_plus:
        return math.inf
    if p.lambda_plus == 0:
        return 0.0
    if p.lambda_minus == 0:
        return -0.0
    return p.Omega / (2.0 * math.log(p.lambda_minus / p.lambda_plus))


def chi_couplings(d: DimlessParams, theta: float, phi: float) -> ChiCouplings:
    """Couplings dressed by the attractor spin frame (theta, phi)."""
    _require_canonical(d)
    c2 = math.cos(0.5 * theta) ** 2
    s2 = math.sin(0.5 * theta) ** 2
    ep = cmath.exp(1j * phi)
    em = cmath.exp(-1j * phi)
    return ChiCouplings(
        chi_minus=d.lam_m * ep * c2 + d.lam_p * em * s2,
        chi_plus=d.lam_p * ep * c2 + d.lam_m * em * s2,
        chi_z=-0.5 * math.sin(theta) * (d.lam_m * ep + d.lam_p * em),
    )


def _sp_geometry(d: DimlessParams):
    """theta, phi and |c|^2 of the stable superradiant pair, or None."""
    sps = [f for f in meanfield.sp_fixed_points(d)
           if f.kind in (meanfield.SP_DOWN_PLUS, meanfield.SP_DOWN_MINUS)]
    if not sps:
        return None
    f = sps[0]
    cos_th = -f.state.s_z
    theta = math.acos(max(-1.0, min(1.0, cos_th)))
    # recover phi from s_plus = (1/2) e^{i phi} sin(theta)
    phi = cmath.phase(f.state.s_plus) if abs(f.state.s_plus) > 0 else 0.0
    return theta, phi, f.abs_c_sq


def sp_rates(d: DimlessParams) -> RateSet:
    """Dressed intra-superradiant flip rates; requires an SP solution."""
    geo = _sp_geometry(d)
    if geo is None:
        raise ParameterError("no superradiant solution at these parameters")
    theta, phi, _ = geo
    chi = chi_couplings(d, theta, phi)
    pref = d.kappa_ratio * math.cos(theta) ** 2 / (2.0 * d.eta)
    return RateSet(gamma_up_down=abs(chi.chi_minus) ** 2 * pref,
                   gamma_down_up=abs(chi.chi_plus) ** 2 * pref,
                   context="SP")


def sp_population(d: DimlessParams) -> float:
    """Stationary weight of the superradiant attractor, escape via NP_up.

    P_SP = lam_m^2 / (lam_m^2 + |chi_plus|^2 cos^2 theta).
    """
    geo = _sp_geometry(d)
    if geo is None:
        raise ParameterError("no superradiant solution at these parameters")
    theta, phi, _ = geo
    chi = chi_couplings(d, theta, phi)
    lm2 = d.lam_m ** 2
    esc = abs(chi.chi_plus) ** 2 * math.cos(theta) ** 2
    if lm2 + esc == 0:
        raise ParameterError("degenerate rate balance at zero coupling")
    return lm2 / (lm2 + esc)


def predicted_photon_number(d: DimlessParams) -> float:
    """<a^dag a>/eta predicted for the superradiant regime: P_SP |c|^2."""
    geo = _sp_geometry(d)
    if geo is None:
        raise ParameterError("no superradiant solution at these parameters")
    return sp_population(d) * geo[2]


def steady_phase(d: DimlessParams) -> StationaryPrediction:
    """Rate-theory prediction of the steady phase at one parameter point.

    Mean-field SP region -> superradiant steady phase with weight P_SP;
    mean-field NP and C regions -> normal steady phase (in C the trapping
    analysis puts the stationary weight on the normal mixture, P_SP -> 0).
    """
    _require_canonical(d)
    phase = meanfield.classify_mf(d)
    if phase.region == "SP":
        p_sp = sp_population(d)
        geo = _sp_geometry(d)
        theta = geo[0]
        sigma_z = (1.0 - p_sp) * 1.0 + p_sp * (-math.cos(theta))
        return StationaryPrediction(
            phase=PHASE_SP, mf_region=phase.region,
            populations={"NP_up": 1.0 - p_sp, "SP_down": p_sp, "NP_down": 0.0},
            n_photon_over_eta=p_sp * geo[2],
            sigma_z=sigma_z)
    p_up, p_down = np_populations(d)
    return StationaryPrediction(
        phase=PHASE_NP, mf_region=phase.region,
        populations={"NP_up": p_up, "NP_down": p_down, "SP_down": 0.0},
        n_photon_over_eta=0.0,
        sigma_z=p_up - p_down)
