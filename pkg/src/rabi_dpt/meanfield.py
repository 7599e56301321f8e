"""Mean-field layer: semiclassical flow, fixed points, phase boundaries.

Scaled variables: c = <a>/sqrt(eta), s_pm = <sigma_pm>, s_z = <sigma_z>, with
dimensionless time tau = omega_c t.  The closed flow is

    dc/dtau      = -(kappa_ratio + i) c + (i/2)(lam_m s_- + lam_p s_+)
    ds_+/dtau    = eta [ i sgn(eta) s_+ + (i/2)(lam_m c* + lam_p c) s_z ]
    ds_z/dtau    = eta [ i lam_m (c s_+ - c* s_-) - i lam_p (c s_- - c* s_+) ]

which conserves the spin length 4|s_+|^2 + s_z^2.  For |eta| -> infinity the
spin follows the cavity adiabatically on the unit sphere,

    s_z = branch / sqrt(1 + |u|^2),   s_+ = -(1/2) u s_z,
    u = lam_m c* + lam_p c,  branch = +-1,

leaving a cavity-only flow whose fixed points organize the phase diagram:
the two normal states NP_up / NP_down at c = 0 and, where it exists, the
superradiant pair SP with spin angles (theta, phi),

    cos(theta) = 4 (1 + kappa_ratio^2) /
                 [lam_m^2 + lam_p^2 + sqrt(4 lam_m^2 lam_p^2
                  - kappa_ratio^2 (lam_m^2 - lam_p^2)^2)]
    sin(2 phi) = -kappa_ratio (lam_m^2 - lam_p^2) / (2 lam_m lam_p)

with s_z = -cos(theta), s_+ = +-(1/2) e^{i phi} sin(theta) and
c = (lam_m s_- + lam_p s_+) / (2 (1 - i kappa_ratio)).  The second root of
the cos(theta) denominator (minus sign before the square root) is a distinct,
generically unstable fixed point present in the coexistence region.

Regions: NP (only normal states stable), SP (NP_down destabilized), C
(normal and superradiant states simultaneously stable).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import DimlessParams, ParameterError

log = logging.getLogger(__name__)

NP_UP = "NP_up"
NP_DOWN = "NP_down"
SP_DOWN_PLUS = "SP_down_plus"
SP_DOWN_MINUS = "SP_down_minus"
SP_UNSTABLE = "SP_unstable"

_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class MFState:
    """Scaled mean-field state (c, s_plus, s_z)."""

    c: complex
    s_plus: complex
    s_z: float

    @property
    def spin_length_sq(self) -> float:
        return 4.0 * abs(self.s_plus) ** 2 + self.s_z ** 2


@dataclass(frozen=True)
class FixedPoint:
    kind: str
    state: MFState
    jacobian_eigs: tuple
    stable: bool

    @property
    def abs_c_sq(self) -> float:
        return abs(self.state.c) ** 2


@dataclass(frozen=True)
class MFPhase:
    region: str          # 'NP', 'SP' or 'C'
    fixed_points: tuple  # every residual-verified fixed point
    stable_points: tuple


def _require_canonical(d: DimlessParams):
    if d.lam_m < 0 or d.lam_p < 0:
        raise ParameterError("mean-field layer expects canonical couplings lam_pm >= 0")


def mf_rhs_full(state: MFState, d: DimlessParams) -> MFState:
    """Time derivative of the full flow; returned as an MFState triple."""
    c, s_p, s_z = state.c, state.s_plus, state.s_z
    s_m = s_p.conjugate()
    sgn = 1.0 if d.eta > 0 else -1.0
    dc = -(d.kappa_ratio + 1j) * c + 0.5j * (d.lam_m * s_m + d.lam_p * s_p)
    dsp = d.eta * (1j * sgn * s_p + 0.5j * (d.lam_m * c.conjugate() + d.lam_p * c) * s_z)
    dsz = d.eta * (1j * d.lam_m * (c * s_p - c.conjugate() * s_m)
                   - 1j * d.lam_p * (c * s_m - c.conjugate() * s_p))
    return MFState(c=dc, s_plus=dsp, s_z=dsz.real)


def adiabatic_spin(c: complex, d: DimlessParams, branch: int) -> tuple:
    """Spin slaved to the cavity amplitude on the unit sphere; returns (s_z, s_plus)."""
    u = d.lam_m * c.conjugate() + d.lam_p * c
    s_z = branch / math.sqrt(1.0 + abs(u) ** 2)
    return s_z, -0.5 * u * s_z


def mf_rhs_adiabatic(c: complex, d: DimlessParams, branch: int) -> complex:
    """Cavity-only flow dc/dtau with the spin eliminated adiabatically."""
    s_z, s_p = adiabatic_spin(c, d, branch)
    return -(d.kappa_ratio + 1j) * c + 0.5j * (d.lam_m * s_p.conjugate() + d.lam_p * s_p)


def adiabatic_jacobian(c: complex, d: DimlessParams, branch: int,
                       h: float = 1e-7) -> np.ndarray:
    """2x2 real Jacobian of the adiabatic flow in (Re c, Im c), central differences."""
    step = h * max(1.0, abs(c))

    def f(u, v):
        w = mf_rhs_adiabatic(complex(u, v), d, branch)
        return np.array([w.real, w.imag])

    u0, v0 = c.real, c.imag
    du = (f(u0 + step, v0) - f(u0 - step, v0)) / (2 * step)
    dv = (f(u0, v0 + step) - f(u0, v0 - step)) / (2 * step)
    return np.column_stack([du, dv])


def np_stability(d: DimlessParams, which: str) -> FixedPoint:
    """Normal fixed point (c = 0, spin along -+z) with analytic 2x2 Jacobian eigenvalues."""
    _require_canonical(d)
    b = 1.0 if which == "up" else -1.0
    A = d.lam_m ** 2 + d.lam_p ** 2
    B = 2.0 * d.lam_m * d.lam_p
    beta = 1.0 + b * (A - B) / 4.0
    gamma = 1.0 + b * (A + B) / 4.0
    kr = d.kappa_ratio
    prod = beta * gamma
    if prod >= 0:
        root = math.sqrt(prod)
        eigs = (-kr + 1j * root, -kr - 1j * root)
    else:
        root = math.sqrt(-prod)
        eigs = (complex(-kr + root), complex(-kr - root))
    stable = max(e.real for e in eigs) < 0
    kind = NP_UP if b > 0 else NP_DOWN
    return FixedPoint(kind=kind, state=MFState(0j, 0j, b),
                      jacobian_eigs=eigs, stable=stable)


def _sp_candidates(d: DimlessParams):
    """Yield (cos_theta, unstable_root_flag) for the real roots of the SP condition."""
    lm2, lp2 = d.lam_m ** 2, d.lam_p ** 2
    disc = 4.0 * lm2 * lp2 - d.kappa_ratio ** 2 * (lm2 - lp2) ** 2
    if disc < 0:
        return
    sq = math.sqrt(disc)
    for sgn_den, is_second in ((1.0, False), (-1.0, True)):
        den = lm2 + lp2 + sgn_den * sq
        if den <= 0:
            continue
        cos_th = 4.0 * (1.0 + d.kappa_ratio ** 2) / den
        if cos_th <= 1.0 + 1e-14:
            yield min(cos_th, 1.0), is_second


def _phi_candidates(d: DimlessParams):
    if d.lam_m * d.lam_p == 0:
        return (0.0, 0.5 * math.pi)
    s2phi = -d.kappa_ratio * (d.lam_m ** 2 - d.lam_p ** 2) / (2.0 * d.lam_m * d.lam_p)
    s2phi = min(1.0, max(-1.0, s2phi))
    two_phi = math.asin(s2phi)
    return (0.5 * two_phi, 0.5 * (math.pi - two_phi))


def sp_fixed_points(d: DimlessParams) -> list:
    """Residual-verified superradiant fixed points of the adiabatic flow.

    Returns the broken-symmetry pair (SP_down_plus / SP_down_minus) when the
    stable root is real, followed by the pair for the second root (kind
    SP_unstable) when that one is real as well.  Empty list otherwise.
    """
    _require_canonical(d)
    out = []
    for cos_th, is_second in _sp_candidates(d):
        sin_th = math.sqrt(max(0.0, 1.0 - cos_th ** 2))
        found = None
        for phi in _phi_candidates(d):
            s_p = 0.5 * cmath.exp(1j * phi) * sin_th
            c = (d.lam_m * s_p.conjugate() + d.lam_p * s_p) / (2.0 * (1.0 - 1j * d.kappa_ratio))
            if abs(mf_rhs_adiabatic(c, d, branch=-1)) <= _RESIDUAL_TOL:
                found = (phi, s_p, c)
                break
        if found is None:
            log.warning("SP root cos_theta=%.6f failed residual verification; dropped", cos_th)
            continue
        phi, s_p, c = found
        J = adiabatic_jacobian(c, d, branch=-1)
        eigs = tuple(complex(e) for e in np.linalg.eigvals(J))
        stable = bool(max(e.real for e in eigs) < 0)
        if is_second and stable:
            log.warning("second SP root unexpectedly stable at lam_m=%.4f lam_p=%.4f",
                        d.lam_m, d.lam_p)
        if not is_second and not stable:
            log.warning("SP fixed point not stable at lam_m=%.4f lam_p=%.4f eigs=%s",
                        d.lam_m, d.lam_p, eigs)
        for sgn, kind in ((1.0, SP_DOWN_PLUS), (-1.0, SP_DOWN_MINUS)):
            kind_out = SP_UNSTABLE if is_second else kind
            out.append(FixedPoint(kind=kind_out,
                                  state=MFState(sgn * c, sgn * s_p, -cos_th),
                                  jacobian_eigs=eigs, stable=stable))
    return out


def boundary_lambda_c(r: float, kappa_ratio: float) -> tuple:
    """Second-order boundary couplings (lam_c_minus, lam_c_plus) at fixed r = lam_p/lam_m.

    Roots of alpha_x alpha_y + kappa_ratio^2 = 0 along the ray lam_p = r lam_m.
    r = 1 degenerates to (sqrt(1 + kappa_ratio^2), inf).  Raises when no real
    boundary exists (r outside [r_minus, r_plus]).
    """
    if r <= 0:
        raise ParameterError(f"r must be positive, got {r}")
    if r == 1.0:
        return math.sqrt(1.0 + kappa_ratio ** 2), math.inf
    disc = 4.0 * r ** 2 - (1.0 - r ** 2) ** 2 * kappa_ratio ** 2
    if disc < 0:
        raise ParameterError(f"no second-order boundary at r={r}, kappa_ratio={kappa_ratio}")
    sq = math.sqrt(disc)
    denom = abs(1.0 - r ** 2)
    lc_minus = 2.0 * math.sqrt(1.0 + r ** 2 - sq) / denom
    lc_plus = 2.0 * math.sqrt(1.0 + r ** 2 + sq) / denom
    return lc_minus, lc_plus


def boundary_r_pm(kappa_ratio: float) -> tuple:
    """Anisotropy window (r_minus, r_plus) where the NP_down instability exists.

    r_minus r_plus = 1; outside the window the normal state never destabilizes.
    """
    if kappa_ratio < 0:
        raise ParameterError("kappa_ratio must be non-negative")
    if kappa_ratio == 0:
        return 0.0, math.inf
    root = math.sqrt(1.0 + 1.0 / kappa_ratio ** 2)
    return root - 1.0 / kappa_ratio, root + 1.0 / kappa_ratio


def tricritical_lambda(kappa_ratio: float) -> float:
    """Coupling at which the two boundary roots merge (tangency at r = r_pm)."""
    k2 = kappa_ratio ** 2
    return math.sqrt(2.0 * (1.0 + k2 + math.sqrt(1.0 + k2)))


def classify_mf(d: DimlessParams) -> MFPhase:
    """Mean-field region and the full fixed-point inventory at one parameter point."""
    _require_canonical(d)
    np_up = np_stability(d, "up")
    np_down = np_stability(d, "down")
    sps = sp_fixed_points(d)
    points = (np_up, np_down, *sps)
    has_stable_sp = any(f.stable and f.kind != SP_UNSTABLE for f in sps)
    if not np_down.stable:
        region = "SP"
        if not has_stable_sp:
            log.warning("NP_down unstable but no stable SP found at lam_m=%.4f lam_p=%.4f",
                        d.lam_m, d.lam_p)
    elif has_stable_sp:
        region = "C"
    else:
        region = "NP"
    stable_points = tuple(f for f in points if f.stable)
    return MFPhase(region=region, fixed_points=points, stable_points=stable_points)


# ---------------------------------------------------------------------------
# full-flow integration (fixed-step RK4, compiled)

@njit(cache=True)
def _mf_rhs_nb(y, eta, sgn, lm, lp, kr, out):
    c = complex(y[0], y[1])
    s = complex(y[2], y[3])
    sz = y[4]
    cc = c.conjugate()
    sm = s.conjugate()
    dc = -(kr + 1j) * c + 0.5j * (lm * sm + lp * s)
    dsp = eta * (1j * sgn * s + 0.5j * (lm * cc + lp * c) * sz)
    dsz = eta * (1j * lm * (c * s - cc * sm) - 1j * lp * (c * sm - cc * s))
    out[0] = dc.real
    out[1] = dc.imag
    out[2] = dsp.real
    out[3] = dsp.imag
    out[4] = dsz.real


@njit(cache=True)
def _mf_rk4_nb(y0, eta, sgn, lm, lp, kr, taus, h_max):
    n_out = taus.shape[0]
    ys = np.empty((n_out, 5))
    y = y0.copy()
    ys[0] = y
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    yt = np.empty(5)
    for i in range(1, n_out):
        span = taus[i] - taus[i - 1]
        m = max(1, int(math.ceil(span / h_max)))
        h = span / m
        for _ in range(m):
            _mf_rhs_nb(y, eta, sgn, lm, lp, kr, k1)
            for j in range(5):
                yt[j] = y[j] + 0.5 * h * k1[j]
            _mf_rhs_nb(yt, eta, sgn, lm, lp, kr, k2)
            for j in range(5):
                yt[j] = y[j] + 0.5 * h * k2[j]
            _mf_rhs_nb(yt, eta, sgn, lm, lp, kr, k3)
            for j in range(5):
                yt[j] = y[j] + h * k3[j]
            _mf_rhs_nb(yt, eta, sgn, lm, lp, kr, k4)
            for j in range(5):
                y[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        ys[i] = y
    return ys


def default_dtau(eta: float) -> float:
    """Fixed RK4 step: keeps the fast spin phase advance per step ~ 5e-3 rad,
    small enough that the spin-length drift stays below 1e-9 over tau ~ 100."""
    return 1e-3 * min(1.0, 5.0 / max(abs(eta), 1.0))


def integrate_full(state0: MFState, d: DimlessParams, tau_final: float,
                   dtau: float | None = None, n_samples: int = 201):
    """Integrate the full flow from state0; returns (taus, MFState list)."""
    if dtau is None:
        dtau = default_dtau(d.eta)
    taus = np.linspace(0.0, tau_final, n_samples)
    y0 = np.array([state0.c.real, state0.c.imag,
                   state0.s_plus.real, state0.s_plus.imag, state0.s_z])
    sgn = 1.0 if d.eta > 0 else -1.0
    ys = _mf_rk4_nb(y0, d.eta, sgn, d.lam_m, d.lam_p, d.kappa_ratio, taus, dtau)
    states = [MFState(complex(r[0], r[1]), complex(r[2], r[3]), r[4]) for r in ys]
    return taus, states
