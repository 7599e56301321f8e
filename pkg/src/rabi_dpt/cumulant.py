"""Second-order cumulant expansion of the dissipative anisotropic Rabi model.

Tracked moments (everything else is reached by conjugation or the exact
two-level identities sigma_+ sigma_- = (1+sigma_z)/2, sigma_pm^2 = 0):

    a_mean = <a>        sp_mean = <sigma_+>   sz_mean = <sigma_z>   n = <a^dag a>
    a2 = <a^2>          a_sp = <a sigma_+>    a_sm = <a sigma_->    a_sz = <a sigma_z>

Third-order moments are closed Gaussianly,
<ABC> ~= <AB><C> + <AC><B> + <BC><A> - 2<A><B><C>, applied after exact
normal ordering of the operator products, so the two-level algebra is never
violated by the closure.  sz_mean and n are stored as reals; their equations
of motion are real by the same algebra, which enforces the Hermiticity
constraints by construction.

The flow is integrated with an embedded Dormand-Prince 5(4) stepper compiled
with numba: at eta ~ 100 the mixed moments oscillate at ~ Omega while
relaxation takes tau ~ 1e3-1e4, so a compiled loop is the difference between
seconds and the better part of an hour per trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import ModelParams, ParameterError

N_VARS = 14  # packed real storage, see CumulantState.to_vector


@dataclass
class CumulantState:
    a_mean: complex
    sp_mean: complex
    sz_mean: float
    n: float
    a2: complex
    a_sp: complex
    a_sm: complex
    a_sz: complex

    def to_vector(self) -> np.ndarray:
        v = np.empty(N_VARS)
        v[0], v[1] = self.a_mean.real, self.a_mean.imag
        v[2], v[3] = self.sp_mean.real, self.sp_mean.imag
        v[4] = self.sz_mean
        v[5] = self.n
        v[6], v[7] = self.a2.real, self.a2.imag
        v[8], v[9] = self.a_sp.real, self.a_sp.imag
        v[10], v[11] = self.a_sm.real, self.a_sm.imag
        v[12], v[13] = self.a_sz.real, self.a_sz.imag
        return v

    @classmethod
    def from_vector(cls, v) -> "CumulantState":
        return cls(a_mean=complex(v[0], v[1]), sp_mean=complex(v[2], v[3]),
                   sz_mean=float(v[4]), n=float(v[5]), a2=complex(v[6], v[7]),
                   a_sp=complex(v[8], v[9]), a_sm=complex(v[10], v[11]),
                   a_sz=complex(v[12], v[13]))

    @classmethod
    def spin_up_vacuum(cls) -> "CumulantState":
        return cls(0j, 0j, 1.0, 0.0, 0j, 0j, 0j, 0j)

    @classmethod
    def spin_down_vacuum(cls) -> "CumulantState":
        return cls(0j, 0j, -1.0, 0.0, 0j, 0j, 0j, 0j)

    @property
    def excitations(self) -> float:
        """<a^dag a> + <sigma_+ sigma_->, conserved when lambda_plus = kappa = 0."""
        return self.n + 0.5 * (1.0 + self.sz_mean)


@njit(cache=True)
def _rhs_nb(y, wc, Om, lm, lp, kp, out):
    a = complex(y[0], y[1])
    sp = complex(y[2], y[3])
    sz = y[4]
    n = y[5]
    a2 = complex(y[6], y[7])
    asp = complex(y[8], y[9])
    asm = complex(y[10], y[11])
    asz = complex(y[12], y[13])

    ac = a.conjugate()
    sm = sp.conjugate()

    # Gaussian closure of the third-order moments, normal ordering done first.
    t_nz = n * sz + asz.conjugate() * a + asz * ac - 2.0 * (a * ac).real * sz
    t_2z = a2 * sz + 2.0 * asz * a - 2.0 * a * a * sz
    t_2p = a2 * sp + 2.0 * asp * a - 2.0 * a * a * sp
    t_2m = a2 * sm + 2.0 * asm * a - 2.0 * a * a * sm
    t_np = n * sp + asm.conjugate() * a + asp * ac - 2.0 * (a * ac).real * sp
    t_nm = n * sm + asp.conjugate() * a + asm * ac - 2.0 * (a * ac).real * sm

    d_a = -(kp + 1j * wc) * a + 1j * (lm * sm + lp * sp)
    d_sp = 1j * Om * sp + 1j * (lm * asz.conjugate() + lp * asz)
    d_sz = -4.0 * (lm * asp.imag - lp * asm.imag)
    d_n = -2.0 * kp * n + 2.0 * lm * asp.imag + 2.0 * lp * asm.imag
    d_a2 = -2.0 * (kp + 1j * wc) * a2 + 2j * (lm * asm + lp * asp)
    d_asp = (-(kp + 1j * wc - 1j * Om) * asp
             + 1j * lm * (t_nz + 0.5 * (1.0 + sz)) + 1j * lp * t_2z)
    d_asm = (-(kp + 1j * wc + 1j * Om) * asm
             - 1j * lm * t_2z - 1j * lp * (t_nz - 0.5 * (1.0 - sz)))
    d_asz = (-(kp + 1j * wc) * asz - 1j * lm * sm + 1j * lp * sp
             + 2j * (lm * (t_2p - t_nm) - lp * (t_2m - t_np)))

    out[0], out[1] = d_a.real, d_a.imag
    out[2], out[3] = d_sp.real, d_sp.imag
    out[4] = d_sz
    out[5] = d_n
    out[6], out[7] = d_a2.real, d_a2.imag
    out[8], out[9] = d_asp.real, d_asp.imag
    out[10], out[11] = d_asm.real, d_asm.imag
    out[12], out[13] = d_asz.real, d_asz.imag


def cumulant_rhs(state: CumulantState, p: ModelParams) -> CumulantState:
    """Time derivative of the closed moment set, packaged like the state."""
    out = np.empty(N_VARS)
    _rhs_nb(state.to_vector(), p.omega_c, p.Omega,
            p.lambda_minus, p.lambda_plus, p.kappa, out)
    return CumulantState.from_vector(out)


# Dormand-Prince 5(4) tableau; row s of _DP_A holds the stage-s coefficients.
_DP_A = np.zeros((7, 6))
_DP_A[1, 0] = 1 / 5
_DP_A[2, :2] = (3 / 40, 9 / 40)
_DP_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_DP_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_DP_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_DP_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                   187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


@njit(cache=True)
def _integrate_nb(y0, wc, Om, lm, lp, kp, t_eval, rtol, atol, max_step):
    n_out = t_eval.shape[0]
    nv = y0.shape[0]
    ys = np.empty((n_out, nv))
    y = y0.copy()
    ys[0] = y
    t = t_eval[0]
    span = abs(t_eval[n_out - 1] - t)
    min_h = 1e-13 * max(1.0, span)

    k = np.empty((7, nv))
    ytmp = np.empty(nv)
    y5 = np.empty(nv)

    h = min(max_step, 1e-3)
    for i_out in range(1, n_out):
        t_target = t_eval[i_out]
        while t < t_target:
            if h < min_h:
                return 1, ys
            clipped = t + h >= t_target
            h_step = (t_target - t) if clipped else h

            _rhs_nb(y, wc, Om, lm, lp, kp, k[0])
            for s in range(1, 7):
                for j in range(nv):
                    acc = y[j]
                    for m in range(s):
                        a_sm = _DP_A[s, m]
                        if a_sm != 0.0:
                            acc += h_step * a_sm * k[m, j]
                    ytmp[j] = acc
                _rhs_nb(ytmp, wc, Om, lm, lp, kp, k[s])

            err = 0.0
            for j in range(nv):
                acc5 = y[j]
                acce = 0.0
                for s in range(7):
                    if _DP_B5[s] != 0.0:
                        acc5 += h_step * _DP_B5[s] * k[s, j]
                    if _DP_E[s] != 0.0:
                        acce += h_step * _DP_E[s] * k[s, j]
                y5[j] = acc5
                sc = atol + rtol * max(abs(y[j]), abs(acc5))
                q = acce / sc
                err += q * q
            err = math.sqrt(err / nv)

            if err <= 1.0:
                t = t_target if clipped else t + h_step
                for j in range(nv):
                    y[j] = y5[j]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                grown = h_step * fac
                if clipped:
                    h = min(max_step, max(h, grown))
                else:
                    h = min(max_step, grown)
            else:
                h = h_step * max(0.2, 0.9 * err ** -0.2)
        ys[i_out] = y
    return 0, ys


def integrate(state0: CumulantState, p: ModelParams, t_final: float,
              rtol: float = 1e-9, atol: float = 1e-12,
              max_step: float | None = None, n_samples: int = 401,
              t_eval=None):
    """Integrate the moment flow; returns (times, array of packed states).

    Column layout of the result follows CumulantState.to_vector.  max_step
    defaults to 0.1/omega_c.
    """
    if max_step is None:
        max_step = 0.1 / p.omega_c
    if t_eval is None:
        t_eval = np.linspace(0.0, t_final, n_samples)
    t_eval = np.asarray(t_eval, dtype=float)
    status, ys = _integrate_nb(state0.to_vector(), p.omega_c, p.Omega,
                               p.lambda_minus, p.lambda_plus, p.kappa,
                               t_eval, rtol, atol, max_step)
    if status != 0:
        raise RuntimeError("cumulant integration failed: step size underflow "
                           "(system too stiff for the requested tolerances)")
    return t_eval, ys


# ---------------------------------------------------------------------------
# stationary normal-sector solutions

def delta_correction(p: ModelParams) -> float:
    """Finite-frequency correction Delta to the normal-sector <sigma_z>.

    In the isotropic limit lambda_minus = lambda_plus this reduces exactly to
    -2 omega_c / Omega.
    """
    lm2 = p.lambda_minus ** 2
    lp2 = p.lambda_plus ** 2
    if lm2 + lp2 == 0:
        raise ParameterError("Delta undefined for lambda_minus = lambda_plus = 0")
    wc, Om, kp = p.omega_c, p.Omega, p.kappa
    ld = lm2 - lp2
    num = 4.0 * lm2 * lp2 * (4.0 * wc ** 2 * ld - 2.0 * wc * Om * (kp ** 2 + wc ** 2))
    den = ld ** 4 - (lm2 + lp2) ** 2 * (2.0 * wc * Om * ld - Om ** 2 * (kp ** 2 + wc ** 2))
    return num / den


def stationary_normal(p: ModelParams) -> float:
    """Closed-form normal-sector <sigma_z>: detailed-balance ratio plus Delta.

    Valid to O(1/eta) for parameters whose steady state sits in the <a> = 0
    sector (mean-field NP or C regions).
    """
    lm2 = p.lambda_minus ** 2
    lp2 = p.lambda_plus ** 2
    if lm2 + lp2 == 0:
        raise ParameterError("normal-sector sigma_z undefined at zero coupling")
    return (lp2 - lm2) / (lp2 + lm2) + delta_correction(p)


_REDUCED_IDX = np.array([4, 5, 6, 7, 8, 9, 10, 11])


def _reduced_residual(x: np.ndarray, p: ModelParams) -> np.ndarray:
    y = np.zeros(N_VARS)
    y[_REDUCED_IDX] = x
    out = np.empty(N_VARS)
    _rhs_nb(y, p.omega_c, p.Omega, p.lambda_minus, p.lambda_plus, p.kappa, out)
    return out[_REDUCED_IDX]


def stationary_normal_numeric(p: ModelParams, tol: float = 1e-11,
                              max_iter: int = 200) -> CumulantState:
    """Stationary point of the cumulant flow in the <a> = 0 sector.

    Damped Newton iteration on (sz, n, a2, a_sp, a_sm) from the
    infinite-temperature seed sz = 0, all photon moments zero.  Returns the
    full stationary CumulantState.  Raises on non-convergence.
    """
    if p.kappa <= 0:
        raise ParameterError("stationary solve requires kappa > 0")
    scale = max(1.0, abs(p.Omega), p.omega_c, p.kappa)
    x = np.zeros(8)
    f = _reduced_residual(x, p)
    for _ in range(max_iter):
        fn = np.max(np.abs(f))
        if fn <= tol * scale:
            y = np.zeros(N_VARS)
            y[_REDUCED_IDX] = x
            return CumulantState.from_vector(y)
        # finite-difference Jacobian of the 8-dim reduced system
        J = np.empty((8, 8))
        for j in range(8):
            step = 1e-7 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += step
            J[:, j] = (_reduced_residual(xp, p) - f) / step
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -f, rcond=None)[0]
        alpha = 1.0
        fb = np.linalg.norm(f)
        while alpha > 1e-6:
            x_try = x + alpha * dx
            f_try = _reduced_residual(x_try, p)
            if np.linalg.norm(f_try) <= (1.0 - 0.5 * alpha) * fb + tol * scale:
                x, f = x_try, f_try
                break
            alpha *= 0.5
        else:
            x = x + 1e-6 * dx
            f = _reduced_residual(x, p)
    raise RuntimeError(f"stationary cumulant Newton did not converge in {max_iter} "
                       f"iterations (residual {np.max(np.abs(f)):.3e})")
