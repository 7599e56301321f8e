"""Exact steady states and time evolution of the vectorized master equation.

Steady states: the singular system L vec(rho) = 0 is closed by replacing one
row of L with the trace functional (trace = 1 on the right-hand side), then
factorized with sparse LU.  One step of iterative refinement with the same
factorization scrubs the residual to near machine level; the reported
residual is max|L vec(rho)| with the original L.  If the factorization fails
or the residual misses the tolerance, the solve is retried once with a
different replaced row before giving up.  Truncation is validated a
posteriori through the population of the top five Fock levels and escalated
geometrically (factor 1.5) when breached.

Time evolution: embedded Dormand-Prince 5(4) directly on vec(rho) with the
sparse L as right-hand side.  After every accepted step rho is re-hermitized,
rho <- (rho + rho^dag)/2, which costs one permuted copy and keeps the
integrator from drifting off the physical manifold over long horizons.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import meanfield
from .hilbert import (DensityMatrix, FockCutoff, adjoint_permutation,
                      build_operators, liouvillian, trace_vector, unvec, vec)
from .model import ModelParams, ParameterError, canonicalize, to_dimensionless

log = logging.getLogger(__name__)

MAX_CUTOFF = 4096


class SolverError(RuntimeError):
    """Steady-state linear solve failed (singular or residual out of tolerance)."""


class NonUniqueSteadyStateError(SolverError):
    """The steady state is not unique (decoupled spin sectors at zero coupling)."""


class CutoffError(SolverError):
    """Fock-space truncation could not be validated below the hard cutoff limit."""


@dataclass
class Observables:
    n_photon: float
    sigma_z: float
    x2: float
    a_mean: complex
    photon_dist: np.ndarray     # joint P(n), summed over spin
    p_n_up: np.ndarray          # conditional P(n | spin up)
    p_n_down: np.ndarray        # conditional P(n | spin down)
    p_up: float                 # total spin-up weight

    def to_record(self) -> dict:
        return {
            "n_photon": self.n_photon,
            "sigma_z": self.sigma_z,
            "x2": self.x2,
            "re_a_mean": self.a_mean.real,
            "im_a_mean": self.a_mean.imag,
            "p_up": self.p_up,
        }


@dataclass
class SteadyStateResult:
    rho: DensityMatrix
    observables: Observables
    cutoff_used: int
    residual: float
    tail_population: float


def observables(rho: DensityMatrix) -> Observables:
    """Photon and spin observables of a density matrix (any provenance)."""
    n_max = rho.n_max
    ops = build_operators(FockCutoff(n_max))
    m = rho.rho

    def expect(op):
        return complex(op.multiply(m.T).sum())

    diag = np.real(np.diagonal(m))
    p_up_joint = diag[:n_max].copy()
    p_dn_joint = diag[n_max:].copy()
    p_up = float(p_up_joint.sum())
    p_dn = float(p_dn_joint.sum())
    cond_up = p_up_joint / p_up if p_up > 1e-12 else np.zeros(n_max)
    cond_dn = p_dn_joint / p_dn if p_dn > 1e-12 else np.zeros(n_max)
    x_op = ops["x"]
    return Observables(
        n_photon=expect(ops["n_op"]).real,
        sigma_z=expect(ops["sigma_z"]).real,
        x2=complex((x_op @ x_op).multiply(m.T).sum()).real,
        a_mean=expect(ops["a"]),
        photon_dist=p_up_joint + p_dn_joint,
        p_n_up=cond_up,
        p_n_down=cond_dn,
        p_up=p_up,
    )


def tail_population(photon_dist: np.ndarray, n_levels: int = 5) -> float:
    return float(np.sum(photon_dist[-n_levels:]))


def _solve_replaced(L: sp.csr_matrix, row: int) -> np.ndarray:
    """Solve L x = 0, trace(x) = 1 by replacing one row with the trace functional."""
    npts = L.shape[0]
    dim = int(math.isqrt(npts))
    t = sp.csr_matrix(trace_vector(dim).reshape(1, -1).astype(complex))
    A = sp.vstack([L[:row], t, L[row + 1:]], format="csc")
    b = np.zeros(npts, dtype=complex)
    b[row] = 1.0
    lu = spla.splu(A)
    x = lu.solve(b)
    # one step of iterative refinement with the same factorization
    r = b - A @ x
    x = x + lu.solve(r)
    return x


def steady_state(p: ModelParams, cut: FockCutoff, tol: float = 1e-10) -> SteadyStateResult:
    """Unique steady state of the master equation at the given parameters.

    Escalates the Fock cutoff (factor 1.5, capped at MAX_CUTOFF) until the
    top-five-level tail population falls below cut.tail_tol.
    """
    if p.kappa <= 0:
        raise ParameterError("steady_state requires kappa > 0")
    if p.lambda_minus == 0 and p.lambda_plus == 0:
        raise NonUniqueSteadyStateError(
            "lambda_minus = lambda_plus = 0 decouples the spin: steady state not unique")

    n_max = cut.n_max
    while True:
        this_cut = FockCutoff(n_max, cut.tail_tol)
        L = liouvillian(p, this_cut)
        dim = this_cut.dim
        rho = None
        last_err = None
        for row in (0, dim + 1):
            try:
                x = _solve_replaced(L, row)
            except RuntimeError as e:
                last_err = f"sparse LU failed (row {row}): {e}"
                log.warning(last_err)
                continue
            cand = unvec(x, dim)
            cand = 0.5 * (cand + cand.conj().T)
            tr = np.trace(cand).real
            if abs(tr) < 1e-12:
                last_err = f"vanishing trace after solve (row {row})"
                continue
            cand /= tr
            residual = float(np.max(np.abs(L @ vec(cand))))
            if residual <= tol:
                rho = cand
                break
            last_err = (f"residual {residual:.3e} above tol {tol:.1e} "
                        f"(row {row}, n_max {n_max})")
            log.warning(last_err)
        if rho is None:
            raise SolverError(f"steady-state solve failed: {last_err}")

        dm = DensityMatrix(rho, n_max)
        obs = observables(dm)
        tail = tail_population(obs.photon_dist)
        if tail <= cut.tail_tol:
            return SteadyStateResult(rho=dm, observables=obs, cutoff_used=n_max,
                                     residual=residual, tail_population=tail)
        if n_max >= MAX_CUTOFF:
            raise CutoffError(f"tail population {tail:.3e} above {cut.tail_tol:.1e} "
                              f"at the hard cutoff limit {MAX_CUTOFF}")
        n_new = min(MAX_CUTOFF, math.ceil(1.5 * n_max))
        log.info("tail population %.3e above %.1e: escalating cutoff %d -> %d",
                 tail, cut.tail_tol, n_max, n_new)
        n_max = n_new


def auto_cutoff(p: ModelParams, hint: int = 0) -> int:
    """Starting Fock cutoff for unattended solves.

    When a mean-field superradiant solution exists, covers four times its
    photon number eta |c|^2 plus margin; otherwise a normal-phase default.
    """
    try:
        q, _ = canonicalize(p)
        d = to_dimensionless(q)
    except ParameterError:
        return max(hint, 32)
    sps = [f for f in meanfield.sp_fixed_points(d)
           if f.kind in (meanfield.SP_DOWN_PLUS, meanfield.SP_DOWN_MINUS)]
    if sps:
        return max(hint, math.ceil(4.0 * abs(d.eta) * sps[0].abs_c_sq) + 20)
    return max(hint, 32)


# ---------------------------------------------------------------------------
# time evolution

@dataclass
class EvolveResult:
    times: np.ndarray
    states: list           # DensityMatrix at each sample time
    observables: list      # Observables at each sample time

    @property
    def sigma_z(self) -> np.ndarray:
        return np.array([o.sigma_z for o in self.observables])

    @property
    def n_photon(self) -> np.ndarray:
        return np.array([o.n_photon for o in self.observables])


_DP_A = [
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                   187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def evolve(rho0: DensityMatrix, p: ModelParams, t_final: float,
           rtol: float = 1e-8, atol: float = 1e-10,
           t_eval=None, n_samples: int = 201,
           store_states: bool = False) -> EvolveResult:
    """Integrate the master equation from rho0 up to t_final.

    Adaptive Dormand-Prince 5(4) on vec(rho); rho is re-hermitized after
    every accepted step.  The top-five-level tail population is monitored on
    the fly; a breach of rho0's tail_tol (1e-8 by default through
    FockCutoff) aborts with a message advising a larger cutoff.
    """
    n_max = rho0.n_max
    cut = FockCutoff(n_max)
    L = liouvillian(p, cut).tocsr()
    dim = cut.dim
    if t_eval is None:
        t_eval = np.linspace(0.0, t_final, n_samples)
    t_eval = np.asarray(t_eval, dtype=float)

    perm = adjoint_permutation(dim)
    diag_idx = np.arange(dim) * dim + np.arange(dim)
    ntail = min(5, n_max)
    tail_idx = np.concatenate([diag_idx[n_max - ntail: n_max],
                               diag_idx[dim - ntail: dim]])

    y = vec(rho0.rho)
    t = t_eval[0]
    h = min(1e-3, (t_eval[-1] - t) / 10 + 1e-30)
    min_h = 1e-13 * max(1.0, abs(t_eval[-1] - t_eval[0]))

    k = [None] * 7
    out_states = []
    out_obs = []

    def record(yv):
        dm = DensityMatrix(unvec(yv.copy(), dim), n_max)
        if store_states:
            out_states.append(dm)
        out_obs.append(observables(dm))

    record(y)
    for i_out in range(1, len(t_eval)):
        t_target = t_eval[i_out]
        while t < t_target:
            if h < min_h:
                raise RuntimeError(f"evolve: step size underflow at t={t:.6g} "
                                   f"(h={h:.3e}); system too stiff for tolerances")
            clipped = t + h >= t_target
            h_step = (t_target - t) if clipped else h

            k[0] = L @ y
            for s in range(1, 7):
                yt = y.copy()
                for m, a_sm in enumerate(_DP_A[s]):
                    if a_sm != 0.0:
                        yt += (h_step * a_sm) * k[m]
                k[s] = L @ yt

            y5 = y.copy()
            e = np.zeros_like(y)
            for s in range(7):
                if _DP_B5[s] != 0.0:
                    y5 += (h_step * _DP_B5[s]) * k[s]
                if _DP_E[s] != 0.0:
                    e += (h_step * _DP_E[s]) * k[s]
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
            err = float(np.sqrt(np.mean(np.abs(e / sc) ** 2)))

            if err <= 1.0:
                t = t_target if clipped else t + h_step
                # re-hermitize: rho <- (rho + rho^dag)/2
                y = 0.5 * (y5 + np.conj(y5[perm]))
                tail = float(np.sum(y[tail_idx].real))
                if tail > cut.tail_tol:
                    raise RuntimeError(
                        f"evolve: tail population {tail:.3e} breached {cut.tail_tol:.1e} "
                        f"at t={t:.6g}; rerun with a larger cutoff than {n_max}")
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                grown = h_step * fac
                h = max(h, grown) if clipped else grown
            else:
                h = h_step * max(0.2, 0.9 * err ** -0.2)
        record(y)
    return EvolveResult(times=t_eval, states=out_states, observables=out_obs)
