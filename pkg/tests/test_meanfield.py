"""Semiclassical fixed points, stability and the phase boundaries."""

import math

import numpy as np
import pytest

from rabi_dpt import (DimlessParams, ParameterError, boundary_lambda_c,
                      boundary_r_pm, classify_mf, np_stability, sp_fixed_points,
                      tricritical_lambda)
from rabi_dpt.meanfield import (MFState, adiabatic_spin, default_dtau,
                                integrate_full, mf_rhs_adiabatic, mf_rhs_full)


def dimless(eta, lam_m, lam_p, kr=0.5):
    return DimlessParams.from_couplings(eta, lam_m, lam_p, kr)


def random_spin_state(rng):
    # spin length 1, arbitrary cavity amplitude
    sp = (rng.uniform(-0.4, 0.4) + 1j * rng.uniform(-0.4, 0.4)) / 2.0
    sz = math.sqrt(max(0.0, 1.0 - 4.0 * abs(sp) ** 2)) * (-1) ** rng.integers(2)
    c = rng.uniform(-1.0, 1.0) + 1j * rng.uniform(-1.0, 1.0)
    return MFState(complex(c), complex(sp), float(sz))


def rhs_norm(state, d):
    r = mf_rhs_full(state, d)
    return abs(r.c) + abs(r.s_plus) + abs(r.s_z)


def test_normal_states_are_fixed_points():
    d = dimless(100.0, 1.2, 0.7)
    assert rhs_norm(MFState(0j, 0j, -1.0), d) == 0.0
    assert rhs_norm(MFState(0j, 0j, 1.0), d) == 0.0


def test_rhs_conserves_spin_length(rng):
    for _ in range(20):
        d = dimless(float(rng.uniform(5.0, 200.0)), float(rng.uniform(0.0, 3.0)),
                    float(rng.uniform(0.0, 3.0)), float(rng.uniform(0.0, 1.5)))
        s = random_spin_state(rng)
        r = mf_rhs_full(s, d)
        # d/dtau (4 |s_+|^2 + s_z^2) = 8 Re(conj(s_+) ds_+) + 2 s_z ds_z
        drift = 8.0 * (s.s_plus.conjugate() * r.s_plus).real + 2.0 * s.s_z * r.s_z
        assert abs(drift) < 1e-12


def test_flow_conserves_spin_length():
    d = dimless(100.0, 1.5, 1.5)
    s0 = MFState(0.1 + 0.0j, 0.05 + 0.0j, -math.sqrt(1.0 - 4 * 0.05 ** 2))
    taus, states = integrate_full(s0, d, 100.0)
    lengths = np.array([s.spin_length_sq for s in states])
    assert np.max(np.abs(lengths - 1.0)) < 1e-9


def test_adiabatic_spin_consistency(rng):
    # the adiabatically eliminated spin zeroes the spin part of the full flow
    d = dimless(100.0, 1.5, 1.5)
    for _ in range(10):
        c = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))
        for branch in (-1, 1):
            sz, sp = adiabatic_spin(c, d, branch)
            r = mf_rhs_full(MFState(c, sp, sz), d)
            assert abs(r.s_plus) < 1e-12
            assert abs(r.s_z) < 1e-12
            assert abs(mf_rhs_adiabatic(c, d, branch) - r.c) < 1e-12


def test_superradiant_fixed_point_isotropic_values():
    fps = sp_fixed_points(dimless(100.0, 1.5, 1.5))
    stable = [f for f in fps if f.stable]
    assert len(stable) == 2
    plus = next(f for f in stable if f.kind == "SP_down_plus")
    minus = next(f for f in stable if f.kind == "SP_down_minus")
    assert plus.state.s_z == pytest.approx(-5.0 / 9.0, rel=1e-12)
    assert plus.abs_c_sq == pytest.approx(14.0 / 45.0, rel=1e-12)
    assert plus.state.c == pytest.approx(0.4988876515698589 + 0.24944382578492946j,
                                         abs=1e-12)
    # the two stable attractors are field-reversed partners
    assert minus.state.c == pytest.approx(-plus.state.c, abs=1e-12)
    assert minus.state.s_z == pytest.approx(plus.state.s_z, abs=1e-12)


def test_superradiant_residuals_vanish(rng):
    for d in (dimless(100.0, 2.0, 1.4), dimless(50.0, 1.3, 1.8),
              dimless(100.0, 2.7, 0.81)):
        fps = sp_fixed_points(d)
        assert fps
        for f in fps:
            assert rhs_norm(f.state, d) < 1e-10


def test_superradiant_absent_cases():
    # below threshold, and below the lower ratio window r_-
    assert sp_fixed_points(dimless(100.0, 1.0, 1.0)) == []
    assert sp_fixed_points(dimless(100.0, 2.0, 0.2)) == []


def test_order_parameter_vanishes_at_boundary():
    lc_minus, _ = boundary_lambda_c(0.5, 0.5)
    vals = []
    for off in (1e-2, 1e-3):
        lam_m = lc_minus + off
        fps = [f for f in sp_fixed_points(dimless(100.0, lam_m, 0.5 * lam_m))
               if f.stable]
        vals.append(fps[0].abs_c_sq)
    assert vals[0] < 1e-2
    # |c|^2 grows linearly in the offset near the continuous transition
    assert 8.0 < vals[0] / vals[1] < 12.0


def test_np_stability_analytic_eigenvalues():
    up = np_stability(dimless(100.0, 0.618, 0.618), "up")
    assert up.stable
    assert up.jacobian_eigs[0] == pytest.approx(-0.5 + 1.1755526359972146j, abs=1e-12)
    assert up.jacobian_eigs[1] == pytest.approx(-0.5 - 1.1755526359972146j, abs=1e-12)

    # NP_up never destabilizes; NP_down does between the two boundaries
    assert np_stability(dimless(100.0, 1.5, 1.5), "up").stable
    assert not np_stability(dimless(100.0, 1.5, 1.5), "down").stable

    down = np_stability(dimless(100.0, 1.0, 3.0), "down")
    assert down.stable
    assert down.jacobian_eigs == ((-0.5 + 0j), (-0.5 + 0j))


def test_np_down_destabilizes_exactly_at_boundary():
    for r in (0.5, 2.0):
        lc_minus, _ = boundary_lambda_c(r, 0.5)
        for off, expect in ((-1e-6, True), (1e-6, False)):
            lam_m = lc_minus + off
            fp = np_stability(dimless(100.0, lam_m, r * lam_m), "down")
            assert fp.stable is expect


def test_boundary_formula_values():
    lo, hi = boundary_lambda_c(0.3, 0.5)
    assert lo == pytest.approx(1.837341360973492, rel=1e-12)
    assert hi == pytest.approx(2.6747534343755817, rel=1e-12)
    lo, hi = boundary_lambda_c(1.0, 0.5)
    assert lo == pytest.approx(math.sqrt(1.25), rel=1e-12)
    assert hi == math.inf
    with pytest.raises(ParameterError):
        boundary_lambda_c(0.0, 0.5)
    with pytest.raises(ParameterError):
        boundary_lambda_c(0.1, 0.5)  # ratio below the window r_- .. r_+


def test_boundary_ratio_window():
    rm, rp = boundary_r_pm(0.5)
    assert rm == pytest.approx(0.2360679774997898, rel=1e-12)
    assert rp == pytest.approx(4.23606797749979, rel=1e-12)
    assert rm * rp == pytest.approx(1.0, abs=1e-12)
    # no dissipation: every ratio admits a transition
    assert boundary_r_pm(0.0) == (0.0, math.inf)
    with pytest.raises(ParameterError):
        boundary_r_pm(-0.5)


def test_tricritical_tangency():
    lt = tricritical_lambda(0.5)
    assert lt == pytest.approx(2.1762508994828216, rel=1e-12)
    assert lt == pytest.approx(math.sqrt(2.0 * (1.25 + math.sqrt(1.25))), rel=1e-12)
    # at the edge of the ratio window the two boundaries merge at lambda_t
    rm, _ = boundary_r_pm(0.5)
    lo, hi = boundary_lambda_c(rm + 1e-12, 0.5)
    assert abs(lo - lt) < 1e-4
    assert abs(hi - lt) < 1e-4


def test_classification_of_regions():
    cases = [
        ((0.618, 0.618), "NP", 2),   # NP_up and NP_down
        ((1.5, 1.5), "SP", 3),       # NP_up and the two SP partners
        ((2.7, 0.81), "C", 4),       # NP_down restabilized, SP persists
        ((1.0, 3.0), "C", 4),
    ]
    for (lam_m, lam_p), region, n_stable in cases:
        phase = classify_mf(dimless(100.0, lam_m, lam_p))
        assert phase.region == region
        assert len(phase.stable_points) == n_stable
    with pytest.raises(ParameterError):
        classify_mf(dimless(100.0, -0.5, 0.5))


def test_flow_is_stationary_at_fixed_point():
    d = dimless(100.0, 1.5, 1.5)
    fp = sp_fixed_points(d)[0]
    taus, states = integrate_full(fp.state, d, 50.0)
    drift = max(abs(s.c - fp.state.c) + abs(s.s_plus - fp.state.s_plus)
                + abs(s.s_z - fp.state.s_z) for s in states)
    assert drift < 1e-10


def test_flow_damps_cavity_perturbation_in_normal_phase():
    d = dimless(100.0, 0.618, 0.618)
    taus, states = integrate_full(MFState(0.05 + 0.0j, 0j, -1.0), d, 40.0)
    assert abs(states[-1].c) < 1e-3
    assert abs(states[-1].s_z + 1.0) < 0.01


def test_default_time_step_shrinks_with_eta():
    assert default_dtau(1.0) == pytest.approx(1e-3)
    assert default_dtau(100.0) == pytest.approx(5e-5)
