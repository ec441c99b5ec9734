"""Truncated-Fock brute force against the closed forms it polices."""
from __future__ import annotations

import math

import numpy as np
import pytest

from chitomo.errors import NumericalCheckError, ValidationError
from chitomo.fock_oracle import (
    FieldMode,
    build_segment,
    chi_fock,
    default_cutoff,
    displacement_operator,
    evolve_pulse_sequence,
    joint_bloch_oracle,
    ladder,
    number_rotation,
    run_default_suite,
    run_displacement_draws,
    squeezed_ket,
    thermal_density,
    truncated_mode,
    verify_displacement_composition,
    verify_displacement_identity,
)
from chitomo.gaussian_field import (
    GaussianFieldState,
    ModeSet,
    Squeezed,
    Thermal,
    char_analytic,
)
from chitomo.pulse_protocol import Constant, Delta, PulseSchedule
from chitomo.ramsey_readout import final_qubit_state

MODE = FieldMode(k=1.0, omega=1.0, box_side=2 * math.pi, spatial_dim=1)
MODES_1D = ModeSet(spatial_dim=1, box_side=2 * math.pi, mass=1.0, mode_indices=[[1]])

CHI_SQ_HALF = 0.39707424035439476     # analytic frozen pair, r=1 theta=0
CHI_SQ_HALF_I = 0.9832253770397565
CHI_TH_HALF = 0.6872892787909722      # n=1, xi=0.5


def sched(lam=0.01, tau=1.0, N=3):
    return PulseSchedule(lam=lam, tau=tau, N=N, smearing=Delta(), switching=Constant(1.0))


def state_of(mode_state):
    return GaussianFieldState(modes=MODES_1D, mode_states=[mode_state])


# ---------------------------------------------------------------- operators

def test_ladder_commutator():
    a = ladder(12)
    comm = a @ a.conj().T - a.conj().T @ a
    # canonical commutation holds below the cutoff corner
    np.testing.assert_allclose(comm[:11, :11], np.eye(11), atol=1e-14)
    tm = truncated_mode(6)
    np.testing.assert_allclose(tm.number, np.diag(np.arange(6.0)), atol=1e-14)
    with pytest.raises(ValidationError):
        ladder(1)


def test_displacement_operator_coherent_amplitudes():
    D = 40
    U = displacement_operator(D, 0.7 - 0.3j)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(D), atol=1e-12)
    # <0|D|0> = e^{-|xi|^2/2}, <1|D|0> = xi <0|D|0>
    xi = 0.7 - 0.3j
    assert U[0, 0] == pytest.approx(math.exp(-abs(xi) ** 2 / 2), abs=1e-13)
    assert U[1, 0] == pytest.approx(xi * U[0, 0], abs=1e-13)


def test_number_rotation_phases():
    R = number_rotation(8, 0.37)
    np.testing.assert_allclose(np.diag(R), np.exp(1j * 0.37 * np.arange(8)), atol=1e-15)
    assert np.abs(R - np.diag(np.diag(R))).max() == 0.0


def test_thermal_density_geometric_diagonal():
    rho = thermal_density(80, 1.0)
    d = np.diag(rho).real
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(d[1:20] / d[:19], 0.5, rtol=1e-12)
    assert np.abs(rho - np.diag(d)).max() == 0.0


def test_thermal_density_tail_guard():
    with pytest.raises(NumericalCheckError):
        thermal_density(10, 1.0)
    # vacuum limit is exact at any cutoff
    rho = thermal_density(16, 0.0)
    assert rho[0, 0] == 1.0


def test_squeezed_ket_structure():
    psi = squeezed_ket(160, 1.0)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(psi[1::2]).max() == pytest.approx(0.0, abs=1e-14)  # even Fock layers only
    assert abs(psi[0]) == pytest.approx(1 / math.sqrt(math.cosh(1.0)), rel=1e-10)


def test_squeezed_ket_boundary_guard():
    with pytest.raises(NumericalCheckError):
        squeezed_ket(60, 1.0)
    psi = squeezed_ket(60, 1.0, boundary_tol=1e-2)  # explicit opt-in still works
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-6)


# ----------------------------------------------------------------- segments

def test_segment_free_limit():
    # lam -> 0: both branches reduce to e^{-2 i omega tau n}
    seg = build_segment(sched(lam=1e-14), MODE, 40)
    free = number_rotation(40, -2.0)
    assert np.abs(seg.u_g - free).max() < 1e-10
    assert np.abs(seg.u_e - free).max() < 1e-10


def test_segment_unitarity():
    seg = build_segment(sched(), MODE, 40)
    for u in (seg.u_g, seg.u_e):
        assert np.abs(u @ u.conj().T - np.eye(40)).max() < 1e-10


def test_segment_full_period_is_identity():
    # omega tau = 2 pi: the pair returns every Fock layer to itself
    seg = build_segment(sched(tau=2 * math.pi), MODE, 40)
    dev = seg.u_g - seg.u_g[0, 0] * np.eye(40)
    assert np.abs(dev[:, :20]).max() < 1e-10


def test_segment_leak_guard():
    with pytest.raises(NumericalCheckError):
        build_segment(sched(lam=5.0), MODE, 8)
    with pytest.raises(ValidationError):
        build_segment(sched(), MODE, 4)


def test_evolution_inherits_unitarity():
    seg = build_segment(sched(), MODE, 30)
    U = evolve_pulse_sequence(seg, 4)
    assert np.abs(U @ U.conj().T - np.eye(30)).max() < 1e-10


# -------------------------------------------------------- identity checking

def test_identity_canonical_inputs():
    rep = verify_displacement_identity(sched(), MODE, D=40)
    assert rep.defect < 1e-6 and rep.residual < 1e-6
    assert rep.passed
    assert rep.xi_closed == pytest.approx(MODE.closed_form_xi(sched()), abs=0)
    d = rep.to_dict()
    assert d["passed"] is True and d["D"] == 40


def test_identity_maximum_law_on_fock_side():
    rep = verify_displacement_identity(sched(tau=math.pi), MODE, D=40)
    eta = math.pi / math.sqrt(4 * math.pi)
    assert abs(rep.xi_fock) == pytest.approx(8 * 0.01 * 3 * eta / math.pi, abs=1e-6)


def test_identity_defect_converges_with_cutoff():
    defects = [verify_displacement_identity(sched(), MODE, D=D).defect for D in (20, 40, 80)]
    assert defects[1] <= defects[0] + 2e-17
    assert defects[2] <= defects[1] + 2e-17
    assert max(defects) < 1e-15


def test_identity_default_cutoff_heuristic():
    assert default_cutoff(0.0) == 16
    assert default_cutoff(1.0) == 64
    rep = verify_displacement_identity(sched(), MODE)  # D chosen from |xi|
    assert rep.dim == default_cutoff(rep.xi_closed)
    assert rep.passed


# ------------------------------------------------------------- composition

def test_composition_cases():
    assert verify_displacement_composition(0.1 + 0.05j, 0.7, 5, D=40) < 1e-8
    assert verify_displacement_composition(0.3 - 0.2j, 1.3, 1, D=40) < 1e-12
    assert verify_displacement_composition(0.0, 0.3, 4, D=40) < 1e-12
    # resonant rotation angle takes the geometric-series limit branch
    assert verify_displacement_composition(0.05 + 0.02j, 2 * math.pi, 3, D=40) < 1e-10


# --------------------------------------------------------------- chi values

def test_chi_fock_vacuum():
    vac = GaussianFieldState(modes=MODES_1D)
    assert chi_fock(vac, 1.0, D=40) == pytest.approx(math.exp(-0.5), abs=1e-10)
    for xi in (0.3, -1.2j, 1.4 + 0.8j, 2.0):
        assert chi_fock(vac, xi, D=64) == pytest.approx(char_analytic(vac, xi), abs=1e-10)


def test_chi_fock_thermal_frozen():
    got = chi_fock(state_of(Thermal(n=1.0)), 0.5, D=60)
    assert got == pytest.approx(CHI_TH_HALF, abs=1e-8)


def test_chi_fock_resolves_squeezed_sign():
    # the brute-force values split the two sign conventions by ~0.59
    sq = state_of(Squeezed(r=1.0, theta=0.0))
    on_axis = chi_fock(sq, 0.5, D=160)
    off_axis = chi_fock(sq, 0.5j, D=160)
    assert on_axis == pytest.approx(CHI_SQ_HALF, abs=1e-8)
    assert off_axis == pytest.approx(CHI_SQ_HALF_I, abs=1e-8)
    assert abs(on_axis - CHI_SQ_HALF_I) > 0.5
    assert abs(off_axis - CHI_SQ_HALF) > 0.5


def test_chi_fock_single_mode_only():
    modes2 = ModeSet(spatial_dim=1, box_side=2 * math.pi, mass=1.0, mode_indices=[[1], [2]])
    with pytest.raises(ValidationError):
        chi_fock(GaussianFieldState(modes=modes2), 0.5, D=20)


# ------------------------------------------------------------- joint qubit

@pytest.mark.parametrize(
    "mode_state,D",
    [(Thermal(n=1.0), 60), (Squeezed(r=0.5, theta=0.3), 80)],
)
def test_joint_oracle_matches_encoding_formula(mode_state, D):
    st_ = state_of(mode_state)
    theta = 0.6 * math.pi
    s = sched(N=2)
    bl = joint_bloch_oracle(st_, s, MODE, theta, D=D)
    qs = final_qubit_state(theta, char_analytic(st_, MODE.closed_form_xi(s)))
    assert bl[0] == pytest.approx(qs.bx, abs=1e-12)
    assert bl[1] == pytest.approx(qs.by, abs=1e-12)
    assert bl[2] == pytest.approx(qs.bz, abs=1e-12)


# -------------------------------------------------------------- batch runs

def test_displacement_draws_batch():
    reports = run_displacement_draws(5, D=40, seed=3)
    assert len(reports) == 5
    for r in reports:
        assert r["passed"] is True
        assert r["defect"] <= 1e-5
        assert 0.0 < r["inputs"]["lambda"] <= 0.02
        assert 1 <= r["inputs"]["N"] <= 6


def test_default_suite_passes():
    reports = run_default_suite(n_draws=3, D=40, seed=1)
    assert all(r["passed"] for r in reports)
    checks = {r["check"] for r in reports}
    assert checks == {
        "displacement_identity",
        "displacement_composition",
        "chi_closed_form",
        "joint_qubit_bloch",
    }


# ----------------------------------------------------------------- plumbing

def test_field_mode_construction():
    fm = FieldMode.from_mode_set(MODES_1D, 0)
    assert fm.k == pytest.approx(1.0)
    assert fm.omega == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ValidationError):
        FieldMode(k=1.0, omega=0.0, box_side=1.0, spatial_dim=1)
    with pytest.raises(ValidationError):
        FieldMode(k=1.0, omega=1.0, box_side=1.0, spatial_dim=4)
