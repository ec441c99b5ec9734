"""Smearing transforms, switching windows, and the displacement closed form."""
from __future__ import annotations

import math

import numpy as np
import pytest

from chitomo.errors import ValidationError
from chitomo.pulse_protocol import (
    Constant,
    CustomRadial,
    CustomSwitching,
    Delta,
    GaussianWindow,
    PulseSchedule,
    SphericalGaussian,
    displacement_param,
    load_schedule,
    reachable_manifold,
    save_schedule,
    schedule_from_dict,
    schedule_to_dict,
    smearing_ft,
    switching_integral,
)

L = 2.0 * np.pi
ETA_CONST = 0.28209479177387814    # tau / sqrt(2 L omega) at tau=om=1, L=2pi, n=1
XI_CANONICAL = 0.0008612093470813497 - 0.00012276241528970229j  # lam=.01 tau=1 N=3


def canonical(lam=0.01, tau=1.0, N=3, smearing=None, switching=None):
    return PulseSchedule(
        lam=lam,
        tau=tau,
        N=N,
        smearing=Delta() if smearing is None else smearing,
        switching=Constant(1.0) if switching is None else switching,
    )


def xi_of(sched, k=1.0, omega=1.0, box=L, n=1):
    return displacement_param(sched, k, omega, box, n)


# ---------------------------------------------------------------- smearing

def test_delta_profile_is_flat():
    assert smearing_ft(Delta(), 0.0, 1) == 1.0
    assert smearing_ft(Delta(), [0.3, -0.4, 1.0], 3) == 1.0


def test_gaussian_profile_normalization_and_width():
    g = SphericalGaussian(sigma=1.0)
    assert smearing_ft(g, 0.0, 3) == 1.0
    assert smearing_ft(g, 1.0, 3) == pytest.approx(math.exp(-0.5), abs=1e-15)
    # same radial transform in every dimension for the normalized profile
    assert smearing_ft(g, 1.0, 1) == smearing_ft(g, 1.0, 3)
    assert smearing_ft(SphericalGaussian(sigma=2.0), 1.0, 3) == pytest.approx(
        math.exp(-2.0), abs=1e-15
    )


def test_wave_vector_forms():
    g = SphericalGaussian(sigma=1.0)
    # vector and magnitude agree; only |k| enters
    assert smearing_ft(g, [0.6, 0.8], 2) == pytest.approx(smearing_ft(g, 1.0, 2), abs=1e-15)
    with pytest.raises(ValidationError):
        smearing_ft(g, [1.0, 0.0], 3)
    with pytest.raises(ValidationError):
        smearing_ft(g, 1.0, 4)
    with pytest.raises(ValidationError):
        smearing_ft(object(), 1.0, 1)


@pytest.mark.parametrize("n,norm,npts", [(1, math.sqrt(2 * math.pi), 200_001),
                                         (2, 2 * math.pi, 800_001),
                                         (3, (2 * math.pi) ** 1.5, 200_001)])
def test_radial_table_reproduces_gaussian_transform(n, norm, npts):
    # tabulated normalized Gaussian against the closed form, per dimension
    r = np.linspace(0.0, 10.0, npts)
    tab = CustomRadial(r=tuple(r), f=tuple(np.exp(-0.5 * r * r) / norm))
    assert smearing_ft(tab, 1.0, n) == pytest.approx(math.exp(-0.5), abs=1e-10)


def test_radial_table_validation():
    with pytest.raises(ValidationError):
        CustomRadial(r=(0.0, 1.0), f=(1.0,))
    with pytest.raises(ValidationError):
        CustomRadial(r=(1.0, 0.5), f=(1.0, 1.0))
    with pytest.raises(ValidationError):
        CustomRadial(r=(0.0, 1.0), f=(1.0, math.nan))
    with pytest.raises(ValidationError):
        SphericalGaussian(sigma=0.0)


# ---------------------------------------------------------------- switching

def test_constant_window_and_integral():
    assert Constant(1.0).window_integral(2.5) == 2.5
    assert switching_integral(Constant(1.0), 1.0, 1.0, L, 1) == pytest.approx(
        ETA_CONST, abs=1e-16
    )
    assert switching_integral(Constant(0.0), 1.0, 1.0, L, 1) == 0.0


def test_switching_integral_validation():
    with pytest.raises(ValidationError):
        switching_integral(Constant(1.0), 0.0, 1.0, L, 1)
    with pytest.raises(ValidationError):
        switching_integral(Constant(1.0), 1.0, -1.0, L, 1)
    with pytest.raises(ValidationError):
        switching_integral(object(), 1.0, 1.0, L, 1)
    with pytest.raises(ValidationError):
        Constant(-0.2)


def test_gaussian_window_matches_erf():
    c, w, tau = 0.4, 0.15, 1.0
    win = GaussianWindow(center=c, width=w)
    want = w * math.sqrt(math.pi) / 2 * (math.erf((tau - c) / w) + math.erf(c / w))
    assert win.window_integral(tau) == pytest.approx(want, abs=1e-12)


def test_relative_gaussian_window_scales_with_tau():
    win = GaussianWindow(center=0.5, width=1.0 / math.sqrt(72.0), relative=True)
    one = win.window_integral(1.0)
    assert win.window_integral(2.0) == pytest.approx(2.0 * one, rel=1e-12)
    assert win.window_integral(0.25) == pytest.approx(0.25 * one, rel=1e-12)


def test_custom_switching_tables():
    # trapezoid is exact on piecewise-linear tables
    ramp = CustomSwitching(t=(0.0, 1.0), eta=(0.0, 1.0))
    assert ramp.window_integral(1.0) == pytest.approx(0.5, abs=1e-15)
    assert ramp.window_integral(0.5) == pytest.approx(0.125, abs=1e-15)
    flat = CustomSwitching(t=(0.0, 2.0), eta=(1.0, 1.0))
    assert flat.window_integral(1.5) == pytest.approx(1.5, abs=1e-15)
    assert flat.window_integral(5.0) == pytest.approx(2.0, abs=1e-15)  # zero past the table
    with pytest.raises(ValidationError):
        CustomSwitching(t=(0.0, 0.0), eta=(1.0, 1.0))
    with pytest.raises(ValidationError):
        CustomSwitching(t=(0.0, 1.0), eta=(1.0, -1.0))


# ----------------------------------------------------------- pulse schedule

def test_schedule_validation():
    with pytest.raises(ValidationError):
        canonical(lam=0.0)
    with pytest.raises(ValidationError):
        canonical(lam=-0.01)
    with pytest.raises(ValidationError):
        canonical(tau=0.0)
    with pytest.raises(ValidationError):
        canonical(N=0)
    with pytest.raises(ValidationError):
        canonical(N=2.5)
    assert canonical(N=2.0).N == 2
    assert canonical(tau=0.7, N=4).total_time == pytest.approx(5.6)


# --------------------------------------------------- displacement parameter

def test_displacement_canonical_value():
    assert xi_of(canonical()) == pytest.approx(XI_CANONICAL, abs=1e-18)


def test_displacement_zeros_at_full_periods():
    for m in (1, 2, 3):
        for N in (1, 2, 5):
            xi = xi_of(canonical(tau=2.0 * math.pi * m, N=N))
            assert abs(xi) < 1e-12


def test_displacement_maximum_law():
    # |xi| at tau = pi/omega equals 8 lam N eta / pi
    for N in (1, 3, 7):
        sched = canonical(tau=math.pi, N=N)
        eta = switching_integral(Constant(1.0), math.pi, 1.0, L, 1)
        want = 8.0 * sched.lam * N * eta / math.pi
        assert abs(xi_of(sched)) == pytest.approx(want, rel=1e-12)


def test_displacement_continuous_through_odd_pi():
    # tan(u/2) poles cancel; step 1e-8 across them moves xi by O(1e-9)
    for tau0 in (math.pi, 3.0 * math.pi):
        x0 = xi_of(canonical(tau=tau0))
        assert abs(xi_of(canonical(tau=tau0 + 1e-8)) - x0) < 1e-7
        assert abs(xi_of(canonical(tau=tau0 - 1e-8)) - x0) < 1e-7


def test_displacement_periodic_in_tau():
    # constant switching: eta grows like tau but the prefactor divides it out
    for tau in (0.3, 1.7, 2.9):
        a = xi_of(canonical(tau=tau))
        b = xi_of(canonical(tau=tau + 2.0 * math.pi))
        assert a == pytest.approx(b, abs=1e-12)


def test_displacement_linear_in_lambda():
    # scaling lam by a power of two scales xi exactly
    a = xi_of(canonical(lam=0.005))
    b = xi_of(canonical(lam=0.01))
    assert b == 2.0 * a


def test_displacement_phase_locked_to_segments():
    # with a real profile, xi e^{-i N omega tau} is real up to sign
    for tau, N in ((0.9, 2), (2.2, 5), (4.0, 3)):
        xi = xi_of(canonical(tau=tau, N=N))
        folded = xi * np.exp(-1j * N * tau)
        assert abs(folded.imag) <= 1e-14 * abs(xi)


def test_displacement_smearing_weight_multiplies():
    plain = xi_of(canonical())
    weighted = xi_of(canonical(smearing=SphericalGaussian(sigma=1.0)))
    assert weighted == pytest.approx(plain * math.exp(-0.5), rel=1e-14)


# ----------------------------------------------------------------- manifold

def test_manifold_curves():
    taus = np.linspace(0.05, 2.0 * math.pi, 200)
    curves = reachable_manifold(canonical(), [1, 4], taus, 1.0, 1.0, L, 1)
    assert [c.N for c in curves] == [1, 4]
    for c in curves:
        assert c.taus.shape == c.xis.shape == (200,)
    # endpoint tau = 2 pi closes every curve
    for c in curves:
        assert abs(c.xis[-1]) < 1e-12


def test_manifold_peak_scales_with_N():
    taus = np.sort(np.append(np.linspace(0.5, 5.0, 451), math.pi))
    curves = reachable_manifold(canonical(), [1, 4], taus, 1.0, 1.0, L, 1)
    r1 = np.abs(curves[0].xis).max()
    r4 = np.abs(curves[1].xis).max()
    assert r4 == pytest.approx(4.0 * r1, rel=1e-10)


def test_manifold_scales_with_lambda():
    taus = np.linspace(0.3, 6.0, 25)
    base = reachable_manifold(canonical(lam=0.01), [2], taus, 1.0, 1.0, L, 1)
    twice = reachable_manifold(canonical(lam=0.02), [2], taus, 1.0, 1.0, L, 1)
    np.testing.assert_array_equal(twice[0].xis, 2.0 * base[0].xis)


def test_manifold_validation():
    with pytest.raises(ValidationError):
        reachable_manifold(canonical(), [], [1.0], 1.0, 1.0, L, 1)
    with pytest.raises(ValidationError):
        reachable_manifold(canonical(), [0], [1.0], 1.0, 1.0, L, 1)
    with pytest.raises(ValidationError):
        reachable_manifold(canonical(), [1], [], 1.0, 1.0, L, 1)


# ------------------------------------------------------------ serialization

@pytest.mark.parametrize(
    "smearing",
    [Delta(), SphericalGaussian(sigma=0.4), CustomRadial(r=(0.0, 0.5, 1.0), f=(1.0, 0.5, 0.0))],
)
@pytest.mark.parametrize(
    "switching",
    [Constant(2.0), GaussianWindow(center=0.5, width=0.1, relative=True),
     CustomSwitching(t=(0.0, 1.0), eta=(1.0, 1.0))],
)
def test_schedule_roundtrip(smearing, switching):
    sched = canonical(smearing=smearing, switching=switching)
    doc = schedule_to_dict(sched)
    assert doc["lambda"] == sched.lam
    assert schedule_from_dict(doc) == sched


def test_schedule_file_roundtrip(tmp_path):
    sched = canonical(lam=0.015, tau=2.2, N=6)
    path = tmp_path / "sched.json"
    save_schedule(sched, path)
    assert load_schedule(path) == sched


def test_schedule_unknown_kind_rejected():
    doc = schedule_to_dict(canonical())
    doc["smearing"] = {"kind": "nope"}
    with pytest.raises(ValidationError):
        schedule_from_dict(doc)
