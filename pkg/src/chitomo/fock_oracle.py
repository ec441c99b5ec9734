"""Brute-force verification layer in a truncated Fock space.

Everything here is deliberately independent of the analytic layer: states are
built by matrix exponentials (never from closed-form amplitudes), the pulse
sequence is multiplied out segment by segment, and the qubit check embeds the
two-level system explicitly and partial-traces it back out. Agreement between
this module and the closed forms is the evidence that the closed forms are
implemented with the right signs and orderings.

Conventions validated against the closed-form layer:

  * one segment evolves the field under v_g = omega tau n + coupling with the
    minus sign for the ground branch, plus for the excited branch, and
    u_g = exp(-i v_e) exp(-i v_g) (pi pulse swaps the branch mid-segment),
    u_e with the two factors swapped;
  * the full sequence (u_g^dag)^N (u_e)^N equals the displacement D(xi) with
    xi the closed-form value, with no residual global phase.

Truncation is policed two ways: segment unitaries are leak-checked (no
amplitude reaching the top Fock level from the lower half), and truncated
states carry tail/boundary checks. Comparisons between a computed unitary and
a target displacement are restricted to the low Fock columns (j < D/2) after
aligning the global phase on the interior of the matrix, since the top edge
of a truncated displacement is wrong by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

from .errors import NumericalCheckError, ValidationError
from .gaussian_field import (
    GaussianFieldState,
    ModeSet,
    Squeezed,
    Thermal,
    Vacuum,
    char_analytic,
)
from .pulse_protocol import PulseSchedule, displacement_param, smearing_ft, switching_integral

__all__ = [
    "FieldMode",
    "TruncatedMode",
    "SegmentOperators",
    "IdentityReport",
    "ladder",
    "truncated_mode",
    "displacement_operator",
    "number_rotation",
    "thermal_density",
    "squeezed_ket",
    "fock_density",
    "build_segment",
    "evolve_pulse_sequence",
    "verify_displacement_identity",
    "verify_displacement_composition",
    "chi_fock",
    "joint_bloch_oracle",
    "run_displacement_draws",
    "run_default_suite",
]


@dataclass(frozen=True)
class FieldMode:
    """One field mode (k, omega) plus the box data the closed form needs."""

    k: float
    omega: float
    box_side: float
    spatial_dim: int

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ValidationError("mode frequency must be positive")
        if not self.box_side > 0 or self.spatial_dim not in (1, 2, 3):
            raise ValidationError("bad box parameters")

    @classmethod
    def from_mode_set(cls, modes: ModeSet, index: int = 0) -> "FieldMode":
        k = modes.wavevectors[index]
        return cls(
            k=float(np.linalg.norm(k)),
            omega=float(modes.omegas[index]),
            box_side=modes.box_side,
            spatial_dim=modes.spatial_dim,
        )

    def closed_form_xi(self, sched: PulseSchedule) -> complex:
        return displacement_param(sched, self.k, self.omega, self.box_side, self.spatial_dim)


# --------------------------------------------------------------------------
# operator algebra at cutoff D

def ladder(D: int) -> NDArray[np.complex128]:
    """Annihilation operator, a|n> = sqrt(n)|n-1>, as a dense D x D matrix."""
    if int(D) != D or D < 2:
        raise ValidationError("Fock cutoff must be an integer >= 2")
    return np.diag(np.sqrt(np.arange(1.0, D)), k=1).astype(complex)


@dataclass(frozen=True, eq=False)
class TruncatedMode:
    """Dense a, a-dagger and number matrices at cutoff dim.

    [a, a-dagger] = 1 holds on the top-left (dim-1) block only; the corner
    defect is the price of truncation and the reason for the leak checks.
    """

    dim: int
    a: NDArray[np.complex128]
    adag: NDArray[np.complex128]
    number: NDArray[np.complex128]


def truncated_mode(D: int) -> TruncatedMode:
    a = ladder(D)
    adag = a.conj().T
    return TruncatedMode(dim=int(D), a=a, adag=adag, number=adag @ a)


def displacement_operator(D: int, xi: complex) -> NDArray[np.complex128]:
    """D(xi) = exp(xi a-dagger - conj(xi) a) at cutoff D."""
    xi = complex(xi)
    a = ladder(D)
    return expm(xi * a.conj().T - np.conj(xi) * a)


def number_rotation(D: int, y: float) -> NDArray[np.complex128]:
    """exp(i y n) as a diagonal matrix."""
    return np.diag(np.exp(1j * float(y) * np.arange(D)))


def thermal_density(D: int, n: float, tail_tol: float = 1e-10) -> NDArray[np.complex128]:
    """Truncated thermal density matrix, p_j = n^j / (n+1)^(j+1).

    The discarded tail has total weight (n+1) p_D; the check on p_D keeps the
    trace deficit below (n+1) tail_tol. Not renormalized, so the truncation
    error stays visible in any comparison.
    """
    if n < 0:
        raise ValidationError("thermal occupation must be >= 0")
    if n == 0:
        rho = np.zeros((D, D), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    j = np.arange(D)
    logp = j * math.log(n) - (j + 1) * math.log(n + 1.0)
    p = np.exp(logp)
    if p[-1] * (n + 1.0) >= tail_tol:
        raise NumericalCheckError(
            f"thermal tail weight {p[-1] * (n + 1.0):.3e} at D = {D} exceeds {tail_tol:.1e}"
        )
    return np.diag(p).astype(complex)


def squeezed_ket(
    D: int, r: float, theta: float = 0.0, boundary_tol: float = 1e-8
) -> NDArray[np.complex128]:
    """S(zeta)|0> with zeta = r e^(i theta), by exponentiating the generator.

    S = exp[(conj(zeta) a^2 - zeta a-dagger^2)/2]. Built without closed-form
    Fock amplitudes so it stays an independent check on the analytic layer.
    """
    if r < 0:
        raise ValidationError("squeezing modulus must be >= 0")
    zeta = r * np.exp(1j * theta)
    a = ladder(D)
    adag = a.conj().T
    S = expm(0.5 * (np.conj(zeta) * (a @ a) - zeta * (adag @ adag)))
    psi = S[:, 0]
    boundary = max(abs(psi[-1]), abs(psi[-2]))
    if boundary >= boundary_tol:
        raise NumericalCheckError(
            f"squeezed boundary amplitude {boundary:.3e} at D = {D} exceeds {boundary_tol:.1e}"
        )
    return psi


def fock_density(
    mode_state, D: int, tail_tol: float = 1e-10, boundary_tol: float = 1e-8
) -> NDArray[np.complex128]:
    """Truncated density matrix for one analytic mode state."""
    if isinstance(mode_state, Vacuum):
        return thermal_density(D, 0.0)
    if isinstance(mode_state, Thermal):
        return thermal_density(D, mode_state.n, tail_tol)
    if isinstance(mode_state, Squeezed):
        psi = squeezed_ket(D, mode_state.r, mode_state.theta, boundary_tol)
        return np.outer(psi, psi.conj())
    raise ValidationError(f"unknown mode state {mode_state!r}")


# --------------------------------------------------------------------------
# pulse-sequence evolution

@dataclass(frozen=True, eq=False)
class SegmentOperators:
    """Unitaries and integrated generators for one [tau - pi - tau - pi] segment.

    v_g, v_e are the window-integrated generators omega tau n -/+ lam eta
    (F a + conj(F) a-dagger); leak is the largest top-level population any
    low Fock state acquires under u_g or u_e.
    """

    dim: int
    u_g: NDArray[np.complex128]
    u_e: NDArray[np.complex128]
    v_g: NDArray[np.complex128]
    v_e: NDArray[np.complex128]
    leak: float


def build_segment(
    sched: PulseSchedule, mode: FieldMode, D: int, leak_tol: float = 1e-8
) -> SegmentOperators:
    """Dense segment unitaries u_g = exp(-i v_e) exp(-i v_g), u_e swapped.

    The pi pulse in the middle of a segment swaps the qubit branch, so the
    field conditioned on starting in g evolves first under v_g, then v_e.
    Raises when any low Fock column leaks population above leak_tol into the
    top level, which is the signal to enlarge D.
    """
    if int(D) != D or D < 8:
        raise ValidationError("segment cutoff must be an integer >= 8")
    D = int(D)
    eta = switching_integral(
        sched.switching, sched.tau, mode.omega, mode.box_side, mode.spatial_dim
    )
    ft = smearing_ft(sched.smearing, mode.k, mode.spatial_dim)
    tm = truncated_mode(D)
    free = mode.omega * sched.tau * tm.number
    coupling = sched.lam * eta * (ft * tm.a + np.conj(ft) * tm.adag)
    v_g = free - coupling
    v_e = free + coupling
    u_g = expm(-1j * v_e) @ expm(-1j * v_g)
    u_e = expm(-1j * v_g) @ expm(-1j * v_e)
    half = D // 2
    leak = max(
        float(np.max(np.abs(u_g[D - 1, :half]) ** 2)),
        float(np.max(np.abs(u_e[D - 1, :half]) ** 2)),
    )
    if leak > leak_tol:
        raise NumericalCheckError(
            f"segment leaks population {leak:.3e} into the top Fock level at D = {D}; "
            "increase the cutoff"
        )
    return SegmentOperators(dim=D, u_g=u_g, u_e=u_e, v_g=v_g, v_e=v_e, leak=leak)


def evolve_pulse_sequence(seg: SegmentOperators, N: int) -> NDArray[np.complex128]:
    """(u_g^dag)^N (u_e)^N, the operator the qubit coherence averages."""
    if int(N) != N or N < 1:
        raise ValidationError("segment count N must be an integer >= 1")
    ug_dag = seg.u_g.conj().T
    return np.linalg.matrix_power(ug_dag, int(N)) @ np.linalg.matrix_power(seg.u_e, int(N))


def _aligned_low_column_distance(
    U: NDArray[np.complex128], target: NDArray[np.complex128]
) -> float:
    """max_j<D/2 of ||U[:, j] - phase * target[:, j]||, phase from the interior.

    The global phase is fixed by the trace of target^dag U over the low
    diagonal; top columns are excluded because a truncated displacement is
    wrong there by construction.
    """
    D = U.shape[0]
    half = D // 2
    overlap = np.einsum("ij,ij->", target[:, :half].conj(), U[:, :half])
    if abs(overlap) < 1e-12:
        raise NumericalCheckError("matrices too far apart to align a global phase")
    phase = overlap / abs(overlap)
    diff = U[:, :half] - phase * target[:, :half]
    return float(np.max(np.linalg.norm(diff, axis=0)))


def _extract_displacement(U: NDArray[np.complex128]) -> complex:
    # <0|D(xi)|0> = e^{-|xi|^2/2}, <1|D(xi)|0> = xi e^{-|xi|^2/2}
    if abs(U[0, 0]) < 1e-12:
        raise NumericalCheckError("vacuum overlap too small to extract a displacement")
    return complex(U[1, 0] / U[0, 0])


@dataclass(frozen=True)
class IdentityReport:
    """Closed form vs brute force for one (schedule, mode) input."""

    xi_closed: complex
    xi_fock: complex
    defect: float
    residual: float
    dim: int
    defect_tol: float
    residual_tol: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.defect_tol and self.residual <= self.residual_tol

    def to_dict(self) -> dict:
        return {
            "xi_closed": [self.xi_closed.real, self.xi_closed.imag],
            "xi_fock": [self.xi_fock.real, self.xi_fock.imag],
            "defect": self.defect,
            "residual": self.residual,
            "D": self.dim,
            "tolerance": self.defect_tol,
            "residual_tolerance": self.residual_tol,
            "passed": self.passed,
        }


def default_cutoff(xi: complex) -> int:
    """Cutoff heuristic D = (4|xi| + 4)^2, floor 16; leak checks still apply."""
    return max(16, math.ceil((4.0 * abs(xi) + 4.0) ** 2))


def verify_displacement_identity(
    sched: PulseSchedule,
    mode: FieldMode,
    D: int | None = None,
    defect_tol: float = 1e-5,
    residual_tol: float = 1e-6,
    leak_tol: float = 1e-8,
) -> IdentityReport:
    """Check that the pulse sequence really is D(xi) with the closed-form xi.

    xi_fock is read off the matrix elements <0|U|0> and <1|U|0>; the residual
    measures how far U is from being any displacement at all (low columns,
    global phase aligned), and raising on it guards against reading a xi off
    a matrix that is not a displacement.
    """
    xi_closed = mode.closed_form_xi(sched)
    if D is None:
        D = default_cutoff(xi_closed)
    seg = build_segment(sched, mode, D, leak_tol=leak_tol)
    U = evolve_pulse_sequence(seg, sched.N)
    xi_fock = _extract_displacement(U)
    residual = _aligned_low_column_distance(U, displacement_operator(seg.dim, xi_fock))
    if residual > residual_tol:
        raise NumericalCheckError(
            f"sequence operator is {residual:.3e} away from a pure displacement "
            f"(tolerance {residual_tol:.1e}) at D = {seg.dim}"
        )
    return IdentityReport(
        xi_closed=xi_closed,
        xi_fock=xi_fock,
        defect=abs(xi_closed - xi_fock),
        residual=residual,
        dim=seg.dim,
        defect_tol=defect_tol,
        residual_tol=residual_tol,
    )


def verify_displacement_composition(x: complex, y: float, N: int, D: int = 40) -> float:
    """Matrix distance for [D(x) e^(iyn)]^N = phase * D(x_N) e^(iNyn).

    x_N = x (1 - e^(iNy)) / (1 - e^(iy)), or N x when y = 0 mod 2pi. Distance
    is taken over the low Fock columns modulo a global phase.
    """
    if int(N) != N or N < 1:
        raise ValidationError("N must be an integer >= 1")
    x = complex(x)
    y = float(y)
    step = displacement_operator(D, x) @ number_rotation(D, y)
    lhs = np.linalg.matrix_power(step, int(N))
    ratio = 1.0 - np.exp(1j * y)
    if abs(ratio) < 1e-12:
        x_total = N * x
    else:
        x_total = x * (1.0 - np.exp(1j * N * y)) / ratio
    rhs = displacement_operator(D, x_total) @ number_rotation(D, N * y)
    return _aligned_low_column_distance(lhs, rhs)


# --------------------------------------------------------------------------
# characteristic-function and qubit oracles

def _single_mode_state(state: GaussianFieldState):
    if state.n_modes != 1:
        raise ValidationError("Fock oracle handles single-mode states only")
    return state.mode_states[0]


def chi_fock(
    state: GaussianFieldState,
    xi: complex,
    D: int,
    tail_tol: float = 1e-10,
    boundary_tol: float = 1e-8,
) -> complex:
    """Tr[rho_D D(xi)] for a single-mode state, everything dense at cutoff D."""
    mode_state = _single_mode_state(state)
    rho = fock_density(mode_state, D, tail_tol, boundary_tol)
    return complex(np.trace(rho @ displacement_operator(D, xi)))


# The qubit algebra is restated here on purpose: the oracle must not import
# its conventions from the module it is checking. Basis order (g, e).
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
_SZ = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)


def _qubit_rotation(theta: float, phi: float) -> NDArray[np.complex128]:
    axis = np.cos(phi) * _SX + np.sin(phi) * _SY
    return np.cos(theta / 2.0) * np.eye(2, dtype=complex) - 1j * np.sin(theta / 2.0) * axis


def joint_bloch_oracle(
    state: GaussianFieldState,
    sched: PulseSchedule,
    mode: FieldMode,
    theta: float,
    D: int,
    phi: float = 0.0,
    tail_tol: float = 1e-10,
    boundary_tol: float = 1e-8,
) -> tuple[float, float, float]:
    """Bloch vector after the full sequence, from the explicit joint evolution.

    Prepares R(theta, phi)|g> x rho_field on the 2D-dimensional joint space,
    applies [pi-pulse * half-segment] four times per segment... precisely,
    S = P F P F with F the branch-conditioned half-segment evolution and P
    the pi pulse, then S^N, then traces out the field. No closed form enters.
    """
    mode_state = _single_mode_state(state)
    seg = build_segment(sched, mode, D)
    rho_f = fock_density(mode_state, seg.dim, tail_tol, boundary_tol)
    q0 = _qubit_rotation(theta, phi) @ np.array([1.0, 0.0], dtype=complex)
    rho = np.kron(np.outer(q0, q0.conj()), rho_f)

    proj_g = np.zeros((2, 2), dtype=complex)
    proj_g[0, 0] = 1.0
    proj_e = np.zeros((2, 2), dtype=complex)
    proj_e[1, 1] = 1.0
    half_g = expm(-1j * seg.v_g)
    half_e = expm(-1j * seg.v_e)
    F = np.kron(proj_g, half_g) + np.kron(proj_e, half_e)
    P = np.kron(_qubit_rotation(np.pi, 0.0), np.eye(seg.dim, dtype=complex))
    S = P @ F @ P @ F
    total = np.linalg.matrix_power(S, sched.N)

    rho = total @ rho @ total.conj().T
    rho_q = np.einsum("imjm->ij", rho.reshape(2, seg.dim, 2, seg.dim))
    return (
        float(np.real(np.trace(rho_q @ _SX))),
        float(np.real(np.trace(rho_q @ _SY))),
        float(np.real(np.trace(rho_q @ _SZ))),
    )


# --------------------------------------------------------------------------
# report-producing suites (consumed by the CLI and the acceptance tests)

def run_displacement_draws(
    n_draws: int,
    D: int = 40,
    seed: int = 0,
    lam_max: float = 0.02,
    N_max: int = 6,
    defect_tol: float = 1e-5,
    residual_tol: float = 1e-6,
) -> list[dict]:
    """Random (lam, tau, N) draws of the closed-form-vs-oracle check.

    omega = 1, L = 2 pi, n = 1, point smearing, constant switching; tau spans
    (0, 2 pi) including the neighbourhood of the removable singularity.
    """
    from .pulse_protocol import Constant, Delta

    if n_draws < 1:
        raise ValidationError("need at least one draw")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    mode = FieldMode(k=1.0, omega=1.0, box_side=2.0 * np.pi, spatial_dim=1)
    reports = []
    for _ in range(int(n_draws)):
        lam = rng.uniform(0.1 * lam_max, lam_max)
        tau = rng.uniform(0.05, 2.0 * np.pi - 0.05)
        N = int(rng.integers(1, N_max + 1))
        sched = PulseSchedule(
            lam=lam, tau=tau, N=N, smearing=Delta(), switching=Constant(1.0)
        )
        rep = verify_displacement_identity(
            sched, mode, D, defect_tol=defect_tol, residual_tol=residual_tol
        )
        reports.append(
            {
                "check": "displacement_identity",
                "inputs": {"lambda": lam, "tau": tau, "N": N},
                **rep.to_dict(),
            }
        )
    return reports


def _chi_report(state: GaussianFieldState, label: str, xi: complex, D: int, tol: float) -> dict:
    defect = abs(chi_fock(state, xi, D) - char_analytic(state, [xi]))
    return {
        "check": "chi_closed_form",
        "inputs": {"state": label, "xi": [xi.real, xi.imag]},
        "D": D,
        "defect": defect,
        "tolerance": tol,
        "passed": bool(defect <= tol),
    }


def run_default_suite(n_draws: int = 20, D: int = 40, seed: int = 0) -> list[dict]:
    """The oracle battery behind `oracle-check`: one report dict per check."""
    from .pulse_protocol import Constant, Delta

    reports = run_displacement_draws(n_draws, D=D, seed=seed)

    for x, y, N, tol in [
        (0.1 + 0.05j, 0.7, 5, 1e-8),
        (0.1 + 0.05j, 0.7, 1, 1e-12),
        (0.0 + 0.0j, 0.3, 4, 1e-12),
    ]:
        defect = verify_displacement_composition(x, y, N, D=D)
        reports.append(
            {
                "check": "displacement_composition",
                "inputs": {"x": [x.real, x.imag], "y": y, "N": N},
                "D": D,
                "defect": defect,
                "tolerance": tol,
                "passed": bool(defect <= tol),
            }
        )

    modes = ModeSet(spatial_dim=1, box_side=2.0 * np.pi, mass=1.0, mode_indices=((0,),))
    vacuum = GaussianFieldState(modes, (Vacuum(),))
    thermal = GaussianFieldState(modes, (Thermal(n=1.0),))
    squeezed = GaussianFieldState(modes, (Squeezed(r=1.0, theta=0.0),))
    reports.append(_chi_report(vacuum, "vacuum", 1.0 + 0.0j, D, 1e-10))
    reports.append(_chi_report(thermal, "thermal n=1", 0.5 + 0.0j, max(D, 60), 1e-8))
    # the squeezed pair distinguishes the two sign conventions: the wrong one
    # swaps the fast and slow decay axes
    reports.append(_chi_report(squeezed, "squeezed r=1", 0.5 + 0.0j, 160, 1e-8))
    reports.append(_chi_report(squeezed, "squeezed r=1", 0.0 + 0.5j, 160, 1e-8))

    sched = PulseSchedule(lam=0.01, tau=1.0, N=2, smearing=Delta(), switching=Constant(1.0))
    mode = FieldMode(k=1.0, omega=1.0, box_side=2.0 * np.pi, spatial_dim=1)
    theta = 0.6 * np.pi
    bloch = joint_bloch_oracle(thermal, sched, mode, theta, D=max(D, 60))
    chi = char_analytic(thermal, [mode.closed_form_xi(sched)])
    expected = (
        math.sin(theta) * chi.imag,
        math.sin(theta) * chi.real,
        -math.cos(theta),
    )
    defect = max(abs(b - e) for b, e in zip(bloch, expected))
    reports.append(
        {
            "check": "joint_qubit_bloch",
            "inputs": {"state": "thermal n=1", "theta": theta, "N": sched.N},
            "D": max(D, 60),
            "defect": defect,
            "tolerance": 1e-6,
            "passed": bool(defect <= 1e-6),
        }
    )
    return reports
