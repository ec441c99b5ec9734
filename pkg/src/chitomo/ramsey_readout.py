"""Auxiliary-qubit preparation, encoding and Pauli readout.

After the rotation R(theta, phi) and the 2N-pulse sequence, the reduced qubit
state is

    rho_q = 1/2 [ 1 - cos(theta) sigma_z
                  + sin(theta) (Im[chi] sigma_x + Re[chi] sigma_y) ],

so the Bloch vector is (sin(theta) Im chi, sin(theta) Re chi, -cos(theta))
and chi is read out as (<sigma_y> + i <sigma_x>) / sin(theta). The Pauli
matrices here are the standard ones for the basis ordered (excited, ground);
written in the (ground, excited) ordering used internally, sigma_z = diag(-1,
+1) and sigma_y = [[0, i], [-i, 0]]. This is the convention under which the
formula above reproduces an explicit joint qubit-field simulation (see
fock_oracle).

Finite-shot mode draws M independent +-1 outcomes per basis with
P(+1) = (1 + <sigma>)/2. The generator is counter-based (Philox) and
stream-split per (point, basis), so results are reproducible under any
parallel execution order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError
from .gaussian_field import GaussianFieldState, char_analytic

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "QubitState",
    "ShotResult",
    "ReadoutRecord",
    "rotate",
    "final_qubit_state",
    "bloch_expectation",
    "shot_rng",
    "sample_shots",
    "estimate_chi",
    "required_shots",
    "run_readout_scan",
    "records_table",
]

# Basis ordering (|g>, |e>); sigma_z|g> = -|g>.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)

_BASIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def rotate(theta: float, phi: float = 0.0) -> NDArray[np.complex128]:
    """R(theta, phi) = cos(theta/2) I - i sin(theta/2) (cos phi sigma_x
    + sin phi sigma_y). Applied to |g> with phi = 0 this gives
    cos(theta/2)|g> - i sin(theta/2)|e>."""
    return np.cos(theta / 2.0) * np.eye(2, dtype=complex) - 1j * np.sin(theta / 2.0) * (
        np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y
    )


@dataclass(frozen=True)
class QubitState:
    """Qubit state as a Bloch vector; rho = (1 + b . sigma)/2."""

    bx: float
    by: float
    bz: float

    def __post_init__(self) -> None:
        if self.norm > 1.0 + 1e-12:
            raise ValidationError(f"Bloch vector norm {self.norm} exceeds 1")

    @property
    def norm(self) -> float:
        return math.sqrt(self.bx**2 + self.by**2 + self.bz**2)

    def density_matrix(self) -> NDArray[np.complex128]:
        return 0.5 * (
            np.eye(2, dtype=complex)
            + self.bx * SIGMA_X
            + self.by * SIGMA_Y
            + self.bz * SIGMA_Z
        )


def final_qubit_state(theta: float, chi: complex) -> QubitState:
    """Qubit state after the full sequence, given chi(xi) of the field.

    Bloch vector (sin th Im chi, sin th Re chi, -cos th); purity
    |b| = sqrt(cos^2 th + sin^2 th |chi|^2) <= 1 with equality iff |chi| = 1.
    """
    chi = complex(chi)
    if abs(chi) > 1.0 + 1e-9:
        raise ValidationError(f"|chi| = {abs(chi)} > 1 is not a characteristic value")
    s = math.sin(theta)
    return QubitState(bx=s * chi.imag, by=s * chi.real, bz=-math.cos(theta))


def bloch_expectation(qs: QubitState, basis: str) -> float:
    """Exact <sigma_basis> for basis "x", "y" or "z"."""
    try:
        return {"x": qs.bx, "y": qs.by, "z": qs.bz}[basis]
    except KeyError:
        raise ValidationError(f"unknown basis {basis!r}") from None


def shot_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for a named stream.

    Streams derived from the same seed but different (point, basis, ...)
    indices are statistically independent, so grid points can be sampled in
    any order or in parallel without changing results.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


class ShotResult(NamedTuple):
    estimate: float
    stderr: float


def sample_shots(qs: QubitState, basis: str, M: int, rng) -> ShotResult:
    """Sample mean of M projective +-1 measurements of sigma_basis.

    P(+1) = (1 + <sigma>)/2; returns the sample mean and its binomial
    standard error sqrt((1 - mean^2)/M). rng is a Generator or an int seed.
    """
    if int(M) != M or M < 1:
        raise ValidationError("shot count M must be an integer >= 1 in sampling mode")
    M = int(M)
    if not isinstance(rng, np.random.Generator):
        rng = shot_rng(int(rng))
    b = bloch_expectation(qs, basis)
    p = min(max((1.0 + b) / 2.0, 0.0), 1.0)
    k = int(rng.binomial(M, p))
    est = 2.0 * k / M - 1.0
    stderr = math.sqrt(max(1.0 - est * est, 0.0) / M)
    return ShotResult(estimate=est, stderr=stderr)


def _estimate_value(rec) -> float:
    return float(getattr(rec, "estimate", rec))


def estimate_chi(rec_x, rec_y, theta: float) -> complex:
    """chi estimate (est_sy + i est_sx)/sin(theta) from X- and Y-basis reads.

    Accepts ShotResult or plain floats. theta with sin(theta) = 0 encodes no
    field information on the qubit and is rejected.
    """
    s = math.sin(theta)
    if s == 0.0:
        raise ValidationError("sin(theta) = 0: protocol encodes no information")
    return (_estimate_value(rec_y) + 1j * _estimate_value(rec_x)) / s


def required_shots(target_error: float) -> int:
    """Per-basis shot count for a target chi error, M = ceil(2 / Delta^2).

    The constant 2 is the worst case of two unit-variance Pauli estimators
    entering quadratically, Delta_chi^2 = Delta_sx^2 + Delta_sy^2.
    """
    if not target_error > 0:
        raise ValidationError("target error must be positive")
    return math.ceil(2.0 / target_error**2)


@dataclass(frozen=True)
class ReadoutRecord:
    """One (xi, theta) readout: Pauli estimates and the implied chi."""

    xi: NDArray[np.complex128]
    theta: float
    shots: int
    est_sx: float
    est_sy: float
    stderr_sx: float
    stderr_sy: float
    chi_est: complex
    seed: int


def _readout_point(
    state: GaussianFieldState,
    xi,
    theta: float,
    shots: int,
    seed: int,
    index: int,
) -> ReadoutRecord:
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    chi = char_analytic(state, xi)
    qs = final_qubit_state(theta, chi)
    if shots == 0:
        sx = ShotResult(bloch_expectation(qs, "x"), 0.0)
        sy = ShotResult(bloch_expectation(qs, "y"), 0.0)
    else:
        sx = sample_shots(qs, "x", shots, shot_rng(seed, index, 0))
        sy = sample_shots(qs, "y", shots, shot_rng(seed, index, 1))
    return ReadoutRecord(
        xi=xi,
        theta=theta,
        shots=int(shots),
        est_sx=sx.estimate,
        est_sy=sy.estimate,
        stderr_sx=sx.stderr,
        stderr_sy=sy.stderr,
        chi_est=estimate_chi(sx, sy, theta),
        seed=int(seed),
    )


def run_readout_scan(
    state: GaussianFieldState,
    xi_points: Sequence,
    theta: float,
    shots: int = 0,
    seed: int = 0,
    threads: int = 1,
) -> list[ReadoutRecord]:
    """Readout records for a sequence of displacement points.

    shots = 0 means exact mode. Each point uses its own RNG streams keyed by
    (seed, point index, basis), so the result is independent of threads and
    of evaluation order; records are returned in point order.
    """
    if shots < 0:
        raise ValidationError("shots must be >= 0")
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    points = list(xi_points)
    if threads == 1 or len(points) < 2:
        return [
            _readout_point(state, xi, theta, shots, seed, i)
            for i, xi in enumerate(points)
        ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_readout_point, state, xi, theta, shots, seed, i)
            for i, xi in enumerate(points)
        ]
        return [f.result() for f in futures]


def records_table(records: Sequence[ReadoutRecord]) -> tuple[list[str], list[list]]:
    """Flatten records to (columns, rows) for the readout-log CSV."""
    if not records:
        raise ValidationError("no records")
    n_modes = len(records[0].xi)
    if n_modes == 1:
        xi_cols = ["re_xi", "im_xi"]
    else:
        xi_cols = []
        for k in range(n_modes):
            xi_cols += [f"re_xi{k}", f"im_xi{k}"]
    columns = xi_cols + ["theta", "M", "est_sx", "est_sy", "re_chi", "im_chi", "seed"]
    rows = []
    for r in records:
        row: list = []
        for k in range(n_modes):
            row += [r.xi[k].real, r.xi[k].imag]
        row += [
            r.theta,
            r.shots,
            r.est_sx,
            r.est_sy,
            r.chi_est.real,
            r.chi_est.imag,
            r.seed,
        ]
        rows.append(row)
    return columns, rows
