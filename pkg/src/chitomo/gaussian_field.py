"""Mean-zero Gaussian states of a free scalar field on an n-torus.

The field is expanded in discrete modes k = 2*pi*j/L, j in Z^n, with
dispersion omega_k = sqrt(m^2 + |k|^2). Each mode is an independent harmonic
oscillator prepared in one of three mean-zero Gaussian states: vacuum, thermal
with occupation n_k, or squeezed with zeta_k = r_k * exp(i*theta_k).

The central object is the symmetric characteristic function

    chi(xi) = Tr[rho D(xi)],    D(xi) = exp(xi a^dag - conj(xi) a),

which for a product of mean-zero Gaussian modes is the Gaussian

    chi(xi) = prod_k exp(-1/2 v_k^T (Omega V_k Omega^T) v_k),
    v_k = (Re xi_k, Im xi_k)^T,   Omega = [[0, 1], [-1, 0]],

where V_k is the mode's 2x2 covariance matrix in the convention

    V = [[<X^2>, <{X,P}>/2], [<{X,P}>/2, <P^2>]],
    X = a + a^dag,   P = i(a^dag - a),

so the vacuum has V = I, a thermal mode has V = (2 n + 1) I, and a squeezed
mode has

    V = [[cosh 2r - cos(theta) sinh 2r,  -sin(theta) sinh 2r],
         [-sin(theta) sinh 2r,  cosh 2r + cos(theta) sinh 2r]].

The equivalent per-mode exponential closed forms are

    vacuum:   exp(-|xi|^2 / 2)
    thermal:  exp(-(2n+1) |xi|^2 / 2)
    squeezed: exp(-[cosh(2r) |xi|^2 + sinh(2r) Re(e^{i theta} conj(xi)^2)] / 2)

The sign of the sinh term is the one validated against the truncated-Fock
oracle (see fock_oracle.chi_fock); it also follows from the covariance matrix
above. Displacement vectors are plain complex arrays ordered like the mode
list; there is no wrapper class.

Symmetric-ordered moments are generated by Wirtinger derivatives at the
origin,

    <[(a^dag)^p a^q]_S> = (-1)^q d^{p+q} chi / (d xi^p d conj(xi)^q) | 0,

which for these Gaussian chi reduce to Wick pairings of the quadratic
exponent; moments_analytic implements the pairing sum up to p + q = 4.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError

__all__ = [
    "ModeSet",
    "Vacuum",
    "Thermal",
    "Squeezed",
    "GaussianFieldState",
    "covariance",
    "char_analytic",
    "char_closed_form",
    "char_analytic_grid",
    "gaussian_expectation",
    "moments_analytic",
    "n_from_beta",
    "beta_from_n",
    "state_to_dict",
    "state_from_dict",
    "save_state",
    "load_state",
]

OMEGA_2X2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class ModeSet:
    """Discrete modes j in Z^n on a torus of side L with mass m.

    Wave vectors are k = 2*pi*j/L exactly; frequencies omega_k =
    sqrt(m^2 + |k|^2). The massless zero mode is rejected (omega = 0 has no
    oscillator vacuum).
    """

    spatial_dim: int
    box_side: float
    mass: float
    mode_indices: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.spatial_dim not in (1, 2, 3):
            raise ValidationError(f"spatial_dim must be 1, 2 or 3, got {self.spatial_dim}")
        if not self.box_side > 0:
            raise ValidationError("box_side must be positive")
        if self.mass < 0:
            raise ValidationError("mass must be nonnegative")
        idx = tuple(tuple(int(c) for c in j) for j in self.mode_indices)
        object.__setattr__(self, "mode_indices", idx)
        for j in idx:
            if len(j) != self.spatial_dim:
                raise ValidationError(f"mode index {j} has wrong dimension")
        if len(set(idx)) != len(idx):
            raise ValidationError("duplicate mode indices")
        if self.mass == 0 and any(all(c == 0 for c in j) for j in idx):
            raise ValidationError("zero mode with zero mass has omega = 0")

    @property
    def n_modes(self) -> int:
        return len(self.mode_indices)

    @property
    def wavevectors(self) -> NDArray[np.float64]:
        """Array of shape (n_modes, spatial_dim), k = 2*pi*j/L."""
        j = np.array(self.mode_indices, dtype=float).reshape(self.n_modes, self.spatial_dim)
        return 2.0 * np.pi * j / self.box_side

    @property
    def omegas(self) -> NDArray[np.float64]:
        k = self.wavevectors
        return np.sqrt(self.mass**2 + np.sum(k * k, axis=1))


@dataclass(frozen=True)
class Vacuum:
    pass


@dataclass(frozen=True)
class Thermal:
    n: float

    def __post_init__(self) -> None:
        if not self.n >= 0:
            raise ValidationError("thermal occupation must be >= 0")


@dataclass(frozen=True)
class Squeezed:
    r: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not self.r >= 0:
            raise ValidationError("squeezing modulus must be >= 0")
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * np.pi))


ModeState = Union[Vacuum, Thermal, Squeezed]


@dataclass(frozen=True)
class GaussianFieldState:
    """Product of independent mean-zero Gaussian modes over a ModeSet."""

    modes: ModeSet
    mode_states: tuple[ModeState, ...] = field(default=())

    def __post_init__(self) -> None:
        states = tuple(self.mode_states) if self.mode_states is not None else ()
        if not states:
            states = tuple(Vacuum() for _ in range(self.modes.n_modes))
        object.__setattr__(self, "mode_states", states)
        if len(states) != self.modes.n_modes:
            raise ValidationError(
                f"{len(states)} mode states for {self.modes.n_modes} modes"
            )
        for s in states:
            if not isinstance(s, (Vacuum, Thermal, Squeezed)):
                raise ValidationError(f"unknown mode state {s!r}")

    @property
    def n_modes(self) -> int:
        return self.modes.n_modes


def _check_mode(state: GaussianFieldState, mode: int) -> int:
    mode = int(mode)
    if not 0 <= mode < state.n_modes:
        raise ValidationError(f"mode index {mode} out of range 0..{state.n_modes - 1}")
    return mode


def covariance(state: GaussianFieldState, mode: int) -> NDArray[np.float64]:
    """2x2 covariance matrix V of one mode.

    Vacuum gives the identity, thermal (2n+1)*I, squeezed the closed form in
    the module docstring. det V >= 1 always; equality for pure modes.
    """
    s = state.mode_states[_check_mode(state, mode)]
    if isinstance(s, Vacuum):
        return np.eye(2)
    if isinstance(s, Thermal):
        return (2.0 * s.n + 1.0) * np.eye(2)
    c, sh = np.cosh(2.0 * s.r), np.sinh(2.0 * s.r)
    ct, st = np.cos(s.theta), np.sin(s.theta)
    return np.array([[c - ct * sh, -st * sh], [-st * sh, c + ct * sh]])


def _quadratic_form(state: GaussianFieldState, mode: int) -> NDArray[np.float64]:
    """G = Omega V Omega^T, the matrix acting on (Re xi, Im xi)."""
    V = covariance(state, mode)
    return OMEGA_2X2 @ V @ OMEGA_2X2.T


def _as_xi_vector(state: GaussianFieldState, xi) -> NDArray[np.complex128]:
    vec = np.atleast_1d(np.asarray(xi, dtype=complex))
    if vec.ndim != 1 or vec.size != state.n_modes:
        raise ValidationError(
            f"displacement vector has {vec.size} entries for {state.n_modes} modes"
        )
    if not np.all(np.isfinite(vec)):
        raise ValidationError("displacement vector contains non-finite entries")
    return vec


def char_analytic(state: GaussianFieldState, xi) -> complex:
    """chi(xi) via the covariance quadratic form (canonical route).

    xi is a complex scalar (single mode) or a length-n_modes sequence.
    """
    vec = _as_xi_vector(state, xi)
    expo = 0.0
    for k in range(state.n_modes):
        G = _quadratic_form(state, k)
        v = np.array([vec[k].real, vec[k].imag])
        expo += -0.5 * float(v @ G @ v)
    return complex(np.exp(expo))


def char_closed_form(state: GaussianFieldState, xi) -> complex:
    """chi(xi) via the per-mode exponential closed forms (cross-check route)."""
    vec = _as_xi_vector(state, xi)
    out = 1.0 + 0.0j
    for k, s in enumerate(state.mode_states):
        z = vec[k]
        a2 = abs(z) ** 2
        if isinstance(s, Vacuum):
            out *= np.exp(-0.5 * a2)
        elif isinstance(s, Thermal):
            out *= np.exp(-0.5 * (2.0 * s.n + 1.0) * a2)
        else:
            q = np.cosh(2.0 * s.r) * a2 + np.sinh(2.0 * s.r) * (
                np.exp(1j * s.theta) * np.conj(z) ** 2
            ).real
            out *= np.exp(-0.5 * q)
    return complex(out)


def char_analytic_grid(
    state: GaussianFieldState, axes: Sequence[NDArray[np.float64]]
) -> NDArray[np.complex128]:
    """Vectorized chi over a separable grid.

    axes holds 2*n_modes 1-D arrays ordered (re_0, im_0, re_1, im_1, ...);
    the result has shape (len(re_0), len(im_0), ...).
    """
    if len(axes) != 2 * state.n_modes:
        raise ValidationError(
            f"{len(axes)} axes for {state.n_modes} modes (need 2 per mode)"
        )
    shape = tuple(len(a) for a in axes)
    expo = np.zeros(shape)
    for k in range(state.n_modes):
        G = _quadratic_form(state, k)
        x = np.asarray(axes[2 * k], dtype=float)
        y = np.asarray(axes[2 * k + 1], dtype=float)
        e2 = -0.5 * (
            G[0, 0] * x[:, None] ** 2
            + 2.0 * G[0, 1] * x[:, None] * y[None, :]
            + G[1, 1] * y[None, :] ** 2
        )
        new_shape = [1] * (2 * state.n_modes)
        new_shape[2 * k] = len(x)
        new_shape[2 * k + 1] = len(y)
        expo += e2.reshape(new_shape)
    return np.exp(expo).astype(complex)


def gaussian_expectation(
    state: GaussianFieldState, terms: Iterable[tuple[int, float, float]]
) -> float:
    """Second moment <O^2> of a linear quadrature combination.

    The operator is described as O = sum over terms of
    c_x * X_k + c_p * P_k with X = a + a^dag and P = i(a^dag - a), each term a
    (mode, c_x, c_p) triple. Modes are independent and mean zero, so
    <O^2> = sum_k c_k^T V_k c_k. Together with <exp(-iO)> = exp(-<O^2>/2)
    this fixes every Gaussian expectation used elsewhere.
    """
    coeffs: dict[int, NDArray[np.float64]] = {}
    got_any = False
    for term in terms:
        try:
            mode, cx, cp = term
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                "operator description must be (mode, c_x, c_p) triples"
            ) from exc
        mode = _check_mode(state, mode)
        c = coeffs.setdefault(mode, np.zeros(2))
        c += np.array([float(cx), float(cp)])
        got_any = True
    if not got_any:
        raise ValidationError("empty operator description")
    total = 0.0
    for mode, c in coeffs.items():
        V = covariance(state, mode)
        total += float(c @ V @ c)
    return total


def _exponent_coeffs(s: ModeState) -> tuple[float, complex, complex]:
    """(A, B, C) of the single-mode exponent chi = exp(-Q/2),
    Q = A xi conj(xi) + B xi^2 + C conj(xi)^2."""
    if isinstance(s, Vacuum):
        return 1.0, 0.0j, 0.0j
    if isinstance(s, Thermal):
        return 2.0 * s.n + 1.0, 0.0j, 0.0j
    B = 0.5 * np.sinh(2.0 * s.r) * np.exp(-1j * s.theta)
    return float(np.cosh(2.0 * s.r)), complex(B), complex(np.conj(B))


def _pairings(slots: list[str]) -> Iterable[list[tuple[str, str]]]:
    if not slots:
        yield []
        return
    first, rest = slots[0], slots[1:]
    for i in range(len(rest)):
        pair = (first, rest[i])
        remaining = rest[:i] + rest[i + 1 :]
        for tail in _pairings(remaining):
            yield [pair] + tail


def moments_analytic(state: GaussianFieldState, mode: int, p: int, q: int) -> complex:
    """Symmetric-ordered moment <[(a^dag)^p a^q]_S> of one mode, p + q <= 4.

    Implemented as the Wick pairing sum over the derivative slots of the
    Gaussian exponent: each (xi, xi) pair contributes -B, (xi, conj xi)
    contributes -A/2, (conj xi, conj xi) contributes -C, and the moment is
    (-1)^q times the sum over perfect matchings.
    """
    mode = _check_mode(state, mode)
    p, q = int(p), int(q)
    if p < 0 or q < 0:
        raise ValidationError("moment orders must be nonnegative")
    if p + q > 4:
        raise ValidationError(f"moment order p + q = {p + q} beyond the implemented table (4)")
    if p + q == 0:
        return 1.0 + 0.0j
    if (p + q) % 2 == 1:
        return 0.0 + 0.0j
    A, B, C = _exponent_coeffs(state.mode_states[mode])
    pair_value = {
        ("d", "d"): -B,
        ("d", "c"): -A / 2.0,
        ("c", "d"): -A / 2.0,
        ("c", "c"): -C,
    }
    slots = ["d"] * p + ["c"] * q
    total = 0.0j
    for matching in _pairings(slots):
        prod = 1.0 + 0.0j
        for pair in matching:
            prod *= pair_value[pair]
        total += prod
    return complex((-1.0) ** q * total)


def n_from_beta(beta: float, omega: float) -> float:
    """Bose occupation n = 1/(exp(beta*omega) - 1)."""
    if beta <= 0 or omega <= 0:
        raise ValidationError("beta and omega must be positive")
    return 1.0 / math.expm1(beta * omega)


def beta_from_n(n: float, omega: float) -> float:
    if n <= 0 or omega <= 0:
        raise ValidationError("n and omega must be positive")
    return math.log1p(1.0 / n) / omega


_KIND_NAMES = {Vacuum: "vacuum", Thermal: "thermal", Squeezed: "squeezed"}


def state_to_dict(state: GaussianFieldState) -> dict:
    modes = []
    for j, s in zip(state.modes.mode_indices, state.mode_states):
        if isinstance(s, Vacuum):
            params: dict = {}
        elif isinstance(s, Thermal):
            params = {"n": s.n}
        else:
            params = {"r": s.r, "theta": s.theta}
        modes.append({"j": list(j), "kind": _KIND_NAMES[type(s)], "params": params})
    return {
        "spatial_dim": state.modes.spatial_dim,
        "box_side": state.modes.box_side,
        "mass": state.modes.mass,
        "modes": modes,
    }


def state_from_dict(doc: dict) -> GaussianFieldState:
    try:
        entries = doc["modes"]
        modeset = ModeSet(
            spatial_dim=int(doc["spatial_dim"]),
            box_side=float(doc["box_side"]),
            mass=float(doc["mass"]),
            mode_indices=tuple(tuple(int(c) for c in e["j"]) for e in entries),
        )
    except KeyError as exc:
        raise ValidationError(f"state document missing field {exc}") from exc
    states: list[ModeState] = []
    for e in entries:
        kind = e.get("kind", "vacuum")
        params = e.get("params", {})
        if kind == "vacuum":
            states.append(Vacuum())
        elif kind == "thermal":
            states.append(Thermal(n=float(params["n"])))
        elif kind == "squeezed":
            states.append(Squeezed(r=float(params["r"]), theta=float(params.get("theta", 0.0))))
        else:
            raise ValidationError(f"unknown mode kind {kind!r}")
    return GaussianFieldState(modes=modeset, mode_states=tuple(states))


def save_state(state: GaussianFieldState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_state(path) -> GaussianFieldState:
    with open(path, encoding="utf-8") as fh:
        return state_from_dict(json.load(fh))
