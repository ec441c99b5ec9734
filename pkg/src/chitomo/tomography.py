"""Grid assembly, Wigner reconstruction, moment extraction and Gaussian fits.

The characteristic function lives on uniform symmetric grids, one (Re xi,
Im xi) axis pair per mode, with the origin always a grid point. Unmeasured
points are NaN; hermitian_fill completes a half grid through chi(-xi) =
conj chi(xi) and makes the symmetry exact on the stored array.

The quasiprobability is the Fourier transform

    W(alpha) = integral d^2n xi / (2 pi)^2n  e^{xi+ alpha + alpha+ xi} chi(xi),

whose exponent is the pure phase 2i sum_m Re(conj(xi_m) alpha_m). Under this
kernel the transform of a normalized chi integrates to 4^-n rather than 1;
that constant is recorded on the WignerGrid instead of being silently
rescaled away, and the inverse transform carries the compensating 4^n.

Moments of symmetric-ordered operator products come from Wirtinger
derivatives at the origin,

    <[(a+)^p a^q]_S> = (-1)^q  d^{p+q} chi / d xi^p d conj(xi)^q | 0,

evaluated by central finite differences with optional Richardson
extrapolation. For sampled grids the per-point binomial errors are pushed
through the stencil coefficients to an error bar on the moment.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import NumericalCheckError, ValidationError
from .gaussian_field import (
    GaussianFieldState,
    ModeSet,
    Squeezed,
    Thermal,
    Vacuum,
    char_analytic_grid,
)
from .ramsey_readout import run_readout_scan

__all__ = [
    "ChiGrid",
    "WignerGrid",
    "GaussianFit",
    "grid_axis",
    "chi_grid_from_state",
    "sampled_chi_grid",
    "hermitian_fill",
    "wigner_transform",
    "inverse_wigner_transform",
    "grid_integral",
    "moments_fd",
    "gaussian_fit",
]


def grid_axis(extent: float, points: int) -> NDArray[np.float64]:
    """Symmetric axis [-extent, extent]; even counts are bumped to odd so the
    origin is always a grid point (exact 0.0).

    Built by mirroring the positive half, so ax == -ax[::-1] bitwise; paired
    with the even quadratic forms this makes Hermitian symmetry of exact
    grids exact in floating point too, not just up to rounding.
    """
    if not extent > 0:
        raise ValidationError("axis extent must be positive")
    points = int(points)
    if points < 3:
        raise ValidationError("axis needs at least 3 points")
    if points % 2 == 0:
        points += 1
    half = np.linspace(0.0, extent, points // 2 + 1)
    return np.concatenate((-half[:0:-1], half))


def _check_axes(axes: Sequence[np.ndarray]) -> tuple[NDArray[np.float64], ...]:
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    if len(axes) < 2 or len(axes) % 2 != 0:
        raise ValidationError("need one (Re xi, Im xi) axis pair per mode")
    for a in axes:
        if a.ndim != 1 or a.size < 3 or a.size % 2 == 0:
            raise ValidationError("axes must be 1-D, odd-length, >= 3 points")
        if np.any(np.diff(a) <= 0):
            raise ValidationError("axes must be strictly increasing")
        if a[a.size // 2] != 0.0:
            raise ValidationError("axes must contain the origin at the center")
    return axes


@dataclass(frozen=True, eq=False)
class ChiGrid:
    """chi values on a uniform symmetric grid; NaN marks unmeasured points.

    axes holds (Re xi_0, Im xi_0, Re xi_1, ...); values has one axis per
    entry, same order. provenance is "exact", "sampled" or "reconstructed";
    sampled grids carry per-point combined standard errors.
    """

    axes: tuple[NDArray[np.float64], ...]
    values: NDArray[np.complex128]
    provenance: str = "exact"
    shots: int = 0
    stderr: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        axes = _check_axes(self.axes)
        object.__setattr__(self, "axes", axes)
        values = np.asarray(self.values, dtype=complex)
        shape = tuple(a.size for a in axes)
        if values.shape != shape:
            raise ValidationError(f"values shape {values.shape} does not match axes {shape}")
        object.__setattr__(self, "values", values)
        if self.stderr is not None:
            err = np.asarray(self.stderr, dtype=float)
            if err.shape != shape:
                raise ValidationError("stderr shape does not match the grid")
            object.__setattr__(self, "stderr", err)

    @property
    def n_modes(self) -> int:
        return len(self.axes) // 2

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def origin_value(self) -> complex:
        center = tuple(a.size // 2 for a in self.axes)
        return complex(self.values[center])


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Real quasiprobability samples on quadrature axes (x_0, p_0, x_1, ...).

    normalization records the value the grid integral should take under the
    adopted Fourier kernel (4^-n times chi(0)); imag_residual is the largest
    imaginary part discarded when realifying the transform.
    """

    axes: tuple[NDArray[np.float64], ...]
    values: NDArray[np.float64]
    normalization: float
    imag_residual: float = 0.0

    def __post_init__(self) -> None:
        axes = _check_axes(self.axes)
        object.__setattr__(self, "axes", axes)
        values = np.asarray(self.values, dtype=float)
        shape = tuple(a.size for a in axes)
        if values.shape != shape:
            raise ValidationError(f"values shape {values.shape} does not match axes {shape}")
        object.__setattr__(self, "values", values)

    @property
    def n_modes(self) -> int:
        return len(self.axes) // 2

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) for a in self.axes)


def grid_integral(grid) -> float:
    """Riemann cell sum over the full grid (the same quadrature the discrete
    transform uses)."""
    cell = math.prod(float(a[1] - a[0]) for a in grid.axes)
    return float(np.sum(np.real(grid.values)) * cell)


# --------------------------------------------------------------------------
# grid construction

def _default_axes(state: GaussianFieldState, extent: float = 6.0, points: int = 129):
    return tuple(grid_axis(extent, points) for _ in range(2 * state.n_modes))


def chi_grid_from_state(
    state: GaussianFieldState, axes: Sequence[np.ndarray] | None = None
) -> ChiGrid:
    """Exact chi on a grid, straight from the closed form."""
    axes = _default_axes(state) if axes is None else _check_axes(axes)
    if len(axes) != 2 * state.n_modes:
        raise ValidationError("axis count does not match the state's mode count")
    return ChiGrid(axes=axes, values=char_analytic_grid(state, axes), provenance="exact")


def _half_space_mask(axes: Sequence[np.ndarray]) -> NDArray[np.bool_]:
    """True on the canonical half: first nonzero coordinate positive, plus 0."""
    shape = tuple(a.size for a in axes)
    mask = np.zeros(shape, dtype=bool)
    for idx in np.ndindex(shape):
        coords = [axes[d][i] for d, i in enumerate(idx)]
        first = next((c for c in coords if c != 0.0), 0.0)
        mask[idx] = first >= 0.0
    return mask


def sampled_chi_grid(
    state: GaussianFieldState,
    axes: Sequence[np.ndarray] | None = None,
    theta: float = np.pi / 2,
    shots: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    half: bool = False,
) -> ChiGrid:
    """Simulated finite-shot chi grid via the qubit readout.

    Each grid point is an independent two-basis measurement; stderr combines
    the two binomial errors, sqrt(sx^2 + sy^2)/|sin theta|. With half=True
    only the canonical half-space is measured (NaN elsewhere), ready for
    hermitian_fill.
    """
    axes = _default_axes(state) if axes is None else _check_axes(axes)
    if len(axes) != 2 * state.n_modes:
        raise ValidationError("axis count does not match the state's mode count")
    shape = tuple(a.size for a in axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    xi_flat = np.stack(
        [mesh[2 * m] + 1j * mesh[2 * m + 1] for m in range(state.n_modes)], axis=-1
    ).reshape(-1, state.n_modes)
    measured = (
        _half_space_mask(axes).reshape(-1)
        if half
        else np.ones(xi_flat.shape[0], dtype=bool)
    )
    records = run_readout_scan(
        state, [xi_flat[i] for i in np.flatnonzero(measured)],
        theta=theta, shots=shots, seed=seed, threads=threads,
    )
    values = np.full(xi_flat.shape[0], np.nan + 0j)
    stderr = np.full(xi_flat.shape[0], np.nan)
    s = abs(math.sin(theta))
    for slot, rec in zip(np.flatnonzero(measured), records):
        values[slot] = rec.chi_est
        stderr[slot] = math.sqrt(rec.stderr_sx**2 + rec.stderr_sy**2) / s
    return ChiGrid(
        axes=axes,
        values=values.reshape(shape),
        provenance="sampled",
        shots=int(shots),
        stderr=stderr.reshape(shape),
    )


def hermitian_fill(grid: ChiGrid) -> ChiGrid:
    """Complete a grid through chi(-xi) = conj chi(xi), exactly.

    Points measured on both halves are averaged as (chi(xi) + conj
    chi(-xi))/2, which makes the stored array Hermitian to the last bit.
    Fails if some point is missing from both halves.
    """
    rev = tuple(slice(None, None, -1) for _ in grid.axes)
    partner = np.conj(grid.values[rev])
    have_v = ~np.isnan(grid.values)
    have_p = ~np.isnan(partner)
    if not np.all(have_v | have_p):
        raise ValidationError("grid is not a centrally complete half-space")
    values = np.where(
        have_v & have_p,
        0.5 * (np.where(have_v, grid.values, 0) + np.where(have_p, partner, 0)),
        np.where(have_v, grid.values, partner),
    )
    stderr = None
    if grid.stderr is not None:
        err_p = grid.stderr[rev]
        both = have_v & have_p
        stderr = np.where(
            both,
            0.5 * np.sqrt(np.where(both, grid.stderr**2 + err_p**2, 0)),
            np.where(have_v, grid.stderr, err_p),
        )
    return ChiGrid(
        axes=grid.axes,
        values=values,
        provenance=grid.provenance,
        shots=grid.shots,
        stderr=stderr,
    )


# --------------------------------------------------------------------------
# Wigner transform and its inverse

def _boundary_max(values: np.ndarray) -> float:
    worst = 0.0
    for d in range(values.ndim):
        face = [slice(None)] * values.ndim
        for edge in (0, -1):
            face[d] = edge
            worst = max(worst, float(np.max(np.abs(values[tuple(face)]))))
    return worst


def _dual_axis(xi_axis: np.ndarray) -> NDArray[np.float64]:
    # half the DFT Nyquist extent; the factor 2 in the kernel phase doubles
    # the effective frequency of each alpha
    step = float(xi_axis[1] - xi_axis[0])
    return grid_axis(np.pi / (2.0 * step), xi_axis.size)


def wigner_transform(
    grid: ChiGrid,
    alpha_axes: Sequence[np.ndarray] | None = None,
    boundary_tol: float = 1e-6,
) -> WignerGrid:
    """Discrete Fourier transform of chi to the quasiprobability W.

    The kernel is exp[2i sum_m (Re xi_m x_m + Im xi_m p_m)] with measure
    d^2n xi/(2 pi)^2n. Refuses grids whose chi has not decayed below
    boundary_tol at the edges (aliasing). One or two modes.
    """
    if grid.n_modes > 2:
        raise ValidationError("transform supports one or two modes")
    if np.any(np.isnan(grid.values)):
        raise ValidationError("grid has unmeasured points; hermitian_fill it first")
    decay = _boundary_max(grid.values)
    if decay > boundary_tol:
        raise NumericalCheckError(
            f"|chi| = {decay:.3e} at the grid boundary exceeds {boundary_tol:.1e}; "
            "enlarge the xi extent"
        )
    if alpha_axes is None:
        alpha_axes = tuple(_dual_axis(a) for a in grid.axes)
    else:
        alpha_axes = _check_axes(alpha_axes)
        if len(alpha_axes) != len(grid.axes):
            raise ValidationError("alpha axis count must match the chi grid")

    out = grid.values
    for xi_ax, al_ax in zip(grid.axes, alpha_axes):
        step = float(xi_ax[1] - xi_ax[0])
        kernel = np.exp(2j * np.outer(al_ax, xi_ax)) * (step / (2.0 * np.pi))
        out = np.tensordot(out, kernel, axes=([0], [1]))
    imag_residual = float(np.max(np.abs(out.imag)))
    return WignerGrid(
        axes=tuple(alpha_axes),
        values=out.real,
        normalization=float(4.0 ** (-grid.n_modes) * np.real(grid.origin_value)),
        imag_residual=imag_residual,
    )


def inverse_wigner_transform(
    wgrid: WignerGrid, xi_axes: Sequence[np.ndarray] | None = None
) -> ChiGrid:
    """chi(xi) = 4^n integral d^2n alpha exp[-2i sum Re(conj(xi) alpha)] W."""
    if wgrid.n_modes > 2:
        raise ValidationError("transform supports one or two modes")
    if xi_axes is None:
        xi_axes = tuple(_dual_axis(a) for a in wgrid.axes)
    else:
        xi_axes = _check_axes(xi_axes)
        if len(xi_axes) != len(wgrid.axes):
            raise ValidationError("xi axis count must match the Wigner grid")
    out = wgrid.values.astype(complex)
    for al_ax, xi_ax in zip(wgrid.axes, xi_axes):
        step = float(al_ax[1] - al_ax[0])
        kernel = np.exp(-2j * np.outer(xi_ax, al_ax)) * (2.0 * step)
        out = np.tensordot(out, kernel, axes=([0], [1]))
    return ChiGrid(axes=tuple(xi_axes), values=out, provenance="reconstructed")


# --------------------------------------------------------------------------
# symmetric-ordered moments by finite differences

# second-order central stencils, (offset, coefficient), divide by h^order
_STENCILS: dict[int, tuple[tuple[int, float], ...]] = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def _node_coefficients(p: int, q: int, h: float) -> dict[tuple[int, int], complex]:
    """Stencil for d^{p+q} / d xi^p d conj(xi)^q at 0, as {(ix, iy): coeff}.

    Wirtinger: d/dxi = (d/dx - i d/dy)/2, d/dconj(xi) = (d/dx + i d/dy)/2;
    expanding binomially gives mixed (x, y) partials of total order p + q,
    each realized as an outer product of 1-D central stencils.
    """
    nodes: dict[tuple[int, int], complex] = {}
    scale = 0.5 ** (p + q) / h ** (p + q)
    for i in range(p + 1):
        for j in range(q + 1):
            coeff = (
                math.comb(p, i)
                * math.comb(q, j)
                * (-1j) ** (p - i)
                * (1j) ** (q - j)
                * scale
            )
            for ox, cx in _STENCILS[i + j]:
                for oy, cy in _STENCILS[(p - i) + (q - j)]:
                    key = (ox, oy)
                    nodes[key] = nodes.get(key, 0.0) + coeff * cx * cy
    return nodes


def _combined_nodes(p: int, q: int, h: float, richardson: bool):
    """Node map on the h/2 lattice; Richardson combines (4 A(h/2) - A(h))/3."""
    if not richardson:
        return {(2 * ox, 2 * oy): c for (ox, oy), c in _node_coefficients(p, q, h).items()}
    coarse = _node_coefficients(p, q, h)
    fine = _node_coefficients(p, q, h / 2.0)
    nodes: dict[tuple[int, int], complex] = {}
    for (ox, oy), c in fine.items():
        nodes[(ox, oy)] = nodes.get((ox, oy), 0.0) + 4.0 * c / 3.0
    for (ox, oy), c in coarse.items():
        key = (2 * ox, 2 * oy)
        nodes[key] = nodes.get(key, 0.0) - c / 3.0
    return nodes


def moments_fd(
    chi_source,
    mode: int,
    p: int,
    q: int,
    h: float | None = None,
    richardson: bool = True,
    with_error: bool = False,
):
    """Symmetric-ordered moment <[(a+)^p a^q]_S> for one mode, p + q <= 4.

    chi_source is either a callable chi(xi: complex) restricted to the chosen
    mode's plane, or a ChiGrid (other modes held at the origin). Grid sources
    need h to be an even multiple of the step (default 2 steps) so that every
    stencil node, including Richardson half-steps, lands on a grid point.
    Sampled grids propagate their binomial errors through the stencil; a
    warning is raised when the moment is smaller than its error bar. With
    with_error=True returns (value, error) instead of the bare value.
    """
    if p < 0 or q < 0 or p + q > 4:
        raise ValidationError("orders must be nonnegative with p + q <= 4")
    mode = int(mode)

    if callable(chi_source):
        if mode != 0:
            raise ValidationError("callable sources are single-plane; use mode = 0")
        if h is None:
            h = 0.01
        read = lambda ox, oy: complex(chi_source(complex(ox * h / 2.0, oy * h / 2.0)))
        err_at = None
    elif isinstance(chi_source, ChiGrid):
        if not 0 <= mode < chi_source.n_modes:
            raise ValidationError(f"grid has no mode {mode}")
        ax_r = chi_source.axes[2 * mode]
        ax_i = chi_source.axes[2 * mode + 1]
        step_r, step_i = float(ax_r[1] - ax_r[0]), float(ax_i[1] - ax_i[0])
        if abs(step_r - step_i) > 1e-12 * max(step_r, step_i):
            raise ValidationError("mode axes must share one step for the stencil")
        if h is None:
            h = 2.0 * step_r
        m = h / step_r
        if abs(m - round(m)) > 1e-9 or round(m) % 2 != 0 or round(m) < 2:
            raise ValidationError("grid stencils need h an even multiple of the step")
        unit = round(m) // 2  # grid points per half-step
        center = tuple(a.size // 2 for a in chi_source.axes)

        def grid_index(ox: int, oy: int) -> tuple[int, ...]:
            idx = list(center)
            idx[2 * mode] = center[2 * mode] + ox * unit
            idx[2 * mode + 1] = center[2 * mode + 1] + oy * unit
            if not (0 <= idx[2 * mode] < ax_r.size and 0 <= idx[2 * mode + 1] < ax_i.size):
                raise ValidationError("stencil exits the grid; shrink h or widen the grid")
            return tuple(idx)

        def read(ox, oy):
            v = complex(chi_source.values[grid_index(ox, oy)])
            if math.isnan(v.real) or math.isnan(v.imag):
                raise ValidationError("stencil touches an unmeasured point")
            return v

        err_at = (
            (lambda ox, oy: float(chi_source.stderr[grid_index(ox, oy)]))
            if chi_source.stderr is not None
            else None
        )
    else:
        raise ValidationError("chi_source must be callable or a ChiGrid")

    nodes = _combined_nodes(p, q, float(h), richardson)
    value = complex(sum(c * read(ox, oy) for (ox, oy), c in nodes.items()))
    value *= (-1.0) ** q

    error = None
    if err_at is not None:
        error = math.sqrt(sum(abs(c) ** 2 * err_at(ox, oy) ** 2 for (ox, oy), c in nodes.items()))
        if error > abs(value):
            warnings.warn(
                f"moment ({p},{q}) = {value:.3e} is below its shot-noise error bar "
                f"{error:.3e}; decrease the noise or increase h",
                stacklevel=2,
            )
    return (value, error) if with_error else value


# --------------------------------------------------------------------------
# Gaussian covariance fit

_OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class GaussianFit:
    """Weighted least-squares covariance recovered from -2 ln|chi|.

    covariance is block diagonal per mode (the model is a product state);
    psd_ok flags positive definiteness, uncertainty_ok the symplectic bound
    det V >= 1 per mode; nbar is the per-mode occupation (sqrt(det V) - 1)/2.
    residual is the weighted rms misfit of the quadratic form.
    """

    covariance: NDArray[np.float64]
    residual: float
    psd_ok: bool
    uncertainty_ok: bool
    nbar: tuple[float, ...]
    n_points: int

    def mode_block(self, mode: int) -> NDArray[np.float64]:
        i = 2 * int(mode)
        return self.covariance[i : i + 2, i : i + 2]

    def to_state(self, modes: ModeSet) -> GaussianFieldState:
        """Nearest representable product state (vacuum / thermal / squeezed).

        A covariance that is both squeezed and mixed has no counterpart in
        the state model and is rejected rather than approximated silently.
        """
        n = self.covariance.shape[0] // 2
        if modes.n_modes != n:
            raise ValidationError("mode count does not match the fitted covariance")
        states = []
        for m in range(n):
            V = self.mode_block(m)
            det = float(np.linalg.det(V))
            # det alone misses negative-definite blocks (det = product of two
            # negative eigenvalues is positive), so check the trace too
            if det <= 0 or V[0, 0] + V[1, 1] <= 0:
                raise ValidationError("fitted covariance block is not positive definite")
            nu = math.sqrt(det)
            n_th = max((nu - 1.0) / 2.0, 0.0)
            evals = np.linalg.eigvalsh(V / nu)
            r = 0.25 * math.log(evals[-1] / evals[0])
            if r <= 1e-6:
                states.append(Vacuum() if n_th <= 1e-9 else Thermal(n=n_th))
            elif n_th <= 1e-6:
                sinh2r = math.sinh(2.0 * r)
                theta = math.atan2(-V[0, 1] / (nu * sinh2r), (V[1, 1] - V[0, 0]) / (2.0 * nu * sinh2r))
                states.append(Squeezed(r=r, theta=theta))
            else:
                raise ValidationError(
                    "fitted covariance is squeezed and thermal at once; "
                    "outside the representable state model"
                )
        return GaussianFieldState(modes, tuple(states))


def gaussian_fit(grid: ChiGrid, min_abs: float = 1e-3) -> GaussianFit:
    """Fit -2 ln|chi| = sum_m v_m^T (Omega V_m Omega^T) v_m by weighted lstsq.

    Weights are |chi|^2 (points near the noise floor say little about the
    exponent and get masked below min_abs entirely). Returns the full
    block-diagonal covariance; flags, never repairs, unphysical results.
    """
    n = grid.n_modes
    mesh = np.meshgrid(*grid.axes, indexing="ij")
    absval = np.abs(grid.values).reshape(-1)
    mask = np.isfinite(absval) & (absval > min_abs)
    if np.count_nonzero(mask) < 3 * n + 1:
        raise ValidationError("too few usable grid points for the fit")
    y = -2.0 * np.log(absval[mask])
    cols = []
    for m in range(n):
        xr = mesh[2 * m].reshape(-1)[mask]
        xi = mesh[2 * m + 1].reshape(-1)[mask]
        cols += [xr**2, 2.0 * xr * xi, xi**2]
    A = np.stack(cols, axis=1)
    w = np.sqrt(absval[mask] ** 2)
    beta, *_ = np.linalg.lstsq(A * w[:, None], y * w, rcond=None)

    cov = np.zeros((2 * n, 2 * n))
    psd_ok = True
    uncertainty_ok = True
    nbar = []
    for m in range(n):
        G = np.array(
            [[beta[3 * m], beta[3 * m + 1]], [beta[3 * m + 1], beta[3 * m + 2]]]
        )
        V = _OMEGA.T @ G @ _OMEGA
        cov[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] = V
        det = float(np.linalg.det(V))
        if not (V[0, 0] > 0 and det > 0):
            psd_ok = False
        if det < 1.0 - 1e-9:
            uncertainty_ok = False
        nbar.append((math.sqrt(det) - 1.0) / 2.0 if det > 0 else float("nan"))
    fitted = (A * w[:, None]) @ beta
    residual = float(np.sqrt(np.mean((fitted - y * w) ** 2)))
    return GaussianFit(
        covariance=cov,
        residual=residual,
        psd_ok=psd_ok,
        uncertainty_ok=uncertainty_ok,
        nbar=tuple(nbar),
        n_points=int(np.count_nonzero(mask)),
    )
