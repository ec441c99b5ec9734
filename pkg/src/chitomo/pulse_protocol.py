"""Displacements generated by a [tau - pi - tau - pi]^N Ramsey pulse sequence.

A two-level probe coupled to one field mode through a smearing profile F(x)
and a switching profile eta(t) picks up, conditional on its internal state, a
coherent displacement of the mode. For N pulse cycles of free-evolution time
tau the net displacement of mode k is

    xi_k(tau, N) = -4 lambda eta_k(tau) conj(F(k)) / (omega_k tau)
                   * sin(N omega_k tau) tan(omega_k tau / 2)
                   * exp(i N omega_k tau),

where F(k) is the spatial Fourier transform of the smearing and

    eta_k(tau) = integral_0^tau eta(s) ds / sqrt(2 L^n omega_k)

is the switching integral over one segment window carrying the mode
normalization. The product sin(N u) tan(u/2) has removable singularities at
u = omega tau = (2m+1) pi, where it tends to -2N(-1)^N; there the magnitude
attains its maximum 8 lambda N eta_k |F(k)| / pi. Both are handled
analytically, never through floating-point tan near a pole.

Switching is integrated per segment window [0, tau]; for scans where tau
varies, the Gaussian window can be specified fractionally (relative=True) so
that it keeps its shape inside each segment.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad

from .errors import ValidationError

__all__ = [
    "SphericalGaussian",
    "Delta",
    "CustomRadial",
    "Constant",
    "GaussianWindow",
    "CustomSwitching",
    "PulseSchedule",
    "Curve",
    "smearing_ft",
    "switching_integral",
    "displacement_param",
    "reachable_manifold",
    "smearing_to_dict",
    "smearing_from_dict",
    "switching_to_dict",
    "switching_from_dict",
    "schedule_to_dict",
    "schedule_from_dict",
    "save_schedule",
    "load_schedule",
    "register_smearing_kind",
    "register_switching_kind",
]


# --------------------------------------------------------------------------
# smearing functions (spatial profiles)

@dataclass(frozen=True)
class SphericalGaussian:
    """Normalized isotropic Gaussian profile, F(x) = exp(-|x|^2/(2 sigma^2))
    / (2 pi sigma^2)^(n/2). Its transform is exp(-sigma^2 k^2 / 2) in any n."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValidationError("smearing width must be positive")

    def ft(self, kmag: float, n: int) -> complex:
        return complex(np.exp(-0.5 * self.sigma**2 * kmag**2))

    def to_dict(self) -> dict:
        return {"kind": "spherical_gaussian", "sigma": self.sigma}


@dataclass(frozen=True)
class Delta:
    """Point-like profile at the origin; F(k) = 1 for all k."""

    def ft(self, kmag: float, n: int) -> complex:
        return 1.0 + 0.0j

    def to_dict(self) -> dict:
        return {"kind": "delta"}


@dataclass(frozen=True)
class CustomRadial:
    """Tabulated radial profile F(|x|); transformed by the radial quadrature
    appropriate to the spatial dimension (cosine, Hankel J0, spherical sinc)."""

    r: tuple[float, ...]
    f: tuple[float, ...]

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.r)
        f = tuple(float(v) for v in self.f)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "f", f)
        if len(r) != len(f) or len(r) < 2:
            raise ValidationError("radial table needs matching r/f arrays, length >= 2")
        if any(b <= a for a, b in zip(r, r[1:])) or r[0] < 0:
            raise ValidationError("radial grid must be ascending and nonnegative")
        if not all(math.isfinite(v) for v in f):
            raise ValidationError("radial profile contains non-finite values")

    def ft(self, kmag: float, n: int) -> complex:
        r = np.asarray(self.r)
        f = np.asarray(self.f)
        if n == 1:
            integrand = 2.0 * f * np.cos(kmag * r)
        elif n == 2:
            from scipy.special import j0

            integrand = 2.0 * np.pi * f * j0(kmag * r) * r
        elif n == 3:
            # np.sinc(x) = sin(pi x)/(pi x), so sin(kr)/(kr) = np.sinc(kr/pi)
            integrand = 4.0 * np.pi * f * np.sinc(kmag * r / np.pi) * r**2
        else:
            raise ValidationError(f"unsupported spatial dimension {n} for radial table")
        return complex(np.trapezoid(integrand, r))

    def to_dict(self) -> dict:
        return {"kind": "custom_radial", "r": list(self.r), "f": list(self.f)}


SmearingFunction = Union[SphericalGaussian, Delta, CustomRadial]


def smearing_ft(f, k, n: int) -> complex:
    """Spatial Fourier transform F(k) = integral d^n x F(x) exp(i k x).

    k may be a wave vector (length n) or a scalar magnitude; every supported
    profile is radial so only |k| enters. Real and positive for centered
    nonnegative profiles; F(0) equals the profile's total integral.
    """
    if n not in (1, 2, 3):
        raise ValidationError(f"spatial dimension must be 1, 2 or 3, got {n}")
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    if kv.ndim != 1 or kv.size not in (1, n):
        raise ValidationError(f"wave vector of length {kv.size} in dimension {n}")
    kmag = float(np.linalg.norm(kv)) if kv.size == n else abs(float(kv[0]))
    try:
        ft = f.ft
    except AttributeError:
        raise ValidationError(f"unsupported smearing object {f!r}") from None
    return complex(ft(kmag, n))


# --------------------------------------------------------------------------
# switching functions (temporal profiles over one segment window)

@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    def __post_init__(self) -> None:
        if not self.value >= 0:
            raise ValidationError("switching must be nonnegative")

    def window_integral(self, tau: float) -> float:
        return self.value * tau

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class GaussianWindow:
    """eta(s) = exp(-((s - center)/width)^2) integrated over [0, tau].

    With relative=True, center and width are fractions of the segment length
    tau, so the window shape travels with the segment during tau scans.
    """

    center: float
    width: float
    relative: bool = False

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValidationError("window width must be positive")

    def window_integral(self, tau: float) -> float:
        c = self.center * tau if self.relative else self.center
        w = self.width * tau if self.relative else self.width
        fn = lambda s: math.exp(-(((s - c) / w) ** 2))
        pts = [c] if 0.0 < c < tau else None
        val, _ = quad(fn, 0.0, tau, epsabs=1e-12, epsrel=1e-12, limit=200, points=pts)
        return val

    def to_dict(self) -> dict:
        return {
            "kind": "gaussian",
            "center": self.center,
            "width": self.width,
            "relative": self.relative,
        }


@dataclass(frozen=True)
class CustomSwitching:
    """Tabulated eta(t) on an ascending grid; zero outside the table."""

    t: tuple[float, ...]
    eta: tuple[float, ...]

    def __post_init__(self) -> None:
        t = tuple(float(v) for v in self.t)
        e = tuple(float(v) for v in self.eta)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "eta", e)
        if len(t) != len(e) or len(t) < 2:
            raise ValidationError("switching table needs matching t/eta arrays, length >= 2")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValidationError("switching time grid must be strictly ascending")
        if not all(math.isfinite(v) and v >= 0 for v in e):
            raise ValidationError("switching table must be finite and nonnegative")

    def window_integral(self, tau: float) -> float:
        t = np.asarray(self.t)
        e = np.asarray(self.eta)
        hi = min(tau, t[-1])
        lo = max(0.0, t[0])
        if hi <= lo:
            return 0.0
        mask = (t > lo) & (t < hi)
        ts = np.concatenate(([lo], t[mask], [hi]))
        es = np.interp(ts, t, e)
        return float(np.trapezoid(es, ts))

    def to_dict(self) -> dict:
        return {"kind": "custom", "t": list(self.t), "eta": list(self.eta)}


SwitchingFunction = Union[Constant, GaussianWindow, CustomSwitching]


def switching_integral(eta, tau: float, omega_k: float, L: float, n: int) -> float:
    """eta_k(tau) = integral_0^tau eta(s) ds / sqrt(2 L^n omega_k)."""
    if not tau > 0:
        raise ValidationError("tau must be positive")
    if not omega_k > 0:
        raise ValidationError("omega must be positive")
    if not L > 0 or n not in (1, 2, 3):
        raise ValidationError("bad box parameters")
    try:
        window = eta.window_integral
    except AttributeError:
        raise ValidationError(f"unsupported switching object {eta!r}") from None
    return float(window(tau)) / math.sqrt(2.0 * L**n * omega_k)


# --------------------------------------------------------------------------
# pulse schedule and the displacement closed form

@dataclass(frozen=True)
class PulseSchedule:
    """N cycles of [tau - pi - tau - pi] at coupling lam, total time 2 N tau."""

    lam: float
    tau: float
    N: int
    smearing: SmearingFunction
    switching: SwitchingFunction

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValidationError("coupling must be positive")
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError("segment count N must be an integer >= 1")
        object.__setattr__(self, "N", int(self.N))

    @property
    def total_time(self) -> float:
        return 2.0 * self.N * self.tau


def _sin_tan_product(u: float, N: int) -> float:
    """sin(N u) * tan(u/2) with the poles at u = (2m+1) pi removed.

    Near an odd multiple of pi, with d = u - (2m+1) pi,
    sin(N u) tan(u/2) = -(-1)^N sin(N d) cos(d/2) / sin(d/2),
    which tends to -2N(-1)^N as d -> 0.
    """
    m = round((u / math.pi - 1.0) / 2.0)
    d = u - (2 * m + 1) * math.pi
    if abs(d) < 0.5:
        sign = -(-1.0) ** N
        if d == 0.0:
            return sign * 2.0 * N
        return sign * math.sin(N * d) * math.cos(0.5 * d) / math.sin(0.5 * d)
    return math.sin(N * u) * math.tan(0.5 * u)


def displacement_param(
    sched: PulseSchedule, k, omega_k: float, L: float, n: int
) -> complex:
    """Net displacement xi_k(tau, N) of the mode (k, omega_k).

    Evaluates the closed form in the module docstring; linear in lam, periodic
    in tau with period 2 pi / omega_k for constant switching, and continuous
    through the removable singularities at omega_k tau = (2m+1) pi, where
    |xi| = 8 lam N eta_k |F(k)| / pi is the per-mode maximum.
    """
    eta_tilde = switching_integral(sched.switching, sched.tau, omega_k, L, n)
    ft = smearing_ft(sched.smearing, k, n)
    u = omega_k * sched.tau
    core = _sin_tan_product(u, sched.N)
    return (
        -4.0
        * sched.lam
        * eta_tilde
        * np.conj(ft)
        / u
        * core
        * np.exp(1j * sched.N * u)
    )


@dataclass(frozen=True)
class Curve:
    """One reachable-manifold curve: xi(tau) at fixed pulse number N."""

    N: int
    taus: NDArray[np.float64]
    xis: NDArray[np.complex128]


def reachable_manifold(
    sched_template: PulseSchedule,
    N_list: Sequence[int],
    tau_grid: Sequence[float],
    k,
    omega_k: float,
    L: float,
    n: int,
) -> list[Curve]:
    """Evaluate xi(tau, N) curves over a tau grid for each N.

    Each curve is a closed loop in the complex plane: it returns to the
    origin at tau = 2 pi m / omega_k and at every tau = m pi / (N omega_k)
    that is not an odd multiple of pi / omega_k.
    """
    taus = np.asarray(list(tau_grid), dtype=float)
    if taus.size == 0:
        raise ValidationError("empty tau grid")
    if np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
        raise ValidationError("tau grid must be positive and strictly increasing")
    if len(N_list) == 0:
        raise ValidationError("empty N list")
    curves = []
    for N in N_list:
        sched = replace(sched_template, N=int(N))
        xis = np.array(
            [displacement_param(replace(sched, tau=float(t)), k, omega_k, L, n) for t in taus]
        )
        curves.append(Curve(N=int(N), taus=taus.copy(), xis=xis))
    return curves


# --------------------------------------------------------------------------
# serialization

_SMEARING_KINDS: dict[str, Callable[[dict], object]] = {}
_SWITCHING_KINDS: dict[str, Callable[[dict], object]] = {}


def register_smearing_kind(name: str, loader: Callable[[dict], object]) -> None:
    _SMEARING_KINDS[name] = loader


def register_switching_kind(name: str, loader: Callable[[dict], object]) -> None:
    _SWITCHING_KINDS[name] = loader


register_smearing_kind(
    "spherical_gaussian", lambda d: SphericalGaussian(sigma=float(d["sigma"]))
)
register_smearing_kind("delta", lambda d: Delta())
register_smearing_kind(
    "custom_radial", lambda d: CustomRadial(r=tuple(d["r"]), f=tuple(d["f"]))
)
register_switching_kind("constant", lambda d: Constant(value=float(d.get("value", 1.0))))
register_switching_kind(
    "gaussian",
    lambda d: GaussianWindow(
        center=float(d["center"]),
        width=float(d["width"]),
        relative=bool(d.get("relative", False)),
    ),
)
register_switching_kind(
    "custom", lambda d: CustomSwitching(t=tuple(d["t"]), eta=tuple(d["eta"]))
)


def smearing_to_dict(f) -> dict:
    return f.to_dict()


def smearing_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind not in _SMEARING_KINDS:
        raise ValidationError(f"unknown smearing kind {kind!r}")
    return _SMEARING_KINDS[kind](doc)


def switching_to_dict(eta) -> dict:
    return eta.to_dict()


def switching_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind not in _SWITCHING_KINDS:
        raise ValidationError(f"unknown switching kind {kind!r}")
    return _SWITCHING_KINDS[kind](doc)


def schedule_to_dict(sched: PulseSchedule) -> dict:
    return {
        "lambda": sched.lam,
        "tau": sched.tau,
        "N": sched.N,
        "smearing": smearing_to_dict(sched.smearing),
        "switching": switching_to_dict(sched.switching),
    }


def schedule_from_dict(doc: dict) -> PulseSchedule:
    try:
        return PulseSchedule(
            lam=float(doc["lambda"]),
            tau=float(doc["tau"]),
            N=int(doc["N"]),
            smearing=smearing_from_dict(doc["smearing"]),
            switching=switching_from_dict(doc["switching"]),
        )
    except KeyError as exc:
        raise ValidationError(f"schedule document missing field {exc}") from exc


def save_schedule(sched: PulseSchedule, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schedule_to_dict(sched), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_schedule(path) -> PulseSchedule:
    with open(path, encoding="utf-8") as fh:
        return schedule_from_dict(json.load(fh))
