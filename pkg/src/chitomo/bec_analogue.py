"""Condensate-impurity parameters mapped onto the pulse-protocol pipeline.

A two-level impurity sitting in a weakly interacting condensate couples to
density fluctuations with strength g_s depending on its internal state s.
Splitting the coupling into a state-independent shift (dropped: it is a pure
phase on both qubit branches and cancels in the readout) and a sigma_z part
leaves an effective coupling

    lambda_eff = (g_e - g_g) sqrt(rho0) / 2,

while each excitation mode k enters with the Bogoliubov weight
u_k + v_k = sqrt(E_k / omega_k), E_k = k^2 / (2 m_B),
omega_k = sqrt(E_k (E_k + 2 g rho0)). The weight multiplies the impurity's
localization transform, so the mapped system is again the displacement
protocol with F(k) -> w(k) F(k) and the Bogoliubov dispersion in place of
the relativistic one. The dispersion is isolated in bogoliubov_omega so an
alternative is a one-line swap.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError
from .gaussian_field import ModeSet
from .pulse_protocol import (
    PulseSchedule,
    displacement_param,
    register_smearing_kind,
    smearing_from_dict,
)

__all__ = [
    "BecParams",
    "BogoliubovWeighted",
    "MappedProtocol",
    "bogoliubov_energy",
    "bogoliubov_omega",
    "bogoliubov_weight",
    "map_to_protocol",
    "params_to_dict",
    "params_from_dict",
    "save_params",
    "load_params",
]


@dataclass(frozen=True)
class BecParams:
    """Condensate and impurity parameters.

    g_rho0 is the interaction scale g rho0 (chemical potential); couplings
    g_g, g_e are the impurity-state-dependent density couplings; omega0 is
    the impurity gap (spectator here: it sets the pulse carrier, not the
    displacement).
    """

    rho0: float
    g_g: float
    g_e: float
    g_rho0: float
    m_B: float
    omega0: float

    def __post_init__(self) -> None:
        if not self.rho0 > 0:
            raise ValidationError("condensate density must be positive")
        if not self.m_B > 0:
            raise ValidationError("atom mass must be positive")
        if not self.g_rho0 > 0:
            raise ValidationError("interaction scale g*rho0 must be positive")
        for name in ("g_g", "g_e", "omega0"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")

    @property
    def healing_length(self) -> float:
        return 1.0 / math.sqrt(2.0 * self.m_B * self.g_rho0)

    @property
    def sound_speed(self) -> float:
        return math.sqrt(self.g_rho0 / self.m_B)


def _kmag(k) -> float:
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    return float(np.linalg.norm(kv))


def bogoliubov_energy(k, params: BecParams) -> float:
    """Free-particle energy E_k = k^2 / (2 m_B)."""
    return _kmag(k) ** 2 / (2.0 * params.m_B)


def bogoliubov_omega(k, params: BecParams) -> float:
    """Excitation frequency omega_k = sqrt(E_k (E_k + 2 g rho0)).

    Phonon-like (c |k|) for k much below 1/healing_length, free-particle
    quadratic far above.
    """
    E = bogoliubov_energy(k, params)
    return math.sqrt(E * (E + 2.0 * params.g_rho0))


def bogoliubov_weight(k, params: BecParams) -> float:
    """Density-coupling weight u_k + v_k = sqrt(E_k / omega_k); k = 0 has no
    excitation to couple to and is rejected."""
    if _kmag(k) == 0.0:
        raise ValidationError("k = 0 carries no Bogoliubov excitation")
    return math.sqrt(bogoliubov_energy(k, params) / bogoliubov_omega(k, params))


@dataclass(frozen=True)
class BogoliubovWeighted:
    """Smearing wrapper folding the mode weight (and the coupling sign) into
    the transform: F_eff(k) = sign * w(k) * F_base(k).

    Wrapping the smearing instead of patching displacement_param keeps the
    mapped run bit-identical to a scalar-field run with the weighted profile.
    """

    base: object
    m_B: float
    g_rho0: float
    sign: float = 1.0

    def __post_init__(self) -> None:
        if self.sign not in (-1.0, 1.0):
            raise ValidationError("sign must be +1 or -1")
        if not (self.m_B > 0 and self.g_rho0 > 0):
            raise ValidationError("weight needs positive m_B and g*rho0")

    def _weight(self, kmag: float) -> float:
        if kmag == 0.0:
            raise ValidationError("k = 0 carries no Bogoliubov excitation")
        E = kmag**2 / (2.0 * self.m_B)
        return math.sqrt(E / math.sqrt(E * (E + 2.0 * self.g_rho0)))

    def ft(self, kmag: float, n: int) -> complex:
        return self.sign * self._weight(kmag) * complex(self.base.ft(kmag, n))

    def to_dict(self) -> dict:
        return {
            "kind": "bogoliubov_weighted",
            "base": self.base.to_dict(),
            "m_B": self.m_B,
            "g_rho0": self.g_rho0,
            "sign": self.sign,
        }


register_smearing_kind(
    "bogoliubov_weighted",
    lambda d: BogoliubovWeighted(
        base=smearing_from_dict(d["base"]),
        m_B=float(d["m_B"]),
        g_rho0=float(d["g_rho0"]),
        sign=float(d.get("sign", 1.0)),
    ),
)


@dataclass(frozen=True, eq=False)
class MappedProtocol:
    """Result of the mapping: a schedule ready for displacement_param, the
    Bogoliubov frequencies to use instead of the ModeSet's own, and the
    per-mode weights. schedule is None when g_e = g_g (nothing is encoded)."""

    params: BecParams
    modes: ModeSet
    schedule: PulseSchedule | None
    omegas: NDArray[np.float64]
    weights: NDArray[np.float64]
    lambda_eff: float

    @property
    def no_signal(self) -> bool:
        return self.schedule is None

    def displacements(self) -> NDArray[np.complex128]:
        """xi per mode under the mapped schedule and dispersion."""
        if self.no_signal:
            return np.zeros(self.modes.n_modes, dtype=complex)
        k = self.modes.wavevectors
        return np.array(
            [
                displacement_param(
                    self.schedule,
                    k[m],
                    float(self.omegas[m]),
                    self.modes.box_side,
                    self.modes.spatial_dim,
                )
                for m in range(self.modes.n_modes)
            ]
        )


def map_to_protocol(
    params: BecParams, modes: ModeSet, template: PulseSchedule
) -> MappedProtocol:
    """Build the effective displacement protocol for a condensate impurity.

    The template supplies tau, N, switching and the impurity localization
    profile; its coupling field is ignored in favour of lambda_eff. A
    negative lambda_eff is folded into the smearing sign since the schedule
    stores a magnitude.
    """
    kvecs = modes.wavevectors
    kmags = np.linalg.norm(kvecs, axis=1)
    if np.any(kmags == 0.0):
        raise ValidationError("mode list must exclude k = 0")
    omegas = np.array([bogoliubov_omega(k, params) for k in kvecs])
    weights = np.array([bogoliubov_weight(k, params) for k in kvecs])
    lambda_eff = (params.g_e - params.g_g) * math.sqrt(params.rho0) / 2.0
    if lambda_eff == 0.0:
        return MappedProtocol(
            params=params,
            modes=modes,
            schedule=None,
            omegas=omegas,
            weights=weights,
            lambda_eff=0.0,
        )
    smearing = BogoliubovWeighted(
        base=template.smearing,
        m_B=params.m_B,
        g_rho0=params.g_rho0,
        sign=math.copysign(1.0, lambda_eff),
    )
    sched = PulseSchedule(
        lam=abs(lambda_eff),
        tau=template.tau,
        N=template.N,
        smearing=smearing,
        switching=template.switching,
    )
    return MappedProtocol(
        params=params,
        modes=modes,
        schedule=sched,
        omegas=omegas,
        weights=weights,
        lambda_eff=lambda_eff,
    )


# --------------------------------------------------------------------------
# serialization

def params_to_dict(params: BecParams) -> dict:
    return {
        "rho0": params.rho0,
        "g_g": params.g_g,
        "g_e": params.g_e,
        "g_rho0": params.g_rho0,
        "m_B": params.m_B,
        "omega0": params.omega0,
    }


def params_from_dict(doc: dict) -> BecParams:
    try:
        return BecParams(
            rho0=float(doc["rho0"]),
            g_g=float(doc["g_g"]),
            g_e=float(doc["g_e"]),
            g_rho0=float(doc["g_rho0"]),
            m_B=float(doc["m_B"]),
            omega0=float(doc["omega0"]),
        )
    except KeyError as exc:
        raise ValidationError(f"BEC parameter file missing field {exc}") from exc


def save_params(params: BecParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_dict(params), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(path) -> BecParams:
    with open(path, encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))
