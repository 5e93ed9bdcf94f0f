"""Superconducting-molecule energetics.

Two identical transmons coupled through a capacitance and a tunable SQUID
form an N-type four-level system.  This module evaluates the closed-form
spectrum of that system, the effective cross-Kerr coefficient it mediates
between two resonators, and the resonator mode frequencies.

All energies are ordinary frequencies in GHz (the value of E/2pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .errors import ConfigError, DegenerateCapacitance, LevelOrderError, OutOfRegime

# e^2/h expressed in GHz*fF, so E[GHz] = E2_OVER_H * (capacitance ratio in 1/fF)
E2_OVER_H_GHZ_FF = constants.e**2 / constants.h / 1e9 / 1e-15


@dataclass(frozen=True)
class DeviceParams:
    """Molecule and pump parameters, all in GHz."""

    E_c: float
    E_J: float
    E_m: float
    E_Jm: float
    g1: float
    g2: float
    Omega_c: float
    delta2: float

    def __post_init__(self):
        for name in ("E_c", "E_J", "Omega_c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        for name in ("E_m", "E_Jm", "g1", "g2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be non-negative, got {v!r}")
        if not math.isfinite(self.delta2) or self.delta2 == 0:
            raise ConfigError(f"delta2 must be nonzero, got {self.delta2!r}")

    def replace(self, **changes) -> "DeviceParams":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return DeviceParams(**kw)


# Operating point used throughout the feasibility discussion.
REFERENCE_DEVICE = DeviceParams(
    E_c=0.5, E_J=16.0, E_m=0.2, E_Jm=8.0,
    g1=0.3, g2=0.3, Omega_c=1.5, delta2=1.5,
)


@dataclass(frozen=True)
class CapacitanceSet:
    """Circuit capacitances in fF, coupling-SQUID energy in GHz, fluxes in units of the flux quantum."""

    C_g1: float
    C_g2: float
    C_J: float
    C_m: float
    E_Jc: float
    Phi_e1: float = 0.0
    Phi_e2: float = 0.0
    Phi_ec: float = 0.0

    @property
    def C_sigma1(self) -> float:
        return self.C_g1 + self.C_J + self.C_m

    @property
    def C_sigma2(self) -> float:
        return self.C_g2 + self.C_J + self.C_m


def derive_energies(caps: CapacitanceSet) -> tuple[float, float, float]:
    """Return ``(E_c, E_m, E_Jm)`` in GHz from circuit capacitances.

    The two qubits must be identical (``C_g1 == C_g2``); ``E_Jm`` carries the
    sign of ``cos(pi * Phi_ec)`` and may be negative.
    """
    for name in ("C_g1", "C_g2", "C_J", "C_m"):
        v = getattr(caps, name)
        if not v >= 0:
            raise ConfigError(f"{name} must be non-negative, got {v!r}")
    if not math.isclose(caps.C_g1, caps.C_g2, rel_tol=1e-12, abs_tol=0.0):
        raise ConfigError("identical qubits required: C_g1 != C_g2")
    cs1, cs2 = caps.C_sigma1, caps.C_sigma2
    det = cs1 * cs2 - caps.C_m**2
    if not det > 0:
        raise DegenerateCapacitance(f"C_sigma1*C_sigma2 - C_m^2 = {det!r} <= 0")
    E_c = E2_OVER_H_GHZ_FF * cs2 / (2.0 * det)
    E_m = E2_OVER_H_GHZ_FF * caps.C_m / det
    E_Jm = 2.0 * caps.E_Jc * math.cos(math.pi * caps.Phi_ec)
    return E_c, E_m, E_Jm


@dataclass(frozen=True)
class MoleculeSpectrum:
    E1: float
    E2: float
    E3: float
    E4: float
    theta_mix: float
    alpha: float
    omega: float
    E_m1: float
    E_mPlus: float
    E_mMinus: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([self.E1, self.E2, self.E3, self.E4])

    @property
    def ordered(self) -> bool:
        return self.E1 <= self.E2 <= self.E3 <= self.E4

    def eigenvectors(self) -> np.ndarray:
        """Columns are |1>..|4> in the basis (uu, ud, du, dd)."""
        c, s = math.cos(self.theta_mix), math.sin(self.theta_mix)
        r = 1.0 / math.sqrt(2.0)
        return np.array([
            [c, 0.0, 0.0, s],
            [0.0, r, r, 0.0],
            [0.0, -r, r, 0.0],
            [-s, 0.0, 0.0, c],
        ])


def spectrum(p: DeviceParams, check_order: bool = True) -> MoleculeSpectrum:
    """Closed-form four-level spectrum of the coupled-transmon molecule.

    Raises OutOfRegime when ``E_c >= E_J``.  With ``check_order`` the level
    ordering E1 <= E2 <= E3 <= E4 is asserted and a LevelOrderError raised on
    violation; levels are never relabelled.
    """
    if p.E_c >= p.E_J:
        raise OutOfRegime(
            f"transmon regime check failed: E_c={p.E_c} must be < E_J={p.E_J}"
        )
    alpha = (2.0 * p.E_c / p.E_J) ** 0.25
    a2 = alpha * alpha
    omega = math.sqrt(8.0 * p.E_c * p.E_J) - p.E_c
    damp = math.exp(-a2)
    E_m1 = damp * p.E_Jm * a2 * a2 / 4.0
    E_mPlus = p.E_Jm * a2 * damp + p.E_m / a2
    E_mMinus = p.E_Jm * a2 * damp - p.E_m / a2
    root = math.hypot(omega, E_mMinus)
    result = MoleculeSpectrum(
        E1=-E_m1 - root,
        E2=E_m1 - E_mPlus,
        E3=E_m1 + E_mPlus,
        E4=-E_m1 + root,
        theta_mix=0.5 * math.atan(E_mMinus / omega),
        alpha=alpha,
        omega=omega,
        E_m1=E_m1,
        E_mPlus=E_mPlus,
        E_mMinus=E_mMinus,
    )
    if check_order and not result.ordered:
        raise LevelOrderError(
            "level ordering E1<=E2<=E3<=E4 violated: "
            f"({result.E1:.6g}, {result.E2:.6g}, {result.E3:.6g}, {result.E4:.6g})"
        )
    return result


def level_spacing(s: MoleculeSpectrum, i: int, j: int) -> float:
    """E_ij = E_i - E_j for 1-based level indices."""
    levels = (s.E1, s.E2, s.E3, s.E4)
    if i not in (1, 2, 3, 4) or j not in (1, 2, 3, 4):
        raise ValueError(f"level indices must be in 1..4, got ({i}, {j})")
    return levels[i - 1] - levels[j - 1]


def cross_kerr_chi(p: DeviceParams) -> float:
    """Signed effective cross-Kerr coefficient in GHz: -g1^2 g2^2 / (delta2 Omega_c^2)."""
    return -(p.g1**2) * (p.g2**2) / (p.delta2 * p.Omega_c**2)


@dataclass(frozen=True)
class AdiabaticReport:
    pump_ratio: float  # |g1/Omega_c|^2
    detuning_ratio: float  # |g2/delta2|
    pump_threshold: float
    detuning_threshold: float
    pump_ok: bool = field(init=False)
    detuning_ok: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "pump_ok", self.pump_ratio <= self.pump_threshold)
        object.__setattr__(self, "detuning_ok", self.detuning_ratio <= self.detuning_threshold)

    @property
    def ok(self) -> bool:
        return self.pump_ok and self.detuning_ok


def check_adiabatic(
    p: DeviceParams, pump_threshold: float = 0.05, detuning_threshold: float = 0.25
) -> AdiabaticReport:
    """Diagnose the two conditions under which the atomic levels can be eliminated.

    Never raises; inspect ``.ok`` or the individual flags.
    """
    return AdiabaticReport(
        pump_ratio=abs(p.g1 / p.Omega_c) ** 2,
        detuning_ratio=abs(p.g2 / p.delta2),
        pump_threshold=pump_threshold,
        detuning_threshold=detuning_threshold,
    )


@dataclass(frozen=True)
class TlrParams:
    L: float  # mm
    F: float  # H/m
    c_per_len: float  # F/m

    def __post_init__(self):
        for name in ("L", "F", "c_per_len"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")


def tlr_frequency(t: TlrParams) -> float:
    """Resonator mode frequency omega/2pi in GHz, omega = 2pi / (L sqrt(F c))."""
    return 1.0 / (t.L * 1e-3 * math.sqrt(t.F * t.c_per_len)) / 1e9


def tlr_length_for(freq_ghz: float, F: float, c_per_len: float) -> float:
    """Inverse of :func:`tlr_frequency`: resonator length in mm."""
    return 1.0 / (freq_ghz * 1e9 * math.sqrt(F * c_per_len)) * 1e3


def ejm_sweep(p: DeviceParams, ratios) -> np.ndarray:
    """Rows of ``(ratio, E31, E32, E31 - E42, |chi| in MHz)`` over E_Jm = ratio * E_J."""
    out = []
    chi_mhz = abs(cross_kerr_chi(p)) * 1e3
    for r in ratios:
        s = spectrum(p.replace(E_Jm=float(r) * p.E_J))
        out.append((
            float(r),
            level_spacing(s, 3, 1),
            level_spacing(s, 3, 2),
            level_spacing(s, 3, 1) - level_spacing(s, 4, 2),
            chi_mhz,
        ))
    return np.array(out)
