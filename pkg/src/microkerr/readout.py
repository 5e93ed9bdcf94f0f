"""Kerr-mediated probe readout.

A readout resonator with decay rate kappa2 reflects a coherent probe with
coefficient r = (i chi n - kappa2/2) / (i chi n + kappa2/2), where n is the
photon number stored in the partner resonator.  The probe picks up the phase
arg(1/r); cascading two resonators adds the phases.  An X-quadrature
homodyne measurement then discriminates the candidate phases.

Rates (chi, kappa) are angular rates in 1/ns.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import ConfigError, IndistinguishableHypotheses

TWO_PI = 2.0 * math.pi


def wrap_phase(theta: float) -> float:
    """Map an angle to the principal branch (-pi, pi]."""
    w = math.remainder(theta, TWO_PI)
    if w == -math.pi:
        return math.pi
    return w


@dataclass(frozen=True)
class KerrChannel:
    chi: float  # angular, 1/ns
    kappa2: float  # 1/ns
    kappa1: float = 0.0  # 1/ns, diagnostic only

    def __post_init__(self):
        if not self.kappa2 > 0:
            raise ConfigError(f"kappa2 must be positive, got {self.kappa2!r}")

    @classmethod
    def from_lab_units(
        cls, chi_ghz: float, kappa2_inv_ns: float, kappa1_inv_us: float | None = None
    ) -> "KerrChannel":
        """Build from chi/2pi in GHz and decay lifetimes (kappa^-1)."""
        if not kappa2_inv_ns > 0:
            raise ConfigError(f"kappa2_inv_ns must be positive, got {kappa2_inv_ns!r}")
        kappa1 = 0.0 if kappa1_inv_us is None else 1.0 / (kappa1_inv_us * 1e3)
        return cls(chi=TWO_PI * chi_ghz, kappa2=1.0 / kappa2_inv_ns, kappa1=kappa1)

    def validity_ratio(self, n_max: int = 2) -> float:
        """kappa2 / (|chi| n_max); the fast-cavity picture wants this large."""
        denom = abs(self.chi) * n_max
        return math.inf if denom == 0 else self.kappa2 / denom

    def is_valid(self, n_max: int = 2, factor: float = 5.0) -> bool:
        return self.validity_ratio(n_max) >= factor


def reflection(n: int, ch: KerrChannel) -> complex:
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    a = 1j * ch.chi * n
    return (a - ch.kappa2 / 2) / (a + ch.kappa2 / 2)


def phase_shift(n: int, ch: KerrChannel) -> float:
    """Probe phase arg(1/r) on the principal branch; pi for an empty resonator."""
    return wrap_phase(cmath.phase(1.0 / reflection(n, ch)))


def differential_shift(n: int, ch: KerrChannel) -> float:
    """Unwrapped phase relative to the empty resonator: 2 arctan(2 chi n / kappa2)."""
    return 2.0 * math.atan(2.0 * ch.chi * n / ch.kappa2)


def cascaded_phase(n1: int, n2: int, ch1: KerrChannel, ch2: KerrChannel | None = None) -> float:
    """Total phase after the probe reflects off two resonators in series."""
    if ch2 is None:
        ch2 = ch1
    return wrap_phase(phase_shift(n1, ch1) + phase_shift(n2, ch2))


@dataclass(frozen=True)
class ProbeState:
    amplitude: complex
    accumulated_phase: float = 0.0

    @property
    def reference_amplitude(self) -> complex:
        """Amplitude before any phase was imprinted."""
        return self.amplitude * cmath.exp(-1j * self.accumulated_phase)


def displace_probe(probe: ProbeState, total_phase: float) -> ProbeState:
    return ProbeState(
        amplitude=probe.amplitude * cmath.exp(1j * total_phase),
        accumulated_phase=probe.accumulated_phase + total_phase,
    )


class HomodyneMode(str, Enum):
    IDEAL = "ideal"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class HomodyneModel:
    mode: HomodyneMode = HomodyneMode.IDEAL
    # X = a + a^dagger convention: coherent-state mean 2 Re(alpha), variance 1
    quadrature_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", HomodyneMode(self.mode))
        if self.mode is HomodyneMode.GAUSSIAN and self.quadrature_variance != 1.0:
            raise ConfigError("gaussian homodyne uses unit quadrature variance")


def normal_tail(x: float) -> float:
    """Standard normal upper tail Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def quadrature_means(reference: complex, hypotheses: Sequence[float]) -> list[float]:
    amp, arg = abs(reference), cmath.phase(reference)
    return [2.0 * amp * math.cos(th + arg) for th in hypotheses]


def nearest_mean_error(means: Sequence[float], index: int) -> float:
    """Exact error of nearest-mean classification of unit-variance Gaussians given the true index."""
    mu = means[index]
    below = [mu - m for m in means if m < mu]
    above = [m - mu for m in means if m > mu]
    err = 0.0
    if below:
        err += normal_tail(min(below) / 2.0)
    if above:
        err += normal_tail(min(above) / 2.0)
    return min(err, 1.0)


def worst_pairwise_error(means: Sequence[float]) -> float:
    """Q(d_min / 2) over the closest pair of means."""
    if len(means) < 2:
        return 0.0
    s = sorted(means)
    dmin = min(b - a for a, b in zip(s, s[1:]))
    return normal_tail(dmin / 2.0)


def check_separated(means: Sequence[float], tol: float = 1e-9) -> None:
    s = sorted(means)
    for a, b in zip(s, s[1:]):
        if b - a <= tol:
            raise IndistinguishableHypotheses(
                f"X-quadrature means {a!r} and {b!r} coincide within {tol}"
            )


def circular_nearest(theta: float, hypotheses: Sequence[float]) -> int:
    dists = [abs(wrap_phase(theta - h)) for h in hypotheses]
    return min(range(len(dists)), key=dists.__getitem__)


def discriminate(probe: ProbeState, hypotheses: Sequence[float], model: HomodyneModel, rng=None):
    """Infer which hypothesised phase the probe carries.

    Returns ``(index, error)`` where ``error`` is the analytic probability that
    nearest-mean classification misreads the true hypothesis.  In ideal mode
    the true phase is read off exactly.  Gaussian mode samples one X-quadrature
    value from ``rng.standard_normal()``.
    """
    if len(hypotheses) == 0:
        raise ValueError("need at least one hypothesis")
    true_index = circular_nearest(probe.accumulated_phase, hypotheses)
    if model.mode is HomodyneMode.IDEAL:
        return true_index, 0.0
    means = quadrature_means(probe.reference_amplitude, hypotheses)
    check_separated(means)
    x = 2.0 * probe.amplitude.real + rng.standard_normal()
    index = min(range(len(means)), key=lambda i: abs(x - means[i]))
    return index, nearest_mean_error(means, true_index)
