"""Two-photon polarization parity QND detector.

The H component of each signal photon is routed into a storage resonator, so
the probe reflected off the two cascaded readout resonators acquires a phase
set by the number of H photons:

    0 H photons (VV)     -> theta_0
    1 H photon (HV, VH)  -> theta_1
    2 H photons (HH)     -> theta_2

With identical arms HV and VH imprint the same phase, so a theta_1 result
projects onto the odd-parity subspace without revealing which photon is H.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .polstate import PolState, _finish, born_choice
from .readout import (
    HomodyneModel,
    KerrChannel,
    ProbeState,
    cascaded_phase,
    circular_nearest,
    discriminate,
    displace_probe,
    wrap_phase,
)

_SAME_PHASE = 1e-12
# (bit on m1, bit on m2), sampled in this order
_CONFIGS = (("V", "V"), ("H", "V"), ("V", "H"), ("H", "H"))


class ParityClass(IntEnum):
    """Outcome class; the value is the number of H photons."""

    EVEN_VV = 0
    ODD = 1
    EVEN_HH = 2


@dataclass(frozen=True)
class ParityOutcome:
    klass: ParityClass
    probe_phase: float
    probability: float


@dataclass(frozen=True)
class QndRecord:
    outcome: ParityOutcome
    collapsed: PolState
    homodyne_error: float
    true_klass: ParityClass
    class_probabilities: tuple = field(default=(0.0, 0.0, 0.0))

    @property
    def misread(self) -> bool:
        return self.outcome.klass != self.true_klass


def parity_phases(ch: KerrChannel, ch2: KerrChannel | None = None) -> tuple[float, float, float]:
    """Probe phases (theta_0, theta_1, theta_2) for identical arms (HV ordering for theta_1)."""
    return (
        cascaded_phase(0, 0, ch, ch2),
        cascaded_phase(1, 0, ch, ch2),
        cascaded_phase(1, 1, ch, ch2),
    )


def classify_phase(measured: float, ch: KerrChannel) -> ParityClass:
    return ParityClass(circular_nearest(measured, parity_phases(ch)))


def _branches(ch: KerrChannel, ch2: KerrChannel | None):
    """Group the four photon configurations by the probe phase they imprint."""
    groups: list[tuple[float, list]] = []
    for cfg in _CONFIGS:
        ph = cascaded_phase(int(cfg[0] == "H"), int(cfg[1] == "H"), ch, ch2)
        for g_phase, members in groups:
            if abs(wrap_phase(ph - g_phase)) < _SAME_PHASE:
                members.append(cfg)
                break
        else:
            groups.append((ph, [cfg]))
    return groups


def parity_measure(
    state: PolState,
    m1,
    m2,
    ch: KerrChannel,
    probe: ProbeState,
    model: HomodyneModel,
    rng,
    ch2: KerrChannel | None = None,
) -> QndRecord:
    """Run the parity detector on modes ``m1``, ``m2`` of ``state``.

    The true branch is drawn by the Born rule (one ``rng.random()``) and
    determines the collapsed state.  The reported class comes from homodyne
    discrimination of the probe; in gaussian mode that draws one
    ``rng.standard_normal()`` and can disagree with the true branch.
    Passing ``ch2`` different from ``ch`` models mismatched arms, in which case
    HV and VH become separate branches.
    """
    if m1 == m2:
        raise ValueError("parity check needs two distinct modes")
    i1, i2 = state.index(m1), state.index(m2)
    groups = _branches(ch, ch2)

    probs = [0.0] * len(groups)
    klass_probs = [0.0, 0.0, 0.0]
    where = {}
    for g, (_, members) in enumerate(groups):
        for cfg in members:
            where[cfg] = g
    for s, a in state.amplitudes.items():
        cfg = (s[i1], s[i2])
        w = abs(a) ** 2
        probs[where[cfg]] += w
        klass_probs[(cfg[0] == "H") + (cfg[1] == "H")] += w
    total = sum(probs)
    probs = [p / total for p in probs]
    klass_probs = tuple(p / total for p in klass_probs)

    g = born_choice(probs, rng.random())
    phase, members = groups[g]
    keep = set(members)
    collapsed = _finish(
        state.modes,
        {s: a for s, a in state.amplitudes.items() if (s[i1], s[i2]) in keep},
    )
    true_klass = ParityClass(members[0].count("H"))

    hypotheses = [ph for ph, _ in groups]
    out = displace_probe(ProbeState(probe.amplitude), phase)
    idx, err = discriminate(out, hypotheses, model, rng)
    read_klass = ParityClass(groups[idx][1][0].count("H"))
    return QndRecord(
        outcome=ParityOutcome(read_klass, phase, probs[g]),
        collapsed=collapsed,
        homodyne_error=err,
        true_klass=true_klass,
        class_probabilities=klass_probs,
    )


def storage_hold_ratio(t_meas_ns: float, ch: KerrChannel) -> float:
    """Measurement window in units of the storage lifetime, t_meas * kappa1."""
    return t_meas_ns * ch.kappa1
