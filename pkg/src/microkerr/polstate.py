"""Sparse multi-photon polarization states and linear microwave elements.

A state is a map from basis strings over {H, V} to complex amplitudes, one
character per registered mode (big-endian in registration order).  Every
operation returns a new, normalized state with dust amplitudes pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import RegisterMismatch, UnknownMode, UnnormalizedInput, ZeroNormBranch

PRUNE = 1e-14
NORM_TOL = 1e-10
SQRT_HALF = 1.0 / math.sqrt(2.0)


def born_choice(probs: Sequence[float], u: float) -> int:
    """Pick an index with probability proportional to ``probs`` from a uniform ``u`` in [0, 1).

    Zero-probability entries are never returned, even under rounding.
    """
    total = 0.0
    for p in probs:
        total += p
    target = u * total
    acc = 0.0
    last = -1
    for k, p in enumerate(probs):
        if p > 0.0:
            last = k
            acc += p
            if target < acc:
                return k
    if last < 0:
        raise ZeroNormBranch("all branch probabilities vanish")
    return last


@dataclass(frozen=True)
class PolState:
    modes: tuple
    amplitudes: Mapping[str, complex]

    def __post_init__(self):
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"duplicate mode labels in {self.modes}")
        k = len(self.modes)
        for s in self.amplitudes:
            if len(s) != k or set(s) - {"H", "V"}:
                raise ValueError(f"bad basis string {s!r} for {k} modes")

    @property
    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def index(self, mode) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise UnknownMode(f"mode {mode!r} not in register {self.modes}") from None

    def amplitude(self, basis: str) -> complex:
        return self.amplitudes.get(basis, 0j)

    def __len__(self):
        return len(self.amplitudes)


def _finish(modes, amps: dict) -> PolState:
    amps = {s: a for s, a in amps.items() if abs(a) >= PRUNE}
    nrm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    if nrm == 0.0:
        raise ZeroNormBranch("operation produced a zero-norm state")
    return PolState(tuple(modes), {s: a / nrm for s, a in sorted(amps.items())})


def basis_state(modes: Sequence, bits: str) -> PolState:
    return _finish(modes, {bits: 1.0 + 0j})


def from_amplitudes(modes: Sequence, amps: Mapping[str, complex]) -> PolState:
    """Normalize an arbitrary amplitude map into a state."""
    return _finish(modes, {s: complex(a) for s, a in amps.items()})


def product_state(pairs: Iterable[tuple[complex, complex]], mode_groups: Sequence[Sequence]) -> PolState:
    """Tensor product of copies of x|H..H> + y|V..V> over the given mode groups.

    ``mode_groups[i]`` lists the modes holding copy ``i``; a two-element group
    is a Bell-type pair, longer groups are GHZ-type states.  The register
    order is the concatenation of the groups.
    """
    modes: list = []
    amps = {"": 1.0 + 0j}
    for (x, y), group in zip(pairs, mode_groups, strict=True):
        x, y = complex(x), complex(y)
        if abs(abs(x) ** 2 + abs(y) ** 2 - 1.0) > NORM_TOL:
            raise UnnormalizedInput(f"|x|^2 + |y|^2 = {abs(x)**2 + abs(y)**2!r} != 1")
        k = len(group)
        new = {}
        for s, a in amps.items():
            new[s + "H" * k] = a * x
            new[s + "V" * k] = a * y
        amps = new
        modes.extend(group)
    return _finish(modes, amps)


def _relabel(state: PolState, i: int, table) -> dict:
    out: dict = {}
    for s, a in state.amplitudes.items():
        for ch, coeff in table[s[i]]:
            t = s[:i] + ch + s[i + 1:]
            out[t] = out.get(t, 0j) + coeff * a
    return out


ROTATE45 = {
    "H": (("H", SQRT_HALF), ("V", SQRT_HALF)),
    "V": (("H", SQRT_HALF), ("V", -SQRT_HALF)),
}


def rotate45(state: PolState, mode) -> PolState:
    """45-degree polarization rotator: H -> (H+V)/sqrt2, V -> (H-V)/sqrt2."""
    return _finish(state.modes, _relabel(state, state.index(mode), ROTATE45))


def phase_flip(state: PolState, mode, which: str = "H") -> PolState:
    """Flip the sign of every amplitude whose ``mode`` carries polarization ``which``."""
    if which not in ("H", "V"):
        raise ValueError(f"which must be 'H' or 'V', got {which!r}")
    i = state.index(mode)
    return _finish(
        state.modes,
        {s: (-a if s[i] == which else a) for s, a in state.amplitudes.items()},
    )


@dataclass(frozen=True)
class DetectionEvent:
    mode: object
    outcome: str
    detector: str


def outcome_probability(state: PolState, mode, outcome: str) -> float:
    i = state.index(mode)
    return sum(abs(a) ** 2 for s, a in state.amplitudes.items() if s[i] == outcome) / state.norm_sq


def project(state: PolState, mode, outcome: str) -> PolState:
    """Project ``mode`` onto ``outcome`` and drop it from the register."""
    i = state.index(mode)
    amps = {s[:i] + s[i + 1:]: a for s, a in state.amplitudes.items() if s[i] == outcome}
    if not amps:
        raise ZeroNormBranch(f"outcome {outcome} on {mode!r} has zero amplitude")
    return _finish(state.modes[:i] + state.modes[i + 1:], amps)


def default_detector(mode, outcome: str) -> str:
    # PBS transmits H, reflects V; each mode owns a transmit/reflect detector pair
    return f"{mode}:{'T' if outcome == 'H' else 'R'}"


def detect(state: PolState, mode, rng, detector_names=None) -> tuple[DetectionEvent, PolState]:
    """Born-rule H/V detection behind a PBS; ``rng.random()`` supplies one uniform.

    ``detector_names`` optionally maps outcome 'H'/'V' to a detector label.
    """
    p_h = outcome_probability(state, mode, "H")
    outcome = "HV"[born_choice((p_h, 1.0 - p_h), rng.random())]
    name = detector_names[outcome] if detector_names else default_detector(mode, outcome)
    return DetectionEvent(mode, outcome, name), project(state, mode, outcome)


def inner(a: PolState, b: PolState) -> complex:
    if tuple(a.modes) != tuple(b.modes):
        raise RegisterMismatch(f"registers differ: {a.modes} vs {b.modes}")
    acc = 0j
    for s, amp in a.amplitudes.items():
        acc += amp.conjugate() * b.amplitudes.get(s, 0j)
    return acc


def fidelity(a: PolState, b: PolState) -> float:
    """|<a|b>|^2, clipped to [0, 1]."""
    return min(1.0, max(0.0, abs(inner(a, b)) ** 2))


def cat_state(modes: Sequence, sign: int = 1) -> PolState:
    """(|H..H> + sign |V..V>)/sqrt2 on ``modes``."""
    k = len(modes)
    return _finish(modes, {"H" * k: 1.0 + 0j, "V" * k: complex(sign)})


# Dense bridge: index bit (k - 1 - i) holds mode i; 0 = H, 1 = V.

def to_dense(state: PolState) -> np.ndarray:
    k = len(state.modes)
    vec = np.zeros(2**k, dtype=complex)
    for s, a in state.amplitudes.items():
        vec[int(s.replace("H", "0").replace("V", "1"), 2) if k else 0] = a
    return vec


def from_dense(modes: Sequence, vec: np.ndarray) -> PolState:
    k = len(modes)
    amps = {}
    for idx in np.flatnonzero(np.abs(vec) >= PRUNE):
        s = format(int(idx), f"0{k}b").replace("0", "H").replace("1", "V") if k else ""
        amps[s] = complex(vec[idx])
    return _finish(modes, amps)


def dumps(state: PolState) -> str:
    """Debug dump: one ``<basis> <re> <im>`` line per amplitude, lexicographic order."""
    return "".join(
        f"{s} {a.real!r} {a.imag!r}\n" for s, a in sorted(state.amplitudes.items())
    )


def loads(modes: Sequence, text: str) -> PolState:
    amps = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        s, re_, im = line.split()
        amps[s] = complex(float(re_), float(im))
    return PolState(tuple(modes), amps)
