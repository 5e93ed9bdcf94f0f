"""Counter-based per-trial random substreams.

Trial ``t`` of a batch seeded with ``seed`` owns raw Philox outputs
``[t * DRAWS_PER_TRIAL, (t + 1) * DRAWS_PER_TRIAL)`` of the stream keyed by
``seed``.  Any contiguous block of trials can therefore be generated
independently, which makes batch results independent of how trials are
partitioned across workers.

Slot layout inside one trial:

    0        Born choice of the parity branch
    1, 2     Box-Muller pair for the homodyne noise
    3 ...    one uniform per photon detection, in detection order
"""

from __future__ import annotations

import numpy as np

DRAWS_PER_TRIAL = 16
_BLOCK = 4  # Philox4x64 yields 4 words per counter step
MAX_DETECTIONS = DRAWS_PER_TRIAL - 3


def raw_block(seed: int, start: int, count: int) -> np.ndarray:
    """Raw uint64 words for trials ``start .. start + count - 1``, shape (count, DRAWS_PER_TRIAL)."""
    bg = np.random.Philox(key=seed)
    bg.advance(start * (DRAWS_PER_TRIAL // _BLOCK))
    return bg.random_raw(count * DRAWS_PER_TRIAL).reshape(count, DRAWS_PER_TRIAL)


def to_uniform(raw: np.ndarray) -> np.ndarray:
    """53-bit uniforms in [0, 1)."""
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def box_muller(u1, u2):
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def trial_draws(seed: int, start: int, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a block into (branch uniform, homodyne normal, detection uniforms)."""
    u = to_uniform(raw_block(seed, start, count))
    return u[:, 0].copy(), box_muller(u[:, 1], u[:, 2]), u[:, 3:].copy()


class TrialStream:
    """The random stream of a single trial.

    Quacks like the subset of ``numpy.random.Generator`` the protocol uses:
    ``random()`` walks the uniform slots (0, 3, 4, ...) and
    ``standard_normal()`` consumes the Box-Muller pair.
    """

    def __init__(self, seed: int, trial: int):
        self.seed, self.trial = seed, trial
        self._u = to_uniform(raw_block(seed, trial, 1)[0])
        self._uniform_slots = [0] + list(range(3, DRAWS_PER_TRIAL))
        self._normal_used = False

    def random(self) -> float:
        if not self._uniform_slots:
            raise RuntimeError(f"trial {self.trial} exhausted its uniform draws")
        return float(self._u[self._uniform_slots.pop(0)])

    def standard_normal(self) -> float:
        if self._normal_used:
            raise RuntimeError(f"trial {self.trial} already used its normal draw")
        self._normal_used = True
        # same ufuncs as the batch kernels use
        return float(box_muller(self._u[1:2], self._u[2:3])[0])
