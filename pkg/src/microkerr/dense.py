"""Dense 2^k state-vector reference.

Independent of the sparse amplitude maps: states are plain complex arrays
reshaped to one axis per mode (axis i = mode i, index 0 = H, 1 = V).  Used
as the oracle for the sparse pipeline.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

ROTATE45 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def copy_state(x: complex, y: complex, k: int) -> np.ndarray:
    """x|H..H> + y|V..V> on k modes."""
    v = np.zeros(2**k, dtype=complex)
    v[0] = x
    v[-1] = y
    return v


def product(*vecs: np.ndarray) -> np.ndarray:
    return reduce(np.kron, vecs)


def permute_modes(vec: np.ndarray, order) -> np.ndarray:
    """Return the vector with new mode i taken from old mode ``order[i]``."""
    k = len(order)
    return vec.reshape((2,) * k).transpose(order).reshape(-1)


def apply_1mode(vec: np.ndarray, mat: np.ndarray, i: int) -> np.ndarray:
    k = int(np.log2(vec.size))
    t = vec.reshape((2,) * k)
    t = np.moveaxis(np.tensordot(mat, t, axes=([1], [i])), 0, i)
    return t.reshape(-1)


def rotate45(vec: np.ndarray, i: int) -> np.ndarray:
    return apply_1mode(vec, ROTATE45, i)


def phase_flip(vec: np.ndarray, i: int, which: int = 0) -> np.ndarray:
    diag = np.ones(2)
    diag[which] = -1.0
    return apply_1mode(vec, np.diag(diag), i)


def mode_bits(k: int, i: int) -> np.ndarray:
    """Polarization bit (0=H, 1=V) of mode i for every basis index."""
    return (np.arange(2**k) >> (k - 1 - i)) & 1


def h_count_mask(k: int, modes, count: int) -> np.ndarray:
    h = sum(1 - mode_bits(k, i) for i in modes)
    return h == count


def normalize(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def measure_mode(vec: np.ndarray, i: int, outcome: int) -> tuple[float, np.ndarray]:
    """Probability of ``outcome`` on mode i and the normalized post-state with the mode removed."""
    k = int(np.log2(vec.size))
    t = np.take(vec.reshape((2,) * k), outcome, axis=i).reshape(-1)
    p = float(np.vdot(t, t).real) / float(np.vdot(vec, vec).real)
    return p, (normalize(t) if p > 0 else t)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)
