"""Batch trial kernels for the concentration protocol.

Each trial is simulated on a dense 2^(2n) state vector: two copies of
x|H..H> + y|V..V> (copy A on modes 0..n-1, copy B on modes n..2n-1), a parity
projection on modes (qnd_a, qnd_b), 45-degree rotation and H/V detection of
every copy-B mode, and the fidelity of the surviving copy-A state with the
n-party cat state before and after the sign correction.

Two implementations with identical semantics:

* ``_trials_numba``: per-trial loop compiled with numba (nogil, so threads scale).
* ``_trials_numpy``: vectorized across trials, pure numpy.

Randomness is supplied by the caller (see ``streams``) so both consume
identical draws.  Per-trial outputs:

    true_class  H-count branch actually realized by the parity projection
    read_class  branch reported by the homodyne readout
    v_count     number of V detections (-1 when discarded)
    fidelity    fidelity with the cat state after correction (0 when discarded)
    branch_fid  fidelity with the branch-predicted state before correction
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, resolve_backend

ODD = 1
_R = 1.0 / np.sqrt(2.0)


def _trials_numpy(x, y, n, qnd_a, qnd_b, means, gaussian, u_branch, z, u_det):
    T = u_branch.shape[0]
    k = 2 * n
    dim = 1 << k
    allv = (1 << n) - 1

    psi = np.zeros((T, dim), dtype=np.complex128)
    psi[:, 0] = x * x
    psi[:, allv] = x * y
    psi[:, allv << n] = y * x
    psi[:, dim - 1] = y * y

    idx = np.arange(dim)
    ba = (idx >> (k - 1 - qnd_a)) & 1
    bb = (idx >> (k - 1 - qnd_b)) & 1
    klass = (1 - ba) + (1 - bb)
    onehot = (klass[:, None] == np.arange(3)[None, :]).astype(np.float64)

    w = psi.real**2 + psi.imag**2
    probs = w @ onehot
    probs = probs / probs.sum(axis=1, keepdims=True)
    true_class = _born_rows(probs, u_branch)

    psi = psi * (klass[None, :] == true_class[:, None])
    psi /= np.sqrt((psi.real**2 + psi.imag**2).sum(axis=1, keepdims=True))

    if gaussian:
        xq = means[true_class] + z
        read_class = np.argmin(np.abs(xq[:, None] - means[None, :]), axis=1)
    else:
        read_class = true_class.copy()

    for m in range(n, k):
        t = psi.reshape(T, 1 << m, 2, 1 << (k - 1 - m))
        a0 = t[:, :, 0, :].copy()
        a1 = t[:, :, 1, :].copy()
        t[:, :, 0, :] = (a0 + a1) * _R
        t[:, :, 1, :] = (a0 - a1) * _R

    v_count = np.zeros(T, dtype=np.int64)
    pattern = np.zeros(T, dtype=np.int64)
    for j, m in enumerate(range(n, k)):
        t = psi.reshape(T, 1 << m, 2, 1 << (k - 1 - m))
        s_h = (t[:, :, 0, :].real ** 2 + t[:, :, 0, :].imag ** 2).sum(axis=(1, 2))
        s_v = (t[:, :, 1, :].real ** 2 + t[:, :, 1, :].imag ** 2).sum(axis=(1, 2))
        p_h = s_h / (s_h + s_v)
        out = _born_rows(np.stack([p_h, 1.0 - p_h], axis=1), u_det[:, j])
        t[out == 0, :, 1, :] = 0.0
        t[out == 1, :, 0, :] = 0.0
        nrm = np.where(out == 0, s_h, s_v)
        psi /= np.sqrt(nrm)[:, None]
        v_count += out
        pattern = (pattern << 1) | out

    rows = np.arange(T)
    a_h = psi[rows, pattern]
    a_v = psi[rows, (allv << n) | pattern]
    minus = (v_count & 1) == 1
    pre = np.where(minus, a_v - a_h, a_h + a_v)
    post = np.where(minus, -a_h, a_h) + a_v
    branch_fid = np.minimum(1.0, (pre.real**2 + pre.imag**2) / 2.0)
    fid = np.minimum(1.0, (post.real**2 + post.imag**2) / 2.0)

    kept = read_class == ODD
    v_count = np.where(kept, v_count, -1)
    fid = np.where(kept, fid, 0.0)
    branch_fid = np.where(kept, branch_fid, 0.0)
    return (
        true_class.astype(np.int8),
        read_class.astype(np.int8),
        v_count.astype(np.int8),
        fid,
        branch_fid,
    )


def _born_rows(probs, u):
    """Row-wise version of ``polstate.born_choice``."""
    total = probs.sum(axis=1)
    target = u * total
    acc = np.zeros_like(total)
    choice = np.full(total.shape, -1, dtype=np.int64)
    last = np.full(total.shape, -1, dtype=np.int64)
    for j in range(probs.shape[1]):
        p = probs[:, j]
        pos = p > 0.0
        last = np.where(pos, j, last)
        acc = acc + np.where(pos, p, 0.0)
        hit = pos & (choice < 0) & (target < acc)
        choice = np.where(hit, j, choice)
    return np.where(choice < 0, last, choice)


if HAVE_NUMBA:
    import numba

    @numba.njit(cache=True, nogil=True)
    def _born2(p0, p1, u):
        total = p0 + p1
        target = u * total
        acc = 0.0
        last = -1
        if p0 > 0.0:
            last = 0
            acc += p0
            if target < acc:
                return 0
        if p1 > 0.0:
            last = 1
            acc += p1
            if target < acc:
                return 1
        return last

    @numba.njit(cache=True, nogil=True)
    def _born3(p, u):
        total = p[0] + p[1] + p[2]
        target = u * total
        acc = 0.0
        last = -1
        for j in range(3):
            if p[j] > 0.0:
                last = j
                acc += p[j]
                if target < acc:
                    return j
        return last

    @numba.njit(cache=True, nogil=True)
    def _trials_numba_impl(x, y, n, qnd_a, qnd_b, means, gaussian, u_branch, z, u_det,
                           true_out, read_out, v_out, fid_out, bfid_out):
        T = u_branch.shape[0]
        k = 2 * n
        dim = 1 << k
        allv = (1 << n) - 1
        sa = k - 1 - qnd_a
        sb = k - 1 - qnd_b
        psi = np.zeros(dim, dtype=np.complex128)
        probs = np.zeros(3)
        for t in range(T):
            psi[:] = 0.0
            psi[0] = x * x
            psi[allv] = x * y
            psi[allv << n] = y * x
            psi[dim - 1] = y * y

            probs[:] = 0.0
            for i in range(dim):
                c = (1 - ((i >> sa) & 1)) + (1 - ((i >> sb) & 1))
                a = psi[i]
                probs[c] += a.real * a.real + a.imag * a.imag
            tot = probs[0] + probs[1] + probs[2]
            for j in range(3):
                probs[j] /= tot
            tc = _born3(probs, u_branch[t])
            nrm = 0.0
            for i in range(dim):
                c = (1 - ((i >> sa) & 1)) + (1 - ((i >> sb) & 1))
                if c != tc:
                    psi[i] = 0.0
                else:
                    a = psi[i]
                    nrm += a.real * a.real + a.imag * a.imag
            nrm = np.sqrt(nrm)
            for i in range(dim):
                psi[i] /= nrm

            rc = tc
            if gaussian:
                xq = means[tc] + z[t]
                best = np.abs(xq - means[0])
                rc = 0
                for j in range(1, means.shape[0]):
                    d = np.abs(xq - means[j])
                    if d < best:
                        best = d
                        rc = j
            true_out[t] = tc
            read_out[t] = rc
            if rc != 1:
                v_out[t] = -1
                fid_out[t] = 0.0
                bfid_out[t] = 0.0
                continue

            for m in range(n, k):
                bit = 1 << (k - 1 - m)
                for i in range(dim):
                    if i & bit == 0:
                        a0 = psi[i]
                        a1 = psi[i | bit]
                        psi[i] = (a0 + a1) * _R
                        psi[i | bit] = (a0 - a1) * _R

            vc = 0
            pattern = 0
            for j in range(n):
                bit = 1 << (k - 1 - (n + j))
                s_h = 0.0
                s_v = 0.0
                for i in range(dim):
                    a = psi[i]
                    if i & bit == 0:
                        s_h += a.real * a.real + a.imag * a.imag
                    else:
                        s_v += a.real * a.real + a.imag * a.imag
                p_h = s_h / (s_h + s_v)
                out = _born2(p_h, 1.0 - p_h, u_det[t, j])
                keep = s_h if out == 0 else s_v
                r = np.sqrt(keep)
                for i in range(dim):
                    if ((i & bit) != 0) != (out == 1):
                        psi[i] = 0.0
                    else:
                        psi[i] /= r
                vc += out
                pattern = (pattern << 1) | out

            a_h = psi[pattern]
            a_v = psi[(allv << n) | pattern]
            if vc & 1:
                pre = a_v - a_h
            else:
                pre = a_h + a_v
            if vc & 1:
                a_h = -a_h
            post = a_h + a_v
            bf = (pre.real * pre.real + pre.imag * pre.imag) / 2.0
            f = (post.real * post.real + post.imag * post.imag) / 2.0
            v_out[t] = vc
            fid_out[t] = min(1.0, f)
            bfid_out[t] = min(1.0, bf)


def _trials_numba(x, y, n, qnd_a, qnd_b, means, gaussian, u_branch, z, u_det):
    T = u_branch.shape[0]
    true_out = np.empty(T, dtype=np.int8)
    read_out = np.empty(T, dtype=np.int8)
    v_out = np.empty(T, dtype=np.int8)
    fid = np.empty(T)
    bfid = np.empty(T)
    _trials_numba_impl(
        complex(x), complex(y), int(n), int(qnd_a), int(qnd_b),
        np.ascontiguousarray(means, dtype=np.float64), bool(gaussian),
        np.ascontiguousarray(u_branch), np.ascontiguousarray(z),
        np.ascontiguousarray(u_det), true_out, read_out, v_out, fid, bfid,
    )
    return true_out, read_out, v_out, fid, bfid


def simulate_trials(x, y, n, qnd_a, qnd_b, means, gaussian, u_branch, z, u_det, backend=None):
    """Run a block of trials on the selected backend; see module docstring for outputs."""
    if resolve_backend(backend) == "numba":
        return _trials_numba(x, y, n, qnd_a, qnd_b, means, gaussian, u_branch, z, u_det)
    return _trials_numpy(
        complex(x), complex(y), n, qnd_a, qnd_b, np.asarray(means, dtype=np.float64),
        gaussian, u_branch, z, u_det,
    )
