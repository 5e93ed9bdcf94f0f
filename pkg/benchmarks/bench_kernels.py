"""Throughput of the three trial engines on identical substreams.

    python benchmarks/bench_kernels.py [--trials N] [--n-parties K] [--gaussian]

Reports trials/second for the numba kernel, the numpy kernel and the
per-trial sparse path (the latter on a smaller sample), and checks that all
three agree on the discrete outcomes.
"""

import argparse
import time

import numpy as np

from microkerr._accel import HAVE_NUMBA
from microkerr.concentration import SourceSpec, run_batch
from microkerr.molecule import REFERENCE_DEVICE, cross_kerr_chi
from microkerr.readout import HomodyneModel, KerrChannel, ProbeState


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--python-trials", type=int, default=5000)
    ap.add_argument("--n-parties", type=int, default=2)
    ap.add_argument("--x-sq", type=float, default=0.5)
    ap.add_argument("--gaussian", action="store_true")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    ch = KerrChannel.from_lab_units(abs(cross_kerr_chi(REFERENCE_DEVICE)), 10.0, 20.0)
    src = SourceSpec.from_x_sq(args.x_sq, args.n_parties)
    probe = ProbeState(40.0)
    model = HomodyneModel("gaussian" if args.gaussian else "ideal")

    def batch(backend, trials, engine="kernel"):
        return run_batch(src, ch, probe, model, trials, args.seed,
                         workers=args.workers, backend=backend, engine=engine)

    results = {}
    if HAVE_NUMBA:
        batch("numba", 10)  # compile outside the timing
        results["numba"] = timed(lambda: batch("numba", args.trials))
    results["numpy"] = timed(lambda: batch("numpy", args.trials))
    results["python"] = timed(lambda: batch(None, args.python_trials, "python"), repeat=1)

    print(f"n_parties={args.n_parties} x_sq={args.x_sq} mode={model.mode.value} workers={args.workers}")
    print(f"{'engine':<8s}{'trials':>10s}{'seconds':>10s}{'trials/s':>14s}")
    for name, (sec, st) in results.items():
        print(f"{name:<8s}{st.trials:>10d}{sec:>10.3f}{st.trials / sec:>14.0f}")

    ref = results["numpy"][1].table
    py = results["python"][1].table
    m = len(py)
    same = (np.array_equal(ref.read_class[:m], py.read_class)
            and np.array_equal(ref.v_count[:m], py.v_count))
    if HAVE_NUMBA:
        nb = results["numba"][1]
        same = same and nb == results["numpy"][1]
    print("engines agree:", "yes" if same else "NO")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
