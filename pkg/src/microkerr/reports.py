"""Report tables and CSV emission.

Floats are written with ``precision`` significant digits (``%.{p}g``), so
precision 17 round-trips every double exactly.  Line endings are always
``\\n`` and the decimal separator is ``.``, making output byte-identical for
identical inputs on platforms sharing IEEE-754 double arithmetic and the same
numpy/numba builds.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

import numpy as np

from .concentration import RunStats, SourceSpec, run_batch
from .molecule import (
    DeviceParams,
    check_adiabatic,
    cross_kerr_chi,
    ejm_sweep,
    level_spacing,
    spectrum,
)
from .parity import parity_phases
from .readout import (
    HomodyneModel,
    KerrChannel,
    ProbeState,
    phase_shift,
    quadrature_means,
    worst_pairwise_error,
)

DEVICE_SWEEP_COLUMNS = ("ejm_ratio", "e31_ghz", "e32_ghz", "e31_minus_e42_ghz", "chi_mhz")
PHASE_COLUMNS = ("n", "theta_rad", "delta_theta_rad")
TRIAL_COLUMNS = ("trial", "kept", "qnd_class", "v_count", "branch", "fidelity")
X_SQ_COLUMNS = (
    "x_sq", "trials", "successes", "success_rate", "analytic_rate", "sigma", "z_score",
    "mean_fidelity",
)
ALPHA_COLUMNS = ("probe_alpha", "min_mean_separation", "misclassification", "trials", "misreads")


def fmt(value, precision: int = 6) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{precision}g")
    return str(value)


def write_csv(stream, columns: Sequence[str], rows: Iterable[Sequence], precision: int = 6) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v, precision) for v in row])


def csv_text(columns, rows, precision: int = 6) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, rows, precision)
    return buf.getvalue()


def _parse_cell(text: str):
    if text == "":
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_csv(stream) -> tuple[list[str], list[list]]:
    """Parse a CSV written by :func:`write_csv`; cells come back as int, float, str or None."""
    r = csv.reader(stream)
    header = next(r)
    return header, [[_parse_cell(c) for c in row] for row in r]


# device

def device_report(p: DeviceParams) -> list[tuple[str, float]]:
    s = spectrum(p)
    chi = cross_kerr_chi(p)
    adi = check_adiabatic(p)
    return [
        ("E1_ghz", s.E1),
        ("E2_ghz", s.E2),
        ("E3_ghz", s.E3),
        ("E4_ghz", s.E4),
        ("e31_ghz", level_spacing(s, 3, 1)),
        ("e32_ghz", level_spacing(s, 3, 2)),
        ("e31_minus_e42_ghz", level_spacing(s, 3, 1) - level_spacing(s, 4, 2)),
        ("theta_mix_rad", s.theta_mix),
        ("chi_mhz", abs(chi) * 1e3),
        ("chi_signed_mhz", chi * 1e3),
        ("pump_ratio", adi.pump_ratio),
        ("detuning_ratio", adi.detuning_ratio),
    ]


def device_sweep_rows(p: DeviceParams, points: int = 101) -> list[tuple]:
    return [tuple(r) for r in ejm_sweep(p, np.linspace(0.0, 1.0, points))]


# phases

def phase_rows(ch: KerrChannel, n_max: int = 4) -> list[tuple]:
    theta0 = phase_shift(0, ch)
    rows = []
    for n in range(n_max + 1):
        th = phase_shift(n, ch)
        # differential shift on the unwrapped branch, reduced mod 2pi
        delta = math.fmod(th - theta0, 2 * math.pi)
        if delta < 0:
            delta += 2 * math.pi
        rows.append((n, th, delta))
    return rows


# protocol runs

def trial_rows(stats: RunStats) -> list[tuple]:
    t = stats.table
    rows = []
    cols = zip(t.kept.tolist(), t.read_class.tolist(), t.v_count.tolist(), t.fidelity.tolist())
    for i, (kept, klass, v, fid) in enumerate(cols):
        rows.append((
            i,
            kept,
            klass,
            v if kept else None,
            ("minus" if v % 2 else "plus") if kept else None,
            fid,
        ))
    return rows


def summary_lines(stats: RunStats) -> list[tuple[str, object]]:
    return [
        ("trials", stats.trials),
        ("successes", stats.successes),
        ("success_rate", stats.success_rate),
        ("analytic_rate", stats.analytic_rate),
        ("sigma", stats.sigma),
        ("mean_fidelity", stats.mean_fidelity),
        ("misreads", stats.misreads),
        ("seed", stats.seed),
    ]


def x_sq_sweep_rows(values, n_parties, ch, probe, model, trials, seed, workers=1, backend=None):
    rows = []
    for x_sq in values:
        src = SourceSpec.from_x_sq(float(x_sq), n_parties)
        st = run_batch(src, ch, probe, model, trials, seed, workers=workers, backend=backend)
        sigma = st.sigma
        diff = st.success_rate - st.analytic_rate
        z = diff / sigma if sigma > 0 else (0.0 if diff == 0 else math.inf)
        rows.append((float(x_sq), trials, st.successes, st.success_rate, st.analytic_rate,
                     sigma, z, st.mean_fidelity))
    return rows


def alpha_sweep_rows(values, src, ch, trials, seed, workers=1, backend=None):
    model = HomodyneModel("gaussian")
    rows = []
    for a in values:
        probe = ProbeState(complex(a))
        means = quadrature_means(probe.amplitude, parity_phases(ch))
        s = sorted(means)
        dmin = min(b - a_ for a_, b in zip(s, s[1:]))
        st = run_batch(src, ch, probe, model, trials, seed, workers=workers, backend=backend)
        rows.append((float(a), dmin, worst_pairwise_error(means), trials, st.misreads))
    return rows
