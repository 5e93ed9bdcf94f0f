"""Entanglement concentration of partially entangled photon pairs and GHZ states.

Two copies of x|H..H> + y|V..V> are shared by n parties (party p holds photon
p of each copy).  Party 2 runs the parity detector on its two photons; only
the odd-parity result is kept.  Every party then rotates its copy-B photon by
45 degrees and detects it behind a PBS.  An even number of V clicks leaves
copy A in (|H..H> + |V..V>)/sqrt2; an odd number leaves the minus-sign
state, which a single-photon sign flip repairs.

Three execution paths share the same per-trial random substreams:

* :func:`run_trial`: sparse amplitude maps, one trial at a time, full record;
* :func:`oracle_replay`: dense state vectors replaying a recorded transcript;
* :func:`run_batch`: compiled/vectorized kernels for large batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import dense
from .errors import ConfigError, IncompleteDetections, TranscriptMismatch
from .kernels import simulate_trials
from .parity import ParityClass, parity_measure, parity_phases
from .polstate import (
    PolState,
    cat_state,
    detect,
    fidelity,
    phase_flip,
    product_state,
    rotate45,
)
from .readout import (
    HomodyneMode,
    HomodyneModel,
    KerrChannel,
    ProbeState,
    check_separated,
    quadrature_means,
)
from .streams import MAX_DETECTIONS, TrialStream, trial_draws


@dataclass(frozen=True)
class SourceSpec:
    x: complex
    y: complex
    n_parties: int = 2

    def __post_init__(self):
        norm = abs(self.x) ** 2 + abs(self.y) ** 2
        if abs(norm - 1.0) > 1e-10:
            raise ConfigError(f"|x|^2 + |y|^2 = {norm!r}, expected 1")
        if not isinstance(self.n_parties, (int, np.integer)) or self.n_parties < 2:
            raise ConfigError(f"n_parties must be an integer >= 2, got {self.n_parties!r}")
        if self.n_parties > MAX_DETECTIONS:
            raise ConfigError(f"n_parties above {MAX_DETECTIONS} is not supported")

    @classmethod
    def from_x_sq(cls, x_sq: float, n_parties: int = 2) -> "SourceSpec":
        if not 0.0 <= x_sq <= 1.0:
            raise ConfigError(f"x_sq must lie in [0, 1], got {x_sq!r}")
        return cls(math.sqrt(x_sq), math.sqrt(1.0 - x_sq), n_parties)

    @property
    def analytic_rate(self) -> float:
        return 2.0 * abs(self.x) ** 2 * abs(self.y) ** 2

    @property
    def copy_a(self) -> tuple:
        if self.n_parties == 2:
            return ("u1", "u2")
        return tuple(range(1, self.n_parties + 1))

    @property
    def copy_b(self) -> tuple:
        if self.n_parties == 2:
            return ("d1", "d2")
        return tuple(range(self.n_parties + 1, 2 * self.n_parties + 1))

    @property
    def modes(self) -> tuple:
        return self.copy_a + self.copy_b

    @property
    def qnd_modes(self) -> tuple:
        """Party 2's photons from both copies."""
        return self.copy_a[1], self.copy_b[1]

    def initial_state(self) -> PolState:
        return product_state([(self.x, self.y)] * 2, [self.copy_a, self.copy_b])


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


class Target(str, Enum):
    PSI_PLUS = "PsiPlus"
    PHI_PLUS = "PhiPlus"


def detector_names(party: int) -> dict:
    """PBS outputs of party ``party`` (1-based): transmitted H on D(2p-1), reflected V on D(2p)."""
    return {"H": f"D{2 * party - 1}", "V": f"D{2 * party}"}


def classify_coincidence(detections, n_parties: int) -> Branch:
    """Even number of V clicks -> PLUS, odd -> MINUS."""
    if len(detections) != n_parties or len({d.mode for d in detections}) != n_parties:
        raise IncompleteDetections(
            f"expected one detection on each of {n_parties} modes, got {len(detections)}"
        )
    v = sum(d.outcome == "V" for d in detections)
    return Branch.PLUS if v % 2 == 0 else Branch.MINUS


@dataclass(frozen=True)
class Transcript:
    """Branch choices of one trial, sufficient to replay it deterministically."""

    qnd_branch: ParityClass
    read_class: ParityClass
    outcomes: tuple = ()


@dataclass(frozen=True)
class TrialOutcome:
    kept: bool
    qnd_class: ParityClass
    detections: tuple
    corrected: bool
    final_fidelity: float
    target: Target
    true_class: ParityClass
    branch: Branch | None = None
    branch_fidelity: float = 0.0
    homodyne_error: float = 0.0
    transcript: Transcript | None = None
    final_state: PolState | None = field(default=None, repr=False)

    @property
    def v_count(self) -> int:
        return sum(d.outcome == "V" for d in self.detections) if self.kept else -1

    @property
    def misread(self) -> bool:
        return self.qnd_class != self.true_class


def branch_state(src: SourceSpec, branch: Branch) -> PolState:
    """State copy A is left in for each coincidence branch, before correction."""
    if branch is Branch.PLUS:
        return cat_state(src.copy_a, +1)
    return cat_state(src.copy_a, -1)


def run_trial(
    src: SourceSpec,
    ch: KerrChannel,
    probe: ProbeState,
    model: HomodyneModel,
    rng,
    correction_party: int = 0,
) -> TrialOutcome:
    """One pass of the protocol on the sparse state representation."""
    target = Target.PSI_PLUS if src.n_parties == 2 else Target.PHI_PLUS
    m1, m2 = src.qnd_modes
    rec = parity_measure(src.initial_state(), m1, m2, ch, probe, model, rng)
    read = rec.outcome.klass
    if read != ParityClass.ODD:
        return TrialOutcome(
            kept=False, qnd_class=read, detections=(), corrected=False,
            final_fidelity=0.0, target=target, true_class=rec.true_klass,
            homodyne_error=rec.homodyne_error,
            transcript=Transcript(rec.true_klass, read),
        )

    state = rec.collapsed
    for m in src.copy_b:
        state = rotate45(state, m)
    events = []
    for party, m in enumerate(src.copy_b, start=1):
        ev, state = detect(state, m, rng, detector_names(party))
        events.append(ev)
    branch = classify_coincidence(events, src.n_parties)
    branch_fid = fidelity(state, branch_state(src, branch))
    corrected = branch is Branch.MINUS
    if corrected:
        state = phase_flip(state, src.copy_a[correction_party], "H")
    return TrialOutcome(
        kept=True,
        qnd_class=read,
        detections=tuple(events),
        corrected=corrected,
        final_fidelity=fidelity(state, cat_state(src.copy_a)),
        target=target,
        true_class=rec.true_klass,
        branch=branch,
        branch_fidelity=branch_fid,
        homodyne_error=rec.homodyne_error,
        transcript=Transcript(rec.true_klass, read, tuple(e.outcome for e in events)),
        final_state=state,
    )


@dataclass(frozen=True)
class ReplayResult:
    after_qnd: np.ndarray
    after_rotation: np.ndarray | None = None
    before_correction: np.ndarray | None = None
    final: np.ndarray | None = None


def oracle_replay(src: SourceSpec, transcript: Transcript, correction_party: int = 0) -> ReplayResult:
    """Replay recorded branch choices on dense 2^(2n) state vectors.

    Register layout matches the sparse pipeline: copy A modes, then copy B
    modes.  Returned vectors live on the modes still registered at each
    stage; ``final`` is the corrected copy-A state.
    """
    n = src.n_parties
    k = 2 * n
    vec = dense.product(dense.copy_state(src.x, src.y, n), dense.copy_state(src.x, src.y, n))
    qa, qb = 1, n + 1
    proj = vec * dense.h_count_mask(k, (qa, qb), int(transcript.qnd_branch))
    if np.linalg.norm(proj) == 0.0:
        raise TranscriptMismatch(f"parity branch {transcript.qnd_branch!r} has zero amplitude")
    after_qnd = dense.normalize(proj)
    if transcript.read_class != ParityClass.ODD:
        return ReplayResult(after_qnd)

    vec = after_qnd
    for i in range(n, k):
        vec = dense.rotate45(vec, i)
    after_rotation = vec
    if len(transcript.outcomes) != n:
        raise TranscriptMismatch(f"expected {n} detection outcomes, got {len(transcript.outcomes)}")
    for outcome in transcript.outcomes:
        # copy-B modes leave the register in order, so the next one always sits at index n
        p, vec = dense.measure_mode(vec, n, 0 if outcome == "H" else 1)
        if p == 0.0:
            raise TranscriptMismatch(f"detection outcome {outcome} has zero amplitude")
    before = vec
    if sum(o == "V" for o in transcript.outcomes) % 2 == 1:
        vec = dense.phase_flip(vec, correction_party, which=0)
    return ReplayResult(after_qnd, after_rotation, before, vec)


@dataclass(frozen=True)
class TrialTable:
    """Per-trial batch results, trial-ordered."""

    true_class: np.ndarray
    read_class: np.ndarray
    v_count: np.ndarray
    fidelity: np.ndarray
    branch_fidelity: np.ndarray

    @property
    def kept(self) -> np.ndarray:
        return self.read_class == ParityClass.ODD

    def __len__(self):
        return len(self.true_class)


@dataclass(frozen=True)
class RunStats:
    trials: int
    successes: int
    success_rate: float
    analytic_rate: float
    mean_fidelity: float
    seed: int
    misreads: int = 0
    table: TrialTable | None = field(default=None, compare=False, repr=False)

    @property
    def sigma(self) -> float:
        """Binomial standard error of the success rate at the analytic probability."""
        p = self.analytic_rate
        return math.sqrt(p * (1.0 - p) / self.trials)


def _block_params(src: SourceSpec, ch: KerrChannel, probe: ProbeState, model: HomodyneModel):
    gaussian = HomodyneModel(model.mode).mode is HomodyneMode.GAUSSIAN
    means = np.array(quadrature_means(probe.amplitude, parity_phases(ch)))
    if gaussian:
        check_separated(list(means))
    return gaussian, means


def _run_block(src, gaussian, means, seed, start, count, backend):
    u_branch, z, u_det = trial_draws(seed, start, count)
    return simulate_trials(
        src.x, src.y, src.n_parties, 1, src.n_parties + 1, means, gaussian,
        u_branch, z, u_det[:, : src.n_parties], backend=backend,
    )


def _partition(trials: int, parts: int, chunk: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, trials, parts + 1).astype(int)
    blocks = []
    for a, b in zip(bounds, bounds[1:]):
        for s in range(a, b, chunk):
            blocks.append((s, min(chunk, b - s)))
    return blocks


def run_batch(
    src: SourceSpec,
    ch: KerrChannel,
    probe: ProbeState,
    model: HomodyneModel,
    trials: int,
    seed: int,
    workers: int = 1,
    backend: str | None = None,
    engine: str = "kernel",
    chunk: int = 32768,
) -> RunStats:
    """Aggregate ``trials`` independent protocol runs.

    Trial ``t`` always draws from the substream ``(seed, t)``, so the result
    does not depend on ``workers`` or ``chunk``.  ``engine="python"`` routes
    every trial through :func:`run_trial` instead of the batch kernels.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    if engine == "python":
        outs = [run_trial(src, ch, probe, model, TrialStream(seed, t)) for t in range(trials)]
        table = TrialTable(
            true_class=np.array([int(o.true_class) for o in outs], dtype=np.int8),
            read_class=np.array([int(o.qnd_class) for o in outs], dtype=np.int8),
            v_count=np.array([o.v_count for o in outs], dtype=np.int8),
            fidelity=np.array([o.final_fidelity for o in outs]),
            branch_fidelity=np.array([o.branch_fidelity for o in outs]),
        )
    elif engine == "kernel":
        gaussian, means = _block_params(src, ch, probe, model)
        # bound the numpy backend's (chunk, 2^(2n)) working array
        chunk = max(1, min(chunk, (1 << 22) >> (2 * src.n_parties)))
        blocks = _partition(trials, workers, chunk)
        if workers == 1:
            parts = [_run_block(src, gaussian, means, seed, s, c, backend) for s, c in blocks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(
                    lambda b: _run_block(src, gaussian, means, seed, b[0], b[1], backend), blocks
                ))
        table = TrialTable(*(np.concatenate(cols) for cols in zip(*parts)))
    else:
        raise ConfigError(f"unknown engine {engine!r}")

    kept = table.kept
    successes = int(kept.sum())
    mean_fid = float(math.fsum(table.fidelity[kept]) / successes) if successes else 0.0
    return RunStats(
        trials=trials,
        successes=successes,
        success_rate=successes / trials,
        analytic_rate=src.analytic_rate,
        mean_fidelity=mean_fid,
        seed=seed,
        misreads=int((table.true_class != table.read_class).sum()),
        table=table,
    )
