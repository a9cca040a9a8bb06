"""Monte Carlo driver: random scenes, full pipeline runs, MD/FA accounting.

A trial samples target positions (rejection sampling until the requested
cluster occupancy is met), synthesizes received signals, and runs the three
phases end to end: CIR recovery, tap detection, per-cluster subspace
processing with restricted grids, and localization. Estimates are scored
against the truth per field type: a truth is a missed detection when no
same-field estimate lands within the detection radius, and an estimate is a
false alarm when no same-field truth does. Aggregation sums event counts
across trials and divides by summed target counts; both false-alarm rates
use target counts in the denominator, mirroring how the probabilities are
defined rather than normalizing by the number of estimates.

An S-OMP baseline shares Phase I, tap detection, the model-order estimate,
and Phase III with the MUSIC path; only the spectrum search is replaced by
greedy atom selection over the same restricted dictionary.

Trials draw from independent per-trial streams seeded with [seed, trial], so
any trial can be reproduced in isolation and sweeps share common random
numbers across parameter values.
"""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import NamedTuple, Sequence

import numpy as np

from .channel import (
    ClusterMap,
    IrsBsChannel,
    assign_clusters,
    build_cir_series,
    draw_rcs,
    irs_bs_channel,
    tap_index,
)
from .estimation import GroupLassoConfig, group_lasso
from .geometry import FIELD_FAR, FIELD_NEAR, Scene, TargetTruth, UlaGeometry, point_from_irs
from .localize import (
    FarSolveConfig,
    NearSolveConfig,
    TargetEstimate,
    localize_far,
    localize_near,
)
from .ofdm import OfdmConfig, delay_manifold, generate_pilots, simulate_freq_rx
from .subspace import (
    FarPeak,
    IrsSchedule,
    NearPeak,
    SearchRegion,
    SpectrumGrid,
    VirtualBatch,
    build_grids,
    build_virtual,
    calibrate_thresholds,
    design_irs_schedule,
    detect_clusters,
    eigendecompose,
    estimate_target_count,
    music_spectrum_far,
    music_spectrum_near,
    noise_subspace,
    range_from_tap,
    sample_covariance,
    select_peaks,
)


@dataclass(frozen=True)
class TrialConfig:
    """Everything one Monte Carlo run needs, scene scale included.

    The defaults are the desk-scale setup: a 64-element IRS, 256 sub-carriers
    at 100 MHz (3 m taps), 32 blocks, 3 clusters of 4 targets, 200 trials.
    `field_mix` optionally pins how many targets per cluster are near/far;
    left as None the split falls out of area-uniform position sampling.
    """

    num_trials: int = 200
    clusters_per_trial: int = 3
    targets_per_cluster: int = 4
    detection_radius: float = 1.0
    seed: int = 0

    m_i: int = 64
    m_b: int = 4
    n: int = 256
    v: int = 32
    q0: int = 4
    bandwidth: float = 1e8

    wavelength: float = 0.1
    user_pos: tuple[float, float] = (0.0, 0.0)
    irs_pos: tuple[float, float] = (20.0, 20.0)
    bs_pos: tuple[float, float] = (20.0, 15.0)
    near_field_radius: float = 30.0
    sector_radius: float = 45.0
    theta_min: float = 0.0
    theta_max: float = math.pi / 2

    n_taps: int = 32
    cp_len: int = 32
    power: float = 1.0
    noise_var: float = 0.0

    bs_model: str = "near"
    delta: float = 1.0
    twist: float = 0.37

    d_step: float = 0.1
    theta_step: float = math.pi / 1800
    peak_quantile: float = 0.99
    calib_reps: int = 3
    # pinned peak thresholds; None = calibrate from a target-free run
    thr_near: float | None = None
    thr_far: float | None = None

    field_mix: tuple[int, int] | None = None
    min_theta_sep: float = 0.0
    cluster_tap_gap: int = 1
    max_attempts: int = 50_000

    with_baseline: bool = True
    lasso: GroupLassoConfig = field(default_factory=GroupLassoConfig)
    far_solve: FarSolveConfig = field(default_factory=FarSolveConfig)
    near_solve: NearSolveConfig = field(default_factory=NearSolveConfig)

    def __post_init__(self):
        for name in ("num_trials", "targets_per_cluster",
                     "m_i", "m_b", "n", "v", "q0", "n_taps", "max_attempts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        # zero clusters is a legal degenerate scene (nothing to detect)
        if self.clusters_per_trial < 0:
            raise ValueError("clusters_per_trial must be nonnegative")
        if self.detection_radius <= 0.0:
            raise ValueError("detection_radius must be positive")
        if self.bandwidth <= 0.0 or self.sector_radius <= 0.0:
            raise ValueError("bandwidth and sector_radius must be positive")
        if self.field_mix is not None:
            near, far = self.field_mix
            if near < 0 or far < 0 or near + far != self.targets_per_cluster:
                raise ValueError("field_mix must split targets_per_cluster")
            if far > 0 and self.sector_radius <= self.near_field_radius:
                raise ValueError("far targets need sector_radius beyond the near region")
        if self.cluster_tap_gap < 1:
            raise ValueError("cluster_tap_gap must be at least 1")

    @property
    def delta_f(self) -> float:
        return self.bandwidth / self.n

    @property
    def spacing(self) -> float:
        return self.wavelength / 2.0

    def ofdm(self) -> OfdmConfig:
        return OfdmConfig(
            n=self.n, delta_f=self.delta_f, cp_len=self.cp_len, n_taps=self.n_taps,
            q=self.q0, q0=self.q0, v=self.v, power=self.power, noise_var=self.noise_var,
        )

    def region(self) -> SearchRegion:
        return SearchRegion(
            theta_min=self.theta_min, theta_max=self.theta_max, d_max=self.sector_radius
        )


class TruthRecord(NamedTuple):
    pos: tuple[float, float]
    field: str
    cluster: int = 0


class ClusterSpectra(NamedTuple):
    cluster: int
    grid: SpectrumGrid
    near_values: np.ndarray
    far_values: np.ndarray
    thr_near: float
    thr_far: float
    k_hat: int


@dataclass(frozen=True)
class EventCounts:
    """Per-trial target/estimate/event tallies, split by field type."""

    near_targets: int
    far_targets: int
    near_estimates: int
    far_estimates: int
    near_missed: int
    far_missed: int
    near_false: int
    far_false: int


@dataclass(frozen=True)
class TrialResult:
    truths: tuple[TruthRecord, ...]
    estimates: tuple[TargetEstimate, ...]
    baseline_estimates: tuple[TargetEstimate, ...]
    events: EventCounts
    baseline_events: EventCounts | None
    spectra: tuple[ClusterSpectra, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    """Summed event counts with the four derived probabilities.

    A probability with an empty denominator (no targets of that field type in
    any trial) is None, which is deliberately distinct from 0.0.
    """

    num_trials: int
    near_targets: int
    far_targets: int
    near_estimates: int
    far_estimates: int
    near_missed: int
    far_missed: int
    near_false: int
    far_false: int

    @staticmethod
    def _ratio(num: int, den: int) -> float | None:
        return None if den == 0 else num / den

    @property
    def p_md_near(self) -> float | None:
        return self._ratio(self.near_missed, self.near_targets)

    @property
    def p_md_far(self) -> float | None:
        return self._ratio(self.far_missed, self.far_targets)

    @property
    def p_fa_near(self) -> float | None:
        return self._ratio(self.near_false, self.near_targets)

    @property
    def p_fa_far(self) -> float | None:
        return self._ratio(self.far_false, self.far_targets)


@dataclass(frozen=True)
class RunOutcome:
    config: TrialConfig
    report: MetricsReport
    baseline_report: MetricsReport | None
    events: tuple[EventCounts, ...]
    baseline_events: tuple[EventCounts, ...]
    results: tuple[TrialResult, ...]
    seconds: float


class SweepPoint(NamedTuple):
    value: object
    outcome: RunOutcome


# ---------------------------------------------------------------------------
# scene sampling
# ---------------------------------------------------------------------------

def _draw_position(cfg: TrialConfig, rng: np.random.Generator):
    """One candidate target: area-uniform in the search sector.

    Range is redrawn from d_step to keep candidates off the IRS itself, where
    the wavefront curvature model degenerates.
    """
    theta = rng.uniform(cfg.theta_min, cfg.theta_max)
    d = cfg.sector_radius * math.sqrt(rng.uniform())
    if d < cfg.d_step:
        d = cfg.d_step
    pos = point_from_irs(cfg.irs_pos, d, theta)
    d_ut = math.hypot(pos[0] - cfg.user_pos[0], pos[1] - cfg.user_pos[1])
    d_ib = math.hypot(cfg.bs_pos[0] - cfg.irs_pos[0], cfg.bs_pos[1] - cfg.irs_pos[1])
    total = d + d_ut + d_ib
    return (float(pos[0]), float(pos[1])), d, theta, tap_index(total, cfg.n, cfg.delta_f)


def sample_scene(cfg: TrialConfig, rng: np.random.Generator) -> Scene:
    """Scene with exactly clusters_per_trial occupied taps of equal size.

    Each cluster grows from a seed draw whose tap index becomes the cluster
    tap; the remaining members are rejection-sampled until they share it. A
    cluster that rejects too long in a row abandons its tap and reseeds,
    since some taps cannot host every requested structure (a forced far
    member needs the window to reach beyond the near region). Raises
    RuntimeError when the global attempt budget runs out, which happens when
    the request is infeasible in every tap.
    """
    budget = cfg.max_attempts
    used_taps: list[int] = []
    targets: list[TargetTruth] = []

    def spend():
        nonlocal budget
        budget -= 1
        if budget < 0:
            raise RuntimeError("scene sampling exhausted its attempt budget")

    def wanted_field(members_done: int) -> str | None:
        if cfg.field_mix is None:
            return None
        return FIELD_NEAR if members_done < cfg.field_mix[0] else FIELD_FAR

    for _ in range(cfg.clusters_per_trial):
        cluster_members: list[tuple[tuple[float, float], float]] = []
        tap = -1
        stalled = 0
        while len(cluster_members) < cfg.targets_per_cluster:
            spend()
            if tap >= 0 and stalled > 200:
                used_taps.remove(tap)
                cluster_members.clear()
                tap = -1
                stalled = 0
            stalled += 1
            pos, d, theta, l = _draw_position(cfg, rng)
            if l > cfg.n_taps:
                continue
            if tap < 0:
                if any(abs(l - u) < cfg.cluster_tap_gap for u in used_taps):
                    continue
            elif l != tap:
                continue
            want = wanted_field(len(cluster_members))
            if want is not None:
                is_near = d <= cfg.near_field_radius
                if is_near != (want == FIELD_NEAR):
                    continue
            if cfg.min_theta_sep > 0.0 and any(
                abs(theta - t) < cfg.min_theta_sep for _, t in cluster_members
            ):
                continue
            if tap < 0:
                tap = l
                used_taps.append(l)
            cluster_members.append((pos, theta))
            stalled = 0
        targets.extend(TargetTruth(pos=p) for p, _ in cluster_members)

    return Scene(
        user_pos=cfg.user_pos,
        irs_pos=cfg.irs_pos,
        bs_pos=cfg.bs_pos,
        targets=tuple(targets),
        wavelength=cfg.wavelength,
        near_field_radius=cfg.near_field_radius,
        irs_array=UlaGeometry(cfg.m_i, cfg.spacing),
        bs_array=UlaGeometry(cfg.m_b, cfg.spacing),
    )


# ---------------------------------------------------------------------------
# event scoring
# ---------------------------------------------------------------------------

def classify_events(
    truths: Sequence[TruthRecord],
    estimates: Sequence[TargetEstimate],
    r_e: float,
) -> EventCounts:
    """Count missed detections and false alarms at detection radius r_e.

    Matching is unassigned: any same-field estimate within r_e clears a
    truth, and one estimate may clear several truths.
    """
    if r_e <= 0.0:
        raise ValueError("detection radius must be positive")

    def split(items, key):
        near = [it for it in items if key(it) == FIELD_NEAR]
        far = [it for it in items if key(it) == FIELD_FAR]
        return near, far

    near_t, far_t = split(truths, lambda t: t.field)
    near_e, far_e = split(estimates, lambda e: e.field)

    def covered(point, others) -> bool:
        return any(math.dist(point, o.pos) <= r_e for o in others)

    return EventCounts(
        near_targets=len(near_t),
        far_targets=len(far_t),
        near_estimates=len(near_e),
        far_estimates=len(far_e),
        near_missed=sum(not covered(t.pos, near_e) for t in near_t),
        far_missed=sum(not covered(t.pos, far_e) for t in far_t),
        near_false=sum(not covered(e.pos, near_t) for e in near_e),
        far_false=sum(not covered(e.pos, far_t) for e in far_e),
    )


def aggregate(events: Sequence[EventCounts]) -> MetricsReport:
    """Summed counts over trials; see MetricsReport for the ratio convention."""
    if not events:
        raise ValueError("aggregate needs at least one trial")
    total = {f.name: sum(getattr(e, f.name) for e in events)
             for f in dataclasses.fields(EventCounts)}
    return MetricsReport(num_trials=len(events), **total)


# ---------------------------------------------------------------------------
# S-OMP baseline
# ---------------------------------------------------------------------------

def somp_baseline(
    batch: VirtualBatch,
    grid: SpectrumGrid,
    k_hat: int,
) -> tuple[list[NearPeak], list[FarPeak]]:
    """Greedy simultaneous OMP over the cluster's restricted dictionary.

    Atoms are the unit-normalized virtual steering vectors of every masked
    near cell and every kept far bearing. Each step picks the atom with the
    largest correlation summed across the block snapshots, then deflates the
    snapshots by projecting onto the orthogonal complement of everything
    selected so far. Returns the picks in the shared peak types, scored by
    the correlation at selection time.
    """
    if k_hat <= 0:
        return [], []

    near_idx = np.nonzero(grid.near_mask)
    near_d = grid.near_d[near_idx[0]]
    near_theta = grid.near_theta[near_idx[1]]
    n_near = near_d.size

    d_cols = np.concatenate([near_d, np.full(grid.far_count, np.inf)])
    theta_cols = np.concatenate([near_theta, grid.far_theta])
    if d_cols.size == 0:
        return [], []

    atoms = batch.manifold.psi_batch(d_cols, theta_cols)
    atoms = atoms / np.linalg.norm(atoms, axis=0, keepdims=True)

    snapshots = batch.vectors.T  # (dim, V)
    residual = snapshots
    selected: list[int] = []
    scores: list[float] = []
    for _ in range(min(k_hat, d_cols.size)):
        corr = np.abs(atoms.conj().T @ residual).sum(axis=1)
        if selected:
            corr[selected] = -np.inf
        j = int(np.argmax(corr))
        selected.append(j)
        scores.append(float(corr[j]))
        basis, _ = np.linalg.qr(atoms[:, selected])
        residual = snapshots - basis @ (basis.conj().T @ snapshots)

    near_picks = [
        NearPeak(float(d_cols[j]), float(theta_cols[j]), s)
        for j, s in zip(selected, scores) if j < n_near
    ]
    far_picks = [
        FarPeak(float(theta_cols[j]), s)
        for j, s in zip(selected, scores) if j >= n_near
    ]
    return near_picks, far_picks


# ---------------------------------------------------------------------------
# one trial, many trials, sweeps
# ---------------------------------------------------------------------------

def _localize_picks(
    scene: Scene,
    cfg: TrialConfig,
    cluster: int,
    d_utib: float,
    near_picks: Sequence[NearPeak],
    far_picks: Sequence[FarPeak],
) -> list[TargetEstimate]:
    out: list[TargetEstimate] = []
    for pk in near_picks:
        out.append(
            localize_near(scene, d_utib, pk.theta, pk.d, cfg.near_solve, cluster=cluster)
        )
    for pk in far_picks:
        try:
            out.append(localize_far(scene, d_utib, pk.theta, cfg.far_solve, cluster=cluster))
        except ValueError:
            # bearing/window combination with no consistent far position;
            # dropping it simply forfeits the detection
            continue
    return out


class SynthesizedTrial(NamedTuple):
    """Everything the synthesis front half of a trial produces.

    The rng is the same generator that sampled the scene, carried forward so
    the estimation half draws from the continuation of the trial's stream.
    """

    scene: Scene
    truths: tuple[TruthRecord, ...]
    irs_bs: IrsBsChannel
    schedule: IrsSchedule
    clusters: ClusterMap
    rcs: np.ndarray
    cir: np.ndarray
    pilots: np.ndarray
    observations: np.ndarray
    rng: np.random.Generator


def synthesize_trial(cfg: TrialConfig, trial: int) -> SynthesizedTrial:
    """Scene draw and received-signal synthesis for one trial index."""
    rng = np.random.default_rng([cfg.seed, trial])
    scene = sample_scene(cfg, rng)
    irs_bs = irs_bs_channel(scene, delta=cfg.delta, model=cfg.bs_model)
    schedule = design_irs_schedule(irs_bs, cfg.q0, cfg.twist)
    clusters = assign_clusters(scene, cfg.n, cfg.delta_f, cfg.n_taps)
    truths = tuple(
        TruthRecord(
            pos=scene.targets[k].pos,
            field=scene.field_tag(k),
            cluster=int(clusters.labels[k]),
        )
        for k in range(scene.num_targets)
    )
    rcs = draw_rcs(rng, cfg.v, scene.num_targets)
    cir = build_cir_series(scene, irs_bs, schedule.phi, rcs, clusters, cfg.n_taps)
    ofdm_cfg = cfg.ofdm()
    pilots = generate_pilots(ofdm_cfg, rng)
    observations = simulate_freq_rx(ofdm_cfg, pilots, cir, rng)
    return SynthesizedTrial(
        scene=scene, truths=truths, irs_bs=irs_bs, schedule=schedule,
        clusters=clusters, rcs=rcs, cir=cir, pilots=pilots,
        observations=observations, rng=rng,
    )


def run_trial(cfg: TrialConfig, trial: int, keep_spectra: bool = False) -> TrialResult:
    """Run one full randomized trial and score it.

    The trial index seeds an independent stream, so trials are reproducible
    individually and identical across parameter sweeps that share the seed.
    """
    synth = synthesize_trial(cfg, trial)
    scene, truths, rng = synth.scene, synth.truths, synth.rng
    irs_bs, schedule = synth.irs_bs, synth.schedule

    ofdm_cfg = cfg.ofdm()
    estimate = group_lasso(
        synth.observations, synth.pilots, delay_manifold(cfg.n, cfg.n_taps),
        ofdm_cfg, cfg.lasso,
    )
    detection = detect_clusters(estimate, cfg.n, cfg.delta_f)

    estimates: list[TargetEstimate] = []
    baseline: list[TargetEstimate] = []
    spectra: list[ClusterSpectra] = []
    region = cfg.region()

    for l in detection.clusters:
        batch = build_virtual(
            estimate, l, schedule, irs_bs, cfg.wavelength, cfg.spacing
        )
        eigenvalues, eigenvectors = eigendecompose(sample_covariance(batch.vectors))
        k_hat = estimate_target_count(eigenvalues, cfg.q0, cfg.m_b, cfg.v)
        if k_hat == 0:
            continue
        u_noise = noise_subspace(eigenvectors, k_hat)
        grid = build_grids(
            scene, cfg.n, cfg.delta_f, cfg.n_taps, region, l, cfg.d_step, cfg.theta_step
        )
        near_vals = music_spectrum_near(batch.manifold, u_noise, grid)
        far_vals = music_spectrum_far(batch.manifold, u_noise, grid)

        if cfg.thr_near is not None and cfg.thr_far is not None:
            thr_near, thr_far = cfg.thr_near, cfg.thr_far
        else:
            tail = eigenvalues[k_hat:]
            noise_floor = float(tail.mean()) if tail.size else float(eigenvalues[-1])
            thr_near, thr_far = calibrate_thresholds(
                batch.manifold, grid, max(noise_floor, 1e-12), cfg.v, k_hat, rng,
                quantile=cfg.peak_quantile, n_reps=cfg.calib_reps,
            )
            if cfg.thr_near is not None:
                thr_near = cfg.thr_near
            if cfg.thr_far is not None:
                thr_far = cfg.thr_far
        near_peaks, far_peaks = select_peaks(
            grid, near_vals, far_vals, k_hat, thr_near, thr_far
        )
        d_utib = range_from_tap(l, cfg.n, cfg.delta_f)
        estimates.extend(
            _localize_picks(scene, cfg, l, d_utib, near_peaks, far_peaks)
        )
        if cfg.with_baseline:
            omp_near, omp_far = somp_baseline(batch, grid, k_hat)
            baseline.extend(
                _localize_picks(scene, cfg, l, d_utib, omp_near, omp_far)
            )
        if keep_spectra:
            spectra.append(ClusterSpectra(
                cluster=l, grid=grid, near_values=near_vals, far_values=far_vals,
                thr_near=thr_near, thr_far=thr_far, k_hat=k_hat,
            ))

    events = classify_events(truths, estimates, cfg.detection_radius)
    baseline_events = (
        classify_events(truths, baseline, cfg.detection_radius)
        if cfg.with_baseline else None
    )
    return TrialResult(
        truths=truths,
        estimates=tuple(estimates),
        baseline_estimates=tuple(baseline),
        events=events,
        baseline_events=baseline_events,
        spectra=tuple(spectra),
    )


def _trial_task(cfg: TrialConfig, keep_spectra_trial: int, trial: int) -> TrialResult:
    return run_trial(cfg, trial, keep_spectra=trial == keep_spectra_trial)


def run_many(cfg: TrialConfig, workers: int = 1, keep_spectra_trial: int = -1) -> RunOutcome:
    """All trials of a config, serial or on a process pool.

    Reduction is ordered by trial index either way, so the outcome does not
    depend on worker scheduling. Pass a trial index as keep_spectra_trial to
    retain that one trial's spectra (arrays are bulky, so only one is kept).
    """
    started = time.perf_counter()
    task = partial(_trial_task, cfg, keep_spectra_trial)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(cfg.num_trials)))
    else:
        results = [task(t) for t in range(cfg.num_trials)]

    events = tuple(r.events for r in results)
    baseline_events = tuple(
        r.baseline_events for r in results if r.baseline_events is not None
    )
    return RunOutcome(
        config=cfg,
        report=aggregate(events),
        baseline_report=aggregate(baseline_events) if baseline_events else None,
        events=events,
        baseline_events=baseline_events,
        results=tuple(results),
        seconds=time.perf_counter() - started,
    )


_AXIS_ALIASES = {
    "m_b": "m_b",
    "q0": "q0",
    "k": "targets_per_cluster",
    "targets_per_cluster": "targets_per_cluster",
    "r_e": "detection_radius",
    "re": "detection_radius",
    "detection_radius": "detection_radius",
    "bandwidth": "bandwidth",
}


def _resolve_axis(axis) -> tuple[str, ...]:
    names = (axis,) if isinstance(axis, str) else tuple(axis)
    resolved = []
    for name in names:
        key = name.lower()
        if key not in _AXIS_ALIASES:
            raise ValueError(f"unknown sweep axis {name!r}")
        resolved.append(_AXIS_ALIASES[key])
    return tuple(resolved)


def sweep(axis, values: Sequence, cfg: TrialConfig, workers: int = 1) -> list[SweepPoint]:
    """One aggregated run per axis value, common random numbers throughout.

    `axis` is one of M_B, Q0, K, R_e, bandwidth (case-insensitive), or a
    tuple of several so that coupled settings such as a fixed q0*m_b product
    can move together; values then carry matching tuples.
    """
    fields = _resolve_axis(axis)
    points: list[SweepPoint] = []
    for value in values:
        update = value if isinstance(value, tuple) else (value,)
        if len(update) != len(fields):
            raise ValueError("sweep value arity does not match the axis")
        point_cfg = dataclasses.replace(cfg, **dict(zip(fields, update)))
        points.append(SweepPoint(value=value, outcome=run_many(point_cfg, workers)))
    return points
