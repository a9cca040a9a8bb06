"""Phase II: pattern schedule, tap detection, and subspace AOA/range search.

The stage stacks, per detected tap l, the first Q0 recovered CIR rows of
every block into virtual snapshots

    h_l,t = [h^(1); ...; h^(Q0)] = P A_I(Theta_l) v_l,t + noise,
    P = [G diag(phi_1); ...; G diag(phi_Q0)]  (Q0 M_B x M_I),

so the classic covariance/EVD/MUSIC machinery applies with psi(d, theta) =
P a_I(d, theta) as the manifold. The pattern schedule makes P act like a
full-rank mixer: column q of the schedule is the q-th DFT column divided by
the first BS antenna's channel row, torqued by a per-element phase twist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .channel import IrsBsChannel
from .estimation import CirEstimate
from .geometry import C0, Scene

__all__ = [
    "IrsSchedule",
    "VirtualManifold",
    "VirtualBatch",
    "ClusterDetection",
    "SearchRegion",
    "SpectrumGrid",
    "NearPeak",
    "FarPeak",
    "design_irs_schedule",
    "stacking_matrix",
    "detect_clusters",
    "range_from_tap",
    "build_virtual",
    "sample_covariance",
    "eigendecompose",
    "estimate_target_count",
    "noise_subspace",
    "verify_rank",
    "build_grids",
    "music_spectrum_near",
    "music_spectrum_far",
    "select_peaks",
    "calibrate_thresholds",
]


# ---------------------------------------------------------------------------
# pattern schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IrsSchedule:
    """Per-symbol IRS patterns phi (M_I, Q0), shared by every block."""

    phi: np.ndarray
    twist: float

    @property
    def q0(self) -> int:
        return self.phi.shape[1]


def design_irs_schedule(irs_bs: IrsBsChannel, q0: int, twist: float = 0.37) -> IrsSchedule:
    """DFT-based schedule: phi[m, q] = W[m, q] / G[0, m] * exp(j m twist).

    W is the M_I-point DFT matrix. Dividing by the first BS antenna's row
    flattens the IRS-BS channel seen by that antenna, which is what makes the
    stacked manifold full rank for any distinct target angles. twist is a
    free phase ramp; any value works, it only rotates the manifold.
    """
    m_i = irs_bs.m_i
    if not 1 <= q0 <= m_i:
        raise ValueError("need 1 <= q0 <= M_I distinct DFT columns")
    m = np.arange(m_i)
    w = np.exp(-2j * np.pi * np.outer(m, np.arange(q0)) / m_i)
    phi = (w / irs_bs.g[0, :, None]) * np.exp(1j * m * twist)[:, None]
    return IrsSchedule(phi=phi, twist=twist)


def stacking_matrix(irs_bs: IrsBsChannel, schedule: IrsSchedule) -> np.ndarray:
    """P (Q0 M_B, M_I): blocks G diag(phi_q) stacked symbol-major."""
    blocks = irs_bs.g[None, :, :] * schedule.phi.T[:, None, :]
    return blocks.reshape(schedule.q0 * irs_bs.m_b, irs_bs.m_i)


# ---------------------------------------------------------------------------
# tap detection
# ---------------------------------------------------------------------------

def range_from_tap(l: int, n: int, delta_f: float) -> float:
    """Mid-tap total range estimate (2l - 1) C0 / (2 N delta_f), l 1-based."""
    return (2 * l - 1) * C0 / (2.0 * n * delta_f)


@dataclass(frozen=True)
class ClusterDetection:
    """Detected taps (1-based), their energies, thresholds and mid-tap ranges."""

    clusters: tuple[int, ...]
    ranges: tuple[float, ...]
    energies: np.ndarray
    rho: np.ndarray


def detect_clusters(
    estimate: CirEstimate,
    n: int,
    delta_f: float,
    rho: np.ndarray | float | None = None,
    rho_scale: float = 3.0,
) -> ClusterDetection:
    """Threshold the per-tap group energies into a detected tap set.

    Default threshold: rho_scale * median(energies) plus a tiny absolute
    floor so an all-zero energy vector detects nothing (the comparison is >=).
    """
    energies = np.asarray(estimate.group_energy, dtype=float)
    if rho is None:
        floor = 1e-12 * max(1.0, float(energies.max(initial=0.0)))
        rho = rho_scale * float(np.median(energies)) + floor
    rho_arr = np.broadcast_to(np.asarray(rho, dtype=float), energies.shape).copy()
    hits = np.flatnonzero(energies >= rho_arr)
    clusters = tuple(int(i) + 1 for i in hits)
    ranges = tuple(range_from_tap(l, n, delta_f) for l in clusters)
    return ClusterDetection(clusters=clusters, ranges=ranges, energies=energies, rho=rho_arr)


# ---------------------------------------------------------------------------
# virtual snapshots and their manifold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirtualManifold:
    """psi(d, theta) = P a_I(d, theta) plus the scan over grids."""

    p_matrix: np.ndarray
    wavelength: float
    spacing: float

    @property
    def dim(self) -> int:
        return self.p_matrix.shape[0]

    def steering(self, d: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """IRS steering columns for point arrays (d may contain inf)."""
        return kernels.steering_batch(
            self.wavelength, self.spacing, self.p_matrix.shape[1],
            np.atleast_1d(np.asarray(d, dtype=float)),
            np.atleast_1d(np.asarray(theta, dtype=float)),
        )

    def psi(self, d: float, theta: float) -> np.ndarray:
        return (self.p_matrix @ self.steering([d], [theta]))[:, 0]

    def psi_batch(self, d: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return self.p_matrix @ self.steering(d, theta)

    def scan(self, u_noise: np.ndarray, d: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return kernels.music_scan(
            self.p_matrix, u_noise, self.wavelength, self.spacing,
            np.asarray(d, dtype=float), np.asarray(theta, dtype=float),
        )


@dataclass(frozen=True)
class VirtualBatch:
    """Virtual snapshots of one tap: vectors (V, Q0 M_B) plus the manifold."""

    cluster: int
    vectors: np.ndarray
    manifold: VirtualManifold


def build_virtual(
    estimate: CirEstimate,
    cluster_l: int,
    schedule: IrsSchedule,
    irs_bs: IrsBsChannel,
    wavelength: float,
    spacing: float,
) -> VirtualBatch:
    """Stack tap cluster_l of the first Q0 symbols of every block, symbol-major."""
    v, q_total, n_taps, m_b = estimate.taps.shape
    q0 = schedule.q0
    if q0 > q_total:
        raise ValueError("schedule uses more symbols than the estimate carries")
    if not 1 <= cluster_l <= n_taps:
        raise ValueError("cluster index outside the delay window")
    vectors = estimate.taps[:, :q0, cluster_l - 1, :].reshape(v, q0 * m_b)
    manifold = VirtualManifold(
        p_matrix=stacking_matrix(irs_bs, schedule),
        wavelength=wavelength,
        spacing=spacing,
    )
    return VirtualBatch(cluster=cluster_l, vectors=vectors.copy(), manifold=manifold)


def sample_covariance(vectors: np.ndarray) -> np.ndarray:
    """(1/V) sum_t h_t h_t^H for snapshot rows h_t."""
    v = vectors.shape[0]
    return vectors.T @ vectors.conj() / v


def eigendecompose(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian EVD sorted descending; returns (values, vectors)."""
    vals, vecs = np.linalg.eigh(cov)
    return vals[::-1], vecs[:, ::-1]


def estimate_target_count(
    eigenvalues: np.ndarray,
    q0: int,
    m_b: int,
    n_snapshots: int,
    printed_form: bool = False,
) -> int:
    """Information-criterion count of sources in a Q0 M_B dimensional covariance.

    Default: Wax-Kailath AIC at ambient dimension m = Q0 M_B with n_snapshots
    snapshots, argmax over K of

        n_snapshots (m - K) log(gm_K / am_K) - K (2m - K),

    gm/am the geometric/arithmetic means of the m - K smallest eigenvalues.
    printed_form=True reproduces the variant that normalizes by M_B - K
    instead (only defined for K < M_B); kept for comparison runs.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    m = q0 * m_b
    if lam.shape[0] != m:
        raise ValueError("need exactly Q0*M_B eigenvalues")
    # rank-style tolerance: eigenvalues at float-noise scale relative to the
    # largest one count as zero, else a noiseless covariance never stops early
    tol = m * np.finfo(float).eps * max(float(lam[0]), 0.0)
    lam = np.where(lam > tol, lam, 0.0)
    best_k, best_score = 0, -math.inf
    for k in range(m):
        tail = lam[k:]
        am = float(tail.mean())
        if am <= 0.0:
            # remaining eigenvalues are exactly zero: k sources explain R
            return k
        log_gm = float(np.mean(np.log(np.maximum(tail, 1e-300))))
        if printed_form:
            if m_b - k <= 0:
                continue
            sum_log = float(np.sum(np.log(np.maximum(tail, 1e-300))))
            score = (m - k) * (sum_log / (m_b - k) - math.log(am * (m - k) / (m_b - k)))
            score -= 2.0 * k * (m - k)
        else:
            score = n_snapshots * (m - k) * (log_gm - math.log(am)) - k * (2.0 * m - k)
        if score > best_score:
            best_score, best_k = score, k
    return best_k


def noise_subspace(eigvecs: np.ndarray, k_hat: int) -> np.ndarray:
    """Columns k_hat.. of descending-ordered eigenvectors."""
    if not 0 <= k_hat < eigvecs.shape[1]:
        raise ValueError("k_hat must leave at least one noise dimension")
    return eigvecs[:, k_hat:]


def verify_rank(
    schedule: IrsSchedule,
    irs_bs: IrsBsChannel,
    targets: list[tuple[float, float]],
    wavelength: float,
    spacing: float,
) -> tuple[int, float]:
    """Numerical rank of Psi(Theta) for (d_bar, theta) pairs; d_bar may be inf.

    Returns (rank, sigma_min / sigma_max) of the stacked manifold evaluated
    at the targets. Full column rank is what the schedule design guarantees.
    """
    manifold = VirtualManifold(stacking_matrix(irs_bs, schedule), wavelength, spacing)
    d = np.array([t[0] for t in targets], dtype=float)
    th = np.array([t[1] for t in targets], dtype=float)
    psi = manifold.psi_batch(d, th)
    s = np.linalg.svd(psi, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return rank, float(s[-1] / s[0])


# ---------------------------------------------------------------------------
# search grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchRegion:
    """Angular sector around the IRS that can contain targets."""

    theta_min: float
    theta_max: float
    d_max: float

    def __post_init__(self):
        if not 0.0 <= self.theta_min < self.theta_max <= math.pi:
            raise ValueError("need 0 <= theta_min < theta_max <= pi")
        if self.d_max <= 0.0:
            raise ValueError("region radius must be positive")


@dataclass(frozen=True)
class SpectrumGrid:
    """Cluster-restricted lattices for both spectra.

    near_mask marks the (d, theta) lattice points whose implied position
    satisfies the tap's total-range window; far_theta keeps only bearings
    whose ray crosses the window inside the far-field part of the region.
    """

    cluster: int
    d_step: float
    theta_step: float
    window: tuple[float, float]
    near_d: np.ndarray
    near_theta: np.ndarray
    near_mask: np.ndarray
    far_theta: np.ndarray

    @property
    def near_count(self) -> int:
        return int(self.near_mask.sum())

    @property
    def far_count(self) -> int:
        return int(self.far_theta.shape[0])


def _lattice(step: float, lo: float, hi: float) -> np.ndarray:
    """Points k*step inside (lo, hi], k a positive integer."""
    k_lo = int(math.floor(lo / step + 1e-9)) + 1
    k_hi = int(math.floor(hi / step + 1e-9))
    if k_hi < k_lo:
        return np.empty(0)
    return np.arange(k_lo, k_hi + 1) * step


def total_range(scene: Scene, d: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """S(d, theta): total path range of the implied position irs - d*(cos, sin)."""
    ix, iy = scene.irs_pos
    x = ix - d * np.cos(theta)
    y = iy - d * np.sin(theta)
    d_ut = np.hypot(x - scene.user_pos[0], y - scene.user_pos[1])
    return d + d_ut + scene.irs_bs_distance


def build_grids(
    scene: Scene,
    n: int,
    delta_f: float,
    n_taps: int,
    region: SearchRegion,
    cluster_l: int,
    d_step: float,
    theta_step: float,
) -> SpectrumGrid:
    """Window-restricted near and far search lattices for one detected tap."""
    if not 1 <= cluster_l <= n_taps:
        raise ValueError("cluster index outside the delay window")
    tap_w = C0 / (n * delta_f)
    lo = (cluster_l - 1) * tap_w
    hi = cluster_l * tap_w

    d_detect = n_taps * tap_w - scene.irs_bs_distance
    theta = _lattice(theta_step, region.theta_min, region.theta_max)

    near_cap = min(scene.near_field_radius, region.d_max, d_detect)
    near_d = _lattice(d_step, 0.0, near_cap) if near_cap > 0 else np.empty(0)
    if near_d.size and theta.size:
        dd, tt = np.meshgrid(near_d, theta, indexing="ij")
        s = total_range(scene, dd.ravel(), tt.ravel()).reshape(dd.shape)
        near_mask = (s >= lo) & (s < hi)
    else:
        near_mask = np.zeros((near_d.size, theta.size), dtype=bool)

    far_lo = scene.near_field_radius
    far_hi = min(region.d_max, d_detect)
    if far_hi > far_lo and theta.size:
        s_near_edge = total_range(scene, np.full_like(theta, far_lo), theta)
        s_far_edge = total_range(scene, np.full_like(theta, far_hi), theta)
        keep = (s_far_edge >= lo) & (s_near_edge < hi)
        far_theta = theta[keep]
    else:
        far_theta = np.empty(0)

    return SpectrumGrid(
        cluster=cluster_l,
        d_step=d_step,
        theta_step=theta_step,
        window=(lo, hi),
        near_d=near_d,
        near_theta=theta,
        near_mask=near_mask,
        far_theta=far_theta,
    )


# ---------------------------------------------------------------------------
# spectra and peak selection
# ---------------------------------------------------------------------------

def music_spectrum_near(
    manifold: VirtualManifold, u_noise: np.ndarray, grid: SpectrumGrid
) -> np.ndarray:
    """2D pseudo-spectrum over the restricted near lattice; NaN off-window."""
    out = np.full(grid.near_mask.shape, np.nan)
    if grid.near_count == 0:
        return out
    ii, jj = np.nonzero(grid.near_mask)
    vals = manifold.scan(u_noise, grid.near_d[ii], grid.near_theta[jj])
    out[ii, jj] = vals
    return out


def music_spectrum_far(
    manifold: VirtualManifold, u_noise: np.ndarray, grid: SpectrumGrid
) -> np.ndarray:
    """1D pseudo-spectrum over the restricted far bearings."""
    if grid.far_count == 0:
        return np.empty(0)
    d = np.full(grid.far_theta.shape, np.inf)
    return manifold.scan(u_noise, d, grid.far_theta)


class NearPeak(NamedTuple):
    d: float
    theta: float
    value: float


class FarPeak(NamedTuple):
    theta: float
    value: float


def _local_maxima_1d(vals: np.ndarray) -> np.ndarray:
    ok = np.isfinite(vals)
    ge_left = np.ones_like(ok)
    ge_right = np.ones_like(ok)
    with np.errstate(invalid="ignore"):
        ge_left[1:] = ~ok[:-1] | (vals[1:] >= vals[:-1])
        ge_right[:-1] = ~ok[1:] | (vals[:-1] >= vals[1:])
    return ok & ge_left & ge_right


def _local_maxima_2d(vals: np.ndarray) -> np.ndarray:
    ok = np.isfinite(vals)
    padded = np.full((vals.shape[0] + 2, vals.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = np.where(ok, vals, -np.inf)
    center = padded[1:-1, 1:-1]
    peak = ok.copy()
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nbr = padded[1 + di : 1 + di + vals.shape[0], 1 + dj : 1 + dj + vals.shape[1]]
            peak &= center >= nbr
    return peak


def _nms_pick(order_idx, positions, k_max, sep):
    chosen = []
    for idx in order_idx:
        p = positions[idx]
        if any(max(abs(p[0] - positions[c][0]), abs(p[1] - positions[c][1])) <= sep for c in chosen):
            continue
        chosen.append(idx)
        if len(chosen) == k_max:
            break
    return chosen


def select_peaks(
    grid: SpectrumGrid,
    near_vals: np.ndarray,
    far_vals: np.ndarray,
    k_hat: int,
    thr_near: float,
    thr_far: float,
    dedup: bool = True,
    sep: int = 1,
) -> tuple[list[NearPeak], list[FarPeak]]:
    """Peaks of both spectra, competing for the cluster's k_hat source slots.

    Each spectrum is pruned on its own first: local maxima (8-neighborhood in
    2D, both neighbors in 1D), non-maximum suppression, top k_hat, then its
    threshold. Survivors of the two fields are ranked together by value and
    only the k_hat largest are kept — both spectra scan the same
    k_hat-dimensional signal subspace, so between them there are only k_hat
    sources to report, and every source leaks a (weaker) shadow into the
    opposite field's spectrum. Dedup rule: a far peak within one theta step of
    a near peak whose range sits within two range steps of that bearing's
    upper window boundary is a boundary-straddling duplicate; the near
    detection wins.
    """
    near_peaks: list[NearPeak] = []
    if k_hat > 0 and near_vals.size and np.any(np.isfinite(near_vals)):
        cand = np.nonzero(_local_maxima_2d(near_vals))
        positions = list(zip(cand[0].tolist(), cand[1].tolist()))
        if positions:
            values = near_vals[cand]
            order = np.argsort(values)[::-1]
            for idx in _nms_pick(order, positions, k_hat, sep):
                i, j = positions[idx]
                if values[idx] > thr_near:
                    near_peaks.append(
                        NearPeak(float(grid.near_d[i]), float(grid.near_theta[j]), float(values[idx]))
                    )

    far_peaks: list[FarPeak] = []
    if k_hat > 0 and far_vals.size:
        mask = _local_maxima_1d(far_vals)
        positions = [(int(i), 0) for i in np.flatnonzero(mask)]
        if positions:
            values = far_vals[[p[0] for p in positions]]
            order = np.argsort(values)[::-1]
            for idx in _nms_pick(order, positions, k_hat, sep):
                if values[idx] > thr_far:
                    far_peaks.append(
                        FarPeak(float(grid.far_theta[positions[idx][0]]), float(values[idx]))
                    )

    if dedup and near_peaks and far_peaks:
        far_peaks = [f for f in far_peaks if not _is_boundary_duplicate(grid, f, near_peaks)]

    if len(near_peaks) + len(far_peaks) > k_hat:
        ranked = sorted(
            [(p.value, 0, p) for p in near_peaks] + [(p.value, 1, p) for p in far_peaks],
            key=lambda t: t[0],
            reverse=True,
        )[:k_hat]
        near_peaks = [p for _, fld, p in ranked if fld == 0]
        far_peaks = [p for _, fld, p in ranked if fld == 1]

    return near_peaks, far_peaks


def _is_boundary_duplicate(grid: SpectrumGrid, far: FarPeak, near_peaks: list[NearPeak]) -> bool:
    for npk in near_peaks:
        if abs(far.theta - npk.theta) > grid.theta_step * (1 + 1e-9):
            continue
        j = int(np.argmin(np.abs(grid.near_theta - npk.theta)))
        col = grid.near_mask[:, j]
        if not col.any():
            continue
        d_upper = grid.near_d[np.flatnonzero(col).max()]
        if npk.d >= d_upper - 2.0 * grid.d_step * (1 + 1e-9):
            return True
    return False


def calibrate_thresholds(
    manifold: VirtualManifold,
    grid: SpectrumGrid,
    noise_var: float,
    v: int,
    k_forced: int,
    rng: np.random.Generator,
    quantile: float = 0.99,
    n_reps: int = 3,
) -> tuple[float, float]:
    """(thr_near, thr_far): spectrum quantiles over a target-free scene.

    Noise-only virtual snapshots with the run's noise variance and block
    count, with the noise subspace forced to the dimension a real run would
    use (a target-free information criterion would keep everything and flatten
    the spectrum). Empty grids fall back to +inf thresholds, which simply
    disables that field type for the cluster.
    """
    dim = manifold.dim
    near_samples, far_samples = [], []
    for _ in range(n_reps):
        z = math.sqrt(noise_var / 2.0) * (
            rng.standard_normal((v, dim)) + 1j * rng.standard_normal((v, dim))
        )
        vals, vecs = eigendecompose(sample_covariance(z))
        u_n = noise_subspace(vecs, min(k_forced, dim - 1))
        nv = music_spectrum_near(manifold, u_n, grid)
        if np.any(np.isfinite(nv)):
            near_samples.append(nv[np.isfinite(nv)])
        fv = music_spectrum_far(manifold, u_n, grid)
        if fv.size:
            far_samples.append(fv)
    thr_near = float(np.quantile(np.concatenate(near_samples), quantile)) if near_samples else math.inf
    thr_far = float(np.quantile(np.concatenate(far_samples), quantile)) if far_samples else math.inf
    return thr_near, thr_far
