"""Channel synthesis: target-IRS responses, the IRS-BS link, and tap-domain CIRs.

The delay axis is organized in taps of width C0 / (N * delta_f) meters of
total path range (user -> target -> IRS -> BS). Tap l (1-based) collects
every target whose total range falls in [(l-1), l) tap widths; tap l maps to
a circular delay of l-1 samples in the OFDM model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import C0, Scene, UlaGeometry, steering

__all__ = [
    "IrsBsChannel",
    "ClusterMap",
    "irs_bs_channel",
    "draw_rcs",
    "target_irs_channel",
    "cascaded_channel",
    "assign_clusters",
    "build_cir",
    "build_cir_series",
]


@dataclass(frozen=True)
class IrsBsChannel:
    """Static IRS -> BS channel: unit-modulus matrix g scaled by delta.

    model is "near" (per-element spherical phases) or "far" (rank-1
    factorization at the bearings kappa / xi, both measured from the +x array
    axis). The full channel is delta * g; g itself is kept unscaled because
    the pattern schedule design divides by its first row.
    """

    g: np.ndarray
    delta: float
    model: str
    kappa: float | None = None
    xi: float | None = None

    @property
    def m_b(self) -> int:
        return self.g.shape[0]

    @property
    def m_i(self) -> int:
        return self.g.shape[1]


def irs_bs_channel(
    scene: Scene,
    delta: float = 1.0,
    model: str = "near",
    kappa: float | None = None,
    xi: float | None = None,
) -> IrsBsChannel:
    """Synthesize the IRS -> BS channel for the scene geometry.

    Near model: g[mB, mI] = exp(-j 2pi/lambda * ||bs_mB - irs_mI||) with both
    arrays along +x. Far model: g = exp(-j 2pi D/lambda) * outer(a_B, a_I) at
    the limiting bearings, which the near model converges to entrywise as the
    BS recedes. kappa/xi default to those geometric bearings.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    k_wave = 2.0 * np.pi / scene.wavelength
    bs = np.asarray(scene.bs_pos, dtype=float)
    irs = np.asarray(scene.irs_pos, dtype=float)
    delta_vec = bs - irs
    dist = float(np.hypot(*delta_vec))

    if model == "near":
        bs_x = bs[0] + scene.bs_array.offsets()
        irs_x = irs[0] + scene.irs_array.offsets()
        dx = bs_x[:, None] - irs_x[None, :]
        dy = bs[1] - irs[1]
        d_elem = np.sqrt(dx * dx + dy * dy)
        g = np.exp(-1j * k_wave * d_elem)
        return IrsBsChannel(g=g, delta=delta, model="near")

    if model == "far":
        cos_alpha = delta_vec[0] / dist
        if kappa is None:
            kappa = math.acos(np.clip(cos_alpha, -1.0, 1.0))
        if xi is None:
            xi = math.acos(np.clip(-cos_alpha, -1.0, 1.0))
        a_b = np.exp(-1j * k_wave * scene.bs_array.offsets() * math.cos(kappa))
        a_i = np.exp(-1j * k_wave * scene.irs_array.offsets() * math.cos(xi))
        g = np.exp(-1j * k_wave * dist) * np.outer(a_b, a_i)
        return IrsBsChannel(g=g, delta=delta, model="far", kappa=kappa, xi=xi)

    raise ValueError(f"unknown IRS-BS channel model {model!r}")


def draw_rcs(rng: np.random.Generator, num_blocks: int, num_targets: int) -> np.ndarray:
    """Swerling draws gamma[t, k] ~ CN(0, 1), i.i.d. over blocks and targets."""
    return (
        rng.standard_normal((num_blocks, num_targets))
        + 1j * rng.standard_normal((num_blocks, num_targets))
    ) / math.sqrt(2.0)


def target_irs_channel(scene: Scene, rcs: np.ndarray, k: int, t: int) -> np.ndarray:
    """r_{k,t} = beta_k * gamma_{k,t} * a_I(d_bar_k, theta_k), length M_I.

    d_bar_k is the true IRS distance for near-field targets and inf for
    far-field ones, so the synthesized response and the estimation manifold
    share one model.
    """
    from .geometry import aoa_to_irs  # local import keeps module load light

    beta = scene.targets[k].pathloss
    a = steering(scene.irs_array, scene.wavelength, scene.effective_range(k), aoa_to_irs(scene, k))
    return beta * rcs[t, k] * a


def cascaded_channel(irs_bs: IrsBsChannel, phi: np.ndarray, r: np.ndarray) -> np.ndarray:
    """One-target BS response delta * G diag(phi) r for a single pattern phi."""
    phi = np.asarray(phi)
    if phi.shape != (irs_bs.m_i,):
        raise ValueError("pattern length must equal the IRS element count")
    if not np.allclose(np.abs(phi), 1.0, atol=1e-9):
        raise ValueError("IRS pattern entries must be unit modulus")
    return irs_bs.delta * (irs_bs.g @ (phi * r))


@dataclass(frozen=True)
class ClusterMap:
    """Tap assignment of every target. labels[k] is 1-based."""

    labels: tuple[int, ...]
    members: dict[int, tuple[int, ...]]

    @property
    def occupied(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


def tap_index(total_range: float, n: int, delta_f: float) -> int:
    """1-based tap for a total path range: floor(range * N df / C0) + 1."""
    return int(math.floor(total_range * n * delta_f / C0)) + 1


def assign_clusters(scene: Scene, n: int, delta_f: float, n_taps: int) -> ClusterMap:
    """Map every target to its range tap; error if any falls past tap n_taps."""
    from .geometry import path_ranges

    labels = []
    members: dict[int, list[int]] = {}
    for k in range(scene.num_targets):
        total = sum(path_ranges(scene, k))
        l = tap_index(total, n, delta_f)
        if not 1 <= l <= n_taps:
            raise ValueError(
                f"target {k} total range {total:.2f} m lands in tap {l}, "
                f"outside the {n_taps}-tap window"
            )
        labels.append(l)
        members.setdefault(l, []).append(k)
    return ClusterMap(
        labels=tuple(labels),
        members={l: tuple(ks) for l, ks in members.items()},
    )


def build_cir(
    scene: Scene,
    irs_bs: IrsBsChannel,
    phi: np.ndarray,
    rcs: np.ndarray,
    clusters: ClusterMap,
    n_taps: int,
    q: int,
    t: int,
) -> np.ndarray:
    """CIR matrix (n_taps, M_B) for block t under pattern column q of phi.

    Row l-1 is the sum of the cascaded channels of all targets in tap l;
    unoccupied taps are exactly zero.
    """
    phi = np.asarray(phi)
    if phi.ndim != 2:
        raise ValueError("phi must be (M_I, Q)")
    cir = np.zeros((n_taps, irs_bs.m_b), dtype=complex)
    for l, ks in clusters.members.items():
        row = np.zeros(irs_bs.m_b, dtype=complex)
        for k in ks:
            row += cascaded_channel(irs_bs, phi[:, q], target_irs_channel(scene, rcs, k, t))
        cir[l - 1] = row
    return cir


def build_cir_series(
    scene: Scene,
    irs_bs: IrsBsChannel,
    phi: np.ndarray,
    rcs: np.ndarray,
    clusters: ClusterMap,
    n_taps: int,
) -> np.ndarray:
    """All CIRs at once, shape (V, Q, n_taps, M_B). Matches build_cir per (q, t)."""
    from .geometry import aoa_to_irs

    phi = np.asarray(phi)
    m_i, n_sym = phi.shape
    n_blocks, n_targets = rcs.shape
    if not np.allclose(np.abs(phi), 1.0, atol=1e-9):
        raise ValueError("IRS pattern entries must be unit modulus")

    # per-target IRS responses (M_I, K), then per-symbol projections (Q, M_B, K)
    a_mat = np.empty((m_i, n_targets), dtype=complex)
    beta = np.empty(n_targets)
    for k in range(n_targets):
        a_mat[:, k] = steering(
            scene.irs_array, scene.wavelength, scene.effective_range(k), aoa_to_irs(scene, k)
        )
        beta[k] = scene.targets[k].pathloss
    proj = np.einsum("bm,mq,mk->qbk", irs_bs.g, phi, a_mat) * irs_bs.delta

    cir = np.zeros((n_blocks, n_sym, n_taps, irs_bs.m_b), dtype=complex)
    for l, ks in clusters.members.items():
        idx = list(ks)
        amp = rcs[:, idx] * beta[idx]  # (V, |ks|)
        cir[:, :, l - 1, :] = np.einsum("qbk,tk->tqb", proj[:, :, idx], amp)
    return cir
