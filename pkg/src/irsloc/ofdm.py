"""OFDM pilot generation and the two equivalent receive-path simulators.

Frequency-domain model per pattern symbol q and block t:

    Y = sqrt(p) diag(s) E H + Z

with E[n, l] = exp(-j 2 pi n l / N) (0-based; tap l delays by l samples) and
Z white complex Gaussian, variance noise_var per entry. The time-domain path
(IDFT, cyclic prefix, circular convolution, CP removal, DFT) reproduces Y
exactly at zero noise; noise itself is always injected in the frequency
domain, where the unitary DFT keeps it white with the same variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import C0

__all__ = [
    "OfdmConfig",
    "delay_manifold",
    "generate_pilots",
    "simulate_freq_rx",
    "simulate_time_rx",
    "remove_cp_and_fft",
]


@dataclass(frozen=True)
class OfdmConfig:
    """Pilot/frame parameters shared by synthesis and estimation.

    n: sub-carriers; delta_f: sub-carrier spacing (Hz); cp_len: cyclic prefix
    samples J; n_taps: delay window L; q: pattern symbols per block; q0:
    symbols consumed by the subspace stage; v: blocks; power: pilot power p;
    noise_var: per-entry complex noise variance.
    """

    n: int
    delta_f: float
    cp_len: int
    n_taps: int
    q: int
    q0: int
    v: int
    power: float = 1.0
    noise_var: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.n_taps < 1:
            raise ValueError("n and n_taps must be positive")
        if self.n_taps > self.n:
            raise ValueError("delay window cannot exceed the number of sub-carriers")
        if self.cp_len < self.n_taps:
            raise ValueError("cyclic prefix must cover the delay window (J >= L)")
        if not 1 <= self.q0 <= self.q:
            raise ValueError("need 1 <= q0 <= q")
        if self.v < 1:
            raise ValueError("need at least one block")
        if self.delta_f <= 0 or self.power <= 0 or self.noise_var < 0:
            raise ValueError("delta_f/power must be positive, noise_var non-negative")

    @property
    def bandwidth(self) -> float:
        return self.n * self.delta_f

    @property
    def tap_width(self) -> float:
        """Range resolution of one delay tap in meters."""
        return C0 / self.bandwidth


def delay_manifold(n: int, n_taps: int) -> np.ndarray:
    """E (n x n_taps): column l is the phase ramp of an l-sample delay."""
    idx = np.arange(n)[:, None] * np.arange(n_taps)[None, :]
    return np.exp(-2j * np.pi * idx / n)


def generate_pilots(cfg: OfdmConfig, rng: np.random.Generator) -> np.ndarray:
    """QPSK pilots s[t, q, n], unit modulus, deterministic given the rng state."""
    sym = rng.integers(0, 4, size=(cfg.v, cfg.q, cfg.n))
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * sym))


def simulate_freq_rx(
    cfg: OfdmConfig,
    pilots: np.ndarray,
    cir: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Frequency-domain observations (V, Q, N, M_B) for CIRs (V, Q, L, M_B)."""
    _check_shapes(cfg, pilots, cir)
    e_mat = delay_manifold(cfg.n, cfg.n_taps)
    clean = math.sqrt(cfg.power) * pilots[..., None] * np.einsum(
        "nl,tqlb->tqnb", e_mat, cir
    )
    if rng is None or cfg.noise_var == 0.0:
        return clean
    return clean + _noise(rng, clean.shape, cfg.noise_var)


def simulate_time_rx(
    cfg: OfdmConfig,
    pilots: np.ndarray,
    cir: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Time-domain sample streams (V, Q, J + N, M_B), CP included.

    Transmit: chi = IDFT(sqrt(p) s), prepend the last J samples. Propagate:
    tap l (row l of the CIR) delays by l samples. Noise, when requested, is
    added per time sample with variance noise_var.
    """
    _check_shapes(cfg, pilots, cir)
    n, j = cfg.n, cfg.cp_len
    chi = np.fft.ifft(math.sqrt(cfg.power) * pilots, axis=-1)
    tx = np.concatenate([chi[..., n - j :], chi], axis=-1)
    out = np.zeros(cir.shape[:2] + (j + n, cir.shape[-1]), dtype=complex)
    for l in range(cfg.n_taps):
        if not np.any(cir[:, :, l, :]):
            continue
        delayed = np.zeros_like(tx)
        if l == 0:
            delayed = tx
        else:
            delayed[..., l:] = tx[..., :-l]
        out += delayed[..., None] * cir[:, :, l, None, :]
    if rng is not None and cfg.noise_var > 0.0:
        out = out + _noise(rng, out.shape, cfg.noise_var)
    return out


def remove_cp_and_fft(cfg: OfdmConfig, time_rx: np.ndarray) -> np.ndarray:
    """Drop the cyclic prefix and DFT back to the sub-carrier domain."""
    return np.fft.fft(time_rx[..., cfg.cp_len :, :], axis=-2)


def _noise(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    scale = math.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _check_shapes(cfg: OfdmConfig, pilots: np.ndarray, cir: np.ndarray):
    if pilots.shape != (cfg.v, cfg.q, cfg.n):
        raise ValueError(f"pilots must be (V, Q, N) = {(cfg.v, cfg.q, cfg.n)}")
    if cir.shape[:3] != (cfg.v, cfg.q, cfg.n_taps):
        raise ValueError("CIR must be (V, Q, L, M_B)")
