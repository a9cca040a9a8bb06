"""Pure-numpy implementations of the spectrum-scan hot path.

Semantics are identical to the compiled twin in _kernels.pyx; the compiled
version just avoids materializing the steering matrix for huge grids. Keep
the two in sync: tests assert agreement to 1e-12.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 8192


def steering_batch(
    wavelength: float, spacing: float, m_elem: int, d: np.ndarray, theta: np.ndarray
) -> np.ndarray:
    """IRS steering vectors for a batch of (d, theta) points, shape (m_elem, G).

    d entries may be inf, selecting the plane-wave response for that column.
    """
    d = np.asarray(d, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x = np.arange(m_elem) * spacing
    k_wave = 2.0 * np.pi / wavelength
    with np.errstate(divide="ignore"):
        curv = np.where(np.isinf(d), 0.0, np.sin(theta) ** 2 / (2.0 * d))
    phase = k_wave * (np.outer(x, np.cos(theta)) + np.outer(x * x, curv))
    return np.exp(-1j * phase)


def music_scan(
    p_matrix: np.ndarray,
    u_noise: np.ndarray,
    wavelength: float,
    spacing: float,
    d: np.ndarray,
    theta: np.ndarray,
    den_floor: float = 1e-18,
    sentinel: float = 1e18,
) -> np.ndarray:
    """MUSIC pseudo-spectrum over grid points: |psi|^2 / |Un^H psi|^2.

    psi = p_matrix @ a(d, theta). Denominators below den_floor clamp the
    value to sentinel (an exact manifold null).
    """
    d = np.asarray(d, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n_pts = d.shape[0]
    m_elem = p_matrix.shape[1]
    out = np.empty(n_pts)
    for start in range(0, n_pts, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n_pts))
        a = steering_batch(wavelength, spacing, m_elem, d[sl], theta[sl])
        psi = p_matrix @ a
        num = np.einsum("ij,ij->j", psi.conj(), psi).real
        proj = u_noise.conj().T @ psi
        den = np.einsum("ij,ij->j", proj.conj(), proj).real
        out[sl] = np.where(den < den_floor, sentinel, num / np.maximum(den, den_floor))
    return out
