"""Phase III: turn per-cluster (range, AOA) detections into positions.

Far-field targets admit a closed form: the target lies on the ray from the
IRS at bearing theta and on the ellipse with foci (user, IRS) fixed by the
round-trip range, so one scalar t (distance from the IRS along the ray)
solves t + |w - t g| = s with w = irs - user, g = (cos, sin) theta,
s = d_utib - d_ib. The printed per-coordinate fractions reduce to the same t
but also degenerate at cos(theta) = 0, which the t form does not.

Near-field targets get a small damped Gauss-Newton on the weighted residual
(angle, total range, IRS range).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FIELD_FAR, FIELD_NEAR, Scene, aoa_from_irs

__all__ = [
    "FarSolveConfig",
    "NearSolveConfig",
    "TargetEstimate",
    "localize_far",
    "localize_near",
    "near_objective",
]


@dataclass(frozen=True)
class FarSolveConfig:
    """weight balances angle vs range residuals; irrelevant at the
    zero-residual solution but kept for the reported objective."""

    weight: float = 0.5
    fallback_tol: float = 1e-9

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")


@dataclass(frozen=True)
class NearSolveConfig:
    w_angle: float = 1.0 / 3.0
    w_sum: float = 1.0 / 3.0
    max_iters: int = 50
    grad_tol: float = 1e-9
    damping: float = 1e-3

    def __post_init__(self):
        if self.w_angle < 0 or self.w_sum < 0 or self.w_angle + self.w_sum > 1.0 + 1e-12:
            raise ValueError("need w_angle, w_sum >= 0 with w_angle + w_sum <= 1")


@dataclass(frozen=True)
class TargetEstimate:
    """One localized target; d is the IRS distance (None for far field)."""

    field: str
    theta: float
    d: float | None
    pos: tuple[float, float]
    cluster: int
    residual: float
    converged: bool = True
    n_iters: int = 0


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


# ---------------------------------------------------------------------------
# far field
# ---------------------------------------------------------------------------

def _ray_range_sum(w: np.ndarray, g: np.ndarray, t: float) -> float:
    return t + float(np.hypot(*(w - t * g)))


def localize_far(
    scene: Scene,
    d_hat_utib: float,
    theta_hat: float,
    config: FarSolveConfig = FarSolveConfig(),
    cluster: int = 0,
) -> TargetEstimate:
    """Closed-form ray/ellipse intersection for a far-field detection.

    Degenerate bearings (ray through the user, where the ellipse flattens
    onto the focal segment) fall back to a bisection on the monotone range
    sum; any root there is a zero-residual solution.
    """
    d_ib = scene.irs_bs_distance
    if d_hat_utib <= d_ib:
        raise ValueError("total range does not clear the IRS-BS hop")
    s = d_hat_utib - d_ib
    irs = np.asarray(scene.irs_pos, dtype=float)
    w = irs - np.asarray(scene.user_pos, dtype=float)
    norm_w = float(np.hypot(*w))
    if s < norm_w - 1e-9 * (1.0 + norm_w):
        raise ValueError("range sum below the user-IRS separation: no ellipse point")
    s = max(s, norm_w)
    g = np.array([math.cos(theta_hat), math.sin(theta_hat)])

    den = 2.0 * (s - float(g @ w))
    if den > config.fallback_tol * (1.0 + s):
        t = (s * s - norm_w * norm_w) / den
    else:
        lo, hi = 0.0, s
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            f = _ray_range_sum(w, g, mid) - s
            if abs(f) < 1e-13 * (1.0 + s):
                break
            if f > 0.0:
                hi = mid
            else:
                lo = mid
        t = mid

    pos = irs - t * g
    r_angle = _wrap(aoa_from_irs(scene.irs_pos, pos) - theta_hat) if t > 0 else 0.0
    r_range = _ray_range_sum(w, g, t) - s
    residual = config.weight * r_angle**2 + (1.0 - config.weight) * r_range**2
    return TargetEstimate(
        field=FIELD_FAR, theta=theta_hat, d=None, pos=(float(pos[0]), float(pos[1])),
        cluster=cluster, residual=residual,
    )


# ---------------------------------------------------------------------------
# near field
# ---------------------------------------------------------------------------

def _near_residuals(
    p: np.ndarray,
    user: np.ndarray,
    irs: np.ndarray,
    d_ib: float,
    theta_hat: float,
    d_hat_utib: float,
    d_hat: float,
    cfg: NearSolveConfig,
) -> np.ndarray:
    du = float(np.hypot(*(p - user)))
    di = float(np.hypot(*(p - irs)))
    w3 = 1.0 - cfg.w_angle - cfg.w_sum
    return np.array([
        math.sqrt(cfg.w_angle) * _wrap(aoa_from_irs(irs, p) - theta_hat),
        math.sqrt(cfg.w_sum) * (du + di + d_ib - d_hat_utib),
        math.sqrt(max(w3, 0.0)) * (di - d_hat),
    ])


def _near_jacobian(
    p: np.ndarray, user: np.ndarray, irs: np.ndarray, cfg: NearSolveConfig
) -> np.ndarray:
    u = irs[0] - p[0]
    v = irs[1] - p[1]
    rr = u * u + v * v
    j_angle = np.array([v / rr, -u / rr])
    du = float(np.hypot(*(p - user)))
    di = float(np.hypot(*(p - irs)))
    grad_du = (p - user) / du
    grad_di = (p - irs) / di
    w3 = 1.0 - cfg.w_angle - cfg.w_sum
    return np.vstack([
        math.sqrt(cfg.w_angle) * j_angle,
        math.sqrt(cfg.w_sum) * (grad_du + grad_di),
        math.sqrt(max(w3, 0.0)) * grad_di,
    ])


def _clamp_off_irs(p: np.ndarray, irs: np.ndarray, theta_hat: float) -> np.ndarray:
    # the angle and range terms are singular at the IRS itself
    offset = p - irs
    dist = float(np.hypot(*offset))
    if dist >= 1e-3:
        return p
    if dist < 1e-12:
        offset = -np.array([math.cos(theta_hat), math.sin(theta_hat)])
        dist = 1.0
    return irs + offset * (1e-3 / dist)


def near_objective(
    scene: Scene,
    d_hat_utib: float,
    theta_hat: float,
    d_hat: float,
    p,
    config: NearSolveConfig = NearSolveConfig(),
) -> float:
    """Weighted squared residual of the near-field problem at point p."""
    user = np.asarray(scene.user_pos, dtype=float)
    irs = np.asarray(scene.irs_pos, dtype=float)
    r = _near_residuals(
        np.asarray(p, dtype=float), user, irs, scene.irs_bs_distance,
        theta_hat, d_hat_utib, d_hat, config,
    )
    return float(r @ r)


def localize_near(
    scene: Scene,
    d_hat_utib: float,
    theta_hat: float,
    d_hat: float,
    config: NearSolveConfig = NearSolveConfig(),
    cluster: int = 0,
) -> TargetEstimate:
    """Damped Gauss-Newton from the polar initializer irs - d (cos, sin)."""
    if d_hat <= 0.0:
        raise ValueError("near-field range estimate must be positive")
    user = np.asarray(scene.user_pos, dtype=float)
    irs = np.asarray(scene.irs_pos, dtype=float)
    d_ib = scene.irs_bs_distance

    def residuals(p):
        return _near_residuals(p, user, irs, d_ib, theta_hat, d_hat_utib, d_hat, config)

    p = _clamp_off_irs(
        irs - d_hat * np.array([math.cos(theta_hat), math.sin(theta_hat)]), irs, theta_hat
    )
    r = residuals(p)
    obj = float(r @ r)
    lam = config.damping
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        jac = _near_jacobian(p, user, irs, config)
        grad = 2.0 * jac.T @ r
        if float(np.hypot(*grad)) < config.grad_tol * (1.0 + obj):
            converged = True
            break
        accepted = False
        for _ in range(25):
            lhs = jac.T @ jac + lam * np.eye(2)
            step = np.linalg.solve(lhs, -(jac.T @ r))
            p_new = _clamp_off_irs(p + step, irs, theta_hat)
            r_new = residuals(p_new)
            obj_new = float(r_new @ r_new)
            if obj_new < obj:
                p, r, obj = p_new, r_new, obj_new
                lam = max(lam * 0.1, 1e-12)
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            converged = obj < 1e-18 or float(np.hypot(*grad)) < math.sqrt(config.grad_tol)
            break
    else:
        it = config.max_iters

    di = float(np.hypot(*(p - irs)))
    return TargetEstimate(
        field=FIELD_NEAR, theta=aoa_from_irs(scene.irs_pos, p), d=di,
        pos=(float(p[0]), float(p[1])), cluster=cluster, residual=obj,
        converged=converged, n_iters=it,
    )
