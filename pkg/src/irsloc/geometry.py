"""Scene description, ULA steering vectors, and the distance/angle conventions.

Conventions used across the package
-----------------------------------
* Positions are 2D, in meters. Both arrays (IRS and BS) are uniform linear
  arrays laid out along the +x axis; element 0 is the phase reference.
* The AOA of a point p relative to the IRS is
  ``theta = atan2(y_I - y_p, x_I - x_p)`` and must lie in [0, pi). Targets
  therefore sit on the y < y_I side of the IRS (or level with it on the
  x < x_I side).
* The inverse map is :func:`point_from_irs`:
  ``(d, theta) -> irs - d * (cos theta, sin theta)``. This pair is
  self-consistent and matches the closed-form localization algebra; every
  (d, theta) <-> position conversion in the package goes through it.
* ``d = inf`` selects the far-field steering vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Propagation speed. The delay->range bookkeeping in the protocol is defined
# with the rounded value (3 m tap width at a 100 MHz aggregate), so do not
# swap in the CODATA constant.
C0 = 3.0e8

FIELD_NEAR = "near"
FIELD_FAR = "far"


@dataclass(frozen=True)
class UlaGeometry:
    """Uniform linear array along +x, element 0 at the array origin."""

    num_elements: int
    spacing: float

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("array needs at least one element")
        if self.spacing <= 0.0:
            raise ValueError("element spacing must be positive")

    def offsets(self) -> np.ndarray:
        """Element offsets m * spacing, m = 0 .. num_elements-1."""
        return np.arange(self.num_elements) * self.spacing


@dataclass(frozen=True)
class TargetTruth:
    """Ground-truth target: position plus its scattering pathloss."""

    pos: tuple[float, float]
    pathloss: float = 1.0

    def __post_init__(self):
        if self.pathloss <= 0.0:
            raise ValueError("target pathloss must be positive")

    @property
    def xy(self) -> np.ndarray:
        return np.asarray(self.pos, dtype=float)


@dataclass(frozen=True)
class Scene:
    """Static geometry of one localization problem.

    The near/far field tag of each target is derived, not stored: a target
    is near-field iff its distance to the IRS is <= near_field_radius.
    """

    user_pos: tuple[float, float]
    irs_pos: tuple[float, float]
    bs_pos: tuple[float, float]
    targets: tuple[TargetTruth, ...]
    wavelength: float
    near_field_radius: float
    irs_array: UlaGeometry
    bs_array: UlaGeometry = field(default_factory=lambda: UlaGeometry(1, 0.05))

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError("wavelength must be positive")
        if self.near_field_radius <= 0.0:
            raise ValueError("near-field radius must be positive")
        anchors = (self.user_pos, self.irs_pos, self.bs_pos)
        for i in range(3):
            for j in range(i + 1, 3):
                if _dist(anchors[i], anchors[j]) < 1e-9:
                    raise ValueError("user, IRS and BS must be pairwise distinct")
        for k, tgt in enumerate(self.targets):
            d = _dist(tgt.pos, self.irs_pos)
            if d < 1e-9:
                raise ValueError(f"target {k} coincides with the IRS")
            th = aoa_from_irs(self.irs_pos, tgt.pos)
            if not (0.0 <= th < math.pi):
                raise ValueError(
                    f"target {k} is on the wrong side of the IRS "
                    f"(AOA {th:.4f} outside [0, pi))"
                )

    @property
    def num_targets(self) -> int:
        return len(self.targets)

    @property
    def irs_bs_distance(self) -> float:
        return _dist(self.irs_pos, self.bs_pos)

    def is_near(self, k: int) -> bool:
        return distance_to_irs(self, k) <= self.near_field_radius

    def field_tag(self, k: int) -> str:
        return FIELD_NEAR if self.is_near(k) else FIELD_FAR

    def effective_range(self, k: int) -> float:
        """d-bar: the true IRS distance for near targets, inf for far ones."""
        return distance_to_irs(self, k) if self.is_near(k) else math.inf


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


# ---------------------------------------------------------------------------
# distances and angles
# ---------------------------------------------------------------------------

def distance_to_irs(scene: Scene, k: int) -> float:
    """Euclidean distance from target k to the IRS reference element."""
    return _dist(scene.targets[k].pos, scene.irs_pos)


def aoa_from_irs(irs_pos, point) -> float:
    """AOA of an arbitrary point at the IRS: atan2(y_I - y, x_I - x)."""
    return math.atan2(irs_pos[1] - point[1], irs_pos[0] - point[0])


def aoa_to_irs(scene: Scene, k: int) -> float:
    """AOA of target k at the IRS, guaranteed in [0, pi) by scene validation."""
    return aoa_from_irs(scene.irs_pos, scene.targets[k].pos)


def point_from_irs(irs_pos, d: float, theta: float) -> np.ndarray:
    """Inverse of aoa_from_irs: the point at distance d and AOA theta."""
    return np.array(
        [irs_pos[0] - d * math.cos(theta), irs_pos[1] - d * math.sin(theta)]
    )


def path_ranges(scene: Scene, k: int) -> tuple[float, float, float]:
    """(user->target, target->IRS, IRS->BS) distances for target k."""
    d_ut = _dist(scene.user_pos, scene.targets[k].pos)
    d_ti = distance_to_irs(scene, k)
    d_ib = scene.irs_bs_distance
    return d_ut, d_ti, d_ib


# ---------------------------------------------------------------------------
# steering vectors
# ---------------------------------------------------------------------------

def steering_far(geom: UlaGeometry, wavelength: float, eta: float) -> np.ndarray:
    """Plane-wave ULA response: exp(-j 2pi/lambda * m d cos eta)."""
    phase = (2.0 * np.pi / wavelength) * geom.offsets() * math.cos(eta)
    return np.exp(-1j * phase)


def steering_near(
    geom: UlaGeometry, wavelength: float, d: float, eta: float
) -> np.ndarray:
    """Fresnel-zone ULA response for a source at distance d, angle eta.

    Element m carries phase
        -2pi/lambda * (m dI cos eta + (m dI sin eta)^2 / (2 d)).
    d = inf reduces exactly to :func:`steering_far`. The quadratic term is
    what makes the range observable inside the near-field radius.
    """
    if d <= 0.0:
        raise ValueError("source distance must be positive")
    x = geom.offsets()
    quad = (x * math.sin(eta)) ** 2 / (2.0 * d) if math.isfinite(d) else 0.0
    phase = (2.0 * np.pi / wavelength) * (x * math.cos(eta) + quad)
    return np.exp(-1j * phase)


def steering_exact(
    geom: UlaGeometry, wavelength: float, d: float, eta: float
) -> np.ndarray:
    """Exact spherical-wave phases, exp(-j 2pi/lambda (d - d_m)).

    d_m = sqrt(d^2 + (m dI)^2 - 2 m dI d cos eta) is the per-element source
    distance. Kept as an optional synthesis mode; the estimation manifold is
    always the Fresnel form (steering_near), which this agrees with to first
    order in aperture/d.
    """
    if not math.isfinite(d) or d <= 0.0:
        raise ValueError("exact steering needs a finite positive distance")
    x = geom.offsets()
    d_m = np.sqrt(d * d + x * x - 2.0 * x * d * math.cos(eta))
    return np.exp(-1j * (2.0 * np.pi / wavelength) * (d - d_m))


def steering(geom: UlaGeometry, wavelength: float, d: float, eta: float) -> np.ndarray:
    """Dispatch on d: finite -> Fresnel near-field, inf -> far-field."""
    if math.isfinite(d):
        return steering_near(geom, wavelength, d, eta)
    return steering_far(geom, wavelength, eta)
