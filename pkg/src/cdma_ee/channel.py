"""User placement, distance-based path loss and flat Rayleigh fading.

Produces the uplink channel-gain vector used by both receivers: the gain of
user k is ``h_k = d_k^(-eta/2) * g_k`` with ``eta`` the path-loss exponent and
``g_k`` a zero-mean unit-variance complex Gaussian draw (or 1 when fading is
disabled), so that ``E|h_k|^2 = d_k^(-eta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .seeding import ensure_rng

FADING_KINDS = ("rayleigh", "none")


@dataclass(frozen=True)
class RingGeometry:
    """Users dropped with uniform radius on a ring around the base station."""

    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        if self.inner_radius <= 0.0 or self.outer_radius <= 0.0:
            raise ConfigurationError("ring radii must be positive")
        if not self.inner_radius < self.outer_radius:
            raise ConfigurationError("ring needs inner_radius < outer_radius")


@dataclass(frozen=True)
class FixedGeometry:
    """One interest user at a set distance plus interferers at listed distances."""

    interest_distance: float
    interferer_distances: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "interferer_distances", tuple(float(d) for d in self.interferer_distances)
        )
        if self.interest_distance <= 0.0 or any(d <= 0.0 for d in self.interferer_distances):
            raise ConfigurationError("all distances must be positive")

    @property
    def distances(self) -> tuple[float, ...]:
        return (self.interest_distance, *self.interferer_distances)


Geometry = RingGeometry | FixedGeometry


@dataclass(frozen=True)
class Placement:
    """Distances from the base station in metres, one entry per user."""

    distances: np.ndarray

    @property
    def user_count(self) -> int:
        return self.distances.size


@dataclass(frozen=True)
class ChannelState:
    """Complex uplink gains and their squared magnitudes (gain_power = |h|^2)."""

    gains: np.ndarray
    gain_power: np.ndarray

    @property
    def user_count(self) -> int:
        return self.gains.size


def draw_placement(
    geometry: Geometry,
    user_count: int,
    rng: int | None | np.random.Generator = None,
) -> Placement:
    """Draw user distances for the given geometry.

    Fixed geometry returns the configured distances verbatim (interest user
    first); ring geometry draws i.i.d. uniform radii in
    [inner_radius, outer_radius].
    """
    if user_count < 1:
        raise ConfigurationError("user_count must be >= 1")
    if isinstance(geometry, FixedGeometry):
        distances = geometry.distances
        if len(distances) != user_count:
            raise ConfigurationError(
                f"fixed geometry describes {len(distances)} users, requested {user_count}"
            )
        return Placement(np.asarray(distances, dtype=float))
    if isinstance(geometry, RingGeometry):
        gen = ensure_rng(rng)
        radii = gen.uniform(geometry.inner_radius, geometry.outer_radius, size=user_count)
        return Placement(radii)
    raise ConfigurationError(f"unknown geometry {geometry!r}")


def draw_channel(
    placement: Placement,
    path_loss_exponent: float = 2.0,
    fading: str = "rayleigh",
    rng: int | None | np.random.Generator = None,
) -> ChannelState:
    """Combine deterministic path loss with one flat-fading draw per user."""
    if path_loss_exponent <= 0.0:
        raise ConfigurationError("path_loss_exponent must be positive")
    if fading not in FADING_KINDS:
        raise ConfigurationError(f"fading must be one of {FADING_KINDS}, got {fading!r}")
    amplitude = placement.distances ** (-path_loss_exponent / 2.0)
    if fading == "none":
        gains = amplitude.astype(complex)
    else:
        gen = ensure_rng(rng)
        # (K, 2) layout keeps the draws for K users a prefix of those for K+1.
        normals = gen.standard_normal((placement.user_count, 2))
        gains = amplitude * (normals[:, 0] + 1j * normals[:, 1]) / np.sqrt(2.0)
    gain_power = gains.real**2 + gains.imag**2
    return ChannelState(gains=gains, gain_power=gain_power)


def coupling_parameter(mean_interest_gain: float, mean_interferer_gain: float) -> float:
    """Ratio of the interest user's average gain power to the interferers'."""
    if mean_interest_gain <= 0.0 or mean_interferer_gain <= 0.0:
        raise ValueError("mean gain powers must be positive")
    return mean_interest_gain / mean_interferer_gain
