"""One network draw: placements, channel gains, spreading codes, receiver."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .channel import ChannelState, Geometry, Placement, draw_channel, draw_placement
from .errors import ConfigurationError
from .seeding import scenario_streams
from .spreading import SpreadingCodeSet, generate_codes

RECEIVERS = ("mf", "dec")


@dataclass(frozen=True)
class NetworkScenario:
    """Static description of one realization of the uplink."""

    placement: Placement
    channel: ChannelState
    codes: SpreadingCodeSet
    receiver: str

    def __post_init__(self):
        if self.receiver not in RECEIVERS:
            raise ConfigurationError(f"receiver must be one of {RECEIVERS}")

    @property
    def user_count(self) -> int:
        return self.channel.user_count


def draw_scenario(
    geometry: Geometry,
    user_count: int,
    processing_gain: int,
    receiver: str,
    seed: int,
    path_loss_exponent: float = 2.0,
    fading: str = "rayleigh",
) -> NetworkScenario:
    """Draw placement, fading and codes from the three substreams of ``seed``."""
    streams = scenario_streams(seed)
    placement = draw_placement(geometry, user_count, streams.placement)
    channel = draw_channel(placement, path_loss_exponent, fading, streams.fading)
    codes = generate_codes(processing_gain, user_count, streams.codes)
    return NetworkScenario(placement=placement, channel=channel, codes=codes, receiver=receiver)


def scenario_checksum(scenario: NetworkScenario) -> str:
    """Short digest of the random draws, used to verify paired comparisons."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(scenario.placement.distances).tobytes())
    digest.update(np.ascontiguousarray(scenario.channel.gains).tobytes())
    digest.update(np.ascontiguousarray(scenario.codes.chips).tobytes())
    return digest.hexdigest()[:16]
