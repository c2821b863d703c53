"""Random PN spreading codes, their correlation structure, and per-user SINR.

Two linear receivers are modelled: the matched filter, which treats
multiple-access interference (MAI) as noise, and the decorrelator, which
nulls MAI at the cost of a per-user noise-enhancement factor equal to the
diagonal of the inverse correlation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelState
from .errors import ReceiverUnavailableError
from .seeding import ensure_rng

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class SpreadingCodeSet:
    """Unit-norm random +-1/sqrt(N) codes, one column per user.

    ``correlation`` is the K x K matrix of code inner products; its diagonal
    is exactly 1 because the chip products are accumulated in integer
    arithmetic before the single division by N.
    """

    chips: np.ndarray        # (N, K), entries +-1/sqrt(N)
    correlation: np.ndarray  # (K, K)

    @property
    def processing_gain(self) -> int:
        return self.chips.shape[0]

    @property
    def user_count(self) -> int:
        return self.chips.shape[1]

    def subset(self, keep: np.ndarray) -> "SpreadingCodeSet":
        """Code set restricted to the users selected by a boolean mask."""
        keep = np.asarray(keep, dtype=bool)
        return SpreadingCodeSet(
            chips=self.chips[:, keep],
            correlation=self.correlation[np.ix_(keep, keep)],
        )


@dataclass(frozen=True)
class DecorrelatorBank:
    """Decorrelating receive filters D = S R^-1 and their noise enhancement.

    ``noise_enhancement[k]`` equals both d_k'd_k and [R^-1]_kk; it is >= 1
    for unit-norm codes.
    """

    filters: np.ndarray            # (N, K)
    noise_enhancement: np.ndarray  # (K,)


@dataclass(frozen=True)
class SinrReport:
    """Per-user SINR, MAI power, and effective interference.

    ``eff_interference[k]`` is the quantity I with p_k = sinr_k * I_k when all
    other powers stay fixed (exact for both receivers, since neither SINR
    denominator contains the user's own power).
    """

    sinr: np.ndarray
    mai_power: np.ndarray
    eff_interference: np.ndarray


def generate_codes(
    processing_gain: int,
    user_count: int,
    rng: int | None | np.random.Generator = None,
) -> SpreadingCodeSet:
    """Draw i.i.d. equiprobable +-1 chips scaled by 1/sqrt(N)."""
    if processing_gain < 1 or user_count < 1:
        raise ValueError("processing_gain and user_count must be >= 1")
    gen = ensure_rng(rng)
    # Drawn per user (row-major as (K, N)) so the codes of the first K users
    # do not change when more users are added under the same stream.
    signs = gen.integers(0, 2, size=(user_count, processing_gain)).T * 2 - 1
    correlation = (signs.T @ signs) / float(processing_gain)
    chips = signs / np.sqrt(float(processing_gain))
    return SpreadingCodeSet(chips=chips, correlation=correlation)


def guarded_inverse(matrix: np.ndarray, cond_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """Dense inverse with a 1-norm condition estimate guard."""
    try:
        inverse = np.linalg.inv(matrix)
    except np.linalg.LinAlgError as exc:
        raise ReceiverUnavailableError(f"correlation matrix is singular: {exc}") from exc
    cond = np.linalg.norm(matrix, 1) * np.linalg.norm(inverse, 1)
    if not np.isfinite(cond) or cond > cond_limit:
        raise ReceiverUnavailableError(
            f"correlation matrix too ill-conditioned (estimate {cond:.3e} > {cond_limit:.1e})"
        )
    return inverse


def build_decorrelator(
    codes: SpreadingCodeSet, cond_limit: float = CONDITION_LIMIT
) -> DecorrelatorBank:
    """Build the decorrelating filter bank for the given code set."""
    if codes.user_count > codes.processing_gain:
        raise ReceiverUnavailableError(
            f"decorrelator needs K <= N, got K={codes.user_count} > N={codes.processing_gain}"
        )
    inverse = guarded_inverse(codes.correlation, cond_limit)
    return DecorrelatorBank(
        filters=codes.chips @ inverse,
        noise_enhancement=np.diagonal(inverse).copy(),
    )


def _check_powers(powers: np.ndarray) -> np.ndarray:
    powers = np.asarray(powers, dtype=float)
    if np.any(powers < 0.0):
        raise ValueError("transmit powers must be non-negative")
    return powers


def mf_mai_weights(correlation: np.ndarray) -> np.ndarray:
    """Squared cross-correlations with a zero diagonal (MAI coupling weights)."""
    weights = correlation**2
    np.fill_diagonal(weights, 0.0)
    return weights


def sinr_mf(
    powers: np.ndarray,
    channel: ChannelState,
    codes: SpreadingCodeSet,
    noise_power: float,
) -> SinrReport:
    """Matched-filter SINR: own received power over MAI plus noise."""
    powers = _check_powers(powers)
    if noise_power <= 0.0:
        raise ValueError("noise_power must be positive")
    received = powers * channel.gain_power
    mai = mf_mai_weights(codes.correlation) @ received
    denominator = mai + noise_power
    return SinrReport(
        sinr=received / denominator,
        mai_power=mai,
        eff_interference=denominator / channel.gain_power,
    )


def sinr_dec(
    powers: np.ndarray,
    channel: ChannelState,
    bank: DecorrelatorBank,
    noise_power: float,
) -> SinrReport:
    """Decorrelator SINR: MAI is nulled, noise is enhanced by d_k'd_k."""
    powers = _check_powers(powers)
    if noise_power <= 0.0:
        raise ValueError("noise_power must be positive")
    denominator = noise_power * bank.noise_enhancement
    return SinrReport(
        sinr=powers * channel.gain_power / denominator,
        mai_power=np.zeros_like(denominator),
        eff_interference=denominator / channel.gain_power,
    )
