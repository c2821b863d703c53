"""Verhulst power allocation with outage removal and the max-power baseline.

Three schemes share one inner loop of fixed length:

* ``alg1`` removes, round by round, the worst-gain user whose achieved SINR
  stays below its EE-optimal target;
* ``alg2`` removes such a user only if it also misses its minimum rate;
* ``baseline`` never removes anyone, so users that cannot reach their target
  sit at the maximum transmit power.

Each round starts from ``power = noise_power`` for the surviving users, runs
the synchronous update

    p <- clamp((1 + a) p - a (sinr/target) p, [0, max_power])

for the configured number of iterations, and re-solves the EE-optimal target
from the current effective interference as it goes (every iteration under the
matched filter, where interference moves with the powers; once per round
under the decorrelator, whose SINR does not depend on the other powers).

The loop is written over batches of same-sized realizations.  All maths is
element-wise or per-row, so each realization's trajectory is bit-identical no
matter how realizations are grouped into batches or split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ReceiverUnavailableError
from .metrics import LN2, EEParams
from .optimize import solve_optimal_sinr_batch
from .scenario import NetworkScenario
from .spreading import guarded_inverse

ALGORITHMS = ("alg1", "alg2", "baseline")

# Inner loops stop after a fixed iteration count, so targets are never met
# exactly; 1% separates cap-limited users from nearly-converged ones.
REMOVAL_SINR_REL_TOL = 1e-2
POWER_STABLE_REL_TOL = 1e-6
SINR_STABLE_REL_TOL = 1e-6


@dataclass
class PowerState:
    """Powers, activity flags and SINR bookkeeping of one realization."""

    power: np.ndarray
    active: np.ndarray
    sinr: np.ndarray
    target_sinr: np.ndarray
    iteration: int


@dataclass
class ControlOutcome:
    """Result of one power-control run."""

    final_state: PowerState
    removed_users: list[int]
    converged: bool
    rounds: int
    stabilized_iteration: int | None
    eff_interference: np.ndarray
    target_flagged: bool
    power_change: float


@dataclass
class BatchControlResult:
    """Stacked outcome arrays for a batch of same-sized realizations."""

    power: np.ndarray
    sinr: np.ndarray
    target_sinr: np.ndarray
    eff_interference: np.ndarray
    active: np.ndarray
    removed: list[list[int]]
    rounds: np.ndarray
    converged: np.ndarray
    stabilized_iteration: np.ndarray  # -1 where SINRs never settled
    target_flagged: np.ndarray
    power_change: np.ndarray
    failed: np.ndarray
    failure_reasons: dict[int, str] = field(default_factory=dict)


def verhulst_step(power, sinr, target_sinr, alpha, max_power):
    """One synchronous Verhulst update toward per-user SINR targets.

    Users with a zero target are switched off; everyone else is clamped to
    [0, max_power].  The update has its fixed point at sinr == target, and a
    user at p = 0 with a positive target stays there, which is why the loops
    initialize powers at the (positive) noise floor.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("alpha must lie in (0, 1)")
    power = np.asarray(power, dtype=float)
    target_sinr = np.asarray(target_sinr, dtype=float)
    safe_target = np.where(target_sinr > 0.0, target_sinr, 1.0)
    ratio = np.asarray(sinr, dtype=float) / safe_target
    updated = (1.0 + alpha) * power - alpha * ratio * power
    updated = np.clip(updated, 0.0, max_power)
    return np.where(target_sinr > 0.0, updated, 0.0)


def _mai_weights_batch(correlation: np.ndarray) -> np.ndarray:
    weights = correlation**2
    k = weights.shape[-1]
    idx = np.arange(k)
    weights[:, idx, idx] = 0.0
    return weights


def _mf_quantities(power, gain_power, weights, noise_power):
    received = power * gain_power
    mai = np.einsum("bkj,bj->bk", weights, received)
    denominator = mai + noise_power
    return received / denominator, denominator / gain_power


def _batch_round(
    gain_power,
    weights,
    dec_eff_interference,
    active,
    receiver,
    params: EEParams,
    gap_row,
    iterations,
    alpha,
    initial_power,
    resolve_each_iteration,
    trajectory=None,
):
    """One fixed-length Verhulst round over a sub-batch; no removals here."""
    batch, users = gain_power.shape
    noise = params.noise_power
    power = np.where(active, initial_power, 0.0)
    gap = np.broadcast_to(gap_row, (batch, users))
    targets = np.zeros((batch, users))
    guess = None
    prev_sinr = None
    stabilized = np.full(batch, -1, dtype=int)
    flagged = np.zeros(batch, dtype=bool)
    last_change = np.zeros(batch)

    for it in range(iterations):
        if receiver == "mf":
            sinr, eff_itf = _mf_quantities(power, gain_power, weights, noise)
        else:
            eff_itf = dec_eff_interference
            sinr = np.where(active, power / np.where(active, eff_itf, 1.0), 0.0)

        if it == 0 or (receiver == "mf" and resolve_each_iteration):
            solved, no_interior, _, _ = solve_optimal_sinr_batch(
                np.where(active, eff_itf, 1.0), params, gap, initial_guess=guess
            )
            guess = solved
            targets = np.where(active, solved, 0.0)
            flagged |= np.any(no_interior & active, axis=1)

        updated = verhulst_step(power, sinr, targets, alpha, params.max_power)
        if it == iterations - 1:
            movement = np.abs(updated - power) / np.maximum(power, noise)
            last_change = movement.max(axis=1) if users else np.zeros(batch)
        if prev_sinr is not None:
            shift = np.abs(sinr - prev_sinr) / np.maximum(np.abs(prev_sinr), 1e-300)
            settled = shift.max(axis=1) < SINR_STABLE_REL_TOL
            stabilized = np.where(settled, np.where(stabilized < 0, it, stabilized), -1)
        prev_sinr = sinr
        power = updated
        if trajectory is not None:
            trajectory.append(power.copy())

    if receiver == "mf":
        sinr, eff_itf = _mf_quantities(power, gain_power, weights, noise)
    else:
        eff_itf = dec_eff_interference
        sinr = np.where(active, power / np.where(active, eff_itf, 1.0), 0.0)
    return power, sinr, targets, eff_itf, stabilized, last_change, flagged


def _removal_candidates(algorithm, sinr, targets, active, rates, min_rate_row):
    below = active & (targets > 0.0) & (sinr < targets * (1.0 - REMOVAL_SINR_REL_TOL))
    if algorithm == "alg2":
        below &= rates < min_rate_row
    elif algorithm == "baseline":
        below &= False
    return below


def run_control_batch(
    gain_power: np.ndarray,
    correlation: np.ndarray,
    receiver: str,
    algorithm: str,
    params: EEParams,
    iterations: int = 500,
    alpha: float = 0.5,
    initial_power: np.ndarray | None = None,
    resolve_each_iteration: bool = True,
    cond_limit: float = 1e12,
    trajectory: list | None = None,
) -> BatchControlResult:
    """Run one scheme over a batch of same-sized realizations.

    ``gain_power`` is (B, K) and ``correlation`` (B, K, K).  Realizations whose
    decorrelator cannot be built are marked in ``failed`` instead of aborting
    the batch.  ``trajectory`` (tests only) collects the power array after
    every iteration.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"algorithm must be one of {ALGORITHMS}")
    if receiver not in ("mf", "dec"):
        raise ConfigurationError("receiver must be 'mf' or 'dec'")
    if iterations < 1:
        raise ConfigurationError("iterations must be >= 1")

    gain_power = np.asarray(gain_power, dtype=float)
    batch, users = gain_power.shape
    gap_row = np.broadcast_to(np.asarray(params.gap(), dtype=float), (users,))
    min_rate_row = np.broadcast_to(np.asarray(params.min_rate, dtype=float), (users,))
    correlation = np.asarray(correlation, dtype=float)
    if correlation.shape != (batch, users, users):
        raise ConfigurationError("correlation must have shape (batch, users, users)")
    weights = _mai_weights_batch(correlation) if receiver == "mf" else None
    base_power = (
        np.full((batch, users), params.noise_power)
        if initial_power is None
        else np.broadcast_to(np.asarray(initial_power, dtype=float), (batch, users))
    )

    active = np.ones((batch, users), dtype=bool)
    removed: list[list[int]] = [[] for _ in range(batch)]
    rounds = np.zeros(batch, dtype=int)
    done = np.zeros(batch, dtype=bool)
    failed = np.zeros(batch, dtype=bool)
    failure_reasons: dict[int, str] = {}

    out_power = np.zeros((batch, users))
    out_sinr = np.zeros((batch, users))
    out_targets = np.zeros((batch, users))
    out_itf = np.zeros((batch, users))
    out_stab = np.full(batch, -1, dtype=int)
    out_flagged = np.zeros(batch, dtype=bool)
    out_change = np.zeros(batch)

    while True:
        open_rows = ~done & ~failed
        emptied = open_rows & ~active.any(axis=1)
        done |= emptied  # everyone removed: a valid, flagged empty network
        rows = np.flatnonzero(open_rows & ~emptied)
        if rows.size == 0:
            break
        rounds[rows] += 1

        dec_itf = None
        if receiver == "dec":
            dec_itf = np.ones((rows.size, users))
            kept = []
            for offset, b in enumerate(rows):
                mask = active[b]
                try:
                    inverse = guarded_inverse(correlation[b][np.ix_(mask, mask)], cond_limit)
                except ReceiverUnavailableError as exc:
                    failed[b] = True
                    failure_reasons[int(b)] = str(exc)
                    continue
                enhancement = np.diagonal(inverse)
                dec_itf[offset, mask] = (
                    params.noise_power * enhancement / gain_power[b, mask]
                )
                kept.append(offset)
            if len(kept) < rows.size:
                keep_idx = np.asarray(kept, dtype=int)
                rows = rows[keep_idx]
                if rows.size == 0:
                    continue
                dec_itf = dec_itf[keep_idx]

        power, sinr, targets, eff_itf, stab, change, flagged = _batch_round(
            gain_power[rows],
            weights[rows] if weights is not None else None,
            dec_itf,
            active[rows],
            receiver,
            params,
            gap_row,
            iterations,
            alpha,
            base_power[rows],
            resolve_each_iteration,
            trajectory=trajectory,
        )
        rates = params.bandwidth * np.log1p(gap_row * sinr) / LN2
        below = _removal_candidates(algorithm, sinr, targets, active[rows], rates, min_rate_row)
        has_removal = below.any(axis=1)

        finish = rows[~has_removal]
        keep = ~has_removal
        out_power[finish] = power[keep]
        out_sinr[finish] = sinr[keep]
        out_targets[finish] = targets[keep]
        out_itf[finish] = eff_itf[keep]
        out_stab[finish] = stab[keep]
        out_change[finish] = change[keep]
        out_flagged[finish] |= flagged[keep]
        done[finish] = True

        for offset in np.flatnonzero(has_removal):
            b = rows[offset]
            candidates = np.where(below[offset], gain_power[b], np.inf)
            worst = int(np.argmin(candidates))  # argmin takes the lowest index on ties
            active[b, worst] = False
            removed[b].append(worst)
            out_flagged[b] |= bool(flagged[offset])

    converged = (out_change < POWER_STABLE_REL_TOL) | ~active.any(axis=1)
    converged &= ~failed
    return BatchControlResult(
        power=out_power,
        sinr=out_sinr,
        target_sinr=out_targets,
        eff_interference=out_itf,
        active=active,
        removed=removed,
        rounds=rounds,
        converged=converged,
        stabilized_iteration=out_stab,
        target_flagged=out_flagged,
        power_change=out_change,
        failed=failed,
        failure_reasons=failure_reasons,
    )


def _run_single(
    scenario: NetworkScenario,
    params: EEParams,
    algorithm: str,
    iterations: int,
    alpha: float,
    initial_power: np.ndarray | None,
    resolve_each_iteration: bool,
    trajectory: list | None = None,
) -> ControlOutcome:
    result = run_control_batch(
        scenario.channel.gain_power[None, :],
        scenario.codes.correlation[None, :, :],
        scenario.receiver,
        algorithm,
        params,
        iterations=iterations,
        alpha=alpha,
        initial_power=None if initial_power is None else np.asarray(initial_power)[None, :],
        resolve_each_iteration=resolve_each_iteration,
        trajectory=trajectory,
    )
    if result.failed[0]:
        raise ReceiverUnavailableError(result.failure_reasons[0])
    state = PowerState(
        power=result.power[0],
        active=result.active[0],
        sinr=result.sinr[0],
        target_sinr=result.target_sinr[0],
        iteration=iterations,
    )
    stab = int(result.stabilized_iteration[0])
    return ControlOutcome(
        final_state=state,
        removed_users=result.removed[0],
        converged=bool(result.converged[0]),
        rounds=int(result.rounds[0]),
        stabilized_iteration=stab if stab >= 0 else None,
        eff_interference=result.eff_interference[0],
        target_flagged=bool(result.target_flagged[0]),
        power_change=float(result.power_change[0]),
    )


def run_algorithm1(
    scenario: NetworkScenario,
    params: EEParams,
    iterations: int = 500,
    alpha: float = 0.5,
    initial_power: np.ndarray | None = None,
    resolve_each_iteration: bool = True,
) -> ControlOutcome:
    """EE-optimal targets with outage removal of every user missing them."""
    return _run_single(
        scenario, params, "alg1", iterations, alpha, initial_power, resolve_each_iteration
    )


def run_algorithm2(
    scenario: NetworkScenario,
    params: EEParams,
    iterations: int = 500,
    alpha: float = 0.5,
    initial_power: np.ndarray | None = None,
    resolve_each_iteration: bool = True,
) -> ControlOutcome:
    """Like ``run_algorithm1`` but keeps users that still meet their min rate."""
    return _run_single(
        scenario, params, "alg2", iterations, alpha, initial_power, resolve_each_iteration
    )


def run_baseline(
    scenario: NetworkScenario,
    params: EEParams,
    iterations: int = 500,
    alpha: float = 0.5,
    initial_power: np.ndarray | None = None,
    resolve_each_iteration: bool = True,
) -> ControlOutcome:
    """No removal: users that cannot reach their target sit at max power."""
    return _run_single(
        scenario, params, "baseline", iterations, alpha, initial_power, resolve_each_iteration
    )


RUNNERS = {"alg1": run_algorithm1, "alg2": run_algorithm2, "baseline": run_baseline}
