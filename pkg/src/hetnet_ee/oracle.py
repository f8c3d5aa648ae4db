"""Brute-force certification of equilibria by exhaustive deviation search.

Every check here is independent of the closed-form solvers: utilities are
recomputed from scratch and alternatives are enumerated on geometric power
grids spanning eight decades around the natural power scale
``gamma * sigma2 / max(own gain)``.

* :func:`verify_follower` fixes everyone else and sweeps one follower over
  carriers x powers, plus its exact closed-form best response.
* :func:`verify_leader_stackelberg` is bi-level: every candidate leader
  action is evaluated with all followers re-responding, including a coarse
  probe of two-carrier power splits to attack the single-carrier claim.
* :func:`verify_nash` is the unilateral (no re-response) version, one
  report per player.
* :func:`brute_force_stackelberg` returns the best grid allocation found,
  used to generate trusted expected values before the solvers exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import follower_best_response, respond_all
from .efficiency import EfficiencyModel, optimal_sinr
from .model import NetworkInstance, utility

__all__ = [
    "DeviationReport",
    "verify_follower",
    "verify_leader_stackelberg",
    "verify_nash",
    "brute_force_stackelberg",
]

GRID_DECADES = 4  # grid spans 10**-GRID_DECADES .. 10**+GRID_DECADES times center
SPLIT_WEIGHTS = 11


@dataclass(frozen=True)
class DeviationReport:
    """Outcome of one deviation search.

    ``relative_gain`` is ``(best_found - claimed) / claimed`` (infinite
    when a zero-utility claim has a positive alternative); the check passes
    when the gain does not exceed ``tolerance``.
    """

    player: int
    claimed_utility: float
    best_found_utility: float
    relative_gain: float
    deviating_action: dict
    tolerance: float
    passed: bool


def _gain(claimed: float, best: float) -> float:
    if claimed <= 0.0:
        return np.inf if best > 0.0 else 0.0
    return (best - claimed) / claimed


def _report(player, claimed, best, action, tol) -> DeviationReport:
    gain = _gain(claimed, best)
    return DeviationReport(
        player=player,
        claimed_utility=claimed,
        best_found_utility=best,
        relative_gain=gain,
        deviating_action=action,
        tolerance=tol,
        passed=bool(gain <= tol),
    )


def power_grid(center: float, grid_size: int) -> np.ndarray:
    span = 10.0**GRID_DECADES
    return np.geomspace(center / span, center * span, grid_size)


def _response_interference(
    instance: NetworkInstance, gamma: float, k: int, powers: np.ndarray
) -> np.ndarray:
    """Cross-tier interference on carrier ``k`` when every follower plays
    its best response to the leader transmitting ``powers`` there."""
    if instance.followers == 0:
        return np.zeros_like(powers)
    n_grid = powers.size
    ratios = np.broadcast_to(
        (instance.gf / instance.sigma2)[:, :, None],
        (instance.followers, instance.carriers, n_grid),
    ).copy()
    denom_k = instance.sigma2 + instance.h0[k] * powers
    ratios[:, k, :] = instance.gf[:, [k]] / denom_k[None, :]
    choice = np.argmax(ratios, axis=1)
    joined = choice == k
    response = gamma * denom_k[None, :] / instance.gf[:, [k]]
    return (instance.hf[:, [k]] * response * joined).sum(axis=0)


def _leader_utility_sweep(
    instance: NetworkInstance,
    model: EfficiencyModel,
    gamma: float,
    regime: str,
    k: int,
    powers: np.ndarray,
    *,
    reresponse: bool,
    fixed_interference: float = 0.0,
) -> np.ndarray:
    if regime == "dense":
        if reresponse:
            interference = _response_interference(instance, gamma, k, powers)
        else:
            interference = fixed_interference
    else:
        interference = 0.0
    sinr = instance.g0[k] * powers / (instance.sigma2 + interference)
    return float(instance.rates[0]) * model.value(sinr) / powers


def verify_follower(
    instance: NetworkInstance,
    model: EfficiencyModel,
    f: int,
    allocation,
    grid_size: int = 300,
    tol: float = 1e-6,
) -> DeviationReport:
    """Deviation search for one follower with all other rows fixed.

    Sweeps every carrier over a geometric power grid and additionally
    evaluates the exact closed-form best response; the follower's SINR
    depends only on the leader's row, so the result holds in both regimes.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    allocation = np.asarray(allocation, dtype=float)
    gamma = optimal_sinr(model)
    claimed = utility(instance, model, f + 1, allocation, "dense")
    rate = float(instance.rates[f + 1])
    denom = instance.sigma2 + instance.h0 * allocation[0]

    center = gamma * instance.sigma2 / float(instance.gf[f].max())
    grid = power_grid(center, grid_size)
    sinr = instance.gf[f][:, None] * grid[None, :] / denom[:, None]
    utilities = rate * model.value(sinr) / grid[None, :]
    flat = int(np.argmax(utilities))
    best_k, best_i = np.unravel_index(flat, utilities.shape)
    best = float(utilities[best_k, best_i])
    action = {"carrier": int(best_k), "power": float(grid[best_i]), "source": "grid"}

    br_row = follower_best_response(instance, model, f, allocation[0], sinr_target=gamma)
    trial = allocation.copy()
    trial[f + 1] = br_row
    br_utility = utility(instance, model, f + 1, trial, "dense")
    if br_utility > best:
        k = int(np.argmax(br_row))
        best = br_utility
        action = {"carrier": k, "power": float(br_row[k]), "source": "closed_form"}

    return _report(f + 1, claimed, best, action, tol)


def verify_leader_stackelberg(
    instance: NetworkInstance,
    model: EfficiencyModel,
    allocation,
    regime: str,
    grid_size: int = 300,
    tol: float = 1e-3,
    probe_splits: bool = True,
) -> DeviationReport:
    """Bi-level deviation search for the leader.

    Every grid action is scored against freshly computed follower best
    responses.  Single-carrier sweeps cover each carrier; two-carrier
    splits are probed on a coarse power grid with an 11-point convex
    weight sweep, a cheap attempt to falsify single-carrier optimality.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    allocation = np.asarray(allocation, dtype=float)
    gamma = optimal_sinr(model)
    claimed = utility(instance, model, 0, allocation, regime)
    rate = float(instance.rates[0])

    center = gamma * instance.sigma2 / float(instance.g0.max())
    grid = power_grid(center, grid_size)
    best = -np.inf
    action: dict = {}
    for k in range(instance.carriers):
        utilities = _leader_utility_sweep(
            instance, model, gamma, regime, k, grid, reresponse=True
        )
        i = int(np.argmax(utilities))
        if utilities[i] > best:
            best = float(utilities[i])
            action = {"carrier": k, "power": float(grid[i]), "source": "grid"}

    if probe_splits and instance.carriers >= 2:
        totals = power_grid(center, max(grid_size // 10, 12))
        weights = np.linspace(0.0, 1.0, SPLIT_WEIGHTS)
        for k1 in range(instance.carriers):
            for k2 in range(k1 + 1, instance.carriers):
                for w in weights:
                    value, total = _best_split(
                        instance, model, gamma, regime, k1, k2, float(w), totals, rate
                    )
                    if value > best:
                        best = value
                        action = {
                            "carriers": (k1, k2),
                            "weight": float(w),
                            "total_power": total,
                            "source": "split",
                        }

    return _report(0, claimed, best, action, tol)


def _best_split(instance, model, gamma, regime, k1, k2, w, totals, rate):
    p1 = w * totals
    p2 = (1.0 - w) * totals
    if instance.followers and regime == "dense":
        n_grid = totals.size
        ratios = np.broadcast_to(
            (instance.gf / instance.sigma2)[:, :, None],
            (instance.followers, instance.carriers, n_grid),
        ).copy()
        den1 = instance.sigma2 + instance.h0[k1] * p1
        den2 = instance.sigma2 + instance.h0[k2] * p2
        ratios[:, k1, :] = instance.gf[:, [k1]] / den1[None, :]
        ratios[:, k2, :] = instance.gf[:, [k2]] / den2[None, :]
        choice = np.argmax(ratios, axis=1)
        i1 = (instance.hf[:, [k1]] * gamma * den1[None, :] / instance.gf[:, [k1]] * (choice == k1)).sum(axis=0)
        i2 = (instance.hf[:, [k2]] * gamma * den2[None, :] / instance.gf[:, [k2]] * (choice == k2)).sum(axis=0)
    else:
        i1 = i2 = 0.0
    sinr1 = instance.g0[k1] * p1 / (instance.sigma2 + i1)
    sinr2 = instance.g0[k2] * p2 / (instance.sigma2 + i2)
    values = rate * (model.value(sinr1) + model.value(sinr2)) / totals
    i = int(np.argmax(values))
    return float(values[i]), float(totals[i])


def verify_nash(
    instance: NetworkInstance,
    model: EfficiencyModel,
    allocation,
    regime: str,
    grid_size: int = 300,
    tol: float = 1e-3,
) -> list[DeviationReport]:
    """Unilateral deviation search for every player, others held fixed."""
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    allocation = np.asarray(allocation, dtype=float)
    gamma = optimal_sinr(model)
    reports = []

    claimed = utility(instance, model, 0, allocation, regime)
    rate = float(instance.rates[0])
    if regime == "dense" and instance.followers:
        fixed = np.einsum("fk,fk->k", instance.hf, allocation[1:])
    else:
        fixed = np.zeros(instance.carriers)
    center = gamma * instance.sigma2 / float(instance.g0.max())
    grid = power_grid(center, grid_size)
    best = -np.inf
    action: dict = {}
    for k in range(instance.carriers):
        sinr = instance.g0[k] * grid / (instance.sigma2 + fixed[k])
        utilities = rate * model.value(sinr) / grid
        i = int(np.argmax(utilities))
        if utilities[i] > best:
            best = float(utilities[i])
            action = {"carrier": k, "power": float(grid[i]), "source": "grid"}
    # the gamma-targeting closed form on the best adjusted carrier
    k = int(np.argmax(instance.g0 / (instance.sigma2 + fixed)))
    p = gamma * (instance.sigma2 + fixed[k]) / instance.g0[k]
    sinr = instance.g0[k] * p / (instance.sigma2 + fixed[k])
    closed = rate * float(model.value(sinr)) / p
    if closed > best:
        best = closed
        action = {"carrier": k, "power": float(p), "source": "closed_form"}
    reports.append(_report(0, claimed, best, action, tol))

    for f in range(instance.followers):
        reports.append(
            verify_follower(instance, model, f, allocation, grid_size=grid_size, tol=tol)
        )
    return reports


def brute_force_stackelberg(
    instance: NetworkInstance,
    model: EfficiencyModel,
    regime: str,
    grid_size: int = 300,
) -> np.ndarray:
    """Exhaustive leader grid search with exact follower re-responses.

    Returns the best allocation found (leader action plus the follower
    best responses it induces).  Meant for small instances; accuracy is
    bounded by the grid resolution.
    """
    allocation = np.zeros((instance.players, instance.carriers))
    gamma = optimal_sinr(model)
    center = gamma * instance.sigma2 / float(instance.g0.max())
    grid = power_grid(center, grid_size)
    best = -np.inf
    best_k, best_p = 0, float(grid[0])
    for k in range(instance.carriers):
        utilities = _leader_utility_sweep(
            instance, model, gamma, regime, k, grid, reresponse=True
        )
        i = int(np.argmax(utilities))
        if utilities[i] > best:
            best = float(utilities[i])
            best_k, best_p = k, float(grid[i])
    allocation[0, best_k] = best_p
    if instance.followers:
        allocation[1:] = respond_all(instance, model, allocation[0], sinr_target=gamma)
    return allocation
