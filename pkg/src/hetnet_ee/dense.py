"""Equilibrium for dense deployments, where small cells interfere back.

The follower side is simple: given the leader's powers, each follower
transmits on its interference-adjusted best carrier at the power that puts
its SINR exactly at the optimal operating point
(:func:`follower_best_response`).

The leader side anticipates those reactions.  For each carrier the solver
enumerates every candidate occupancy it could induce there:

* shared slots: the top ``l`` nominees (followers whose best carrier it
  is, ranked by their best-to-second gain ratio) stay on the carrier and
  the leader runs at the feedback-adjusted optimal SINR; computed for each
  ``l`` up to the stay limit, the largest occupancy whose last nominee
  still prefers staying at the leader's unconstrained optimum;
* boundary caps: when the leader's unconstrained power would let the next
  nominee creep back in (or push a wanted nominee off), the power is
  clamped to the nominee's indifference boundary and the candidate value
  is re-read there;
* a solo candidate: the leader clears the carrier entirely, transmitting
  at its interference-free optimum or, if that would not repel the top
  nominee, just at the nominee's indifference boundary.

The best candidate across carriers fixes the leader's action, and follower
rows follow from their best responses.  At a boundary candidate the pushed
nominee is exactly indifferent between carriers; its assigned row and its
best-response row then tie in utility, and the solver keeps it off the
leader's carrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .efficiency import (
    EfficiencyModel,
    check_existence,
    optimal_sinr,
    optimal_sinr_with_feedback,
)
from .model import (
    EquilibriumResult,
    NetworkInstance,
    empty_allocation,
    make_result,
    rank_carriers,
)

__all__ = [
    "CarrierCandidates",
    "follower_best_response",
    "respond_all",
    "solve_dense",
]


def follower_best_response(
    instance: NetworkInstance,
    model: EfficiencyModel,
    f: int,
    leader_powers,
    *,
    sinr_target: Optional[float] = None,
) -> np.ndarray:
    """Follower ``f``'s single-carrier best response to the leader's powers.

    Picks the carrier maximizing ``gf / (sigma2 + h0 * p0)`` (ties to the
    lowest index) and transmits exactly enough to hit the optimal SINR
    there.  Returns a length-K power row.
    """
    p0 = np.asarray(leader_powers, dtype=float)
    if p0.shape != (instance.carriers,) or np.any(p0 < 0.0):
        raise ValueError("leader powers must be a nonnegative length-K vector")
    gamma = optimal_sinr(model) if sinr_target is None else sinr_target
    denom = instance.sigma2 + instance.h0 * p0
    k = int(np.argmax(instance.gf[f] / denom))
    row = np.zeros(instance.carriers)
    row[k] = gamma * denom[k] / instance.gf[f, k]
    return row


def respond_all(
    instance: NetworkInstance,
    model: EfficiencyModel,
    leader_powers,
    *,
    sinr_target: Optional[float] = None,
) -> np.ndarray:
    """Stack of all followers' best responses, shape (F, K)."""
    gamma = optimal_sinr(model) if sinr_target is None else sinr_target
    return np.array(
        [
            follower_best_response(instance, model, f, leader_powers, sinr_target=gamma)
            for f in range(instance.followers)
        ]
    ).reshape(instance.followers, instance.carriers)


@dataclass(frozen=True)
class CarrierCandidates:
    """Per-carrier bookkeeping of the leader's candidate actions.

    ``followers`` lists the carrier's nominees strongest ratio first;
    arrays indexed by nominee rank (``theta``, ``eta``, ``sinr_targets``,
    ``boundary_powers``, ``boundary_values``) cover all nominees, while
    ``slot_values``/``slot_powers`` cover shared slots ``1..stay_limit``
    after boundary caps.  ``replacements[l-1]`` records what step the cap
    logic took for slot ``l`` (``None``, ``"raise_to_boundary"``,
    ``"drop_to_boundary"`` or ``"infeasible"``).  The solo candidate is
    ``nan`` when the carrier cannot be cleared (zero cross gain onto its
    nominees).
    """

    carrier: int
    followers: tuple
    theta: np.ndarray
    eta: np.ndarray
    sinr_targets: np.ndarray
    stay_limit: int
    slot_powers: np.ndarray
    slot_values: np.ndarray
    boundary_powers: np.ndarray
    boundary_values: np.ndarray
    replacements: tuple
    solo_power: float
    solo_value: float


def _shared_power(gamma, target, eta, sigma2, g0k, h0k):
    # leader power hitting `target` when nominees with cumulative ratio
    # `eta` share the carrier; reduces to gamma*sigma2/g0k bit-for-bit when
    # eta == 0, which the sparse solver relies on
    return target * (1.0 + gamma * eta) * sigma2 / (g0k - gamma * target * eta * h0k)


def _shared_value(model, gamma, target, eta, sigma2, g0k, h0k, rate):
    return (
        model.value(target)
        * (g0k - target * gamma * eta * h0k)
        * rate
        / (target * (1.0 + gamma * eta) * sigma2)
    )


def _boundary_value(model, gamma, eta_prev, sigma2, g0k, h0k, rate, power):
    # leader utility at a nominee's indifference power, with the nominees
    # ranked above it (cumulative ratio eta_prev) still sharing
    sinr = g0k * power / (sigma2 * (1.0 + gamma * eta_prev) + gamma * eta_prev * h0k * power)
    return rate * model.value(sinr) / power


def _build_carrier(instance, model, gamma, k, ranks) -> CarrierCandidates:
    sigma2 = instance.sigma2
    g0k = float(instance.g0[k])
    h0k = float(instance.h0[k])
    rate0 = float(instance.rates[0])

    nominees = [f for f in range(instance.followers) if ranks[f].best == k]
    theta = np.array(
        [instance.gf[f, ranks[f].best] / instance.gf[f, ranks[f].second] for f in nominees]
    )
    order = sorted(range(len(nominees)), key=lambda i: (-theta[i], nominees[i]))
    nominees = tuple(nominees[i] for i in order)
    theta = theta[order]
    count = len(nominees)

    eta = np.zeros(count)
    targets = np.zeros(count)
    acc = 0.0
    for i, f in enumerate(nominees):
        acc = acc + instance.hf[f, k] / instance.gf[f, k]
        eta[i] = acc
        feedback = h0k * gamma * eta[i] / g0k
        targets[i] = optimal_sinr_with_feedback(model, feedback)

    # indifference boundaries: leader power at which nominee i stops
    # preferring this carrier over its second-best
    boundary_powers = np.zeros(count)
    boundary_values = np.full(count, math.nan)
    for i, f in enumerate(nominees):
        gb = instance.gf[f, k]
        gs = instance.gf[f, ranks[f].second]
        if gb <= gs:
            boundary_powers[i] = 0.0
        elif h0k == 0.0:
            boundary_powers[i] = math.inf
        else:
            boundary_powers[i] = sigma2 * (gb - gs) / (h0k * gs)
        if 0.0 < boundary_powers[i] < math.inf:
            eta_prev = eta[i - 1] if i > 0 else 0.0
            boundary_values[i] = _boundary_value(
                model, gamma, eta_prev, sigma2, g0k, h0k, rate0, boundary_powers[i]
            )

    def stays(l):
        # nominee at slot l still prefers this carrier at the leader's
        # unconstrained shared optimum
        f = nominees[l - 1]
        lhs = instance.gf[f, k] * (g0k - targets[l - 1] * gamma * eta[l - 1] * h0k)
        rhs = instance.gf[f, ranks[f].second] * (g0k + h0k * targets[l - 1])
        return lhs > rhs

    stay_limit = 0
    for l in range(count, 0, -1):
        if stays(l):
            stay_limit = l
            break

    slot_powers = np.zeros(stay_limit)
    slot_values = np.zeros(stay_limit)
    replacements = [None] * stay_limit
    for l in range(1, stay_limit + 1):
        slot_powers[l - 1] = _shared_power(gamma, targets[l - 1], eta[l - 1], sigma2, g0k, h0k)
        slot_values[l - 1] = _shared_value(
            model, gamma, targets[l - 1], eta[l - 1], sigma2, g0k, h0k, rate0
        )
    for l in range(1, stay_limit + 1):
        if l < count and slot_powers[l - 1] < boundary_powers[l]:
            # optimum sits where nominee l+1 would creep back in; raise the
            # power to its indifference boundary (drop the slot entirely if
            # that boundary is unreachable)
            if math.isinf(boundary_powers[l]):
                replacements[l - 1] = "infeasible"
            else:
                slot_powers[l - 1] = boundary_powers[l]
                slot_values[l - 1] = boundary_values[l]
                replacements[l - 1] = "raise_to_boundary"
        elif slot_powers[l - 1] > boundary_powers[l - 1]:
            # optimum would push nominee l itself off; fall back to its
            # boundary, where only the nominees above it share
            slot_powers[l - 1] = boundary_powers[l - 1]
            slot_values[l - 1] = boundary_values[l - 1]
            replacements[l - 1] = "drop_to_boundary"

    # solo candidate: carrier cleared of nominees entirely
    solo_unconstrained = _shared_power(gamma, gamma, 0.0, sigma2, g0k, h0k)
    if count == 0 or boundary_powers[0] <= solo_unconstrained:
        solo_power = solo_unconstrained
        solo_value = _shared_value(model, gamma, gamma, 0.0, sigma2, g0k, h0k, rate0)
    elif math.isinf(boundary_powers[0]):
        solo_power = math.nan
        solo_value = math.nan
    else:
        solo_power = boundary_powers[0]
        solo_value = boundary_values[0]

    return CarrierCandidates(
        carrier=k,
        followers=nominees,
        theta=theta,
        eta=eta,
        sinr_targets=targets,
        stay_limit=stay_limit,
        slot_powers=slot_powers,
        slot_values=slot_values,
        boundary_powers=boundary_powers,
        boundary_values=boundary_values,
        replacements=tuple(replacements),
        solo_power=solo_power,
        solo_value=solo_value,
    )


def solve_dense(
    instance: NetworkInstance, model: EfficiencyModel, tol: float = 1e-12
) -> EquilibriumResult:
    """Hierarchical equilibrium of the dense-regime game.

    Diagnostics carry the full candidate table, the winning carrier and
    occupancy, which boundary cap (if any) produced the winning power, and
    the existence-condition report.
    """
    if instance.carriers < 2:
        raise ValueError("the dense equilibrium needs at least two carriers")
    existence = check_existence(model, instance)
    gamma = optimal_sinr(model, tol)
    ranks = [rank_carriers(instance, f + 1) for f in range(instance.followers)]

    table = tuple(
        _build_carrier(instance, model, gamma, k, ranks) for k in range(instance.carriers)
    )

    # stay-test consistency audit (diagnostic only): the test should hold
    # at every slot up to the stay limit, not just at the limit itself
    violations = []
    for cc in table:
        g0k, h0k = float(instance.g0[cc.carrier]), float(instance.h0[cc.carrier])
        for l in range(1, cc.stay_limit + 1):
            f = cc.followers[l - 1]
            lhs = instance.gf[f, cc.carrier] * (
                g0k - cc.sinr_targets[l - 1] * gamma * cc.eta[l - 1] * h0k
            )
            rhs = instance.gf[f, ranks[f].second] * (g0k + h0k * cc.sinr_targets[l - 1])
            if not lhs > rhs:
                violations.append((cc.carrier, l))

    best = None  # (value, slots, carrier, power, kind)
    for cc in table:
        for l in range(1, cc.stay_limit + 1):
            if cc.replacements[l - 1] == "infeasible":
                continue
            if not math.isfinite(cc.slot_values[l - 1]):
                # a cap can land on a degenerate boundary (exactly tied
                # gains); such a slot carries no usable value
                continue
            cand = (cc.slot_values[l - 1], l, cc.carrier, cc.slot_powers[l - 1], "shared")
            if _better(cand, best):
                best = cand
        if math.isfinite(cc.solo_value):
            cand = (cc.solo_value, 0, cc.carrier, cc.solo_power, "solo")
            if _better(cand, best):
                best = cand

    diagnostics = {
        "solver": "dense_candidate_search",
        "sinr_target": gamma,
        "existence": existence,
        "candidate_table": table,
        "stay_test_violations": tuple(violations),
    }

    alloc = empty_allocation(instance)
    if best is None:
        # every carrier degenerate (no clearable carrier, no stable slot);
        # fall back to the leader's interference-free optimum on its best
        # own-gain carrier and let followers respond
        b0 = rank_carriers(instance, 0).best
        alloc[0, b0] = gamma * instance.sigma2 / instance.g0[b0]
        alloc[1:] = respond_all(instance, model, alloc[0], sinr_target=gamma)
        diagnostics.update(
            {"winner_carrier": b0, "winner_slots": None, "degenerate_fallback": True}
        )
        return make_result(instance, model, alloc, "dense", diagnostics)

    value, slots, k_hat, leader_power, kind = best
    cc = table[k_hat]
    alloc[0, k_hat] = leader_power
    denom_shared = instance.sigma2 + instance.h0[k_hat] * leader_power
    for i, f in enumerate(cc.followers):
        if i < slots:
            alloc[f + 1, k_hat] = gamma * denom_shared / instance.gf[f, k_hat]
        else:
            s = ranks[f].second
            alloc[f + 1, s] = gamma * instance.sigma2 / instance.gf[f, s]
    for f in range(instance.followers):
        if ranks[f].best != k_hat:
            b = ranks[f].best
            alloc[f + 1, b] = gamma * instance.sigma2 / instance.gf[f, b]

    replacement = cc.replacements[slots - 1] if kind == "shared" else None
    diagnostics.update(
        {
            "winner_carrier": k_hat,
            "winner_slots": slots,
            "winner_value": value,
            "winner_kind": kind,
            "winner_replacement": replacement,
            "winner_stay_limit_original": cc.stay_limit,
            "winner_sinr_target": (
                float(cc.sinr_targets[slots - 1])
                if kind == "shared" and replacement is None
                else None
            ),
        }
    )
    return make_result(instance, model, alloc, "dense", diagnostics)


def _better(cand, best) -> bool:
    if best is None:
        return True
    value, slots, carrier = cand[0], cand[1], cand[2]
    bvalue, bslots, bcarrier = best[0], best[1], best[2]
    # exact ties resolved toward fewer shared slots, then lower carrier
    return (value, -slots, -carrier) > (bvalue, -bslots, -bcarrier)
