"""Closed-form analysis of the tolled bottleneck with a transit outside option.

Everything here is algebra on :class:`~tollgap.core.BottleneckParams`: flat-toll
equilibria and their revenue/system cost, the revenue-optimal flat and
trapezoidal tolls (both reduce to single-variable quadratic programs), the
system-cost-optimal flat toll, and the worst-case performance bounds that
relate them.  The independent numeric checks live in ``tollgap.oracle``.

Throughout, ``gap`` denotes the cost advantage of driving at free flow
(transit cost minus car free-flow cost) and ``max_wait_car_only`` the peak
equilibrium wait were every user to drive.  A flat toll ``tau`` supports a
mixed-mode equilibrium only on the band
``max(0, gap - max_wait) <= tau <= gap``; below the band everyone drives,
above it everyone rides transit (ties at the top break toward the car, i.e.
toward higher revenue).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    BottleneckParams,
    CostBreakdown,
    DomainError,
    EquilibriumOutcome,
    Regime,
    TrapezoidToll,
    classify_regime,
    regime_thresholds,
)

__all__ = [
    "DynamicTollDesign",
    "BoundReport",
    "max_wait_car_only",
    "feasible_toll_band",
    "static_equilibrium",
    "static_revenue",
    "static_revenue_optimal_toll",
    "dynamic_revenue_at_fraction",
    "dynamic_revenue_optimal",
    "dynamic_so_design",
    "static_system_cost",
    "dynamic_ro_system_cost",
    "optimal_system_cost",
    "static_sc_optimal_toll",
    "performance_bounds",
]


@dataclass(frozen=True)
class DynamicTollDesign:
    """A trapezoidal toll schedule summarized by its flat-segment fraction.

    ``flat_fraction`` is the share of the desired-crossing window covered by
    the peak-toll segment.  ``system_cost`` is filled in by constructors that
    know it in closed form, else None.
    """

    flat_fraction: float
    policy: TrapezoidToll
    revenue: float
    system_cost: float | None = None


@dataclass(frozen=True)
class BoundReport:
    """Worst-case performance guarantees at the current parameter point.

    ``gap_scale`` is the ratio of the low regime threshold to the cost gap
    (infinite when the gap is zero).  ``revenue_ratio_lower_bound`` bounds
    flat-optimal revenue over trapezoid-optimal revenue from below.
    ``sc_ratio_upper_bound`` (the factor-2 guarantee) is present only while
    transit is attractive enough that both modes run at the untolled
    equilibrium.  ``exact_sc_ratio`` is the exact cost ratio in the
    zero-free-flow-cost, car-saturated corner where the guarantee provably
    degenerates; None when its preconditions fail.
    """

    gap_scale: float
    revenue_ratio_lower_bound: float
    sc_ratio_upper_bound: float | None
    exact_sc_ratio: float | None
    regime: Regime


def max_wait_car_only(params: BottleneckParams) -> float:
    """Peak equilibrium wait if every user drove: demand * e*L/(e+L) / capacity.

    Zero when capacity meets the desired arrival rate (no queue forms).
    """
    if params.capacity >= params.arrival_rate:
        return 0.0
    return params.total_demand * params.schedule_factor / params.capacity


def feasible_toll_band(params: BottleneckParams) -> tuple[float, float]:
    """Flat-toll band [max(0, gap - max_wait), gap] supporting mixed mode."""
    gap = params.cost_gap
    return max(0.0, gap - max_wait_car_only(params)), gap


def _require_outside_option_regime(params: BottleneckParams) -> None:
    if params.cost_gap < 0:
        raise DomainError("transit strictly dominates: no congested analysis applies")


def static_equilibrium(params: BottleneckParams, toll: float) -> EquilibriumOutcome:
    """Mode split and wait profile induced by a flat toll.

    In the mixed band the peak wait is ``gap - toll`` and the early/late/
    on-time/transit counts follow from the linear wait profile (slopes
    ``early_penalty`` up, ``late_penalty`` down) plus service-rate accounting.
    Below the band the outcome is the car-only equilibrium; above it all
    users ride transit, except at ``toll == gap`` where indifferent users
    break toward the car.
    """
    if toll < 0:
        raise DomainError("toll must be nonnegative")
    regime = classify_regime(params)
    demand = params.total_demand
    rush = params.rush_length

    if regime is Regime.ALL_TRANSIT or toll > params.cost_gap:
        return EquilibriumOutcome(0.0, 0.0, 0.0, demand, 0.0, 0.0, 0.0, 0.0, 0.0, regime)

    if regime is Regime.UNCONGESTED:
        # Capacity covers demand: no queue, everyone crosses on time by car
        # (at toll == gap the tie also resolves toward the car).
        return EquilibriumOutcome(0.0, 0.0, demand, 0.0, 0.0, 0.0, 0.0, rush, rush, regime)

    max_wait = max_wait_car_only(params)
    wait = min(max(params.cost_gap - toll, 0.0), max_wait)
    mu, lam = params.capacity, params.arrival_rate
    e, late = params.early_penalty, params.late_penalty

    n_early = mu * wait / e
    n_late = mu * wait / late
    ontime_share = 1.0 - wait / max_wait
    n_ontime = ontime_share * demand * mu / lam
    n_transit = ontime_share * demand * (1.0 - mu / lam)

    rise = wait / e
    fall = wait / late
    flat = ontime_share * rush
    peak_start = (mu / lam) * rise  # service-rate accounting anchors the window
    start = peak_start - rise
    peak_end = peak_start + flat
    end = peak_end + fall
    return EquilibriumOutcome(
        n_early, n_late, n_ontime, n_transit, wait, start, peak_start, peak_end, end, regime
    )


def static_revenue(params: BottleneckParams, toll: float) -> float:
    """Revenue of a flat toll: toll times the number of car users.

    Total in ``toll``: below the band every user pays (``toll * demand``),
    above the gap revenue is zero (all transit), and at the gap the tie-break
    keeps the capacity share in cars.  Keeping the function total simplifies
    grid sweeps; no branch raises.
    """
    if toll < 0:
        raise DomainError("toll must be nonnegative")
    gap = params.cost_gap
    if gap < 0:
        return 0.0
    if params.capacity >= params.arrival_rate:
        return toll * params.total_demand if toll <= gap else 0.0
    lo, hi = feasible_toll_band(params)
    if toll < lo:
        return toll * params.total_demand
    if toll > hi:
        return 0.0
    mu, lam = params.capacity, params.arrival_rate
    share = params.total_demand / lam + (gap - toll) / params.schedule_factor * (1.0 - mu / lam)
    return mu * toll * share


def static_revenue_optimal_toll(params: BottleneckParams) -> tuple[float, float]:
    """Revenue-maximizing flat toll and its revenue.

    The band-constrained quadratic program has three candidate solutions:
    the band top (gap), the unconstrained vertex
    ``gap/2 + low_threshold/2``, and the band bottom ``gap - max_wait``;
    which one wins is exactly the regime classification.
    """
    regime = classify_regime(params)
    gap = params.cost_gap
    if regime is Regime.ALL_TRANSIT:
        return 0.0, 0.0
    if regime is Regime.UNCONGESTED:
        return gap, gap * params.total_demand
    low, _ = regime_thresholds(params)
    if regime is Regime.MIXED_LOW:
        toll = gap
    else:
        toll = max(gap / 2.0 + low / 2.0, gap - max_wait_car_only(params))
    return toll, static_revenue(params, toll)


def dynamic_revenue_at_fraction(params: BottleneckParams, flat_fraction: float) -> float:
    """Revenue of the zero-wait trapezoid toll with the given flat fraction.

    ``gap * (f*demand*mu/lam + (1-f)*demand) - demand^2/(2 mu) * eL/(e+L) * (1-f)^2``.
    Evaluates the formula anywhere on [0, 1]; fractions below the feasible
    band produce negative values rather than being clamped, so infeasibility
    is visible to callers.
    """
    if not 0.0 <= flat_fraction <= 1.0:
        raise DomainError("flat_fraction must lie in [0, 1]")
    _require_outside_option_regime(params)
    gap = params.cost_gap
    demand, mu, lam = params.total_demand, params.capacity, params.arrival_rate
    served_share = flat_fraction * demand * mu / lam + (1.0 - flat_fraction) * demand
    shoulder_loss = demand * demand / (2.0 * mu) * params.schedule_factor
    return gap * served_share - shoulder_loss * (1.0 - flat_fraction) ** 2


def _min_flat_fraction(params: BottleneckParams) -> float:
    """Feasibility floor on the flat fraction: tolls must stay nonnegative."""
    max_wait = max_wait_car_only(params)
    if max_wait <= 0.0:
        return 1.0
    return 1.0 - min(params.cost_gap / max_wait, 1.0)


def _trapezoid_for_fraction(params: BottleneckParams, flat_fraction: float) -> TrapezoidToll:
    """Zero-wait trapezoid with peak at the cost gap and the given flat share."""
    gap = params.cost_gap
    demand, mu, lam = params.total_demand, params.capacity, params.arrival_rate
    e, late = params.early_penalty, params.late_penalty
    shoulder_users = (1.0 - flat_fraction) * demand
    rise = late / (e + late) * shoulder_users / mu
    fall = e / (e + late) * shoulder_users / mu
    flat = flat_fraction * params.rush_length
    peak_start = (mu / lam) * rise
    return TrapezoidToll(
        peak=gap,
        start=peak_start - rise,
        peak_start=peak_start,
        peak_end=peak_start + flat,
        end=peak_start + flat + fall,
        rise_slope=e,
        fall_slope=late,
    )


def dynamic_revenue_optimal(params: BottleneckParams) -> DynamicTollDesign:
    """Revenue-maximizing trapezoid toll schedule.

    The optimal schedule eliminates queuing (any wait can be converted into
    toll), holds the peak toll at the cost gap over a flat fraction
    ``f* = max(1 - gap/max_wait * (1 - mu/lam), 0)`` of the rush, and tapers
    at the schedule-penalty slopes on either side.
    """
    gap = params.cost_gap
    demand, mu, lam = params.total_demand, params.capacity, params.arrival_rate
    if gap < 0:
        return DynamicTollDesign(1.0, _trapezoid_for_fraction(params, 1.0), 0.0)
    if mu >= lam:
        policy = TrapezoidToll(gap, 0.0, 0.0, params.rush_length, params.rush_length,
                               params.early_penalty, params.late_penalty)
        return DynamicTollDesign(1.0, policy, gap * demand)

    max_wait = max_wait_car_only(params)
    frac = max(1.0 - gap / max_wait * (1.0 - mu / lam), 0.0)
    frac = min(max(frac, _min_flat_fraction(params)), 1.0)

    low, _ = regime_thresholds(params)
    if gap <= low * lam / mu:
        revenue = gap * demand * mu / lam + (
            gap * gap * mu / (2.0 * params.schedule_factor) * (1.0 - mu / lam) ** 2
        )
    else:
        revenue = gap * demand - demand * demand / (2.0 * mu) * params.schedule_factor
    return DynamicTollDesign(frac, _trapezoid_for_fraction(params, frac), revenue)


def dynamic_so_design(params: BottleneckParams) -> DynamicTollDesign:
    """System-cost-optimal trapezoid toll, priced to its revenue-best variant.

    The schedule mirrors the untolled equilibrium wait profile, so its flat
    fraction is ``1 - min(gap/max_wait, 1)``.  When the gap exceeds the
    car-only peak wait the profile is shifted up to peak at the gap
    (indifferent users break toward paying), which leaves system cost at the
    optimum while collecting the larger revenue.
    """
    _require_outside_option_regime(params)
    if params.capacity >= params.arrival_rate:
        gap = params.cost_gap
        policy = TrapezoidToll(gap, 0.0, 0.0, params.rush_length, params.rush_length,
                               params.early_penalty, params.late_penalty)
        return DynamicTollDesign(1.0, policy, gap * params.total_demand,
                                 params.car_freeflow_cost * params.total_demand)
    frac = _min_flat_fraction(params)
    revenue = dynamic_revenue_at_fraction(params, frac)
    return DynamicTollDesign(
        frac, _trapezoid_for_fraction(params, frac), revenue, optimal_system_cost(params)
    )


def static_system_cost(params: BottleneckParams, toll: float) -> CostBreakdown:
    """System-cost components under a flat toll.

    In the mixed band the four groups follow from the trapezoidal wait
    profile with peak ``gap - toll``; below the band the cost is the car-only
    constant; at or above the gap it is the zero-queue mode-split cost.
    Revenue is reported alongside but never added into the total.
    """
    if toll < 0:
        raise DomainError("toll must be nonnegative")
    _require_outside_option_regime(params)
    demand, mu, lam = params.total_demand, params.capacity, params.arrival_rate
    gap = params.cost_gap
    revenue = static_revenue(params, toll)

    if mu >= lam:
        if toll <= gap:
            return CostBreakdown(0.0, params.car_freeflow_cost * demand, 0.0, 0.0, revenue)
        return CostBreakdown(params.transit_cost * demand, 0.0, 0.0, 0.0, revenue)

    lo, _hi = feasible_toll_band(params)
    if toll >= gap:
        split = mu / lam
        return CostBreakdown(
            transit=params.transit_cost * demand * (1.0 - split),
            car_freeflow=params.car_freeflow_cost * demand * split,
            queuing=0.0,
            schedule=0.0,
            revenue=revenue,
        )
    if toll < lo:
        # Car-only equilibrium: cost does not depend on the toll level.
        base = demand * demand * params.schedule_factor / (2.0 * mu)
        return CostBreakdown(
            transit=0.0,
            car_freeflow=params.car_freeflow_cost * demand,
            queuing=base,
            schedule=base * (1.0 - mu / lam),
            revenue=revenue,
        )

    wait = gap - toll
    max_wait = max_wait_car_only(params)
    ontime_share = 1.0 - wait / max_wait
    inv_factor = 1.0 / params.schedule_factor  # (e+L)/(eL)
    transit = params.transit_cost * ontime_share * demand * (1.0 - mu / lam)
    car = params.car_freeflow_cost * (mu * wait * inv_factor + ontime_share * demand * mu / lam)
    schedule = (mu * wait * wait / 2.0) * inv_factor * (1.0 - mu / lam)
    queuing = wait * ontime_share * demand * mu / lam + (mu * wait * wait / 2.0) * inv_factor
    return CostBreakdown(transit, car, queuing, schedule, revenue)


def dynamic_ro_system_cost(params: BottleneckParams) -> CostBreakdown:
    """System cost under the revenue-optimal trapezoid toll, by component sum.

    Queuing is zero by construction; transit, car, and schedule costs are
    evaluated at the optimal flat fraction and summed.  The components are
    summed directly rather than through a collapsed single expression: the
    correct quadratic correction carries ``(1-mu/lam)^2 (1+mu/lam)``, and a
    collapsed variant with ``(1-mu/lam)^3`` sometimes seen in derivations
    fails the calibrated case-study benchmarks (see docs/formulas.md).
    """
    _require_outside_option_regime(params)
    design = dynamic_revenue_optimal(params)
    frac = design.flat_fraction
    demand, mu, lam = params.total_demand, params.capacity, params.arrival_rate
    if mu >= lam:
        return CostBreakdown(0.0, params.car_freeflow_cost * demand, 0.0, 0.0, design.revenue)
    transit = params.transit_cost * frac * demand * (1.0 - mu / lam)
    car = params.car_freeflow_cost * (frac * demand * mu / lam + (1.0 - frac) * demand)
    schedule = (
        demand * demand * params.schedule_factor / (2.0 * mu)
        * (1.0 - frac) ** 2
        * (1.0 - mu / lam)
    )
    return CostBreakdown(transit, car, 0.0, schedule, design.revenue)


def optimal_system_cost(params: BottleneckParams) -> float:
    """Minimum achievable system cost over all toll schedules.

    While the cost gap stays below the car-only peak wait the planner splits
    modes and the cost is quadratic in the gap; beyond that everyone drives
    under the queue-eliminating schedule; a nonpositive gap puts everyone on
    transit.
    """
    demand, mu, lam = params.total_demand, params.capacity, params.arrival_rate
    gap = params.cost_gap
    if gap <= 0:
        return params.transit_cost * demand
    if mu >= lam:
        return params.car_freeflow_cost * demand
    max_wait = max_wait_car_only(params)
    if gap <= max_wait:
        away = 1.0 - mu / lam
        curvature = mu / (2.0 * params.schedule_factor)
        return params.car_freeflow_cost * demand + away * demand * gap - away * curvature * gap * gap
    return (
        params.car_freeflow_cost * demand
        + params.schedule_factor / 2.0 * demand * demand * (1.0 / mu - 1.0 / lam)
    )


def static_sc_optimal_toll(params: BottleneckParams) -> tuple[float, float]:
    """System-cost-minimizing flat toll and the cost it achieves.

    Evaluates candidates over the feasible band: both endpoints, plus the
    interior stationary point of the quadratic cost (which exists only when
    ``mu/lam < 2/3``, where the cost is convex in the toll).  Below the band
    the cost is constant at the car-only value, so the lower endpoint stands
    in for that whole segment.
    """
    _require_outside_option_regime(params)
    if params.capacity >= params.arrival_rate:
        gap = params.cost_gap
        return gap, static_system_cost(params, gap).total
    lo, hi = feasible_toll_band(params)
    candidates = [lo, hi]
    mu, lam = params.capacity, params.arrival_rate
    ratio = mu / lam
    if ratio < 2.0 / 3.0:
        stationary = (
            params.total_demand * params.schedule_factor / lam
            + params.cost_gap * (1.0 - 2.0 * ratio)
        ) / (2.0 - 3.0 * ratio)
        if lo < stationary < hi:
            candidates.append(stationary)
    best = min(candidates, key=lambda t: static_system_cost(params, t).total)
    return best, static_system_cost(params, best).total


def performance_bounds(params: BottleneckParams) -> BoundReport:
    """Guarantees relating flat-optimal tolling to the dynamic benchmarks.

    The revenue lower bound takes one of three regime-specific forms, never
    below one half.  The factor-2 system-cost bound applies only while the
    cost gap stays within the car-only peak wait.  In the opposite corner
    (zero car free-flow cost, gap beyond ``low*(2*lam-mu)/mu``) the exact
    cost ratio ``1 + 1/(1 - mu/lam)`` is reported, which grows without bound
    as capacity approaches the arrival rate.
    """
    _require_outside_option_regime(params)
    if params.capacity >= params.arrival_rate:
        raise DomainError("bounds are stated for the congested case (capacity < arrival rate)")
    regime = classify_regime(params)
    gap = params.cost_gap
    mu, lam = params.capacity, params.arrival_rate
    low, _high = regime_thresholds(params)
    scale = math.inf if gap == 0 else low / gap

    if regime is Regime.MIXED_LOW:
        revenue_bound = 2.0 / (3.0 - mu / lam)
    elif regime is Regime.MIXED_MID:
        revenue_bound = min((2.0 + scale) / 4.0, 1.0 / (2.0 * (1.0 - mu / lam)))
    else:
        revenue_bound = 2.0 / 3.0

    max_wait = max_wait_car_only(params)
    sc_bound = 2.0 if gap <= max_wait else None

    exact_ratio = None
    if params.car_freeflow_cost == 0.0 and gap > low * (2.0 * lam - mu) / mu:
        exact_ratio = 1.0 + 1.0 / (1.0 - mu / lam)

    return BoundReport(scale, revenue_bound, sc_bound, exact_ratio, regime)
