"""Urban-scale extension: triangular flow diagram with state-dependent capacity.

The urban network is summarized by a triangular relation between vehicle
accumulation and outflow: linear free-flow up to a critical accumulation,
then a linear congested branch falling to zero at jam accumulation.  Flat
tolls can push the system onto the congested branch, which turns the flat
bottleneck algebra into log-form expressions; the trapezoidal (dynamic)
benchmarks keep the system pinned at the critical accumulation and therefore
delegate to the bottleneck formulas with capacity set to the maximum
throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import bottleneck
from .core import BottleneckParams, CostBreakdown, DomainError, ParameterError
from .search import grid_refine_max, grid_refine_min

__all__ = [
    "TriangularMfd",
    "MfdDynamicBenchmarks",
    "throughput",
    "throughput_from_wait",
    "static_lower_toll",
    "static_revenue",
    "static_system_cost",
    "static_revenue_optimal",
    "static_sc_optimal",
    "dynamic_benchmarks",
]

DEFAULT_GRID_POINTS = 4096


@dataclass(frozen=True)
class TriangularMfd:
    """Triangular accumulation-outflow relation for an urban network.

    Attributes:
        max_throughput: peak outflow, vehicles/hour, reached at the critical
            accumulation.
        jam_accumulation: accumulation at which outflow hits zero (vehicles).
        freeflow_speed: km/hour on the uncongested branch.
        trip_distance: fixed trip length, km; together with the speed it
            fixes the critical accumulation ``max_throughput * D / v_f``.
    """

    max_throughput: float
    jam_accumulation: float
    freeflow_speed: float
    trip_distance: float

    def __post_init__(self) -> None:
        for name in ("max_throughput", "jam_accumulation", "freeflow_speed", "trip_distance"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be finite and positive")
        if not self.critical_accumulation < self.jam_accumulation:
            raise ParameterError(
                "critical accumulation must fall strictly below jam accumulation"
            )

    @property
    def critical_accumulation(self) -> float:
        return self.max_throughput * self.trip_distance / self.freeflow_speed


@dataclass(frozen=True)
class MfdDynamicBenchmarks:
    """Dynamic benchmarks for an urban scenario (all at critical accumulation)."""

    ro: bottleneck.DynamicTollDesign
    so: bottleneck.DynamicTollDesign
    sc_opt: float


def throughput(mfd: TriangularMfd, accumulation: float) -> float:
    """Outflow at a given accumulation: linear up to critical, linear down to jam."""
    slack = 1e-12 * mfd.jam_accumulation
    if accumulation < -slack or accumulation > mfd.jam_accumulation + slack:
        raise DomainError("accumulation must lie in [0, jam_accumulation]")
    accumulation = min(max(accumulation, 0.0), mfd.jam_accumulation)
    n_c = mfd.critical_accumulation
    if accumulation <= n_c:
        return accumulation * mfd.freeflow_speed / mfd.trip_distance
    return (
        mfd.max_throughput
        * (mfd.jam_accumulation - accumulation)
        / (mfd.jam_accumulation - n_c)
    )


def throughput_from_wait(mfd: TriangularMfd, wait: float) -> float:
    """Congested-branch outflow as a function of the excess travel time.

    Inverting the triangular relation gives
    ``n_j / (n_j / max_throughput + wait)``: strictly decreasing in the wait,
    equal to the peak at zero wait, and vanishing as the wait grows.
    """
    if wait < 0:
        raise DomainError("wait must be nonnegative")
    n_j = mfd.jam_accumulation
    return n_j / (n_j / mfd.max_throughput + wait)


def static_lower_toll(params: BottleneckParams, mfd: TriangularMfd) -> float:
    """Smallest flat toll at which some user is indifferent car/transit.

    Below this toll the flat segment of the mixed-mode wait profile would
    need negative length; operationally it is the root of the
    flat-segment-length expression:
    ``max(0, gap - (n_j/mu_f) * (exp(demand*eL/((e+L)*n_j)) - 1))``.
    """
    n_j = mfd.jam_accumulation
    spread = params.total_demand * params.schedule_factor / n_j
    if spread >= 700.0:
        # exp would overflow; the shoulder term dwarfs any representable gap.
        return 0.0
    return max(0.0, params.cost_gap - (n_j / mfd.max_throughput) * math.expm1(spread))


def _check_toll_domain(params: BottleneckParams, mfd: TriangularMfd, toll: float) -> None:
    lo = static_lower_toll(params, mfd)
    hi = params.cost_gap
    slack = 1e-9 * max(1.0, abs(hi))
    if toll < lo - slack or toll > hi + slack:
        raise DomainError(
            f"toll {toll!r} outside the mixed-mode band [{lo!r}, {hi!r}]; "
            "the all-car congested regime is not modeled"
        )


def _log_term(mfd: TriangularMfd, wait: float) -> float:
    return math.log1p(wait * mfd.max_throughput / mfd.jam_accumulation)


def _car_counts(
    params: BottleneckParams, mfd: TriangularMfd, wait: float
) -> tuple[float, float, float]:
    """(shoulder car users, peak-wait outflow, flat-segment length)."""
    n_j = mfd.jam_accumulation
    shoulder = n_j / params.schedule_factor * _log_term(mfd, wait)
    peak_flow = throughput_from_wait(mfd, wait)
    flat_len = (params.total_demand - shoulder) / params.arrival_rate
    return shoulder, peak_flow, flat_len


def _revenue_at(params: BottleneckParams, mfd: TriangularMfd, toll: float) -> float:
    wait = max(params.cost_gap - toll, 0.0)
    shoulder, peak_flow, flat_len = _car_counts(params, mfd, wait)
    return toll * (shoulder + peak_flow * flat_len)


def static_revenue(params: BottleneckParams, mfd: TriangularMfd, toll: float) -> float:
    """Revenue of a flat toll on the urban network (closed log form).

    ``toll * [shoulder_users + peak_outflow * flat_length]`` where the
    shoulder count is ``n_j*(e+L)/(eL) * log(1 + W*mu_f/n_j)`` for peak wait
    ``W = gap - toll``.  Valid on ``[static_lower_toll, gap]``; outside that
    band the all-car congested equilibrium is not modeled and a
    :class:`~tollgap.core.DomainError` is raised.
    """
    _check_toll_domain(params, mfd, toll)
    return _revenue_at(params, mfd, toll)


def _cost_at(params: BottleneckParams, mfd: TriangularMfd, toll: float) -> CostBreakdown:
    wait = max(params.cost_gap - toll, 0.0)
    n_j = mfd.jam_accumulation
    a = n_j / mfd.max_throughput
    lam = params.arrival_rate
    e, late = params.early_penalty, params.late_penalty
    log_term = _log_term(mfd, wait)
    shoulder, peak_flow, flat_len = _car_counts(params, mfd, wait)
    car_users = shoulder + peak_flow * flat_len

    transit = params.transit_cost * (params.total_demand - car_users)
    car = params.car_freeflow_cost * car_users
    queue_flat = flat_len * peak_flow * wait
    queue_shoulders = (n_j / e + n_j / late) * (wait - a * log_term)
    if wait > 0.0:
        sched_core = (wait - (n_j / lam) * log_term) * (1.0 - (a / wait) * log_term)
    else:
        sched_core = 0.0
    schedule = (n_j / e + n_j / late) * sched_core
    return CostBreakdown(transit, car, queue_flat + queue_shoulders, schedule, toll * car_users)


def static_system_cost(
    params: BottleneckParams, mfd: TriangularMfd, toll: float
) -> CostBreakdown:
    """System cost of a flat toll on the urban network, from its seven pieces.

    Transit and free-flow car costs scale with the mode split; queuing splits
    into the flat-segment block plus closed antiderivatives over the rising
    and falling shoulders; schedule delay uses the closed shoulder forms.
    Every congestion piece vanishes at ``toll == gap``.  Domain as in
    :func:`static_revenue`.
    """
    _check_toll_domain(params, mfd, toll)
    return _cost_at(params, mfd, toll)


def static_revenue_optimal(
    params: BottleneckParams, mfd: TriangularMfd, grid_points: int = DEFAULT_GRID_POINTS
) -> tuple[float, float]:
    """Revenue-maximizing flat toll by grid scan plus golden-section polish.

    The revenue curve is Lipschitz on the band, so the grid resolution bounds
    the optimality gap; the refinement makes boundary optima exact.  An
    empty band (nonpositive gap) degenerates to the gap itself.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    lo = static_lower_toll(params, mfd)
    hi = params.cost_gap
    if hi <= lo:
        toll = max(hi, 0.0)
        return toll, _revenue_at(params, mfd, toll)
    return grid_refine_max(lambda t: _revenue_at(params, mfd, t), lo, hi, grid_points)


def static_sc_optimal(
    params: BottleneckParams, mfd: TriangularMfd, grid_points: int = DEFAULT_GRID_POINTS
) -> tuple[float, float]:
    """System-cost-minimizing flat toll, same search scheme as the revenue one."""
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    lo = static_lower_toll(params, mfd)
    hi = params.cost_gap
    if hi <= lo:
        toll = max(hi, 0.0)
        return toll, _cost_at(params, mfd, toll).total
    return grid_refine_min(
        lambda t: _cost_at(params, mfd, t).total, lo, hi, grid_points
    )


def dynamic_benchmarks(params: BottleneckParams, mfd: TriangularMfd) -> MfdDynamicBenchmarks:
    """Dynamic revenue-optimal / system-cost-optimal benchmarks for the network.

    The optimal trapezoid schedules hold the network at the critical
    accumulation, where it behaves exactly like a fixed bottleneck of
    capacity ``max_throughput``; revenue and cost therefore come from the
    bottleneck module with the capacity swapped in.
    """
    delegated = BottleneckParams(
        total_demand=params.total_demand,
        arrival_rate=params.arrival_rate,
        capacity=mfd.max_throughput,
        early_penalty=params.early_penalty,
        late_penalty=params.late_penalty,
        car_freeflow_cost=params.car_freeflow_cost,
        transit_cost=params.transit_cost,
    )
    ro = bottleneck.dynamic_revenue_optimal(delegated)
    ro = bottleneck.DynamicTollDesign(
        ro.flat_fraction,
        ro.policy,
        ro.revenue,
        bottleneck.dynamic_ro_system_cost(delegated).total,
    )
    so = bottleneck.dynamic_so_design(delegated)
    return MfdDynamicBenchmarks(ro, so, bottleneck.optimal_system_cost(delegated))
