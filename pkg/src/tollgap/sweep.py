"""Discomfort-multiplier sweeps: one row of policy metrics per eta value.

Rows are computed independently (safe to parallelize) and written in eta
order with a fixed 8-decimal format, so identical inputs produce
byte-identical CSV output.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import bottleneck, mfd
from .calibration import Scenario
from .core import Regime, classify_regime

__all__ = ["SweepRow", "CSV_HEADER", "compute_row", "compute_rows", "write_csv", "nj_divergence"]

CSV_HEADER = (
    "eta",
    "regime",
    "tau_static_ro_hours",
    "tau_static_ro_dollars",
    "tau_static_so_hours",
    "tau_static_so_dollars",
    "rev_static_ro",
    "rev_static_so",
    "rev_dynamic_ro",
    "rev_dynamic_so",
    "sc_static_ro",
    "sc_static_so",
    "sc_dynamic_ro",
    "sc_opt",
    "rev_ratio_static_ro",
    "rev_ratio_static_so",
    "rev_ratio_dynamic_ro",
    "rev_ratio_dynamic_so",
    "sc_ratio_static_ro",
    "sc_ratio_static_so",
    "sc_ratio_dynamic_ro",
    "sc_ratio_opt",
)


@dataclass(frozen=True)
class SweepRow:
    """All policy metrics at one discomfort multiplier.

    Revenues and system costs are user-hours; ratio columns are normalized
    by the dynamic revenue optimum and the minimum system cost respectively,
    so revenue ratios never exceed 1 and cost ratios never drop below 1.
    """

    eta: float
    regime: Regime
    tau_static_ro: float
    tau_static_so: float
    rev_static_ro: float
    rev_static_so: float
    rev_dynamic_ro: float
    rev_dynamic_so: float
    sc_static_ro: float
    sc_static_so: float
    sc_dynamic_ro: float
    sc_opt: float
    value_of_time: float

    def _ratio(self, value: float, denom: float) -> float:
        return value / denom if denom != 0 else float("nan")

    def rev_ratio(self, value: float) -> float:
        return self._ratio(value, self.rev_dynamic_ro)

    def sc_ratio(self, value: float) -> float:
        return self._ratio(value, self.sc_opt)

    def csv_values(self) -> tuple[str, ...]:
        def fmt(x: float) -> str:
            return f"{x:.8f}"

        return (
            fmt(self.eta),
            self.regime.value,
            fmt(self.tau_static_ro),
            fmt(self.tau_static_ro * self.value_of_time),
            fmt(self.tau_static_so),
            fmt(self.tau_static_so * self.value_of_time),
            fmt(self.rev_static_ro),
            fmt(self.rev_static_so),
            fmt(self.rev_dynamic_ro),
            fmt(self.rev_dynamic_so),
            fmt(self.sc_static_ro),
            fmt(self.sc_static_so),
            fmt(self.sc_dynamic_ro),
            fmt(self.sc_opt),
            fmt(self.rev_ratio(self.rev_static_ro)),
            fmt(self.rev_ratio(self.rev_static_so)),
            fmt(self.rev_ratio(self.rev_dynamic_ro)),
            fmt(self.rev_ratio(self.rev_dynamic_so)),
            fmt(self.sc_ratio(self.sc_static_ro)),
            fmt(self.sc_ratio(self.sc_static_so)),
            fmt(self.sc_ratio(self.sc_dynamic_ro)),
            fmt(self.sc_ratio(self.sc_opt)),
        )


def compute_row(
    scenario: Scenario,
    eta: float,
    jam_accumulation: float | None = None,
    grid_points: int = mfd.DEFAULT_GRID_POINTS,
) -> SweepRow:
    """Evaluate all four policies at one discomfort multiplier."""
    params = scenario.params(eta)
    regime = classify_regime(params)
    if regime is Regime.ALL_TRANSIT:
        # Transit dominates outright: no policy collects revenue or changes cost.
        all_transit_cost = params.transit_cost * params.total_demand
        return SweepRow(
            eta=eta,
            regime=regime,
            tau_static_ro=0.0,
            tau_static_so=0.0,
            rev_static_ro=0.0,
            rev_static_so=0.0,
            rev_dynamic_ro=0.0,
            rev_dynamic_so=0.0,
            sc_static_ro=all_transit_cost,
            sc_static_so=all_transit_cost,
            sc_dynamic_ro=all_transit_cost,
            sc_opt=all_transit_cost,
            value_of_time=scenario.value_of_time,
        )
    if scenario.is_mfd:
        net = scenario.mfd(jam_accumulation)
        tau_ro, rev_ro = mfd.static_revenue_optimal(params, net, grid_points)
        tau_so, sc_so = mfd.static_sc_optimal(params, net, grid_points)
        sc_ro = mfd.static_system_cost(params, net, tau_ro).total
        rev_so = mfd.static_revenue(params, net, tau_so)
        bench = mfd.dynamic_benchmarks(params, net)
        rev_dyn_ro, sc_dyn_ro = bench.ro.revenue, bench.ro.system_cost
        rev_dyn_so, sc_opt = bench.so.revenue, bench.sc_opt
    else:
        tau_ro, rev_ro = bottleneck.static_revenue_optimal_toll(params)
        tau_so, sc_so = bottleneck.static_sc_optimal_toll(params)
        sc_ro = bottleneck.static_system_cost(params, tau_ro).total
        rev_so = bottleneck.static_revenue(params, tau_so)
        design = bottleneck.dynamic_revenue_optimal(params)
        rev_dyn_ro = design.revenue
        sc_dyn_ro = bottleneck.dynamic_ro_system_cost(params).total
        rev_dyn_so = bottleneck.dynamic_so_design(params).revenue
        sc_opt = bottleneck.optimal_system_cost(params)
    return SweepRow(
        eta=eta,
        regime=regime,
        tau_static_ro=tau_ro,
        tau_static_so=tau_so,
        rev_static_ro=rev_ro,
        rev_static_so=rev_so,
        rev_dynamic_ro=rev_dyn_ro,
        rev_dynamic_so=rev_dyn_so,
        sc_static_ro=sc_ro,
        sc_static_so=sc_so,
        sc_dynamic_ro=sc_dyn_ro,
        sc_opt=sc_opt,
        value_of_time=scenario.value_of_time,
    )


def compute_rows(
    scenario: Scenario,
    etas,
    jam_accumulation: float | None = None,
    grid_points: int = mfd.DEFAULT_GRID_POINTS,
    max_workers: int | None = None,
) -> list[SweepRow]:
    """Rows for every eta, computed in parallel, returned in eta order."""
    etas = list(etas)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(lambda v: compute_row(scenario, v, jam_accumulation, grid_points), etas))
    return [row for _, row in sorted(zip(etas, rows), key=lambda pair: pair[0])]


def nj_divergence(
    scenario: Scenario, etas, grid_points: int = mfd.DEFAULT_GRID_POINTS, rel_tol: float = 1e-9
) -> list[str]:
    """Columns that differ across the jam-accumulation sweep, per eta.

    Empty when the flat optimum sits at the top of the band, where the
    congested-branch terms vanish and the jam level drops out exactly.
    """
    if not scenario.is_mfd or len(scenario.jam_accumulations) < 2:
        return []
    notes = []
    numeric_fields = (
        "tau_static_ro",
        "tau_static_so",
        "rev_static_ro",
        "rev_static_so",
        "sc_static_ro",
        "sc_static_so",
    )
    for eta in etas:
        rows = [compute_row(scenario, eta, nj, grid_points) for nj in scenario.jam_accumulations]
        for field_name in numeric_fields:
            values = [getattr(r, field_name) for r in rows]
            spread = max(values) - min(values)
            scale = max(abs(v) for v in values) or 1.0
            if spread > rel_tol * scale:
                notes.append(
                    f"eta={eta:g}: {field_name} varies across jam levels "
                    f"(spread {spread:.3e}, values {['%.6g' % v for v in values]})"
                )
    return notes


def write_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_values())
