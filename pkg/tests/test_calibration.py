import pytest

from tollgap import bottleneck as bn
from tollgap.calibration import (
    BUILTIN_SCENARIOS,
    CarCostSpec,
    ScenarioFormatError,
    TransitCostSpec,
    builtin_scenario,
    car_cost,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    transit_cost,
    weighted_freeflow_time,
)

OD_TABLE = [
    (12.6, 29.8),
    (17.9, 12.4),
    (13.8, 12.4),
    (27.2, 8.6),
    (25.3, 5.0),
    (31.1, 4.8),
]


class TestCostSpecs:
    def test_bay_bridge_transit_cost(self):
        spec = BUILTIN_SCENARIOS["bay_bridge"].transit
        got = transit_cost(spec, 22.0, discomfort=1.5)
        assert got == pytest.approx(6.14 / 22.0 + 1.55, rel=1e-12)

    def test_zero_discomfort_leaves_fare_only(self):
        spec = BUILTIN_SCENARIOS["bay_bridge"].transit
        assert transit_cost(spec, 22.0, discomfort=0.0) == pytest.approx(6.14 / 22.0)

    def test_nyc_transit_cost_at_18(self):
        spec = BUILTIN_SCENARIOS["nyc"].transit
        assert transit_cost(spec, 40.0, discomfort=18.0) == pytest.approx(10.425)

    def test_affine_in_discomfort(self):
        spec = BUILTIN_SCENARIOS["nyc"].transit
        slope = spec.walk_time + spec.wait_time + spec.in_vehicle_time
        z0 = transit_cost(spec, 40.0, discomfort=2.0)
        z1 = transit_cost(spec, 40.0, discomfort=3.0)
        assert z1 - z0 == pytest.approx(slope, abs=1e-12)

    def test_discomfort_below_one_warns(self):
        with pytest.warns(UserWarning):
            TransitCostSpec(fare=2.0, walk_time=0.1, wait_time=0.1, in_vehicle_time=0.5, discomfort=0.5)

    def test_car_costs(self):
        assert car_cost(CarCostSpec(30.0, 0.35), 22.0) == pytest.approx(1.7136364, abs=1e-6)
        assert car_cost(CarCostSpec(30.0, 0.15), 40.0) == pytest.approx(0.9)
        assert car_cost(CarCostSpec(0.0, 0.0), 22.0) == 0.0

    def test_invalid_value_of_time(self):
        from tollgap import ParameterError

        with pytest.raises(ParameterError):
            transit_cost(BUILTIN_SCENARIOS["nyc"].transit, 0.0)


class TestWeightedFreeflowTime:
    def test_reference_table(self):
        got = weighted_freeflow_time(OD_TABLE, 50.0)
        assert got == pytest.approx(0.35020821917808215, rel=1e-12)  # frozen regression
        assert got == pytest.approx(0.35, abs=5e-3)  # rounded reference value: 21 minutes

    def test_single_row(self):
        assert weighted_freeflow_time([(25.0, 40.0)], 50.0) == pytest.approx(0.5)

    def test_equal_rows_symmetry(self):
        one = weighted_freeflow_time([(10.0, 7.0)], 40.0)
        two = weighted_freeflow_time([(10.0, 7.0), (10.0, 7.0)], 40.0)
        assert one == pytest.approx(two, rel=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ScenarioFormatError):
            weighted_freeflow_time([], 50.0)


class TestBuiltins:
    def test_bay_bridge_values(self):
        sc = builtin_scenario("bay_bridge")
        assert sc.capacity == 9600.0
        assert sc.total_demand == 70000.0
        assert sc.arrival_rate == 14000.0
        assert sc.implemented_toll == 8.50
        assert sc.car.freeflow_time == pytest.approx(21.0 / 60.0)

    def test_nyc_values(self):
        sc = builtin_scenario("nyc")
        assert sc.trip_distance == 6.0
        assert sc.max_throughput == 45000.0
        assert sc.jam_accumulations == (14000.0, 42000.0, 70000.0, 140000.0)
        assert sc.default_jam_accumulation == 140000.0
        assert sc.implemented_toll == 9.0

    def test_unknown_builtin(self):
        with pytest.raises(ScenarioFormatError):
            builtin_scenario("atlantis")

    def test_round_trip(self):
        for name in BUILTIN_SCENARIOS:
            sc = builtin_scenario(name)
            assert parse_scenario(serialize_scenario(sc)) == sc

    def test_bay_bridge_stays_in_guarantee_regime(self):
        # The factor-2 cost guarantee needs gap <= car-only max wait; the
        # preset satisfies it across the empirically supported eta range.
        sc = builtin_scenario("bay_bridge")
        for eta in [1.0 + 0.1 * k for k in range(39)]:  # up to 4.8
            params = sc.params(eta)
            assert params.cost_gap < bn.max_wait_car_only(params)


class TestParsing:
    def test_missing_arrival_rate_named(self, tmp_path):
        text = serialize_scenario(builtin_scenario("bay_bridge"))
        text = "\n".join(l for l in text.splitlines() if not l.startswith("demand.arrival_rate"))
        path = tmp_path / "partial.scenario"
        path.write_text(text)
        with pytest.raises(ScenarioFormatError, match="arrival_rate"):
            load_scenario(str(path))

    def test_unknown_key_named(self):
        text = serialize_scenario(builtin_scenario("bay_bridge")) + "demand.banana = 3 users\n"
        with pytest.raises(ScenarioFormatError, match="banana"):
            parse_scenario(text)

    def test_missing_unit_named(self):
        text = serialize_scenario(builtin_scenario("bay_bridge")).replace(
            "transit.fare = 6.14 dollars", "transit.fare = 6.14"
        )
        with pytest.raises(ScenarioFormatError, match="transit.fare"):
            parse_scenario(text)

    def test_wrong_unit_dimension(self):
        text = serialize_scenario(builtin_scenario("bay_bridge")).replace(
            "transit.fare = 6.14 dollars", "transit.fare = 6.14 hours"
        )
        with pytest.raises(ScenarioFormatError, match="transit.fare"):
            parse_scenario(text)

    def test_minutes_autoconvert(self):
        text = serialize_scenario(builtin_scenario("bay_bridge"))
        walk_line = next(l for l in text.splitlines() if l.startswith("transit.walk_time"))
        sc = parse_scenario(text.replace(walk_line, "transit.walk_time = 20 minutes"))
        assert sc.transit.walk_time == pytest.approx(1.0 / 3.0)

    def test_supply_exclusivity(self):
        text = serialize_scenario(builtin_scenario("bay_bridge"))
        text += "supply.max_throughput = 45000 vehicles_per_hour\n"
        text += "supply.jam_accumulation = 140000 vehicles\n"
        text += "supply.freeflow_speed = 40 km_per_hour\n"
        text += "supply.trip_distance = 6 km\n"
        with pytest.raises(ScenarioFormatError):
            parse_scenario(text)

    def test_comments_and_blank_lines(self):
        text = "# header comment\n\n" + serialize_scenario(builtin_scenario("nyc"))
        assert parse_scenario(text) == builtin_scenario("nyc")

    def test_mfd_scenario_round_trip(self):
        sc = builtin_scenario("nyc")
        again = parse_scenario(serialize_scenario(sc))
        assert again.mfd().critical_accumulation == pytest.approx(6750.0)

    def test_params_conversion(self):
        sc = builtin_scenario("bay_bridge")
        params = sc.params(1.5)
        assert params.transit_cost == pytest.approx(1.8290909, abs=1e-6)
        assert params.car_freeflow_cost == pytest.approx(1.7136364, abs=1e-6)
