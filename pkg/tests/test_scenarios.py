"""Scenario registry and config validation (the heavy pipelines are
exercised by the acceptance gate)."""

import pytest

from fejerflow.scenarios import (
    ConfigError,
    SCHEMA_VERSION,
    builtin_scenarios,
    run_scenario,
)


class TestRegistry:
    def test_all_families_present(self):
        names = set(builtin_scenarios())
        assert {"first_order_contraction_1d", "first_order_contraction_2d",
                "second_order_linear", "forward_backward_first_order",
                "forward_backward_second_order", "gradient_flow_quadratic",
                "stojkovic_negation", "negative_wrong_beta"} <= names

    def test_configs_declare_schema(self):
        for scenario in builtin_scenarios().values():
            assert scenario.config["schema_version"] == SCHEMA_VERSION
            assert scenario.config["name"] == scenario.name
            assert scenario.description

    def test_names_are_stable(self):
        assert sorted(builtin_scenarios()) == sorted(builtin_scenarios())


class TestValidation:
    def test_missing_schema_version(self):
        with pytest.raises(ConfigError):
            run_scenario({"kind": "first_order", "name": "x", "space": {}})

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            run_scenario({"schema_version": SCHEMA_VERSION, "kind": "nope",
                          "name": "x", "space": {}})

    def test_bad_solution_bound_rejected(self):
        cfg = dict(builtin_scenarios()["first_order_contraction_1d"].config)
        cfg["solution"] = {"point": [0.0], "b": 0.1}  # does not bound ||x0||
        with pytest.raises(ConfigError):
            run_scenario(cfg)

    def test_property_check_scenario_runs(self):
        out = run_scenario({
            "schema_version": SCHEMA_VERSION,
            "name": "tiny",
            "kind": "property_check",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"T": {"op": "identity"}},
        })
        assert out.ok and out.reports[0].claim == "operator_nonexpansive"

    def test_negative_scenario_violates(self):
        out = run_scenario(builtin_scenarios()["negative_wrong_beta"].config)
        assert not out.ok
