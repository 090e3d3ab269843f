"""Configuration layering and schema-driven validation."""

import math

import pytest

from errors import ConfigError, LagError
from models import FamilyId
from run_config import load_presets, load_run_config, parse_family_list, parse_q_list
from validation import normalize_input_schema, validate_against_schema, validate_run_config


class TestParsing:
    def test_q_list(self):
        assert parse_q_list("1, 2,inf") == [1.0, 2.0, math.inf]

    def test_q_list_rejects_other_exponents(self):
        with pytest.raises(ConfigError):
            parse_q_list("1,3")

    def test_family_list(self):
        assert parse_family_list("M,Minvt,Sinv") == [FamilyId.M, FamilyId.M_INV_T, FamilyId.S_INV]
        with pytest.raises(ConfigError):
            parse_family_list("M,X")


class TestLayering:
    def test_defaults(self):
        config = validate_run_config(load_run_config({"input": "data.csv"}, env={}))
        assert config["lag"] == 4
        assert config["q"] == [1.0, 2.0, math.inf]
        assert config["families"] == ["M", "Mt", "Minv", "Minvt", "S", "Sinv"]
        assert config["tol_rel"] == 1e-10
        assert config["format"] == "json"
        assert config["workers"] == 1

    def test_precedence(self):
        env = {"SPLINE_WEIGHTS_Q": "1", "SPLINE_WEIGHTS_LAG": "6", "SPLINE_WEIGHTS_VERBOSE": "true"}
        merged = load_run_config({"input": "data.csv", "preset": "quick", "lag": 3}, env=env)
        config = validate_run_config(merged)
        assert config["q"] == [1.0]           # env over preset
        assert config["families"] == ["Minv"]  # preset over defaults
        assert config["lag"] == 3             # CLI over env
        assert config["verbose"] is True
        assert config["preset"] == "quick"

    def test_none_overrides_are_ignored(self):
        merged = load_run_config({"input": "data.csv", "lag": None}, env={})
        assert merged["lag"] == 4

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load_run_config({"input": "data.csv", "preset": "nope"}, env={})

    def test_presets_file(self):
        presets = load_presets()
        assert presets["annual_lag4"]["settings"]["lag"] == 4


class TestValidation:
    def test_collects_every_error(self):
        with pytest.raises(ConfigError) as exc:
            validate_run_config({"input": "x.csv", "lag": 0, "q": "", "families": "Q", "tol_rel": -1.0,
                                 "format": "xml"})
        message = str(exc.value)
        for key in ("lag", "q", "families", "tol_rel", "format"):
            assert key in message

    def test_lag_against_series_length(self):
        config = {"input": "x.csv", "lag": 5, "q": "2", "families": "S", "tol_rel": 1e-10, "format": "csv"}
        assert validate_run_config(config, n=6)["lag"] == 5
        with pytest.raises(LagError):
            validate_run_config(config, n=5)

    def test_unknown_setting(self):
        with pytest.raises(ConfigError):
            validate_run_config({"input": "x.csv", "colour": "red"})

    def test_duplicates_removed_in_order(self):
        config = validate_run_config({"input": "x.csv", "lag": 2, "q": "inf,1,inf", "families": "S,M,S",
                                      "tol_rel": 1e-9, "format": "json"})
        assert config["q"] == [math.inf, 1.0]
        assert config["families"] == ["S", "M"]

    def test_schema_list_passthrough(self):
        fields = [{"name": "workers", "type": "integer", "required": True}]
        assert normalize_input_schema(fields) is fields
        validated, errors = validate_against_schema({"workers": "3"}, fields)
        assert validated == {"workers": 3}
        assert errors == []

    def test_boolean_strings(self):
        config = validate_run_config({"input": "x.csv", "lag": 2, "q": "1", "families": "S", "tol_rel": 1e-9,
                                      "format": "json", "svg": "yes", "full_precision": "0"})
        assert config["svg"] is True
        assert config["full_precision"] is False
