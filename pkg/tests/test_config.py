"""Configuration parsing, defaults, validation and overrides."""

import pytest

from unideform.config import (
    KINDS,
    ConfigError,
    ConfigSyntaxError,
    apply_overrides,
    load_raw,
    parse_override,
    validate_config,
)


def test_minimal_config_is_fully_defaulted():
    cfg = validate_config('kind = "twolevel-cubic"')
    assert cfg.c == 1.0 and cfg.gamma == 2.0
    assert cfg.numerics["t_end"] == 6.0
    assert cfg.numerics["dt"] == 5e-4
    assert cfg.output["prefix"] == "twolevel-cubic"


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_every_kind_validates_with_defaults(kind):
    cfg = validate_config({"kind": kind})
    assert cfg.kind == kind
    assert cfg.numerics["x_max"] > cfg.numerics["x_min"]


def test_dilatation_gets_a_wider_box():
    cfg = validate_config({"kind": "dilatation-1d"})
    assert (cfg.numerics["x_min"], cfg.numerics["x_max"]) == (-16.0, 16.0)
    assert validate_config({"kind": "transport-1d"}).numerics["x_max"] == 12.0


def test_unknown_kind_is_reported():
    with pytest.raises(ConfigError) as info:
        validate_config('kind = "warp-drive"')
    assert [v.field for v in info.value.violations] == ["kind"]


def test_single_range_violation():
    with pytest.raises(ConfigError) as info:
        validate_config('kind = "twolevel-cubic"\n[numerics]\ndt = -1.0\n')
    assert [v.field for v in info.value.violations] == ["numerics.dt"]


def test_all_violations_are_listed():
    text = 'kind = "transport-1d"\nmass = -1.0\n[numerics]\nn_points = 4\n'
    with pytest.raises(ConfigError) as info:
        validate_config(text)
    fields = {v.field for v in info.value.violations}
    assert fields == {"mass", "numerics.n_points"}


def test_type_and_unknown_key_violations_together():
    with pytest.raises(ConfigError) as info:
        validate_config({"kind": "nlevel", "seed": "zero", "colour": 3, "numerics": {"dt": "small"}})
    fields = {v.field for v in info.value.violations}
    assert {"seed", "colour", "numerics.dt"} <= fields


def test_syntax_error_carries_line_number():
    with pytest.raises(ConfigSyntaxError) as info:
        validate_config('kind = "nlevel"\n\n[numerics\n')
    assert info.value.line == 3


def test_level_out_of_range_for_two_level():
    with pytest.raises(ConfigError):
        validate_config({"kind": "twolevel-cubic", "level": 2})


def test_time_window_needs_two_steps():
    with pytest.raises(ConfigError) as info:
        validate_config({"kind": "nlevel", "numerics": {"t_end": 1.0, "dt": 0.9}})
    assert [v.field for v in info.value.violations] == ["numerics.dt"]


def test_overrides_parse_toml_scalars():
    assert parse_override("c=2") == (("c",), 2)
    assert parse_override("numerics.dt=1e-3") == (("numerics", "dt"), 1e-3)
    assert parse_override("hydrogen_form=scaling") == (("hydrogen_form",), "scaling")
    assert parse_override("hz_coeffs=[0, 1]") == (("hz_coeffs",), [0, 1])


def test_overrides_do_not_mutate_input():
    raw = load_raw('kind = "twolevel-cubic"\n[numerics]\ndt = 1e-3\n')
    new = apply_overrides(raw, ["numerics.dt=2e-3", "c=0.5"])
    assert raw["numerics"]["dt"] == 1e-3
    cfg = validate_config(new)
    assert cfg.numerics["dt"] == 2e-3 and cfg.c == 0.5


def test_malformed_override():
    with pytest.raises(ConfigError):
        parse_override("no-equals-sign")
