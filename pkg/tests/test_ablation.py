"""
Tests for the ablation switchboard
"""

import pytest

from adenet.config import RunConfig
from adenet.errors import ConfigError, UnknownAxisError
from adenet.harness.ablation import ABLATION_AXES, ablate, config_diff


@pytest.mark.unit
@pytest.mark.parametrize("axis", sorted(ABLATION_AXES))
def test_each_axis_changes_one_field(axis):
    base = RunConfig()
    config = ablate(base, axis)
    key, value = ABLATION_AXES[axis]
    diff = config_diff(base, config)
    assert list(diff) == [key]
    assert diff[key][1] == value


@pytest.mark.unit
def test_base_is_untouched():
    base = RunConfig()
    snapshot = base.model_dump()
    for axis in ABLATION_AXES:
        ablate(base, axis)
    assert base.model_dump() == snapshot


@pytest.mark.unit
def test_axes_cover_every_switch():
    keys = {key for key, _ in ABLATION_AXES.values()}
    assert keys == {
        "model.use_cmc",
        "model.mln_position",
        "model.audio_input",
        "model.fusion.ablate_a_to_s",
        "model.fusion.ablate_s_to_a",
        "model.context.variant",
    }
    positions = {value for key, value in ABLATION_AXES.values() if key == "model.mln_position"}
    assert positions == {"none", "ffn1", "cma", "conv", "ffn2"}


@pytest.mark.unit
def test_unknown_axis():
    with pytest.raises(UnknownAxisError):
        ablate(RunConfig(), "no_such_axis")


@pytest.mark.unit
def test_config_diff_of_equal_configs_is_empty():
    assert config_diff(RunConfig(), RunConfig()) == {}


@pytest.mark.unit
@pytest.mark.parametrize("axis,position", [("no_mln", "none"), ("mln_cma", "cma")])
def test_axis_that_changes_nothing_is_rejected(axis, position):
    base = RunConfig.model_validate({"model": {"mln_position": position}})
    with pytest.raises(ConfigError, match=axis):
        ablate(base, axis)
