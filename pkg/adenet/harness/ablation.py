"""
Ablation switchboard - every axis flips exactly one RunConfig field
"""

from typing import Any

from pydantic import ValidationError

from adenet.config import RunConfig, flatten_config
from adenet.errors import ConfigError, UnknownAxisError

# axis -> (dotted config key, ablated value)
ABLATION_AXES: dict[str, tuple[str, Any]] = {
    "no_cmc": ("model.use_cmc", False),
    "no_mln": ("model.mln_position", "none"),
    "mln_ffn1": ("model.mln_position", "ffn1"),
    "mln_cma": ("model.mln_position", "cma"),
    "mln_conv": ("model.mln_position", "conv"),
    "mln_ffn2": ("model.mln_position", "ffn2"),
    "raw_audio": ("model.audio_input", "raw"),
    "no_a_to_s": ("model.fusion.ablate_a_to_s", True),
    "no_s_to_a": ("model.fusion.ablate_s_to_a", True),
    "tcn_context": ("model.context.variant", "tcn"),
}


def ablate(base: RunConfig, axis: str) -> RunConfig:
    """Copy of ``base`` with the single field behind ``axis`` switched; a no-op axis is a ConfigError"""
    if axis not in ABLATION_AXES:
        raise UnknownAxisError(f"unknown ablation axis {axis!r}; choose from {', '.join(ABLATION_AXES)}")
    key, value = ABLATION_AXES[axis]

    data = base.model_dump(mode="json")
    node = data
    *parents, leaf = key.split(".")
    for part in parents:
        node = node[part]
    if node[leaf] == value:
        raise ConfigError(f"ablation {axis} changes nothing: {key} is already {value!r}")
    node[leaf] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"ablation {axis} produced an invalid config: {e}") from e


def config_diff(a: RunConfig, b: RunConfig) -> dict[str, tuple[Any, Any]]:
    """Dotted keys whose values differ between two configs"""
    flat_a, flat_b = flatten_config(a), flatten_config(b)
    return {k: (flat_a.get(k), flat_b.get(k)) for k in sorted(flat_a.keys() | flat_b.keys()) if flat_a.get(k) != flat_b.get(k)}
