"""Deterministic YAML output: stable key order and 17-significant-digit floats."""

import math
from typing import Any

import numpy as np
import yaml


class ExactFloatDumper(yaml.SafeDumper):
    """SafeDumper that writes every float with %.17g so it reads back bit-identically."""
    pass


def format_float(value: float) -> str:
    """
    Render a float as YAML text.

    A '.0' is inserted when %.17g produces no decimal point, because YAML only
    resolves '1e+20' style text as a string.
    """
    value = float(value)
    if math.isnan(value):
        return '.nan'
    if math.isinf(value):
        return '.inf' if value > 0 else '-.inf'
    text = '%.17g' % value
    if '.' not in text:
        mantissa, sep, exponent = text.partition('e')
        text = f"{mantissa}.0{sep}{exponent}"
    return text


def _represent_float(dumper: yaml.SafeDumper, value: float) -> yaml.Node:
    return dumper.represent_scalar('tag:yaml.org,2002:float', format_float(value))


def _represent_numpy_int(dumper: yaml.SafeDumper, value: Any) -> yaml.Node:
    return dumper.represent_int(int(value))


ExactFloatDumper.add_representer(float, _represent_float)
ExactFloatDumper.add_representer(np.float64, _represent_float)
ExactFloatDumper.add_representer(np.float32, _represent_float)
ExactFloatDumper.add_representer(np.int64, _represent_numpy_int)
ExactFloatDumper.add_representer(tuple, yaml.SafeDumper.represent_list)


def dump_yaml(data: Any) -> str:
    """Serialize to block-style YAML preserving dict insertion order."""
    return yaml.dump(
        data,
        Dumper=ExactFloatDumper,
        sort_keys=False,
        default_flow_style=False,
        allow_unicode=True,
    )
