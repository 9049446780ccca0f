"""Flat ``key = value`` configuration files.

Grammar: one assignment per line, ``#`` starts a comment (whole line or
trailing), blank lines ignored, whitespace around keys and values trimmed.
Keys are dotted lowercase.  Example::

    # tighten the optimizer
    seed = 7
    discover.m = 2
    opt.lr = 0.01
    init.success_labels = 1.0
    init.weighted = true

Precedence is defaults < file < command-line flags; the resolved
configuration is embedded in every report.
"""

from __future__ import annotations

from dataclasses import fields

from .discovery import DiscoveryConfig
from .errors import InvalidParameterError


def _parse_int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise InvalidParameterError(f"expected an integer, got {s!r}") from None


def _parse_float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise InvalidParameterError(f"expected a number, got {s!r}") from None


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise InvalidParameterError(f"expected true/false, got {s!r}")


def _optional(parser):
    def parse(s: str):
        return None if s.lower() in ("none", "auto") else parser(s)
    return parse


def _parse_float_list(s: str) -> tuple | None:
    if s.lower() in ("none", "auto"):
        return None
    return tuple(_parse_float(part.strip()) for part in s.split(",") if part.strip())


# dotted key -> (DiscoveryConfig field, parser)
KEY_REGISTRY = {
    "seed": ("seed", _parse_int),
    "discover.m": ("n_regions", _parse_int),
    "discover.restarts": ("n_restarts", _parse_int),
    "discover.reward_clusters": ("reward_clusters", _optional(_parse_int)),
    "discover.ig_floor": ("ig_floor", _optional(_parse_float)),
    "discover.jobs": ("jobs", _parse_int),
    "opt.lr": ("lr", _optional(_parse_float)),
    "opt.max_steps": ("max_steps", _parse_int),
    "opt.tol": ("tol", _parse_float),
    "opt.alpha0": ("alpha0", _optional(_parse_float)),
    "opt.growth": ("growth", _parse_float),
    "opt.period": ("period", _optional(_parse_int)),
    "opt.alpha_max": ("alpha_max", _optional(_parse_float)),
    "opt.max_step": ("max_step", _optional(_parse_float)),
    "opt.radius_lr_scale": ("radius_lr_scale", _parse_float),
    "opt.eps_min": ("eps_min", _optional(_parse_float)),
    "opt.eps_max": ("eps_max", _optional(_parse_float)),
    "init.n_samples": ("init_samples", _parse_int),
    "init.bandwidth": ("bandwidth", _optional(_parse_float)),
    "init.success_labels": ("success_labels", _parse_float_list),
    "init.weighted": ("weighted_sampling", _parse_bool),
}

_FIELD_NAMES = {f.name for f in fields(DiscoveryConfig)}
assert all(f in _FIELD_NAMES for f, _ in KEY_REGISTRY.values())


def parse_assignment(key: str, value: str) -> tuple[str, object]:
    """One ``key = value`` pair -> (config field name, typed value)."""
    key = key.strip()
    if key not in KEY_REGISTRY:
        known = ", ".join(sorted(KEY_REGISTRY))
        raise InvalidParameterError(f"unknown config key {key!r} (known: {known})")
    field_name, parser = KEY_REGISTRY[key]
    return field_name, parser(value.strip())


def parse_config_file(path) -> dict:
    """Parse a config file into a {field name: typed value} dict."""
    out: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameterError(
                    f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
                )
            key, value = line.split("=", 1)
            try:
                field_name, typed = parse_assignment(key, value)
            except InvalidParameterError as e:
                raise InvalidParameterError(f"{path}:{lineno}: {e}") from None
            out[field_name] = typed
    return out


def make_discovery_config(file_values: dict | None = None, **overrides) -> DiscoveryConfig:
    """Merge config sources into a DiscoveryConfig.

    ``file_values`` comes from :func:`parse_config_file`; ``overrides`` are
    field-name keyword arguments (None means "not set" and is skipped).
    Overrides win over the file, the file over defaults.
    """
    merged: dict = {}
    if file_values:
        merged.update(file_values)
    for name, value in overrides.items():
        if name not in _FIELD_NAMES:
            raise InvalidParameterError(f"unknown config field {name!r}")
        if value is not None:
            merged[name] = value
    cfg = DiscoveryConfig(**merged)
    cfg.validate()
    return cfg
