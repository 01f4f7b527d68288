# python3
# config_adaptors.py

# This file defines adaptor helper objects which convert raw values read
# from a run configuration (TOML/JSON, or command line strings) into the
# typed, range-checked values held by SystemParams, and render typed values
# back into configuration form.

# Rendering has to be the exact inverse of adapting so that a configuration
# written out by to_config() reproduces the same SystemParams when read back.
# For that reason floats are rendered with repr() semantics (shortest
# round-tripping decimal) unless an explicit format is requested, and the
# explicit format is only ever used for human-readable summaries.

import math

from .core import ConfigError


class RangeAdaptor:

    def __init__(
        self, min_value=None, max_value=None,
        min_inclusive=True, max_inclusive=True,
        format=None, suffix=""
    ):
        self.min_value = min_value
        self.max_value = max_value
        self.min_inclusive = min_inclusive
        self.max_inclusive = max_inclusive
        self.format = format
        self.suffix = suffix

    def _parse(self, key, raw):
        # bool is a subclass of int, but true/false in a config file is
        # never a sensible physical value
        if isinstance(raw, bool):
            raise ConfigError(key, f"expected a number, got {raw!r}")
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {raw!r}")
        if not math.isfinite(value):
            raise ConfigError(key, f"expected a finite number, got {raw!r}")
        return value

    def _requirement(self):
        if self.max_value is None:
            return f"must be {'≥' if self.min_inclusive else '>'} {self.min_value}"
        if self.min_value is None:
            return f"must be {'≤' if self.max_inclusive else '<'} {self.max_value}"
        return "must be in " + (
            ("[" if self.min_inclusive else "(") + f"{self.min_value}, " +
            f"{self.max_value}" + ("]" if self.max_inclusive else ")")
        )

    def adapt(self, key, raw):
        value = self._parse(key, raw)
        too_low = self.min_value is not None and (
            value < self.min_value or
            (not self.min_inclusive and value == self.min_value)
        )
        too_high = self.max_value is not None and (
            value > self.max_value or
            (not self.max_inclusive and value == self.max_value)
        )
        if too_low or too_high:
            raise ConfigError(key, f"{key} {self._requirement()}, got {value!r}")
        return value

    def render(self, value):
        return value

    def describe(self, value):
        if self.format is not None:
            return format(value, self.format) + self.suffix
        return repr(value) + self.suffix


class IntegerAdaptor(RangeAdaptor):

    def _parse(self, key, raw):
        if isinstance(raw, bool):
            raise ConfigError(key, f"expected an integer, got {raw!r}")
        if isinstance(raw, int):
            return raw
        if isinstance(raw, float) and raw.is_integer():
            return int(raw)
        if isinstance(raw, str):
            try:
                return int(raw.strip())
            except ValueError:
                pass
        raise ConfigError(key, f"expected an integer, got {raw!r}")


class ChoiceAdaptor:

    def __init__(self, choices):
        self.choices = tuple(choices)

    def adapt(self, key, raw):
        if raw not in self.choices:
            raise ConfigError(key, f"expected one of {self.choices}, got {raw!r}")
        return raw

    def render(self, value):
        return value


non_negative_real = RangeAdaptor(min_value=0.0)
positive_real = RangeAdaptor(min_value=0.0, min_inclusive=False)
# epsilon = exp(-2 eta^2) is in (0, 1]; epsilon == 1 is the symbolic tight-trap limit
trap_tightness = RangeAdaptor(min_value=0.0, max_value=1.0, min_inclusive=False, format=".4f")
positive_integer = IntegerAdaptor(min_value=1)
motional_dim = IntegerAdaptor(min_value=2)
backend_choice = ChoiceAdaptor(("fock", "grid"))


if __name__ == "__main__":

    print("Running minimal tests")

    assert positive_integer.adapt("n_atoms", "8") == 8
    assert trap_tightness.adapt("epsilon", 1) == 1.0
    for bad_key, bad_adaptor, bad_value in (
        ("n_atoms", positive_integer, 0),
        ("epsilon", trap_tightness, 0.0),
        ("recoil_ratio", non_negative_real, -0.01),
        ("n_atoms", positive_integer, 2.5),
    ):
        try:
            bad_adaptor.adapt(bad_key, bad_value)
            assert False, f"Expected ConfigError for {bad_key}={bad_value}"
        except ConfigError as e:
            assert e.key == bad_key, f"Expected key {bad_key} got {e.key}"

    print("Minimal tests passed")
