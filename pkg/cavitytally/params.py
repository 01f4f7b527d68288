# python3
# params.py
# Validated physical and numerical configuration shared by all other modules.

# The physics is fully described by four dimensionless numbers:
# + n_atoms      N
# + eta          Lamb-Dicke parameter, sqrt(2)*eta = k*sigma
# + recoil_ratio r = (hbar k^2 / 2m) / (hbar g)
# + kappa_ext    extrinsic half-linewidth kappa'/g
# epsilon = exp(-k^2 sigma^2) = exp(-2 eta^2) is carried alongside eta
# because it is the natural variable of the closed-form series.
# The remaining fields only control the numerical backends.

from collections import namedtuple
import json
import logging
import math
import tomllib

from . import config_adaptors as CA
from .core import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_N_MAX_FOCK = 40
DEFAULT_GRID_POINTS = 256
DEFAULT_GRID_HALFWIDTH = 8.0
DEFAULT_KAPPA_EXT = 0.0

ConfigKeyConverter = namedtuple("ConfigKeyConverter", "key adaptor default")

# Keys which must be present (recoil_ratio and exactly one of eta/epsilon
# are checked separately in from_config)
_REQUIRED = object()

_CONFIG_KEY_CONVERTERS = (
    ConfigKeyConverter("n_atoms", CA.positive_integer, _REQUIRED),
    ConfigKeyConverter("eta", CA.non_negative_real, None),
    ConfigKeyConverter("epsilon", CA.trap_tightness, None),
    ConfigKeyConverter("recoil_ratio", CA.non_negative_real, _REQUIRED),
    ConfigKeyConverter("kappa_ext", CA.non_negative_real, DEFAULT_KAPPA_EXT),
    ConfigKeyConverter("n_max_fock", CA.motional_dim, DEFAULT_N_MAX_FOCK),
    ConfigKeyConverter("grid_points", CA.motional_dim, DEFAULT_GRID_POINTS),
    ConfigKeyConverter("grid_halfwidth", CA.positive_real, DEFAULT_GRID_HALFWIDTH),
)

_KNOWN_KEYS = frozenset(c.key for c in _CONFIG_KEY_CONVERTERS)

_SystemParamsBase = namedtuple(
    "SystemParams",
    "n_atoms eta epsilon recoil_ratio kappa_ext n_max_fock grid_points grid_halfwidth"
)


class SystemParams(_SystemParamsBase):
    __slots__ = ()

    @property
    def is_tight_limit(self):
        """eta == 0: atoms pinned at the antinode, closed-form paths only."""
        return self.eta == 0.0

    @property
    def trap_frequency(self):
        # omega_0 / g = r / eta^2, the single source of truth for the trap
        if self.is_tight_limit:
            return math.inf
        return self.recoil_ratio / self.eta ** 2

    @property
    def zero_point_energy(self):
        """E0 / hbar g = N r / (2 eta^2)."""
        return 0.5 * self.n_atoms * self.trap_frequency

    @property
    def k_sigma_squared(self):
        return 2.0 * self.eta ** 2

    def describe(self):
        return ", ".join(
            f"{c.key}={c.adaptor.describe(getattr(self, c.key))}"
            for c in _CONFIG_KEY_CONVERTERS
        )


def eta_from_epsilon(epsilon):
    if epsilon == 1.0:
        return 0.0
    return math.sqrt(-0.5 * math.log(epsilon))


def epsilon_from_eta(eta):
    return math.exp(-2.0 * eta ** 2)


def from_config(raw):
    """Build validated SystemParams from a flat key-value map."""
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], f"unknown configuration key (known keys: {', '.join(sorted(_KNOWN_KEYS))})")
    values = {}
    for c in _CONFIG_KEY_CONVERTERS:
        if c.key in raw and raw[c.key] is not None:
            values[c.key] = c.adaptor.adapt(c.key, raw[c.key])
        elif c.default is _REQUIRED:
            raise ConfigError(c.key, "required key is missing")
        else:
            values[c.key] = c.default

    if values["eta"] is None and values["epsilon"] is None:
        raise ConfigError("eta", "exactly one of eta or epsilon must be given, found neither")
    if values["eta"] is not None and values["epsilon"] is not None:
        raise ConfigError("epsilon", "exactly one of eta or epsilon must be given, found both")
    if values["eta"] is None:
        values["eta"] = eta_from_epsilon(values["epsilon"])
    # epsilon is always re-derived from eta so that the two agree to machine
    # precision and to_config()/from_config() round-trips exactly
    values["epsilon"] = epsilon_from_eta(values["eta"])

    params = SystemParams(**values)
    if params.is_tight_limit:
        logger.info("eta == 0: tight-trap limit, numeric backends are unavailable")
    return params


def to_config(params):
    """Inverse of from_config: eta is written, epsilon is implied."""
    raw = {}
    for c in _CONFIG_KEY_CONVERTERS:
        if c.key == "epsilon":
            continue
        raw[c.key] = c.adaptor.render(getattr(params, c.key))
    return raw


def replace(params, **overrides):
    """Copy of params with some keys changed, re-validated.

    Passing epsilon replaces eta and vice versa.
    """
    raw = to_config(params)
    if "epsilon" in overrides and overrides["epsilon"] is not None:
        raw.pop("eta")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return from_config(raw)


def read_config_file(path):
    """Read the flat key-value map for one run from a TOML file.

    Keys may sit at top level or inside a [params] table.  A JSON run
    manifest written by the command line tool is accepted too, which is
    how runs are replayed.
    """
    path = str(path)
    try:
        if path.endswith(".json"):
            with open(path, "rt", encoding="utf-8") as f:
                document = json.load(f)
        else:
            with open(path, "rb") as f:
                document = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError("config", f"cannot parse {path}: {e}")
    if isinstance(document.get("params"), dict):
        document = document["params"]
    return document


def load(path, **overrides):
    raw = read_config_file(path)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if overrides.get("epsilon") is not None and overrides.get("eta") is None:
        raw.pop("eta", None)
    if overrides.get("eta") is not None and overrides.get("epsilon") is None:
        raw.pop("epsilon", None)
    return from_config(raw)
