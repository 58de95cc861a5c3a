"""
Run settings: built-in defaults, key=value config files and command-line
overrides, merged with the precedence defaults < config file < flags.
"""

import os

from exprays.common import ExpRaysException


class ConfigError(ExpRaysException):
    pass


DEFAULTS = {
    # ray evaluation
    "H": 50.0,
    "max_depth": 4096,
    "boundary_eps": 1e-12,
    "max_spatial_step": 0.1,
    # Newton / continuation
    "residual_tol": 1e-12,
    "max_iters": 50,
    "min_derivative": 1e-8,
    "max_kappa_step": 0.1,
    "min_dt": 1e-9,
    "dt0": 1.0,
    "max_halvings": 40,
    # variation numbers
    "t_cap": 40.0,
    "rel_tol": 1e-6,
    "samples_per_unit": 64,
    # rendering
    "width_px": 400,
    "height_px": 400,
    "max_iter": 256,
    "escape_re": 50.0,
    "center": complex(-1.0, 0.0),
    "width": 8.0,
    # verify suite
    "seed": 12345,
    "n_random": 200,
}


def parse_complex(text):
    """ "re,im" or a single real number """
    parts = [x.strip() for x in str(text).replace("−", "-").split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ValueError(f"'{text}' is not a complex number of the form re,im")


def coerce(key, value):
    """ Convert value to the type of DEFAULTS[key] """
    if key not in DEFAULTS:
        raise ConfigError(f"unknown setting '{key}'")
    default = DEFAULTS[key]
    if isinstance(value, type(default)) and not isinstance(value, bool):
        return value
    try:
        if isinstance(default, complex):
            return parse_complex(value)
        if isinstance(default, int):
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value {value!r} for setting '{key}'")


def load_config(path):
    """ Read a config file: one key=value per line, '#' starts a comment """
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    settings = {}
    with open(path) as fid:
        for lineno, line in enumerate(fid, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if sep != "=":
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key = key.strip()
            settings[key] = coerce(key, value.strip())
    return settings


def merge_settings(config=None, overrides=None):
    """ Merged settings dict.

        Parameters:
        - config: None, a config filename, or a dict of settings
        - overrides: dict of settings taking precedence (None values are skipped)
    """
    settings = dict(DEFAULTS)
    if config is not None:
        if type(config) == str:
            config = load_config(config)
        for key, value in config.items():
            settings[key] = coerce(key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = coerce(key, value)
    return settings
