"""Flat ``key = value`` experiment configs with typed values.

Values are Python literals (``1e-3``, ``[256, 512]``, ``'z'``, ``True``);
anything that does not parse as a literal is kept as a bare string, and
``true``/``false`` are accepted as booleans.
"""

from __future__ import annotations

import ast
import hashlib
import json
from pathlib import Path

from ..errors import ConfigError

# (default, kind) where kind is one of: int+, int0, float+, float0, float, bool, str, list+
SCHEMAS = {
    "nelson": {
        "seed": (20240601, "int0"),
        "hbar": (1.0, "float+"),
        "mass": (1.0, "float+"),
        "omega": (1.0, "float+"),
        "n_particles": (100_000, "int+"),
        "dt": (1e-3, "float+"),
        "t_final": (10.0, "float+"),
        "grid_half_width": (8.0, "float+"),
        "grid_points": (512, "int+"),
        "bandwidth": (0.05, "float+"),
        "l1_tol": (0.05, "float+"),
        "runtime_target_s": (60.0, "float+"),
        "free_sigma0": (1.0, "float+"),
        "free_width_factor": (3.0, "float+"),
        "free_grid_half_width": (40.0, "float+"),
        "free_grid_points": (1600, "int+"),
        "free_dt": (2e-3, "float+"),
        "free_samples": (8, "int+"),
        "oracle_variance_rtol": (0.005, "float+"),
        "ensemble_variance_rtol": (0.03, "float+"),
        "continuity_points": ([256, 512, 1024], "list+"),
        "continuity_t": (0.5, "float+"),
        "continuity_order_min": (1.8, "float+"),
        "roundtrip_states": (5, "int+"),
        "roundtrip_points": (1024, "int+"),
        "roundtrip_tol": (1e-6, "float+"),
        "collapse_threshold": (1e-3, "float+"),
    },
    "telegraph": {
        "seed": (20240602, "int0"),
        "n_walkers": (100_000, "int+"),
        "rate": (1.0, "float+"),
        "speed": (1.0, "float+"),
        "t_final": (1.0, "float+"),
        "grid_half_width": (1.5, "float+"),
        "grid_points": (3000, "int+"),
        "coarsen": (125, "int+"),
        "l1_tol": (0.02, "float+"),
        "relax_points": (64, "int+"),
        "relax_tol": (1e-8, "float+"),
        "poisson_sigmas": (3.0, "float+"),
    },
    "checkerboard": {
        "mass": (1.0, "float0"),
        "c": (1.0, "float+"),
        "hbar": (1.0, "float+"),
        "t_final": (1.0, "float+"),
        "length": (32.0, "float+"),
        "n_sites0": (256, "int+"),
        "n_rungs": (4, "int+"),
        "width": (1.0, "float+"),
        "k0": (1.0, "float"),
        "order_first": (1.0, "float+"),
        "order_exact": (2.0, "float+"),
        "order_tol": (0.2, "float+"),
        "massless_tol": (1e-10, "float+"),
        "path_steps_max": (12, "int+"),
        "path_sites": (32, "int+"),
        "path_rate": ("1/3", "str"),
        "path_complex_tol": (1e-12, "float+"),
        "dispersion_points": (256, "int+"),
        "dispersion_dt": (0.01, "float+"),
        "dispersion_tol": (1e-9, "float+"),
        "norm_steps": (10_000, "int+"),
        "norm_tol": (1e-10, "float+"),
    },
    "rs-photon": {
        "c": (1.0, "float+"),
        "hbar": (1.0, "float+"),
        "direction": ("z", "str"),
        "length": (32.0, "float+"),
        "grid_points": (256, "int+"),
        "width": (1.0, "float+"),
        "k0": (1.0, "float"),
        "t_final": (1.0, "float+"),
        "m0": (0.1, "float+"),
        "ladder_size": (4, "int+"),
        "ratio_target": (2.0, "float+"),
        "ratio_tol": (0.3, "float+"),
        "bound_margin": (0.05, "float0"),
        "matrix_tol": (1e-12, "float+"),
    },
    "rs-field": {
        "seed": (20240605, "int0"),
        "ranks": ([2, 3, 4], "list+"),
        "algebra_tol": (1e-12, "float+"),
        "scaling_rank": (2, "int+"),
        "couplings": ([1e-1, 1e-2, 1e-3, 1e-4], "list+"),
        "slope_target": (2.0, "float+"),
        "slope_tol": (0.1, "float+"),
        "exact_tol": (1e-12, "float+"),
        "wave_points": (128, "int+"),
        "wave_steps": (100, "int+"),
        "wave_dt": (0.01, "float+"),
        "norm_tol": (1e-10, "float+"),
    },
    "network": {
        "seed": (20240606, "int0"),
        "lam": (1.0, "float+"),
        "t_final": (1.0, "float+"),
        "dt": (1e-3, "float+"),
        "n_edges": (16, "int+"),
        "closed_form_tol": (1e-8, "float+"),
        "conservation_tol": (1e-10, "float+"),
        "rate_rtol": (0.01, "float+"),
        "record_every": (50, "int+"),
        "chain_length": (16.0, "float+"),
        "chain_edges0": (128, "int+"),
        "chain_rungs": (4, "int+"),
        "chain_substeps": (2, "int+"),
        "chain_order_min": (0.8, "float+"),
        "witness_delta": ("1/3", "str"),
    },
    "foam": {
        "seed": (20240607, "int0"),
        "n_foams": (20, "int+"),
        "max_faces": (8, "int+"),
        "max_vertices": (6, "int+"),
        "max_degree": (3, "int+"),
        "denominator": (7, "int+"),
        "foam_file": ("", "str"),
    },
}

SUBCOMMANDS = tuple(SCHEMAS)


def parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out, problems = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems[f"{source}:{lineno}"] = f"expected 'key = value', got {raw.strip()!r}"
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(value)
    if problems:
        raise ConfigError(problems)
    return out


def parse_overrides(pairs) -> dict:
    out, problems = {}, {}
    for item in pairs or ():
        if "=" not in item:
            problems[item] = "--set expects key=value"
            continue
        key, value = item.split("=", 1)
        out[key.strip()] = parse_value(value)
    if problems:
        raise ConfigError(problems)
    return out


def _check(kind: str, value):
    """Return an error message or None."""
    is_num = isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind in ("int+", "int0"):
        if not isinstance(value, int) or isinstance(value, bool):
            return f"expected an integer, got {value!r}"
        if kind == "int+" and value <= 0:
            return f"must be > 0, got {value}"
        if value < 0:
            return f"must be >= 0, got {value}"
    elif kind in ("float+", "float0", "float"):
        if not is_num:
            return f"expected a number, got {value!r}"
        if value != value or value in (float("inf"), float("-inf")):
            return "must be finite"
        if kind == "float+" and value <= 0:
            return f"must be > 0, got {value}"
        if kind == "float0" and value < 0:
            return f"must be >= 0, got {value}"
    elif kind == "bool":
        if not isinstance(value, bool):
            return f"expected true/false, got {value!r}"
    elif kind == "str":
        if not isinstance(value, (str, int, float)) or isinstance(value, bool):
            return f"expected a string, got {value!r}"
    elif kind == "list+":
        if not isinstance(value, (list, tuple)) or not value:
            return f"expected a non-empty list, got {value!r}"
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                return f"list entries must be positive numbers, got {v!r}"
    return None


def load_config(subcommand: str, path=None, overrides=None) -> dict:
    """Defaults, then the file, then ``--set`` overrides; validated together.

    Raises :class:`ConfigError` listing every offending key.
    """
    if subcommand not in SCHEMAS:
        raise ConfigError({"subcommand": f"unknown subcommand {subcommand!r}"})
    schema = SCHEMAS[subcommand]
    cfg = {k: v for k, (v, _) in schema.items()}
    given = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError({"config": f"config file {str(p)!r} not found"})
        given.update(parse_config_text(p.read_text(), p.name))
    given.update(overrides or {})
    problems = {}
    for key, value in given.items():
        if key not in schema:
            problems[key] = "unknown key"
            continue
        kind = schema[key][1]
        if kind == "str" and not isinstance(value, str):
            value = str(value)
        if kind.startswith("float") and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        msg = _check(kind, value)
        if msg:
            problems[key] = msg
        else:
            cfg[key] = list(value) if kind == "list+" else value
    if problems:
        raise ConfigError(problems)
    return cfg


def config_hash(subcommand: str, cfg: dict) -> str:
    text = json.dumps({"subcommand": subcommand, "config": cfg}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def dump_config(cfg: dict) -> str:
    return "".join(f"{k} = {cfg[k]!r}\n" for k in sorted(cfg))
