"""Flat ``key = value`` run configuration.

Lines are ``key = value``; ``#`` starts a comment.  Units are fixed per key
(GHz for molecule energies, ns/us lifetimes as named).  A user file is
layered over the packaged default, which holds the full feasibility
operating point.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError

CONFIG_ENV = "MICROKERR_CONFIG"


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _nonzero(v):
    return v != 0


def _unit(v):
    return 0.0 <= v <= 1.0


# key -> (type, check, description of check)
SCHEMA = {
    "E_c": (float, _positive, "> 0"),
    "E_J": (float, _positive, "> 0"),
    "E_m": (float, _nonneg, ">= 0"),
    "E_Jm": (float, _nonneg, ">= 0"),
    "g1": (float, _nonneg, ">= 0"),
    "g2": (float, _nonneg, ">= 0"),
    "Omega_c": (float, _positive, "> 0"),
    "delta2": (float, _nonzero, "!= 0"),
    "kappa2_inv_ns": (float, _positive, "> 0"),
    "kappa1_inv_us": (float, _positive, "> 0"),
    "probe_alpha": (float, _positive, "> 0"),
    "homodyne_mode": (str, lambda v: v in ("ideal", "gaussian"), "one of ideal, gaussian"),
    "x_sq": (float, _unit, "in [0, 1]"),
    "n_parties": (int, lambda v: 2 <= v <= 8, "in 2..8"),
    "trials": (int, lambda v: v >= 1, ">= 1"),
    "seed": (int, lambda v: 0 <= v < 2**64, "in [0, 2^64)"),
    "workers": (int, lambda v: v >= 1, ">= 1"),
    "csv": (str, lambda v: True, ""),
    "precision": (int, lambda v: 1 <= v <= 17, "in 1..17"),
    "verbosity": (int, _nonneg, ">= 0"),
}


@dataclass(frozen=True)
class RunConfig:
    E_c: float
    E_J: float
    E_m: float
    E_Jm: float
    g1: float
    g2: float
    Omega_c: float
    delta2: float
    kappa2_inv_ns: float
    kappa1_inv_us: float
    probe_alpha: float
    homodyne_mode: str
    x_sq: float
    n_parties: int
    trials: int
    seed: int
    workers: int
    csv: str
    precision: int
    verbosity: int

    def device(self):
        from .molecule import DeviceParams

        return DeviceParams(
            E_c=self.E_c, E_J=self.E_J, E_m=self.E_m, E_Jm=self.E_Jm,
            g1=self.g1, g2=self.g2, Omega_c=self.Omega_c, delta2=self.delta2,
        )

    def override(self, **changes) -> "RunConfig":
        """Apply command-line overrides, validating each value."""
        checked = {}
        for key, value in changes.items():
            if value is None:
                continue
            typ, check, desc = SCHEMA[key]
            if not check(value):
                raise ConfigError(f"{key} = {value!r} must be {desc}")
            checked[key] = typ(value)
        return replace(self, **checked)


def _convert(key: str, raw: str, where: str):
    typ, check, desc = SCHEMA[key]
    try:
        if typ is int:
            value = int(raw, 0)
        elif typ is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"{where}: {key} = {raw!r} is not a valid {typ.__name__}") from None
    if not check(value):
        raise ConfigError(f"{where}: {key} = {raw!r} must be {desc}")
    return value


def parse_lines(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{source} line {lineno}"
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        values[key] = _convert(key, raw, where)
    return values


def default_text() -> str:
    return resources.files("microkerr").joinpath("data/default.conf").read_text("utf-8")


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load ``path`` (or ``$MICROKERR_CONFIG``) layered over the packaged default."""
    values = parse_lines(default_text(), "default.conf")
    path = path or os.environ.get(CONFIG_ENV) or None
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
        values.update(parse_lines(text, str(p)))
    missing = [f.name for f in fields(RunConfig) if f.name not in values]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    return RunConfig(**values)
