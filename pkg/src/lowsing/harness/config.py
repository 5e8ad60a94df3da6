"""Flat ``key = value`` experiment configuration with command-line overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..orlicz import NFunction
from ..symbols import SubordinatorSpec

OUT_ENV = "LOWSING_OUT"


class ConfigError(ValueError):
    """Invalid or unknown configuration entry."""


# key -> (parser, default)
_KEYS = {
    "command": (str, None),
    "suite": (str, "all"),
    "full": (lambda s: s.lower() in ("1", "true", "yes"), False),
    "subordinator": (str, "gamma"),
    "alpha": (float, 1.0),
    "dimension": (int, 1),
    "grid_n": (int, 1024),
    "grid_L": (float, 16.0),
    "nfunction": (str, "exp_power"),
    "p": (float, 2.0),
    "beta": (float, 2.0),
    "order": (float, 0.0),
    "lambda": (float, 8.0),
    "eps": (float, 1e-3),
    "tol": (float, 1e-10),
    "max_iter": (int, 200),
    "coeff": (str, "1+0.1*sin(2*pi*x/L)"),
    "c0": (float, 0.9),
    "rhs": (str, "exp(-x*x/2)"),
    "n_paths": (int, 10_000),
    "horizon": (float, 3.0),
    "seed": (int, 0),
    "x0": (str, "0"),
    "radii": (str, "0.2,0.1,0.05,0.025"),
    "delta": (float, 0.1),
    "j_trunc": (int, 19),
    "events_csv": (str, ""),
    "out": (str, ""),
}


def parse_file(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)   # key -> "default" | "file" | "cli"

    @classmethod
    def build(cls, file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> "ExperimentConfig":
        vals, prov = {}, {}
        for k, (_, default) in _KEYS.items():
            vals[k] = default
            prov[k] = "default"
        for source, entries in (("file", file_values or {}), ("cli", overrides or {})):
            for k, v in entries.items():
                if v is None:
                    continue
                if k not in _KEYS:
                    raise ConfigError(f"unknown configuration key {k!r}")
                parser = _KEYS[k][0]
                try:
                    vals[k] = parser(v) if isinstance(v, str) else v
                except ValueError as exc:
                    raise ConfigError(f"bad value for {k}: {v!r}") from exc
                prov[k] = source
        cfg = cls(vals, prov)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        v = self.values
        if v["dimension"] not in (1, 2):
            raise ConfigError("dimension must be 1 or 2")
        n = v["grid_n"]
        if n < 8 or n & (n - 1):
            raise ConfigError("grid_n must be a power of two >= 8")
        for k in ("grid_L", "lambda", "eps", "c0", "horizon", "delta"):
            if not v[k] > 0:
                raise ConfigError(f"{k} must be positive")
        if v["c0"] > 1:
            raise ConfigError("c0 must lie in (0, 1]")
        if v["n_paths"] < 2:
            raise ConfigError("n_paths must be at least 2")
        self.spec()
        self.nfunction()

    def spec(self) -> SubordinatorSpec:
        fam = self.values["subordinator"]
        if fam == "gamma":
            return SubordinatorSpec.gamma(self.values["dimension"])
        if fam == "stable":
            return SubordinatorSpec.stable(self.values["alpha"], self.values["dimension"])
        raise ConfigError(f"unknown subordinator {fam!r}")

    def nfunction(self) -> NFunction:
        fam = self.values["nfunction"]
        if fam == "power":
            return NFunction.power(self.values["p"])
        if fam == "exp_power":
            return NFunction.exp_power(self.values["beta"])
        raise ConfigError(f"unknown N-function family {fam!r}")

    def x0(self) -> tuple:
        return tuple(float(s) for s in self.values["x0"].split(","))

    def radii(self) -> list:
        return [float(s) for s in self.values["radii"].split(",")]

    def out_dir(self) -> Path:
        out = self.values["out"] or os.environ.get(OUT_ENV) or "lowsing-out"
        return Path(out)

    def echo(self) -> dict:
        """Configuration with provenance; the output path is left out so reports are location-free."""
        return {k: {"value": v, "source": self.provenance[k]}
                for k, v in sorted(self.values.items()) if k != "out"}
