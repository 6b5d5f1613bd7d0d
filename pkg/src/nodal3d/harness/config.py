"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` are comments; inline ``#`` also starts a comment.
Unknown keys are errors. See the README for the schema.
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ParameterOutOfRange
from ..spectrum import AnisotropicSpectrum, make_model

EXPERIMENTS = ("expectation", "variance_scan", "clt_check", "chaos_coeffs", "mono_decay",
               "powerlaw_scaling", "anisotropic_expectation", "validate_all")


def _floats(text):
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


@dataclass
class ExperimentConfig:
    experiment: str = "expectation"
    model: str = "bargmann_fock"
    kappa: float = None
    p: int = None
    beta: float = None
    transform: tuple = None
    M: int = 1024
    n: tuple = (3.0,)
    h: float = 0.1
    realizations: int = 200
    master_seed: int = 20240101
    threads: int = None
    samples: int = 1_000_000
    out_dir: str = None
    csv: bool = True
    keep_lengths: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        if isinstance(self.n, (int, float)):
            self.n = (float(self.n),)
        self.n = tuple(float(v) for v in self.n)
        if not self.n and self.experiment != "validate_all":
            raise ConfigError("n must list at least one halfwidth")
        if self.experiment == "variance_scan" and len(self.n) < 2:
            raise ConfigError("variance_scan needs at least two values of n")
        if int(self.realizations) < 1:
            raise ConfigError("realizations must be >= 1")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if any(self.h > v for v in self.n):
            raise ConfigError("h must not exceed n")
        if int(self.M) < 1:
            raise ConfigError("M must be >= 1")
        if self.threads is not None and int(self.threads) < 1:
            raise ConfigError("threads must be >= 1")
        try:
            self.spectrum()
        except ParameterOutOfRange as exc:
            raise ConfigError(str(exc)) from exc

    def model_params(self):
        out = {}
        for k in ("kappa", "p", "beta"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out

    def spectrum(self):
        base = make_model(self.model, **self.model_params())
        if self.transform is None:
            return base
        t = np.asarray(self.transform, dtype=float)
        if t.size == 3:
            t = np.diag(t)
        return AnisotropicSpectrum(base, t.reshape(3, 3))

    def echo(self):
        """Every parameter, verbatim, for the report audit trail."""
        out = asdict(self)
        out["n"] = list(self.n)
        if self.transform is not None:
            out["transform"] = list(self.transform)
        return out

    def replace(self, **kw):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return ExperimentConfig(**d)


_CASTS = {
    "experiment": str, "model": str, "kappa": float, "p": int, "beta": float,
    "transform": lambda v: tuple(_floats(v)), "M": int, "n": lambda v: tuple(_floats(v)),
    "h": float, "realizations": int, "master_seed": int, "threads": int, "samples": int,
    "out_dir": str, "csv": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on"),
    "keep_lengths": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on"),
}


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(str(text).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CASTS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return ExperimentConfig(**values)


def load_config(path):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
