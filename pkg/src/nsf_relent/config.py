"""Flat key=value scenario configuration.

Format: UTF-8 text, one `section.key=value` per line, `#` starts a comment,
blank lines ignored.  No nesting, no quoting; values are parsed by the typed
getters below so error messages always carry the key path.  Reference field
modes use the compact syntax `amp:k:phase:omega`, comma-separated.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .reference import FieldProfile, ReferenceSolution, WaveMode
from .solver1d import Grid1D
from .structural import make_family
from .thermo import GasModel

__all__ = ["ScenarioConfig", "parse_config_text", "load_config", "canonical_text"]

KINDS = ("audit", "twin", "sweep", "perturb")

DEFAULTS = {
    "scenario.kind": "twin",
    "scenario.seed": "0",
    "scenario.out": "out",
    "model.a": "1.0",
    "model.mu0": "0.01",
    "model.mu1": "0.01",
    "model.kappa0": "0.01",
    "model.kappa2": "0.01",
    "model.kappa3": "0.01",
    "model.family": "default",
    "model.family_params": "",
    "grid.n": "128",
    "grid.L": "1.0",
    "grid.bc": "periodic",
    "time.t_end": "0.5",
    "time.cfl": "0.4",
    "time.output_every": "0.01",
    "ref.L": "1.0",
    "ref.rho.offset": "1.0",
    "ref.rho.modes": "0.15:1:0.0:1.0",
    "ref.theta.offset": "1.0",
    "ref.theta.modes": "0.1:1:0.7:1.3",
    "ref.u.offset": "0.2",
    "ref.u.modes": "0.1:1:2.1:0.9",
    "perturb.epsilon": "0.004",
    "perturb.wavenumber": "2",
    "sweep.ns": "64,128,256,512",
    "plot.csv": "",
    "plot.columns": "",
    "plot.out": "",
    "plot.logy": "false",
    "audit.rho_lo": "0.1",
    "audit.rho_hi": "10.0",
    "audit.theta_lo": "0.1",
    "audit.theta_hi": "10.0",
    "audit.samples": "10000",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse the flat format into a key -> raw string mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def canonical_text(values: dict[str, str]) -> str:
    """Deterministic dump used for hashing and manifests: sorted keys."""
    return "\n".join(f"{k}={values[k]}" for k in sorted(values)) + "\n"


def _parse_modes(raw: str, key: str) -> tuple[WaveMode, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    modes = []
    for part in raw.split(","):
        fields = part.strip().split(":")
        if len(fields) != 4:
            raise ConfigError(
                f"{key}: mode {part.strip()!r} must be amp:k:phase:omega"
            )
        try:
            amp, k, phase, omega = (float(f) for f in fields)
        except ValueError as exc:
            raise ConfigError(f"{key}: non-numeric mode field in {part.strip()!r}") from exc
        if k != int(k):
            raise ConfigError(f"{key}: wavenumber must be an integer, got {k}")
        modes.append(WaveMode(amplitude=amp, wavenumber=int(k), phase=phase, omega=omega))
    return tuple(modes)


@dataclass
class ScenarioConfig:
    """Typed view over the merged (defaults + file + overrides) key set."""

    values: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(DEFAULTS)
        unknown = [k for k in self.values if k not in DEFAULTS]
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        merged.update(self.values)
        self.values = merged
        if self.kind not in KINDS:
            raise ConfigError(
                f"scenario.kind: must be one of {', '.join(KINDS)}, got {self.kind!r}"
            )
        if self.get_float("perturb.epsilon") < 0.0:
            raise ConfigError("perturb.epsilon: must be >= 0")

    # -- typed getters ------------------------------------------------------
    def get_str(self, key: str) -> str:
        try:
            return self.values[key]
        except KeyError as exc:
            raise ConfigError(f"{key}: missing") from exc

    def get_float(self, key: str) -> float:
        raw = self.get_str(key)
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc

    def get_int(self, key: str) -> int:
        raw = self.get_str(key)
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc

    def get_bool(self, key: str) -> bool:
        raw = self.get_str(key).lower()
        if raw in ("true", "1", "yes", "on"):
            return True
        if raw in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")

    def get_int_list(self, key: str) -> list[int]:
        raw = self.get_str(key)
        try:
            return [int(p) for p in raw.split(",") if p.strip()]
        except ValueError as exc:
            raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from exc

    # -- constructed objects ------------------------------------------------
    @property
    def kind(self) -> str:
        return self.get_str("scenario.kind")

    @property
    def seed(self) -> int:
        return self.get_int("scenario.seed")

    @property
    def out_dir(self) -> Path:
        return Path(self.get_str("scenario.out"))

    def model(self) -> GasModel:
        raw_params = self.get_str("model.family_params")
        params = tuple(float(p) for p in raw_params.split(",") if p.strip())
        try:
            family = make_family(self.get_str("model.family"), params)
            return GasModel(
                a=self.get_float("model.a"),
                mu0=self.get_float("model.mu0"),
                mu1=self.get_float("model.mu1"),
                kappa0=self.get_float("model.kappa0"),
                kappa2=self.get_float("model.kappa2"),
                kappa3=self.get_float("model.kappa3"),
                family=family,
            )
        except ValueError as exc:
            raise ConfigError(f"model.*: {exc}") from exc

    def grid(self, n: int | None = None) -> Grid1D:
        try:
            return Grid1D(
                n=n if n is not None else self.get_int("grid.n"),
                L=self.get_float("grid.L"),
                bc=self.get_str("grid.bc"),
            )
        except ValueError as exc:
            raise ConfigError(f"grid.*: {exc}") from exc

    def reference(self) -> ReferenceSolution:
        try:
            return ReferenceSolution(
                L=self.get_float("ref.L"),
                rho=FieldProfile(
                    offset=self.get_float("ref.rho.offset"),
                    modes=_parse_modes(self.get_str("ref.rho.modes"), "ref.rho.modes"),
                ),
                theta=FieldProfile(
                    offset=self.get_float("ref.theta.offset"),
                    modes=_parse_modes(self.get_str("ref.theta.modes"), "ref.theta.modes"),
                ),
                u=FieldProfile(
                    offset=self.get_float("ref.u.offset"),
                    modes=_parse_modes(self.get_str("ref.u.modes"), "ref.u.modes"),
                ),
            )
        except ValueError as exc:
            raise ConfigError(f"ref.*: {exc}") from exc

    def n_outputs(self) -> int:
        t_end = self.get_float("time.t_end")
        every = self.get_float("time.output_every")
        if not (t_end > 0.0 and every > 0.0):
            raise ConfigError("time.t_end and time.output_every must be > 0")
        return max(2, round(t_end / every))

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_text(self.values).encode()).hexdigest()


def load_config(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    """Read a config file and apply `key=value` override strings on top."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = parse_config_text(text)
    for ov in overrides or []:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} must be key=value")
        key, value = ov.split("=", 1)
        values[key.strip()] = value.strip()
    return ScenarioConfig(values)
