"""Experiment configuration: defaults, flat ``key = value`` files, CLI overrides."""

from __future__ import annotations

import argparse
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

EXPERIMENTS = ("mutual-info", "qfi-analytic", "qfi-device", "bloch-traj", "calibrate",
               "steady-state")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "qfi-analytic"
    phi_list: tuple[float, ...] | None = None
    grid: int = 50
    dphi: float = 1e-4
    g: float = 0.1
    tau: float = 0.12
    zeta: float | None = None
    rate: float | None = None
    t1_us: float = 150.0
    t2_us: float = 100.0
    t_exposure_ns: float = 480.0
    omega0_ghz: float = 4.5
    sigma_p_ns: float = 22.4
    alpha: float = math.pi / 2
    window_k: float = 4.0
    dt_ps: float | None = None
    collisions: int = 500_000
    conv_tol: float = 1e-8
    normalize_ancilla: bool = False
    sample_every: int | None = None
    workers: int = 1
    out: str | None = None
    svg: bool = False

    @property
    def resolved_zeta(self) -> float:
        if self.zeta is not None:
            return self.zeta
        rate = 1.0 if self.rate is None else self.rate
        return rate * self.tau * self.g

    def phases(self) -> list[float]:
        """Explicit phase list, or ``grid`` points on [0, 2 pi) with the endpoint dropped."""
        if self.phi_list:
            return sorted(self.phi_list)
        return [2 * math.pi * k / self.grid for k in range(self.grid)]

    def echo(self) -> dict[str, str]:
        """Every field as a config-file string, for metadata blocks."""
        return {f.name.replace("_", "-"): format_value(getattr(self, f.name))
                for f in fields(self) if f.name not in ("out", "svg")}


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_FLOAT = {"dphi", "g", "tau", "zeta", "rate", "t1_us", "t2_us", "t_exposure_ns", "omega0_ghz",
          "sigma_p_ns", "alpha", "window_k", "dt_ps", "conv_tol"}
_INT = {"grid", "collisions", "sample_every", "workers"}
_BOOL = {"normalize_ancilla", "svg"}


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


def _convert(key: str, raw: str):
    text = raw.strip()
    try:
        if key == "phi_list":
            if text.lower() in ("", "none"):
                return None
            return tuple(float(eval_phase(x)) for x in text.split(","))
        if text.lower() == "none" and key in ("zeta", "rate", "dt_ps", "sample_every", "out"):
            return None
        if key in _FLOAT:
            return float(text)
        if key in _INT:
            return int(text)
        if key in _BOOL:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigError(key.replace("_", "-"), f"cannot parse {raw!r}") from None
    return text


def eval_phase(text: str) -> float:
    """Parse a phase such as ``1.2``, ``pi/2`` or ``3*pi/4``."""
    expr = text.strip().lower().replace("π", "pi")
    allowed = set("0123456789.+-*/e() pi")
    if not expr or set(expr) - allowed:
        raise ValueError(text)
    try:
        return float(eval(expr, {"__builtins__": {}}, {"pi": math.pi}))  # noqa: S307
    except Exception:
        raise ValueError(text) from None


def read_config_file(path: str | Path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}", "expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        name = key.replace("-", "_")
        if name not in _TYPES:
            raise ConfigError(key, "unknown configuration key")
        values[name] = _convert(name, raw)
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qfic", argument_default=argparse.SUPPRESS,
        description="Quantum Fisher information of a noisy H-phi-H sequence: "
                    "collision-model and pulse-level routes.")
    p.add_argument("experiment", nargs="?", choices=EXPERIMENTS, default=None)
    p.add_argument("--config", help="flat 'key = value' file; CLI flags take precedence")
    p.add_argument("--phi-list", help="comma-separated phases, e.g. pi/4,pi/2,pi")
    p.add_argument("--grid", help="number of phase points on [0, 2pi)")
    p.add_argument("--dphi", help="finite-difference step (rad)")
    p.add_argument("--g", help="probe-ancilla coupling")
    p.add_argument("--tau", help="collision duration")
    zeta = p.add_mutually_exclusive_group()
    zeta.add_argument("--zeta", help="coarse-graining scale r*tau*g")
    zeta.add_argument("--rate", help="ancilla arrival rate r (zeta = r*tau*g)")
    p.add_argument("--t1-us", help="T1 in microseconds")
    p.add_argument("--t2-us", help="T2 in microseconds")
    p.add_argument("--t-exposure-ns", help="ancilla noise exposure time in ns")
    p.add_argument("--omega0-ghz", help="qubit frequency in GHz (omega0 = 2 pi f)")
    p.add_argument("--sigma-p-ns", help="Gaussian pulse width in ns")
    p.add_argument("--alpha", help="pulse area (rad)")
    p.add_argument("--window-k", help="pulse half-window in units of sigma_p")
    p.add_argument("--dt-ps", help="integrator step in ps (default: drive period / 64)")
    p.add_argument("--collisions", help="number of collisions (max for steady-state)")
    p.add_argument("--conv-tol", help="trace-distance convergence threshold")
    p.add_argument("--normalize-ancilla", action="store_const", const="true")
    p.add_argument("--sample-every", help="row thinning for series outputs")
    p.add_argument("--workers", help="parallel workers for phase sweeps")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--svg", action="store_const", const="true",
                   help="also write an SVG chart next to the CSV")
    return p


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    """Resolve defaults < config file < CLI flags and validate.

    Raises :class:`ConfigError` for bad values; argparse exits with status 2
    on unknown flags.
    """
    ns = vars(build_parser().parse_args(argv))
    values: dict = {}
    if ns.get("experiment") is None:
        ns.pop("experiment", None)
    config_path = ns.pop("config", None)
    if config_path is not None:
        try:
            values.update(read_config_file(config_path))
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    cli = {k: _convert(k, v) if isinstance(v, str) else v for k, v in ns.items()}
    if "zeta" in cli:
        values.pop("rate", None)
    if "rate" in cli:
        values.pop("zeta", None)
    values.update(cli)
    cfg = ExperimentConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    if cfg.grid < 3:
        raise ConfigError("grid", "need at least 3 phase points")
    if not 0 < cfg.dphi < 1e-2:
        raise ConfigError("dphi", "must lie in (0, 1e-2)")
    if cfg.zeta is not None and cfg.rate is not None:
        raise ConfigError("zeta", "give either --zeta or --rate, not both")
    if cfg.g < 0:
        raise ConfigError("g", "must be non-negative")
    for name in ("tau", "t1_us", "t2_us", "omega0_ghz", "sigma_p_ns", "conv_tol"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(name.replace("_", "-"), "must be positive")
    if cfg.rate is not None and cfg.rate <= 0:
        raise ConfigError("rate", "must be positive")
    if cfg.zeta is not None and cfg.zeta < 0:
        raise ConfigError("zeta", "must be non-negative")
    if cfg.t_exposure_ns < 0:
        raise ConfigError("t-exposure-ns", "must be non-negative")
    if 1.0 / cfg.t2_us - 0.5 / cfg.t1_us < 0:
        raise ConfigError("t2-us", "T2 > 2*T1 gives a negative pure-dephasing rate")
    if cfg.window_k < 3:
        raise ConfigError("window-k", "must be >= 3")
    if cfg.dt_ps is not None:
        period_ps = 1e3 / cfg.omega0_ghz
        if not 0 < cfg.dt_ps <= period_ps / 40:
            raise ConfigError("dt-ps", f"must lie in (0, {period_ps / 40:.4g}] ps")
    if cfg.collisions < 1:
        raise ConfigError("collisions", "must be >= 1")
    if cfg.sample_every is not None and cfg.sample_every < 1:
        raise ConfigError("sample-every", "must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")


def config_from_echo(echo: dict[str, str]) -> ExperimentConfig:
    """Rebuild a config from a metadata echo (see :meth:`ExperimentConfig.echo`)."""
    values = {k.replace("-", "_"): _convert(k.replace("-", "_"), v) for k, v in echo.items()}
    return ExperimentConfig(**values)


def as_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
