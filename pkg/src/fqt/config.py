"""Run configuration: TOML files, shipped presets and command-line overrides.

Precedence, highest first: command-line flags, config file keys,
the FQT_THREADS environment variable (thread count only), built-in defaults.
"""
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DomainError
from .model import SystemParams
from .modulation import (
    CrabWaveform,
    weights_from_waveform,
    weights_pi_flip,
    weights_sinusoidal,
    weights_unmodulated,
)
from .optimizer import CrabConfig

MODES = ("sweep-tb", "sweep-nu", "optimize-beta", "optimize-fano", "validate")
PRESETS = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7", "fig8")
PROTOCOL_KINDS = ("unmodulated", "sinusoidal", "pi-flip", "crab")


@dataclass(frozen=True)
class Protocol:
    kind: str = "unmodulated"
    lam: float = 0.8
    nu: float = 0.0
    file: str = None
    q_max: int = 3
    label: str = None

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise DomainError(f"unknown protocol {self.kind!r}; expected one of {PROTOCOL_KINDS}")
        if self.kind == "crab" and not self.file:
            raise DomainError("crab protocol needs a coefficient file")
        if self.nu < 0:
            raise DomainError("nu must be non-negative")

    @property
    def name(self):
        return self.label or self.kind

    def _crab(self, nu):
        data = json.loads(Path(self.file).read_text())
        return CrabWaveform.from_nu(data.get("omega0", 0.0), data["mu"], data["a"], data["b"],
                                    nu, data.get("envelope_fraction", 0.05))

    def spectrum(self, nu=None):
        """Harmonic spectrum at modulation frequency ``nu`` (defaults to the protocol's)."""
        nu = self.nu if nu is None else nu
        if self.kind == "unmodulated":
            return weights_unmodulated()
        if self.kind == "sinusoidal":
            return weights_sinusoidal(self.lam, nu)
        if self.kind == "pi-flip":
            return weights_pi_flip(nu)
        if not nu > 0:
            raise DomainError("crab protocol needs a positive nu")
        return weights_from_waveform(self._crab(nu), q_max=self.q_max)


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError("grid needs at least 2 steps")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.stop <= self.start:
            raise DomainError("grid stop must exceed start")

    def values(self):
        # evaluated point by point so the grid does not depend on numpy rounding
        n = self.steps - 1
        return [self.start + (self.stop - self.start) * i / n for i in range(self.steps)]


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams = field(default_factory=SystemParams)
    protocols: tuple = (Protocol(),)
    grid: Grid = None
    out: str = "."
    name: str = "run"
    seed: int = 0
    threads: int = 1
    generator: str = "full"
    method: str = "taylor"
    entropy_convention: str = "direct"
    beta_probe: float = 1e-3
    svg: bool = True
    svg_columns: tuple = ("J_E", "J_B", "J_C")
    optimizer: CrabConfig = field(default_factory=CrabConfig)
    baseline_lam: float = 0.8
    nu: float = 0.001  # modulation frequency for optimization runs

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode in ("sweep-tb", "sweep-nu") and self.grid is None:
            raise DomainError(f"mode {self.mode} needs a [grid] section")
        if self.threads < 1:
            raise DomainError("threads must be at least 1")
        if self.generator not in ("full", "low_t"):
            raise DomainError("generator must be 'full' or 'low_t'")
        if self.method not in ("taylor", "fd"):
            raise DomainError("method must be 'taylor' or 'fd'")
        if self.entropy_convention not in ("direct", "conventional"):
            raise DomainError("entropy_convention must be 'direct' or 'conventional'")
        if self.seed < 0 or self.seed >= 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    def echo(self):
        """JSON-ready copy of the configuration."""
        d = asdict(self)
        d["protocols"] = [asdict(p) for p in self.protocols]
        d["svg_columns"] = list(self.svg_columns)
        return d


def preset_path(name):
    return resources.files("fqt").joinpath("presets", f"{name}.toml")


def read_toml(source):
    """Parse a config file path or the name of a shipped preset."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    elif source in PRESETS:
        text = preset_path(source).read_text()
    else:
        raise DomainError(f"config {source!r} is neither a file nor a preset ({', '.join(PRESETS)})")
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise DomainError(f"cannot parse {source}: {exc}") from exc


def _section(data, key, allowed):
    sec = data.get(key, {})
    if not isinstance(sec, dict):
        raise DomainError(f"[{key}] must be a table")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise DomainError(f"unknown keys in [{key}]: {sorted(unknown)}")
    return sec


_PARAM_KEYS = ("delta", "t_e", "t_b", "t_c", "kappa", "omega0", "tb_zero")
_RUN_KEYS = ("name", "out", "seed", "threads", "generator", "method", "entropy_convention",
             "beta_probe", "svg", "svg_columns", "baseline_lam")
_OPT_KEYS = ("n_modes", "restarts", "max_evals", "tol", "beta_probe", "q_max",
             "envelope_fraction", "penalty", "max_deficit", "nu")


def _env_threads():
    raw = os.environ.get("FQT_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise DomainError(f"FQT_THREADS must be an integer, got {raw!r}") from exc
    return n


def build_config(data, mode=None, out=None, seed=None, threads=None):
    """RunConfig from parsed TOML plus command-line overrides."""
    unknown = set(data) - {"mode", "params", "protocol", "grid", "run", "optimizer"}
    if unknown:
        raise DomainError(f"unknown config sections: {sorted(unknown)}")
    mode = mode or data.get("mode")
    if mode is None:
        raise DomainError("no mode given")
    if data.get("mode") and mode != data["mode"]:
        raise DomainError(f"mode {mode} does not match the config's mode {data['mode']}")

    params = SystemParams(**_section(data, "params", _PARAM_KEYS))
    protos = data.get("protocol", [{}])
    if isinstance(protos, dict):
        protos = [protos]
    allowed = set(Protocol.__dataclass_fields__)
    for p in protos:
        unknown = set(p) - allowed
        if unknown:
            raise DomainError(f"unknown keys in [[protocol]]: {sorted(unknown)}")
    protocols = tuple(Protocol(**p) for p in protos)
    grid = Grid(**_section(data, "grid", ("start", "stop", "steps"))) if "grid" in data else None

    run = dict(_section(data, "run", _RUN_KEYS))
    if "svg_columns" in run:
        run["svg_columns"] = tuple(run["svg_columns"])
    opt = dict(_section(data, "optimizer", _OPT_KEYS))
    if "nu" in opt:
        run["nu"] = opt.pop("nu")

    if threads is None:
        threads = run.pop("threads", None)
        if threads is None:
            threads = _env_threads() or 1
    else:
        run.pop("threads", None)
    seed = seed if seed is not None else run.pop("seed", 0)
    run.pop("seed", None)
    out = out if out is not None else run.pop("out", ".")
    run.pop("out", None)

    objective = "minimize-fano-E" if mode == "optimize-fano" else "maximize-beta-plus"
    optimizer = CrabConfig(objective=objective, master_seed=seed, **opt)
    return RunConfig(mode=mode, params=params, protocols=protocols, grid=grid, out=out,
                     seed=seed, threads=threads, optimizer=optimizer, **run)
