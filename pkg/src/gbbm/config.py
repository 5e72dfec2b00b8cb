"""Run configuration: ``key = value`` lines grouped in ``[section]`` blocks.

Every key has a type, a range and (unless required) a default. Unknown keys,
out-of-range values and missing required keys raise :class:`ConfigError`
naming the key and, where it exists, the line.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields
from importlib import resources

from .evolve import PicardSettings
from .grid import GridSpec
from .problem import Problem, make_flux, make_initial, make_signal

MODES = ("rk4", "picard", "both")
FLUXES = ("zero", "linear", "quadratic", "bbm", "oblique", "saturating")
SIGNALS = ("zero", "pulse")
INITIALS = ("zero", "gaussian", "mode")
SEAM_TOL = 1e-10


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key is not None:
            where = f"[{key}] "
        if line is not None:
            where += f"(line {line}) "
        super().__init__(where + message)
        self.key, self.line = key, line


def _float(s):
    return float(s)


def _int(s):
    x = float(s)
    if x != int(x):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(x)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _floats(s):
    s = s.strip()
    return tuple(float(x) for x in s.split(",")) if s else ()


def _groups(s):
    s = s.strip()
    return tuple(_floats(g) for g in s.split(";") if g.strip()) if s else ()


def _choice(options):
    def parse(s):
        s = s.strip()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    return parse


REQUIRED = object()

# section -> key -> (attribute, parser, default, range check or None)
SCHEMA = {
    "grid": {
        "L1": ("L1", _float, REQUIRED, lambda x: x > 0),
        "L2": ("L2", _float, REQUIRED, lambda x: x > 0),
        "N1": ("N1", _int, REQUIRED, lambda x: x >= 8 and x % 2 == 0),
        "N2": ("N2", _int, REQUIRED, lambda x: x >= 8),
    },
    "flux": {
        "name": ("flux_name", _choice(FLUXES), "bbm", None),
        "params": ("flux_params", _floats, (), None),
    },
    "signal": {
        "name": ("signal_name", _choice(SIGNALS), "zero", None),
        "params": ("signal_params", _groups, (), None),
    },
    "initial": {
        "name": ("initial_name", _choice(INITIALS), "zero", None),
        "params": ("initial_params", _floats, (), None),
    },
    "run": {
        "T": ("T", _float, REQUIRED, lambda x: x >= 0),
        "dt": ("dt", _float, REQUIRED, lambda x: x > 0),
        "nu1": ("nu1", _float, 0.0, lambda x: x >= 0),
        "mode": ("mode", _choice(MODES), "rk4", None),
        "snapshot_every": ("snapshot_every", _int, 1, lambda x: x >= 1),
        "dealias": ("dealias", _bool, False, None),
        "seed": ("seed", _int, 0, lambda x: x >= 0),
        "blowup_factor": ("blowup_factor", _float, 1e6, lambda x: x > 1),
        "far_wall_tol": ("far_wall_tol", _float, 1e-8, lambda x: 0 < x <= 1),
    },
    "picard": {
        "tol": ("picard_tol", _float, 1e-10, lambda x: x > 0),
        "max_iter": ("picard_max_iter", _int, 60, lambda x: x >= 1),
        "s_max": ("s_max", _float, 1.0, lambda x: x > 0),
        "max_halvings": ("max_halvings", _int, 3, lambda x: x >= 0),
        "n_probes": ("n_probes", _int, 16, lambda x: x >= 1),
    },
}


@dataclass(frozen=True)
class RunConfig:
    L1: float
    L2: float
    N1: int
    N2: int
    T: float
    dt: float
    flux_name: str = "bbm"
    flux_params: tuple = ()
    signal_name: str = "zero"
    signal_params: tuple = ()
    initial_name: str = "zero"
    initial_params: tuple = ()
    nu1: float = 0.0
    mode: str = "rk4"
    snapshot_every: int = 1
    dealias: bool = False
    seed: int = 0
    blowup_factor: float = 1e6
    far_wall_tol: float = 1e-8
    picard_tol: float = 1e-10
    picard_max_iter: int = 60
    s_max: float = 1.0
    max_halvings: int = 3
    n_probes: int = 16

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def grid(self) -> GridSpec:
        return GridSpec(self.L1, self.L2, self.N1, self.N2)

    def picard_settings(self) -> PicardSettings:
        return PicardSettings(self.picard_tol, self.picard_max_iter, self.s_max,
                              self.max_halvings, self.n_probes, self.seed)

    def replace(self, **changes) -> "RunConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        cfg = RunConfig(**values)
        validate(cfg)
        return cfg

    def describe(self) -> list[str]:
        """``section.key = value`` lines for every setting, defaults included."""
        out = []
        for section, keys in SCHEMA.items():
            for key, (attr, _, default, _) in keys.items():
                value = getattr(self, attr)
                tag = "  (default)" if default is not REQUIRED and value == default else ""
                out.append(f"{section}.{key} = {_format(value)}{tag}")
        return out


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(_format(g) for g in value)
        return ", ".join(repr(float(x)) for x in value)
    return str(value)


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines.setdefault(("", section), no)
            continue
        if line and not line.startswith("#") and "=" in line:
            lines.setdefault((section, line.split("=", 1)[0].strip()), no)
    return lines


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#",),
        inline_comment_prefixes=("#",), strict=True, empty_lines_in_values=False,
        default_section="__defaults__",
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as err:
        raise ConfigError("key outside any [section]", line=err.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as err:
        raise ConfigError(str(err).split(":", 1)[-1].strip(), line=err.lineno) from None
    except configparser.Error as err:
        raise ConfigError(str(err)) from None
    lines = _key_lines(text)

    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", line=lines.get(("", section)))
        for key, raw in parser.items(section):
            where = f"{section}.{key}"
            line = lines.get((section, key))
            if key not in SCHEMA[section]:
                raise ConfigError("unknown key", key=where, line=line)
            attr, conv, default, check = SCHEMA[section][key]
            if raw.strip() == "":
                if default is REQUIRED:
                    raise ConfigError("required key is empty", key=where, line=line)
                continue
            try:
                value = conv(raw)
            except ValueError as err:
                raise ConfigError(f"bad value {raw.strip()!r}: {err}", key=where, line=line) from None
            if check is not None and not check(value):
                raise ConfigError(f"value {raw.strip()!r} out of range", key=where, line=line)
            values[attr] = value

    for section, keys in SCHEMA.items():
        for key, (attr, _, default, _) in keys.items():
            if default is REQUIRED and attr not in values:
                raise ConfigError("missing required key", key=f"{section}.{key}")
    cfg = RunConfig(**values)
    validate(cfg, lines)
    return cfg


def validate(cfg: RunConfig, lines: dict | None = None) -> None:
    """Cross-field checks that need more than one key."""
    lines = lines or {}
    steps = cfg.T / cfg.dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ConfigError(f"T = {cfg.T} is not a whole number of steps dt = {cfg.dt}",
                          key="run.T", line=lines.get(("run", "T")))
    try:
        grid = cfg.grid()
        make_flux(cfg.flux_name, cfg.flux_params)
    except ValueError as err:
        raise ConfigError(str(err), key="flux.params", line=lines.get(("flux", "params"))) from None
    try:
        signal = make_signal(cfg.signal_name, cfg.signal_params)
    except ValueError as err:
        raise ConfigError(str(err), key="signal.params", line=lines.get(("signal", "params"))) from None
    if signal.seam_ratio(grid) >= SEAM_TOL:
        raise ConfigError(
            f"boundary signal does not decay at the x1 seam (ratio {signal.seam_ratio(grid):.3g}, "
            f"limit {SEAM_TOL:g}); widen L1 or narrow the pulse",
            key="signal.params", line=lines.get(("signal", "params")))
    try:
        make_initial(cfg.initial_name, cfg.initial_params, grid)
    except ValueError as err:
        raise ConfigError(str(err), key="initial.params", line=lines.get(("initial", "params"))) from None
    if not all(math.isfinite(x) for x in (cfg.L1, cfg.L2, cfg.T, cfg.dt, cfg.nu1)):
        raise ConfigError("non-finite numeric value")


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for section, keys in SCHEMA.items():
        out.append(f"[{section}]")
        for key, (attr, _, _, _) in keys.items():
            out.append(f"{key} = {_format(getattr(cfg, attr))}")
        out.append("")
    return "\n".join(out)


def build(cfg: RunConfig):
    """Return ``(Problem, initial_data_callable)`` for a validated config."""
    grid = cfg.grid()
    problem = Problem(grid, make_flux(cfg.flux_name, cfg.flux_params),
                      make_signal(cfg.signal_name, cfg.signal_params), cfg.nu1, cfg.dealias)
    return problem, make_initial(cfg.initial_name, cfg.initial_params, grid)


def example_config_text() -> str:
    return resources.files("gbbm").joinpath("data/example.cfg").read_text(encoding="utf-8")
