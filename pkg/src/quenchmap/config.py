"""Scenario description and the flat ``key = value`` config format.

Example::

    hbar = 1
    mass = 1
    post_trap.k = 5
    grid.xmin = -20
    grid.xmax = 20
    grid.n = 2048
    times = 0, 0.1, 0.2
    packet.1.sigma0 = 1.5
    packet.1.p0 = 4
    packet.2.sigma0 = 1.5
    packet.2.p0 = -4

Blank lines and ``#`` comments are ignored.  Unknown or repeated keys are errors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .core import Grid, PhysicalParams, QuenchMapError, TrapSpec, make_grid
from .states import GaussianSpec, SuperpositionSpec


class ConfigError(QuenchMapError, ValueError):
    """Parse or validation failure; carries the offending line and/or field."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


SCALAR_KEYS = {"hbar", "mass", "pre_trap.k", "post_trap.k", "quench_time",
               "grid.xmin", "grid.xmax", "grid.n", "times"}
PACKET_FIELDS = {"sigma0", "x0", "p0", "weight_re", "weight_im"}
_PACKET_KEY = re.compile(r"^packet\.(\d+)\.([a-z_0-9]+)$")


@dataclass(frozen=True)
class Scenario:
    params: PhysicalParams
    initial: SuperpositionSpec
    grid: Grid
    sample_times: tuple[float, ...]
    pre_trap: Optional[TrapSpec] = None
    post_trap: Optional[TrapSpec] = None
    quench_time: float = 0.0
    name: str = field(default="scenario", compare=False)

    def __post_init__(self):
        times = tuple(float(t) for t in self.sample_times)
        if not times:
            raise ConfigError("at least one sample time is required", field="times")
        if any(not math.isfinite(t) for t in times):
            raise ConfigError("sample times must be finite", field="times")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("sample times must be strictly increasing", field="times")
        if min(times) < 0:
            raise ConfigError("sample times must be >= 0", field="times")
        if not (math.isfinite(self.quench_time) and self.quench_time >= 0):
            raise ConfigError("quench_time must be finite and >= 0", field="quench_time")
        object.__setattr__(self, "sample_times", times)

    @property
    def kind(self) -> str:
        if self.pre_trap is None and self.post_trap is None:
            return "free"
        if self.pre_trap is None:
            return "trap"
        if self.post_trap is None:
            return "release"
        return "retrap"

    def with_times(self, times) -> "Scenario":
        return replace(self, sample_times=tuple(times))

    def with_grid(self, grid: Grid) -> "Scenario":
        return replace(self, grid=grid)


def _number(text: str, key: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", line, key) from None
    if not math.isfinite(value):
        raise ConfigError(f"value must be finite, got {text!r}", line, key)
    return value


def parse_text(text: str, name: str = "scenario") -> Scenario:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if key in entries:
            first = entries[key][1]
            raise ConfigError(f"duplicate key (first defined on line {first})", lineno, key)
        match = _PACKET_KEY.match(key)
        if key not in SCALAR_KEYS and not (match and match.group(2) in PACKET_FIELDS):
            raise ConfigError("unknown key", lineno, key)
        entries[key] = (value, lineno)
    return _build(entries, name)


def _build(entries: dict[str, tuple[str, int]], name: str) -> Scenario:
    def num(key, default=None):
        if key not in entries:
            if default is None:
                raise ConfigError("required key missing", field=key)
            return default
        value, line = entries[key]
        return _number(value, key, line)

    def line_of(key):
        return entries[key][1] if key in entries else None

    hbar, mass = num("hbar", 1.0), num("mass", 1.0)
    for key, value in (("hbar", hbar), ("mass", mass)):
        if value <= 0:
            raise ConfigError(f"must be positive, got {value:g}", line_of(key), key)
    params = PhysicalParams(mass=mass, hbar=hbar)

    traps = {}
    for key in ("pre_trap.k", "post_trap.k"):
        if key in entries:
            k = num(key)
            if k <= 0:
                raise ConfigError(f"spring constant must be positive, got {k:g}", line_of(key), key)
            traps[key] = TrapSpec.for_params(k, params)

    n_value = num("grid.n")
    if n_value != int(n_value) or n_value < 8 or int(n_value) & (int(n_value) - 1):
        raise ConfigError("grid.n must be a power of two >= 8", line_of("grid.n"), "grid.n")
    xmin, xmax = num("grid.xmin"), num("grid.xmax")
    if not xmax > xmin:
        raise ConfigError("grid.xmax must exceed grid.xmin", line_of("grid.xmax"), "grid.xmax")
    grid = make_grid(xmin, xmax, int(n_value))

    if "times" not in entries:
        raise ConfigError("required key missing", field="times")
    times_text, times_line = entries["times"]
    pieces = [p.strip() for p in times_text.split(",") if p.strip()]
    if not pieces:
        raise ConfigError("at least one sample time is required", times_line, "times")
    times = tuple(_number(p, "times", times_line) for p in pieces)

    packets: dict[int, dict[str, float]] = {}
    for key, (value, line) in entries.items():
        match = _PACKET_KEY.match(key)
        if match:
            packets.setdefault(int(match.group(1)), {})[match.group(2)] = _number(value, key, line)
    if not packets:
        raise ConfigError("at least one packet.N.sigma0 entry is required", field="packet")
    components = []
    for index in sorted(packets):
        fields = packets[index]
        prefix = f"packet.{index}"
        if "sigma0" not in fields:
            raise ConfigError("required key missing", field=f"{prefix}.sigma0")
        if fields["sigma0"] <= 0:
            raise ConfigError("must be positive", line_of(f"{prefix}.sigma0"), f"{prefix}.sigma0")
        spec = GaussianSpec(fields["sigma0"], fields.get("x0", 0.0), fields.get("p0", 0.0))
        weight = complex(fields.get("weight_re", 1.0), fields.get("weight_im", 0.0))
        components.append((spec, weight))
    if all(w == 0 for _, w in components):
        raise ConfigError("all packet weights are zero", field="packet")

    try:
        return Scenario(params=params, initial=SuperpositionSpec(tuple(components)), grid=grid,
                        sample_times=times, pre_trap=traps.get("pre_trap.k"),
                        post_trap=traps.get("post_trap.k"),
                        quench_time=num("quench_time", 0.0), name=name)
    except ConfigError as exc:
        if exc.line is None and exc.field in entries:
            raise ConfigError(str(exc).split(": ", 1)[-1], line_of(exc.field), exc.field) from None
        raise


def parse_config(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_text(text, name=path.stem)


def fixture_path(name: str) -> Path:
    """Path of a shipped example config (``fig1``, ``fig2``, ``release``, ``quench_k_to_K``)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    return Path(__file__).parent / "configs" / f"{stem}.cfg"


def load_fixture(name: str) -> Scenario:
    return parse_config(fixture_path(name))
