"""YAML run configuration with strict key checking.

Every error names the offending field as ``group.key`` so a bad config can be
fixed without reading the code.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from .checkerboard import LARGE_GAP_PLACEMENTS
from .spectral_map import DosSpec
from .spin_model import SpinSystemConfig
from .traversal import DIRECTIONS, WINDOW_RULES, SweepSpec

FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSettings:
    spec: SweepSpec
    eta: Optional[float] = None
    large_gap: str = "conjugate"


@dataclass(frozen=True)
class ScanSettings:
    center_min: float = -30.0
    center_max: float = 30.0
    n_centers: int = 241
    bandwidths: tuple = ()
    eta: float = 0.5


@dataclass(frozen=True)
class RatchetSettings:
    eta_small: float = 0.5
    eta_large: float = 0.0
    p_down: float = 0.5


@dataclass(frozen=True)
class OutputSettings:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    system: Optional[SpinSystemConfig] = None
    sweep: SweepSettings = field(default_factory=lambda: SweepSettings(SweepSpec()))
    dos: DosSpec = field(default_factory=DosSpec)
    scan: ScanSettings = field(default_factory=ScanSettings)
    ratchet: RatchetSettings = field(default_factory=RatchetSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    seed: int = 0


_SYSTEM_KEYS = {f.name for f in fields(SpinSystemConfig)}
_SWEEP_KEYS = {f.name for f in fields(SweepSpec)} | {"eta", "large_gap"}
_DOS_KEYS = {f.name for f in fields(DosSpec)}
_SCAN_KEYS = {f.name for f in fields(ScanSettings)}
_RATCHET_KEYS = {f.name for f in fields(RatchetSettings)}
_OUTPUT_KEYS = {f.name for f in fields(OutputSettings)}
_TOP_KEYS = {"system", "sweep", "dos", "scan", "ratchet", "output", "seed"}


def _check_keys(group: str, data: Any, allowed: set) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{group}: expected a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{group}.{unknown[0]}: unknown key (allowed: {', '.join(sorted(allowed))})")
    return dict(data)


def _build(group: str, factory, data: dict):
    """Call ``factory(**data)``; re-raise its "field: message" errors with the group prefix."""
    try:
        return factory(**data)
    except (TypeError, ValueError) as exc:
        message = str(exc)
        head, sep, rest = message.partition(": ")
        if sep and head.isidentifier():
            raise ConfigError(f"{group}.{head}: {rest}") from None
        raise ConfigError(f"{group}: {message}") from None


def parse_config(raw: Any) -> RunConfig:
    top = _check_keys("config", raw, _TOP_KEYS)
    system = None
    if "system" in top:
        data = _check_keys("system", top["system"], _SYSTEM_KEYS)
        n = data.get("n_nuclei")
        if isinstance(n, int) and not isinstance(n, bool) and n >= 1:
            # couplings may be omitted for boards that only need the level count
            data.setdefault("a_par", [0.0] * n)
            data.setdefault("a_perp", [0.0] * n)
        if isinstance(data.get("model"), dict):
            data["model"] = dict(_check_keys("system.model", data["model"], {"alpha", "p_exp"}))
        system = _build("system", SpinSystemConfig, data)

    sweep_data = _check_keys("sweep", top.get("sweep"), _SWEEP_KEYS)
    eta = sweep_data.pop("eta", None)
    large_gap = sweep_data.pop("large_gap", "conjugate")
    if eta is not None and not 0.0 <= float(eta) <= 1.0:
        raise ConfigError(f"sweep.eta: must lie in [0, 1], got {eta}")
    if large_gap not in LARGE_GAP_PLACEMENTS:
        raise ConfigError(f"sweep.large_gap: expected one of {LARGE_GAP_PLACEMENTS}, got {large_gap!r}")
    if sweep_data.get("direction", DIRECTIONS[0]) not in DIRECTIONS:
        raise ConfigError(f"sweep.direction: expected one of {DIRECTIONS}, got {sweep_data['direction']!r}")
    if sweep_data.get("window_rule", WINDOW_RULES[0]) not in WINDOW_RULES:
        raise ConfigError(f"sweep.window_rule: expected one of {WINDOW_RULES}, got {sweep_data['window_rule']!r}")
    spec = _build("sweep", SweepSpec, sweep_data)
    sweep = SweepSettings(spec, None if eta is None else float(eta), large_gap)

    dos = _build("dos", DosSpec, _check_keys("dos", top.get("dos"), _DOS_KEYS))

    scan_data = _check_keys("scan", top.get("scan"), _SCAN_KEYS)
    if "bandwidths" in scan_data:
        scan_data["bandwidths"] = tuple(float(b) for b in scan_data["bandwidths"])
    scan = _build("scan", ScanSettings, scan_data)
    if scan.n_centers < 2:
        raise ConfigError(f"scan.n_centers: need at least 2, got {scan.n_centers}")
    if not scan.center_max > scan.center_min:
        raise ConfigError("scan.center_max: must exceed scan.center_min")
    if any(b <= 0 for b in scan.bandwidths):
        raise ConfigError("scan.bandwidths: every bandwidth must be positive")

    ratchet = _build("ratchet", RatchetSettings, _check_keys("ratchet", top.get("ratchet"), _RATCHET_KEYS))
    for name in ("eta_small", "eta_large", "p_down"):
        value = getattr(ratchet, name)
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"ratchet.{name}: must lie in [0, 1], got {value}")

    output = _build("output", OutputSettings, _check_keys("output", top.get("output"), _OUTPUT_KEYS))
    if output.format not in FORMATS:
        raise ConfigError(f"output.format: expected one of {FORMATS}, got {output.format!r}")

    seed = top.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    return RunConfig(system, sweep, dos, scan, ratchet, output, seed)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML: {exc}") from None
    return parse_config(raw if raw is not None else {})
