"""Experiment configuration: flat sectioned key-value files with explicit
SI unit suffixes, plus the desk/paper scale presets."""

import configparser
import hashlib
import re
from dataclasses import dataclass, field, fields, replace

_UNIT_SCALE = {
    "THz": 1e12, "GHz": 1e9, "MHz": 1e6, "kHz": 1e3, "Hz": 1.0,
    "Mm": 1e6, "km": 1e3, "m": 1.0,
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12,
    "W": 1.0, "mW": 1e-3, "uW": 1e-6, "nW": 1e-9,
}

_QTY_RE = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z]*)\s*$")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def parse_quantity(text) -> float:
    """'100 GHz' -> 1e11; bare numbers pass through unchanged."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _QTY_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    value, unit = m.groups()
    if unit == "":
        return float(value)
    if unit not in _UNIT_SCALE:
        raise ConfigError(f"unknown unit {unit!r} in {text!r}")
    return float(value) * _UNIT_SCALE[unit]


def _parse_list(text):
    return [p.strip() for p in str(text).split(",") if p.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    # link
    length: float = 1000e3
    compensation: str = "BOTH"  # BP, EQ, or BOTH
    forward_step: float = 100.0
    bp_step: float = 1000.0
    # signal
    baud: float = 100e9
    snr_bandwidth: float = 101e9
    channels: int = 5
    rings: int = 16
    phase_levels: int = 64
    oversampling: int = 8
    slots: int = 4096
    guard_slots: int = 32
    # capacity sweep
    powers_dbm: tuple = (-10.0, -8.0, -6.0, -4.0, -2.0, 0.0)
    mc_samples: int = 20000
    # waterfall
    codes: tuple = ("g709",)
    p_values: tuple = (3.0e-3, 4.0e-3, 4.8e-3)
    target_bits: int = 10_000_000
    max_errors: int = 100
    # pragmatic end-to-end
    systems: tuple = ("L2000-EQ",)
    blocks: int = 8
    pragmatic_length: float = 100e3
    pragmatic_channels: int = 1
    pragmatic_power_dbm: float = -4.0
    noiseless: bool = False

    def __post_init__(self):
        if self.compensation not in ("BP", "EQ", "BOTH"):
            raise ConfigError("compensation must be BP, EQ, or BOTH")
        if self.channels % 2 == 0 or self.channels < 1:
            raise ConfigError("channels must be odd and >= 1")
        if self.pragmatic_channels % 2 == 0 or self.pragmatic_channels < 1:
            raise ConfigError("pragmatic_channels must be odd and >= 1")
        if not self.powers_dbm:
            raise ConfigError("power list must be non-empty")
        for knob in ("slots", "oversampling"):
            v = getattr(self, knob)
            if v < 2 or v & (v - 1):
                raise ConfigError(f"{knob} must be a power of two")
        if self.guard_slots < 0 or 2 * self.guard_slots >= self.slots:
            raise ConfigError("guard_slots leave no usable symbols")

    @property
    def symbol_period(self) -> float:
        return 1.0 / self.baud

    def content_hash(self) -> str:
        payload = ";".join(
            f"{f.name}={getattr(self, f.name)!r}" for f in fields(self)
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


_FIELD_PARSERS = {
    "length": parse_quantity,
    "forward_step": parse_quantity,
    "bp_step": parse_quantity,
    "baud": parse_quantity,
    "snr_bandwidth": parse_quantity,
    "pragmatic_length": parse_quantity,
    "pragmatic_power_dbm": float,
    "compensation": str,
    "channels": int,
    "rings": int,
    "phase_levels": int,
    "oversampling": int,
    "slots": int,
    "guard_slots": int,
    "powers_dbm": lambda v: tuple(float(x) for x in _parse_list(v)),
    "mc_samples": int,
    "codes": lambda v: tuple(_parse_list(v)),
    "p_values": lambda v: tuple(float(x) for x in _parse_list(v)),
    "target_bits": lambda v: int(float(v)),
    "max_errors": int,
    "systems": lambda v: tuple(_parse_list(v)),
    "blocks": int,
    "pragmatic_channels": int,
    "noiseless": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on"),
}

_SECTIONS = {
    "link": ("length", "compensation", "forward_step", "bp_step"),
    "signal": (
        "baud", "snr_bandwidth", "channels", "rings", "phase_levels",
        "oversampling", "slots", "guard_slots",
    ),
    "sweep": ("powers_dbm", "mc_samples"),
    "waterfall": ("codes", "p_values", "target_bits", "max_errors"),
    "pragmatic": (
        "systems", "blocks", "pragmatic_length", "pragmatic_channels",
        "pragmatic_power_dbm", "noiseless",
    ),
}


def load_config(path=None, scale: str = "desk") -> ExperimentConfig:
    """Read a config file (any subset of keys) and apply the scale preset."""
    overrides = {}
    if path is not None:
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise ConfigError(f"config file {path!r} not found")
        for section in cp.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]")
        for section, keys in _SECTIONS.items():
            if not cp.has_section(section):
                continue
            for key, raw in cp.items(section):
                if key not in keys:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                overrides[key] = _FIELD_PARSERS[key](raw)
    try:
        cfg = ExperimentConfig(**overrides)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    if scale == "paper":
        cfg = replace(
            cfg,
            rings=64,
            phase_levels=256,
            slots=16384,
            oversampling=16,
            channels=5,
            mc_samples=100_000,
        )
    elif scale != "desk":
        raise ConfigError(f"unknown scale {scale!r}")
    return cfg
