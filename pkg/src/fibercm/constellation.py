"""Ring constellations and WDM symbol frames."""

import csv
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class RingConstellation:
    """Discrete-amplitude constellation: N equiprobable rings at radii
    m * ring_spacing, with a uniform grid of phase_levels phases per ring."""

    num_rings: int
    ring_spacing: float
    phase_levels: int = 256

    def __post_init__(self):
        if self.num_rings < 1:
            raise ValueError("num_rings must be >= 1")
        if self.ring_spacing <= 0:
            raise ValueError("ring_spacing must be > 0")
        if self.phase_levels < 4:
            raise ValueError("phase_levels must be >= 4")

    @property
    def radii(self) -> np.ndarray:
        return self.ring_spacing * np.arange(1, self.num_rings + 1)

    def mean_square(self) -> float:
        """E|x|^2 under equiprobable rings."""
        n = self.num_rings
        return self.ring_spacing**2 * (n + 1) * (2 * n + 1) / 6.0

    def scaled_to_mean_square(self, target: float) -> "RingConstellation":
        scale = np.sqrt(target / self.mean_square())
        return replace(self, ring_spacing=self.ring_spacing * scale)


@dataclass
class SymbolFrame:
    """Symbols indexed (time slot, channel); channels span -B..B in order.

    ring_indices holds the 1-based ring of each symbol when the frame was
    drawn from a RingConstellation (used to group receiver statistics).
    """

    symbols: np.ndarray
    symbol_period: float
    ring_indices: np.ndarray = None

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.complex128)
        if self.symbols.ndim != 2:
            raise ValueError("symbols must be (num_slots, num_channels)")
        if self.symbols.shape[1] % 2 == 0:
            raise ValueError("channel count must be odd (channels -B..B)")
        if self.symbol_period <= 0:
            raise ValueError("symbol_period must be > 0")

    @property
    def num_slots(self) -> int:
        return self.symbols.shape[0]

    @property
    def num_channels(self) -> int:
        return self.symbols.shape[1]

    @property
    def coi_column(self) -> int:
        return self.num_channels // 2

    def mean_symbol_power(self) -> float:
        return float(np.mean(np.abs(self.symbols) ** 2))

    def launch_power(self) -> float:
        """Per-channel time-average power implied by the frame, W."""
        return self.mean_symbol_power() / self.symbol_period


def draw_symbols(
    constellation: RingConstellation,
    num_slots: int,
    num_channels: int,
    rng: np.random.Generator,
    symbol_period: float,
) -> SymbolFrame:
    """I.i.d. symbols: ring uniform on 1..N, phase uniform on the grid."""
    if num_slots < 1 or num_channels < 1:
        raise ValueError("num_slots and num_channels must be >= 1")
    rings = rng.integers(1, constellation.num_rings + 1, (num_slots, num_channels))
    ph = rng.integers(0, constellation.phase_levels, (num_slots, num_channels))
    theta = 2.0 * np.pi * ph / constellation.phase_levels
    sym = rings * constellation.ring_spacing * np.exp(1j * theta)
    return SymbolFrame(
        symbols=sym, symbol_period=symbol_period, ring_indices=rings.astype(np.int64)
    )


def set_average_power(frame: SymbolFrame, target_power: float) -> SymbolFrame:
    """Uniformly rescale symbols so launch power equals target_power, W."""
    if target_power <= 0:
        raise ValueError("target_power must be > 0")
    current = frame.mean_symbol_power()
    if current == 0:
        raise ValueError("cannot scale a zero-power frame")
    scale = np.sqrt(target_power * frame.symbol_period / current)
    return replace(frame, symbols=frame.symbols * scale)


def save_frame_csv(path, frame: SymbolFrame):
    """Rows (k, l, re, im); l runs -B..B."""
    b = frame.num_channels // 2
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["k", "l", "re", "im"])
        for k in range(frame.num_slots):
            for c in range(frame.num_channels):
                s = frame.symbols[k, c]
                w.writerow([k, c - b, repr(float(s.real)), repr(float(s.imag))])


def load_frame_csv(path, symbol_period: float) -> SymbolFrame:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    ks = np.array([int(r["k"]) for r in rows])
    ls = np.array([int(r["l"]) for r in rows])
    vals = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    num_slots = ks.max() + 1
    b = ls.max()
    sym = np.zeros((num_slots, 2 * b + 1), dtype=np.complex128)
    sym[ks, ls + b] = vals
    return SymbolFrame(symbols=sym, symbol_period=symbol_period)
