"""Receiver DSP: channel extraction, backpropagation or equalization,
symbol-rate sampling, and back-rotation of ring symbols."""

from dataclasses import dataclass

import numpy as np

from .field import OpticalField
from .params import FiberParams, PropagationPlan
from .ssfm import NumericalBlowupError, _linear_factor


@dataclass(frozen=True)
class RxConfig:
    """Receiver settings for one compensation run."""

    compensation: str = "BP"  # "BP" or "EQ"
    bp_step_size: float = 1000.0
    coi_index: int = 0
    symmetric: bool = False

    def __post_init__(self):
        if self.compensation not in ("BP", "EQ"):
            raise ValueError("compensation must be 'BP' or 'EQ'")
        if self.compensation == "BP" and self.bp_step_size <= 0:
            raise ValueError("bp_step_size must be > 0")


def _signed_bins(ns: int) -> np.ndarray:
    idx = np.arange(ns)
    return np.where(idx < ns // 2, idx, idx - ns)


def extract_channel(
    field: OpticalField, coi_index: int, symbol_period: float
) -> OpticalField:
    """Brick-wall select the 1/T_s band of channel coi_index, shifted to 0."""
    ns = len(field)
    os_factor = int(round(field.sample_rate * symbol_period))
    k_bins = ns // os_factor
    center = coi_index * k_bins
    if abs(center) + k_bins // 2 > ns // 2:
        raise ValueError(f"channel {coi_index} lies outside the grid bandwidth")
    spec = np.fft.fft(field.samples)
    signed = _signed_bins(ns)
    rel = signed - center
    mask = (rel >= -(k_bins // 2)) & (rel < k_bins // 2)
    spec = np.where(mask, spec, 0.0)
    spec = np.roll(spec, -center)
    return OpticalField(
        samples=np.fft.ifft(spec),
        sample_rate=field.sample_rate,
        center_freq_offset=coi_index / symbol_period,
    )


def linear_equalize(field: OpticalField, beta2: float, length: float) -> OpticalField:
    """Invert accumulated dispersion in one spectral multiplication."""
    factor = _linear_factor(len(field), field.sample_rate, beta2, 0.0, -length)
    return field.with_samples(np.fft.ifft(np.fft.fft(field.samples) * factor))


def backpropagate(
    field: OpticalField,
    params: FiberParams,
    length: float,
    step: float,
    symmetric: bool = False,
) -> OpticalField:
    """Run the split-step method with negated steps, operators reversed.

    Each forward segment applied Kerr-then-dispersion, so its inverse is
    the -h dispersion step followed by the -h Kerr step; segments are
    undone newest-first so a matched-step noiseless round trip is exact.
    """
    if not np.all(np.isfinite(field.samples)):
        raise NumericalBlowupError("input field contains non-finite samples")
    if length == 0:
        return field.copy()
    plan = PropagationPlan(total_length=length, step_size=step)
    a = field.samples.copy()
    n = len(field)
    fs = field.sample_rate
    gamma = params.gamma
    lin_cache = {}

    def lin(h):
        fac = lin_cache.get(h)
        if fac is None:
            fac = _linear_factor(n, fs, params.beta2, 0.0, h)
            lin_cache[h] = fac
        return fac

    for h in reversed(plan.steps()):
        if symmetric:
            a = np.fft.ifft(np.fft.fft(a) * lin(-h / 2.0))
            a *= np.exp(-1j * gamma * np.abs(a) ** 2 * h)
            a = np.fft.ifft(np.fft.fft(a) * lin(-h / 2.0))
        else:
            a = np.fft.ifft(np.fft.fft(a) * lin(-h))
            a *= np.exp(-1j * gamma * np.abs(a) ** 2 * h)
    if not np.all(np.isfinite(a)):
        raise NumericalBlowupError("backpropagation produced non-finite samples")
    return field.with_samples(a)


def sample_symbols(
    field: OpticalField, symbol_period: float, guard: int = 0
) -> np.ndarray:
    """Matched-filter (brick-wall over the baseband channel) and sample at
    t = k T_s, scaled by sqrt(T_s); `guard` slots are dropped at each edge."""
    ns = len(field)
    m = field.sample_rate * symbol_period
    m_int = int(round(m))
    if abs(m - m_int) > 1e-9:
        raise ValueError("oversampling factor must be an integer")
    filtered = extract_channel(field, 0, symbol_period)
    sym = filtered.samples[::m_int] * np.sqrt(symbol_period)
    k = ns // m_int
    if guard < 0 or 2 * guard >= k:
        raise ValueError("guard leaves no symbols")
    return sym[guard: k - guard]


def back_rotate(
    symbols: np.ndarray, tx_symbols: np.ndarray, xpm_phase: float
) -> np.ndarray:
    """Remove the transmitted phase and the constant XPM rotation."""
    symbols = np.asarray(symbols)
    tx_symbols = np.asarray(tx_symbols)
    if symbols.shape != tx_symbols.shape:
        raise ValueError("received/transmitted symbol counts differ")
    return symbols * np.exp(-1j * (xpm_phase + np.angle(tx_symbols)))


def estimate_xpm_phase(symbols: np.ndarray, tx_symbols: np.ndarray) -> float:
    """Data-aided constant-phase estimate over the whole frame."""
    symbols = np.asarray(symbols)
    tx_symbols = np.asarray(tx_symbols)
    if symbols.shape != tx_symbols.shape:
        raise ValueError("received/transmitted symbol counts differ")
    return float(np.angle(np.sum(symbols * np.conj(tx_symbols))))


def evm_db(rx: np.ndarray, tx: np.ndarray) -> float:
    """Error-vector magnitude: residual error power over signal power, dB."""
    rx = np.asarray(rx)
    tx = np.asarray(tx)
    err = np.sum(np.abs(rx - tx) ** 2)
    sig = np.sum(np.abs(tx) ** 2)
    return float(10.0 * np.log10(err / sig))
