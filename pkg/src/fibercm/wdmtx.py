"""Multi-channel transmitter: orthonormal sinc pulses on the periodic grid.

Pulses are realized in the frequency domain: each channel's symbol spectrum
occupies exactly one 1/T_s-wide band, so on-grid orthonormality and channel
separation are exact (no time-domain sinc truncation error).
"""

import numpy as np

from .constellation import SymbolFrame
from .field import OpticalField


def _is_pow2(n: int) -> bool:
    return n >= 1 and not (n & (n - 1))


def modulate(frame: SymbolFrame, oversampling: int) -> OpticalField:
    """Build the transmitted field at sample rate oversampling / T_s.

    Channel l (column index l+B) is band-limited to
    [l/T_s - 1/(2 T_s), l/T_s + 1/(2 T_s)); at matched-filter sample times
    t = k T_s the baseband channel recovers phi_{k,0} / sqrt(T_s) exactly.
    """
    k_slots, n_ch = frame.symbols.shape
    b = n_ch // 2
    if oversampling < n_ch:
        raise ValueError(
            f"oversampling {oversampling} cannot hold {n_ch} channels"
        )
    if not _is_pow2(k_slots) or not _is_pow2(oversampling):
        raise ValueError("num_slots and oversampling must be powers of two")
    ts = frame.symbol_period
    ns = k_slots * oversampling
    spec = np.zeros(ns, dtype=np.complex128)
    # symbol-spectrum bin n maps to signed bin n (n < K/2) or n - K
    signed = np.where(np.arange(k_slots) < k_slots // 2,
                      np.arange(k_slots), np.arange(k_slots) - k_slots)
    for c in range(n_ch):
        l = c - b
        d = np.fft.fft(frame.symbols[:, c])
        spec[(l * k_slots + signed) % ns] += d
    spec *= oversampling / np.sqrt(ts)
    samples = np.fft.ifft(spec)
    return OpticalField(samples=samples, sample_rate=oversampling / ts)
