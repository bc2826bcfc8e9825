"""Complex baseband optical field on a uniform FFT grid."""

from dataclasses import dataclass, replace

import numpy as np

_HEADER = "fibercm-field v1"


@dataclass
class OpticalField:
    """Uniformly sampled complex envelope; |sample|^2 is instantaneous W.

    The grid is periodic in time: sample j sits at t = j / sample_rate and
    the sample count must be a power of two (>= 2) so spectral operators
    stay exact.
    """

    samples: np.ndarray
    sample_rate: float
    center_freq_offset: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        n = self.samples.shape[0]
        if self.samples.ndim != 1 or n < 2 or n & (n - 1):
            raise ValueError("sample count must be a power of two >= 2")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def power(self) -> float:
        """Time-average power, W."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def energy(self) -> float:
        """Total energy over the window, J."""
        return float(np.sum(np.abs(self.samples) ** 2) / self.sample_rate)

    def with_samples(self, samples: np.ndarray) -> "OpticalField":
        return replace(self, samples=samples)

    def copy(self) -> "OpticalField":
        return replace(self, samples=self.samples.copy())


def save_field(path, field: OpticalField):
    """Binary snapshot: one text header line, then little-endian (re, im)
    float64 pairs."""
    header = (
        f"{_HEADER} sample_rate={field.sample_rate!r} "
        f"length={len(field)} center_offset={field.center_freq_offset!r}\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(field.samples.astype("<c16").tobytes())


def load_field(path) -> OpticalField:
    with open(path, "rb") as f:
        header = f.readline().decode("ascii").strip()
        payload = f.read()
    parts = header.split()
    if " ".join(parts[:2]) != _HEADER:
        raise ValueError(f"not a field snapshot: {header!r}")
    kv = dict(p.split("=", 1) for p in parts[2:])
    n = int(kv["length"])
    samples = np.frombuffer(payload, dtype="<c16", count=n).astype(np.complex128)
    return OpticalField(
        samples=samples,
        sample_rate=float(kv["sample_rate"]),
        center_freq_offset=float(kv.get("center_offset", 0.0)),
    )
