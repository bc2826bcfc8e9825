"""Physical link parameters and derived noise quantities."""

from dataclasses import dataclass

PLANCK = 6.62607015e-34  # J s


@dataclass(frozen=True)
class FiberParams:
    """Fiber constants, all SI.

    beta2:  second-order dispersion, s^2/m
    alpha:  loss, 1/m (drives distributed-amplification noise; propagation
            itself runs at zero net loss under ideal Raman pumping)
    gamma:  Kerr nonlinear coefficient, 1/(W m)
    nu_s:   center carrier frequency, Hz
    k_t:    phonon occupancy factor
    """

    beta2: float
    alpha: float
    gamma: float
    nu_s: float
    k_t: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.nu_s <= 0:
            raise ValueError("nu_s must be > 0")
        if self.k_t < 1:
            raise ValueError("k_t must be >= 1")

    def noise_psd(self, length_m: float) -> float:
        """Accumulated ASE power spectral density over `length_m`, W/Hz."""
        return length_m * self.alpha * PLANCK * self.nu_s * self.k_t


# Standard single-mode fiber with ideal distributed Raman amplification:
# -21.668 ps^2/km dispersion, 0.2 dB/km loss, 1.27 1/(W km) nonlinearity,
# 193.41 THz carrier, phonon occupancy 1.13.
STANDARD_FIBER = FiberParams(
    beta2=-21.668e-27,
    alpha=4.605e-5,
    gamma=1.27e-3,
    nu_s=193.41e12,
    k_t=1.13,
)


@dataclass(frozen=True)
class PropagationPlan:
    """Forward split-step schedule.

    The final step is shortened so steps land exactly on total_length.
    `symmetric` switches plain nonlinear-then-linear splitting to the
    symmetrized half-linear variant.
    """

    total_length: float
    step_size: float
    noise_enabled: bool = False
    noise_seed: int = 0
    symmetric: bool = False

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if self.total_length < 0:
            raise ValueError("total_length must be >= 0")

    def steps(self):
        """Step lengths summing exactly to total_length."""
        n_full = int(self.total_length / self.step_size)
        rem = self.total_length - n_full * self.step_size
        out = [self.step_size] * n_full
        if rem > 1e-9 * self.step_size:
            out.append(rem)
        return out


def dbm_to_watts(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    import math

    return 10.0 * math.log10(p_watts / 1e-3)
