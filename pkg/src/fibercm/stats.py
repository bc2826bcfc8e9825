"""Memoryless channel statistics: rotated ring-Gaussian model fitting,
mutual information estimation, SNR bookkeeping, and per-bit-level rates."""

import csv
import math
from dataclasses import dataclass

import numpy as np

_LN2 = math.log(2.0)
_COV_FLOOR = 1e-15  # relative diagonal floor before inversion


@dataclass
class RingGaussianModel:
    """Per-ring mean and covariance of back-rotated receiver outputs.

    The channel is modeled as y = (mu_i + n_i) e^{j phase(x)} for an input
    on ring i, with n_i zero-mean Gaussian of covariance cov[i] in the
    back-rotated frame; the construction is rotationally invariant exactly.
    """

    radii: np.ndarray
    mu: np.ndarray  # complex, shape (R,)
    cov: np.ndarray  # shape (R, 2, 2)
    counts: np.ndarray  # samples per ring used in the fit

    @property
    def num_rings(self) -> int:
        return len(self.mu)

    def is_well_sampled(self, min_count: int = 100) -> bool:
        return bool(np.all(self.counts >= min_count))

    def regularized_cov(self) -> np.ndarray:
        cov = self.cov.copy()
        for i in range(self.num_rings):
            tr = cov[i, 0, 0] + cov[i, 1, 1]
            floor = _COV_FLOOR * tr if tr > 0 else 1e-300
            cov[i, 0, 0] += floor
            cov[i, 1, 1] += floor
        return cov


def fit_model(
    back_rotated: np.ndarray, ring_indices: np.ndarray, radii: np.ndarray
) -> RingGaussianModel:
    """Sample mean / unbiased covariance of back-rotated outputs per ring.

    ring_indices are 1-based; every ring in 1..len(radii) must appear with
    at least 2 samples.
    """
    back_rotated = np.asarray(back_rotated)
    ring_indices = np.asarray(ring_indices)
    radii = np.asarray(radii, dtype=float)
    num_rings = len(radii)
    mu = np.empty(num_rings, dtype=np.complex128)
    cov = np.empty((num_rings, 2, 2))
    counts = np.empty(num_rings, dtype=np.int64)
    for i in range(num_rings):
        pts = back_rotated[ring_indices == i + 1]
        if len(pts) < 2:
            raise ValueError(f"ring {i + 1} has {len(pts)} samples (< 2)")
        xy = np.column_stack([pts.real, pts.imag])
        mu[i] = pts.mean()
        cov[i] = np.cov(xy, rowvar=False, ddof=1)
        counts[i] = len(pts)
    return RingGaussianModel(radii=radii, mu=mu, cov=cov, counts=counts)


def conditional_density(
    model: RingGaussianModel, y: complex, ring_index: int, phase: float
) -> float:
    """Channel density f(y | x on ring `ring_index` with phase `phase`).

    Evaluates the fitted Gaussian against y back-rotated by the input
    phase, so f(y|x) = f(y e^{j t}|x e^{j t}) holds exactly.
    """
    if not 1 <= ring_index <= model.num_rings:
        raise ValueError("x must lie on a modeled ring")
    i = ring_index - 1
    cov = model.regularized_cov()[i]
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    inv = np.array([[cov[1, 1], -cov[0, 1]], [-cov[1, 0], cov[0, 0]]]) / det
    yr = y * np.exp(-1j * phase) - model.mu[i]
    d = np.array([yr.real, yr.imag])
    q = d @ inv @ d
    return float(np.exp(-0.5 * q) / (2.0 * np.pi * np.sqrt(det)))


def _model_tables(model: RingGaussianModel):
    cov = model.regularized_cov()
    det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] * cov[:, 1, 0]
    inv = np.empty_like(cov)
    inv[:, 0, 0] = cov[:, 1, 1]
    inv[:, 1, 1] = cov[:, 0, 0]
    inv[:, 0, 1] = -cov[:, 0, 1]
    inv[:, 1, 0] = -cov[:, 1, 0]
    inv /= det[:, None, None]
    lognorm = -np.log(2.0 * np.pi) - 0.5 * np.log(det)
    return inv, lognorm


def mutual_information(
    model: RingGaussianModel,
    phase_levels: int,
    mc_samples: int,
    rng: np.random.Generator,
    chunk: int = 4096,
):
    """Monte-Carlo estimate of I(X;Y) in bits/symbol with standard error.

    X is uniform over (ring, phase-grid) inputs; y is drawn from the fitted
    conditional; the mixture density f(y) is an exact sum over all
    num_rings * phase_levels hypotheses.

    Returns (mi_bits, standard_error).
    """
    R = model.num_rings
    P = phase_levels
    inv, lognorm = _model_tables(model)
    chol = np.linalg.cholesky(model.regularized_cov())
    mu_xy = np.column_stack([model.mu.real, model.mu.imag])
    phases = 2.0 * np.pi * np.arange(P) / P
    rot = np.exp(-1j * phases)  # back-rotation per phase hypothesis

    terms = np.empty(mc_samples)
    done = 0
    while done < mc_samples:
        n = min(chunk, mc_samples - done)
        ring = rng.integers(0, R, n)
        ph = rng.integers(0, P, n)
        xi = rng.standard_normal((n, 2))
        z = mu_xy[ring] + np.einsum("nij,nj->ni", chol[ring], xi)
        y = (z[:, 0] + 1j * z[:, 1]) * np.exp(1j * phases[ph])

        # log densities for every (ring, phase) hypothesis: (R, P, n)
        yr = rot[None, :, None] * y[None, None, :]
        dx = yr.real - mu_xy[:, 0, None, None]
        dy = yr.imag - mu_xy[:, 1, None, None]
        quad = (
            inv[:, 0, 0, None, None] * dx * dx
            + 2.0 * inv[:, 0, 1, None, None] * dx * dy
            + inv[:, 1, 1, None, None] * dy * dy
        )
        lp = lognorm[:, None, None] - 0.5 * quad
        flat = lp.reshape(R * P, n)
        mx = flat.max(axis=0)
        log_fy = mx + np.log(np.exp(flat - mx).sum(axis=0)) - np.log(R * P)
        log_fyx = lp[ring, ph, np.arange(n)]
        terms[done: done + n] = log_fyx - log_fy
        done += n
    mi = float(terms.mean() / _LN2)
    se = float(terms.std(ddof=1) / math.sqrt(mc_samples) / _LN2)
    return mi, se


@dataclass(frozen=True)
class SnrSpec:
    launch_power: float  # W
    noise_psd: float  # W/Hz
    bandwidth: float  # Hz (noise-normalization bandwidth of one channel)

    def __post_init__(self):
        if min(self.launch_power, self.noise_psd, self.bandwidth) <= 0:
            raise ValueError("all SNR quantities must be positive")


def snr_db(spec: SnrSpec) -> float:
    return float(
        10.0 * np.log10(spec.launch_power / (spec.noise_psd * spec.bandwidth))
    )


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def pragmatic_rate(k_coded_bits: int, p_avg: float) -> float:
    """Achievable rate of the hard-decision two-level scheme, bits/symbol:
    one shaped bit plus k coded bit-lanes at the average crossover p_avg."""
    if k_coded_bits < 1:
        raise ValueError("k_coded_bits must be >= 1")
    if not 0.0 <= p_avg <= 0.5:
        raise ValueError("p_avg must lie in [0, 1/2]")
    return 1.0 + k_coded_bits * (1.0 - binary_entropy(p_avg))


# ----- per-bit-level rates over a discrete channel -----


def joint_from_pairs(x_idx, y_idx, num_x: int, num_y: int) -> np.ndarray:
    """Empirical joint distribution from (input index, output index) pairs."""
    joint = np.zeros((num_x, num_y))
    np.add.at(joint, (np.asarray(x_idx), np.asarray(y_idx)), 1.0)
    return joint / joint.sum()


def _mi_of_joint(joint: np.ndarray) -> float:
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    ratio = joint[mask] / (px @ py)[mask]
    return float((joint[mask] * np.log2(ratio)).sum())


def bit_level_info(joint: np.ndarray, labels: np.ndarray, num_bits: int):
    """Per-bit-level information of a labeled input over a discrete channel.

    joint[x, y] is the joint input/output distribution; labels[x] is the
    integer bit label of input x with level i read as (label >> i) & 1.

    Returns a dict with:
      per_bit[i]  = I(b_i; Y)         (parallel independent decoding)
      c_pid       = sum of per_bit
      chain[i]    = I(b_i; Y | b_0..b_{i-1})
      total       = I(X; Y)           (equals sum of chain terms)
    """
    joint = np.asarray(joint, dtype=float)
    labels = np.asarray(labels)
    if labels.shape[0] != joint.shape[0]:
        raise ValueError("labels must cover every constellation point")
    total = _mi_of_joint(joint)
    bits = (labels[:, None] >> np.arange(num_bits)[None, :]) & 1

    per_bit = np.empty(num_bits)
    for i in range(num_bits):
        jb = np.stack(
            [joint[bits[:, i] == 0].sum(axis=0), joint[bits[:, i] == 1].sum(axis=0)]
        )
        per_bit[i] = _mi_of_joint(jb)

    chain = np.empty(num_bits)
    for i in range(num_bits):
        acc = 0.0
        for prefix in range(1 << i):
            sel = np.ones(len(labels), dtype=bool)
            for j in range(i):
                sel &= bits[:, j] == ((prefix >> j) & 1)
            p_prefix = joint[sel].sum()
            if p_prefix == 0:
                continue
            jb = np.stack(
                [
                    joint[sel & (bits[:, i] == 0)].sum(axis=0),
                    joint[sel & (bits[:, i] == 1)].sum(axis=0),
                ]
            )
            acc += p_prefix * _mi_of_joint(jb / p_prefix)
        chain[i] = acc

    return {
        "per_bit": per_bit,
        "c_pid": float(per_bit.sum()),
        "chain": chain,
        "total": total,
    }


def save_model_csv(path, model: RingGaussianModel):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            ["ring", "radius", "mu_re", "mu_im", "omega_xx", "omega_xy",
             "omega_yy", "count"]
        )
        for i in range(model.num_rings):
            w.writerow(
                [
                    i + 1,
                    repr(float(model.radii[i])),
                    repr(float(model.mu[i].real)),
                    repr(float(model.mu[i].imag)),
                    repr(float(model.cov[i, 0, 0])),
                    repr(float(model.cov[i, 0, 1])),
                    repr(float(model.cov[i, 1, 1])),
                    int(model.counts[i]),
                ]
            )
