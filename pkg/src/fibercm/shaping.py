"""Shaped square-QAM constellations, trellis shaping, and BICM mapping.

The constellation carries K Gray-labeled coded bits inside each quadrant
plus two quadrant-selecting bits. Trellis shaping sends one data bit per
symbol through the quadrant pair: the data bit picks a coset of the
four-state convolutional code via the causal coset map, and a Viterbi
search over the code chooses the in-coset sequence minimizing transmitted
energy. The syndrome former inverts the construction at the receiver
independent of the shaper's choice.
"""

from dataclasses import dataclass, field as dfield

import numpy as np
from numba import njit

# binary polynomials in D, bit i = coefficient of D^i
GEN_POLYS = (0b101, 0b111)  # G_U = [1+D^2, 1+D+D^2]
SYNDROME_POLYS = (0b111, 0b101)  # H_U^T = [1+D+D^2, 1+D^2]^T
COSET_POLYS = (0b10, 0b11)  # g = [D, 1+D], satisfies g . H_U^T = 1


def _poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def verify_coset_identity() -> bool:
    """g . H_U^T = 1 and G_U . H_U^T = 0 over GF(2)[D]."""
    g_dot_h = _poly_mul(COSET_POLYS[0], SYNDROME_POLYS[0]) ^ _poly_mul(
        COSET_POLYS[1], SYNDROME_POLYS[1]
    )
    gu_dot_h = _poly_mul(GEN_POLYS[0], SYNDROME_POLYS[0]) ^ _poly_mul(
        GEN_POLYS[1], SYNDROME_POLYS[1]
    )
    return g_dot_h == 1 and gu_dot_h == 0


@dataclass
class ShapedConstellation:
    """2^(K+2)-point square QAM with quadrant bits and per-quadrant Gray.

    Bit level i of a label is (label >> i) & 1: levels 0..K-1 are the coded
    bits (Gray within each quadrant, identical across quadrants), level K
    selects the negative-real half, level K+1 the negative-imaginary half.
    Points are scaled to unit average energy under uniform labels.
    """

    k_coded: int
    points: np.ndarray = dfield(repr=False)  # by construction index
    labels: np.ndarray = dfield(repr=False)  # label of each point
    point_of_label: np.ndarray = dfield(repr=False)  # complex, by label
    scale: float = 1.0

    @property
    def num_points(self) -> int:
        return len(self.points)

    @property
    def side(self) -> int:
        return 1 << ((self.k_coded + 2) // 2)

    def energies_by_label(self) -> np.ndarray:
        return np.abs(self.point_of_label) ** 2


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def build_constellation(k_coded: int) -> ShapedConstellation:
    """Shaped constellation with k_coded in {2, 4, 6, 8} coded bits."""
    if k_coded % 2 or not 2 <= k_coded <= 8:
        raise ValueError("k_coded must be even, in 2..8")
    half = k_coded // 2
    sq = 1 << half  # per-quadrant side
    side = 2 * sq
    # full odd-integer grid, row-major construction order (imag then real)
    coords = np.arange(side) * 2 - (side - 1)
    points = []
    labels = []
    for iy in range(side):
        for ix in range(side):
            x = coords[ix]
            y = coords[iy]
            # per-quadrant coordinate index, identical in every quadrant
            ux = ix % sq
            uy = iy % sq
            lab = _gray(ux) | (_gray(uy) << half)
            lab |= (1 if x < 0 else 0) << k_coded
            lab |= (1 if y < 0 else 0) << (k_coded + 1)
            points.append(x + 1j * y)
            labels.append(lab)
    points = np.array(points, dtype=np.complex128)
    labels = np.array(labels, dtype=np.int64)
    scale = float(np.sqrt(np.mean(np.abs(points) ** 2)))
    points = points / scale
    pol = np.empty(len(points), dtype=np.complex128)
    pol[labels] = points
    return ShapedConstellation(
        k_coded=k_coded,
        points=points,
        labels=labels,
        point_of_label=pol,
        scale=1.0 / scale,
    )


@dataclass(frozen=True)
class ShapingCodeSpec:
    """Four-state shaping code with its syndrome former and coset map."""

    traceback_depth: int = 32

    def __post_init__(self):
        if self.traceback_depth < 1:
            raise ValueError("traceback_depth must be >= 1")
        if not verify_coset_identity():
            raise AssertionError("coset map identity g . H^T = 1 failed")


def conv_encode(u: np.ndarray) -> np.ndarray:
    """Rate-1/2 encoder output pairs (c1, c2) for input bits u."""
    u = np.asarray(u, dtype=np.uint8)
    u1 = np.concatenate([[0], u[:-1]])
    u2 = np.concatenate([[0, 0], u[:-2]])
    return np.stack([u ^ u2, u ^ u1 ^ u2], axis=1)


def coset_map(s: np.ndarray) -> np.ndarray:
    """Causal coset representative t = s . g, two bits per symbol."""
    s = np.asarray(s, dtype=np.uint8)
    s1 = np.concatenate([[0], s[:-1]])
    return np.stack([s1, s ^ s1], axis=1)


def recover_shaping_bits(spec: ShapingCodeSpec, quadrant_bits: np.ndarray):
    """Pass received quadrant bit pairs through the syndrome former H_U^T."""
    q = np.asarray(quadrant_bits, dtype=np.uint8)
    q1 = q[:, 0]
    q2 = q[:, 1]
    d1 = np.concatenate([[0], q1[:-1]])
    d2_1 = np.concatenate([[0, 0], q1[:-2]])
    d2_2 = np.concatenate([[0, 0], q2[:-2]])
    return q1 ^ d1 ^ d2_1 ^ q2 ^ d2_2


@njit(cache=True)
def _viterbi_quadrants(t_bits, coded_labels, energies, k_coded, depth):
    """Choose the code-input bits minimizing total symbol energy.

    State is (u_{k-1} | u_{k-2} << 1); ties resolve to the lowest
    predecessor state and input bit. Decisions are released with the given
    traceback depth; the frame tail is resolved from the best final state.
    """
    n = t_bits.shape[0]
    inf = 1.0e300
    metric = np.full(4, inf)
    metric[0] = 0.0
    bp_state = np.zeros((n, 4), dtype=np.uint8)
    bp_input = np.zeros((n, 4), dtype=np.uint8)
    best_state = np.zeros(n, dtype=np.uint8)
    newm = np.empty(4)
    for k in range(n):
        for s in range(4):
            newm[s] = inf
        base = coded_labels[k]
        t1 = t_bits[k, 0]
        t2 = t_bits[k, 1]
        for s in range(4):
            if metric[s] >= inf:
                continue
            u_km1 = s & 1
            u_km2 = (s >> 1) & 1
            for u in range(2):
                c1 = u ^ u_km2
                c2 = u ^ u_km1 ^ u_km2
                q1 = t1 ^ c1
                q2 = t2 ^ c2
                label = base | (q1 << k_coded) | (q2 << (k_coded + 1))
                cand = metric[s] + energies[label]
                ns = u | (u_km1 << 1)
                if cand < newm[ns]:
                    newm[ns] = cand
                    bp_state[k, ns] = s
                    bp_input[k, ns] = u
        best = 0
        bm = newm[0]
        for s in range(1, 4):
            if newm[s] < bm:
                bm = newm[s]
                best = s
        best_state[k] = best
        for s in range(4):
            metric[s] = newm[s]
    u_out = np.empty(n, dtype=np.uint8)
    for k in range(n):
        anchor = k + depth - 1
        if anchor >= n:
            anchor = n - 1
        s = best_state[anchor]
        for j in range(anchor, k, -1):
            s = bp_state[j, s]
        u_out[k] = bp_input[k, s]
    return u_out


def shape(
    spec: ShapingCodeSpec,
    data_bits: np.ndarray,
    coded_labels: np.ndarray,
    constellation: ShapedConstellation,
):
    """Energy-minimizing shaped symbols for one data bit per symbol.

    coded_labels holds the K coded bits of each symbol as an integer.
    Returns (symbols, quadrant_bits) with quadrant_bits[k] = (b_K, b_K+1).
    """
    data_bits = np.asarray(data_bits, dtype=np.uint8)
    coded_labels = np.asarray(coded_labels, dtype=np.int64)
    if data_bits.shape[0] != coded_labels.shape[0]:
        raise ValueError("data bit and coded symbol counts differ")
    t = coset_map(data_bits)
    u = _viterbi_quadrants(
        t,
        coded_labels,
        constellation.energies_by_label(),
        constellation.k_coded,
        spec.traceback_depth,
    )
    q = conv_encode(u) ^ t
    k = constellation.k_coded
    labels = coded_labels | (q[:, 0].astype(np.int64) << k) | (
        q[:, 1].astype(np.int64) << (k + 1)
    )
    return constellation.point_of_label[labels], q


def uniform_quadrant_energy(
    constellation: ShapedConstellation, coded_labels: np.ndarray
) -> float:
    """Average symbol energy if quadrant bits were uniform random."""
    k = constellation.k_coded
    e = constellation.energies_by_label()
    coded_labels = np.asarray(coded_labels, dtype=np.int64)
    acc = np.zeros(len(coded_labels))
    for q in range(4):
        acc += e[coded_labels | (q << k)]
    return float(acc.mean() / 4.0)


# ----- BICM bit mapping -----


def bicm_map(coded_bits: np.ndarray, k_coded: int) -> np.ndarray:
    """Group a coded bit stream into per-symbol label integers.

    Bit j of symbol k is coded_bits[k * K + j], placed at label level j.
    """
    bits = np.asarray(coded_bits, dtype=np.int64)
    if bits.shape[0] % k_coded:
        raise ValueError("bit stream length must be a multiple of K")
    groups = bits.reshape(-1, k_coded)
    return (groups << np.arange(k_coded)[None, :]).sum(axis=1)


def bicm_demap_hard(symbols: np.ndarray, constellation: ShapedConstellation):
    """Nearest-point hard decisions.

    Returns (coded_bits flat, quadrant_bits (n, 2)). Grid quantization per
    axis is the exact minimum-distance rule for a square constellation;
    exact midpoints resolve toward the lower coordinate index, matching
    construction order.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    side = constellation.side
    k = constellation.k_coded
    half = k // 2
    sq = side // 2
    # undo unit-energy scaling back to the odd-integer grid
    grid = symbols / constellation.scale
    fx = (grid.real + (side - 1)) / 2.0
    fy = (grid.imag + (side - 1)) / 2.0
    ix = np.clip(np.ceil(fx - 0.5), 0, side - 1).astype(np.int64)
    iy = np.clip(np.ceil(fy - 0.5), 0, side - 1).astype(np.int64)
    coords = np.arange(side) * 2 - (side - 1)
    gx = _gray_array(ix % sq)
    gy = _gray_array(iy % sq)
    labels = gx | (gy << half)
    labels |= (coords[ix] < 0).astype(np.int64) << k
    labels |= (coords[iy] < 0).astype(np.int64) << (k + 1)
    coded = (labels[:, None] >> np.arange(k)[None, :]) & 1
    quad = np.stack([(labels >> k) & 1, (labels >> (k + 1)) & 1], axis=1)
    return coded.reshape(-1).astype(np.uint8), quad.astype(np.uint8)


def _gray_array(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


class BlockInterleaver:
    """Fixed seeded permutation over a block of bit positions."""

    def __init__(self, num_bits: int, seed: int):
        self.num_bits = num_bits
        self.seed = seed
        self._perm = np.random.default_rng(seed).permutation(num_bits)
        self._inv = np.argsort(self._perm)

    def interleave(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits)
        if bits.shape[0] != self.num_bits:
            raise ValueError("bit count mismatch")
        return bits[self._perm]

    def deinterleave(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits)
        if bits.shape[0] != self.num_bits:
            raise ValueError("bit count mismatch")
        return bits[self._inv]
