"""Staircase code encoder, sliding-window decoder, and waterfall tooling.

A staircase stream is a sequence of m-by-m bit blocks B_0, B_1, ... with
B_0 pinned to all zeros and, for every i >= 1, each row of [B_{i-1}^T B_i]
a codeword of the length-2m component code. Block layout: the first m-r
columns of B_i carry information, the last r columns parity.

The decoder slides a window of `window` blocks over the stream. At each
position it runs Gauss-Seidel sweeps over the window-internal component
words (oldest constraint first, rows in order, flips applied immediately),
re-attempting a word only when its syndrome changed, until a sweep makes
no flips or `max_iters` sweeps have run; it then emits the oldest block.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.stats import norm

from .bch import BchCode, _decode_syndromes, build_code, g709_component

_MAGIC = b"SCBS"


@dataclass
class StaircaseParams:
    block_size: int
    code: BchCode
    window: int = 7
    max_iters: int = 8
    jacobi: bool = False

    def __post_init__(self):
        m = self.block_size
        if self.code.length != 2 * m:
            raise ValueError(
                f"component length {self.code.length} != 2*block_size {2 * m}"
            )
        if self.code.parity_bits > m:
            raise ValueError("parity bits must fit in one block column set")
        if self.window < 2:
            raise ValueError("window must span at least 2 blocks")

    @classmethod
    def create(cls, m: int, t: int, **kw) -> "StaircaseParams":
        return cls(block_size=m, code=build_code(2 * m, t), **kw)

    @classmethod
    def g709(cls, **kw) -> "StaircaseParams":
        return cls(block_size=510, code=g709_component(), **kw)

    @property
    def parity_bits(self) -> int:
        return self.code.parity_bits

    @property
    def info_cols(self) -> int:
        return self.block_size - self.code.parity_bits

    @property
    def info_bits_per_block(self) -> int:
        return self.block_size * self.info_cols

    @property
    def rate(self) -> float:
        return 1.0 - self.code.parity_bits / self.block_size


class StaircaseEncoder:
    """Produces successive blocks satisfying the stream constraint."""

    def __init__(self, params: StaircaseParams):
        self.params = params
        m = params.block_size
        self._prev = np.zeros((m, m), dtype=np.uint8)
        self._parity_f32 = params.code.parity_matrix.astype(np.float32)

    def encode_next(self, info_bits: np.ndarray) -> np.ndarray:
        p = self.params
        m = p.block_size
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if info_bits.shape != (m, p.info_cols):
            raise ValueError(f"info bits must be {(m, p.info_cols)}")
        messages = np.empty((m, p.code.message_bits), dtype=np.float32)
        messages[:, :m] = self._prev.T
        messages[:, m:] = info_bits
        parity = (messages @ self._parity_f32).astype(np.int64) & 1
        block = np.empty((m, m), dtype=np.uint8)
        block[:, : p.info_cols] = info_bits
        block[:, p.info_cols:] = parity
        self._prev = block
        return block


@njit(cache=True)
def _constraint_syndromes(left, right, synd_tab, out):
    """Syndromes of rows of [left^T right] into out (m, n_rows)."""
    m = left.shape[0]
    n_rows = synd_tab.shape[0]
    for j in range(m):
        for q in range(n_rows):
            out[j, q] = 0
        for p in range(m):
            if left[p, j]:
                for q in range(n_rows):
                    out[j, q] ^= synd_tab[q, p]
        for p in range(m):
            if right[j, p]:
                for q in range(n_rows):
                    out[j, q] ^= synd_tab[q, m + p]


@njit(cache=True)
def _iterate_window(
    blocks, synd, dirty, synd_tab, two_t, t, m, log, alog, qroot, num_elems, max_iters
):
    """Gauss-Seidel decoding sweeps; returns total bit flips applied."""
    ncons = synd.shape[0]
    n_rows = synd.shape[2]
    length = 2 * m
    degs = np.empty(t, dtype=np.int64)
    total = 0
    for _ in range(max_iters):
        flips = 0
        for c in range(ncons):
            for j in range(m):
                if dirty[c, j] == 0:
                    continue
                dirty[c, j] = 0
                nz = False
                for q in range(n_rows):
                    if synd[c, j, q] != 0:
                        nz = True
                        break
                if not nz:
                    continue
                nerr = _decode_syndromes(
                    synd[c, j], synd_tab, two_t, t, length, log, alog, qroot,
                    num_elems, degs,
                )
                if nerr <= 0:
                    continue
                for i in range(nerr):
                    pos = length - 1 - degs[i]
                    for q in range(n_rows):
                        synd[c, j, q] ^= synd_tab[q, pos]
                    if pos < m:
                        blocks[c, pos, j] ^= 1
                        cc = c - 1
                        rr = pos
                        cpos = m + j
                    else:
                        blocks[c + 1, j, pos - m] ^= 1
                        cc = c + 1
                        rr = pos - m
                        cpos = j
                    if 0 <= cc < ncons:
                        for q in range(n_rows):
                            synd[cc, rr, q] ^= synd_tab[q, cpos]
                        dirty[cc, rr] = 1
                flips += nerr
        total += flips
        if flips == 0:
            break
    return total


@njit(cache=True)
def _iterate_window_jacobi(
    blocks, synd, dirty, synd_tab, two_t, t, m, log, alog, qroot, num_elems, max_iters
):
    """Jacobi variant: flips within a sweep are buffered, applied at its end."""
    ncons = synd.shape[0]
    n_rows = synd.shape[2]
    length = 2 * m
    degs = np.empty(t, dtype=np.int64)
    max_flips = ncons * m * t
    fc = np.empty(max_flips, dtype=np.int64)
    fj = np.empty(max_flips, dtype=np.int64)
    fp = np.empty(max_flips, dtype=np.int64)
    total = 0
    for _ in range(max_iters):
        nf = 0
        for c in range(ncons):
            for j in range(m):
                if dirty[c, j] == 0:
                    continue
                nz = False
                for q in range(n_rows):
                    if synd[c, j, q] != 0:
                        nz = True
                        break
                if not nz:
                    dirty[c, j] = 0
                    continue
                nerr = _decode_syndromes(
                    synd[c, j], synd_tab, two_t, t, length, log, alog, qroot,
                    num_elems, degs,
                )
                dirty[c, j] = 0
                if nerr <= 0:
                    continue
                for i in range(nerr):
                    fc[nf] = c
                    fj[nf] = j
                    fp[nf] = length - 1 - degs[i]
                    nf += 1
        for i in range(nf):
            c = fc[i]
            j = fj[i]
            pos = fp[i]
            for q in range(n_rows):
                synd[c, j, q] ^= synd_tab[q, pos]
            dirty[c, j] = 1
            if pos < m:
                blocks[c, pos, j] ^= 1
                cc = c - 1
                rr = pos
                cpos = m + j
            else:
                blocks[c + 1, j, pos - m] ^= 1
                cc = c + 1
                rr = pos - m
                cpos = j
            if 0 <= cc < ncons:
                for q in range(n_rows):
                    synd[cc, rr, q] ^= synd_tab[q, cpos]
                dirty[cc, rr] = 1
        total += nf
        if nf == 0:
            break
    return total


class StaircaseDecoder:
    """Sliding-window decoder with a push/flush streaming interface."""

    def __init__(self, params: StaircaseParams):
        self.params = params
        m = params.block_size
        W = params.window
        n_rows = params.code.synd_tab.shape[0]
        self._blocks = np.zeros((W, m, m), dtype=np.uint8)
        self._synd = np.zeros((W - 1, m, n_rows), dtype=np.int32)
        self._dirty = np.zeros((W - 1, m), dtype=np.uint8)
        self._filled = 1  # slot 0 holds the known all-zeros reference block
        self._emit_count = 0  # stream index of the next block to leave the window
        self.flips = 0

    def _iterate(self, ncons: int):
        p = self.params
        fld = p.code.field
        kern = _iterate_window_jacobi if p.jacobi else _iterate_window
        self.flips += kern(
            self._blocks[: ncons + 1],
            self._synd[:ncons],
            self._dirty[:ncons],
            p.code.synd_tab,
            2 * p.code.t,
            p.code.t,
            p.block_size,
            fld.log,
            fld.alog,
            fld.qroot,
            fld.num_elems,
            p.max_iters,
        )

    def push(self, block: np.ndarray):
        """Feed one received block; returns (index, decoded_block) or None."""
        p = self.params
        m = p.block_size
        if block.shape != (m, m):
            raise ValueError(f"block must be {(m, m)}")
        i = self._filled
        self._blocks[i] = block
        _constraint_syndromes(
            self._blocks[i - 1], self._blocks[i], p.code.synd_tab, self._synd[i - 1]
        )
        self._dirty[i - 1] = 1
        self._filled += 1
        if self._filled < p.window:
            return None
        self._iterate(self._filled - 1)
        return self._emit()

    def _emit(self):
        idx = self._emit_count
        self._emit_count += 1
        blk = self._blocks[0].copy()
        self._blocks[:-1] = self._blocks[1:]
        self._synd[:-1] = self._synd[1:]
        self._dirty[:-1] = self._dirty[1:]
        self._filled -= 1
        if idx == 0:
            return None  # the all-zeros reference block carries no data
        return idx, blk

    def flush(self):
        """Emit all remaining blocks at the end of the stream."""
        out = []
        while self._filled > 0:
            if self._filled > 1:
                self._iterate(self._filled - 1)
            res = self._emit()
            if res is not None:
                out.append(res)
        return out


def decode_stream(params: StaircaseParams, noisy_blocks: np.ndarray, truth=None):
    """Decode a full stream of blocks (B_1..B_T, B_0 implicit zeros).

    Returns (decoded_blocks, ber) where ber is the information-bit error
    rate against `truth` (None when truth is not given).
    """
    dec = StaircaseDecoder(params)
    out = {}
    for blk in noisy_blocks:
        res = dec.push(blk)
        if res is not None:
            out[res[0]] = res[1]
    for idx, blk in dec.flush():
        out[idx] = blk
    decoded = np.stack([out[i] for i in range(1, len(noisy_blocks) + 1)])
    ber = None
    if truth is not None:
        ic = params.info_cols
        errs = int((decoded[:, :, :ic] != truth[:, :, :ic]).sum())
        ber = errs / (len(noisy_blocks) * params.info_bits_per_block)
    return decoded, ber


def error_floor_estimate(params: StaircaseParams, p: float) -> float:
    """Union-bound error floor from minimal stall patterns.

    A minimal stall is a (t+1)x(t+1) grid of errors confined to one block
    intersection: every touching component word then holds t+1 > t errors
    and iterative decoding halts. The bound counts the C(m,t+1)^2 placements
    of such grids, each contributing (t+1)^2 wrong bits out of m^2.
    """
    if not 0.0 < p < 0.5:
        raise ValueError("p must be in (0, 1/2)")
    t = params.code.t
    m = params.block_size
    s = t + 1
    mult = math.comb(m, s) ** 2
    return (s * s) / (m * m) * mult * p ** (s * s)


def net_coding_gain(rate: float, p_in: float, ber_out_target: float) -> float:
    """NCG in dB for a hard-decision code on the binary-AWGN-induced BSC."""
    if not 0.0 < p_in < 0.5:
        raise ValueError("p_in must be in (0, 1/2)")
    if not 0.0 < ber_out_target < p_in:
        raise ValueError("ber_out_target must be in (0, p_in)")
    q_out = norm.isf(ber_out_target)
    q_in = norm.isf(p_in)
    return float(
        20.0 * np.log10(q_out) - 20.0 * np.log10(q_in) + 10.0 * np.log10(rate)
    )


def minimal_stall_pattern(params: StaircaseParams, rows, cols) -> np.ndarray:
    """Error mask (one block) with a (t+1)x(t+1) grid at the given rows/cols."""
    t = params.code.t
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    if rows.shape != (t + 1,) or cols.shape != (t + 1,):
        raise ValueError(f"need exactly t+1={t + 1} rows and cols")
    mask = np.zeros((params.block_size, params.block_size), dtype=np.uint8)
    mask[np.ix_(rows, cols)] = 1
    return mask


def simulate_bsc(
    params: StaircaseParams,
    p: float,
    rng: np.random.Generator,
    target_info_bits: int,
    max_errors: int = None,
):
    """Stream random data through encode -> BSC(p) -> windowed decode.

    Counts post-FEC information-bit errors on regularly emitted blocks only
    (blocks emitted during the final flush lack full window coverage and are
    excluded). Stops once `target_info_bits` have been counted, or earlier
    when `max_errors` post-FEC errors have accumulated.

    Returns dict with bits, errors, ber, blocks.
    """
    if not 0.0 < p < 0.5:
        raise ValueError("p must be in (0, 1/2)")
    m = params.block_size
    ic = params.info_cols
    enc = StaircaseEncoder(params)
    dec = StaircaseDecoder(params)
    truth = {}
    bits = 0
    errors = 0
    blocks = 0
    idx = 0
    while bits < target_info_bits:
        idx += 1
        info = rng.integers(0, 2, size=(m, ic), dtype=np.uint8)
        clean = enc.encode_next(info)
        truth[idx] = clean
        noisy = clean ^ (rng.random((m, m)) < p).astype(np.uint8)
        res = dec.push(noisy)
        if res is not None:
            i, blk = res
            ref = truth.pop(i)
            errors += int((blk[:, :ic] != ref[:, :ic]).sum())
            bits += m * ic
            blocks += 1
            if max_errors is not None and errors >= max_errors:
                break
    dec.flush()
    return {
        "bits": bits,
        "errors": errors,
        "ber": errors / bits if bits else math.nan,
        "blocks": blocks,
    }


# ----- stream framing -----


def write_block_stream(path, params: StaircaseParams, blocks: np.ndarray):
    """Serialize blocks row-major, MSB-first, after a 16-byte header."""
    m = params.block_size
    header = _MAGIC + struct.pack(
        "<III", m, params.code.parity_bits, params.code.t
    )
    assert len(header) == 16
    with open(path, "wb") as f:
        f.write(header)
        for blk in blocks:
            f.write(np.packbits(blk.reshape(-1)).tobytes())


def read_block_stream(path):
    """Returns ((m, r, t), blocks array)."""
    with open(path, "rb") as f:
        header = f.read(16)
        if header[:4] != _MAGIC:
            raise ValueError("bad stream magic")
        m, r, t = struct.unpack("<III", header[4:])
        per_block = (m * m + 7) // 8
        payload = f.read()
    if len(payload) % per_block:
        raise ValueError("truncated block stream")
    nblocks = len(payload) // per_block
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(nblocks, per_block)
    bits = np.unpackbits(raw, axis=1)[:, : m * m]
    return (m, r, t), bits.reshape(nblocks, m, m)
