"""Systematic binary BCH component codes with bounded-distance decoding.

Decoding is syndrome based: Berlekamp-Massey for the error locator, then
direct root extraction (degree 1 and 2) or a Chien sweep over the
transmitted support (degree 3+). A word decodes successfully only if the
locator degree is <= t and every root lands inside the unshortened support;
anything else is reported as a decode failure.

Bit conventions: a codeword is a uint8 array of `length` bits in
transmitted order, position p holding the coefficient of x^(length-1-p).
Messages occupy positions 0..k-1 and parity the last r positions, so the
polynomial remainder lands in the low-degree coefficients.
"""

from dataclasses import dataclass, field as dfield
from functools import lru_cache

import numpy as np
from numba import njit

from .gf import GF2m, get_field, poly2_lcm_of_min_polys, poly2_mod

_MAX_T = 4


def _minimal_field_exponent(length: int) -> int:
    for n in range(4, 12):
        if (1 << n) - 1 >= length:
            return n
    raise ValueError(f"code length {length} exceeds 2^11 - 1")


@njit(cache=True)
def _syndromes(bits, synd_tab, out):
    two_t = synd_tab.shape[0]
    for j in range(two_t):
        out[j] = 0
    for p in range(bits.shape[0]):
        if bits[p]:
            for j in range(two_t):
                out[j] ^= synd_tab[j, p]


@njit(cache=True)
def _berlekamp_massey(synd, two_t, log, alog, num_elems, lam):
    """Fill `lam` with the error locator; return the LFSR length L."""
    size = lam.shape[0]
    b_poly = np.zeros(size, dtype=np.int32)
    t_poly = np.zeros(size, dtype=np.int32)
    for i in range(size):
        lam[i] = 0
        b_poly[i] = 0
    lam[0] = 1
    b_poly[0] = 1
    L = 0
    m = 1
    b = 1
    for n in range(two_t):
        d = synd[n]
        for j in range(1, L + 1):
            cj = lam[j]
            sj = synd[n - j]
            if cj != 0 and sj != 0:
                d ^= alog[log[cj] + log[sj]]
        if d == 0:
            m += 1
            continue
        coef_log = (log[d] + num_elems - log[b]) % num_elems
        if 2 * L <= n:
            for i in range(size):
                t_poly[i] = lam[i]
            for j in range(size - m):
                bj = b_poly[j]
                if bj != 0:
                    lam[j + m] ^= alog[coef_log + log[bj]]
            L = n + 1 - L
            for i in range(size):
                b_poly[i] = t_poly[i]
            b = d
            m = 1
        else:
            for j in range(size - m):
                bj = b_poly[j]
                if bj != 0:
                    lam[j + m] ^= alog[coef_log + log[bj]]
            m += 1
    return L


@njit(cache=True)
def _locator_roots(lam, L, length, log, alog, qroot, num_elems, degs):
    """Error degrees for locator `lam` of LFSR length L, into `degs`.

    Returns the number of errors, or -1 when the locator is invalid for
    bounded-distance decoding (degree mismatch, repeated/missing roots, or
    a root outside the transmitted support).
    """
    # actual degree must equal L, else fewer than L roots exist
    deg = 0
    for j in range(lam.shape[0] - 1, -1, -1):
        if lam[j] != 0:
            deg = j
            break
    if deg != L:
        return -1

    if L == 1:
        d = log[lam[1]]
        if d >= length:
            return -1
        degs[0] = d
        return 1

    if L == 2:
        l1 = lam[1]
        l2 = lam[2]
        if l1 == 0:
            return -1  # repeated root
        # x = (l1/l2) y turns l2 x^2 + l1 x + 1 into y^2 + y = l2 / l1^2
        a_log = (log[l1] + num_elems - log[l2]) % num_elems
        c = alog[(log[l2] + 2 * (num_elems - log[l1])) % num_elems]
        y0 = qroot[c]
        if y0 < 0:
            return -1
        y1 = y0 ^ 1
        if y0 == 0 or y1 == 0:
            return -1
        x0_log = (a_log + log[y0]) % num_elems
        x1_log = (a_log + log[y1]) % num_elems
        d0 = (num_elems - x0_log) % num_elems
        d1 = (num_elems - x1_log) % num_elems
        if d0 >= length or d1 >= length:
            return -1
        if d0 > d1:
            d0, d1 = d1, d0
        degs[0] = d0
        degs[1] = d1
        return 2

    # Chien sweep over the support: evaluate lam at alpha^(-d), d ascending
    state = np.zeros(L + 1, dtype=np.int32)
    step = np.zeros(L + 1, dtype=np.int32)
    for k in range(L + 1):
        state[k] = lam[k]
        step[k] = alog[(num_elems - k) % num_elems]
    found = 0
    for d in range(length):
        acc = 0
        for k in range(L + 1):
            acc ^= state[k]
        if acc == 0:
            degs[found] = d
            found += 1
            if found == L:
                return L
        for k in range(1, L + 1):
            s = state[k]
            if s != 0:
                state[k] = alog[log[s] + log[step[k]]]
    return -1


@njit(cache=True)
def _decode_syndromes(synd, synd_tab, two_t, t, length, log, alog, qroot, num_elems, degs):
    """Locate errors from syndromes; returns error count or -1 on failure.

    `synd` holds the 2t Berlekamp-Massey syndromes followed by any extra
    check syndromes (rows 2t.. of synd_tab); a candidate error pattern is
    rejected unless it reproduces the check syndromes too, which screens
    out most miscorrections of beyond-t error patterns.
    """
    n_rows = synd.shape[0]
    allzero = True
    for j in range(two_t):
        if synd[j] != 0:
            allzero = False
            break
    if allzero:
        for j in range(two_t, n_rows):
            if synd[j] != 0:
                return -1  # detectable but uncorrectable pattern
        return 0
    lam = np.zeros(two_t + 2, dtype=np.int32)
    L = _berlekamp_massey(synd, two_t, log, alog, num_elems, lam)
    if L > t:
        return -1
    nerr = _locator_roots(lam, L, length, log, alog, qroot, num_elems, degs)
    if nerr < 0:
        return -1
    for j in range(two_t, n_rows):
        acc = synd[j]
        for i in range(nerr):
            acc ^= synd_tab[j, length - 1 - degs[i]]
        if acc != 0:
            return -1
    return nerr


@njit(cache=True)
def _decode_words_inplace(words, synd_tab, two_t, t, length, log, alog, qroot, num_elems):
    """Bounded-distance decode each row of `words` in place.

    Returns a status array: corrected error count per word, -1 on failure.
    """
    nwords = words.shape[0]
    n_rows = synd_tab.shape[0]
    status = np.empty(nwords, dtype=np.int32)
    synd = np.empty(n_rows, dtype=np.int32)
    degs = np.empty(t, dtype=np.int64)
    for w in range(nwords):
        _syndromes(words[w], synd_tab, synd)
        nerr = _decode_syndromes(
            synd, synd_tab, two_t, t, length, log, alog, qroot, num_elems, degs
        )
        status[w] = nerr
        if nerr > 0:
            for i in range(nerr):
                p = length - 1 - degs[i]
                words[w, p] ^= 1
    return status


@dataclass
class BchCode:
    """Shortened binary BCH code of the given transmitted length."""

    n: int
    t: int
    length: int
    parity_bits: int
    generator: int
    check_exponents: tuple
    field: GF2m = dfield(repr=False)
    synd_tab: np.ndarray = dfield(repr=False)
    parity_matrix: np.ndarray = dfield(repr=False)

    @property
    def mother_length(self) -> int:
        return (1 << self.n) - 1

    @property
    def message_bits(self) -> int:
        return self.length - self.parity_bits

    @classmethod
    def build(cls, length: int, t: int, extra_root_exponents=()) -> "BchCode":
        """BCH code over the smallest field with 2^n - 1 >= length.

        The generator is the LCM of the minimal polynomials of
        alpha^1..alpha^(2t); `extra_root_exponents` appends further roots
        (their minimal polynomials) to pad the parity count, e.g. for
        standards-compatible rates.
        """
        if not 2 <= t <= _MAX_T:
            raise ValueError(f"error-correcting capability t={t} unsupported")
        n = _minimal_field_exponent(length)
        fld = get_field(n)
        extra = tuple(extra_root_exponents)
        exps = list(range(1, 2 * t + 1)) + list(extra)
        gen = poly2_lcm_of_min_polys(fld, exps)
        r = gen.bit_length() - 1
        if r >= length:
            raise ValueError(f"parity count {r} does not fit length {length}")
        # rows 0..2t-1 drive Berlekamp-Massey; extra roots become check rows
        row_exps = list(range(1, 2 * t + 1)) + list(extra)
        synd_tab = np.empty((len(row_exps), length), dtype=np.int32)
        for row, j in enumerate(row_exps):
            for p in range(length):
                d = length - 1 - p
                synd_tab[row, p] = fld.alog[(j * d) % fld.num_elems]
        k = length - r
        parity = np.empty((k, r), dtype=np.uint8)
        rem = poly2_mod(1 << r, gen)  # x^r mod g, then step degree upward
        for p in range(k - 1, -1, -1):
            for q in range(r):
                parity[p, q] = (rem >> (r - 1 - q)) & 1
            rem = poly2_mod(rem << 1, gen)
        return cls(
            n=n,
            t=t,
            length=length,
            parity_bits=r,
            generator=gen,
            check_exponents=extra,
            field=fld,
            synd_tab=synd_tab,
            parity_matrix=parity,
        )

    # ----- encoding -----

    def encode(self, message: np.ndarray) -> np.ndarray:
        message = np.asarray(message, dtype=np.uint8)
        if message.shape != (self.message_bits,):
            raise ValueError(
                f"message must have {self.message_bits} bits, got {message.shape}"
            )
        word = np.empty(self.length, dtype=np.uint8)
        word[: self.message_bits] = message
        par = message.astype(np.int64) @ self.parity_matrix.astype(np.int64)
        word[self.message_bits:] = par & 1
        return word

    def encode_batch(self, messages: np.ndarray) -> np.ndarray:
        messages = np.asarray(messages, dtype=np.uint8)
        if messages.ndim != 2 or messages.shape[1] != self.message_bits:
            raise ValueError("messages must be (num_words, message_bits)")
        out = np.empty((messages.shape[0], self.length), dtype=np.uint8)
        out[:, : self.message_bits] = messages
        # float32 matmul is exact here (row sums < 2^24) and much faster
        par = messages.astype(np.float32) @ self.parity_matrix.astype(np.float32)
        out[:, self.message_bits:] = par.astype(np.int64) & 1
        return out

    # ----- decoding -----

    def syndromes(self, word: np.ndarray) -> np.ndarray:
        word = np.ascontiguousarray(word, dtype=np.uint8)
        out = np.empty(self.synd_tab.shape[0], dtype=np.int32)
        _syndromes(word, self.synd_tab, out)
        return out

    def decode(self, word: np.ndarray):
        """Return (corrected_word, error_positions) or None on failure."""
        word = np.array(word, dtype=np.uint8)
        if word.shape != (self.length,):
            raise ValueError(f"received word must have {self.length} bits")
        batch = word[None, :].copy()
        status = _decode_words_inplace(
            batch,
            self.synd_tab,
            2 * self.t,
            self.t,
            self.length,
            self.field.log,
            self.field.alog,
            self.field.qroot,
            self.field.num_elems,
        )
        if status[0] < 0:
            return None
        corrected = batch[0]
        positions = np.flatnonzero(corrected != word)
        return corrected, positions

    def decode_batch_inplace(self, words: np.ndarray) -> np.ndarray:
        """Decode rows of `words` in place; returns per-word status.

        Status is the number of corrected errors, or -1 for decode failure
        (the row is left unchanged).
        """
        if words.dtype != np.uint8 or words.ndim != 2:
            raise ValueError("words must be a 2-D uint8 array")
        return _decode_words_inplace(
            words,
            self.synd_tab,
            2 * self.t,
            self.t,
            self.length,
            self.field.log,
            self.field.alog,
            self.field.qroot,
            self.field.num_elems,
        )

    def is_codeword(self, word: np.ndarray) -> bool:
        return not self.syndromes(word).any()


@lru_cache(maxsize=None)
def build_code(two_m: int, t: int) -> BchCode:
    """Component code of transmitted length `two_m` (mother code shortened)."""
    return BchCode.build(two_m, t)


@lru_cache(maxsize=None)
def g709_component() -> BchCode:
    """Length-1020 triple-error-correcting component with 32 parity bits.

    The plain t=3 generator over GF(2^10) has degree 30; the two extra
    parity bits come from adjoining the order-3 element alpha^341 (minimal
    polynomial x^2+x+1), producing a 32-parity subcode with the same
    guaranteed correction radius.
    """
    return BchCode.build(1020, 3, extra_root_exponents=(341,))
