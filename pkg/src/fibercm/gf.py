"""Binary extension field GF(2^n) arithmetic via log/antilog tables.

Fields are built from a fixed table of primitive polynomials (one per n) so
that codes constructed on different machines/runs are bit-compatible.
"""

from functools import lru_cache

import numpy as np

# Primitive polynomials over GF(2), bit i = coefficient of x^i.
# n=4:  x^4+x+1          n=5:  x^5+x^2+1        n=6:  x^6+x+1
# n=7:  x^7+x^3+1        n=8:  x^8+x^4+x^3+x^2+1
# n=9:  x^9+x^4+1        n=10: x^10+x^3+1       n=11: x^11+x^2+1
PRIMITIVE_POLY = {
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
}


class GF2m:
    """GF(2^n) with alpha = root of the pinned primitive polynomial.

    Elements are ints in [0, 2^n). `log[a]` is defined for a != 0;
    `alog[i]` = alpha^i for i in [0, 2*(2^n - 1)) to allow unreduced
    exponent sums in hot loops.
    """

    def __init__(self, n: int):
        if n not in PRIMITIVE_POLY:
            raise ValueError(f"unsupported field exponent n={n}")
        self.n = n
        self.order = 1 << n
        self.num_elems = self.order - 1  # multiplicative group size
        poly = PRIMITIVE_POLY[n]

        alog = np.zeros(2 * self.num_elems, dtype=np.int32)
        log = np.zeros(self.order, dtype=np.int32)
        x = 1
        for i in range(self.num_elems):
            alog[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= poly
        if x != 1:
            raise AssertionError(f"polynomial {poly:#x} is not primitive for n={n}")
        alog[self.num_elems:] = alog[: self.num_elems]
        self.alog = alog
        self.log = log
        self.qroot = self._build_quadratic_table()

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.alog[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(2^n)")
        return int(self.alog[self.num_elems - self.log[a]])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self.alog[(self.log[a] * e) % self.num_elems])

    def _build_quadratic_table(self) -> np.ndarray:
        # qroot[c] = y with y^2 + y = c, or -1 if c has no solution.
        # y -> y^2 + y is 2-to-1 (kernel {0,1}); half of the field is reachable.
        tab = np.full(self.order, -1, dtype=np.int32)
        for y in range(self.order):
            c = self.mul(y, y) ^ y
            if tab[c] < 0:
                tab[c] = y
        return tab

    def solve_quadratic(self, c: int) -> int:
        """One root y of y^2 + y = c, or -1 if none; other root is y ^ 1."""
        return int(self.qroot[c])

    def min_poly(self, elem_log: int) -> int:
        """Minimal polynomial over GF(2) of alpha^elem_log, as a bit mask."""
        # Conjugacy class {e, 2e, 4e, ...} mod (2^n - 1).
        coset = []
        e = elem_log % self.num_elems
        while e not in coset:
            coset.append(e)
            e = (2 * e) % self.num_elems
        # Product of (x - alpha^e) over the coset, coefficients in GF(2^n);
        # the result has GF(2) coefficients.
        poly = [1]  # coefficients, low degree first, in GF(2^n)
        for e in coset:
            root = int(self.alog[e])
            nxt = [0] * (len(poly) + 1)
            for i, ci in enumerate(poly):
                nxt[i + 1] ^= ci
                nxt[i] ^= self.mul(ci, root)
            poly = nxt
        mask = 0
        for i, ci in enumerate(poly):
            if ci not in (0, 1):
                raise AssertionError("minimal polynomial has non-binary coefficient")
            mask |= ci << i
        return mask


@lru_cache(maxsize=None)
def get_field(n: int) -> GF2m:
    return GF2m(n)


def poly2_mul(a: int, b: int) -> int:
    """Multiply two GF(2)[x] polynomials given as bit masks."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly2_mod(a: int, m: int) -> int:
    """Remainder of a modulo m in GF(2)[x]."""
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm and a:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def poly2_lcm_of_min_polys(field: GF2m, exponents) -> int:
    """LCM over GF(2)[x] of the minimal polynomials of alpha^e, e in exponents."""
    seen = set()
    out = 1
    for e in exponents:
        mp = field.min_poly(e)
        if mp in seen:
            continue
        seen.add(mp)
        # min polys of distinct cosets are coprime irreducibles: lcm = product
        out = poly2_mul(out, mp)
    return out
