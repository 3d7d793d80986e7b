"""Finite fields F_{p^n} built as explicit towers of extensions.

Elements are raw values handled by the field object: ints for a prime
field, tuples of parent elements for an extension.  This keeps the hot
loops allocation-free; wrap in richer types only at API boundaries.
"""

from __future__ import annotations

import itertools
from typing import Iterator, List, Optional, Sequence, Tuple


class FiniteField:
    """F_{p^n}, either a prime field or an extension of another FiniteField."""

    def __init__(self, p: int, parent: Optional["FiniteField"] = None,
                 modulus: Optional[Sequence] = None):
        if parent is None:
            self.p = p
            self.parent = None
            self.degree = 1  # over the parent
            self.order = p
            self.modulus = None
        else:
            # modulus: monic polynomial over parent given by its coefficient
            # list [c0, c1, ..., c_{n-1}] (the X^n coefficient is implied 1)
            self.p = parent.p
            self.parent = parent
            self.modulus = tuple(modulus)
            self.degree = len(modulus)
            self.order = parent.order ** self.degree
        self.zero = 0 if parent is None else tuple([parent.zero] * self.degree)
        self.one = 1 if parent is None else self._embed_one()
        self._sqrt_nonresidue = None

    # -- construction ------------------------------------------------------

    @staticmethod
    def prime(p: int) -> "FiniteField":
        return FiniteField(p)

    def extension(self, modulus: Sequence) -> "FiniteField":
        return FiniteField(self.p, self, modulus)

    def smallest_irreducible(self, degree: int) -> Tuple:
        """Smallest monic irreducible of given degree over self.

        Candidates X^n + c_{n-1}X^{n-1} + ... + c0 are ordered by the
        canonical integer encoding of (c0, c1, ..., c_{n-1}).
        """
        if degree == 1:
            # X - t for the smallest t making this usable; X itself works
            return (self.zero,)
        for idx in range(self.order ** degree):
            coeffs = []
            rem = idx
            for _ in range(degree):
                rem, digit = divmod(rem, self.order)
                coeffs.append(self.from_index(digit))
            if self.poly_is_irreducible(coeffs):
                return tuple(coeffs)
        raise ValueError("no irreducible polynomial found")  # pragma: no cover

    def _embed_one(self):
        parent = self.parent
        return tuple([parent.one] + [parent.zero] * (self.degree - 1))

    # -- element encoding ---------------------------------------------------

    def from_index(self, idx: int):
        """Element from its canonical index in [0, order)."""
        if self.parent is None:
            return idx % self.p
        coeffs = []
        for _ in range(self.degree):
            idx, digit = divmod(idx, self.parent.order)
            coeffs.append(self.parent.from_index(digit))
        return tuple(coeffs)

    def to_index(self, a) -> int:
        if self.parent is None:
            return a
        idx = 0
        for coeff in reversed(a):
            idx = idx * self.parent.order + self.parent.to_index(coeff)
        return idx

    def from_int(self, n: int):
        """Image of the rational integer n."""
        if self.parent is None:
            return n % self.p
        return tuple([self.parent.from_int(n)] + [self.parent.zero] * (self.degree - 1))

    def elements(self) -> Iterator:
        for idx in range(self.order):
            yield self.from_index(idx)

    def embed(self, a):
        """Embed an element of the parent field."""
        if self.parent is None:
            raise ValueError("prime field has no parent")
        return tuple([a] + [self.parent.zero] * (self.degree - 1))

    def constant_part(self, a):
        """Inverse of embed on parent-rational elements; None otherwise."""
        if any(c != self.parent.zero for c in a[1:]):
            return None
        return a[0]

    # -- arithmetic ----------------------------------------------------------

    def add(self, a, b):
        if self.parent is None:
            return (a + b) % self.p
        padd = self.parent.add
        return tuple(padd(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        if self.parent is None:
            return (a - b) % self.p
        psub = self.parent.sub
        return tuple(psub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        if self.parent is None:
            return (-a) % self.p
        pneg = self.parent.neg
        return tuple(pneg(x) for x in a)

    def mul(self, a, b):
        if self.parent is None:
            return (a * b) % self.p
        par = self.parent
        n = self.degree
        # schoolbook product
        prod = [par.zero] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai == par.zero:
                continue
            for j, bj in enumerate(b):
                if bj == par.zero:
                    continue
                prod[i + j] = par.add(prod[i + j], par.mul(ai, bj))
        # reduce by X^n = -modulus
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k]
            if c == par.zero:
                continue
            prod[k] = par.zero
            for j, mj in enumerate(self.modulus):
                prod[k - n + j] = par.sub(prod[k - n + j], par.mul(c, mj))
        return tuple(prod[:n])

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero in finite field")
        return self.pow(a, self.order - 2)

    def is_zero(self, a) -> bool:
        return a == self.zero

    # -- polynomial helpers (dense coefficient lists over self) --------------

    def _poly_trim(self, f: List) -> List:
        while f and f[-1] == self.zero:
            f.pop()
        return f

    def _poly_mulmod(self, f: List, g: List, mod: List) -> List:
        prod = [self.zero] * (len(f) + len(g) - 1) if f and g else []
        for i, fi in enumerate(f):
            if fi == self.zero:
                continue
            for j, gj in enumerate(g):
                prod[i + j] = self.add(prod[i + j], self.mul(fi, gj))
        return self._poly_divmod(prod, mod)[1]

    def _poly_divmod(self, f: List, g: List) -> Tuple[List, List]:
        f = list(f)
        dg = len(g) - 1
        lead_inv = self.inv(g[-1])
        quot = [self.zero] * max(0, len(f) - dg)
        while len(f) - 1 >= dg and f:
            self._poly_trim(f)
            if len(f) - 1 < dg or not f:
                break
            c = self.mul(f[-1], lead_inv)
            shift = len(f) - 1 - dg
            quot[shift] = c
            for j, gj in enumerate(g):
                f[shift + j] = self.sub(f[shift + j], self.mul(c, gj))
        return quot, self._poly_trim(f)

    def _poly_gcd(self, f: List, g: List) -> List:
        f, g = list(f), list(g)
        self._poly_trim(f)
        self._poly_trim(g)
        while g:
            f, g = g, self._poly_divmod(f, g)[1]
        if f:
            lead_inv = self.inv(f[-1])
            f = [self.mul(c, lead_inv) for c in f]
        return f

    def _poly_powmod_xq(self, e: int, mod: List) -> List:
        """X^(order^e) mod the given polynomial."""
        result = [self.zero, self.one]
        result = self._poly_divmod(result, mod)[1]
        for _ in range(e):
            result = self._poly_pow_order(result, mod)
        return result

    def _poly_pow_order(self, f: List, mod: List) -> List:
        result = [self.one]
        base = list(f)
        e = self.order
        while e:
            if e & 1:
                result = self._poly_mulmod(result, base, mod)
            base = self._poly_mulmod(base, base, mod)
            e >>= 1
        return result

    def poly_is_irreducible(self, coeffs: Sequence) -> bool:
        """Irreducibility of X^n + c_{n-1}X^{n-1} + ... + c0 over self."""
        n = len(coeffs)
        mod = list(coeffs) + [self.one]
        if n == 0:
            return False
        if coeffs[0] == self.zero and n > 1:
            return False
        # x^(q^n) == x mod f
        xq = self._poly_powmod_xq(n, mod)
        if self._poly_trim([self.sub(xq[i] if i < len(xq) else self.zero,
                                     self.one if i == 1 else self.zero)
                            for i in range(max(len(xq), 2))]):
            return False
        # gcd(x^(q^(n/l)) - x, f) == 1 for prime divisors l of n
        for ell in _prime_divisors(n):
            xql = self._poly_powmod_xq(n // ell, mod)
            diff = [self.sub(xql[i] if i < len(xql) else self.zero,
                             self.one if i == 1 else self.zero)
                    for i in range(max(len(xql), 2))]
            if len(self._poly_gcd(mod, diff)) != 1:
                return False
        return True

    # -- field-theoretic operations ------------------------------------------

    def is_square(self, a) -> bool:
        if a == self.zero:
            return True
        return self.pow(a, (self.order - 1) // 2) == self.one

    def sqrt(self, a):
        """A square root of a (Tonelli-Shanks); raises if a is not a square."""
        if a == self.zero:
            return self.zero
        if not self.is_square(a):
            raise ValueError("not a square")
        q = self.order
        if q % 4 == 3:
            return self.pow(a, (q + 1) // 4)
        # Tonelli-Shanks
        s, m = q - 1, 0
        while s % 2 == 0:
            s //= 2
            m += 1
        z = self._nonresidue()
        c = self.pow(z, s)
        t = self.pow(a, s)
        r = self.pow(a, (s + 1) // 2)
        while t != self.one:
            t2 = t
            i = 0
            while t2 != self.one:
                t2 = self.mul(t2, t2)
                i += 1
            b = self.pow(c, 1 << (m - i - 1))
            m = i
            c = self.mul(b, b)
            t = self.mul(t, c)
            r = self.mul(r, b)
        return r

    def _nonresidue(self):
        if self._sqrt_nonresidue is None:
            for a in self.elements():
                if a != self.zero and not self.is_square(a):
                    self._sqrt_nonresidue = a
                    break
        return self._sqrt_nonresidue

    def smallest_nonresidue(self):
        """First non-square by canonical index order."""
        return self._nonresidue()

    def frobenius(self, a, subfield_order: int):
        """x -> x^subfield_order, the Frobenius over the subfield of that order."""
        return self.pow(a, subfield_order)

    def trace_to_prime(self, a):
        """Trace down to F_p, returned as an int in [0, p)."""
        total = self.zero
        cur = a
        n = 0
        order = self.order
        while order > 1:
            order //= self.p
            n += 1
        for _ in range(n):
            total = self.add(total, cur)
            cur = self.pow(cur, self.p)
        val = self._as_prime_int(total)
        if val is None:
            raise ArithmeticError("trace did not land in the prime field")
        return val

    def _as_prime_int(self, a) -> Optional[int]:
        if self.parent is None:
            return a
        c = self.constant_part(a)
        if c is None:
            return None
        return self.parent._as_prime_int(c)

    def trace_map(self, a, subfield_order: int):
        """Trace of a down to the subfield with the given order (as self element)."""
        deg = 0
        order = 1
        while order < self.order:
            order *= subfield_order
            deg += 1
        if order != self.order:
            raise ValueError("subfield order does not divide the field order")
        total = self.zero
        cur = a
        for _ in range(deg):
            total = self.add(total, cur)
            cur = self.pow(cur, subfield_order)
        return total

    # -- F_p-linear structure -------------------------------------------------

    def abs_degree(self) -> int:
        n, order = 0, self.order
        while order > 1:
            order //= self.p
            n += 1
        return n

    def to_fp_vector(self, a) -> Tuple[int, ...]:
        """Coordinates over F_p in the canonical monomial basis."""
        if self.parent is None:
            return (a,)
        out: List[int] = []
        for coeff in a:
            out.extend(self.parent.to_fp_vector(coeff))
        return tuple(out)

    def from_fp_vector(self, vec: Sequence[int]):
        if self.parent is None:
            return vec[0] % self.p
        step = self.parent.abs_degree()
        return tuple(self.parent.from_fp_vector(vec[i * step:(i + 1) * step])
                     for i in range(self.degree))

    def __repr__(self):
        return f"FiniteField(order={self.order})"


def _prime_divisors(n: int) -> List[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out
