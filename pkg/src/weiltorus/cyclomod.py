"""Z[Gamma]-submodules of the group ring of a cyclic group of order f.

Classifies and manipulates the submodules M with torsion-free quotient
Z[Gamma]/M: the minimal ones are indexed by divisors d | f and have rank
phi(d); general ones are saturations of direct sums over divisor subsets.
All arithmetic is exact over Z.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from . import lattice

Poly = List[int]  # integer polynomial, coefficients low to high


# ---------------------------------------------------------------- polynomials

def poly_mul(a: Sequence[int], b: Sequence[int]) -> Poly:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_divexact(num: Sequence[int], den: Sequence[int]) -> Poly:
    """Exact division of integer polynomials; raises if not exact."""
    num = list(num)
    dn = len(den) - 1
    while den[dn] == 0:
        dn -= 1
    quot = [0] * (len(num) - dn)
    for k in range(len(num) - 1 - dn, -1, -1):
        c = num[k + dn]
        if c % den[dn] != 0:
            raise ArithmeticError("division is not exact")
        q = c // den[dn]
        quot[k] = q
        if q:
            for j in range(dn + 1):
                num[k + j] -= q * den[j]
    if any(num):
        raise ArithmeticError("division leaves a remainder")
    return quot


@lru_cache(maxsize=None)
def cyclotomic_polynomial(d: int) -> Tuple[int, ...]:
    """The d-th cyclotomic polynomial, exactly (coefficients low to high)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    num = [-1] + [0] * (d - 1) + [1]  # X^d - 1
    for e in range(1, d):
        if d % e == 0:
            num = poly_divexact(num, cyclotomic_polynomial(e))
    return tuple(num)


def divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def poly_P(f: int, d: int) -> Poly:
    """(X^f - 1)/Phi_d for d | f."""
    if f % d != 0:
        raise ValueError(f"{d} does not divide {f}")
    xf = [-1] + [0] * (f - 1) + [1]
    return poly_divexact(xf, cyclotomic_polynomial(d))


def poly_Q(d: int) -> Poly:
    """(X^d - 1)/Phi_d."""
    xd = [-1] + [0] * (d - 1) + [1]
    return poly_divexact(xd, cyclotomic_polynomial(d))


def poly_H(f: int, d: int) -> Poly:
    """(X^f - 1)/(X^d - 1) for d | f."""
    if f % d != 0:
        raise ValueError(f"{d} does not divide {f}")
    xf = [-1] + [0] * (f - 1) + [1]
    xd = [-1] + [0] * (d - 1) + [1]
    return poly_divexact(xf, xd)


def euler_phi(n: int) -> int:
    out = n
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            out -= out // d
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out -= out // m
    return out


# --------------------------------------------------------------- group ring

class GroupRingElement:
    """Element of Z[Gamma], Gamma cyclic of order f with generator sigma."""

    __slots__ = ("f", "coeffs")

    def __init__(self, f: int, coeffs: Sequence[int]):
        if len(coeffs) > f:
            folded = [0] * f
            for i, c in enumerate(coeffs):
                folded[i % f] += c
            coeffs = folded
        self.f = f
        self.coeffs = tuple(list(coeffs) + [0] * (f - len(coeffs)))

    @classmethod
    def sigma_power(cls, f: int, l: int) -> "GroupRingElement":
        vec = [0] * f
        vec[l % f] = 1
        return cls(f, vec)

    @classmethod
    def from_poly(cls, f: int, poly: Sequence[int]) -> "GroupRingElement":
        return cls(f, poly)

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(self.f, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(self.f, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement(self.f, [c * other for c in self.coeffs])
        out = [0] * self.f
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[(i + j) % self.f] += a * b
        return GroupRingElement(self.f, out)

    __rmul__ = __mul__

    def shifted(self, l: int = 1) -> "GroupRingElement":
        """sigma^l * self (cyclic shift)."""
        f = self.f
        out = [0] * f
        for i, c in enumerate(self.coeffs):
            out[(i + l) % f] = c
        return GroupRingElement(f, out)

    def augmentation(self) -> int:
        """Sum of coefficients; chi(-1) = (-1)^augmentation in the torus picture."""
        return sum(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.coeffs == other.coeffs \
            and self.f == other.f

    def __hash__(self):
        return hash((self.f, self.coeffs))

    def __repr__(self):
        return f"GroupRingElement({list(self.coeffs)})"


# ---------------------------------------------------------------- submodules

class Submodule:
    """A sigma-stable Z-submodule of Z[Gamma], in canonical Hermite form."""

    def __init__(self, f: int, generators: Iterable[Sequence[int]],
                 check_sigma_stable: bool = True):
        self.f = f
        cols = [list(g) for g in generators]
        for c in cols:
            if len(c) != f:
                raise ValueError("generator length must equal f")
        self._hnf_rows = lattice.row_hnf(cols)  # canonical basis as rows
        self.rank = len(self._hnf_rows)
        if check_sigma_stable and not self.is_sigma_stable():
            raise ValueError("submodule is not sigma-stable")

    @property
    def basis(self) -> List[List[int]]:
        """Canonical basis vectors (rows of the column-style HNF)."""
        return [list(r) for r in self._hnf_rows]

    def key(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(r) for r in self._hnf_rows)

    def is_sigma_stable(self) -> bool:
        for row in self._hnf_rows:
            shifted = [row[-1]] + list(row[:-1])
            if not self.contains(shifted):
                return False
        return True

    def contains(self, vec: Sequence[int]) -> bool:
        aug = lattice.row_hnf(self._hnf_rows + [list(vec)])
        return aug == self._hnf_rows

    def contains_module(self, other: "Submodule") -> bool:
        return all(self.contains(row) for row in other._hnf_rows)

    def quotient_torsion_free(self) -> bool:
        if not self._hnf_rows:
            return True
        return all(d == 1 for d in lattice.smith_normal_form(
            [list(r) for r in self._hnf_rows]))

    def saturate(self) -> "Submodule":
        """Smallest submodule containing self with torsion-free quotient."""
        if not self._hnf_rows:
            return self
        sat = lattice.saturation(self._hnf_rows)
        return Submodule(self.f, sat, check_sigma_stable=False)

    def intersection(self, other: "Submodule") -> "Submodule":
        """Exact intersection of the two lattices."""
        a = self._hnf_rows
        b = other._hnf_rows
        if not a or not b:
            return Submodule(self.f, [], check_sigma_stable=False)
        # solve x*A = y*B: kernel of stacked [A; -B] acting by rows
        stacked = [list(r) for r in a] + [[-x for x in r] for r in b]
        ker = lattice.kernel(lattice.transpose(stacked))
        vecs = []
        for combo in ker:
            vec = [0] * self.f
            for i, c in enumerate(combo[:len(a)]):
                for j in range(self.f):
                    vec[j] += c * a[i][j]
            vecs.append(vec)
        return Submodule(self.f, vecs, check_sigma_stable=False)

    def torsion_exponent_over(self, sub: "Submodule") -> int:
        """Exponent of self/sub for sub ⊆ self of equal rank (lcm of divisors)."""
        if not sub.contains_module(sub):
            raise ValueError("not a submodule")
        # express sub basis in terms of self basis and take SNF
        coords = []
        for row in sub._hnf_rows:
            coords.append(_solve_in_basis(self._hnf_rows, row))
        divs = lattice.smith_normal_form(coords)
        out = 1
        for d in divs:
            out = out * d // gcd(out, d)
        return out

    def __eq__(self, other):
        return isinstance(other, Submodule) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Submodule(f={self.f}, rank={self.rank})"


def _solve_in_basis(basis_rows: List[List[int]], vec: Sequence[int]) -> List[int]:
    """Integer coordinates of vec in the given HNF basis rows."""
    vec = list(vec)
    coords = [0] * len(basis_rows)
    pivots = []
    for row in basis_rows:
        j = next(i for i, x in enumerate(row) if x != 0)
        pivots.append(j)
    for i, row in enumerate(basis_rows):
        j = pivots[i]
        if vec[j] % row[j] != 0:
            raise ValueError("vector not in the lattice")
        c = vec[j] // row[j]
        coords[i] = c
        if c:
            vec = [x - c * y for x, y in zip(vec, row)]
    if any(vec):
        raise ValueError("vector not in the lattice")
    return coords


def basis_Md(f: int, d: int) -> Submodule:
    """M_d: the minimal submodule with torsion-free quotient attached to d | f.

    Basis: the shifts by sigma^l, 0 <= l < phi(d), of P_{f,d}(sigma).
    """
    if f % d != 0:
        raise ValueError(f"{d} does not divide {f}")
    base = GroupRingElement.from_poly(f, poly_P(f, d))
    gens = [list(base.shifted(l).coeffs) for l in range(euler_phi(d))]
    return Submodule(f, gens)


def module_for_divisor_set(f: int, dset: Iterable[int]) -> Tuple[Submodule, Submodule]:
    """(M_dset, saturation M̄_dset) for a set of divisors of f."""
    dset = sorted(set(dset))
    gens: List[List[int]] = []
    for d in dset:
        gens.extend(basis_Md(f, d).basis)
    m = Submodule(f, gens, check_sigma_stable=False)
    return m, m.saturate()


def classify_minimal(f: int, verify: bool = False) -> Dict[int, Submodule]:
    """{d: M_d} over divisors d | f; the minimal torsion-free-quotient submodules.

    With verify=True, cross-checks against the independent brute-force
    enumeration (rational sigma-invariant subspaces intersected with Z^f).
    """
    out = {d: basis_Md(f, d) for d in divisors(f)}
    if verify:
        from . import oracle  # local import; oracle depends on this module
        report = oracle.enumerate_submodules(f)
        if not report.matches:
            raise AssertionError(f"classification mismatch at f={f}: {report}")
    return out


def minimal_vanishing_sum_parity(f: int, dset: Iterable[int]) -> int:
    """gcd of augmentations over the saturated module of a divisor set.

    The subtorus cut out by M̄_dset contains -1 iff this gcd is even, and
    the mu_{q+1}-intersection index divides via the same gcd.
    """
    _, sat = module_for_divisor_set(f, dset)
    g = 0
    for row in sat.basis:
        g = gcd(g, sum(row))
    return abs(g)
