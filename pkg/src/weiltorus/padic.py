"""Exact, precision-tracked arithmetic in towers of local fields over Q_p.

A tower is a chain base -> (unramified | eisenstein)* with p odd; eisenstein
steps are tame, with defining polynomial X^e - twist*pi_parent (twist a unit,
default 1, so pi_top^E = p exactly in the untwisted towers).  An integral
element is a vector of integers mod p^M over the monomial basis
{unramified-generator monomials} x {pi^j : j < E}; a global pi-shift handles
negative valuations.  Valuations read off the vector directly and every
operation tracks the guaranteed absolute precision of its result, so a digit
is never reported unless it is warranted.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .ffield import FiniteField

INF = float("inf")

DEFAULT_PRECISION = 40
_PREC_GUARD = 8


class PrecisionError(ArithmeticError):
    """A decision or operation needed digits beyond the known precision."""


class ValuationBound:
    """Marker for 'valuation >= n': the element is zero to its precision."""

    __slots__ = ("at_least",)

    def __init__(self, at_least: int):
        self.at_least = at_least

    def __repr__(self):
        return f"ValuationBound(>={self.at_least})"

    def __eq__(self, other):
        return isinstance(other, ValuationBound) and other.at_least == self.at_least


def _vp(n: int, p: int, cap: int) -> int:
    if n == 0:
        return cap
    v = 0
    while v < cap and n % p == 0:
        n //= p
        v += 1
    return v


class _Gen:
    """One unramified generator; reduction gives g^degree over lower monomials."""

    __slots__ = ("degree", "stride", "reduction")

    def __init__(self, degree: int, stride: int, reduction):
        self.degree = degree
        self.stride = stride
        self.reduction = reduction  # list of {full-exponent-tuple: int}


class LocalField:
    """A member of a tower k ⊆ k' ⊆ k'' of local fields over Q_p (p odd)."""

    # --------------------------------------------------------------- builders

    @classmethod
    def _blank(cls) -> "LocalField":
        return object.__new__(cls)

    @classmethod
    def base(cls, p: int, q: Optional[int] = None,
             precision: int = DEFAULT_PRECISION) -> "LocalField":
        """The base field k: Q_p or its unramified extension with residue size q."""
        if p < 3 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"p={p} must be an odd prime")
        q = q or p
        m, qq = 0, q
        while qq > 1 and qq % p == 0:
            qq //= p
            m += 1
        if qq != 1 or m < 1:
            raise ValueError(f"q={q} is not a power of p={p}")
        self = cls._blank()
        self.p = p
        self.parent = None
        self.role = "base"
        self.rel_degree = 1
        self.E = 1
        self.e_over_base = 1
        self.f_over_base = 1
        self.prec_digits = precision
        self.M = precision + _PREC_GUARD
        self.pM = p ** self.M
        self.twist = None
        if m == 1:
            self.res = FiniteField.prime(p)
            self.gens: List[_Gen] = []
            self.defining = None
        else:
            fp = FiniteField.prime(p)
            modulus = fp.smallest_irreducible(m)
            self.res = fp.extension(modulus)
            reduction = [{(0,): (-c) % p} if c else {} for c in modulus]
            self.gens = [_Gen(m, 1, reduction)]
            self.defining = modulus
        self.q = self.res.order
        self._finish_setup()
        return self

    def unramified_extension(self, degree: int,
                             residue_modulus: Optional[Sequence] = None) -> "LocalField":
        """Unramified extension of the given degree.

        The defining polynomial is the digit-0 lift of the lexicographically
        smallest monic irreducible over the residue field unless an explicit
        residue modulus (coefficient tuple, X^degree implied) is supplied.
        """
        if degree < 2:
            raise ValueError("extension degree must be >= 2")
        parent = self
        if residue_modulus is None:
            residue_modulus = parent.res.smallest_irreducible(degree)
        else:
            residue_modulus = tuple(residue_modulus)
            if len(residue_modulus) != degree:
                raise ValueError("modulus length must equal the degree")
            if not parent.res.poly_is_irreducible(residue_modulus):
                raise ValueError("residue modulus is not irreducible")
        child = LocalField._blank()
        child.p = parent.p
        child.parent = parent
        child.role = "unramified"
        child.rel_degree = degree
        child.E = parent.E
        child.e_over_base = parent.e_over_base
        child.f_over_base = parent.f_over_base * degree
        child.prec_digits = parent.prec_digits
        child.M = parent.M
        child.pM = parent.pM
        child.res = parent.res.extension(residue_modulus)
        child.q = child.res.order
        child.defining = residue_modulus
        child.twist = None
        # old generators keep their reductions, with keys padded for the new gen
        child.gens = [_Gen(g.degree, g.stride,
                           [{k + (0,): v for k, v in cp.items()} for cp in g.reduction])
                      for g in parent.gens]
        new_reduction = []
        for c in residue_modulus:
            neg = parent.res.neg(c)
            poly = parent._res_to_poly(neg)
            new_reduction.append({k + (0,): v for k, v in poly.items()})
        child.gens.append(_Gen(degree, parent.m, new_reduction))
        child._finish_setup()
        return child

    def eisenstein_extension(self, e: int, twist=None) -> "LocalField":
        """Tame totally ramified extension with X^e - twist*pi_parent, twist a unit.

        twist is a residue-field element of the parent (default 1); gcd(e,p)=1.
        """
        parent = self
        if e < 2:
            raise ValueError("eisenstein degree must be >= 2")
        if e % parent.p == 0:
            raise ValueError(f"wild ramification unsupported: p={parent.p} divides e={e}")
        if twist is not None and parent.res.is_zero(twist):
            raise ValueError("twist must be a unit")
        child = LocalField._blank()
        child.p = parent.p
        child.parent = parent
        child.role = "eisenstein"
        child.rel_degree = e
        child.E = parent.E * e
        child.e_over_base = parent.e_over_base * e
        child.f_over_base = parent.f_over_base
        child.prec_digits = parent.prec_digits * e
        child.M = parent.M
        child.pM = parent.pM
        child.res = parent.res
        child.q = parent.q
        child.gens = list(parent.gens)
        child.defining = ("eisenstein", e, twist)
        child.twist = twist
        child._finish_setup()
        return child

    # -------------------------------------------------------------- internals

    def _finish_setup(self):
        self.m = 1
        for g in self.gens:
            self.m *= g.degree
        self.n = self.E * self.m
        self.max_prec = self.E * (self.M - 2)
        self._monos = self._mono_tuples()
        self._mono_table = self._build_mono_table()
        self.U_vec = None
        self.U_inv_vec = None
        if self._has_twist():
            self.U_vec = self._twist_unit_vector()
            self.U_inv_vec = self._vec_unit_inverse(self.U_vec)
        self._frob_cache: Dict[int, List[List[int]]] = {}
        self._teich_cache: Dict[int, "FieldElement"] = {}

    def _has_twist(self) -> bool:
        f = self
        while f is not None:
            if f.role == "eisenstein" and f.twist is not None:
                return True
            f = f.parent
        return False

    def _mono_tuples(self) -> List[Tuple[int, ...]]:
        k = len(self.gens)
        out = []
        for idx in range(self.m):
            exps = []
            for g in self.gens:
                exps.append((idx // g.stride) % g.degree)
            out.append(tuple(exps))
        return out

    def _mono_index(self, exps: Tuple[int, ...]) -> int:
        return sum(e * g.stride for e, g in zip(exps, self.gens))

    def _build_mono_table(self):
        monos = self._monos
        table = [[None] * self.m for _ in range(self.m)]
        for i in range(self.m):
            for j in range(i, self.m):
                raw = {tuple(x + y for x, y in zip(monos[i], monos[j])): 1}
                if not self.gens:
                    raw = {(): 1}
                red = self._reduce_poly(raw)
                entry = tuple((self._mono_index(k), v) for k, v in red.items() if v)
                table[i][j] = entry
                table[j][i] = entry
        return table

    def _reduce_poly(self, poly: Dict[Tuple[int, ...], int]) -> Dict[Tuple[int, ...], int]:
        gens = self.gens
        work = dict(poly)
        changed = True
        while changed:
            changed = False
            for key in list(work.keys()):
                coeff = work.get(key, 0)
                if coeff == 0:
                    work.pop(key, None)
                    continue
                for gi, g in enumerate(gens):
                    if key[gi] >= g.degree:
                        changed = True
                        work.pop(key)
                        rest = list(key)
                        rest[gi] -= g.degree
                        for expo, cpoly in enumerate(g.reduction):
                            for sub_key, c in cpoly.items():
                                if not c:
                                    continue
                                new = list(rest)
                                new[gi] += expo
                                for si, se in enumerate(sub_key):
                                    new[si] += se
                                new_t = tuple(new)
                                work[new_t] = work.get(new_t, 0) + coeff * c
                        break
                if changed:
                    break
        return work

    def _res_to_poly(self, a) -> Dict[Tuple[int, ...], int]:
        vec = self.res.to_fp_vector(a)
        return {self._monos[i]: int(v) for i, v in enumerate(vec) if v}

    def _res_to_vec(self, a) -> List[int]:
        return [int(v) for v in self.res.to_fp_vector(a)]

    def _vec_to_res(self, vec: Sequence[int]):
        return self.res.from_fp_vector([v % self.p for v in vec])

    def _vecmul(self, a: Sequence[int], b: Sequence[int]) -> List[int]:
        out = [0] * self.m
        table = self._mono_table
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if not bj:
                    continue
                prod = ai * bj
                for w, c in table[i][j]:
                    out[w] += prod * c
        pM = self.pM
        return [x % pM for x in out]

    def _vec_unit_inverse(self, a: Sequence[int]) -> List[int]:
        res_inv = self.res.inv(self._vec_to_res(a))
        z = self._res_to_vec(res_inv)
        one = [0] * self.m
        one[0] = 1
        for _ in range(self.M.bit_length() + 2):
            az = self._vecmul(a, z)
            err = [(o - t) % self.pM for o, t in zip(one, az)]
            if not any(err):
                break
            corr = self._vecmul(z, err)
            z = [(zi + ci) % self.pM for zi, ci in zip(z, corr)]
        return z

    def _twist_unit_vector(self) -> List[int]:
        # pi_top^E = U * p with U_child = twist^{E_parent} * U_parent per
        # eisenstein step, accumulated bottom-up
        chain = []
        f = self
        while f is not None:
            chain.append(f)
            f = f.parent
        chain.reverse()
        one = [0] * self.m
        one[0] = 1
        u = one
        for field in chain:
            if field.role == "eisenstein" and field.twist is not None:
                tw_res = self._embed_residue_from(field.parent.res, field.twist)
                tw = self._res_to_vec(tw_res)
                for _ in range(field.parent.E):
                    u = self._vecmul(u, tw)
        return u

    def _embed_residue_from(self, from_res: FiniteField, a):
        """Embed a residue element of an ancestor residue field into self.res."""
        chain = []
        res = self.res
        while res is not from_res:
            chain.append(res)
            res = res.parent
            if res is None:
                raise ValueError("residue field is not in the tower")
        for res_field in reversed(chain):
            a = res_field.embed(a)
        return a

    # ------------------------------------------------------------ public info

    @property
    def residue_field(self) -> FiniteField:
        return self.res

    def uniformizer(self) -> "FieldElement":
        vec = [0] * self.n
        if self.E == 1:
            vec[0] = self.p
        else:
            vec[self.m] = 1
        return FieldElement(self, vec, 0, self.max_prec)

    def zero(self) -> "FieldElement":
        return FieldElement(self, [0] * self.n, 0, INF, exact_zero=True)

    def one(self) -> "FieldElement":
        return self.from_int(1)

    def from_int(self, value: int) -> "FieldElement":
        if value == 0:
            return self.zero()
        vec = [0] * self.n
        vec[0] = value % self.pM
        return FieldElement(self, vec, 0, self.max_prec)

    def from_fraction(self, value: Fraction) -> "FieldElement":
        return self.from_int(value.numerator) / self.from_int(value.denominator)

    def from_residue(self, a) -> "FieldElement":
        """Digit-0 lift of a residue-field element."""
        if self.res.is_zero(a):
            return self.zero()
        vec = [0] * self.n
        for i, c in enumerate(self._res_to_vec(a)):
            vec[i] = c
        return FieldElement(self, vec, 0, self.max_prec)

    def from_digits(self, digits: Sequence, valuation: int = 0) -> "FieldElement":
        """Element sum_i digits[i] * pi^(valuation+i), digits in the residue field."""
        acc = self.zero()
        for i, d in enumerate(digits):
            acc = acc + self.from_residue(d).pishift(i)
        acc = acc.pishift(valuation)
        return acc.with_precision(valuation + len(digits))

    def is_ancestor_of(self, other: "LocalField") -> bool:
        f = other
        while f is not None:
            if f is self:
                return True
            f = f.parent
        return False

    def embed(self, x: "FieldElement") -> "FieldElement":
        if x.field is self:
            return x
        if not x.field.is_ancestor_of(self):
            raise ValueError("element's field is not an ancestor of this field")
        chain = []
        f = self
        while f is not x.field:
            chain.append(f)
            f = f.parent
        for field in reversed(chain):
            x = field._embed_step(x)
        return x

    def _embed_step(self, x: "FieldElement") -> "FieldElement":
        par = self.parent
        e_rel = self.E // par.E
        vec = [0] * self.n
        for j in range(par.E):
            base = j * par.m
            for u in range(par.m):
                c = x.vec[base + u]
                if c:
                    vec[(j * e_rel) * self.m + u] = c
        prec = INF if x.prec is INF else x.prec * e_rel
        return FieldElement(self, vec, x.shift * e_rel, prec, exact_zero=x.exact_zero)

    def relative_basis(self, ancestor: "LocalField") -> List["FieldElement"]:
        """Basis over an ancestor: new-generator monomials times pi powers."""
        if not ancestor.is_ancestor_of(self):
            raise ValueError("not an ancestor")
        e_rel = self.E // ancestor.E
        new_monos = self.m // ancestor.m
        basis = []
        for t in range(e_rel):
            for mu in range(new_monos):
                vec = [0] * self.n
                vec[t * self.m + mu * ancestor.m] = 1
                basis.append(FieldElement(self, vec, 0, self.max_prec))
        return basis

    def coords_over(self, x: "FieldElement", ancestor: "LocalField") -> List["FieldElement"]:
        """Coordinates of x over an ancestor, in relative_basis order.

        Handles arbitrary pi-shifts; single-step towers only need one hop so
        the chain is walked step by step.
        """
        if x.field is not self:
            x = self.embed(x)
        if ancestor is self:
            return [x]
        if ancestor is not self.parent:
            raise ValueError("coords_over is defined for a single tower step; "
                             "walk the tower explicitly for longer descents")
        return self._step_coords(x)

    def _step_coords(self, x: "FieldElement") -> List["FieldElement"]:
        par = self.parent
        e_rel = self.E // par.E
        new_monos = self.m // par.m
        s = x.shift
        # raw coordinates of the vector part, indexed by (t, mu)
        raw = [[None] * new_monos for _ in range(e_rel)]
        for t in range(e_rel):
            for mu in range(new_monos):
                vec = [0] * par.n
                for ja in range(par.E):
                    for ua in range(par.m):
                        vec[ja * par.m + ua] = x.vec[(ja * e_rel + t) * self.m
                                                     + mu * par.m + ua]
                prec = INF if x.prec is INF else \
                    max(-10 ** 9, (x.prec - x.shift - t + e_rel - 1) // e_rel)
                raw[t][mu] = FieldElement(par, vec, 0, prec)
        if s == 0:
            return [raw[t][mu] for t in range(e_rel) for mu in range(new_monos)]
        if e_rel == 1:
            return [raw[0][mu].pishift(s) for mu in range(new_monos)]
        # eisenstein step: pi_child^(t+s) = (twist*pi_par)^q * pi_child^r
        out = [[None] * new_monos for _ in range(e_rel)]
        tw = par.from_residue(self.twist) if self.twist is not None else par.one()
        for t in range(e_rel):
            qq, r = divmod(t + s, e_rel)
            for mu in range(new_monos):
                c = raw[t][mu]
                if qq != 0:
                    c = c * (tw ** qq) if qq > 0 else c / (tw ** (-qq))
                    c = c.pishift(qq)
                out[r][mu] = c if out[r][mu] is None else out[r][mu] + c
        return [out[t][mu] if out[t][mu] is not None else par.zero()
                for t in range(e_rel) for mu in range(new_monos)]

    def degree_over(self, ancestor: "LocalField") -> int:
        return (self.E // ancestor.E) * (self.m // ancestor.m)

    # -------------------------------------------------------- frobenius lifts

    def frobenius_lift(self, x: "FieldElement", power: int = 1) -> "FieldElement":
        """Lift of the residue Frobenius of the top unramified step.

        Fixes everything below that step and the (later) eisenstein
        uniformizer, matching the Galois-action convention used throughout.
        """
        mat = self._frobenius_matrix(power)
        return self._apply_mono_matrix(x, mat)

    def _frobenius_matrix(self, power: int) -> List[List[int]]:
        if not self.gens:
            raise ValueError("no unramified generator to act on")
        g = self.gens[-1]
        power %= g.degree
        if power in self._frob_cache:
            return self._frob_cache[power]
        if power == 0:
            mat = [[1 if i == j else 0 for j in range(self.m)] for i in range(self.m)]
        elif power == 1:
            mat = self._frobenius_gen_matrix()
        else:
            base = self._frobenius_matrix(1)
            mat = self._frobenius_matrix(power - 1)
            mat = _matmul_mod(base, mat, self.pM)
        self._frob_cache[power] = mat
        return mat

    def _frobenius_gen_matrix(self) -> List[List[int]]:
        g = self.gens[-1]
        # residue order of the tower below the top generator
        sub_order = _integer_root(self.q, g.degree)
        gen_vec = [0] * self.n
        gen_vec[g.stride] = 1
        gen = FieldElement(self, gen_vec, 0, self.max_prec)
        img = gen ** sub_order
        # Newton-refine img to the exact root of H(X) = X^deg - sum red[j] X^j
        red_elts = []
        for cpoly in g.reduction:
            cvec = [0] * self.n
            for k, v in cpoly.items():
                cvec[self._mono_index(k)] = v % self.pM
            red_elts.append(FieldElement(self, cvec, 0, self.max_prec))
        for _ in range(self.M.bit_length() + 2):
            h = img ** g.degree
            dh = self.from_int(g.degree) * img ** (g.degree - 1)
            for expo, celt in enumerate(red_elts):
                h = h - celt * img ** expo
                if expo >= 1:
                    dh = dh - self.from_int(expo) * celt * img ** (expo - 1)
            if h.is_exactly_zero():
                break
            img = img - h / dh
        gi = len(self.gens) - 1
        img_pows = [self.one()]
        for _ in range(g.degree - 1):
            img_pows.append(img_pows[-1] * img)
        cols = []
        for mono in self._monos:
            a = mono[gi]
            rest_mono = list(mono)
            rest_mono[gi] = 0
            rest_vec = [0] * self.n
            rest_vec[self._mono_index(tuple(rest_mono))] = 1
            rest = FieldElement(self, rest_vec, 0, self.max_prec)
            image = rest * img_pows[a]
            cols.append([image.vec[u] for u in range(self.m)])
        return [[cols[src][dst] for src in range(self.m)] for dst in range(self.m)]

    def _apply_mono_matrix(self, x: "FieldElement", mat: List[List[int]]) -> "FieldElement":
        out = [0] * self.n
        pM = self.pM
        for j in range(self.E):
            seg = x.vec[j * self.m:(j + 1) * self.m]
            if not any(seg):
                continue
            base = j * self.m
            for dst in range(self.m):
                row = mat[dst]
                acc = 0
                for src in range(self.m):
                    c = seg[src]
                    if c:
                        acc += row[src] * c
                out[base + dst] = acc % pM
        return FieldElement(self, out, x.shift, x.prec, exact_zero=x.exact_zero)

    # ---------------------------------------------------------------- lifting

    def teichmuller(self, a) -> "FieldElement":
        """Teichmueller lift: the root of X^q = X with residue a."""
        if self.res.is_zero(a):
            return self.zero()
        idx = self.res.to_index(a)
        if idx in self._teich_cache:
            return self._teich_cache[idx]
        x = self.from_residue(a)
        # x_{n+1} = x_n^q converges to the Teichmueller representative
        for _ in range(self.M + 1):
            x = x ** self.q
        self._teich_cache[idx] = x
        return x

    def __repr__(self):
        return (f"LocalField(p={self.p}, q={self.q}, e/base={self.e_over_base}, "
                f"f/base={self.f_over_base}, role={self.role})")


def _integer_root(q: int, d: int) -> int:
    lo, hi = 1, q
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** d < q:
            lo = mid + 1
        else:
            hi = mid
    if lo ** d != q:
        raise ValueError("field order is not a perfect power of the expected degree")
    return lo


def _matmul_mod(a: List[List[int]], b: List[List[int]], mod: int) -> List[List[int]]:
    n = len(a)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for k in range(n):
            c = ai[k]
            if c:
                bk = b[k]
                oi = out[i]
                for j in range(n):
                    oi[j] += c * bk[j]
        out[i] = [x % mod for x in out[i]]
    return out


class FieldElement:
    """pi-adic element: value = pi^shift * (integral coefficient vector).

    `prec` is the absolute precision: the element is known modulo pi^prec.
    """

    __slots__ = ("field", "vec", "shift", "prec", "exact_zero", "_val")

    def __init__(self, field: LocalField, vec: List[int], shift: int, prec,
                 exact_zero: bool = False):
        if shift < 0 and not exact_zero and any(vec):
            # fold pi powers out of the vector to recover precision headroom
            v0 = _vec_val(field, vec)
            k = min(v0, -shift)
            for _ in range(k):
                vec = _div_by_pi_vec(field, vec)
            shift += k
        self.field = field
        self.vec = vec
        self.shift = shift
        if prec is INF and not exact_zero:
            prec = field.max_prec + shift
        self.prec = prec if prec is INF else min(prec, field.max_prec + shift)
        self.exact_zero = exact_zero
        self._val = None

    # ------------------------------------------------------------- valuation

    def _structural_val(self):
        if self._val is None:
            self._val = _vec_val(self.field, self.vec) + self.shift
        return self._val

    def valuation(self):
        """v(x): int, INF only for the exact zero, ValuationBound if truncated."""
        if self.exact_zero:
            return INF
        v = self._structural_val()
        if v >= self.prec:
            return ValuationBound(self.prec)
        return v

    def valuation_exact(self) -> int:
        v = self.valuation()
        if v is INF:
            raise PrecisionError("exact zero has no finite valuation")
        if isinstance(v, ValuationBound):
            raise PrecisionError(f"element is zero to precision {v.at_least}")
        return v

    def is_exactly_zero(self) -> bool:
        return self.exact_zero

    def is_zero_to_precision(self) -> bool:
        return self.exact_zero or self._structural_val() >= self.prec

    def is_zero_mod(self, k: int) -> bool:
        """Whether v(x) >= k; raises if fewer than k digits are known."""
        if self.exact_zero:
            return True
        if self.prec < k:
            raise PrecisionError(f"need precision {k}, have {self.prec}")
        return self._structural_val() >= k

    def is_unit(self) -> bool:
        return self.valuation_exact() == 0

    # ------------------------------------------------------------ arithmetic

    def pishift(self, k: int) -> "FieldElement":
        """x * pi^k, exactly."""
        if self.exact_zero or k == 0:
            return self
        return FieldElement(self.field, self.vec, self.shift + k,
                            self.prec + k if self.prec is not INF else INF,
                            exact_zero=self.exact_zero)

    def _materialize(self, target_shift: int) -> "FieldElement":
        """Rewrite with the given (smaller) shift, moving pi powers into the vector."""
        k = self.shift - target_shift
        if k == 0:
            return self
        if k < 0:
            raise ValueError("can only materialize toward smaller shifts")
        f = self.field
        vec = list(self.vec)
        for _ in range(k):
            vec = _mul_by_pi(f, vec)
        return FieldElement(f, vec, target_shift, self.prec, exact_zero=self.exact_zero)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is self.field:
                return other
            if other.field.is_ancestor_of(self.field):
                return self.field.embed(other)
            raise ValueError("elements of incompatible fields")
        if isinstance(other, int):
            return self.field.from_int(other)
        if isinstance(other, Fraction):
            return self.field.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.exact_zero:
            return other
        if other.exact_zero:
            return self
        s = min(self.shift, other.shift)
        a = self._materialize(s)
        b = other._materialize(s)
        f = self.field
        pM = f.pM
        vec = [(x + y) % pM for x, y in zip(a.vec, b.vec)]
        return FieldElement(f, vec, s, min(a.prec, b.prec))

    def __neg__(self):
        if self.exact_zero:
            return self
        f = self.field
        return FieldElement(f, [(-x) % f.pM for x in self.vec], self.shift, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        f = self.field
        if self.exact_zero or other.exact_zero:
            return f.zero()
        va = min(self._structural_val(), self.prec)
        vb = min(other._structural_val(), other.prec)
        prec = min(self.prec + vb, other.prec + va)
        vec = _vec_full_mul(f, self.vec, other.vec)
        return FieldElement(f, vec, self.shift + other.shift, prec)

    def __pow__(self, e: int):
        f = self.field
        if e == 0:
            return f.one()
        if e < 0:
            return (f.one() / self) ** (-e)
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.exact_zero:
            raise ZeroDivisionError("division by exact zero")
        if self.exact_zero:
            return self.field.zero()
        return self * _invert(self.field, other)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return (self - other).is_zero_to_precision()

    __hash__ = None

    # ------------------------------------------------------------ extraction

    def unit_part(self) -> "FieldElement":
        """x * pi^(-v(x)), a unit."""
        return self.pishift(-self.valuation_exact())

    def residue(self):
        """Image in the residue field; requires v(x) >= 0."""
        f = self.field
        if self.exact_zero:
            return f.res.zero
        if self.prec < 1:
            raise PrecisionError("no digits known")
        v = self._structural_val()
        if v < 0:
            raise ValueError("negative valuation has no residue")
        if v > 0:
            return f.res.zero
        x = self._materialize(0) if self.shift > 0 else self
        if self.shift < 0:
            x = _exact_divide_pi(f, self, -self.shift)
        return f._vec_to_res(x.vec[0:f.m])

    def digits(self, count: Optional[int] = None) -> List:
        """Digits d_i (residue elements) with x = pi^v(x) * sum_i d_i pi^i, d_0 != 0."""
        v = self.valuation_exact()
        f = self.field
        avail = self.prec - v if self.prec is not INF else f.prec_digits
        count = int(min(count if count is not None else avail, avail))
        unit = self.pishift(-v)
        if unit.shift > 0:
            unit = unit._materialize(0)
        elif unit.shift < 0:
            unit = _exact_divide_pi(f, unit, -unit.shift)
        vec = list(unit.vec)
        out = []
        for _ in range(max(count, 0)):
            d = f._vec_to_res(vec[0:f.m])
            out.append(d)
            for i, c in enumerate(f._res_to_vec(d)):
                vec[i] = (vec[i] - c) % f.pM
            vec = _div_by_pi_vec(f, vec)
        return out

    def with_precision(self, prec) -> "FieldElement":
        if self.exact_zero:
            return self
        return FieldElement(self.field, self.vec, self.shift, min(prec, self.prec))

    def __repr__(self):
        if self.exact_zero:
            return "FieldElement(0)"
        v = self.valuation()
        if isinstance(v, ValuationBound):
            return f"FieldElement(O(pi^{v.at_least}))"
        show = self.digits(min(6, self.prec - v))
        idx = [self.field.res.to_index(d) for d in show]
        return f"FieldElement(pi^{v}*{idx}, prec={self.prec})"


def _vec_val(f: LocalField, vec: List[int]) -> int:
    best = f.E * f.M
    for j in range(f.E):
        base = j * f.m
        for u in range(f.m):
            c = vec[base + u]
            if c:
                v = f.E * _vp(c, f.p, f.M) + j
                if v < best:
                    best = v
        if best <= j:
            break
    return best


def _mul_by_pi(f: LocalField, vec: List[int]) -> List[int]:
    m, E, pM = f.m, f.E, f.pM
    if E == 1:
        out = [(c * f.p) % pM for c in vec]
        if f.U_inv_vec is not None:
            out = f._vecmul(out, f.U_inv_vec)
        return out
    out = [0] * (E * m)
    out[m:] = vec[:(E - 1) * m]
    top = vec[(E - 1) * m:]
    if any(top):
        if f.U_vec is not None:
            top = f._vecmul(top, f.U_vec)
        out[0:m] = [(c * f.p) % pM for c in top]
    return out


def _div_by_pi_vec(f: LocalField, vec: List[int]) -> List[int]:
    m, E, pM = f.m, f.E, f.pM
    if E == 1:
        work = list(vec)
        if f.U_vec is not None:
            work = f._vecmul(work, f.U_vec)
        out = []
        for c in work:
            if c % f.p:
                raise PrecisionError("element not divisible by pi")
            out.append(c // f.p)
        return out
    out = [0] * (E * m)
    out[:(E - 1) * m] = vec[m:]
    low = vec[0:m]
    if any(low):
        lowp = []
        for c in low:
            if c % f.p:
                raise PrecisionError("element not divisible by pi")
            lowp.append(c // f.p)
        if f.U_inv_vec is not None:
            lowp = f._vecmul(lowp, f.U_inv_vec)
        out[(E - 1) * m:] = lowp
    return out


def _exact_divide_pi(f: LocalField, x: FieldElement, k: int) -> FieldElement:
    vec = list(x.vec)
    for _ in range(k):
        vec = _div_by_pi_vec(f, vec)
    return FieldElement(f, vec, x.shift + k, x.prec, exact_zero=x.exact_zero)


def _vec_full_mul(f: LocalField, a: List[int], b: List[int]) -> List[int]:
    m, E, pM = f.m, f.E, f.pM
    if E == 1:
        return f._vecmul(a, b)
    ext = [0] * ((2 * E - 1) * m)
    table = f._mono_table
    for j1 in range(E):
        seg_a = a[j1 * m:(j1 + 1) * m]
        if not any(seg_a):
            continue
        for j2 in range(E):
            seg_b = b[j2 * m:(j2 + 1) * m]
            if not any(seg_b):
                continue
            off = (j1 + j2) * m
            for i, ai in enumerate(seg_a):
                if not ai:
                    continue
                for j, bj in enumerate(seg_b):
                    if not bj:
                        continue
                    prod = ai * bj
                    for w, c in table[i][j]:
                        ext[off + w] += prod * c
    for j in range(2 * E - 2, E - 1, -1):
        seg = ext[j * m:(j + 1) * m]
        if not any(seg):
            continue
        if f.U_vec is not None:
            seg = f._vecmul([s % pM for s in seg], f.U_vec)
        off = (j - E) * m
        for i, c in enumerate(seg):
            ext[off + i] += c * f.p
    return [c % pM for c in ext[0:E * m]]


def _invert(f: LocalField, x: FieldElement) -> FieldElement:
    v = x.valuation_exact()
    unit = x.pishift(-v)
    if unit.shift > 0:
        unit = unit._materialize(0)
    elif unit.shift < 0:
        unit = _exact_divide_pi(f, unit, -unit.shift)
    uvec = unit.vec
    res_inv = f.res.inv(f._vec_to_res(uvec[0:f.m]))
    z = [0] * f.n
    for i, c in enumerate(f._res_to_vec(res_inv)):
        z[i] = c
    one = [0] * f.n
    one[0] = 1
    for _ in range(f.max_prec.bit_length() + 2):
        uz = _vec_full_mul(f, uvec, z)
        err = [(o - t) % f.pM for o, t in zip(one, uz)]
        if not any(err):
            break
        corr = _vec_full_mul(f, z, err)
        z = [(zi + ci) % f.pM for zi, ci in zip(z, corr)]
    rel_prec = (x.prec - v) if x.prec is not INF else INF
    prec = rel_prec - v if rel_prec is not INF else INF
    return FieldElement(f, z, -v, prec)


# ---------------------------------------------------------------------------
# spec-level operations
# ---------------------------------------------------------------------------


def valuation(x: FieldElement):
    """v(x): int, +inf only for the exact zero, ValuationBound when truncated."""
    return x.valuation()


def _step_matrix(x: FieldElement, parent: LocalField) -> List[List[FieldElement]]:
    field = x.field
    basis = field.relative_basis(parent)
    cols = [field._step_coords(x * b) for b in basis]
    n = len(basis)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def trace(x: FieldElement, down_to: LocalField) -> FieldElement:
    """tr_{K/F}(x): sum of diagonal of the multiplication matrix, stepwise."""
    field = x.field
    if field is down_to:
        return x
    if not down_to.is_ancestor_of(field):
        raise ValueError("down_to is not an ancestor of the element's field")
    if x.is_exactly_zero():
        return down_to.zero()
    parent = field.parent
    mat = _step_matrix(x, parent)
    t = parent.zero()
    for i in range(len(mat)):
        t = t + mat[i][i]
    return trace(t, down_to)


def norm(x: FieldElement, down_to: LocalField) -> FieldElement:
    """N_{K/F}(x): determinant of the multiplication matrix, stepwise."""
    field = x.field
    if field is down_to:
        return x
    if not down_to.is_ancestor_of(field):
        raise ValueError("down_to is not an ancestor of the element's field")
    if x.is_exactly_zero():
        return down_to.zero()
    parent = field.parent
    mat = _step_matrix(x, parent)
    d = _det(mat, parent)
    return norm(d, down_to)


def _det(mat: List[List[FieldElement]], field: LocalField) -> FieldElement:
    n = len(mat)
    a = [row[:] for row in mat]
    det = field.one()
    sign = 1
    for col in range(n):
        pivot, best = None, None
        for r in range(col, n):
            v = a[r][col].valuation()
            if v is INF or isinstance(v, ValuationBound):
                continue
            if best is None or v < best:
                best, pivot = v, r
        if pivot is None:
            return field.zero()
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            sign = -sign
        piv = a[col][col]
        det = det * piv
        for r in range(col + 1, n):
            if a[r][col].is_zero_to_precision() or a[r][col].is_exactly_zero():
                continue
            factor = a[r][col] / piv
            a[r] = [a[r][j] - factor * a[col][j] for j in range(n)]
    return det if sign == 1 else -det


def quadratic_conjugate(x: FieldElement) -> FieldElement:
    """Galois conjugate over the parent when the top step is quadratic."""
    field = x.field
    if field.rel_degree != 2:
        raise ValueError("top tower step is not quadratic")
    parent = field.parent
    s = x.shift
    body = FieldElement(field, x.vec, 0, x.prec - s if x.prec is not INF else INF,
                        exact_zero=x.exact_zero)
    a, b = field._step_coords(body)
    gen = field.relative_basis(parent)[1]
    conj = field.embed(a) - field.embed(b) * gen
    conj = conj.pishift(s)
    if field.role == "eisenstein" and s % 2 != 0:
        conj = -conj
    return conj


def is_square(x: FieldElement) -> bool:
    """Squareness via valuation parity plus a residue quadratic-residue test."""
    v = x.valuation()
    if v is INF:
        raise ValueError("is_square undefined for exact zero")
    if isinstance(v, ValuationBound):
        raise PrecisionError("cannot decide squareness of a truncated zero")
    if v % 2 != 0:
        return False
    return x.field.res.is_square(x.pishift(-v).residue())


def in_norm_group(x: FieldElement, ext) -> bool:
    """Membership in N_{L/K}(L^x) for a quadratic extension L/K, K = x's field.

    `ext` is either the extension LocalField, or a tag "unramified"/"ramified"
    (the latter meaning the untwisted pi''^2 = pi' convention).
    """
    v = x.valuation()
    if v is INF:
        raise ValueError("norm-group membership undefined for zero")
    if isinstance(v, ValuationBound):
        raise PrecisionError("cannot decide membership of a truncated zero")
    field = x.field
    if isinstance(ext, LocalField):
        if ext.parent is not field or ext.rel_degree != 2:
            raise ValueError("ext must be a quadratic extension of the element's field")
        if ext.role == "unramified":
            return v % 2 == 0
        n_pi = norm(ext.uniformizer(), field)  # = -twist * pi
        return is_square(x / n_pi ** v)
    if ext == "unramified":
        return v % 2 == 0
    if ext == "ramified":
        unit = x.pishift(-v)
        return is_square(unit if v % 2 == 0 else -unit)
    raise ValueError(f"unknown extension tag {ext!r}")


def hensel_sqrt(x: FieldElement) -> FieldElement:
    """The unique square root of x in 1 + pi*O; requires v(x-1) >= 1 (p odd)."""
    f = x.field
    diff = x - f.one()
    if not diff.is_exactly_zero():
        v = diff.valuation()
        if not isinstance(v, ValuationBound) and v is not INF and v < 1:
            raise ValueError("argument is not in 1 + pi*O")
    y = f.one()
    for _ in range(f.max_prec.bit_length() + 2):
        y = (y + x / y) / 2
    return y


def sqrt_unit(x: FieldElement) -> FieldElement:
    """A square root of a unit with square residue (residue sqrt + Newton)."""
    f = x.field
    if x.valuation_exact() != 0:
        raise ValueError("sqrt_unit requires a unit")
    y = f.from_residue(f.res.sqrt(x.residue()))
    for _ in range(f.max_prec.bit_length() + 2):
        y = (y + x / y) / 2
    return y


def saturated_kernel(rows: List[List[FieldElement]], field: LocalField,
                     min_prec: int = 20) -> List[List[FieldElement]]:
    """Saturated kernel of a matrix over the ring of integers of `field`.

    `rows` is a list of rows of integral FieldElements.  Returns columns
    spanning {x in O^n : Mx = 0}, a saturated direct summand (the returned
    vectors have unit content).  Raises PrecisionError if a kernel column
    cannot be certified to at least `min_prec` digits.
    """
    if not rows:
        return []
    r, n = len(rows), len(rows[0])
    a = [row[:] for row in rows]
    u = [[field.one() if i == j else field.zero() for j in range(n)]
         for i in range(n)]
    pivot_cols: List[int] = []
    free = list(range(n))
    for i in range(r):
        best_j, best_v = None, None
        for j in free:
            v = a[i][j].valuation()
            if v is INF or isinstance(v, ValuationBound):
                continue
            if best_v is None or v < best_v:
                best_v, best_j = v, j
        if best_j is None:
            continue
        piv = a[i][best_j]
        for j in free:
            if j == best_j:
                continue
            if a[i][j].is_exactly_zero() or a[i][j].is_zero_to_precision():
                continue
            factor = a[i][j] / piv
            for rr in range(r):
                a[rr][j] = a[rr][j] - factor * a[rr][best_j]
            for rr in range(n):
                u[rr][j] = u[rr][j] - factor * u[rr][best_j]
        pivot_cols.append(best_j)
        free.remove(best_j)
    kernel = []
    for j in free:
        for i in range(r):
            e = a[i][j]
            if e.is_exactly_zero():
                continue
            v = e.valuation()
            if isinstance(v, ValuationBound):
                if v.at_least < min_prec:
                    raise PrecisionError(
                        f"kernel column certified only to {v.at_least} digits")
                continue
            if v < min_prec:
                raise PrecisionError("column is not in the kernel at working precision")
        kernel.append([u[i][j] for i in range(n)])
    return kernel


def residue_matrix(vectors: List[List[FieldElement]]) -> List[List]:
    """Reduce integral FieldElement vectors to residue-field vectors."""
    return [[c.residue() for c in vec] for vec in vectors]


def exp(x: FieldElement) -> FieldElement:
    """exp(x); requires v(x) > v(p)/(p-1) in the element's own valuation."""
    f = x.field
    if x.is_exactly_zero():
        return f.one()
    v = x.valuation_exact()
    bound = Fraction(f.E, f.p - 1)
    if not Fraction(v) > bound:
        raise ValueError(f"exp requires v(x) > {bound}, got v = {v}")
    out_prec = x.prec
    cap = f.max_prec - f.E
    total = f.one()
    term = f.one()
    l = 0
    while Fraction(l) * (v - bound) < cap:
        l += 1
        term = term * x / l
        if term.is_exactly_zero() or term._structural_val() >= cap:
            continue
        total = total + term
    return total.with_precision(out_prec)


def log(x: FieldElement) -> FieldElement:
    """log(x); requires v(x-1) > 0."""
    f = x.field
    z = x - f.one()
    if z.is_exactly_zero():
        return f.zero()
    v = z.valuation()
    if isinstance(v, ValuationBound):
        return f.zero().with_precision(v.at_least)
    if v < 1:
        raise ValueError("log requires v(x-1) > 0")
    out_prec = z.prec
    cap = f.max_prec - f.E
    total = f.zero()
    zpow = f.one()
    l = 0
    while True:
        l += 1
        zpow = zpow * z
        term = zpow / l
        if not (term.is_exactly_zero() or term._structural_val() >= cap):
            total = total + term if l % 2 == 1 else total - term
        # remaining terms all die once l*v - E*log_p(l) clears the cap
        if l * v - f.E * (l.bit_length() + 2) >= cap and l >= f.E:
            break
        if l > 64 * f.max_prec:
            raise PrecisionError("log series did not terminate")
    return total.with_precision(out_prec)
