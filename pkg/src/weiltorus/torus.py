"""Maximal irreducible tori T in Sp(W) over a p-adic field, their subtori,
characters, congruence filtration and momentum map.

Two families are modelled exactly:

* case A: k''/k' ramified quadratic, k'/k unramified of degree 2f, with
  pi''^2 = pi' = pi and u = nu = pi''.
* case B: k''/k' unramified quadratic, k'/k totally tamely ramified of
  degree 2e, with pi'^(2e) = pi, nu^2 = d a non-square unit of k, and
  u = pi'^(v''(u)) * nu for v''(u) in {0, 1} (the two conjugacy classes).

Subtori correspond to divisor subsets of 2f resp. 2e through the cyclic
group-ring classification; characters are carried as finite conductor and
parameter-class data, never as function objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import cyclomod, padic
from .padic import (FieldElement, LocalField, PrecisionError, hensel_sqrt,
                    norm, quadratic_conjugate, trace)


class TorusError(ValueError):
    """Invalid torus or subtorus parameters."""


@dataclass
class TorusDescriptor:
    """A maximal irreducible torus with its field tower and invariants."""

    case: str                 # "A" or "B"
    p: int
    q: int
    half_degree: int          # f in case A, e in case B
    v_u: int                  # v''(u); 1 forced in case A
    lambda_psi: int = 0
    precision: int = padic.DEFAULT_PRECISION
    gamma_twist_index: Optional[int] = None   # case A: pi''^2 = gamma*pi

    base: LocalField = field(init=False, repr=False)
    kp: LocalField = field(init=False, repr=False)      # k'
    kpp: LocalField = field(init=False, repr=False)     # k''
    e_rel: int = field(init=False)            # ramification order of k'/k
    delta: int = field(init=False)            # differental exponent of k'/k
    mu: int = field(init=False)

    def __post_init__(self):
        if self.case not in ("A", "B"):
            raise TorusError(f"unknown case {self.case!r}")
        if self.half_degree < 1:
            raise TorusError("half degree must be >= 1")
        if self.v_u not in (0, 1):
            raise TorusError("v''(u) must be 0 or 1")
        self.base = LocalField.base(self.p, self.q, precision=self.precision)
        h = self.half_degree
        if self.case == "A":
            if self.v_u != 1:
                raise TorusError("case A forces u = pi'', so v''(u) = 1")
            self.kp = self.base.unramified_extension(2 * h)
            twist = None
            if self.gamma_twist_index is not None:
                twist = self.kp.res.from_index(self.gamma_twist_index)
                if self.kp.res.is_zero(twist):
                    raise TorusError("gamma twist must be a unit")
            self.kpp = self.kp.eisenstein_extension(2, twist=twist)
            self.e_rel = 1
            self.delta = 0
        else:
            if (2 * h) % self.p == 0:
                raise TorusError(f"case B needs gcd(2e, p) = 1; got e={h}, p={self.p}")
            if self.gamma_twist_index is not None:
                raise TorusError("gamma twist applies to case A towers only")
            self.kp = self.base.eisenstein_extension(2 * h)
            d_res = self.base.res.smallest_nonresidue()
            modulus = (self.kp.res.neg(d_res), self.kp.res.zero)
            self.kpp = self.kp.unramified_extension(2, residue_modulus=modulus)
            self._d_res = d_res
            self.e_rel = 2 * h
            self.delta = 2 * h - 1
        self.mu = self.e_rel * self.lambda_psi - self.delta - self.v_u

    # ------------------------------------------------------------ structure

    @property
    def gamma_order(self) -> int:
        """Order of the relevant cyclic Galois group Gamma' (2f or 2e)."""
        return 2 * self.half_degree

    @property
    def splitting_coprime(self) -> bool:
        """gcd(f, p) = 1 in case A (hypothesis of the multiplicity formulas)."""
        return self.case != "A" or math.gcd(self.half_degree, self.p) == 1

    def nu(self) -> FieldElement:
        """The trace-zero generator: pi'' in case A, nu with nu^2 = d in case B."""
        return self.kpp.relative_basis(self.kp)[1]

    def u_element(self) -> FieldElement:
        if self.case == "A":
            return self.nu()
        u = self.nu()
        if self.v_u:
            u = u * self.kpp.embed(self.kp.uniformizer())
        return u

    def d_unit(self) -> FieldElement:
        """nu^2 as an element of k': pi' (or gamma*pi') in case A, the lifted
        non-square unit d in case B."""
        nu = self.nu()
        return self.kpp.coords_over(nu * nu, self.kp)[0]

    def lie_element(self, eta: FieldElement) -> FieldElement:
        """eta*nu for eta in k': a Lie-algebra element of T."""
        return self.kpp.embed(eta) * self.nu()

    def lie_coordinate(self, X: FieldElement, tol: Optional[int] = None) -> FieldElement:
        """Inverse of lie_element: X = eta*nu -> eta; raises if X is not in k'nu."""
        if X.is_exactly_zero():
            return self.kp.zero()
        a, b = self.kpp.coords_over(X * self.nu(), self.kp)
        # X*nu = eta*nu^2 and nu^2 lies in k'
        tol = tol if tol is not None else max(4, self.precision // 2)
        if not (b.is_exactly_zero() or _val_at_least(b, X.valuation_exact() + tol)):
            raise TorusError("element is not in the Lie algebra k'nu")
        return a / self.d_unit()

    def norm_one_element(self, xi: FieldElement, eta: FieldElement) -> FieldElement:
        """xi + eta*nu, checked to satisfy xi^2 - d*eta^2 = 1 at precision."""
        g = self.kpp.embed(xi) + self.kpp.embed(eta) * self.nu()
        n = xi * xi - self.d_unit() * eta * eta
        if not (n - 1).is_zero_to_precision():
            raise TorusError("not a norm-one pair")
        return g

    def rho(self, eta: FieldElement) -> FieldElement:
        """The canonical section eta -> rho(eta*nu) in T_1 (Hensel square root).

        Case A: eta in O'; case B: eta in pi'O'.  Returns xi + eta*nu with
        xi the square root of 1 + d*eta^2 in 1 + pi*O'.
        """
        d = self.d_unit()
        xi = hensel_sqrt(1 + d * eta * eta)
        return self.kpp.embed(xi) + self.kpp.embed(eta) * self.nu()

    def congruence_level(self, g: FieldElement) -> int:
        """Largest j with g in T_j, i.e. v''(g - 1), capped by precision."""
        diff = g - 1
        v = diff.valuation()
        if v is padic.INF:
            return self.kpp.max_prec
        if isinstance(v, padic.ValuationBound):
            return v.at_least
        return max(0, v)

    def quotient_order(self, n: int) -> int:
        """|T/T_n| predicted by the congruence-filtration laws."""
        if n <= 0:
            return 1
        if self.case == "B":
            return (self.q + 1) * self.q ** (n - 1)
        # case A: steps of size q' = q^(2f) at odd levels only
        qp = self.q ** (2 * self.half_degree)
        return 2 * qp ** (n // 2)

    def filtration_step(self, level: int) -> int:
        """|T_level / T_(level+1)|."""
        if level == 0:
            return 2 if self.case == "A" else self.q + 1
        if self.case == "B":
            return self.q
        # case A: T_{2j} = T_{2j+1} for j > 0, odd steps have size q' = q^(2f)
        return self.q ** (2 * self.half_degree) if level % 2 == 1 else 1

    def __repr__(self):
        return (f"TorusDescriptor(case={self.case}, p={self.p}, q={self.q}, "
                f"{'f' if self.case == 'A' else 'e'}={self.half_degree}, "
                f"v_u={self.v_u}, lambda_psi={self.lambda_psi}, mu={self.mu})")


def _val_at_least(x: FieldElement, k: int) -> bool:
    v = x.valuation()
    if v is padic.INF:
        return True
    if isinstance(v, padic.ValuationBound):
        return v.at_least >= k
    return v >= k


def build_max_torus(case: str, p: int, q: int, half_degree: int, v_u: int = 1,
                    lambda_psi: int = 0, precision: int = padic.DEFAULT_PRECISION,
                    gamma_twist_index: Optional[int] = None) -> TorusDescriptor:
    """Construct a maximal irreducible torus descriptor with its tower."""
    return TorusDescriptor(case=case, p=p, q=q, half_degree=half_degree, v_u=v_u,
                           lambda_psi=lambda_psi, precision=precision,
                           gamma_twist_index=gamma_twist_index)


# ------------------------------------------------------------------- subtori

def index_set_for_divisor(two_e: int, d: int) -> List[int]:
    """I_d = {0..2e-1} minus {(2e/d)l : l coprime to d}."""
    if two_e % d != 0:
        raise TorusError(f"{d} does not divide {two_e}")
    removed = {(two_e // d) * l % two_e for l in range(1, d + 1) if math.gcd(l, d) == 1}
    return [l for l in range(two_e) if l not in removed]


@dataclass
class SubtorusSpec:
    """Subtorus S_dset of a maximal irreducible torus, with derived data."""

    torus: TorusDescriptor
    dset: Tuple[int, ...]

    I: Optional[Tuple[int, ...]] = field(init=False, default=None)       # case B
    Iprime: Optional[Tuple[int, ...]] = field(init=False, default=None)  # case B
    codim: int = field(init=False)
    eps: Optional[int] = field(init=False, default=None)                 # case A
    mu_index: Optional[int] = field(init=False, default=None)            # case B

    def __post_init__(self):
        T = self.torus
        n = T.gamma_order
        dset = tuple(sorted(set(self.dset)))
        for d in dset:
            if n % d != 0:
                raise TorusError(f"{d} is not a divisor of {n}")
        object.__setattr__(self, "dset", dset)
        self.codim = sum(cyclomod.euler_phi(d) for d in dset)
        aug_gcd = cyclomod.minimal_vanishing_sum_parity(n, dset) if dset else 0
        if T.case == "B":
            I = set(range(n))
            for d in dset:
                I &= set(index_set_for_divisor(n, d))
            self.I = tuple(sorted(I))
            self.Iprime = tuple(sorted(set(range(n)) - I))
            if len(self.Iprime) != self.codim:
                raise AssertionError("index-set size disagrees with codimension")
            self.mu_index = (T.q + 1) // math.gcd(T.q + 1, aug_gcd)
        else:
            self.eps = 1 if aug_gcd % 2 == 0 else 2

    @property
    def dim(self) -> int:
        return self.torus.gamma_order - self.codim

    @property
    def is_full(self) -> bool:
        return not self.dset

    @property
    def is_trivial(self) -> bool:
        return self.dset == tuple(cyclomod.divisors(self.torus.gamma_order))

    def character_module(self) -> Tuple[cyclomod.Submodule, cyclomod.Submodule]:
        """(M_dset, saturated M̄_dset) of rational characters vanishing on S."""
        return cyclomod.module_for_divisor_set(self.torus.gamma_order, self.dset)

    def complement_spec(self) -> "SubtorusSpec":
        """S' cut out by the complementary divisor set (Lie complement)."""
        comp = [d for d in cyclomod.divisors(self.torus.gamma_order)
                if d not in self.dset]
        return SubtorusSpec(self.torus, tuple(comp))

    # -------------------------------------------------- case-B support tests

    def lie_support_ok(self, eta: FieldElement, min_margin: int = 4) -> bool:
        """Case B: whether eta (in k') is supported on I modulo 2e."""
        T = self.torus
        if T.case != "B":
            raise TorusError("lie_support_ok applies to case B")
        coords = T.kp.coords_over(eta, T.base)
        margin = min(eta.prec if eta.prec is not padic.INF else T.precision,
                     T.precision)
        for t, c in enumerate(coords):
            if t in self.I:
                continue
            if c.is_exactly_zero():
                continue
            v = c.valuation()
            if isinstance(v, padic.ValuationBound):
                continue
            return False
        return True

    def subgroup_order(self, n: int) -> int:
        """|S/S_n| from the congruence-filtration laws."""
        T = self.torus
        if n <= 0:
            return 1
        if T.case == "B":
            head = (T.q + 1) // self.mu_index
            steps = sum(1 for l in range(1, n)
                        if (l % (2 * T.half_degree)) not in self.Iprime)
            return head * T.q ** steps
        head = 2 // self.eps
        return head * (T.q ** self.dim) ** (n // 2)

    def subgroup_step(self, level: int) -> int:
        """|S_level / S_(level+1)|."""
        T = self.torus
        if level == 0:
            return (T.q + 1) // self.mu_index if T.case == "B" else 2 // self.eps
        if T.case == "B":
            return T.q if (level % (2 * T.half_degree)) not in self.Iprime else 1
        return T.q ** self.dim if level % 2 == 1 else 1

    def __repr__(self):
        extra = (f"I'={list(self.Iprime)}" if self.torus.case == "B"
                 else f"eps={self.eps}")
        return (f"SubtorusSpec(case={self.torus.case}, dset={list(self.dset)}, "
                f"codim={self.codim}, {extra})")


@dataclass(frozen=True)
class FiltrationInfo:
    """Step sizes |G_l/G_(l+1)| of the congruence filtration up to level j."""

    steps: Tuple[int, ...]
    trivial_levels: Tuple[int, ...]
    quotient_order: int


def congruence_filtration(torus: TorusDescriptor, j: int,
                          spec: Optional[SubtorusSpec] = None) -> FiltrationInfo:
    """Filtration structure of T/T_j (or S/S_j when a subtorus is given).

    The rho coordinates themselves are available as TorusDescriptor.rho.
    """
    if spec is None:
        steps = tuple(torus.filtration_step(l) for l in range(j))
        order = torus.quotient_order(j)
    else:
        steps = tuple(spec.subgroup_step(l) for l in range(j))
        order = spec.subgroup_order(j)
    trivial = tuple(l for l, s in enumerate(steps) if s == 1)
    return FiltrationInfo(steps, trivial, order)


def subtorus_from_divisors(torus: TorusDescriptor, dset: Sequence[int]) -> SubtorusSpec:
    """The subtorus S_dset attached to a set of divisors of 2f / 2e."""
    return SubtorusSpec(torus, tuple(dset))


def all_subtori(torus: TorusDescriptor) -> List[SubtorusSpec]:
    """All 2^{#divisors} subtori, by divisor subsets (bijection with subtori)."""
    divs = cyclomod.divisors(torus.gamma_order)
    out = []
    for mask in range(1 << len(divs)):
        dset = tuple(d for i, d in enumerate(divs) if mask >> i & 1)
        out.append(SubtorusSpec(torus, dset))
    return out


# ---------------------------------------------------------------- characters

@dataclass(frozen=True)
class CharacterSpec:
    """A unitary character of T or S carried as conductor + parameter data.

    Case A: nontrivial spectrum members have even conductor 2j and a
    parameter which is the residue of N_{k''/k'}(a), a nonzero square in the
    residue field of k', stored by its canonical index.
    Case B: the conductor determines the multiplicity data; the optional
    parameter index records the leading residue of b when known.
    """

    group: str                 # "T" or "S"
    case: str
    conductor: int
    param_index: Optional[int] = None
    param_is_square: Optional[bool] = None

    def __post_init__(self):
        if self.group not in ("T", "S"):
            raise TorusError("group tag must be 'T' or 'S'")
        if self.conductor < 0:
            raise TorusError("conductor must be >= 0")
        if self.case == "A" and self.conductor % 2 != 0:
            raise TorusError("case A spectrum characters have even conductor")

    @property
    def is_trivial(self) -> bool:
        return self.conductor == 0

    def level_j(self) -> int:
        """The level j with conductor 2j in case A (g = phi(w), v''(w) = mu - j)."""
        if self.case != "A":
            raise TorusError("level_j is a case-A notion")
        return self.conductor // 2


def spectrum_conductor_ok(torus: TorusDescriptor, spec: SubtorusSpec,
                          conductor: int) -> bool:
    """Whether a character of S with this conductor can appear (parity rules)."""
    if torus.case == "B":
        want_odd = torus.v_u == 0
        if conductor == 0:
            return not want_odd or spec.mu_index > 1
        return conductor % 2 == (1 if want_odd else 0)
    return conductor % 2 == 0


@dataclass(frozen=True)
class SpectrumLine:
    """One conductor level of the Weil spectrum on T, with its exact count."""

    conductor: int
    count: int
    note: str


def weil_spectrum(torus: TorusDescriptor, conductor_bound: int) -> List[SpectrumLine]:
    """Characters of T appearing in the Weil representation, conductor <= bound.

    Case B (Thm: parity of the conductor equals the parity of mu); case A
    (even conductors, parameters ranging over the nonzero square classes of
    the residue field at the precision the conductor demands).
    """
    out: List[SpectrumLine] = []
    q = torus.q
    if torus.case == "B":
        parity = torus.mu % 2
        if 0 % 2 == parity:
            out.append(SpectrumLine(0, 1, "trivial character"))
        start = 1 if parity == 1 else 2
        for c in range(start, conductor_bound + 1, 2):
            count = q if c == 1 else (q + 1) * q ** (c - 2) * (q - 1)
            out.append(SpectrumLine(c, count, "all characters of this conductor"))
    else:
        qp = q ** (2 * torus.half_degree)
        out.append(SpectrumLine(0, 1, "trivial character"))
        for c in range(2, conductor_bound + 1, 2):
            j = c // 2
            count = (qp - 1) * qp ** ((j + 1) // 2 - 1)
            out.append(SpectrumLine(c, count,
                                    "square-unit parameter classes mod pi^(ceil(j/2))"))
    return out


# -------------------------------------------------------------- momentum map

def momentum_pairing(torus: TorusDescriptor, w: FieldElement, X: FieldElement,
                     spec: Optional[SubtorusSpec] = None) -> FieldElement:
    """<phi(w), X> = (1/2) tr_{k'/k}( N_{k''/k'}(u w) * X/u ), exactly.

    X is a Lie-algebra element (an element of k' nu).  When a case-B
    subtorus spec is supplied, X is required to be supported on its
    index set I.
    """
    T = torus
    if w.field is not T.kpp:
        w = T.kpp.embed(w)
    eta = T.lie_coordinate(X)
    if spec is not None and T.case == "B":
        if not spec.lie_support_ok(eta):
            raise TorusError("X is not in the Lie algebra of the subtorus")
    u = T.u_element()
    if w.is_exactly_zero():
        return T.base.zero()
    uw = u * w
    nrm = uw * quadratic_conjugate(uw)
    a, b = T.kpp.coords_over(nrm, T.kp)
    # the norm lies in k'
    x_over_u = _lie_over_u(T, eta)
    val = trace(a * x_over_u, T.base)
    return val / 2


def _lie_over_u(torus: TorusDescriptor, eta: FieldElement) -> FieldElement:
    """X/u for X = eta*nu: eta in case A, eta*pi'^(-v_u) in case B."""
    if torus.case == "A" or torus.v_u == 0:
        return eta
    return eta / torus.kp.uniformizer()


@dataclass
class ProductTorusSpec:
    """A torus embedded in a product T_1 x ... x T_n via per-component data.

    The Lie algebra of the embedded torus is spanned by basis vectors given
    as tuples of Lie-coordinate elements eta_{b,i} in k'_i (delta_i images).
    """

    components: List[TorusDescriptor]
    lie_basis: List[List[FieldElement]]   # lie_basis[b][i] = eta in k'_i

    def __post_init__(self):
        for vec in self.lie_basis:
            if len(vec) != len(self.components):
                raise TorusError("lie basis vectors must have one entry per component")


def momentum_pairing_product(product: ProductTorusSpec, w: Sequence[FieldElement],
                             basis_index: int) -> FieldElement:
    """<phi(w), X_b> for the product torus, by summing component pairings."""
    total = product.components[0].base.zero()
    for i, T in enumerate(product.components):
        eta = product.lie_basis[basis_index][i]
        if eta.is_exactly_zero():
            continue
        wi = w[i]
        if wi.is_exactly_zero():
            continue
        X = T.lie_element(eta)
        total = total + momentum_pairing(T, wi, X)
    return total


# ------------------------------------------------------- appendix-B predicate

def elliptic_embeddable(ext_type: str, degree: int, norm_to_subdegree: int = 1,
                        q: Optional[int] = None) -> bool:
    """Whether the norm-one torus of k'/k_0 embeds in an elliptic maximal torus.

    k'/k has the given degree; k_0 is the intermediate field of degree
    `norm_to_subdegree` over k (1 = the full norm-one torus of k'/k).  The
    criterion is the existence of an order-two automorphism tau of k'/k with
    the torus inside {x : x tau(x) = 1}.

    ext_type "unramified": always cyclic Galois.  ext_type "tame" (totally
    ramified X^degree - pi): cyclic Galois iff q = 1 mod degree, otherwise
    only the full-norm-one and relative-quadratic cases are decidable here.
    """
    n = degree
    m = norm_to_subdegree
    if n < 1 or m < 1 or n % m != 0:
        raise TorusError("subdegree must divide the degree")
    if n == m:
        raise TorusError("the trivial torus is not a norm-one torus")
    if ext_type == "unramified" or (ext_type == "tame" and q is not None
                                    and (q - 1) % n == 0):
        if n % 2 != 0:
            return False  # cyclic of odd order has no order-two element
        return _cyclic_unitary_contains(n, m)
    if ext_type == "tame":
        if n % 2 != 0:
            return False
        if n // m == 2:
            # k'/k_0 is quadratic and sigma_{-1} fixes k_0 = k(pi^2...)
            return True
        if m == 1:
            # full norm-one torus: dim n-1 > n/2 = dim of any unitary kernel
            return n == 2
        raise TorusError("tame non-Galois case supported only for relative "
                         "quadratic or full norm-one tori")
    raise TorusError(f"unsupported extension type {ext_type!r}")


def _cyclic_unitary_contains(n: int, m: int) -> bool:
    """(1 + theta^(n/2)) in the saturated character module of ker N_{k'/k_0}."""
    norm_vec = [1 if i % m == 0 else 0 for i in range(n)]
    gens = [norm_vec[-l:] + norm_vec[:-l] for l in range(n)]
    module = cyclomod.Submodule(n, gens, check_sigma_stable=False).saturate()
    target = [0] * n
    target[0] += 1
    target[n // 2] += 1
    return module.contains(target)
