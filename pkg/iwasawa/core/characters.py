"""ディリクレ指標, 一般ベルヌーイ数, オイラー因子を除いた L 値."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, lcm
from typing import Iterable, Optional, Sequence

from sympy import cyclotomic_poly, divisors, factorint, primitive_root, symbols, Poly
from sympy.ntheory.modular import crt

from .exceptions import InvalidParameterError, ParseError
from .padic import CoeffRing, PadicScalar

logger = logging.getLogger(__name__)

_X = symbols("x")

_BERNOULLI_BLOCK = 64


# --- ベルヌーイ数 ---


@lru_cache(maxsize=None)
def _bernoulli_table(bound: int) -> tuple[Fraction, ...]:
    """Akiyama–Tanigawa 法で B_0..B_bound を求める（B_1 = −1/2 に換算）."""
    work = [Fraction(0)] * (bound + 1)
    out = []
    for m in range(bound + 1):
        work[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            work[j - 1] = j * (work[j - 1] - work[j])
        out.append(work[0])
    if bound >= 1:
        out[1] = -out[1]
    return tuple(out)


def bernoulli_number(n: int) -> Fraction:
    """B_n（B_1 = −1/2）."""
    if n < 0:
        raise InvalidParameterError("Bernoulli index must be non-negative")
    bound = (n // _BERNOULLI_BLOCK + 1) * _BERNOULLI_BLOCK
    return _bernoulli_table(bound)[n]


@lru_cache(maxsize=None)
def bernoulli_polynomial(n: int) -> tuple[Fraction, ...]:
    """B_n(x) = Σ C(n,k) B_k x^{n−k} の係数（low → high）."""
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        coeffs[n - k] = comb(n, k) * bernoulli_number(k)
    return tuple(coeffs)


# --- (Z/f)^× の標準生成元 ---


@dataclass(frozen=True)
class _Component:
    modulus: int
    generator: int
    order: int
    kind: str  # "odd" | "minus_one" | "five"


@lru_cache(maxsize=None)
def _components(f: int) -> tuple[_Component, ...]:
    comps = []
    factors = factorint(f) if f > 1 else {}
    two = factors.pop(2, 0)
    if two == 2:
        comps.append(_Component(4, 3, 2, "minus_one"))
    elif two >= 3:
        Q = 2**two
        comps.append(_Component(Q, Q - 1, 2, "minus_one"))
        comps.append(_Component(Q, 5, Q // 4, "five"))
    for q in sorted(factors):
        Q = q ** factors[q]
        comps.append(_Component(Q, int(primitive_root(Q)), Q // q * (q - 1), "odd"))
    return tuple(comps)


@lru_cache(maxsize=None)
def canonical_generators(f: int) -> tuple[tuple[int, int], ...]:
    """(Z/f)^× の標準生成元と位数（CRT 順: 2 部分 −1, 5 の後に奇素数冪を昇順）."""
    gens = []
    for comp in _components(f):
        if comp.modulus == f:
            g = comp.generator
        else:
            g = int(crt([comp.modulus, f // comp.modulus], [comp.generator, 1])[0]) % f
        gens.append((g, comp.order))
    return tuple(gens)


@lru_cache(maxsize=None)
def _dlog_table(modulus: int, generator: int, order: int) -> dict[int, int]:
    table = {}
    x = 1
    for e in range(order):
        table[x] = e
        x = x * generator % modulus
    return table


def unit_coordinates(a: int, f: int) -> Optional[tuple[int, ...]]:
    """a ∈ (Z/f)^× の標準生成元に関する指数. gcd(a, f) > 1 なら None."""
    if gcd(a, f) != 1:
        return None
    coords = []
    for comp in _components(f):
        x = a % comp.modulus
        if comp.kind == "minus_one":
            coords.append(0 if x % 4 == 1 else 1)
        elif comp.kind == "five":
            if x % 4 == 3:
                x = (-x) % comp.modulus
            coords.append(_dlog_table(comp.modulus, 5, comp.order)[x])
        else:
            coords.append(_dlog_table(comp.modulus, comp.generator, comp.order)[x])
    return tuple(coords)


# --- 円分体の元 ---


@lru_cache(maxsize=None)
def _cyclotomic_coeffs(m: int) -> tuple[int, ...]:
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(m, _X), _X).all_coeffs()))


@dataclass(frozen=True)
class ExactCyclotomicRational:
    """Q(ζ_m) の元. Φ_m の冪基底に関する有理係数（low → high）."""

    m: int
    coeffs: tuple[Fraction, ...]

    @classmethod
    def from_vector(cls, m: int, vector: Sequence[Fraction]) -> "ExactCyclotomicRational":
        phi = _cyclotomic_coeffs(m)
        deg = len(phi) - 1
        work = [Fraction(v) for v in vector] + [Fraction(0)] * max(0, deg - len(vector))
        for k in range(len(work) - 1, deg - 1, -1):
            c = work[k]
            if c:
                for i in range(deg + 1):
                    work[k - deg + i] -= c * phi[i]
        return cls(m, tuple(work[:deg]))

    @classmethod
    def rational(cls, m: int, value: Fraction) -> "ExactCyclotomicRational":
        return cls.from_vector(m, [Fraction(value)])

    @classmethod
    def root(cls, m: int, k: int) -> "ExactCyclotomicRational":
        """ζ_m^k."""
        vector = [Fraction(0)] * m
        vector[k % m] = Fraction(1)
        return cls.from_vector(m, vector)

    def _check(self, other: "ExactCyclotomicRational") -> None:
        if other.m != self.m:
            raise InvalidParameterError("cyclotomic elements from different fields")

    def __add__(self, other: "ExactCyclotomicRational") -> "ExactCyclotomicRational":
        self._check(other)
        return ExactCyclotomicRational(self.m, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ExactCyclotomicRational") -> "ExactCyclotomicRational":
        return self + other.scale(-1)

    def __mul__(self, other: "ExactCyclotomicRational") -> "ExactCyclotomicRational":
        self._check(other)
        prod = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        return ExactCyclotomicRational.from_vector(self.m, prod)

    def scale(self, factor: Fraction) -> "ExactCyclotomicRational":
        return ExactCyclotomicRational(self.m, tuple(c * factor for c in self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise InvalidParameterError("element is not rational")
        return self.coeffs[0]

    def embed(self, ring: CoeffRing) -> PadicScalar:
        """ζ_m ↦ ring の 1 の原始 m 乗根.

        Raises:
            EmbeddingDenominatorError: 分母が p で割り切れる場合

        """
        zeta = ring.root_of_unity(self.m)
        acc = ring.zero()
        power = ring.one()
        for c in self.coeffs:
            if c:
                acc = acc + ring.from_fraction(c) * power
            power = power * zeta
        return acc

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.coeffs[0])
        terms = [f"({c})*z^{i}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


# --- ディリクレ指標 ---


@dataclass(frozen=True)
class DirichletCharacter:
    """(Z/f)^× の指標. 標準生成元 g_i で χ(g_i) = exp(2πi·e_i/n_i)."""

    modulus: int
    exponents: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise InvalidParameterError(f"modulus must be positive, got {self.modulus}")
        gens = canonical_generators(self.modulus)
        if len(self.exponents) != len(gens):
            raise InvalidParameterError(
                f"modulus {self.modulus} has {len(gens)} canonical generators, got {len(self.exponents)} exponents"
            )
        object.__setattr__(self, "exponents", tuple(e % n for e, (_, n) in zip(self.exponents, gens)))

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus, (0,) * len(canonical_generators(modulus)))

    @classmethod
    def from_notation(cls, text: str) -> "DirichletCharacter":
        """"f:e1,e2,…" 表記から構成する.

        Raises:
            ParseError: 表記が不正な場合

        """
        try:
            head, _, tail = text.strip().partition(":")
            modulus = int(head)
            exponents = tuple(int(e) for e in tail.split(",") if e.strip()) if tail else ()
            return cls(modulus, exponents)
        except (ValueError, InvalidParameterError) as e:
            raise ParseError(f"invalid character notation '{text}': {e}")

    @property
    def notation(self) -> str:
        return f"{self.modulus}:{','.join(str(e) for e in self.exponents)}"

    @property
    def generator_orders(self) -> tuple[int, ...]:
        return tuple(n for _, n in canonical_generators(self.modulus))

    @property
    def order(self) -> int:
        out = 1
        for e, n in zip(self.exponents, self.generator_orders):
            out = lcm(out, n // gcd(n, e))
        return out

    def angle(self, a: int) -> Optional[Fraction]:
        """χ(a) を Q/Z の元 k/m として返す. gcd(a, f) > 1 なら None."""
        coords = unit_coordinates(a, self.modulus)
        if coords is None:
            return None
        total = sum(Fraction(e * c, n) for e, c, n in zip(self.exponents, coords, self.generator_orders))
        return total - (total.numerator // total.denominator)

    def value_exponent(self, a: int) -> Optional[int]:
        """χ(a) = ζ_order^k の k."""
        angle = self.angle(a)
        return None if angle is None else int(angle * self.order)

    def value(self, a: int) -> ExactCyclotomicRational:
        k = self.value_exponent(a)
        if k is None:
            return ExactCyclotomicRational.rational(self.order, Fraction(0))
        return ExactCyclotomicRational.root(self.order, k)

    def embed_value(self, a: int, ring: CoeffRing) -> PadicScalar:
        k = self.value_exponent(a)
        if k is None:
            return ring.zero()
        return ring.root_of_unity(self.order) ** k

    @property
    def parity(self) -> int:
        return 1 if self.value_exponent(self.modulus - 1 if self.modulus > 1 else 0) == 0 else -1

    @property
    def is_even(self) -> bool:
        return self.parity == 1

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    @property
    def conductor(self) -> int:
        f = self.modulus
        for c in divisors(f):
            if all(self.value_exponent(a) == 0 for a in range(1, f + 1, c) if gcd(a, f) == 1):
                return int(c)
        return f

    def induce(self, modulus: int) -> "DirichletCharacter":
        """法 F（f の倍数）の指標 a ↦ χ(a mod f) に持ち上げる."""
        if modulus % self.modulus:
            raise InvalidParameterError(f"{modulus} is not a multiple of {self.modulus}")
        exponents = []
        for g, n in canonical_generators(modulus):
            angle = self.angle(g) if modulus > 1 else Fraction(0)
            exponents.append(int(angle * n))
        return DirichletCharacter(modulus, tuple(exponents))

    def __str__(self) -> str:
        return self.notation


def all_characters(modulus: int) -> list[DirichletCharacter]:
    orders = [n for _, n in canonical_generators(modulus)]
    return [DirichletCharacter(modulus, tuple(e)) for e in itertools.product(*(range(n) for n in orders))]


def is_type_S(psi: DirichletCharacter, p: int) -> bool:
    """偶, 非自明, 導手と位数が p と素."""
    return psi.is_even and not psi.is_trivial and psi.conductor % p != 0 and psi.order % p != 0


def generalized_bernoulli(n: int, psi: DirichletCharacter) -> ExactCyclotomicRational:
    """B_{n,ψ} = f^{n−1} Σ_{a=1}^{f} ψ(a) B_n(a/f)."""
    if n < 1:
        raise InvalidParameterError("generalized Bernoulli numbers need n >= 1")
    f = psi.modulus
    m = psi.order
    poly = bernoulli_polynomial(n)
    buckets = [Fraction(0)] * m
    for a in range(1, f + 1):
        k = psi.value_exponent(a)
        if k is None:
            continue
        # f^{n−1} B_n(a/f) = Σ_j c_j a^j f^{n−1−j}
        buckets[k] += sum(c * Fraction(a**j) * Fraction(f) ** (n - 1 - j) for j, c in enumerate(poly) if c)
    return ExactCyclotomicRational.from_vector(m, buckets)


def euler_factor(psi: DirichletCharacter, ell: int, n: int) -> ExactCyclotomicRational:
    """1 − ψ(ℓ) ℓ^{n−1}."""
    one = ExactCyclotomicRational.rational(psi.order, Fraction(1))
    return one - psi.value(ell).scale(Fraction(ell) ** (n - 1))


def truncated_L_value(psi: DirichletCharacter, n: int, sigma: Iterable[int]) -> ExactCyclotomicRational:
    """L^Σ(ψ, 1−n) = (−B_{n,ψ}/n)·∏_{ℓ∈Σ, ℓ∤f} (1 − ψ(ℓ)ℓ^{n−1})."""
    value = generalized_bernoulli(n, psi).scale(Fraction(-1, n))
    for ell in sorted(set(sigma)):
        if gcd(ell, psi.modulus) == 1:
            value = value * euler_factor(psi, ell, n)
    return value
