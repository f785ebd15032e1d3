"""不分岐拡大 O = Z_p[ζ_m] 上の固定精度p進演算."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Optional, Sequence, Union

from sympy import Poly, cyclotomic_poly, isprime, n_order, primitive_root, symbols

from .exceptions import (
    EmbeddingDenominatorError,
    InvalidParameterError,
    IwasawaError,
    ZeroAtPrecision,
)

logger = logging.getLogger(__name__)

_X = symbols("x")

ScalarLike = Union["PadicScalar", int]


def vp(value: int, p: int) -> Optional[int]:
    """整数の p 進付値. 0 に対しては None."""
    if value == 0:
        return None
    value = abs(value)
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return v


def teichmuller_residue(a: int, p: int, prec: int) -> int:
    """整数 a (p と素) のタイヒミュラー代表元を mod p^prec で返す."""
    mod = p**prec
    x = a % mod
    if x % p == 0:
        raise InvalidParameterError(f"{a} is not a unit modulo {p}")
    while True:
        y = pow(x, p, mod)
        if y == x:
            return x
        x = y


@lru_cache(maxsize=None)
def log_u(a: int, p: int, digits: int) -> int:
    """⟨a⟩ ≡ u^s (mod p^{digits+1}) を満たす s (0 ≤ s < p^digits) を返す.

    u = 1 + p の冪を1桁ずつ探索する. 対数級数は使わない.

    Args:
        a: p と素な整数
        p: 奇素数
        digits: 求める s の p 進桁数

    Returns:
        s

    Raises:
        InvalidParameterError: a が p で割り切れる場合

    """
    mod = p ** (digits + 1)
    omega = teichmuller_residue(a, p, digits + 1)
    x = a * pow(omega, -1, mod) % mod
    u = 1 + p
    s = 0
    for j in range(digits):
        step = pow(u, p**j, mod)
        target = p ** (j + 2)
        cur = pow(u, s, mod)
        for t in range(p):
            if (cur - x) % target == 0:
                break
            cur = cur * step % mod
        else:  # pragma: no cover - u は 1 + pZ_p を生成する
            raise IwasawaError(f"log_u search failed for a={a}, p={p}")
        s += t * p**j
    return s


@dataclass(frozen=True)
class CoeffRing:
    """係数環 O/p^N, O = Z_p[x]/(h).

    h は円分多項式 Φ_m の mod p 既約因子をヘンゼル持ち上げしたもので,
    x の剰余類がちょうど 1 の原始 m 乗根 ζ_m になる.
    """

    p: int
    m: int
    d: int
    N: int
    h: tuple[int, ...]
    zeta: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.p**self.N

    @property
    def q(self) -> int:
        """剰余体の位数 p^d."""
        return self.p**self.d

    def element(self, coeffs: Sequence[int], prec: Optional[int] = None) -> "PadicScalar":
        """基底 1, x, …, x^{d−1} の係数から元を作る."""
        prec = self.N if prec is None else min(prec, self.N)
        mod = self.p**prec
        padded = list(coeffs) + [0] * (self.d - len(coeffs))
        if len(padded) != self.d:
            raise InvalidParameterError(f"expected {self.d} coefficients, got {len(coeffs)}")
        return PadicScalar(self, tuple(c % mod for c in padded), prec)

    def scalar(self, value: int, prec: Optional[int] = None) -> "PadicScalar":
        return self.element((value,), prec)

    def zero(self, prec: Optional[int] = None) -> "PadicScalar":
        return self.scalar(0, prec)

    def one(self) -> "PadicScalar":
        return self.scalar(1)

    def from_fraction(self, value: Union[Fraction, int]) -> "PadicScalar":
        """有理数を埋め込む.

        Raises:
            EmbeddingDenominatorError: 分母が p で割り切れる場合

        """
        value = Fraction(value)
        if value.denominator % self.p == 0:
            raise EmbeddingDenominatorError(
                f"denominator of {value} is divisible by p={self.p}"
            )
        mod = self.modulus
        return self.scalar(value.numerator * pow(value.denominator, -1, mod) % mod)

    def root_of_unity(self, order: int) -> "PadicScalar":
        """ζ_m^{m/order} を返す."""
        if order < 1 or self.m % order != 0:
            raise InvalidParameterError(f"ring with m={self.m} has no primitive {order}-th root")
        return _zeta_power(self, self.m // order)

    def teichmuller_int(self, a: int) -> "PadicScalar":
        """整数 a のタイヒミュラー代表元 ω(a)."""
        return self.scalar(teichmuller_residue(a, self.p, self.N))


@lru_cache(maxsize=4096)
def _zeta_power(ring: CoeffRing, k: int) -> "PadicScalar":
    return ring.element(ring.zeta) ** k


@dataclass(frozen=True)
class PadicScalar:
    """O/p^prec の元. prec は絶対精度で ring.N 以下."""

    ring: CoeffRing
    coeffs: tuple[int, ...]
    prec: int

    # --- 基本情報 ---

    def valuation(self) -> Optional[int]:
        """p 進付値. 精度内で 0 と区別できなければ None（"≥ prec"）."""
        p = self.ring.p
        best = None
        for c in self.coeffs:
            if c:
                v = vp(c, p)
                if best is None or v < best:
                    best = v
        return best

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return any(c % self.ring.p for c in self.coeffs)

    def with_precision(self, prec: int) -> "PadicScalar":
        """精度を prec 以下に落とす."""
        prec = max(0, min(prec, self.prec))
        if prec == self.prec:
            return self
        mod = self.ring.p**prec
        return PadicScalar(self.ring, tuple(c % mod for c in self.coeffs), prec)

    def matched_digits(self, other: ScalarLike) -> int:
        """両者が一致している p 進桁数（共通精度で頭打ち）."""
        diff = self - other
        v = diff.valuation()
        return diff.prec if v is None else v

    def to_int(self) -> int:
        """d = 1 の元を [0, p^prec) の整数として返す."""
        if any(self.coeffs[1:]):
            raise InvalidParameterError("element does not lie in Z/p^N")
        return self.coeffs[0]

    def digits(self) -> list[list[int]]:
        """成分ごとの little-endian p 進桁."""
        p = self.ring.p
        out = []
        for c in self.coeffs:
            row = []
            for _ in range(self.prec):
                c, r = divmod(c, p)
                row.append(r)
            out.append(row)
        return out

    # --- 算術 ---

    def _coerce(self, other: ScalarLike) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.ring is not self.ring and other.ring != self.ring:
                raise InvalidParameterError("scalars live in different coefficient rings")
            return other
        if isinstance(other, int):
            return self.ring.scalar(other)
        return NotImplemented

    def __add__(self, other: ScalarLike) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        prec = min(self.prec, other.prec)
        mod = self.ring.p**prec
        return PadicScalar(
            self.ring, tuple((a + b) % mod for a, b in zip(self.coeffs, other.coeffs)), prec
        )

    __radd__ = __add__

    def __neg__(self) -> "PadicScalar":
        mod = self.ring.p**self.prec
        return PadicScalar(self.ring, tuple(-c % mod for c in self.coeffs), self.prec)

    def __sub__(self, other: ScalarLike) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: ScalarLike) -> "PadicScalar":
        return (-self) + other

    def __mul__(self, other: ScalarLike) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        va = self.valuation()
        vb = other.valuation()
        va = self.prec if va is None else va
        vb = other.prec if vb is None else vb
        prec = min(self.ring.N, self.prec + vb, other.prec + va)
        mod = self.ring.p**prec
        return PadicScalar(self.ring, _mul_coeffs(self.ring, self.coeffs, other.coeffs, mod), prec)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "PadicScalar":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.ring.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def shift(self, k: int) -> "PadicScalar":
        """p^k 倍. k < 0 なら p^{−k} による正確な除算（精度は k だけ落ちる）."""
        if k >= 0:
            prec = min(self.ring.N, self.prec + k)
            mod = self.ring.p**prec
            factor = self.ring.p**k
            return PadicScalar(self.ring, tuple(c * factor % mod for c in self.coeffs), prec)
        if self.prec + k <= 0:
            return self.ring.zero(0)
        div = self.ring.p ** (-k)
        if any(c % div for c in self.coeffs):
            raise IwasawaError(f"element is not divisible by p^{-k}")
        prec = max(0, self.prec + k)
        mod = self.ring.p**prec
        return PadicScalar(self.ring, tuple((c // div) % mod for c in self.coeffs), prec)

    def inverse(self) -> "PadicScalar":
        """単元の逆元.

        Raises:
            IwasawaError: 単元でない場合

        """
        if not self.is_unit():
            raise IwasawaError("only units can be inverted")
        mod = self.ring.p**self.prec
        if self.ring.d == 1:
            return PadicScalar(self.ring, (pow(self.coeffs[0], -1, mod),), self.prec)
        # a^{q−2} は mod p での逆元. ニュートン反復で持ち上げる
        y = self ** (self.ring.q - 2)
        for _ in range(self.prec.bit_length() + 1):
            y = y * (2 - self * y)
        return y.with_precision(self.prec)

    def divide_exact(self, other: ScalarLike) -> "PadicScalar":
        """self / other. other = p^v·(単元) のとき精度は v だけ落ちる.

        Raises:
            ZeroAtPrecision: other が精度内で 0 の場合
            IwasawaError: 割り切れない場合

        """
        other = self._coerce(other)
        v = other.valuation()
        if v is None:
            raise ZeroAtPrecision("division by an element indistinguishable from zero")
        unit = other.shift(-v)
        return self.shift(-v) * unit.inverse()

    def __repr__(self) -> str:
        body = self.coeffs[0] if self.ring.d == 1 else list(self.coeffs)
        return f"PadicScalar(p={self.ring.p}, {body}, prec={self.prec})"


def _mul_coeffs(ring: CoeffRing, a: tuple[int, ...], b: tuple[int, ...], mod: int) -> tuple[int, ...]:
    d = ring.d
    if d == 1:
        return (a[0] * b[0] % mod,)
    prod = [0] * (2 * d - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    h = ring.h
    # x^d = −Σ h_i x^i
    for k in range(2 * d - 2, d - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for i in range(d):
                prod[k - d + i] -= c * h[i]
    return tuple(c % mod for c in prod[:d])


def teichmuller(a: PadicScalar) -> PadicScalar:
    """a ≡ ω (mod p) を満たす 1 の (q−1) 乗根 ω.

    Raises:
        InvalidParameterError: a が単元でない場合

    """
    if not a.is_unit():
        raise InvalidParameterError("teichmuller lift requires a unit")
    q = a.ring.q
    x = a
    for _ in range(a.prec + 1):
        y = x**q
        if y == x:
            return x
        x = y
    return x


def cyclotomic_u(ring: CoeffRing) -> PadicScalar:
    """位相的生成元 γ の円分指標による像 u = 1 + p."""
    return ring.scalar(1 + ring.p)


def _validate_ring_parameters(p: int, m: int, N: int) -> None:
    if p == 2 or not isprime(p):
        raise InvalidParameterError(f"p must be an odd prime, got {p}")
    if m < 1 or gcd(m, p) != 1:
        raise InvalidParameterError(f"m must be a positive integer coprime to p, got m={m}")
    if N < 1:
        raise InvalidParameterError(f"precision must be positive, got N={N}")


@lru_cache(maxsize=None)
def make_coeff_ring(p: int, m: int = 1, N: int = 30) -> CoeffRing:
    """Z_p[ζ_m] を精度 N で構成する.

    Args:
        p: 奇素数
        m: p と素な正整数
        N: 精度

    Returns:
        剰余次数 d = ord_m(p) の係数環

    Raises:
        InvalidParameterError: p が奇素数でない, m が p と素でない, N < 1

    """
    _validate_ring_parameters(p, m, N)
    d = 1 if m <= 2 else int(n_order(p, m))

    if d == 1:
        if m == 1:
            ring = CoeffRing(p, 1, 1, N, (0, 1), (1,))
        else:
            g = int(primitive_root(p))
            z = teichmuller_residue(pow(g, (p - 1) // m, p), p, N)
            ring = CoeffRing(p, m, 1, N, ((-z) % p**N, 1), (z,))
    else:
        factors = Poly(cyclotomic_poly(m, _X), _X, modulus=p).factor_list()[1]
        factor = next(f for f, _ in factors if f.degree() == d)
        h0 = tuple(int(c) % p for c in reversed(factor.all_coeffs()))
        x_coords = (0, 1) + (0,) * (d - 2)
        base = CoeffRing(p, m, d, N, h0, x_coords)
        z = teichmuller(base.element(x_coords))
        # 最小多項式 ∏_{i<d} (X − z^{p^i})
        poly = [base.one()]
        conj = z
        for _ in range(d):
            shifted = [base.zero()] + poly
            scaled = [c * conj for c in poly] + [base.zero()]
            poly = [s - t for s, t in zip(shifted, scaled)]
            conj = conj**p
        if any(any(c.coeffs[1:]) for c in poly):
            raise IwasawaError(f"Hensel lift of Phi_{m} factor mod {p} did not descend to Z_p")
        h = tuple(c.coeffs[0] for c in poly)
        ring = CoeffRing(p, m, d, N, h, x_coords)

    reduced = Poly([c % p for c in reversed(ring.h)], _X, modulus=p)
    if ring.d > 1 and not reduced.is_irreducible:
        raise IwasawaError(f"defining polynomial is reducible modulo {p}")
    logger.debug(f"Coefficient ring built: p={p}, m={m}, d={ring.d}, N={N}")
    return ring
