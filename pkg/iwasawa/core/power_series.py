"""岩澤代数 Λ = O⟦T⟧ の打ち切り冪級数モデル."""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

from .exceptions import (
    AllZeroAtPrecision,
    InvalidParameterError,
    IwasawaError,
    NotDistinguishedError,
    NotInMaximalIdealError,
    TruncationTooSmall,
)
from .padic import CoeffRing, PadicScalar, make_coeff_ring

logger = logging.getLogger(__name__)

SERIES_RECORD_VERSION = 1

Poly = list[PadicScalar]


@dataclass(frozen=True)
class PowerSeries:
    """c_0 + c_1 T + … + c_{M−1} T^{M−1} mod (p^N, T^M).

    各係数が自分の精度を持ち, その列が精度台帳になる.
    """

    ring: CoeffRing
    coeffs: tuple[PadicScalar, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise InvalidParameterError("truncation order M must be at least 1")

    # --- 構成 ---

    @classmethod
    def from_ints(cls, ring: CoeffRing, values: Sequence[int], M: Optional[int] = None) -> "PowerSeries":
        M = len(values) if M is None else M
        if len(values) > M:
            raise InvalidParameterError(f"{len(values)} coefficients do not fit in truncation M={M}")
        padded = list(values) + [0] * (M - len(values))
        return cls(ring, tuple(ring.scalar(v) for v in padded))

    @classmethod
    def from_scalars(cls, ring: CoeffRing, values: Sequence[PadicScalar], M: int) -> "PowerSeries":
        if len(values) > M and any(not c.is_zero() for c in values[M:]):
            raise InvalidParameterError(f"series does not fit in truncation M={M}")
        padded = list(values[:M]) + [ring.zero()] * (M - len(values))
        return cls(ring, tuple(padded))

    @classmethod
    def constant(cls, ring: CoeffRing, value: Union[PadicScalar, int], M: int) -> "PowerSeries":
        value = ring.scalar(value) if isinstance(value, int) else value
        return cls.from_scalars(ring, [value], M)

    @classmethod
    def variable(cls, ring: CoeffRing, M: int) -> "PowerSeries":
        """T."""
        return cls.from_ints(ring, [0, 1], max(M, 2))

    # --- 基本情報 ---

    @property
    def M(self) -> int:
        return len(self.coeffs)

    @property
    def ledger(self) -> tuple[int, ...]:
        return tuple(c.prec for c in self.coeffs)

    def __getitem__(self, j: int) -> PadicScalar:
        return self.coeffs[j]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def degree(self) -> Optional[int]:
        """精度内で 0 でない最高次の係数の次数."""
        for j in range(self.M - 1, -1, -1):
            if not self.coeffs[j].is_zero():
                return j
        return None

    def with_ledger_cap(self, caps: Sequence[int]) -> "PowerSeries":
        return PowerSeries(self.ring, tuple(c.with_precision(k) for c, k in zip(self.coeffs, caps)))

    # --- 算術 ---

    def _coerce(self, other: Any) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            return other
        if isinstance(other, (int, PadicScalar)):
            return PowerSeries.constant(self.ring, other, self.M)
        return NotImplemented

    def __add__(self, other: Any) -> "PowerSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        M = min(self.M, other.M)
        return PowerSeries(self.ring, tuple(a + b for a, b in zip(self.coeffs[:M], other.coeffs[:M])))

    __radd__ = __add__

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(self.ring, tuple(-c for c in self.coeffs))

    def __sub__(self, other: Any) -> "PowerSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "PowerSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "PowerSeries":
        if isinstance(other, (int, PadicScalar)):
            return PowerSeries(self.ring, tuple(c * other for c in self.coeffs))
        if not isinstance(other, PowerSeries):
            return NotImplemented
        M = min(self.M, other.M)
        return PowerSeries(self.ring, tuple(poly_mul(list(self.coeffs[:M]), list(other.coeffs[:M]), M)))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "PowerSeries":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = PowerSeries.constant(self.ring, 1, self.M)
        for _ in range(exponent):
            result = result * self
        return result

    def inverse(self) -> "PowerSeries":
        """定数項が単元の級数の逆元."""
        return PowerSeries(self.ring, tuple(_series_inverse(list(self.coeffs), self.M)))

    # --- 直列化 ---

    def to_record(self) -> dict:
        """バージョン付き直列化レコード（桁は little-endian）."""
        return {
            "version": SERIES_RECORD_VERSION,
            "p": self.ring.p,
            "m": self.ring.m,
            "N": self.ring.N,
            "M": self.M,
            "ledger": list(self.ledger),
            "digits": [c.digits() for c in self.coeffs],
        }

    @classmethod
    def from_record(cls, record: dict) -> "PowerSeries":
        """to_record の逆.

        Raises:
            InvalidParameterError: バージョンや形状が合わない場合

        """
        if record.get("version") != SERIES_RECORD_VERSION:
            raise InvalidParameterError(f"unsupported series record version: {record.get('version')}")
        ring = make_coeff_ring(int(record["p"]), int(record["m"]), int(record["N"]))
        M = int(record["M"])
        ledger = record["ledger"]
        digits = record["digits"]
        if len(ledger) != M or len(digits) != M:
            raise InvalidParameterError("series record ledger/digits do not match M")
        coeffs = []
        for prec, comps in zip(ledger, digits):
            values = [sum(dig * ring.p**k for k, dig in enumerate(row)) for row in comps]
            coeffs.append(ring.element(values, int(prec)))
        return cls(ring, tuple(coeffs))


# --- 多項式ヘルパー（係数は low → high） ---


def poly_mul(a: Poly, b: Poly, limit: Optional[int] = None) -> Poly:
    if not a or not b:
        return []
    ring = a[0].ring
    size = len(a) + len(b) - 1
    if limit is not None:
        size = min(size, limit)
    out = [ring.zero() for _ in range(size)]
    for i, x in enumerate(a):
        if i >= size:
            break
        if x.is_zero() and x.prec == ring.N:
            continue
        for j in range(min(len(b), size - i)):
            out[i + j] = out[i + j] + x * b[j]
    return out


def _poly_trim(a: Poly) -> Poly:
    end = len(a)
    while end > 0 and a[end - 1].is_zero():
        end -= 1
    return a[:end]


def _poly_divmod_monic(f: Poly, P: Poly) -> tuple[Poly, Poly]:
    """モニック多項式 P による割り算 f = q·P + r, deg r < deg P."""
    ring = P[0].ring
    lam = len(P) - 1
    r = list(f)
    if len(r) <= lam:
        return [], r + [ring.zero()] * (lam - len(r))
    q = [ring.zero() for _ in range(len(r) - lam)]
    for k in range(len(r) - 1, lam - 1, -1):
        c = r[k]
        q[k - lam] = c
        if c.is_zero() and c.prec == ring.N:
            continue
        for i in range(lam + 1):
            r[k - lam + i] = r[k - lam + i] - c * P[i]
    return q, r[:lam]


def _series_inverse(a: Poly, M: int) -> Poly:
    ring = a[0].ring
    a0_inv = a[0].inverse()
    out = [a0_inv]
    for j in range(1, M):
        acc = ring.zero()
        for k in range(1, min(j, len(a) - 1) + 1):
            acc = acc + a[k] * out[j - k]
        out.append(-(acc * a0_inv))
    return out


# --- ワイエルシュトラス理論 ---


@dataclass(frozen=True)
class WeierstrassData:
    """f = p^μ · P · U の分解."""

    mu: int
    lambda_: int
    distinguished: PowerSeries
    unit: PowerSeries

    def recombine(self) -> PowerSeries:
        return (self.distinguished * self.unit) * self.unit.ring.scalar(self.unit.ring.p**self.mu)


def is_distinguished(P: Sequence[PadicScalar]) -> bool:
    """モニックで, 先頭以外の係数が p で割り切れるか."""
    coeffs = _poly_trim(list(P))
    if not coeffs:
        return False
    lead = coeffs[-1]
    if (lead - 1).valuation() is not None:
        return False
    return all(not c.is_unit() for c in coeffs[:-1])


def weierstrass_prep(f: PowerSeries) -> WeierstrassData:
    """ワイエルシュトラス準備定理.

    p^{−μ}f を多項式 Σ_{j<M} c_j T^j と見て, 分解 T^λ·(単元) を線形
    ヘンゼル反復で持ち上げる. 1回の反復で少なくとも1桁精度が上がる.

    Args:
        f: 打ち切り冪級数

    Returns:
        WeierstrassData

    Raises:
        AllZeroAtPrecision: 精度内で 0（μ が決まらない）
        TruncationTooSmall: M 未満に単元係数がない

    """
    ring = f.ring
    M = f.M
    valuations = [c.valuation() for c in f.coeffs]
    finite = [v for v in valuations if v is not None]
    if not finite:
        raise AllZeroAtPrecision("series is zero at its precision; mu is undeterminable")
    mu = min(finite)
    lam = next((j for j, v in enumerate(valuations) if v == mu), None)
    if any(v is None and c.prec <= mu for v, c in zip(valuations[:lam], f.coeffs[:lam])):
        raise AllZeroAtPrecision("a low-order coefficient is known to fewer than mu digits")
    g = _poly_trim([c.shift(-mu) if not c.is_zero() else c.with_precision(c.prec - mu) for c in f.coeffs])
    if lam is None or lam >= M:
        raise TruncationTooSmall(f"no unit coefficient below truncation M={M}")

    P = [ring.zero() for _ in range(lam)] + [ring.one()]
    iterations = 0
    while True:
        V, R = _poly_divmod_monic(g, P)
        if all(c.is_zero() for c in R) or iterations > ring.N + 1:
            break
        V_inv = _series_inverse(V, lam)
        delta = poly_mul(R, V_inv, lam)
        P = [a + b for a, b in zip(P[:lam], delta)] + [ring.one()]
        iterations += 1
    logger.debug(f"Weierstrass preparation: mu={mu}, lambda={lam}, iterations={iterations}")

    return WeierstrassData(
        mu=mu,
        lambda_=lam,
        distinguished=PowerSeries.from_scalars(ring, P, max(M, lam + 1)),
        unit=PowerSeries.from_scalars(ring, V, M) if V else PowerSeries.constant(ring, 1, M),
    )


def weierstrass_divide(f: PowerSeries, P: PowerSeries) -> tuple[PowerSeries, PowerSeries]:
    """特殊多項式 P による割り算 f = q·P + r.

    Raises:
        NotDistinguishedError: P が特殊多項式でない, または deg P ≥ M の場合

    """
    divisor = _poly_trim(list(P.coeffs))
    if not is_distinguished(divisor) or len(divisor) - 1 >= f.M:
        raise NotDistinguishedError("divisor must be a distinguished polynomial of degree < M")
    divisor[-1] = f.ring.one()
    q, r = _poly_divmod_monic(list(f.coeffs), divisor)
    return (
        PowerSeries.from_scalars(f.ring, q, f.M),
        PowerSeries.from_scalars(f.ring, r, max(len(r), 1)),
    )


def twist_substitute(f: PowerSeries, c: PadicScalar) -> PowerSeries:
    """f(c(1+T) − 1) mod (p^N, T^M).

    Raises:
        NotInMaximalIdealError: v(c − 1) < 1 の場合

    """
    shift = c - 1
    if shift.is_unit():
        raise NotInMaximalIdealError("twist parameter c must satisfy c ≡ 1 mod p")
    linear = [shift, c]
    M = f.M
    acc: Poly = [f.ring.zero()]
    for coeff in reversed(f.coeffs):
        acc = poly_mul(acc, linear, M)
        acc[0] = acc[0] + coeff
    return PowerSeries.from_scalars(f.ring, acc, M)


def evaluate_at(f: PowerSeries, t: PadicScalar) -> PadicScalar:
    """Σ c_j t^j. 精度は台帳と打ち切り誤差 p^{M·v(t)} の小さい方.

    Raises:
        NotInMaximalIdealError: t が単元の場合

    """
    if t.is_unit():
        raise NotInMaximalIdealError("evaluation point must lie in the maximal ideal")
    v = t.valuation()
    v = t.prec if v is None else v
    acc = f.ring.zero()
    for coeff in reversed(f.coeffs):
        acc = acc * t + coeff
    return acc.with_precision(f.M * v)


def poly_to_series(ring: CoeffRing, coeffs: Sequence[PadicScalar], M: int) -> PowerSeries:
    """多項式を打ち切り次数 M の級数にする（次数 ≥ M は IwasawaError）."""
    trimmed = _poly_trim(list(coeffs))
    if len(trimmed) > M:
        raise IwasawaError(f"polynomial of degree {len(trimmed) - 1} overflows truncation M={M}")
    return PowerSeries.from_scalars(ring, trimmed, M)
