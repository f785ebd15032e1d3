"""エタールコホモロジーの位数から K(1) 局所 K 理論のホモトピー群の位数への翻訳."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sympy import isprime

from .exceptions import InvalidParameterError
from .lfunctions import BranchSeries, lp_norm_at
from .orders import GroupOrder
from .padic import vp

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"
PARTIAL = "PARTIAL"
SKIPPED_INFINITE = "SKIPPED-INFINITE"
SKIPPED = "SKIPPED"


def _p_power(value: int, p: int) -> GroupOrder:
    v = vp(value, p)
    return GroupOrder.infinite(p) if v is None else GroupOrder(p, v)


def global_h0_order(p: int, n: int) -> GroupOrder:
    """♯H⁰(Z[1/p], Q_p/Z_p(n)).

    (p−1) | n のとき p^{1+v_p(n)}, それ以外は 1.

    Raises:
        InvalidParameterError: n = 0（無限）

    """
    if n == 0:
        raise InvalidParameterError("H^0 with Q_p/Z_p(0) coefficients is infinite")
    if n % (p - 1):
        return GroupOrder.trivial(p)
    return GroupOrder(p, 1 + vp(n, p))


def eigen_h0_order(series: BranchSeries, n: int) -> GroupOrder:
    """ψ 固有部分の H⁰. ψ が非自明なら不変元は 0."""
    if series.character.is_trivial:
        return global_h0_order(series.p, n)
    return GroupOrder.trivial(series.p)


def h1_order_from_L(series: BranchSeries, n: int, h0: Optional[GroupOrder] = None) -> GroupOrder:
    """♯H¹ = ♯H⁰ / |L_p(ψ, χ^n)|_p.

    Raises:
        ZeroAtPrecision: L 値が精度内で 0 の場合

    """
    h0 = eigen_h0_order(series, n) if h0 is None else h0
    norm = lp_norm_at(series, n)
    return h0 * GroupOrder(series.p, vp(norm.denominator, series.p))


@dataclass(frozen=True)
class LocalOrders:
    """(♯H⁰, ♯H¹, ♯H²) of Q_ℓ with Z_p(k) coefficients."""

    ell: int
    k: int
    h0: GroupOrder
    h1: GroupOrder
    h2: GroupOrder

    @property
    def is_finite(self) -> bool:
        return self.h0.is_finite and self.h1.is_finite and self.h2.is_finite

    def euler_exponent(self) -> Optional[int]:
        """log_p(♯H⁰·♯H²/♯H¹). 無限を含めば None."""
        if not self.is_finite:
            return None
        return self.h0.exponent + self.h2.exponent - self.h1.exponent

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "k": self.k,
            "h0": self.h0.to_json(),
            "h1": self.h1.to_json(),
            "h2": self.h2.to_json(),
        }


def local_h0_order(ell: int, k: int, p: int) -> GroupOrder:
    if k == 0:
        raise InvalidParameterError("local H^0 with Z_p(0) coefficients is infinite")
    if ell == p:
        return GroupOrder.trivial(p)
    return _p_power(ell ** abs(k) - 1, p)


def local_orders(ell: int, k: int, p: int) -> LocalOrders:
    """ℓ ≠ p の局所位数. H² は局所双対性, H¹ はオイラー標数 1 から.

    Raises:
        InvalidParameterError: k = 0, または ℓ = p, ℓ が素数でない場合

    """
    if ell == p or not isprime(ell):
        raise InvalidParameterError(f"local orders need a prime ell != p, got ell={ell}")
    h0 = local_h0_order(ell, k, p)
    h2 = _p_power(ell ** abs(k - 1) - 1, p)
    return LocalOrders(ell, k, h0, h0 * h2, h2)


def local_orders_at_p(k: int, p: int) -> LocalOrders:
    """v = p の局所位数. H¹ は正の階数を持つので無限."""
    if k == 0:
        raise InvalidParameterError("local H^0 with Z_p(0) coefficients is infinite")
    if k == 1:
        h2 = GroupOrder.infinite(p)
    elif (1 - k) % (p - 1) == 0:
        h2 = GroupOrder(p, 1 + vp(1 - k, p))
    else:
        h2 = GroupOrder.trivial(p)
    return LocalOrders(p, k, GroupOrder.trivial(p), GroupOrder.infinite(p), h2)


def _local_entry(ell: int, k: int, p: int) -> LocalOrders:
    if k == 0:
        inf = GroupOrder.infinite(p)
        return LocalOrders(ell, k, inf, inf, inf if ell != p else GroupOrder.trivial(p))
    return local_orders_at_p(k, p) if ell == p else local_orders(ell, k, p)


@dataclass(frozen=True)
class CohomologyOrderTable:
    """次数 n の大域位数と Σ の各素点の局所位数（係数 Z_p(1−n)）."""

    p: int
    n: int
    h0: GroupOrder
    h1: GroupOrder
    locals: tuple[LocalOrders, ...] = ()
    norm_exponent: Optional[int] = None
    character: Optional[str] = None
    global_k_orders: Optional[tuple[GroupOrder, GroupOrder]] = None

    def to_json(self) -> dict:
        data = {
            "p": self.p,
            "n": self.n,
            "h0": self.h0.to_json(),
            "h1": self.h1.to_json(),
            "locals": [entry.to_json() for entry in self.locals],
            "norm_exponent": self.norm_exponent,
            "character": self.character,
            "h1_source": "derived from the L-value norm",
        }
        if self.global_k_orders is not None:
            data["global_k_orders"] = [o.to_json() for o in self.global_k_orders]
        return data


def cohomology_table(
    series: BranchSeries,
    n: int,
    global_k_orders: Optional[tuple[GroupOrder, GroupOrder]] = None,
) -> CohomologyOrderTable:
    """L 級数から位数表を作る. Σ は series.sigma."""
    p = series.p
    h0 = eigen_h0_order(series, n)
    h1 = h1_order_from_L(series, n, h0)
    locals_ = tuple(_local_entry(ell, 1 - n, p) for ell in series.sigma)
    return CohomologyOrderTable(
        p=p,
        n=n,
        h0=h0,
        h1=h1,
        locals=locals_,
        norm_exponent=h1.exponent - h0.exponent,
        character=series.character.notation,
        global_k_orders=global_k_orders,
    )


@dataclass(frozen=True)
class HomotopyEntry:
    spectrum: str
    degree: int
    order: GroupOrder
    source: str

    def to_row(self) -> dict:
        return {"degree": self.degree, "group-label": self.spectrum, "order-exponent": self.order.to_json()}


@dataclass(frozen=True)
class HomotopyOrderTable:
    p: int
    n: int
    entries: tuple[HomotopyEntry, ...] = field(default_factory=tuple)

    def order(self, spectrum: str, degree: int) -> Optional[GroupOrder]:
        for entry in self.entries:
            if entry.spectrum == spectrum and entry.degree == degree:
                return entry.order
        return None

    def rows(self) -> list[dict]:
        return [entry.to_row() for entry in self.entries]


FIB_KAPPA = "fib_kappa"
FIB_TRACE = "fib_LK1_tr"
FIB_TRACE_P = "fib_tr_p"
FIB_KAPPA_DUAL = "fib_kappa_dual"


def local_k_label(ell: int) -> str:
    return f"LK1K_Q_{ell}"


def fib_orders(table: CohomologyOrderTable) -> HomotopyOrderTable:
    """記述スペクトル系列の表に従って位数を並べ替える.

    無限の位数はそのまま伝播する.
    """
    n = table.n
    entries = []
    for label in (FIB_KAPPA, FIB_TRACE):
        entries.append(HomotopyEntry(label, -1 - 2 * n, table.h0, "H0"))
        entries.append(HomotopyEntry(label, -2 * n, table.h1, "H1"))
    if n <= -1:
        entries.append(HomotopyEntry(FIB_TRACE_P, -1 - 2 * n, table.h0, "H0"))
        entries.append(HomotopyEntry(FIB_TRACE_P, -2 * n, table.h1, "H1"))
        if n % 2 == 0 and -n // 2 > 1:
            k = -n // 2
            entries.append(HomotopyEntry(FIB_TRACE_P, 4 * k - 1, table.h0, "H0"))
            entries.append(HomotopyEntry(FIB_TRACE_P, 4 * k, table.h1, "H1"))
    entries.append(HomotopyEntry(FIB_KAPPA_DUAL, 1 - 2 * n, table.h0, "H0 dual"))
    entries.append(HomotopyEntry(FIB_KAPPA_DUAL, 2 * n, table.h1, "H1 dual"))
    for local in table.locals:
        label = local_k_label(local.ell)
        h0_shift = GroupOrder.infinite(table.p) if n == 0 else local_h0_order(local.ell, -n, table.p)
        entries.append(HomotopyEntry(label, 1 - 2 * n, local.h1, "H1(Zp(1-n))"))
        entries.append(HomotopyEntry(label, -2 * n, h0_shift * local.h2, "H0(Zp(-n))+H2(Zp(1-n))"))
    return HomotopyOrderTable(table.p, n, tuple(entries))


@dataclass(frozen=True)
class ConsistencyCheck:
    position: str
    status: str
    expected: Optional[int] = None
    observed: Optional[int] = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "position": self.position,
            "status": self.status,
            "expected": self.expected,
            "observed": self.observed,
            "note": self.note,
        }


@dataclass(frozen=True)
class ConsistencyReport:
    checks: tuple[ConsistencyCheck, ...]

    @property
    def status(self) -> str:
        statuses = {check.status for check in self.checks}
        if FAIL in statuses:
            return FAIL
        if statuses & {SKIPPED, SKIPPED_INFINITE}:
            return PARTIAL
        return PASS

    def failures(self) -> list[ConsistencyCheck]:
        return [check for check in self.checks if check.status == FAIL]

    def to_json(self) -> dict:
        return {"status": self.status, "checks": [check.to_json() for check in self.checks]}


def _exponent_check(position: str, expected: int, observed: int, note: str = "") -> ConsistencyCheck:
    return ConsistencyCheck(position, PASS if expected == observed else FAIL, expected, observed, note)


def poitou_tate_consistency(
    table: CohomologyOrderTable, homotopy: Optional[HomotopyOrderTable] = None
) -> ConsistencyReport:
    """局所オイラー標数, ファイバー比と L ノルム, 積公式を照合する.

    v = p の項は H¹ が無限なので SKIPPED-INFINITE として記録する.
    """
    homotopy = fib_orders(table) if homotopy is None else homotopy
    p, n = table.p, table.n
    checks = []

    for local in table.locals:
        position = f"local:ell={local.ell}:k={local.k}"
        exponent = local.euler_exponent()
        if exponent is None:
            checks.append(ConsistencyCheck(position, SKIPPED_INFINITE, note="local cohomology has positive rank"))
        elif local.ell == p:
            checks.append(ConsistencyCheck(position, SKIPPED, observed=exponent, note="no closed form at v = p"))
        else:
            checks.append(_exponent_check(position, 0, exponent))

    a = homotopy.order(FIB_KAPPA, -1 - 2 * n)
    b = homotopy.order(FIB_KAPPA, -2 * n)
    if table.norm_exponent is None:
        checks.append(ConsistencyCheck("fiber-ratio", SKIPPED, note="no L-value norm recorded"))
    elif a is None or b is None or not (a.is_finite and b.is_finite):
        checks.append(ConsistencyCheck("fiber-ratio", SKIPPED_INFINITE, note="fiber orders are infinite"))
    else:
        checks.append(_exponent_check("fiber-ratio", table.norm_exponent, b.exponent - a.exponent))

    checks.append(_product_formula_check(table, homotopy))
    report = ConsistencyReport(tuple(checks))
    logger.info(f"Poitou-Tate consistency p={p} n={n}: {report.status}")
    return report


def _product_formula_check(table: CohomologyOrderTable, homotopy: HomotopyOrderTable) -> ConsistencyCheck:
    position = "product-formula"
    if table.global_k_orders is None or table.norm_exponent is None:
        return ConsistencyCheck(position, SKIPPED, note="global K-theory orders not supplied")
    n = table.n
    odd, even = table.global_k_orders
    exponent = 0 if odd.is_finite and even.is_finite else None
    if exponent is not None:
        exponent = odd.exponent - even.exponent
    for local in table.locals:
        label = local_k_label(local.ell)
        top = homotopy.order(label, -2 * n)
        bottom = homotopy.order(label, 1 - 2 * n)
        if top is None or bottom is None or not (top.is_finite and bottom.is_finite) or exponent is None:
            return ConsistencyCheck(
                position, SKIPPED_INFINITE, note=f"v={local.ell} contributes a group of positive rank"
            )
        exponent += top.exponent - bottom.exponent
    # |L|_p = p^{-norm_exponent}
    return _exponent_check(position, -table.norm_exponent, exponent)


def fiber_ratio(homotopy: HomotopyOrderTable, spectrum: str = FIB_KAPPA) -> Fraction:
    """♯π_{−1−2n}fib / ♯π_{−2n}fib."""
    n = homotopy.n
    a = homotopy.order(spectrum, -1 - 2 * n)
    b = homotopy.order(spectrum, -2 * n)
    if a is None or b is None or not (a.is_finite and b.is_finite):
        raise InvalidParameterError(f"fiber orders of {spectrum} are not finite")
    return Fraction(homotopy.p) ** (a.exponent - b.exponent)
