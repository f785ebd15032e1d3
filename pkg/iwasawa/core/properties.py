"""シード付きの性質検査スイート（selftest と module-ec で使用）."""

import logging
import random
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from sympy import primerange

from .bockstein import (
    PerfectComplex,
    acyclic_pair,
    bockstein_cohomology,
    bockstein_euler_char,
    direct_sum,
    elementary_resolution,
)
from .characters import DirichletCharacter, all_characters, is_type_S
from .exceptions import IwasawaError, NotSemisimpleError, PrecisionError
from .lfunctions import (
    branch_scan,
    build_kl_series,
    irregular_indices,
    lp_norm_at,
    strategy_agreement,
    verify_interpolation,
)
from .linalg import is_zero_matrix, mat_mul, mat_sub
from .modules import (
    characteristic_element,
    eigenspace_decompose,
    finite_cohomology_orders,
    gamma_cohomology_orders,
    pontryagin_dual,
    random_delta_module,
    random_elementary_module,
    random_finite_gamma_module,
    regular_delta_module,
    twist_module,
)
from .orders import GroupOrder
from .padic import cyclotomic_u, make_coeff_ring
from .power_series import PowerSeries, evaluate_at, twist_substitute, weierstrass_prep
from .spectra import (
    CohomologyOrderTable,
    cohomology_table,
    fib_orders,
    fiber_ratio,
    local_orders,
    poitou_tate_consistency,
)

logger = logging.getLogger(__name__)

DEFAULT_COUNT = 100
SUITES = (
    "formula3",
    "twist",
    "duality",
    "eigenspace",
    "local-euler",
    "bockstein",
    "interpolation",
    "irregular",
)


@dataclass
class SuiteResult:
    """1 つのスイートの実行結果."""

    name: str
    count: int = 0
    skipped: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    rows: list[dict[str, Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.failures:
            return "FAIL"
        if self.count and self.skipped == self.count:
            return "PARTIAL"
        return "PASS"

    def fail(self, **details: Any) -> None:
        self.failures.append(details)

    def to_json(self) -> dict[str, Any]:
        return {
            "suite": self.name,
            "status": self.status,
            "count": self.count,
            "skipped": self.skipped,
            "failures": self.failures,
            "notes": self.notes,
        }


def suite_rng(seed: int, name: str) -> random.Random:
    """スイートごとに独立で再現可能な乱数列."""
    return random.Random(f"{seed}:{name}")


def _valuation_at(series: PowerSeries, n: int) -> Optional[int]:
    t = cyclotomic_u(series.ring) ** n - 1
    return evaluate_at(series, t).valuation()


def formula3_suite(p: int, seed: int, count: int = 200, N: int = 30, max_n: int = 8) -> SuiteResult:
    """v(ch(M)(u^n − 1)) = v(♯H¹) − v(♯H⁰)."""
    result = SuiteResult("formula3")
    rng = suite_rng(seed, result.name)
    ring = make_coeff_ring(p, 1, N)
    for index in range(count):
        module = random_elementary_module(rng, ring)
        n = rng.randint(-max_n, max_n)
        result.count += 1
        try:
            h0, h1 = gamma_cohomology_orders(module, n)
        except PrecisionError:
            result.skipped += 1
            continue
        v = _valuation_at(characteristic_element(module), n)
        row = {"index": index, "n": n, "mu": module.mu, "lambda": module.lambda_}
        if not (h0.is_finite and h1.is_finite):
            row.update(valuation="infinite", h0="infinite", h1="infinite")
            if v is not None:
                result.fail(index=index, n=n, reason="cohomology infinite but evaluation nonzero", valuation=v)
            else:
                result.skipped += 1
            result.rows.append(row)
            continue
        row.update(valuation=v, h0=h0.exponent, h1=h1.exponent)
        result.rows.append(row)
        if v is None:
            result.skipped += 1
        elif v * ring.d != h1.exponent - h0.exponent:
            result.fail(index=index, n=n, valuation=v, h0=h0.exponent, h1=h1.exponent)
    return result


def twist_suite(p: int, seed: int, count: int = 100, N: int = 30) -> SuiteResult:
    """Tw(ch(M(n))) と ch(M) の μ, λ と 5 点での付値が一致する."""
    result = SuiteResult("twist")
    rng = suite_rng(seed, result.name)
    ring = make_coeff_ring(p, 1, N)
    u = cyclotomic_u(ring)
    for index in range(count):
        module = random_elementary_module(rng, ring)
        n = rng.choice([k for k in range(-6, 7) if k])
        result.count += 1
        original = characteristic_element(module)
        restored = twist_substitute(characteristic_element(twist_module(module, n)), u**n)
        a, b = weierstrass_prep(original), weierstrass_prep(restored)
        if (a.mu, a.lambda_) != (b.mu, b.lambda_):
            result.fail(index=index, n=n, expected=[a.mu, a.lambda_], observed=[b.mu, b.lambda_])
            continue
        for k in range(1, 6):
            va, vb = _valuation_at(original, k), _valuation_at(restored, k)
            if va is not None and vb is not None and va != vb:
                result.fail(index=index, n=n, point=k, expected=va, observed=vb)
                break
    return result


def duality_suite(p: int, seed: int, count: int = 100, N: int = 30) -> SuiteResult:
    """♯H⁰(Γ, A^∨) = ♯H_0(Γ, A), ♯H¹(Γ, A^∨) = ♯H_1(Γ, A)."""
    result = SuiteResult("duality")
    rng = suite_rng(seed, result.name)
    ring = make_coeff_ring(p, 1, N)
    for index in range(count):
        module = random_finite_gamma_module(rng, ring)
        result.count += 1
        ker, coker = finite_cohomology_orders(module)
        dual_ker, dual_coker = finite_cohomology_orders(pontryagin_dual(module))
        if dual_ker != coker or dual_coker != ker:
            result.fail(
                index=index,
                expected=[coker.to_json(), ker.to_json()],
                observed=[dual_ker.to_json(), dual_coker.to_json()],
            )
    return result


def eigenspace_suite(
    seed: int, primes: tuple[int, ...] = (5, 7), orders: tuple[int, ...] = (2, 3, 4, 6), N: int = 6
) -> SuiteResult:
    """∏_ψ ♯A^ψ = ♯A と e_ψ e_φ = δ_ψφ e_ψ."""
    result = SuiteResult("eigenspace")
    rng = suite_rng(seed, result.name)
    for p in primes:
        for m in orders:
            ring = make_coeff_ring(p, m, N)
            for regular, module in ((True, regular_delta_module(ring, m)), (False, random_delta_module(rng, ring, m))):
                result.count += 1
                components = [eigenspace_decompose(module, psi) for psi in module.characters()]
                total = sum(c.order_exponent for c in components)
                if total != module.order_exponent:
                    result.fail(p=p, m=m, expected=module.order_exponent, observed=total)
                    continue
                if not regular:
                    continue
                k = len(module.divisors)
                for a in components:
                    for b in components:
                        product = mat_mul(ring, a.idempotent, b.idempotent, k)
                        target = a.idempotent if a.character == b.character else [[ring.zero()] * k for _ in range(k)]
                        if not is_zero_matrix(mat_sub(product, target)):
                            result.fail(p=p, m=m, psi=list(a.character), phi=list(b.character))
    return result


def local_euler_suite(p: int, seed: int, count: int = 200) -> SuiteResult:
    """ℓ ≠ p の局所オイラー標数は 1. 位数を p 倍すると検出される."""
    result = SuiteResult("local-euler")
    rng = suite_rng(seed, result.name)
    primes = [ell for ell in primerange(2, 200) if ell != p]
    for _ in range(count):
        ell = rng.choice(primes)
        k = rng.choice([k for k in range(-24, 25) if k not in (0, 1)])
        result.count += 1
        local = local_orders(ell, k, p)
        if local.euler_exponent() != 0:
            result.fail(ell=ell, k=k, exponent=local.euler_exponent())
    # 故障注入
    planted = local_orders(2, 4, p)
    faulty = replace(planted, h1=planted.h1 * GroupOrder(p, 1))
    table = CohomologyOrderTable(p, p - 1, GroupOrder.trivial(p), GroupOrder.trivial(p), (faulty,), 0)
    report = poitou_tate_consistency(table)
    result.count += 1
    if not any(check.position.startswith("local:ell=2") for check in report.failures()):
        result.fail(reason="planted local order error was not detected")
    return result


def _trivial_twist_flagged(ring) -> bool:
    T2 = PowerSeries.from_ints(ring, [0, 0, 1], 16)
    complex_ = PerfectComplex.from_series(ring, (1, 1), [[[T2]]], 16)
    return bockstein_cohomology(complex_, ring.one()).semisimple is False


def bockstein_suite(p: int, seed: int, count: int = 100, N: int = 30) -> SuiteResult:
    """ボックスタイン交代積 = 群コホモロジーの比 = 特性元の値の付値."""
    result = SuiteResult("bockstein")
    rng = suite_rng(seed, result.name)
    ring = make_coeff_ring(p, 1, N)
    u = cyclotomic_u(ring)
    for index in range(count):
        module = random_elementary_module(rng, ring, max_pieces=2, max_degree=2, truncation=8)
        n = rng.randint(-6, 6)
        result.count += 1
        complex_ = elementary_resolution(module)
        try:
            h0, h1 = gamma_cohomology_orders(module, n)
            euler = bockstein_euler_char(complex_, u**n)
        except NotSemisimpleError:
            v = _valuation_at(characteristic_element(module), n)
            if v is not None:
                result.fail(index=index, n=n, reason="flagged non-semisimple with nonzero evaluation")
            else:
                result.skipped += 1
            continue
        except PrecisionError:
            result.skipped += 1
            continue
        group = h0.exponent - h1.exponent if h0.is_finite and h1.is_finite else None
        if group is None or euler.exponent != group or euler.comparison_exponent != euler.exponent:
            result.fail(
                index=index, n=n, bockstein=euler.exponent, group=group, evaluation=euler.comparison_exponent
            )
            continue
        if index % 2 == 0:
            padded = direct_sum(complex_, acyclic_pair(ring, 1, complex_.truncation))
            if bockstein_euler_char(padded, u**n).exponent != euler.exponent:
                result.fail(index=index, n=n, reason="acyclic summand changed the Bockstein orders")
    result.count += 1
    if not _trivial_twist_flagged(ring):
        result.fail(reason="[T^2] complex with trivial twist was not flagged non-semisimple")
    return result


def type_s_characters(p: int, limit: int = 2, max_modulus: int = 12) -> list[DirichletCharacter]:
    """導手 max_modulus 以下の原始的なタイプ S 指標を小さい順に."""
    found = []
    for f in range(3, max_modulus + 1):
        if f % p == 0:
            continue
        for psi in all_characters(f):
            if psi.conductor == f and is_type_S(psi, p):
                found.append(psi)
                if len(found) == limit:
                    return found
    return found


def interpolation_suite(p: int, N: int = 40, M: int = 16, points: int = 3, min_digits: int = 15) -> SuiteResult:
    """補間点での一致, 二つの構成の一致, ファイバー比と L ノルムの一致."""
    result = SuiteResult("interpolation")
    for psi in type_s_characters(p):
        result.count += 1
        series = build_kl_series(psi, p, N, M, "interpolation")
        entries = verify_interpolation(series, points, min_digits)
        bad = [e.to_json() for e in entries if e.status != "match"]
        if bad:
            result.fail(character=psi.notation, entries=bad)
            continue
        for e in entries:
            table = cohomology_table(series, e.n)
            if fiber_ratio(fib_orders(table)) != lp_norm_at(series, e.n):
                result.fail(character=psi.notation, n=e.n, reason="fiber ratio differs from L-norm")
        result.rows.append({"character": psi.notation, "digits": min(e.matched_digits for e in entries)})
    if result.count:
        psi = type_s_characters(p, 1)[0]
        result.count += 1
        try:
            first = build_kl_series(psi, p, N, 6, "interpolation")
            second = build_kl_series(psi, p, N, 6, "stickelberger")
            deficits = strategy_agreement(first, second)
            if any(deficits):
                result.fail(character=psi.notation, reason="strategies disagree", deficits=deficits)
        except IwasawaError as e:
            result.fail(character=psi.notation, reason=e.message)
    return result


def irregular_suite(p: int = 37, N: int = 25, M: int = 10) -> SuiteResult:
    """自明指標の偶分岐で λ > 0 となる分岐とベルヌーイ数の分子の p 可除性."""
    result = SuiteResult("irregular")
    entries = branch_scan(p, N, M)
    irregular = set(irregular_indices(p))
    for entry in entries:
        result.count += 1
        divisible = entry.branch in irregular
        if entry.mu != 0 or (entry.lambda_ > 0) != divisible:
            result.fail(branch=entry.branch, mu=entry.mu, lambda_=entry.lambda_, bernoulli_divisible=divisible)
        result.rows.append(entry.to_json())
    result.notes.append(f"branches with lambda>0: {[e.branch for e in entries if e.lambda_]}")
    return result


def run_suite(name: str, p: int, seed: int, count: Optional[int] = None) -> SuiteResult:
    """名前でスイートを実行する."""
    n = DEFAULT_COUNT if count is None else count
    logger.info(f"Running suite {name} (p={p}, seed={seed}, count={n})")
    if name == "formula3":
        return formula3_suite(p, seed, 2 * n)
    if name == "twist":
        return twist_suite(p, seed, n)
    if name == "duality":
        return duality_suite(p, seed, n)
    if name == "eigenspace":
        return eigenspace_suite(seed)
    if name == "local-euler":
        return local_euler_suite(p, seed, 2 * n)
    if name == "bockstein":
        return bockstein_suite(p, seed, n)
    if name == "interpolation":
        return interpolation_suite(p)
    if name == "irregular":
        return irregular_suite()
    raise IwasawaError(f"unknown suite '{name}'")
