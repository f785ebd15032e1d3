"""久保田–レオポルド型 p 進 L 級数の構成, 検証, μ/λ 不変量."""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from math import comb, gcd
from typing import Iterable, Optional

from sympy import isprime

from .characters import DirichletCharacter, bernoulli_number, is_type_S, truncated_L_value
from .exceptions import (
    InvalidParameterError,
    LevelTooSmall,
    NotTypeSError,
    PrecisionBudgetExceeded,
    ZeroAtPrecision,
)
from .modules import ElementaryModule, MuPiece, PolyPiece
from .padic import CoeffRing, PadicScalar, cyclotomic_u, log_u, make_coeff_ring, teichmuller_residue, vp
from .power_series import PowerSeries, evaluate_at, poly_mul, weierstrass_prep

logger = logging.getLogger(__name__)

STRATEGIES = ("auto", "interpolation", "stickelberger")
DEFAULT_LEVEL = 3


def vp_factorial(n: int, p: int) -> int:
    """v_p(n!)（ルジャンドルの公式）."""
    total = 0
    power = p
    while power <= n:
        total += n // power
        power *= p
    return total


def interpolation_loss(degree: int, p: int) -> int:
    """次数 d のニュートン係数が失う桁数 d + v_p(d!)."""
    return degree + vp_factorial(degree, p)


def _floor_log(j: int, p: int) -> int:
    e = 0
    while p ** (e + 1) <= j:
        e += 1
    return e


def stickelberger_ledger(level: int, M: int, p: int) -> list[int]:
    """レベル level のリーマン和で得られる係数の桁数."""
    return [level + 1] + [level - _floor_log(j, p) for j in range(1, M)]


@dataclass(frozen=True)
class VerificationEntry:
    """補間点 n での照合結果."""

    n: int
    matched_digits: int
    precision: int
    status: str  # "match" | "mismatch" | "insufficient"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "matched_digits": self.matched_digits,
            "precision": self.precision,
            "status": self.status,
        }


@dataclass(frozen=True)
class BranchSeries:
    """L_p(ψω^i, T) と構成方法, 照合記録."""

    character: DirichletCharacter
    p: int
    branch: int
    series: PowerSeries
    strategy: str
    sigma: tuple[int, ...]
    level: Optional[int] = None
    verification: tuple[VerificationEntry, ...] = ()

    @property
    def ring(self) -> CoeffRing:
        return self.series.ring

    @property
    def verified(self) -> bool:
        return bool(self.verification) and all(e.status == "match" for e in self.verification)

    def with_verification(self, entries: Iterable[VerificationEntry]) -> "BranchSeries":
        return replace(self, verification=tuple(entries))

    def to_record(self) -> dict:
        return {
            "character": self.character.notation,
            "p": self.p,
            "branch": self.branch,
            "strategy": self.strategy,
            "sigma": list(self.sigma),
            "level": self.level,
            "series": self.series.to_record(),
            "verification": [e.to_json() for e in self.verification],
        }

    @classmethod
    def from_record(cls, record: dict) -> "BranchSeries":
        return cls(
            character=DirichletCharacter.from_notation(record["character"]),
            p=int(record["p"]),
            branch=int(record["branch"]),
            series=PowerSeries.from_record(record["series"]),
            strategy=str(record["strategy"]),
            sigma=tuple(int(x) for x in record["sigma"]),
            level=record.get("level"),
            verification=tuple(VerificationEntry(**e) for e in record.get("verification", [])),
        )


def normalize_sigma(p: int, sigma: Optional[Iterable[int]] = None) -> tuple[int, ...]:
    """Σ に p を加えて昇順に並べる."""
    primes = set(int(x) for x in (sigma or ())) | {p}
    bad = [x for x in primes if not isprime(x)]
    if bad:
        raise InvalidParameterError(f"Sigma must consist of primes, got {sorted(bad)}")
    return tuple(sorted(primes))


def check_branch(psi: DirichletCharacter, p: int, branch: int) -> None:
    """(ψ, i) が構成可能な分岐か確認する.

    Raises:
        NotTypeSError: i = 0 で ψ がタイプ S でない
        InvalidParameterError: i ≠ 0 で条件を満たさない

    """
    if not 0 <= branch <= p - 2:
        raise InvalidParameterError(f"branch must lie in [0, {p - 2}], got {branch}")
    if psi.modulus % p == 0:
        raise InvalidParameterError(f"character modulus {psi.modulus} must be coprime to p={p}")
    if branch == 0:
        if not is_type_S(psi, p):
            hint = "; odd characters live on odd branches, try branch=1 (--branch 1)" if psi.parity == -1 else ""
            raise NotTypeSError(f"character {psi.notation} is not of type S for p={p}{hint}")
        return
    if psi.order % p == 0:
        raise InvalidParameterError(f"order of {psi.notation} is divisible by p={p}")
    if psi.parity != (-1) ** branch:
        raise InvalidParameterError(f"parity of {psi.notation} does not match branch {branch}")


def interpolation_points(p: int, branch: int, count: int) -> list[int]:
    """n ≡ i (mod p−1) の補間点. i = 0 では n = 0 を含めない."""
    start = 1 if branch == 0 else 0
    return [branch + k * (p - 1) for k in range(start, start + count)]


def _embedded_values(psi: DirichletCharacter, ring: CoeffRing, ns: list[int], sigma: tuple[int, ...]) -> list[PadicScalar]:
    return [truncated_L_value(psi, n, sigma).embed(ring) for n in ns]


def _interpolation_series(
    psi: DirichletCharacter, ring: CoeffRing, M: int, branch: int, sigma: tuple[int, ...]
) -> PowerSeries:
    p, N = ring.p, ring.N
    if interpolation_loss(M - 1, p) >= N:
        raise PrecisionBudgetExceeded(
            f"interpolation with M={M} loses {interpolation_loss(M - 1, p)} digits, precision N={N}"
        )
    ns = interpolation_points(p, branch, M)
    u = cyclotomic_u(ring)
    xs = [u**n - 1 for n in ns]
    a = _embedded_values(psi, ring, ns, sigma)
    # ニュートン差分商
    for j in range(1, M):
        for i in range(M - 1, j - 1, -1):
            a[i] = (a[i] - a[i - 1]).divide_exact(xs[i] - xs[i - j])
    a = [c.with_precision(N - interpolation_loss(d, p)) for d, c in enumerate(a)]
    poly = [a[M - 1]]
    for d in range(M - 2, -1, -1):
        poly = poly_mul(poly, [-xs[d], ring.one()])
        poly[0] = poly[0] + a[d]
    # 補間多項式と真の級数の差は節点多項式の倍数で, 係数 t は p^{M−t} で割れる
    caps = [M - t for t in range(M)]
    return PowerSeries.from_scalars(ring, poly, M).with_ledger_cap(caps)


def _binomial_series(ring: CoeffRing, s: int, M: int) -> PowerSeries:
    """(1+T)^s."""
    return PowerSeries.from_ints(ring, [comb(s, j) % ring.modulus for j in range(M)], M)


def _twisted_value(psi: DirichletCharacter, ring: CoeffRing, branch: int, a: int) -> PadicScalar:
    """ψω^i(a)."""
    omega = ring.scalar(teichmuller_residue(a, ring.p, ring.N)) ** branch
    return psi.embed_value(a, ring) * omega


def _choose_regularizer(psi: DirichletCharacter, ring: CoeffRing, branch: int) -> int:
    f, p = psi.modulus, ring.p
    c = 2
    while True:
        if gcd(c, f * p) == 1 and (_twisted_value(psi, ring, branch, c) - 1).is_unit():
            return c
        c += 1


def _stickelberger_series(
    psi: DirichletCharacter, ring: CoeffRing, M: int, branch: int, sigma: tuple[int, ...], level: int
) -> PowerSeries:
    """正則化ベルヌーイ測度 E_{1,c} のリーマン和による構成.

    ∫ ψω^{i−1}(x)⟨x⟩^{−1}(1+T)^{log_u⟨x⟩} dE_{1,c} = −(1 − ψω^i(c)(1+T)^{log_u⟨c⟩})·L_p(T).
    """
    p, N = ring.p, ring.N
    caps = stickelberger_ledger(level, M, p)
    if min(caps) < 1:
        raise LevelTooSmall(f"level {level} cannot resolve {M} coefficients for p={p}")
    f = psi.modulus
    q = f * p ** (level + 1)
    digits = min(N - 1, level + 2 + vp_factorial(M - 1, p))
    log_mod = p ** (digits + 1)
    mod = ring.modulus
    c = _choose_regularizer(psi, ring, branch)
    c_inv = pow(c, -1, q)
    half = pow(2, -1, mod)

    omega_powers = {r: pow(teichmuller_residue(r, p, N), branch, mod) for r in range(1, p)}
    # (s, a mod f) ごとに整数部分の重みを集計する
    buckets: dict[tuple[int, int], int] = {}
    for a in range(1, q):
        if gcd(a, q) != 1:
            continue
        j = (c * (c_inv * a % q) - a) // q
        measure = ((c - 1) * half - j) % mod
        weight = omega_powers[a % p] * pow(a, -1, mod) * measure % mod
        key = (log_u(a % log_mod, p, digits), a % f)
        buckets[key] = (buckets.get(key, 0) + weight) % mod

    by_exponent: dict[int, PadicScalar] = {}
    chi_cache: dict[int, PadicScalar] = {}
    for (s, r), weight in buckets.items():
        if r not in chi_cache:
            chi_cache[r] = psi.embed_value(r if f > 1 else 1, ring)
        term = chi_cache[r] * weight
        by_exponent[s] = by_exponent[s] + term if s in by_exponent else term

    total = PowerSeries.constant(ring, 0, M)
    for s in sorted(by_exponent):
        total = total + _binomial_series(ring, s, M) * by_exponent[s]
    total = total.with_ledger_cap(caps)

    regularizer = 1 - _binomial_series(ring, log_u(c % log_mod, p, digits), M) * _twisted_value(psi, ring, branch, c)
    series = -(total * regularizer.inverse())
    for ell in sigma:
        if ell == p or gcd(ell, f) != 1:
            continue
        factor = _twisted_value(psi, ring, branch, ell) * ring.from_fraction(Fraction(1, ell))
        series = series * (1 - _binomial_series(ring, log_u(ell % log_mod, p, digits), M) * factor)
    logger.debug(f"Stickelberger sum over q={q} used {len(by_exponent)} distinct exponents, c={c}")
    return series


def resolve_strategy(strategy: str, psi: DirichletCharacter, p: int) -> str:
    if strategy not in STRATEGIES:
        raise InvalidParameterError(f"unknown strategy '{strategy}'")
    if strategy != "auto":
        return strategy
    return "interpolation" if p <= 13 and psi.modulus <= 100 else "stickelberger"


def build_kl_series(
    psi: DirichletCharacter,
    p: int,
    N: int = 30,
    M: int = 16,
    strategy: str = "auto",
    branch: int = 0,
    sigma: Optional[Iterable[int]] = None,
    level: int = DEFAULT_LEVEL,
) -> BranchSeries:
    """L_p(ψω^i) ∈ O_ψ⟦T⟧ を構成する.

    n ≡ i (mod p−1), n ≥ 1 で L_p(u^n − 1) = L^Σ(ψ, 1−n) を満たす級数.

    Args:
        psi: ディリクレ指標
        p: 奇素数
        N: 精度
        M: 打ち切り次数
        strategy: "auto", "interpolation", "stickelberger"
        branch: タイヒミュラー分岐 i
        sigma: 除くオイラー因子の素数集合（p は常に含む）
        level: Stickelberger 構成のレベル

    Returns:
        BranchSeries（照合記録は空）

    Raises:
        NotTypeSError: i = 0 で ψ がタイプ S でない
        PrecisionBudgetExceeded: 補間の桁落ちが N を超える
        LevelTooSmall: レベルが M に足りない

    """
    check_branch(psi, p, branch)
    if M < 1:
        raise InvalidParameterError(f"truncation must be positive, got M={M}")
    chosen = resolve_strategy(strategy, psi, p)
    sigma_t = normalize_sigma(p, sigma)
    ring = make_coeff_ring(p, psi.order, N)
    if chosen == "interpolation":
        series = _interpolation_series(psi, ring, M, branch, sigma_t)
    else:
        series = _stickelberger_series(psi, ring, M, branch, sigma_t, level)
    logger.info(f"Built {chosen} series for {psi.notation}, p={p}, branch={branch}, N={N}, M={M}")
    return BranchSeries(
        character=psi,
        p=p,
        branch=branch,
        series=series,
        strategy=chosen,
        sigma=sigma_t,
        level=level if chosen == "stickelberger" else None,
    )


def verify_interpolation(series: BranchSeries, K: int, min_digits: int = 1) -> list[VerificationEntry]:
    """n = i + k(p−1), k = 1..K で級数の値と厳密値を照合する.

    Raises:
        EmbeddingDenominatorError: 厳密値が p 整でない場合

    """
    if K < 1:
        raise InvalidParameterError("number of verification points must be positive")
    ring = series.ring
    u = cyclotomic_u(ring)
    entries = []
    for n in interpolation_points(series.p, series.branch, K + (1 if series.branch else 0))[-K:]:
        exact = truncated_L_value(series.character, n, series.sigma).embed(ring)
        value = evaluate_at(series.series, u**n - 1)
        joint = min(value.prec, exact.prec)
        matched = min(value.matched_digits(exact), joint)
        if joint < min_digits:
            status = "insufficient"
        elif matched < joint:
            status = "mismatch"
        else:
            status = "match"
        entries.append(VerificationEntry(n, matched, joint, status))
    logger.debug(f"Verification of {series.character.notation}: {[e.status for e in entries]}")
    return entries


def mu_lambda_invariants(series: BranchSeries) -> tuple[int, int]:
    data = weierstrass_prep(series.series)
    return data.mu, data.lambda_


def _check_congruence(series: BranchSeries, n: int) -> None:
    if (n - series.branch) % (series.p - 1):
        raise InvalidParameterError(f"n={n} is not congruent to branch {series.branch} mod {series.p - 1}")


def lp_valuation_at(series: BranchSeries, n: int) -> int:
    """v(L_p(u^n − 1)).

    Raises:
        ZeroAtPrecision: 値が精度内で 0 の場合

    """
    _check_congruence(series, n)
    value = evaluate_at(series.series, cyclotomic_u(series.ring) ** n - 1)
    v = value.valuation()
    if v is None:
        raise ZeroAtPrecision(f"L_p value at n={n} is indistinguishable from zero at precision {value.prec}")
    return v


def lp_norm_at(series: BranchSeries, n: int) -> Fraction:
    """|L_p(ψ, χ_cyc^n)|_p = p^{−d·v}（O_ψ のノルムで正規化）."""
    v = lp_valuation_at(series, n)
    return Fraction(1, series.p ** (series.ring.d * v))


def imc_closure_module(series: BranchSeries) -> ElementaryModule:
    """特性元が p^μ·(ワイエルシュトラス多項式) となる ElementaryModule."""
    data = weierstrass_prep(series.series)
    pieces = []
    if data.mu:
        pieces.append(MuPiece(data.mu))
    if data.lambda_:
        pieces.append(PolyPiece(tuple(data.distinguished.coeffs[: data.lambda_ + 1]), 1))
    return ElementaryModule(series.ring, tuple(pieces), series.series.M)


def strategy_agreement(first: BranchSeries, second: BranchSeries) -> list[int]:
    """係数ごとの不一致桁の不足（0 なら共通台帳内で一致）."""
    deficits = []
    for a, b in zip(first.series.coeffs, second.series.coeffs):
        joint = min(a.prec, b.prec)
        deficits.append(max(0, joint - a.matched_digits(b)))
    return deficits


@dataclass(frozen=True)
class BranchScanEntry:
    branch: int
    mu: int
    lambda_: int

    def to_json(self) -> dict:
        return {"branch": self.branch, "mu": self.mu, "lambda": self.lambda_}


def branch_scan(
    p: int, N: int = 25, M: int = 10, strategy: str = "interpolation", level: int = DEFAULT_LEVEL
) -> list[BranchScanEntry]:
    """自明指標の偶分岐 i = 2, 4, …, p−3 の μ, λ."""
    trivial = DirichletCharacter.trivial()
    out = []
    for i in range(2, p - 2, 2):
        series = build_kl_series(trivial, p, N, M, strategy, branch=i, level=level)
        mu, lam = mu_lambda_invariants(series)
        out.append(BranchScanEntry(i, mu, lam))
    logger.info(f"Branch scan p={p}: lambda>0 at {[e.branch for e in out if e.lambda_]}")
    return out


def bernoulli_quotient_valuation(k: int, p: int) -> int:
    """v_p(B_k/k の分子)."""
    value = bernoulli_number(k) / k
    v = vp(value.numerator, p)
    return 0 if v is None else v


def irregular_indices(p: int) -> list[int]:
    """p が B_k の分子を割る偶数 k ∈ [2, p−3]."""
    return [k for k in range(2, p - 2, 2) if bernoulli_quotient_valuation(k, p) > 0]
