"""p 進 L 級数の構成と照合のテスト."""

from dataclasses import replace
from fractions import Fraction

import pytest

from iwasawa.core.characters import DirichletCharacter, truncated_L_value
from iwasawa.core.exceptions import (
    InvalidParameterError,
    NotTypeSError,
    PrecisionBudgetExceeded,
)
from iwasawa.core.lfunctions import (
    BranchSeries,
    bernoulli_quotient_valuation,
    build_kl_series,
    check_branch,
    imc_closure_module,
    interpolation_loss,
    interpolation_points,
    irregular_indices,
    lp_norm_at,
    lp_valuation_at,
    mu_lambda_invariants,
    normalize_sigma,
    resolve_strategy,
    stickelberger_ledger,
    strategy_agreement,
    verify_interpolation,
    vp_factorial,
)
from iwasawa.core.modules import characteristic_element
from iwasawa.core.padic import cyclotomic_u
from iwasawa.core.power_series import PowerSeries, evaluate_at, weierstrass_prep

CHI_8 = DirichletCharacter.from_notation("8:0,1")


class TestPrecisionBookkeeping:
    """桁落ちの見積もりのテスト."""

    def test_vp_factorial(self):
        """ルジャンドルの公式."""
        assert vp_factorial(4, 5) == 0
        assert vp_factorial(25, 5) == 6

    def test_interpolation_loss(self):
        """次数 d の損失は d + v_p(d!)."""
        assert interpolation_loss(15, 5) == 18
        assert interpolation_loss(9, 37) == 9

    def test_stickelberger_ledger(self):
        """T^j の係数は level − ⌊log_p j⌋ 桁."""
        assert stickelberger_ledger(3, 6, 5) == [4, 3, 3, 3, 3, 2]

    def test_interpolation_points(self):
        """分岐 0 では n = 0 を除く."""
        assert interpolation_points(5, 0, 3) == [4, 8, 12]
        assert interpolation_points(5, 2, 2) == [2, 6]


class TestParameterChecks:
    """入力検査のテスト."""

    def test_odd_character_is_not_type_s(self):
        """奇指標は分岐 0 で構成できない."""
        with pytest.raises(NotTypeSError) as excinfo:
            build_kl_series(DirichletCharacter.from_notation("3:1"), 5)
        assert "branch=1" in excinfo.value.message

    def test_odd_branch_for_odd_character(self):
        """奇指標は奇分岐なら受け付ける."""
        check_branch(DirichletCharacter.from_notation("3:1"), 5, 1)
        with pytest.raises(InvalidParameterError):
            check_branch(DirichletCharacter.from_notation("3:1"), 5, 2)

    def test_branch_range(self):
        """分岐は [0, p−2]."""
        with pytest.raises(InvalidParameterError):
            check_branch(CHI_8, 5, 5)

    def test_modulus_coprime_to_p(self):
        """法が p で割れる指標は拒否する."""
        with pytest.raises(InvalidParameterError):
            build_kl_series(DirichletCharacter.from_notation("5:2"), 5)

    def test_normalize_sigma(self):
        """Σ には常に p が入る."""
        assert normalize_sigma(5, [7, 3]) == (3, 5, 7)
        assert normalize_sigma(5) == (5,)
        with pytest.raises(InvalidParameterError):
            normalize_sigma(5, [4])

    def test_resolve_strategy(self):
        """auto は小さい p で補間を選ぶ."""
        assert resolve_strategy("auto", CHI_8, 5) == "interpolation"
        assert resolve_strategy("auto", CHI_8, 17) == "stickelberger"
        assert resolve_strategy("stickelberger", CHI_8, 5) == "stickelberger"
        with pytest.raises(InvalidParameterError):
            resolve_strategy("bogus", CHI_8, 5)

    def test_precision_budget(self):
        """桁落ちが N 以上なら構成しない."""
        with pytest.raises(PrecisionBudgetExceeded):
            build_kl_series(CHI_8, 5, N=10, M=16, strategy="interpolation")


class TestInterpolationSeries:
    """補間による構成のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.series = build_kl_series(CHI_8, 5, N=40, M=16, strategy="interpolation")

    def test_matches_fifteen_digits(self):
        """3 点で 15 桁以上一致する."""
        entries = verify_interpolation(self.series, 3, min_digits=15)
        assert [e.n for e in entries] == [4, 8, 12]
        assert all(e.status == "match" for e in entries)
        assert all(e.matched_digits >= 15 for e in entries)

    def test_matches_beyond_nodes(self):
        """補間点以外の n でも台帳の桁数まで一致する."""
        ring = self.series.ring
        n = 4 + 16 * 4
        value = evaluate_at(self.series.series, cyclotomic_u(ring) ** n - 1)
        exact = truncated_L_value(CHI_8, n, self.series.sigma).embed(ring)
        assert value.prec >= 15
        assert value.matched_digits(exact) >= value.prec

    def test_ledger_decreases(self):
        """係数 t の桁数は M − t 以下."""
        assert all(prec <= 16 - t for t, prec in enumerate(self.series.series.ledger))

    def test_valuation_and_norm(self):
        """|L_p| = p^{−d·v}."""
        v = lp_valuation_at(self.series, 4)
        assert lp_norm_at(self.series, 4) == Fraction(1, 5**v)
        with pytest.raises(InvalidParameterError):
            lp_valuation_at(self.series, 3)

    def test_imc_closure_module(self):
        """閉包加群の特性元は同じ μ, λ を持つ."""
        mu, lam = mu_lambda_invariants(self.series)
        module = imc_closure_module(self.series)
        assert module.mu == mu
        assert module.lambda_ == lam
        if mu or lam:
            data = weierstrass_prep(characteristic_element(module))
            assert (data.mu, data.lambda_) == (mu, lam)

    def test_record_roundtrip(self):
        """照合記録付きで直列化できる."""
        verified = self.series.with_verification(verify_interpolation(self.series, 2))
        assert verified.verified
        assert BranchSeries.from_record(verified.to_record()) == verified


class TestStickelbergerSeries:
    """リーマン和による構成のテスト."""

    def test_agrees_with_interpolation(self):
        """両方の構成は共通台帳内で一致する."""
        first = build_kl_series(CHI_8, 5, N=20, M=6, strategy="interpolation")
        second = build_kl_series(CHI_8, 5, N=20, M=6, strategy="stickelberger", level=3)
        assert second.strategy == "stickelberger"
        assert second.level == 3
        assert strategy_agreement(first, second) == [0] * 6


class TestIrregularBranch:
    """非正則素数 37 のテスト."""

    def test_bernoulli_quotient(self):
        """37 | B_32/32 の分子, 37 ∤ B_2/2."""
        assert bernoulli_quotient_valuation(32, 37) == 1
        assert bernoulli_quotient_valuation(2, 37) == 0
        assert irregular_indices(37) == [32]
        assert irregular_indices(59) == [44]
        assert irregular_indices(7) == []

    def test_lambda_positive_on_irregular_branch(self):
        """分岐 32 では λ > 0, 分岐 2 では λ = 0."""
        trivial = DirichletCharacter.trivial()
        irregular = build_kl_series(trivial, 37, N=25, M=10, strategy="interpolation", branch=32)
        regular = build_kl_series(trivial, 37, N=25, M=10, strategy="interpolation", branch=2)
        assert mu_lambda_invariants(irregular)[0] == 0
        assert mu_lambda_invariants(irregular)[1] >= 1
        assert mu_lambda_invariants(regular) == (0, 0)


def tamper_constant(series: BranchSeries, delta: int) -> BranchSeries:
    """定数項に delta を足した級数."""
    ring = series.ring
    coeffs = list(series.series.coeffs)
    coeffs[0] = coeffs[0] + ring.scalar(delta)
    return replace(series, series=PowerSeries(ring, tuple(coeffs)))


class TestVerificationFailures:
    """照合の mismatch / insufficient のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備（評価精度は M·v = 6 桁）."""
        self.series = build_kl_series(CHI_8, 5, N=20, M=6, strategy="interpolation")

    def test_untampered_series_matches(self):
        """改変しなければ 6 桁で一致."""
        entries = verify_interpolation(self.series, 3)
        assert [(e.status, e.precision) for e in entries] == [("match", 6)] * 3

    def test_tamper_inside_precision_is_mismatch(self):
        """c₀ に p² を足すと全ての点で 2 桁しか一致しない."""
        entries = verify_interpolation(tamper_constant(self.series, 5**2), 3)
        assert [e.status for e in entries] == ["mismatch"] * 3
        assert all(e.matched_digits == 2 for e in entries)

    def test_tamper_below_evaluation_precision_is_invisible(self):
        """p^{N−1} の改変は係数の台帳より下なので検出されない."""
        tampered = tamper_constant(self.series, 5**19)
        assert tampered.series.coeffs[0] == self.series.series.coeffs[0]
        assert all(e.status == "match" for e in verify_interpolation(tampered, 3))

    def test_insufficient_precision(self):
        """要求桁数が評価精度を超えると mismatch ではなく insufficient."""
        entries = verify_interpolation(self.series, 3, min_digits=7)
        assert [e.status for e in entries] == ["insufficient"] * 3

    def test_verified_flag(self):
        """照合記録が空なら未検証."""
        assert not self.series.verified
        checked = self.series.with_verification(verify_interpolation(self.series, 2))
        assert checked.verified
        assert len(checked.to_record()["verification"]) == 2
