"""ボックスタイン写像とボックスタインオイラー標数のテスト."""

import pytest

from iwasawa.core.bockstein import (
    PerfectComplex,
    acyclic_pair,
    bockstein_cohomology,
    bockstein_euler_char,
    bockstein_maps,
    determinant_comparison,
    direct_sum,
    elementary_resolution,
)
from iwasawa.core.exceptions import InconsistentComplexError, InvalidParameterError, NotSemisimpleError
from iwasawa.core.modules import ElementaryModule
from iwasawa.core.orders import GroupOrder
from iwasawa.core.padic import make_coeff_ring
from iwasawa.core.power_series import PowerSeries


class TestPerfectComplex:
    """完全複体の構成のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 12)

    def _series(self, values):
        return PowerSeries.from_ints(self.ring, values, 8)

    def test_rejects_nonzero_composite(self):
        """d ∘ d ≠ 0 は拒否する."""
        one = self._series([1])
        with pytest.raises(InconsistentComplexError):
            PerfectComplex.from_series(self.ring, (1, 1, 1), [[[one]], [[one]]], 8)

    def test_rejects_wrong_shape(self):
        """微分の形が階数と合わなければ拒否する."""
        with pytest.raises(InvalidParameterError):
            PerfectComplex.from_series(self.ring, (2, 1), [[[self._series([1])]]], 8)

    def test_elementary_resolution(self):
        """Λ/(T − 5) の分解は [Λ −(T − 5)→ Λ]."""
        module = ElementaryModule.from_integers(self.ring, [], [([-5, 1], 1)], truncation=8)
        complex_ = elementary_resolution(module)
        assert complex_.ranks == (1, 1)
        assert complex_.matrix(1)[0][0].coeffs[0].to_int() == (-5) % 5**12

    def test_direct_sum_ranks(self):
        """直和の階数は各次数の和."""
        first = PerfectComplex.from_series(self.ring, (1, 1), [[[self._series([0, 1])]]], 8)
        total = direct_sum(first, acyclic_pair(self.ring, 1, 8))
        assert total.ranks == (2, 2)


class TestBocksteinCohomology:
    """ボックスタインコホモロジーの位数のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 12)
        self.one = self.ring.one()

    def _two_term(self, values):
        entry = PowerSeries.from_ints(self.ring, values, 8)
        return PerfectComplex.from_series(self.ring, (1, 1), [[[entry]]], 8)

    def test_multiplication_by_T(self):
        """[Λ −T→ Λ] では β₁ が同型で全て自明."""
        complex_ = self._two_term([0, 1])
        result = bockstein_cohomology(complex_, self.one)
        assert [t.free_rank for t in result.tor] == [1, 1]
        assert result.orders == [GroupOrder.trivial(5), GroupOrder.trivial(5)]
        assert result.semisimple
        euler = bockstein_euler_char(complex_, self.one)
        assert euler.exponent == 0
        assert euler.vanishing_order == 1
        assert euler.agrees

    def test_square_of_T_is_not_semisimple(self):
        """[Λ −T²→ Λ] の自明なひねりは半単純でない."""
        complex_ = self._two_term([0, 0, 1])
        result = bockstein_cohomology(complex_, self.one)
        assert result.semisimple is False
        assert not result.orders[0].is_finite
        with pytest.raises(NotSemisimpleError):
            bockstein_euler_char(complex_, self.one)

    def test_torsion_in_degree_zero(self):
        """[Λ −(T − 5)→ Λ]: ♯H_β,0 = 5, オイラー標数 5^{−1}."""
        complex_ = self._two_term([-5, 1])
        result = bockstein_cohomology(complex_, self.one)
        assert result.tor[0].torsion == (1,)
        assert result.orders[0] == GroupOrder(5, 1)
        euler = bockstein_euler_char(complex_, self.one)
        assert euler.exponent == -1
        assert euler.comparison_exponent == -1
        assert euler.vanishing_order == 0

    def test_twist_by_rho(self):
        """c = 6 で T をひねると 5 + 6T になる."""
        complex_ = self._two_term([0, 1])
        c = self.ring.scalar(6)
        assert bockstein_euler_char(complex_, c, "rho").exponent == -1
        assert bockstein_euler_char(complex_, c, "adjoint").exponent == 0

    def test_acyclic_summand_is_invisible(self):
        """非輪状な直和成分を足しても位数は変わらない."""
        complex_ = self._two_term([-5, 1])
        padded = direct_sum(complex_, acyclic_pair(self.ring, 1, 8))
        assert bockstein_euler_char(padded, self.one).exponent == -1
        assert determinant_comparison(padded, self.one) == (0, -1)

    def test_maps_only(self):
        """写像だけなら位数は計算しない."""
        result = bockstein_maps(self._two_term([0, 1]), self.one)
        assert result.orders == []
        assert result.semisimple is None
        assert len(result.maps) == 1

    def test_unknown_reading(self):
        """読みは rho か adjoint."""
        with pytest.raises(InvalidParameterError):
            bockstein_cohomology(self._two_term([0, 1]), self.one, reading="bogus")

    def test_determinant_comparison_needs_square_pair(self):
        """二項正方でない複体は比較しない."""
        complex_ = acyclic_pair(self.ring, 2, 8)
        assert determinant_comparison(complex_, self.one) is None
