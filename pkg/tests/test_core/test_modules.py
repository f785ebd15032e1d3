"""岩澤加群と Γ コホモロジーのテスト."""

import random
from fractions import Fraction

import pytest

from iwasawa.core.exceptions import InvalidParameterError, NotDistinguishedError, NotFiniteError
from iwasawa.core.modules import (
    DeltaModule,
    ElementaryModule,
    FiniteGammaModule,
    MuPiece,
    characteristic_element,
    eigenspace_decompose,
    euler_characteristic,
    finite_cohomology_orders,
    gamma_cohomology_orders,
    pontryagin_dual,
    random_elementary_module,
    random_finite_gamma_module,
    regular_delta_module,
    twist_module,
)
from iwasawa.core.orders import GroupOrder, ratio
from iwasawa.core.padic import cyclotomic_u, make_coeff_ring
from iwasawa.core.power_series import evaluate_at


class TestElementaryModule:
    """ElementaryModule の構成のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 12)

    def test_invariants(self):
        """μ と λ は各成分の和."""
        module = ElementaryModule.from_integers(self.ring, [1, 2], [([-5, 1], 2), ([5, 0, 1], 1)])
        assert module.mu == 3
        assert module.lambda_ == 4

    def test_characteristic_element(self):
        """5·(T − 5)²."""
        module = ElementaryModule.from_integers(self.ring, [1], [([-5, 1], 2)], truncation=6)
        ch = characteristic_element(module)
        mod = 5**12
        assert [c.to_int() for c in ch.coeffs] == [125, (-50) % mod, 5, 0, 0, 0]

    def test_rejects_non_distinguished(self):
        """特殊多項式でない f は拒否する."""
        with pytest.raises(NotDistinguishedError):
            ElementaryModule.from_integers(self.ring, [], [([1, 1], 1)])

    def test_rejects_non_positive_mu(self):
        """μ 成分の指数は正."""
        with pytest.raises(InvalidParameterError):
            MuPiece(0)

    def test_twist_moves_root(self):
        """Λ/(T − 5)(1) = Λ/(T − 35)."""
        module = ElementaryModule.from_integers(self.ring, [], [([-5, 1], 1)])
        twisted = twist_module(module, 1)
        piece = twisted.pieces[0]
        assert piece.coeffs[0].to_int() == (-35) % 5**12
        assert piece.coeffs[1].to_int() == 1


class TestGammaCohomology:
    """Γ コホモロジー位数と Euler 標数のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 12)
        self.module = ElementaryModule.from_integers(self.ring, [], [([-5, 1], 1)])

    def test_orders_at_zero(self):
        """γ − 1 は 5 倍として作用する."""
        h0, h1 = gamma_cohomology_orders(self.module, 0)
        assert h0 == GroupOrder.trivial(5)
        assert h1 == GroupOrder(5, 1)
        assert euler_characteristic(self.module, 0) == Fraction(5)

    def test_orders_infinite_at_root(self):
        """u^n − 1 が根なら両方とも無限."""
        h0, h1 = gamma_cohomology_orders(self.module, 1)
        assert not h0.is_finite
        assert not h1.is_finite
        with pytest.raises(NotFiniteError):
            euler_characteristic(self.module, 1)

    def test_mu_piece(self):
        """Λ/(p^μ) の H¹ は O/p^μ."""
        module = ElementaryModule.from_integers(self.ring, [2])
        h0, h1 = gamma_cohomology_orders(module, 3)
        assert h0.exponent == 0
        assert h1.exponent == 2

    def test_formula_matches_characteristic_element(self):
        """v(ch(u^n − 1)) = v(h1) − v(h0) をランダムな加群で確かめる."""
        rng = random.Random(7)
        u = cyclotomic_u(self.ring)
        checked = 0
        for _ in range(20):
            module = random_elementary_module(rng, self.ring, truncation=8)
            n = rng.randint(-4, 4)
            value = evaluate_at(characteristic_element(module), u**n - 1).valuation()
            if value is None:
                continue
            h0, h1 = gamma_cohomology_orders(module, n, safety_margin=0)
            assert value == h1.exponent - h0.exponent
            checked += 1
        assert checked > 0


class TestFiniteGammaModule:
    """有限 Γ-加群のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 8)

    def test_trivial_action(self):
        """自明な作用では ker も coker も全体."""
        module = FiniteGammaModule.from_integers(self.ring, [1], [[1]])
        ker, coker = finite_cohomology_orders(module, 0)
        assert ker.exponent == 1
        assert coker.exponent == 1

    def test_fixed_point_free_action(self):
        """γ − 1 が単元なら両方とも自明."""
        module = FiniteGammaModule.from_integers(self.ring, [2], [[2]])
        ker, coker = finite_cohomology_orders(module, 0)
        assert ker.exponent == 0
        assert coker.exponent == 0

    def test_euler_characteristic_is_one(self):
        """有限加群の Euler 標数は 1."""
        rng = random.Random(3)
        for _ in range(10):
            module = random_finite_gamma_module(rng, self.ring)
            assert euler_characteristic(module, rng.randint(-3, 3)) == 1

    def test_dual_has_same_cohomology_size(self):
        """双対の H⁰ と元の加群の H⁰ は同じ位数."""
        module = FiniteGammaModule.from_integers(self.ring, [2], [[6]])
        dual = pontryagin_dual(module)
        assert dual.divisors == module.divisors
        assert finite_cohomology_orders(dual, 0)[0] == finite_cohomology_orders(module, 0)[0]

    def test_rejects_non_invertible_action(self):
        """作用は可逆でなければならない."""
        with pytest.raises(InvalidParameterError):
            FiniteGammaModule.from_integers(self.ring, [1], [[5]])

    def test_ratio_requires_finite(self):
        """無限の位数の比は定義されない."""
        with pytest.raises(ValueError):
            ratio(GroupOrder.infinite(5), GroupOrder.trivial(5))
        assert ratio(GroupOrder(5, 3), GroupOrder(5, 1)) == 25


class TestEigenspaces:
    """Δ-固有空間分解のテスト."""

    def test_regular_representation_splits_evenly(self):
        """O[Δ] の各固有成分は O/p^N 1 個."""
        ring = make_coeff_ring(5, 4, 4)
        module = regular_delta_module(ring, 4)
        components = [eigenspace_decompose(module, psi) for psi in module.characters()]
        assert all(c.divisors == (4,) for c in components)
        assert sum(c.order_exponent for c in components) == module.order_exponent

    def test_rejects_order_divisible_by_p(self):
        """p | ♯Δ は拒否する."""
        ring = make_coeff_ring(5, 1, 4)
        with pytest.raises(InvalidParameterError):
            DeltaModule(ring, (1,), (5,), (((ring.one(),),),))


class TestDirectSum:
    """直和のテスト."""

    def test_euler_characteristic_is_multiplicative(self):
        """直和のオイラー標数は積."""
        ring = make_coeff_ring(5, 1, 12)
        first = ElementaryModule.from_integers(ring, [], [([-5, 1], 1)])
        second = ElementaryModule.from_integers(ring, [2])
        total = first.direct_sum(second)
        assert total.mu == 2
        assert total.lambda_ == 1
        for n in (0, 2, -1):
            expected = euler_characteristic(first, n) * euler_characteristic(second, n)
            assert euler_characteristic(total, n) == expected

    def test_rejects_different_rings(self):
        """係数環が違えば拒否する."""
        first = ElementaryModule.from_integers(make_coeff_ring(5, 1, 12), [1])
        second = ElementaryModule.from_integers(make_coeff_ring(7, 1, 12), [1])
        with pytest.raises(InvalidParameterError):
            first.direct_sum(second)
