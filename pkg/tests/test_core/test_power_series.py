"""打ち切り冪級数とワイエルシュトラス理論のテスト."""

import pytest

from iwasawa.core.exceptions import (
    AllZeroAtPrecision,
    InvalidParameterError,
    IwasawaError,
    NotDistinguishedError,
    NotInMaximalIdealError,
)
from iwasawa.core.padic import make_coeff_ring
from iwasawa.core.power_series import (
    PowerSeries,
    evaluate_at,
    is_distinguished,
    poly_to_series,
    twist_substitute,
    weierstrass_divide,
    weierstrass_prep,
)


def ints(series: PowerSeries) -> list[int]:
    return [c.to_int() for c in series.coeffs]


class TestPowerSeriesArithmetic:
    """級数の算術のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 10)

    def test_from_ints_pads_to_truncation(self):
        """係数は M まで 0 で埋める."""
        f = PowerSeries.from_ints(self.ring, [1, 2], 5)
        assert f.M == 5
        assert ints(f) == [1, 2, 0, 0, 0]
        assert f.ledger == (10,) * 5

    def test_from_ints_overflow(self):
        """M を超える係数は拒否する."""
        with pytest.raises(InvalidParameterError):
            PowerSeries.from_ints(self.ring, [1, 2, 3], 2)

    def test_multiplication_truncates(self):
        """積は T^M で打ち切る."""
        f = PowerSeries.from_ints(self.ring, [1, 1], 3)
        assert ints(f * f) == [1, 2, 1]
        assert ints(f * f * f) == [1, 3, 3]

    def test_inverse(self):
        """(1 + T)^{-1} = 1 − T + T² − …."""
        f = PowerSeries.from_ints(self.ring, [1, 1], 4)
        g = f.inverse()
        mod = 5**10
        assert ints(g) == [1, mod - 1, 1, mod - 1]
        assert ints(f * g) == [1, 0, 0, 0]

    def test_degree(self):
        """精度内で 0 でない最高次."""
        assert PowerSeries.from_ints(self.ring, [1, 0, 3, 0], 4).degree() == 2
        assert PowerSeries.from_ints(self.ring, [0, 0], 2).degree() is None

    def test_ledger_cap(self):
        """台帳の上限を適用する."""
        f = PowerSeries.from_ints(self.ring, [1, 1, 1], 3).with_ledger_cap([3, 2, 1])
        assert f.ledger == (3, 2, 1)

    def test_record_roundtrip(self):
        """直列化レコードから同じ級数を復元できる."""
        f = PowerSeries.from_ints(self.ring, [7, 30, 1], 3).with_ledger_cap([10, 4, 2])
        restored = PowerSeries.from_record(f.to_record())
        assert restored == f

    def test_record_version_mismatch(self):
        """未知のバージョンは拒否する."""
        record = PowerSeries.from_ints(self.ring, [1], 1).to_record()
        record["version"] = 99
        with pytest.raises(InvalidParameterError):
            PowerSeries.from_record(record)

    def test_poly_to_series_overflow(self):
        """次数 ≥ M の多項式は拒否する."""
        coeffs = [self.ring.one()] * 4
        with pytest.raises(IwasawaError):
            poly_to_series(self.ring, coeffs, 3)


class TestWeierstrass:
    """ワイエルシュトラス準備定理と割り算のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 10)

    def test_distinguished_polynomial_is_fixed(self):
        """特殊多項式はそのまま P になる."""
        f = PowerSeries.from_ints(self.ring, [5, 5, 1], 8)
        data = weierstrass_prep(f)
        assert data.mu == 0
        assert data.lambda_ == 2
        assert ints(data.distinguished)[:3] == [5, 5, 1]

    def test_mu_invariant(self):
        """全係数の最小付値が μ."""
        f = PowerSeries.from_ints(self.ring, [25, 25], 4)
        data = weierstrass_prep(f)
        assert data.mu == 2
        assert data.lambda_ == 0

    def test_factorisation_recombines(self):
        """(5 + T)(1 + T) = (T + 5)·(1 + T)."""
        f = PowerSeries.from_ints(self.ring, [5, 6, 1], 6)
        data = weierstrass_prep(f)
        assert data.lambda_ == 1
        assert ints(data.distinguished)[:2] == [5, 1]
        assert (data.recombine() - f).is_zero()

    def test_zero_series(self):
        """精度内で 0 の級数は μ が決まらない."""
        with pytest.raises(AllZeroAtPrecision):
            weierstrass_prep(PowerSeries.from_ints(self.ring, [0, 0, 0], 3))

    def test_is_distinguished(self):
        """モニックで下位係数が p の倍数."""
        assert is_distinguished([self.ring.scalar(5), self.ring.one()])
        assert not is_distinguished([self.ring.scalar(1), self.ring.one()])
        assert not is_distinguished([self.ring.scalar(5), self.ring.scalar(2)])

    def test_divide(self):
        """T³ = q·(T + 5) + r, r = (−5)³."""
        f = PowerSeries.from_ints(self.ring, [0, 0, 0, 1], 6)
        P = PowerSeries.from_ints(self.ring, [5, 1], 6)
        q, r = weierstrass_divide(f, P)
        assert r.coeffs[0].to_int() == (-125) % 5**10
        remainder = PowerSeries.from_scalars(self.ring, list(r.coeffs), 6)
        assert (q * P + remainder - f).is_zero()

    def test_divide_rejects_non_distinguished(self):
        """特殊多項式でない除数は拒否する."""
        f = PowerSeries.from_ints(self.ring, [1, 1], 4)
        with pytest.raises(NotDistinguishedError):
            weierstrass_divide(f, PowerSeries.from_ints(self.ring, [1, 1], 4))


class TestEvaluationAndTwist:
    """評価と捻り代入のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 10)

    def test_evaluate_precision_cap(self):
        """評価の精度は M·v(t) で頭打ち."""
        f = PowerSeries.from_ints(self.ring, [1, 1], 4)
        value = evaluate_at(f, self.ring.scalar(5))
        assert value.to_int() == 6
        assert value.prec == 4

    def test_evaluate_rejects_unit(self):
        """単元では評価しない."""
        f = PowerSeries.from_ints(self.ring, [1, 1], 4)
        with pytest.raises(NotInMaximalIdealError):
            evaluate_at(f, self.ring.scalar(2))

    def test_twist_of_variable(self):
        """T ↦ c(1 + T) − 1."""
        T = PowerSeries.variable(self.ring, 4)
        twisted = twist_substitute(T, self.ring.scalar(6))
        assert ints(twisted) == [5, 6, 0, 0]

    def test_twist_requires_principal_unit(self):
        """c ≢ 1 mod p は拒否する."""
        T = PowerSeries.variable(self.ring, 4)
        with pytest.raises(NotInMaximalIdealError):
            twist_substitute(T, self.ring.scalar(2))

    def test_twist_then_evaluate(self):
        """f_c(u^n − 1) = f(c·u^n − 1)."""
        f = PowerSeries.from_ints(self.ring, [3, 1, 2], 6)
        c = self.ring.scalar(6)
        t = self.ring.scalar(6**2 - 1)
        lhs = evaluate_at(twist_substitute(f, c), t)
        rhs = evaluate_at(f, c * (t + 1) - 1)
        assert lhs.matched_digits(rhs) >= min(lhs.prec, rhs.prec)
