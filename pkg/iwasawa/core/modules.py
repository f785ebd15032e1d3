"""構造定理の標準形で与えた捩れ Λ-加群と有限 Γ-加群, Δ-固有空間."""

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .exceptions import InvalidParameterError, IwasawaError, NotDistinguishedError, NotFiniteError, PrecisionExhausted
from .linalg import (
    Matrix,
    cokernel_exponents,
    hstack,
    identity_matrix,
    kernel_basis,
    mat_inverse,
    mat_mul,
    mat_reduce,
    mat_scale,
    mat_sub,
    smith_form,
    sublattice_index,
    zero_matrix,
)
from .orders import GroupOrder
from .padic import CoeffRing, PadicScalar, cyclotomic_u
from .power_series import (
    PowerSeries,
    poly_mul,
    is_distinguished,
    poly_to_series,
    twist_substitute,
    weierstrass_prep,
)

logger = logging.getLogger(__name__)

DEFAULT_SAFETY_MARGIN = 5


@dataclass(frozen=True)
class MuPiece:
    """Λ/(p^μ)."""

    exponent: int

    def __post_init__(self) -> None:
        if self.exponent < 1:
            raise InvalidParameterError(f"mu exponent must be positive, got {self.exponent}")


@dataclass(frozen=True)
class PolyPiece:
    """Λ/(f^λ). f はモニックな特殊多項式（係数 low → high）."""

    coeffs: tuple[PadicScalar, ...]
    multiplicity: int = 1

    def __post_init__(self) -> None:
        if self.multiplicity < 1:
            raise InvalidParameterError("multiplicity must be positive")
        if len(self.coeffs) < 2 or not is_distinguished(self.coeffs):
            raise NotDistinguishedError("PolyPiece requires a distinguished polynomial of degree >= 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def power(self) -> list[PadicScalar]:
        """f^λ の係数."""
        out = [self.coeffs[0].ring.one()]
        for _ in range(self.multiplicity):
            out = poly_mul(out, list(self.coeffs))
        return out


Piece = Union[MuPiece, PolyPiece]


@dataclass(frozen=True)
class ElementaryModule:
    """⊕ Λ/(p^{μ_i}) ⊕ ⊕ Λ/(f_j^{λ_j})."""

    ring: CoeffRing
    pieces: tuple[Piece, ...] = ()
    truncation: int = 16

    @property
    def mu(self) -> int:
        return sum(piece.exponent for piece in self.pieces if isinstance(piece, MuPiece))

    @property
    def lambda_(self) -> int:
        return sum(piece.degree * piece.multiplicity for piece in self.pieces if isinstance(piece, PolyPiece))

    def direct_sum(self, other: "ElementaryModule") -> "ElementaryModule":
        if other.ring != self.ring:
            raise InvalidParameterError("direct sum of modules over different rings")
        return ElementaryModule(self.ring, self.pieces + other.pieces, max(self.truncation, other.truncation))

    @classmethod
    def from_integers(
        cls,
        ring: CoeffRing,
        mu: Sequence[int] = (),
        polys: Sequence[tuple[Sequence[int], int]] = (),
        truncation: int = 16,
    ) -> "ElementaryModule":
        """整数係数の記述から構成する（polys は (係数 low → high, 重複度) の列）."""
        pieces: list[Piece] = [MuPiece(int(m)) for m in mu]
        for coeffs, mult in polys:
            pieces.append(PolyPiece(tuple(ring.scalar(int(c)) for c in coeffs), int(mult)))
        return cls(ring, tuple(pieces), truncation)


def characteristic_element(module: ElementaryModule) -> PowerSeries:
    """p^{Σμ_i}·∏ f_j^{λ_j}.

    Raises:
        IwasawaError: Σ λ_j·deg f_j ≥ M（打ち切りからあふれる）

    """
    ring = module.ring
    M = module.truncation
    if module.lambda_ >= M:
        raise IwasawaError(f"characteristic element of degree {module.lambda_} overflows truncation M={M}")
    coeffs = [ring.scalar(ring.p**module.mu)]
    for piece in module.pieces:
        if isinstance(piece, PolyPiece):
            coeffs = poly_mul(coeffs, piece.power())
    return poly_to_series(ring, coeffs, M)


def _twist_parameter(ring: CoeffRing, n: int) -> PadicScalar:
    return cyclotomic_u(ring) ** n


def twist_module(module: ElementaryModule, n: int) -> ElementaryModule:
    """M(n): γ の作用を u^n 倍した加群.

    f(T) を f(u^{−n}(1+T) − 1) の特殊多項式部分に置き換える.
    """
    if n == 0:
        return module
    ring = module.ring
    c = _twist_parameter(ring, -n)
    pieces: list[Piece] = []
    for piece in module.pieces:
        if isinstance(piece, MuPiece):
            pieces.append(piece)
            continue
        series = poly_to_series(ring, piece.coeffs, max(module.truncation, piece.degree + 1))
        data = weierstrass_prep(twist_substitute(series, c))
        new_coeffs = tuple(data.distinguished.coeffs[: data.lambda_ + 1])
        pieces.append(PolyPiece(new_coeffs, piece.multiplicity))
    return ElementaryModule(ring, tuple(pieces), module.truncation)


def _operator_matrix(ring: CoeffRing, F: list[PadicScalar], c: PadicScalar) -> Matrix:
    """Λ/(F) の基底 1, T, …, T^{D−1} に関する c(1+T) − 1 倍写像の行列."""
    D = len(F) - 1
    mat = zero_matrix(ring, D, D)
    shift = c - 1
    for j in range(D):
        mat[j][j] = mat[j][j] + shift
        if j + 1 < D:
            mat[j + 1][j] = mat[j + 1][j] + c
        else:
            # T^D ≡ −Σ F_i T^i
            for i in range(D):
                mat[i][j] = mat[i][j] - c * F[i]
    return mat


def gamma_cohomology_orders(
    module: ElementaryModule, n: int, safety_margin: int = DEFAULT_SAFETY_MARGIN
) -> tuple[GroupOrder, GroupOrder]:
    """M(−n) の H⁰ = ker(γ−1), H¹ = coker(γ−1) の位数.

    Returns:
        (h0, h1). 作用素の行列式が精度内で 0 なら両方とも無限.

    Raises:
        PrecisionExhausted: 行列式の付値が N − safety_margin 以上

    """
    ring = module.ring
    p, d = ring.p, ring.d
    c = _twist_parameter(ring, -n)
    total = 0
    for piece in module.pieces:
        if isinstance(piece, MuPiece):
            # 単元倍の T − (u^n − 1) は単射で余核は O/p^μ
            total += piece.exponent
            continue
        F = piece.power()
        snf = smith_form(ring, _operator_matrix(ring, F, c))
        if any(v is None for v in snf.pivots):
            logger.debug(f"gamma cohomology infinite for n={n}: operator singular at precision")
            return GroupOrder.infinite(p), GroupOrder.infinite(p)
        total += sum(snf.pivots)
    if total >= ring.N - safety_margin and any(isinstance(piece, PolyPiece) for piece in module.pieces):
        raise PrecisionExhausted(
            f"determinant valuation {total} leaves less than {safety_margin} digits of N={ring.N}"
        )
    return GroupOrder.trivial(p), GroupOrder(p, d * total)


def euler_characteristic(module: Union["FiniteGammaModule", ElementaryModule], n: int = 0) -> Fraction:
    """EC(Γ, M(−n)) = ♯H₀/♯H₁ = ♯coker(γ−1)/♯ker(γ−1).

    Raises:
        NotFiniteError: 位数が無限の場合

    """
    if isinstance(module, FiniteGammaModule):
        ker, coker = finite_cohomology_orders(module, n)
    else:
        ker, coker = gamma_cohomology_orders(module, n)
    if not (ker.is_finite and coker.is_finite):
        raise NotFiniteError(f"Euler characteristic at n={n} is not defined: cohomology is infinite")
    return Fraction(ker.p) ** (coker.exponent - ker.exponent)


# --- 有限 Γ-加群 ---


@dataclass(frozen=True)
class FiniteGammaModule:
    """⊕ O/p^{e_i} と γ の作用行列 X（列 j が γ·a_j の座標）."""

    ring: CoeffRing
    divisors: tuple[int, ...]
    action: tuple[tuple[PadicScalar, ...], ...]

    def __post_init__(self) -> None:
        k = len(self.divisors)
        if len(self.action) != k or any(len(row) != k for row in self.action):
            raise InvalidParameterError("action matrix shape does not match divisors")
        if any(e < 1 for e in self.divisors) or (self.divisors and max(self.divisors) > self.ring.N):
            raise InvalidParameterError("elementary divisors must lie in [1, N]")
        for i, j in itertools.product(range(k), repeat=2):
            need = self.divisors[i] - self.divisors[j]
            v = self.action[i][j].valuation()
            if need > 0 and v is not None and v < need:
                raise InvalidParameterError("action does not respect the divisor filtration")
        if any(cokernel_exponents(self.ring, self._presentation(self.matrix()), k, self.exponent)):
            raise InvalidParameterError("action is not invertible")

    @property
    def exponent(self) -> int:
        return max(self.divisors, default=0)

    @property
    def order_exponent(self) -> int:
        return self.ring.d * sum(self.divisors)

    def matrix(self) -> Matrix:
        return [list(row) for row in self.action]

    def relation_matrix(self) -> Matrix:
        k = len(self.divisors)
        return [
            [self.ring.scalar(self.ring.p**e) if i == j else self.ring.zero() for j, e in enumerate(self.divisors)]
            for i in range(k)
        ]

    def _presentation(self, operator: Matrix) -> Matrix:
        return hstack(self.ring, len(self.divisors), operator, self.relation_matrix())

    @classmethod
    def from_integers(cls, ring: CoeffRing, divisors: Sequence[int], action: Sequence[Sequence[int]]) -> "FiniteGammaModule":
        return cls(ring, tuple(divisors), tuple(tuple(ring.scalar(v) for v in row) for row in action))


def _endomorphism_orders(module: FiniteGammaModule, operator: Matrix) -> tuple[GroupOrder, GroupOrder]:
    ring = module.ring
    k = len(module.divisors)
    p = ring.p
    if k == 0:
        return GroupOrder.trivial(p), GroupOrder.trivial(p)
    relations = module.relation_matrix()
    coker = cokernel_exponents(ring, module._presentation(operator), k, module.exponent)
    # ker = {x : operator·x ∈ im(relations)} / im(relations)
    solutions = kernel_basis(ring, hstack(ring, k, operator, mat_scale(relations, ring.scalar(-1))), 2 * k)
    kernel_lattice = [row for row in solutions[:k]]
    ker = sublattice_index(ring, kernel_lattice, relations, k)
    if ker is None:
        raise IwasawaError("kernel lattice of a finite module is not of full rank")
    return GroupOrder(p, ring.d * ker), GroupOrder(p, ring.d * sum(coker))


def _gamma_operator(module: FiniteGammaModule, n: int, power: int = 1) -> Matrix:
    ring = module.ring
    k = len(module.divisors)
    action = module.matrix()
    if n:
        action = mat_scale(action, _twist_parameter(ring, -n))
    g = identity_matrix(ring, k)
    for _ in range(power):
        g = mat_mul(ring, g, action, k)
    return mat_sub(g, identity_matrix(ring, k))


def finite_cohomology_orders(module: FiniteGammaModule, n: int = 0, power: int = 1) -> tuple[GroupOrder, GroupOrder]:
    """(♯ker, ♯coker) of γ^power − 1 on A(−n)."""
    return _endomorphism_orders(module, _gamma_operator(module, n, power))


def pontryagin_dual(module: FiniteGammaModule) -> FiniteGammaModule:
    """A^∨ = Hom(A, Q_p/Z_p ⊗ O), (g·φ)(a) = φ(g^{-1}a).

    双対基底で Y_{kj} = (X^{-1})_{jk}·p^{e_k − e_j}.
    """
    ring = module.ring
    k = len(module.divisors)
    inverse = mat_inverse(ring, module.matrix()) if k else []
    e = module.divisors
    # 代表元として全精度に戻す（A 上の写像としては p^{e_i} を法として決まる）
    dual = [[ring.element(inverse[j][i].shift(e[i] - e[j]).coeffs) for j in range(k)] for i in range(k)]
    return FiniteGammaModule(ring, e, tuple(tuple(row) for row in dual))


def random_finite_gamma_module(
    rng: random.Random, ring: CoeffRing, max_rank: int = 3, max_exponent: int = 3
) -> FiniteGammaModule:
    """フィルトレーションを保つ可逆な作用を持つランダムな有限 Γ-加群."""
    p = ring.p
    k = rng.randint(1, max_rank)
    divisors = sorted(rng.randint(1, max_exponent) for _ in range(k))
    action = []
    for i in range(k):
        row = []
        for j in range(k):
            if i == j:
                value = rng.randrange(1, p) + p * rng.randrange(p**max_exponent)
            elif i < j:
                value = rng.randrange(p ** (max_exponent + 1))
            else:
                value = p ** max(1, divisors[i] - divisors[j]) * rng.randrange(p**max_exponent)
            row.append(ring.scalar(value))
        action.append(tuple(row))
    return FiniteGammaModule(ring, tuple(divisors), tuple(action))


def random_elementary_module(
    rng: random.Random,
    ring: CoeffRing,
    max_pieces: int = 3,
    max_degree: int = 2,
    truncation: int = 16,
) -> ElementaryModule:
    """ランダムな ElementaryModule（λ の合計は truncation 未満）."""
    p = ring.p
    pieces: list[Piece] = []
    budget = truncation - 1
    for _ in range(rng.randint(1, max_pieces)):
        if rng.random() < 0.25:
            pieces.append(MuPiece(rng.randint(1, 2)))
            continue
        degree = rng.randint(1, max_degree)
        mult = rng.randint(1, 2)
        if degree * mult > budget:
            continue
        budget -= degree * mult
        coeffs = [ring.scalar(p * rng.randrange(p**3)) for _ in range(degree)] + [ring.one()]
        pieces.append(PolyPiece(tuple(coeffs), mult))
    return ElementaryModule(ring, tuple(pieces), truncation)


# --- Δ-加群と固有空間 ---


@dataclass(frozen=True)
class DeltaModule:
    """有限アーベル群 Δ = ∏ Z/n_i（p ∤ ♯Δ）が作用する有限 O-加群."""

    ring: CoeffRing
    divisors: tuple[int, ...]
    generator_orders: tuple[int, ...]
    actions: tuple[tuple[tuple[PadicScalar, ...], ...], ...]

    def __post_init__(self) -> None:
        if self.group_order % self.ring.p == 0:
            raise InvalidParameterError(f"p={self.ring.p} divides the order of Delta ({self.group_order})")
        if len(self.actions) != len(self.generator_orders):
            raise InvalidParameterError("one action matrix is required per generator")
        k = len(self.divisors)
        E = self.exponent
        ring = self.ring
        mats = [mat_reduce([list(r) for r in a], E) for a in self.actions]
        for a, order in zip(mats, self.generator_orders):
            power = identity_matrix(ring, k)
            for _ in range(order):
                power = mat_mul(ring, power, a, k)
            if not _equal_on_module(self, power, identity_matrix(ring, k)):
                raise InvalidParameterError(f"generator action does not have order dividing {order}")
        for a, b in itertools.combinations(mats, 2):
            if not _equal_on_module(self, mat_mul(ring, a, b, k), mat_mul(ring, b, a, k)):
                raise InvalidParameterError("generator actions do not commute")

    @property
    def group_order(self) -> int:
        out = 1
        for n in self.generator_orders:
            out *= n
        return out

    @property
    def exponent(self) -> int:
        return max(self.divisors, default=0)

    @property
    def order_exponent(self) -> int:
        return self.ring.d * sum(self.divisors)

    def characters(self) -> list[tuple[int, ...]]:
        """Δ の指標（各生成元での指数 k_i, ψ(g_i) = ζ_{n_i}^{k_i}）."""
        return list(itertools.product(*(range(n) for n in self.generator_orders)))


def _equal_on_module(module: DeltaModule, a: Matrix, b: Matrix) -> bool:
    """A 上の写像として等しいか（列 j を p^{e_i} を法として比較）."""
    for i, e in enumerate(module.divisors):
        for j in range(len(module.divisors)):
            if not (a[i][j] - b[i][j]).with_precision(e).is_zero():
                return False
    return True


@dataclass(frozen=True)
class EigenComponent:
    """A^ψ = e_ψ A."""

    character: tuple[int, ...]
    divisors: tuple[int, ...]
    order_exponent: int
    idempotent: Matrix = field(compare=False, repr=False)
    action_values: tuple[PadicScalar, ...] = field(compare=False, default=())


def character_value(module: DeltaModule, psi: Sequence[int], element: Sequence[int]) -> PadicScalar:
    value = module.ring.one()
    for k_i, a_i, n_i in zip(psi, element, module.generator_orders):
        value = value * module.ring.root_of_unity(n_i) ** (k_i * a_i % n_i)
    return value


def idempotent_matrix(module: DeltaModule, psi: Sequence[int]) -> Matrix:
    """e_ψ = (1/♯Δ) Σ_δ ψ(δ) δ^{-1}."""
    ring = module.ring
    k = len(module.divisors)
    for n_i in module.generator_orders:
        if ring.m % n_i:
            raise InvalidParameterError(f"coefficient ring lacks the {n_i}-th roots of unity")
    powers = []
    for a, n_i in zip(module.actions, module.generator_orders):
        mats = [identity_matrix(ring, k)]
        base = [list(r) for r in a]
        for _ in range(n_i - 1):
            mats.append(mat_mul(ring, mats[-1], base, k))
        powers.append(mats)
    total = zero_matrix(ring, k, k)
    for element in itertools.product(*(range(n) for n in module.generator_orders)):
        inverse = identity_matrix(ring, k)
        for mats, a_i, n_i in zip(powers, element, module.generator_orders):
            inverse = mat_mul(ring, inverse, mats[(n_i - a_i) % n_i], k)
        weight = character_value(module, psi, element)
        total = [[x + weight * y for x, y in zip(rt, ri)] for rt, ri in zip(total, inverse)]
    return mat_scale(total, ring.scalar(module.group_order).inverse())


def eigenspace_decompose(module: DeltaModule, psi: Sequence[int]) -> EigenComponent:
    """ψ-固有成分 A^ψ ≅ coker(1 − e_ψ) の単因子と Δ の作用.

    Raises:
        InvalidParameterError: p | ♯Δ, または ψ の形が Δ と合わない

    """
    psi = tuple(int(k) % n for k, n in zip(psi, module.generator_orders))
    if len(psi) != len(module.generator_orders):
        raise InvalidParameterError("character does not match the generators of Delta")
    ring = module.ring
    k = len(module.divisors)
    e = idempotent_matrix(module, psi)
    complement = mat_sub(identity_matrix(ring, k), e)
    relations = [
        [ring.scalar(ring.p**ei) if i == j else ring.zero() for j in range(k)] for i, ei in enumerate(module.divisors)
    ]
    exps = cokernel_exponents(ring, hstack(ring, k, complement, relations), k, module.exponent)
    divisors = tuple(sorted(v for v in exps if v))
    values = tuple(ring.root_of_unity(n) ** kk for kk, n in zip(psi, module.generator_orders))
    logger.debug(f"Eigencomponent psi={psi}: divisors={divisors}")
    return EigenComponent(psi, divisors, ring.d * sum(divisors), e, values)


def regular_delta_module(ring: CoeffRing, order: int) -> DeltaModule:
    """O/p^N[Δ], Δ 巡回群（生成元は巡回置換として作用）."""
    shift = tuple(
        tuple(ring.one() if i == (j + 1) % order else ring.zero() for j in range(order)) for i in range(order)
    )
    return DeltaModule(ring, (ring.N,) * order, (order,), (shift,))


def random_delta_module(rng: random.Random, ring: CoeffRing, order: int, max_rank: int = 3) -> DeltaModule:
    """ランダムな Δ-加群: 対角作用 ζ^{k_i} を有限加群の自己同型で共役する."""
    base = random_finite_gamma_module(rng, ring, max_rank=max_rank)
    k = len(base.divisors)
    zeta = ring.root_of_unity(order)
    diagonal = [[zeta ** rng.randrange(order) if i == j else ring.zero() for j in range(k)] for i in range(k)]
    conj = base.matrix()
    action = mat_mul(ring, mat_mul(ring, conj, diagonal, k), mat_inverse(ring, conj), k)
    return DeltaModule(ring, base.divisors, (order,), (tuple(tuple(r) for r in action),))
