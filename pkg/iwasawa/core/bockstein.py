"""Λ 上の完全複体のボックスタイン写像とボックスタインオイラー標数."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exceptions import (
    InconsistentComplexError,
    InvalidParameterError,
    IwasawaError,
    NotSemisimpleError,
    PrecisionExhausted,
)
from .linalg import Matrix, cokernel_exponents, hstack, identity_matrix, smith_form, sublattice_index, zero_matrix
from .modules import DEFAULT_SAFETY_MARGIN, ElementaryModule, MuPiece, PolyPiece
from .orders import GroupOrder
from .padic import CoeffRing, PadicScalar
from .power_series import PowerSeries, poly_to_series, twist_substitute

logger = logging.getLogger(__name__)

READINGS = ("rho", "adjoint")

SeriesMatrix = list[list[PowerSeries]]


def _series_mul(ring: CoeffRing, a: SeriesMatrix, b: SeriesMatrix, n: int, k: int, m: int, M: int) -> SeriesMatrix:
    out = [[PowerSeries.constant(ring, 0, M) for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for t in range(k):
            for j in range(m):
                out[i][j] = out[i][j] + a[i][t] * b[t][j]
    return out


@dataclass(frozen=True)
class PerfectComplex:
    """C_{r−1} → … → C_1 → C_0, C_ν = Λ^{ranks[ν]}.

    diffs[ν−1] は d_ν: C_ν → C_{ν−1} の ranks[ν−1] × ranks[ν] 行列.
    """

    ring: CoeffRing
    ranks: tuple[int, ...]
    diffs: tuple[tuple[tuple[PowerSeries, ...], ...], ...]
    truncation: int = 16

    def __post_init__(self) -> None:
        if any(r < 0 for r in self.ranks):
            raise InvalidParameterError(f"ranks must be non-negative, got {self.ranks}")
        if len(self.diffs) != max(len(self.ranks) - 1, 0):
            raise InvalidParameterError(f"{len(self.ranks)} terms need {len(self.ranks) - 1} differentials")
        for nu, d in enumerate(self.diffs, start=1):
            rows, cols = self.ranks[nu - 1], self.ranks[nu]
            if len(d) != rows or any(len(row) != cols for row in d):
                raise InvalidParameterError(f"d_{nu} must be a {rows}x{cols} matrix")
        for nu in range(1, len(self.diffs)):
            composite = _series_mul(
                self.ring,
                self.matrix(nu),
                self.matrix(nu + 1),
                self.ranks[nu - 1],
                self.ranks[nu],
                self.ranks[nu + 1],
                self.truncation,
            )
            if any(not entry.is_zero() for row in composite for entry in row):
                raise InconsistentComplexError(f"d_{nu} o d_{nu + 1} is not zero at precision")

    @property
    def length(self) -> int:
        return len(self.ranks)

    def matrix(self, nu: int) -> SeriesMatrix:
        """d_ν（範囲外なら空）."""
        if 1 <= nu <= len(self.diffs):
            return [list(row) for row in self.diffs[nu - 1]]
        return []

    def coefficient_matrix(self, nu: int, j: int) -> Matrix:
        """d_ν の T^j の係数行列."""
        return [[entry[j] if j < entry.M else self.ring.zero() for entry in row] for row in self.matrix(nu)]

    def rank(self, nu: int) -> int:
        return self.ranks[nu] if 0 <= nu < len(self.ranks) else 0

    @classmethod
    def from_series(cls, ring: CoeffRing, ranks: Sequence[int], diffs: Sequence[SeriesMatrix], truncation: int = 16) -> "PerfectComplex":
        return cls(
            ring,
            tuple(ranks),
            tuple(tuple(tuple(row) for row in d) for d in diffs),
            truncation,
        )


def twist_complex(complex_: PerfectComplex, c: PadicScalar) -> PerfectComplex:
    """すべての成分で T ↦ c(1+T) − 1 と置換する.

    Raises:
        NotInMaximalIdealError: c − 1 が極大イデアルにない場合
        InconsistentComplexError: 置換後に d² ≠ 0 となった場合

    """
    diffs = [[[twist_substitute(entry, c) for entry in row] for row in d] for d in complex_.diffs]
    return PerfectComplex.from_series(complex_.ring, complex_.ranks, diffs, complex_.truncation)


def elementary_resolution(module: ElementaryModule) -> PerfectComplex:
    """[Λ^k −diag(F_j)→ Λ^k]（F_j は各成分の生成元）."""
    ring, M = module.ring, module.truncation
    gens = []
    for piece in module.pieces:
        if isinstance(piece, MuPiece):
            gens.append(PowerSeries.constant(ring, ring.p**piece.exponent, M))
        elif isinstance(piece, PolyPiece):
            gens.append(poly_to_series(ring, piece.power(), M))
    k = len(gens)
    zero = PowerSeries.constant(ring, 0, M)
    diag = [[gens[i] if i == j else zero for j in range(k)] for i in range(k)]
    return PerfectComplex.from_series(ring, (k, k), [diag], M)


def direct_sum(first: PerfectComplex, second: PerfectComplex) -> PerfectComplex:
    if first.ring != second.ring:
        raise InvalidParameterError("complexes live over different coefficient rings")
    length = max(first.length, second.length)
    ranks = [first.rank(nu) + second.rank(nu) for nu in range(length)]
    M = min(first.truncation, second.truncation)
    zero = PowerSeries.constant(first.ring, 0, M)
    diffs = []
    for nu in range(1, length):
        a, b = first.matrix(nu), second.matrix(nu)
        rows_a, cols_a = first.rank(nu - 1), first.rank(nu)
        rows_b, cols_b = second.rank(nu - 1), second.rank(nu)
        block = [[a[i][j] if j < cols_a else zero for j in range(cols_a + cols_b)] for i in range(rows_a)]
        block += [[zero if j < cols_a else b[i][j - cols_a] for j in range(cols_a + cols_b)] for i in range(rows_b)]
        diffs.append(block)
    return PerfectComplex.from_series(first.ring, ranks, diffs, M)


def acyclic_pair(ring: CoeffRing, nu: int, truncation: int = 16) -> PerfectComplex:
    """次数 ν, ν−1 の [Λ =→ Λ]."""
    if nu < 1:
        raise InvalidParameterError("acyclic pair needs nu >= 1")
    ranks = [0] * (nu + 1)
    ranks[nu - 1] = ranks[nu] = 1
    one = PowerSeries.constant(ring, 1, truncation)
    diffs: list[SeriesMatrix] = []
    for mu in range(1, nu + 1):
        rows, cols = ranks[mu - 1], ranks[mu]
        diffs.append([[one] * cols for _ in range(rows)] if mu == nu else [[] for _ in range(rows)])
    return PerfectComplex.from_series(ring, ranks, diffs, truncation)


def series_determinant(matrix: SeriesMatrix, ring: CoeffRing, M: int) -> PowerSeries:
    """余因子展開による行列式."""
    k = len(matrix)
    if k == 0:
        return PowerSeries.constant(ring, 1, M)
    if k == 1:
        return matrix[0][0]
    total = PowerSeries.constant(ring, 0, M)
    for j in range(k):
        entry = matrix[0][j]
        if entry.is_zero():
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = entry * series_determinant(minor, ring, M)
        total = total + term if j % 2 == 0 else total - term
    return total


# --- 有限階数の線形代数（次元を明示する） ---


def _mul(ring: CoeffRing, a: Matrix, b: Matrix, n: int, k: int, m: int) -> Matrix:
    out = zero_matrix(ring, n, m)
    for i in range(n):
        for t in range(k):
            x = a[i][t]
            if x.is_zero() and x.prec == ring.N:
                continue
            for j in range(m):
                out[i][j] = out[i][j] + x * b[t][j]
    return out


def _cycles(ring: CoeffRing, d0: Matrix, rows: int, cols: int) -> tuple[Matrix, Matrix]:
    """ker(d0) の基底（cols × z）と座標写像（z × cols）."""
    if rows == 0 or cols == 0:
        return identity_matrix(ring, cols), identity_matrix(ring, cols)
    snf = smith_form(ring, d0, cols)
    idx = [t for t, v in enumerate(snf.pivots) if v is None] + list(range(len(snf.pivots), cols))
    basis = [[snf.V[i][t] for t in idx] for i in range(cols)]
    coords = [list(snf.V_inv[t]) for t in idx]
    return basis, coords


def _in_span(ring: CoeffRing, outer: Matrix, inner: Matrix, dim: int) -> bool:
    if dim == 0 or all(x.is_zero() for row in inner for x in row):
        return True
    if not outer or not outer[0] or all(x.is_zero() for row in outer for x in row):
        return False
    try:
        sublattice_index(ring, outer, inner, dim)
    except IwasawaError:
        return False
    return True


@dataclass(frozen=True)
class TorGroup:
    """Tor_ν^Λ(O, X) = H_ν(X/T) ≅ O^free ⊕ ⊕ O/p^e."""

    free_rank: int
    torsion: tuple[int, ...]

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


@dataclass
class BocksteinResult:
    """ボックスタイン写像と（計算済みなら）ボックスタインコホモロジーの位数."""

    c: PadicScalar
    reading: str
    tor: list[TorGroup]
    maps: list[Matrix]
    orders: list[GroupOrder] = field(default_factory=list)
    semisimple: Optional[bool] = None

    @property
    def ring(self) -> CoeffRing:
        return self.c.ring

    def euler_exponent(self) -> Optional[int]:
        """log_p ∏_ν ♯H_β,ν^{(−1)^{ν+1}}. 無限を含めば None."""
        if not self.orders or any(not o.is_finite for o in self.orders):
            return None if self.orders else 0
        return sum((-1) ** (nu + 1) * o.exponent for nu, o in enumerate(self.orders))

    def to_json(self) -> dict:
        return {
            "c": self.c.digits(),
            "reading": self.reading,
            "tor": [t.to_json() for t in self.tor],
            "maps": [[[x.digits() for x in row] for row in m] for m in self.maps],
            "orders": [o.to_json() for o in self.orders],
            "semisimple": self.semisimple,
        }


@dataclass
class _Snake:
    """X/T の輪体の座標と連結写像."""

    z: list[int]
    b: list[Matrix]
    beta: list[Matrix]
    tor: list[TorGroup]


def _effective_twist(c: PadicScalar, reading: str) -> PadicScalar:
    if reading not in READINGS:
        raise InvalidParameterError(f"unknown reading '{reading}', expected one of {READINGS}")
    return c if reading == "rho" else c.ring.one()


def _snake(complex_: PerfectComplex) -> _Snake:
    ring = complex_.ring
    L = complex_.length
    bases, coords, z = [], [], []
    for nu in range(L):
        basis, coord = _cycles(ring, complex_.coefficient_matrix(nu, 0), complex_.rank(nu - 1), complex_.rank(nu))
        bases.append(basis)
        coords.append(coord)
        z.append(len(coord))

    b, tor = [], []
    for nu in range(L):
        r_next = complex_.rank(nu + 1)
        d0_next = complex_.coefficient_matrix(nu + 1, 0) if r_next else [[] for _ in range(complex_.rank(nu))]
        bn = _mul(ring, coords[nu], d0_next, z[nu], complex_.rank(nu), r_next)
        b.append(bn)
        exps = cokernel_exponents(ring, bn, z[nu])
        free = sum(1 for e in exps if e is None)
        tor.append(TorGroup(free, tuple(sorted(e for e in exps if e))))

    beta = [[]]
    for nu in range(1, L):
        d1 = complex_.coefficient_matrix(nu, 1)
        image = _mul(ring, d1, bases[nu], complex_.rank(nu - 1), complex_.rank(nu), z[nu])
        beta.append(_mul(ring, coords[nu - 1], image, z[nu - 1], complex_.rank(nu - 1), z[nu]))

    for nu in range(2, L):
        composite = _mul(ring, beta[nu - 1], beta[nu], z[nu - 2], z[nu - 1], z[nu])
        if not _in_span(ring, b[nu - 2], composite, z[nu - 2]):
            raise InconsistentComplexError(f"beta_{nu - 1} o beta_{nu} does not vanish on homology")
    return _Snake(z, b, beta, tor)


def bockstein_maps(complex_: PerfectComplex, c: PadicScalar, reading: str = "rho") -> BocksteinResult:
    """ρ でひねった複体の Tor 群と連結写像 β_ν: Tor_ν → Tor_{ν−1}.

    β_ν は 0 → X/T → X/T² → X/T → 0 の蛇の補題から得られ, 輪体の座標で
    表した行列として返す.
    """
    twist = _effective_twist(c, reading)
    twisted = twist_complex(complex_, twist)
    snake = _snake(twisted)
    return BocksteinResult(twist, reading, snake.tor, snake.beta[1:])


def bockstein_cohomology(
    complex_: PerfectComplex,
    c: PadicScalar,
    reading: str = "rho",
    safety_margin: int = DEFAULT_SAFETY_MARGIN,
) -> BocksteinResult:
    """H_β,ν = ker β_ν / im β_{ν+1} の位数と半単純性.

    Raises:
        PrecisionExhausted: 有限な位数が精度の余裕を使い切った場合
        InconsistentComplexError: 像が核に収まらない場合

    """
    twist = _effective_twist(c, reading)
    twisted = twist_complex(complex_, twist)
    ring = twisted.ring
    snake = _snake(twisted)
    z, b, beta = snake.z, snake.b, snake.beta
    L = twisted.length

    kernels = []
    for nu in range(L):
        if nu == 0 or z[nu - 1] == 0:
            kernels.append(identity_matrix(ring, z[nu]))
            continue
        cols = z[nu] + twisted.rank(nu)
        neg_b = [[-x for x in row] for row in b[nu - 1]]
        stacked = hstack(ring, z[nu - 1], beta[nu], neg_b)
        snf = smith_form(ring, stacked, cols)
        idx = [t for t, v in enumerate(snf.pivots) if v is None] + list(range(len(snf.pivots), cols))
        kernels.append([[snf.V[i][t] for t in idx] for i in range(z[nu])])

    orders = []
    for nu in range(L):
        if z[nu] == 0:
            orders.append(GroupOrder.trivial(ring.p))
            continue
        blocks = [beta[nu + 1]] if nu + 1 < L else []
        image = hstack(ring, z[nu], *blocks, b[nu])
        try:
            length = sublattice_index(ring, kernels[nu], image, z[nu])
        except IwasawaError as e:
            raise InconsistentComplexError(f"image of beta_{nu + 1} is not inside ker beta_{nu}: {e}")
        if length is not None and length >= ring.N - safety_margin:
            raise PrecisionExhausted(f"Bockstein order p^{length} in degree {nu} exhausts precision N={ring.N}")
        orders.append(GroupOrder.infinite(ring.p) if length is None else GroupOrder(ring.p, ring.d * length))

    semisimple = all(o.is_finite for o in orders)
    logger.debug(f"Bockstein orders {[str(o) for o in orders]}, semisimple={semisimple}")
    return BocksteinResult(twist, reading, snake.tor, beta[1:], orders, semisimple)


@dataclass(frozen=True)
class BocksteinEuler:
    """ボックスタインオイラー標数と行列式による比較値."""

    p: int
    exponent: int
    comparison_exponent: Optional[int] = None
    vanishing_order: Optional[int] = None

    @property
    def value(self) -> Fraction:
        return Fraction(self.p) ** self.exponent

    @property
    def agrees(self) -> Optional[bool]:
        if self.comparison_exponent is None:
            return None
        return self.exponent == self.comparison_exponent

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "value": str(self.value),
            "comparison_exponent": self.comparison_exponent,
            "vanishing_order": self.vanishing_order,
            "agrees": self.agrees,
        }


def determinant_comparison(complex_: PerfectComplex, c: PadicScalar) -> Optional[tuple[int, int]]:
    """正方二項複体について, ひねった行列式の最初の非零係数 (r, −d·v(a_r)).

    二項正方でない, または行列式が精度内で 0 なら None.
    """
    if complex_.length != 2 or complex_.ranks[0] != complex_.ranks[1]:
        return None
    twisted = twist_complex(complex_, c)
    det = series_determinant(twisted.matrix(1), twisted.ring, twisted.truncation)
    for r, coeff in enumerate(det.coeffs):
        v = coeff.valuation()
        if v is not None:
            return r, -twisted.ring.d * v
    return None


def bockstein_euler_char(complex_: PerfectComplex, c: PadicScalar, reading: str = "rho") -> BocksteinEuler:
    """∏_ν ♯H_β,ν^{(−1)^{ν+1}} の指数と |ξ(ρ)|_p^d との比較.

    Raises:
        NotSemisimpleError: ボックスタインコホモロジーが有限でない場合

    """
    result = bockstein_cohomology(complex_, c, reading)
    if not result.semisimple:
        raise NotSemisimpleError("Bockstein cohomology is not finite in every degree")
    comparison = determinant_comparison(complex_, result.c)
    if comparison is None:
        return BocksteinEuler(result.ring.p, result.euler_exponent())
    r, exponent = comparison
    return BocksteinEuler(result.ring.p, result.euler_exponent(), exponent, r)
