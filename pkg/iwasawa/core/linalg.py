"""連鎖環 O/p^N 上の行列とスミス標準形."""

import logging
from dataclasses import dataclass
from typing import Optional

from .exceptions import IwasawaError
from .padic import CoeffRing, PadicScalar

logger = logging.getLogger(__name__)

Matrix = list[list[PadicScalar]]


def zero_matrix(ring: CoeffRing, rows: int, cols: int, prec: Optional[int] = None) -> Matrix:
    return [[ring.zero(prec) for _ in range(cols)] for _ in range(rows)]


def identity_matrix(ring: CoeffRing, size: int) -> Matrix:
    return [[ring.one() if i == j else ring.zero() for j in range(size)] for i in range(size)]


def int_matrix(ring: CoeffRing, rows: list[list[int]]) -> Matrix:
    return [[ring.scalar(v) for v in row] for row in rows]


def mat_mul(ring: CoeffRing, a: Matrix, b: Matrix, inner: Optional[int] = None) -> Matrix:
    """a·b. 空行列の内側次元は inner で与える."""
    n = len(a)
    k = len(b) if b else (inner or 0)
    m = len(b[0]) if b else 0
    out = zero_matrix(ring, n, m)
    for i in range(n):
        row = a[i]
        for t in range(k):
            x = row[t]
            if x.is_zero() and x.prec == ring.N:
                continue
            bt = b[t]
            out_i = out[i]
            for j in range(m):
                out_i[j] = out_i[j] + x * bt[j]
    return out


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, c: PadicScalar) -> Matrix:
    return [[c * x for x in row] for row in a]


def hstack(ring: CoeffRing, rows: int, *blocks: Matrix) -> Matrix:
    out: Matrix = [[] for _ in range(rows)]
    for block in blocks:
        for i in range(rows):
            if block:
                out[i].extend(block[i])
    return out


def mat_reduce(a: Matrix, prec: int) -> Matrix:
    return [[x.with_precision(prec) for x in row] for row in a]


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


@dataclass
class SmithForm:
    """U·A·V = diag(p^{v_0}, …) の分解.

    pivots[i] は i 番目の対角成分の付値. 精度内で 0 なら None.
    """

    pivots: list[Optional[int]]
    rows: int
    cols: int
    U: Matrix
    U_inv: Matrix
    V: Matrix
    V_inv: Matrix

    @property
    def rank(self) -> int:
        return sum(1 for v in self.pivots if v is not None)

    def finite_pivots(self) -> list[int]:
        return [v for v in self.pivots if v is not None]


def smith_form(ring: CoeffRing, matrix: Matrix, cols: Optional[int] = None) -> SmithForm:
    """連鎖環上のスミス標準形.

    ピボットは残りの部分行列で付値最小の成分を選び, 同値なら行番号,
    列番号の小さいものを優先する. ピボットを p^v に正規化してから
    行・列を消去する.

    Args:
        ring: 係数環
        matrix: rows × cols 行列（変更しない）
        cols: 行数 0 の場合の列数

    Returns:
        SmithForm

    """
    a = [list(row) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if a else (cols or 0)
    U = identity_matrix(ring, rows)
    U_inv = identity_matrix(ring, rows)
    V = identity_matrix(ring, cols)
    V_inv = identity_matrix(ring, cols)
    pivots: list[Optional[int]] = []

    for t in range(min(rows, cols)):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = a[i][j].valuation()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            pivots.extend([None] * (min(rows, cols) - t))
            break
        v, pi, pj = best

        if pi != t:
            a[t], a[pi] = a[pi], a[t]
            U[t], U[pi] = U[pi], U[t]
            for row in U_inv:
                row[t], row[pi] = row[pi], row[t]
        if pj != t:
            for row in a:
                row[t], row[pj] = row[pj], row[t]
            for row in V:
                row[t], row[pj] = row[pj], row[t]
            V_inv[t], V_inv[pj] = V_inv[pj], V_inv[t]

        # ピボットを p^v に正規化
        unit = a[t][t].shift(-v)
        w_inv = unit.inverse()
        a[t] = [w_inv * x for x in a[t]]
        U[t] = [w_inv * x for x in U[t]]
        for row in U_inv:
            row[t] = row[t] * unit

        for i in range(t + 1, rows):
            if a[i][t].is_zero():
                continue
            f = a[i][t].shift(-v)
            a[i] = [x - f * y for x, y in zip(a[i], a[t])]
            U[i] = [x - f * y for x, y in zip(U[i], U[t])]
            for row in U_inv:
                row[t] = row[t] + f * row[i]

        for j in range(t + 1, cols):
            if a[t][j].is_zero():
                continue
            f = a[t][j].shift(-v)
            for row in a:
                row[j] = row[j] - f * row[t]
            for row in V:
                row[j] = row[j] - f * row[t]
            V_inv[t] = [x + f * y for x, y in zip(V_inv[t], V_inv[j])]
        pivots.append(v)

    logger.debug(f"Smith form {rows}x{cols}: pivots={pivots}")
    return SmithForm(pivots, rows, cols, U, U_inv, V, V_inv)


def cokernel_exponents(ring: CoeffRing, matrix: Matrix, rows: int, bound: Optional[int] = None) -> list[Optional[int]]:
    """(O/p^N)^rows / im(matrix) の巡回成分の指数.

    bound を与えると, 精度内で 0 のピボットや欠けた行は p^bound の成分
    として数える（O/p^bound 上の有限加群の計算）. bound がなければ None
    （自由成分）を返す.
    """
    cols = len(matrix[0]) if matrix else 0
    snf = smith_form(ring, matrix, cols) if rows else SmithForm([], 0, cols, [], [], [], [])
    exps: list[Optional[int]] = []
    for i in range(rows):
        v = snf.pivots[i] if i < len(snf.pivots) else None
        if bound is not None:
            v = bound if v is None else min(v, bound)
        exps.append(v)
    return exps


def kernel_basis(ring: CoeffRing, matrix: Matrix, cols: int) -> Matrix:
    """核の O-基底（列ベクトルを並べた cols × z 行列）."""
    rows = len(matrix)
    snf = smith_form(ring, matrix, cols)
    indices = [t for t, v in enumerate(snf.pivots) if v is None]
    indices += list(range(len(snf.pivots), cols))
    return [[snf.V[i][t] for t in indices] for i in range(cols)] if rows or cols else []


def mat_inverse(ring: CoeffRing, matrix: Matrix) -> Matrix:
    """可逆行列の逆行列. スミス分解 U·A·V = I から A^{-1} = V·U.

    Raises:
        IwasawaError: 可逆でない場合

    """
    size = len(matrix)
    snf = smith_form(ring, matrix, size)
    if any(v != 0 for v in snf.pivots):
        raise IwasawaError("matrix is not invertible over the coefficient ring")
    return mat_mul(ring, snf.V, snf.U, size)


def sublattice_index(ring: CoeffRing, outer: Matrix, inner: Matrix, dim: int) -> Optional[int]:
    """[outer : inner] の p 冪指数（O-加群としての長さ）.

    outer, inner は dim 行の生成元行列. inner の階数が outer より小さければ
    指数は無限で None を返す.

    Raises:
        IwasawaError: inner が outer に含まれない場合

    """
    outer_cols = len(outer[0]) if outer else 0
    inner_cols = len(inner[0]) if inner else 0
    snf = smith_form(ring, outer, outer_cols) if dim else SmithForm([], 0, 0, [], [], [], [])
    s = snf.rank
    if s == 0:
        return 0
    W = mat_mul(ring, snf.U, inner, dim)
    for i in range(s, dim):
        if any(not x.is_zero() for x in W[i]):
            raise IwasawaError("generators do not lie in the ambient lattice")
    coords = [[W[i][j].shift(-snf.pivots[i]) for j in range(inner_cols)] for i in range(s)]
    if inner_cols == 0:
        return None
    inner_snf = smith_form(ring, coords, inner_cols)
    if inner_snf.rank < s:
        return None
    return sum(inner_snf.finite_pivots())
