"""入力ファイルと CLI 引数の解析."""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Union

from .bockstein import PerfectComplex
from .exceptions import InconsistentComplexError, IwasawaError, ParseError
from .modules import ElementaryModule, MuPiece, PolyPiece
from .padic import CoeffRing
from .power_series import PowerSeries

logger = logging.getLogger(__name__)


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParseError(f"invalid {what} list: '{text}'")


def parse_sigma(text: str) -> list[int]:
    """"5,7" 形式の素数集合."""
    return sorted(set(_int_list(text, "prime")))


def parse_n_list(text: str) -> list[int]:
    """"4,8,-4" 形式の整数列."""
    return _int_list(text, "integer")


def load_json_file(path: Union[str, Path]) -> Any:
    """JSON ファイルを読み込む.

    Raises:
        ParseError: ファイルが存在しない, または JSON として不正な場合

    """
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ParseError(f"input file not found: {path}")
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON in {path}: {e}")


def _decimal(value: Any) -> int:
    if isinstance(value, bool):
        raise ParseError(f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            pass
    raise ParseError(f"expected a decimal integer string, got {value!r}")


def module_from_json(data: dict, ring: CoeffRing, truncation: int = 16) -> ElementaryModule:
    """{"mu": [...], "polys": [{"coeffs": [...], "mult": λ}]} を読む.

    係数は low → high の十進文字列（または整数）.

    Raises:
        ParseError: 形式が不正, または多項式が特殊多項式でない場合

    """
    if not isinstance(data, dict):
        raise ParseError("module description must be a JSON object")
    unknown = set(data) - {"mu", "polys", "truncation", "name"}
    if unknown:
        raise ParseError(f"unknown keys in module description: {sorted(unknown)}")
    try:
        mu = [_decimal(m) for m in data.get("mu", [])]
        polys = []
        for entry in data.get("polys", []):
            coeffs = [_decimal(c) for c in entry["coeffs"]]
            polys.append((coeffs, _decimal(entry.get("mult", 1))))
        return ElementaryModule.from_integers(ring, mu, polys, int(data.get("truncation", truncation)))
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed module description: {e}")
    except IwasawaError as e:
        raise ParseError(f"invalid module description: {e.message}")


def modules_from_json(data: Any, ring: CoeffRing, truncation: int = 16) -> list[ElementaryModule]:
    """単一の加群, 加群のリスト, または {"modules": [...]} を読む."""
    if isinstance(data, dict) and "modules" in data:
        data = data["modules"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise ParseError("module file must contain an object or a list of objects")
    return [module_from_json(entry, ring, truncation) for entry in data]


def module_to_json(module: ElementaryModule) -> dict:
    return {
        "mu": [piece.exponent for piece in module.pieces if isinstance(piece, MuPiece)],
        "polys": [
            {"coeffs": [str(c.to_int()) for c in piece.coeffs], "mult": piece.multiplicity}
            for piece in module.pieces
            if isinstance(piece, PolyPiece)
        ],
        "truncation": module.truncation,
    }


def series_from_json(value: Any, ring: CoeffRing, truncation: int) -> PowerSeries:
    """係数の十進文字列リスト, または直列化レコードから級数を作る."""
    if isinstance(value, dict):
        try:
            series = PowerSeries.from_record(value)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed series record: {e}")
        except IwasawaError as e:
            raise ParseError(f"invalid series record: {e.message}")
        if series.ring != ring:
            raise ParseError("series record belongs to a different coefficient ring")
        return series
    if not isinstance(value, list):
        raise ParseError(f"series must be a list of coefficients or a record, got {type(value).__name__}")
    coeffs = [_decimal(c) for c in value]
    if len(coeffs) > truncation:
        raise ParseError(f"series with {len(coeffs)} coefficients exceeds truncation M={truncation}")
    return PowerSeries.from_ints(ring, coeffs, truncation)


def complex_from_json(data: Any, ring: CoeffRing, truncation: int = 16) -> PerfectComplex:
    """{"ranks": [...], "diffs": [[[series…]…]…]} を読む.

    Raises:
        ParseError: 形式が不正な場合
        InconsistentComplexError: d² ≠ 0 の場合

    """
    if not isinstance(data, dict) or "ranks" not in data:
        raise ParseError("complex description must be an object with 'ranks'")
    try:
        ranks = [_decimal(r) for r in data["ranks"]]
        diffs = [[[series_from_json(entry, ring, truncation) for entry in row] for row in d] for d in data.get("diffs", [])]
    except TypeError as e:
        raise ParseError(f"malformed complex description: {e}")
    try:
        return PerfectComplex.from_series(ring, ranks, diffs, truncation)
    except InconsistentComplexError:
        raise
    except IwasawaError as e:
        raise ParseError(f"invalid complex description: {e.message}")


def complex_to_json(complex_: PerfectComplex) -> dict:
    return {
        "ranks": list(complex_.ranks),
        "diffs": [[[[str(c.to_int()) for c in entry.coeffs] for entry in row] for row in d] for d in complex_.diffs],
    }


def format_csv(rows: Iterable[dict], columns: list[str]) -> str:
    """ヘッダー付きのカンマ区切り（値は数値か [A-Za-z0-9:_-] のみ）."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row.get(col, "")) for col in columns))
    return "\n".join(lines) + "\n"
