"""ジョブ指定と結果レポートのデータモデル."""

import json
from typing import Any, Optional

from pydantic import BaseModel, field_validator

from .. import __version__

SCHEMA_VERSION = 1

SUBCOMMANDS = ("lp", "invariants", "euler-char", "module-ec", "ktheory", "bockstein", "selftest")
FORMATS = ("json", "csv", "human")
STATUSES = ("PASS", "FAIL", "PARTIAL", "ERROR")

EXIT_CODES = {"PASS": 0, "FAIL": 1, "PARTIAL": 2, "ERROR": 2}


class JobSpec(BaseModel):
    """1 回の実行の全パラメータ. レポートにそのまま埋め込む."""

    subcommand: str
    p: int
    character: Optional[str] = None
    n: list[int] = []
    N: int = 30
    M: int = 16
    strategy: str = "auto"
    branch: int = 0
    sigma: list[int] = []
    level: int = 3
    verify: int = 3
    min_digits: int = 1
    seed: Optional[int] = None
    count: Optional[int] = None
    twist: int = 0
    reading: str = "rho"
    safety_margin: int = 5
    module_description: Optional[dict[str, Any]] = None
    complex_description: Optional[dict[str, Any]] = None
    format: str = "json"

    @field_validator("subcommand")
    @classmethod
    def _check_subcommand(cls, value: str) -> str:
        if value not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand '{value}'")
        return value

    @field_validator("format")
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value not in FORMATS:
            raise ValueError(f"unknown format '{value}'")
        return value

    @field_validator("p")
    @classmethod
    def _check_p(cls, value: int) -> int:
        if value < 3:
            raise ValueError("p must be an odd prime")
        return value

    @field_validator("verify", "min_digits")
    @classmethod
    def _check_non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("verification settings must be non-negative")
        return value

    @field_validator("N", "M")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("precision and truncation must be positive")
        return value

    def cache_subset(self) -> dict[str, Any]:
        """結果に影響するパラメータ（出力形式を除く）."""
        return self.model_dump(mode="json", exclude={"format"})

    def canonical_json(self) -> str:
        return json.dumps(self.cache_subset(), sort_keys=True, separators=(",", ":"))


class Report(BaseModel):
    """機械可読な結果レポート."""

    schema_version: int = SCHEMA_VERSION
    status: str
    job: JobSpec
    results: list[dict[str, Any]] = []
    metadata: dict[str, Any] = {}

    @field_validator("status")
    @classmethod
    def _check_status(cls, value: str) -> str:
        if value not in STATUSES:
            raise ValueError(f"unknown status '{value}'")
        return value

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> str:
        """キーを整列した 2 スペースインデントの JSON."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)


class CacheEntry(BaseModel):
    """内容アドレスのキャッシュエントリ."""

    key: str
    version: str = __version__
    payload: dict[str, Any]
    verification: list[dict[str, Any]] = []


def series_verification(payload: dict[str, Any]) -> Optional[list[dict[str, Any]]]:
    """ペイロード中の級数レコードの照合記録. 級数を含まなければ None."""
    records = [r for r in payload.get("results", []) if r.get("kind") == "series"]
    if not records:
        return None
    return [entry for record in records for entry in record.get("verification") or []]


def combine_statuses(statuses: list[str]) -> str:
    """FAIL > ERROR > PARTIAL > PASS の順で集約する."""
    for status in ("FAIL", "ERROR", "PARTIAL"):
        if status in statuses:
            return status
    return "PASS"
