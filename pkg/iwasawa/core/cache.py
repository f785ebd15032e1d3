"""計算結果キャッシュ実装."""

import hashlib
import json
import logging
import os
import tempfile
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable, Optional

from pydantic import ValidationError

from .. import __version__
from .models import CacheEntry, JobSpec, series_verification

try:
    import redis
except ImportError:
    redis = None

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "IWASAWA_CACHE_DIR"


def make_cache_key(job: JobSpec, version: str = __version__) -> str:
    """ジョブの正規 JSON とコードバージョンからキャッシュキーを生成.

    Args:
        job: ジョブ指定
        version: コードバージョン

    Returns:
        SHA256 の先頭 32 桁

    """
    material = f"{version}\n{job.canonical_json()}"
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:32]


def is_unverified(payload: dict[str, Any]) -> bool:
    """級数レコードを含むのに照合記録が空のペイロード."""
    return series_verification(payload) == []


def default_cache_directory() -> Path:
    override = os.environ.get(CACHE_DIR_ENV)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "iwasawa"


class ResultCache(ABC):
    """結果キャッシュの抽象基底クラス."""

    def __init__(self, version: str = __version__):
        self.version = version
        self._stats = {"hits": 0, "misses": 0, "sets": 0}

    @abstractmethod
    def get(self, key: str) -> Optional[dict[str, Any]]:
        """キャッシュからペイロードを取得.

        Args:
            key: キャッシュキー

        Returns:
            ペイロード（存在しない, またはバージョン違いの場合は None）

        """

    @abstractmethod
    def set(self, key: str, payload: dict[str, Any], ttl: Optional[int] = None) -> None:
        """ペイロードを保存.

        Args:
            key: キャッシュキー
            payload: JSON 化可能な結果
            ttl: Time To Live（秒）

        """

    @abstractmethod
    def clear(self) -> None:
        """現在のバージョンのエントリを全て削除."""

    def get_stats(self) -> dict:
        """キャッシュ統計情報を取得."""
        total = self._stats["hits"] + self._stats["misses"]
        return {**self._stats, "hit_rate": self._stats["hits"] / max(total, 1), "version": self.version}

    def _entry(self, key: str, payload: dict[str, Any]) -> str:
        verification = series_verification(payload) or []
        return CacheEntry(key=key, version=self.version, payload=payload, verification=verification).model_dump_json()

    def _payload(self, key: str, raw: str) -> Optional[dict[str, Any]]:
        """保存済み文字列を検証してペイロードを取り出す. 壊れていれば None."""
        try:
            entry = CacheEntry.model_validate_json(raw)
        except ValidationError as e:
            logger.warning(f"Discarding corrupt cache entry {key}: {e.error_count()} validation errors")
            return None
        if entry.key != key or entry.version != self.version:
            logger.warning(f"Discarding cache entry {key}: key/version mismatch ({entry.version})")
            return None
        if is_unverified(entry.payload):
            logger.warning(f"Discarding cache entry {key}: series without verification record")
            return None
        return entry.payload


class FileResultCache(ResultCache):
    """バージョンごとのディレクトリに JSON を置くファイルキャッシュ."""

    def __init__(self, directory: Optional[Path] = None, version: str = __version__):
        """初期化.

        Args:
            directory: キャッシュのルートディレクトリ
            version: コードバージョン

        """
        super().__init__(version)
        self.root = Path(directory) if directory is not None else default_cache_directory()
        self.directory = self.root / version
        logger.info(f"File cache initialized: {self.directory}")

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[dict[str, Any]]:
        path = self._path(key)
        try:
            raw = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            self._stats["misses"] += 1
            logger.debug(f"Cache miss: {key}")
            return None
        except OSError as e:
            logger.warning(f"Error reading cache file {path}: {e}")
            self._stats["misses"] += 1
            return None
        payload = self._payload(key, raw)
        if payload is None:
            try:
                path.unlink()
            except OSError as e:
                logger.warning(f"Could not remove corrupt cache file {path}: {e}")
            self._stats["misses"] += 1
            return None
        self._stats["hits"] += 1
        logger.debug(f"Cache hit: {key}")
        return payload

    def set(self, key: str, payload: dict[str, Any], ttl: Optional[int] = None) -> None:
        """一時ファイルに書いてから rename する（ttl は無視）."""
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{key}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as handle:
                    handle.write(self._entry(key, payload))
                os.replace(tmp, self._path(key))
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            self._stats["sets"] += 1
            logger.debug(f"Cache set: {key}")
        except OSError as e:
            logger.warning(f"Error writing cache file for {key}: {e}")

    def clear(self) -> None:
        removed = 0
        if self.directory.exists():
            for path in self.directory.glob("*.json"):
                try:
                    path.unlink()
                    removed += 1
                except OSError as e:
                    logger.warning(f"Error removing cache file {path}: {e}")
        logger.info(f"File cache cleared: {removed} entries removed")

    def get_stats(self) -> dict:
        stats = super().get_stats()
        stats["size"] = len(list(self.directory.glob("*.json"))) if self.directory.exists() else 0
        stats["directory"] = str(self.directory)
        return stats


class MemoryResultCache(ResultCache):
    """インメモリキャッシュ実装."""

    def __init__(self, max_size: int = 256, default_ttl: int = 86400, version: str = __version__):
        """初期化.

        Args:
            max_size: 最大キャッシュサイズ
            default_ttl: デフォルトTTL（秒）
            version: コードバージョン

        """
        try:
            from cachetools import TTLCache
        except ImportError:
            raise ImportError("cachetools library is required for memory cache")

        super().__init__(version)
        self.max_size = max_size
        self.default_ttl = default_ttl
        self._cache = TTLCache(maxsize=max_size, ttl=default_ttl)
        logger.info(f"Memory cache initialized: max_size={max_size}, default_ttl={default_ttl}")

    def get(self, key: str) -> Optional[dict[str, Any]]:
        raw = self._cache.get(key)
        if raw is None:
            self._stats["misses"] += 1
            return None
        payload = self._payload(key, raw)
        if payload is None:
            self._cache.pop(key, None)
            self._stats["misses"] += 1
            return None
        self._stats["hits"] += 1
        return payload

    def set(self, key: str, payload: dict[str, Any], ttl: Optional[int] = None) -> None:
        if ttl is not None and ttl != self.default_ttl:
            logger.warning(f"Custom TTL {ttl} ignored, using default {self.default_ttl}")
        self._cache[key] = self._entry(key, payload)
        self._stats["sets"] += 1

    def clear(self) -> None:
        self._cache.clear()
        logger.info("Memory cache cleared")

    def get_stats(self) -> dict:
        return {**super().get_stats(), "size": len(self._cache), "max_size": self.max_size}


class RedisResultCache(ResultCache):
    """Redis キャッシュ実装."""

    def __init__(
        self,
        redis_url: str = "redis://localhost:6379/0",
        key_prefix: str = "iwasawa:",
        default_ttl: int = 86400,
        version: str = __version__,
    ):
        """初期化.

        Args:
            redis_url: Redis接続URL
            key_prefix: キープレフィックス
            default_ttl: デフォルトTTL（秒）
            version: コードバージョン

        """
        if redis is None:
            raise ImportError("redis library is required for Redis cache")

        super().__init__(version)
        self.redis_url = redis_url
        self.key_prefix = f"{key_prefix}{version}:"
        self.default_ttl = default_ttl
        try:
            self._redis = redis.from_url(redis_url, decode_responses=True)
            self._redis.ping()
            logger.info(f"Redis cache initialized: {redis_url}, prefix={self.key_prefix}")
        except Exception as e:
            logger.error(f"Failed to connect to Redis: {e}")
            raise

    def get(self, key: str) -> Optional[dict[str, Any]]:
        try:
            raw = self._redis.get(self.key_prefix + key)
        except Exception as e:
            logger.warning(f"Error accessing Redis cache: {e}")
            self._stats["misses"] += 1
            return None
        payload = self._payload(key, raw) if raw else None
        if payload is None:
            if raw:
                try:
                    self._redis.delete(self.key_prefix + key)
                except Exception as e:
                    logger.warning(f"Error removing corrupt Redis entry {key}: {e}")
            self._stats["misses"] += 1
            return None
        self._stats["hits"] += 1
        return payload

    def set(self, key: str, payload: dict[str, Any], ttl: Optional[int] = None) -> None:
        ttl_to_use = ttl if ttl is not None else self.default_ttl
        try:
            self._redis.setex(self.key_prefix + key, ttl_to_use, self._entry(key, payload))
            self._stats["sets"] += 1
        except Exception as e:
            logger.warning(f"Error setting Redis cache: {e}")

    def clear(self) -> None:
        try:
            keys = self._redis.keys(self.key_prefix + "*")
            if keys:
                self._redis.delete(*keys)
            logger.info(f"Redis cache cleared: {len(keys)} keys removed")
        except Exception as e:
            logger.warning(f"Error clearing Redis cache: {e}")

    def get_stats(self) -> dict:
        stats = super().get_stats()
        try:
            stats["size"] = len(self._redis.keys(self.key_prefix + "*"))
        except Exception as e:
            logger.warning(f"Error getting Redis cache stats: {e}")
        return stats


class CacheConfig:
    """キャッシュ設定クラス."""

    def __init__(
        self,
        enabled: bool = True,
        cache_type: str = "file",
        directory: Optional[str] = None,
        ttl: int = 86400,
        max_size: int = 256,
        redis_url: str = "redis://localhost:6379/0",
        redis_key_prefix: str = "iwasawa:",
    ):
        """初期化.

        Args:
            enabled: キャッシュ有効化
            cache_type: キャッシュタイプ（'file', 'memory', 'redis'）
            directory: ファイルキャッシュのディレクトリ
            ttl: Time To Live（秒）
            max_size: メモリキャッシュ最大サイズ
            redis_url: Redis接続URL
            redis_key_prefix: Redisキープレフィックス

        """
        self.enabled = enabled
        self.cache_type = cache_type
        self.directory = directory
        self.ttl = ttl
        self.max_size = max_size
        self.redis_url = redis_url
        self.redis_key_prefix = redis_key_prefix

    @classmethod
    def from_dict(cls, config_dict: dict) -> "CacheConfig":
        """設定ファイルの cache セクションから作成."""
        return cls(
            enabled=config_dict.get("enabled", True),
            cache_type=config_dict.get("type", "file"),
            directory=config_dict.get("directory"),
            ttl=config_dict.get("ttl", 86400),
            max_size=config_dict.get("max_size", 256),
            redis_url=config_dict.get("redis_url", "redis://localhost:6379/0"),
            redis_key_prefix=config_dict.get("redis_key_prefix", "iwasawa:"),
        )

    def create_cache(self, version: str = __version__) -> Optional[ResultCache]:
        """キャッシュインスタンスを作成.

        Returns:
            キャッシュインスタンス（無効化されている場合はNone）

        """
        if not self.enabled:
            return None

        kind = self.cache_type.lower()
        try:
            if kind == "redis":
                return RedisResultCache(self.redis_url, self.redis_key_prefix, self.ttl, version)
            if kind == "memory":
                return MemoryResultCache(self.max_size, self.ttl, version)
            directory = Path(self.directory).expanduser() if self.directory else None
            return FileResultCache(directory, version)
        except Exception as e:
            logger.error(f"Failed to create {self.cache_type} cache: {e}")
            if kind != "memory":
                try:
                    logger.info("Falling back to memory cache")
                    return MemoryResultCache(self.max_size, self.ttl, version)
                except Exception as fallback_e:
                    logger.error(f"Fallback to memory cache also failed: {fallback_e}")
            return None


def cache_get_or_compute(
    cache: Optional[ResultCache], key: str, producer: Callable[[], dict[str, Any]]
) -> dict[str, Any]:
    """キャッシュにあれば返し, なければ計算して保存する.

    保存結果は JSON を経由した形に揃えるので, キャッシュの有無で結果は変わらない.
    """
    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            return cached
    payload = json.loads(json.dumps(producer()))
    if cache is not None:
        if is_unverified(payload):
            logger.warning(f"Not caching {key}: series has no verification record")
        else:
            cache.set(key, payload)
    return payload
