"""キャッシュ機能のテスト."""

import json
from unittest.mock import Mock, patch

from iwasawa.core.cache import (
    CacheConfig,
    FileResultCache,
    MemoryResultCache,
    RedisResultCache,
    cache_get_or_compute,
    make_cache_key,
)
from iwasawa.core.models import CacheEntry, JobSpec


class TestCacheKey:
    """キャッシュキー生成のテスト."""

    def test_key_depends_on_parameters(self):
        """結果に影響するパラメータが違えばキーも違う."""
        a = JobSpec(subcommand="lp", p=5, character="8:0,1")
        b = JobSpec(subcommand="lp", p=7, character="8:0,1")
        assert make_cache_key(a) != make_cache_key(b)
        assert len(make_cache_key(a)) == 32

    def test_key_ignores_format(self):
        """出力形式はキーに含めない."""
        a = JobSpec(subcommand="lp", p=5, character="8:0,1", format="json")
        b = JobSpec(subcommand="lp", p=5, character="8:0,1", format="csv")
        assert make_cache_key(a) == make_cache_key(b)

    def test_key_depends_on_version(self):
        """コードバージョンが違えばキーも違う."""
        job = JobSpec(subcommand="lp", p=5, character="8:0,1")
        assert make_cache_key(job, "0.1.0") != make_cache_key(job, "0.2.0")


class TestFileResultCache:
    """FileResultCacheのテストクラス."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.payload = {"results": [{"n": 4, "valuation": 0}]}

    def test_set_and_get(self, tmp_path):
        """保存したペイロードを取得できる."""
        cache = FileResultCache(tmp_path)
        cache.set("abc", self.payload)
        assert cache.get("abc") == self.payload
        assert (tmp_path / cache.version / "abc.json").exists()

    def test_miss(self, tmp_path):
        """存在しないキーは None."""
        cache = FileResultCache(tmp_path)
        assert cache.get("missing") is None
        assert cache.get_stats()["misses"] == 1

    def test_version_isolation(self, tmp_path):
        """別バージョンのエントリは見えない."""
        FileResultCache(tmp_path, version="0.0.1").set("abc", self.payload)
        assert FileResultCache(tmp_path, version="0.0.2").get("abc") is None

    def test_corrupt_entry_is_discarded(self, tmp_path):
        """壊れたエントリは削除してミス扱い."""
        cache = FileResultCache(tmp_path)
        cache.directory.mkdir(parents=True)
        path = cache.directory / "abc.json"
        path.write_text("{not json", encoding="utf-8")
        assert cache.get("abc") is None
        assert not path.exists()

    def test_mismatched_key_is_discarded(self, tmp_path):
        """キーが一致しないエントリは使わない."""
        cache = FileResultCache(tmp_path)
        cache.directory.mkdir(parents=True)
        entry = CacheEntry(key="other", version=cache.version, payload=self.payload)
        (cache.directory / "abc.json").write_text(entry.model_dump_json(), encoding="utf-8")
        assert cache.get("abc") is None

    def test_clear(self, tmp_path):
        """clear で全エントリを削除する."""
        cache = FileResultCache(tmp_path)
        cache.set("a", self.payload)
        cache.set("b", self.payload)
        cache.clear()
        assert cache.get_stats()["size"] == 0

    def test_environment_override(self, tmp_path, monkeypatch):
        """IWASAWA_CACHE_DIR で既定ディレクトリを変えられる."""
        monkeypatch.setenv("IWASAWA_CACHE_DIR", str(tmp_path))
        cache = FileResultCache()
        assert cache.root == tmp_path


class TestMemoryResultCache:
    """MemoryResultCacheのテストクラス."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.cache = MemoryResultCache(max_size=2, default_ttl=3600)

    def test_init_default_values(self):
        """デフォルト値での初期化をテスト."""
        cache = MemoryResultCache()
        assert cache.max_size == 256
        assert cache.default_ttl == 86400

    def test_set_and_get(self):
        """保存と取得."""
        self.cache.set("k", {"a": 1})
        assert self.cache.get("k") == {"a": 1}
        stats = self.cache.get_stats()
        assert stats["hits"] == 1
        assert stats["sets"] == 1

    def test_size_limit(self):
        """最大サイズを超えると古いエントリが消える."""
        for key in ("a", "b", "c"):
            self.cache.set(key, {"key": key})
        assert self.cache.get_stats()["size"] == 2


class TestRedisResultCache:
    """RedisResultCacheのテストクラス."""

    @patch("iwasawa.core.cache.redis")
    def test_set_and_get(self, mock_redis_module):
        """Redis に保存した文字列を検証して返す."""
        mock_client = Mock()
        mock_redis_module.from_url.return_value = mock_client
        cache = RedisResultCache(version="0.1.0")

        cache.set("k", {"a": 1})
        key, ttl, raw = mock_client.setex.call_args[0]
        assert key == "iwasawa:0.1.0:k"
        assert ttl == 86400

        mock_client.get.return_value = raw
        assert cache.get("k") == {"a": 1}

    @patch("iwasawa.core.cache.redis")
    def test_connection_failure_falls_back_to_memory(self, mock_redis_module):
        """接続できなければメモリキャッシュに切り替える."""
        mock_redis_module.from_url.side_effect = Exception("Connection failed")
        config = CacheConfig(cache_type="redis")
        assert isinstance(config.create_cache(), MemoryResultCache)

    @patch("iwasawa.core.cache.redis")
    def test_error_on_get_is_a_miss(self, mock_redis_module):
        """取得エラーはミスとして扱う."""
        mock_client = Mock()
        mock_client.get.side_effect = Exception("Redis error")
        mock_redis_module.from_url.return_value = mock_client
        cache = RedisResultCache()
        assert cache.get("k") is None
        assert cache.get_stats()["misses"] == 1

    @patch("iwasawa.core.cache.redis")
    def test_delete_error_on_corrupt_entry_is_a_miss(self, mock_redis_module):
        """壊れたエントリの削除に失敗してもミスとして扱う."""
        mock_client = Mock()
        mock_client.get.return_value = "{not json"
        mock_client.delete.side_effect = Exception("Redis error")
        mock_redis_module.from_url.return_value = mock_client
        cache = RedisResultCache()
        assert cache.get("k") is None
        mock_client.delete.assert_called_once_with("iwasawa:0.1.0:k")
        assert cache.get_stats()["misses"] == 1


class TestCacheConfig:
    """CacheConfigのテストクラス."""

    def test_from_dict(self):
        """辞書から作成."""
        config = CacheConfig.from_dict({"enabled": True, "type": "memory", "max_size": 10})
        assert config.cache_type == "memory"
        assert config.max_size == 10
        assert config.ttl == 86400

    def test_disabled(self):
        """無効化されていれば None."""
        assert CacheConfig(enabled=False).create_cache() is None

    def test_file_cache_directory(self, tmp_path):
        """ディレクトリ指定のファイルキャッシュ."""
        cache = CacheConfig(directory=str(tmp_path)).create_cache()
        assert isinstance(cache, FileResultCache)
        assert cache.root == tmp_path


class TestCacheGetOrCompute:
    """cache_get_or_computeのテスト."""

    def test_result_identical_with_and_without_cache(self):
        """キャッシュの有無で結果は同じ."""
        producer = Mock(return_value={"values": (1, 2)})
        cache = MemoryResultCache()
        first = cache_get_or_compute(cache, "k", producer)
        second = cache_get_or_compute(cache, "k", producer)
        uncached = cache_get_or_compute(None, "k", producer)
        assert first == second == uncached == {"values": [1, 2]}
        assert producer.call_count == 2
        assert json.dumps(first) == json.dumps(uncached)

    def test_unverified_series_is_not_stored(self):
        """照合記録のない級数は保存しない."""
        cache = MemoryResultCache()
        payload = {"status": "PASS", "results": [{"kind": "series", "verification": []}]}
        assert cache_get_or_compute(cache, "k", lambda: payload) == payload
        assert cache.get("k") is None
        assert cache.get_stats()["sets"] == 0

    def test_verification_is_recorded_in_entry(self):
        """級数の照合記録はエントリにも入る."""
        cache = MemoryResultCache()
        check = {"n": 4, "matched_digits": 6, "precision": 6, "status": "match"}
        payload = {"status": "PASS", "results": [{"kind": "series", "verification": [check]}]}
        cache_get_or_compute(cache, "k", lambda: payload)
        assert cache.get("k") == payload
        assert CacheEntry.model_validate_json(cache._cache["k"]).verification == [check]

    def test_unverified_entry_on_disk_is_discarded(self, tmp_path):
        """既に保存された未照合の級数は使わない."""
        cache = FileResultCache(tmp_path)
        cache.directory.mkdir(parents=True)
        payload = {"results": [{"kind": "series", "verification": []}]}
        entry = CacheEntry(key="abc", version=cache.version, payload=payload)
        (cache.directory / "abc.json").write_text(entry.model_dump_json(), encoding="utf-8")
        assert cache.get("abc") is None
