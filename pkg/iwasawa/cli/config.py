"""設定管理モジュール."""

import os
from pathlib import Path
from typing import Any, Optional

import yaml

from ..core.cache import CacheConfig

CONFIG_ENV = "IWASAWA_CONFIG"
CONFIG_FILENAMES = ("config.yaml", "config.yml")

# 深いマージを行うセクション
NESTED_SECTIONS = ("cache", "logging")


class ConfigManager:
    """設定管理クラス."""

    def get_default_config(self) -> dict[str, Any]:
        """デフォルト設定を取得.

        Returns:
            デフォルト設定の辞書

        """
        return {
            "N": 30,
            "M": 16,
            "safety_margin": 5,
            "level": 3,
            "strategy": "auto",
            "seed": 1,
            "sigma": [],
            "reading": "rho",
            "format": "json",
            "cache": {
                "enabled": True,
                "type": "file",
                "directory": None,  # None なら IWASAWA_CACHE_DIR か ~/.cache/iwasawa
                "ttl": 86400,
                "max_size": 256,
                "redis_url": "redis://localhost:6379/0",
                "redis_key_prefix": "iwasawa:",
            },
            "logging": {
                "level": "WARNING",
            },
        }

    def find_config_file(self, explicit: Optional[str] = None) -> Optional[Path]:
        """設定ファイルを決定（優先順位: --config > IWASAWA_CONFIG > config.yaml/config.yml）.

        Args:
            explicit: コマンドラインで指定されたパス

        Returns:
            設定ファイルのパス（見つからない場合はNone）

        """
        if explicit:
            return Path(explicit)
        env_config = os.getenv(CONFIG_ENV)
        if env_config:
            return Path(env_config)
        for candidate_name in CONFIG_FILENAMES:
            candidate_path = Path(candidate_name)
            if candidate_path.exists():
                return candidate_path
        return None

    def load_config(self, config_path: str) -> dict[str, Any]:
        """設定ファイルを読み込み.

        Args:
            config_path: 設定ファイルのパス

        Returns:
            設定の辞書

        Raises:
            FileNotFoundError: ファイルが存在しない場合
            yaml.YAMLError: YAML解析エラーの場合

        """
        config_file = Path(config_path)

        if not config_file.exists():
            raise FileNotFoundError(f"設定ファイルが見つかりません: {config_path}")

        try:
            with open(config_file, encoding="utf-8") as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"設定ファイルの解析に失敗しました: {e}")
        if config is None:
            return {}
        if not isinstance(config, dict):
            raise yaml.YAMLError(f"設定ファイルの最上位はマッピングである必要があります: {config_path}")
        return config

    def merge_configs(self, base_config: dict[str, Any], override_config: dict[str, Any]) -> dict[str, Any]:
        """設定をマージ.

        Args:
            base_config: ベース設定
            override_config: オーバーライド設定

        Returns:
            マージされた設定

        """
        merged = base_config.copy()

        for key, value in override_config.items():
            if key in NESTED_SECTIONS and isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value

        return merged

    def get_cache_config(self, config: dict[str, Any]) -> CacheConfig:
        """キャッシュ設定を取得.

        Args:
            config: 全体設定

        Returns:
            キャッシュ設定

        """
        return CacheConfig.from_dict(config.get("cache", {}))
