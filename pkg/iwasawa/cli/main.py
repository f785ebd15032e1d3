"""CLIメイン機能."""

import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click
import yaml
from pydantic import ValidationError

from .. import __version__
from ..core.bockstein import READINGS
from ..core.exceptions import ParseError
from ..core.lfunctions import STRATEGIES
from ..core.models import FORMATS, JobSpec
from ..core.parsing import load_json_file, parse_n_list, parse_sigma
from ..core.runner import JobRunner, render
from .config import ConfigManager

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# 設定ファイルから JobSpec に引き継ぐキー（サブコマンドごと）
SERIES_KEYS = ("N", "M", "strategy", "level", "sigma")
CONFIG_KEYS = {
    "lp": SERIES_KEYS,
    "invariants": SERIES_KEYS,
    "ktheory": SERIES_KEYS,
    "euler-char": ("N", "M", "safety_margin"),
    "module-ec": ("N", "seed"),
    "bockstein": ("N", "M", "safety_margin", "reading"),
    "selftest": ("seed",),
}


@click.group()
@click.option("--config", "-c", help="設定ファイルのパス")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), help="ログレベル（既定: WARNING）")
@click.version_option(__version__, prog_name="iwasawa")
@click.pass_context
def cli(ctx: click.Context, config: Optional[str], log_level: Optional[str]) -> None:
    """岩澤理論の厳密計算と検証を行う."""
    config_manager = ConfigManager()
    settings = config_manager.get_default_config()

    config_path = config_manager.find_config_file(config)
    if config_path is not None:
        try:
            file_config = config_manager.load_config(str(config_path))
            settings = config_manager.merge_configs(settings, file_config)
        except (FileNotFoundError, yaml.YAMLError) as e:
            click.echo(f"設定ファイル読み込みエラー: {e}", err=True)
            sys.exit(2)

    level = (log_level or settings.get("logging", {}).get("level", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = {"config": settings, "manager": config_manager}


def common_options(func: Callable) -> Callable:
    """全サブコマンド共通のオプション."""
    options = [
        click.option("--p", "p", type=int, required=True, help="奇素数 p"),
        click.option("--N", "precision", type=int, help="p 進精度 N"),
        click.option("--M", "truncation", type=int, help="冪級数の打ち切り次数 M"),
        click.option("--format", "fmt", type=click.Choice(FORMATS), help="出力形式"),
        click.option("--output", "-o", help="出力ファイルのパス"),
        click.option("--no-cache", is_flag=True, help="この実行ではキャッシュを使わない"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def series_options(func: Callable) -> Callable:
    """L 級数を構成するサブコマンドのオプション."""
    options = [
        click.option("--strategy", type=click.Choice(STRATEGIES), help="構成方法"),
        click.option("--branch", type=int, default=0, show_default=True, help="テイヒミュラー分枝 i（奇指標は奇数の i）"),
        click.option("--sigma", help="除く素数の集合（例: 5,7）"),
        click.option("--level", type=int, help="スティッケルベルガー元のレベル"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _job_fields(settings: dict[str, Any], subcommand: str, params: dict[str, Any]) -> dict[str, Any]:
    fields = {key: settings[key] for key in CONFIG_KEYS[subcommand] if settings.get(key) is not None}
    fields.update({key: value for key, value in params.items() if value is not None})
    return fields


def _execute(
    ctx: click.Context,
    subcommand: str,
    fmt: Optional[str],
    output: Optional[str],
    no_cache: bool,
    **params: Any,
) -> None:
    """JobSpec を組み立てて実行し, レポートを出力して終了する."""
    settings = ctx.obj["config"]
    config_manager: ConfigManager = ctx.obj["manager"]

    try:
        job = JobSpec(subcommand=subcommand, format=fmt or settings.get("format", "json"), **_job_fields(settings, subcommand, params))
    except ValidationError as e:
        click.echo(f"エラー: {e}", err=True)
        sys.exit(2)

    cache = None if no_cache else config_manager.get_cache_config(settings).create_cache()
    report = JobRunner(cache).run(job)
    text = render(report, job.format)

    if report.status == "ERROR":
        click.echo(f"エラー: {report.metadata.get('error')}", err=True)

    if output:
        output_path = Path(output)
        try:
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(text)
        except OSError as e:
            click.echo(f"ファイル出力エラー: {e}", err=True)
            sys.exit(2)
        click.echo(f"レポートを出力しました: {output_path}", err=True)
    else:
        click.echo(text, nl=False)

    sys.exit(report.exit_code)


def _parsed(parser: Callable[[str], Any], text: Optional[str]) -> Any:
    if text is None:
        return None
    try:
        return parser(text)
    except ParseError as e:
        click.echo(f"エラー: {e.message}", err=True)
        sys.exit(2)


def _load_description(path: str) -> dict[str, Any]:
    try:
        data = load_json_file(path)
    except ParseError as e:
        click.echo(f"エラー: {e.message}", err=True)
        sys.exit(2)
    if isinstance(data, list):
        return {"modules": data}
    if not isinstance(data, dict):
        click.echo(f"エラー: {path} must contain a JSON object or list", err=True)
        sys.exit(2)
    return data


@cli.command()
@common_options
@series_options
@click.option("--chi", required=True, help="指標（例: 8:0,1）")
@click.option("--verify", type=int, help="照合する補間点の数（既定: 3, 最低 1 点は必ず照合）")
@click.option("--min-digits", type=int, help="照合に必要な最小桁数. 下回る点は insufficient（既定: 1）")
@click.pass_context
def lp(ctx, p, precision, truncation, fmt, output, no_cache, strategy, branch, sigma, level, chi, verify, min_digits) -> None:
    """p 進 L 級数を構成する."""
    _execute(
        ctx, "lp", fmt, output, no_cache,
        p=p, N=precision, M=truncation, character=chi, strategy=strategy, branch=branch,
        sigma=_parsed(parse_sigma, sigma), level=level, verify=verify, min_digits=min_digits,
    )


@cli.command()
@common_options
@series_options
@click.option("--chi", help="指標（省略時は自明指標の偶分枝を走査）")
@click.pass_context
def invariants(ctx, p, precision, truncation, fmt, output, no_cache, strategy, branch, sigma, level, chi) -> None:
    """μ, λ 不変量を求める."""
    _execute(
        ctx, "invariants", fmt, output, no_cache,
        p=p, N=precision, M=truncation, character=chi, strategy=strategy, branch=branch,
        sigma=_parsed(parse_sigma, sigma), level=level,
    )


@cli.command("euler-char")
@common_options
@click.option("--module", "module_path", required=True, help="加群記述 JSON ファイル")
@click.option("--n", "n_values", help="ひねり n のリスト（例: 4,-4）")
@click.option("--safety-margin", type=int, help="有限性判定の安全余裕")
@click.pass_context
def euler_char(ctx, p, precision, truncation, fmt, output, no_cache, module_path, n_values, safety_margin) -> None:
    """加群記述ファイルの各加群で Γ オイラー標数の公式を照合する."""
    _execute(
        ctx, "euler-char", fmt, output, no_cache,
        p=p, N=precision, M=truncation, n=_parsed(parse_n_list, n_values),
        safety_margin=safety_margin, module_description=_load_description(module_path),
    )


@cli.command("module-ec")
@common_options
@click.option("--seed", type=int, help="乱数シード")
@click.option("--count", type=int, help="試行回数（既定: 200）")
@click.pass_context
def module_ec(ctx, p, precision, truncation, fmt, output, no_cache, seed, count) -> None:
    """ランダムな合成加群でオイラー標数の公式を検証する."""
    _execute(ctx, "module-ec", fmt, output, no_cache, p=p, N=precision, M=truncation, seed=seed, count=count)


@cli.command()
@common_options
@series_options
@click.option("--chi", required=True, help="指標（例: 8:0,1）")
@click.option("--n", "n_values", help="ひねり n のリスト（省略時は補間点から 3 つ）")
@click.pass_context
def ktheory(ctx, p, precision, truncation, fmt, output, no_cache, strategy, branch, sigma, level, chi, n_values) -> None:
    """コホモロジー位数表と K(1) 局所ホモトピー位数表を作る."""
    _execute(
        ctx, "ktheory", fmt, output, no_cache,
        p=p, N=precision, M=truncation, character=chi, strategy=strategy, branch=branch,
        sigma=_parsed(parse_sigma, sigma), level=level, n=_parsed(parse_n_list, n_values),
    )


@cli.command()
@common_options
@click.option("--complex", "complex_path", required=True, help="完全複体記述 JSON ファイル")
@click.option("--twist", type=int, default=0, show_default=True, help="ひねり c = u^twist")
@click.option("--reading", type=click.Choice(READINGS), help="ひねりの読み方")
@click.option("--safety-margin", type=int, help="有限性判定の安全余裕")
@click.pass_context
def bockstein(ctx, p, precision, truncation, fmt, output, no_cache, complex_path, twist, reading, safety_margin) -> None:
    """ボックスタインコホモロジーとオイラー標数を計算する."""
    _execute(
        ctx, "bockstein", fmt, output, no_cache,
        p=p, N=precision, M=truncation, twist=twist, reading=reading,
        safety_margin=safety_margin, complex_description=_load_description(complex_path),
    )


@cli.command()
@common_options
@click.option("--seed", type=int, help="乱数シード")
@click.option("--count", type=int, help="各スイートの試行回数")
@click.pass_context
def selftest(ctx, p, precision, truncation, fmt, output, no_cache, seed, count) -> None:
    """全ての不変条件スイートを実行する."""
    _execute(ctx, "selftest", fmt, output, no_cache, p=p, N=precision, M=truncation, seed=seed, count=count)


if __name__ == "__main__":
    cli()
