"""ジョブの実行とレポート生成."""

import logging
from typing import Any, Callable, Optional

from .. import __version__
from .bockstein import bockstein_cohomology, bockstein_euler_char, determinant_comparison
from .cache import ResultCache, cache_get_or_compute, make_cache_key
from .characters import DirichletCharacter
from .exceptions import IwasawaError, ParseError
from .lfunctions import (
    BranchSeries,
    branch_scan,
    build_kl_series,
    interpolation_points,
    verify_interpolation,
)
from .models import JobSpec, Report, combine_statuses
from .modules import characteristic_element, gamma_cohomology_orders
from .padic import cyclotomic_u, make_coeff_ring
from .parsing import complex_from_json, format_csv, modules_from_json
from .power_series import evaluate_at, weierstrass_prep
from .properties import SUITES, formula3_suite, run_suite
from .spectra import cohomology_table, fib_orders, poitou_tate_consistency

logger = logging.getLogger(__name__)

KTHEORY_COLUMNS = ["n", "degree", "group-label", "order-exponent"]
MODULE_EC_COLUMNS = ["index", "n", "mu", "lambda", "valuation", "h0", "h1"]
MIN_VERIFY_POINTS = 1

Payload = dict[str, Any]


class JobRunner:
    """JobSpec をサブコマンドごとの処理に振り分ける."""

    def __init__(self, cache: Optional[ResultCache] = None):
        """初期化.

        Args:
            cache: 結果キャッシュ（None ならキャッシュしない）

        """
        self.cache = cache
        self._handlers: dict[str, Callable[[JobSpec], Payload]] = {
            "lp": self._run_lp,
            "invariants": self._run_invariants,
            "euler-char": self._run_euler_char,
            "module-ec": self._run_module_ec,
            "ktheory": self._run_ktheory,
            "bockstein": self._run_bockstein,
            "selftest": self._run_selftest,
        }

    def run(self, job: JobSpec) -> Report:
        """ジョブを実行してレポートを返す. 計算エラーは ERROR レポートになる."""
        logger.info(f"Running {job.subcommand} for p={job.p}")
        handler = self._handlers[job.subcommand]
        try:
            payload = cache_get_or_compute(self.cache, make_cache_key(job), lambda: handler(job))
        except (IwasawaError, ParseError) as e:
            logger.error(f"{job.subcommand} failed: {e.message}")
            return Report(
                status="ERROR",
                job=job,
                metadata={"version": __version__, "error": e.message, "error_type": type(e).__name__},
            )
        metadata = {"version": __version__, **payload.get("metadata", {})}
        return Report(status=payload["status"], job=job, results=payload["results"], metadata=metadata)

    # --- L 級数 ---

    def _series(self, job: JobSpec) -> BranchSeries:
        if job.character is None:
            raise ParseError("a character is required (e.g. --chi 8:0,1)")
        psi = DirichletCharacter.from_notation(job.character)
        return build_kl_series(psi, job.p, job.N, job.M, job.strategy, job.branch, job.sigma, job.level)

    def _run_lp(self, job: JobSpec) -> Payload:
        series = self._series(job)
        # 照合記録のない級数は返さない
        entries = verify_interpolation(series, max(job.verify, MIN_VERIFY_POINTS), job.min_digits)
        series = series.with_verification(entries)
        results = [{"kind": "series", **series.to_record()}]
        results.extend({"kind": "verification", **e.to_json()} for e in entries)
        statuses = {e.status for e in entries}
        status = "FAIL" if "mismatch" in statuses else "PARTIAL" if "insufficient" in statuses else "PASS"
        metadata = {"strategy": series.strategy, "euler_factors_removed": list(series.sigma)}
        return {"status": status, "results": results, "metadata": metadata}

    def _run_invariants(self, job: JobSpec) -> Payload:
        if job.character is None:
            strategy = "interpolation" if job.strategy == "auto" else job.strategy
            entries = branch_scan(job.p, job.N, job.M, strategy, job.level)
            results = [{"kind": "branch", **e.to_json()} for e in entries]
            return {"status": "PASS", "results": results, "metadata": {"scan": "trivial character, even branches"}}
        series = self._series(job)
        data = weierstrass_prep(series.series)
        result = {
            "kind": "invariants",
            "character": series.character.notation,
            "branch": series.branch,
            "mu": data.mu,
            "lambda": data.lambda_,
            "distinguished": [c.digits() for c in data.distinguished.coeffs[: data.lambda_ + 1]],
        }
        return {"status": "PASS", "results": [result], "metadata": {"strategy": series.strategy}}

    # --- 加群 ---

    def _run_euler_char(self, job: JobSpec) -> Payload:
        if job.module_description is None:
            raise ParseError("a module description file is required (--module)")
        ring = make_coeff_ring(job.p, 1, job.N)
        modules = modules_from_json(job.module_description, ring, job.M)
        results, statuses = [], []
        u = cyclotomic_u(ring)
        for index, module in enumerate(modules):
            for n in job.n or [0]:
                h0, h1 = gamma_cohomology_orders(module, n, job.safety_margin)
                value = evaluate_at(characteristic_element(module), u**n - 1).valuation()
                entry = {"kind": "euler-char", "module": index, "n": n, "h0": h0.to_json(), "h1": h1.to_json()}
                if not (h0.is_finite and h1.is_finite):
                    status = "PARTIAL" if value is None else "FAIL"
                    entry["valuation"] = "infinite" if value is None else value
                elif value is None:
                    status = "PARTIAL"
                    entry["valuation"] = "insufficient"
                else:
                    status = "PASS" if value * ring.d == h1.exponent - h0.exponent else "FAIL"
                    entry["valuation"] = value
                entry["check"] = f"v(ch(u^n-1)) = v(h1) - v(h0): {'OK' if status == 'PASS' else status}"
                entry["status"] = status
                statuses.append(status)
                results.append(entry)
        return {"status": combine_statuses(statuses), "results": results}

    def _run_module_ec(self, job: JobSpec) -> Payload:
        seed = 1 if job.seed is None else job.seed
        suite = formula3_suite(job.p, seed, job.count or 200, job.N)
        rows = [{"kind": "instance", **row} for row in suite.rows]
        return {"status": suite.status, "results": [{"kind": "suite", **suite.to_json()}, *rows], "metadata": {"seed": seed}}

    # --- K 理論 ---

    def _run_ktheory(self, job: JobSpec) -> Payload:
        series = self._series(job)
        ns = job.n or interpolation_points(job.p, series.branch, 3 + (1 if series.branch else 0))[-3:]
        results, statuses = [], []
        for n in ns:
            table = cohomology_table(series, n)
            homotopy = fib_orders(table)
            report = poitou_tate_consistency(table, homotopy)
            statuses.append(report.status)
            results.append({"kind": "cohomology", **table.to_json()})
            results.extend({"kind": "homotopy", "n": n, **row} for row in homotopy.rows())
            results.append({"kind": "consistency", "n": n, **report.to_json()})
        notes = ["H1 orders are read off the L-value norm; the psi-eigenspace reading is used for nontrivial psi"]
        return {"status": combine_statuses(statuses), "results": results, "metadata": {"notes": notes}}

    # --- ボックスタイン ---

    def _run_bockstein(self, job: JobSpec) -> Payload:
        if job.complex_description is None:
            raise ParseError("a complex description file is required (--complex)")
        ring = make_coeff_ring(job.p, 1, job.N)
        complex_ = complex_from_json(job.complex_description, ring, job.M)
        c = cyclotomic_u(ring) ** job.twist
        result = bockstein_cohomology(complex_, c, job.reading, job.safety_margin)
        results: list[Payload] = [{"kind": "bockstein", **result.to_json()}]
        status = "PARTIAL"
        if result.semisimple:
            euler = bockstein_euler_char(complex_, c, job.reading)
            results.append({"kind": "euler", **euler.to_json()})
            status = "FAIL" if euler.agrees is False else "PASS"
        else:
            comparison = determinant_comparison(complex_, result.c)
            results.append({"kind": "euler", "semisimple": False, "vanishing_order": comparison[0] if comparison else None})
        return {"status": status, "results": results, "metadata": {"twist": job.twist, "reading": job.reading}}

    # --- selftest ---

    def _run_selftest(self, job: JobSpec) -> Payload:
        seed = 1 if job.seed is None else job.seed
        names = [name for name in SUITES if name != "irregular" or job.p == 37]
        suites = [run_suite(name, job.p, seed, job.count) for name in names]
        results = [{"kind": "suite", **suite.to_json()} for suite in suites]
        return {"status": combine_statuses([s.status for s in suites]), "results": results, "metadata": {"seed": seed}}


def render(report: Report, fmt: str) -> str:
    """json / csv / human 形式の文字列にする. human と csv は JSON の射影."""
    if fmt == "json":
        return report.to_json() + "\n"
    data = report.model_dump(mode="json")
    if fmt == "csv":
        if report.job.subcommand == "ktheory":
            return format_csv((r for r in data["results"] if r["kind"] == "homotopy"), KTHEORY_COLUMNS)
        if report.job.subcommand == "module-ec":
            return format_csv((r for r in data["results"] if r["kind"] == "instance"), MODULE_EC_COLUMNS)
        columns = sorted({k for r in data["results"] for k, v in r.items() if not isinstance(v, (list, dict))})
        return format_csv(data["results"], columns)
    lines = [f"status: {report.status}"]
    for entry in data["results"]:
        fields = " ".join(f"{k}={v}" for k, v in sorted(entry.items()) if not isinstance(v, (list, dict)))
        lines.append(fields)
    if "error" in data["metadata"]:
        lines.append(f"error: {data['metadata']['error']}")
    return "\n".join(lines) + "\n"
