"""
实验编排服务 - 按命令组合各模块，产出 RunRecord
"""
import logging
import math
import time
from typing import Any, Dict, List, Optional

import numpy as np

from bandpoly.core.settings import resolve_workers
from bandpoly.core.toml_config import toml_config
from bandpoly.models.harmonics import HermitianPair
from bandpoly.schemas.experiment import CheckReport, ExperimentConfig, RunRecord
from bandpoly.services.band_model import band_model
from bandpoly.services.crossover_model import crossover_model
from bandpoly.services.gaussian_spectral import gaussian_spectral
from bandpoly.services.mc_lab import mc_lab
from bandpoly.services.unitary_harmonics import unitary_harmonics

logger = logging.getLogger(__name__)

SCAN_HEADER = ["w", "gin_mc", "gin_stderr", "loc_mc", "loc_stderr", "gin_pred", "loc_pred", "gin_limit", "status"]
PREDICTION_HEADER = ["n", "w", "w2_over_n", "zeta_abs", "gin_pred", "loc_pred", "gin_limit", "loc_limit",
                     "truncation_bound"]
CHECK_HEADER = ["name", "module", "computed", "reference", "tolerance", "pass"]

# 双酉积分默认参数组 (W=2 时 W²μμ' ≤ 5)
BEREZIN_SETS = [
    ((1.0, 0.4), (1.1, 0.3), (0.9, 0.5), (1.2, 0.2)),
    ((0.8, 0.2), (1.0, 0.5), (1.0, 0.3), (0.7, 0.4)),
    ((1.1, 0.6), (0.9, 0.1), (0.6, 0.3), (1.0, 0.7)),
]
BRACKET_W = 20.0


def config_echo(cfg: ExperimentConfig) -> Dict[str, Any]:
    echo = cfg.model_dump()
    for key in ("z", "zeta"):
        echo[key] = {"re": float(echo[key].real), "im": float(echo[key].imag)}
    return echo


def check_rows(checks: List[CheckReport]) -> List[List[Any]]:
    return [[c.name, c.module, _scalar(c.computed), _scalar(c.reference), _scalar(c.tolerance), c.passed]
            for c in checks]


def _scalar(value: Any) -> Any:
    if isinstance(value, (dict, list, tuple)):
        return str(value)
    return value


class ExperimentRunner:
    """命令编排"""

    def __init__(self):
        self.schema_version = toml_config.output.schema_version

    def _record(self, cfg: ExperimentConfig, started: float, **kwargs) -> RunRecord:
        return RunRecord(
            schema_version=self.schema_version,
            command=cfg.command,
            config=config_echo(cfg),
            seed=cfg.seed,
            wall_time_s=time.perf_counter() - started,
            **kwargs,
        )

    def run_profile(self, cfg: ExperimentConfig) -> RunRecord:
        """带状方差矩阵导出 (j, k, J_jk), k−j ≤ 5w"""
        started = time.perf_counter()
        profile = band_model.build_profile(cfg.n, cfg.w)
        rows = [list(r) for r in band_model.profile_rows(profile)]
        results = {"n": profile.n, "w": profile.w, "row_sum_error": profile.row_sum_error,
                   "symmetry_error": profile.symmetry_error}
        return self._record(cfg, started, header=["j", "k", "J"], rows=rows, results=results,
                            metadata={"n": profile.n, "w": profile.w, "row_sum_error": profile.row_sum_error})

    def run_mc_ratio(self, cfg: ExperimentConfig) -> RunRecord:
        started = time.perf_counter()
        point = mc_lab.spectral_point(cfg.z, cfg.zeta, cfg.n, cfg.w)
        est = mc_lab.estimate_ratios(point, cfg.samples, cfg.seed, cfg.workers)
        gin, loc = est["gin"], est["loc"]
        results = {
            "n": cfg.n,
            "w": cfg.w,
            "z": cfg.z,
            "zeta": cfg.zeta,
            "samples": cfg.samples,
            "gin": gin.estimate,
            "gin_stderr": gin.stderr,
            "gin_ci": [gin.ci_low, gin.ci_high],
            "loc": loc.estimate,
            "loc_stderr": loc.stderr,
            "loc_ci": [loc.ci_low, loc.ci_high],
            "singular_count": gin.singular_count,
            "seed": cfg.seed,
        }
        header = ["n", "w", "samples", "gin", "gin_stderr", "loc", "loc_stderr", "singular_count", "seed"]
        row = [cfg.n, cfg.w, cfg.samples, gin.estimate, gin.stderr, loc.estimate, loc.stderr,
               gin.singular_count, cfg.seed]
        return self._record(cfg, started, header=header, rows=[row], results=results)

    def run_crossover_scan(self, cfg: ExperimentConfig) -> RunRecord:
        """逐个带宽: 蒙特卡洛估计 + 有效模型预测; 单点失败记录后继续"""
        started = time.perf_counter()
        grid = list(cfg.w_grid or [])
        workers = resolve_workers(cfg.workers)
        base = mc_lab.spectral_point(cfg.z, cfg.zeta, cfg.n, grid[0])
        predictions = crossover_model.prediction_scan(cfg.n, grid, base, cfg.m0)
        gin_limit = crossover_model.ginibre_limit(cfg.zeta)

        rows, failed = [], False
        for w, pred in zip(grid, predictions):
            try:
                if pred.get("status") == "error":
                    raise RuntimeError(pred["error"])
                point = mc_lab.spectral_point(cfg.z, cfg.zeta, cfg.n, w)
                est = mc_lab.estimate_ratios(point, cfg.samples, cfg.seed, workers)
                rows.append([float(w), est["gin"].estimate, est["gin"].stderr, est["loc"].estimate,
                             est["loc"].stderr, pred["gin_pred"], pred["loc_pred"], gin_limit, "ok"])
                logger.info(f"扫描点完成: w={w}")
            except Exception as e:
                logger.error(f"扫描点失败 w={w}: {e}")
                failed = True
                rows.append([float(w), math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, gin_limit,
                             f"error: {e}"])

        pred_rows = [[p.get(k) for k in PREDICTION_HEADER] for p in predictions]
        return self._record(
            cfg, started, header=SCAN_HEADER, rows=rows, failed=failed,
            results={"workers": workers},
            extra_tables={"predictions": {"header": PREDICTION_HEADER, "rows": pred_rows}},
        )

    def run_spectra(self, cfg: ExperimentConfig) -> RunRecord:
        """高斯核谱报告与热核本征值 (ℓ ≤ 4)"""
        started = time.perf_counter()
        u_star = math.sqrt(1.0 - abs(cfg.z) ** 2)
        report = gaussian_spectral.spectral_report(cfg.w, u_star)
        exact = gaussian_spectral.mehler_eigs(gaussian_spectral.gauss_kernel(cfg.w, u_star), len(report["eigenvalues"]) - 1)
        rows = [[m, v, float(e), err]
                for m, (v, e, err) in enumerate(zip(report["eigenvalues"], exact, report["mehler_error"]))]

        ells = [ell for ell in range(5) if ell <= cfg.w]
        heat = unitary_harmonics.heat_eigs(ells, cfg.w, u_star)
        heat_rows = [[ell, heat[ell],
                      unitary_harmonics.heat_closed_form(ell, cfg.w, u_star, coefficient=0.5),
                      unitary_harmonics.heat_closed_form(ell, cfg.w, u_star, coefficient=0.125)]
                     for ell in ells]
        report["heat"] = {str(r[0]): {"computed": r[1], "rate_half": r[2], "rate_eighth": r[3]} for r in heat_rows}
        return self._record(
            cfg, started, header=["m", "nystrom", "mehler", "relative_error"], rows=rows, results=report,
            extra_tables={"heat": {"header": ["ell", "heat_eig", "closed_half", "closed_eighth"], "rows": heat_rows}},
        )

    def group_integral_checks(self, w: float, samples: int, seed: int) -> List[CheckReport]:
        checks: List[CheckReport] = []
        for i, (sv1, sv2, sv1p, sv2p) in enumerate(BEREZIN_SETS):
            params = {"sv1": sv1, "sv2": sv2, "sv1p": sv1p, "sv2p": sv2p, "w": w, "samples": samples}
            try:
                res = unitary_harmonics.berezin_check(sv1, sv2, sv1p, sv2p, w, samples, seed + i)
                tol = 3.0 * res["group_stderr"]
                checks.append(CheckReport(name=f"berezin_{i}", module="unitary-harmonics", parameters=params,
                                          computed=res["group_ratio"], reference=res["bessel_ratio"], tolerance=tol,
                                          passed=abs(res["group_ratio"] - res["bessel_ratio"]) <= tol))
            except Exception as e:
                logger.error(f"双酉积分检查失败: {e}")
                checks.append(CheckReport(name=f"berezin_{i}", module="unitary-harmonics", parameters=params,
                                          passed=False, error=str(e)))

        moments = unitary_harmonics.bracket_moments(HermitianPair.zero(), BRACKET_W, 1.0)
        c = 4.0 * BRACKET_W ** 2
        for name, item in moments.items():
            tol = 10.0 / c * abs(item["reference"]) if item["reference"] else 1e-10
            checks.append(CheckReport(name=f"bracket_{name}", module="unitary-harmonics",
                                      parameters={"w": BRACKET_W, "u_star": 1.0},
                                      computed=item["computed"], reference=item["reference"], tolerance=tol,
                                      passed=abs(item["computed"] - item["reference"]) <= tol))

        worst = 0.0
        for l1 in range(7):
            for l2 in range(7):
                ref = 1.0 / (2 * l1 + 1) if l1 == l2 else 0.0
                worst = max(worst, abs(unitary_harmonics.schur_overlap(l1, l2) - ref))
        checks.append(CheckReport(name="schur_orthogonality", module="unitary-harmonics",
                                  parameters={"ell_max": 6}, computed=worst, reference=0.0, tolerance=1e-8,
                                  passed=worst <= 1e-8))

        asym = unitary_harmonics.legendre_asymptotics()
        checks.append(CheckReport(name="legendre_zonal_kappa", module="unitary-harmonics",
                                  parameters={"ell_max": 64, "bound": 0.1}, computed=asym["kappa"],
                                  reference=5.0, tolerance=0.0, passed=asym["kappa"] <= 5.0))
        checks.append(CheckReport(name="legendre_ell1_exact", module="unitary-harmonics",
                                  parameters={"ell": 1}, computed=asym["ell1_error"], reference=0.0,
                                  tolerance=1e-12, passed=asym["ell1_error"] <= 1e-12))
        checks.append(CheckReport(name="legendre_offdiag_leading", module="unitary-harmonics",
                                  parameters={"ell_max": 64, "bound": 0.1},
                                  computed=asym["offdiag_tolerance_ratio"], reference=1.0, tolerance=0.0,
                                  passed=asym["offdiag_tolerance_ratio"] <= 1.0))
        return checks

    def run_group_integrals(self, cfg: ExperimentConfig) -> RunRecord:
        started = time.perf_counter()
        checks = self.group_integral_checks(cfg.w, cfg.samples, cfg.seed)
        return self._record(cfg, started, header=CHECK_HEADER, rows=check_rows(checks),
                            results={"checks": [c.model_dump(by_alias=True) for c in checks]},
                            failed=not all(c.passed for c in checks))

    def run(self, cfg: ExperimentConfig) -> RunRecord:
        handlers = {
            "profile": self.run_profile,
            "mc-ratio": self.run_mc_ratio,
            "crossover-scan": self.run_crossover_scan,
            "spectra": self.run_spectra,
            "group-integrals": self.run_group_integrals,
        }
        if cfg.command == "verify":
            from bandpoly.services.acceptance import acceptance_suite

            return acceptance_suite.run(cfg)
        logger.info(f"运行命令: {cfg.command}")
        return handlers[cfg.command](cfg)


# 全局实例
experiment_runner = ExperimentRunner()
