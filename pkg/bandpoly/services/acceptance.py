"""
验收套件 - 按模块分组的全部检查，供 verify 命令使用
"""
import cmath
import logging
import math
import tempfile
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from bandpoly.core.exceptions import ConfigValidationError
from bandpoly.models.harmonics import HermitianPair
from bandpoly.schemas.experiment import CheckReport, ExperimentConfig, RunRecord
from bandpoly.services.band_model import band_model
from bandpoly.services.crossover_model import crossover_model
from bandpoly.services.experiment_runner import CHECK_HEADER, check_rows, config_echo, experiment_runner
from bandpoly.services.gaussian_spectral import gaussian_spectral
from bandpoly.services.mc_lab import mc_lab
from bandpoly.services.saddle_core import saddle_core
from bandpoly.services.unitary_harmonics import unitary_harmonics

logger = logging.getLogger(__name__)

MODULES = ("band-model", "mc-lab", "saddle-core", "gaussian-spectral", "unitary-harmonics", "crossover-model",
           "cli-experiments")

PAULI = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}

# 桌面规模交叉扫描参数
DESK_SCAN = {"n": 64, "z": 0.5, "zeta": 0.8, "samples": 20_000, "w_grid": [3.0, 6.0, 12.0, 24.0, 48.0]}


def _check(name: str, module: str, computed, reference, tolerance, passed: bool, **parameters) -> CheckReport:
    return CheckReport(name=name, module=module, parameters=parameters, computed=computed,
                       reference=reference, tolerance=tolerance, passed=bool(passed))


def z_pairs(w: float) -> Dict[str, HermitianPair]:
    """𝒵 展开检查用的无迹厄米对, 含非对易对"""
    s1, s2, s3 = PAULI[1], PAULI[2], PAULI[3]
    r4 = 0.4 * s1 + 0.2 * s3
    r5 = 0.5 * s1
    return {
        "zero": HermitianPair.zero(),
        "diagonal": HermitianPair(r1=np.diag([0.6, -0.6]), r2=np.diag([0.6, -0.6]) - 0.8 * s3 / math.sqrt(w)),
        "equal": HermitianPair(r1=0.5 * s3, r2=0.5 * s3),
        "mixed": HermitianPair(r1=r4, r2=r4 + 0.5 * s2 / math.sqrt(w)),
        "noncommuting": HermitianPair(r1=r5, r2=r5 + s2 / math.sqrt(w)),
    }


class AcceptanceSuite:
    """验收检查集合"""

    def __init__(self):
        self._scan_cache: Dict[Tuple[int, int], RunRecord] = {}

    # ---------- band-model ----------

    def check_profile(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        checks = []
        worst_row, worst_sym = 0.0, 0.0
        for n in (1, 16, 256):
            for w in (1.0, 8.0, 32.0):
                profile = band_model.build_profile(n, w)
                worst_row = max(worst_row, profile.row_sum_error)
                worst_sym = max(worst_sym, profile.symmetry_error)
        checks.append(_check("profile_row_sums", "band-model", worst_row, 0.0, 1e-12, worst_row <= 1e-12))
        checks.append(_check("profile_symmetry", "band-model", worst_sym, 0.0, 1e-13, worst_sym <= 1e-13))
        j = band_model.build_profile(2, 1.0).j
        dev = float(np.max(np.abs(j - np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0)))
        checks.append(_check("profile_n2_w1", "band-model", dev, 0.0, 1e-14, dev <= 1e-14, n=2, w=1.0))
        return checks

    # ---------- mc-lab ----------

    def check_mc_ratio(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        checks = []
        flat = mc_lab.spectral_point(0.5 + 0j, 0j, 8, 2.0)
        est = mc_lab.estimate_ratios(flat, 200, seed, 1)
        dev = max(abs(est["gin"].estimate - 1.0), abs(est["loc"].estimate - 1.0))
        checks.append(_check("mc_zero_offset", "mc-lab", dev, 0.0, 1e-12, dev <= 1e-12, n=8, w=2.0))

        point = mc_lab.spectral_point(0.5 + 0j, 0.8 + 0j, 16, 4.0)
        runs = [mc_lab.estimate_ratios(point, 1000, seed, count) for count in (1, 2)]
        gin = runs[0]["gin"].estimate
        checks.append(_check("mc_gin_bounded", "mc-lab", gin, 1.0, 0.0, gin <= 1.0, n=16, w=4.0))
        same = all(runs[0][key].estimate == runs[1][key].estimate for key in ("gin", "loc"))
        checks.append(_check("mc_worker_independence", "mc-lab", same, True, None, same, workers=[1, 2]))
        return checks

    # ---------- saddle-core ----------

    def check_theta_n1(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x7E7A])))
        checks = []
        for i in range(5):
            z = cmath.rect(0.6 * math.sqrt(rng.uniform()), rng.uniform(-math.pi, math.pi))
            zeta = cmath.rect(0.3 * math.sqrt(rng.uniform()), rng.uniform(-math.pi, math.pi))
            point = mc_lab.spectral_point(z, zeta, 1, 1.0)
            res = saddle_core.theta_n1_check(point, 1_000_000, seed + i, workers)
            params = {"z1": str(point.z1), "z2": str(point.z2)}
            mc_gap = abs(res["mc"] - res["wick"])
            checks.append(_check(f"theta_n1_mc_{i}", "saddle-core", res["mc"], res["wick"], 4.0 * res["mc_stderr"],
                                 mc_gap <= 4.0 * res["mc_stderr"], **params))
            rel = abs(res["quadrature"] - res["wick"]) / res["wick"]
            checks.append(_check(f"theta_n1_quadrature_{i}", "saddle-core", res["quadrature"], res["wick"], 1e-3,
                                 rel <= 1e-3, **params))
        return checks

    # ---------- gaussian-spectral ----------

    def check_gauss_spectrum(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        worst_rel, worst_top, worst_id = 0.0, 0.0, 0.0
        for w in (5.0, 10.0, 20.0, 40.0):
            for u in (0.5, 0.8, 1.0):
                k = gaussian_spectral.gauss_kernel(w, u)
                vals, _ = gaussian_spectral.nystrom_eigs(k, gaussian_spectral.default_grid(k, 400), 9)
                exact = gaussian_spectral.mehler_eigs(k, 8)
                worst_rel = max(worst_rel, float(np.max(np.abs(vals - exact) / exact)))
                worst_top = max(worst_top, abs(float(vals[0]) - 1.0))
                worst_id = max(worst_id, gaussian_spectral.mehler_identity_residual(w, u))
        return [
            _check("nystrom_vs_mehler", "gaussian-spectral", worst_rel, 0.0, 1e-8, worst_rel <= 1e-8, m_max=8),
            _check("top_eigenvalue", "gaussian-spectral", worst_top, 0.0, 1e-8, worst_top <= 1e-8),
            _check("mehler_identity", "gaussian-spectral", worst_id, 0.0, 1e-14, worst_id <= 1e-14),
        ]

    # ---------- unitary-harmonics ----------

    def check_heat(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        checks = []
        ws = (20.0, 40.0, 80.0)
        ells = [1, 2, 3, 4]
        devs = {}
        for w in ws:
            eig = unitary_harmonics.heat_eigs(ells, w, 1.0)
            devs[w] = {ell: abs(eig[ell] - unitary_harmonics.heat_closed_form(ell, w, 1.0, coefficient=0.5))
                       for ell in ells}
        worst = min(devs[a][ell] / devs[b][ell] for a, b in zip(ws[:-1], ws[1:]) for ell in ells)
        checks.append(_check("heat_doubling_factor", "unitary-harmonics", worst, 8.0, 0.0, worst >= 8.0,
                             w=list(ws), ells=ells))
        checks.append(_check("heat_w80_ell1", "unitary-harmonics", devs[80.0][1], 0.0, 1e-6,
                             devs[80.0][1] <= 1e-6))
        return checks

    def check_z_expansion(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        ws = np.array([20.0, 40.0, 80.0])
        checks = []
        for name in z_pairs(ws[0]):
            remainders = []
            for w in ws:
                res = unitary_harmonics.z_expansion_check(z_pairs(w)[name], w, 1.0)
                remainders.append(abs(res["remainder"]))
            remainders = np.array(remainders)
            constant = float(np.max(remainders * ws ** 2))
            exponent = float(-np.polyfit(np.log(ws), np.log(remainders), 1)[0])
            checks.append(_check(f"z_expansion_{name}", "unitary-harmonics", exponent, 1.9, constant,
                                 exponent >= 1.9, constant=constant, remainders=remainders.tolist()))
        return checks

    def check_berezin_and_legendre(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        checks = experiment_runner.group_integral_checks(2.0, 1_000_000, seed)
        return [c for c in checks if c.name.startswith(("berezin", "legendre", "schur"))]

    # ---------- crossover-model ----------

    def check_effective_limits(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        n = 1_000_000
        checks = []
        kappa = crossover_model.config.damping_coefficient
        for zeta_abs in (0.5, 0.8, 1.0):
            w_gin = math.sqrt(1e4 * n)
            point = mc_lab.spectral_point(0j, complex(zeta_abs), n, w_gin)
            gin = crossover_model.predict_ratios(n, w_gin, point)["gin_pred"]
            limit = crossover_model.ginibre_limit(complex(zeta_abs))
            rel = abs(gin - limit) / limit
            checks.append(_check(f"ginibre_limit_{zeta_abs}", "crossover-model", gin, limit, 1e-3, rel <= 1e-3,
                                 n=n, w2_over_n=1e4))

            w_loc = math.sqrt(1e-3 * n)
            point = mc_lab.spectral_point(0j, complex(zeta_abs), n, w_loc)
            loc = crossover_model.predict_ratios(n, w_loc, point)["loc_pred"]
            tol = 1e-3 if zeta_abs <= 0.8 else 2e-3
            leading = 2.0 * zeta_abs ** 4 / (3.0 * kappa) * 1e-3
            passed = abs(loc - 1.0) <= tol
            if zeta_abs > 0.8:
                passed = passed and abs((loc - 1.0) - leading) <= 0.2 * leading
            checks.append(_check(f"localized_limit_{zeta_abs}", "crossover-model", loc, 1.0, tol, passed,
                                 n=n, w2_over_n=1e-3, leading_order=leading))

            semi = crossover_model.semigroup_power(n, zeta_abs)
            ref = crossover_model.semigroup_limit(zeta_abs)
            checks.append(_check(f"semigroup_{zeta_abs}", "crossover-model", semi, ref, 1e-4,
                                 abs(semi - ref) <= 1e-4, n=n))
        return checks

    # ---------- cli-experiments ----------

    def desk_scan(self, seed: int, workers: Optional[int]) -> RunRecord:
        key = (seed, workers)
        if key not in self._scan_cache:
            cfg = ExperimentConfig(command="crossover-scan", seed=seed, workers=workers, **DESK_SCAN)
            self._scan_cache[key] = experiment_runner.run_crossover_scan(cfg)
        return self._scan_cache[key]

    def check_desk_crossover(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        record = self.desk_scan(seed, workers or 8)
        if record.failed:
            return [_check("desk_scan", "cli-experiments", None, None, None, False,
                           rows=[r[-1] for r in record.rows])]
        rows = {r[0]: dict(zip(record.header, r)) for r in record.rows}
        checks = []
        gin_max = max(r["gin_mc"] for r in rows.values())
        checks.append(_check("desk_gin_bounded", "cli-experiments", gin_max, 1.0, 0.0, gin_max <= 1.0))

        lo, hi = rows[3.0], rows[48.0]
        rise = hi["gin_mc"] - lo["gin_mc"]
        sigma = math.hypot(hi["gin_stderr"], lo["gin_stderr"])
        checks.append(_check("desk_gin_rise", "cli-experiments", rise, 0.04, 3.0 * sigma,
                             rise > 0.04 and rise > 3.0 * sigma))

        for w, r in rows.items():
            gin_tol = max(3.0 * r["gin_stderr"], 0.05)
            loc_tol = max(3.0 * r["loc_stderr"], 0.07)
            checks.append(_check(f"desk_gin_vs_model_w{w:g}", "cli-experiments", r["gin_mc"], r["gin_pred"], gin_tol,
                                 abs(r["gin_mc"] - r["gin_pred"]) <= gin_tol, w=w))
            checks.append(_check(f"desk_loc_vs_model_w{w:g}", "cli-experiments", r["loc_mc"], r["loc_pred"], loc_tol,
                                 abs(r["loc_mc"] - r["loc_pred"]) <= loc_tol, w=w))
        loc_tol = max(3.0 * lo["loc_stderr"], 0.05)
        checks.append(_check("desk_localized_w3", "cli-experiments", lo["loc_mc"], 1.0, loc_tol,
                             abs(lo["loc_mc"] - 1.0) <= loc_tol))
        return checks

    def check_determinism(self, seed: int, workers: Optional[int]) -> List[CheckReport]:
        from bandpoly.cli.writers import write_csv

        with tempfile.TemporaryDirectory() as tmp:
            blobs = []
            for count in (1, 8):
                record = self.desk_scan(seed, count)
                path = write_csv(Path(tmp) / f"scan_{count}.csv", record.header, record.rows, record.config)
                blobs.append(path.read_bytes())
        same = blobs[0] == blobs[1]
        return [_check("worker_count_determinism", "cli-experiments", same, True, None, same, workers=[1, 8])]

    # ---------- 调度 ----------

    def criteria(self) -> List[tuple]:
        return [
            ("band-model", self.check_profile),
            ("mc-lab", self.check_mc_ratio),
            ("saddle-core", self.check_theta_n1),
            ("gaussian-spectral", self.check_gauss_spectrum),
            ("unitary-harmonics", self.check_heat),
            ("unitary-harmonics", self.check_z_expansion),
            ("unitary-harmonics", self.check_berezin_and_legendre),
            ("crossover-model", self.check_effective_limits),
            ("cli-experiments", self.check_desk_crossover),
            ("cli-experiments", self.check_determinism),
        ]

    def run_checks(self, seed: int, workers: Optional[int] = None,
                   module_filter: Optional[str] = None) -> List[CheckReport]:
        selected = [m.strip() for m in module_filter.split(",")] if module_filter else list(MODULES)
        unknown = [m for m in selected if m not in MODULES]
        if unknown:
            raise ConfigValidationError("filter", f"未知模块 {unknown}, 可选 {list(MODULES)}")

        reports: List[CheckReport] = []
        for module, fn in self.criteria():
            if module not in selected:
                continue
            started = time.perf_counter()
            try:
                reports.extend(fn(seed, workers))
            except Exception as e:
                logger.error(f"检查 {fn.__name__} 失败: {e}")
                reports.append(CheckReport(name=fn.__name__, module=module, passed=False, error=str(e)))
            logger.info(f"检查 {fn.__name__} 完成, 用时 {time.perf_counter() - started:.1f}s")
        return reports

    def run(self, cfg: ExperimentConfig) -> RunRecord:
        started = time.perf_counter()
        self._scan_cache.clear()
        reports = self.run_checks(cfg.seed, cfg.workers, cfg.filter)
        failed = [r.name for r in reports if not r.passed]
        if failed:
            logger.warning(f"未通过的检查: {failed}")
        return RunRecord(
            schema_version=experiment_runner.schema_version,
            command=cfg.command,
            config=config_echo(cfg),
            seed=cfg.seed,
            header=CHECK_HEADER,
            rows=check_rows(reports),
            results={"checks": [r.model_dump(by_alias=True) for r in reports], "passed": not failed},
            wall_time_s=time.perf_counter() - started,
            failed=bool(failed),
        )


# 全局实例
acceptance_suite = AcceptanceSuite()
