"""
U(2) 调和分析服务 - Haar 采样、Euler 角求积、Wigner 函数、括号平均与 𝒵 展开
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, i0, i0e

from bandpoly.core.exceptions import ConfigValidationError, QuadratureError
from bandpoly.core.toml_config import toml_config
from bandpoly.models.harmonics import EulerAngles, HermitianPair

logger = logging.getLogger(__name__)

# Euler 角坐标下 sinθ dθ dσ dδ dγ 的总质量
EULER_MASS = 8.0 * math.pi ** 3

Integrand = Callable[..., np.ndarray]


def euler_compose_grid(theta, sigma, delta, gamma) -> np.ndarray:
    """按 Euler 角批量合成 U, 形状 (..., 2, 2)"""
    theta, sigma, delta, gamma = np.broadcast_arrays(theta, sigma, delta, gamma)
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    phase = np.exp(1j * gamma)
    u = np.empty(theta.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = phase * c * np.exp(1j * sigma)
    u[..., 0, 1] = phase * 1j * s * np.exp(1j * delta)
    u[..., 1, 0] = phase * 1j * s * np.exp(-1j * delta)
    u[..., 1, 1] = phase * c * np.exp(-1j * sigma)
    return u


def haar_batch(rng: np.random.Generator, count: int) -> np.ndarray:
    """QR 正交化复高斯矩阵, R 对角相位归一"""
    z = (rng.standard_normal((count, 2, 2)) + 1j * rng.standard_normal((count, 2, 2))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    ph = diag / np.abs(diag)
    return q * ph[:, None, :]


def _mu(ell: int, m: np.ndarray, k: int) -> np.ndarray:
    return np.exp(0.5 * (gammaln(ell - m + 1) + gammaln(ell + m + 1)
                         - gammaln(ell - k + 1) - gammaln(ell + k + 1)))


def wigner_column(ell: int, k: int, u: np.ndarray) -> np.ndarray:
    """T^{(ℓ)}(U) 的第 k 列 (m = −ℓ..ℓ), φ 围道积分用 FFT 求值"""
    u = np.asarray(u, dtype=complex)
    size = 2 * ell + 2
    e = np.exp(2j * math.pi * np.arange(size) / size)
    a = u[..., 0, 0, None] + u[..., 1, 0, None] * e
    b = u[..., 0, 1, None] + u[..., 1, 1, None] * e
    g = a ** (ell - k) * b ** (ell + k)
    coeffs = np.fft.fft(g, axis=-1)[..., : 2 * ell + 1] / size
    m = np.arange(-ell, ell + 1)
    det = u[..., 0, 0] * u[..., 1, 1] - u[..., 0, 1] * u[..., 1, 0]
    return coeffs * _mu(ell, m, k) * (det ** (-ell))[..., None]


def wigner_zonal(ell: int, u: np.ndarray) -> np.ndarray:
    """t^{(ℓ)}_{00}(U), 逐节点累加的 φ 围道积分"""
    u = np.asarray(u, dtype=complex)
    if ell == 0:
        return np.ones(u.shape[:-2], dtype=complex)
    size = 2 * ell + 2
    acc = np.zeros(u.shape[:-2], dtype=complex)
    for j in range(size):
        phi = 2.0 * math.pi * j / size
        e = complex(math.cos(phi), math.sin(phi))
        a = u[..., 0, 0] + u[..., 1, 0] * e
        b = u[..., 0, 1] + u[..., 1, 1] * e
        acc += (a * b) ** ell * (e ** -ell)
    det = u[..., 0, 0] * u[..., 1, 1] - u[..., 0, 1] * u[..., 1, 0]
    return acc / size * det ** (-ell)


class UnitaryHarmonics:
    """U(2) 调和分析"""

    def __init__(self):
        self.config = toml_config.quadrature

    # ---------- 采样与坐标 ----------

    def haar_sample(self, seed: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0])))
        return haar_batch(rng, 1)[0]

    def haar_moments(self, count: int, seed: int, chunk: int = 200_000) -> Dict[str, float]:
        """E|U₁₁|² 与 E t^{(1)}_{00}(U) 及其标准误"""
        s1 = s2 = t1 = t2 = 0.0
        done, index = 0, 0
        while done < count:
            size = min(chunk, count - done)
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
            u = haar_batch(rng, size)
            x = np.abs(u[:, 0, 0]) ** 2
            t = wigner_zonal(1, u).real
            s1 += x.sum()
            s2 += (x * x).sum()
            t1 += t.sum()
            t2 += (t * t).sum()
            done += size
            index += 1
        m_x, m_t = s1 / count, t1 / count
        return {
            "u11_sq": m_x,
            "u11_sq_stderr": math.sqrt(max(s2 / count - m_x ** 2, 0.0) / count),
            "t1_00": m_t,
            "t1_00_stderr": math.sqrt(max(t2 / count - m_t ** 2, 0.0) / count),
        }

    def euler_compose(self, angles: EulerAngles) -> np.ndarray:
        return euler_compose_grid(angles.theta, angles.sigma, angles.delta, angles.gamma)

    def euler_decompose(self, u: np.ndarray) -> EulerAngles:
        """逆分解; θ ∈ {0, π} 处 δ 或 σ 取 0"""
        u = np.asarray(u, dtype=complex)
        if np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-10:
            raise ConfigValidationError("u", "矩阵不是酉矩阵")
        gamma = 0.5 * float(np.angle(np.linalg.det(u)))
        v = u * np.exp(-1j * gamma)
        theta = 2.0 * math.atan2(abs(v[0, 1]), abs(v[0, 0]))
        sigma = float(np.angle(v[0, 0]))
        delta = float(np.angle(-1j * v[0, 1]))
        if abs(v[0, 1]) < 1e-15:
            delta = 0.0
        if abs(v[0, 0]) < 1e-15:
            sigma = 0.0
        return EulerAngles(theta=min(theta, math.pi), sigma=sigma, delta=delta,
                           gamma=min(max(gamma, -math.pi / 2), math.pi / 2))

    # ---------- Wigner 函数 ----------

    def _check_indices(self, ell: int, m: int, k: int) -> None:
        if ell < 0 or abs(m) > ell or abs(k) > ell:
            raise ConfigValidationError("ell", f"指标越界: ℓ={ell}, m={m}, k={k}")

    def wigner_t(self, ell: int, m: int, k: int, u: np.ndarray) -> complex:
        self._check_indices(ell, m, k)
        return complex(wigner_column(ell, k, u)[ell + m])

    def wigner_matrix(self, ell: int, u: np.ndarray) -> np.ndarray:
        """(2ℓ+1)×(2ℓ+1) 表示矩阵, 每列一次 FFT"""
        if ell < 0:
            raise ConfigValidationError("ell", f"ℓ 必须非负, 当前 {ell}")
        return np.stack([wigner_column(ell, k, u) for k in range(-ell, ell + 1)], axis=-1)

    def legendre_p(self, ell: int, m: int, k: int, theta: float) -> complex:
        """P^{(ℓ)}_{mk}(cos θ) = t^{(ℓ)}_{mk}(X(θ))"""
        return self.wigner_t(ell, m, k, euler_compose_grid(theta, 0.0, 0.0, 0.0))

    def schur_overlap(self, l1: int, l2: int) -> complex:
        """∫ t^{(ℓ)}_{00} conj(t^{(ℓ')}_{00}) dU, Euler 网格精确求积"""
        x, wx = np.polynomial.legendre.leggauss(l1 + l2 + 2)
        g, wg = np.polynomial.legendre.leggauss(2)
        trap = 2.0 * math.pi * np.arange(3) / 3 - math.pi
        theta, sigma, delta, gamma = np.meshgrid(np.arccos(x), trap, trap, 0.5 * math.pi * g, indexing="ij")
        weight = (wx / 2.0)[:, None, None, None] * np.full((1, 3, 3, 1), 1.0 / 9.0) * (wg / 2.0)[None, None, None, :]
        u = euler_compose_grid(theta, sigma, delta, gamma)
        return complex(np.sum(weight * wigner_zonal(l1, u) * np.conj(wigner_zonal(l2, u))))

    def legendre_asymptotics(self, ell_values: Sequence[int] = (1, 2, 4, 8, 16, 32, 64),
                             bound: float = 0.1, points: int = 8) -> Dict[str, float]:
        """小角区 ℓ·sin(θ/2) ≤ bound 内 P^{(ℓ)}_{00} 与 P^{(ℓ)}_{k+1,k} 的领头渐近"""
        kappa, ell1_error, worst = 0.0, 0.0, 0.0
        for ell in ell_values:
            if ell < 1:
                raise ConfigValidationError("ell", f"ℓ 必须 ≥ 1, 当前 {ell}")
            ls = np.linspace(bound / points, bound, points)
            s = ls / ell
            u = euler_compose_grid(2.0 * np.arcsin(s), 0.0, 0.0, 0.0)

            zonal = wigner_zonal(ell, u).real
            dev = np.abs(zonal - (1.0 - ell * (ell + 1) * s * s))
            if ell == 1:
                ell1_error = float(np.max(dev))
            else:
                kappa = max(kappa, float(np.max(dev / ls ** 3)))

            # 相对容差 max(10ℓs², (ℓs)²)
            tol = np.maximum(10.0 * ell * s * s, ls * ls)
            for k in range(-ell, ell):
                value = np.abs(wigner_column(ell, k, u)[..., ell + k + 1])
                lead = math.sqrt((1.0 + (k + 1) / ell) * (1.0 - k / ell)) * ls
                worst = max(worst, float(np.max(np.abs(value - lead) / lead / tol)))

        result = {"kappa": kappa, "ell1_error": ell1_error, "offdiag_tolerance_ratio": worst}
        logger.info(f"Legendre 渐近: {result}")
        return result

    # ---------- 括号平均 ----------

    def _box(self, c: float) -> Tuple[float, float, float]:
        t = max(-1.0, 1.0 - self.config.tail_cutoff / c)
        return min(math.pi, 2.0 * math.acos(t)), min(math.pi, math.acos(t)), min(math.pi / 2, math.acos(t))

    def _integrate(self, c: float, integrand: Integrand, nodes: int, delta_nodes: int) -> np.ndarray:
        """归一 Haar 测度下的截断盒张量求积, 按 δ 切片累加"""
        theta_max, sigma_max, gamma_max = self._box(c)
        x, wx = np.polynomial.legendre.leggauss(nodes)
        theta = 0.5 * theta_max * (x + 1.0)
        w_theta = 0.5 * theta_max * wx * np.sin(theta)
        sigma, w_sigma = sigma_max * x, sigma_max * wx
        gamma, w_gamma = gamma_max * x, gamma_max * wx
        base = w_theta[:, None, None] * w_sigma[None, :, None] * w_gamma[None, None, :]
        th, sg, gm = np.meshgrid(theta, sigma, gamma, indexing="ij")

        total = None
        for j in range(delta_nodes):
            delta = -math.pi + 2.0 * math.pi * j / delta_nodes
            u = euler_compose_grid(th, sg, delta, gm)
            values = integrand(u, th, sg, delta, gm)
            part = np.tensordot(base, values, axes=([0, 1, 2], [0, 1, 2])) * (2.0 * math.pi / delta_nodes)
            total = part if total is None else total + part
        return np.asarray(total) / EULER_MASS

    def _refined(self, c: float, integrand: Integrand, derive: Callable[[np.ndarray], np.ndarray],
                 depends_on_delta: bool, label: str, tolerance: Optional[float] = None) -> np.ndarray:
        """节点加倍收敛检查, 返回加密网格结果"""
        tolerance = self.config.convergence_tol if tolerance is None else tolerance
        nodes = self.config.euler_nodes
        delta_nodes = self.config.delta_nodes if depends_on_delta else 1
        coarse = derive(self._integrate(c, integrand, nodes, delta_nodes))
        fine = derive(self._integrate(c, integrand, 2 * nodes, 2 * delta_nodes if depends_on_delta else 1))
        gap = np.max(np.abs(fine - coarse) / np.maximum(1.0, np.abs(fine)))
        if gap > tolerance:
            diagnostics = {"coarse": coarse.tolist(), "refined": fine.tolist(), "nodes": nodes, "tolerance": tolerance}
            logger.error(f"{label} 求积不收敛: {diagnostics}")
            raise QuadratureError(f"{label} 求积不收敛", diagnostics)
        return fine

    def _bracket(self, trace_s: float, w: float, u_star: float, funcs: Sequence[Integrand],
                 depends_on_delta: bool = True) -> Tuple[np.ndarray, float]:
        c = 2.0 * u_star ** 2 * w ** 2 * trace_s

        def integrand(u, theta, sigma, delta, gamma):
            weight = np.exp(-c * (1.0 - np.cos(0.5 * theta) * np.cos(sigma) * np.cos(gamma)))
            cols = [weight.astype(complex)]
            cols += [weight * np.broadcast_to(f(u, theta, sigma, delta, gamma), weight.shape) for f in funcs]
            return np.stack(cols, axis=-1)

        lead = 2.0 / (math.pi * c * c)

        def derive(raw):
            return np.concatenate([[raw[0] / lead], raw[1:] / raw[0]])

        values = self._refined(c, integrand, derive, depends_on_delta, "括号平均")
        return values[1:], float(values[0].real * lead)

    def k_bracket(self, pair: HermitianPair, w: float, u_star: float, f: Integrand,
                  depends_on_delta: bool = True) -> complex:
        """⟨f⟩, 权 exp{−2u₊²W²TrS(1 − cos(θ/2)cosσcosγ)}, ⟨1⟩ = 1"""
        values, _ = self._bracket(pair.trace_s(w), w, u_star, [f], depends_on_delta)
        return complex(values[0])

    def bracket_moments(self, pair: HermitianPair, w: float, u_star: float) -> Dict[str, Dict[str, float]]:
        trace_s = pair.trace_s(w)
        funcs = [
            lambda u, th, sg, dl, gm: np.sin(gm) ** 2,
            lambda u, th, sg, dl, gm: np.sin(sg) ** 2,
            lambda u, th, sg, dl, gm: np.sin(0.5 * th) ** 2,
            lambda u, th, sg, dl, gm: np.sin(gm),
        ]
        values, _ = self._bracket(trace_s, w, u_star, funcs, depends_on_delta=False)
        base = 1.0 / (2.0 * u_star ** 2 * w ** 2 * trace_s)
        closed = [base, base, 2.0 * base, 0.0]
        names = ["sin2_gamma", "sin2_sigma", "sin2_half_theta", "sin_gamma"]
        return {n: {"computed": float(v.real), "reference": r} for n, v, r in zip(names, values, closed)}

    def z0_scaling(self, w: float, u_star: float,
                   trace_s_values: Sequence[float] = (2.0, 2.5, 3.0)) -> List[Dict[str, float]]:
        """Z₀(TrS)·TrS² 应与 TrS 无关 (至 1+O(W⁻²)); Z₀ 以 TrS=2 的领头常数归一"""
        rows = []
        for trace_s in trace_s_values:
            _, z0 = self._bracket(trace_s, w, u_star, [], depends_on_delta=False)
            z0 *= (2.0 / trace_s) ** 2
            rows.append({"trace_s": float(trace_s), "z0": z0, "z0_times_trace_s_sq": z0 * trace_s ** 2})
        return rows

    # ---------- 热核本征值 ----------

    def heat_closed_form(self, ell: int, w: float, u_star: float, trace_s: float = 2.0,
                         coefficient: Optional[float] = None) -> float:
        """λ_ℓ = 1 − κ·ℓ(ℓ+1)·(2/TrS)/(u₊W)²"""
        kappa = toml_config.crossover.damping_coefficient if coefficient is None else coefficient
        return 1.0 - kappa * ell * (ell + 1) * (2.0 / trace_s) / (u_star * w) ** 2

    def heat_eigs(self, ells: Sequence[int], w: float, u_star: float) -> Dict[int, float]:
        """⟨t^{(ℓ)}_{00}⟩ (R₁=R₂=0, TrS=2)"""
        for ell in ells:
            if ell < 0 or ell > w:
                raise ConfigValidationError("ell", f"ℓ={ell} 超出可分辨范围 [0, W={w}]")
        funcs = [lambda u, th, sg, dl, gm, ell=ell: wigner_zonal(ell, u) for ell in ells]
        values, _ = self._bracket(2.0, w, u_star, funcs, depends_on_delta=False)
        result = {ell: float(v.real) for ell, v in zip(ells, values)}
        for ell in ells:
            logger.info(f"热核本征值 ℓ={ell}, W={w}: {result[ell]:.12f}, "
                        f"闭式(κ=1/2)={self.heat_closed_form(ell, w, u_star, coefficient=0.5):.12f}, "
                        f"展示式(κ=1/8)={self.heat_closed_form(ell, w, u_star, coefficient=0.125):.12f}")
        return result

    def heat_eig(self, ell: int, w: float, u_star: float) -> float:
        return self.heat_eigs([ell], w, u_star)[ell]

    # ---------- 𝒵 展开 ----------

    def delta_formula(self, pair: HermitianPair, w: float, u_star: float) -> float:
        """Δ = u₊²Tr[R₂,R₁][R₁,R₂]/(2TrS) − Tr(R₁°+R₂°)²/(4W·TrS)"""
        r1, r2 = pair.r1, pair.r2
        trace_s = pair.trace_s(w)
        comm = r1 @ r2 - r2 @ r1
        first = u_star ** 2 * np.trace(-comm @ comm).real / (2.0 * trace_s)
        traceless = (r1 - 0.5 * np.trace(r1) * np.eye(2)) + (r2 - 0.5 * np.trace(r2) * np.eye(2))
        second = np.trace(traceless @ traceless).real / (4.0 * w * trace_s)
        return float(first - second)

    def z_tolerance(self, w: float) -> float:
        """𝒵 求积的加倍容差: 相对 W⁻³ 余项取一小比例, 不低于全局容差"""
        return max(self.config.convergence_tol, self.config.z_remainder_fraction / w ** 3)

    def z_expansion_check(self, pair: HermitianPair, w: float, u_star: float) -> Dict[str, float]:
        """𝒵(R₁,R₂) 求积值与 1 + Δ 对照"""
        limit = math.log(w) / math.sqrt(w)
        if pair.norm_difference() > limit * (1.0 + 1e-12):
            raise ConfigValidationError("pair", f"‖R₁−R₂‖={pair.norm_difference():.4g} 超出 log W/√W={limit:.4g}")

        a1, a2 = pair.scaled(w)
        eye = np.eye(2)
        mixed = (eye + a1) @ (eye + a2)
        ratios = [np.trace(eye + a).real ** 2 * np.linalg.det(eye + a).real / 4.0 for a in (a1, a2)]
        scale = 2.0 * u_star ** 2 * w ** 2
        c_box = scale * pair.trace_s(w)
        c0 = 4.0 * u_star ** 2 * w ** 2
        lead = 2.0 / (math.pi * c0 * c0)

        def integrand(u, theta, sigma, delta, gamma):
            k = scale * np.einsum("...ij,ji->...", u - eye, mixed).real
            return np.exp(k)[..., None]

        def derive(raw):
            return np.array([math.sqrt(ratios[0] * ratios[1]) * raw[0].real / lead])

        tolerance = self.z_tolerance(w)
        z_quad = float(self._refined(c_box, integrand, derive, True, "𝒵", tolerance)[0])
        delta = self.delta_formula(pair, w, u_star)
        return {"z_quad": z_quad, "delta_formula": delta, "remainder": z_quad - 1.0 - delta,
                "quadrature_tol": tolerance}

    # ---------- 双酉积分与 Bessel ----------

    def bessel_i0(self, x: float) -> float:
        if x < 0:
            raise ConfigValidationError("x", f"x 必须非负, 当前 {x}")
        value = float(i0(x))
        if not math.isfinite(value):
            raise OverflowError(f"I₀({x}) 溢出, 请使用 bessel_i0_log")
        return value

    def bessel_i0_log(self, x: float) -> float:
        if x < 0:
            raise ConfigValidationError("x", f"x 必须非负, 当前 {x}")
        return float(math.log(i0e(x)) + x)

    def _validate_sv(self, name: str, sv: Tuple[float, float]) -> None:
        if min(sv) < 0:
            raise ConfigValidationError(name, f"奇异值必须非负: {sv}")
        if abs(sv[0] - sv[1]) < 1e-3:
            raise ConfigValidationError(name, f"奇异值退化: {sv}")

    def _bessel_det(self, sv1, sv2, w: float) -> float:
        arg = 2.0 * w * w * np.outer(sv1, sv2)
        return float(np.linalg.det(i0(arg)))

    def berezin_check(self, sv1, sv2, sv1p, sv2p, w: float, mc_samples: int, seed: int,
                      chunk: int = 200_000) -> Dict[str, float]:
        """双酉积分比值: Haar×Haar 蒙特卡洛 vs det{I₀(2W²μ₁ᵢμ₂ⱼ)}"""
        for name, sv in (("sv1", sv1), ("sv2", sv2), ("sv1p", sv1p), ("sv2p", sv2p)):
            self._validate_sv(name, sv)
        for a, b in ((sv1, sv2), (sv1p, sv2p)):
            if w * w * max(a) * max(b) > 50:
                raise ConfigValidationError("w", f"W²μμ' = {w * w * max(a) * max(b):.3g} > 50")

        mu = [np.asarray(v, dtype=float) for v in (sv1, sv2, sv1p, sv2p)]
        sums = np.zeros(5)
        done, index = 0, 0
        while done < mc_samples:
            size = min(chunk, mc_samples - done)
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
            v1, v2 = haar_batch(rng, size), haar_batch(rng, size)
            ea = np.exp(2.0 * w * w * np.einsum("nij,j,nji,i->n", v1, mu[0], v2, mu[1]).real)
            eb = np.exp(2.0 * w * w * np.einsum("nij,j,nji,i->n", v1, mu[2], v2, mu[3]).real)
            sums += [ea.sum(), eb.sum(), (ea * ea).sum(), (eb * eb).sum(), (ea * eb).sum()]
            done += size
            index += 1

        n = mc_samples
        ma, mb = sums[0] / n, sums[1] / n
        va, vb = sums[2] / n - ma ** 2, sums[3] / n - mb ** 2
        cov = sums[4] / n - ma * mb
        ratio = ma / mb
        # 比值均值的 delta 方法方差
        var = (va / mb ** 2 + ma ** 2 * vb / mb ** 4 - 2.0 * ma * cov / mb ** 3) / n

        def vand(a):
            return a[0] ** 2 - a[1] ** 2

        factor = vand(mu[0]) * vand(mu[1]) / (vand(mu[2]) * vand(mu[3]))
        bessel_ratio = self._bessel_det(mu[0], mu[1], w) / self._bessel_det(mu[2], mu[3], w)
        result = {
            "group_ratio": float(ratio * factor),
            "group_stderr": float(math.sqrt(max(var, 0.0)) * abs(factor)),
            "bessel_ratio": float(bessel_ratio),
        }
        logger.info(f"双酉积分检查: {result}")
        return result


# 全局实例
unitary_harmonics = UnitaryHarmonics()
