"""
qstoch 验证模块

把函子性、幺半性、自然性、dagger 保持与“平凡或忠实”二分性
编码为带种子的随机性质套件，输出带残差的 LawReport。

每次试验的随机数由 (master_seed, trial_index) 派生，
因此串行与并行运行得到相同的报告。
"""

import asyncio
import enum
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ValidationError
from .matrix_core import as_matrix, max_abs_diff, numerical_rank
from .povm_catalog import FamilyLike, QuasiPovm, as_family, product_povm
from .quantum import (
    Channel, State, adjoint_channel, compose_channels, haar_unitary, mix_channels,
    random_state, random_unital_channel, sample_channels, tensor_channels,
)
from .representation import (
    TransitionMatrix, check_dagger_form, coherence_residual, natural_iso,
    represent_channel, star_compose, state_qrep, tensor_coherence, tensor_qrep,
    to_qstoch, transition_matrix,
)
from .settings import get_settings
from .utils import trial_rng


logger = logging.getLogger(__name__)

COLLISION_THRESHOLD = 1e-9


@dataclass(frozen=True)
class LawReport:
    """一条定律的验证报告：passed 当且仅当 max_residual < tolerance"""

    law: str
    trials: int
    max_residual: float
    tolerance: float
    passed: bool
    seed: int
    details: Tuple[float, ...] = ()
    mean_residual: float = 0.0
    components: Dict[str, float] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_residuals(cls, law: str, residuals: Sequence[float], tolerance: float, seed: int,
                       components: Optional[Dict[str, float]] = None,
                       extra: Optional[Dict[str, Any]] = None) -> 'LawReport':
        details = tuple(float(r) for r in residuals)
        max_residual = max(details) if details else 0.0
        return cls(
            law=law,
            trials=len(details),
            max_residual=max_residual,
            tolerance=float(tolerance),
            passed=max_residual < tolerance,
            seed=int(seed),
            details=details,
            mean_residual=float(np.mean(details)) if details else 0.0,
            components=dict(components or {}),
            extra=dict(extra or {}),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'law': self.law,
            'trials': self.trials,
            'max_residual': self.max_residual,
            'mean_residual': self.mean_residual,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'seed': self.seed,
            'details': list(self.details),
            'components': dict(self.components),
            'extra': dict(self.extra),
        }


def run_trials(trial: Callable[[np.random.Generator], Any], trials: int, seed: int,
               workers: Optional[int] = None) -> List[Any]:
    """按试验序号运行 trial(rng)，结果按序号排列"""
    if workers is None:
        workers = get_settings().WORKERS
    rngs = [trial_rng(seed, i) for i in range(trials)]

    if workers <= 1 or trials <= 1:
        return [trial(rng) for rng in rngs]

    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(_gather_trials(trial, rngs, workers))

    logger.debug("已有事件循环在运行，试验改为串行执行")
    return [trial(rng) for rng in rngs]


async def _gather_trials(trial, rngs, workers: int) -> List[Any]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, trial, rng) for rng in rngs]
        return list(await asyncio.gather(*futures))


def _resolve_seed(seed: Optional[int]) -> int:
    return get_settings().DEFAULT_SEED if seed is None else int(seed)


def _finish(law: str, residuals: Sequence[float], tolerance: float, seed: int, started: float,
            components: Optional[Dict[str, float]] = None,
            extra: Optional[Dict[str, Any]] = None) -> LawReport:
    report = LawReport.from_residuals(law, residuals, tolerance, seed, components, extra)
    duration = time.time() - started
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(
        level,
        f"{law}: {report.trials} 次试验, 最大残差 {report.max_residual:.3e} "
        f"(容差 {tolerance:.0e}) -> {'通过' if report.passed else '失败'} in {duration:.3f}s"
    )
    return report


@lru_cache(maxsize=128)
def _transition(povm: QuasiPovm) -> TransitionMatrix:
    return transition_matrix(povm)


def _minimal_members(family: Callable[[int], QuasiPovm], dims: Sequence[int],
                     allow_trivial: bool = False) -> Dict[int, QuasiPovm]:
    """allow_trivial 时也接受平凡族（T 取伪逆）"""
    members = {}
    for dim in dims:
        povm = family(dim)
        trivial = allow_trivial and dichotomy_report(povm).verdict is Verdict.TRIVIAL
        if not (povm.flags.minimal or trivial):
            raise ValidationError(f"维度 {dim} 的POVM {povm.label or povm.povm_id} 不是极小IC")
        members[dim] = povm
    return members


def functoriality_residual(family: FamilyLike, psi: Channel, phi: Channel) -> float:
    """||Q(Psi o Phi) - Q(Psi) * Q(Phi)||_max"""
    family = as_family(family)
    p_n, p_m, p_k = family(phi.dim_in), family(phi.dim_out), family(psi.dim_out)
    lhs = represent_channel(p_n, p_k, compose_channels(psi, phi))
    rhs = star_compose(represent_channel(p_m, p_k, psi), represent_channel(p_n, p_m, phi), _transition(p_m))
    return max_abs_diff(lhs.matrix, rhs.matrix)


def check_functoriality(family: FamilyLike, dims: Tuple[int, int, int] = (2, 2, 2),
                        trials: int = 100, seed: Optional[int] = None,
                        tol: float = 1e-9, workers: Optional[int] = None) -> LawReport:
    """Q(Psi o Phi) = Q(Psi) * Q(Phi)，Phi: n -> m，Psi: m -> k"""
    started = time.time()
    seed = _resolve_seed(seed)
    family = as_family(family)
    n, m, k = dims
    _minimal_members(family, dims, allow_trivial=True)

    def trial(rng):
        phi, psi = sample_channels([(n, m), (m, k)], rng)
        return functoriality_residual(family, psi, phi)

    residuals = run_trials(trial, trials, seed, workers)
    return _finish(f"functoriality{tuple(dims)}", residuals, tol, seed, started)


def state_tensor_residual(family: FamilyLike, rho1: State, rho2: State) -> float:
    """||Q(rho1 (x) rho2) - S * (Q(rho1) (x)' Q(rho2))||_max"""
    family = as_family(family)
    p1, p2, p12 = family(rho1.dim), family(rho2.dim), family(rho1.dim * rho2.dim)
    s = tensor_coherence(p1, p2, p12)
    product = tensor_qrep(state_qrep(p1, rho1), state_qrep(p2, rho2))
    rhs = star_compose(s, product, _transition(product_povm(p1, p2)))
    lhs = state_qrep(p12, State(rho1.dim * rho2.dim, np.kron(rho1.matrix, rho2.matrix)))
    return max_abs_diff(lhs.matrix, rhs.matrix)


def channel_naturality_residual(family: FamilyLike, phi1: Channel, phi2: Channel) -> float:
    """||S_m * (Q(Phi1) (x)' Q(Phi2)) - Q(Phi1 (x) Phi2) * S_n||_max"""
    family = as_family(family)
    n1, n2, m1, m2 = phi1.dim_in, phi2.dim_in, phi1.dim_out, phi2.dim_out
    p_n1, p_n2, p_n12 = family(n1), family(n2), family(n1 * n2)
    p_m1, p_m2, p_m12 = family(m1), family(m2), family(m1 * m2)

    s_n = tensor_coherence(p_n1, p_n2, p_n12)
    s_m = tensor_coherence(p_m1, p_m2, p_m12)
    product = tensor_qrep(represent_channel(p_n1, p_m1, phi1), represent_channel(p_n2, p_m2, phi2))

    lhs = star_compose(s_m, product, _transition(product_povm(p_m1, p_m2)))
    rhs = star_compose(represent_channel(p_n12, p_m12, tensor_channels(phi1, phi2)), s_n, _transition(p_n12))
    return max_abs_diff(lhs.matrix, rhs.matrix)


def check_monoidal(family: FamilyLike, dims: Tuple[int, ...] = (2, 2),
                   trials: int = 50, seed: Optional[int] = None,
                   tol: Optional[float] = None, workers: Optional[int] = None) -> LawReport:
    """态张量律、信道自然性，以及三元情形下的相干方程"""
    started = time.time()
    seed = _resolve_seed(seed)
    family = as_family(family)

    if len(dims) == 2:
        pairs = [tuple(dims)]
        tol = 1e-9 if tol is None else tol
    elif len(dims) == 3:
        n1, n2, n3 = dims
        pairs = [(n1, n2), (n1 * n2, n3)]
        tol = 1e-8 if tol is None else tol
    else:
        raise ValidationError(f"dims 应为二元或三元组，得到 {dims}")

    needed = set()
    for a, b in pairs:
        needed.update((a, b, a * b))
    if len(dims) == 3:
        needed.update((dims[1] * dims[2], dims[0] * dims[1] * dims[2]))
    _minimal_members(family, sorted(needed))

    def trial(rng):
        state_max, naturality_max = 0.0, 0.0
        for a, b in pairs:
            rho1, rho2 = random_state(a, rng), random_state(b, rng)
            state_max = max(state_max, state_tensor_residual(family, rho1, rho2))
            phi1, phi2 = sample_channels([(a, a), (b, b)], rng)
            naturality_max = max(naturality_max, channel_naturality_residual(family, phi1, phi2))
        return state_max, naturality_max

    results = run_trials(trial, trials, seed, workers)
    residuals = [max(pair) for pair in results]
    components = {
        'state': max((r[0] for r in results), default=0.0),
        'naturality': max((r[1] for r in results), default=0.0),
    }

    if len(dims) == 3:
        n1, n2, n3 = dims
        coherence = coherence_residual(
            family(n1), family(n2), family(n3),
            family(n1 * n2), family(n2 * n3), family(n1 * n2 * n3),
        )
        components['coherence'] = coherence
        residuals.append(coherence)

    return _finish(f"monoidal{tuple(dims)}", residuals, tol, seed, started, components)


def naturality_residual(family_a: FamilyLike, family_b: FamilyLike, phi: Channel) -> float:
    """||eta_m (F_a o Q_a)(Phi) - (F_b o Q_b)(Phi) eta_n||_max"""
    family_a, family_b = as_family(family_a), as_family(family_b)
    n, m = phi.dim_in, phi.dim_out
    a_n, a_m, b_n, b_m = family_a(n), family_a(m), family_b(n), family_b(m)

    eta_n, eta_m = natural_iso(a_n, b_n), natural_iso(a_m, b_m)
    fa = to_qstoch(represent_channel(a_n, a_m, phi), _transition(a_n), 'right')
    fb = to_qstoch(represent_channel(b_n, b_m, phi), _transition(b_n), 'right')
    return max_abs_diff(eta_m.matrix @ fa.matrix, fb.matrix @ eta_n.matrix)


def check_naturality(family_a: FamilyLike, family_b: FamilyLike, dims: Tuple[int, int] = (2, 2),
                     trials: int = 50, seed: Optional[int] = None,
                     tol: float = 1e-9, workers: Optional[int] = None) -> LawReport:
    """eta: F_a o Q_a => F_b o Q_b 在随机信道 n -> m 上的自然性"""
    started = time.time()
    seed = _resolve_seed(seed)
    family_a, family_b = as_family(family_a), as_family(family_b)
    n, m = dims
    _minimal_members(family_a, {n, m})
    _minimal_members(family_b, {n, m})

    inverse_residual = 0.0
    for dim in {n, m}:
        eta = natural_iso(family_a(dim), family_b(dim))
        inverse_residual = max(inverse_residual, max_abs_diff(eta.matrix @ eta.inverse, np.eye(eta.matrix.shape[0])))

    def trial(rng):
        (phi,) = sample_channels([(n, m)], rng)
        return naturality_residual(family_a, family_b, phi)

    residuals = run_trials(trial, trials, seed, workers)
    return _finish(
        f"naturality{tuple(dims)}", residuals, tol, seed, started,
        components={'inverse': inverse_residual},
    )


def dagger_residual(povm: QuasiPovm, phi: Channel, composite: bool = True) -> float:
    """composite 时比较 (F o Q)(Phi†) 与 (F o Q)(Phi)^T，否则比较 Q(Phi†) 与 Q(Phi)^T"""
    q = represent_channel(povm, povm, phi)
    q_adjoint = represent_channel(povm, povm, adjoint_channel(phi))
    if not composite:
        return max_abs_diff(q_adjoint.matrix, q.matrix.T)

    t = _transition(povm)
    return max_abs_diff(to_qstoch(q_adjoint, t).matrix, to_qstoch(q, t).matrix.T)


def check_dagger(family: FamilyLike, dim: int = 2, trials: int = 50,
                 seed: Optional[int] = None, tol: float = 1e-9,
                 workers: Optional[int] = None) -> LawReport:
    """F o Q 保持 dagger 当且仅当族是广义 SIC"""
    started = time.time()
    seed = _resolve_seed(seed)
    povm = _minimal_members(as_family(family), [dim])[dim]
    t = _transition(povm)

    def trial(rng):
        phi = random_unital_channel(dim, rng)
        return dagger_residual(povm, phi, composite=True), dagger_residual(povm, phi, composite=False)

    results = run_trials(trial, trials, seed, workers)
    sic_form = check_dagger_form(t)
    return _finish(
        f"dagger({dim})", [r[0] for r in results], tol, seed, started,
        components={'functor_q': max((r[1] for r in results), default=0.0)},
        extra={
            'sic_form': list(sic_form) if sic_form else None,
            'equal_trace': povm.flags.equal_trace,
            'symmetric': t.symmetric,
        },
    )


def random_doubly_quasi_stochastic(size: int, rng: np.random.Generator) -> np.ndarray:
    """P + (I - P) M (I - P)，P = J / n，M 为高斯矩阵"""
    projector = np.ones((size, size)) / size
    complement = np.eye(size) - projector
    return projector + complement @ rng.standard_normal((size, size)) @ complement


def check_commutant(t: TransitionMatrix, trials: int = 20, seed: Optional[int] = None,
                    tol: float = 1e-9, workers: Optional[int] = None) -> LawReport:
    """T 与所有双拟随机矩阵对易当且仅当 T = alpha I + beta J"""
    started = time.time()
    seed = _resolve_seed(seed)
    matrix = t.matrix

    def trial(rng):
        a = random_doubly_quasi_stochastic(t.size, rng)
        return max_abs_diff(matrix @ a, a @ matrix)

    residuals = run_trials(trial, trials, seed, workers)
    sic_form = check_dagger_form(t)
    return _finish(
        f"commutant({t.size})", residuals, tol, seed, started,
        extra={'sic_form': list(sic_form) if sic_form else None},
    )


def check_faithfulness(family: FamilyLike, dim: int = 2, trials: int = 100,
                       seed: Optional[int] = None, tol: float = 1e-6,
                       workers: Optional[int] = None) -> LawReport:
    """不同的态映到不同的向量

    每对态的残差：若 ||Q(rho) - Q(sigma)|| 不超过碰撞阈值则为 ||rho - sigma||，否则为 0。
    """
    started = time.time()
    seed = _resolve_seed(seed)
    povm = as_family(family)(dim)

    def trial(rng):
        rho, sigma = random_state(dim, rng), random_state(dim, rng)
        separation = max_abs_diff(state_qrep(povm, rho).matrix, state_qrep(povm, sigma).matrix)
        distance = max_abs_diff(rho.matrix, sigma.matrix)
        return (distance if separation <= COLLISION_THRESHOLD else 0.0), separation

    results = run_trials(trial, trials, seed, workers)
    return _finish(
        f"faithfulness({dim})", [r[0] for r in results], tol, seed, started,
        components={'min_separation': min((r[1] for r in results), default=0.0)},
    )


CONVEX_WEIGHTS = (0.0, 0.3, 0.5, 1.0)


def check_convexity(family: FamilyLike, dims: Tuple[int, int] = (2, 2),
                    seed: Optional[int] = None, tol: float = 1e-12) -> LawReport:
    """Q(t Phi1 + (1 - t) Phi2) = t Q(Phi1) + (1 - t) Q(Phi2)"""
    started = time.time()
    seed = _resolve_seed(seed)
    family = as_family(family)
    n, m = dims
    p_n, p_m = family(n), family(m)

    def trial(index):
        rng = trial_rng(seed, index)
        t = CONVEX_WEIGHTS[index]
        phi1, phi2 = sample_channels([(n, m), (n, m)], rng)
        lhs = represent_channel(p_n, p_m, mix_channels(t, phi1, phi2)).matrix
        rhs = t * represent_channel(p_n, p_m, phi1).matrix + (1 - t) * represent_channel(p_n, p_m, phi2).matrix
        return max_abs_diff(lhs, rhs)

    residuals = [trial(i) for i in range(len(CONVEX_WEIGHTS))]
    return _finish(
        f"convexity{tuple(dims)}", residuals, tol, seed, started,
        extra={'weights': list(CONVEX_WEIGHTS)},
    )


def orbit_span_rank(dim: int, seed_matrices: Sequence[np.ndarray], unitary_samples: int,
                    seed: Optional[int] = None) -> int:
    """{U L U†} 在采样的 Haar 酉矩阵上张成空间的数值秩"""
    rng = np.random.default_rng(_resolve_seed(seed))
    matrices = [as_matrix(m) for m in seed_matrices]
    for m in matrices:
        if m.shape != (dim, dim):
            raise ValidationError(f"种子矩阵形状应为 {(dim, dim)}，得到 {m.shape}")
    if not any(max_abs_diff(m, m[0, 0] * np.eye(dim)) == 0 and m[0, 0] != 0 for m in matrices):
        logger.warning("种子矩阵中没有单位矩阵的倍数")

    vectors = []
    for _ in range(unitary_samples):
        u = haar_unitary(dim, rng)
        for m in matrices:
            vectors.append((u @ m @ u.conj().T).reshape(-1))
    if not vectors:
        return 0
    return numerical_rank(np.array(vectors), get_settings().GRAM_TOL)


class Verdict(enum.Enum):
    TRIVIAL = 'trivial'
    FAITHFUL = 'faithful'
    VIOLATES_PREMISES = 'violates dichotomy premises'


@dataclass(frozen=True)
class DichotomyReport:
    """关联拟POVM的二分判定及推论预测"""

    verdict: Verdict
    gram_rank: int
    trivial_deviation: float
    positive: bool
    minimal: bool
    strong_monoidal: Optional[bool] = None
    dagger_preserving: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verdict': self.verdict.value,
            'gram_rank': self.gram_rank,
            'trivial_deviation': self.trivial_deviation,
            'positive': self.positive,
            'minimal': self.minimal,
            'strong_monoidal': self.strong_monoidal,
            'dagger_preserving': self.dagger_preserving,
        }


TRIVIAL_TOL = 1e-9


def dichotomy_report(family: QuasiPovm) -> DichotomyReport:
    """平凡：每个效应元都是 (tr E_i / d) I；忠实：族是IC；否则违反前提"""
    settings = get_settings()
    identity = np.eye(family.dim)
    deviation = max(
        max_abs_diff(e, (t / family.dim) * identity)
        for e, t in zip(family.effects, family.traces)
    )
    flags = family.flags
    rank = numerical_rank(family.gram, settings.GRAM_TOL)

    if deviation <= TRIVIAL_TOL:
        verdict = Verdict.TRIVIAL
    elif flags.informationally_complete:
        verdict = Verdict.FAITHFUL
    else:
        verdict = Verdict.VIOLATES_PREMISES

    strong_monoidal = dagger_preserving = None
    if verdict is Verdict.FAITHFUL and flags.positive:
        strong_monoidal = flags.minimal
        dagger_preserving = flags.generalized_sic

    return DichotomyReport(
        verdict=verdict,
        gram_rank=rank,
        trivial_deviation=deviation,
        positive=flags.positive,
        minimal=flags.minimal,
        strong_monoidal=strong_monoidal,
        dagger_preserving=dagger_preserving,
    )
