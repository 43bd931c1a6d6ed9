"""
qstoch 表示模块

把 CPTP 嵌入拟随机矩阵：转移矩阵 T、函子 Q、星复合范畴 QStoch_T、
同构 F_T、张量相干矩阵 S、自然同构 eta、dagger 检查，以及从态映射中
提取关联拟POVM。

张量指标统一使用 matrix_core 中的 kron 约定。
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    AdjointUndefinedError, AmbiguityError, CompositionError, DimensionError,
    ExtractionError, NormalizationError, SingularityError, ValidationError,
)
from .matrix_core import as_real_matrix, freeze, max_abs_diff, pinv
from .povm_catalog import (
    QuasiPovm, computational_basis_povm, fit_scaled_identity_plus_ones,
    product_povm, tensor_ids, unit_povm,
)
from .quantum import (
    Channel, Measurement, SeedLike, State, as_rng, channel_action, pure_state, random_state,
)
from .settings import get_settings


logger = logging.getLogger(__name__)

KINDS = ('state', 'channel', 'measurement')
FRAMES = ('qstoch_t', 'right', 'left')


@dataclass(frozen=True, eq=False)
class QuasiProbVector:
    """拟概率向量：条目和为1"""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64).reshape(-1)
        if entries.size == 0:
            raise ValidationError("拟概率向量不能为空")
        total = float(np.sum(entries))
        if abs(total - 1) > get_settings().STOCHASTIC_TOL:
            raise ValidationError(f"拟概率向量之和必须为1，得到 {total:.15g}")
        object.__setattr__(self, 'entries', freeze(entries))

    def __len__(self) -> int:
        return self.entries.size

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """转移矩阵 T(i|j) = tr(E_j / tr(E_j) E_i) 及其（伪）逆与诊断"""

    matrix: np.ndarray
    inverse: np.ndarray
    source_povm_id: str
    minimal: bool
    stochastic: bool
    doubly_stochastic: bool
    symmetric: bool
    sic_form: Optional[Tuple[float, float]]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def invertible(self) -> bool:
        """inverse 是真逆（极小族，或 T = I 的经典结果空间）"""
        return max_abs_diff(self.matrix @ self.inverse, np.eye(self.size)) <= get_settings().GRAM_TOL


@dataclass(frozen=True, eq=False)
class QRep:
    """带源/目标POVM标识的实拟随机矩阵

    frame 表示矩阵所在的范畴：qstoch_t 为 Q 的像，right/left 为 F_T 的两种约定的像。
    """

    matrix: np.ndarray
    in_povm_id: str
    out_povm_id: str
    kind: str = 'channel'
    frame: str = 'qstoch_t'

    def __post_init__(self):
        matrix = as_real_matrix(self.matrix)
        object.__setattr__(self, 'matrix', matrix)

        if self.kind not in KINDS:
            raise ValidationError(f"未知的表示类型: {self.kind}")
        if self.frame not in FRAMES:
            raise ValidationError(f"未知的范畴约定: {self.frame}")
        if self.kind == 'state' and matrix.shape[1] != 1:
            raise DimensionError(f"态的表示只能有一列，得到 {matrix.shape[1]} 列")

        deviation = float(np.max(np.abs(matrix.sum(axis=0) - 1)))
        if deviation > get_settings().STOCHASTIC_TOL:
            raise ValidationError(f"表示矩阵不是拟随机的：列和偏离1达 {deviation:.3e}")

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def is_stochastic(self) -> bool:
        return bool(np.all(self.matrix >= -get_settings().STOCHASTIC_TOL))

    def vector(self) -> QuasiProbVector:
        if self.cols != 1:
            raise DimensionError("只有单列表示才能转换为拟概率向量")
        return QuasiProbVector(self.matrix[:, 0])


def _normalized_effects(povm: QuasiPovm) -> Tuple[np.ndarray, ...]:
    tol = get_settings().NORMALIZATION_TOL
    for j, trace in enumerate(povm.traces):
        if abs(trace) <= tol:
            raise NormalizationError(f"效应元 {j} 的迹为零，无法归一化")
    return tuple(e / t for e, t in zip(povm.effects, povm.traces))


def _overlap_matrix(rows: Sequence[np.ndarray], cols: Sequence[np.ndarray]) -> np.ndarray:
    """M_ij = Re tr(cols_j rows_i)，要求 rows 厄米"""
    a = np.array([r.reshape(-1) for r in rows])
    b = np.array([c.reshape(-1) for c in cols])
    # tr(C R) = sum_ab C_ab R_ba = sum_ab C_ab conj(R_ab)
    return np.real(a.conj() @ b.T)


def transition_matrix(povm: QuasiPovm) -> TransitionMatrix:
    """T(i|j) = tr((E_j / tr E_j) E_i)"""
    settings = get_settings()
    matrix = _overlap_matrix(povm.effects, _normalized_effects(povm))
    flags = povm.flags

    if flags.minimal:
        try:
            inverse = np.linalg.inv(matrix)
        except np.linalg.LinAlgError as e:
            raise SingularityError(f"极小族的转移矩阵不可逆: {e}")
    else:
        inverse = pinv(matrix)

    stochastic = (
        float(np.max(np.abs(matrix.sum(axis=0) - 1))) <= settings.STOCHASTIC_TOL
        and bool(np.all(matrix >= -settings.STOCHASTIC_TOL))
    )
    symmetric = max_abs_diff(matrix, matrix.T) <= settings.SIC_FORM_TOL

    return TransitionMatrix(
        matrix=freeze(matrix),
        inverse=freeze(np.array(inverse)),
        source_povm_id=povm.povm_id,
        minimal=flags.minimal,
        stochastic=stochastic,
        doubly_stochastic=flags.equal_trace,
        symmetric=symmetric,
        sic_form=_dagger_form(matrix),
    )


def represent_state(povm: QuasiPovm, rho: State) -> QuasiProbVector:
    """玻恩规则 p(i) = tr(rho E_i)"""
    if rho.dim != povm.dim:
        raise DimensionError(f"态维度 {rho.dim} 与POVM维度 {povm.dim} 不匹配")
    return QuasiProbVector(_overlap_matrix(povm.effects, [rho.matrix])[:, 0])


def state_qrep(povm: QuasiPovm, rho: State) -> QRep:
    """Q(rho~: 1 -> n)：以 M_1 上的 {1} 为源的单列表示"""
    p = represent_state(povm, rho)
    return QRep(p.entries.reshape(-1, 1), unit_povm().povm_id, povm.povm_id, kind='state')


def _transition_for(povm: QuasiPovm, transition: Optional[TransitionMatrix],
                    allow_nonminimal: bool) -> TransitionMatrix:
    if transition is None:
        transition = transition_matrix(povm)
    elif transition.source_povm_id != povm.povm_id:
        raise CompositionError("转移矩阵不属于给定的POVM")
    if not transition.minimal:
        if not allow_nonminimal:
            raise AmbiguityError("非极小族上的展开系数不唯一；如需广义逆重建请设置 allow_nonminimal=True")
        if not povm.flags.informationally_complete:
            raise AmbiguityError("非IC族无法重建态")
    return transition


def expansion_coefficients(povm: QuasiPovm, p: Union[QuasiProbVector, Sequence[float]],
                           allow_nonminimal: bool = False,
                           transition: Optional[TransitionMatrix] = None) -> np.ndarray:
    """alpha = T^{-1} p（非极小族用具有相同核的广义逆）"""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.size != len(povm):
        raise DimensionError(f"向量长度 {p.size} 与效应元个数 {len(povm)} 不匹配")
    t = _transition_for(povm, transition, allow_nonminimal)
    return t.inverse @ p


def reconstruct_operator(povm: QuasiPovm, p, allow_nonminimal: bool = False) -> np.ndarray:
    """sum_i (T^{-1} p)_i E_i / tr(E_i)，不做态验证"""
    alpha = expansion_coefficients(povm, p, allow_nonminimal)
    normalized = _normalized_effects(povm)
    operator = sum(a * e for a, e in zip(alpha, normalized))
    return (operator + operator.conj().T) / 2


def reconstruct_state(povm: QuasiPovm, p, allow_nonminimal: bool = False) -> State:
    """由（拟）概率重建密度矩阵"""
    return State(povm.dim, reconstruct_operator(povm, p, allow_nonminimal))


def represent_channel(in_povm: QuasiPovm, out_povm: QuasiPovm, phi: Channel) -> QRep:
    """Q(Phi)_ij = tr(Phi(E_j / tr E_j) E_i')"""
    if phi.dim_in != in_povm.dim or phi.dim_out != out_povm.dim:
        raise DimensionError(
            f"信道 {phi.dim_in} -> {phi.dim_out} 与POVM维度 {in_povm.dim} -> {out_povm.dim} 不匹配"
        )
    images = [channel_action(phi, e) for e in _normalized_effects(in_povm)]
    matrix = _overlap_matrix(out_povm.effects, images)
    kind = 'state' if in_povm.dim == 1 else 'channel'
    return QRep(matrix, in_povm.povm_id, out_povm.povm_id, kind=kind)


def represent_measurement(povm: QuasiPovm, meas: Measurement) -> QRep:
    """Q(A)(k|i) = tr(A_k E_i / tr E_i)，输出空间为经典结果 {|k><k|}"""
    if meas.dim != povm.dim:
        raise DimensionError(f"测量维度 {meas.dim} 与POVM维度 {povm.dim} 不匹配")
    matrix = _overlap_matrix(meas.effects, _normalized_effects(povm))
    outcome_id = computational_basis_povm(meas.outcome_count).povm_id
    return QRep(matrix, povm.povm_id, outcome_id, kind='measurement')


def _compose_kind(s: QRep, r: QRep) -> str:
    if r.kind == 'state':
        return 'state'
    if s.kind == 'measurement':
        return 'measurement'
    return 'channel'


def star_compose(s: QRep, r: QRep, t: TransitionMatrix) -> QRep:
    """QStoch_T 中的复合 s * r = s T^{-1} r"""
    if s.frame != 'qstoch_t' or r.frame != 'qstoch_t':
        raise CompositionError("星复合只作用于 QStoch_T 中的表示")
    if not (r.out_povm_id == s.in_povm_id == t.source_povm_id):
        raise CompositionError(
            f"中间POVM不一致: r 输出 {r.out_povm_id}，s 输入 {s.in_povm_id}，T 属于 {t.source_povm_id}"
        )
    if s.cols != t.size or r.rows != t.size:
        raise DimensionError(f"形状不兼容: s {s.matrix.shape}，T {t.matrix.shape}，r {r.matrix.shape}")

    matrix = s.matrix @ t.inverse @ r.matrix
    return QRep(matrix, r.in_povm_id, s.out_povm_id, kind=_compose_kind(s, r))


def to_qstoch(r: QRep, t: TransitionMatrix, side: str = 'right') -> QRep:
    """F_T(A) = A T_in^{-1}（right）或 F_T'(A) = T_out^{-1} A（left）"""
    if r.frame != 'qstoch_t':
        raise CompositionError("to_qstoch 的输入必须是 QStoch_T 中的表示")
    if not t.invertible:
        raise AmbiguityError("T 不可逆时 F_T 不把恒等映到恒等，不构成函子")
    if side == 'right':
        if t.source_povm_id != r.in_povm_id:
            raise CompositionError("right 约定需要输入POVM的转移矩阵")
        matrix = r.matrix @ t.inverse
    elif side == 'left':
        if t.source_povm_id != r.out_povm_id:
            raise CompositionError("left 约定需要输出POVM的转移矩阵")
        matrix = t.inverse @ r.matrix
    else:
        raise ValidationError(f"side 只能是 right 或 left，得到 {side}")
    return QRep(matrix, r.in_povm_id, r.out_povm_id, kind=r.kind, frame=side)


def from_qstoch(a: QRep, t: TransitionMatrix) -> QRep:
    """逆函子 F_T^{-1}(A) = A T_in（right）或 T_out A（left）"""
    if a.frame == 'right':
        if t.source_povm_id != a.in_povm_id:
            raise CompositionError("right 约定需要输入POVM的转移矩阵")
        matrix = a.matrix @ t.matrix
    elif a.frame == 'left':
        if t.source_povm_id != a.out_povm_id:
            raise CompositionError("left 约定需要输出POVM的转移矩阵")
        matrix = t.matrix @ a.matrix
    else:
        raise CompositionError("from_qstoch 的输入必须是 QStoch 中的表示")
    return QRep(matrix, a.in_povm_id, a.out_povm_id, kind=a.kind)


def qstoch_compose(b: QRep, a: QRep) -> QRep:
    """QStoch 中的普通矩阵复合 b a"""
    if a.frame == 'qstoch_t' or a.frame != b.frame:
        raise CompositionError("普通复合需要同一约定下的 QStoch 表示")
    if a.out_povm_id != b.in_povm_id:
        raise CompositionError(f"中间POVM不一致: {a.out_povm_id} 与 {b.in_povm_id}")
    if b.cols != a.rows:
        raise DimensionError(f"形状不兼容: {b.matrix.shape} 与 {a.matrix.shape}")
    return QRep(b.matrix @ a.matrix, a.in_povm_id, b.out_povm_id, kind=_compose_kind(b, a), frame=a.frame)


def tensor_qrep(r1: QRep, r2: QRep) -> QRep:
    """幺半积 r1 (x)' r2：kron 加积族标识"""
    if r1.frame != r2.frame:
        raise CompositionError("只能张量同一范畴中的表示")
    kind = 'state' if r1.kind == r2.kind == 'state' else 'channel'
    if r1.kind == r2.kind == 'measurement':
        kind = 'measurement'
    return QRep(
        np.kron(r1.matrix, r2.matrix),
        tensor_ids(r1.in_povm_id, r2.in_povm_id),
        tensor_ids(r1.out_povm_id, r2.out_povm_id),
        kind=kind,
        frame=r1.frame,
    )


def _require_minimal(*povms: QuasiPovm):
    for povm in povms:
        if not povm.flags.minimal:
            raise ValidationError(f"POVM {povm.label or povm.povm_id} 不是极小IC")


def tensor_coherence(povm1: QuasiPovm, povm2: QuasiPovm, povm12: QuasiPovm) -> QRep:
    """相干矩阵 S(j | i1 i2) = tr((E_i1 / tr) (x) (E_i2 / tr) E_j)

    即积族到复合系统族的恒等信道表示。
    """
    if povm12.dim != povm1.dim * povm2.dim:
        raise DimensionError(f"复合系统维度 {povm12.dim} 不等于 {povm1.dim} x {povm2.dim}")
    _require_minimal(povm1, povm2, povm12)

    product = product_povm(povm1, povm2)
    matrix = _overlap_matrix(povm12.effects, _normalized_effects(product))
    s = QRep(matrix, product.povm_id, povm12.povm_id, kind='channel')
    logger.debug(f"相干矩阵 {s.rows}x{s.cols} 的条件数 {condition_number(s):.3e}")
    return s


def condition_number(rep: QRep) -> float:
    """2-范数条件数"""
    return float(np.linalg.cond(rep.matrix))


def coherence_residual(povm1: QuasiPovm, povm2: QuasiPovm, povm3: QuasiPovm,
                       povm12: QuasiPovm, povm23: QuasiPovm, povm123: QuasiPovm) -> float:
    """S_{12,3}(T_12^{-1} S_{1,2} (x) I) 与 S_{1,23}(I (x) T_23^{-1} S_{2,3}) 的最大偏差"""
    s12 = tensor_coherence(povm1, povm2, povm12)
    s23 = tensor_coherence(povm2, povm3, povm23)
    s12_3 = tensor_coherence(povm12, povm3, povm123)
    s1_23 = tensor_coherence(povm1, povm23, povm123)

    t12 = transition_matrix(povm12)
    t23 = transition_matrix(povm23)
    size1 = len(povm1)
    size3 = len(povm3)

    lhs = s12_3.matrix @ np.kron(t12.inverse @ s12.matrix, np.eye(size3))
    rhs = s1_23.matrix @ np.kron(np.eye(size1), t23.inverse @ s23.matrix)
    return max_abs_diff(lhs, rhs)


@dataclass(frozen=True, eq=False)
class NaturalIso:
    """eta_n = S T_a^{-1}：F_a o Q_a => F_b o Q_b 的分量"""

    matrix: np.ndarray
    inverse: np.ndarray
    source_povm_id: str
    target_povm_id: str

    def apply(self, p) -> np.ndarray:
        return self.matrix @ np.asarray(p, dtype=np.float64)


def natural_iso(povm_a: QuasiPovm, povm_b: QuasiPovm) -> NaturalIso:
    """S(i|j) = tr(E_j^a / tr E_j^a E_i^b)，eta = S T_a^{-1}"""
    if povm_a.dim != povm_b.dim:
        raise DimensionError(f"两个族的维度不同: {povm_a.dim} 与 {povm_b.dim}")
    _require_minimal(povm_a, povm_b)

    s = _overlap_matrix(povm_b.effects, _normalized_effects(povm_a))
    eta = s @ transition_matrix(povm_a).inverse
    try:
        inverse = np.linalg.inv(eta)
    except np.linalg.LinAlgError as e:
        raise SingularityError(f"自然同构不可逆: {e}")
    return NaturalIso(freeze(eta), freeze(inverse), povm_a.povm_id, povm_b.povm_id)


def _dagger_form(matrix: np.ndarray) -> Optional[Tuple[float, float]]:
    tol = get_settings().SIC_FORM_TOL
    fitted = fit_scaled_identity_plus_ones(matrix, tol)
    if fitted is None:
        return None
    alpha, beta = fitted
    if abs(alpha + matrix.shape[0] * beta - 1) >= tol:
        return None
    return alpha, beta


def check_dagger_form(t: Union[TransitionMatrix, np.ndarray]) -> Optional[Tuple[float, float]]:
    """T = alpha I + beta J 且 alpha + n beta = 1 时返回 (alpha, beta)"""
    matrix = t.matrix if isinstance(t, TransitionMatrix) else np.asarray(t, dtype=np.float64)
    return _dagger_form(matrix)


def is_doubly_stochastic(rep: QRep) -> bool:
    """行和与列和都为1（拟随机意义下）"""
    if rep.rows != rep.cols:
        return False
    return float(np.max(np.abs(rep.matrix.sum(axis=1) - 1))) <= get_settings().STOCHASTIC_TOL


def transpose_qrep(rep: QRep) -> QRep:
    """QStoch 的部分 dagger：只对双拟随机矩阵定义"""
    if not is_doubly_stochastic(rep):
        raise AdjointUndefinedError("只有双拟随机矩阵的转置仍是拟随机的")
    return QRep(rep.matrix.T, rep.out_povm_id, rep.in_povm_id, kind=rep.kind, frame=rep.frame)


def negativity(v) -> float:
    """严格负条目的绝对值之和"""
    values = np.asarray(getattr(v, 'matrix', getattr(v, 'entries', v)), dtype=np.float64)
    return float(-np.sum(values[values < 0]))


def spanning_states(dim: int) -> list:
    """张成密度矩阵空间的 d^2 个纯态：|k><k|，(|j>+|k>)/sqrt2，(|j>+i|k>)/sqrt2"""
    states = []
    for k in range(dim):
        states.append(('diag', k, k, pure_state(np.eye(dim)[k])))
    for j in range(dim):
        for k in range(j + 1, dim):
            basis = np.eye(dim)
            states.append(('real', j, k, pure_state(basis[j] + basis[k])))
            states.append(('imag', j, k, pure_state(basis[j] + 1j * basis[k])))
    return states


def _evaluate(state_map: Callable[[State], object], rho: State, out_len: Optional[int]) -> np.ndarray:
    value = state_map(rho)
    value = np.asarray(getattr(value, 'entries', getattr(value, 'matrix', value)), dtype=np.float64).reshape(-1)
    if out_len is not None and value.size != out_len:
        raise ExtractionError(f"态映射输出长度 {value.size} 与期望 {out_len} 不符")
    return value


def extract_quasi_povm(dim: int, state_map: Callable[[State], object],
                       out_len: Optional[int] = None, seed: SeedLike = 0,
                       checks: int = 50) -> QuasiPovm:
    """从仿射态映射中恢复关联拟POVM，使 F(rho)_i = tr(rho E_i)"""
    tol = get_settings().EXTRACTION_TOL
    rng = as_rng(seed)

    # 凸性抽查
    for _ in range(3):
        rho, sigma = random_state(dim, rng), random_state(dim, rng)
        t = float(rng.uniform(0.1, 0.9))
        mixed = State(dim, t * rho.matrix + (1 - t) * sigma.matrix)
        lhs = _evaluate(state_map, mixed, out_len)
        rhs = t * _evaluate(state_map, rho, out_len) + (1 - t) * _evaluate(state_map, sigma, out_len)
        if lhs.shape != rhs.shape or max_abs_diff(lhs, rhs) > tol:
            raise ExtractionError("态映射不是仿射的：凸组合抽查失败")

    values = {}
    for kind, j, k, rho in spanning_states(dim):
        values[(kind, j, k)] = _evaluate(state_map, rho, out_len)
    count = values[('diag', 0, 0)].size

    effects = np.zeros((count, dim, dim), dtype=np.complex128)
    for k in range(dim):
        effects[:, k, k] = values[('diag', k, k)]
    for j in range(dim):
        for k in range(j + 1, dim):
            mean = (values[('diag', j, j)] + values[('diag', k, k)]) / 2
            real = values[('real', j, k)] - mean
            imag = mean - values[('imag', j, k)]
            effects[:, j, k] = real + 1j * imag
            effects[:, k, j] = real - 1j * imag

    residual = np.eye(dim) - effects.sum(axis=0)
    deviation = float(np.max(np.abs(residual)))
    if deviation > tol:
        raise ExtractionError(f"提取的效应元之和偏离单位矩阵 {deviation:.3e}")
    effects += residual / count

    povm = QuasiPovm(dim, tuple(effects), label=f"extracted-{dim}")

    for _ in range(checks):
        rho = random_state(dim, rng)
        expected = _evaluate(state_map, rho, out_len)
        recovered = _overlap_matrix(povm.effects, [rho.matrix])[:, 0]
        if max_abs_diff(expected, recovered) > tol:
            raise ExtractionError("提取的拟POVM无法复现态映射")

    logger.debug(f"从态映射提取了 {count} 个效应元 (dim={dim})")
    return povm
