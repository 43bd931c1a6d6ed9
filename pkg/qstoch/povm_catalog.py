"""
qstoch POVM 目录模块

诱导表示的（拟）POVM 族：SIC、随机极小IC，以及用来展示
“平凡或忠实”二分性的退化族。
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    ConstructionError, DimensionError, GenerationError, SingularityError, ValidationError,
)
from .matrix_core import (
    as_matrix, eig_hermitian, freeze, gellmann_basis, is_hermitian, kron,
    max_abs_diff, numerical_rank, singular_values, sqrt_inv_psd,
)
from .quantum import PAULI_X, PAULI_Y, PAULI_Z, SeedLike, as_rng
from .settings import get_settings
from .utils import content_hash


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PovmFlags:
    """拟POVM的结构标志"""

    positive: bool
    informationally_complete: bool
    minimal: bool
    equal_trace: bool
    generalized_sic: bool
    sic_alpha: Optional[float] = None
    sic_beta: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            'positive': self.positive,
            'informationally_complete': self.informationally_complete,
            'minimal': self.minimal,
            'equal_trace': self.equal_trace,
            'generalized_sic': self.generalized_sic,
            'sic_alpha': self.sic_alpha,
            'sic_beta': self.sic_beta,
        }


def tensor_ids(first: str, second: str) -> str:
    """积族的标识符"""
    return f"({first})x({second})"


@dataclass(frozen=True, eq=False)
class QuasiPovm:
    """有序厄米族 {E_i}，求和为单位矩阵"""

    dim: int
    effects: Tuple[np.ndarray, ...]
    label: str = ""
    identifier: Optional[str] = field(default=None, repr=False)

    def __post_init__(self):
        settings = get_settings()
        effects = tuple(as_matrix(e) for e in self.effects)
        object.__setattr__(self, 'effects', effects)

        if self.dim < 1:
            raise DimensionError(f"维度必须为正整数，得到 {self.dim}")
        if not effects:
            raise ValidationError("拟POVM至少需要一个效应元")

        for i, effect in enumerate(effects):
            if effect.shape != (self.dim, self.dim):
                raise DimensionError(f"效应元 {i} 的形状应为 {(self.dim, self.dim)}，得到 {effect.shape}")
            if not is_hermitian(effect, settings.HERMITIAN_TOL):
                raise ValidationError(f"效应元 {i} 不是厄米矩阵")

        deviation = max_abs_diff(sum(effects), np.eye(self.dim))
        if deviation > settings.TRACE_TOL:
            raise ValidationError(f"效应元之和偏离单位矩阵 {deviation:.3e}")

    def __len__(self) -> int:
        return len(self.effects)

    @cached_property
    def povm_id(self) -> str:
        """内容哈希（显式标识符优先）"""
        if self.identifier:
            return self.identifier
        return content_hash(self.dim, *self.effects)

    @cached_property
    def traces(self) -> np.ndarray:
        return freeze(np.array([np.real(np.trace(e)) for e in self.effects]))

    @cached_property
    def gram(self) -> np.ndarray:
        """G_ij = tr(E_i E_j)"""
        vectors = np.array([e.reshape(-1) for e in self.effects])
        return freeze(np.real(vectors @ vectors.conj().T))

    @cached_property
    def flags(self) -> PovmFlags:
        settings = get_settings()
        size = self.dim ** 2
        count = len(self.effects)

        positive = all(
            eig_hermitian(e).eigenvalues[0] >= -settings.PSD_TOL for e in self.effects
        )
        rank = numerical_rank(self.gram, settings.GRAM_TOL)
        informationally_complete = rank == size
        minimal = count == size and float(singular_values(self.gram)[-1]) > settings.GRAM_TOL
        equal_trace = float(np.ptp(self.traces)) <= settings.TRACE_TOL

        sic_form = fit_scaled_identity_plus_ones(self.gram, settings.SIC_TOL) if minimal else None
        return PovmFlags(
            positive=positive,
            informationally_complete=informationally_complete,
            minimal=minimal,
            equal_trace=equal_trace,
            generalized_sic=sic_form is not None,
            sic_alpha=sic_form[0] if sic_form else None,
            sic_beta=sic_form[1] if sic_form else None,
        )

    def __eq__(self, other):
        if not isinstance(other, QuasiPovm):
            return NotImplemented
        return (self.dim == other.dim and len(self) == len(other)
                and all(np.array_equal(a, b) for a, b in zip(self.effects, other.effects)))

    def __hash__(self):
        return hash(self.povm_id)


def fit_scaled_identity_plus_ones(matrix: np.ndarray, tol: float) -> Optional[Tuple[float, float]]:
    """拟合 matrix = alpha I + beta J

    alpha 取对角均值减去非对角均值，beta 取非对角均值；
    最大残差不超过 tol 时返回 (alpha, beta)。
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    size = matrix.shape[0]
    diagonal = np.diag(matrix)
    off_diagonal = matrix[~np.eye(size, dtype=bool)]

    beta = float(np.mean(off_diagonal)) if off_diagonal.size else 0.0
    alpha = float(np.mean(diagonal)) - beta
    residual = max_abs_diff(matrix, alpha * np.eye(size) + beta * np.ones((size, size)))
    if residual >= tol:
        return None
    return alpha, beta


def unit_povm() -> QuasiPovm:
    """M_1 = C 上唯一的极小IC {1}"""
    return QuasiPovm(1, (np.ones((1, 1)),), label="unit")


def computational_basis_povm(dim: int) -> QuasiPovm:
    """经典结果空间 {|k><k|}（dim >= 2 时非IC）"""
    effects = []
    for k in range(dim):
        e = np.zeros((dim, dim))
        e[k, k] = 1
        effects.append(e)
    return QuasiPovm(dim, tuple(effects), label=f"basis-{dim}")


TETRAHEDRON_BLOCH = (
    (1, 1, 1),
    (1, -1, -1),
    (-1, 1, -1),
    (-1, -1, 1),
)


def _bloch_effect(vector, weight: float) -> np.ndarray:
    x, y, z = vector
    return weight * (np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def tetrahedron_povm() -> QuasiPovm:
    """量子比特的四面体 SIC：E_i = (I + a_i . sigma) / 4"""
    effects = tuple(
        _bloch_effect(np.array(v) / np.sqrt(3), 0.25) for v in TETRAHEDRON_BLOCH
    )
    return QuasiPovm(2, effects, label="tetrahedron")


def six_state_povm() -> QuasiPovm:
    """Pauli 本征态 POVM：6 个效应元，IC 但非极小"""
    effects = []
    for axis in np.eye(3):
        for sign in (1, -1):
            effects.append(_bloch_effect(sign * axis, 1 / 6))
    return QuasiPovm(2, tuple(effects), label="six-state")


def sic_fiducial(dim: int) -> np.ndarray:
    """内置的 Weyl-Heisenberg SIC 基准向量"""
    if dim == 2:
        # Bloch 向量 (1,1,1)/sqrt(3) 的四面体顶点
        theta = np.arccos(1 / np.sqrt(3))
        return np.array([np.cos(theta / 2), np.exp(1j * np.pi / 4) * np.sin(theta / 2)])
    if dim == 3:
        return np.array([0, 1, -1], dtype=np.complex128) / np.sqrt(2)
    raise ConstructionError(f"维度 {dim} 没有内置的 SIC 基准向量，请提供 fiducial")


def clock_and_shift(dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """X|j> = |j+1>，Z|j> = omega^j |j>"""
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    return shift, clock


def wh_sic(dim: int, fiducial=None) -> QuasiPovm:
    """Weyl-Heisenberg 轨道 SIC：E_jk = |psi_jk><psi_jk| / d，psi_jk = X^j Z^k psi"""
    settings = get_settings()
    psi = sic_fiducial(dim) if fiducial is None else np.asarray(fiducial, dtype=np.complex128).reshape(-1)
    if psi.shape != (dim,):
        raise DimensionError(f"基准向量长度应为 {dim}，得到 {psi.shape[0]}")
    if abs(np.linalg.norm(psi) - 1) > settings.SIC_TOL:
        raise ValidationError(f"基准向量必须归一化，范数为 {np.linalg.norm(psi):.12g}")

    shift, clock = clock_and_shift(dim)
    orbit = []
    for j in range(dim):
        for k in range(dim):
            orbit.append(np.linalg.matrix_power(shift, j) @ np.linalg.matrix_power(clock, k) @ psi)
    orbit = np.array(orbit)

    overlaps = np.abs(orbit.conj() @ orbit.T) ** 2
    off_diagonal = overlaps[~np.eye(dim ** 2, dtype=bool)]
    worst = float(np.max(np.abs(off_diagonal - 1 / (dim + 1))))
    if worst > settings.SIC_TOL:
        raise ConstructionError(
            f"基准向量不是 SIC：轨道重叠偏离 1/(d+1) 的最大值为 {worst:.3e}"
        )

    effects = tuple(np.outer(v, v.conj()) / dim for v in orbit)
    return QuasiPovm(dim, effects, label=f"wh-sic-{dim}")


def random_minimal_ic(dim: int, seed: SeedLike = None) -> QuasiPovm:
    """随机极小IC：d^2 个 Haar 纯态经 S^{-1/2}(.)S^{-1/2} 对称化"""
    if dim < 2:
        raise DimensionError(f"random_minimal_ic 需要 dim >= 2，得到 {dim}")
    rng = as_rng(seed)
    retries = get_settings().MAX_RETRIES

    for attempt in range(1, retries + 1):
        vectors = rng.standard_normal((dim ** 2, dim)) + 1j * rng.standard_normal((dim ** 2, dim))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        projectors = [np.outer(v, v.conj()) for v in vectors]

        try:
            root = sqrt_inv_psd(sum(projectors))
        except SingularityError as e:
            logger.debug(f"random_minimal_ic 第 {attempt} 次尝试失败: {e}")
            continue

        effects = []
        for a in projectors:
            e = root @ a @ root
            effects.append((e + e.conj().T) / 2)

        povm = QuasiPovm(dim, tuple(effects), label=f"random-ic-{dim}")
        if povm.flags.minimal:
            return povm
        logger.debug(f"random_minimal_ic 第 {attempt} 次尝试得到线性相关的效应元，重新采样")

    raise GenerationError(f"random_minimal_ic 在 {retries} 次尝试后仍未得到极小IC")


def trivial_quasi_povm(dim: int, weights: Sequence[float]) -> QuasiPovm:
    """平凡族：E_i = w_i I"""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0:
        raise ValidationError("权重必须是非空一维列表")
    total = float(np.sum(weights))
    if abs(total - 1) > get_settings().WEIGHT_TOL:
        raise ValidationError(f"权重之和必须为1，得到 {total:.15g}")
    effects = tuple(w * np.eye(dim) for w in weights)
    return QuasiPovm(dim, effects, label=f"trivial-{dim}")


HERMITIAN_BASIS_COEFFICIENT = 0.5


def hermitian_basis_quasi_povm(dim: int) -> QuasiPovm:
    """由广义 Gell-Mann 基构造的拟POVM

    E_k = I/d^2 + c B_k，c = 1/2；E_0 = I/d^2 - c sum_k B_k 吸收无迹部分使总和为 I。
    """
    if dim < 2:
        raise DimensionError(f"hermitian_basis_quasi_povm 需要 dim >= 2，得到 {dim}")
    base = np.eye(dim) / dim ** 2
    basis = gellmann_basis(dim)
    first = base - HERMITIAN_BASIS_COEFFICIENT * sum(basis)
    effects = [first] + [base + HERMITIAN_BASIS_COEFFICIENT * b for b in basis]
    return QuasiPovm(dim, tuple(effects), label=f"hermitian-basis-{dim}")


def product_povm(first: QuasiPovm, second: QuasiPovm) -> QuasiPovm:
    """积族 {E_i (x) F_k}，按 kron 顺序排列"""
    effects = tuple(kron(e, f) for e in first.effects for f in second.effects)
    return QuasiPovm(
        first.dim * second.dim,
        effects,
        label=f"{first.label}x{second.label}",
        identifier=tensor_ids(first.povm_id, second.povm_id),
    )


POVM_KINDS = ('sic', 'tetrahedron', 'random', 'trivial', 'hermitian', 'six-state', 'basis', 'unit')


def build_povm(kind: str, dim: int = 2, seed: SeedLike = None,
               weights: Optional[Sequence[float]] = None) -> QuasiPovm:
    """按种类构造目录中的拟POVM（CLI 使用）"""
    if kind == 'sic':
        return tetrahedron_povm() if dim == 2 else wh_sic(dim)
    if kind == 'tetrahedron':
        return tetrahedron_povm()
    if kind == 'random':
        return random_minimal_ic(dim, seed)
    if kind == 'trivial':
        if weights is None:
            weights = [1 / dim ** 2] * dim ** 2
        return trivial_quasi_povm(dim, weights)
    if kind == 'hermitian':
        return hermitian_basis_quasi_povm(dim)
    if kind == 'six-state':
        return six_state_povm()
    if kind == 'basis':
        return computational_basis_povm(dim)
    if kind == 'unit':
        return unit_povm()
    raise ValidationError(f"未知的 POVM 种类: {kind}，可选 {', '.join(POVM_KINDS)}")


class PovmFamily:
    """每个维度选定一个拟POVM的族

    显式指定的成员优先；其余维度按 kind 生成并缓存。维度 1 总是 {1}。
    """

    def __init__(self, kind: str = 'sic', seed: int = 0,
                 members: Optional[Mapping[int, QuasiPovm]] = None, strict: bool = False):
        if kind not in ('sic', 'random'):
            raise ValidationError(f"族的种类只能是 sic 或 random，得到 {kind}")
        self.kind = kind
        self.seed = seed
        self._members: Dict[int, QuasiPovm] = dict(members or {})
        self.strict = strict

    def __call__(self, dim: int) -> QuasiPovm:
        if dim not in self._members:
            if self.strict and dim != 1:
                raise ValidationError(f"族中缺少维度 {dim} 的POVM")
            self._members[dim] = self._generate(dim)
        return self._members[dim]

    def _generate(self, dim: int) -> QuasiPovm:
        if dim == 1:
            return unit_povm()
        if self.kind == 'sic':
            if dim == 2:
                return tetrahedron_povm()
            if dim == 3:
                return wh_sic(3)
            logger.debug(f"维度 {dim} 没有内置 SIC，族改用随机极小IC")
        return random_minimal_ic(dim, [self.seed, dim])

    def __repr__(self) -> str:
        return f"<PovmFamily {self.kind} seed={self.seed} dims={sorted(self._members)}>"


FamilyLike = Union[PovmFamily, QuasiPovm, Mapping[int, QuasiPovm], Callable[[int], QuasiPovm]]


def as_family(family: FamilyLike) -> Callable[[int], QuasiPovm]:
    """把单个POVM、字典或可调用对象统一为 dim -> QuasiPovm"""
    if isinstance(family, QuasiPovm):
        return PovmFamily(members={family.dim: family}, strict=True)
    if isinstance(family, Mapping):
        return PovmFamily(members=family, strict=True)
    if callable(family):
        return family
    raise ValidationError(f"无法解释为POVM族: {family!r}")


def povm_family(kind: str = 'sic', seed: int = 0,
                members: Optional[Mapping[int, QuasiPovm]] = None) -> PovmFamily:
    """非严格族：members 优先，其余维度按 kind 生成"""
    return PovmFamily(kind, seed, members)
