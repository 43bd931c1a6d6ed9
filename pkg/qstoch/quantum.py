"""
qstoch 量子模块

CPTP 范畴的量子侧对象：态、测量、Kraus 形式的信道，
以及它们的验证、复合、张量积与伴随。

M_1 = C 用 1x1 矩阵表示，因此态可以直接看作信道 1 -> n。
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import AdjointUndefinedError, DimensionError, ValidationError
from .matrix_core import (
    as_matrix, eig_hermitian, freeze, is_hermitian, kron, max_abs_diff,
)
from .settings import get_settings


logger = logging.getLogger(__name__)

SeedLike = Union[int, Sequence[int], np.random.Generator, None]


def as_rng(seed: SeedLike) -> np.random.Generator:
    """把整数种子或生成器统一为 numpy Generator"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class State:
    """密度矩阵：厄米、半正定、迹为1"""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = as_matrix(self.matrix)
        object.__setattr__(self, 'matrix', matrix)
        validate_state_matrix(matrix, self.dim)

    @classmethod
    def from_matrix(cls, matrix) -> 'State':
        matrix = as_matrix(matrix)
        return cls(matrix.shape[0], matrix)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return eig_hermitian(self.matrix).eigenvalues

    @property
    def purity(self) -> float:
        """tr(rho^2)"""
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.dim, self.matrix.tobytes()))


def validate_state_matrix(matrix: np.ndarray, dim: int):
    """检查密度矩阵的全部约束"""
    settings = get_settings()

    if matrix.shape != (dim, dim):
        raise DimensionError(f"态的矩阵形状应为 {(dim, dim)}，得到 {matrix.shape}")
    if not is_hermitian(matrix, settings.HERMITIAN_TOL):
        raise ValidationError("态必须是厄米矩阵")

    trace = complex(np.trace(matrix))
    if abs(trace - 1) > settings.TRACE_TOL:
        raise ValidationError(f"态的迹必须为1，得到 {trace:.12g}")

    smallest = float(eig_hermitian(matrix).eigenvalues[0])
    if smallest < -settings.PSD_TOL:
        raise ValidationError(f"态必须半正定：最小特征值 {smallest:.3e}")


def pure_state(vector) -> State:
    """由（自动归一化的）态矢量构造纯态"""
    psi = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValidationError("零向量不能表示态")
    psi = psi / norm
    return State(psi.shape[0], np.outer(psi, psi.conj()))


def maximally_mixed_state(dim: int) -> State:
    return State(dim, np.eye(dim) / dim)


def random_state(dim: int, seed: SeedLike = None) -> State:
    """随机态 G G† / tr(G G†)，G 为复高斯矩阵"""
    if dim < 1:
        raise DimensionError(f"维度必须为正整数，得到 {dim}")
    rng = as_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return State(dim, rho / np.real(np.trace(rho)))


@dataclass(frozen=True)
class Measurement:
    """POVM 测量 {A_k}：0 <= A_k <= I 且求和为 I"""

    dim: int
    effects: Tuple[np.ndarray, ...]

    def __post_init__(self):
        settings = get_settings()
        effects = tuple(as_matrix(e) for e in self.effects)
        object.__setattr__(self, 'effects', effects)

        if not effects:
            raise ValidationError("测量至少需要一个效应元")

        identity = np.eye(self.dim)
        for k, effect in enumerate(effects):
            if effect.shape != (self.dim, self.dim):
                raise DimensionError(f"效应元 {k} 的形状应为 {(self.dim, self.dim)}，得到 {effect.shape}")
            if not is_hermitian(effect, settings.HERMITIAN_TOL):
                raise ValidationError(f"效应元 {k} 不是厄米矩阵")
            eigenvalues = eig_hermitian(effect).eigenvalues
            if eigenvalues[0] < -settings.PSD_TOL or eigenvalues[-1] > 1 + settings.PSD_TOL:
                raise ValidationError(f"效应元 {k} 不满足 0 <= A <= I")

        deviation = max_abs_diff(sum(effects), identity)
        if deviation > settings.TRACE_TOL:
            raise ValidationError(f"效应元之和偏离单位矩阵 {deviation:.3e}")

    @property
    def outcome_count(self) -> int:
        return len(self.effects)

    def __eq__(self, other):
        if not isinstance(other, Measurement):
            return NotImplemented
        return (self.dim == other.dim and len(self.effects) == len(other.effects)
                and all(np.array_equal(a, b) for a, b in zip(self.effects, other.effects)))

    __hash__ = object.__hash__


def born_probabilities(meas: Measurement, rho: State) -> np.ndarray:
    """玻恩规则 tr(A_k rho)"""
    if meas.dim != rho.dim:
        raise DimensionError(f"测量维度 {meas.dim} 与态维度 {rho.dim} 不匹配")
    return np.array([np.real(np.trace(a @ rho.matrix)) for a in meas.effects])


def basis_measurement(dim: int) -> Measurement:
    """计算基测量 {|k><k|}"""
    effects = []
    for k in range(dim):
        e = np.zeros((dim, dim))
        e[k, k] = 1
        effects.append(e)
    return Measurement(dim, tuple(effects))


@dataclass(frozen=True)
class Channel:
    """Kraus 形式的 CPTP 映射 M_{dim_in} -> M_{dim_out}"""

    dim_in: int
    dim_out: int
    kraus: Tuple[np.ndarray, ...]

    def __post_init__(self):
        kraus = tuple(as_matrix(k) for k in self.kraus)
        object.__setattr__(self, 'kraus', kraus)
        validate_channel(self)

    @property
    def kraus_count(self) -> int:
        return len(self.kraus)

    @cached_property
    def choi(self) -> np.ndarray:
        return choi_matrix(self)

    def __call__(self, rho: State) -> State:
        return apply_channel(self, rho)

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return (self.dim_in == other.dim_in and self.dim_out == other.dim_out
                and len(self.kraus) == len(other.kraus)
                and all(np.array_equal(a, b) for a, b in zip(self.kraus, other.kraus)))

    __hash__ = object.__hash__


def validate_channel(phi: Channel):
    """检查 Kraus 形状、保迹性与完全正性"""
    settings = get_settings()

    if phi.dim_in < 1 or phi.dim_out < 1:
        raise DimensionError(f"信道维度必须为正整数，得到 {phi.dim_in} -> {phi.dim_out}")
    if not phi.kraus:
        raise ValidationError("信道至少需要一个 Kraus 算符")

    for i, k in enumerate(phi.kraus):
        if k.shape != (phi.dim_out, phi.dim_in):
            raise DimensionError(
                f"Kraus 算符 {i} 的形状应为 {(phi.dim_out, phi.dim_in)}，得到 {k.shape}"
            )

    gram = sum(k.conj().T @ k for k in phi.kraus)
    deviation = max_abs_diff(gram, np.eye(phi.dim_in))
    if deviation > settings.TP_TOL:
        raise ValidationError(f"信道不保迹：sum K†K 偏离单位矩阵 {deviation:.3e}")

    smallest = float(eig_hermitian(choi_matrix(phi)).eigenvalues[0])
    if smallest < -settings.PSD_TOL:
        raise ValidationError(f"信道不是完全正的：Choi 最小特征值 {smallest:.3e}")


def choi_matrix(phi: Channel) -> np.ndarray:
    """Choi 矩阵 sum_ij |i><j| (x) Phi(|i><j|)，输入在前"""
    size = phi.dim_in * phi.dim_out
    choi = np.zeros((size, size), dtype=np.complex128)
    for k in phi.kraus:
        v = k.T.reshape(-1)
        choi += np.outer(v, v.conj())
    return freeze(choi)


def channel_action(phi: Channel, x: np.ndarray) -> np.ndarray:
    """信道在任意矩阵上的线性作用 sum K X K†"""
    x = np.asarray(x)
    if x.shape != (phi.dim_in, phi.dim_in):
        raise DimensionError(f"输入形状应为 {(phi.dim_in, phi.dim_in)}，得到 {x.shape}")
    return sum(k @ x @ k.conj().T for k in phi.kraus)


def apply_channel(phi: Channel, rho: State) -> State:
    """Phi(rho)"""
    if rho.dim != phi.dim_in:
        raise DimensionError(f"态维度 {rho.dim} 与信道输入维度 {phi.dim_in} 不匹配")
    sigma = channel_action(phi, rho.matrix)
    return State(phi.dim_out, (sigma + sigma.conj().T) / 2)


def compose_channels(psi: Channel, phi: Channel) -> Channel:
    """顺序复合 Psi o Phi，Kraus 集 {L_j K_i}"""
    if phi.dim_out != psi.dim_in:
        raise DimensionError(f"无法复合：Phi 输出维度 {phi.dim_out} 与 Psi 输入维度 {psi.dim_in} 不匹配")
    kraus = tuple(l @ k for l in psi.kraus for k in phi.kraus)
    return Channel(phi.dim_in, psi.dim_out, kraus)


def tensor_channels(phi1: Channel, phi2: Channel) -> Channel:
    """并行复合 Phi1 (x) Phi2，Kraus 集 {K_i (x) L_j}"""
    kraus = tuple(kron(k, l) for k in phi1.kraus for l in phi2.kraus)
    return Channel(phi1.dim_in * phi2.dim_in, phi1.dim_out * phi2.dim_out, kraus)


def is_unital(phi: Channel) -> bool:
    """sum K K† = I"""
    if phi.dim_in != phi.dim_out:
        raise DimensionError("只有方信道才能讨论幺正性")
    gram = sum(k @ k.conj().T for k in phi.kraus)
    return max_abs_diff(gram, np.eye(phi.dim_out)) <= get_settings().UNITAL_TOL


def adjoint_channel(phi: Channel) -> Channel:
    """Hilbert-Schmidt 伴随，只对幺正方信道定义"""
    if phi.dim_in != phi.dim_out:
        raise AdjointUndefinedError(f"非方信道 {phi.dim_in} -> {phi.dim_out} 的伴随不是信道")
    if not is_unital(phi):
        raise AdjointUndefinedError("非幺正信道的伴随不保迹")
    return Channel(phi.dim_out, phi.dim_in, tuple(k.conj().T for k in phi.kraus))


def mix_channels(t: float, phi1: Channel, phi2: Channel) -> Channel:
    """凸组合 t Phi1 + (1 - t) Phi2，通过缩放后的 Kraus 并集实现"""
    if not 0 <= t <= 1:
        raise ValidationError(f"混合权重必须在 [0, 1] 内，得到 {t}")
    if (phi1.dim_in, phi1.dim_out) != (phi2.dim_in, phi2.dim_out):
        raise DimensionError("只能混合同维度的信道")

    kraus: List[np.ndarray] = []
    if t > 0:
        kraus.extend(np.sqrt(t) * k for k in phi1.kraus)
    if t < 1:
        kraus.extend(np.sqrt(1 - t) * k for k in phi2.kraus)
    return Channel(phi1.dim_in, phi1.dim_out, tuple(kraus))


PAULI_X = freeze(np.array([[0, 1], [1, 0]], dtype=np.complex128))
PAULI_Y = freeze(np.array([[0, -1j], [1j, 0]], dtype=np.complex128))
PAULI_Z = freeze(np.array([[1, 0], [0, -1]], dtype=np.complex128))
HADAMARD = freeze(np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2))


def identity_channel(dim: int) -> Channel:
    return Channel(dim, dim, (np.eye(dim),))


def unitary_channel(u) -> Channel:
    """酉共轭 rho -> U rho U†"""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionError(f"酉矩阵必须是方阵，得到 {u.shape}")
    return Channel(u.shape[0], u.shape[0], (u,))


def hadamard() -> Channel:
    return unitary_channel(HADAMARD)


def depolarizing_channel(dim: int, p: float) -> Channel:
    """rho -> (1 - p) rho + p tr(rho) I / d；p = 1 为完全退极化"""
    if not 0 <= p <= 1:
        raise ValidationError(f"退极化概率必须在 [0, 1] 内，得到 {p}")

    kraus = []
    if p < 1:
        kraus.append(np.sqrt(1 - p) * np.eye(dim))
    if p > 0:
        scale = np.sqrt(p / dim)
        for i in range(dim):
            for j in range(dim):
                k = np.zeros((dim, dim))
                k[i, j] = scale
                kraus.append(k)
    return Channel(dim, dim, tuple(kraus))


def amplitude_damping_channel(gamma: float) -> Channel:
    """量子比特振幅阻尼"""
    if not 0 <= gamma <= 1:
        raise ValidationError(f"阻尼率必须在 [0, 1] 内，得到 {gamma}")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return Channel(2, 2, (k0, k1))


def state_as_channel(rho: State) -> Channel:
    """态作为态射 1 -> n：Kraus 为 sqrt(lambda_k)|psi_k>"""
    decomposition = eig_hermitian(rho.matrix)
    kraus = [
        np.sqrt(max(value, 0.0)) * decomposition.eigenvectors[:, [k]]
        for k, value in enumerate(decomposition.eigenvalues)
        if value > 0
    ]
    # 重新归一化以吸收被截断的负特征值
    total = sum(np.real(np.vdot(k, k)) for k in kraus)
    kraus = [k / np.sqrt(total) for k in kraus]
    return Channel(1, rho.dim, tuple(kraus))


def measurement_channel(meas: Measurement) -> Channel:
    """量子-经典信道 rho -> sum_k tr(A_k rho)|k><k|"""
    outcomes = meas.outcome_count
    kraus = []
    for k, effect in enumerate(meas.effects):
        decomposition = eig_hermitian(effect)
        for value, vector in zip(decomposition.eigenvalues, decomposition.eigenvectors.T):
            if value <= 0:
                continue
            op = np.zeros((outcomes, meas.dim), dtype=np.complex128)
            op[k, :] = np.sqrt(value) * vector.conj()
            kraus.append(op)
    return Channel(meas.dim, outcomes, tuple(kraus))


def haar_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar 随机酉矩阵：复高斯矩阵的 QR 分解加相位校正"""
    rng = as_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def haar_isometry(dim_in: int, dim_out: int, seed: SeedLike = None) -> np.ndarray:
    """Haar 随机等距 C^{dim_in} -> C^{dim_out}"""
    if dim_out < dim_in:
        raise DimensionError(f"等距需要 dim_out >= dim_in，得到 {dim_in} -> {dim_out}")
    rng = as_rng(seed)
    z = (rng.standard_normal((dim_out, dim_in)) + 1j * rng.standard_normal((dim_out, dim_in))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_channel(dim_in: int, dim_out: int, kraus_count: int, seed: SeedLike = None) -> Channel:
    """随机信道：把 Haar 等距 C^{dim_in} -> C^{dim_out * kraus_count} 切成 Kraus 算符"""
    if kraus_count < 1:
        raise ValidationError(f"Kraus 个数必须 >= 1，得到 {kraus_count}")
    if dim_out * kraus_count < dim_in:
        raise DimensionError(
            f"{kraus_count} 个 {dim_out}x{dim_in} Kraus 算符无法保迹，需要 dim_out * kraus_count >= dim_in"
        )
    v = haar_isometry(dim_in, dim_out * kraus_count, seed)
    kraus = tuple(v[i * dim_out:(i + 1) * dim_out, :] for i in range(kraus_count))
    return Channel(dim_in, dim_out, kraus)


def random_unital_channel(dim: int, seed: SeedLike = None, count: Optional[int] = None) -> Channel:
    """随机幺正信道：count 个 Haar 酉共轭的均匀混合"""
    if count is None:
        count = get_settings().UNITAL_MIXTURE
    rng = as_rng(seed)
    weight = np.sqrt(1 / count)
    kraus = tuple(weight * haar_unitary(dim, rng) for _ in range(count))
    return Channel(dim, dim, kraus)


def random_kraus_count(dim_in: int, dim_out: int, rng: np.random.Generator, upper: int = 3) -> int:
    """随机抽取一个合法的 Kraus 个数"""
    lower = -(-dim_in // dim_out)
    return int(max(lower, rng.integers(1, upper + 1)))


def sample_channels(dims: Iterable[Tuple[int, int]], rng: np.random.Generator) -> List[Channel]:
    """按顺序为每对 (dim_in, dim_out) 抽取随机信道"""
    return [
        random_channel(n, m, random_kraus_count(n, m, rng), rng)
        for n, m in dims
    ]
