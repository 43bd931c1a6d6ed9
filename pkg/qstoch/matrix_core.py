"""
qstoch 矩阵核心模块

稠密复矩阵原语：所有其他模块都建立在这里之上。

约定：
- 矩阵是只读的 numpy complex128 二维数组，行优先存储；
- Kronecker 积的复合行指标为 i_a * r_b + i_b（即 numpy.kron 的约定）；
- 所有验证容差都是最大元素范数下的绝对值。
"""

import logging
from typing import Any, NamedTuple, Optional

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, SingularityError, ValidationError
from .settings import get_settings


logger = logging.getLogger(__name__)


class HermitianDecomposition(NamedTuple):
    """厄米矩阵的谱分解：升序实特征值与列为特征向量的幺正矩阵"""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """返回 V D V†"""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def freeze(array: np.ndarray) -> np.ndarray:
    """将数组设置为只读并返回"""
    array.setflags(write=False)
    return array


def as_matrix(data: Any, dtype=np.complex128) -> np.ndarray:
    """构造并验证一个矩阵

    接受嵌套列表或数组，返回只读的连续二维数组。
    """
    try:
        matrix = np.array(data, dtype=dtype, copy=True)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"无法转换为矩阵: {e}")

    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValidationError(f"矩阵必须是非空二维数组，得到形状 {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError("矩阵包含 NaN 或 Inf")

    return freeze(np.ascontiguousarray(matrix))


def as_real_matrix(data: Any) -> np.ndarray:
    """构造并验证一个实矩阵"""
    return as_matrix(data, dtype=np.float64)


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    """最大元素范数下的距离"""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"形状不匹配: {a.shape} 与 {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def is_hermitian(a: np.ndarray, tol: Optional[float] = None) -> bool:
    """判断矩阵是否在容差内厄米"""
    if tol is None:
        tol = get_settings().HERMITIAN_TOL
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return max_abs_diff(a, a.conj().T) <= tol


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt 内积 tr(a b†)"""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"Hilbert-Schmidt 内积形状不匹配: {a.shape} 与 {b.shape}")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"Hilbert-Schmidt 内积需要方阵，得到 {a.shape}")
    return complex(np.vdot(b, a))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker 积，复合行指标 i_a * r_b + i_b"""
    return freeze(np.kron(np.asarray(a), np.asarray(b)))


def eig_hermitian(a: np.ndarray) -> HermitianDecomposition:
    """厄米矩阵的谱分解（升序特征值）"""
    a = np.asarray(a)
    if not is_hermitian(a):
        raise ValidationError("eig_hermitian 需要厄米矩阵")

    # 对称化以消除舍入引入的反厄米分量
    eigenvalues, eigenvectors = scipy.linalg.eigh((a + a.conj().T) / 2)
    return HermitianDecomposition(freeze(eigenvalues), freeze(eigenvectors))


def pinv(a: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """Moore-Penrose 伪逆

    小于 tol * sigma_max 的奇异值视为零；满秩时等于真逆。
    """
    if tol is None:
        tol = get_settings().PINV_RTOL
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"pinv 需要方阵，得到 {a.shape}")
    return freeze(np.linalg.pinv(a, rcond=tol))


def sqrt_inv_psd(a: np.ndarray) -> np.ndarray:
    """正定厄米矩阵的 -1/2 次幂"""
    decomposition = eig_hermitian(a)
    smallest = float(decomposition.eigenvalues[0])
    if smallest < get_settings().PSD_TOL:
        raise SingularityError(f"矩阵不是正定的：最小特征值 {smallest:.3e}")

    v = decomposition.eigenvectors
    result = (v / np.sqrt(decomposition.eigenvalues)) @ v.conj().T
    return freeze((result + result.conj().T) / 2)


def singular_values(a: np.ndarray) -> np.ndarray:
    """降序奇异值"""
    return scipy.linalg.svdvals(np.asarray(a))


def numerical_rank(a: np.ndarray, tol: float) -> int:
    """数值秩：大于绝对阈值 tol 的奇异值个数"""
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return int(np.sum(singular_values(a) > tol))


def gellmann_basis(dim: int) -> list:
    """广义 Gell-Mann 基

    d^2 - 1 个无迹厄米矩阵，tr(B_j B_k) = 2 delta_jk；
    顺序为对称、反对称、对角。
    """
    if dim < 1:
        raise DimensionError(f"维度必须为正整数，得到 {dim}")

    symmetric, antisymmetric, diagonal = [], [], []
    for j in range(dim):
        for k in range(j + 1, dim):
            s = np.zeros((dim, dim), dtype=np.complex128)
            s[j, k] = s[k, j] = 1
            symmetric.append(freeze(s))

            t = np.zeros((dim, dim), dtype=np.complex128)
            t[j, k] = -1j
            t[k, j] = 1j
            antisymmetric.append(freeze(t))

    for l in range(1, dim):
        d = np.zeros((dim, dim), dtype=np.complex128)
        d[np.arange(l), np.arange(l)] = 1
        d[l, l] = -l
        diagonal.append(freeze(d * np.sqrt(2 / (l * (l + 1)))))

    return symmetric + antisymmetric + diagonal
