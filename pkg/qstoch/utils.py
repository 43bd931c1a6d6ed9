"""
qstoch 工具函数模块

JSON 编解码、文件读写与试验种子派生
"""

import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .exceptions import SchemaError, ValidationError
from .schemas import (
    ChannelSchema, LawReportSchema, MatrixSchema, MeasurementSchema,
    PovmSchema, QRepSchema, StateSchema,
)


def content_hash(*parts: Any) -> str:
    """sha256 内容摘要的前16位十六进制；数组按字节，其余按 str"""
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            digest.update(np.ascontiguousarray(part).tobytes())
        else:
            digest.update(str(part).encode('utf-8'))
    return digest.hexdigest()[:16]


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """第 index 次试验的随机数生成器（固定计数器方案）"""
    return np.random.default_rng([int(seed), int(index)])


def matrix_to_json(matrix: np.ndarray) -> Dict[str, Any]:
    """复矩阵 -> {"rows", "cols", "data": [[re, im], ...]}"""
    matrix = np.asarray(matrix, dtype=np.complex128)
    rows, cols = matrix.shape
    return {
        'rows': int(rows),
        'cols': int(cols),
        'data': [[float(z.real), float(z.imag)] for z in matrix.reshape(-1)],
    }


def _matrix_from_clean(cleaned: Dict[str, Any]) -> np.ndarray:
    return np.array(cleaned['data'], dtype=np.complex128).reshape(cleaned['rows'], cleaned['cols'])


def matrix_from_json(data: Any, path: str = "$") -> np.ndarray:
    from .matrix_core import as_matrix
    return as_matrix(_matrix_from_clean(MatrixSchema.validate(data, path)))


def _wrap_validation(func, path: str):
    """把领域验证错误映射为带路径的 SchemaError"""
    try:
        return func()
    except SchemaError:
        raise
    except ValidationError as e:
        raise SchemaError(e.message, path)


def state_to_json(rho) -> Dict[str, Any]:
    return {'dim': rho.dim, 'matrix': matrix_to_json(rho.matrix)}


def state_from_json(data: Any, path: str = "$"):
    from .quantum import State
    cleaned = StateSchema.validate(data, path)
    return _wrap_validation(lambda: State(cleaned['dim'], _matrix_from_clean(cleaned['matrix'])), path)


def channel_to_json(phi) -> Dict[str, Any]:
    return {
        'dim_in': phi.dim_in,
        'dim_out': phi.dim_out,
        'kraus': [matrix_to_json(k) for k in phi.kraus],
    }


def channel_from_json(data: Any, path: str = "$"):
    from .quantum import Channel
    cleaned = ChannelSchema.validate(data, path)
    kraus = tuple(_matrix_from_clean(k) for k in cleaned['kraus'])
    return _wrap_validation(lambda: Channel(cleaned['dim_in'], cleaned['dim_out'], kraus), path)


def measurement_to_json(meas) -> Dict[str, Any]:
    return {'dim': meas.dim, 'effects': [matrix_to_json(a) for a in meas.effects]}


def measurement_from_json(data: Any, path: str = "$"):
    from .quantum import Measurement
    cleaned = MeasurementSchema.validate(data, path)
    effects = tuple(_matrix_from_clean(a) for a in cleaned['effects'])
    return _wrap_validation(lambda: Measurement(cleaned['dim'], effects), path)


def povm_to_json(povm) -> Dict[str, Any]:
    return {
        'dim': povm.dim,
        'label': povm.label,
        'id': povm.povm_id,
        'effects': [matrix_to_json(e) for e in povm.effects],
        'flags': povm.flags.to_dict(),
    }


def povm_from_json(data: Any, path: str = "$"):
    """读取POVM；写出的 flags 只作参考，总是重新计算"""
    from .povm_catalog import QuasiPovm
    cleaned = PovmSchema.validate(data, path)
    effects = tuple(_matrix_from_clean(e) for e in cleaned['effects'])

    def build():
        povm = QuasiPovm(cleaned['dim'], effects, label=cleaned['label'])
        # 积族等带显式标识符的族在文件中保留其标识符
        if cleaned['id'] and cleaned['id'] != povm.povm_id:
            povm = QuasiPovm(cleaned['dim'], effects, label=cleaned['label'], identifier=cleaned['id'])
        return povm

    return _wrap_validation(build, path)


def qrep_to_json(rep) -> Dict[str, Any]:
    return {
        'rows': rep.rows,
        'cols': rep.cols,
        'matrix': [[float(x) for x in row] for row in rep.matrix],
        'in_povm': rep.in_povm_id,
        'out_povm': rep.out_povm_id,
        'kind': rep.kind,
        'frame': rep.frame,
    }


def qrep_from_json(data: Any, path: str = "$"):
    from .representation import QRep
    cleaned = QRepSchema.validate(data, path)
    return _wrap_validation(lambda: QRep(
        matrix=np.array(cleaned['matrix'], dtype=np.float64),
        in_povm_id=cleaned['in_povm'],
        out_povm_id=cleaned['out_povm'],
        kind=cleaned['kind'],
        frame=cleaned['frame'],
    ), path)


def report_to_json(report) -> Dict[str, Any]:
    return report.to_dict()


def report_from_json(data: Any, path: str = "$"):
    from .verify import LawReport
    cleaned = LawReportSchema.validate(data, path)
    return LawReport(
        law=cleaned['law'],
        trials=cleaned['trials'],
        max_residual=cleaned['max_residual'],
        tolerance=cleaned['tolerance'],
        passed=cleaned['passed'],
        seed=cleaned['seed'],
        details=tuple(cleaned['details']),
        mean_residual=cleaned['mean_residual'],
        components=dict(cleaned['components'] or {}),
        extra=dict(cleaned['extra'] or {}),
    )


def read_json(path: Union[str, Path]) -> Any:
    """读取 JSON 文件"""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"文件不存在: {path}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"JSON 解析失败: {e.msg} (行 {e.lineno})", str(path))


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, allow_nan=False)


def write_json(obj: Any, path: Optional[Union[str, Path]] = None):
    """写出 JSON；path 为 None 时写到标准输出"""
    text = dumps(obj)
    if path is None:
        sys.stdout.write(text + "\n")
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding='utf-8')
