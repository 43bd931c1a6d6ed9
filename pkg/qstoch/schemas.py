"""
qstoch 模式模块

声明式的 JSON 文件结构验证：字段类描述每个键，元类收集字段，
验证失败时抛出带 JSON 路径的 SchemaError。
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Type

from .exceptions import SchemaError


_MISSING = object()


class Field:
    """字段基类"""

    def __init__(self, required: bool = True, default: Any = None, nullable: bool = False):
        self.required = required
        self.default = default
        self.nullable = nullable
        self.name = None

    def validate(self, value: Any, path: str) -> Any:
        if value is _MISSING:
            if self.required:
                raise SchemaError("缺少必需字段", path)
            return self.default
        if value is None:
            if not self.nullable:
                raise SchemaError("字段不能为 null", path)
            return None
        return self.to_python(value, path)

    def to_python(self, value: Any, path: str) -> Any:
        return value


class IntegerField(Field):
    """整数字段"""

    def __init__(self, min_value: Optional[int] = None, **kwargs):
        super().__init__(**kwargs)
        self.min_value = min_value

    def to_python(self, value: Any, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"应为整数，得到 {type(value).__name__}", path)
        if self.min_value is not None and value < self.min_value:
            raise SchemaError(f"应 >= {self.min_value}，得到 {value}", path)
        return value


class FloatField(Field):
    """有限实数字段"""

    def to_python(self, value: Any, path: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"应为数值，得到 {type(value).__name__}", path)
        value = float(value)
        if not math.isfinite(value):
            raise SchemaError("数值必须有限", path)
        return value


class BooleanField(Field):
    """布尔字段"""

    def to_python(self, value: Any, path: str) -> bool:
        if not isinstance(value, bool):
            raise SchemaError(f"应为布尔值，得到 {type(value).__name__}", path)
        return value


class CharField(Field):
    """字符串字段"""

    def to_python(self, value: Any, path: str) -> str:
        if not isinstance(value, str):
            raise SchemaError(f"应为字符串，得到 {type(value).__name__}", path)
        return value


class ChoiceField(CharField):
    """枚举字符串字段"""

    def __init__(self, choices: Sequence[str], **kwargs):
        super().__init__(**kwargs)
        self.choices = tuple(choices)

    def to_python(self, value: Any, path: str) -> str:
        value = super().to_python(value, path)
        if value not in self.choices:
            raise SchemaError(f"应为 {'/'.join(self.choices)} 之一，得到 {value!r}", path)
        return value


class ListField(Field):
    """列表字段，逐元素用 item 字段验证"""

    def __init__(self, item: Field, min_length: int = 0, **kwargs):
        super().__init__(**kwargs)
        self.item = item
        self.min_length = min_length

    def to_python(self, value: Any, path: str) -> List[Any]:
        if not isinstance(value, list):
            raise SchemaError(f"应为列表，得到 {type(value).__name__}", path)
        if len(value) < self.min_length:
            raise SchemaError(f"至少需要 {self.min_length} 个元素，得到 {len(value)}", path)
        return [self.item.validate(v, f"{path}[{i}]") for i, v in enumerate(value)]


class DictField(Field):
    """任意 JSON 对象字段"""

    def to_python(self, value: Any, path: str) -> Dict[str, Any]:
        if not isinstance(value, dict):
            raise SchemaError(f"应为对象，得到 {type(value).__name__}", path)
        return value


class NestedField(Field):
    """嵌套模式字段"""

    def __init__(self, schema: Type['Schema'], **kwargs):
        super().__init__(**kwargs)
        self.schema = schema

    def to_python(self, value: Any, path: str) -> Dict[str, Any]:
        return self.schema.validate(value, path)


class SchemaMeta(type):
    """模式元类：收集字段定义（包括基类的字段）"""

    def __new__(cls, name, bases, attrs):
        fields = {}
        for base in bases:
            fields.update(getattr(base, '_fields', {}))
        for key, value in attrs.items():
            if isinstance(value, Field):
                value.name = key
                fields[key] = value

        new_class = super().__new__(cls, name, bases, attrs)
        new_class._fields = fields
        return new_class


class Schema(metaclass=SchemaMeta):
    """模式基类"""

    @classmethod
    def validate(cls, data: Any, path: str = "$") -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise SchemaError(f"应为对象，得到 {type(data).__name__}", path)

        cleaned = {}
        for field_name, field in cls._fields.items():
            value = data.get(field_name, _MISSING)
            cleaned[field_name] = field.validate(value, f"{path}.{field_name}")

        cls.check(cleaned, path)
        return cleaned

    @classmethod
    def check(cls, cleaned: Dict[str, Any], path: str):
        """跨字段约束，子类覆盖"""
        pass


class ComplexEntryField(Field):
    """复数条目 [re, im]"""

    def to_python(self, value: Any, path: str) -> complex:
        if not isinstance(value, list) or len(value) != 2:
            raise SchemaError("复数条目应为 [re, im]", path)
        re = FloatField().validate(value[0], f"{path}[0]")
        im = FloatField().validate(value[1], f"{path}[1]")
        return complex(re, im)


class MatrixSchema(Schema):
    """{"rows": n, "cols": m, "data": [[re, im], ...]}，行优先"""

    rows = IntegerField(min_value=1)
    cols = IntegerField(min_value=1)
    data = ListField(ComplexEntryField())

    @classmethod
    def check(cls, cleaned, path):
        expected = cleaned['rows'] * cleaned['cols']
        if len(cleaned['data']) != expected:
            raise SchemaError(f"条目数应为 rows x cols = {expected}，得到 {len(cleaned['data'])}", f"{path}.data")


class RealRowsField(Field):
    """实矩阵 [[real, ...], ...]"""

    def to_python(self, value: Any, path: str) -> List[List[float]]:
        rows = ListField(ListField(FloatField(), min_length=1), min_length=1).validate(value, path)
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise SchemaError(f"行长度应为 {width}，得到 {len(row)}", f"{path}[{i}]")
        return rows


def _check_square(matrix: Dict[str, Any], size: int, path: str):
    if (matrix['rows'], matrix['cols']) != (size, size):
        raise SchemaError(f"应为 {size}x{size} 矩阵，得到 {matrix['rows']}x{matrix['cols']}", path)


class StateSchema(Schema):
    """{"dim": n, "matrix": matrix}"""

    dim = IntegerField(min_value=1)
    matrix = NestedField(MatrixSchema)

    @classmethod
    def check(cls, cleaned, path):
        _check_square(cleaned['matrix'], cleaned['dim'], f"{path}.matrix")


class ChannelSchema(Schema):
    """{"dim_in": n, "dim_out": m, "kraus": [matrix, ...]}"""

    dim_in = IntegerField(min_value=1)
    dim_out = IntegerField(min_value=1)
    kraus = ListField(NestedField(MatrixSchema), min_length=1)

    @classmethod
    def check(cls, cleaned, path):
        shape = (cleaned['dim_out'], cleaned['dim_in'])
        for i, k in enumerate(cleaned['kraus']):
            if (k['rows'], k['cols']) != shape:
                raise SchemaError(
                    f"Kraus 算符应为 {shape[0]}x{shape[1]}，得到 {k['rows']}x{k['cols']}",
                    f"{path}.kraus[{i}]",
                )


class MeasurementSchema(Schema):
    """{"dim": n, "effects": [matrix, ...]}"""

    dim = IntegerField(min_value=1)
    effects = ListField(NestedField(MatrixSchema), min_length=1)

    @classmethod
    def check(cls, cleaned, path):
        for i, effect in enumerate(cleaned['effects']):
            _check_square(effect, cleaned['dim'], f"{path}.effects[{i}]")


class PovmSchema(MeasurementSchema):
    """{"dim": n, "effects": [...], "flags": {...}, "label": ..., "id": ...}"""

    flags = DictField(required=False, default=None)
    label = CharField(required=False, default="")
    id = CharField(required=False, default=None, nullable=True)


class QRepSchema(Schema):
    """{"rows", "cols", "matrix", "in_povm", "out_povm", "kind", "frame"}"""

    rows = IntegerField(min_value=1)
    cols = IntegerField(min_value=1)
    matrix = RealRowsField()
    in_povm = CharField()
    out_povm = CharField()
    kind = ChoiceField(('state', 'channel', 'measurement'))
    frame = ChoiceField(('qstoch_t', 'right', 'left'), required=False, default='qstoch_t')

    @classmethod
    def check(cls, cleaned, path):
        matrix = cleaned['matrix']
        if (len(matrix), len(matrix[0])) != (cleaned['rows'], cleaned['cols']):
            raise SchemaError(
                f"矩阵形状应为 {cleaned['rows']}x{cleaned['cols']}，得到 {len(matrix)}x{len(matrix[0])}",
                f"{path}.matrix",
            )
        if cleaned['kind'] == 'state' and cleaned['cols'] != 1:
            raise SchemaError("state 类型的表示只能有一列", f"{path}.cols")


class LawReportSchema(Schema):
    """验证报告"""

    law = CharField()
    trials = IntegerField(min_value=0)
    max_residual = FloatField()
    mean_residual = FloatField(required=False, default=0.0)
    tolerance = FloatField()
    passed = BooleanField()
    seed = IntegerField()
    details = ListField(FloatField())
    components = DictField(required=False, default=None)
    extra = DictField(required=False, default=None)

    @classmethod
    def check(cls, cleaned, path):
        if cleaned['passed'] != (cleaned['max_residual'] < cleaned['tolerance']):
            raise SchemaError("passed 必须等价于 max_residual < tolerance", f"{path}.passed")
