"""
qstoch 异常处理模块

定义库级别的异常，所有异常都带有CLI退出码
"""


class QStochException(Exception):
    """qstoch 基础异常类"""

    exit_code = 2

    def __init__(self, message: str = None):
        self.message = message or self.get_default_message()
        super().__init__(self.message)

    def get_default_message(self):
        """获取默认错误消息"""
        return self.__class__.__name__


class ValidationError(QStochException):
    """数据验证异常（非厄米、非正定、迹不为1等）"""
    pass


class DimensionError(QStochException):
    """维度或形状不匹配"""
    pass


class SingularityError(QStochException):
    """矩阵奇异或接近奇异"""
    pass


class AdjointUndefinedError(QStochException):
    """伴随（dagger）未定义：非幺正或非方阵信道、非双拟随机矩阵"""
    pass


class ConstructionError(QStochException):
    """POVM 构造失败（例如非SIC的基准向量）"""
    pass


class GenerationError(QStochException):
    """随机生成的重试次数已用尽"""
    pass


class NormalizationError(QStochException):
    """效应元的迹为零，无法归一化"""
    pass


class AmbiguityError(QStochException):
    """非极小族上的重建存在歧义"""
    pass


class CompositionError(QStochException):
    """复合的两个表示不属于同一个中间POVM族"""
    pass


class ExtractionError(QStochException):
    """从态映射中提取拟POVM失败"""
    pass


class SchemaError(ValidationError):
    """JSON 文件结构验证失败"""

    def __init__(self, message: str = None, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}" if message else path)
