"""异常定义 - 按退出码分组"""

from typing import Any, Optional


class RigidityError(Exception):
    """所有实验室异常的基类"""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details


class ConfigError(RigidityError):
    """配置解析或校验失败"""

    exit_code = 2


class NumericalError(RigidityError):
    """数值过程失败（不收敛、退化、超出认证范围）"""

    exit_code = 3


class ToleranceViolation(RigidityError):
    """验证实验中的容差违例"""

    exit_code = 4


# --- 模型 ---


class ModelError(NumericalError):
    """映射模型不满足标准假设"""


class SingularMatrixError(NumericalError):
    """矩阵奇异"""


class InverseConvergenceError(NumericalError):
    """Newton 求逆不收敛，通常意味着扰动离开了认证邻域"""

    def __init__(self, message: str, residual: float, **details: Any):
        super().__init__(message, residual=residual, **details)
        self.residual = residual


# --- 不变结构 ---


class SplittingConvergenceError(NumericalError):
    """分裂在迭代预算内未收敛"""


class FrameDegeneracyError(NumericalError):
    """投影标架退化"""


class ChartRadiusError(NumericalError):
    """叶片坐标卡半径过大，附带最大可认证半径"""

    def __init__(self, message: str, max_certified_radius: float, **details: Any):
        super().__init__(message, max_certified_radius=max_certified_radius, **details)
        self.max_certified_radius = max_certified_radius


class LeafCertificationError(NumericalError):
    """两点不在同一叶片上"""


class ExtensionRangeError(NumericalError):
    """稳定完整映射的延拓超出认证范围"""


class IntersectionError(NumericalError):
    """叶片交点的 Newton 迭代不收敛"""


class HomoclinicSearchError(NumericalError):
    """搜索预算内未找到同宿点"""


# --- 周期轨道 ---


class PeriodicOrbitError(NumericalError):
    """周期点 Newton 迭代失败"""


class ClosingError(NumericalError):
    """多重打靶 Newton 不收敛"""


class PseudoOrbitError(NumericalError):
    """伪轨道过粗，超出闭合引理的 ε"""


class CorrespondenceError(NumericalError):
    """轨道对应关系错误（周期不一致）"""


# --- 余圈 ---


class CocycleError(NumericalError):
    """余圈取值奇异"""


class HolonomyConvergenceError(NumericalError):
    """完整量在最大步数内未达到 Cauchy 容差"""

    def __init__(self, message: str, cauchy_gap: float, **details: Any):
        super().__init__(message, cauchy_gap=cauchy_gap, **details)
        self.cauchy_gap = cauchy_gap


# --- Parry 表示 ---


class WordError(NumericalError):
    """Parry 字不合法"""


class ConjugatorNotFoundError(NumericalError):
    """迹匹配但找不到共轭矩阵"""


class ReducibleRepresentationError(NumericalError):
    """输入表示可约"""


class CrossValidationError(ToleranceViolation):
    """两种独立算法结果不一致"""


class ClassificationRefused(ToleranceViolation):
    """群分类的前提（椭圆迹窗口）不成立"""


class PathDependenceError(ToleranceViolation):
    """共轭场沿不同路径延拓结果不一致"""

    def __init__(self, message: str, disagreement: float, **details: Any):
        super().__init__(message, disagreement=disagreement, **details)
        self.disagreement = disagreement


class TraceMismatchError(ToleranceViolation):
    """周期迹或 Parry 字迹不匹配"""

    def __init__(self, message: str, witness: Optional[dict] = None, **details: Any):
        super().__init__(message, witness=witness, **details)
        self.witness = witness
