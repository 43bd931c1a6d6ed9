"""
qstoch 量子理论的拟随机表示

通过极小信息完备POVM把态、信道与测量嵌入拟随机矩阵，并验证其范畴定律
"""

__version__ = "0.1.0"
__author__ = "0716gzs"

from .exceptions import (
    QStochException, ValidationError, DimensionError, SingularityError,
    AdjointUndefinedError, ConstructionError, GenerationError, NormalizationError,
    AmbiguityError, CompositionError, ExtractionError, SchemaError,
)
from .settings import (
    Settings, get_settings, configure, configure_from_file, configure_from_dict,
    create_custom_settings, validate_settings,
)
from .quantum import (
    State, Measurement, Channel, pure_state, maximally_mixed_state, random_state,
    apply_channel, compose_channels, tensor_channels, adjoint_channel, mix_channels,
    identity_channel, unitary_channel, hadamard, depolarizing_channel,
    amplitude_damping_channel, random_channel, random_unital_channel,
)
from .povm_catalog import (
    QuasiPovm, PovmFlags, PovmFamily, povm_family, build_povm, tetrahedron_povm,
    wh_sic, random_minimal_ic, trivial_quasi_povm, hermitian_basis_quasi_povm,
    six_state_povm, product_povm, unit_povm,
)
from .representation import (
    QuasiProbVector, TransitionMatrix, QRep, NaturalIso, transition_matrix,
    represent_state, reconstruct_state, represent_channel, represent_measurement,
    star_compose, to_qstoch, from_qstoch, tensor_coherence, natural_iso,
    check_dagger_form, negativity, extract_quasi_povm,
)
from .verify import (
    LawReport, DichotomyReport, Verdict, check_functoriality, check_monoidal,
    check_naturality, check_dagger, check_commutant, check_faithfulness,
    check_convexity, orbit_span_rank, dichotomy_report,
)

__all__ = [
    # 异常
    "QStochException",
    "ValidationError",
    "DimensionError",
    "SingularityError",
    "AdjointUndefinedError",
    "ConstructionError",
    "GenerationError",
    "NormalizationError",
    "AmbiguityError",
    "CompositionError",
    "ExtractionError",
    "SchemaError",

    # 设置
    "Settings",
    "get_settings",
    "configure",
    "configure_from_file",
    "configure_from_dict",
    "create_custom_settings",
    "validate_settings",

    # 量子对象
    "State",
    "Measurement",
    "Channel",
    "pure_state",
    "maximally_mixed_state",
    "random_state",
    "apply_channel",
    "compose_channels",
    "tensor_channels",
    "adjoint_channel",
    "mix_channels",
    "identity_channel",
    "unitary_channel",
    "hadamard",
    "depolarizing_channel",
    "amplitude_damping_channel",
    "random_channel",
    "random_unital_channel",

    # POVM 目录
    "QuasiPovm",
    "PovmFlags",
    "PovmFamily",
    "povm_family",
    "build_povm",
    "tetrahedron_povm",
    "wh_sic",
    "random_minimal_ic",
    "trivial_quasi_povm",
    "hermitian_basis_quasi_povm",
    "six_state_povm",
    "product_povm",
    "unit_povm",

    # 表示
    "QuasiProbVector",
    "TransitionMatrix",
    "QRep",
    "NaturalIso",
    "transition_matrix",
    "represent_state",
    "reconstruct_state",
    "represent_channel",
    "represent_measurement",
    "star_compose",
    "to_qstoch",
    "from_qstoch",
    "tensor_coherence",
    "natural_iso",
    "check_dagger_form",
    "negativity",
    "extract_quasi_povm",

    # 验证
    "LawReport",
    "DichotomyReport",
    "Verdict",
    "check_functoriality",
    "check_monoidal",
    "check_naturality",
    "check_dagger",
    "check_commutant",
    "check_faithfulness",
    "check_convexity",
    "orbit_span_rank",
    "dichotomy_report",
]
