"""Diagrams of finite probability spaces, entropy distances and their
tropical (asymptotic) limits."""
from .category import IndexingCategory, chain_category, fan_category, full_category, point_category, validate
from .coupling import (
    CouplingMatrix,
    greedy_coupling_grouped,
    min_coupling_entropy,
    min_entropy_coupling_exact,
    min_entropy_coupling_greedy,
)
from .diagram import (
    Diagram,
    EntropyVector,
    build_diagram,
    condition,
    constant_diagram,
    diagram_of_space,
    entropy_vector,
    find_isomorphism,
    is_isomorphic,
    is_minimal,
    lambda_diagram,
    one_point_diagram,
    tensor_diagrams,
    tensor_power,
)
from .distance import (
    DistanceBound,
    TwoFan,
    ikd,
    induced_fan,
    kd,
    minimal_reduction,
    slicing_bound_cofan,
    slicing_bound_reduction,
    uniform_fan,
)
from .errors import TropicalError
from .homogeneous import (
    PermGroup,
    SubgroupDiagram,
    check_homogeneous,
    intersection_closure_check,
    quotient_diagram,
)
from .mixture import DiagramFamily, distributivity_check, mix, mixture_entropy_formula, radical_mix
from .space import ProbSpace, Reduction, binary, check_reduction, entropy, pushforward, tensor, uniform
from .tropical import (
    AdmissibleFunction,
    QuasiLinearSequence,
    TropicalChainPoint,
    aep_curve,
    aep_uniformize,
    asymptotic_distance,
    chain_representative,
    chain_tropicalize,
    defect_reduce,
    linear_sequence,
    linearize,
    quasi_homogeneity_bound,
    scalar_action,
)

__version__ = "0.1.0"
