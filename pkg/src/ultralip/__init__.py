"""Exact Lipschitz extension over computable non-archimedean valued fields."""

from .field import (
    BackendMismatchError,
    CutValue,
    FieldDescriptor,
    FieldElement,
    NormValue,
    PDivisibleCountWarning,
    Point,
    RVValue,
    integer_average,
    max_norm,
    norm,
    rv,
)
from .geometry import (
    AffineCenter,
    AnnulusBox,
    Ball,
    Cell1D,
    CellND,
    ExactBox,
    cells_intersect,
    contains,
    delta_partition_index,
    dist_to_set,
    fiber_box,
    rho,
    straighten,
    unstraighten,
)
from .lipschitz import (
    FiniteFunction,
    LipschitzReport,
    NotLipschitzError,
    PiecewiseAffineMap1D,
    is_lipschitz,
    lipschitz_constant,
    reduce_to_risometry,
    rescale,
    restore_from_risometry,
    risometry_check,
)
from .skeleton import (
    Configuration,
    Skeleton,
    SkeletonLevel,
    build_skeleton,
    configuration_of,
    one_cell,
    risometry_image_cell,
    transport_skeleton,
)
from .extension import (
    ExtendedFunction,
    GraphBranch,
    GraphFamily,
    epsilon_pipeline,
    extend_cell_risometry_line,
    extend_finite_line,
    extend_finite_nd,
    extend_finite_plane_ladder,
    extend_graph_family,
    extend_graph_family_via_reduction,
    glue_union,
    glue_vanishing,
    origins,
)
from .serialize import Instance, InstanceError, parse_instance

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
