"""Fast estimation and exact evaluation of the diagonal of a graph Laplacian pseudoinverse."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    CapExceededError,
    DisconnectedGraphError,
    DomainError,
    LapDiagError,
    NumericalError,
    ParseError,
    SolverError,
)
from .graph import (
    Graph,
    largest_connected_component,
    laplacian_matvec,
    parse_edge_list,
    read_edge_list,
    serialize_edge_list,
    weighted_incidence_apply,
    weighted_incidence_transpose_apply,
)
from .models import (
    LabeledGraph,
    NodeLabel,
    Ordering,
    koch_diag_closed_form,
    koch_generate,
    koch_kirchhoff,
    koch_node_resistance,
    koch_shortest_path_sum,
    label_compare,
    psfw_generate,
    psfw_kirchhoff,
    urt_diag_closed_form,
    urt_generate,
    urt_kirchhoff,
    urt_node_resistance,
)
from .oracle import (
    ErrorReport,
    error_metrics,
    exact_pseudoinverse_diag,
    exact_resistance,
    foster_check,
    forest_weight_diag,
    kirchhoff_exact,
    node_resistance_distance,
)
from .sketch import DiagEstimate, SketchConfig, approx_diag, jl_dimension, sketch_rows, solver_tolerance
from .solver import SolveOptions, lapl_solve
