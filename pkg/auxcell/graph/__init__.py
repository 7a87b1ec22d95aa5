from .graph_builder import (
    FeatureDesc,
    GraphIR,
    GraphNode,
    build,
    check_acyclic,
    strip_aux,
    unconsumed_blocks,
    unconsumed_branch_sums,
)
from .graph_utils import conv_cost, dump, estimate, export_dot, node_cost, node_costs, output_resolution
