from .genome_codec import (
    ARCH0,
    ARCH1,
    ARCH2,
    NUM_OPS,
    OPERATIONS,
    Branch,
    CellSpec,
    ConnectivitySpec,
    Genome,
    OperationSpec,
    canonicalize,
    cell_pool_size,
    connectivity_pool_size,
    decode,
    encode,
    op_name,
)
from .search_space import (
    connectivity_text,
    enumerate_connectivities,
    genome_to_text_table,
    sample_uniform,
    search_space_size,
    sorted_connectivities,
)
