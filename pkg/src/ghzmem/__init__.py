"""Binary-image storage in simulated GHZ-entangled qubit arrays.

Shapes are stored as GHZ states on their vertex qubits and recovered by
searching qubit subsets for violations of the Svetlichny inequality.
"""

__version__ = "0.1.0"

from .entanglement import (
    SvetlichnyResult,
    SvetlichnySettings,
    is_genuinely_entangled,
    make_ghz,
    make_singlet,
    max_svetlichny,
    svetlichny_value,
)
from .grover import grover_iterations, grover_search, locate_vertices_classical
from .measurement import PreparationOracle, correlator, expectation, measure, sample_correlator
from .memory import (
    Grid,
    MemoryState,
    Shape,
    StoredImage,
    ghz_projector_probability,
    initial_memory,
    overlap,
    qubit_index,
    store_classical,
    store_entangled,
)
from .retrieval import (
    RetrievalConfig,
    compare_memories,
    find_shapes,
    recognize_scale_invariant,
    worst_case_arrays,
)
from .state import (
    DensityOperator,
    SparseState,
    inner,
    mixture,
    new_zero_state,
    partial_trace,
    tensor,
    to_density,
)
