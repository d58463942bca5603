"""Resource analysis for identifying an unknown unitary gate in a finite set.

Given a labelled family of unitaries with priors, the library answers: how
many black-box queries are needed to identify a member unambiguously or
perfectly, how large an ancilla the strategy needs, what the optimal success
probability is, and which measurement achieves it; every closed-form bound is
cross-checked against brute-force numerics at desk scale.
"""

from .numerics import (
    DEFAULT_CONFIG,
    DimensionCapError,
    NumericConfig,
    choi_vector,
    numeric_rank,
    psd_inverse_sqrt,
    tensor_power,
)
from .gatesets import (
    FAMILIES,
    GateSet,
    GateSetFormatError,
    ValidationReport,
    dumps_gate_set,
    load_gate_set,
    make_named_set,
    save_gate_set,
    validate_gate_set,
)
from .groups import (
    ClosureError,
    DesignCheckResult,
    GroupTable,
    IrrepRecord,
    MultiplicityResult,
    YoungDecomposition,
    abelian_characters,
    closure_table,
    commutes_pairwise,
    cyclic_characters,
    design_check,
    load_character_table,
    min_extra_block_size,
    multiplicity_by_characters,
    young_decomposition,
)
from .discriminate import (
    INCONCLUSIVE,
    EvalResult,
    InfeasibleError,
    Povm,
    SimulationResult,
    Strategy,
    classify_discriminability,
    design_pmax,
    evaluate_strategy,
    max_entangled_input,
    min_queries_unambiguous,
    output_states,
    perfect_strategy,
    pgm_povm,
    pmax,
    simulate_strategy,
    span_dimension,
    unambiguous_povm,
)
from .bounds import (
    AncillaFreeQueries,
    BoundEntry,
    BoundsReport,
    DimensionalBound,
    ancilla_bounds,
    ancilla_free_group_min_queries,
    assemble_report,
    copies_for_unambiguous,
    dimensional_min_queries,
    extra_queries_bound,
    linear_upper_bound,
)
from .optimize import (
    FidelityResult,
    ProbeResult,
    local_span_dimension,
    min_ancilla_probe,
    minimax_fidelity,
)

__version__ = "0.1.0"
