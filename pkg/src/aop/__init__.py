"""Small-delay fan-in-2 circuits for And-Or paths with prescribed arrival times."""

from .core import (
    AND,
    OR,
    AopError,
    AopInstance,
    Circuit,
    ExtAopRef,
    InvariantViolation,
    UndeterminedCircuit,
    ValidationError,
    circuit_delay,
    circuit_size,
    dualize,
    phi_truth_table,
    validate_instance,
    weight_log2,
)
from .baselines import FAMILIES, baseline_stats, optimize_baseline
from .bounds import LowerBoundReport, exact_optimum, kraft_lb, input_depth_lb, lower_bound
from .huffman import huffman_combine, huffman_delay
from .optimizer import (
    MODE_DELAY,
    MODE_DELAY_SIZE,
    OptimizationResult,
    build_table,
    optimize,
)
from .verify import check_structure, equivalent, verify_against_instance

__version__ = "0.1.0"
