"""Multi-tasking genetic algorithm with bias-corrected chromosome transfer.

Includes SOEA and MFEA baselines, a two-task benchmark suite with
performance scoring, and a coupled-tank fuzzy controller application for
designing type-1 and interval type-2 controllers together.
"""

from .core import (
    Chromosome,
    ConfigError,
    Population,
    TaskDefinition,
    decode,
    encode,
    make_streams,
    sort_population,
)
from .operators import MutationParams, SbxParams, elitist_select, polynomial_mutation, sbx_crossover
from .transfer import (
    BiasEstimate,
    GeneMatching,
    build_matching,
    build_transfer_population,
    top_mean,
    transfer_chromosome,
)
from .solvers import RunTrace, SolverConfig, run_mfea, run_mtga, run_soea, run_soea_pair
from .benchmarks import ComposedTask, eval_function, load_task_pair, registry_pair, synthetic_pair
from .metrics import performance_score, summarize_runs

__version__ = "0.1.0"
