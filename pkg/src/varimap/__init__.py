"""varimap: modelling and consolidation of business process variant families.

Hierarchical process models with validation and trace enumeration, variation
drivers with strength elicitation, similarity assessment, the together/
separate decision matrix, variation maps, variant merging, and duplication
and complexity metrics, behind a CLI and a local HTTP service.
"""

from .consolidation import (
    AmbiguousMatch,
    MergeReport,
    MergeResult,
    baseline_fragment,
    is_isomorphic,
    merge_variants,
    project_baseline,
    project_consolidate,
    project_variant,
    refactor_shared,
)
from .decisions import (
    DanglingReference,
    DecisionConfig,
    DecisionRow,
    LevelOutsideConfig,
    MissingBand,
    VariantGroup,
    VariantRecord,
    VariationMap,
    VariationMatrix,
    Verdict,
    VerdictKind,
    build_matrix,
    build_variation_map,
    decide,
    decide_project,
    derive_groups,
    subprocesses_in_flow_order,
)
from .drivers import (
    DriverClass,
    StrengthAnswers,
    StrengthRating,
    VariationDriver,
    assess_strength,
    elicitation_catalog,
    order_drivers,
)
from .dsl import (
    DslSyntaxError,
    DslValidationError,
    ResolutionError,
    export_dot,
    parse_dsl,
    print_dsl,
)
from .metrics import (
    CompareReport,
    MetricsReport,
    cnc_ratio,
    compare_report,
    compute_metrics,
    duplicate_occurrences,
    duplication_rate,
)
from .model import (
    BoundExceeded,
    DeadlockError,
    ModelError,
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
    Violation,
    activity_nodes,
    decomposition_level,
    enumerate_traces,
    normalize_label,
    validate_repository,
)
from .project import (
    ProjectFile,
    ProjectFormatError,
    VersionMismatch,
    load_project,
    save_project,
    validate_project,
    with_driver_strength,
    with_group_band,
)
from .scenario import Scenario, apply_scenario, evaluate_scenario
from .similarity import (
    MissingPair,
    SimilarityAssessment,
    SimilarityBand,
    SizeGuardExceeded,
    band_from_score,
    exact_ged,
    graph_similarity,
    greedy_ged,
    group_band,
)

__version__ = "0.1.0"
