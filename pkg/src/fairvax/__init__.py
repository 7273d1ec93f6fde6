"""Vaccination site selection and dose allocation with fairness objectives.

The library pairs an exact desk-scale optimizer for the full site-selection
and allocation model with a clustering-based reduction that shrinks the
assignment search space, plus a harness that compares the two and reports
efficiency, equity, and accessibility metrics.
"""

from .allocation import DoseGroup, DoseProblem, DoseZone, solve_doses, solve_doses_with_plan
from .clustering import (
    Clustering,
    ClusterSite,
    ClusterSiteSelection,
    WeightedPoint,
    assign_sites,
    build_points,
    score_sites,
    select_k,
    silhouette_score,
    weighted_lloyd,
)
from .exact import (
    InstanceTooLargeError,
    SolveConfig,
    SolveResult,
    brute_force_oracle,
    solve_exact,
    solve_inner_allocation,
)
from .formulation import (
    EvaluatedSolution,
    FeasibilityReport,
    InfeasibleSolutionError,
    Solution,
    Violation,
    check_feasibility,
    evaluate,
    is_better,
    objective_value,
    search_space_size,
    solution_cost,
)
from .harness import (
    ComparisonReport,
    FairnessMetrics,
    compare,
    fairness_metrics,
    write_report_csv,
    write_report_json,
)
from .instance import (
    DistanceMatrix,
    GeneratorParams,
    Instance,
    InstanceFormatError,
    Site,
    ValidationError,
    ValidationReport,
    Zone,
    compute_distances,
    generate_clustered,
    load,
    save,
    validate,
)
from .reduced import (
    HeuristicResult,
    ReducedInfeasibleError,
    ReducedInstance,
    ReducedSolution,
    build_reduced,
    heuristic_solve,
    lift,
    solve_reduced,
)

__version__ = "0.1.0"
