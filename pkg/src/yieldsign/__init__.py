"""Monthly direction prediction for 5Y government bond yields.

Pipeline: per-indicator ASG feature transform, mentality-cycle
partitioning of each country's months, per-(country, cycle) top-3
classifier selection into level-1 voting ensembles, quality-gated
cross-country level-2 ensembles, and a micro-averaged overall hit rate
on the target country, plus the accompanying statistical analyses.
"""

from .asg import AsgFeaturePair, AsgParams, AsgTransformer, StageTrace, asg_transform
from .classifiers import (
    ClassifierSpec,
    CvReport,
    TrainedModel,
    cross_validate,
    feature_importance,
    grid_search,
    predict,
    register_kind,
    train,
)
from .config import Config, load_config
from .cycles import BusinessCycleCalendar, CyclePartition, partition_months
from .ensemble import (
    AggregateReport,
    SelectionSet,
    VotingEnsemble,
    build_level1,
    build_level2,
    evaluate_overall,
    vote,
)
from .errors import ConfigError, DataError, YieldsignError
from .ingest import (
    AlignedPanel,
    Dataset,
    IndicatorSeries,
    LabelSeries,
    assemble_datasets,
    build_labels,
    build_panel,
    load_indicator_csv,
)
from .mic import mic
from .pipeline import PipelineResult, run_pipeline
from .stats import (
    CorrelationReport,
    TTestResult,
    correlation_report,
    cycle_hypothesis_matrix,
    hit_rate,
    importance_heatmap,
    paired_t_test,
    pearson,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "AlignedPanel",
    "AsgFeaturePair",
    "AsgParams",
    "AsgTransformer",
    "BusinessCycleCalendar",
    "ClassifierSpec",
    "Config",
    "ConfigError",
    "CorrelationReport",
    "CvReport",
    "CyclePartition",
    "DataError",
    "Dataset",
    "IndicatorSeries",
    "LabelSeries",
    "PipelineResult",
    "SelectionSet",
    "StageTrace",
    "TTestResult",
    "TrainedModel",
    "VotingEnsemble",
    "YieldsignError",
    "asg_transform",
    "assemble_datasets",
    "build_labels",
    "build_level1",
    "build_level2",
    "build_panel",
    "correlation_report",
    "cross_validate",
    "cycle_hypothesis_matrix",
    "evaluate_overall",
    "feature_importance",
    "grid_search",
    "hit_rate",
    "importance_heatmap",
    "load_config",
    "load_indicator_csv",
    "mic",
    "paired_t_test",
    "partition_months",
    "pearson",
    "predict",
    "register_kind",
    "run_pipeline",
    "train",
    "vote",
]
