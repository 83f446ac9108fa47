"""trendshape: symbolic and topological clustering of weekly interest series."""

__version__ = "0.1.0"

from .clustering import (
    ClusteringResult,
    EvaluationScores,
    FeatureMatrix,
    Method,
    davies_bouldin,
    elbow_curve,
    kmeans,
    silhouette,
    ward_cluster,
)
from .dataset import (
    Dataset,
    SyntheticSpec,
    TimeSeries,
    ValidationReport,
    archetype_dataset,
    generate_synthetic,
    merge,
    parse_trends_csv,
    to_canonical_csv,
    validate,
)
from .eda import (
    CorrelationMatrix,
    NormalityResult,
    RollingStats,
    StationarityResult,
    SummaryStats,
    adf_test,
    correlation_matrix,
    descriptive_stats,
    ks_normality,
    rolling_stats,
    z_normalize,
)
from .symbolic import (
    Alphabet,
    Breakpoints,
    SymbolicFeatureVector,
    SymbolicWord,
    WordKind,
    WordSequence,
    encode_features,
    esax_word,
    gaussian_breakpoints,
    paa,
    sax_word,
    sliding_words,
    symbolize,
)
from .topology import (
    Bar,
    Filtration,
    PersistenceDiagram,
    PersistenceLandscape,
    PointCloud,
    TdaFeatureMatrix,
    TdaParams,
    TdaStrategy,
    barcode,
    delay_embed,
    feature_matrix,
    landscape,
    persistent_homology,
    rips_filtration,
)

__all__ = [name for name in dir() if not name.startswith("_")]
