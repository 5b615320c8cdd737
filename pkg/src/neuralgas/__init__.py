"""Batch and median neural gas, SOM and k-means clustering."""
from .batch import (
    TrainingTrace,
    batch_kmeans_epoch,
    batch_ng_epoch,
    batch_som_epoch,
    compute_ranks,
    heskes_winner,
    kmeans_cost,
    newton_step,
    ng_cost,
    ng_gradient,
    online_ng_step,
    som_cost,
    train,
)
from .dissimilarity import (
    CHROMOSOME_COSTS,
    SILHOUETTE_COSTS,
    AlignmentCosts,
    edit_distance,
    pairwise_matrix,
    squared_euclidean,
    squared_euclidean_matrix,
    symmetric_edit_distance,
)
from .evaluation import (
    UNLABELED,
    LabeledCodebook,
    classification_error,
    posterior_labels,
    quantization_error,
)
from .exceptions import (
    InvalidConfigurationError,
    InvalidInputError,
    InvalidMetricError,
    InvalidParameterError,
    NeuralGasError,
    ValidationError,
)
from .median import (
    MedianConfig,
    generalized_median,
    jitter,
    median_cost,
    median_kmeans_epoch,
    median_ng_epoch,
    median_som_epoch,
    train_median,
)
from .model import (
    AnnealingSchedule,
    Codebook,
    DissimilarityMatrix,
    RankAssignment,
    SomLattice,
    VectorDataset,
    lambda_at,
    lattice_distance,
    make_lattice,
    neighborhood_weight,
)

__version__ = "0.1.0"
