"""Unsupervised federated anomaly detection over heterogeneous clients.

Local dense autoencoders, server-side averaging of the shared interior
layers, validation-based weight repair, latent-space K-means, and cluster
label alignment, with a config-driven CLI simulator.
"""

from .alignment import AlignmentOutcome, align_binary, align_multiclass
from .clustering import KMeansResult, kmeans_fit
from .dataprep import (
    DatasetError,
    DatasetSplits,
    EmptyDataError,
    InsufficientClassError,
    LabelColumnError,
    LabeledDataset,
    LoadReport,
    MinMaxScaler,
    SplitSpec,
    SynthSpec,
    apply_scaler,
    fit_scaler,
    load_csv,
    partition,
    synth_generate,
    write_csv,
)
from .evaluation import (
    ClassMetrics,
    ConfusionMatrix,
    MetricSet,
    confusion,
    metrics,
    server_accuracy,
)
from .federation import (
    ClientRoundMetrics,
    ClientSpec,
    ClientState,
    CommonLayerSet,
    ExperimentConfig,
    ExperimentResult,
    FederationError,
    RoundError,
    RoundReport,
    aggregate,
    derive_seed,
    evaluate_client,
    extract_common,
    prepare_clients,
    run_experiment,
    run_round,
    splice_and_repair,
    splice_common,
)
from .neuralnet import (
    DEFAULT_BOTTLENECK_DIM,
    DEFAULT_ENCODER_HIDDEN,
    AutoencoderModel,
    AutoencoderSpec,
    LayerWeights,
    ModelFormatError,
    OptimizerConfig,
    TrainingDivergedError,
    TrainingReport,
    build_autoencoder,
    encode,
    export_layers,
    forward,
    import_layers,
    load_model,
    mse_gradients,
    mse_loss,
    save_model,
    train,
)

__version__ = "0.1.0"
