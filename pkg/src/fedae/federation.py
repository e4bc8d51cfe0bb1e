"""Federated orchestration over heterogeneous clients.

Each round: every client trains its own autoencoder locally, the server
forms a weighted average of the interior ("common") layers only, each client
splices the averaged layers between its private first and last layers and
repairs the model by fine-tuning on its validation split, then evaluates by
clustering its test latents and aligning cluster labels. Clients may differ
in input width; only the interior layer shapes must agree.

All randomness is pre-derived per (round, client, purpose) from the
experiment seed, so results are independent of thread scheduling. The
FEDAE_THREADS environment variable caps client-level parallelism (0 or unset
means one thread per client up to the CPU count).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .alignment import align_binary, align_multiclass
from .clustering import kmeans_fit
from .dataprep import (
    LabeledDataset,
    MinMaxScaler,
    SplitSpec,
    SynthSpec,
    apply_scaler,
    fit_scaler,
    load_csv,
    partition,
    synth_generate,
)
from .evaluation import confusion, metrics, server_accuracy
from .neuralnet import (
    DEFAULT_BOTTLENECK_DIM,
    DEFAULT_ENCODER_HIDDEN,
    AutoencoderModel,
    AutoencoderSpec,
    LayerWeights,
    OptimizerConfig,
    build_autoencoder,
    encode,
    train,
)

# the interior layers eligible for server-side averaging
CommonLayerSet = list[LayerWeights]

# purpose tags for child-seed derivation; fixed so stored configs replay exactly
SEED_SPLIT = 1
SEED_INIT = 2
SEED_SYNTH = 3
SEED_TRAIN = 4
SEED_REPAIR = 5
SEED_CLUSTER = 6


class FederationError(RuntimeError):
    """Client setup or round execution failed; message names the client."""


class RoundError(FederationError):
    pass


def derive_seed(base: int, *parts: int) -> int:
    """Deterministic child seed from a base seed plus integer context tags."""
    seq = np.random.SeedSequence((int(base),) + tuple(int(p) for p in parts))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ClientSpec:
    """Config-level client descriptor: where its data comes from and how it
    trains. Exactly one of csv_path / synth must be set. k and d default to
    the dataset class count and the training row count."""

    name: str
    csv_path: str | None = None
    label_column: str | int = "label"
    synth: SynthSpec | None = None
    k: int | None = None
    d: float | None = None
    test_per_class: int = 1000
    train_fraction: float = 0.8
    encoder_hidden: tuple[int, ...] = DEFAULT_ENCODER_HIDDEN
    bottleneck_dim: int = DEFAULT_BOTTLENECK_DIM
    epochs_train: int = 2
    epochs_repair: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder_hidden", tuple(int(w) for w in self.encoder_hidden))
        if not self.name:
            raise ValueError("client name must be non-empty")
        if (self.csv_path is None) == (self.synth is None):
            raise ValueError(f"client {self.name!r}: set exactly one of csv_path or synth")
        if self.k is not None and self.k < 1:
            raise ValueError(f"client {self.name!r}: k must be positive, got {self.k}")
        if self.d is not None and not self.d > 0:
            raise ValueError(f"client {self.name!r}: d must be positive, got {self.d}")
        if self.epochs_train < 1:
            raise ValueError(f"client {self.name!r}: epochs_train must be >= 1")
        if self.epochs_repair < 0:
            raise ValueError(f"client {self.name!r}: epochs_repair must be >= 0")


@dataclass
class ClientState:
    """One federated participant: normalized splits, its model, and its
    clustering/aggregation parameters."""

    name: str
    train: LabeledDataset
    validation: LabeledDataset
    test: LabeledDataset
    model: AutoencoderModel
    k: int
    d: float
    scaler: MinMaxScaler
    epochs_train: int = 2
    epochs_repair: int = 2
    last_centroids: np.ndarray | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    clients: tuple[ClientSpec, ...]
    rounds: int = 21
    seed: int = 42
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "clients", tuple(self.clients))
        if not self.clients:
            raise ValueError("experiment needs at least one client")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        names = [c.name for c in self.clients]
        if len(set(names)) != len(names):
            raise ValueError(f"client names must be unique, got {names}")


@dataclass
class ClientRoundMetrics:
    name: str
    aligned_accuracy: float
    precision: float
    recall: float
    f1: float
    confusion_matrix: np.ndarray
    best_mapping_applied: bool


@dataclass
class RoundReport:
    round_index: int
    clients: list[ClientRoundMetrics]
    server_accuracy: float


@dataclass
class ExperimentResult:
    """All round reports plus each client's best round (argmax of aligned
    accuracy, earliest on ties) and the final client states."""

    rounds: list[RoundReport]
    best_rounds: dict[str, int]
    clients: list[ClientState]


def aggregate(common_sets: Sequence[CommonLayerSet], d: Sequence[float]) -> CommonLayerSet:
    """Per-parameter convex combination sum_c (d_c / sum d) * W_c.

    Computed in anchored form W_0 + sum_{c>0} (d_c/sum d) * (W_c - W_0), which
    is the same combination to rounding level but reproduces W_0 bit-for-bit
    when all inputs are identical or there is a single client.
    """
    if len(common_sets) == 0:
        raise ValueError("aggregate needs at least one layer set")
    if len(d) != len(common_sets):
        raise ValueError(f"{len(d)} aggregation weights for {len(common_sets)} layer sets")
    for ci, dc in enumerate(d):
        if not dc > 0:
            raise ValueError(f"aggregation weight for client {ci} must be positive, got {dc}")
    base = common_sets[0]
    for ci, layer_set in enumerate(common_sets):
        if len(layer_set) != len(base):
            raise ValueError(
                f"client {ci} submitted {len(layer_set)} common layers, client 0 has {len(base)}"
            )
        for li, (layer, ref) in enumerate(zip(layer_set, base)):
            if layer.weight.shape != ref.weight.shape or layer.bias.shape != ref.bias.shape:
                raise ValueError(
                    f"shape mismatch at common layer {li} for client {ci}: "
                    f"{layer.weight.shape} vs client 0's {ref.weight.shape}"
                )

    total = float(np.sum(np.asarray(d, dtype=np.float64)))
    result = [layer.copy() for layer in base]
    for ci in range(1, len(common_sets)):
        coeff = float(d[ci]) / total
        for li, layer in enumerate(common_sets[ci]):
            result[li].weight += coeff * (layer.weight - base[li].weight)
            result[li].bias += coeff * (layer.bias - base[li].bias)
    return result


def extract_common(model: AutoencoderModel) -> CommonLayerSet:
    """Deep copies of every layer except the first and last."""
    return [layer.copy() for layer in model.layers[1:-1]]


def splice_common(model: AutoencoderModel, averaged: CommonLayerSet) -> None:
    """Install averaged interior layers; the first and last layers stay
    untouched. Each client receives its own copies, never shared arrays."""
    interior = model.layers[1:-1]
    if len(averaged) != len(interior):
        raise ValueError(f"expected {len(interior)} common layers, got {len(averaged)}")
    for li, (cur, new) in enumerate(zip(interior, averaged)):
        if new.weight.shape != cur.weight.shape or new.bias.shape != cur.bias.shape:
            raise ValueError(
                f"shape mismatch at common layer {li}: "
                f"model has {cur.weight.shape}, got {new.weight.shape}"
            )
    for li, new in enumerate(averaged, start=1):
        model.layers[li] = new.copy()


def splice_and_repair(
    client: ClientState, averaged: CommonLayerSet, opt: OptimizerConfig, seed: int
) -> None:
    """Splice averaged interior layers into the client's model, then repair
    by fine-tuning the whole model on the validation split (epochs_repair
    epochs; zero epochs means splice only)."""
    splice_common(client.model, averaged)
    if client.epochs_repair > 0:
        train(client.model, client.validation.features, client.epochs_repair, opt, seed)


def evaluate_client(client: ClientState, seed: int) -> ClientRoundMetrics:
    """Cluster the client's test latents, align cluster labels to ground
    truth (inversion check for k=2, frequency bijection otherwise), and
    compute metrics."""
    latents = encode(client.model, client.test.features)
    km = kmeans_fit(latents, client.k, seed)
    client.last_centroids = km.centroids
    y_true = client.test.labels
    if client.k == 2:
        outcome = align_binary(y_true, km.labels)
    else:
        outcome = align_multiclass(y_true, km.labels, client.k, y_true.size // client.k)
    cm = confusion(y_true, outcome.labels, client.k)
    ms = metrics(cm)
    return ClientRoundMetrics(
        name=client.name,
        aligned_accuracy=outcome.accuracy,
        precision=ms.precision,
        recall=ms.recall,
        f1=ms.f1,
        confusion_matrix=cm.counts,
        best_mapping_applied=outcome.corrected,
    )


def _thread_count(n_tasks: int) -> int:
    raw = os.environ.get("FEDAE_THREADS", "0")
    try:
        limit = int(raw)
    except ValueError:
        limit = 0
    if limit <= 0:
        limit = os.cpu_count() or 1
    return max(1, min(limit, n_tasks))


def _run_per_client(stage: str, clients: Sequence[ClientState], fn: Callable) -> list:
    """fn(index, client) for every client, in threads when allowed; results
    come back in client order and failures carry the client's name."""

    def call(i: int, c: ClientState):
        try:
            return fn(i, c)
        except Exception as exc:
            raise RoundError(f"client {c.name!r} failed during {stage}: {exc}") from exc

    workers = _thread_count(len(clients))
    if workers == 1:
        return [call(i, c) for i, c in enumerate(clients)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(call, i, c) for i, c in enumerate(clients)]
        return [f.result() for f in futures]


def prepare_clients(config: ExperimentConfig) -> list[ClientState]:
    """Load, split, normalize, and initialize every client from the config.

    The scaler is fit on the training split only; validation and test reuse
    its parameters. Splits, weight init, and synthetic data all draw from
    seeds derived off the experiment seed and the client's position.
    """
    clients: list[ClientState] = []
    for ci, cs in enumerate(config.clients):
        try:
            if cs.synth is not None:
                ds = synth_generate(cs.synth)
            else:
                ds, _ = load_csv(cs.csv_path, cs.label_column)
            splits = partition(
                ds,
                SplitSpec(
                    test_per_class=cs.test_per_class,
                    train_fraction=cs.train_fraction,
                    seed=derive_seed(config.seed, SEED_SPLIT, ci),
                ),
            )
            scaler = fit_scaler(splits.train.features)
            for part in (splits.train, splits.validation, splits.test):
                part.features = apply_scaler(scaler, part.features)
            model = build_autoencoder(
                AutoencoderSpec(
                    input_dim=ds.feature_count,
                    encoder_hidden=cs.encoder_hidden,
                    bottleneck_dim=cs.bottleneck_dim,
                ),
                derive_seed(config.seed, SEED_INIT, ci),
            )
        except Exception as exc:
            raise FederationError(f"client {cs.name!r} setup failed: {exc}") from exc
        clients.append(
            ClientState(
                name=cs.name,
                train=splits.train,
                validation=splits.validation,
                test=splits.test,
                model=model,
                k=cs.k if cs.k is not None else ds.k,
                d=cs.d if cs.d is not None else float(splits.train.row_count),
                scaler=scaler,
                epochs_train=cs.epochs_train,
                epochs_repair=cs.epochs_repair,
            )
        )
    return clients


def run_round(
    clients: Sequence[ClientState], opt: OptimizerConfig, seed: int, round_index: int
) -> RoundReport:
    """One federated round: local training, common-layer aggregation, splice
    and repair, then per-client clustering evaluation and the weighted
    server accuracy."""
    if not clients:
        raise ValueError("run_round needs at least one client")
    n = len(clients)
    train_seeds = [derive_seed(seed, SEED_TRAIN, round_index, i) for i in range(n)]
    repair_seeds = [derive_seed(seed, SEED_REPAIR, round_index, i) for i in range(n)]
    cluster_seeds = [derive_seed(seed, SEED_CLUSTER, round_index, i) for i in range(n)]

    _run_per_client(
        "local training",
        clients,
        lambda i, c: train(c.model, c.train.features, c.epochs_train, opt, train_seeds[i]),
    )
    common = [extract_common(c.model) for c in clients]
    averaged = aggregate(common, [c.d for c in clients])
    _run_per_client(
        "splice and repair",
        clients,
        lambda i, c: splice_and_repair(c, averaged, opt, repair_seeds[i]),
    )
    per_client = _run_per_client(
        "evaluation", clients, lambda i, c: evaluate_client(c, cluster_seeds[i])
    )
    srv = server_accuracy(
        [c.test.labels.size for c in clients], [m.aligned_accuracy for m in per_client]
    )
    return RoundReport(round_index=round_index, clients=list(per_client), server_accuracy=srv)


def run_experiment(
    config: ExperimentConfig, on_round: Callable[[RoundReport], None] | None = None
) -> ExperimentResult:
    """Run all rounds sequentially, carrying model state across rounds.

    on_round, when given, is called with each report as soon as its round
    finishes (for streaming output)."""
    clients = prepare_clients(config)
    reports: list[RoundReport] = []
    for r in range(config.rounds):
        report = run_round(clients, config.optimizer, config.seed, r)
        reports.append(report)
        if on_round is not None:
            on_round(report)
    best_rounds = {}
    for ci, client in enumerate(clients):
        history = [rep.clients[ci].aligned_accuracy for rep in reports]
        best_rounds[client.name] = int(np.argmax(history))
    return ExperimentResult(rounds=reports, best_rounds=best_rounds, clients=clients)
