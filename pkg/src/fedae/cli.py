"""Command-line interface.

Subcommands: `run` executes a config-driven federated experiment and writes
per-round JSONL plus a final summary and client models; `synth` emits a
labeled synthetic CSV; `inspect` prints the layer table of a saved model.

Exit codes: 0 success, 1 runtime failure, 2 unusable config or model file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import re
import sys

import numpy as np

from .dataprep import DatasetError, SynthSpec, synth_generate, write_csv
from .federation import (
    SEED_SYNTH,
    ClientRoundMetrics,
    ClientSpec,
    ExperimentConfig,
    ExperimentResult,
    RoundReport,
    derive_seed,
    run_experiment,
)
from .neuralnet import (
    DEFAULT_ENCODER_HIDDEN,
    ModelFormatError,
    OptimizerConfig,
    load_model,
    save_model,
)

_EXPERIMENT_KEYS = {
    "rounds",
    "seed",
    "learning_rate",
    "batch_size",
    "beta1",
    "beta2",
    "epsilon",
}
_CLIENT_KEYS = {
    "csv",
    "label_col",
    "synth_k",
    "synth_features",
    "synth_per_class",
    "synth_separation",
    "synth_noise",
    "synth_seed",
    "k",
    "d",
    "test_per_class",
    "train_fraction",
    "encoder_hidden",
    "bottleneck",
    "epochs_train",
    "epochs_repair",
}
_SYNTH_REQUIRED = ("synth_k", "synth_features", "synth_per_class", "synth_separation", "synth_noise")
_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class ConfigError(ValueError):
    """The experiment config file cannot be parsed or validated."""


def _get(section_name: str, section, key: str, cast, default):
    if key not in section:
        return default
    raw = section.get(key)
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(
            f"[{section_name}] {key}: cannot parse {raw!r} as {cast.__name__}"
        ) from None


def _int_list(raw: str) -> tuple[int, ...]:
    widths = tuple(int(part.strip()) for part in raw.split(",") if part.strip())
    if not widths:
        raise ValueError("expected a comma-separated list of integers")
    return widths


def load_config(path, rounds_override: int | None = None, seed_override: int | None = None) -> ExperimentConfig:
    """Parse the INI experiment file into an ExperimentConfig.

    One [experiment] section plus one [client.<name>] section per client.
    Client csv paths are resolved relative to the config file's directory.
    Synthetic clients without an explicit synth_seed get one derived from
    the experiment seed and their position.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, "r") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    if not parser.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    exp = parser["experiment"]
    for key in exp:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"[experiment] has unknown key {key!r}")

    rounds = rounds_override if rounds_override is not None else _get("experiment", exp, "rounds", int, 21)
    seed = seed_override if seed_override is not None else _get("experiment", exp, "seed", int, 42)
    try:
        optimizer = OptimizerConfig(
            learning_rate=_get("experiment", exp, "learning_rate", float, 1e-3),
            beta1=_get("experiment", exp, "beta1", float, 0.9),
            beta2=_get("experiment", exp, "beta2", float, 0.999),
            epsilon=_get("experiment", exp, "epsilon", float, 1e-8),
            batch_size=_get("experiment", exp, "batch_size", int, 32),
        )
    except ValueError as exc:
        raise ConfigError(f"[experiment] optimizer: {exc}") from None

    config_dir = os.path.dirname(os.path.abspath(path))
    clients: list[ClientSpec] = []
    for section_name in parser.sections():
        if section_name == "experiment":
            continue
        if not section_name.startswith("client."):
            raise ConfigError(f"unknown section [{section_name}]")
        name = section_name[len("client.") :]
        if not _NAME_RE.match(name):
            raise ConfigError(
                f"[{section_name}]: client name must match {_NAME_RE.pattern}"
            )
        section = parser[section_name]
        for key in section:
            if key not in _CLIENT_KEYS:
                raise ConfigError(f"[{section_name}] has unknown key {key!r}")

        csv_path = section.get("csv")
        synth_keys_present = [key for key in _SYNTH_REQUIRED if key in section]
        if csv_path is not None and synth_keys_present:
            raise ConfigError(f"[{section_name}]: give either csv or synth_* keys, not both")
        if csv_path is None and len(synth_keys_present) != len(_SYNTH_REQUIRED):
            missing = sorted(set(_SYNTH_REQUIRED) - set(synth_keys_present))
            raise ConfigError(
                f"[{section_name}]: needs csv or all synth_* keys (missing {', '.join(missing)})"
            )

        synth = None
        if csv_path is not None:
            if not os.path.isabs(csv_path):
                csv_path = os.path.join(config_dir, csv_path)
        else:
            try:
                synth = SynthSpec(
                    k=_get(section_name, section, "synth_k", int, None),
                    feature_count=_get(section_name, section, "synth_features", int, None),
                    per_class_count=_get(section_name, section, "synth_per_class", int, None),
                    class_mean_separation=_get(section_name, section, "synth_separation", float, None),
                    noise_std=_get(section_name, section, "synth_noise", float, None),
                    seed=_get(
                        section_name,
                        section,
                        "synth_seed",
                        int,
                        derive_seed(seed, SEED_SYNTH, len(clients)),
                    ),
                )
            except DatasetError as exc:
                raise ConfigError(f"[{section_name}]: {exc}") from None

        try:
            clients.append(
                ClientSpec(
                    name=name,
                    csv_path=csv_path,
                    label_column=_get(section_name, section, "label_col", str, "label"),
                    synth=synth,
                    k=_get(section_name, section, "k", int, None),
                    d=_get(section_name, section, "d", float, None),
                    test_per_class=_get(section_name, section, "test_per_class", int, 1000),
                    train_fraction=_get(section_name, section, "train_fraction", float, 0.8),
                    encoder_hidden=_get(
                        section_name, section, "encoder_hidden", _int_list, DEFAULT_ENCODER_HIDDEN
                    ),
                    bottleneck_dim=_get(section_name, section, "bottleneck", int, 10),
                    epochs_train=_get(section_name, section, "epochs_train", int, 2),
                    epochs_repair=_get(section_name, section, "epochs_repair", int, 2),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"[{section_name}]: {exc}") from None

    if not clients:
        raise ConfigError(f"{path}: no [client.<name>] sections")
    try:
        return ExperimentConfig(clients=tuple(clients), rounds=rounds, seed=seed, optimizer=optimizer)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _client_record(m: ClientRoundMetrics) -> dict:
    return {
        "name": m.name,
        "aligned_accuracy": m.aligned_accuracy,
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "best_mapping_applied": bool(m.best_mapping_applied),
        "confusion": [[int(v) for v in row] for row in m.confusion_matrix],
    }


def round_record(report: RoundReport) -> dict:
    """The JSONL record for one round; every record carries this key set."""
    return {
        "round": report.round_index,
        "server_accuracy": report.server_accuracy,
        "clients": [_client_record(m) for m in report.clients],
    }


def _summary_metrics(m: ClientRoundMetrics) -> dict:
    return {
        "aligned_accuracy": m.aligned_accuracy,
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
    }


def build_summary(config: ExperimentConfig, result: ExperimentResult) -> dict:
    """Final summary: best round per client (with its metrics) plus the
    final-round metrics and server accuracies."""
    final = result.rounds[-1]
    clients = {}
    for ci, client in enumerate(result.clients):
        best_round = result.best_rounds[client.name]
        clients[client.name] = {
            "best_round": best_round,
            "best": _summary_metrics(result.rounds[best_round].clients[ci]),
            "final": _summary_metrics(final.clients[ci]),
        }
    return {
        "rounds": config.rounds,
        "seed": config.seed,
        "final_server_accuracy": final.server_accuracy,
        "best_server_accuracy": max(r.server_accuracy for r in result.rounds),
        "clients": clients,
    }


def cmd_run(args) -> int:
    try:
        config = load_config(args.config, args.rounds, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    cm_dir = os.path.join(args.out, "confusion")
    if args.dump_cm:
        os.makedirs(cm_dir, exist_ok=True)

    jsonl_path = os.path.join(args.out, "rounds.jsonl")
    try:
        with open(jsonl_path, "w") as jsonl:

            def on_round(report: RoundReport) -> None:
                jsonl.write(json.dumps(round_record(report)) + "\n")
                jsonl.flush()
                if args.dump_cm:
                    for m in report.clients:
                        cm_path = os.path.join(
                            cm_dir, f"round_{report.round_index:03d}_{m.name}.csv"
                        )
                        np.savetxt(cm_path, m.confusion_matrix, fmt="%d", delimiter=",")
                print(
                    f"round {report.round_index}: "
                    f"server_accuracy={report.server_accuracy:.4f}"
                )

            result = run_experiment(config, on_round)
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1

    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(build_summary(config, result), fh, indent=2)
        fh.write("\n")
    for client in result.clients:
        save_model(client.model, os.path.join(args.out, f"model_{client.name}.fedae"))
        if args.dump_centroids and client.last_centroids is not None:
            np.savetxt(
                os.path.join(args.out, f"centroids_{client.name}.csv"),
                client.last_centroids,
                fmt="%.17g",
                delimiter=",",
            )
    for ci, client in enumerate(result.clients):
        best_round = result.best_rounds[client.name]
        best_acc = result.rounds[best_round].clients[ci].aligned_accuracy
        print(f"client {client.name}: best_round={best_round} best_accuracy={best_acc:.4f}")
    print(f"wrote {jsonl_path} and summary.json")
    return 0


def cmd_synth(args) -> int:
    try:
        spec = SynthSpec(
            k=args.k,
            feature_count=args.features,
            per_class_count=args.per_class,
            class_mean_separation=args.separation,
            noise_std=args.noise,
            seed=args.seed,
        )
    except DatasetError as exc:
        print(f"invalid synth parameters: {exc}", file=sys.stderr)
        return 2
    ds = synth_generate(spec)
    try:
        write_csv(ds, args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {ds.row_count} rows x {ds.feature_count} features to {args.out}")
    return 0


def cmd_inspect(args) -> int:
    try:
        model = load_model(args.model)
    except (ModelFormatError, FileNotFoundError) as exc:
        print(f"invalid model file: {exc}", file=sys.stderr)
        return 2
    print(f"input_dim {model.input_dim}, bottleneck {model.spec.bottleneck_dim}")
    for i, layer in enumerate(model.layers):
        print(f"layer {i:2d}: {layer.fan_in:4d} -> {layer.fan_out:4d}   params {layer.param_count}")
    print(f"total params: {model.param_count}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fedae",
        description="Federated anomaly detection simulator: local autoencoders, "
        "common-layer averaging, latent-space clustering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a config-driven experiment")
    run_p.add_argument("--config", required=True, help="experiment INI file")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--rounds", type=int, default=None, help="override config rounds")
    run_p.add_argument("--seed", type=int, default=None, help="override config seed")
    run_p.add_argument("--dump-cm", action="store_true", help="write per-round confusion CSVs")
    run_p.add_argument(
        "--dump-centroids", action="store_true", help="write final-round centroid CSVs"
    )
    run_p.set_defaults(func=cmd_run)

    synth_p = sub.add_parser("synth", help="generate a labeled synthetic CSV")
    synth_p.add_argument("--k", type=int, required=True, help="class count")
    synth_p.add_argument("--per-class", type=int, required=True, help="rows per class")
    synth_p.add_argument("--features", type=int, required=True, help="feature count")
    synth_p.add_argument("--separation", type=float, required=True, help="distance between class means")
    synth_p.add_argument("--noise", type=float, required=True, help="within-class std")
    synth_p.add_argument("--seed", type=int, default=42)
    synth_p.add_argument("--out", required=True, help="output CSV path")
    synth_p.set_defaults(func=cmd_synth)

    inspect_p = sub.add_parser("inspect", help="print a saved model's layer table")
    inspect_p.add_argument("model", help="model file path")
    inspect_p.set_defaults(func=cmd_inspect)

    args = parser.parse_args(argv)
    return args.func(args)
