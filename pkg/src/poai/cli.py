"""Command-line entry point for reproducible experiments.

Subcommands::

    poai gen-data   write a synthetic labeled dataset (CSV)
    poai train      fit the scorer to a dataset, write model + report
    poai select     build a node pool from scores, write pool JSON
    poai simulate   run one protocol, write ledger CSV + metrics JSON
    poai compare    run a protocol/seed matrix, write a metrics table

Every command is deterministic given identical inputs and seed. Flags
may also be supplied through ``--config FILE`` (a JSON document with
one section per command); explicit flags win over the config file.
Human-readable status goes to stderr; stdout carries only data.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal
error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from poai.dataset import DATASET_HEADER, generate_dataset, load_dataset, save_dataset
from poai.errors import PoaiError, ValidationError
from poai.metrics import compute_metrics
from poai.pool import InjectedDraws, SelectionConfig, pool_to_json, rank_nodes, select_pool
from poai.scorer.model import init_model, load_model, save_model
from poai.scorer.train import TrainConfig, train
from poai.simulate import (
    Protocol,
    SimConfig,
    generate_network,
    ledger_csv,
    metrics_json,
    run_protocol,
)

SCORES_HEADER = "node_id,atn"

COMPARE_HEADER = (
    "protocol,seed,gini,entropy_bits,random_fraction,"
    "mean_confirmation_s,total_hash_ops,failed_fraction"
)


class CliUsageError(PoaiError):
    """Bad command-line usage (unknown flag, wrong type, ...)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _status(message: str) -> None:
    print(message, file=sys.stderr)


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _write_bytes(path: str, data: bytes) -> None:
    Path(path).write_bytes(data)


def _emit(data: bytes, out: str | None, label: str) -> None:
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        _write_bytes(out, data)
        _status(f"wrote {label} to {out}")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(_read_bytes(path).decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return doc


class _Options:
    """Flag values overlaid on a config-file section and defaults."""

    def __init__(self, args: argparse.Namespace, command: str):
        self._args = args
        section = _load_config(getattr(args, "config", None)).get(command, {})
        if not isinstance(section, dict):
            raise ValidationError(f"config section {command!r} must be a JSON object")
        self._section = section

    def get(self, name: str, default=None):
        value = getattr(self._args, name.replace("-", "_"), None)
        if value is not None:
            return value
        if name in self._section:
            return self._section[name]
        return default

    def require(self, name: str):
        value = self.get(name)
        if value is None:
            raise ValidationError(f"missing required option --{name}")
        return value


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def _cmd_gen_data(args) -> int:
    opt = _Options(args, "gen-data")
    n = int(opt.require("n"))
    seed = int(opt.get("seed", 0))
    noise = float(opt.get("noise", 0.0))
    dataset = generate_dataset(n, seed, noise)
    _emit(save_dataset(dataset), opt.get("out"), f"{n} samples")
    return 0


def _cmd_train(args) -> int:
    opt = _Options(args, "train")
    data_path = str(opt.require("data"))
    out_path = str(opt.require("out"))
    seed = int(opt.get("seed", 0))
    cfg = TrainConfig(
        learning_rate=float(opt.get("lr", 0.01)),
        epochs=int(opt.get("epochs", 200)),
        batch_size=int(opt.get("batch-size", 32)),
        l2_lambda=float(opt.get("l2", 1e-4)),
        seed=seed,
        train_fraction=float(opt.get("train-fraction", 0.8)),
    )
    dataset = load_dataset(_read_bytes(data_path))
    _status(f"training on {len(dataset)} samples ({cfg.epochs} epochs, seed {seed})")
    fitted, report = train(init_model(seed), dataset, cfg)
    _write_bytes(out_path, save_model(fitted))
    report_path = str(opt.get("report", out_path + ".report.json"))
    _write_bytes(report_path, (json.dumps(report.to_dict(), indent=1) + "\n").encode("utf-8"))
    _status(
        f"wrote model to {out_path} (val loss {report.final_val_loss:.4f}, "
        f"val spearman {report.val_spearman:.4f}), report to {report_path}"
    )
    return 0


def _load_scores(data: bytes) -> list[tuple[int, float]]:
    text = data.decode("utf-8")
    header = text.splitlines()[0].strip() if text.splitlines() else ""
    if header == DATASET_HEADER:
        dataset = load_dataset(data)
        return [(feat.node_id, label) for feat, label in dataset.samples]
    if header == SCORES_HEADER:
        scores = []
        for line_no, line in enumerate(text.splitlines()[1:], start=2):
            if not line.strip():
                continue
            cells = line.split(",")
            if len(cells) != 2:
                raise ValidationError(f"scores line {line_no}: expected 2 columns")
            try:
                scores.append((int(cells[0]), float(cells[1])))
            except ValueError as exc:
                raise ValidationError(f"scores line {line_no}: {exc}") from None
        return scores
    raise ValidationError(
        f"unrecognized scores header; expected the dataset layout or {SCORES_HEADER!r}"
    )


def _parse_injected(raw: str) -> InjectedDraws:
    try:
        doc = json.loads(raw)
        return InjectedDraws(
            pool_size=int(doc["pool_size"]),
            sup_num=int(doc["sup_num"]),
            random_picks=tuple(int(i) for i in doc["random_picks"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad --inject payload: {exc}") from None


def _cmd_select(args) -> int:
    opt = _Options(args, "select")
    scores = _load_scores(_read_bytes(str(opt.require("scores"))))
    seed = int(opt.get("seed", 0))
    cfg = SelectionConfig(
        whole_max=int(opt.require("whole-max")),
        sup_fraction_min=float(opt.get("sup-fraction-min", 0.5)),
        seed=seed,
    )
    injected = None
    raw_inject = opt.get("inject")
    if raw_inject is not None:
        injected = _parse_injected(str(raw_inject))
    pool = select_pool(rank_nodes(scores), cfg, np.random.default_rng(seed), injected)
    _emit(pool_to_json(pool, seed).encode("utf-8"), opt.get("out"), "node pool")
    return 0


def _resolve_nodes(opt: _Options, seed: int):
    data_path = opt.get("data")
    if data_path is not None:
        dataset = load_dataset(_read_bytes(str(data_path)))
        return [feat for feat, _ in dataset.samples]
    num_nodes = int(opt.get("num-nodes", 10))
    max_risk = float(opt.get("max-risk", 0.05))
    return generate_network(num_nodes, seed, max_risk)


def _resolve_scorer(opt: _Options):
    raw = opt.get("scorer", "oracle")
    if raw == "oracle":
        return "oracle"
    return load_model(_read_bytes(str(raw)))


def _sim_config(opt: _Options, protocol: Protocol, seed: int, num_nodes: int) -> SimConfig:
    return SimConfig(
        num_nodes=num_nodes,
        epochs=int(opt.get("epochs", 10)),
        rounds_per_epoch=int(opt.get("rounds", 50)),
        protocol=protocol,
        selection=SelectionConfig(
            whole_max=int(opt.get("whole-max", 12)),
            sup_fraction_min=float(opt.get("sup-fraction-min", 0.5)),
            seed=seed,
        ),
        scorer=_resolve_scorer(opt),
        pow_mean_block_interval=float(opt.get("pow-interval", 600.0)),
        confirmation_depth=int(opt.get("confirmation-depth", 6)),
        seed=seed,
    )


def _cmd_simulate(args) -> int:
    opt = _Options(args, "simulate")
    seed = int(opt.get("seed", 0))
    protocol = Protocol(str(opt.get("protocol", "poai")).lower())
    nodes = _resolve_nodes(opt, seed)
    cfg = _sim_config(opt, protocol, seed, len(nodes))
    result = run_protocol(cfg, nodes)
    metrics = compute_metrics(result)

    out_dir = Path(str(opt.get("out", ".")))
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{protocol.value}_seed{seed}"
    ledger_path = out_dir / f"ledger_{stem}.csv"
    metrics_path = out_dir / f"metrics_{stem}.json"
    ledger_path.write_bytes(ledger_csv(result))
    metrics_path.write_bytes(metrics_json(metrics, protocol, seed))
    _status(f"wrote {ledger_path} and {metrics_path}")
    sys.stdout.write(metrics_json(metrics, protocol, seed).decode("utf-8"))
    return 0


def _compare_row(protocol: Protocol, seed: int, metrics) -> str:
    return ",".join(
        [
            protocol.value,
            str(seed),
            repr(metrics.gini),
            repr(metrics.producer_entropy),
            repr(metrics.random_node_block_fraction),
            repr(metrics.mean_confirmation_time),
            str(metrics.total_hash_ops),
            repr(metrics.failed_round_fraction),
        ]
    )


def _cmd_compare(args) -> int:
    opt = _Options(args, "compare")
    base_seed = int(opt.get("seed", 0))
    num_seeds = int(opt.get("num-seeds", 20))
    if num_seeds < 1:
        raise ValidationError(f"num-seeds must be >= 1, got {num_seeds}")
    raw_protocols = opt.get("protocols", [p.value for p in Protocol])
    if isinstance(raw_protocols, str):
        raw_protocols = raw_protocols.split(",")
    protocols = [Protocol(p.strip().lower()) for p in raw_protocols]

    lines = [COMPARE_HEADER]
    for protocol in protocols:
        for seed in range(base_seed, base_seed + num_seeds):
            nodes = _resolve_nodes(opt, seed)
            cfg = _sim_config(opt, protocol, seed, len(nodes))
            metrics = compute_metrics(run_protocol(cfg, nodes))
            lines.append(_compare_row(protocol, seed, metrics))
        _status(f"finished {num_seeds} {protocol.value} runs")
    table = ("\n".join(lines) + "\n").encode("utf-8")
    _emit(table, opt.get("out"), "metrics table")
    return 0


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poai", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file with per-command sections")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.add_argument("--out", help="output path (default: stdout for tabular data)")

    p = sub.add_parser("gen-data", help="generate a synthetic labeled dataset")
    common(p)
    p.add_argument("--n", type=int, help="number of samples")
    p.add_argument("--noise", type=float, help="label noise std (default 0)")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train the capability scorer")
    common(p)
    p.add_argument("--data", help="dataset CSV path")
    p.add_argument("--report", help="training report JSON path")
    p.add_argument("--lr", type=float, help="learning rate (default 0.01)")
    p.add_argument("--epochs", type=int, help="training epochs (default 200)")
    p.add_argument("--batch-size", type=int, help="mini-batch size (default 32)")
    p.add_argument("--l2", type=float, help="conv L2 penalty (default 1e-4)")
    p.add_argument("--train-fraction", type=float, help="training split (default 0.8)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("select", help="build a node pool from capability scores")
    common(p)
    p.add_argument("--scores", help="dataset CSV or node_id,atn CSV")
    p.add_argument("--whole-max", type=int, help="maximum pool capacity")
    p.add_argument("--sup-fraction-min", type=float, help="minimum super share (default 0.5)")
    p.add_argument("--inject", help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_select)

    def sim_common(p):
        p.add_argument("--data", help="node dataset CSV (default: generate from seed)")
        p.add_argument("--num-nodes", type=int, help="nodes to synthesize when --data is absent (default 10)")
        p.add_argument("--max-risk", type=float, help="risk-probability cap for synthesized nodes (default 0.05)")
        p.add_argument("--epochs", type=int, help="simulation epochs (default 10)")
        p.add_argument("--rounds", type=int, help="rounds per epoch (default 50)")
        p.add_argument("--whole-max", type=int, help="maximum pool capacity (default 12)")
        p.add_argument("--sup-fraction-min", type=float, help="minimum super share (default 0.5)")
        p.add_argument("--scorer", help="'oracle' (default) or a model file path")
        p.add_argument("--pow-interval", type=float, help="mean pow block interval s (default 600)")
        p.add_argument("--confirmation-depth", type=int, help="blocks to confirmation (default 6)")

    p = sub.add_parser("simulate", help="run one protocol and write ledger + metrics")
    common(p)
    sim_common(p)
    p.add_argument("--protocol", help="poai | pow | pos | dpos (default poai)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="run a protocol/seed matrix and tabulate metrics")
    common(p)
    sim_common(p)
    p.add_argument("--protocols", help="comma-separated protocols (default all)")
    p.add_argument("--num-seeds", type=int, help="seeds per protocol (default 20)")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # e.g. unknown protocol name
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PoaiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
