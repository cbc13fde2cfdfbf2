"""``cem train|explain|eval`` command-line front end.

Exit codes: 0 success, 2 configuration error, 3 unreadable input file,
4 solver abort.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path


from .evaluate import aggregate, eval_row, format_summary, format_table
from .explain import dumps_record, explain
from .io import DataFormatError, load_dataset, write_pgm
from .model import (
    DenseAutoencoder,
    DenseNetwork,
    ShapeError,
    TrainConfig,
    WeightFormatError,
    load_weights,
    save_weights,
    train_autoencoder,
    train_classifier,
)
from .objective import Example
from .solver import SolverConfig, SolverError

logger = logging.getLogger("cem")

EXIT_OK, EXIT_CONFIG, EXIT_PARSE, EXIT_SOLVER = 0, 2, 3, 4
TRAIN_FLAGS = ("hidden", "ae_hidden", "epochs", "lr", "ae_epochs", "ae_lr", "batch_size")


class ConfigError(ValueError):
    pass


def _sizes(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        sizes = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("layer sizes must be positive")
    return sizes


def _shape(text: str) -> tuple[int, int]:
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RxC, got {text!r}") from None
    if r < 1 or c < 1:
        raise argparse.ArgumentTypeError("image dimensions must be positive")
    return r, c


def build_parser() -> argparse.ArgumentParser:
    d = SolverConfig()
    parser = argparse.ArgumentParser(prog="cem", description="Contrastive explanations for dense classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", required=True, help="CSV: features then an integer label per row")
    common.add_argument("--model", required=True, help="classifier weight file")
    common.add_argument("--ae", default=None, help="autoencoder weight file")
    common.add_argument("--lo", type=float, default=0.0, help="lower bound of every feature (default 0)")
    common.add_argument("--hi", type=float, default=1.0, help="upper bound of every feature (default 1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("--out", required=True, help="output directory")
    solve.add_argument("--beta", type=float, default=d.beta, help=f"L1 weight (default {d.beta})")
    solve.add_argument("--gamma", type=float, default=d.gamma, help="autoencoder weight; 100 with --ae (default 0)")
    solve.add_argument("--kappa", type=float, default=d.kappa, help=f"confidence margin (default {d.kappa})")
    solve.add_argument("--c0", type=float, default=d.c0, help=f"initial loss weight (default {d.c0})")
    solve.add_argument("--searches", type=int, default=d.num_searches, help=f"searches over c (default {d.num_searches})")
    solve.add_argument("--iters", type=int, default=d.iterations, help=f"iterations per search (default {d.iterations})")
    solve.add_argument("--lr0", type=float, default=d.lr0, help=f"initial step size (default {d.lr0})")
    solve.add_argument("--background", type=float, default=None, help="no-signal value (default 0 clipped to [lo, hi])")
    solve.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")

    tr = sub.add_parser("train", parents=[common], help="fit a classifier and optionally an autoencoder")
    tr.add_argument("--hidden", type=_sizes, default=(16,), help="hidden widths, e.g. 16,16; empty for linear")
    tr.add_argument("--ae-hidden", type=_sizes, default=(32, 8, 32), help="autoencoder hidden widths")
    tr.add_argument("--epochs", type=int, default=100)
    tr.add_argument("--lr", type=float, default=0.1)
    tr.add_argument("--ae-epochs", type=int, default=300)
    tr.add_argument("--ae-lr", type=float, default=0.5)
    tr.add_argument("--batch-size", type=int, default=20)

    ex = sub.add_parser("explain", parents=[common, solve], help="write one explanation record per example")
    ex.add_argument("--image-shape", type=_shape, default=None, help="RxC; also write PP/PN graymap masks")
    sub.add_parser("eval", parents=[common, solve], help="explain every example and report effectiveness")
    return parser


@dataclass
class RunConfig:
    command: str
    model_path: Path
    ae_path: Path | None
    data_path: Path
    output_path: Path | None
    image_shape: tuple[int, int] | None
    solver: SolverConfig
    lo: float
    hi: float
    background: float | None
    workers: int
    seed: int
    train: dict | None = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        solver = None
        if args.command != "train":
            if args.gamma > 0 and args.ae is None:
                raise ConfigError("--gamma > 0 needs an autoencoder (--ae)")
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            try:
                solver = SolverConfig(
                    kappa=args.kappa,
                    beta=args.beta,
                    gamma=args.gamma,
                    c0=args.c0,
                    num_searches=args.searches,
                    iterations=args.iters,
                    lr0=args.lr0,
                    seed=args.seed,
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if not args.lo < args.hi:
            raise ConfigError("--lo must be below --hi")
        bg = getattr(args, "background", None)
        if bg is not None and not args.lo <= bg <= args.hi:
            raise ConfigError("--background must lie in [lo, hi]")
        return cls(
            command=args.command,
            model_path=Path(args.model),
            ae_path=Path(args.ae) if args.ae else None,
            data_path=Path(args.data),
            output_path=Path(args.out) if getattr(args, "out", None) else None,
            image_shape=getattr(args, "image_shape", None),
            solver=solver,
            lo=args.lo,
            hi=args.hi,
            background=bg,
            workers=getattr(args, "workers", 1),
            seed=args.seed,
            train={k: getattr(args, k) for k in TRAIN_FLAGS} if args.command == "train" else None,
        )


def _load_models(cfg: RunConfig):
    try:
        net = load_weights(cfg.model_path)
        ae = load_weights(cfg.ae_path) if cfg.ae_path else None
    except OSError as exc:
        raise ConfigError(f"cannot read weights: {exc}") from None
    if not isinstance(net, DenseNetwork):
        raise WeightFormatError(f"{cfg.model_path}: expected a dense-net file")
    if ae is not None and not isinstance(ae, DenseAutoencoder):
        raise WeightFormatError(f"{cfg.ae_path}: expected a dense-ae file")
    return net, ae


def _explain_one(job):
    x0, idx, net, ae, cfg = job
    ex = Example.from_model(x0, net, str(idx))
    return explain(ex, net, ae if cfg.solver.gamma > 0 else None, cfg.solver, lo=cfg.lo, hi=cfg.hi, background=cfg.background)


def _explain_all(X, net, ae, cfg: RunConfig):
    jobs = [(x, i, net, ae, cfg) for i, x in enumerate(X)]
    if cfg.workers == 1:
        return [_explain_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_explain_one, jobs))


def run(cfg: RunConfig) -> int:
    if cfg.command == "train":
        X, y = load_dataset(cfg.data_path, lo=cfg.lo, hi=cfg.hi)
        tc = cfg.train
        res = train_classifier(X, y, hidden=tc["hidden"], cfg=TrainConfig(tc["epochs"], tc["lr"], tc["batch_size"], cfg.seed))
        save_weights(res.model, cfg.model_path)
        print(f"classifier: training accuracy {res.accuracy:.4f} -> {cfg.model_path}")
        if cfg.ae_path:
            ae = train_autoencoder(
                X, hidden=tc["ae_hidden"], cfg=TrainConfig(tc["ae_epochs"], tc["ae_lr"], tc["batch_size"], cfg.seed), clamp=(cfg.lo, cfg.hi)
            )
            save_weights(ae.model, cfg.ae_path)
            print(f"autoencoder: training mse {ae.loss_history[-1]:.6g} -> {cfg.ae_path}")
        return EXIT_OK

    net, ae = _load_models(cfg)
    if ae is not None and ae.input_dim != net.input_dim:
        raise ShapeError("autoencoder and classifier dimensions differ")
    X, _ = load_dataset(cfg.data_path, n_features=net.input_dim, lo=cfg.lo, hi=cfg.hi)
    if cfg.image_shape is not None and cfg.image_shape[0] * cfg.image_shape[1] != net.input_dim:
        raise ConfigError(f"--image-shape {cfg.image_shape[0]}x{cfg.image_shape[1]} does not match {net.input_dim} features")
    out = cfg.output_path
    out.mkdir(parents=True, exist_ok=True)
    expls = _explain_all(X, net, ae, cfg)

    if cfg.command == "explain":
        with open(out / "explanations.jsonl", "w") as fh:
            for e in expls:
                fh.write(dumps_record(e) + "\n")
        if cfg.image_shape is not None:
            scale = cfg.hi - cfg.lo
            for e in expls:
                write_pgm(out / f"example_{int(e.example_id):05d}_pp.pgm", e.pp.delta, cfg.image_shape, scale)
                write_pgm(out / f"example_{int(e.example_id):05d}_pn.pgm", e.pn.delta, cfg.image_shape, scale)
        print(f"wrote {len(expls)} explanations to {out}")
    else:
        report = aggregate([eval_row(e, x, net) for e, x in zip(expls, X)])
        (out / "eval_rows.csv").write_text(format_table(report))
        (out / "eval_summary.json").write_text(format_summary(report))
        print(format_summary(report), end="")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(RunConfig.from_args(args))
    except ConfigError as exc:
        print(f"cem: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, WeightFormatError, ShapeError) as exc:
        print(f"cem: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SolverError as exc:
        print(f"cem: solver aborted: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"cem: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
