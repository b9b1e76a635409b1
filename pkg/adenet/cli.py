"""
ADENet CLI - corpus generation, training, evaluation, inference, ablation, plots and serving
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from dotenv import load_dotenv

from adenet.config import RunConfig, load_run_config
from adenet.errors import AdenetError, ConfigError
from adenet.features import dump_mfcc, mfcc
from adenet.harness.ablation import ABLATION_AXES, ablate, config_diff
from adenet.harness.checkpoint import model_from_checkpoint
from adenet.harness.evaluation import evaluate, write_report
from adenet.harness.inference import detect_clip, enhance_clip, format_scores
from adenet.harness.plotting import PLOT_KINDS, plot
from adenet.harness.training import train
from adenet.log import configure_logging, get_logger
from adenet.signalio import gen_corpus, load_corpus_config, load_wav, read_manifest

logger = get_logger(__name__)


def _run_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if args.config else RunConfig()
    if getattr(args, "data", None):
        config.data.corpus_dir = str(args.data)
    return config


def cmd_gen_data(args: argparse.Namespace) -> int:
    config = load_corpus_config(args.config, output_dir=args.out, workers=args.workers)
    manifests = gen_corpus(config)
    for split, manifest in manifests.items():
        print(f"{split:<6} {len(manifest):>5} clips")
    print(f"corpus written to {config.output_dir}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    ckpt = train(_run_config(args), args.out)
    last = ckpt.history[-1] if ckpt.history else {}
    print(f"epochs={ckpt.epoch + 1} best_epoch={ckpt.best_epoch} loss={last.get('loss', float('nan')):.4f}")
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    report = evaluate(args.ckpt, read_manifest(args.data, args.split))
    print(report.to_table(), end="")
    if args.report:
        write_report(args.report, report)
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    model = model_from_checkpoint(args.ckpt)
    scores = detect_clip(model, read_manifest(args.data, args.split), args.clip)
    sys.stdout.write(format_scores(scores))
    return 0


def cmd_enhance(args: argparse.Namespace) -> int:
    model = model_from_checkpoint(args.ckpt)
    wave = enhance_clip(model, read_manifest(args.data, args.split), args.clip, args.out)
    print(f"{args.clip}: {len(wave)} samples written to {args.out}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    if args.list:
        for axis, (key, value) in ABLATION_AXES.items():
            print(f"{axis:<12} {key}={json.dumps(value)}")
        return 0
    if not args.axis:
        raise ConfigError("--axis is required unless --list is given")
    base = _run_config(args)
    config = ablate(base, args.axis)
    for key, (old, new) in config_diff(base, config).items():
        print(f"{key}: {json.dumps(old)} -> {json.dumps(new)}")
    if args.write_config:
        Path(args.write_config).write_text(config.model_dump_json(indent=2))
    if args.out:
        train(config, args.out)
        print(f"checkpoint written to {args.out}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    paths = plot(args.ckpt, read_manifest(args.data, args.split), args.kind, args.out, seed=args.seed, max_clips=args.max_clips)
    for path in paths:
        print(path)
    return 0


def cmd_features_dump(args: argparse.Namespace) -> int:
    seq = mfcc(load_wav(args.wav))
    dump_mfcc(args.out, seq)
    print(f"{len(seq.coeffs)} frames x {seq.coeffs.shape[1]} coefficients written to {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from adenet.service import serve

    serve(args.ckpt, args.data, split=args.split, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adenet", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-json", action="store_true", help="emit JSON log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write the synthetic corpus")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model and write checkpoints")
    p.add_argument("--config", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on one split")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_eval)

    for name, func, help_text in (
        ("detect", cmd_detect, "print per-frame speaking scores for one clip"),
        ("enhance", cmd_enhance, "write the enhanced waveform of one clip"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--ckpt", required=True)
        p.add_argument("--data", required=True)
        p.add_argument("--split", default="test")
        p.add_argument("--clip", required=True)
        if name == "enhance":
            p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("ablate", help="derive (and optionally train) an ablated config")
    p.add_argument("--axis", choices=sorted(ABLATION_AXES), default=None)
    p.add_argument("--list", action="store_true")
    p.add_argument("--config", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--write-config", default=None)
    p.add_argument("--out", default=None, help="train the ablated config into this checkpoint")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("plot", help="render embedding, score or waveform plots")
    p.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-clips", type=int, default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("features", help="MFCC front-end utilities")
    actions = p.add_subparsers(dest="features_action", required=True)
    p = actions.add_parser("dump", help="dump MFCCs of a WAV file as text, one frame per row")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features_dump)

    p = sub.add_parser("serve", help="serve detection and enhancement over HTTP")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8004)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_json or None)
    try:
        return args.func(args)
    except AdenetError as e:
        logger.error("command_failed", command=args.command, error=type(e).__name__, detail=str(e))
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
