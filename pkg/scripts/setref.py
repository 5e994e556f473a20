"""
setref: set-attention residual refinement of multi-person 3D poses.

    python scripts/setref.py gen --scenes 500 --persons 2 --out data/scenes/train.jsonl
    python scripts/setref.py train --scenes data/scenes/train.jsonl --epochs 5 --fold 10/0
    python scripts/setref.py refine --model data/models/refiner.sref --scenes data/scenes/test.jsonl
    python scripts/setref.py eval --scenes data/scenes/test_refined.jsonl --initial data/scenes/test.jsonl
    python scripts/setref.py perturb --model data/models/refiner.sref --scenes data/scenes/test.jsonl --index 3
    python scripts/setref.py count --model data/models/refiner.sref --persons 4
    python scripts/setref.py ablate --scenes data/scenes/train.jsonl --epochs 5

Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
"""
import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from analyze_interactions import cmd_ablate, cmd_count, cmd_perturb
from evaluate_poses import cmd_eval
from generate_scenes import cmd_gen
from interaction_analysis.perturbation import AXES
from pose_refiners.config import MODES
from refine_scenes import cmd_refine
from scene_data.kfold import parse_fold
from train_refiner import cmd_train
from utils.errors import ConfigError, SetrefError
from utils.run_config import resolve_run_config
from utils.run_log import RunLog

S = argparse.SUPPRESS


class SetrefArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def non_negative_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def non_negative_float(value: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{value}'")
    if not x >= 0.0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return x


def positive_float(value: str) -> float:
    x = non_negative_float(value)
    if x == 0.0:
        raise argparse.ArgumentTypeError("must be > 0")
    return x


def probability(value: str) -> float:
    x = non_negative_float(value)
    if x > 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {value}")
    return x


def mix(value: str) -> List[float]:
    parts = value.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected handshake,group,independent weights, got '{value}'")
    weights = [non_negative_float(p) for p in parts]
    if sum(weights) <= 0:
        raise argparse.ArgumentTypeError("weights must not all be zero")
    return weights


def fold(value: str):
    try:
        return list(parse_fold(value))
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e))


def mode_list(value: str) -> List[str]:
    modes = [m.strip() for m in value.split(",") if m.strip()]
    unknown = [m for m in modes if m not in MODES]
    if not modes or unknown:
        raise argparse.ArgumentTypeError(f"modes must be a comma list of {MODES}, got '{value}'")
    return modes


def _model_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default=S, help="interaction level (default people)")
    p.add_argument("--joints", type=positive_int, default=S, help="joints per person (default 15)")
    p.add_argument("--d", type=positive_int, default=S, help="embedding width (default 64)")
    p.add_argument("--sab-blocks", type=positive_int, default=S, help="stacked SABs (default 2)")
    p.add_argument("--heads", type=positive_int, default=S, help="attention heads (default 4)")
    p.add_argument("--decoder-hidden", type=positive_int, default=S, help="decoder hidden width (default 256)")


def _training_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fold", type=fold, default=S, help="k/i: hold out fold i of k (default 10/0)")
    p.add_argument("--epochs", type=non_negative_int, default=S, help="training epochs (default 50)")
    p.add_argument("--batch-size", type=positive_int, default=S, help="scenes per batch (default 32)")
    p.add_argument("--lr", type=positive_float, default=S, help="Adam learning rate (default 1e-4)")


def build_parser() -> argparse.ArgumentParser:
    common = SetrefArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=S, help="global seed (default 0, or SETREF_SEED)")
    common.add_argument("--config", default=S, help="JSON run config, e.g. a logged run_config record")
    common.add_argument("--quiet", action="store_true", default=S, help="no stdout logging")
    common.add_argument("--data-dir", default=S, help="output root (default data/, or SETREF_DATA_DIR)")

    parser = SetrefArgumentParser(prog="setref", description="Set-attention refinement of multi-person 3D poses")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("gen", parents=[common], help="generate synthetic scenes")
    p.add_argument("--scenes", type=positive_int, default=S, help="number of scenes (default 15000)")
    p.add_argument("--persons", type=positive_int, default=S, help="persons per scene (default by interaction)")
    p.add_argument("--joint-noise", type=non_negative_float, default=S, help="per-joint noise sigma, m")
    p.add_argument("--depth-noise", type=non_negative_float, default=S, help="per-person depth offset sigma, m")
    p.add_argument("--truncation-prob", type=probability, default=S, help="chance a person is truncated")
    p.add_argument("--truncation-noise", type=non_negative_float, default=S, help="lower-body noise sigma, m")
    p.add_argument("--mix", type=mix, default=S, help="handshake,group,independent weights")
    p.add_argument("--out", default=S, help="output scene file")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("train", parents=[common], help="train a refiner")
    p.add_argument("--scenes", default=S, help="scene file with gt")
    p.add_argument("--out", default=S, help="output model file")
    p.add_argument("--log", default=S, help="training log (default <model>.log.jsonl)")
    _model_arguments(p)
    _training_arguments(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("refine", parents=[common], help="refine a scene file with a model")
    p.add_argument("--model", default=S, help="model file")
    p.add_argument("--scenes", default=S, help="scene file")
    p.add_argument("--out", default=S, help="output scene file")
    p.set_defaults(handler=cmd_refine)

    p = sub.add_parser("eval", parents=[common], help="score poses against gt")
    p.add_argument("--scenes", default=S, help="scene file with gt (usually refined)")
    p.add_argument("--initial", default=S, help="unrefined scene file for side-by-side deltas")
    p.add_argument("--pck-threshold", type=positive_float, default=S, help="PCK threshold, mm (default 150)")
    p.add_argument("--pck-abs-threshold", type=positive_float, default=S, help="PCKabs threshold, mm (default 250)")
    p.add_argument("--out", default=S, help="output report JSON")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("perturb", parents=[common], help="joint-perturbation interaction matrix")
    p.add_argument("--model", default=S, help="model file")
    p.add_argument("--scenes", default=S, help="scene file")
    p.add_argument("--index", type=non_negative_int, default=S, help="scene index in the file (default 0)")
    p.add_argument("--delta", type=positive_float, default=S, help="displacement, m (default 0.10)")
    p.add_argument("--axes", choices=AXES, default=S, help="joint: (+d,+d,+d) once; separate: x, y, z apart")
    p.add_argument("--workers", type=positive_int, default=S, help="concurrent columns (default 1)")
    p.add_argument("--out", default=S, help="output CSV")
    p.set_defaults(handler=cmd_perturb)

    p = sub.add_parser("count", parents=[common], help="parameters, FLOPs and wall clock")
    p.add_argument("--model", default=S, help="model file")
    p.add_argument("--persons", type=positive_int, default=S, help="persons in the dummy scene (default 2)")
    p.add_argument("--no-timing", action="store_true", default=S, help="skip wall-clock measurement")
    p.add_argument("--out", default=S, help="output JSON")
    p.set_defaults(handler=cmd_count)

    p = sub.add_parser("ablate", parents=[common], help="train and compare all interaction modes")
    p.add_argument("--scenes", default=S, help="scene file with gt")
    p.add_argument("--modes", type=mode_list, default=S, help="comma list (default people,scene,none)")
    p.add_argument("--out", default=S, help="output report JSON")
    _model_arguments(p)
    _training_arguments(p)
    p.set_defaults(handler=cmd_ablate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    flags = vars(args)
    command = flags.pop("command")
    handler = flags.pop("handler")
    config_path = flags.pop("config", None)
    quiet = flags.pop("quiet", False)

    try:
        run = resolve_run_config(command, flags, config_path)
        with RunLog(quiet=quiet) as log:
            log.log("run_config", **run.to_dict())
            handler(run, log)
        return 0
    except SetrefError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
