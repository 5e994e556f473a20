import sys
from pathlib import Path

from pose_metrics.report import evaluate
from pose_refiners.model_file import save_model
from pose_refiners.refiner import init_model
from pose_refiners.trainer import train_model
from scene_data.kfold import kfold
from scene_data.scene import require_gt
from scene_data.scene_file import read_scenes
from utils.file_picker import pick_file
from utils.output_files import output_path, timestamp
from utils.run_config import RunConfig
from utils.run_log import RunLog


def log_path_for(model_path: Path) -> Path:
    return model_path.with_name(model_path.name + ".log.jsonl")


def cmd_train(run: RunConfig, log: RunLog) -> None:
    """Train a refiner on the training folds and log held-out MPJPE per epoch."""
    scenes_path = pick_file(run.data_path / "scenes", "*.jsonl", "scene file", run.option("scenes"))
    out = output_path(run, run.option("out"), "models", f"refiner_{run.model.mode}_{timestamp()}.sref")
    log.attach(run.option("log") or log_path_for(out))

    dataset = read_scenes(scenes_path, expected_joints=run.model.joints)
    require_gt(dataset)
    train, heldout = kfold(dataset, run.training.folds, run.training.fold_index, run.training.seed)
    log.say(f"Training on {len(train)} scenes, holding out {len(heldout)} "
            f"(fold {run.training.fold_index} of {run.training.folds})")

    model = init_model(run.model, seed=run.training.seed)
    model, history = train_model(model, train, heldout, run.training, log=log, progress=not log.quiet)
    save_model(model, out)

    summary = {"model": out, "parameters": model.parameter_count, "epochs": run.training.epochs,
               "train_scenes": len(train), "heldout_scenes": len(heldout)}
    if heldout:
        summary["initial_heldout_mpjpe_mm"] = evaluate(heldout).mpjpe_mm
        summary["final_heldout_mpjpe_mm"] = history[-1]["heldout_mpjpe_mm"]
    log.log("summary", **summary)
    log.say(f"Model saved to {out}")


if __name__ == "__main__":
    from setref import main
    sys.exit(main(["train", *sys.argv[1:]]))
