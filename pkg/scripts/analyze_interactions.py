import sys

from interaction_analysis.ablation import ablation_run
from interaction_analysis.cost import count_cost
from interaction_analysis.perturbation import DEFAULT_DELTA, interaction_summary, perturbation_matrix
from pose_refiners.config import MODES
from pose_refiners.model_file import load_model
from scene_data.kfold import kfold
from scene_data.scene_file import read_scenes
from utils.errors import UsageError
from utils.file_picker import pick_file
from utils.output_files import output_path, save_json, timestamp
from utils.run_config import RunConfig
from utils.run_log import RunLog


def cmd_perturb(run: RunConfig, log: RunLog) -> None:
    """Write the joint-perturbation interaction matrix of one scene as CSV."""
    model_path = pick_file(run.data_path / "models", "*.sref", "model file", run.option("model"))
    scenes_path = pick_file(run.data_path / "scenes", "*.jsonl", "scene file", run.option("scenes"))
    model = load_model(model_path)
    scenes = read_scenes(scenes_path, expected_joints=model.config.joints)

    index = run.option("index", 0)
    if not 0 <= index < len(scenes):
        raise UsageError(f"scene index {index} out of range (file has {len(scenes)} scenes)")
    scene = scenes[index]

    matrix = perturbation_matrix(model, scene, delta=run.option("delta", DEFAULT_DELTA),
                                 axes=run.option("axes", "joint"), workers=run.option("workers", 1),
                                 progress=not log.quiet)
    out = output_path(run, run.option("out"), "reports", f"perturb_{scene.id}_{model.config.mode}.csv")
    matrix.to_csv(out)
    log.log("summary", scene=scene.id, persons=scene.n_persons, mode=model.config.mode, out=out,
            **interaction_summary(matrix))
    log.say(f"Perturbation matrix saved to {out}")


def cmd_count(run: RunConfig, log: RunLog) -> None:
    """Parameter count, FLOPs and wall clock of one refine call."""
    model_path = pick_file(run.data_path / "models", "*.sref", "model file", run.option("model"))
    model = load_model(model_path)
    report = count_cost(model, run.option("persons", 2), timing=not run.option("no_timing", False),
                        seed=run.seed)
    log.log("cost", **report.to_dict())
    if run.option("out"):
        save_json(run.option("out"), report.to_dict())
        log.say(f"Cost report saved to {run.option('out')}")


def cmd_ablate(run: RunConfig, log: RunLog) -> None:
    """Train one model per interaction mode on the same fold and compare held-out MPJPE."""
    scenes_path = pick_file(run.data_path / "scenes", "*.jsonl", "scene file", run.option("scenes"))
    dataset = read_scenes(scenes_path, expected_joints=run.model.joints)
    train, test = kfold(dataset, run.training.folds, run.training.fold_index, run.training.seed)
    modes = run.option("modes", list(MODES))

    result = ablation_run(train, test, run.model, run.training, modes=modes, log=log, progress=not log.quiet)
    out = output_path(run, run.option("out"), "reports", f"ablation_{timestamp()}.json")
    save_json(out, result.to_dict())
    log.say(f"Ablation report saved to {out}")


if __name__ == "__main__":
    from setref import main
    # expects perturb, count or ablate as the first argument
    sys.exit(main(sys.argv[1:]))
