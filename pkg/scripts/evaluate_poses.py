import sys

from pose_metrics.joint_metrics import AUC_THRESHOLDS_MM, PCK_ABS_THRESHOLD_MM, PCK_THRESHOLD_MM
from pose_metrics.report import compare_reports, evaluate
from scene_data.scene import require_gt
from scene_data.scene_file import read_scenes
from utils.errors import SceneValidationError
from utils.file_picker import pick_file
from utils.output_files import output_path, save_json, timestamp
from utils.run_config import RunConfig
from utils.run_log import RunLog


def _check_pairing(refined, initial) -> None:
    if len(refined) != len(initial):
        raise SceneValidationError(f"--initial has {len(initial)} scenes but the scored file has {len(refined)}")
    for a, b in zip(refined, initial):
        if a.id != b.id or a.persons.shape != b.persons.shape:
            raise SceneValidationError(f"--initial does not line up (found '{b.id}' {b.persons.shape})", a.id)


def cmd_eval(run: RunConfig, log: RunLog) -> None:
    """Score a scene file's persons against its gt, optionally next to an initial-estimate file."""
    scenes_path = pick_file(run.data_path / "scenes", "*.jsonl", "scene file", run.option("scenes"))
    scenes = read_scenes(scenes_path)
    require_gt(scenes)
    thresholds = dict(pck_threshold_mm=run.option("pck_threshold", PCK_THRESHOLD_MM),
                      pck_abs_threshold_mm=run.option("pck_abs_threshold", PCK_ABS_THRESHOLD_MM),
                      auc_thresholds_mm=AUC_THRESHOLDS_MM)
    report = evaluate(scenes, progress=not log.quiet, **thresholds)

    if run.option("initial"):
        initial_scenes = read_scenes(run.option("initial"))
        _check_pairing(scenes, initial_scenes)
        # the initial file may lack gt; pair it with the scored file's gt
        initial_scenes = [s.with_persons(i.persons) for s, i in zip(scenes, initial_scenes)]
        result = compare_reports(report, evaluate(initial_scenes, **thresholds))
        log.log("summary", refined_mpjpe_mm=result["refined"]["mpjpe_mm"],
                initial_mpjpe_mm=result["initial"]["mpjpe_mm"], delta=result["delta"])
    else:
        result = report.to_dict()
        log.log("summary", **report.summary())

    out = output_path(run, run.option("out"), "reports", f"{scenes_path.stem}_report_{timestamp()}.json")
    save_json(out, result)
    log.say(f"Report saved to {out}")


if __name__ == "__main__":
    from setref import main
    sys.exit(main(["eval", *sys.argv[1:]]))
