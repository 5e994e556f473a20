import sys

from tqdm import tqdm

from pose_refiners.model_file import load_model
from pose_refiners.refiner import refine
from scene_data.scene_file import read_scenes, write_scenes
from utils.file_picker import pick_file
from utils.output_files import output_path
from utils.run_config import RunConfig
from utils.run_log import RunLog


def cmd_refine(run: RunConfig, log: RunLog) -> None:
    """Replace every scene's persons with the refined poses; ids and gt are kept."""
    model_path = pick_file(run.data_path / "models", "*.sref", "model file", run.option("model"))
    scenes_path = pick_file(run.data_path / "scenes", "*.jsonl", "scene file", run.option("scenes"))
    model = load_model(model_path)
    scenes = read_scenes(scenes_path, expected_joints=model.config.joints)
    out = output_path(run, run.option("out"), "scenes", f"{scenes_path.stem}_refined.jsonl")

    refined = [scene.with_persons(refine(model, scene).refined)
               for scene in tqdm(scenes, desc="Refining scenes", disable=log.quiet)]
    write_scenes(out, refined)
    log.log("summary", model=model_path, scenes=len(refined), out=out)
    log.say(f"Refined scenes saved to {out}")


if __name__ == "__main__":
    from setref import main
    sys.exit(main(["refine", *sys.argv[1:]]))
