import sys
from collections import Counter

from pose_metrics.report import evaluate
from scene_data.generator import BENCHMARK_SCENES, INTERACTIONS, DatasetConfig, generate_dataset
from scene_data.scene_file import write_scenes
from utils.output_files import output_path, timestamp
from utils.run_config import RunConfig
from utils.run_log import RunLog


def cmd_gen(run: RunConfig, log: RunLog) -> None:
    """Generate a synthetic scene file with gt and corrupted initial poses."""
    count = run.option("scenes", BENCHMARK_SCENES)
    config = DatasetConfig(persons=run.option("persons"),
                           mix=run.option("mix", DatasetConfig().mix),
                           corruption=run.corruption,
                           seed=run.seed)
    out = output_path(run, run.option("out"), "scenes", f"scenes_{count}_seed{run.seed}_{timestamp()}.jsonl")

    log.say(f"Generating {count} scenes (seed {run.seed})")
    scenes = generate_dataset(count, config, progress=not log.quiet)
    write_scenes(out, scenes)

    interactions = Counter(scene.id.rsplit("_", 1)[-1] for scene in scenes)
    persons = Counter(scene.n_persons for scene in scenes)
    initial = evaluate(scenes)
    log.log("summary",
            out=out,
            scenes=len(scenes),
            persons_total=sum(scene.n_persons for scene in scenes),
            persons_histogram={str(n): persons[n] for n in sorted(persons)},
            interactions={name: interactions.get(name, 0) for name in INTERACTIONS},
            initial_mpjpe_mm=initial.mpjpe_mm,
            initial_root_depth_error_mm=initial.root_depth_error_mm)
    log.say(f"Scenes saved to {out}")

if __name__ == "__main__":
    from setref import main
    sys.exit(main(["gen", *sys.argv[1:]]))
