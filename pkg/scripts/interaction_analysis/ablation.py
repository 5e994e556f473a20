"""Train one refiner per interaction mode on the same split and budget, then compare."""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

from pose_metrics.report import MetricReport, evaluate
from pose_refiners.config import MODES, ModelConfig
from pose_refiners.refiner import init_model
from pose_refiners.trainer import TrainingConfig, train_model
from scene_data.scene import Scene, require_gt
from utils.run_log import RunLog

# fewer interaction levels are expected to refine no better
EXPECTED_ORDER = ("people", "scene", "none")


@dataclass
class AblationResult:
    initial: MetricReport
    reports: Dict[str, MetricReport]
    histories: Dict[str, List[dict]] = field(default_factory=dict)

    def mpjpe_by_mode(self) -> Dict[str, float]:
        return {mode: report.mpjpe_mm for mode, report in self.reports.items()}

    def ordering_holds(self) -> bool:
        mpjpe = self.mpjpe_by_mode()
        ranked = [m for m in EXPECTED_ORDER if m in mpjpe]
        return all(mpjpe[a] <= mpjpe[b] for a, b in zip(ranked, ranked[1:]))

    def all_improve(self) -> bool:
        return all(v < self.initial.mpjpe_mm for v in self.mpjpe_by_mode().values())

    def to_dict(self) -> dict:
        return {
            "initial_mpjpe_mm": self.initial.mpjpe_mm,
            "mpjpe_by_mode": self.mpjpe_by_mode(),
            "all_modes_improve": self.all_improve(),
            "ordering_holds": self.ordering_holds(),
            "initial": self.initial.summary(),
            "modes": {mode: report.summary() for mode, report in self.reports.items()},
            "histories": self.histories,
        }


def ablation_run(train: Sequence[Scene], test: Sequence[Scene], model_config: ModelConfig,
                 training_config: TrainingConfig, modes: Sequence[str] = MODES,
                 log: Optional[RunLog] = None, progress: bool = False) -> AblationResult:
    """Same architecture, init seed and budget for every mode; only `mode` differs."""
    require_gt(train)
    require_gt(test)
    initial = evaluate(test)
    if log:
        log.log("initial", mpjpe_mm=initial.mpjpe_mm)

    reports, histories = {}, {}
    for mode in modes:
        config = replace(model_config, mode=mode)
        model = init_model(config, seed=training_config.seed)
        model, history = train_model(model, train, test, training_config, progress=progress)
        reports[mode] = evaluate(test, model)
        histories[mode] = history
        if log:
            log.log("mode_done", mode=mode, **reports[mode].summary())

    result = AblationResult(initial=initial, reports=reports, histories=histories)
    if log:
        log.log("soft_check", expected_order=list(EXPECTED_ORDER), holds=result.ordering_holds(),
                mpjpe_by_mode=result.mpjpe_by_mode())
    return result
