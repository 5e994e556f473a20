import math

import numpy as np
import pytest

from conftest import random_scene
from pose_metrics.joint_metrics import (AUC_THRESHOLDS_MM, auc, auc_from_errors, correct_fraction, mpjpe, mpjpe_pa,
                                        pck, pck_abs)
from pose_metrics.procrustes import DegenerateAlignmentError, procrustes_align, similarity_transform
from pose_metrics.report import REPORT_KEYS, compare_reports, evaluate
from pose_refiners.config import ModelConfig
from pose_refiners.refiner import init_model
from scene_data.scene import Scene
from utils.errors import SceneValidationError, ShapeError


def random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def naive_errors(pred, gt, root):
    out = []
    for j in range(len(gt)):
        d = 0.0
        for c in range(3):
            d += ((pred[j][c] - pred[root][c]) - (gt[j][c] - gt[root][c])) ** 2
        out.append(math.sqrt(d) * 1000.0)
    return out


def naive_abs_errors(pred, gt):
    return [math.sqrt(sum((pred[j][c] - gt[j][c]) ** 2 for c in range(3))) * 1000.0 for j in range(len(gt))]


def naive_pck(errors, t):
    return 100.0 * sum(1 for e in errors if e < t or e == 0.0) / len(errors)


class TestMpjpe:
    def test_identical_is_zero(self, rng):
        gt = rng.normal(size=(15, 3))
        assert mpjpe(gt, gt) == 0.0

    def test_translation_is_removed(self, rng):
        gt = rng.normal(size=(15, 3))
        assert mpjpe(gt + np.array([0.3, -1.0, 2.0]), gt) == pytest.approx(0.0, abs=1e-9)

    def test_two_joint_example(self):
        gt = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        pred = np.array([[0.0, 0.0, 0.0], [1.1, 0.0, 0.0]])
        assert mpjpe(pred, gt) == pytest.approx(50.0, abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mpjpe(np.zeros((3, 3)), np.zeros((4, 3)))


class TestPck:
    def test_root_joint_counts_at_every_threshold(self):
        gt = np.array([[0.0, 0.0, 0.0], [0.2, 0.0, 0.0], [0.0, 0.3, 0.0], [0.0, 0.0, 0.4]])
        pred = gt.copy()
        pred[1:] += [1.0, 0.0, 0.0]
        # every non-root joint is off by 1 m; the root is correct by construction
        assert pck(pred, gt) == pytest.approx(25.0)
        assert auc(pred, gt) == pytest.approx(25.0)

    def test_perfect(self, rng):
        gt = rng.normal(size=(15, 3))
        assert pck(gt, gt) == 100.0
        assert auc(gt, gt) == 100.0
        assert pck_abs(gt, gt) == 100.0

    def test_half_beyond_threshold(self):
        assert 100.0 * correct_fraction(np.array([10.0, 20.0, 200.0, 300.0]), 150.0) == 50.0

    def test_threshold_is_strict(self):
        assert correct_fraction(np.array([150.0]), 150.0) == 0.0
        assert correct_fraction(np.array([149.999]), 150.0) == 1.0

    def test_auc_grid(self):
        assert len(AUC_THRESHOLDS_MM) == 31
        assert AUC_THRESHOLDS_MM[0] == 0.0 and AUC_THRESHOLDS_MM[-1] == 150.0

    def test_auc_single_joint_at_75(self):
        assert auc_from_errors(np.array([75.0])) == pytest.approx(100.0 * 15 / 31)

    def test_auc_all_large_errors(self):
        assert auc_from_errors(np.array([150.0, 151.0, 400.0])) == 0.0

    def test_auc_is_mean_of_pck_samples(self, rng):
        errors = rng.uniform(0.0, 200.0, size=40)
        samples = [100.0 * correct_fraction(errors, t) for t in AUC_THRESHOLDS_MM]
        assert auc_from_errors(errors) == sum(samples) / len(samples)

    def test_pck_abs_translations(self, rng):
        gt = rng.normal(size=(15, 3))
        assert pck_abs(gt + np.array([0.3, 0.0, 0.0]), gt) == 0.0
        assert pck_abs(gt + np.array([0.0, 0.0, 0.2]), gt) == 100.0
        # root-relative PCK ignores the shift
        assert pck(gt + np.array([0.3, 0.0, 0.0]), gt) == 100.0


class TestProcrustes:
    def test_recovers_similarity_transform(self, rng):
        for _ in range(20):
            gt = rng.normal(size=(15, 3))
            pred = 1.7 * gt @ random_rotation(rng).T + rng.normal(size=3)
            assert mpjpe_pa(pred, gt) < 1e-6

    def test_identity(self, rng):
        gt = rng.normal(size=(6, 3))
        R, s, t = similarity_transform(gt, gt)
        np.testing.assert_allclose(R, np.eye(3), atol=1e-12)
        assert s == pytest.approx(1.0)
        np.testing.assert_allclose(t, 0.0, atol=1e-12)

    def test_never_reflects(self, rng):
        gt = rng.normal(size=(10, 3))
        mirrored = gt * np.array([-1.0, 1.0, 1.0])
        R, _, _ = similarity_transform(mirrored, gt)
        assert np.linalg.det(R) == pytest.approx(1.0)

    def test_alignment_helps_under_iid_noise(self, rng):
        for _ in range(100):
            gt = rng.normal(scale=0.3, size=(15, 3))
            pred = gt + rng.normal(scale=0.05, size=gt.shape)
            assert mpjpe_pa(pred, gt) <= mpjpe(pred, gt) + 1e-9

    def test_single_outlier_can_favor_root_alignment(self, rng):
        gt = rng.normal(scale=0.3, size=(15, 3))
        # the joint nearest the centroid has the least leverage on the fitted transform
        centroid_dist = np.linalg.norm(gt - gt.mean(axis=0), axis=1)
        centroid_dist[0] = np.inf
        outlier = int(np.argmin(centroid_dist))
        pred = gt.copy()
        pred[outlier] += [0.5, 0.0, 0.0]
        assert mpjpe(pred, gt) == pytest.approx(500.0 / 15)
        # least squares spreads one large error over every joint
        assert mpjpe_pa(pred, gt) > mpjpe(pred, gt)

    def test_degenerate_inputs(self):
        line = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        with pytest.raises(DegenerateAlignmentError):
            procrustes_align(line + 0.1, line)
        with pytest.raises(DegenerateAlignmentError):
            procrustes_align(np.zeros((2, 3)), np.eye(3)[:2])
        triangle = np.eye(3)
        with pytest.raises(DegenerateAlignmentError):
            procrustes_align(np.ones((3, 3)), triangle)


class TestOracle:
    def test_metrics_match_naive_loops(self, rng):
        for _ in range(100):
            scene = random_scene(rng, int(rng.integers(1, 4)), 6)
            for pred, gt in zip(scene.persons, scene.gt):
                errors = naive_errors(pred.tolist(), gt.tolist(), 0)
                absolute = naive_abs_errors(pred.tolist(), gt.tolist())
                assert mpjpe(pred, gt) == pytest.approx(sum(errors) / len(errors), abs=1e-9)
                assert pck(pred, gt, threshold_mm=80.0) == pytest.approx(naive_pck(errors, 80.0), abs=1e-9)
                assert pck_abs(pred, gt) == pytest.approx(naive_pck(absolute, 250.0), abs=1e-9)
                expected_auc = sum(naive_pck(errors, t) for t in range(0, 151, 5)) / 31
                assert auc(pred, gt) == pytest.approx(expected_auc, abs=1e-9)


class TestEvaluate:
    def test_gt_against_itself_is_perfect(self, small_dataset):
        scenes = [s.with_persons(s.gt) for s in small_dataset]
        report = evaluate(scenes)
        assert report.mpjpe_mm == 0.0
        assert report.mpjpe_pa_mm == pytest.approx(0.0, abs=1e-6)
        assert report.pck_pct == 100.0
        assert report.auc_pct == 100.0
        assert report.pck_abs_pct == 100.0

    def test_keys(self, small_dataset):
        data = evaluate(small_dataset).to_dict()
        assert set(REPORT_KEYS) | {"per_scene"} <= set(data)
        assert len(data["per_scene"]) == len(small_dataset)
        assert set(REPORT_KEYS) <= set(data["per_scene"][0])

    def test_is_joint_weighted(self, rng):
        scenes = [random_scene(rng, n, 5, scene_id=f"s{n}") for n in (1, 3)]
        errors = []
        for scene in scenes:
            for pred, gt in zip(scene.persons, scene.gt):
                errors.extend(naive_errors(pred.tolist(), gt.tolist(), 0))
        report = evaluate(scenes)
        assert report.mpjpe_mm == pytest.approx(sum(errors) / len(errors), abs=1e-9)
        assert report.joint_count == 20

    def test_ranges_and_alignment_bound(self, small_dataset):
        report = evaluate(small_dataset)
        for value in (report.pck_pct, report.auc_pct, report.pck_abs_pct):
            assert 0.0 <= value <= 100.0
        assert report.mpjpe_pa_mm <= report.mpjpe_mm + 1e-9

    def test_model_and_arrays_agree(self, small_dataset):
        model = init_model(ModelConfig(), seed=0)
        by_model = evaluate(small_dataset, model)
        by_arrays = evaluate(small_dataset, [s.persons for s in small_dataset])
        assert by_model.summary() == by_arrays.summary() == evaluate(small_dataset).summary()

    def test_missing_gt(self):
        with pytest.raises(SceneValidationError):
            evaluate([Scene(id="no_gt", persons=np.zeros((1, 4, 3)))])

    def test_compare_reports(self, small_dataset):
        initial = evaluate(small_dataset)
        perfect = evaluate([s.with_persons(s.gt) for s in small_dataset])
        result = compare_reports(perfect, initial)
        assert result["delta"]["mpjpe_mm"] == pytest.approx(-initial.mpjpe_mm)
        assert result["delta"]["pck_pct"] >= 0.0

    def test_depth_error_component(self):
        gt = np.zeros((2, 4, 3))
        gt[:, :, 0] = [0.0, 1.0, 0.0, 1.0]
        gt[:, :, 1] = [0.0, 0.0, 1.0, 1.0]
        persons = gt.copy()
        persons[0, :, 2] += 0.1
        persons[1, :, 2] -= 0.3
        report = evaluate([Scene(id="d", persons=persons, gt=gt)])
        assert report.root_depth_error_mm == pytest.approx(200.0)
        assert report.mpjpe_mm == pytest.approx(0.0, abs=1e-9)
