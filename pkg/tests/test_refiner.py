import numpy as np
import pytest

from autodiff.grad_check import grad_check
from autodiff.tensor import Tape, add, layer_norm, mse
from conftest import TOY, random_scene, randomize_output
from pose_refiners.config import ModelConfig
from pose_refiners.model_file import MAGIC, load_model, model_from_bytes, model_to_bytes, save_model
from pose_refiners.refiner import (encode_set, forward, init_model, loss, parameter_count, parameter_shapes, refine,
                                   scene_loss)
from pose_refiners.set_attention import (AttentionBlock, linear, mab_shapes, pma_forward, pma_shapes, row_ff,
                                         sab_forward)
from utils.errors import ConfigError, ModelFileError, SceneValidationError, ShapeError


def relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-12))


class TestModelConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ConfigError):
            ModelConfig(d=10, heads=4)
        with pytest.raises(ConfigError):
            ModelConfig(mode="everyone")
        with pytest.raises(ConfigError):
            ModelConfig.from_dict({"d": 8, "depth": 3})

    def test_canonical_json_is_sorted_and_compact(self):
        text = ModelConfig().canonical_json()
        assert " " not in text
        assert text.index('"d"') < text.index('"decoder_hidden"') < text.index('"heads"')


class TestParameters:
    def test_default_count_in_expected_range(self):
        assert 50_000 <= parameter_count(ModelConfig()) <= 200_000

    def test_count_matches_stored_tensors(self):
        model = init_model(ModelConfig(), seed=0)
        assert model.parameter_count == sum(p.size for p in model.params.values())
        assert model.parameter_count == parameter_count(model.config)

    def test_doubling_decoder_hidden(self):
        config = ModelConfig()
        bigger = ModelConfig(decoder_hidden=2 * config.decoder_hidden)
        d, h, out = config.d, config.decoder_hidden, config.person_width
        # hidden layer (2d*h + h) and output layer (h*out + out) both grow with h
        assert parameter_count(bigger) - parameter_count(config) == 2 * d * h + h + h * out

    def test_scene_mode_adds_joint_projection(self):
        people = parameter_count(ModelConfig(mode="people"))
        scene = parameter_count(ModelConfig(mode="scene"))
        assert scene - people == 3 * 64 + 64
        assert "joint_proj.weight" in parameter_shapes(ModelConfig(mode="scene"))

    def test_init_is_seeded(self):
        a = init_model(ModelConfig(**TOY, joints=4), seed=5)
        b = init_model(ModelConfig(**TOY, joints=4), seed=5)
        for name in a.params:
            np.testing.assert_array_equal(a.params[name], b.params[name])
        assert not np.any(a.params["decoder.out.weight"])
        assert np.all(a.params["sab0.ln1.gain"] == 1.0)


class TestResidualIdentity:
    @pytest.mark.parametrize("mode", ["people", "scene", "none"])
    def test_zero_decoder_returns_initial_bitwise(self, rng, mode):
        model = init_model(ModelConfig(mode=mode), seed=0)
        scene = random_scene(rng, 3, 15)
        result = refine(model, scene)
        np.testing.assert_array_equal(result.refined, scene.persons)
        assert not np.any(result.corrections.delta)

    def test_loss_of_identity_is_initial_loss(self, rng):
        model = init_model(ModelConfig(), seed=0)
        scene = random_scene(rng, 2, 15)
        assert loss(refine(model, scene).refined, scene.gt) == loss(scene.persons, scene.gt)

    def test_loss_definition(self):
        persons = np.zeros((2, 2, 3))
        gt = np.ones((2, 2, 3))
        # each person contributes 6 squared unit errors; averaged over 2 persons
        assert loss(persons, gt) == 6.0

    def test_loss_needs_gt(self):
        with pytest.raises(SceneValidationError):
            loss(np.zeros((1, 2, 3)), None)

    def test_tape_loss_matches_numpy_loss(self, rng, toy_model):
        scene = random_scene(rng, 3, 4)
        out = forward(toy_model, Tape(), scene)
        expected = loss(refine(toy_model, scene).refined, scene.gt)
        assert scene_loss(out.refined, scene.gt).data[0] == pytest.approx(expected, rel=1e-12)


class TestPermutationSymmetry:
    def test_people_mode_over_random_scenes(self, rng):
        model = randomize_output(init_model(ModelConfig(), seed=1))
        for i in range(200):
            n = int(rng.integers(1, 17))
            scene = random_scene(rng, n, 15, scene_id=f"s{i}")
            order = rng.permutation(n)
            base = refine(model, scene)
            moved = refine(model, scene.permuted(order))
            assert relative_difference(base.embedding.e, moved.embedding.e) < 1e-5
            assert np.max(np.abs(base.refined[order] - moved.refined)) < 1e-8

    @pytest.mark.parametrize("mode", ["scene", "none"])
    def test_other_modes(self, rng, mode):
        model = randomize_output(init_model(ModelConfig(mode=mode, **TOY, joints=15), seed=2))
        for i in range(20):
            n = int(rng.integers(1, 6))
            scene = random_scene(rng, n, 15, scene_id=f"s{i}")
            order = rng.permutation(n)
            base = refine(model, scene)
            moved = refine(model, scene.permuted(order))
            assert np.max(np.abs(base.refined[order] - moved.refined)) < 1e-8
            if mode == "scene":
                assert relative_difference(base.embedding.e, moved.embedding.e) < 1e-5

    def test_single_person_scene(self, rng, toy_model):
        result = refine(toy_model, random_scene(rng, 1, 4))
        assert result.refined.shape == (1, 4, 3)
        assert result.embedding.e.shape == (8,)


class TestInteractionModes:
    def test_none_mode_keeps_persons_apart(self, rng):
        model = randomize_output(init_model(ModelConfig(mode="none", **TOY, joints=4), seed=4))
        scene = random_scene(rng, 3, 4)
        persons = scene.persons.copy()
        persons[1] += rng.normal(scale=0.2, size=persons[1].shape)
        a = refine(model, scene).refined
        b = refine(model, scene.with_persons(persons)).refined
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[2], b[2])
        assert refine(model, scene).embedding.vectors.shape == (3, 8)

    def test_people_mode_couples_persons(self, rng, toy_model):
        scene = random_scene(rng, 2, 4)
        persons = scene.persons.copy()
        persons[1, 2] += 0.1
        a = refine(toy_model, scene).refined
        b = refine(toy_model, scene.with_persons(persons)).refined
        assert np.max(np.abs(a[0] - b[0])) > 0.0

    def test_encode_set_shapes(self, rng):
        scene = random_scene(rng, 3, 4)
        for mode, shapes in (("people", [(3, 8)]), ("scene", [(12, 8)]), ("none", [(1, 8)] * 3)):
            model = init_model(ModelConfig(mode=mode, **TOY, joints=4), seed=0)
            assert [s.shape for s in encode_set(model, scene)] == shapes

    def test_translation_does_not_change_corrections_in_people_mode(self, rng, toy_model):
        scene = random_scene(rng, 2, 4)
        shifted = scene.with_persons(scene.persons + np.array([0.5, -0.2, 1.0]))
        np.testing.assert_allclose(refine(toy_model, scene).corrections.delta,
                                   refine(toy_model, shifted).corrections.delta, atol=1e-12)

    def test_joint_count_mismatch(self, rng, toy_model):
        with pytest.raises(ShapeError):
            refine(toy_model, random_scene(rng, 2, 5))


class TestGradients:
    @pytest.mark.parametrize("mode", ["people", "scene", "none"])
    def test_full_model_matches_finite_differences(self, rng, mode):
        config = ModelConfig(joints=4, d=8, sab_blocks=1, heads=2, decoder_hidden=16, mode=mode)
        model = randomize_output(init_model(config, seed=7))
        scene = random_scene(rng, 2, 4)

        for name, value in model.params.items():
            def f(tape, x, name=name):
                weights = model.bind(tape, overrides={name: x})
                return scene_loss(forward(model, tape, scene, weights).refined, scene.gt)

            assert grad_check(f, value) < 1e-4, name


class TestModelFile:
    def test_save_and_load_is_exact(self, tmp_path, toy_model):
        path = save_model(toy_model, tmp_path / "toy.sref")
        loaded = load_model(path)
        assert loaded.config == toy_model.config
        assert list(loaded.params) == list(toy_model.params)
        for name in toy_model.params:
            np.testing.assert_array_equal(loaded.params[name], toy_model.params[name])
        assert model_to_bytes(loaded) == path.read_bytes()

    def test_header(self, toy_model):
        blob = model_to_bytes(toy_model)
        assert blob[:4] == MAGIC
        assert int.from_bytes(blob[4:8], "little") == 1

    def test_bad_magic(self, toy_model):
        blob = model_to_bytes(toy_model)
        with pytest.raises(ModelFileError):
            model_from_bytes(b"XXXX" + blob[4:])

    def test_unknown_version(self, toy_model):
        blob = model_to_bytes(toy_model)
        with pytest.raises(ModelFileError):
            model_from_bytes(blob[:4] + (2).to_bytes(4, "little") + blob[8:])

    def test_truncated(self, toy_model):
        blob = model_to_bytes(toy_model)
        for cut in (3, 10, len(blob) // 2, len(blob) - 1):
            with pytest.raises(ModelFileError):
                model_from_bytes(blob[:cut])

    def test_trailing_bytes(self, toy_model):
        with pytest.raises(ModelFileError):
            model_from_bytes(model_to_bytes(toy_model) + b"\x00")

    def test_refines_identically_after_reload(self, tmp_path, rng, toy_model):
        scene = random_scene(rng, 3, 4)
        loaded = load_model(save_model(toy_model, tmp_path / "toy.sref"))
        np.testing.assert_array_equal(refine(toy_model, scene).refined, refine(loaded, scene).refined)


def random_weights(rng, shapes) -> dict:
    """Away from init so layer-norm gains and biases matter too."""
    values = {}
    for name, (shape, kind) in shapes.items():
        if kind == "gain":
            values[name] = 1.0 + 0.1 * rng.normal(size=shape)
        elif kind == "bias":
            values[name] = 0.1 * rng.normal(size=shape)
        else:
            values[name] = rng.normal(scale=1.0 / np.sqrt(shape[-1]), size=shape)
    return values


def bound_block(tape, values, prefix, heads=2) -> AttentionBlock:
    return AttentionBlock({name: tape.constant(v) for name, v in values.items()}, prefix, heads)


class TestSetAttention:
    D = 8

    @pytest.fixture
    def sab_values(self, rng):
        return random_weights(rng, mab_shapes("sab", self.D))

    @pytest.fixture
    def pma_values(self, rng):
        return random_weights(rng, pma_shapes("pma", self.D))

    def test_sab_single_row_attends_to_itself(self, rng, sab_values):
        tape = Tape()
        block = bound_block(tape, sab_values, "sab")
        X = tape.constant(rng.normal(size=(1, self.D)))
        out = sab_forward(block, X)

        # one key means every attention weight is exactly 1, so attention returns o(v(X))
        w = block.weights
        attended = linear(w, "sab.o", linear(w, "sab.v", X))
        H = layer_norm(add(X, attended), w["sab.ln1.gain"], w["sab.ln1.bias"])
        expected = layer_norm(add(H, row_ff(w, "sab", H)), w["sab.ln2.gain"], w["sab.ln2.bias"])
        assert out.shape == (1, self.D)
        np.testing.assert_allclose(out.data, expected.data, atol=1e-12, rtol=0)

    def test_sab_is_row_equivariant(self, rng, sab_values):
        x = rng.normal(size=(5, self.D))
        order = rng.permutation(5)
        tape = Tape()
        block = bound_block(tape, sab_values, "sab")
        out = sab_forward(block, tape.constant(x)).data
        permuted = sab_forward(block, tape.constant(x[order])).data
        assert np.max(np.abs(permuted - out[order])) < 1e-10

    def test_gradient_through_one_sab(self, rng, sab_values):
        target = rng.normal(size=(3, self.D))

        def f(tape, x):
            return mse(sab_forward(bound_block(tape, sab_values, "sab"), x), tape.constant(target))

        assert grad_check(f, rng.normal(size=(3, self.D))) < 1e-4

    def test_pma_single_row(self, rng, pma_values):
        tape = Tape()
        out = pma_forward(bound_block(tape, pma_values, "pma"), tape.constant(rng.normal(size=(1, self.D))))
        assert out.shape == (1, self.D)
        assert np.all(np.isfinite(out.data))

    def test_pma_ignores_row_order(self, rng, pma_values):
        z = rng.normal(size=(6, self.D))
        tape = Tape()
        block = bound_block(tape, pma_values, "pma")
        a = pma_forward(block, tape.constant(z)).data
        b = pma_forward(block, tape.constant(z[rng.permutation(6)])).data
        assert relative_difference(a, b) < 1e-5

    def test_pma_ignores_duplicated_rows(self, rng, pma_values):
        z = rng.normal(size=(4, self.D))
        tape = Tape()
        block = bound_block(tape, pma_values, "pma")
        once = pma_forward(block, tape.constant(z)).data
        twice = pma_forward(block, tape.constant(np.concatenate([z, z]))).data
        assert relative_difference(once, twice) < 1e-5
