import numpy as np
import pytest

from poai.errors import ModelFormatError, ValidationError
from poai.scorer.model import (
    LAYER_SPECS,
    ScorerModel,
    init_model,
    load_model,
    loss,
    predict,
    predict_batch,
    save_model,
)


def zero_model() -> ScorerModel:
    return ScorerModel(**{name: np.zeros(shape) for name, shape, _ in LAYER_SPECS})


class TestInit:
    def test_same_seed_identical(self):
        a, b = init_model(5), init_model(5)
        for (_, wa), (_, wb) in zip(a.params(), b.params()):
            np.testing.assert_array_equal(wa, wb)

    def test_different_seeds_differ(self):
        a, b = init_model(1), init_model(2)
        assert any(
            not np.array_equal(wa, wb) for (_, wa), (_, wb) in zip(a.params(), b.params())
        )

    def test_shapes_match_layer_chain(self):
        model = init_model(0)
        for name, shape, _ in LAYER_SPECS:
            assert getattr(model, name).shape == shape

    def test_three_conv_two_dense(self):
        kinds = [kind for _, _, kind in LAYER_SPECS]
        assert kinds.count("conv") == 3
        assert kinds.count("dense") == 2

    def test_biases_start_at_zero(self):
        model = init_model(3)
        for name, shape, kind in LAYER_SPECS:
            if kind == "bias":
                np.testing.assert_array_equal(getattr(model, name), np.zeros(shape))

    def test_bad_shape_rejected(self):
        arrays = {name: np.zeros(shape) for name, shape, _ in LAYER_SPECS}
        arrays["conv1_w"] = np.zeros((2, 2, 1, 4))
        with pytest.raises(ValidationError, match="conv1_w"):
            ScorerModel(**arrays)


class TestPredict:
    def test_zero_model_predicts_zero(self, rng):
        model = zero_model()
        assert predict(model, rng.uniform(0, 1, (3, 3))) == 0.0

    def test_purity(self, rng):
        model = init_model(8)
        m = rng.uniform(0, 1, (3, 3))
        assert predict(model, m) == predict(model, m)

    def test_finite_on_random_inputs(self, rng):
        model = init_model(8)
        preds = predict_batch(model, rng.uniform(0, 1, (64, 3, 3)))
        assert np.all(np.isfinite(preds))

    def test_batch_matches_single(self, rng):
        # vectorized matmuls may reassociate sums across batch sizes, so
        # agreement is to float64 round-off rather than bitwise
        model = init_model(9)
        x = rng.uniform(0, 1, (5, 3, 3))
        batch = predict_batch(model, x)
        singles = [predict(model, m) for m in x]
        np.testing.assert_allclose(batch, singles, rtol=1e-12)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValidationError):
            predict(init_model(0), rng.uniform(0, 1, (2, 3)))


class TestLoss:
    def test_zero_model_zero_label(self):
        assert loss(zero_model(), [(np.zeros((3, 3)), 0.0)]) == 0.0

    def test_zero_model_label_ten(self):
        assert loss(zero_model(), [(np.zeros((3, 3)), 10.0)]) == 100.0

    def test_duplicated_batch_same_loss(self, rng):
        model = init_model(4)
        batch = [(rng.uniform(0, 1, (3, 3)), float(v)) for v in rng.uniform(0, 100, 4)]
        assert loss(model, batch) == pytest.approx(loss(model, batch + batch), rel=1e-12)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValidationError):
            loss(init_model(0), [])

    def test_doubling_l2_strictly_increases_loss(self, rng):
        model = init_model(4)  # random init has nonzero conv weights
        batch = [(rng.uniform(0, 1, (3, 3)), 50.0)]
        assert loss(model, batch, l2_lambda=2e-4) > loss(model, batch, l2_lambda=1e-4)

    def test_l2_ignores_dense_weights(self):
        model = zero_model()
        model.dense1_w += 3.0
        assert loss(model, [(np.zeros((3, 3)), 0.0)], l2_lambda=1.0) == 0.0

    def test_l2_counts_conv_weights(self):
        model = zero_model()
        model.conv3_w += 1.0  # 256 entries of 1.0
        assert loss(model, [(np.zeros((3, 3)), 0.0)], l2_lambda=0.5) == pytest.approx(128.0)


class TestPersistence:
    def test_roundtrip_predicts_bitwise_equal(self, rng):
        model = init_model(21)
        again = load_model(save_model(model))
        for m in rng.uniform(0, 1, (100, 3, 3)):
            assert predict(model, m) == predict(again, m)

    def test_save_is_deterministic(self):
        assert save_model(init_model(3)) == save_model(init_model(3))

    def test_corrupted_byte_gives_structured_error(self):
        blob = bytearray(save_model(init_model(1)))
        blob[31] = ord("!")
        with pytest.raises(ModelFormatError):
            load_model(bytes(blob))

    def test_truncated_payload_rejected(self):
        blob = save_model(init_model(1))
        with pytest.raises(ModelFormatError):
            load_model(blob[: len(blob) // 2])

    def test_empty_payload_rejected(self):
        with pytest.raises(ModelFormatError):
            load_model(b"")

    def test_version_mismatch_rejected(self):
        text = save_model(init_model(1)).decode("utf-8")
        bumped = text.replace('"version": 1', '"version": 99', 1)
        with pytest.raises(ModelFormatError, match="version"):
            load_model(bumped.encode("utf-8"))

    def test_foreign_json_rejected(self):
        with pytest.raises(ModelFormatError):
            load_model(b'{"hello": "world"}')
