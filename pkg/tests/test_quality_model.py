import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jerkmeter import (
    FEATURE_NAMES,
    FeatureVector,
    InvalidModel,
    ModelFormatError,
    QualityModel,
    ShapeError,
    default_model,
    load_model,
    normalize,
    predict,
    save_model,
    score_features,
)
from jerkmeter.quality_model import forward, sigmoid


def small_model(n=2, m=1, hidden=None, output=None, mean=None, std=None, meta=None):
    return QualityModel(
        selected_features=tuple(FEATURE_NAMES[:n]),
        norm_mean=np.zeros(n) if mean is None else np.asarray(mean, float),
        norm_std=np.ones(n) if std is None else np.asarray(std, float),
        hidden=np.zeros((m, n + 1)) if hidden is None else np.asarray(hidden, float),
        output=np.zeros(m + 1) if output is None else np.asarray(output, float),
        meta=meta or {},
    )


def oracle_predict(hidden, output, x):
    """Pure-python reimplementation used as an independent check."""
    total = output[-1]
    for m, row in enumerate(hidden):
        z = row[-1] + sum(w * v for w, v in zip(row[:-1], x))
        total += output[m] / (1.0 + math.exp(-z)) if z >= 0 else \
            output[m] * math.exp(z) / (1.0 + math.exp(z))
    return total


class TestSigmoid:
    def test_midpoint(self):
        assert sigmoid(0.0) == 0.5

    def test_extremes_do_not_overflow(self):
        with np.errstate(over="raise"):
            lo = sigmoid(-500.0)
            hi = sigmoid(500.0)
        assert 0.0 <= lo < 1e-100
        assert 0.0 <= 1.0 - hi < 1e-100

    @settings(max_examples=100)
    @given(st.floats(-500, 500))
    def test_complement_identity(self, t):
        assert abs(sigmoid(t) + sigmoid(-t) - 1.0) <= 1e-12

    def test_vectorized(self):
        out = sigmoid(np.array([0.0, 500.0, -500.0]))
        assert out[0] == 0.5 and out.shape == (3,)


class TestPredict:
    def test_zero_output_weights_give_bias(self):
        model = small_model(output=[0.0, 7.25])
        for x in (np.zeros(2), np.ones(2), np.array([-3.0, 9.0])):
            assert predict(x, model).dmos_pred == 7.25

    def test_single_zeroed_node_gives_half(self):
        model = small_model(m=1, output=[1.0, 0.0])
        assert predict(np.zeros(2), model).dmos_pred == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            predict(np.zeros(3), small_model(n=2))

    def test_monotone_in_output_weight(self):
        base = small_model(hidden=[[0.3, -0.2, 0.1]], output=[1.0, 0.0])
        bumped = small_model(hidden=[[0.3, -0.2, 0.1]], output=[1.5, 0.0])
        x = np.array([0.4, -1.2])
        assert predict(x, bumped).dmos_pred > predict(x, base).dmos_pred

    def test_matches_pure_python_oracle(self, rng):
        for _ in range(50):
            n, m = int(rng.integers(1, 7)), int(rng.integers(1, 5))
            hidden = rng.normal(size=(m, n + 1))
            output = rng.normal(size=m + 1)
            model = small_model(n=n, m=m, hidden=hidden, output=output)
            x = rng.normal(size=n)
            assert predict(x, model).dmos_pred == pytest.approx(
                oracle_predict(hidden, output, x), abs=1e-9)

    def test_batch_forward_matches_single(self, rng):
        hidden = rng.normal(size=(3, 5))
        output = rng.normal(size=4)
        batch = rng.normal(size=(6, 4))
        batched = forward(hidden, output, batch)
        for i in range(6):
            assert batched[i] == pytest.approx(
                float(forward(hidden, output, batch[i])), abs=1e-12)


class TestNormalize:
    def fv(self, values):
        return FeatureVector(**{k: values.get(k, 0.0) for k in FEATURE_NAMES})

    def test_means_map_to_zero(self):
        model = small_model(mean=[3.0, 5.0], std=[2.0, 4.0])
        fv = self.fv({"NumFz": 3.0, "AvgFzDur": 5.0})
        assert normalize(fv, model).tolist() == [0.0, 0.0]

    def test_mean_plus_std_maps_to_one(self):
        model = small_model(mean=[3.0, 5.0], std=[2.0, 4.0])
        fv = self.fv({"NumFz": 5.0, "AvgFzDur": 9.0})
        assert normalize(fv, model).tolist() == [1.0, 1.0]

    def test_random_zscore_oracle(self, rng):
        mean = rng.normal(size=2)
        std = rng.uniform(0.5, 2.0, size=2)
        model = small_model(mean=mean, std=std)
        fv = self.fv({"NumFz": 1.7, "AvgFzDur": -0.3})
        got = normalize(fv, model)
        assert got[0] == (1.7 - mean[0]) / std[0]
        assert got[1] == (-0.3 - mean[1]) / std[1]

    def test_rescaled_feature_leaves_score_unchanged(self, rng):
        # Scaling a stored feature and its statistics consistently is a
        # no-op on the normalized vector, hence on the prediction.
        hidden = rng.normal(size=(2, 3))
        output = rng.normal(size=3)
        mean = np.array([1.0, 2.0])
        std = np.array([0.5, 1.5])
        a, b = 3.0, -7.0
        raw = {"NumFz": 4.0, "AvgFzDur": 2.5}
        base = small_model(hidden=hidden, output=output, mean=mean, std=std)
        scaled = small_model(
            hidden=hidden, output=output,
            mean=[a * mean[0] + b, mean[1]], std=[a * std[0], std[1]])
        fv_base = self.fv(raw)
        fv_scaled = self.fv({"NumFz": a * raw["NumFz"] + b,
                             "AvgFzDur": raw["AvgFzDur"]})
        assert score_features(fv_base, base).dmos_pred == \
            score_features(fv_scaled, scaled).dmos_pred


class TestModelValidation:
    def test_param_count(self):
        model = small_model(n=2, m=3, hidden=np.zeros((3, 3)), output=np.zeros(4))
        assert model.param_count == 3 * (2 + 1) + 3 + 1

    def test_unknown_feature(self):
        with pytest.raises(InvalidModel):
            QualityModel(("Bogus",), np.zeros(1), np.ones(1),
                         np.zeros((1, 2)), np.zeros(2))

    def test_duplicate_feature(self):
        with pytest.raises(InvalidModel):
            QualityModel(("NumFz", "NumFz"), np.zeros(2), np.ones(2),
                         np.zeros((1, 3)), np.zeros(2))

    def test_nonpositive_std(self):
        with pytest.raises(InvalidModel):
            small_model(std=[1.0, 0.0])

    def test_wrong_hidden_arity(self):
        with pytest.raises(InvalidModel):
            small_model(hidden=np.zeros((1, 5)))

    def test_wrong_output_arity(self):
        with pytest.raises(InvalidModel):
            small_model(m=1, output=np.zeros(5))

    def test_non_finite(self):
        with pytest.raises(InvalidModel):
            small_model(hidden=[[np.nan, 0.0, 0.0]])

    def test_arrays_frozen(self):
        model = small_model()
        with pytest.raises(ValueError):
            model.hidden[0, 0] = 1.0


class TestSerialization:
    def test_round_trip_default_model(self):
        model = default_model()
        again = load_model(save_model(model))
        assert again.selected_features == model.selected_features
        assert np.array_equal(again.norm_mean, model.norm_mean)
        assert np.array_equal(again.norm_std, model.norm_std)
        assert np.array_equal(again.hidden, model.hidden)
        assert np.array_equal(again.output, model.output)
        assert again.meta == model.meta

    def test_full_precision_round_trip(self, rng):
        model = small_model(hidden=rng.normal(size=(1, 3)) / 3.0,
                            output=rng.normal(size=2) * math.pi)
        again = load_model(save_model(model))
        assert np.array_equal(again.hidden, model.hidden)
        assert np.array_equal(again.output, model.output)

    def test_wrong_output_arity_names_field(self):
        doc = json.loads(save_model(default_model()).decode())
        doc["output"] = [0.1] * 5
        with pytest.raises(ModelFormatError) as exc:
            load_model(json.dumps(doc))
        assert exc.value.field == "output"

    @pytest.mark.parametrize("mutate,field", [
        (lambda d: d.pop("features"), "features"),
        (lambda d: d.pop("norm"), "norm"),
        (lambda d: d.pop("hidden"), "hidden"),
        (lambda d: d.update(schema=99), "schema"),
        (lambda d: d.update(features=["NumFz", "Nope"]), "features"),
        (lambda d: d["norm"].update(mean=[0.0]), "norm"),
        (lambda d: d.update(hidden=[[0.1, "x"]]), "hidden"),
        (lambda d: d.update(meta=[1, 2]), "meta"),
    ])
    def test_schema_violations(self, mutate, field):
        doc = json.loads(save_model(default_model()).decode())
        mutate(doc)
        with pytest.raises(ModelFormatError) as exc:
            load_model(json.dumps(doc))
        assert exc.value.field == field

    def test_nonpositive_std_is_invalid_model(self):
        doc = json.loads(save_model(default_model()).decode())
        doc["norm"]["std"][2] = -1.0
        with pytest.raises(InvalidModel):
            load_model(json.dumps(doc))

    def test_not_json(self):
        with pytest.raises(ModelFormatError):
            load_model(b"\x00\x01not json")

    def test_top_level_array(self):
        with pytest.raises(ModelFormatError):
            load_model(b"[1, 2, 3]")

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), m=st.integers(1, 4))
    def test_random_models_round_trip(self, seed, n, m):
        rng = np.random.default_rng(seed)
        model = QualityModel(
            selected_features=tuple(FEATURE_NAMES[:n]),
            norm_mean=rng.normal(size=n),
            norm_std=rng.uniform(0.1, 5.0, size=n),
            hidden=rng.normal(size=(m, n + 1)),
            output=rng.normal(size=m + 1),
            meta={"normalization": "fitted"},
        )
        again = load_model(save_model(model))
        assert np.array_equal(again.hidden, model.hidden)
        assert np.array_equal(again.norm_mean, model.norm_mean)
        assert again.calibrated


class TestDefaultModel:
    def test_structure(self):
        model = default_model()
        assert model.selected_features == (
            "AvgFzDist", "NumFz", "rDurDist", "rFD", "StdFzDist", "rLenFz",
        )
        assert model.n_hidden == 3
        assert model.param_count == 25
        assert not model.calibrated
        assert np.array_equal(model.norm_mean, np.zeros(6))
        assert np.array_equal(model.norm_std, np.ones(6))

    def test_prediction_at_origin_matches_hand_evaluation(self):
        # With identity normalization and a zero input, only the biases
        # act; the whole network reduces to three scalar sigmoids.
        model = default_model()
        expected = oracle_predict(model.hidden.tolist(), model.output.tolist(),
                                  [0.0] * 6)
        got = predict(np.zeros(6), model)
        assert got.dmos_pred == pytest.approx(expected, abs=1e-12)
        assert not got.calibrated

    def test_random_vectors_match_oracle(self, rng):
        model = default_model()
        for _ in range(20):
            x = rng.normal(size=6)
            assert predict(x, model).dmos_pred == pytest.approx(
                oracle_predict(model.hidden.tolist(), model.output.tolist(), x),
                abs=1e-9)
