"""End-to-end smoke checks on the _core extension's public surface."""

import math
import random

import pytest

import svda_lab


def random_matrix(rng, rows, cols):
    return [[rng.uniform(-1.0, 1.0) for _ in range(cols)] for _ in range(rows)]


def test_softmax_rows_sum_to_one():
    rng = random.Random(7)
    out = svda_lab.softmax_rows(random_matrix(rng, 5, 9))
    assert len(out) == 5 and len(out[0]) == 9
    for row in out:
        assert all(v > 0.0 for v in row)
        assert math.isclose(sum(row), 1.0, abs_tol=1e-12)


def test_l2_normalize_rows_unit_length():
    rng = random.Random(8)
    out = svda_lab.l2_normalize_rows(random_matrix(rng, 4, 6))
    for row in out:
        assert math.isclose(math.sqrt(sum(v * v for v in row)), 1.0, abs_tol=1e-12)


def test_svda_attention_result_structure():
    rng = random.Random(9)
    x = random_matrix(rng, 5, 8)
    w_q = random_matrix(rng, 8, 4)
    w_k = random_matrix(rng, 8, 4)
    w_v = random_matrix(rng, 8, 4)
    sigma = [rng.uniform(0.2, 1.5) for _ in range(4)]

    out = svda_lab.svda_attention(x, w_q, w_k, w_v, sigma)
    assert set(out) == {"y", "attention", "q_normalized", "k_normalized"}
    assert len(out["y"]) == 5 and len(out["y"][0]) == 4
    assert len(out["attention"]) == 5
    for row in out["attention"]:
        assert len(row) == 5
        assert math.isclose(sum(row), 1.0, abs_tol=1e-12)
    for row in out["q_normalized"] + out["k_normalized"]:
        assert math.isclose(math.sqrt(sum(v * v for v in row)), 1.0, abs_tol=1e-12)


def test_baseline_attention_rows_sum_to_one():
    rng = random.Random(10)
    x = random_matrix(rng, 4, 6)
    out = svda_lab.baseline_attention(
        x, random_matrix(rng, 6, 3), random_matrix(rng, 6, 3), random_matrix(rng, 6, 3)
    )
    for row in out["attention"]:
        assert math.isclose(sum(row), 1.0, abs_tol=1e-12)


def test_indicator_closed_forms():
    assert math.isclose(svda_lab.spectral_entropy([1.0, 1.0, 1.0, 1.0]), math.log(4.0),
                        abs_tol=1e-12)
    assert math.isclose(svda_lab.effective_rank([1.0, 1.0, 1.0, 1.0]), 4.0, abs_tol=1e-12)
    assert math.isclose(svda_lab.selectivity([[0.25] * 4] * 4), 0.75, abs_tol=1e-12)
    assert math.isclose(svda_lab.spectral_sparsity([1.0, 0.001, 0.5], eps=0.01), 1.0 / 3.0,
                        abs_tol=1e-12)


def test_compute_metrics_identity():
    gt = [[0.3, 0.6], [0.9, 0.4]]
    m = svda_lab.compute_metrics(gt, gt)
    assert m["abs_rel"] == 0.0
    assert m["rmse"] == 0.0
    assert m["delta1"] == 1.0


def test_compute_metrics_hand_pair():
    m = svda_lab.compute_metrics([[1.0, 2.0]], [[2.0, 2.0]])
    assert math.isclose(m["abs_rel"], 0.25, abs_tol=1e-12)
    assert math.isclose(m["rmse"], math.sqrt(0.5), abs_tol=1e-12)
    assert m["delta1"] == 0.5


def test_generate_scene_deterministic():
    a = svda_lab.generate_scene(h=16, w=16, seed=5, index=2)
    b = svda_lab.generate_scene(h=16, w=16, seed=5, index=2)
    assert a["image"] == b["image"]
    assert a["depth"] == b["depth"]
    assert a["seed"] == b["seed"]
    c = svda_lab.generate_scene(h=16, w=16, seed=5, index=3)
    assert c["image"] != a["image"]
    for row in a["depth"]:
        assert all(0.0 < v <= 1.0 for v in row)


def test_sigma_parameter_overhead():
    svda = svda_lab.model_param_count(mechanism="svda")
    baseline = svda_lab.model_param_count(mechanism="baseline")
    assert svda - baseline == 4 * 4 * 16  # layers * heads * d_k


def test_ragged_input_raises():
    with pytest.raises(svda_lab.SvdaError):
        svda_lab.softmax_rows([[1.0, 2.0], [3.0]])
