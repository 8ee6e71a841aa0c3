import json

import numpy as np
import pytest

import eigengan as eg


def test_dataset_is_deterministic_and_low_rank():
    a = eg.make_dataset(6, 2, 200, "normal", 7)
    b = eg.make_dataset(6, 2, 200, "normal", 7)
    assert a["samples"].shape == (200, 6)
    np.testing.assert_array_equal(a["samples"], b["samples"])
    vals, _ = eg.sym_eig(eg.covariance(a["samples"]))
    assert vals[2] < 1e-10 * vals[0]


def test_covariance_matches_numpy():
    x = np.random.default_rng(0).normal(size=(50, 4))
    np.testing.assert_allclose(eg.covariance(x), np.cov(x, rowvar=False, bias=True), atol=1e-12)


def test_ppca_on_diagonal_covariance():
    x = np.random.default_rng(1).normal(size=(4000, 3)) * np.array([3.0, 1.0, 0.5])
    sol = eg.ppca_mle(x, 1)
    assert abs(abs(sol["basis"][0, 0]) - 1.0) < 1e-2
    lam = np.linalg.eigvalsh(np.cov(x, rowvar=False, bias=True))[::-1]
    assert sol["sigma"] ** 2 == pytest.approx(lam[1:].mean(), rel=1e-9)


def test_similarity_of_reference_with_itself():
    u = np.linalg.qr(np.random.default_rng(2).normal(size=(5, 3)))[0]
    res = eg.basis_similarity(u, np.array([3.0, 2.0, 1.0]), u)
    assert res["mean"] == pytest.approx(1.0)


def test_entropy_from_bins():
    assert eg.entropy_coefficient_from_bins([0.3, 0.3, 0.3]) == 0.0
    assert eg.entropy_coefficient_from_bins([0.0, 1.0]) == pytest.approx(1.0)


def test_linear_model_training_and_round_trip():
    data = eg.make_dataset(3, 1, 512, "normal", 3)["samples"]
    cfg = eg.table_train_config("normal")
    cfg.steps = 50
    cfg.seed = 4
    model = eg.LinearModel.create(3, 1, 5)
    out = eg.train(model, data, cfg)
    hist = out["history"]
    assert hist["disc_loss"].shape == (50,)
    assert np.all(np.isfinite(hist["gen_loss"]))
    again = eg.train(model, data, cfg)
    np.testing.assert_array_equal(out["ema"].basis, again["ema"].basis)
    text = out["ema"].save(cfg)
    loaded = eg.load_model(text)
    np.testing.assert_array_equal(loaded.basis, out["ema"].basis)
    assert loaded.save(cfg) == text


def test_layered_model_sampling_and_ablation():
    cfg = eg.LayeredConfig()
    cfg.widths = [2, 3, 4]
    cfg.data_dim = 5
    cfg.noise_dim = 2
    cfg.q = 1
    model = eg.LayeredModel.create(cfg, 1)
    x, zs, eps = model.sample(16, 2)
    assert x.shape == (16, 5) and len(zs) == 3
    np.testing.assert_array_equal(model.forward(zs, eps), x)
    ablated = model.ablated()
    assert model.has_subspaces and not ablated.has_subspaces
    v = model.variance_attribution(200, 3)
    assert v["var_z"] >= 0 and v["var_eps"] >= 0


def test_shape_errors_surface_as_value_error():
    with pytest.raises(ValueError):
        eg.pca_basis(np.zeros((4, 3)), 5)


def test_tiny_bench_emits_csv():
    spec = json.loads(eg.bench_spec_default_json())
    spec["grid"] = ["2:1"]
    spec["losses"] = ["hinge"]
    spec["trials"] = 1
    spec["samples"] = 64
    spec["train"]["steps"] = 5
    spec["workers"] = 1
    csv = eg.run_bench(json.dumps(spec, ensure_ascii=False), "csv")
    assert csv.splitlines()[0] == "loss,2→1"
    assert csv.splitlines()[1].startswith("hinge,")
