# Smoke tests for the Python module: surface construction, the diffusion
# generator, dataset round trips, a short training run, and error mapping.

import math

import numpy as np
import pytest

import biip


def test_torus_counts():
    g = biip.wrap_torus(5, 26)
    assert g.node_count == 130
    assert len(g.edges) == 260
    assert g.boundary_nodes == []
    assert g.boundary_cycles == []


def test_cylinder_boundary():
    torus = biip.wrap_torus(5, 26)
    cyl, source_nodes = biip.extract_cylinder(torus, 5, 26, 9, 8)
    assert cyl.node_count == 40
    assert len(cyl.boundary_cycles) == 2
    assert all(len(c) == 5 for c in cyl.boundary_cycles)
    assert len(source_nodes) == 40
    assert len(cyl.interior_nodes()) == 30


def test_capped_tube_parent():
    g = biip.build_genus2_minus_cylinder(7)
    parent = biip.attach_capped_tube(g, cycle=0, length=6)
    assert parent.node_count == g.node_count + 5 * 6 + 1
    assert parent.boundary_nodes == []
    assert set(map(tuple, g.edges)) <= set(map(tuple, parent.edges))


def test_laplacian_rows_sum_to_zero():
    g = biip.build_grid(4, 4)
    c = biip.CliqueComplex(g, max_level=1)
    lap = c.hodge_laplacian(0)
    assert lap.shape == (16, 16)
    assert np.abs(lap.sum(axis=1)).max() < 1e-12
    assert np.abs(lap - lap.T).max() == 0.0


def test_generate_train_eval_round_trip(tmp_path):
    g = biip.build_grid(5, 5)
    c = biip.CliqueComplex(g, max_level=1)
    f0 = biip.random_heat_sources(g, 3, 10.0, 7)
    traj = biip.simulate_linear_diffusion(c, 0, f0, alpha=1.0, dt=0.05, steps=12)
    full = biip.make_dataset(traj, g, "dirichlet")
    full.validate()
    assert full.knot_count() == 13

    # JSON round trip is byte-stable and bit-exact.
    text = biip.dataset_to_json(full)
    again = biip.dataset_from_json(text)
    assert biip.dataset_to_json(again) == text
    assert np.array_equal(again.interior_obs, full.interior_obs)

    train_d = biip.slice_dataset(full, 0, 9)
    test_d = biip.slice_dataset(full, 9, 12)
    model = biip.init_model(num_layers=3, hidden_dim=8, kind="dirichlet", seed=7)
    op = biip.teacher_forced_operator(model)
    cfg = biip.TrainConfig(epochs=3, segment_length=2, lr=1e-3, seed=1)
    res = biip.train(op, train_d, config=cfg)
    assert len(res.log) == 3
    assert all(math.isfinite(e.train_mse) for e in res.log)

    rep = biip.evaluate(res.op, train_d, test_d, method="rk4_fixed")
    assert math.isfinite(rep["train"]["rmse"])
    assert rep["test"]["present"]
    assert not rep["new"]["present"]
    assert np.asarray(rep["train"]["predicted"]).shape == (10, 9)

    # Checkpoints survive the disk round trip bit for bit.
    path = tmp_path / "ckpt.json"
    biip.save_text(str(path), biip.checkpoint_to_json(res.op))
    back = biip.load_checkpoint(str(path))
    assert back.variant == "teacher_forced"
    assert np.array_equal(back.model.flatten(), res.op.model.flatten())


def test_oracle_matches_generator():
    g = biip.build_grid(5, 5)
    c = biip.CliqueComplex(g, max_level=1)
    f0 = biip.random_heat_sources(g, 3, 10.0, 11)
    traj = biip.simulate_linear_diffusion(c, 0, f0, alpha=1.0, dt=0.02, steps=10)
    d = biip.make_dataset(traj, g, "dirichlet")

    oracle = biip.oracle_operator(alpha=1.0)
    rep = biip.evaluate(oracle, d, method="euler_fixed")
    assert rep["train"]["rmse"] < 1e-9

    rolled = biip.rollout_interior(oracle, d, start=0, method="euler_fixed")
    assert rolled.shape == (11, 9)
    assert np.array_equal(rolled[0], d.interior_obs[0])


def test_error_mapping():
    with pytest.raises(biip.SpecError):
        biip.make_graph(2, [(0, 0)])  # self loop

    g = biip.build_grid(4, 4)
    c = biip.CliqueComplex(g, max_level=1)
    f0 = biip.random_heat_sources(g, 2, 10.0, 3)
    # A step far beyond the stability bound trips the divergence gate, which
    # is a subclass of the numeric error.
    with pytest.raises(biip.NumericError):
        biip.simulate_linear_diffusion(c, 0, f0, alpha=1.0, dt=10.0, steps=4)
    with pytest.raises(biip.DivergenceError):
        biip.simulate_linear_diffusion(c, 0, f0, alpha=1.0, dt=10.0, steps=4)

    with pytest.raises(biip.IoError):
        biip.load_dataset("/nonexistent/dataset.json")


def test_hashing():
    assert (
        biip.sha256_hex("abc")
        == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )
