import csv

import numpy as np
import pytest

import pebk


def test_experiments_listed():
    ids = [eid for eid, _ in pebk.experiments()]
    assert "superposition" in ids
    assert "burgers-scaling" in ids


def test_operator_matches_dense():
    a = pebk.ade_operator(0.05, a=1.0, nu=1e-2)
    x = np.random.default_rng(3).standard_normal(a.n)
    np.testing.assert_allclose(a.apply(x), a.to_dense() @ x, atol=1e-12)


def test_custom_operator_csr():
    # diag(-1, -2)
    op = pebk.SparseOperator(2, [0, 1, 2], [0, 1], [-1.0, -2.0])
    res = pebk.paraexp_solve(op, np.array([1.0, 1.0]), horizon=1.0, p=2, samples=16, tol=1e-10)
    np.testing.assert_allclose(res.u.final_state(), np.exp([-1.0, -2.0]), rtol=1e-7)


def test_pulse_problem_parallel_matches_serial_and_exact():
    dx = 0.01
    a = pebk.ade_operator(dx)
    x = pebk.grid_points(dx)
    u0 = np.sin(np.pi * x) ** 20
    finals = []
    for p in (1, 4):
        res = pebk.paraexp_solve(a, u0, horizon=1.0, p=p, samples=32, tol=1e-8)
        assert len(res.tau1) == p
        finals.append(res.u.final_state())
    np.testing.assert_allclose(finals[0], finals[1], atol=1e-6)
    exact = pebk.ade_exact(x, 1.0)
    assert np.linalg.norm(finals[0] - exact) / np.linalg.norm(exact) < 5e-2


def test_python_source_callable():
    # u' = -u + 1 from u(0) = 0 has u(t) = 1 - exp(-t).
    op = pebk.SparseOperator(1, [0, 1], [0], [-1.0])
    res = pebk.paraexp_solve(op, np.zeros(1), g=lambda t: np.ones(1), horizon=2.0, p=2,
                             samples=16, tol=1e-10, threaded=True)
    assert res.u.evaluate(2.0)[0] == pytest.approx(1.0 - np.exp(-2.0), rel=1e-7)


def test_bad_arguments_raise():
    with pytest.raises(ValueError):
        pebk.ade_operator(0.003)
    with pytest.raises(ValueError):
        pebk.run_experiment("no-such-experiment", out_dir=".")


def test_run_experiment_writes_csv(tmp_path):
    files, summary = pebk.run_experiment(
        "superposition", {"P": "1,2", "dx": "1e-2"}, out_dir=str(tmp_path), no_timing=True)
    assert summary
    path = tmp_path / "superposition.csv"
    assert str(path) in [str(f) for f in files]
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["P"] for r in rows] == ["1", "2"]
    assert float(rows[1]["diff_vs_first"]) < 1e-4
