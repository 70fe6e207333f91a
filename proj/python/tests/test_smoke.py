import math

import numpy as np
import pytest

import fmc


def test_mesh_builders():
    m = fmc.interval_mesh(-1.0, 1.0, 4)
    assert m.num_nodes == 5
    assert np.allclose(m.nodes[:, 0], [-1, -0.5, 0, 0.5, 1])
    assert m.boundary_nodes == [0, 4]
    d = fmc.disk_mesh(1.0, 4)
    assert abs(d.volume - math.pi) < 0.01 * math.pi
    with pytest.raises(ValueError):
        fmc.interval_mesh(1.0, 0.0, 4)


def test_prescribed_matches_closed_form():
    m = fmc.interval_mesh(-1.0, 1.0, 256)
    u, iterations, residual = fmc.solve_prescribed(m, 1.0)
    exact = np.sqrt(1 + m.nodes[:, 0] ** 2) - math.sqrt(2)
    assert np.max(np.abs(u - exact)) <= 5e-4
    assert residual <= 1e-10
    ref = fmc.analytic_radial(1.0, 1.0, 1)
    assert ref(0.0) == pytest.approx(1 - math.sqrt(2))


def test_neg_sign_inclusion():
    m = fmc.interval_mesh(-1.0, 1.0, 256)
    spec = fmc.catalog("neg_sign")
    r = fmc.solve_inclusion(m, spec, stationarity_trials=50)
    assert r.converged
    expected = 2 - math.sqrt(2) - math.log(1 + math.sqrt(2))
    assert abs(r.energy - expected) <= 2e-3
    assert fmc.variational_inequality_check(m, r.u, r.zeta) >= -1e-6
    assert fmc.bounds(m, spec)["lower_bound"] == pytest.approx(-3.0)
    report = fmc.verify_solution(m, r.u, r.zeta, spec)
    assert report["passed"]


def test_iterate_callback_and_options():
    m = fmc.disk_mesh(1.0, 2)
    seen = []
    fmc.solve_inclusion(m, fmc.catalog("constant", a=2),
                        on_iterate=lambda stage, k, u: seen.append(stage))
    assert "outer" in seen and "inner" in seen
    with pytest.raises(TypeError):
        fmc.solve_inclusion(m, fmc.catalog("zero"), bogus=1)


def test_energy_functions():
    m = fmc.interval_mesh(-1.0, 1.0, 256)
    cone = 1 - np.abs(m.nodes[:, 0])
    assert fmc.psi(m, cone) == pytest.approx(2.0)
    assert math.isinf(fmc.psi(m, 2 * cone))
    assert not fmc.feasible(m, 2 * cone)
    g = fmc.psi_gradient(m, 0.5 * cone)
    assert g.shape == (257,)
    h = fmc.catalog("heaviside")
    assert h.envelope(0.0) == (0.0, 1.0)
    assert h.envelope(0.1) == (1.0, 1.0)
    assert fmc.catalog("neg_sign").primitive(0.5) == pytest.approx(-0.5)


def test_black_box_rule():
    spec = fmc.Nonlinearity.black_box("sq", lambda x, y, z, s: 1.0 if s < 0.2 else -1.0, 1.0, 2.0)
    lo, hi = spec.envelope(0.2)
    assert (lo, hi) == (-1.0, 1.0)
    assert spec.primitive(1.0) == pytest.approx(0.2 - 0.8, abs=1e-9)


def test_run_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("domain.kind = interval\ndomain.n = 64\nnonlinearity.kind = zero\n")
    out = fmc.run_config(str(cfg), str(tmp_path / "out"))
    assert out["converged"]
    assert out["energy"] == 0.0
    assert (tmp_path / "out" / "solution.csv").exists()
    with pytest.raises(ValueError):
        fmc.run_config(str(tmp_path / "missing.cfg"))
