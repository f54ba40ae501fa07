import math

import pytest

import sortwave as sw


def test_minimal_speed_in_bracket():
    p = sw.ModelParams(1.0, 1.0, 1.0)
    ms = sw.minimal_speed(p, theta_nodes=401)
    assert ms.bracket_low < ms.c_star <= ms.bracket_high
    assert ms.lambda_star < 0.0
    assert ms.mode_star.mean_theta_edge > 0.5
    d = sw.edge_diagnostics(ms.mode_star, p, True)
    assert abs(d.integrated_identity_residual) < 1e-8
    assert d.kpp_underestimates


def test_speed_scan_matches_single_evaluations():
    p = sw.ModelParams(1.0, 1.0, 1.0)
    lambdas = [-2.0, -1.0, -0.5]
    scan = sw.speed_scan(p, lambdas, theta_nodes=201)
    for lam, c in zip(lambdas, scan):
        assert c == sw.wave_speed(p, lam, theta_nodes=201)


def test_explicit_phase_edge_and_nullset():
    unit = sw.PhaseParams(1.0, 1.0)
    x_edge, theta_edge = sw.edge_location(1.0, unit)
    assert x_edge == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert theta_edge == pytest.approx(1.0, abs=1e-12)
    for theta in (0.0, 0.5, 1.0, 2.0):
        x = sw.nullset_x(1.0, theta, unit)
        assert abs(sw.phase_free(1.0, x, theta, unit)) < 1e-8
    end = sw.characteristic_endpoint(0.3, 0.6, 1.0, unit, 1e-3)
    assert end["phase"] == pytest.approx(sw.phase_free(1.0, end["x"], end["theta"], unit), abs=1e-6)


def test_structured_errors_reach_python():
    with pytest.raises(sw.SortwaveError, match="outside support"):
        sw.nullset_x(1.0, 5.0, sw.PhaseParams(1.0, 1.0))
    with pytest.raises(RuntimeError):
        sw.Grid1D(0.0, 1.0, 1)


def test_small_simulation_moves_right():
    p = sw.ModelParams(1.0, 1.0, 1.0)
    gx = sw.Grid1D(-10.0, 30.0, 401)
    gt = sw.Grid1D(0.0, 1.0, 5)
    init = sw.step_field(gx, gt, 1.0, 0.5)
    res = sw.simulate(p, init, 5.0, 0.01, threshold=0.5, output_interval=0.5)
    xs = res.track.positions
    assert len(xs) == len(res.track.times)
    assert xs[-1] > xs[0] + 3.0
    assert res.min_density >= 0.0


def test_canonical_uniform_and_residual():
    g = sw.Grid1D(0.0, 1.0, 21)
    flat = sw.SelectedTraitField(g, [1.0] * 21, 0.0)
    out = sw.burgers_solve_uniform(flat, 0.0, 1.0, 1.0, 0.01)
    assert out.theta_bar == flat.theta_bar

    unit = sw.PhaseParams(1.0, 1.0)
    gx = sw.Grid1D(2.0, 3.0, 51)
    gth = sw.Grid1D(0.0, 4.0, 201)
    a = sw.extract_selected_trait(1.0, gx, gth, unit)
    b = sw.extract_selected_trait(1.02, gx, gth, unit)
    assert sw.canonical_residual(a, b, unit) < 1e-2
    for x, th in zip(gx.nodes(), a.theta_bar):
        assert th == pytest.approx(sw.explicit_selected_trait(x, unit), abs=1e-3)


def test_eikonal_front_advances():
    p = sw.ModelParams(1.0, 1.0, 1.0)
    table = sw.SpeedTable.from_dispersion(p, sw.SpeedTable.lambda_grid(-8.0, -0.125, 32))
    c_min, lam_min = table.minimum()
    assert math.sqrt(2.0) < c_min <= 2.0
    g = sw.Grid1D(-5.0, 25.0, 601)
    u0 = [-3.0 * max(x, 0.0) for x in g.nodes()]
    u, times, fronts = sw.eikonal_propagate(table, g, u0, 5.0, 0.004)
    assert max(u) <= 0.0
    assert fronts[-1] > fronts[0]
