import numpy as np
import pytest

import oracles
from habitmfg.core import HabitSpec, TypeVector, make_grid, merton_rate
from habitmfg.errors import ConfigurationError, DomainError, SolverError
from habitmfg.linear import HabitCurve
from habitmfg.multiplicative import (consumption_mult, expected_wealth_mult, g_mult, h_mult, h_ode_residual,
                                     habit_exponent, picard_step, solve_zbar_mult, transformed_step,
                                     value_mult)

FIG1B = TypeVector(0.2, 0.2, 0.5), HabitSpec(x0=5, z0=10, delta=0.1, T=2, alpha=1.0)
FIG2B = TypeVector(0.2, 0.2, 0.4), HabitSpec(x0=3, z0=10, delta=0.1, T=2, alpha=1.0)
FIG3 = TypeVector(0.1, 0.8, 0.5), HabitSpec(x0=3, z0=0.2, delta=0.1, T=2, alpha=1.0)


@pytest.fixture(scope="module")
def fig1b():
    o, h = FIG1B
    return solve_zbar_mult(make_grid(2, 2000), o, h)


def wiggly(grid):
    return 2.0 + np.sin(3 * grid.nodes) + 0.3 * grid.nodes**2


@pytest.mark.parametrize("conv", ["hjb", "printed"])
def test_terminal_condition(conv):
    grid = make_grid(2, 500)
    g = g_mult(grid, FIG1B[0], 1.0, wiggly(grid), conv)
    assert g[-1] == 1.0
    assert np.all(g > 0)


def test_constant_forcing_closed_forms():
    grid = make_grid(2, 2000)
    o = FIG1B[0]
    a = merton_rate(o)
    s = grid.nodes - grid.T
    one = np.ones(len(grid))
    printed = np.exp(a * s) + (1 - np.exp(a * s)) / a
    hjb = np.exp(-a * s) + (np.exp(-a * s) - 1) / a
    np.testing.assert_allclose(h_mult(grid, o, 0.7, one, "printed"), printed, rtol=1e-6)
    np.testing.assert_allclose(h_mult(grid, o, 0.7, one, "hjb"), hjb, rtol=1e-6)


@pytest.mark.parametrize("conv", ["hjb", "printed"])
def test_h_satisfies_its_linear_ode(conv):
    o = FIG2B[0]
    res = []
    for n in (1000, 2000):
        grid = make_grid(2, n)
        z = wiggly(grid)
        h = h_mult(grid, o, 0.8, z, conv)
        res.append(np.max(np.abs(h_ode_residual(grid, o, 0.8, z, h, conv))))
    assert res[1] < 1e-5
    assert 3.0 < res[0] / res[1] < 5.0


def test_printed_form_violates_reduced_hjb():
    # the printed closed form solves h' = a h - Z^k, not the ODE implied by the HJB equation
    grid = make_grid(2, 2000)
    o = FIG1B[0]
    z = wiggly(grid)
    h = h_mult(grid, o, 1.0, z, "printed")
    assert np.max(np.abs(h_ode_residual(grid, o, 1.0, z, h, "hjb"))) > 0.1


def test_conventions_agree_without_drift():
    grid = make_grid(2, 300)
    o = TypeVector(0.0, 0.3, 0.5)
    z = wiggly(grid)
    np.testing.assert_array_equal(h_mult(grid, o, 1.0, z, "hjb"), h_mult(grid, o, 1.0, z, "printed"))


def test_g_rejects_nonpositive_habit():
    grid = make_grid(1, 10)
    z = np.ones(11)
    z[3] = 0.0
    with pytest.raises(DomainError):
        g_mult(grid, FIG1B[0], 1.0, z)
    with pytest.raises(ConfigurationError):
        g_mult(grid, FIG1B[0], 1.0, np.ones(11), convention="other")


def test_consumption_terminal_and_alpha_limit():
    grid = make_grid(2, 400)
    o = FIG1B[0]
    z = wiggly(grid)
    c = consumption_mult(grid, o, 0.6, z)
    assert c[-1] == pytest.approx(z[-1] ** habit_exponent(o, 0.6), rel=1e-14)
    c0 = consumption_mult(grid, o, 1e-12, z)
    np.testing.assert_allclose(c0, 1.0 / h_mult(grid, o, 1e-12, np.ones(len(grid))), rtol=1e-9)


def test_consumption_bound(fig1b):
    o, h = FIG1B
    k = habit_exponent(o, h.alpha)
    bound = np.exp(merton_rate(o) * h.T) * (h.z0 * np.exp(-h.delta * h.T)) ** k
    assert np.all(np.isfinite(fig1b.c_star)) and np.all(fig1b.c_star > 0)
    assert fig1b.c_star.max() <= bound
    assert fig1b.K_admissible >= fig1b.pi_star


def test_expected_wealth_examples():
    grid = make_grid(2, 1000)
    o = TypeVector(0.0, 0.4, 0.5)
    f = expected_wealth_mult(grid, o, np.full(len(grid), 0.3), 4.0)
    assert f[0] == 4.0
    np.testing.assert_allclose(f, 4.0 * np.exp(-0.3 * grid.nodes), rtol=1e-13)


def test_picard_step_examples():
    o, _ = FIG1B
    grid = make_grid(2, 200)
    h0 = HabitSpec(x0=5, z0=10, delta=0.0, T=2)
    out = picard_step(wiggly(grid), o, h0, grid)
    np.testing.assert_array_equal(out.values, np.full(len(grid), 10.0))
    out = picard_step(wiggly(grid), o, FIG1B[1], grid)
    assert out.values[0] == 10.0
    assert np.all(out.values >= 10 * np.exp(-0.1 * grid.nodes) - 1e-12)
    with pytest.raises(DomainError):
        picard_step(np.full(len(grid), 1e-6), o, FIG1B[1], grid)


def test_zero_intensity_converges_in_one_iteration():
    o, _ = FIG1B
    m = solve_zbar_mult(make_grid(2, 200), o, HabitSpec(x0=5, z0=10, delta=0.0, T=2))
    assert m.iterations == 1
    np.testing.assert_array_equal(m.zbar.values, 10.0)


def test_fixed_point_properties(fig1b):
    o, h = FIG1B
    t = fig1b.grid.nodes
    z = fig1b.zbar.values
    assert fig1b.residual < 1e-8
    assert fig1b.g_m[-1] == 1.0
    assert z[0] == h.z0
    assert np.all(z >= h.z0 * np.exp(-h.delta * t))
    assert np.all(z >= fig1b.beta)
    assert fig1b.pi_star == o.mu / ((1 - o.p) * o.sigma**2)
    again = picard_step(fig1b.zbar, o, h, fig1b.grid)
    assert np.max(np.abs(again.values - z)) < 1e-8
    hist = fig1b.history
    assert all(b <= a for a, b in zip(hist[1:], hist[2:]))


def test_two_initial_curves(fig1b):
    o, h = FIG1B
    other = solve_zbar_mult(fig1b.grid, o, h, init=np.full(len(fig1b.grid), h.z0))
    assert np.max(np.abs(other.zbar.values - fig1b.zbar.values)) < 1e-7


def test_block_sweep_agrees(fig1b):
    o, h = FIG1B
    m = solve_zbar_mult(fig1b.grid, o, h, method="blocks")
    assert m.method == "blocks" and m.residual < 1e-8
    assert np.max(np.abs(m.zbar.values - fig1b.zbar.values)) < 1e-7


def test_solver_error_carries_residual():
    o, h = FIG1B
    with pytest.raises(SolverError) as exc:
        solve_zbar_mult(make_grid(2, 200), o, h, max_iter=2, method="picard")
    assert exc.value.residual > 0 and exc.value.iterations == 2


def test_solver_rejects_bad_inputs():
    o, h = FIG1B
    with pytest.raises(ConfigurationError):
        solve_zbar_mult(make_grid(3, 100), o, h)
    with pytest.raises(ConfigurationError):
        solve_zbar_mult(make_grid(2, 100), o, h, damping=0)
    with pytest.raises(ConfigurationError):
        solve_zbar_mult(make_grid(2, 100), o, HabitSpec(x0=1, z0=0.01, delta=0.1, T=2, epsilon=0.02))


def test_fig2_bottom_mean_reversion():
    o, h = FIG2B
    z = solve_zbar_mult(make_grid(2, 2000), o, h).zbar.values
    k = int(np.argmin(z))
    assert 0 < k < len(z) - 1
    assert np.all(np.diff(z[: k + 1]) < 0) and np.all(np.diff(z[k:]) > 0)


def test_value_examples(fig1b):
    assert value_mult(2.0, 3.0, fig1b) == pytest.approx(3.0**0.5 / 0.5)
    t = fig1b.grid.nodes[700]
    assert value_mult(t, 2.5 * 1.7, fig1b) == pytest.approx(2.5**0.5 * value_mult(t, 1.7, fig1b), rel=1e-13)
    with pytest.raises(DomainError):
        value_mult(0.0, 0.0, fig1b)


@pytest.mark.parametrize("case", [FIG1B, FIG2B, FIG3])
def test_value_hjb_residual(case):
    o, h = case
    m = solve_zbar_mult(make_grid(2, 2000), o, h)
    grid = m.grid
    k_exp = habit_exponent(o, h.alpha)
    worst = 0.0
    for k in range(100, 2000, 150):
        forcing = m.zbar.values[k] ** k_exp
        for x in (0.2, 1.0, 3.0, 10.0):
            r = oracles.fd_hjb_mult(lambda s, w: value_mult(s, w, m), grid.nodes[k], x, o.mu, o.sigma, o.p,
                                    forcing, grid.dt, 1e-3 * x)
            worst = max(worst, abs(r))
    assert worst < 1e-5


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_transform_identity(alpha):
    o = FIG3[0]
    h = HabitSpec(x0=3, z0=0.2, delta=0.1, T=2, alpha=alpha)
    m = solve_zbar_mult(make_grid(2, 2000), o, h)
    zhat, phi = transformed_step(m.zbar, o, h, m.grid)
    assert np.max(np.abs(phi - zhat) / zhat) < 1e-5


def test_habit_curve_interpolates():
    grid = make_grid(1, 4)
    c = HabitCurve(grid, [1, 2, 3, 4, 5])
    assert c(0.125) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        HabitCurve(grid, [1, 2, 0, 4, 5])
