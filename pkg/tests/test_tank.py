import numpy as np
import pytest

from mtga.fuzzy import IT2, T1, FlcGenome, enforce_flc_constraints
from mtga.tank import (
    DEFAULT_WEIGHTS,
    EPSILON,
    ControllerConfig,
    PlantConfig,
    fitness_from_itae,
    flc_tasks,
    itae,
    itae_fitness,
    plant_configs,
    plant_derivatives,
    simulate_closed_loop,
    simulate_open_loop,
    weighted_itae,
)


def hand_t1():
    m = np.array([-1.0, 0.0, 1.0])
    s = np.full(3, 0.5)
    return FlcGenome(T1, m, s, s, m, s, s, np.array([0.0, 0.25, 0.5, 0.75, 1.0]))


def test_rest_equilibrium_derivatives():
    assert plant_derivatives(0, 0, 0, 0, PlantConfig()) == (0.0, 0.0)


def test_steady_state_derivatives():
    d1, d2 = plant_derivatives(19.735, 15.0, 21.760, 0.0, PlantConfig())
    assert abs(d1) < 1e-2 and abs(d2) < 1e-2


def test_decoupled_tanks():
    cfg = PlantConfig(alpha3=0.0)
    d1, d2 = plant_derivatives(10.0, 4.0, 0.0, 3.0, cfg)
    assert d1 == 0.0
    assert d2 == pytest.approx((3.0 - 5.6186 * 2.0) / 36.52, abs=1e-15)


def test_negative_levels_treated_as_empty():
    assert plant_derivatives(-1.0, -2.0, 0.0, 0.0, PlantConfig()) == (0.0, 0.0)


def test_outlet_flag():
    closed = plant_derivatives(9.0, 9.0, 0.0, 0.0, PlantConfig())[0]
    opened = plant_derivatives(9.0, 9.0, 0.0, 0.0, PlantConfig(outlet1_open=True))[0]
    assert closed == 0.0 and opened == pytest.approx(-5.6186 * 3 / 36.52)


def test_invalid_plant():
    with pytest.raises(ValueError):
        PlantConfig(alpha3=-1)
    with pytest.raises(ValueError):
        PlantConfig(horizon=0)


def test_zero_setpoint_rest():
    cfg = PlantConfig(setpoints=((0, 0.0),))
    trace = simulate_closed_loop(hand_t1(), cfg)
    assert np.all(trace.e == 0) and np.all(trace.u == 0) and trace.itae() == 0


def test_zero_input_monotone_drainage():
    cfg = PlantConfig(H0=(30.0, 10.0))
    trace = simulate_open_loop(np.zeros(200), cfg)
    total = trace.H1 + trace.H2
    assert np.all(np.diff(total) <= 1e-12)
    assert trace.H1.min() >= 0 and trace.H2.min() >= 0


def test_energy_free_equilibrium():
    trace = simulate_open_loop(np.zeros(200), PlantConfig())
    assert np.all(trace.H1 == 0) and np.all(trace.H2 == 0)


def test_open_loop_steady_state_level():
    u = np.full(2000, 21.760 / 50.0)
    trace = simulate_open_loop(u, PlantConfig(horizon=2000))
    assert trace.H2[-1] == pytest.approx(15.0, abs=1e-2)
    assert trace.H1[-1] == pytest.approx(19.735, abs=1e-2)


def test_delay_shifts_open_loop_input():
    u = np.random.default_rng(0).random(200)
    base = simulate_open_loop(u, PlantConfig())
    delayed = simulate_open_loop(u, PlantConfig(delay=2.0))
    np.testing.assert_array_equal(delayed.Q1[2:], base.Q1[:-2])
    assert np.all(delayed.Q1[:2] == 0)
    shifted = simulate_open_loop(np.concatenate([[0, 0], u[:-2]]), PlantConfig())
    np.testing.assert_allclose(delayed.H2, shifted.H2, atol=1e-12)


def test_closed_loop_delay_semantics():
    trace = simulate_closed_loop(hand_t1(), plant_configs()[1])
    np.testing.assert_allclose(trace.Q1[2:], 50.0 * trace.u[:-2])


def test_setpoint_schedule_config_three():
    sp = plant_configs()[2].setpoint_signal()
    assert sp[0] == 22.5 and sp[99] == 22.5 and sp[100] == 7.5 and sp[-1] == 7.5


def test_integration_step_convergence():
    fine = simulate_closed_loop(hand_t1(), PlantConfig(substeps=20)).H2[-1]
    normal = simulate_closed_loop(hand_t1(), PlantConfig()).H2[-1]
    assert abs(fine - normal) < 1e-3


def test_closed_loop_tracks_setpoint():
    trace = simulate_closed_loop(hand_t1(), PlantConfig(horizon=600))
    assert trace.H2[-1] == pytest.approx(15.0, abs=0.5)
    assert 0 <= trace.u.min() and trace.u.max() <= 1


def test_itae_examples():
    e = np.zeros(200)
    e[:3] = 1.0
    assert itae(e) == 6.0
    assert fitness_from_itae(itae(e)) == pytest.approx(1 / 6, rel=1e-9)
    weighted = sum(w * 6.0 for w in DEFAULT_WEIGHTS)
    assert weighted == pytest.approx(20.0)
    assert fitness_from_itae(0.0) == 1 / EPSILON


def test_weighted_itae_matches_per_plant_traces():
    g = hand_t1()
    configs = plant_configs()
    expected = sum(w * simulate_closed_loop(g, c).itae() for w, c in zip(DEFAULT_WEIGHTS, configs))
    assert weighted_itae(g.genes(), T1, configs)[0] == pytest.approx(expected, rel=1e-12)
    assert itae_fitness(g, configs) == pytest.approx(1 / (expected + EPSILON), rel=1e-12)


def test_it2_with_collapsed_interval_matches_t1_fitness():
    g = hand_t1()
    g2 = FlcGenome(IT2, g.e_means, g.e_std_lower, g.e_std_upper, g.de_means, g.de_std_lower,
                   g.de_std_upper, g.consequents)
    assert itae_fitness(g2) == pytest.approx(itae_fitness(g), rel=1e-12)


def test_flc_tasks_shapes_and_direction():
    t1, t2 = flc_tasks()
    assert (t1.dim, t2.dim) == (17, 23)
    assert t1.direction == "maximize"
    x = np.random.default_rng(0).random((3, 17))
    np.testing.assert_array_equal(t1.repair(t1.repair(x)), t1.repair(x))
    fit = t1.evaluate(t1.repair(x))
    assert fit.shape == (3,) and np.all(fit > 0)


def test_controller_gain_changes_response():
    g = enforce_flc_constraints(hand_t1().genes(), T1)
    slow = simulate_closed_loop(g, PlantConfig(), ControllerConfig(du_max=0.02))
    fast = simulate_closed_loop(g, PlantConfig(), ControllerConfig(du_max=0.1))
    assert slow.H2[30] < fast.H2[30]
