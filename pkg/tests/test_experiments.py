import numpy as np
import pytest

from leslie_sim.dynamics import SimulationError, State, StepperConfig
from leslie_sim.experiments import (
    convergence_study,
    energy_monitor,
    ibp_suite,
    weak_strong_experiment,
)
from leslie_sim.grid import Grid, VectorField
from leslie_sim.initial import divfree_smooth_field, smooth_vector_field
from leslie_sim.material import PARODI_DEMO
from leslie_sim.tensor import ElasticTensor

TENSOR = ElasticTensor.isotropic(1.0)


def _initial(grid, seed=30, amp=0.2):
    rng = np.random.default_rng(seed)
    v0 = divfree_smooth_field(grid, rng)
    d0 = VectorField(
        grid,
        VectorField.constant(grid, (0.0, 0.0, 1.0)).values
        + amp * smooth_vector_field(grid, rng).values,
    )
    return State.initial(v0, d0)


def test_ibp_suite_passes():
    report = ibp_suite(ns=(16,), seeds=(0, 1))
    assert report.passed
    assert report.max_residual <= 1e-12
    assert len(report.rows) > 0
    for row in report.rows:
        assert row["residual"] <= 1e-12


def test_energy_monitor_stationary():
    grid = Grid.unit_box(16)
    s = State.initial(VectorField.zeros(grid),
                      VectorField.constant(grid, (0.0, 0.0, 1.0)))
    report = energy_monitor(grid, PARODI_DEMO, TENSOR,
                            StepperConfig(dt=1e-3, t_end=0.01), s)
    assert report.passed
    np.testing.assert_allclose(report.residual, 0.0, atol=1e-13)


def test_energy_monitor_dissipative_run():
    grid = Grid.unit_box(16)
    report = energy_monitor(grid, PARODI_DEMO, TENSOR,
                            StepperConfig(dt=5e-4, t_end=0.1), _initial(grid))
    assert report.passed
    assert report.max_residual_rel <= 1e-6
    assert report.cross_term_max == 0.0


def test_energy_monitor_detects_instability():
    # dt far above the explicit-penalty bound eps / (4 gamma) = 0.025
    grid = Grid.unit_box(16)
    cfg = StepperConfig(dt=4e-3, t_end=0.8, output_every=10)
    try:
        report = energy_monitor(grid, PARODI_DEMO, TENSOR, cfg, _initial(grid, amp=0.4))
        assert not report.passed
    except SimulationError:
        pass


def test_weak_strong_quadratic_scaling():
    grid = Grid.unit_box(16)
    cfg = StepperConfig(dt=1e-3, t_end=0.05, output_every=5)
    initial = _initial(grid)
    big = weak_strong_experiment(grid, PARODI_DEMO, TENSOR, cfg, initial,
                                 seed=5, delta=1e-2)
    small = weak_strong_experiment(grid, PARODI_DEMO, TENSOR, cfg, initial,
                                   seed=5, delta=5e-3)
    ratio = big.max_E / small.max_E
    assert 2.0 < ratio < 8.0  # quadratic in delta: nominal 4, within factor 2
    assert big.delta0 == 1e-2
    assert big.minimal_c >= 0.0
    assert np.all(big.trace.bound >= big.trace.E[0])


def test_weak_strong_zero_delta():
    grid = Grid.unit_box(16)
    cfg = StepperConfig(dt=1e-3, t_end=0.02, output_every=5)
    report = weak_strong_experiment(grid, PARODI_DEMO, TENSOR, cfg,
                                    _initial(grid), seed=5, delta=0.0)
    assert report.max_E <= 1e-12
    assert report.minimal_c == 0.0
    assert report.bound_satisfied


def test_convergence_study_bad_mode():
    with pytest.raises(ValueError):
        convergence_study("spacetime")
