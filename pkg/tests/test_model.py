"""Potentials, nonlinearities, and admissibility checks."""

import numpy as np
import pytest
from scipy.integrate import quad

from lattice_choquard import (
    CoercivePotential,
    ConstantPotential,
    LatticeSpec,
    ModelRejectedError,
    ModelSpec,
    PeriodicPotential,
    SumOfPowers,
    check_hypotheses,
    eval_F,
    eval_f,
    eval_potential,
    exponent_margins,
    potential_floor,
    potential_grid,
    potential_period,
    validate_model,
)
from conftest import make_model


def test_constant_potential():
    pot = ConstantPotential(2.5)
    assert eval_potential(pot, (7,)) == 2.5
    assert potential_floor(pot) == 2.5
    with pytest.raises(ValueError):
        ConstantPotential(0.0)


def test_periodic_potential_wraps():
    pot = PeriodicPotential(period=2, cell=np.array([1.0, 3.0]))
    assert eval_potential(pot, (0,)) == 1.0
    assert eval_potential(pot, (1,)) == 3.0
    assert eval_potential(pot, (2,)) == 1.0
    assert eval_potential(pot, (-1,)) == 3.0
    assert potential_floor(pot) == 1.0
    assert potential_period(pot) == 2


def test_periodic_potential_2d_cell():
    cell = np.array([[1.0, 2.0], [3.0, 4.0]])
    pot = PeriodicPotential(period=2, cell=cell)
    assert eval_potential(pot, (0, 1)) == 2.0
    assert eval_potential(pot, (3, 3)) == 4.0
    assert eval_potential(pot, (-2, -1)) == 2.0


def test_periodic_potential_rejects_nonpositive_cell():
    with pytest.raises(ValueError):
        PeriodicPotential(period=2, cell=np.array([1.0, 0.0]))


def test_coercive_potential_graph_distance():
    pot = CoercivePotential(floor=1.0, center=(0,), scale=1.0, exponent=1.0)
    assert eval_potential(pot, (4,)) == 5.0  # 1 + |4|
    assert eval_potential(pot, (-4,)) == 5.0
    pot2 = CoercivePotential(floor=0.5, center=(1, -1), scale=2.0, exponent=2.0)
    # l1 distance from (1,-1) to (3,0) is 3
    assert eval_potential(pot2, (3, 0)) == 0.5 + 2.0 * 9.0
    assert potential_period(pot2) is None


def test_potential_grid_matches_pointwise():
    spec = LatticeSpec(1, 3)
    pot = PeriodicPotential(period=3, cell=np.array([1.0, 2.0, 5.0]))
    grid = potential_grid(pot, spec)
    for i, x in enumerate(spec.sites()):
        assert grid.reshape(-1)[i] == eval_potential(pot, x)


def test_nonlinearity_point_values():
    nl = SumOfPowers(((1.0, 4.0),))
    assert eval_f(nl, 2.0) == pytest.approx(8.0)  # |t|^{q-2} t
    assert eval_F(nl, 2.0) == pytest.approx(4.0)  # (1/q)|t|^q
    assert eval_f(nl, 0.0) == 0.0
    assert eval_F(nl, 0.0) == 0.0


def test_nonlinearity_parity():
    nl = SumOfPowers(((0.5, 3.0), (2.0, 4.5)))
    ts = np.linspace(-3.0, 3.0, 31)
    f_vals = np.asarray(eval_f(nl, ts))
    F_vals = np.asarray(eval_F(nl, ts))
    assert np.allclose(f_vals, -f_vals[::-1], atol=1e-12)  # f odd
    assert np.allclose(F_vals, F_vals[::-1], atol=1e-12)  # F even


def test_primitive_matches_adaptive_quadrature():
    # F(t) = int_0^t f, checked against scipy quad
    nl = SumOfPowers(((0.7, 3.0), (1.3, 5.5)))
    for t in (-2.0, -0.5, 0.3, 1.7):
        ref, _ = quad(lambda s: float(eval_f(nl, s)), 0.0, t, epsabs=1e-13)
        assert float(eval_F(nl, t)) == pytest.approx(ref, abs=1e-10)


def test_nonlinearity_rejects_bad_terms():
    with pytest.raises(ValueError):
        SumOfPowers(())
    with pytest.raises(ValueError):
        SumOfPowers(((-1.0, 4.0),))
    with pytest.raises(ValueError):
        SumOfPowers(((1.0, 1.0),))  # exponent must exceed 1


def test_theta_is_min_exponent():
    nl = SumOfPowers(((1.0, 5.0), (2.0, 3.5)))
    assert nl.theta == 3.5


def test_exponent_margins():
    spec = make_model(1, 8, 2.0, 0.5, 4.0)
    gap_p, gap_threshold = exponent_margins(spec)
    # q - p = 2 and q - (N + alpha) p / (2N) = 4 - 1.5 = 2.5
    assert gap_p == pytest.approx(2.0)
    assert gap_threshold == pytest.approx(2.5)


def test_validate_model_accepts_reference_models():
    for model in (make_model(1, 8, 2.0, 0.5, 4.0), make_model(2, 6, 3.0, 1.0, 4.0)):
        report = validate_model(model)
        assert all(v.passed for v in report.verdicts)


def test_validate_model_accepts_cubic_in_2d():
    # threshold (N + alpha) p / (2N) = 1.5 < 3 and q = 3 > p = 2
    report = validate_model(make_model(2, 4, 2.0, 1.0, 3.0))
    assert all(v.passed for v in report.verdicts)


def test_validate_model_rejects_quadratic_in_2d():
    with pytest.raises(ModelRejectedError) as err:
        validate_model(make_model(2, 4, 2.0, 1.0, 2.0))
    joined = " ".join(err.value.failures)
    assert "exponent_thresholds" in joined
    assert "superlinearity" in joined
    assert "vanishing_at_zero" in joined


def test_model_spec_rejects_bad_alpha():
    with pytest.raises(ValueError, match="alpha"):
        make_model(1, 4, 2.0, 1.0, 4.0)  # alpha = N


def test_model_spec_rejects_small_p():
    with pytest.raises(ValueError):
        make_model(1, 4, 1.5, 0.5, 4.0)


def test_check_hypotheses_verdict_names():
    report = check_hypotheses(make_model(1, 6, 2.0, 0.5, 4.0))
    names = [v.name for v in report.verdicts]
    assert names == [
        "potential_floor",
        "vanishing_at_zero",
        "growth_bound",
        "superlinearity",
        "fiber_monotonicity",
        "exponent_thresholds",
    ]
    assert all(v.passed for v in report.verdicts)


def test_superlinearity_margin_interval():
    # theta F(t) <= 2 f(t) t with a factor-2 gap for a single power
    report = check_hypotheses(make_model(1, 6, 2.0, 0.5, 4.0))
    verdict = {v.name: v for v in report.verdicts}["superlinearity"]
    assert verdict.passed
    assert verdict.margin >= 0.0


def test_potential_floor_verdict_fails_for_tiny_floor():
    model = make_model(1, 6, 2.0, 0.5, 4.0, potential=ConstantPotential(1e-12))
    report = check_hypotheses(model)
    verdict = {v.name: v for v in report.verdicts}["potential_floor"]
    # a positive constant is a legal floor no matter how small
    assert verdict.passed
