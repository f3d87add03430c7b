"""Norms, energy functional, and the analytic gradient."""

import numpy as np
import pytest

from lattice_choquard import (
    Field,
    LatticeSpec,
    energy_J,
    grad_J,
    h_norm,
    h_norm_pow,
    interaction_energy,
    lp_norm,
    make_context,
    nehari_functional,
    pairing,
    pairing_field,
    pointwise_residual,
    random_field,
)
from conftest import make_model


@pytest.fixture(scope="module")
def ctx_small():
    return make_context(make_model(1, 4, 2.0, 0.5, 4.0))


@pytest.fixture(scope="module")
def ctx_small_p3():
    return make_context(make_model(1, 4, 3.0, 0.5, 4.0))


def test_delta_norm_closed_form():
    # |grad delta|^2 is 1 at the origin and 1/2 at the two neighbors,
    # so ||delta||^2 = 2 + h(0) = 3 and ||delta||^3 = 2 + 2 (1/2)^{3/2} + 1
    ctx2 = make_context(make_model(1, 2, 2.0, 0.5, 4.0))
    ctx3 = make_context(make_model(1, 2, 3.0, 0.5, 4.0))
    d2 = Field.delta(ctx2.spec)
    d3 = Field.delta(ctx3.spec)
    assert h_norm_pow(ctx2, d2) == pytest.approx(3.0, rel=1e-14)
    assert h_norm_pow(ctx3, d3) == pytest.approx(2.0 + 2.0 * 0.5**1.5, rel=1e-14)


def test_norm_homogeneity(ctx_small_p3):
    rng = np.random.default_rng(1)
    u = random_field(ctx_small_p3.spec, rng)
    t = 2.75
    scaled = Field(ctx_small_p3.spec, t * u.values)
    assert h_norm_pow(ctx_small_p3, scaled) == pytest.approx(
        t**3 * h_norm_pow(ctx_small_p3, u), rel=1e-12
    )
    assert h_norm(ctx_small_p3, scaled) == pytest.approx(
        t * h_norm(ctx_small_p3, u), rel=1e-12
    )


def test_interaction_homogeneity(ctx_small):
    # single power q: D(t u) = |t|^{2q} D(u) exactly
    rng = np.random.default_rng(2)
    u = random_field(ctx_small.spec, rng)
    t = -1.5
    scaled = Field(ctx_small.spec, t * u.values)
    assert interaction_energy(ctx_small, scaled) == pytest.approx(
        abs(t) ** 8 * interaction_energy(ctx_small, u), rel=1e-12
    )


def test_interaction_positive(ctx_small):
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = random_field(ctx_small.spec, rng)
        assert interaction_energy(ctx_small, u) > 0


def test_energy_zero_field(ctx_small):
    assert energy_J(ctx_small, Field.zero(ctx_small.spec)) == 0.0


def test_energy_decomposition(ctx_small):
    rng = np.random.default_rng(4)
    u = random_field(ctx_small.spec, rng)
    expected = h_norm_pow(ctx_small, u) / 2.0 - interaction_energy(ctx_small, u) / 2.0
    assert energy_J(ctx_small, u) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("fixture", ["ctx_small", "ctx_small_p3"])
def test_pairing_reproduces_norm(fixture, request):
    # <kappa_u, u> = ||u||^p, the summation-by-parts anchor of the descent
    ctx = request.getfixturevalue(fixture)
    rng = np.random.default_rng(5)
    for _ in range(10):
        u = random_field(ctx.spec, rng)
        assert pairing(ctx, u, u) == pytest.approx(
            h_norm_pow(ctx, u), rel=1e-10
        )


def test_pairing_field_is_the_riesz_representer(ctx_small_p3):
    rng = np.random.default_rng(6)
    u = random_field(ctx_small_p3.spec, rng)
    kappa = pairing_field(ctx_small_p3, u)
    for _ in range(5):
        v = random_field(ctx_small_p3.spec, rng)
        assert float(np.dot(kappa.values, v.values)) == pytest.approx(
            pairing(ctx_small_p3, u, v), rel=1e-12
        )


@pytest.mark.parametrize("fixture", ["ctx_small", "ctx_small_p3"])
def test_gradient_matches_central_differences(fixture, request):
    ctx = request.getfixturevalue(fixture)
    rng = np.random.default_rng(7)
    eps = 1e-6
    for _ in range(3):
        u = random_field(ctx.spec, rng)
        g = grad_J(ctx, u).values
        fd = np.zeros_like(g)
        for i in range(u.values.size):
            up = u.values.copy()
            dn = u.values.copy()
            up[i] += eps
            dn[i] -= eps
            fd[i] = (
                energy_J(ctx, Field(ctx.spec, up)) - energy_J(ctx, Field(ctx.spec, dn))
            ) / (2.0 * eps)
        scale = float(np.max(np.abs(g)))
        assert float(np.max(np.abs(fd - g))) / scale <= 1e-6


def test_gradient_pairing_identity(ctx_small):
    # <J'(u), u> equals the constraint functional, exactly as computed
    rng = np.random.default_rng(8)
    for _ in range(10):
        u = random_field(ctx_small.spec, rng)
        lhs = float(np.dot(grad_J(ctx_small, u).values, u.values))
        assert lhs == pytest.approx(nehari_functional(ctx_small, u), rel=1e-10)


def test_pointwise_residual_is_sup_norm(ctx_small):
    rng = np.random.default_rng(9)
    u = random_field(ctx_small.spec, rng)
    assert pointwise_residual(ctx_small, u) == pytest.approx(
        lp_norm(grad_J(ctx_small, u), np.inf), rel=1e-14
    )


def test_translation_invariance_constant_potential():
    ctx = make_context(make_model(1, 6, 2.0, 0.5, 4.0))
    rng = np.random.default_rng(10)
    coords = ctx.spec.coordinate_array()
    inner = np.max(np.abs(coords), axis=1) <= 3
    u = Field(ctx.spec, np.where(inner, rng.standard_normal(ctx.spec.site_count), 0.0))
    shifted = u.translated((2,))
    assert energy_J(ctx, shifted) == pytest.approx(energy_J(ctx, u), rel=1e-12)
    assert h_norm_pow(ctx, shifted) == pytest.approx(h_norm_pow(ctx, u), rel=1e-12)


def test_periodic_potential_shifted_by_period():
    # with a period-2 potential, shifting by 2 preserves J but shifting
    # by 1 does not
    from lattice_choquard import PeriodicPotential

    model = make_model(
        1, 8, 2.0, 0.5, 4.0, potential=PeriodicPotential(2, np.array([1.0, 3.0]))
    )
    ctx = make_context(model)
    rng = np.random.default_rng(11)
    coords = ctx.spec.coordinate_array()
    inner = np.max(np.abs(coords), axis=1) <= 4
    u = Field(ctx.spec, np.where(inner, rng.standard_normal(ctx.spec.site_count), 0.0))
    assert energy_J(ctx, u.translated((2,))) == pytest.approx(
        energy_J(ctx, u), rel=1e-12
    )
    assert abs(energy_J(ctx, u.translated((1,))) - energy_J(ctx, u)) > 1e-6
