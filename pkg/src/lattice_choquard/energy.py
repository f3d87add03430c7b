"""The variational energy, its gradient, and the constraint functional.

Everything is built from three pieces on the truncated box:

    norm^p(u) = sum |grad u|^p + sum h |u|^p          (the space norm)
    D(u)      = sum (R_alpha * F(u)) F(u)             (nonlocal interaction)
    J(u)      = norm^p(u) / p - D(u) / 2

The gradient component at a site x is read off the weak form by summation by
parts:

    grad J(u)(x) = -Delta_p u(x) + h(x) |u|^{p-2} u(x)
                   - (R_alpha * F(u))(x) f(u(x)),

which is simultaneously the pointwise residual of the Euler-Lagrange equation.
The gradient sum in the norm runs over the box enlarged by one ring of sites;
with zero extension that captures every nonzero term, so all values equal
their whole-lattice counterparts for supported fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelTable, build_table, convolve
from .lattice import Field, grad_sq_grid, p_laplacian
from .model import ModelSpec, eval_F, eval_f, potential_grid

__all__ = [
    "EnergyContext",
    "make_context",
    "h_norm",
    "h_norm_pow",
    "interaction_energy",
    "energy_J",
    "grad_J",
    "pairing_field",
    "pairing",
    "nehari_functional",
    "pointwise_residual",
]


@dataclass(frozen=True, eq=False)
class EnergyContext:
    """Immutable bundle of a model, its kernel table, and cached potential."""

    model: ModelSpec
    table: KernelTable
    h_grid: np.ndarray

    def __post_init__(self) -> None:
        if self.table.dim != self.model.lattice.dim:
            raise ValueError("kernel table dimension does not match the model")
        if self.table.radius != self.model.lattice.radius:
            raise ValueError("kernel table radius does not match the model")
        if self.table.alpha != self.model.alpha:
            raise ValueError("kernel table alpha does not match the model")
        if self.h_grid.shape != self.model.lattice.shape:
            raise ValueError("potential grid shape does not match the lattice")
        self.h_grid.setflags(write=False)

    @property
    def spec(self):
        return self.model.lattice

    @property
    def h_flat(self) -> np.ndarray:
        return self.h_grid.reshape(-1)


def make_context(
    model: ModelSpec,
    quad_points: int | None = None,
    transform_order: int | None = None,
    cache_dir: str | None = None,
    table: KernelTable | None = None,
) -> EnergyContext:
    """Build the evaluation context, constructing the kernel table if needed."""
    if table is None:
        kwargs = {}
        if transform_order is not None:
            kwargs["transform_order"] = transform_order
        table = build_table(
            model.lattice, model.alpha, quad_points, cache_dir=cache_dir, **kwargs
        )
    h = potential_grid(model.potential, model.lattice)
    return EnergyContext(model=model, table=table, h_grid=h)


def h_norm_pow(ctx: EnergyContext, u: Field) -> float:
    """The p-th power of the space norm: sum |grad u|^p + sum h |u|^p."""
    p = ctx.model.p
    gsq = grad_sq_grid(u, margin=1)
    grad_part = float(np.sum(gsq ** (p / 2.0)))
    pot_part = float(np.sum(ctx.h_flat * np.abs(u.values) ** p))
    return grad_part + pot_part


def h_norm(ctx: EnergyContext, u: Field) -> float:
    """Space norm (sum |grad u|^p + sum h |u|^p)^{1/p}; zero iff u = 0."""
    return h_norm_pow(ctx, u) ** (1.0 / ctx.model.p)


def interaction_energy(ctx: EnergyContext, u: Field, method: str = "fft") -> float:
    """D(u) = sum (R_alpha * F(u)) F(u), the nonlocal interaction term."""
    fvals = np.asarray(eval_F(ctx.model.nonlinearity, u.values))
    conv = convolve(ctx.table, Field(ctx.spec, fvals), method=method)
    return float(np.sum(conv.values * fvals))


def energy_J(ctx: EnergyContext, u: Field) -> float:
    """J(u) = norm^p(u)/p - D(u)/2; J(0) = 0."""
    return h_norm_pow(ctx, u) / ctx.model.p - 0.5 * interaction_energy(ctx, u)


def pairing_field(ctx: EnergyContext, u: Field) -> Field:
    """The local part of the gradient: -Delta_p u + h |u|^{p-2} u.

    Pairing this field against v in the counting measure realizes the weak
    form of the norm term; against u itself it returns norm^p(u) exactly.
    """
    p = ctx.model.p
    lap = p_laplacian(u, p)
    loc = ctx.h_flat * np.sign(u.values) * np.abs(u.values) ** (p - 1.0)
    return Field(ctx.spec, -lap.values + loc)


def pairing(ctx: EnergyContext, u: Field, v: Field) -> float:
    """Duality pairing (u, v) = sum (-Delta_p u + h |u|^{p-2} u) v."""
    return float(np.dot(pairing_field(ctx, u).values, v.values))


def grad_J(ctx: EnergyContext, u: Field) -> Field:
    """Componentwise derivative of J; entry x equals <J'(u), delta_x>."""
    nl = ctx.model.nonlinearity
    fvals = np.asarray(eval_F(nl, u.values))
    conv = convolve(ctx.table, Field(ctx.spec, fvals))
    local = pairing_field(ctx, u)
    return Field(
        ctx.spec, local.values - conv.values * np.asarray(eval_f(nl, u.values))
    )


def nehari_functional(ctx: EnergyContext, u: Field) -> float:
    """<J'(u), u> = norm^p(u) - sum (R_alpha * F(u)) f(u) u.

    Zero (for u != 0) characterizes membership in the constraint manifold.
    """
    nl = ctx.model.nonlinearity
    fvals = np.asarray(eval_F(nl, u.values))
    conv = convolve(ctx.table, Field(ctx.spec, fvals))
    nonlocal_part = float(
        np.sum(conv.values * np.asarray(eval_f(nl, u.values)) * u.values)
    )
    return h_norm_pow(ctx, u) - nonlocal_part


def pointwise_residual(ctx: EnergyContext, u: Field) -> float:
    """Sup over box sites of the Euler-Lagrange defect |grad J(u)(x)|."""
    return float(np.max(np.abs(grad_J(ctx, u).values)))
