"""Fiber maps along rays, the constraint projection, and the sphere functional.

For u != 0 the fiber map s -> J(su) rises from 0, peaks once, and decreases to
-infinity for admissible models.  Its stationarity equation is

    phi(s) = <J'(su), su> = s^p norm^p(u) - sum (R * F(su)) f(su) su = 0,

whose unique positive root s_u defines the projection m_hat(u) = s_u u onto
the constraint manifold.  Restricted to the unit sphere S of the space norm,
m = m_hat is a homeomorphism onto the manifold with inverse u -> u / ||u||,
and the reduced functional Psi(w) = J(m(w)) turns the constrained ground-state
problem into unconstrained minimization over S.

For power-sum nonlinearities every fiber quantity is a polynomial in s whose
coefficients need one convolution per term:

    phi(s)  = s^p norm^p(u) - sum_{ij} (a_i/q_i) a_j B_ij s^{q_i + q_j}
    J(su)   = s^p norm^p(u)/p - 1/2 sum_{ij} (a_i/q_i)(a_j/q_j) B_ij s^{q_i+q_j}
    B_ij    = sum (R * |u|^{q_i}) |u|^{q_j}.

The root finder brackets by doubling and finishes with bisection, which the
sign structure above makes unconditionally safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .energy import (
    EnergyContext,
    energy_J,
    grad_J,
    h_norm,
    h_norm_pow,
    nehari_functional,
    pairing_field,
)
from .kernel import convolve
from .lattice import DomainError, Field
from .model import ModelViolationError

__all__ = [
    "FiberCoefficients",
    "FiberProbe",
    "fiber_coefficients",
    "fiber_phi",
    "fiber_probe",
    "project_su",
    "m_inverse",
    "psi",
    "psi_grad_pairing",
    "golden_max",
    "fiber_max_golden",
]

_BRACKET_DOUBLINGS = 60
_BISECT_MAX_ITERS = 200
_BISECT_REL_WIDTH = 1e-13


@dataclass(frozen=True, eq=False)
class FiberCoefficients:
    """Polynomial form of the fiber maps along the ray through one field.

    phi(s) = s^p * norm_pow - sum_k phi_weights[k] * s^exponents[k]
    energy(s) = s^p * norm_pow / p - sum_k energy_weights[k] * s^exponents[k]
    """

    p: float
    norm_pow: float
    exponents: np.ndarray
    phi_weights: np.ndarray
    energy_weights: np.ndarray
    conv_fields: tuple[np.ndarray, ...] | None = None

    def phi(self, s):
        s = np.asarray(s, dtype=float)
        tail = np.sum(
            self.phi_weights * s[..., None] ** self.exponents, axis=-1
        )
        out = s**self.p * self.norm_pow - tail
        return out if out.ndim else float(out)

    def energy(self, s):
        s = np.asarray(s, dtype=float)
        tail = np.sum(
            self.energy_weights * s[..., None] ** self.exponents, axis=-1
        )
        out = s**self.p * self.norm_pow / self.p - tail
        return out if out.ndim else float(out)


def fiber_coefficients(
    ctx: EnergyContext, u: Field, keep_fields: bool = False
) -> FiberCoefficients:
    """Assemble the fiber polynomial for a nonzero field.

    One convolution per nonlinearity term; `keep_fields` retains the
    convolved power fields (R * |u|^{q_i}) for reuse by gradient assembly.
    """
    norm_pow = h_norm_pow(ctx, u)
    if norm_pow == 0.0:
        raise DomainError("the zero field has no fiber projection")
    terms = ctx.model.nonlinearity.terms
    absu = np.abs(u.values)
    convs = []
    powers = []
    for _, q in terms:
        w = absu**q
        powers.append(w)
        convs.append(convolve(ctx.table, Field(ctx.spec, w)).values)
    n = len(terms)
    exps = []
    wphi = []
    wen = []
    for i in range(n):
        a_i, q_i = terms[i]
        for j in range(n):
            a_j, q_j = terms[j]
            b = float(np.dot(convs[i], powers[j]))
            exps.append(q_i + q_j)
            wphi.append((a_i / q_i) * a_j * b)
            wen.append(0.5 * (a_i / q_i) * (a_j / q_j) * b)
    exponents = np.asarray(exps)
    order = np.argsort(exponents, kind="stable")
    return FiberCoefficients(
        p=ctx.model.p,
        norm_pow=norm_pow,
        exponents=exponents[order],
        phi_weights=np.asarray(wphi)[order],
        energy_weights=np.asarray(wen)[order],
        conv_fields=tuple(convs) if keep_fields else None,
    )


def fiber_phi(ctx: EnergyContext, u: Field, s: float) -> float:
    """phi(s) = <J'(su), su>, evaluated directly at the scaled field."""
    if s <= 0:
        raise ValueError("the fiber parameter s must be positive")
    if not np.any(u.values):
        raise DomainError("the zero field has no fiber map")
    return nehari_functional(ctx, Field(u.spec, s * u.values))


def _phi_root(coeffs: FiberCoefficients) -> float:
    """Unique positive root of the fiber stationarity polynomial."""
    lo = hi = 1.0
    val = coeffs.phi(1.0)
    if val > 0:
        for _ in range(_BRACKET_DOUBLINGS):
            hi *= 2.0
            if coeffs.phi(hi) <= 0:
                break
        else:
            raise ModelViolationError(
                "fiber derivative never turns negative: the nonlocal term "
                "fails to dominate at large scales"
            )
    elif val < 0:
        for _ in range(_BRACKET_DOUBLINGS):
            lo *= 0.5
            if coeffs.phi(lo) >= 0:
                break
        else:
            raise ModelViolationError(
                "fiber derivative never turns positive: the norm term fails "
                "to dominate at small scales"
            )
    else:
        return 1.0
    for _ in range(_BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_REL_WIDTH * mid:
            break
        if coeffs.phi(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _project(ctx: EnergyContext, u: Field, keep_fields: bool = False):
    coeffs = fiber_coefficients(ctx, u, keep_fields=keep_fields)
    return _phi_root(coeffs), coeffs


def project_su(
    ctx: EnergyContext, u: Field, tol: float = 1e-10
) -> tuple[float, Field]:
    """Projection onto the constraint manifold along the ray through u.

    Returns (s_u, s_u * u) with |phi(s_u)| <= tol * s_u^p * norm^p(u).  The
    projection is scale invariant: rays through u and t u (t > 0) land on the
    same manifold point.
    """
    s, coeffs = _project(ctx, u)
    defect = abs(coeffs.phi(s))
    scale = s**coeffs.p * coeffs.norm_pow
    if defect > tol * scale:
        raise ArithmeticError(
            f"fiber root residual {defect:.3e} exceeds {tol:.1e} * {scale:.3e}"
        )
    return s, Field(u.spec, s * u.values)


def m_inverse(ctx: EnergyContext, u: Field) -> Field:
    """Inverse of the sphere-to-manifold homeomorphism: u -> u / ||u||."""
    norm_pow = h_norm_pow(ctx, u)
    if norm_pow == 0.0:
        raise DomainError("the zero field is not on the constraint manifold")
    defect = abs(nehari_functional(ctx, u))
    if defect > 1e-6 * norm_pow:
        raise DomainError(
            f"field is not on the constraint manifold: |<J'(u), u>| = "
            f"{defect:.3e} vs norm^p = {norm_pow:.3e}"
        )
    return Field(u.spec, u.values / norm_pow ** (1.0 / ctx.model.p))


def psi(ctx: EnergyContext, w: Field) -> float:
    """Psi(w) = J(m(w)) for unit-norm w; equals max_s J(sw)."""
    norm = h_norm(ctx, w)
    if abs(norm - 1.0) > 1e-8:
        raise DomainError(f"psi requires a unit-norm field, got norm {norm!r}")
    s, coeffs = _project(ctx, w)
    return float(coeffs.energy(s))


def psi_grad_pairing(ctx: EnergyContext, w: Field, z: Field) -> float:
    """Directional derivative of Psi at w along a tangent direction z.

    Computed as ||m(w)|| <grad J(m(w)), z>; requires ||w|| = 1 and z tangent
    at w, i.e. (w, z) = 0 under the norm pairing.
    """
    norm = h_norm(ctx, w)
    if abs(norm - 1.0) > 1e-8:
        raise DomainError(f"psi requires a unit-norm field, got norm {norm!r}")
    kappa = pairing_field(ctx, w)
    tangency = float(np.dot(kappa.values, z.values))
    scale = float(np.linalg.norm(kappa.values) * np.linalg.norm(z.values))
    if abs(tangency) > 1e-6 * max(scale, 1e-300):
        raise DomainError(
            f"direction is not tangent: |(w, z)| = {abs(tangency):.3e}"
        )
    s, _ = _project(ctx, w)
    g = grad_J(ctx, Field(w.spec, s * w.values))
    return s * float(np.dot(g.values, z.values))


@dataclass(frozen=True)
class FiberProbe:
    """Sampled fiber data along one ray: s grid, J(su), and phi(s)."""

    s_values: np.ndarray
    energies: np.ndarray
    phi_values: np.ndarray


def fiber_probe(
    ctx: EnergyContext, u: Field, s_values: Sequence[float]
) -> FiberProbe:
    """Evaluate the fiber maps on a grid of positive scales."""
    s = np.asarray(s_values, dtype=float)
    if np.any(s <= 0):
        raise ValueError("fiber scales must be positive")
    coeffs = fiber_coefficients(ctx, u)
    return FiberProbe(
        s_values=s, energies=coeffs.energy(s), phi_values=coeffs.phi(s)
    )


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-10,
    max_iters: int = 200,
) -> tuple[float, float]:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iters):
        if b - a <= rel_tol * max(abs(a), abs(b), 1e-30):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    s = c if fc >= fd else d
    return float(s), float(max(fc, fd))


def fiber_max_golden(
    ctx: EnergyContext, u: Field, rel_tol: float = 1e-10
) -> tuple[float, float]:
    """Directly maximize s -> J(su) by golden section (independent of phi).

    Each probe evaluates the energy at the scaled field from scratch, so this
    serves as an optimization oracle for the root-based projection.
    """
    if not np.any(u.values):
        raise DomainError("the zero field has no fiber map")

    def val(s: float) -> float:
        return energy_J(ctx, Field(u.spec, s * u.values))

    hi = 1.0
    for _ in range(_BRACKET_DOUBLINGS):
        if val(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ModelViolationError("fiber energy never turns negative")
    return golden_max(val, 0.0, hi, rel_tol=rel_tol)
