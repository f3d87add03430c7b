"""Ground-state search by projected descent on the unit sphere.

The scaling degree of freedom is eliminated through the fiber projection:
minimizing J over the constraint manifold is the same as minimizing
Psi(w) = J(m(w)) over the unit sphere S of the space norm.  Each iterate

    w_{k+1} = normalize(w_k + t_k z_k),
    z_k     = -(g_k - (<g_k, kappa_k> / <kappa_k, kappa_k>) kappa_k),

projects the full gradient g_k = grad J(m(w_k)) onto the tangent hyperplane
{z : (w_k, z) = 0} of the norm pairing (kappa_k is the pairing field of w_k)
and retracts radially.  The directional derivative of Psi along z is
s_k <g_k, z>, so z_k is a descent direction whenever the projected gradient
is nonzero; steps start from a Barzilai-Borwein estimate and backtrack under
an Armijo test.  Multi-start guards against nonglobal minima; the best
converged start wins.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import (
    EnergyContext,
    energy_J,
    h_norm,
    nehari_functional,
    pairing_field,
    pointwise_residual,
)
from .lattice import Field
from .model import (
    CoercivePotential,
    ModelViolationError,
    eval_f,
    potential_period,
)
from .nehari import fiber_coefficients, golden_max, _phi_root

__all__ = [
    "SolverConfig",
    "SolveReport",
    "StartDiagnostics",
    "NonconvergenceError",
    "minimize_ground_state",
    "mountain_pass_level",
    "MountainPassLevel",
    "center_normalize",
    "mountain_pass_geometry_probe",
    "GeometryProbe",
]

logger = logging.getLogger(__name__)

_STEP_FLOOR = 1e-14
_LOG_EVERY = 1000


@dataclass(frozen=True)
class SolverConfig:
    """Descent parameters; the defaults suit desk-scale boxes."""

    max_iters: int = 5000
    grad_tol: float = 1e-8
    energy_tol: float = 1e-12
    step0: float = 1.0
    backtrack_factor: float = 0.5
    sufficient_decrease: float = 1e-4
    n_starts: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0 or not self.energy_tol > 0:
            raise ValueError("tolerances must be positive")
        if not self.step0 > 0:
            raise ValueError("step0 must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ValueError("sufficient_decrease must lie in (0, 1)")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")


@dataclass(frozen=True)
class StartDiagnostics:
    start: int
    converged: bool
    iterations: int
    energy: float
    residual: float
    hit_step_floor: bool


class NonconvergenceError(RuntimeError):
    """No start met the residual and stall criteria."""

    def __init__(self, diagnostics: list[StartDiagnostics]):
        self.diagnostics = diagnostics
        lines = ", ".join(
            f"start {d.start}: iters={d.iterations} energy={d.energy:.6g} "
            f"residual={d.residual:.3e}"
            for d in diagnostics
        )
        super().__init__(f"no start converged ({lines})")


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of a ground-state search.

    The candidate u is on the constraint manifold by construction; `energy`
    is J(u), the reported level c.  Histories cover the winning start only.
    """

    u: Field
    energy: float
    nehari_residual: float
    pointwise_residual: float
    s_history: tuple[float, ...]
    psi_history: tuple[float, ...]
    residual_history: tuple[float, ...]
    iterations: int
    winner_start: int
    start_energies: tuple[float, ...]
    diagnostics: tuple[StartDiagnostics, ...] = field(default=())

    def scalars(self) -> dict:
        return {
            "c": self.energy,
            "nehari_residual": self.nehari_residual,
            "pointwise_residual": self.pointwise_residual,
            "iterations": self.iterations,
            "winner_start": self.winner_start,
            "start_energies": list(self.start_energies),
            "s_history": list(self.s_history),
        }


@dataclass
class _StartResult:
    w: Field
    s: float
    psi: float
    converged: bool
    iterations: int
    residual: float
    hit_step_floor: bool
    s_history: list
    psi_history: list
    residual_history: list


def initial_fields(ctx: EnergyContext, cfg: SolverConfig) -> list[Field]:
    """Start 0 is a centered bump; the rest are seeded noise with decay."""
    spec = ctx.spec
    bump = np.zeros(spec.site_count)
    center = (0,) * spec.dim
    bump[spec.index_of(center)] = 1.0
    for j in range(spec.dim):
        for sgn in (1, -1):
            site = list(center)
            site[j] += sgn
            bump[spec.index_of(tuple(site))] = 0.5
    fields = [Field(spec, bump)]
    dist = np.sqrt(np.sum(spec.coordinate_array() ** 2, axis=1))
    envelope = np.exp(-0.5 * dist)
    for k in range(1, cfg.n_starts):
        rng = np.random.default_rng([cfg.seed, k])
        vals = rng.standard_normal(spec.site_count) * envelope
        fields.append(Field(spec, vals))
    return fields


def _assemble_gradient(ctx, w: Field, s: float, coeffs, kappa: Field) -> np.ndarray:
    """grad J(s w) from the pieces already computed at the sphere point w.

    The norm part is (p-1)-homogeneous, so it rescales from kappa; the
    convolved power fields of w rescale termwise to give (R * F(sw)).
    """
    p = ctx.model.p
    terms = ctx.model.nonlinearity.terms
    conv_F = np.zeros(ctx.spec.site_count)
    for (a, q), conv in zip(terms, coeffs.conv_fields):
        conv_F += (a / q) * s**q * conv
    u_vals = s * w.values
    f_u = np.asarray(eval_f(ctx.model.nonlinearity, u_vals))
    return s ** (p - 1.0) * kappa.values - conv_F * f_u


def _descend(ctx: EnergyContext, cfg: SolverConfig, w0: Field, start: int) -> _StartResult:
    norm0 = h_norm(ctx, w0)
    if norm0 == 0.0:
        raise ValueError("initial field must be nonzero")
    w = Field(ctx.spec, w0.values / norm0)
    coeffs = fiber_coefficients(ctx, w, keep_fields=True)
    s = _phi_root(coeffs)
    psi_val = float(coeffs.energy(s))

    s_hist: list[float] = []
    psi_hist: list[float] = []
    res_hist: list[float] = []

    prev_w = None
    prev_grad_dir = None
    step = cfg.step0
    converged = False
    hit_floor = False
    it = 0

    for it in range(cfg.max_iters):
        kappa = pairing_field(ctx, w)
        g = _assemble_gradient(ctx, w, s, coeffs, kappa)
        resid = float(np.max(np.abs(g)))

        s_hist.append(s)
        psi_hist.append(psi_val)
        res_hist.append(resid)

        scale = max(1.0, s ** (ctx.model.p - 1.0))
        if resid <= cfg.grad_tol * scale and it > 0 and (
            psi_hist[-2] - psi_val <= cfg.energy_tol * max(1.0, abs(psi_val))
        ):
            converged = True
            break

        kn2 = float(np.dot(kappa.values, kappa.values))
        kg = float(np.dot(g, kappa.values))
        z = -(g - (kg / kn2) * kappa.values)
        zn2 = float(np.dot(z, z))
        if zn2 == 0.0:
            converged = resid <= cfg.grad_tol * scale
            break
        slope = -s * zn2  # d/dt Psi(retract(w + t z)) at t = 0

        if prev_w is not None:
            dw = w.values - prev_w
            dgrad = (-z) - prev_grad_dir
            denom = float(np.dot(dw, dgrad))
            num = float(np.dot(dw, dw))
            if denom > 0 and np.isfinite(denom) and num > 0:
                step = min(max(num / denom, 1e-12), 1e6)
        prev_w = w.values.copy()
        prev_grad_dir = -z

        t = step
        accepted = False
        while t >= _STEP_FLOOR:
            trial_vals = w.values + t * z
            trial = Field(ctx.spec, trial_vals)
            tnorm = h_norm(ctx, trial)
            if tnorm > 0:
                w_try = Field(ctx.spec, trial_vals / tnorm)
                coeffs_try = fiber_coefficients(ctx, w_try, keep_fields=True)
                s_try = _phi_root(coeffs_try)
                psi_try = float(coeffs_try.energy(s_try))
                if psi_try <= psi_val + cfg.sufficient_decrease * t * slope:
                    w, coeffs, s, psi_val = w_try, coeffs_try, s_try, psi_try
                    accepted = True
                    break
            t *= cfg.backtrack_factor
        if not accepted:
            # finite-precision stall: w did not move, so the residual from
            # the top of the loop is current; accept iff it already meets
            # the stationarity criterion
            hit_floor = True
            converged = resid <= cfg.grad_tol * scale
            break
        if (it + 1) % _LOG_EVERY == 0:
            logger.info(
                "start %d iter %d: psi=%.12g resid=%.3e step=%.2e",
                start, it + 1, psi_val, resid, t,
            )

    final_resid = res_hist[-1] if res_hist else float("inf")
    return _StartResult(
        w=w,
        s=s,
        psi=psi_val,
        converged=converged,
        iterations=it + 1,
        residual=final_resid,
        hit_step_floor=hit_floor,
        s_history=s_hist,
        psi_history=psi_hist,
        residual_history=res_hist,
    )


def minimize_ground_state(
    ctx: EnergyContext, cfg: SolverConfig | None = None, threads: int = 1
) -> SolveReport:
    """Search for the ground-state level c = inf of J over the manifold.

    Runs `cfg.n_starts` independent descents and returns the lowest converged
    one.  Raises NonconvergenceError with per-start diagnostics when no start
    meets the residual criterion, and propagates model violations.
    """
    cfg = cfg or SolverConfig()
    starts = initial_fields(ctx, cfg)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda kw: _descend(ctx, cfg, kw[1], kw[0]), enumerate(starts))
            )
    else:
        results = [_descend(ctx, cfg, w0, k) for k, w0 in enumerate(starts)]

    diags = tuple(
        StartDiagnostics(
            start=k,
            converged=r.converged,
            iterations=r.iterations,
            energy=r.psi,
            residual=r.residual,
            hit_step_floor=r.hit_step_floor,
        )
        for k, r in enumerate(results)
    )
    converged = [(k, r) for k, r in enumerate(results) if r.converged]
    if not converged:
        raise NonconvergenceError(list(diags))
    winner_idx, winner = min(converged, key=lambda kr: (kr[1].psi, kr[0]))

    u_star = Field(ctx.spec, winner.s * winner.w.values)
    energy = energy_J(ctx, u_star)
    report = SolveReport(
        u=u_star,
        energy=float(energy),
        nehari_residual=abs(nehari_functional(ctx, u_star)),
        pointwise_residual=pointwise_residual(ctx, u_star),
        s_history=tuple(winner.s_history),
        psi_history=tuple(winner.psi_history),
        residual_history=tuple(winner.residual_history),
        iterations=winner.iterations,
        winner_start=winner_idx,
        start_energies=tuple(r.psi for r in results),
        diagnostics=diags,
    )
    logger.info(
        "ground-state candidate: c=%.12g nehari=%.3e pointwise=%.3e "
        "(start %d, %d iterations)",
        report.energy,
        report.nehari_residual,
        report.pointwise_residual,
        winner_idx,
        winner.iterations,
    )
    return report


@dataclass(frozen=True)
class MountainPassLevel:
    """Path level along the ray through the candidate, and a sampled bound."""

    path_level: float
    direction_min: float
    t_negative: float


def mountain_pass_level(
    ctx: EnergyContext, u_star: Field, n_dirs: int = 1000, seed: int = 0
) -> MountainPassLevel:
    """Cross-check the minimax characterization of the level c.

    Doubles t until J(t u*) < 0, maximizes J along the straight path from 0
    to t u* (the max should reproduce J(u*)), and returns the minimum over
    `n_dirs` random directions of the fiber maximum max_s J(su), which can
    never undercut c.
    """
    t = 1.0
    for _ in range(60):
        t *= 2.0
        if energy_J(ctx, Field(u_star.spec, t * u_star.values)) < 0:
            break
    else:
        raise ModelViolationError("energy never turns negative along the ray")

    _, path_level = golden_max(
        lambda s: energy_J(ctx, Field(u_star.spec, s * t * u_star.values)),
        0.0,
        1.0,
        rel_tol=1e-12,
    )

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(n_dirs):
        v = Field(ctx.spec, rng.standard_normal(ctx.spec.site_count))
        coeffs = fiber_coefficients(ctx, v)
        s_v = _phi_root(coeffs)
        best = min(best, float(coeffs.energy(s_v)))
    return MountainPassLevel(
        path_level=float(path_level), direction_min=float(best), t_negative=t
    )


def center_normalize(ctx: EnergyContext, u: Field) -> Field:
    """Translate by potential periods so the sup-norm argmax lies in the
    fundamental cell at the box center.

    Valid for periodic potentials (constant counts with period 1).  The
    translation is skipped, with a log flag, when the support would leave the
    box or the energy check disagrees; coercive potentials admit no valid
    translation and pass through unchanged.
    """
    if isinstance(ctx.model.potential, CoercivePotential):
        logger.info("center_normalize: coercive potential, no translation applied")
        return u
    T = potential_period(ctx.model.potential)
    if not np.any(u.values):
        return u
    argmax = int(np.argmax(np.abs(u.values)))
    peak = ctx.spec.point_of(argmax)
    shift = tuple(-T * (c // T) for c in peak)
    if all(s == 0 for s in shift):
        return u
    r = ctx.spec.radius
    coords = ctx.spec.coordinate_array()[np.flatnonzero(u.values)]
    lo = coords.min(axis=0) + np.asarray(shift)
    hi = coords.max(axis=0) + np.asarray(shift)
    if np.any(lo < -r) or np.any(hi > r):
        logger.warning(
            "center_normalize skipped: translated support would leave the box"
        )
        return u
    moved = u.translated(shift)
    j0 = energy_J(ctx, u)
    j1 = energy_J(ctx, moved)
    if abs(j1 - j0) > 1e-12 * max(1.0, abs(j0)):
        logger.warning(
            "center_normalize skipped: energy moved by %.3e under translation",
            abs(j1 - j0),
        )
        return u
    return moved


@dataclass(frozen=True)
class GeometryProbe:
    """Witnesses for the minimax geometry: a positive floor on a small
    sphere, and a far point with negative energy."""

    rho: float
    sigma: float
    witness: Field


def mountain_pass_geometry_probe(
    ctx: EnergyContext, n_samples: int = 64, seed: int = 0
) -> GeometryProbe:
    """Find rho > 0 with min J >= sigma > 0 on the norm sphere of radius rho,
    plus a witness e beyond it with J(e) < 0.

    Scans dyadic radii down to 1e-4, sampling `n_samples` random directions
    per radius; raises when no radius yields a positive floor.
    """
    rng = np.random.default_rng(seed)
    spec = ctx.spec
    dirs = []
    for _ in range(n_samples):
        v = Field(spec, rng.standard_normal(spec.site_count))
        dirs.append(Field(spec, v.values / h_norm(ctx, v)))

    best_rho = 0.0
    best_sigma = -np.inf
    rho = 1.0
    while rho >= 1e-4:
        sigma = min(
            energy_J(ctx, Field(spec, rho * d.values)) for d in dirs
        )
        if sigma > best_sigma:
            best_rho, best_sigma = rho, sigma
        rho *= 0.5
    if best_sigma <= 0:
        raise ModelViolationError(
            "no radius down to 1e-4 gives a positive energy floor"
        )

    e_dir = dirs[0]
    t = max(2.0 * best_rho, 1.0)
    for _ in range(60):
        witness = Field(spec, t * e_dir.values)
        if energy_J(ctx, witness) < 0 and t > best_rho:
            break
        t *= 2.0
    else:
        raise ModelViolationError("energy never turns negative along a ray")
    return GeometryProbe(rho=best_rho, sigma=best_sigma, witness=witness)
