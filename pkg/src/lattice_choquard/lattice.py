"""Truncated lattice boxes, fields on them, and the discrete difference calculus.

The domain is the box B = {x in Z^N : max_j |x_j| <= r}.  Fields are stored on
B and read as zero outside (Dirichlet truncation), so every sum below equals
its whole-lattice value for functions supported in B.  The calculus follows
the edge-based conventions of graph analysis:

    Gamma(u, v)(x) = 1/2 sum_{y ~ x} (u(y) - u(x)) (v(y) - v(x))
    |grad u|(x)    = sqrt(Gamma(u, u)(x))
    Delta_p u(x)   = 1/2 sum_{y ~ x} (|grad u|^{p-2}(y) + |grad u|^{p-2}(x))
                                     (u(y) - u(x))

with y ~ x meaning |x - y|_{l1} = 1.  For p = 2 the operator reduces to the
ordinary graph Laplacian.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "LatticeSpec",
    "Field",
    "neighbors",
    "gradient_form",
    "grad_norm",
    "p_laplacian",
    "lp_norm",
    "ibp_check",
    "random_field",
    "write_field_csv",
    "read_field_csv",
]


class DomainError(ValueError):
    """A lattice point outside the box, or mismatched lattice specs."""


@dataclass(frozen=True)
class LatticeSpec:
    """Box truncation of Z^N.

    Parameters
    ----------
    dim : int
        Spatial dimension N >= 1.
    radius : int
        Box radius r >= 1; the box holds (2r+1)^N sites.
    """

    dim: int
    radius: int

    def __post_init__(self) -> None:
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be an integer >= 1, got {self.dim!r}")
        if not isinstance(self.radius, (int, np.integer)) or self.radius < 1:
            raise ValueError(f"radius must be an integer >= 1, got {self.radius!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "radius", int(self.radius))

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    @property
    def site_count(self) -> int:
        return self.side**self.dim

    def contains(self, x: Sequence[int]) -> bool:
        return len(x) == self.dim and all(abs(int(c)) <= self.radius for c in x)

    def index_of(self, x: Sequence[int]) -> int:
        """Row-major index of a site, coordinates shifted by +radius."""
        if not self.contains(x):
            raise DomainError(f"site {tuple(x)} outside box of radius {self.radius}")
        idx = 0
        for c in x:
            idx = idx * self.side + int(c) + self.radius
        return idx

    def point_of(self, index: int) -> tuple[int, ...]:
        """Inverse of index_of."""
        if not 0 <= index < self.site_count:
            raise DomainError(f"index {index} out of range")
        coords = []
        for _ in range(self.dim):
            coords.append(index % self.side - self.radius)
            index //= self.side
        return tuple(reversed(coords))

    def sites(self) -> Iterator[tuple[int, ...]]:
        """Iterate box sites in index (row-major) order."""
        for multi in np.ndindex(*self.shape):
            yield tuple(int(m) - self.radius for m in multi)

    def coordinate_array(self) -> np.ndarray:
        """Integer array of shape (site_count, dim) listing sites in index order."""
        grids = np.meshgrid(
            *[np.arange(-self.radius, self.radius + 1)] * self.dim, indexing="ij"
        )
        return np.stack([g.reshape(-1) for g in grids], axis=1)


@dataclass(frozen=True, eq=False)
class Field:
    """Real-valued function on the box sites, implicitly zero outside.

    Values are stored flat in the index order of ``spec`` and must be finite.
    """

    spec: LatticeSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.size != self.spec.site_count:
            raise ValueError(
                f"expected {self.spec.site_count} values, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @staticmethod
    def zero(spec: LatticeSpec) -> "Field":
        return Field(spec, np.zeros(spec.site_count))

    @staticmethod
    def delta(spec: LatticeSpec, x: Sequence[int] | None = None) -> "Field":
        """Indicator of a single site (the origin by default)."""
        vals = np.zeros(spec.site_count)
        site = (0,) * spec.dim if x is None else tuple(x)
        vals[spec.index_of(site)] = 1.0
        return Field(spec, vals)

    @staticmethod
    def from_grid(spec: LatticeSpec, grid: np.ndarray) -> "Field":
        arr = np.asarray(grid, dtype=float)
        if arr.shape != spec.shape:
            raise ValueError(f"grid shape {arr.shape} does not match {spec.shape}")
        return Field(spec, arr.reshape(-1))

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.spec.shape)

    def value_at(self, x: Sequence[int]) -> float:
        """Zero-extended read: 0 for points outside the box."""
        if self.spec.contains(x):
            return float(self.values[self.spec.index_of(x)])
        return 0.0

    def scaled(self, s: float) -> "Field":
        return Field(self.spec, s * self.values)

    def copy(self) -> "Field":
        return Field(self.spec, self.values.copy())

    def support_radius(self) -> int:
        """Largest sup-norm coordinate carrying a nonzero value; -1 if u = 0."""
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return -1
        coords = self.spec.coordinate_array()[nz]
        return int(np.max(np.abs(coords)))

    def translated(self, shift: Sequence[int]) -> "Field":
        """Field x -> u(x - shift); values pushed outside the box are dropped."""
        if len(shift) != self.spec.dim:
            raise ValueError("shift length must equal the lattice dimension")
        out = np.zeros(self.spec.shape)
        src = []
        dst = []
        for s in (int(c) for c in shift):
            n = self.spec.side
            lo, hi = max(0, -s), min(n, n - s)
            src.append(slice(lo, hi))
            dst.append(slice(lo + s, hi + s))
        out[tuple(dst)] = self.grid()[tuple(src)]
        return Field(self.spec, out.reshape(-1))


def neighbors(x: Sequence[int], spec: LatticeSpec) -> list[tuple[int, ...]]:
    """The 2N lattice neighbors of a box site, including points outside B."""
    if not spec.contains(x):
        raise DomainError(f"site {tuple(x)} outside box of radius {spec.radius}")
    pt = tuple(int(c) for c in x)
    out = []
    for j in range(spec.dim):
        for s in (1, -1):
            out.append(pt[:j] + (pt[j] + s,) + pt[j + 1 :])
    return out


def gradient_form(u: Field, v: Field, x: Sequence[int]) -> float:
    """Gamma(u, v)(x) = 1/2 sum over neighbors of the difference products."""
    if u.spec != v.spec:
        raise DomainError("fields live on different lattices")
    ux = u.value_at(x)
    vx = v.value_at(x)
    acc = 0.0
    for y in neighbors(x, u.spec):
        acc += (u.value_at(y) - ux) * (v.value_at(y) - vx)
    return 0.5 * acc


def grad_norm(u: Field, x: Sequence[int]) -> float:
    """|grad u|(x) = sqrt(Gamma(u, u)(x))."""
    return float(np.sqrt(gradient_form(u, u, x)))


def _padded_grid(u: Field, margin: int) -> np.ndarray:
    """Zero-padded value grid covering the box enlarged by `margin`."""
    return np.pad(u.grid(), margin)


def _core(ndim: int) -> tuple[slice, ...]:
    return (slice(1, -1),) * ndim


def _shifted(arr: np.ndarray, axis: int, step: int) -> np.ndarray:
    """View of `arr` over the 1:-1 core window, offset by `step` along `axis`."""
    idx = [slice(1, -1)] * arr.ndim
    idx[axis] = slice(1 + step, arr.shape[axis] - 1 + step)
    return arr[tuple(idx)]


def grad_sq_grid(u: Field, margin: int = 1) -> np.ndarray:
    """|grad u|^2 on the box enlarged by `margin` sites per side.

    With zero extension, sites at sup-distance >= r+2 from the origin have
    zero gradient, so margin=1 already captures every nonzero value.
    """
    big = _padded_grid(u, margin + 1)
    center = big[_core(big.ndim)]
    acc = np.zeros_like(center)
    for ax in range(big.ndim):
        for step in (1, -1):
            d = _shifted(big, ax, step) - center
            acc += d * d
    return 0.5 * acc


def p_laplacian(u: Field, p: float) -> Field:
    """Discrete p-Laplacian of a zero-extended field, evaluated on the box.

    Parameters
    ----------
    u : Field
    p : float
        Exponent >= 2.  Edge weights are |grad u|^{p-2} averaged over the two
        endpoints; exterior endpoints use the zero-extended field.

    Returns
    -------
    Field
        Delta_p u restricted to the box.
    """
    if not np.isfinite(p) or p < 2:
        raise ValueError("p must be >= 2")
    gsq = grad_sq_grid(u, margin=1)
    # p = 2 needs unit weights everywhere; np.power(0, 0) = 1 covers the
    # zero-gradient sites without a branch.
    w = np.power(gsq, (p - 2.0) / 2.0)
    big = _padded_grid(u, 1)
    uc = big[_core(big.ndim)]
    wc = w[_core(w.ndim)]
    acc = np.zeros_like(uc)
    for ax in range(big.ndim):
        for step in (1, -1):
            acc += (_shifted(w, ax, step) + wc) * (_shifted(big, ax, step) - uc)
    return Field(u.spec, (0.5 * acc).reshape(-1))


def lp_norm(u: Field, p: float) -> float:
    """Counting-measure norm over the whole lattice (exact: support is in B)."""
    if np.isinf(p):
        return float(np.max(np.abs(u.values))) if u.values.size else 0.0
    if not p >= 1:
        raise ValueError("p must be >= 1 or infinity")
    return float(np.sum(np.abs(u.values) ** p) ** (1.0 / p))


def gradient_form_grid(u: Field, v: Field, margin: int = 1) -> np.ndarray:
    """Gamma(u, v) on the enlarged box; array counterpart of gradient_form."""
    if u.spec != v.spec:
        raise DomainError("fields live on different lattices")
    ubig = _padded_grid(u, margin + 1)
    vbig = _padded_grid(v, margin + 1)
    ucore = ubig[_core(ubig.ndim)]
    vcore = vbig[_core(vbig.ndim)]
    acc = np.zeros_like(ucore)
    for ax in range(ubig.ndim):
        for step in (1, -1):
            acc += (_shifted(ubig, ax, step) - ucore) * (
                _shifted(vbig, ax, step) - vcore
            )
    return 0.5 * acc


def ibp_check(u: Field, v: Field, p: float) -> tuple[float, float]:
    """Summation-by-parts identity, both sides.

    Returns (lhs, rhs) with

        lhs = sum_x |grad u|^{p-2}(x) Gamma(u, v)(x)
        rhs = -sum_x (Delta_p u)(x) v(x).

    The identity is exact on the whole lattice for finitely supported fields;
    under truncation it stays exact provided v vanishes within distance 2 of
    the box boundary, which is enforced here.
    """
    if not np.isfinite(p) or p < 2:
        raise ValueError("p must be >= 2")
    if u.spec != v.spec:
        raise DomainError("fields live on different lattices")
    if v.support_radius() > v.spec.radius - 2:
        raise ValueError(
            "v must vanish within distance 2 of the box boundary for the "
            "truncated identity to be exact"
        )
    gsq = grad_sq_grid(u, margin=1)
    w = np.power(gsq, (p - 2.0) / 2.0)
    lhs = float(np.sum(w * gradient_form_grid(u, v, margin=1)))
    rhs = -float(np.sum(p_laplacian(u, p).values * v.values))
    return lhs, rhs


def random_field(
    spec: LatticeSpec, rng: np.random.Generator, decay: float = 0.0
) -> Field:
    """Gaussian field, optionally damped by exp(-decay * |x|_l2)."""
    vals = rng.standard_normal(spec.site_count)
    if decay > 0.0:
        dist = np.sqrt(np.sum(spec.coordinate_array() ** 2, axis=1))
        vals = vals * np.exp(-decay * dist)
    return Field(spec, vals)


def write_field_csv(u: Field, path) -> None:
    """Serialize a field: a JSON header line, then one row per site.

    Rows are "i_1,...,i_N,value" in index order; values use repr so the
    round-trip through read_field_csv is bit exact.
    """
    header = json.dumps({"dim": u.spec.dim, "radius": u.spec.radius}, sort_keys=True)
    lines = ["# " + header]
    for x, v in zip(u.spec.sites(), u.values):
        lines.append(",".join(str(c) for c in x) + "," + repr(float(v)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path) -> Field:
    """Inverse of write_field_csv."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing JSON header line")
    meta = json.loads(lines[0].lstrip("#").strip())
    spec = LatticeSpec(int(meta["dim"]), int(meta["radius"]))
    if len(lines) - 1 != spec.site_count:
        raise ValueError(
            f"expected {spec.site_count} rows, found {len(lines) - 1}"
        )
    vals = np.zeros(spec.site_count)
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != spec.dim + 1:
            raise ValueError(f"malformed row: {ln!r}")
        site = tuple(int(c) for c in parts[: spec.dim])
        vals[spec.index_of(site)] = float(parts[-1])
    return Field(spec, vals)
