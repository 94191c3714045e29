"""Poisson hyperplane tessellations driven by a body's surface measure,
their zero cells, and the scaled statistics that converge to them.

Hyperplanes {<x, u> = t} carry intensity (1/V_d(K)) dt x S_{d-1}(K, du).
The inversion t, u -> u/t maps the process to a point cloud whose convex
hull is the polar of the zero cell, so cell statistics reduce to hull
statistics of the inverted points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .body import Ball, ConvexBody, SurfaceMeasureSampler, direction_grid
from .errors import DomainError, NumericError
from .faces import FVector, TaggedPolytope, tagged_hull_from_points
from .hull import IntersectionBody
from . import faces

Array = np.ndarray


@dataclass(frozen=True, eq=False)
class HyperplaneSample:
    """Truncated draw of the hyperplane process: distances t in (0, T],
    unit normals u, plus the truncation level."""

    body: ConvexBody
    T: float
    t: Array
    u: Array

    @property
    def size(self) -> int:
        return self.t.shape[0]


def sample_hyperplanes(K: ConvexBody, T: float, rng: np.random.Generator,
                       sampler: SurfaceMeasureSampler | None = None) -> HyperplaneSample:
    """Draw the process restricted to distances (0, T]."""
    if T <= 0.0:
        raise DomainError("truncation T must be positive")
    if sampler is None:
        sampler = K.surface_sampler()
    rate = T * sampler.total_mass / K.volume()
    n = int(rng.poisson(rate))
    t = rng.uniform(0.0, T, n)
    u = sampler.draw(rng, n) if n else np.empty((0, K.dim))
    return HyperplaneSample(K, T, t, u)


@dataclass(frozen=True, eq=False)
class ZeroCell:
    """Zero cell Z of a tessellation draw, with its polar hull.

    `dual` is the hull of the inverted points u/t, vertex owners being
    hyperplane indices; `cell` is Z itself, vertices tagged by the dual
    facet they polarize. `certified` records that every vertex of Z has
    norm at most the truncation actually explored, so no unsampled
    hyperplane could cut the cell.
    """

    dual: TaggedPolytope
    cell: TaggedPolytope
    certified: bool
    truncation: float
    n_hyperplanes: int

    def fvector(self) -> FVector:
        """f-vector of Z: the reversed f-vector of the dual hull."""
        return tuple(reversed(self.dual.fvector()))


def zero_cell(K: ConvexBody, rng: np.random.Generator, T0: float = 5.0,
              sampler: SurfaceMeasureSampler | None = None,
              max_doublings: int = 20) -> ZeroCell:
    """Sample the zero cell, extending the truncation until certified.

    Each extension appends an independent layer with distances in
    (T, 2T]; runs where the inverted points fail to enclose the origin
    are extended the same way, never discarded.
    """
    if sampler is None:
        sampler = K.surface_sampler()
    if T0 <= 0.0:
        raise DomainError("truncation T0 must be positive")
    d = K.dim
    layer_rate = T0 * sampler.total_mass / K.volume()

    n = int(rng.poisson(layer_rate))
    t = rng.uniform(0.0, T0, n)
    u = sampler.draw(rng, n) if n else np.empty((0, d))
    T = T0
    for _ in range(max_doublings):
        dual = _try_dual_hull(u, t, d)
        if dual is not None:
            radius = float(np.max(np.linalg.norm(_polar_vertices(dual), axis=1)))
            if radius <= T:
                break
        n2 = int(rng.poisson(layer_rate * (T / T0)))  # measure of (T, 2T] is T
        t2 = rng.uniform(T, 2.0 * T, n2)
        u2 = sampler.draw(rng, n2) if n2 else np.empty((0, d))
        t = np.concatenate([t, t2])
        u = np.concatenate([u, u2])
        T *= 2.0
    else:
        raise NumericError(f"zero cell not certified after {max_doublings} extensions")

    zv = _polar_vertices(dual)
    cell = tagged_hull_from_points(zv, owners=np.arange(zv.shape[0]))
    return ZeroCell(dual=dual, cell=cell, certified=True, truncation=T,
                    n_hyperplanes=int(t.shape[0]))


def _try_dual_hull(u: Array, t: Array, d: int) -> TaggedPolytope | None:
    """Hull of the inverted points if it strictly encloses the origin."""
    if t.shape[0] < d + 1:
        return None
    pts = u / t[:, None]
    try:
        dual = tagged_hull_from_points(pts, owners=np.arange(pts.shape[0]))
    except DomainError:
        return None
    if np.min(dual.facet_offsets) <= 1e-12:
        return None
    return dual


def _polar_vertices(dual: TaggedPolytope) -> Array:
    """Vertices of the cell: each dual facet {<a,y> = b} polarizes to a/b."""
    return dual.facet_normals / dual.facet_offsets[:, None]


@dataclass(frozen=True)
class IntrinsicVolumes:
    """(V_0, ..., V_d) normalized so the Steiner polynomial uses unit-ball
    coefficients kappa_{d-j}."""

    values: tuple[float, ...]

    def __getitem__(self, j: int) -> float:
        return self.values[j]


def intrinsic_volumes(P: TaggedPolytope) -> IntrinsicVolumes:
    """Intrinsic volumes of a full-dimensional polytope, d in {2, 3}.

    d=2: (1, perimeter/2, area). d=3: V_1 sums edge length times exterior
    dihedral angle over 2 pi; coplanar triangulation edges contribute
    nothing since their angle vanishes.
    """
    if P.dim == 2:
        return IntrinsicVolumes((1.0, 0.5 * P.surface, P.volume))
    if P.dim != 3:
        raise DomainError("intrinsic volumes are provided for d in {2, 3}")
    v1 = 0.0
    for (a, b), (g1, g2) in zip(P.edges, P.edge_facets):
        length = float(np.linalg.norm(P.points[a] - P.points[b]))
        cosang = float(np.clip(P.facet_normals[g1] @ P.facet_normals[g2], -1.0, 1.0))
        v1 += length * math.acos(cosang)
    return IntrinsicVolumes((1.0, v1 / (2.0 * math.pi), 0.5 * P.surface, P.volume))


def intrinsic_volumes_of_cell(z: ZeroCell) -> IntrinsicVolumes:
    return intrinsic_volumes(z.cell)


@dataclass(frozen=True, eq=False)
class ScaledSampleStatistics:
    """Per-sample record: volumes of the n-scaled intersection body, the
    family f-vector, and the inner/outer polygon gap diagnostic."""

    n: int
    volumes: IntrinsicVolumes
    fvector: FVector
    fvector_exact: bool
    outer_gap: float


def scaled_sample_statistics(K: ConvexBody, points: Array, n_scale: int | None = None,
                             directions: int | None = None,
                             fvector_resolution: int = 256) -> ScaledSampleStatistics:
    """Statistics of one sample: intrinsic volumes of n X_n and the family
    f-vector of the sample's hull with respect to K.

    X_n is probed radially on the shared direction grid and measured by its
    inscribed polytope; the gap to the outer support-bound polytope is
    reported as the discretization diagnostic. The f-vector uses the exact
    arc pipeline for planar disks and the tagged polar hull otherwise.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0] if n_scale is None else int(n_scale)
    d = K.dim
    if directions is None:
        directions = 512 if d == 2 else 2048
    X = IntersectionBody(K, pts)
    U = direction_grid(d, directions)
    r = X.radial_batch(U) * n
    inner = tagged_hull_from_points(r[:, None] * U)
    vols = intrinsic_volumes(inner)
    r_out = _radial_min(U, X.outer_support_bound_batch(U) * n)
    gap = _radial_volume(r_out, d) - _radial_volume(r, d)

    exact = isinstance(K, Ball) and d == 2
    if exact:
        fv = faces.fvector_exact_2d(faces.disk_intersection_boundary(K, pts))
    else:
        fv = faces.fvector_approx(K, pts, m=fvector_resolution)
    return ScaledSampleStatistics(n=n, volumes=vols, fvector=fv,
                                  fvector_exact=exact, outer_gap=float(gap))


def _radial_min(U: Array, h: Array) -> Array:
    """Exact radial function of {x : <x, u_k> <= h_k for all k} at the
    grid directions themselves; the support values need not be convex."""
    dots = U @ U.T
    with np.errstate(divide="ignore"):
        ratios = np.where(dots > 1e-12, h[None, :] / dots, np.inf)
    r = ratios.min(axis=1)
    if not np.all(np.isfinite(r)):
        raise NumericError("outer support bounds do not enclose a bounded region")
    return r


def _radial_volume(r: Array, d: int) -> float:
    """Spherical quadrature of the volume below a radial profile; the same
    lattice on both profiles keeps inner/outer gaps nonnegative."""
    if d == 2:
        return 0.5 * float(np.mean(r ** 2)) * 2.0 * math.pi
    return float(np.mean(r ** 3)) * (4.0 * math.pi / 3.0)
