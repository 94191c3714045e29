"""Intersections of translated bodies and hulls with respect to a body.

X = (K - x_1) cap ... cap (K - x_n) is the set of translations moving the
whole sample into K; the hull of the sample with respect to K is K minus
that intersection, i.e. the intersection of all translates of K that
contain the sample. For a planar disk both boundaries are exact arc
cycles; other kinds get radial probes and certified membership verdicts.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .body import Ball, ConvexBody, direction_grid, _as_point
from .errors import DomainError, GeneralPositionWarning, NumericError

Array = np.ndarray

# Arc classification window (inside-all-disks slack).
EPS_GEO = 1e-9
# Near-degeneracy window for general-position diagnostics.
EPS_GP = 1e-7

TWO_PI = 2.0 * math.pi


def mink_diff_contains(K: ConvexBody, points: Array, x, tol: float = 1e-12) -> bool:
    """Whether x + points lies inside K, i.e. x is in the Minkowski
    difference of K by the point set."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x = _as_point(x, K.dim)
    return bool(np.all(K.gauge_batch(points + x[None, :]) <= 1.0 + tol))


def _prune_to_hull(points: Array) -> Array:
    """Indices of the convex-hull vertices of the sample.

    The intersection of translates over a point set equals the one over its
    convex hull, so only hull vertices can be active constraints.
    """
    n = points.shape[0]
    if n <= 3:
        return np.arange(n)
    try:
        return np.sort(ConvexHull(points).vertices)
    except QhullError:
        return np.arange(n)  # degenerate input: keep everything


@dataclass(frozen=True, eq=False)
class IntersectionBody:
    """X = intersection of K - x over the sample points, all interior to K."""

    base: ConvexBody
    points: Array
    active: Array = field(init=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[1] != self.base.dim:
            raise DomainError("sample dimension does not match the body")
        if pts.shape[0] == 0:
            raise DomainError("empty sample")
        if np.any(self.base.gauge_batch(pts) >= 1.0):
            raise DomainError("all sample points must lie in the interior of K")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "active", _prune_to_hull(pts))

    @property
    def dim(self) -> int:
        return self.base.dim

    def radial_batch(self, U: Array) -> Array:
        """Radial function of X at unit directions U (0 is interior to X)."""
        t = self.base.ray_exit_batch(self.points[self.active], U)
        return t.min(axis=1)

    def radial(self, u) -> float:
        u = _as_point(u, self.dim)
        u = u / np.linalg.norm(u)
        return float(self.radial_batch(u[None, :])[0])

    def boundary_point(self, u) -> Array:
        u = _as_point(u, self.dim)
        u = u / np.linalg.norm(u)
        return self.radial(u) * u

    def outer_support_bound_batch(self, U: Array) -> Array:
        """Upper bound min_i h(K - x_i, u) on the support function of X."""
        return self.base.support_batch(U) - (U @ self.points[self.active].T).max(axis=1)

    def outer_support_bound(self, u) -> float:
        u = _as_point(u, self.dim)
        return float(self.outer_support_bound_batch(u[None, :])[0])

    def contains(self, x, tol: float = 1e-12) -> bool:
        return mink_diff_contains(self.base, self.points, x, tol)


@dataclass(frozen=True)
class MembershipVerdict:
    """Certified membership answer; `unknown` carries the certification gap."""

    status: str  # "in" | "out" | "unknown"
    margin: float

    def __bool__(self) -> bool:
        return self.status == "in"


def khull_contains(K: ConvexBody, points: Array, z, resolution: int = 256) -> MembershipVerdict:
    """Certified test of z against the hull of `points` with respect to K.

    z lies in the hull iff X + z is contained in K. "Out" is certified by a
    boundary probe of X landing outside K; "in" by the outer support-bound
    polytope of X fitting inside K - z with positive margin.
    """
    X = IntersectionBody(K, points)
    z = _as_point(z, K.dim)
    U = direction_grid(K.dim, resolution)
    r = X.radial_batch(U)
    probe_gauge = K.gauge_batch(r[:, None] * U + z[None, :])
    worst = float(probe_gauge.max())
    if worst > 1.0 + 1e-9:
        return MembershipVerdict("out", worst - 1.0)
    h = X.outer_support_bound_batch(U)
    halfspaces = np.column_stack([U, -h])
    try:
        verts = HalfspaceIntersection(halfspaces, np.zeros(K.dim)).intersections
    except QhullError as exc:
        raise NumericError("outer polytope construction failed") from exc
    vert_gauge = float(K.gauge_batch(verts + z[None, :]).max())
    if vert_gauge < 1.0:
        return MembershipVerdict("in", 1.0 - vert_gauge)
    return MembershipVerdict("unknown", vert_gauge - 1.0)


@dataclass(frozen=True, eq=False)
class Arc:
    """Circular boundary piece: owner index, circle center, CCW angle span."""

    owner: int
    center: Array
    a0: float
    a1: float

    def point_at(self, t: float, radius: float) -> Array:
        a = self.a0 + t * (self.a1 - self.a0)
        return self.center + radius * np.array([math.cos(a), math.sin(a)])

    @property
    def width(self) -> float:
        return self.a1 - self.a0


@dataclass(frozen=True, eq=False)
class ArcVertex:
    """Corner of an arc cycle with the unordered owner pair meeting there."""

    owners: tuple[int, int]
    point: Array


@dataclass(frozen=True, eq=False)
class ArcBoundary:
    """Closed, positively oriented cycle of circular arcs (d = 2).

    Arcs appear in traversal order; arc k ends where arc k+1 starts. A
    single-point hull degenerates to an empty cycle with that point set.
    """

    arcs: tuple[Arc, ...]
    vertices: tuple[ArcVertex, ...]
    radius: float
    degenerate_point: Array | None = None

    @property
    def is_degenerate(self) -> bool:
        return self.degenerate_point is not None

    def arc_owners(self) -> set[int]:
        return {a.owner for a in self.arcs}

    def vertex_owner_pairs(self) -> set[frozenset[int]]:
        return {frozenset(v.owners) for v in self.vertices}

    def to_json_dict(self) -> dict:
        return {
            "arcs": [
                {"owner": int(a.owner), "center": [float(c) for c in a.center],
                 "a0": float(a.a0), "a1": float(a.a1)}
                for a in self.arcs
            ],
            "vertices": [
                {"owners": [int(o) for o in v.owners],
                 "point": [float(c) for c in v.point]}
                for v in self.vertices
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict, radius: float) -> "ArcBoundary":
        arcs = tuple(
            Arc(int(a["owner"]), np.asarray(a["center"], dtype=float),
                float(a["a0"]), float(a["a1"]))
            for a in data["arcs"]
        )
        vertices = tuple(
            ArcVertex((int(v["owners"][0]), int(v["owners"][1])),
                      np.asarray(v["point"], dtype=float))
            for v in data["vertices"]
        )
        return cls(arcs, vertices, radius)


@dataclass(frozen=True)
class DegeneracyWitness:
    """One near-degeneracy: kind, sample indices involved, witness point,
    and the measured slack that fell inside the tolerance window."""

    kind: str  # "duplicate" | "near-tangent" | "near-cocircular" | "anomaly"
    indices: tuple[int, ...]
    witness: Array | None
    measure: float

    def describe(self) -> str:
        return f"{self.kind} at indices {self.indices} (measure {self.measure:.3e})"


def _require_disk(K: ConvexBody) -> Ball:
    if not isinstance(K, Ball) or K.dim != 2:
        raise DomainError("the exact arc pipeline requires a planar Ball")
    return K


def _dedupe_rows(pts: Array) -> Array:
    """Indices of first occurrences of distinct rows, original order."""
    _, first = np.unique(pts, axis=0, return_index=True)
    return np.sort(first)


def _disk_cycle(radius: float, centers_all: Array, active: Array,
                eps_geo: float, eps_gp: float,
                witnesses: list[DegeneracyWitness]) -> tuple[list[Arc], list[ArcVertex]]:
    """Arc cycle of the intersection of equal disks centered at
    centers_all[active]; `witnesses` collects near-degeneracies.

    Owner indices in the returned cycle refer to positions in centers_all.
    Cocircularity is screened against every disk, not only active ones.
    """
    r = radius
    act = centers_all[active]
    m = act.shape[0]
    if m == 1:
        return [Arc(int(active[0]), act[0], 0.0, TWO_PI)], []

    iu, ju = np.triu_indices(m, 1)
    diffs = act[ju] - act[iu]
    dist = np.linalg.norm(diffs, axis=1)
    for k in np.nonzero(dist < eps_gp)[0]:
        witnesses.append(DegeneracyWitness(
            "duplicate", (int(active[iu[k]]), int(active[ju[k]])), None, float(dist[k])))
    for k in np.nonzero(dist > 2.0 * r - eps_gp)[0]:
        witnesses.append(DegeneracyWitness(
            "near-tangent", (int(active[iu[k]]), int(active[ju[k]])), None,
            float(2.0 * r - dist[k])))
    if np.any(dist >= 2.0 * r):
        raise DomainError("disjoint constraint disks; sample points not interior to K")

    # Two candidate corners per pair of circles.
    mid = 0.5 * (act[iu] + act[ju])
    axis = diffs / dist[:, None]
    half = np.sqrt(np.maximum(r * r - 0.25 * dist * dist, 0.0))
    perp = np.column_stack([-axis[:, 1], axis[:, 0]])
    cand = np.concatenate([mid + half[:, None] * perp, mid - half[:, None] * perp])
    cand_i = np.concatenate([iu, iu])
    cand_j = np.concatenate([ju, ju])

    inside = np.linalg.norm(cand[:, None, :] - act[None, :, :], axis=2) <= r + eps_geo
    keep = inside.all(axis=1)
    pts = cand[keep]
    own_i = cand_i[keep]
    own_j = cand_j[keep]

    # Cocircularity screen against every circle in the input.
    if pts.shape[0] and centers_all.shape[0] > 2:
        gap = np.abs(np.linalg.norm(pts[:, None, :] - centers_all[None, :, :], axis=2) - r)
        for v in range(pts.shape[0]):
            third = np.nonzero(gap[v] < eps_gp)[0]
            third = [t for t in third if t not in (active[own_i[v]], active[own_j[v]])]
            if third:
                witnesses.append(DegeneracyWitness(
                    "near-cocircular",
                    (int(active[own_i[v]]), int(active[own_j[v]]), *map(int, third)),
                    pts[v], float(gap[v, third].min())))

    if pts.shape[0] < 2:
        # One active disk contains the rest of the intersection boundary.
        raise NumericError("found fewer than two corners for a multi-disk intersection")

    # Group corners by owner; each boundary-active owner meets exactly two.
    incident: dict[int, list[int]] = {}
    for v in range(pts.shape[0]):
        incident.setdefault(int(own_i[v]), []).append(v)
        incident.setdefault(int(own_j[v]), []).append(v)

    arcs: list[Arc] = []
    arc_ends: list[tuple[int, int]] = []  # (start corner, end corner)
    for local_owner, vids in sorted(incident.items()):
        if len(vids) != 2:
            witnesses.append(DegeneracyWitness(
                "anomaly", (int(active[local_owner]),), None, float(len(vids))))
            raise NumericError(
                f"owner {active[local_owner]} meets {len(vids)} corners; expected 2")
        c = act[local_owner]
        va, vb = vids
        ta = math.atan2(pts[va][1] - c[1], pts[va][0] - c[0])
        tb = math.atan2(pts[vb][1] - c[1], pts[vb][0] - c[0])
        if tb < ta:
            va, vb, ta, tb = vb, va, tb, ta
        # Pick the angular interval whose midpoint stays inside all disks.
        chosen = None
        for a0, a1, s, e in ((ta, tb, va, vb), (tb, ta + TWO_PI, vb, va)):
            amid = 0.5 * (a0 + a1)
            p = c + r * np.array([math.cos(amid), math.sin(amid)])
            if np.all(np.linalg.norm(p - act, axis=1) <= r + eps_geo):
                chosen = (a0, a1, s, e)
                break
        if chosen is None:
            continue  # owner only touches at corners; not an arc owner
        a0, a1, s, e = chosen
        arcs.append(Arc(int(active[local_owner]), c, a0, a1))
        arc_ends.append((s, e))

    if not arcs:
        raise NumericError("no arcs survived classification")

    # Stitch into one closed CCW cycle: each arc starts where another ends.
    start_at = {s: k for k, (s, e) in enumerate(arc_ends)}
    order = [0]
    seen = {0}
    while len(order) < len(arcs):
        nxt = start_at.get(arc_ends[order[-1]][1])
        if nxt is None or nxt in seen:
            raise NumericError("arc cycle failed to close")
        order.append(nxt)
        seen.add(nxt)
    if arc_ends[order[-1]][1] != arc_ends[order[0]][0]:
        raise NumericError("arc cycle failed to close")

    cycle = [arcs[k] for k in order]
    verts = []
    for k in order:
        e = arc_ends[k][1]
        verts.append(ArcVertex(
            (int(active[own_i[e]]), int(active[own_j[e]])), pts[e]))
    return cycle, verts


def disk_intersection_boundary(K: ConvexBody, points: Array,
                               eps_geo: float = EPS_GEO,
                               eps_gp: float = EPS_GP) -> ArcBoundary:
    """Exact arc-cycle boundary of X = intersection of K - x_i, K a planar disk.

    Sample points are deduplicated (with a warning) and pruned to convex-hull
    vertices before the corner construction; near-degeneracies raise
    GeneralPositionWarning but the cycle is still returned when it closes.
    Arc owners are indices into the original sample.
    """
    K = _require_disk(K)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(K.gauge_batch(pts) >= 1.0):
        raise DomainError("all sample points must lie in the interior of K")
    unique = _dedupe_rows(pts)
    if unique.size < pts.shape[0]:
        warnings.warn(f"deduplicated {pts.shape[0] - unique.size} repeated sample points",
                      GeneralPositionWarning, stacklevel=2)
    active = unique[_prune_to_hull(pts[unique])]
    centers_all = K.center[None, :] - pts
    witnesses: list[DegeneracyWitness] = []
    arcs, verts = _disk_cycle(K.radius, centers_all, active, eps_geo, eps_gp, witnesses)
    for w in witnesses:
        warnings.warn(w.describe(), GeneralPositionWarning, stacklevel=2)
    if len(arcs) == 1 and not verts:
        return ArcBoundary(tuple(arcs), (), K.radius)
    return ArcBoundary(tuple(arcs), tuple(verts), K.radius)


def khull_boundary_2d(K: ConvexBody, points: Array,
                      eps_geo: float = EPS_GEO,
                      eps_gp: float = EPS_GP) -> ArcBoundary:
    """Arc-cycle boundary of the hull of the sample with respect to a disk K.

    The hull is the intersection of the translates K - v over all boundary
    points v of X; for equal disks the corner translates suffice because
    every constraint arc subtends less than a half turn. Owners of the
    returned arcs index the corner list of the X boundary. A sample whose
    X boundary has no corners hulls to the single sample point itself.
    """
    K = _require_disk(K)
    xb = disk_intersection_boundary(K, points, eps_geo, eps_gp)
    if len(xb.vertices) < 2:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        point = pts[_dedupe_rows(pts)[0]]
        return ArcBoundary((), (), K.radius, degenerate_point=point)
    vpts = np.array([v.point for v in xb.vertices])
    centers_all = K.center[None, :] - vpts
    witnesses: list[DegeneracyWitness] = []
    arcs, verts = _disk_cycle(K.radius, centers_all, np.arange(vpts.shape[0]),
                              eps_geo, eps_gp, witnesses)
    for w in witnesses:
        warnings.warn("hull stage: " + w.describe(), GeneralPositionWarning, stacklevel=2)
    qb = ArcBoundary(tuple(arcs), tuple(verts), K.radius)
    _validate_hull_boundary(K, points, xb, qb, eps_geo)
    return qb


def _validate_hull_boundary(K: Ball, points: Array, xb: ArcBoundary,
                            qb: ArcBoundary, eps_geo: float) -> None:
    """Every sample point owning an arc of the X boundary must lie on the
    hull boundary: inside all hull disks and on at least one hull circle."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    owners = sorted(xb.arc_owners())
    hull_centers = np.array([a.center for a in qb.arcs])
    d = np.linalg.norm(pts[owners][:, None, :] - hull_centers[None, :, :], axis=2)
    tol = math.sqrt(max(eps_geo, 1e-12)) * 10  # corner placement is O(sqrt(eps))-sensitive
    if np.any(d.min(axis=1) > K.radius + tol) or np.any(np.abs(d - K.radius).min(axis=1) > tol):
        raise NumericError("hull boundary failed the owner-incidence validation")
