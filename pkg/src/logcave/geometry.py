"""Convex hulls, triangulations and simplex affine maps.

A :class:`Triangulation` partitions the convex hull of the data into
simplices whose vertices are data points.  Each simplex carries the
absolute determinant of its edge matrix, which is the Jacobian of the
affine map from the unit simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .exceptions import DegenerateData

#: simplices smaller than this fraction of the hull volume are discarded
#: (they destabilise the moment integrals and contribute no mass).
MIN_REL_VOLUME = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Validated point cloud: n x d, finite, full-dimensional."""

    points: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def as_dataset(points) -> Dataset:
    """Validate raw coordinates and wrap them in a :class:`Dataset`.

    Raises :class:`DegenerateData` if there are fewer than d+1 points or
    the points lie in a single hyperplane.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise DegenerateData(f"expected a 2-D array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateData("points contain NaN or Inf")
    n, d = pts.shape
    if n < d + 1:
        raise DegenerateData(f"need at least d+1 = {d + 1} points, got {n}")
    centered = pts - pts.mean(axis=0)
    if np.linalg.matrix_rank(centered, tol=1e-10 * max(1.0, np.abs(pts).max())) < d:
        raise DegenerateData("points are affinely dependent (contained in a hyperplane)")
    return Dataset(points=pts)


@dataclass(frozen=True)
class Triangulation:
    """Simplicial partition of the convex hull of ``points``.

    Only a subset of the points may appear as simplex vertices (the fitted
    tent drops inactive poles), but indices always refer to rows of
    ``points``.
    """

    points: np.ndarray          # n x d
    simplices: np.ndarray       # m x (d+1) int indices
    dets: np.ndarray            # m, |D_j|
    hull_equations: np.ndarray  # facet half-spaces of C_n: A x + b <= 0
    # cached inverse edge matrices for point location / barycentric coords
    _inv_maps: np.ndarray = field(repr=False, default=None)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n_simplices(self) -> int:
        return self.simplices.shape[0]

    def volume(self) -> float:
        """Lebesgue volume of the hull, as the sum of simplex volumes."""
        return float(self.dets.sum() / factorial(self.d))

    def vertex_coords(self) -> np.ndarray:
        """m x (d+1) x d array of simplex vertex coordinates."""
        return self.points[self.simplices]

    def affine_map(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Affine map u -> v0 + M u sending the unit simplex onto simplex j.

        Sends e_l to vertex l and the origin to vertex 0; |det M| = dets[j].
        """
        verts = self.points[self.simplices[j]]
        v0 = verts[0]
        M = (verts[1:] - v0).T
        return v0, M

    def barycentric(self, x: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of points x (k x d) in every simplex.

        Returns a k x m x (d+1) array; coordinates sum to 1 along the last
        axis and are all >= 0 iff the point lies in the simplex.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        v0 = self.points[self.simplices[:, 0]]                  # m x d
        u = np.einsum("mde,kme->kmd", self._inv_maps, x[:, None, :] - v0[None, :, :])
        u0 = 1.0 - u.sum(axis=2, keepdims=True)
        return np.concatenate([u0, u], axis=2)

    def locate(self, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Index of the simplex containing each point, -1 if outside.

        Boundary ties are broken by the lowest simplex index.
        """
        bary = self.barycentric(x)
        inside = (bary >= -tol).all(axis=2)                      # k x m
        idx = np.where(inside.any(axis=1), inside.argmax(axis=1), -1)
        return idx

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Vectorised hull membership test via the facet half-spaces."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        A = self.hull_equations[:, :-1]
        b = self.hull_equations[:, -1]
        scale = max(1.0, float(np.abs(self.points).max()))
        return (x @ A.T + b <= tol * scale).all(axis=1)


def _simplex_dets(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    verts = points[simplices]
    edges = verts[:, 1:, :] - verts[:, :1, :]
    return np.abs(np.linalg.det(edges))


def _inverse_maps(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    verts = points[simplices]
    edges = np.swapaxes(verts[:, 1:, :] - verts[:, :1, :], 1, 2)  # m x d x d
    return np.linalg.inv(edges)


def hull_equations(points: np.ndarray) -> np.ndarray:
    """Facet half-spaces (A | b) with A x + b <= 0 on the hull interior."""
    d = points.shape[1]
    if d == 1:
        lo, hi = float(points.min()), float(points.max())
        return np.array([[-1.0, lo], [1.0, -hi]])
    return ConvexHull(points).equations


def build_triangulation(points: np.ndarray, simplices: np.ndarray) -> Triangulation:
    """Assemble a Triangulation from explicit simplex index tuples,
    dropping zero-volume slivers and orienting consistently."""
    points = np.asarray(points, dtype=float)
    simplices = np.asarray(simplices, dtype=int)
    dets = _simplex_dets(points, simplices)
    total = dets.sum()
    keep = dets > MIN_REL_VOLUME * total
    simplices, dets = simplices[keep], dets[keep]
    order = np.lexsort(simplices.T[::-1])
    simplices, dets = simplices[order], dets[order]
    return Triangulation(
        points=points,
        simplices=simplices,
        dets=dets,
        hull_equations=hull_equations(points),
        _inv_maps=_inverse_maps(points, simplices),
    )


def convex_hull_triangulate(data: Dataset | np.ndarray) -> Triangulation:
    """Triangulate the convex hull of the data with all points as vertices.

    For d = 1 this is the partition into consecutive intervals; for d >= 2
    a Delaunay triangulation is used (any triangulation consistent with the
    point set works; Delaunay simplices are well-shaped).
    """
    if not isinstance(data, Dataset):
        data = as_dataset(data)
    pts = data.points
    if data.d == 1:
        order = np.argsort(pts[:, 0], kind="stable")
        simplices = np.column_stack([order[:-1], order[1:]])
        return build_triangulation(pts, simplices)
    try:
        dela = Delaunay(pts, qhull_options="Qbb Qc Qz Qt")
    except QhullError as exc:
        raise DegenerateData(f"triangulation failed: {exc}") from exc
    return build_triangulation(pts, dela.simplices)


def simplex_affine_map(tri: Triangulation, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Affine map of the unit simplex onto simplex ``j`` (see
    :meth:`Triangulation.affine_map`)."""
    return tri.affine_map(j)
