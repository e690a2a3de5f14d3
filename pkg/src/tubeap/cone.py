"""Polyhedral convex-cone calculus.

Cones are given by finite generator lists: C = {sum_i a_i g_i : a_i >= 0}.
Only pointed cones with nonempty interior are accepted; this keeps
conjugation and membership exact finite linear algebra.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import (
    DegenerateSpan,
    DimensionMismatch,
    EmptyGenerators,
    EmptySet,
    NotPointed,
    UnsupportedDimension,
    ZeroGenerator,
)

# Residual threshold for nonnegative-combination membership.
DEFAULT_TOL = 1e-9
# Relative singular-value threshold for the full-span check.
RANK_RTOL = 1e-10
# Dual enumeration iterates (p-1)-subsets of generators; cost explodes past this.
MAX_DUAL_DIM = 8


@dataclass(frozen=True)
class Cone:
    """Closed convex cone generated by finitely many nonzero vectors."""

    dimension: int
    generators: np.ndarray  # shape (m, p), rows are generators

    def to_config(self):
        return {"generators": self.generators.tolist()}

    @staticmethod
    def from_config(cfg):
        return make_cone(cfg["generators"])


@dataclass(frozen=True)
class PointSet:
    """Finite frequency set plus declared accumulation points.

    ``limit_points`` are accumulation points of the modelled (possibly
    infinite) set that are not members of ``points``; they participate in
    support functions and containment tests exactly like ordinary points,
    since those functionals see only the closure.
    """

    points: np.ndarray        # shape (n, p)
    limit_points: np.ndarray  # shape (k, p)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lps = np.asarray(self.limit_points, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "limit_points", lps)
        seen = set()
        for row in pts:
            key = tuple(row.tolist())
            if key in seen:
                raise ValueError(f"duplicate point {key}")
            seen.add(key)
        for row in lps:
            key = tuple(row.tolist())
            if key in seen:
                raise ValueError(f"limit point {key} duplicates another entry")
            seen.add(key)

    def all_rows(self):
        """Points and limit points stacked, points first."""
        if self.limit_points.size == 0:
            return self.points
        if self.points.size == 0:
            return self.limit_points
        return np.vstack([self.points, self.limit_points])

    def to_config(self):
        return {
            "points": self.points.tolist(),
            "limit_points": self.limit_points.tolist(),
        }

    @staticmethod
    def from_config(cfg):
        pts = cfg.get("points", [])
        lps = cfg.get("limit_points", [])
        p = len(pts[0]) if pts else (len(lps[0]) if lps else 0)
        return PointSet(
            points=np.asarray(pts, dtype=float).reshape(-1, p),
            limit_points=np.asarray(lps, dtype=float).reshape(-1, p),
        )


def make_cone(generators) -> Cone:
    """Validate a generator list and build the cone.

    Rejects empty input, zero generators, generator sets that do not span
    (no interior) and sets whose cone contains a line (not pointed).
    """
    gens = np.asarray(generators, dtype=float)
    if gens.size == 0:
        raise EmptyGenerators("cone needs at least one generator")
    if gens.ndim == 1:
        gens = gens.reshape(1, -1)
    if gens.ndim != 2:
        raise DimensionMismatch("generators must be a list of equal-length vectors")
    p = gens.shape[1]
    if p < 1:
        raise DimensionMismatch("generator dimension must be >= 1")
    norms = np.linalg.norm(gens, axis=1)
    if np.any(norms == 0.0):
        raise ZeroGenerator("zero vector is not a valid generator")
    if not _is_pointed(gens):
        raise NotPointed("generated cone contains a line")
    if np.linalg.matrix_rank(gens, tol=RANK_RTOL * max(norms)) < p:
        raise DegenerateSpan("generators do not span the ambient space")
    return Cone(dimension=p, generators=gens)


def _is_pointed(gens):
    # A finitely generated cone of nonzero vectors is pointed iff some w has
    # <w, g> > 0 for every generator; scale-invariance lets us demand >= 1.
    m, p = gens.shape
    res = linprog(
        c=np.zeros(p),
        A_ub=-gens,
        b_ub=-np.ones(m),
        bounds=[(None, None)] * p,
        method="highs",
    )
    return res.status == 0


def conjugate_cone(c: Cone) -> Cone:
    """Generator representation of {x : <x, y> >= 0 for all y in the cone}.

    p = 1 and p = 2 are handled analytically from the extreme rays; for
    3 <= p <= MAX_DUAL_DIM the dual's rays are enumerated from
    (p-1)-subsets of the generator constraints.
    """
    p = c.dimension
    gens = c.generators
    if p == 1:
        sign = 1.0 if gens[0, 0] > 0 else -1.0
        return Cone(dimension=1, generators=np.array([[sign]]))
    if p == 2:
        u, v = _extreme_rays_2d(gens)
        dual = np.array([[v[1], -v[0]], [-u[1], u[0]]])
        return Cone(dimension=2, generators=dual)
    if p > MAX_DUAL_DIM:
        raise UnsupportedDimension(
            f"dual enumeration implemented for dimension <= {MAX_DUAL_DIM}, got {p}"
        )
    return Cone(dimension=p, generators=_dual_rays_enumerated(gens))


def _extreme_rays_2d(gens):
    # Pointedness => angular extent < pi, so the two extreme rays are the
    # generators with all others (weakly) on one fixed side.
    u = v = None
    for g in gens:
        crosses = gens[:, 0] * g[1] - gens[:, 1] * g[0]
        if np.all(crosses <= 1e-14 * np.abs(gens).max() * np.abs(g).max()):
            u = g
        if np.all(crosses >= -1e-14 * np.abs(gens).max() * np.abs(g).max()):
            v = g
    if u is None or v is None:
        raise NotPointed("failed to locate extreme rays of a 2-D cone")
    return u, v


def _dual_rays_enumerated(gens):
    m, p = gens.shape
    scale = np.abs(gens).max()
    rays = []
    seen = set()
    for idx in combinations(range(m), p - 1):
        sub = gens[list(idx)]
        u_, s, vt = np.linalg.svd(sub)
        if s.size < p - 1 or s[-1] <= 1e-12 * max(s[0], 1.0):
            continue  # subset not of rank p-1
        cand = vt[-1]
        prods = gens @ cand
        tol = 1e-12 * scale
        if np.all(prods >= -tol):
            ray = cand
        elif np.all(prods <= tol):
            ray = -cand
        else:
            continue
        ray = ray / np.linalg.norm(ray)
        key = tuple(np.round(ray, 9).tolist())
        if key not in seen:
            seen.add(key)
            rays.append(ray)
    if not rays:
        raise DegenerateSpan("dual enumeration produced no rays")
    return np.array(rays)


def cone_contains(c: Cone, x, tol: float = DEFAULT_TOL) -> bool:
    """True iff x is within Euclidean distance tol of the cone.

    Decided by nonnegative least squares: the residual of
    min_{a>=0} |G^T a - x| is the distance to the cone.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (c.dimension,):
        raise DimensionMismatch(
            f"point has shape {x.shape}, cone dimension is {c.dimension}"
        )
    if tol < 0:
        raise ValueError("tol must be >= 0")
    _, rnorm = nnls(c.generators.T, x)
    return bool(rnorm <= tol)


def support_function(e: PointSet, x) -> float:
    """H_E(x) = max over points and limit points of <x, lambda>."""
    rows = e.all_rows()
    if rows.size == 0:
        raise EmptySet("support function of the empty set")
    x = np.asarray(x, dtype=float)
    if x.shape != (rows.shape[1],):
        raise DimensionMismatch(
            f"direction has shape {x.shape}, set lives in dimension {rows.shape[1]}"
        )
    vals = [float(np.dot(row, x)) for row in rows]
    return max(vals)


def spectrum_in_shifted_cone(e: PointSet, shift, c: Cone, tol: float = DEFAULT_TOL) -> bool:
    """True iff every point and limit point lies in shift + cone within tol."""
    shift = np.asarray(shift, dtype=float)
    rows = e.all_rows()
    if rows.size and rows.shape[1] != c.dimension:
        raise DimensionMismatch("point set and cone dimensions differ")
    if shift.shape != (c.dimension,):
        raise DimensionMismatch("shift and cone dimensions differ")
    return all(cone_contains(c, row - shift, tol) for row in rows)


def support_linear_on_cone(e: PointSet, c: Cone, tol: float = DEFAULT_TOL):
    """Shift within the set that moves the whole set into the cone, if any.

    Returns the lexicographically smallest candidate Lambda among
    points + limit points with E subset Lambda + cone; None when no member
    qualifies.  For this class a qualifying member is equivalent to the
    support function being linear on the negated dual cone.
    """
    rows = e.all_rows()
    if rows.size == 0:
        raise EmptySet("empty point set")
    qualifying = [
        row for row in rows if spectrum_in_shifted_cone(e, row, c, tol)
    ]
    if not qualifying:
        return None
    qualifying.sort(key=lambda r: tuple(r.tolist()))
    return qualifying[0]
