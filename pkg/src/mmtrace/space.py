"""Finite weighted point clouds standing in for a metric measure space.

A space is a list of points with strictly positive weights (the measure),
a metric given either by coordinates (Euclidean) or by an explicit
symmetric matrix, a mesh scale ``resolution`` and a ``scale_floor`` below
which no analysis radius is accepted.  All ball semantics are closed:
``y`` belongs to ``B_r(x)`` iff ``d(x, y) <= r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    EmptySet,
    InsufficientData,
    InvalidPoint,
    InvalidScale,
    ParameterError,
    ResolutionError,
)

Center = Union[int, np.integer, Sequence[float], np.ndarray]

# Tolerance used when asserting exact invariants that are only subject to
# float round-off (net separation, closed-ball boundaries).
_EPS = 1e-12


@dataclass(frozen=True)
class Ball:
    """Closed ball; ``center`` is a point id or a coordinate vector."""

    center: Center
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise InvalidScale(f"ball radius must be >= 0, got {self.radius}")


@dataclass
class SeparatedNet:
    """A 2^-k separated subset with its index labels."""

    scale_k: int
    points: np.ndarray          # point ids, in construction order
    index_set: np.ndarray       # alpha labels 0..len-1
    separation: float
    covering_radius: Optional[float] = None
    maximal: bool = False


@dataclass
class DecayReport:
    """Fitted relative volume decay orders of the measure."""

    Q_est: float
    q_est: float
    fit_constants: dict
    residuals: float
    n_pairs: int
    central_slope: float


class FiniteMetricMeasureSpace:
    """Weighted point cloud with a metric oracle.

    Args:
        weights: strictly positive mass per point.
        coords: optional (n, dim) array; induces the Euclidean metric and
            allows spatial indexing.
        dist_matrix: optional (n, n) symmetric matrix; used when no
            coordinates are given.  Intended for instances up to ~2e4
            points.
        resolution: mesh scale h of the discretization.
        c_res: scale-floor multiplier; scale_floor = c_res * h >= h.
    """

    def __init__(
        self,
        weights: np.ndarray,
        coords: Optional[np.ndarray] = None,
        dist_matrix: Optional[np.ndarray] = None,
        resolution: float = 1.0,
        c_res: float = 1.0,
        validate: bool = True,
    ):
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise ParameterError("weights must be a nonempty 1-d array")
        self.n = self.weights.size
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self.dist_matrix = None if dist_matrix is None else np.asarray(dist_matrix, dtype=float)
        if self.coords is None and self.dist_matrix is None:
            raise ParameterError("need coords or dist_matrix")
        if resolution <= 0:
            raise ParameterError("resolution must be positive")
        if c_res < 1.0:
            raise ParameterError("c_res must be >= 1 so that scale_floor >= resolution")
        self.resolution = float(resolution)
        self.scale_floor = float(c_res * resolution)
        self._tree = None
        if self.coords is not None:
            if self.coords.shape[0] != self.n:
                raise ParameterError("coords/weights length mismatch")
            self._tree = cKDTree(self.coords)
        self._uniform_weight = float(self.weights[0]) if np.all(self.weights == self.weights[0]) else None
        # few distinct weight values (e.g. boundary cell corrections): count
        # per class instead of summing per ball
        self._weight_classes = None
        if self._tree is not None and self._uniform_weight is None and self.n > 512:
            distinct = np.unique(self.weights)
            if distinct.size <= 8:
                self._weight_classes = [
                    (float(v), cKDTree(self.coords[self.weights == v])) for v in distinct
                ]
        self._mass_cache: dict[float, np.ndarray] = {}
        self._diameter: Optional[float] = None
        if validate:
            self._validate()

    # -- validation ------------------------------------------------------

    def _validate(self):
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise ParameterError("all weights must be strictly positive and finite")
        if self.dist_matrix is not None:
            m = self.dist_matrix
            if m.shape != (self.n, self.n):
                raise ParameterError("dist_matrix must be n x n")
            if np.any(np.diagonal(m) != 0):
                raise ParameterError("metric must vanish on the diagonal")
            rng = np.random.default_rng(0)
            k = min(self.n, 64)
            idx = rng.choice(self.n, size=k, replace=False)
            sub = m[np.ix_(idx, idx)]
            if np.any(sub < 0):
                raise ParameterError("metric must be nonnegative")
            if not np.allclose(sub, sub.T, rtol=0, atol=1e-12):
                raise ParameterError("metric must be symmetric")
            off = sub[~np.eye(k, dtype=bool)]
            if off.size and np.any(off == 0):
                raise ParameterError("metric must be zero exactly on the diagonal")

    # -- basic queries ---------------------------------------------------

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def dim(self) -> int:
        return 0 if self.coords is None else self.coords.shape[1]

    def check_id(self, i) -> int:
        i = int(i)
        if i < 0 or i >= self.n:
            raise InvalidPoint(f"point id {i} out of range [0, {self.n})")
        return i

    def _center_vector(self, center: Center) -> Optional[np.ndarray]:
        if isinstance(center, (int, np.integer)):
            return None
        return np.asarray(center, dtype=float)

    def distances_from(self, center: Center) -> np.ndarray:
        """Distances from a center (id or vector) to every point."""
        vec = self._center_vector(center)
        if vec is None:
            i = self.check_id(center)
            if self.dist_matrix is not None:
                return self.dist_matrix[i]
            diff = self.coords - self.coords[i]
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if self.coords is None:
            raise ParameterError("vector centers need a coordinate metric")
        diff = self.coords - vec
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def distance(self, i: int, j: int) -> float:
        i, j = self.check_id(i), self.check_id(j)
        if self.dist_matrix is not None:
            return float(self.dist_matrix[i, j])
        return float(np.linalg.norm(self.coords[i] - self.coords[j]))

    @property
    def diameter(self) -> float:
        """Exact for matrix metrics and small clouds; otherwise the
        bounding-box diagonal (an upper bound, tight enough for range
        checks)."""
        if self._diameter is None:
            if self.dist_matrix is not None:
                self._diameter = float(np.max(self.dist_matrix))
            elif self.n <= 4096:
                d = 0.0
                for i in range(self.n):
                    d = max(d, float(np.max(self.distances_from(i))))
                self._diameter = d
            else:
                span = self.coords.max(axis=0) - self.coords.min(axis=0)
                self._diameter = float(np.linalg.norm(span))
        return self._diameter

    def members(self, center: Center, radius: float) -> np.ndarray:
        """Sorted ids of the closed ball B_radius(center)."""
        if radius < 0:
            raise InvalidScale("radius must be >= 0")
        vec = self._center_vector(center)
        if self._tree is not None:
            query = self.coords[self.check_id(center)] if vec is None else vec
            # pad the closed-ball boundary against float round-off
            idx = self._tree.query_ball_point(query, radius * (1 + _EPS) + _EPS)
            out = np.sort(np.asarray(idx, dtype=int))
            return out
        dists = self.distances_from(center)
        return np.flatnonzero(dists <= radius * (1 + _EPS) + _EPS)

    def ball_mass(self, center: Center, radius: float) -> float:
        m = self.members(center, radius)
        return float(np.sum(self.weights[m]))

    def masses_at_radius(self, radius: float) -> np.ndarray:
        """mu(B_radius(x)) for every point x; cached per radius."""
        key = float(radius)
        got = self._mass_cache.get(key)
        if got is not None:
            return got
        r = radius * (1 + _EPS) + _EPS
        if self._tree is not None and self._uniform_weight is not None:
            # counting is order-free, so parallel workers stay deterministic
            counts = self._tree.query_ball_point(self.coords, r, return_length=True, workers=-1)
            masses = counts.astype(float) * self._uniform_weight
        elif self._weight_classes is not None:
            masses = np.zeros(self.n)
            for value, tree in self._weight_classes:
                masses += value * tree.query_ball_point(self.coords, r, return_length=True, workers=-1)
        elif self._tree is not None:
            lists = self._tree.query_ball_point(self.coords, r)
            masses = np.array([float(np.sum(self.weights[np.asarray(ix, dtype=int)])) for ix in lists])
        else:
            within = self.dist_matrix <= r
            masses = within @ self.weights
        self._mass_cache[key] = masses
        return masses

    def pairs_within(self, ids_a: np.ndarray, ids_b: np.ndarray, radius: float):
        """Index pairs (into ids_a, ids_b) at distance <= radius."""
        r = radius * (1 + _EPS) + _EPS
        if self._tree is not None:
            ta = cKDTree(self.coords[ids_a])
            tb = cKDTree(self.coords[ids_b])
            lists = ta.query_ball_tree(tb, r)
            ia, ib = [], []
            for a, lst in enumerate(lists):
                for b in sorted(lst):
                    ia.append(a)
                    ib.append(b)
            return np.asarray(ia, dtype=int), np.asarray(ib, dtype=int)
        sub = self.dist_matrix[np.ix_(ids_a, ids_b)]
        ia, ib = np.nonzero(sub <= r)
        order = np.lexsort((ib, ia))
        return ia[order], ib[order]


# -- operations ----------------------------------------------------------


def ball_members(space: FiniteMetricMeasureSpace, ball: Ball) -> np.ndarray:
    """Point ids of the closed ball."""
    return space.members(ball.center, ball.radius)


def mu_ball(space: FiniteMetricMeasureSpace, ball: Ball) -> float:
    """Mass of the closed ball (deterministic fixed-order summation)."""
    return space.ball_mass(ball.center, ball.radius)


def separated_net(
    space: FiniteMetricMeasureSpace,
    subset_ids: Iterable[int],
    k: int,
    maximal: bool = True,
) -> SeparatedNet:
    """Greedy 2^-k separated net of a subset, seeded at the lowest id.

    Points are scanned in increasing id order and kept when at distance
    >= 2^-k from every point already kept; scanning the whole subset makes
    the result maximal (covering radius <= 2^-k) automatically.
    """
    ids = np.sort(np.asarray(list(subset_ids), dtype=int))
    if ids.size == 0:
        raise EmptySet("cannot build a net of an empty subset")
    sep = 2.0 ** (-int(k))
    if sep < space.scale_floor - _EPS:
        raise ResolutionError(
            f"net scale 2^-{k} = {sep} below scale_floor {space.scale_floor}"
        )
    chosen = _greedy_net(space, ids, sep)
    covering = None
    if maximal:
        covering = 0.0
        for i in ids:
            d = min(space.distance(int(i), int(c)) for c in chosen)
            covering = max(covering, d)
    return SeparatedNet(
        scale_k=int(k),
        points=np.asarray(chosen, dtype=int),
        index_set=np.arange(len(chosen)),
        separation=sep,
        covering_radius=covering,
        maximal=maximal,
    )


def _greedy_net(space, ids: np.ndarray, sep: float) -> list:
    if space.coords is None or ids.size <= 256:
        chosen: list[int] = []
        for i in ids:
            i = int(i)
            if all(space.distance(i, c) >= sep * (1 - _EPS) for c in chosen):
                chosen.append(i)
        return chosen
    # hash-grid acceleration: only compare against kept points in the
    # 3^dim neighborhood of the candidate's cell
    coords = space.coords[ids]
    cell = np.floor(coords / sep).astype(np.int64)
    grid: dict[tuple, list[int]] = {}
    chosen = []
    dim = coords.shape[1]
    offsets = np.array(np.meshgrid(*([[-1, 0, 1]] * dim))).T.reshape(-1, dim)
    for row, i in enumerate(ids):
        key = tuple(cell[row])
        ok = True
        for off in offsets:
            nb = grid.get(tuple(cell[row] + off))
            if not nb:
                continue
            d = np.linalg.norm(space.coords[nb] - coords[row], axis=1)
            if np.any(d < sep * (1 - _EPS)):
                ok = False
                break
        if ok:
            chosen.append(int(i))
            grid.setdefault(key, []).append(int(i))
    return chosen


def covering_multiplicity(space: FiniteMetricMeasureSpace, balls: Sequence[Ball]) -> int:
    """Max number of the given balls containing a single point."""
    counts = np.zeros(space.n, dtype=int)
    for b in balls:
        np.add.at(counts, ball_members(space, b), 1)
    return int(counts.max()) if len(balls) else 0


def doubling_constant(space: FiniteMetricMeasureSpace, R: float):
    """Observed doubling constant sup mu(B_2r)/mu(B_r) over r in a dyadic
    grid of [scale_floor, R] and all centers.

    The grid is anchored at scale_floor (radii scale_floor * 2^j), so the
    scans for R1 <= R2 are nested and the constant is monotone in R.
    Returns ``(C_mu, argmax)`` where argmax is the attaining ``(point id, r)``.
    """
    radii = []
    r = space.scale_floor
    while r <= R * (1 + _EPS):
        radii.append(r)
        r *= 2.0
    if not radii:
        raise ResolutionError(f"no radius in [{space.scale_floor}, {R}]")
    best = 0.0
    arg = (0, radii[0])
    for r in radii:
        small = space.masses_at_radius(r)
        big = space.masses_at_radius(2 * r)
        ratios = big / small
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best = float(ratios[i])
            arg = (i, r)
    return best, arg


def _dyadic_down(top: float, floor: float) -> list:
    radii = []
    r = float(top)
    while r >= floor - _EPS:
        radii.append(r)
        r /= 2.0
    return radii


def decay_exponents(
    space: FiniteMetricMeasureSpace,
    R: float,
    max_centers: int = 2048,
    min_pair_radius_factor: float = 4.0,
    interior_fraction: float = 0.9,
) -> DecayReport:
    """Fit the relative volume decay orders from nested same-center balls.

    Envelope estimates come from per-pair slopes
    ``log(mass ratio)/log(radius ratio)`` over adjacent dyadic radii,
    restricted to pairs whose outer ball carries at least
    ``interior_fraction`` of the heaviest ball at that radius (boundary
    truncation would otherwise masquerade as a smaller exponent).  Radii
    below ``min_pair_radius_factor * scale_floor`` are excluded: lattice
    noise dominates below a few mesh cells.  The fit constants are taken
    over the unrestricted pair set, where they absorb boundary factors.
    """
    radii = _dyadic_down(R, space.scale_floor)
    lo = min_pair_radius_factor * space.scale_floor
    usable = [r for r in radii if r >= lo - _EPS]
    if len(usable) < 2:
        usable = radii
    if len(usable) < 2:
        raise InsufficientData("need at least two radii for decay fitting")
    if space.n <= max_centers:
        centers = np.arange(space.n)
    else:
        centers = np.unique(np.linspace(0, space.n - 1, max_centers).astype(int))
    masses = {r: space.masses_at_radius(r)[centers] for r in usable}

    slopes = []
    t_all, m_all = [], []
    for a in range(len(usable) - 1):
        r_big, r_small = usable[a], usable[a + 1]
        mb, ms = masses[r_big], masses[r_small]
        rr = math.log(r_small / r_big)
        ratio = np.log(ms / mb)
        t_all.append(np.full(ratio.size, rr))
        m_all.append(ratio)
        ok = mb >= interior_fraction * np.max(mb)
        if np.any(ok):
            slopes.append(ratio[ok] / rr)
    slopes = np.concatenate(slopes) if slopes else np.array([])
    if slopes.size < 10:
        raise InsufficientData(f"only {slopes.size} interior nested pairs, need >= 10")
    Q_est = float(np.quantile(slopes, 0.9))
    q_est = float(np.quantile(slopes, 0.1))
    central = float(np.mean(slopes))
    resid = float(np.std(slopes))
    ta, ma = np.concatenate(t_all), np.concatenate(m_all)
    C_Q = float(np.max(np.exp(Q_est * ta - ma)))
    C_q = float(np.max(np.exp(ma - q_est * ta)))
    return DecayReport(
        Q_est=Q_est,
        q_est=q_est,
        fit_constants={"C(R,Q)": C_Q, "C(R,q)": C_q},
        residuals=resid,
        n_pairs=int(slopes.size),
        central_slope=central,
    )


def k_of_r(r: float) -> int:
    """The unique integer k with 2^-(k+1) < r <= 2^-k."""
    if not (r > 0) or not math.isfinite(r):
        raise InvalidScale(f"r must be a positive finite real, got {r}")
    k = int(math.floor(-math.log2(r)))
    # exact boundary fix-up against log round-off
    while r > 2.0 ** (-k):
        k -= 1
    while r <= 2.0 ** (-k - 1):
        k += 1
    return k
