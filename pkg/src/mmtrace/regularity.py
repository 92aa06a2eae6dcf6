"""Verifiers for codimensional regularity and porosity of subsets.

A piece is a subset of the cloud with a codimension ``theta`` and a
discrete weight vector standing in for the restricted codimensional
measure.  The two-sided regularity check compares weight sums over balls
against mu(B_r)/r^theta; the lower content check replaces the weight sum
with a set-cover content; the porosity scan searches for empty holes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .content import ContentQuery, hausdorff_content
from .errors import EmptySet, InvalidGrid, InvalidParameter
from .space import _EPS, FiniteMetricMeasureSpace


@dataclass
class SubsetPiece:
    """One Ahlfors-David regular piece: ids, codimension, weights."""

    ids: np.ndarray
    theta: float
    weights: np.ndarray
    adr_constants: Optional[tuple] = None  # (kappa1, kappa2) once verified
    label: str = ""

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=int)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.ids.size == 0:
            raise EmptySet("piece must be nonempty")
        if self.ids.size != self.weights.size:
            raise InvalidParameter("ids/weights length mismatch")
        if np.any(self.weights <= 0):
            raise InvalidParameter("piece weights must be strictly positive")
        order = np.argsort(self.ids)
        self.ids = self.ids[order]
        self.weights = self.weights[order]

    def weight_on(self, member_ids: np.ndarray) -> float:
        """Sum of piece weights over the given (sorted) member ids."""
        pos = np.searchsorted(self.ids, member_ids)
        pos = np.clip(pos, 0, self.ids.size - 1)
        hit = self.ids[pos] == member_ids
        return float(np.sum(self.weights[pos[hit]]))

    def dense_weights(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.ids] = self.weights
        return out


@dataclass
class PiecewiseSet:
    """Ordered union of pieces with strictly increasing codimensions."""

    pieces: list
    theta_S: float = field(init=False)
    union_ids: np.ndarray = field(init=False)
    N: int = field(init=False)

    def __post_init__(self):
        thetas = [p.theta for p in self.pieces]
        if len(thetas) == 0:
            raise InvalidParameter("need at least one piece")
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise InvalidParameter(f"piece codimensions must be strictly increasing, got {thetas}")
        self.theta_S = float(thetas[-1])
        self.union_ids = np.unique(np.concatenate([p.ids for p in self.pieces]))
        self.N = len(self.pieces)

    @property
    def thetas(self):
        return [p.theta for p in self.pieces]


@dataclass
class PorosityReport:
    sigma: float
    r_grid: list
    porous_points_per_scale: list   # bool mask over the subset, per scale
    is_porous: bool

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "r": list(map(float, self.r_grid)),
            "porous_fraction": [float(np.mean(m)) for m in self.porous_points_per_scale],
            "ok": bool(self.is_porous),
        }


def default_r_grid(space: FiniteMetricMeasureSpace, top: float = 1.0) -> list:
    """Dyadic scales from ``top`` down to 4*scale_floor."""
    grid = []
    r = float(top)
    while r >= 4.0 * space.scale_floor - _EPS:
        grid.append(r)
        r /= 2.0
    if not grid:
        grid = [float(top)]
    return grid


def check_adr(
    space: FiniteMetricMeasureSpace,
    piece: SubsetPiece,
    r_grid: Sequence[float],
    max_ratio: Optional[float] = None,
):
    """Two-sided regularity constants of a piece over centers x in the
    piece and radii in r_grid.

    Returns ``(kappa1, kappa2, ok)`` where kappa1/kappa2 are the extremes
    of weight(B cap S) * r^theta / mu(B_r(x)).  Since the center itself
    always carries positive weight, kappa1 cannot vanish exactly on a
    finite cloud; pass ``max_ratio`` to flag pieces whose two-sided spread
    kappa2/kappa1 exceeds it (e.g. sets with gaps) as not regular.
    """
    r_grid = list(r_grid)
    if not r_grid:
        raise InvalidGrid("r_grid must be nonempty")
    from ._neighbors import SubsetNeighbors

    nbrs = SubsetNeighbors(space, piece.ids)
    lo, hi = np.inf, 0.0
    theta = piece.theta
    for r in r_grid:
        masses = space.masses_at_radius(r)[piece.ids]
        lists = nbrs.self_lists(r)
        for pos in range(piece.ids.size):
            hs = float(np.sum(piece.weights[lists[pos]]))
            ratio = hs * r**theta / masses[pos]
            lo = min(lo, ratio)
            hi = max(hi, ratio)
    ok = bool(np.isfinite(hi) and lo > 0)
    if ok and max_ratio is not None:
        ok = bool(hi / lo <= max_ratio)
    piece.adr_constants = (float(lo), float(hi))
    return float(lo), float(hi), ok


def check_lcr(
    space: FiniteMetricMeasureSpace,
    subset_ids,
    theta: float,
    r_grid: Sequence[float],
) -> float:
    """Lower content regularity constant: min over (x, r) of
    content(B_r(x) cap S; delta=r) * r^theta / mu(B_r(x))."""
    r_grid = list(r_grid)
    if not r_grid:
        raise InvalidGrid("r_grid must be nonempty")
    subset_ids = np.unique(np.asarray(subset_ids, dtype=int))
    lam = np.inf
    for r in r_grid:
        masses = space.masses_at_radius(r)
        for x in subset_ids:
            members = space.members(int(x), r)
            local = members[np.isin(members, subset_ids, assume_unique=True)]
            sol = hausdorff_content(space, ContentQuery(local, theta, r, "greedy"))
            lam = min(lam, sol.value * r**theta / masses[int(x)])
    return float(lam)


def porosity_scan(
    space: FiniteMetricMeasureSpace,
    subset_ids,
    sigma: float,
    r_grid: Sequence[float],
) -> PorosityReport:
    """Per-scale porosity masks: a center x passes at scale r when some
    ball of radius sigma*r inside B_r(x) misses the subset.

    Hole emptiness is tested with the hole radius reduced by one mesh
    cell, which keeps boundary sampling from producing false negatives.
    """
    if not (0 < sigma <= 1):
        raise InvalidParameter(f"sigma must lie in (0, 1], got {sigma}")
    r_grid = list(r_grid)
    if not r_grid:
        raise InvalidGrid("r_grid must be nonempty")
    subset_ids = np.unique(np.asarray(subset_ids, dtype=int))
    # distance from every space point to the subset
    d_to_s = _distance_to_subset(space, subset_ids)
    masks = []
    for r in r_grid:
        rho_eff = max(sigma * r - space.resolution, 0.0)
        reach = (1.0 - sigma) * r
        mask = np.zeros(subset_ids.size, dtype=bool)
        for pos, x in enumerate(subset_ids):
            nearby = space.members(int(x), reach)
            if nearby.size:
                mask[pos] = bool(np.max(d_to_s[nearby]) > rho_eff + _EPS)
        masks.append(mask)
    is_porous = bool(all(m.all() for m in masks))
    return PorosityReport(sigma=float(sigma), r_grid=r_grid, porous_points_per_scale=masks, is_porous=is_porous)


def _distance_to_subset(space, subset_ids: np.ndarray) -> np.ndarray:
    if space.coords is not None:
        from scipy.spatial import cKDTree

        sub_tree = cKDTree(space.coords[subset_ids])
        d, _ = sub_tree.query(space.coords, k=1)
        return d
    return np.min(space.dist_matrix[:, subset_ids], axis=1)


def compose_piecewise(pieces: Sequence[SubsetPiece]) -> PiecewiseSet:
    """Bundle verified (or explicitly unverified) pieces into a set with
    theta(S) = theta_N."""
    return PiecewiseSet(pieces=list(pieces))


def porosity_product_sigma(sigmas: Sequence[float]) -> float:
    """Porosity constant of a union from per-piece constants: prod 2*sigma_i/3."""
    sigmas = list(sigmas)
    if not sigmas:
        raise InvalidParameter("need at least one sigma")
    if any(not (0 < s <= 1) for s in sigmas):
        raise InvalidParameter("each sigma must lie in (0, 1]")
    out = 1.0
    for s in sigmas:
        out *= 2.0 * s / 3.0
    return out


def adr_report_json(piece: SubsetPiece, r_grid, kappa1, kappa2, ok) -> dict:
    return {
        "r": list(map(float, r_grid)),
        "kappa1": float(kappa1),
        "kappa2": float(kappa2),
        "ok": bool(ok),
    }


def lcr_report_json(r_grid, lam) -> dict:
    return {"r": list(map(float, r_grid)), "lambda": float(lam), "ok": bool(lam > 0)}
