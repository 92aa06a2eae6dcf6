"""Codimensional Hausdorff contents and measures via weighted set cover.

The content of a target set at codimension theta and scale delta is the
cheapest cover by balls of radius < delta, where a ball of radius r costs
mu(B)/r^theta.  The candidate pool is restricted to balls centered at
target points with dyadic radii in [scale_floor, delta); the infimum over
arbitrary centers differs from this restricted one by at most a
doubling-constant factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameter, MissingMetadata, ResolutionError
from .space import _EPS, Ball, FiniteMetricMeasureSpace

EXACT_CANDIDATE_LIMIT = 24


@dataclass
class ContentQuery:
    target: np.ndarray            # point ids of E
    theta: float
    delta: float
    method: str = "greedy"        # greedy | exact | both

    def __post_init__(self):
        self.target = np.unique(np.asarray(self.target, dtype=int))
        if self.theta < 0:
            raise InvalidParameter("theta must be >= 0")
        if self.method not in ("greedy", "exact", "both"):
            raise InvalidParameter(f"unknown method {self.method!r}")


@dataclass
class CoverSolution:
    balls: list
    value: float
    method_used: str
    optimality_gap: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "balls": [{"center": int(b.center), "radius": float(b.radius)} for b in self.balls],
            "method": self.method_used,
            "gap": self.optimality_gap,
        }


def _candidate_pool(space, target: np.ndarray, theta: float, delta: float):
    """Dyadic-radius balls centered at target points, with member sets
    restricted to the target and their cover weights."""
    radii = []
    top = min(delta * (1 - 1e-9), 4.0 * max(space.diameter, space.scale_floor))
    k = math.floor(-math.log2(space.scale_floor))
    while 2.0 ** (-k) <= top:
        if 2.0 ** (-k) >= space.scale_floor - _EPS:
            radii.append(2.0 ** (-k))
        k -= 1
    if not radii and space.scale_floor < delta:
        radii = [space.scale_floor]
    radii = sorted(radii)
    balls, covers, weights = [], [], []
    tpos = {int(i): p for p, i in enumerate(target)}
    for c in target:
        for r in radii:
            members = space.members(int(c), r)
            cov = np.array([tpos[int(m)] for m in members if int(m) in tpos], dtype=int)
            balls.append(Ball(int(c), r))
            covers.append(cov)
            weights.append(space.ball_mass(int(c), r) / r**theta)
    return balls, covers, weights


def _greedy_cover(n_target: int, balls, covers, weights):
    uncovered = np.ones(n_target, dtype=bool)
    chosen = []
    total = 0.0
    while uncovered.any():
        # candidates are in deterministic (center, radius) order; strict <
        # keeps the first minimizer, so ties break reproducibly
        best, best_score = -1, math.inf
        for i, cov in enumerate(covers):
            gain = int(np.sum(uncovered[cov]))
            if gain == 0:
                continue
            score = weights[i] / gain
            if score < best_score:
                best, best_score = i, score
        if best < 0:
            raise InvalidParameter("candidate pool cannot cover the target")
        chosen.append(best)
        total += weights[best]
        uncovered[covers[best]] = False
    return chosen, total


def _exact_cover(n_target: int, covers, weights):
    """Branch and bound over candidate subsets; exact for small pools."""
    n = len(covers)
    masks = []
    for cov in covers:
        m = 0
        for p in cov:
            m |= 1 << int(p)
        masks.append(m)
    full = (1 << n_target) - 1
    best = [math.inf, None]

    element_candidates = [[i for i in range(n) if masks[i] >> e & 1] for e in range(n_target)]
    if any(not c for c in element_candidates):
        raise InvalidParameter("candidate pool cannot cover the target")

    def rec(covered: int, cost: float, chosen: tuple):
        if cost >= best[0]:
            return
        if covered == full:
            best[0] = cost
            best[1] = chosen
            return
        # branch on the uncovered element with fewest candidates
        pick_cands = None
        for e in range(n_target):
            if covered >> e & 1:
                continue
            if pick_cands is None or len(element_candidates[e]) < len(pick_cands):
                pick_cands = element_candidates[e]
        for i in sorted(pick_cands, key=lambda i: (weights[i], i)):
            rec(covered | masks[i], cost + weights[i], chosen + (i,))

    rec(0, 0.0, ())
    return list(best[1]), float(best[0])


def hausdorff_content(space: FiniteMetricMeasureSpace, query: ContentQuery) -> CoverSolution:
    """Approximate codimension-theta Hausdorff content at scale delta.

    Greedy picks the ball minimizing cost per newly covered point; the
    exact method runs branch-and-bound when the pool has at most
    ``EXACT_CANDIDATE_LIMIT`` candidates.  ``both`` returns the greedy
    cover with its gap against the exact optimum.
    """
    if query.delta <= space.scale_floor:
        raise ResolutionError(
            f"delta {query.delta} must exceed scale_floor {space.scale_floor}"
        )
    target = query.target
    if target.size == 0:
        return CoverSolution(balls=[], value=0.0, method_used=query.method, optimality_gap=0.0)
    balls, covers, weights = _candidate_pool(space, target, query.theta, query.delta)
    method = query.method
    if method in ("exact", "both") and len(balls) > EXACT_CANDIDATE_LIMIT:
        raise InvalidParameter(
            f"exact cover limited to {EXACT_CANDIDATE_LIMIT} candidates, pool has {len(balls)}"
        )
    if method == "exact":
        chosen, value = _exact_cover(target.size, covers, weights)
        return CoverSolution([balls[i] for i in chosen], value, "exact", 0.0)
    chosen, value = _greedy_cover(target.size, balls, covers, weights)
    gap = None
    if method == "both":
        _, exact_value = _exact_cover(target.size, covers, weights)
        gap = (value - exact_value) / exact_value if exact_value > 0 else 0.0
    return CoverSolution([balls[i] for i in chosen], value, method, gap)


@dataclass
class MeasureTrace:
    value: float
    deltas: list
    values: list
    stabilized: bool


def hausdorff_measure(
    space: FiniteMetricMeasureSpace,
    target,
    theta: float,
    method: str = "greedy",
) -> MeasureTrace:
    """Content evaluated along delta = 1, 1/2, ... down to 2*scale_floor.

    Returns the last value with the whole trace; flags non-stabilization
    when the final two values differ by more than 5% relative.
    """
    target = np.unique(np.asarray(target, dtype=int))
    if target.size == 0:
        return MeasureTrace(0.0, [], [], True)
    deltas, values = [], []
    delta = 1.0
    while delta >= 2.0 * space.scale_floor - _EPS:
        sol = hausdorff_content(space, ContentQuery(target, theta, delta, method))
        deltas.append(delta)
        values.append(sol.value)
        delta /= 2.0
    if not values:
        raise ResolutionError("no delta scale above 2*scale_floor")
    stabilized = True
    if len(values) >= 2 and values[-1] > 0:
        stabilized = abs(values[-1] - values[-2]) / values[-1] <= 0.05
    return MeasureTrace(values[-1], deltas, values, stabilized)


def piece_measure_weights(
    space: FiniteMetricMeasureSpace,
    target,
    theta: float,
    mode: str = "content",
    cell_elements: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Discrete weight vector standing in for the restricted codimensional
    measure on the target.

    ``analytic`` uses generator-supplied cell elements (length/area per
    point); ``content`` assigns each point the content of its own cell in
    the target (a singleton on the sample cloud) at delta = 2*scale_floor.
    """
    target = np.asarray(target, dtype=int)
    if mode == "analytic":
        if cell_elements is None:
            raise MissingMetadata("analytic mode needs generator cell elements")
        w = np.asarray(cell_elements, dtype=float)
        if w.shape != target.shape:
            raise InvalidParameter("cell_elements must align with target")
        return w
    if mode != "content":
        raise InvalidParameter(f"unknown mode {mode!r}")
    out = np.empty(target.size)
    for pos, x in enumerate(target):
        sol = hausdorff_content(
            space, ContentQuery(np.array([x]), theta, 2.0 * space.scale_floor, "greedy")
        )
        out[pos] = sol.value
    return out
