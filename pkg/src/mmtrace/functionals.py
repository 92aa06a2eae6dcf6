"""Trace-characterizing functionals on a piecewise set.

Everything here consumes a space, a piecewise set whose pieces carry
discrete codimensional weights, and a sample function given densely over
the cloud.  Scale sums run over dyadic scales 2^-k and are truncated at
the deepest scale above the resolution floor; the magnitude of the last
retained term is reported as the truncation tail.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._neighbors import SubsetNeighbors
from .errors import (
    InvalidFamily,
    InvalidPair,
    InvalidParameter,
    ParameterError,
    ResolutionError,
    ZeroMass,
)
from .measures import MeasureSequence, default_k_max, weighted_stats
from .regularity import PiecewiseSet, SubsetPiece, porosity_scan
from .space import _EPS, Ball, k_of_r, separated_net


@dataclass
class SampleFunction:
    """Real values per cloud point; the trace candidate lives on S."""

    values: np.ndarray
    domain: Optional[PiecewiseSet] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.domain is not None:
            on_s = self.values[self.domain.union_ids]
            if not np.all(np.isfinite(on_s)):
                raise InvalidParameter("sample function must be finite on S")


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, SampleFunction) else np.asarray(f, dtype=float)


@dataclass
class FunctionalReport:
    name: str
    value: float
    parts: dict
    params: dict
    truncation_tail: float = 0.0

    def __post_init__(self):
        self.value = float(self.value)
        self.truncation_tail = float(self.truncation_tail)
        self.parts = {k: float(v) for k, v in self.parts.items()}

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "parts": {k: float(v) for k, v in self.parts.items()},
            "params": {k: (float(v) if isinstance(v, np.floating) else v) for k, v in self.params.items()},
            "truncation_tail": float(self.truncation_tail),
        }


@dataclass
class NiceFamily:
    """Disjoint balls of radius <= 1 whose c-dilations meet S."""

    balls: list
    c: float
    kind: str = "nice"   # nice | whitney


# ----------------------------------------------------------------------
# piece-level machinery
# ----------------------------------------------------------------------


def _piece_nbrs(space, piece: SubsetPiece) -> SubsetNeighbors:
    """Neighbor structure of a piece, cached on the piece per space."""
    store = getattr(piece, "_nbrs_store", None)
    if store is None:
        store = {}
        object.__setattr__(piece, "_nbrs_store", store)
    key = id(space)
    if key not in store:
        store[key] = SubsetNeighbors(space, piece.ids)
    return store[key]


def _sorted_ball_cache(lists, vals, wts):
    """For each point: member values sorted with padded weight prefix sums."""
    out = []
    for members in lists:
        g = vals[members]
        u = wts[members]
        order = np.argsort(g, kind="stable")
        g, u = g[order], u[order]
        cw = np.concatenate(([0.0], np.cumsum(u)))
        cwg = np.concatenate(([0.0], np.cumsum(u * g)))
        out.append((g, cw, cwg))
    return out


def _abs_diff_against_sorted(sorted_entry, gb: np.ndarray, vb: np.ndarray) -> float:
    """sum_{a,b} u_a v_b |g_a - g_b| given one side pre-sorted."""
    g, cw, cwg = sorted_entry
    w_tot, s_tot = cw[-1], cwg[-1]
    idx = np.searchsorted(g, gb, side="right")
    w_le, s_le = cw[idx], cwg[idx]
    per_b = gb * w_le - s_le + (s_tot - s_le) - gb * (w_tot - w_le)
    return float(np.sum(vb * per_b))


def averaging_single(space, piece: SubsetPiece, f, k: int) -> np.ndarray:
    """Ball averages of f over the piece at scale 2^-k, one per piece point.

    Averages are computed relative to the center value, so constants pass
    through exactly."""
    r = 2.0 ** (-int(k))
    vals = _values(f)[piece.ids]
    lists = _piece_nbrs(space, piece).self_lists(r)
    out = np.empty(piece.ids.size)
    for pos, members in enumerate(lists):
        w = piece.weights[members]
        out[pos] = vals[pos] + float(np.sum(w * (vals[members] - vals[pos])) / np.sum(w))
    return out


def averaging_double(space, piece_i: SubsetPiece, piece_j: SubsetPiece, f, k: int, y: int, z: int) -> float:
    """Double ball average of |f(y') - f(z')| for a pair in the proximity set."""
    r = 2.0 ** (-int(k))
    if space.distance(int(y), int(z)) > r * (1 + _EPS) + _EPS:
        raise InvalidPair(f"d({y},{z}) exceeds 2^-{k}")
    vals = _values(f)
    mi = _piece_nbrs(space, piece_i).members_of(int(y), r)
    mj = _piece_nbrs(space, piece_j).members_of(int(z), r)
    wi, wj = piece_i.weights[mi], piece_j.weights[mj]
    gi, gj = vals[piece_i.ids[mi]], vals[piece_j.ids[mj]]
    num = float(np.sum(wi[:, None] * wj[None, :] * np.abs(gi[:, None] - gj[None, :])))
    return num / (float(np.sum(wi)) * float(np.sum(wj)))


def weight_w(space, k: int, y, z) -> float:
    """Pair weight 1/sqrt(mu(B_k(y)) mu(B_k(z))) at scale 2^-k."""
    r = 2.0 ** (-int(k))
    if r < space.scale_floor - _EPS:
        raise ResolutionError(f"2^-{k} below scale_floor")
    my = space.ball_mass(y, r) if not isinstance(y, (int, np.integer)) else space.masses_at_radius(r)[int(y)]
    mz = space.ball_mass(z, r) if not isinstance(z, (int, np.integer)) else space.masses_at_radius(r)[int(z)]
    if my <= 0 or mz <= 0:
        raise ZeroMass("weight undefined on a zero-mass ball")
    return 1.0 / math.sqrt(my * mz)


def weight_w_alt(space, k: int, y, z) -> float:
    """Arithmetic-mean variant of the pair weight."""
    r = 2.0 ** (-int(k))
    my = space.masses_at_radius(r)[int(y)]
    mz = space.masses_at_radius(r)[int(z)]
    if my <= 0 or mz <= 0:
        raise ZeroMass("weight undefined on a zero-mass ball")
    return 0.5 * (1.0 / my + 1.0 / mz)


# ----------------------------------------------------------------------
# Besov norms on a single piece
# ----------------------------------------------------------------------


def besov_norm(space, piece: SubsetPiece, f, s: float, p: float, k_max: Optional[int] = None) -> FunctionalReport:
    """Besov norm of smoothness s: L_p part plus the deviation scale sum."""
    if not (0 < s < 1):
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    if k_max is None:
        k_max = default_k_max(space)
    vals = _values(f)[piece.ids]
    h = piece.weights
    lp = float(np.sum(h * np.abs(vals) ** p) ** (1.0 / p))
    nbrs = _piece_nbrs(space, piece)
    semi_p = 0.0
    last = 0.0
    for k in range(1, k_max + 1):
        lists = nbrs.self_lists(2.0 ** (-k))
        term = 0.0
        for pos, members in enumerate(lists):
            e = weighted_stats(vals[members], h[members]).best_dev
            term += h[pos] * e**p
        last = 2.0 ** (k * s * p) * term
        semi_p += last
    semi = semi_p ** (1.0 / p)
    return FunctionalReport(
        name="besov",
        value=lp + semi,
        parts={"lp": lp, "seminorm": semi},
        params={"s": s, "p": p, "theta": piece.theta, "k_max": k_max},
        truncation_tail=last ** (1.0 / p),
    )


def besov_norm_alt(space, piece: SubsetPiece, f, s: float, p: float, k_max: Optional[int] = None) -> FunctionalReport:
    """Alternative Besov form with the double-average inner term."""
    if not (0 < s < 1):
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    if k_max is None:
        k_max = default_k_max(space)
    vals = _values(f)[piece.ids]
    h = piece.weights
    lp = float(np.sum(h * np.abs(vals) ** p) ** (1.0 / p))
    nbrs = _piece_nbrs(space, piece)
    semi_p = 0.0
    last = 0.0
    for k in range(1, k_max + 1):
        lists = nbrs.self_lists(2.0 ** (-k))
        term = 0.0
        for pos, members in enumerate(lists):
            w = h[members]
            inner = float(np.sum(w * np.abs(vals[members] - vals[pos]) ** p) / np.sum(w))
            term += h[pos] * inner
        last = 2.0 ** (k * s * p) * term
        semi_p += last
    semi = semi_p ** (1.0 / p)
    return FunctionalReport(
        name="besov_alt",
        value=lp + semi,
        parts={"lp": lp, "seminorm": semi},
        params={"s": s, "p": p, "theta": piece.theta, "k_max": k_max},
        truncation_tail=last ** (1.0 / p),
    )


# ----------------------------------------------------------------------
# gluing functionals
# ----------------------------------------------------------------------


class GluingConfig:
    """Cached proximity sets between pieces across scales."""

    def __init__(self, space, piecewise: PiecewiseSet, p: float, k_max: int):
        if not (1 < p < math.inf):
            raise ParameterError("p must lie in (1, inf)")
        self.space = space
        self.piecewise = piecewise
        self.p = float(p)
        self.k_max = int(k_max)
        self.nbrs = [_piece_nbrs(space, pc) for pc in piecewise.pieces]
        self._pairs: dict = {}

    def sigma_pairs(self, i: int, j: int, k: int):
        """Position pairs (piece i, piece j) at distance <= 2^-k."""
        key = (i, j, k)
        if key not in self._pairs:
            ia, ib = self.nbrs[i].cross_pairs(self.nbrs[j], 2.0 ** (-k))
            self._pairs[key] = (ia, ib)
        return self._pairs[key]

    def s_set_mask(self, i: int, j: int, k: int) -> np.ndarray:
        """Mask over piece i of points whose 2^-k ball meets piece j."""
        ia, _ = self.sigma_pairs(i, j, k)
        mask = np.zeros(self.piecewise.pieces[i].ids.size, dtype=bool)
        mask[ia] = True
        return mask


def gluing(
    space,
    piecewise: PiecewiseSet,
    f,
    p: float,
    which: int,
    k_max: Optional[int] = None,
    config: Optional[GluingConfig] = None,
) -> FunctionalReport:
    """Cross-piece gluing functional; ``which`` selects the raw (1),
    averaged (2), or doubly averaged (3) mismatch term."""
    if which not in (1, 2, 3):
        raise InvalidParameter("which must be 1, 2, or 3")
    if k_max is None:
        k_max = default_k_max(space)
    params = {"p": p, "which": which, "k_max": k_max}
    if piecewise.N == 1:
        return FunctionalReport(
            name=f"gl{which}", value=0.0,
            parts={"total_p": 0.0}, params={**params, "note": "single piece, no cross pairs"},
        )
    cfg = config or GluingConfig(space, piecewise, p, k_max)
    vals = _values(f)
    pieces = piecewise.pieces
    total_p = 0.0
    last_k_term = 0.0
    piece_vals = [vals[pc.ids] for pc in pieces]

    for k in range(1, k_max + 1):
        r = 2.0 ** (-k)
        mu_r = space.masses_at_radius(r)
        if which == 2:
            avg = []
            for i, pc in enumerate(pieces):
                lists = cfg.nbrs[i].self_lists(r)
                a = np.empty(pc.ids.size)
                vi = piece_vals[i]
                for pos, members in enumerate(lists):
                    w = pc.weights[members]
                    # centered form: constants pass through exactly
                    a[pos] = vi[pos] + float(np.sum(w * (vi[members] - vi[pos])) / np.sum(w))
                avg.append(a)
        if which == 3:
            # shift by a reference value: |g - g'| is shift-invariant and
            # constants then cancel exactly in the prefix sums
            ref = float(vals[pieces[0].ids[0]])
            shifted = [pv - ref for pv in piece_vals]
            sorted_caches = [
                _sorted_ball_cache(cfg.nbrs[i].self_lists(r), shifted[i], pieces[i].weights)
                for i in range(piecewise.N)
            ]
            mass_caches = [
                np.array([float(np.sum(pieces[i].weights[m])) for m in cfg.nbrs[i].self_lists(r)])
                for i in range(piecewise.N)
            ]
        k_term = 0.0
        for i in range(piecewise.N):
            for j in range(i + 1, piecewise.N):
                ia, ib = cfg.sigma_pairs(i, j, k)
                if ia.size == 0:
                    continue
                yi, zj = pieces[i].ids[ia], pieces[j].ids[ib]
                w_pair = 1.0 / np.sqrt(mu_r[yi] * mu_r[zj])
                hh = pieces[i].weights[ia] * pieces[j].weights[ib]
                if which == 1:
                    term = np.abs(vals[yi] - vals[zj]) ** p
                elif which == 2:
                    term = np.abs(avg[i][ia] - avg[j][ib]) ** p
                else:
                    term = np.empty(ia.size)
                    lists_j = cfg.nbrs[j].self_lists(r)
                    for t in range(ia.size):
                        a, b = ia[t], ib[t]
                        gb = shifted[j][lists_j[b]]
                        vb = pieces[j].weights[lists_j[b]]
                        num = _abs_diff_against_sorted(sorted_caches[i][a], gb, vb)
                        term[t] = (num / (mass_caches[i][a] * mass_caches[j][b])) ** p
                scale = 2.0 ** (k * (p - pieces[i].theta - pieces[j].theta))
                # the ordered (i, j) + (j, i) sum is twice the i < j sum
                k_term += 2.0 * scale * float(np.sum(hh * w_pair * term))
        total_p += k_term
        last_k_term = k_term
    value = total_p ** (1.0 / p)
    return FunctionalReport(
        name=f"gl{which}",
        value=value,
        parts={"total_p": total_p},
        params=params,
        truncation_tail=last_k_term ** (1.0 / p),
    )


# ----------------------------------------------------------------------
# maximal functions and the Besov-type functional
# ----------------------------------------------------------------------


def tilde_e(seq: MeasureSequence, f, k: int, center, radius: float) -> float:
    """Deviation on the doubled ball, or zero when the ball misses S."""
    probe = seq.neighbors.members_of(center, radius)
    if probe.size == 0:
        return 0.0
    f_on_s = _values(f)[seq.support_ids]
    return seq.e_ball(k, f_on_s, center, 2.0 * radius)


def calderon_maximal(space, seq: MeasureSequence, f, eval_ids=None) -> np.ndarray:
    """Scale-penalized maximal deviation sup_r (1/r) E~ at dyadic r in
    [scale_floor, 1], evaluated at the given points (default: S)."""
    ids = seq.support_ids if eval_ids is None else np.asarray(eval_ids, dtype=int)
    f_on_s = _values(f)[seq.support_ids]
    out = np.zeros(ids.size)
    for j in range(seq.k_max + 1):
        r = 2.0 ** (-j)
        inv_r = 2.0**j
        mk = seq.weights_per_k[min(j, seq.k_max)]
        for pos, x in enumerate(ids):
            probe = seq.neighbors.members_of(int(x), r)
            if probe.size == 0:
                continue
            ball = seq.neighbors.members_of(int(x), 2.0 * r)
            e = weighted_stats(f_on_s[ball], mk[ball]).best_dev
            out[pos] = max(out[pos], inv_r * e)
    return out


def bn_functional(
    space,
    seq: MeasureSequence,
    piecewise: PiecewiseSet,
    f,
    p: float,
    sigma: float,
    c: Optional[float] = None,
    k_max: Optional[int] = None,
) -> FunctionalReport:
    """Besov-type trace functional: L_p part, sharp-maximal part, and the
    porous-set deviation scale sum."""
    if not (0 < sigma <= 1):
        raise InvalidParameter(f"sigma must lie in (0, 1], got {sigma}")
    if c is not None and sigma >= seq.epsilon**2 / (4.0 * c):
        warnings.warn(
            f"sigma={sigma} outside the admissible range (0, {seq.epsilon ** 2 / (4 * c):.4g}) for c={c}",
            stacklevel=2,
        )
    if k_max is None:
        k_max = seq.k_max
    vals = _values(f)
    S = seq.support_ids
    f_on_s = vals[S]
    m0 = seq.weights_per_k[0]
    lp = float(np.sum(m0 * np.abs(f_on_s) ** p) ** (1.0 / p))

    sharp_vals = calderon_maximal(space, seq, f)
    mu_on_s = space.weights[S]
    sharp = float(np.sum(mu_on_s * sharp_vals**p) ** (1.0 / p))

    r_grid = [2.0 ** (-k) for k in range(1, k_max + 1)]
    report = porosity_scan(space, S, sigma, r_grid)
    scale_p = 0.0
    last = 0.0
    for k in range(1, k_max + 1):
        mask = report.porous_points_per_scale[k - 1]
        mk = seq.weights_per_k[k]
        r = 2.0 ** (-k)
        lists = seq.neighbors.self_lists(r)
        term = 0.0
        for pos in np.flatnonzero(mask):
            e = weighted_stats(f_on_s[lists[pos]], mk[lists[pos]]).best_dev
            term += mk[pos] * e**p
        last = 2.0 ** (k * (p - seq.theta)) * term
        scale_p += last
    scale_sum = scale_p ** (1.0 / p)
    theta1 = piecewise.pieces[0].theta
    return FunctionalReport(
        name="bn",
        value=lp + sharp + scale_sum,
        parts={"lp": lp, "sharp": sharp, "scale_sum": scale_sum},
        params={
            "p": p,
            "sigma": sigma,
            "theta": seq.theta,
            "k_max": k_max,
            "continuum_mu_s_zero": bool(theta1 > 0),
        },
        truncation_tail=last ** (1.0 / p),
    )


# ----------------------------------------------------------------------
# nice families and the packing functional
# ----------------------------------------------------------------------


def validate_nice_family(space, subset_ids, family: NiceFamily):
    """Assert the defining family conditions exactly on the cloud."""
    if family.c < 1:
        raise InvalidFamily("family constant c must be >= 1")
    subset_ids = np.unique(np.asarray(subset_ids, dtype=int))
    member_sets = []
    for b in family.balls:
        if b.radius > 1.0 + _EPS:
            raise InvalidFamily(f"ball radius {b.radius} exceeds 1")
        members = space.members(b.center, b.radius)
        member_sets.append(set(int(m) for m in members))
        dilated = space.members(b.center, family.c * b.radius)
        if not np.any(np.isin(dilated, subset_ids, assume_unique=False)):
            raise InvalidFamily("a dilated ball misses the subset")
        if family.kind == "whitney" and np.any(np.isin(members, subset_ids)):
            raise InvalidFamily("a whitney ball meets the subset")
    for a in range(len(member_sets)):
        for b in range(a):
            if member_sets[a] & member_sets[b]:
                raise InvalidFamily(f"balls {b} and {a} share cloud points")


def enumerate_or_search_nice_family(
    space,
    subset_ids,
    c: float,
    budget: int,
    term_fn: Optional[Callable[[Ball], float]] = None,
    kind: str = "nice",
    candidates: Optional[Sequence[Ball]] = None,
    method: str = "greedy",
    radii: Optional[Sequence[float]] = None,
) -> NiceFamily:
    """Build a valid family maximizing the sum of per-ball terms.

    Candidates default to balls on separated nets of the subset with
    matching dyadic radii (pass ``radii`` to pin the scale range, e.g. for
    cross-resolution comparisons).  Greedy adds the best-scoring disjoint
    ball up to the budget, then a swap pass trades chosen balls for better
    conflicting ones.  ``method='exact'`` enumerates subsets (pools of at
    most 16 candidates).
    """
    if c < 1:
        raise InvalidParameter("nice families need c >= 1")
    subset_ids = np.unique(np.asarray(subset_ids, dtype=int))
    if budget <= 0:
        return NiceFamily(balls=[], c=float(c), kind=kind)
    if term_fn is None:
        term_fn = lambda b: space.ball_mass(b.center, b.radius)
    if candidates is None:
        if radii is None:
            radii = [2.0 ** (-j) for j in range(default_k_max(space) + 1)]
        candidates = []
        for r in radii:
            net = separated_net(space, subset_ids, k_of_r(r), maximal=False)
            for x in net.points:
                candidates.append(Ball(int(x), float(r)))
    pool = []
    for b in candidates:
        if b.radius > 1.0 + _EPS:
            continue
        dilated = space.members(b.center, c * b.radius)
        if not np.any(np.isin(dilated, subset_ids)):
            continue
        if kind == "whitney" and np.any(np.isin(space.members(b.center, b.radius), subset_ids)):
            continue
        pool.append(b)
    terms = np.array([term_fn(b) for b in pool])
    member_sets = [space.members(b.center, b.radius) for b in pool]

    if method == "exact":
        if len(pool) > 16:
            raise InvalidParameter("exact enumeration limited to 16 candidates")
        best_val, best_set = -1.0, ()
        masks = []
        for m in member_sets:
            bits = 0
            for i in m:
                bits |= 1 << int(i)
            masks.append(bits)
        for sub in range(1 << len(pool)):
            idxs = [i for i in range(len(pool)) if sub >> i & 1]
            if len(idxs) > budget:
                continue
            acc = 0
            ok = True
            for i in idxs:
                if acc & masks[i]:
                    ok = False
                    break
                acc |= masks[i]
            if ok:
                v = float(np.sum(terms[idxs])) if idxs else 0.0
                if v > best_val:
                    best_val, best_set = v, tuple(idxs)
        return NiceFamily(balls=[pool[i] for i in best_set], c=float(c), kind=kind)

    order = sorted(
        range(len(pool)),
        key=lambda i: (-terms[i], int(pool[i].center) if isinstance(pool[i].center, (int, np.integer)) else -1, pool[i].radius),
    )
    taken = np.zeros(space.n, dtype=bool)
    chosen: list[int] = []
    for i in order:
        if len(chosen) >= budget or terms[i] <= 0:
            break
        if not np.any(taken[member_sets[i]]):
            chosen.append(i)
            taken[member_sets[i]] = True

    for _ in range(3):
        improved = False
        chosen_set = set(chosen)
        for i in order:
            if i in chosen_set or terms[i] <= 0:
                continue
            conflicts = [j for j in chosen if np.intersect1d(member_sets[i], member_sets[j]).size]
            if terms[i] > float(np.sum(terms[conflicts])) + _EPS:
                for j in conflicts:
                    chosen.remove(j)
                    taken[member_sets[j]] = False
                if len(chosen) < budget:
                    chosen.append(i)
                    taken[member_sets[i]] = True
                    improved = True
                else:
                    # budget full after removals: put conflicts back
                    for j in conflicts:
                        chosen.append(j)
                        taken[member_sets[j]] = True
                chosen_set = set(chosen)
        # refill any freed budget
        for i in order:
            if len(chosen) >= budget:
                break
            if i not in chosen_set and terms[i] > 0 and not np.any(taken[member_sets[i]]):
                chosen.append(i)
                taken[member_sets[i]] = True
                chosen_set.add(i)
                improved = True
        if not improved:
            break
    chosen.sort()
    return NiceFamily(balls=[pool[i] for i in chosen], c=float(c), kind=kind)


def bsn_term(space, seq: MeasureSequence, f, p: float, c: float, ball: Ball) -> float:
    """One family term: mu(B)/r^p times the p-th power of the dilated-ball
    deviation at the scale matched to the radius."""
    r = ball.radius
    if r < space.scale_floor - _EPS:
        raise ResolutionError(f"family radius {r} below scale_floor")
    k = min(k_of_r(r), seq.k_max)
    e = tilde_e(seq, f, k, ball.center, c * r)
    mu = space.ball_mass(ball.center, r)
    return mu / r**p * e**p


def bsn_functional(
    space,
    seq: MeasureSequence,
    f,
    p: float,
    c: float,
    family: Optional[NiceFamily] = None,
    search_budget: int = 256,
    search_radii: Optional[Sequence[float]] = None,
) -> FunctionalReport:
    """Packing-type trace functional over one nice family (supplied or
    found by search); the searched value is a lower bound of the true
    supremum.  ``search_radii`` pins the candidate scale range, which
    keeps the lower bound comparable across resolutions."""
    if c < 1:
        raise InvalidParameter("c must be >= 1")
    if c < 3.0 / seq.epsilon - _EPS:
        warnings.warn(f"c={c} below the admissible threshold {3.0 / seq.epsilon}", stacklevel=2)
    S = seq.support_ids
    vals = _values(f)
    lp = float(np.sum(seq.weights_per_k[0] * np.abs(vals[S]) ** p) ** (1.0 / p))
    searched = family is None
    if family is None:
        family = enumerate_or_search_nice_family(
            space,
            S,
            c,
            budget=search_budget,
            term_fn=lambda b: bsn_term(space, seq, f, p, c, b),
            radii=search_radii,
        )
    else:
        validate_nice_family(space, S, family)
    total = 0.0
    for b in family.balls:
        total += bsn_term(space, seq, f, p, c, b)
    sup_part = total ** (1.0 / p)
    return FunctionalReport(
        name="bsn",
        value=lp + sup_part,
        parts={"lp": lp, "sup": sup_part},
        params={"p": p, "c": c, "family_size": len(family.balls), "searched": searched},
    )


# ----------------------------------------------------------------------
# difficult-case machinery
# ----------------------------------------------------------------------


def sharp_mu_s1(space, piecewise: PiecewiseSet, f, r_top: float = 2.0) -> np.ndarray:
    """Plain maximal deviation against mu on the codimension-zero piece,
    over dyadic radii in (0, r_top], one value per point of S."""
    if abs(piecewise.pieces[0].theta) > 1e-12:
        raise ParameterError("sharp maximal function needs theta_1 = 0")
    s1 = piecewise.pieces[0]
    nbrs1 = _piece_nbrs(space, s1)
    mu1 = space.weights[nbrs1.ids]
    vals = _values(f)[nbrs1.ids]
    S = piecewise.union_ids
    out = np.zeros(S.size)
    radii = []
    r = float(r_top)
    while r >= space.scale_floor - _EPS:
        radii.append(r)
        r /= 2.0
    for rr in radii:
        for pos, x in enumerate(S):
            ball = nbrs1.members_of(int(x), rr)
            e = weighted_stats(vals[ball], mu1[ball]).best_dev
            out[pos] = max(out[pos], e)
    return out


def combinatorial_expand(space, piecewise: PiecewiseSet, ball: Ball, c: float):
    """Grow the dilation factor until no unseen piece appears.

    Returns ``(index_set, i_bar, witnesses)`` where every piece in the
    index set has a witness x_i with B(x_i, r) inside (c + i_bar) B and the
    enlarged ball misses every other piece.
    """
    if c < 1:
        raise InvalidParameter("c must be >= 1")
    r = ball.radius
    base_members = space.members(ball.center, c * r)
    if not np.any(np.isin(base_members, piecewise.union_ids)):
        raise InvalidParameter("c-dilated ball must meet S")
    piece_sets = [pc.ids for pc in piecewise.pieces]
    for l in range(piecewise.N + 1):
        inner = space.members(ball.center, (c + l) * r)
        current = frozenset(
            i for i, ids in enumerate(piece_sets) if np.any(np.isin(inner, ids, assume_unique=False))
        )
        outer = space.members(ball.center, (c + l + 1) * r)
        new = frozenset(
            i for i, ids in enumerate(piece_sets) if np.any(np.isin(outer, ids, assume_unique=False))
        )
        if new == current:
            witnesses = {}
            for i in sorted(current):
                hits = inner[np.isin(inner, piece_sets[i], assume_unique=False)]
                witnesses[i] = int(hits[0])
            return sorted(current), l + 1, witnesses
    raise AssertionError("expansion failed to stop within N+1 steps")  # unreachable


# ----------------------------------------------------------------------
# assembled trace norms
# ----------------------------------------------------------------------


def trace_norm_simple(
    space,
    piecewise: PiecewiseSet,
    f,
    p: float,
    l: int = 1,
    k_max: Optional[int] = None,
) -> FunctionalReport:
    """Per-piece Besov norms at the trace smoothness plus a gluing term;
    only valid when every codimension is positive."""
    if piecewise.pieces[0].theta <= 0:
        raise ParameterError("simple-case norm needs theta_1 > 0 (use trace_norm_difficult)")
    if piecewise.theta_S >= p:
        raise ParameterError(f"theta(S) = {piecewise.theta_S} must be < p = {p}")
    parts = {}
    tail = 0.0
    value = 0.0
    for i, pc in enumerate(piecewise.pieces):
        rep = besov_norm(space, pc, f, 1.0 - pc.theta / p, p, k_max=k_max)
        parts[f"besov_{i + 1}"] = rep.value
        value += rep.value
        tail = max(tail, rep.truncation_tail)
    gl = gluing(space, piecewise, f, p, which=l, k_max=k_max)
    parts[f"gl{l}"] = gl.value
    value += gl.value
    tail = max(tail, gl.truncation_tail)
    return FunctionalReport(
        name="trace_simple",
        value=value,
        parts=parts,
        params={"p": p, "l": l, "theta": piecewise.theta_S},
        truncation_tail=tail,
    )


def trace_norm_difficult(
    space,
    piecewise: PiecewiseSet,
    f,
    p: float,
    k_max: Optional[int] = None,
) -> FunctionalReport:
    """Mixed-nature trace norm for two pieces with theta_1 = 0: L_p and
    sharp-maximal parts on the fat piece, a Besov norm on the thin piece,
    and the doubly averaged gluing term."""
    if piecewise.N != 2:
        raise ParameterError("difficult-case norm needs exactly two pieces")
    th1, th2 = piecewise.pieces[0].theta, piecewise.pieces[1].theta
    if abs(th1) > 1e-12 or th2 <= 0:
        raise ParameterError("difficult-case norm needs theta_1 = 0 < theta_2")
    if th2 >= p:
        raise ParameterError(f"theta_2 = {th2} must be < p = {p}")
    s1 = piecewise.pieces[0]
    mu1 = space.weights[s1.ids]
    vals = _values(f)
    lp_s1 = float(np.sum(mu1 * np.abs(vals[s1.ids]) ** p) ** (1.0 / p))
    sharp_all = sharp_mu_s1(space, piecewise, f)
    on_s1 = np.isin(piecewise.union_ids, s1.ids, assume_unique=True)
    sharp_s1 = float(np.sum(mu1 * sharp_all[on_s1] ** p) ** (1.0 / p))
    bes = besov_norm(space, piecewise.pieces[1], f, 1.0 - th2 / p, p, k_max=k_max)
    gl = gluing(space, piecewise, f, p, which=3, k_max=k_max)
    parts = {
        "lp_s1": lp_s1,
        "sharp_s1": sharp_s1,
        "besov_s2": bes.value,
        "gl3": gl.value,
    }
    return FunctionalReport(
        name="trace_difficult",
        value=lp_s1 + sharp_s1 + bes.value + gl.value,
        parts=parts,
        params={"p": p, "theta": piecewise.theta_S},
        truncation_tail=max(bes.truncation_tail, gl.truncation_tail),
    )
