"""Synthetic grid instances: spaces, pieces with analytic weights, and the
sample-function corpus used by the experiments."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .content import piece_measure_weights
from .errors import InvalidParameter, ParameterError
from .functionals import SampleFunction
from .regularity import PiecewiseSet, SubsetPiece, check_adr, compose_piecewise, default_r_grid
from .space import FiniteMetricMeasureSpace

_KIND_DIM = {"grid1d": 1, "grid2d": 2, "grid3d": 3}


@dataclass
class PieceSpec:
    shape: str                      # segment | square_face | region | point_cluster
    theta: float
    placement: dict = field(default_factory=dict)


@dataclass
class GeneratorSpec:
    kind: str
    h: float
    pieces: list
    c_res: float = 1.0
    name: str = ""
    mu_weights: str = "cell"   # cell | uniform

    def with_h(self, h: float) -> "GeneratorSpec":
        return replace(self, h=h)


def build_grid_space(kind: str, h: float, c_res: float = 1.0, mu_weights: str = "cell") -> FiniteMetricMeasureSpace:
    """Uniform grid on the unit cube.

    ``cell`` weights are trapezoidal cell volumes (half cells on the
    boundary), so the total mass is exactly 1 and ball masses track the
    continuum volume to second order; ``uniform`` assigns h^dim everywhere
    and carries an O(h) global surplus.
    """
    if kind not in _KIND_DIM:
        raise ParameterError(f"unknown generator kind {kind!r}")
    dim = _KIND_DIM[kind]
    m = int(round(1.0 / h))
    if abs(m * h - 1.0) > 1e-9 or m < 2:
        raise ParameterError(f"mesh h = {h} must divide the unit interval")
    axis = np.arange(m + 1) / m
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    if mu_weights == "uniform":
        weights = np.full(coords.shape[0], h**dim)
    elif mu_weights == "cell":
        weights = np.ones(coords.shape[0])
        for a in range(dim):
            edge = (np.abs(coords[:, a]) <= 1e-12) | (np.abs(coords[:, a] - 1.0) <= 1e-12)
            weights *= np.where(edge, h / 2.0, h)
    else:
        raise ParameterError(f"unknown mu_weights mode {mu_weights!r}")
    return FiniteMetricMeasureSpace(weights=weights, coords=coords, resolution=h, c_res=c_res)


def _cell_lengths(positions: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Trapezoidal cell lengths of sorted 1-d sample positions on [lo, hi]."""
    edges_lo = np.concatenate(([lo], (positions[1:] + positions[:-1]) / 2.0))
    edges_hi = np.concatenate((((positions[1:] + positions[:-1]) / 2.0), [hi]))
    return edges_hi - edges_lo


def _match(coords_col: np.ndarray, value: float) -> np.ndarray:
    return np.abs(coords_col - value) <= 1e-9


def _build_piece(space, spec: PieceSpec, label: str) -> SubsetPiece:
    dim = space.dim
    coords = space.coords
    shape = spec.shape
    pl = spec.placement
    if shape == "segment":
        axis = int(pl.get("axis", 0))
        anchor = pl.get("anchor")
        if anchor is None:
            anchor = tuple(0.5 for _ in range(dim - 1))
        lo, hi = float(pl.get("lo", 0.0)), float(pl.get("hi", 1.0))
        mask = np.ones(space.n, dtype=bool)
        others = [a for a in range(dim) if a != axis]
        for a, v in zip(others, anchor):
            mask &= _match(coords[:, a], float(v))
        mask &= (coords[:, axis] >= lo - 1e-9) & (coords[:, axis] <= hi + 1e-9)
        ids = np.flatnonzero(mask)
        order = np.argsort(coords[ids, axis])
        ids = ids[order]
        w = _cell_lengths(coords[ids, axis], lo, hi)
        return SubsetPiece(ids=ids, theta=spec.theta, weights=w, label=label)
    if shape == "square_face":
        if dim != 3:
            raise ParameterError("square_face needs a 3-d grid")
        axis = int(pl.get("axis", 2))
        offset = float(pl.get("offset", 0.5))
        ids = np.flatnonzero(_match(coords[:, axis], offset))
        others = [a for a in range(3) if a != axis]
        w = np.ones(ids.size)
        for a in others:
            pos = coords[ids, a]
            lengths = np.where((_match(pos, 0.0)) | (_match(pos, 1.0)), space.resolution / 2.0, space.resolution)
            w = w * lengths
        return SubsetPiece(ids=ids, theta=spec.theta, weights=w, label=label)
    if shape == "region":
        mask = np.ones(space.n, dtype=bool)
        if "halfspace" in pl:
            axis, cut, side = pl["halfspace"]
            if side == "le":
                mask &= coords[:, int(axis)] <= float(cut) + 1e-9
            else:
                mask &= coords[:, int(axis)] >= float(cut) - 1e-9
        if "box" in pl:
            lo, hi = pl["box"]
            for a in range(dim):
                mask &= (coords[:, a] >= lo[a] - 1e-9) & (coords[:, a] <= hi[a] + 1e-9)
        ids = np.flatnonzero(mask)
        # codimension-zero stand-in: the region carries the mu weights
        return SubsetPiece(ids=ids, theta=spec.theta, weights=space.weights[ids], label=label)
    if shape == "point_cluster":
        pts = np.asarray(pl["points"], dtype=float)
        ids = []
        for q in np.atleast_2d(pts):
            d = np.linalg.norm(coords - q, axis=1)
            ids.append(int(np.argmin(d)))
        ids = np.unique(ids)
        w = piece_measure_weights(space, ids, spec.theta, mode="content")
        return SubsetPiece(ids=ids, theta=spec.theta, weights=w, label=label)
    raise ParameterError(f"unknown piece shape {shape!r}")


def generate(spec: GeneratorSpec, verify: bool = True):
    """Build (space, piecewise) from a generator spec; optionally run the
    two-sided regularity check on every piece and attach the constants."""
    dim = _KIND_DIM.get(spec.kind)
    if dim is None:
        raise ParameterError(f"unknown generator kind {spec.kind!r}")
    for ps in spec.pieces:
        if ps.theta >= dim:
            raise ParameterError(f"piece theta {ps.theta} must be < ambient dimension {dim}")
    space = build_grid_space(spec.kind, spec.h, spec.c_res, spec.mu_weights)
    pieces = [
        _build_piece(space, ps, label=f"{ps.shape}@{ps.theta}") for ps in spec.pieces
    ]
    piecewise = compose_piecewise(pieces)
    if verify:
        grid = default_r_grid(space)
        for pc in pieces:
            check_adr(space, pc, grid)
    return space, piecewise


# -- canonical instances ------------------------------------------------


def simple_case_spec(h: float, c_res: float = 1.0) -> GeneratorSpec:
    """3-d instance with a codimension-1 face and a codimension-2 segment
    crossing it; every codimension positive."""
    return GeneratorSpec(
        kind="grid3d",
        h=h,
        c_res=c_res,
        name="simple3d",
        pieces=[
            PieceSpec("square_face", 1.0, {"axis": 2, "offset": 0.5}),
            PieceSpec("segment", 2.0, {"axis": 2, "anchor": (0.5, 0.5)}),
        ],
    )


def difficult_case_spec(h: float, c_res: float = 1.0) -> GeneratorSpec:
    """2-d instance with a codimension-zero half-plane region and a
    codimension-1 segment sitting on its boundary."""
    return GeneratorSpec(
        kind="grid2d",
        h=h,
        c_res=c_res,
        name="difficult2d",
        pieces=[
            PieceSpec("region", 0.0, {"halfspace": (0, 0.5, "le")}),
            PieceSpec("segment", 1.0, {"axis": 1, "anchor": (0.5,)}),
        ],
    )


def nested_case_spec(h: float) -> GeneratorSpec:
    """Nested pieces: a face containing a segment (different accuracies)."""
    return GeneratorSpec(
        kind="grid3d",
        h=h,
        name="nested3d",
        pieces=[
            PieceSpec("square_face", 1.0, {"axis": 2, "offset": 0.5}),
            PieceSpec("segment", 2.0, {"axis": 0, "anchor": (0.5, 0.5)}),
        ],
    )


# -- sample functions ----------------------------------------------------


def make_sample_function(
    space,
    piecewise: Optional[PiecewiseSet],
    family: str,
    seed: int = 0,
) -> SampleFunction:
    """Sample-function corpus: constant, linear, hoelder:alpha, step,
    random.  All are defined on the whole cloud so they also serve as
    extensions for the energy probe."""
    coords = space.coords
    if coords is None:
        raise InvalidParameter("sample families need coordinate metrics")
    dim = coords.shape[1]
    name, _, arg = family.partition(":")
    if name == "constant":
        vals = np.ones(space.n)
    elif name == "linear":
        vals = coords.sum(axis=1) / np.sqrt(dim)
    elif name == "hoelder":
        alpha = float(arg) if arg else 0.6
        if not (0 < alpha <= 1):
            raise InvalidParameter(f"hoelder exponent must lie in (0, 1], got {alpha}")
        anchor = np.full(dim, 0.5)
        vals = np.linalg.norm(coords - anchor, axis=1) ** alpha
    elif name == "step":
        axis = int(arg) if arg else dim - 1
        vals = (coords[:, axis] > 0.5).astype(float)
    elif name == "random":
        rng = np.random.default_rng(seed)
        vals = rng.uniform(-1.0, 1.0, space.n)
    else:
        raise InvalidParameter(f"unknown sample family {family!r}")
    return SampleFunction(values=vals, domain=piecewise)
