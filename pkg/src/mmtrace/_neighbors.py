"""Cached within-subset ball queries, shared by measures and functionals."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .space import _EPS, FiniteMetricMeasureSpace


class SubsetNeighbors:
    """Ball membership restricted to a fixed subset of the cloud.

    Positions returned by all queries index into the sorted ``ids`` array,
    so weight/value lookups are plain fancy indexing.
    """

    def __init__(self, space: FiniteMetricMeasureSpace, ids):
        self.space = space
        self.ids = np.unique(np.asarray(ids, dtype=int))
        self._tree = None
        if space.coords is not None:
            self._tree = cKDTree(space.coords[self.ids])
        self._lists_cache: dict[float, list] = {}

    def __len__(self):
        return self.ids.size

    def members_of(self, center, radius: float) -> np.ndarray:
        """Positions (into ids) of subset points within radius of center,
        where center is a space point id or a coordinate vector."""
        r = radius * (1 + _EPS) + _EPS
        if self._tree is not None:
            if isinstance(center, (int, np.integer)):
                q = self.space.coords[int(center)]
            else:
                q = np.asarray(center, dtype=float)
            idx = self._tree.query_ball_point(q, r)
            return np.sort(np.asarray(idx, dtype=int))
        d = self.space.distances_from(center)[self.ids]
        return np.flatnonzero(d <= r)

    def self_lists(self, radius: float) -> list:
        """Neighbor positions within the subset for every subset point."""
        key = float(radius)
        got = self._lists_cache.get(key)
        if got is not None:
            return got
        r = radius * (1 + _EPS) + _EPS
        if self._tree is not None:
            raw = self._tree.query_ball_point(self.space.coords[self.ids], r)
            lists = [np.sort(np.asarray(ix, dtype=int)) for ix in raw]
        else:
            lists = [self.members_of(int(i), radius) for i in self.ids]
        self._lists_cache[key] = lists
        return lists

    def cross_pairs(self, other: "SubsetNeighbors", radius: float):
        """Position pairs (into self.ids, other.ids) at distance <= radius."""
        r = radius * (1 + _EPS) + _EPS
        if self._tree is not None and other._tree is not None:
            raw = self._tree.query_ball_tree(other._tree, r)
            ia, ib = [], []
            for a, lst in enumerate(raw):
                for b in sorted(lst):
                    ia.append(a)
                    ib.append(b)
            return np.asarray(ia, dtype=int), np.asarray(ib, dtype=int)
        sub = np.empty((self.ids.size, other.ids.size))
        for pos, i in enumerate(self.ids):
            sub[pos] = self.space.distances_from(int(i))[other.ids]
        ia, ib = np.nonzero(sub <= r)
        return ia, ib
