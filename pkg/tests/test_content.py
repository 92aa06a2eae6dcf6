import math

import numpy as np
import pytest

import mmtrace as mt
from mmtrace.content import _candidate_pool, _exact_cover
from mmtrace.errors import InvalidParameter, MissingMetadata, ResolutionError


def recompute_value(space, sol, theta):
    return sum(space.ball_mass(b.center, b.radius) / b.radius**theta for b in sol.balls)


class TestContent:
    def test_empty_target(self, grid1d_11):
        sol = mt.hausdorff_content(grid1d_11, mt.ContentQuery([], 1.0, 0.5))
        assert sol.value == 0.0 and sol.balls == []

    def test_single_point_theta_zero(self, grid1d_11):
        # cost mu(B_r) is minimized at the smallest admissible radius
        sol = mt.hausdorff_content(grid1d_11, mt.ContentQuery([5], 0.0, 0.9, "exact"))
        expected = grid1d_11.ball_mass(5, grid1d_11.scale_floor)
        assert sol.value == pytest.approx(expected, rel=1e-12)

    def test_two_points_greedy_vs_exact(self, grid1d_11):
        q = mt.ContentQuery([0, 5], 0.5, 0.3, "both")
        sol = mt.hausdorff_content(grid1d_11, q)
        balls, covers, weights = _candidate_pool(grid1d_11, q.target, 0.5, 0.3)
        assert len(balls) <= 24
        _, exact_val = _exact_cover(2, covers, weights)
        assert sol.value >= exact_val - 1e-12
        assert sol.value / exact_val <= 1.0 + math.log(len(balls))
        assert sol.optimality_gap is not None

    def test_value_matches_recomputation(self, grid1d_11):
        sol = mt.hausdorff_content(grid1d_11, mt.ContentQuery([0, 3, 7], 0.7, 0.6))
        assert sol.value == pytest.approx(recompute_value(grid1d_11, sol, 0.7), rel=1e-12)
        covered = set()
        for b in sol.balls:
            assert 0 < b.radius < 0.6
            covered |= set(map(int, mt.ball_members(grid1d_11, b)))
        assert {0, 3, 7} <= covered

    def test_delta_below_floor(self, grid1d_11):
        with pytest.raises(ResolutionError):
            mt.hausdorff_content(grid1d_11, mt.ContentQuery([0], 1.0, 0.05))

    def test_exact_limit(self):
        coords = np.linspace(0, 1, 33).reshape(-1, 1)
        sp = mt.FiniteMetricMeasureSpace(weights=np.full(33, 1 / 33), coords=coords, resolution=1 / 32)
        with pytest.raises(InvalidParameter):
            mt.hausdorff_content(sp, mt.ContentQuery(np.arange(20), 0.5, 1.0, "exact"))

    def test_exact_monotone_in_target(self, grid1d_11):
        v1 = mt.hausdorff_content(grid1d_11, mt.ContentQuery([2, 8], 0.5, 0.4, "exact")).value
        v2 = mt.hausdorff_content(grid1d_11, mt.ContentQuery([2, 5, 8], 0.5, 0.4, "exact")).value
        assert v1 <= v2 + 1e-12

    def test_exact_subadditive(self, grid1d_11):
        a = mt.hausdorff_content(grid1d_11, mt.ContentQuery([0, 2], 0.5, 0.4, "exact")).value
        b = mt.hausdorff_content(grid1d_11, mt.ContentQuery([8, 10], 0.5, 0.4, "exact")).value
        ab = mt.hausdorff_content(grid1d_11, mt.ContentQuery([0, 2, 8, 10], 0.5, 0.4, "exact")).value
        assert ab <= a + b + 1e-12

    def test_exact_delta_monotone(self, grid1d_11):
        v_small = mt.hausdorff_content(grid1d_11, mt.ContentQuery([0, 5, 10], 0.5, 0.15, "exact")).value
        v_big = mt.hausdorff_content(grid1d_11, mt.ContentQuery([0, 5, 10], 0.5, 0.8, "exact")).value
        assert v_small >= v_big - 1e-12

    def test_greedy_soundness_random(self):
        rng = np.random.default_rng(5)
        coords = np.linspace(0, 1, 17).reshape(-1, 1)
        sp = mt.FiniteMetricMeasureSpace(
            weights=rng.uniform(0.5, 1.5, 17) / 17, coords=coords, resolution=1 / 16
        )
        for trial in range(10):
            target = np.sort(rng.choice(17, size=3, replace=False))
            q = mt.ContentQuery(target, 0.8, 0.3, "both")
            sol = mt.hausdorff_content(sp, q)
            balls, covers, weights = _candidate_pool(sp, q.target, 0.8, 0.3)
            _, exact_val = _exact_cover(target.size, covers, weights)
            assert sol.value >= exact_val - 1e-12
            assert sol.value <= (1.0 + math.log(len(balls))) * exact_val + 1e-12


class TestMeasure:
    def test_empty(self, grid1d_11):
        assert mt.hausdorff_measure(grid1d_11, [], 1.0).value == 0.0

    def test_segment_in_cube_comparable_to_length(self):
        space, pw = mt.generate(mt.simple_case_spec(1 / 8), verify=False)
        segment = pw.pieces[1]
        trace = mt.hausdorff_measure(space, segment.ids, 2.0)
        # analytic scale: mass-per-cost of a ball of radius r is ~ (4pi/3) r,
        # so covering a unit segment costs a small multiple of its length
        assert trace.value == pytest.approx(1.0, abs=3.0)
        assert 0.25 <= trace.value <= 4.0

    def test_theta_zero_whole_space(self, grid1d_11):
        trace = mt.hausdorff_measure(grid1d_11, np.arange(11), 0.0)
        assert trace.value >= grid1d_11.total_mass - 1e-12
        assert trace.value <= 3.0 * grid1d_11.total_mass

    def test_nonstabilization_flagged(self, grid1d_11):
        # theta above the ambient dimension: the delta-limit blows up
        trace = mt.hausdorff_measure(grid1d_11, np.arange(11), 2.5)
        assert not trace.stabilized
        assert trace.values == sorted(trace.values)


class TestPieceWeights:
    def test_analytic_segment_cells(self):
        coords = np.linspace(0, 1, 65).reshape(-1, 1)
        sp = mt.FiniteMetricMeasureSpace(weights=np.full(65, 1 / 65), coords=coords, resolution=1 / 64)
        cells = np.full(65, 1 / 64)
        cells[0] = cells[-1] = 1 / 128
        w = mt.piece_measure_weights(sp, np.arange(65), 1.0, "analytic", cell_elements=cells)
        assert w[0] == pytest.approx(1 / 128) and w[32] == pytest.approx(1 / 64)
        assert np.sum(w) == pytest.approx(1.0, abs=1e-12)

    def test_analytic_needs_metadata(self, grid1d_11):
        with pytest.raises(MissingMetadata):
            mt.piece_measure_weights(grid1d_11, [0, 1], 1.0, "analytic")

    def test_content_single_point(self, grid1d_11):
        w = mt.piece_measure_weights(grid1d_11, [4], 0.7, "content")
        sol = mt.hausdorff_content(
            grid1d_11, mt.ContentQuery([4], 0.7, 2 * grid1d_11.scale_floor)
        )
        assert w[0] == pytest.approx(sol.value, rel=1e-12)

    def test_face_areas_sum_to_one(self):
        space, pw = mt.generate(mt.simple_case_spec(1 / 8), verify=False)
        face = pw.pieces[0]
        assert np.sum(face.weights) == pytest.approx(1.0, abs=1e-9)
