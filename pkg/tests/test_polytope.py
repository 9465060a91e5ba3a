import itertools

import numpy as np
import pytest

from conftest import random_face_point
from subcoord.polytope import (
    FaceSpec,
    SlotAllocator,
    diameter_and_bounds,
    embed,
    path_length,
    project_block,
    project_face,
    uniform_point,
)


def grid_argmin(v, equality, step=1e-3):
    """Dense grid search (step 1e-3) for the closest feasible point.

    Equality blocks are parametrized on the face (last coordinate is one
    minus the rest), inequality blocks slice the first coordinate and scan
    a vectorized grid of the remainder, so 2- and 3-dimensional blocks stay
    tractable while every feasible grid point is visited.
    """
    v = np.asarray(v, dtype=float)
    ticks = np.arange(0.0, 1.0 + step / 2, step)
    dim = v.size
    best, best_d = None, np.inf

    def consider(points):
        nonlocal best, best_d
        d = np.sum((points - v) ** 2, axis=1)
        k = int(np.argmin(d))
        if d[k] < best_d:
            best_d, best = float(d[k]), points[k].copy()

    if equality:
        if dim == 2:
            pts = np.column_stack([ticks, 1.0 - ticks])
            consider(pts[pts[:, 1] >= -1e-12])
        else:
            a, b = np.meshgrid(ticks, ticks)
            rest = 1.0 - a - b
            mask = rest >= -1e-12
            consider(np.column_stack([a[mask], b[mask], np.maximum(rest[mask], 0.0)]))
        return best
    if dim == 2:
        a, b = np.meshgrid(ticks, ticks)
        mask = a + b <= 1.0 + 1e-12
        consider(np.column_stack([a[mask], b[mask]]))
        return best
    for x1 in ticks:
        a, b = np.meshgrid(ticks, ticks)
        mask = a + b <= 1.0 - x1 + 1e-12
        if not mask.any():
            continue
        pts = np.column_stack([np.full(mask.sum(), x1), a[mask], b[mask]])
        consider(pts)
    return best


class TestProjectBlock:
    def test_symmetric_excess(self):
        assert project_block(np.array([0.7, 0.7])) == pytest.approx([0.5, 0.5])

    def test_already_feasible_inequality(self):
        assert project_block(np.array([0.3, 0.2]), equality=False) == pytest.approx([0.3, 0.2])

    def test_clipped_vertex(self):
        assert project_block(np.array([1.2, -0.3])) == pytest.approx([1.0, 0.0])

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            v = rng.normal(size=4)
            p = project_block(v)
            assert project_block(p) == pytest.approx(p, abs=1e-12)
            q = project_block(v, equality=False)
            assert project_block(q, equality=False) == pytest.approx(q, abs=1e-12)

    def test_matches_grid_search(self):
        # the 3-dim inequality scan visits ~1.7e8 grid points; keep draws small
        rng = np.random.default_rng(1)
        for equality in (True, False):
            for dim in (2, 3):
                for _ in range(2):
                    v = rng.uniform(-0.5, 1.5, size=dim)
                    p = project_block(v, equality)
                    g = grid_argmin(v, equality)
                    assert np.max(np.abs(p - g)) <= 2e-3

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            project_block(np.array([np.nan, 0.0]))


class TestProjectFace:
    def test_fixed_point_on_face(self):
        face = FaceSpec((2, 3))
        x = random_face_point(face.blocks, np.random.default_rng(2))
        assert project_face(x, face) == pytest.approx(x, abs=1e-12)

    def test_blockwise_symmetric_case(self):
        face = FaceSpec((2, 2))
        out = project_face(np.array([0.7, 0.7, 0.7, 0.7]), face)
        assert out == pytest.approx([0.5, 0.5, 0.5, 0.5])

    def test_non_expansive_on_random_pairs(self):
        rng = np.random.default_rng(3)
        face = FaceSpec((3, 2, 4), (True, False, True))
        for _ in range(1000):
            u = rng.normal(scale=2.0, size=face.size)
            w = rng.normal(scale=2.0, size=face.size)
            du = project_face(u, face) - project_face(w, face)
            assert np.linalg.norm(du) <= np.linalg.norm(u - w) + 1e-12

    def test_block_sums_exact(self):
        rng = np.random.default_rng(4)
        face = FaceSpec((2, 3, 5))
        off = face.offsets()
        for _ in range(200):
            out = project_face(rng.normal(size=face.size), face)
            for i in range(face.n_agents):
                assert abs(out[off[i] : off[i + 1]].sum() - 1.0) <= 1e-12
            assert np.all(out >= 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            project_face(np.zeros(3), FaceSpec((2, 2)))


class TestEmbedding:
    def test_single_agent_padding(self):
        out = embed(np.array([0.2, 0.8]), (2,), (0,), 2, 2)
        assert out == pytest.approx([0.2, 0.8, 0.0, 0.0])

    def test_isometry(self):
        # norms agree up to summation order (zero padding adds exact zeros)
        rng = np.random.default_rng(5)
        for _ in range(100):
            x = rng.normal(size=5)
            out = embed(x, (3, 2), (2, 0), 4, 3)
            assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(x), rel=1e-15)
            assert sorted(np.abs(out[np.abs(out) > 0])) == pytest.approx(sorted(np.abs(x)), abs=0)

    def test_slot_swap_permutes_blocks(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        a = embed(x, (2, 2), (0, 1), 2, 2)
        b = embed(x, (2, 2), (1, 0), 2, 2)
        assert a == pytest.approx([1, 2, 3, 4])
        assert b == pytest.approx([3, 4, 1, 2])

    def test_missing_slot_raises(self):
        with pytest.raises(ValueError):
            embed(np.zeros(2), (2,), (None,), 2, 2)
        with pytest.raises(ValueError):
            embed(np.zeros(2), (2,), (5,), 2, 2)


class TestPathLength:
    def test_constant_sequence(self):
        p = np.ones(4)
        assert path_length([p, p, p]) == 0.0

    def test_two_points(self):
        a, b = np.zeros(3), np.array([1.5, 0.0, 0.0])
        assert path_length([a, b]) == pytest.approx(1.5)

    def test_back_and_forth(self):
        a = np.zeros(2)
        b = np.array([0.3, 0.4])
        assert path_length([a, b, a]) == pytest.approx(2 * 0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            path_length([np.zeros(2), np.zeros(3)])


class TestBounds:
    def test_diameter_formula(self):
        D, _, _ = diameter_and_bounds(1.0, 5, 5)
        assert D == pytest.approx(np.sqrt(10.0))
        D1, _, _ = diameter_and_bounds(1.0, 1, 3)
        assert D1 == pytest.approx(np.sqrt(2.0))

    def test_gradient_formula(self):
        _, G, sigma = diameter_and_bounds(1.0, 5, 5)
        assert G == pytest.approx(5.0)
        assert sigma == pytest.approx(5.0)

    def test_from_faces(self):
        faces = [FaceSpec((2, 3)), FaceSpec((4,))]
        D, G, s = diameter_and_bounds(2.0, faces=faces)
        assert D == pytest.approx(np.sqrt(4.0))
        assert G == pytest.approx(2.0 * np.sqrt(2 * 4))

    def test_embedded_distances_within_diameter(self):
        rng = np.random.default_rng(6)
        n_max, na_max = 3, 4
        D, _, _ = diameter_and_bounds(1.0, n_max, na_max)
        for _ in range(1000):
            b1 = tuple(1 + rng.integers(na_max) for _ in range(1 + rng.integers(n_max)))
            b2 = tuple(1 + rng.integers(na_max) for _ in range(1 + rng.integers(n_max)))
            x = embed(random_face_point(b1, rng), b1, range(len(b1)), n_max, na_max)
            y = embed(random_face_point(b2, rng), b2, range(len(b2)), n_max, na_max)
            assert np.linalg.norm(x - y) <= D + 1e-12


class TestSlotAllocator:
    def test_lowest_free_slot(self):
        alloc = SlotAllocator(3)
        assert alloc.assign("a") == 0
        assert alloc.assign("b") == 1
        alloc.release("a")
        assert alloc.assign("c") == 0
        assert alloc.assign("a") == 2

    def test_stable_for_persisting_agents(self):
        alloc = SlotAllocator(4)
        alloc.assign("a")
        alloc.assign("b")
        alloc.release("a")
        assert alloc.slot_of("b") == 1
        assert alloc.assign("b") == 1

    def test_capacity_error(self):
        alloc = SlotAllocator(1)
        alloc.assign("a")
        with pytest.raises(ValueError):
            alloc.assign("b")

    def test_uniform_point(self):
        face = FaceSpec((2, 4))
        assert uniform_point(face) == pytest.approx([0.5, 0.5, 0.25, 0.25, 0.25, 0.25])
