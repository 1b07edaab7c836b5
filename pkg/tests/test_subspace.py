import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from peps_parent.subspace import (Subspace, apply_on_sites, embed_subspace, intersect, intersect_all,
                                  projector_distance)
from peps_parent.tensors import orthonormal_range


def span(*cols):
    return Subspace(orthonormal_range(np.array(cols, dtype=complex).T))


E = np.eye(4)


class TestIntersect:
    def test_coordinate_planes(self):
        a, b = span(E[0], E[1]), span(E[1], E[2])
        c = intersect(a, b)
        assert c.dim == 1 and np.isclose(abs(c.basis[1, 0]), 1)

    def test_trivial_intersection(self):
        assert intersect(span(E[0]), span(E[1])).dim == 0

    def test_nearly_parallel_lines_stay_apart(self):
        v = E[0] + 1e-6 * E[1]
        assert intersect(span(E[0]), span(v)).dim == 0

    def test_many(self):
        spaces = [span(E[0], E[1], E[2]), span(E[1], E[2], E[3]), span(E[0], E[2], E[3])]
        assert intersect_all(spaces).dim == 1

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(0, 3))
    def test_planted_common_part(self, seed, k):
        rng = np.random.default_rng(seed)
        common = rng.standard_normal((10, k)) + 1j * rng.standard_normal((10, k))
        a = Subspace(orthonormal_range(np.hstack([common, rng.standard_normal((10, 3))])))
        b = Subspace(orthonormal_range(np.hstack([common, rng.standard_normal((10, 2))])))
        c = intersect(a, b)
        assert c.dim == k
        if k:
            assert projector_distance(c, Subspace(orthonormal_range(common))) <= 1e-10

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            intersect(span(E[0]), Subspace(np.eye(3)[:, :1]))


class TestDistance:
    def test_dimensions_differ(self):
        assert projector_distance(span(E[0]), span(E[0], E[1])) == 1.0

    def test_rotation_angle(self):
        t = 0.3
        d = projector_distance(span(E[0]), span(np.cos(t) * E[0] + np.sin(t) * E[1]))
        assert np.isclose(d, np.sin(t))

    def test_contains(self):
        assert span(E[0], E[1]).contains(span(E[0] + E[1]))
        assert not span(E[0]).contains(span(E[1]))


class TestEmbedding:
    @pytest.mark.parametrize("sites,target", [([1], [0, 1, 2]), ([2, 0], [0, 1, 2]), ([0, 1], [0, 1])])
    def test_embed_matches_kron(self, sites, target):
        rng = np.random.default_rng(1)
        d = 2
        sub = Subspace(orthonormal_range(rng.standard_normal((d ** len(sites), 2))))
        got = embed_subspace(sub, sites, target, d).projector()
        ref = oracles.dense_kron_term(sub.projector(), [target.index(s) for s in sites], len(target), d)
        assert np.abs(got - ref).max() <= 1e-12

    @pytest.mark.parametrize("sites", [[0], [2], [1, 3], [3, 0]])
    def test_apply_on_sites_matches_kron(self, sites):
        rng = np.random.default_rng(2)
        d, n = 2, 4
        op = rng.standard_normal((d ** len(sites),) * 2)
        vecs = rng.standard_normal((d ** n, 3))
        ref = oracles.dense_kron_term(op, sites, n, d) @ vecs
        assert np.allclose(apply_on_sites(op, vecs, sites, list(range(n)), d), ref)

    def test_embed_requires_target_superset(self):
        with pytest.raises(ValueError):
            embed_subspace(span(E[0]), [5], [0, 1], 2)
