import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ampmask.errors import UsageError, ValidationError
from ampmask.info import (
    FiniteDist,
    Frontier,
    JointDist,
    RatePoint,
    binary_convolution,
    binary_entropy,
    conditional_mutual_information,
    convex_hull_envelope,
    entropy,
    mutual_information,
    pareto_frontier,
    ternary_entropy,
)

from conftest import ONE_MINUS_H01, random_joint

unit = st.floats(0.0, 1.0, allow_nan=False)
half = st.floats(0.0, 0.5, allow_nan=False)


def _pts(pairs):
    return [RatePoint(a, l) for a, l in pairs]


def _pairs(f: Frontier):
    return [(p.r_a, p.r_l) for p in f]


class TestEntropy:
    def test_uniform_and_degenerate(self):
        assert entropy([0.25] * 4) == pytest.approx(2.0, abs=1e-15)
        assert entropy([1.0, 0.0, 0.0]) == 0.0

    def test_unnormalised_rejected(self):
        with pytest.raises(ValidationError):
            FiniteDist([0.5, 0.6])
        with pytest.raises(ValidationError):
            FiniteDist([1.2, -0.2])

    def test_binary_and_ternary(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert ternary_entropy(1, 0, 0) == 0.0
        assert ternary_entropy(0.25, 0.25, 0.5) == pytest.approx(1.5, abs=1e-15)
        with pytest.raises(ValidationError):
            ternary_entropy(0.5, 0.5, 0.5)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12))
    def test_bounds(self, w):
        w = np.asarray(w)
        if w.sum() <= 0:
            w = np.ones_like(w)
        d = FiniteDist(w / w.sum())
        h = entropy(d)
        assert -1e-12 <= h <= math.log2(d.alphabet_size) + 1e-12


class TestMutualInformation:
    def test_independent_and_copy(self):
        j = JointDist(np.full((2, 2), 0.25), ("A", "B"))
        assert mutual_information(j, "A", "B") == pytest.approx(0.0, abs=1e-15)
        j = JointDist(np.array([[0.5, 0.0], [0.0, 0.5]]), ("A", "B"))
        assert mutual_information(j, "A", "B") == pytest.approx(1.0, abs=1e-15)

    def test_bsc(self):
        p = np.array([[0.45, 0.05], [0.05, 0.45]])
        j = JointDist(p, ("X", "Y"))
        assert mutual_information(j, "X", "Y") == pytest.approx(ONE_MINUS_H01, abs=1e-12)

    def test_overlap_rejected(self):
        j = JointDist(np.full((2, 2, 2), 0.125), ("A", "B", "C"))
        with pytest.raises(UsageError):
            mutual_information(j, ("A", "B"), "B")
        with pytest.raises(UsageError):
            conditional_mutual_information(j, "A", "B", "A")

    def test_unknown_axis(self):
        j = JointDist(np.full((2, 2), 0.25), ("A", "B"))
        with pytest.raises(UsageError):
            mutual_information(j, "A", "Q")

    def test_conditional_examples(self, rng):
        pab = random_joint(rng, (3, 2))
        j = JointDist(pab[:, :, None] * np.array([0.3, 0.7]), ("A", "B", "C"))
        assert conditional_mutual_information(j, "A", "B", "C") == pytest.approx(
            mutual_information(j, "A", "B"), abs=1e-12)

        p = np.zeros((2, 2, 2))
        p[0, 0, 0] = p[1, 1, 1] = 0.5
        j = JointDist(p, ("A", "B", "C"))
        assert conditional_mutual_information(j, "A", "B", "C") == pytest.approx(0.0, abs=1e-15)

        bsc = lambda e: np.array([[1 - e, e], [e, 1 - e]])
        p = 0.5 * bsc(0.1)[:, :, None] * bsc(0.2)[None, :, :]
        j = JointDist(p, ("A", "B", "C"))
        assert conditional_mutual_information(j, "A", "C", "B") == pytest.approx(0.0, abs=1e-12)

    def test_symmetry_nonnegativity_1000_joints(self, rng):
        for _ in range(1000):
            shape = tuple(rng.integers(1, 4, size=3))
            j = JointDist(random_joint(rng, shape, sparsity=0.3), ("A", "B", "C"))
            ab = mutual_information(j, "A", ("B", "C"))
            ba = mutual_information(j, ("B", "C"), "A")
            assert ab >= -1e-10
            assert abs(ab - ba) <= 1e-10
            assert conditional_mutual_information(j, "A", "B", "C") >= -1e-10

    def test_chain_identity_1000_joints(self, rng):
        for _ in range(1000):
            shape = tuple(rng.integers(1, 4, size=3))
            j = JointDist(random_joint(rng, shape, sparsity=0.2), ("S", "U", "Y"))
            lhs = mutual_information(j, ("U", "S"), "Y")
            rhs = (mutual_information(j, "S", ("Y", "U")) + mutual_information(j, "U", "Y")
                   - mutual_information(j, "U", "S"))
            assert abs(lhs - rhs) <= 1e-10


class TestConvolution:
    def test_examples(self):
        assert binary_convolution(0.3, 0.5) == pytest.approx(0.5, abs=1e-15)
        assert binary_convolution(0.1, 0.0) == pytest.approx(0.1, abs=1e-15)
        assert binary_convolution(0.1, 0.2) == pytest.approx(0.26, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            binary_convolution(1.1, 0.2)
        with pytest.raises(ValidationError):
            binary_entropy(-0.1)

    @given(half, half, half)
    def test_algebra(self, a, b, c):
        assert binary_convolution(a, b) == pytest.approx(binary_convolution(b, a), abs=1e-15)
        left = binary_convolution(binary_convolution(a, b), c)
        right = binary_convolution(a, binary_convolution(b, c))
        assert left == pytest.approx(right, abs=1e-14)
        assert 0.0 <= binary_convolution(a, b) <= 0.5 + 1e-15


class TestPareto:
    def test_examples(self):
        assert _pairs(pareto_frontier(_pts([(1, 1)]))) == [(1, 1)]
        assert _pairs(pareto_frontier(_pts([(1, 1), (0.5, 1)]))) == [(1, 1)]
        f = pareto_frontier(_pts([(0.5, 0.2), (0.8, 0.6), (0.7, 0.9)]))
        assert _pairs(f) == [(0.5, 0.2), (0.8, 0.6)]

    def test_duplicates_collapse(self):
        assert _pairs(pareto_frontier(_pts([(0.3, 0.1), (0.3, 0.1)]))) == [(0.3, 0.1)]

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            pareto_frontier([])

    def test_outer_kind(self):
        f = pareto_frontier(_pts([(1, 0.5), (0.5, 0.2)]), kind="outer")
        assert f.kind == "outer"
        with pytest.raises(UsageError):
            pareto_frontier(_pts([(1, 0.5)]), kind="sideways")

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.tuples(unit, unit), min_size=1, max_size=40))
    def test_properties(self, pairs):
        pts = _pts(pairs)
        f = pareto_frontier(pts)
        out = list(f)
        for p in out:
            assert not any(q.dominates(p) for q in out if q is not p)
        for p in pts:
            assert any(q.r_a >= p.r_a and q.r_l <= p.r_l for q in out)
        assert list(f.r_l) == sorted(f.r_l)


class TestHull:
    def test_examples(self):
        f = pareto_frontier(_pts([(0.4, 0.3)]))
        assert _pairs(convex_hull_envelope(f)) == [(0.4, 0.3)]
        f = pareto_frontier(_pts([(0.2, 0.1), (0.6, 0.5)]))
        assert _pairs(convex_hull_envelope(f)) == [(0.2, 0.1), (0.6, 0.5)]
        f = pareto_frontier(_pts([(0, 0), (0.4, 0.5), (1, 1)]))
        h = convex_hull_envelope(f)
        assert _pairs(h) == [(0, 0), (1, 1)]
        assert h.hull_applied

    def test_collinear_merged(self):
        f = pareto_frontier(_pts([(0, 0), (0.5, 0.5), (1, 1)]))
        assert _pairs(convex_hull_envelope(f)) == [(0, 0), (1, 1)]

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.tuples(unit, unit), min_size=1, max_size=40))
    def test_concave(self, pairs):
        h = convex_hull_envelope(pareto_frontier(_pts(pairs)))
        x, y = h.r_l, h.r_a
        # cross products avoid dividing by near-zero leakage steps
        for i in range(1, len(x) - 1):
            cross = (x[i] - x[i - 1]) * (y[i + 1] - y[i]) - (y[i] - y[i - 1]) * (x[i + 1] - x[i])
            assert cross <= 1e-12
        # the hull never sits below an input point
        for a, l in pairs:
            if l >= x[0]:
                assert h.envelope_at(l) >= a - 1e-9


class TestRatePoint:
    def test_tiny_negative_clamped(self):
        p = RatePoint(-1e-14, -1e-13)
        assert p.r_a == 0.0 and p.r_l == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            RatePoint(-0.1, 0.0)

    def test_frontier_queries(self):
        f = convex_hull_envelope(pareto_frontier(_pts([(0.2, 0.0), (1.0, 1.0)])))
        assert f.envelope_at(0.5) == pytest.approx(0.6)
        assert f.envelope_at(2.0) == pytest.approx(1.0)
        assert f.max_difference() == pytest.approx(0.2)
        assert f.covers(RatePoint(0.6, 0.5))
        assert not f.covers(RatePoint(0.7, 0.5))
