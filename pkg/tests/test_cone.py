import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from tubeap import (
    PointSet,
    cone_contains,
    conjugate_cone,
    make_cone,
    spectrum_in_shifted_cone,
    support_function,
    support_linear_on_cone,
)
from tubeap.errors import (
    DegenerateSpan,
    DimensionMismatch,
    EmptyGenerators,
    EmptySet,
    NotPointed,
    ZeroGenerator,
)


def pset(points, limit_points=()):
    points = np.asarray(points, dtype=float)
    p = points.shape[1] if points.size else len(limit_points[0])
    lps = (
        np.asarray(limit_points, dtype=float).reshape(-1, p)
        if len(limit_points)
        else np.zeros((0, p))
    )
    return PointSet(points=points.reshape(-1, p), limit_points=lps)


class TestMakeCone:
    def test_quadrant_valid(self):
        c = make_cone([[1, 0], [0, 1]])
        assert c.dimension == 2

    def test_line_not_pointed(self):
        with pytest.raises(NotPointed):
            make_cone([[1, 0], [-1, 0]])

    def test_rank_deficient(self):
        with pytest.raises(DegenerateSpan):
            make_cone([[1, 0, 0], [0, 1, 0]])

    def test_empty(self):
        with pytest.raises(EmptyGenerators):
            make_cone([])

    def test_zero_generator(self):
        with pytest.raises(ZeroGenerator):
            make_cone([[1, 0], [0, 0]])

    def test_halfspace_spanning_not_pointed(self):
        with pytest.raises(NotPointed):
            make_cone([[1, 0], [-1, 1], [-1, -1]])


SAMPLE_CONES = [
    [[1.0]],
    [[-2.0]],
    [[1, 0], [0, 1]],
    [[1, 1], [1, -1]],
    [[2, 1], [1, 3]],
    [[1, 0], [3, 1], [1, 1]],  # redundant middle generator
    np.eye(3).tolist(),
    [[1, 0, 0], [1, 1, 0], [1, 0, 1], [1, 1, 1]],
    np.eye(4).tolist(),
]


class TestConjugate:
    def test_quadrant_self_dual(self):
        d = conjugate_cone(make_cone([[1, 0], [0, 1]]))
        got = {tuple(np.round(g / np.linalg.norm(g), 9)) for g in d.generators}
        assert got == {(1.0, -0.0), (-0.0, 1.0)} or got == {(1.0, 0.0), (0.0, 1.0)}

    def test_rotated_quadrant_self_dual(self):
        # dual of cone{(1,1),(1,-1)} solves <x,g> >= 0 for both generators;
        # LP oracle: each original generator must be in the dual and the dual
        # rays must satisfy both constraints
        c = make_cone([[1, 1], [1, -1]])
        d = conjugate_cone(c)
        for ray in d.generators:
            assert np.all(c.generators @ ray >= -1e-12)
        for g in c.generators:
            assert cone_contains(d, g / np.linalg.norm(g), 1e-9)

    @pytest.mark.parametrize("gens", SAMPLE_CONES)
    def test_biduality(self, gens):
        c = make_cone(gens)
        cc = conjugate_cone(conjugate_cone(c))
        for g in c.generators:
            assert cone_contains(cc, g / np.linalg.norm(g), 1e-9)
        for g in cc.generators:
            assert cone_contains(c, g / np.linalg.norm(g), 1e-9)

    @pytest.mark.parametrize("gens", SAMPLE_CONES)
    def test_dual_definition_lp_oracle(self, gens):
        # every enumerated dual ray satisfies <x, g> >= 0; conversely a
        # random point satisfying all constraints lies in the dual cone
        c = make_cone(gens)
        d = conjugate_cone(c)
        for ray in d.generators:
            assert np.all(c.generators @ ray >= -1e-9)
        rng = np.random.default_rng(0)
        p = c.dimension
        for _ in range(20):
            x = rng.standard_normal(p)
            if np.all(c.generators @ x >= 0):
                assert cone_contains(d, x, 1e-8 * max(1, np.linalg.norm(x)))


class TestContains:
    def test_inside(self, quadrant):
        assert cone_contains(quadrant, np.array([2.0, 3.0]), 0.0)

    def test_outside(self, quadrant):
        assert not cone_contains(quadrant, np.array([-1.0, 1.0]), 0.0)

    def test_tolerance_absorbs_rounding(self, quadrant):
        assert cone_contains(quadrant, np.array([-1e-12, 1.0]), 1e-9)

    def test_dimension_mismatch(self, quadrant):
        with pytest.raises(DimensionMismatch):
            cone_contains(quadrant, np.array([1.0, 2.0, 3.0]))

    def test_membership_matches_dual_inequalities(self, quadrant):
        # x in dual(cone) iff <x, g> >= -tol|g| for every generator
        dual = conjugate_cone(quadrant)
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.standard_normal(2) * 2
            lhs = cone_contains(dual, x, 1e-9)
            rhs = bool(
                np.all(
                    quadrant.generators @ x
                    >= -1e-9 * np.linalg.norm(quadrant.generators, axis=1)
                )
            )
            assert lhs == rhs


class TestSupportFunction:
    def test_basic(self):
        assert support_function(pset([[1, 0], [0, 1]]), np.array([1.0, 1.0])) == 1.0

    def test_with_negatives(self):
        e = pset([[-1, -1], [0, 0]])
        assert support_function(e, np.array([-1.0, -1.0])) == 2.0

    def test_limit_points_participate(self):
        e = pset([[0, 0]], limit_points=[[3, 0]])
        assert support_function(e, np.array([1.0, 0.0])) == 3.0

    def test_empty(self):
        with pytest.raises(EmptySet):
            support_function(
                PointSet(points=np.zeros((0, 2)), limit_points=np.zeros((0, 2))),
                np.array([1.0, 0.0]),
            )

    @given(
        st.lists(
            st.tuples(
                st.floats(-10, 10, allow_nan=False),
                st.floats(-10, 10, allow_nan=False),
            ),
            min_size=1,
            max_size=6,
            unique=True,
        ),
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
        st.integers(-20, 20),
        st.floats(0.01, 100.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_positive_homogeneity(self, pts, x, k, t):
        e = pset(list(pts))
        x = np.asarray(x)
        # power-of-two scalings are exact in IEEE arithmetic
        s = 2.0**k
        assert support_function(e, s * x) == s * support_function(e, x)
        lhs = support_function(e, t * x)
        rhs = t * support_function(e, x)
        assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(rhs))

    @given(
        st.lists(
            st.tuples(
                st.floats(-10, 10, allow_nan=False),
                st.floats(-10, 10, allow_nan=False),
            ),
            min_size=1,
            max_size=6,
            unique=True,
        ),
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    )
    @settings(max_examples=200, deadline=None)
    def test_subadditive(self, pts, x1, x2):
        e = pset(list(pts))
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        assert support_function(e, x1 + x2) <= (
            support_function(e, x1) + support_function(e, x2) + 1e-12
        )


class TestShiftedCone:
    def test_origin_shift(self, quadrant):
        e = pset([[0, 0], [1, 0], [0, 1]])
        assert spectrum_in_shifted_cone(e, np.zeros(2), quadrant)

    def test_shift_fails(self, quadrant):
        e = pset([[-1, 0], [0, -1]])
        assert not spectrum_in_shifted_cone(e, np.array([-1.0, 0.0]), quadrant)

    def test_shift_works(self, quadrant):
        e = pset([[-1, -1], [0, 0]])
        assert spectrum_in_shifted_cone(e, np.array([-1.0, -1.0]), quadrant)

    def test_limit_points_checked(self, quadrant):
        e = pset([[1, 1]], limit_points=[[-2, 0]])
        assert not spectrum_in_shifted_cone(e, np.zeros(2), quadrant)


class TestSupportLinear:
    def test_origin_witness(self, quadrant):
        e = pset([[0, 0], [1, 0], [0, 1]])
        assert np.allclose(support_linear_on_cone(e, quadrant), [0, 0])

    def test_none_for_crossed_pair(self, quadrant):
        e = pset([[-1, 0], [0, -1]])
        assert support_linear_on_cone(e, quadrant) is None

    def test_negative_witness(self, quadrant):
        e = pset([[-1, -1], [0, 0], [1, 2]])
        assert np.allclose(support_linear_on_cone(e, quadrant), [-1, -1])

    def test_witness_consistency(self, quadrant):
        # a returned witness really shifts the set into the cone, and a None
        # means no member does (exhaustive)
        rng = np.random.default_rng(3)
        for _ in range(30):
            pts = rng.integers(-3, 4, size=(rng.integers(1, 5), 2)).astype(float)
            pts = np.unique(pts, axis=0)
            e = pset(pts)
            lam = support_linear_on_cone(e, quadrant)
            if lam is not None:
                assert spectrum_in_shifted_cone(e, lam, quadrant)
            else:
                for row in pts:
                    assert not spectrum_in_shifted_cone(e, row, quadrant)


class TestPointSetValidation:
    def test_duplicate_points_rejected(self):
        with pytest.raises(ValueError):
            pset([[1, 0], [1, 0]])

    def test_limit_point_overlap_rejected(self):
        with pytest.raises(ValueError):
            pset([[1, 0]], limit_points=[[1, 0]])


def test_pointedness_matches_lp_oracle():
    # independent oracle: the cone contains a line iff some nonzero
    # nonnegative combination of generators sums to zero
    rng = np.random.default_rng(7)
    for _ in range(40):
        m = int(rng.integers(2, 6))
        gens = rng.standard_normal((m, 2))
        res = linprog(
            c=np.zeros(m),
            A_eq=gens.T,
            b_eq=np.zeros(2),
            A_ub=-np.ones((1, m)),
            b_ub=[-1.0],
            bounds=[(0, None)] * m,
            method="highs",
        )
        lp_pointed = res.status != 0
        try:
            make_cone(gens)
            got_pointed = True
        except NotPointed:
            got_pointed = False
        except DegenerateSpan:
            continue
        assert got_pointed == lp_pointed
