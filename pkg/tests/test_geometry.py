import math

import numpy as np
import pytest

from cgoplane.geometry import (GraphSegment, PiecewiseBoundary, SubDomain,
                               curve_distance_c2, make_disk, make_rhombus)


class TestGraphSegment:
    def test_polynomial_derivatives(self):
        seg = GraphSegment.from_polynomial("z1", (-1.0, 2.0), [1.0, -2.0, 0.5])
        tau = np.linspace(-1, 2, 7)
        assert np.allclose(seg.f(tau), 1 - 2 * tau + 0.5 * tau**2)
        assert np.allclose(seg.df(tau), -2 + tau)
        assert np.allclose(seg.d2f(tau), 1.0)

    def test_inconsistent_derivatives_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            GraphSegment.from_callables(
                "z1", (0.0, 1.0),
                f=lambda t: np.sin(t), df=lambda t: np.cos(t),
                d2f=lambda t: np.cos(t))  # wrong second derivative

    def test_spline_is_c2_consistent(self):
        knots = np.linspace(0, 1, 9)
        vals = np.sin(2 * knots)
        seg = GraphSegment.from_spline("z1", knots, vals,
                                       end_derivs=(2 * np.cos(0), 2 * np.cos(2)))
        # construction runs the internal consistency check; also probe values
        assert abs(float(seg.f(0.5)) - np.sin(1.0)) < 1e-3

    def test_orientation_point_mapping(self):
        seg = GraphSegment.from_polynomial("z2", (0.0, 1.0), [2.0])
        p = seg.point(0.5)
        assert np.allclose(p, [2.0, 0.5])


class TestBoundary:
    def test_chain_gap_detected(self):
        a = GraphSegment.from_polynomial("z1", (0.0, 1.0), [0.0, 1.0])
        b = GraphSegment.from_polynomial("z1", (0.0, 1.0), [5.0])  # nowhere near
        with pytest.raises(ValueError, match="chain"):
            PiecewiseBoundary([a, b])

    def test_self_intersection_detected(self):
        # bowtie: two crossing segments chained into a "closed" curve
        up = GraphSegment.from_polynomial("z1", (0.0, 1.0), [0.0, 1.0])
        down = GraphSegment.from_polynomial("z1", (0.0, 1.0), [1.0, -1.0], reverse=False)
        with pytest.raises(ValueError):
            PiecewiseBoundary([up, down])

    def test_rhombus_polyline_length(self):
        rh = make_rhombus()
        assert abs(rh.boundary.total_polyline_length() - 4 * math.sqrt(2)) < 1e-6


class TestRhombus:
    def test_vertices(self):
        rh = make_rhombus()
        corners = {tuple(np.round(seg.start_end()[0], 12)) for seg in rh.boundary.segments}
        assert corners == {(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (1.0, -1.0)}

    def test_area_matches_shoelace(self):
        rh = make_rhombus()
        assert abs(rh.area - 2.0) < 1e-9

    def test_membership(self):
        rh = make_rhombus()
        assert bool(rh.inside(1.0, 0.0))
        assert not bool(rh.inside(-1.0, -1.0))


class TestDisk:
    def test_area_and_membership(self):
        dk = make_disk(center=(0.2, -0.1), radius=0.6)
        assert abs(dk.area - np.pi * 0.36) < 2e-4
        assert bool(dk.inside(0.2, -0.1))
        assert not bool(dk.inside(0.9, 0.6))

    def test_distance_to_boundary(self):
        dk = make_disk(radius=0.5)
        d = dk.boundary.distance_to(np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert abs(d[0] - 0.5) < 1e-3
        assert abs(d[1] - 0.5) < 1e-3


class TestCurveDistance:
    def test_identity_is_zero(self):
        rh = make_rhombus()
        assert curve_distance_c2(rh.boundary, rh.boundary) == 0.0

    def test_constant_shift(self):
        a = make_rhombus().boundary
        segs = list(make_rhombus().boundary.segments)
        shifted = GraphSegment.from_polynomial("z1", (0.0, 1.0), [1e-3, 1.0])
        # replace l1 by a shifted copy; skip closure checks for the comparison
        b = PiecewiseBoundary([shifted] + segs[1:], closure=False)
        assert abs(curve_distance_c2(a, b) - 1e-3) < 1e-12

    def test_mismatched_covers_are_infinite(self):
        rh = make_rhombus().boundary
        one = PiecewiseBoundary([rh.segments[0]], closure=False)
        assert curve_distance_c2(rh, one) == math.inf
        # same count, different interval
        other = PiecewiseBoundary(
            [GraphSegment.from_polynomial("z1", (0.0, 2.0), [0.0, 1.0])], closure=False)
        assert curve_distance_c2(one, other) == math.inf

    def test_symmetry_and_triangle(self):
        base = [0.0, 1.0, -0.3]
        mk = lambda c: PiecewiseBoundary(  # noqa: E731
            [GraphSegment.from_polynomial("z1", (0.0, 1.0), c)], closure=False)
        A, B, C = mk(base), mk([0.05, 1.0, -0.3]), mk([0.02, 0.9, -0.3])
        dab = curve_distance_c2(A, B)
        dba = curve_distance_c2(B, A)
        assert dab == dba
        assert curve_distance_c2(A, C) <= dab + curve_distance_c2(B, C) + 1e-12


def test_subdomain_predicate_vs_winding():
    # deliberately wrong predicate must be caught
    rh = make_rhombus()
    with pytest.raises(ValueError, match="disagrees"):
        SubDomain(rh.boundary, inside=lambda q1, q2: np.asarray(q1) > 10.0)
