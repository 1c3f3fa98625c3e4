import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from formsens.errors import DimensionMismatch, Infeasible, NoConvergence, ZeroGradient
from formsens.form import (SolverOptions, assemble_system, correlation, find_design_point,
                           find_joint_design_point, linear_system, linearize_at,
                           multi_start_design_points)
from formsens.limit_state import SystemDefinition, parse_limit_state, u_space_function
from formsens.mc import crude_mc_probability
from formsens.limit_state import ReliabilityProblem
from formsens.probability import Lognormal, RandomVector

PARABOLA = "5 - U2 - 0.5*(U1 - 0.1)^2"
FRAME = ["2*M1 + 2*M3 - 4.5*S", "2*M1 + M2 + M3 - 4.5*S",
         "M1 + M2 + 2*M3 - 4.5*S", "M1 + 2*M2 + M3 - 4.5*S"]
# grid-search minimum of |u| over the theta = 90 deg joint failure set
JOINT90_GRID = 2.829


def linear_G(alpha, beta):
    alpha = np.asarray(alpha, dtype=float)

    def G(u):
        return beta - alpha @ u, -alpha
    return G


def std_G(text, n=2):
    rv = RandomVector.standard_normal(n, [f"U{i + 1}" for i in range(n)])
    return u_space_function(parse_limit_state(text, rv.names), rv)


def frame_rv():
    return RandomVector((Lognormal(200, 30),) * 3 + (Lognormal(50, 20),), ("M1", "M2", "M3", "S"))


def test_linear_closed_form():
    a = np.array([1, 1]) / math.sqrt(2)
    lin = find_design_point(linear_G(a, 2.0), None, n=2)
    assert lin.u_star == pytest.approx([math.sqrt(2), math.sqrt(2)], abs=1e-8)
    assert lin.beta == pytest.approx(2.0, abs=1e-10)
    assert lin.iterations <= 3


def test_negative_beta_kept():
    lin = find_design_point(linear_G([1.0, 0.0], -1.5), None, n=2)
    assert lin.beta == pytest.approx(-1.5, abs=1e-10)
    assert lin.u_star == pytest.approx([-1.5, 0.0], abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.floats(-4, 4), st.integers(0, 2**31))
def test_linear_and_rotation_equivariance(n, beta, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n)
    a /= np.linalg.norm(a)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lin = find_design_point(linear_G(a, beta), None, n=n)
    rot = find_design_point(linear_G(Q @ a, beta), None, n=n)
    assert np.allclose(lin.u_star, beta * a, atol=1e-8)
    assert lin.iterations <= 3
    assert np.allclose(rot.u_star, Q @ lin.u_star, atol=1e-8)
    assert rot.beta == pytest.approx(lin.beta, abs=1e-8)
    assert np.linalg.norm(lin.alpha) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("u0,expected", [((-1, 0), (-2.741, 0.965)), ((1, 0), (2.916, 1.036))])
def test_parabola_design_points(u0, expected):
    lin = find_design_point(std_G(PARABOLA), np.array(u0, dtype=float))
    assert np.linalg.norm(lin.u_star - expected) < 0.01
    # KKT: point on the surface, parallel to the gradient
    assert abs(std_G(PARABOLA)(lin.u_star)[0]) <= 1e-6 * 4.995
    assert np.linalg.norm(lin.u_star - lin.beta * lin.alpha) <= 1e-6
    assert lin.beta == pytest.approx(lin.alpha @ lin.u_star, abs=1e-10)


def test_multi_start_parabola():
    pts = multi_start_design_points(std_G(PARABOLA), 2, SolverOptions(), n_starts=8, seed=42)
    assert len(pts) == 2
    assert np.linalg.norm(pts[0].u_star - (-2.741, 0.965)) < 0.01
    assert np.linalg.norm(pts[1].u_star - (2.916, 1.036)) < 0.01
    assert np.linalg.norm(pts[0].u_star) < np.linalg.norm(pts[1].u_star)


def test_multi_start_linear_single_point():
    pts = multi_start_design_points(linear_G([0.6, 0.8], 2.5), 2, n_starts=12, seed=3)
    assert len(pts) == 1


def test_frame_unique_design_points():
    rv = frame_rv()
    for text in FRAME:
        G = u_space_function(parse_limit_state(text, rv.names), rv)
        pts = multi_start_design_points(G, 4, SolverOptions(), n_starts=64, seed=11)
        assert len(pts) == 1


def test_frame_correlations():
    rv = frame_rv()
    lins = [find_design_point(u_space_function(parse_limit_state(t, rv.names), rv), None, n=4)
            for t in FRAME]
    ls = assemble_system(lins, SystemDefinition.series(4), rv.names)
    off = ls.R[~np.eye(4, dtype=bool)]
    assert off.min() >= 0.975 - 5e-4 and off.max() <= 0.992 + 5e-4
    assert np.allclose(np.linalg.norm(ls.A, axis=1), 1.0, atol=1e-12)
    assert np.allclose(ls.R, ls.R.T) and np.all(np.diag(ls.R) == 1.0)


def test_zero_gradient():
    with pytest.raises(ZeroGradient):
        find_design_point(lambda u: (1.0, np.zeros(2)), None, n=2)


def test_no_convergence():
    # the parabola needs more than three iterations from the origin
    with pytest.raises(NoConvergence):
        find_design_point(std_G(PARABOLA), None, SolverOptions(max_iter=3), n=2)


def rotated_alpha(theta_deg):
    t = math.radians(theta_deg)
    return np.array([math.cos(t) - math.sin(t), math.cos(t) + math.sin(t)]) / math.sqrt(2)


A1 = np.array([1.0, 1.0]) / math.sqrt(2)


def test_illustrative_R():
    ls0 = linear_system([A1, rotated_alpha(0)], [2, 2])
    assert np.array_equal(ls0.R, [[1, 1], [1, 1]])
    ls90 = linear_system([A1, rotated_alpha(90)], [2, 2])
    assert np.allclose(ls90.R, np.eye(2), atol=1e-15)
    assert rotated_alpha(45) == pytest.approx([0.0, 1.0], abs=1e-15)
    assert rotated_alpha(135) == pytest.approx([-1.0, 0.0], abs=1e-15)


def test_joint_coincident():
    Gs = [linear_G(A1, 2.0), linear_G(rotated_alpha(0), 2.0)]
    u, lins = find_joint_design_point(Gs, 2)
    assert np.linalg.norm(u) == pytest.approx(2.0, abs=1e-6)


def test_joint_orthogonal():
    Gs = [linear_G(A1, 2.0), linear_G(rotated_alpha(90), 2.0)]
    u, lins = find_joint_design_point(Gs, 2)
    assert np.linalg.norm(u) == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert abs(np.linalg.norm(u) - JOINT90_GRID) < 2e-3
    for G in Gs:
        assert G(u)[0] <= 1e-6
    assert [lin.beta for lin in lins] == pytest.approx([2.0, 2.0], abs=1e-6)


def test_joint_inactive_constraint_offset():
    # second constraint is slack at the joint point: beta keeps its G offset
    Gs = [linear_G([1.0, 0.0], 2.0), linear_G([0.0, 1.0], -1.0)]
    u, lins = find_joint_design_point(Gs, 2)
    assert u == pytest.approx([2.0, 0.0], abs=1e-6)
    assert lins[1].beta == pytest.approx(-1.0, abs=1e-9)


def test_joint_single_component():
    u, lins = find_joint_design_point([linear_G(A1, 2.0)], 2)
    assert u == pytest.approx(2 * A1, abs=1e-8)


def test_joint_infeasible():
    Gs = [linear_G([1.0, 0.0], 2.0), linear_G([-1.0, 0.0], 2.0)]
    with pytest.raises(Infeasible):
        find_joint_design_point(Gs, 2)


def test_linearize_at_nonlinear():
    lin = linearize_at(std_G(PARABOLA), np.array([1.0, 1.0]))
    g, dg = std_G(PARABOLA)(np.array([1.0, 1.0]))
    assert lin.beta == pytest.approx(lin.alpha @ [1, 1] + g / np.linalg.norm(dg))


def test_assemble_dimension_mismatch():
    a = find_design_point(linear_G([1.0, 0.0], 1.0), None, n=2)
    b = find_design_point(linear_G([1.0, 0.0, 0.0], 1.0), None, n=3)
    with pytest.raises(DimensionMismatch):
        assemble_system([a, b], SystemDefinition.series(2))
    with pytest.raises(DimensionMismatch):
        assemble_system([a], SystemDefinition.series(2))


def test_correlation_clipped():
    A = np.array([[1.0, 1e-9], [1.0, 0.0]])
    A /= np.linalg.norm(A, axis=1)[:, None]
    R = correlation(A * (1 + 1e-15))
    assert R.max() <= 1.0 and np.all(np.diag(R) == 1.0)


def test_form_matches_mc_for_linear_event():
    rv = RandomVector.standard_normal(2, ("U1", "U2"))
    lsf = parse_limit_state("2 - 0.6*U1 - 0.8*U2", rv.names)
    lin = find_design_point(u_space_function(lsf, rv), None, n=2)
    mc = crude_mc_probability(ReliabilityProblem(rv, [lsf], SystemDefinition.component()),
                              10**6, seed=9)
    assert abs(special.ndtr(-lin.beta) - mc.value) <= 3 * mc.std_error
    assert lin.beta == pytest.approx(2.0, abs=1e-10)
    assert stats.norm.sf(2.0) == pytest.approx(special.ndtr(-2.0), rel=1e-14)
