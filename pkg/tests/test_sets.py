import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from gapkit.errors import (DegenerateManifoldError, NonsmoothPointError,
                           PreconditionError, ProjectionError, SingularityError)
from gapkit.experiments import numeric_jacobian
from gapkit.sets import (AbsConeR2, AffineSubspace, Ball, Halfspace,
                         ImplicitManifold, LineR2, Sphere,
                         paraboloid_curve, set_from_dict)
from gapkit.subspaces import Subspace, orthonormalize, projector

G = (1 + np.sqrt(73.0)) / 12

finite = st.floats(-10, 10, allow_nan=False)


def vec(n):
    return st.lists(finite, min_size=n, max_size=n).map(np.array)


def plane_xy():
    return Subspace(np.eye(3)[:, :2])


CONVEX_2D = [
    Halfspace([0.3, 1.0], 0.5),
    Ball([0.5, -0.2], 1.3),
    AbsConeR2(),
    LineR2(),
    AffineSubspace(orthonormalize(np.array([[1.0], [2.0]])), [0.0, 1.0]),
]


# project

def test_halfspace_projection():
    assert np.allclose(Halfspace([0, 1], 0).project([3, 2]), [3, 0])


def test_halfspace_normal_is_unit():
    H = Halfspace([3.0, 4.0], 10.0)
    assert abs(np.linalg.norm(H.a) - 1) <= 1e-12 and H.b == pytest.approx(2.0)


def test_cone_projection_of_start_point():
    p = AbsConeR2().project([1, -G])
    assert np.allclose(p, [(1 - G) / 2, (1 - G) / 2], atol=1e-15)


def test_cone_faces_and_apex():
    C = AbsConeR2()
    assert C.project_with_face([1, 0])[1] == "right"
    assert C.project_with_face([-1, 0])[1] == "left"
    assert C.project_with_face([0, 1])[1] == "interior"
    p, face = C.project_with_face([0, -1])
    assert face == "apex" and np.array_equal(p, [0, 0])
    assert C.project_with_face([0.5, -2])[1] == "apex"


def test_ball_radial_projection():
    assert np.allclose(Ball([0, 0], 1).project([2, 0]), [1, 0])


def test_sphere_center_is_singular():
    with pytest.raises(SingularityError):
        Sphere([0, 0], 1).project([0, 0])


def test_radius_must_be_positive():
    with pytest.raises(PreconditionError):
        Ball([0, 0], 0)
    with pytest.raises(PreconditionError):
        Sphere([0, 0], -1)


def test_affine_projection():
    A = AffineSubspace(orthonormalize(np.array([[1.0], [0.0]])), [5.0, 2.0])
    assert np.allclose(A.project([1, 7]), [1, 2])


def test_manifold_projection_on_paraboloid_curve():
    M = paraboloid_curve()
    x = np.array([0.3, 0.1, 0.2])
    p = M.project(x)
    assert abs(p[1]) < 1e-12 and abs(p[2] - p[0] ** 2) < 1e-12
    # first-order optimality: x - p is normal, i.e. orthogonal to (1, 0, 2 p_x)
    assert abs((x - p) @ [1, 0, 2 * p[0]]) < 1e-10


def test_manifold_projection_failure_carries_residual():
    M = ImplicitManifold(lambda y: np.array([y[0] ** 2 + y[1] ** 2 + 1.0]),
                         lambda y: np.array([[2 * y[0], 2 * y[1]]]), 2,
                         max_iter=5)
    with pytest.raises(ProjectionError) as info:
        M.project([1.0, 1.0])
    assert info.value.residual is not None


def test_manifold_rank_deficiency():
    M = ImplicitManifold(lambda y: np.array([y[0] ** 2]),
                         lambda y: np.array([[2 * y[0], 0.0]]), 2)
    with pytest.raises(DegenerateManifoldError):
        M.tangent_space([0.0, 0.0])


# relaxed projection

def test_relaxed_cone_step():
    # Pi_C p0 = (1-G)/2 (1, 1), so the 1.5-relaxation lands at (1-3G, 3-G)/4
    q = AbsConeR2().relaxed_project([1, -G], 1.5)
    assert np.allclose(q, np.array([1 - 3 * G, 3 - G]) / 4, atol=1e-15)


def test_relaxed_line_step():
    x = np.array([1 - 3 * G, 3 - G]) / 4
    q = LineR2().relaxed_project(x, 1.5)
    assert np.allclose(q, np.array([2 - 6 * G, -3 + G]) / 8, atol=1e-15)


@pytest.mark.parametrize("S", CONVEX_2D)
def test_relaxation_zero_and_one(S):
    x = np.array([0.7, -1.9])
    assert np.array_equal(S.relaxed_project(x, 0.0), x)
    assert np.allclose(S.relaxed_project(x, 1.0), S.project(x))


# tangent spaces

def test_circle_tangent():
    T = Sphere([0, 0], 1).tangent_space([1, 0]).subspace
    assert np.allclose(projector(T), [[0, 0], [0, 1]])


def test_paraboloid_curve_tangent_at_origin():
    T = paraboloid_curve().tangent_space([0, 0, 0]).subspace
    assert T.dim == 1
    assert np.allclose(projector(T), np.diag([1.0, 0, 0]))


def test_affine_tangent_is_direction():
    U = orthonormalize(np.array([[1.0], [1.0], [0.0]]))
    A = AffineSubspace(U, [0.0, 0.0, 3.0])
    T = A.tangent_space([2.0, 2.0, 3.0]).subspace
    assert np.allclose(projector(T), projector(U))


def test_tangent_requires_membership():
    with pytest.raises(PreconditionError):
        Sphere([0, 0], 1).tangent_space([2, 0])


def test_sphere_tangent_dimension():
    assert Sphere(np.zeros(4), 2.0).tangent_space([0, 2.0, 0, 0]).subspace.dim == 3


def test_cone_apex_is_not_smooth():
    with pytest.raises(NonsmoothPointError):
        AbsConeR2().tangent_space([0, 0])
    with pytest.raises(NonsmoothPointError):
        AbsConeR2().boundary_normal([0, 0])


# boundary normals

def test_ball_normal():
    assert np.allclose(Ball([0, 0], 1).boundary_normal([0, 1]), [0, 1])


def test_halfspace_normal():
    assert np.allclose(Halfspace([0, 1], 0).boundary_normal([5, 0]), [0, 1])


def test_exterior_normal_identity():
    B = Ball([0, 0], 1)
    x = np.array([0.0, 2.0])
    p = B.project(x)
    assert np.allclose(B.boundary_normal(p), (x - p) / np.linalg.norm(x - p))
    assert np.allclose(B.boundary_normal(p), [0, 1])


def test_cone_face_normals():
    C = AbsConeR2()
    assert np.allclose(C.boundary_normal([1, 1]), np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(C.boundary_normal([-1, 1]), np.array([-1, -1]) / np.sqrt(2))


# contains

def test_contains():
    C = AbsConeR2()
    assert C.contains([0, 1])
    assert not C.contains([1, 0.5])
    assert Ball([0, 0], 1).contains([1 + 1e-12, 0], tol=1e-10)


# serialization

@pytest.mark.parametrize("spec", [
    {"type": "halfspace", "a": [0, 2], "b": 1},
    {"type": "ball", "center": [0, 0], "radius": 2},
    {"type": "sphere", "center": [0, 0, 0], "radius": 1},
    {"type": "abs_cone"},
    {"type": "line_r2"},
])
def test_set_round_trip(spec):
    S = set_from_dict(spec)
    T = set_from_dict(S.to_dict())
    x = np.random.default_rng(0).standard_normal(S.ambient_dim) * 3
    assert np.allclose(S.project(x), T.project(x))


def test_unknown_set_type():
    with pytest.raises(PreconditionError):
        set_from_dict({"type": "torus"})


# properties

@settings(max_examples=200, deadline=None)
@given(st.sampled_from(range(len(CONVEX_2D))), vec(2))
def test_projection_idempotent(i, x):
    S = CONVEX_2D[i]
    p = S.project(x)
    assert np.linalg.norm(S.project(p) - p) <= 1e-9
    assert S.contains(p, 1e-10 * max(1.0, np.linalg.norm(x)))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(range(len(CONVEX_2D))), vec(2), vec(2))
def test_projection_nonexpansive(i, x, y):
    S = CONVEX_2D[i]
    assert (np.linalg.norm(S.project(x) - S.project(y))
            <= np.linalg.norm(x - y) + 1e-12 * (1 + np.linalg.norm(x) + np.linalg.norm(y)))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(range(len(CONVEX_2D))), vec(2), vec(2))
def test_variational_inequality(i, x, z):
    S = CONVEX_2D[i]
    p = S.project(x)
    y = S.project(z)   # an arbitrary member of the set
    assert (x - p) @ (y - p) <= 1e-10 * (1 + np.linalg.norm(x) + np.linalg.norm(z)) ** 2


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.8, 0.8))
def test_manifold_projection_jacobian(t):
    M = paraboloid_curve()
    xb = np.array([t, 0.0, t * t])
    P = projector(M.tangent_space(xb).subspace)
    J = numeric_jacobian(M.project, xb)
    assert np.max(np.abs(J - P)) <= 1e-5
    for a in (0.5, 1.5):
        Ja = numeric_jacobian(lambda y: M.relaxed_project(y, a), xb)
        assert np.max(np.abs(Ja - ((1 - a) * np.eye(3) + a * P))) <= 1e-5


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi))
def test_sphere_projection_jacobian(phi):
    S = Sphere([0.0, 0.0], 1.0)
    xb = np.array([np.cos(phi), np.sin(phi)])
    P = projector(S.tangent_space(xb).subspace)
    assert np.max(np.abs(numeric_jacobian(S.project, xb) - P)) <= 1e-5


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(1e-6, 1e-3), st.floats(0, 2 * np.pi),
       st.floats(1.05, 2.0))
def test_over_relaxation_enters_ball_interior(phi, r, psi, alpha):
    # near a boundary point xb, exterior points are sent strictly inside
    B = Ball([0.0, 0.0], 1.0)
    xb = np.array([np.cos(phi), np.sin(phi)])
    x = xb + r * np.array([np.cos(psi), np.sin(psi)])
    assume(np.linalg.norm(x) > 1.0 + 1e-9)
    y = B.relaxed_project(x, alpha)
    assert np.linalg.norm(y) < 1.0
