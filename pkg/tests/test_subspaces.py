import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapkit.errors import PreconditionError
from gapkit.subspaces import (Subspace, construct_pair_with_angles,
                              friedrichs_cosine, intersect, orthonormalize,
                              principal_angles, projector, random_orthogonal)


def line(*v):
    return orthonormalize(np.asarray(v, dtype=float)[:, None])


def same_span(U, V, tol=1e-10):
    return np.linalg.norm(projector(U) - projector(V)) <= tol


# orthonormalize

def test_orthonormalize_rank_one():
    U = orthonormalize(np.array([[1.0, 2.0], [0.0, 0.0]]))
    assert U.dim == 1
    assert np.allclose(np.abs(U.basis[:, 0]), [1, 0], atol=1e-14)


def test_orthonormalize_identity():
    assert orthonormalize(np.eye(3)).dim == 3


def test_orthonormalize_plane():
    U = orthonormalize(np.array([[1.0, 1.0], [1.0, -1.0], [0.0, 0.0]]))
    assert U.dim == 2
    assert np.allclose(U.basis.T @ U.basis, np.eye(2), atol=1e-12)
    assert same_span(U, Subspace(np.eye(3)[:, :2]))


def test_orthonormalize_zero_matrix_is_trivial():
    U = orthonormalize(np.zeros((4, 2)))
    assert U.dim == 0 and U.ambient_dim == 4


def test_subspace_rejects_nonorthonormal_basis():
    with pytest.raises(PreconditionError):
        Subspace(np.array([[1.0], [1.0]]))


# principal angles

def test_angle_of_rotated_line():
    pa = principal_angles(line(1, 0), line(np.cos(0.3), np.sin(0.3)))
    assert np.allclose(pa.angles, [0.3], atol=1e-14)
    assert pa.friedrichs == pytest.approx(0.3)


def test_identical_subspaces_have_no_friedrichs_angle():
    U = orthonormalize(np.random.default_rng(1).standard_normal((5, 2)))
    pa = principal_angles(U, U)
    assert np.allclose(pa.angles, 0, atol=1e-8)
    assert pa.intersection_dim == 2
    assert pa.friedrichs is None


def test_round_trip_with_extra_dimension():
    U, V = construct_pair_with_angles(8, 2, 3, [0.2, 0.9], seed=3)
    pa = principal_angles(U, V)
    assert np.allclose(pa.angles, [0.2, 0.9], atol=1e-10)


def test_small_angles_are_accurate():
    # cosines alone lose small angles to rounding; 1e-7 must survive
    U, V = construct_pair_with_angles(6, 2, 2, [1e-7, 0.5], seed=0)
    pa = principal_angles(U, V)
    assert pa.angles[0] == pytest.approx(1e-7, rel=1e-6)


def test_dimension_mismatch():
    with pytest.raises(PreconditionError):
        principal_angles(line(1, 0), line(1, 0, 0))


def _recursive_angles(U, V):
    """Angles of two planes in R^3 from the max-inner-product recursion."""
    from scipy.optimize import minimize_scalar

    PV = projector(V)
    u = lambda phi: U.basis @ [np.cos(phi), np.sin(phi)]
    phis = np.linspace(0, np.pi, 2001)
    vals = [np.linalg.norm(PV @ u(f)) for f in phis]
    f0 = phis[int(np.argmax(vals))]
    res = minimize_scalar(lambda f: -np.linalg.norm(PV @ u(f)),
                          bounds=(f0 - 2e-3, f0 + 2e-3), method="bounded",
                          options={"xatol": 1e-12})
    u1 = u(res.x)
    v1 = PV @ u1
    v1 /= np.linalg.norm(v1)
    u2 = U.basis @ (U.basis.T @ np.cross(u1, np.cross(*U.basis.T)))
    u2 /= np.linalg.norm(u2)
    w = V.basis @ (V.basis.T @ np.cross(v1, np.cross(*V.basis.T)))
    v2 = w / np.linalg.norm(w)
    c1 = min(1.0, abs(u1 @ v1))
    c2 = min(1.0, abs(u2 @ v2))
    return np.arccos([c1, c2])


def test_recursive_definition_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        U = orthonormalize(rng.standard_normal((3, 2)))
        V = orthonormalize(rng.standard_normal((3, 2)))
        expected = _recursive_angles(U, V)
        assert np.allclose(principal_angles(U, V).angles, expected, atol=1e-6)


# friedrichs cosine

def test_friedrichs_orthogonal_lines():
    assert friedrichs_cosine(line(1, 0), line(0, 1)) == pytest.approx(0, abs=1e-15)


def test_friedrichs_45_degrees():
    assert friedrichs_cosine(line(1, 0), line(1, 1)) == pytest.approx(np.sqrt(0.5), abs=1e-15)


def test_friedrichs_skips_shared_line():
    U, V = construct_pair_with_angles(4, 2, 2, [0.0, 0.4], seed=2)
    assert friedrichs_cosine(U, V) == pytest.approx(np.cos(0.4), abs=1e-10)


def test_friedrichs_absent_on_containment():
    U, V = construct_pair_with_angles(5, 2, 3, [0.0, 0.0], seed=0)
    assert friedrichs_cosine(U, V) is None


# intersect

def test_intersect_same_line():
    I = intersect(line(1, 0), line(1, 0))
    assert I.dim == 1 and same_span(I, line(1, 0))


def test_intersect_transversal_planes():
    U = orthonormalize(np.array([[1.0, 0], [0, 1], [0, 0]]))
    V = orthonormalize(np.array([[1.0, 0], [0, 1], [0, 1]]))
    I = intersect(U, V)
    # oracle: null space of the stacked complement bases
    C = np.hstack([U.complement().basis, V.complement().basis]).T
    _, s, vt = np.linalg.svd(C)
    assert I.dim == 1
    assert same_span(I, line(*vt[-1]))


def test_intersect_orthogonal_lines_is_trivial():
    assert intersect(line(1, 0), line(0, 1)).dim == 0


# projector

def test_projector_line():
    assert np.array_equal(projector(line(1, 0)), [[1, 0], [0, 0]])


def test_projector_trivial():
    assert np.array_equal(projector(Subspace.trivial(3)), np.zeros((3, 3)))


def test_projector_eigenvalues():
    U = orthonormalize(np.random.default_rng(0).standard_normal((6, 3)))
    ev = np.sort(np.linalg.eigvalsh(projector(U)))
    assert np.allclose(ev, [0, 0, 0, 1, 1, 1], atol=1e-10)


# construction

def test_construct_single_angle():
    for seed in range(3):
        U, V = construct_pair_with_angles(4, 1, 1, [np.pi / 4], seed=seed)
        assert friedrichs_cosine(U, V) == pytest.approx(np.sqrt(0.5), abs=1e-10)


def test_construct_intersection_dim():
    U, V = construct_pair_with_angles(6, 2, 2, [0.0, 0.7], seed=0)
    assert principal_angles(U, V).intersection_dim == 1
    assert intersect(U, V).dim == 1


def test_construct_containment():
    U, V = construct_pair_with_angles(6, 2, 3, [0.0, 0.0], seed=0)
    assert np.linalg.norm(projector(V) @ U.basis - U.basis) < 1e-12


def test_construct_swapped_dimensions():
    U, V = construct_pair_with_angles(7, 3, 2, [0.3, 1.0], seed=4)
    assert (U.dim, V.dim) == (3, 2)
    assert np.allclose(principal_angles(U, V).angles, [0.3, 1.0], atol=1e-10)


def test_construct_is_deterministic():
    a = construct_pair_with_angles(9, 2, 4, [0.1, 0.5], seed=11)
    b = construct_pair_with_angles(9, 2, 4, [0.1, 0.5], seed=11)
    assert np.array_equal(a[0].basis, b[0].basis)
    assert np.array_equal(a[1].basis, b[1].basis)


@pytest.mark.parametrize("args", [
    (4, 3, 3, [0.1, 0.2, 0.3]),     # p + q - s > n
    (5, 2, 2, [0.1]),              # wrong angle count
    (5, 2, 2, [0.5, 0.1]),         # not sorted
    (5, 1, 1, [2.0]),              # outside [0, pi/2]
])
def test_construct_rejects_bad_input(args):
    with pytest.raises(PreconditionError):
        construct_pair_with_angles(*args, seed=0)


def test_random_orthogonal():
    D = random_orthogonal(5, 3)
    assert np.allclose(D.T @ D, np.eye(5), atol=1e-12)
    assert np.array_equal(D, random_orthogonal(5, 3))


# properties

@st.composite
def pair_specs(draw):
    p = draw(st.integers(1, 4))
    q = draw(st.integers(1, 4))
    k = min(p, q)
    s = draw(st.integers(0, k))
    n = draw(st.integers(p + q - s, p + q - s + 3))
    nz = sorted(draw(st.lists(st.floats(0.01, np.pi / 2), min_size=k - s,
                              max_size=k - s)))
    return n, p, q, [0.0] * s + nz, draw(st.integers(0, 10**6))


@settings(max_examples=60, deadline=None)
@given(pair_specs())
def test_round_trip_property(spec):
    n, p, q, angles, seed = spec
    U, V = construct_pair_with_angles(n, p, q, angles, seed=seed)
    pa = principal_angles(U, V)
    assert np.allclose(pa.angles, angles, atol=1e-10)
    assert intersect(U, V).dim == pa.intersection_dim


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 8), st.integers(0, 10**6))
def test_projector_idempotent_symmetric(n, k, seed):
    k = min(k, n)
    U = orthonormalize(np.random.default_rng(seed).standard_normal((n, k)))
    P = projector(U)
    assert np.linalg.norm(P @ P - P) <= 1e-12
    assert np.linalg.norm(P - P.T) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(pair_specs())
def test_complement_duality(spec):
    n, p, q, angles, seed = spec
    U, V = construct_pair_with_angles(n, p, q, angles, seed=seed)
    Uc, Vc = U.complement(), V.complement()
    a = np.array([t for t in angles if t > 1e-8])
    if min(Uc.dim, Vc.dim) == 0:
        assert a.size == 0
        return
    b = principal_angles(Uc, Vc).angles
    b = b[b > 1e-8]
    assert np.allclose(np.sort(a), np.sort(b), atol=1e-8)
