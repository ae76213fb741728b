"""Catalog of sets with exact or Newton-based projections.

Every set exposes ``project``, ``relaxed_project``, ``tangent_space``,
``boundary_normal`` and ``contains``. ``project_with_face`` additionally
reports which smooth piece the projection landed on; the GAP engine records
these labels in its traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import (DegenerateManifoldError, NonsmoothPointError,
                     PreconditionError, ProjectionError, SingularityError)
from .subspaces import RANK_TOL, Subspace, orthonormalize

MEMBER_TOL = 1e-10
ON_SET_TOL = 1e-8

INTERIOR = "interior"
BOUNDARY = "boundary"
SURFACE = "surface"


@dataclass(frozen=True)
class TangentSpaceResult:
    """Tangent space translated to the origin, with the point it was taken at."""

    subspace: Subspace
    base_point: np.ndarray


def _vec(x) -> np.ndarray:
    """Flat float array; object arrays (e.g. of mpmath numbers) pass through."""
    a = np.asarray(x)
    if a.dtype == object:
        return a.ravel()
    return a.astype(float).ravel()


def _norm(v) -> float:
    if v.dtype == object:
        return math.sqrt(float(np.sum(v * v)))
    return float(np.linalg.norm(v))


class ProjectableSet:
    """Base class for catalog sets."""

    ambient_dim: int
    convex = True
    solid = False

    def project_with_face(self, x) -> Tuple[np.ndarray, str]:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        """Nearest point of the set to ``x``."""
        return self.project_with_face(x)[0]

    def relaxed_project(self, x, alpha: float) -> np.ndarray:
        """``(1 - alpha) x + alpha P(x)``."""
        x = _vec(x)
        return (1.0 - alpha) * x + alpha * self.project(x)

    def distance(self, x) -> float:
        x = _vec(x)
        return _norm(x - self.project(x))

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        return self.distance(x) <= tol

    def tangent_space(self, x) -> TangentSpaceResult:
        raise NotImplementedError

    def boundary_normal(self, x) -> np.ndarray:
        raise PreconditionError(f"{type(self).__name__} has no boundary normal")

    def _require_member(self, x, tol=ON_SET_TOL):
        if not self.contains(x, tol):
            raise PreconditionError("point is not in the set")

    def _exterior_normal(self, x):
        """Normal at the projection of an exterior point, or None."""
        p = self.project(x)
        d = np.linalg.norm(x - p)
        if d > ON_SET_TOL:
            return (x - p) / d
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


class LinearSubspace(ProjectableSet):
    """A linear subspace viewed as a set."""

    def __init__(self, subspace: Subspace):
        self.subspace = subspace
        self.ambient_dim = subspace.ambient_dim

    def project_with_face(self, x):
        x = _vec(x)
        p = self.subspace.project(x)
        return p, (INTERIOR if np.array_equal(p, x) else SURFACE)

    def tangent_space(self, x):
        self._require_member(x)
        return TangentSpaceResult(self.subspace, _vec(x))

    def to_dict(self):
        return {"type": "subspace", "basis": self.subspace.basis.tolist()}


class AffineSubspace(ProjectableSet):
    """``offset + subspace``."""

    def __init__(self, subspace: Subspace, offset):
        self.subspace = subspace
        self.ambient_dim = subspace.ambient_dim
        off = _vec(offset)
        if off.size != self.ambient_dim:
            raise PreconditionError("offset dimension mismatch")
        # store the offset orthogonal to the direction space
        self.offset = off - subspace.project(off)

    def project_with_face(self, x):
        x = _vec(x)
        p = self.offset + self.subspace.project(x - self.offset)
        return p, (INTERIOR if np.array_equal(p, x) else SURFACE)

    def tangent_space(self, x):
        self._require_member(x)
        return TangentSpaceResult(self.subspace, _vec(x))

    def to_dict(self):
        return {"type": "affine", "basis": self.subspace.basis.tolist(),
                "offset": self.offset.tolist()}


class Halfspace(ProjectableSet):
    """``{x : <a, x> <= b}``; ``(a, b)`` is rescaled so that ``|a| = 1``."""

    solid = True

    def __init__(self, a, b: float):
        a = _vec(a)
        na = np.linalg.norm(a)
        if na == 0:
            raise PreconditionError("halfspace normal must be nonzero")
        self.a = a / na
        self.b = float(b) / na
        self.ambient_dim = a.size

    def project_with_face(self, x):
        x = _vec(x)
        excess = self.a @ x - self.b
        if excess <= 0:
            return x, INTERIOR
        return x - excess * self.a, BOUNDARY

    def distance(self, x):
        return float(max(0.0, self.a @ _vec(x) - self.b))

    def tangent_space(self, x):
        x = _vec(x)
        self._require_member(x)
        if self.b - self.a @ x > ON_SET_TOL:
            return TangentSpaceResult(Subspace.full(self.ambient_dim), x)
        return TangentSpaceResult(Subspace(_null_basis(self.a[None, :])), x)

    def boundary_normal(self, x):
        x = _vec(x)
        if abs(self.a @ x - self.b) <= ON_SET_TOL or self.a @ x > self.b:
            return self.a.copy()
        raise PreconditionError("point is in the interior of the halfspace")

    def to_dict(self):
        return {"type": "halfspace", "a": self.a.tolist(), "b": self.b}


class Ball(ProjectableSet):
    """Closed Euclidean ball."""

    solid = True

    def __init__(self, center, radius: float):
        self.center = _vec(center)
        if not radius > 0:
            raise PreconditionError("radius must be positive")
        self.radius = float(radius)
        self.ambient_dim = self.center.size

    def project_with_face(self, x):
        x = _vec(x)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return x, INTERIOR
        return self.center + (self.radius / nd) * d, BOUNDARY

    def tangent_space(self, x):
        x = _vec(x)
        self._require_member(x)
        d = x - self.center
        if self.radius - np.linalg.norm(d) > ON_SET_TOL:
            return TangentSpaceResult(Subspace.full(self.ambient_dim), x)
        return TangentSpaceResult(Subspace(_null_basis(d[None, :])), x)

    def boundary_normal(self, x):
        x = _vec(x)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd < self.radius - ON_SET_TOL:
            raise PreconditionError("point is in the interior of the ball")
        return d / nd

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(),
                "radius": self.radius}


class Sphere(ProjectableSet):
    """Sphere ``{x : |x - c| = r}`` treated as a smooth manifold."""

    convex = False

    def __init__(self, center, radius: float):
        self.center = _vec(center)
        if not radius > 0:
            raise PreconditionError("radius must be positive")
        self.radius = float(radius)
        self.ambient_dim = self.center.size

    def project_with_face(self, x):
        x = _vec(x)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd == 0.0:
            raise SingularityError("projection onto a sphere from its center "
                                   "is not unique")
        p = self.center + (self.radius / nd) * d
        return p, (INTERIOR if np.array_equal(p, x) else SURFACE)

    def tangent_space(self, x):
        x = _vec(x)
        self._require_member(x)
        d = x - self.center
        return TangentSpaceResult(Subspace(_null_basis(d[None, :])), x)

    def to_dict(self):
        return {"type": "sphere", "center": self.center.tolist(),
                "radius": self.radius}


_SQ2 = np.sqrt(0.5)


class AbsConeR2(ProjectableSet):
    """The planar cone ``{(x, y) : y >= |x|}``.

    Face labels are ``right`` (the ray y = x, x > 0), ``left`` (y = -x,
    x < 0), ``apex`` and ``interior``. The projection uses only additions and
    halvings, so it also works on object arrays of extended-precision numbers.
    """

    solid = True
    ambient_dim = 2
    _RIGHT = np.array([_SQ2, _SQ2])
    _LEFT = np.array([-_SQ2, _SQ2])

    def project_with_face(self, x):
        x = _vec(x)
        u, v = x
        if v >= abs(u):
            return x, INTERIOR
        if v <= -abs(u):
            # polar cone: nearest point is the apex
            return x * 0, "apex"
        if u > 0:
            t = (u + v) / 2
            return np.array([t, t], dtype=x.dtype), "right"
        t = (u - v) / 2
        return np.array([t, -t], dtype=x.dtype), "left"

    def tangent_space(self, x):
        x = _vec(x)
        self._require_member(x)
        u, v = x
        if np.hypot(u, v) <= ON_SET_TOL:
            raise NonsmoothPointError("cone apex is not a smooth point")
        if v - abs(u) > ON_SET_TOL:
            return TangentSpaceResult(Subspace.full(2), x)
        face = self._RIGHT if u > 0 else self._LEFT
        return TangentSpaceResult(Subspace(face[:, None].copy()), x)

    def boundary_normal(self, x):
        x = _vec(x)
        n = self._exterior_normal(x)
        if n is not None:
            return n
        u, v = x
        if np.hypot(u, v) <= ON_SET_TOL:
            raise NonsmoothPointError("cone apex has no unique normal")
        if v - abs(u) > ON_SET_TOL:
            raise PreconditionError("point is in the interior of the cone")
        return np.array([_SQ2, -_SQ2]) if u > 0 else np.array([-_SQ2, -_SQ2])

    def to_dict(self):
        return {"type": "abs_cone"}


class LineR2(LinearSubspace):
    """The horizontal axis ``{(x, y) : y = 0}``."""

    def __init__(self):
        super().__init__(Subspace(np.array([[1.0], [0.0]])))

    def project_with_face(self, x):
        x = _vec(x)
        p = np.array([x[0], x[1] * 0], dtype=x.dtype)
        return p, (INTERIOR if x[1] == 0 else SURFACE)

    def to_dict(self):
        return {"type": "line_r2"}


class ImplicitManifold(ProjectableSet):
    """Manifold ``{x : F(x) = 0}`` with ``F : R^n -> R^d``.

    Parameters
    ----------
    F : callable
        Defining map, returns an array of length d.
    jac : callable
        Jacobian of ``F``, returns a (d, n) array.
    ambient_dim : int
    hint : array_like, optional
        Starting point for the projection solver. Defaults to the query point.
    tol : float
        KKT residual tolerance, relative to ``max(1, |x|)``.
    max_iter : int
    """

    convex = False

    def __init__(self, F: Callable, jac: Callable, ambient_dim: int,
                 hint=None, tol: float = 1e-12, max_iter: int = 100,
                 fd_step: float = 1e-6):
        self.F = F
        self.jac = jac
        self.ambient_dim = int(ambient_dim)
        self.hint = None if hint is None else _vec(hint)
        self.tol = tol
        self.max_iter = max_iter
        self.fd_step = fd_step

    def _J(self, y):
        J = np.atleast_2d(np.asarray(self.jac(y), dtype=float))
        return J

    def _check_rank(self, J):
        sv = np.linalg.svd(J, compute_uv=False)
        if sv.size == 0 or sv[0] == 0 or sv[-1] <= RANK_TOL * sv[0]:
            raise DegenerateManifoldError("Jacobian is rank deficient")

    def _hess_term(self, y, lam):
        """Finite-difference matrix of y -> J(y)^T lam."""
        n = y.size
        H = np.empty((n, n))
        h = self.fd_step
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            H[:, j] = (self._J(y + e).T @ lam - self._J(y - e).T @ lam) / (2 * h)
        return 0.5 * (H + H.T)

    def project_with_face(self, x):
        x = _vec(x)
        y = x.copy() if self.hint is None else self.hint.copy()
        n = x.size
        Fy = np.atleast_1d(np.asarray(self.F(y), dtype=float))
        d = Fy.size
        lam = np.zeros(d)
        scale = max(1.0, np.linalg.norm(x))
        res = np.inf
        for _ in range(self.max_iter):
            J = self._J(y)
            r1 = y - x + J.T @ lam
            res = np.sqrt(r1 @ r1 + Fy @ Fy)
            if res <= self.tol * scale:
                return y, (INTERIOR if np.array_equal(y, x) else SURFACE)
            self._check_rank(J)
            K = np.zeros((n + d, n + d))
            K[:n, :n] = np.eye(n) + self._hess_term(y, lam)
            K[:n, n:] = J.T
            K[n:, :n] = J
            try:
                step = np.linalg.solve(K, -np.concatenate([r1, Fy]))
            except np.linalg.LinAlgError as exc:
                raise ProjectionError("singular KKT system", res) from exc
            y = y + step[:n]
            lam = lam + step[n:]
            Fy = np.atleast_1d(np.asarray(self.F(y), dtype=float))
        J = self._J(y)
        r1 = y - x + J.T @ lam
        res = np.sqrt(r1 @ r1 + Fy @ Fy)
        if res <= self.tol * scale:
            return y, (INTERIOR if np.array_equal(y, x) else SURFACE)
        raise ProjectionError(
            f"manifold projection did not converge (residual {res:.3e})", res)

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        x = _vec(x)
        Fx = np.atleast_1d(np.asarray(self.F(x), dtype=float))
        step = np.linalg.pinv(self._J(x)) @ Fx
        return float(np.linalg.norm(step)) <= tol

    def tangent_space(self, x):
        x = _vec(x)
        self._require_member(x)
        J = self._J(x)
        self._check_rank(J)
        return TangentSpaceResult(Subspace(_null_basis(J)), x)

    def to_dict(self):
        return {"type": "implicit", "ambient_dim": self.ambient_dim}


def _null_basis(J) -> np.ndarray:
    """Orthonormal basis of ker J, rank cut at RANK_TOL * sigma_max."""
    J = np.atleast_2d(J)
    n = J.shape[1]
    _, sv, vt = np.linalg.svd(J, full_matrices=True)
    r = int(np.sum(sv > RANK_TOL * sv[0])) if sv.size and sv[0] > 0 else 0
    return np.ascontiguousarray(vt[r:].T) if r < n else np.zeros((n, 0))


def paraboloid_curve() -> ImplicitManifold:
    """The curve ``{(t, 0, t^2)}`` in R^3 as the zero set of (y, z - x^2)."""
    return ImplicitManifold(
        lambda v: np.array([v[1], v[2] - v[0] ** 2]),
        lambda v: np.array([[0.0, 1.0, 0.0], [-2.0 * v[0], 0.0, 1.0]]),
        ambient_dim=3)


def set_from_dict(spec: dict) -> ProjectableSet:
    """Build a catalog set from a JSON-style description.

    Recognised ``type`` values: ``subspace`` (``basis`` columns, orthonormalized),
    ``affine`` (``basis``, ``offset``), ``halfspace`` (``a``, ``b``), ``ball``
    and ``sphere`` (``center``, ``radius``), ``line`` (``point``,
    ``direction``), ``abs_cone``, ``line_r2`` and ``paraboloid_curve``.
    """
    kind = spec.get("type")
    if kind == "subspace":
        return LinearSubspace(orthonormalize(np.asarray(spec["basis"], float)))
    if kind == "affine":
        return AffineSubspace(orthonormalize(np.asarray(spec["basis"], float)),
                              spec["offset"])
    if kind == "line":
        return AffineSubspace(orthonormalize(np.asarray(spec["direction"], float)),
                              spec["point"])
    if kind == "halfspace":
        return Halfspace(spec["a"], spec["b"])
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "sphere":
        return Sphere(spec["center"], spec["radius"])
    if kind == "abs_cone":
        return AbsConeR2()
    if kind == "line_r2":
        return LineR2()
    if kind == "paraboloid_curve":
        return paraboloid_curve()
    raise PreconditionError(f"unknown set type {kind!r}")


# functional aliases

def project(S: ProjectableSet, x) -> np.ndarray:
    return S.project(x)


def relaxed_project(S: ProjectableSet, x, alpha: float) -> np.ndarray:
    return S.relaxed_project(x, alpha)


def tangent_space(S: ProjectableSet, x) -> TangentSpaceResult:
    return S.tangent_space(x)


def boundary_normal(S: ProjectableSet, x) -> np.ndarray:
    return S.boundary_normal(x)


def contains(S: ProjectableSet, x, tol: float = MEMBER_TOL) -> bool:
    return S.contains(x, tol)
