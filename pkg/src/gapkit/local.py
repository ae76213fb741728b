"""Local analysis at an intersection point of two sets.

Covers the tangent GAP operator, predicted local rates, the regularity and
transversality checks, acute/obtuse classification of smooth convex pairs and
the associated regularity constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (InsufficientDataError, PreconditionError,
                     TangentCaseError, DegenerateManifoldError,
                     NonsmoothPointError)
from .params import GapParams
from .sets import (Ball, Halfspace, LinearSubspace, ProjectableSet,
                   ON_SET_TOL)
from .spectral import (assemble_gap_matrix, fixed_subspace, sigma_norm,
                       subdominant_magnitude)
from .subspaces import (RANK_TOL, ZERO_TOL, Subspace, intersect,
                        principal_angles, projector)

ACUTE, OBTUSE, TANGENT = "acute", "obtuse", "tangent"
TANGENT_BAND = 1e-12


@dataclass(frozen=True)
class LocalRateReport:
    """Tangent-space prediction of the local behaviour of GAP.

    ``gamma_local`` and ``sigma_local`` are None when regularity fails.
    """

    base_point: np.ndarray
    tangent_A: Subspace
    tangent_B: Subspace
    theta_f: Optional[float]
    gamma_local: Optional[float]
    sigma_local: Optional[float]
    transversal: bool
    regular: bool

    def to_dict(self) -> dict:
        return {"base_point": np.asarray(self.base_point).tolist(),
                "dim_tangent_A": self.tangent_A.dim,
                "dim_tangent_B": self.tangent_B.dim,
                "theta_f": self.theta_f, "gamma_local": self.gamma_local,
                "sigma_local": self.sigma_local,
                "transversal": self.transversal, "regular": self.regular}


@dataclass(frozen=True)
class RegularityConstants:
    """Regularity constants of a smooth convex pair at a boundary point.

    ``r`` is the transversality constant of the two boundaries,
    ``sin(theta_F / 2)``; ``sr`` the subtransversality constant of the sets,
    ``sin(theta_F / 2)`` (acute) or ``cos(theta_F / 2)`` (obtuse); and
    ``r_a = 1 - 2 r^2``.
    """

    sr: float
    r: float
    r_a: float
    classification: str
    theta_f: float

    def to_dict(self) -> dict:
        return {"sr": self.sr, "r": self.r, "r_a": self.r_a,
                "classification": self.classification, "theta_f": self.theta_f}


@dataclass(frozen=True)
class RegularityVerdict:
    """Outcome of ``check_regularity``; truthy when regular.

    ``partial`` is set when no analytic intersection tangent was supplied, so
    only the existence of the tangent intersection could be checked.
    """

    regular: bool
    partial: bool
    mismatch: Optional[float] = None

    def __bool__(self):
        return self.regular


def _tangents(setA, setB, x):
    return setA.tangent_space(x).subspace, setB.tangent_space(x).subspace


def tangent_gap_operator(setA: ProjectableSet, setB: ProjectableSet, x,
                         params: GapParams) -> np.ndarray:
    """GAP matrix assembled from the tangent spaces of both sets at ``x``."""
    TA, TB = _tangents(setA, setB, x)
    return assemble_gap_matrix(TA, TB, params)


def _theta_f(TA: Subspace, TB: Subspace, zero_tol=ZERO_TOL):
    if min(TA.dim, TB.dim) == 0:
        return None
    return principal_angles(TA, TB, zero_tol).friedrichs


def check_regularity(setA: ProjectableSet, setB: ProjectableSet, x,
                     intersection_tangent: Optional[Subspace] = None,
                     tol: float = 1e-8) -> RegularityVerdict:
    """Compare ``T_A(x) cap T_B(x)`` with the tangent of the intersection.

    Without ``intersection_tangent`` only the weaker statement that both
    tangent spaces (and hence their intersection) are well defined is
    checked, and the verdict is flagged partial.
    """
    x = np.asarray(x, dtype=float)
    if not (setA.contains(x, ON_SET_TOL) and setB.contains(x, ON_SET_TOL)):
        raise PreconditionError("point is not in both sets")
    try:
        TA, TB = _tangents(setA, setB, x)
    except (DegenerateManifoldError, NonsmoothPointError):
        return RegularityVerdict(False, intersection_tangent is None)
    T = intersect(TA, TB)
    if intersection_tangent is None:
        return RegularityVerdict(True, True)
    gap = float(np.linalg.norm(projector(T) - projector(intersection_tangent), 2))
    return RegularityVerdict(gap <= tol, False, gap)


def transversality_check(setA: ProjectableSet, setB: ProjectableSet, x) -> bool:
    """True when ``T_A(x) + T_B(x)`` is the whole space."""
    TA, TB = _tangents(setA, setB, x)
    M = np.hstack([TA.basis, TB.basis])
    n = TA.ambient_dim
    if M.shape[1] < n:
        return False
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > RANK_TOL * sv[0])) == n


def predicted_local_rate(setA: ProjectableSet, setB: ProjectableSet, x_star,
                         params: GapParams,
                         intersection_tangent: Optional[Subspace] = None,
                         zero_tol: float = ZERO_TOL) -> LocalRateReport:
    """Local rate predicted by the tangent GAP operator at ``x_star``."""
    params.require_valid()
    x = np.asarray(x_star, dtype=float)
    TA, TB = _tangents(setA, setB, x)
    verdict = check_regularity(setA, setB, x, intersection_tangent)
    transversal = transversality_check(setA, setB, x)
    theta_f = _theta_f(TA, TB, zero_tol)
    if not verdict:
        return LocalRateReport(x, TA, TB, theta_f, None, None, transversal, False)
    S = assemble_gap_matrix(TA, TB, params)
    gamma = subdominant_magnitude(S)
    sigma = sigma_norm(S, fixed_subspace(TA, TB, params, zero_tol))
    return LocalRateReport(x, TA, TB, theta_f, gamma, sigma, transversal, True)


def classify_intersection(setA: ProjectableSet, setB: ProjectableSet,
                          x_star) -> str:
    """``acute``, ``obtuse`` or ``tangent`` from the outward unit normals.

    Acute when ``<v1, v2> <= 0`` and obtuse when positive, except that
    ``|<v1, v2>| >= 1 - 1e-12`` (coinciding tangent lines) is reported as
    ``tangent``.
    """
    x = np.asarray(x_star, dtype=float)
    if not (setA.contains(x, ON_SET_TOL) and setB.contains(x, ON_SET_TOL)):
        raise PreconditionError("point is not in both sets")
    v1 = setA.boundary_normal(x)
    v2 = setB.boundary_normal(x)
    ip = float(v1 @ v2)
    if abs(ip) >= 1 - TANGENT_BAND:
        return TANGENT
    return ACUTE if ip <= 0 else OBTUSE


def regularity_constants(setA: ProjectableSet, setB: ProjectableSet,
                         x_star) -> RegularityConstants:
    """Regularity constants from the boundary-tangent Friedrichs angle.

    Raises
    ------
    TangentCaseError
        If the two boundaries share their tangent space at ``x_star``.
    """
    cls = classify_intersection(setA, setB, x_star)
    if cls == TANGENT:
        raise TangentCaseError("boundary tangent spaces coincide")
    TA, TB = _tangents(setA, setB, np.asarray(x_star, dtype=float))
    theta = _theta_f(TA, TB)
    if theta is None:
        raise TangentCaseError("boundary tangent spaces are nested")
    r = float(np.sin(theta / 2))
    sr = r if cls == ACUTE else float(np.cos(theta / 2))
    return RegularityConstants(sr, r, 1.0 - 2.0 * r * r, cls, float(theta))


# distance to the intersection of two catalog sets

_SOLID = (Ball, Halfspace)


def _dist_many(S, X):
    """Row-wise distance of the points X to a ball or halfspace."""
    if isinstance(S, Ball):
        return np.maximum(np.linalg.norm(X - S.center, axis=1) - S.radius, 0.0)
    return np.maximum(X @ S.a - S.b, 0.0)


def _project_many(S, X):
    if isinstance(S, Ball):
        D = X - S.center
        nd = np.linalg.norm(D, axis=1)
        scale = np.where(nd > S.radius, S.radius / np.where(nd > 0, nd, 1.0), 1.0)
        return S.center + D * scale[:, None]
    ex = np.maximum(X @ S.a - S.b, 0.0)
    return X - ex[:, None] * S.a


def _boundary_meet(A, B):
    """Describe ``bd A cap bd B`` for balls and halfspaces.

    Returns ``("sphere", c, rho, a, b)`` for a sphere of radius rho centred
    at c inside the hyperplane <a, y> = b, ``("flat", N, rhs)`` for the
    affine set N y = rhs, or None when the boundaries do not meet.
    """
    if isinstance(A, Halfspace) and isinstance(B, Halfspace):
        return ("flat", np.vstack([A.a, B.a]), np.array([A.b, B.b]))
    if isinstance(A, Ball) and isinstance(B, Ball):
        e = B.center - A.center
        dist = np.linalg.norm(e)
        if dist == 0.0:
            return None
        a = e / dist
        t = (dist * dist + A.radius ** 2 - B.radius ** 2) / (2 * dist)
        c1, r1 = A.center, A.radius
    else:
        ball, hs = (A, B) if isinstance(A, Ball) else (B, A)
        a = hs.a
        t = hs.b - a @ ball.center
        c1, r1 = ball.center, ball.radius
    if r1 * r1 - t * t < 0:
        return None
    c = c1 + t * a
    return ("sphere", c, np.sqrt(r1 * r1 - t * t), a, a @ c)


def _project_meet(meet, X):
    if meet[0] == "flat":
        _, N, rhs = meet
        corr = np.linalg.lstsq(N, (X @ N.T - rhs).T, rcond=None)[0].T
        return X - corr
    _, c, rho, a, b = meet
    Y = X - (X @ a - b)[:, None] * a
    D = Y - c
    nd = np.linalg.norm(D, axis=1)
    if np.any(nd == 0.0):
        # on the axis every point of the sphere is equally near; pick one
        e = np.zeros_like(a)
        e[np.argmin(np.abs(a))] = 1.0
        e -= (e @ a) * a
        D[nd == 0.0] = e
        nd = np.linalg.norm(D, axis=1)
    return c + rho * D / nd[:, None]


def _solid_intersection_distance(A, B, X, tol=1e-14):
    """Distances of the rows of X to A cap B for balls and halfspaces.

    The nearest point of A cap B is P_A x when that lies in B, P_B x when
    that lies in A, and otherwise lies on both boundaries.
    """
    out = np.full(X.shape[0], np.inf)
    inside = (_dist_many(A, X) == 0) & (_dist_many(B, X) == 0)
    out[inside] = 0.0
    PA = _project_many(A, X)
    ok = _dist_many(B, PA) <= tol
    out = np.where(ok, np.minimum(out, np.linalg.norm(X - PA, axis=1)), out)
    PB = _project_many(B, X)
    ok = _dist_many(A, PB) <= tol
    out = np.where(ok, np.minimum(out, np.linalg.norm(X - PB, axis=1)), out)
    meet = _boundary_meet(A, B)
    if meet is not None:
        out = np.minimum(out, np.linalg.norm(X - _project_meet(meet, X), axis=1))
    if not np.all(np.isfinite(out)):
        raise PreconditionError("sets do not intersect")
    return out


def _same_set(A, B):
    if A is B:
        return True
    try:
        return A.to_dict() == B.to_dict()
    except NotImplementedError:
        return False


def intersection_distance(setA: ProjectableSet, setB: ProjectableSet, x) -> float:
    """Distance from ``x`` to ``A cap B`` for supported catalog pairs.

    Supported: identical sets, pairs of linear subspaces, and pairs of balls
    and halfspaces.

    Raises
    ------
    PreconditionError
        For unsupported pairs.
    """
    x = np.asarray(x, dtype=float)
    return float(_intersection_distances(setA, setB, x[None, :])[0])


def _intersection_distances(setA, setB, X):
    if _same_set(setA, setB):
        return np.array([setA.distance(x) for x in X])
    if isinstance(setA, LinearSubspace) and isinstance(setB, LinearSubspace):
        I = intersect(setA.subspace, setB.subspace)
        return np.linalg.norm(X - (X @ I.basis) @ I.basis.T, axis=1)
    if isinstance(setA, _SOLID) and isinstance(setB, _SOLID):
        return _solid_intersection_distance(setA, setB, X)
    raise PreconditionError(
        f"no intersection projection for {type(setA).__name__} and "
        f"{type(setB).__name__}")


def _distances(S, X):
    if isinstance(S, _SOLID):
        return _dist_many(S, X)
    return np.array([S.distance(x) for x in X])


def empirical_sr(setA: ProjectableSet, setB: ProjectableSet, x_star,
                 radius: float, samples: int, seed=0,
                 min_dist: float = 1e-12) -> float:
    """Smallest ``max(d_A, d_B) / d_{A cap B}`` over uniform samples in a ball.

    Samples with ``d_{A cap B} < min_dist`` are skipped.

    Raises
    ------
    InsufficientDataError
        If no sample is usable.
    """
    x0 = np.asarray(x_star, dtype=float)
    n = x0.size
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * rng.random(samples) ** (1.0 / n)
    X = x0 + g * rad[:, None]
    dab = _intersection_distances(setA, setB, X)
    keep = dab >= min_dist
    if not np.any(keep):
        raise InsufficientDataError("no sample outside the intersection")
    worst = np.maximum(_distances(setA, X[keep]), _distances(setB, X[keep]))
    return float(np.min(worst / dab[keep]))
