"""Dense subspace geometry: bases, projectors and principal angles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError

ZERO_TOL = 1e-8
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of R^n stored through an orthonormal basis.

    Parameters
    ----------
    basis : ndarray, shape (n, k)
        Matrix with orthonormal columns. ``k`` may be zero.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] < 1:
            raise PreconditionError("basis must be an n x k matrix with n >= 1")
        if b.shape[1] > b.shape[0]:
            raise PreconditionError("a subspace of R^n has at most n basis vectors")
        if b.shape[1] and np.max(np.abs(b.T @ b - np.eye(b.shape[1]))) > 1e-12:
            raise PreconditionError("basis columns are not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def trivial(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    def complement(self) -> "Subspace":
        """Orthogonal complement in R^n."""
        n, k = self.basis.shape
        if k == 0:
            return Subspace.full(n)
        u, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(np.ascontiguousarray(u[:, k:]))

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.basis @ (self.basis.T @ x)


@dataclass(frozen=True)
class PrincipalAngleSet:
    """Principal angles between two subspaces.

    Attributes
    ----------
    angles : ndarray
        Nondecreasing angles in [0, pi/2], one per dimension of the smaller
        subspace.
    intersection_dim : int
        Number of angles at or below the zero tolerance.
    friedrichs : float or None
        First angle above the zero tolerance; None when there is none.
    """

    angles: np.ndarray
    intersection_dim: int
    friedrichs: Optional[float] = field(default=None)


def orthonormalize(vectors, rank_tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis of the column space of ``vectors``.

    Rank is decided by singular values above ``rank_tol`` times the largest.
    """
    a = np.asarray(vectors, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    n = a.shape[0]
    if n < 1:
        raise PreconditionError("ambient dimension must be at least 1")
    if a.shape[1] == 0:
        return Subspace.trivial(n)
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    if sv[0] == 0.0:
        return Subspace.trivial(n)
    r = int(np.sum(sv > rank_tol * sv[0]))
    return Subspace(np.ascontiguousarray(u[:, :r]))


def projector(U: Subspace) -> np.ndarray:
    """Orthogonal projector ``B B^T`` onto ``U``."""
    return U.basis @ U.basis.T


def _check_pair(U: Subspace, V: Subspace):
    if U.ambient_dim != V.ambient_dim:
        raise PreconditionError(
            f"ambient dimensions differ ({U.ambient_dim} vs {V.ambient_dim})")


def _angle_decomposition(U: Subspace, V: Subspace):
    """Angles plus the principal vectors in the smaller subspace.

    Cosines come from the SVD of X^T Y and sines from the SVD of the residual
    (I - Y Y^T) X, X being the smaller basis. Small angles are taken from the
    sines so that nearly shared directions are resolved to machine precision.
    """
    X, Y = (U.basis, V.basis) if U.dim <= V.dim else (V.basis, U.basis)
    k = X.shape[1]
    cos = np.clip(np.linalg.svd(X.T @ Y, compute_uv=False)[:k], 0.0, 1.0)
    resid = X - Y @ (Y.T @ X)
    _, sin, vt = np.linalg.svd(resid, full_matrices=False)
    # svd sorts descending; reverse so sines (and angles) ascend
    sin = np.clip(sin[::-1], 0.0, 1.0)
    vt = vt[::-1]
    angles = np.where(sin < np.sqrt(0.5), np.arcsin(sin), np.arccos(cos))
    angles = np.maximum.accumulate(angles)
    return angles, X, vt


def principal_angles(U: Subspace, V: Subspace,
                     zero_tol: float = ZERO_TOL) -> PrincipalAngleSet:
    """Principal angles between ``U`` and ``V``.

    Raises
    ------
    PreconditionError
        If the ambient dimensions differ or either subspace is trivial.
    """
    _check_pair(U, V)
    if min(U.dim, V.dim) < 1:
        raise PreconditionError("both subspaces need dimension >= 1")
    angles, _, _ = _angle_decomposition(U, V)
    s = int(np.sum(angles <= zero_tol))
    theta_f = float(angles[s]) if s < angles.size else None
    angles.setflags(write=False)
    return PrincipalAngleSet(angles, s, theta_f)


def friedrichs_cosine(U: Subspace, V: Subspace,
                      zero_tol: float = ZERO_TOL) -> Optional[float]:
    """Cosine of the Friedrichs angle, or None when it is undefined."""
    pa = principal_angles(U, V, zero_tol)
    return None if pa.friedrichs is None else float(np.cos(pa.friedrichs))


def intersect(U: Subspace, V: Subspace, zero_tol: float = ZERO_TOL) -> Subspace:
    """Intersection of two subspaces.

    Spanned by the principal vectors whose angle is at most ``zero_tol``.
    """
    _check_pair(U, V)
    n = U.ambient_dim
    if min(U.dim, V.dim) == 0:
        return Subspace.trivial(n)
    angles, X, vt = _angle_decomposition(U, V)
    s = int(np.sum(angles <= zero_tol))
    if s == 0:
        return Subspace.trivial(n)
    return orthonormalize(X @ vt[:s].T)


def random_orthogonal(n: int, seed) -> np.ndarray:
    """Seeded Haar-distributed orthogonal matrix (QR with sign fix)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def construct_pair_with_angles(n: int, p: int, q: int, angles: Sequence[float],
                               seed=0, zero_tol: float = ZERO_TOL):
    """Random pair (U, V) with dim U = p, dim V = q and given principal angles.

    The pair is the canonical cosine/sine block configuration rotated by a
    seeded orthogonal matrix D. Each nonzero angle uses one extra direction
    of D, so the construction needs ``p + q - s <= n`` where ``s`` is the
    number of zero angles. When ``p > q`` the roles are swapped internally.

    Returns
    -------
    (Subspace, Subspace)
    """
    if p > q:
        V, U = construct_pair_with_angles(n, q, p, angles, seed, zero_tol)
        return U, V
    th = np.asarray(angles, dtype=float).ravel()
    if p < 0 or n < 1:
        raise PreconditionError("dimensions must satisfy n >= 1, p, q >= 0")
    if th.size != p:
        raise PreconditionError(f"expected {p} angles, got {th.size}")
    if np.any(th < 0) or np.any(th > np.pi / 2 + 1e-15) or np.any(np.diff(th) < 0):
        raise PreconditionError("angles must be nondecreasing in [0, pi/2]")
    nonzero = th > zero_tol
    m = int(np.sum(nonzero))
    if p + m + (q - p) > n:
        raise PreconditionError(
            f"p + q - s = {p + q - (p - m)} exceeds ambient dimension {n}")
    D = random_orthogonal(n, seed)
    Ub = D[:, :p]
    Vcols = []
    extra = p
    for i in range(p):
        if nonzero[i]:
            Vcols.append(np.cos(th[i]) * D[:, i] + np.sin(th[i]) * D[:, extra])
            extra += 1
        else:
            Vcols.append(D[:, i])
    Vcols.extend(D[:, extra + j] for j in range(q - p))
    Vb = np.column_stack(Vcols) if Vcols else np.zeros((n, 0))
    # re-orthonormalize to remove rounding in the cos/sin combinations
    Vb, r = np.linalg.qr(Vb) if q else (Vb, None)
    if q:
        Vb = Vb * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    return Subspace(np.ascontiguousarray(Ub)), Subspace(np.ascontiguousarray(Vb))
