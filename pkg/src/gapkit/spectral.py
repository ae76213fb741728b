"""Spectral theory of the GAP operator on a pair of subspaces.

With ``T = P_U^{a2} P_V^{a1}`` every principal angle theta contributes a
2x2 block

    [[1 - a1 sin^2, a1 cos sin], [a1 (1 - a2) cos sin, (1 - a2)(1 - a1 cos^2)]]

whose eigenvalues are ``f +- g`` with
``f = (2 - a1 - a2 + a1 a2 cos^2) / 2`` and ``g = sqrt(f^2 - (1 - a1)(1 - a2))``.
The remaining eigenvalues of T are 1, ``(1 - a1)(1 - a2)``, ``1 - a2`` and
``1 - a1`` with multiplicities fixed by the dimensions. ``S = (1 - a) I + a T``
maps each eigenvalue ``lam`` to ``1 + a (lam - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import (DomainError, InconsistencyError, NotConvergentError,
                     PreconditionError)
from .params import B3, GapParams
from .subspaces import (ZERO_TOL, PrincipalAngleSet, Subspace, intersect,
                        orthonormalize, principal_angles, projector)

ONE_TOL = 1e-9


@dataclass(frozen=True)
class OptimalChoice:
    """Optimal relaxation ``alpha* = 2 / (1 + sin theta_F)`` and its rate."""

    alpha_star: float
    gamma_star: float
    params: GapParams


@dataclass(frozen=True)
class SpectralReport:
    """Summary of the spectrum of a GAP operator.

    Attributes
    ----------
    eigenvalues : ndarray of complex
        Eigenvalues of S predicted by the block formulas.
    gamma : float
        Subdominant magnitude of S.
    sigma : float
        ``|S - S^inf|``.
    lambda3 : float
        ``1 - alpha2`` (``1 - alpha1`` when dim U > dim V).
    lambda4 : float
        ``(1 - alpha1)(1 - alpha2)``.
    fixed_multiplicity : int
        Multiplicity of the eigenvalue 1.
    """

    eigenvalues: np.ndarray
    gamma: float
    sigma: float
    lambda3: float
    lambda4: float
    fixed_multiplicity: int
    theta_f: Optional[float] = None
    optimal: Optional[OptimalChoice] = field(default=None)

    def to_dict(self) -> dict:
        ev = self.eigenvalues
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in ev],
            "gamma": self.gamma, "sigma": self.sigma,
            "lambda3": self.lambda3, "lambda4": self.lambda4,
            "fixed_multiplicity": self.fixed_multiplicity,
            "theta_f": self.theta_f,
            "optimal": None if self.optimal is None else {
                "alpha_star": self.optimal.alpha_star,
                "gamma_star": self.optimal.gamma_star},
        }


def t_block(theta: float, alpha1: float, alpha2: float) -> np.ndarray:
    """The 2x2 block of ``P_U^{a2} P_V^{a1}`` for one principal angle."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [1 - alpha1 * s * s, alpha1 * c * s],
        [alpha1 * (1 - alpha2) * c * s, (1 - alpha2) * (1 - alpha1 * c * c)],
    ])


def block_eigenvalues(theta: float, alpha1: float,
                      alpha2: float) -> Tuple[complex, complex]:
    """Closed-form eigenvalues ``f + g, f - g`` of one angle block."""
    if not 0.0 <= theta <= np.pi / 2 + 1e-15:
        raise PreconditionError("theta must lie in [0, pi/2]")
    c2 = np.cos(theta) ** 2
    f = 0.5 * (2 - alpha1 - alpha2 + alpha1 * alpha2 * c2)
    prod = (1 - alpha1) * (1 - alpha2)
    disc = f * f - prod
    # f is a cancelling sum of O(1) terms, so its absolute error is about
    # eps * scale; a discriminant within the induced error is a double root,
    # and the square root would otherwise inflate that noise to ~1e-9
    scale = 0.5 * (2 + alpha1 + alpha2 + alpha1 * alpha2 * c2)
    eps = np.finfo(float).eps
    if abs(disc) <= 8 * eps * (2 * abs(f) * scale + f * f + abs(prod)):
        disc = 0.0
    g = np.sqrt(complex(disc))
    return complex(f + g), complex(f - g)


def _angle_array(angles) -> np.ndarray:
    if isinstance(angles, PrincipalAngleSet):
        return np.asarray(angles.angles, dtype=float)
    return np.asarray(angles, dtype=float).ravel()


def full_spectrum(n: int, p: int, q: int, s: int, angles, alpha1: float,
                  alpha2: float) -> np.ndarray:
    """Eigenvalues of ``T = P_U^{a2} P_V^{a1}`` as a length-n complex array.

    ``angles`` holds all ``min(p, q)`` principal angles, the first ``s`` of
    which are zero.

    Raises
    ------
    PreconditionError
        If the dimensions are inconsistent, including ``s + n - p - q < 0``.
    """
    th = _angle_array(angles)
    k = min(p, q)
    if min(n, p, q, s) < 0 or max(p, q) > n or s > k:
        raise PreconditionError("need 0 <= s <= min(p, q) and p, q <= n")
    if th.size != k:
        raise PreconditionError(f"expected {k} angles, got {th.size}")
    m4 = s + n - p - q
    if m4 < 0:
        raise PreconditionError(f"s + n - p - q = {m4} is negative")
    ev = [1.0] * s
    ev += [(1 - alpha1) * (1 - alpha2)] * m4
    ev += [1 - alpha2] * max(0, q - p)
    ev += [1 - alpha1] * max(0, p - q)
    for t in th[s:]:
        ev.extend(block_eigenvalues(float(t), alpha1, alpha2))
    out = np.array(ev, dtype=complex)
    assert out.size == n
    return out


def gap_spectrum(n, p, q, s, angles, params: GapParams) -> np.ndarray:
    """Eigenvalues of ``S = (1 - a) I + a T``."""
    lam = full_spectrum(n, p, q, s, angles, params.alpha1, params.alpha2)
    return 1 + params.alpha * (lam - 1)


def assemble_gap_matrix(U: Subspace, V: Subspace,
                        params: GapParams) -> np.ndarray:
    """Dense ``S = (1 - a) I + a P_U^{a2} P_V^{a1}``."""
    if U.ambient_dim != V.ambient_dim:
        raise PreconditionError("ambient dimensions differ")
    n = U.ambient_dim
    I = np.eye(n)
    a, a1, a2 = params.alpha, params.alpha1, params.alpha2
    RU = (1 - a2) * I + a2 * projector(U)
    RV = (1 - a1) * I + a1 * projector(V)
    return (1 - a) * I + a * (RU @ RV)


def subdominant_magnitude(matrix, one_tol: float = ONE_TOL) -> float:
    """Largest eigenvalue modulus after discarding eigenvalue 1.

    Returns 0 when every eigenvalue equals 1.

    Raises
    ------
    NotConvergentError
        If the spectral radius exceeds ``1 + one_tol``.
    """
    ev = np.linalg.eigvals(np.atleast_2d(np.asarray(matrix, dtype=float)))
    return _subdominant(ev, one_tol)


def _subdominant(ev, one_tol=ONE_TOL) -> float:
    mod = np.abs(ev)
    if mod.size and mod.max() > 1 + one_tol:
        raise NotConvergentError(f"spectral radius {mod.max():.6g} exceeds 1")
    rest = mod[np.abs(ev - 1) > one_tol]
    return float(rest.max()) if rest.size else 0.0


def fixed_subspace(U: Subspace, V: Subspace, params: GapParams,
                   zero_tol: float = ZERO_TOL) -> Subspace:
    """Fixed-point subspace of S.

    ``U cap V`` in cases B1/B2; in case B3 also ``U^perp cap V^perp``.
    """
    fix = intersect(U, V, zero_tol)
    if params.case == B3:
        comp = intersect(U.complement(), V.complement(), zero_tol)
        fix = orthonormalize(np.hstack([fix.basis, comp.basis]))
    return fix


def sigma_norm(S, fix_subspace: Subspace, fix_tol: float = 1e-8) -> float:
    """Spectral norm of ``S - P_fix``.

    Raises
    ------
    InconsistencyError
        If ``fix_subspace`` is not pointwise fixed by S.
    """
    S = np.asarray(S, dtype=float)
    B = fix_subspace.basis
    if B.shape[1] and np.linalg.norm(S @ B - B, 2) > fix_tol:
        raise InconsistencyError("supplied subspace is not fixed by S")
    return float(np.linalg.norm(S - projector(fix_subspace), 2))


def _matrix_limit(M, max_squarings: int = 200, tol: float = 1e-15):
    """``lim M^k`` by repeated squaring."""
    P = np.array(M, dtype=float)
    for _ in range(max_squarings):
        P2 = P @ P
        if np.max(np.abs(P2 - P)) <= tol:
            return P2
        P = P2
    return P


def sigma_block_bound(n: int, p: int, q: int, s: int, angles,
                      params: GapParams) -> float:
    """Upper bound on sigma(S) assembled from the canonical blocks.

    Combines ``|S_i - S_i^inf|`` over the angle blocks with the scalar
    blocks ``1 - a a2`` (or ``1 - a a1`` when p > q), the block carrying
    ``1 - a + a (1 - a1)(1 - a2)`` (zero when it is fixed) and ``|1 - a|``.
    """
    th = _angle_array(angles)
    a, a1, a2 = params.alpha, params.alpha1, params.alpha2
    terms = [abs(1 - a)]
    I2 = np.eye(2)
    for t in th[s:]:
        Si = (1 - a) * I2 + a * t_block(float(t), a1, a2)
        terms.append(np.linalg.norm(Si - _matrix_limit(Si), 2))
    if q > p:
        terms.append(abs(1 - a * a2))
    if p > q:
        terms.append(abs(1 - a * a1))
    if s + n - p - q > 0:
        v = 1 - a + a * (1 - a1) * (1 - a2)
        terms.append(0.0 if abs(v - 1) <= ONE_TOL else abs(v))
    return float(max(terms))


def optimal_params(theta_f: Optional[float]) -> OptimalChoice:
    """Optimal ``(1, a*, a*)`` for Friedrichs angle ``theta_f``.

    With no Friedrichs angle the convention ``a* = 1, gamma* = 0`` applies.
    """
    if theta_f is None:
        return OptimalChoice(1.0, 0.0, GapParams(1.0, 1.0, 1.0))
    if not 0.0 < theta_f <= np.pi / 2 + 1e-15:
        raise DomainError("theta_f must lie in (0, pi/2]")
    sn = np.sin(theta_f)
    a_star = 2.0 / (1.0 + sn)
    g_star = (1.0 - sn) / (1.0 + sn)
    return OptimalChoice(a_star, g_star, GapParams(1.0, a_star, a_star))


def _check_kappa(kappa: float):
    if not kappa >= np.sqrt(2.0) * (1 - 1e-15):
        raise DomainError(f"kappa must be at least sqrt(2), got {kappa}")


def kappa_to_params(kappa: float) -> GapParams:
    """``(1, a, a)`` with ``a = 2 (kappa / (sqrt(kappa^2 - 1) + 1))^2``."""
    _check_kappa(kappa)
    r = np.sqrt(max(kappa * kappa - 1.0, 1.0))
    a = 2.0 * (kappa / (r + 1.0)) ** 2
    return GapParams(1.0, a, a)


def kappa_rate(kappa: float) -> float:
    """``((sqrt(kappa^2 - 1) - 1) / (sqrt(kappa^2 - 1) + 1))^2``."""
    _check_kappa(kappa)
    r = np.sqrt(max(kappa * kappa - 1.0, 1.0))
    return float(((r - 1.0) / (r + 1.0)) ** 2)


def trdet_oracle(theta_f: float, alpha1: float,
                 alpha2: float) -> Tuple[float, float]:
    """Trace and determinant of ``M = (2 - a*) I + (a*/a1)(T_F - I)``.

    ``T_F`` is the angle block at ``theta_f`` and ``a*`` the optimal
    relaxation for ``theta_f``.
    """
    if not 0.0 < theta_f < np.pi / 2:
        raise DomainError("theta_f must lie in (0, pi/2)")
    if not alpha1 > 0:
        raise DomainError("alpha1 must be positive")
    s, c = np.sin(theta_f), np.cos(theta_f)
    a1, a2 = alpha1, alpha2
    tr = 2.0 / ((1 + s) * a1) * (-a1 - a2 + a1 * a2 * c * c + 2 * a1 * s)
    det = 4 * s * (1 - s) / (a1 * (1 + s) ** 2) * (-a1 - a2 + a1 * a2 * (1 + s))
    return float(tr), float(det)


def spectral_report(U: Subspace, V: Subspace, params: GapParams,
                    zero_tol: float = ZERO_TOL) -> SpectralReport:
    """Predicted spectrum plus numeric gamma and sigma for a subspace pair."""
    params.require_valid()
    n, p, q = U.ambient_dim, U.dim, V.dim
    S = assemble_gap_matrix(U, V, params)
    if min(p, q) == 0:
        ev = np.linalg.eigvals(S)
        theta_f = None
    else:
        pa = principal_angles(U, V, zero_tol)
        ev = gap_spectrum(n, p, q, pa.intersection_dim, pa, params)
        theta_f = pa.friedrichs
    ev = _order(ev)
    gamma = subdominant_magnitude(S)
    sigma = sigma_norm(S, fixed_subspace(U, V, params, zero_tol))
    lambda3 = 1 - params.alpha1 if p > q else 1 - params.alpha2
    lambda4 = (1 - params.alpha1) * (1 - params.alpha2)
    fixed = int(np.sum(np.abs(ev - 1) <= ONE_TOL))
    return SpectralReport(ev, gamma, sigma, lambda3, lambda4, fixed, theta_f,
                          optimal_params(theta_f))


def _order(ev) -> np.ndarray:
    """Sort by descending modulus, nonnegative imaginary part first in ties."""
    ev = np.asarray(ev, dtype=complex)
    idx = np.lexsort((-ev.imag, -np.round(np.abs(ev), 12)))
    return ev[idx]


def match_multisets(a, b) -> float:
    """Largest distance under the optimal one-to-one matching of two multisets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        return np.inf
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if a.size else 0.0
