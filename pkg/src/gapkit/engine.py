"""The GAP iteration ``x <- (1 - a) x + a P_A^{a2} P_B^{a1} x``.

Ordering convention: set B is projected onto first (with ``alpha1``) and set A
second (with ``alpha2``). For subspaces this is ``S = (1 - a) I + a P_U^{a2}
P_V^{a1}`` with A = U and B = V.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import InsufficientDataError, ProjectionError
from .params import AP, GapParams, classify_params
from .sets import ProjectableSet

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000

TOLERANCE = "tolerance"
MAX_ITER = "max_iter"
FINITE = "finite_identification"

__all__ = ["GapParams", "classify_params", "IterationTrace", "RateFit",
           "gap_step", "run", "estimate_rate", "adaptive_theta_run"]


@dataclass
class IterationTrace:
    """Record of a GAP run.

    Attributes
    ----------
    iterates : list of ndarray
        ``x_0, x_1, ...``.
    face_labels : list
        ``face_labels[k]`` is the pair (label of the B projection, label of
        the A projection) of the step that produced ``x_k``; None for ``x_0``.
    dist_A, dist_B : list of float
        Distances of each iterate to the two sets.
    distances_to_solution : list of float or None
        ``|x_k - x*|`` once a reference solution is attached.
    converged : bool
    stop_reason : str
        ``tolerance``, ``max_iter`` or ``finite_identification``.
    """

    iterates: List[np.ndarray]
    face_labels: List[Optional[Tuple[str, str]]]
    dist_A: List[float]
    dist_B: List[float]
    converged: bool = False
    stop_reason: str = MAX_ITER
    distances_to_solution: Optional[List[float]] = None
    params_history: Optional[List[GapParams]] = field(default=None, repr=False)

    def __len__(self):
        return len(self.iterates)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def with_reference(self, reference) -> "IterationTrace":
        """Fill ``distances_to_solution`` against ``reference``."""
        ref = np.asarray(reference, dtype=float)
        X = np.asarray(self.iterates)
        self.distances_to_solution = list(np.linalg.norm(X - ref, axis=1))
        return self


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of ``log |x_k - x*|`` against k.

    ``residual`` is the RMS deviation of the log-distances from the line.
    """

    rate: float
    window: Tuple[int, int]
    residual: float
    samples_used: int


def _step(setA: ProjectableSet, setB: ProjectableSet, params: GapParams, x):
    """One GAP step; also returns B's projection (for d_B) and face labels."""
    pb, fb = setB.project_with_face(x)
    y = (1 - params.alpha1) * x + params.alpha1 * pb
    pa, fa = setA.project_with_face(y)
    z = (1 - params.alpha2) * y + params.alpha2 * pa
    return (1 - params.alpha) * x + params.alpha * z, pb, (fb, fa)


def gap_step(setA: ProjectableSet, setB: ProjectableSet, params: GapParams,
             x) -> np.ndarray:
    """Apply ``(1 - a) I + a P_A^{a2} P_B^{a1}`` to ``x``.

    Raises
    ------
    InvalidParametersError
        If ``params`` is outside cases B1-B3.
    """
    params.require_valid()
    x = np.asarray(x, dtype=float)
    return _step(setA, setB, params, x)[0]


def _run(setA, setB, params_fn, x0, tol, max_iter, hook=None):
    x = np.array(x0).ravel()
    if x.dtype != object:
        x = x.astype(float)
    iterates, labels, dA, dB = [x], [None], [], []
    history = []
    trace = IterationTrace(iterates, labels, dA, dB, params_history=history)
    try:
        dB.append(setB.distance(x))
        dA.append(setA.distance(x))
        k = 0
        while True:
            worst = max(dA[-1], dB[-1])
            if worst == 0.0 and k > 0:
                trace.converged, trace.stop_reason = True, FINITE
                break
            if worst <= tol:
                trace.converged, trace.stop_reason = True, TOLERANCE
                break
            if k >= max_iter:
                trace.stop_reason = MAX_ITER
                break
            params = params_fn(k)
            history.append(params)
            x_new, _, lab = _step(setA, setB, params, x)
            if hook is not None:
                hook(k, x, params)
            x = x_new
            k += 1
            iterates.append(x)
            labels.append(lab)
            dB.append(setB.distance(x))
            dA.append(setA.distance(x))
    except ProjectionError as exc:
        exc.trace = trace
        raise
    return trace


def run(setA: ProjectableSet, setB: ProjectableSet, params: GapParams, x0,
        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
        reference=None) -> IterationTrace:
    """Iterate GAP from ``x0`` until ``max(d_A, d_B) <= tol`` or ``max_iter``.

    A run stops with ``finite_identification`` when an iterate after x_0 lies
    exactly in both sets. On a projection failure the partial trace is
    attached to the raised exception as ``exc.trace``.
    """
    params.require_valid()
    trace = _run(setA, setB, lambda k: params, x0, tol, max_iter)
    if reference is not None:
        trace.with_reference(reference)
    return trace


def estimate_rate(trace: IterationTrace, reference=None,
                  window_fraction: float = 0.5,
                  min_samples: int = 10) -> RateFit:
    """Fit a linear rate to ``|x_k - reference|``.

    Only the leading run of distances above ``10 eps |reference|`` is used;
    the fit covers the trailing ``window_fraction`` of that run.

    Raises
    ------
    InsufficientDataError
        If fewer than ``min_samples`` usable iterates remain.
    """
    if reference is None:
        if trace.distances_to_solution is None:
            raise InsufficientDataError("no reference solution available")
        d = np.asarray(trace.distances_to_solution, dtype=float)
        ref_norm = np.linalg.norm(trace.iterates[-1])
    else:
        ref = np.asarray(reference, dtype=float)
        d = np.linalg.norm(np.asarray(trace.iterates) - ref, axis=1)
        ref_norm = np.linalg.norm(ref)
    floor = 10 * np.finfo(float).eps * ref_norm
    bad = np.flatnonzero(~(d > floor))
    n_ok = int(bad[0]) if bad.size else d.size
    if n_ok < min_samples:
        raise InsufficientDataError(
            f"only {n_ok} usable iterates (need {min_samples})")
    w = max(2, int(np.ceil(window_fraction * n_ok)))
    k = np.arange(n_ok - w, n_ok)
    logd = np.log(d[k])
    slope, icpt = np.polyfit(k, logd, 1)
    resid = float(np.sqrt(np.mean((logd - (slope * k + icpt)) ** 2)))
    return RateFit(float(np.exp(slope)), (int(k[0]), int(k[-1])), resid, int(w))


def adaptive_theta_run(setA: ProjectableSet, setB: ProjectableSet, x0,
                       tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER,
                       zero_tol: float = 1e-12, freeze_tol: float = 1e-8):
    """GAP with parameters re-tuned every step from an angle estimate.

    At iterate x with current parameters, ``y = P_B^{a1} x``,
    ``v1 = y - x`` and ``v2 = y - P_A^{a2} y``. The estimate is the angle
    between the lines spanned by v1 and v2, and the next step uses
    ``optimal_params`` of it. The first step uses plain alternating
    projections. Once v1 or v2 drops to ``freeze_tol * |x|`` (or
    vanishes), estimation stops and the current parameters are kept: below
    that size rounding in v1 and v2 dominates the angle.

    Returns
    -------
    trace : IterationTrace
    thetas : list of float
    """
    from .spectral import optimal_params

    thetas: List[float] = []
    state = {"params": AP, "active": True}

    def hook(k, x, params):
        if not state["active"]:
            return
        y = setB.relaxed_project(x, params.alpha1)
        v1 = y - x
        v2 = y - setA.relaxed_project(y, params.alpha2)
        n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
        if min(n1, n2) <= freeze_tol * np.linalg.norm(x):
            state["active"] = False
            return
        c = min(1.0, abs(v1 @ v2) / (n1 * n2))
        theta = float(np.arccos(c))
        thetas.append(theta)
        if theta > zero_tol:
            state["params"] = optimal_params(theta).params

    trace = _run(setA, setB, lambda k: state["params"], x0, tol, max_iter, hook)
    return trace, thetas
