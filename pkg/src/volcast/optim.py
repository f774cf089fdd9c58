"""
Derivative-free minimization and finite-difference tools.

The estimators in :mod:`volcast.arma` and :mod:`volcast.garch` minimize
negative log-likelihoods whose parameters carry sign constraints.  Rather than
penalizing infeasible points, each coordinate is mapped through a smooth
bijection onto its feasible set and a Nelder-Mead simplex searches the
unconstrained space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import linalg

from volcast.exceptions import NumericalError

__all__ = [
    "ObjectiveSpec",
    "OptimResult",
    "NotPositiveDefiniteError",
    "minimize",
    "numerical_gradient",
    "numerical_hessian",
    "invert_spd",
]

Transform = Literal["identity", "log", "softplus"]

BOUNDARY_TOL = 1e-8


class NotPositiveDefiniteError(NumericalError):
    """Raised by :func:`invert_spd` when the Cholesky factorization fails."""


def _softplus(u: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, u)


def _softplus_inv(x: np.ndarray) -> np.ndarray:
    # log(exp(x) - 1) written to stay accurate for both tiny and large x
    with np.errstate(divide="ignore"):
        return x + np.log(-np.expm1(-x))


@dataclass(frozen=True)
class ObjectiveSpec:
    """
    A function to minimize together with per-coordinate transforms.

    Parameters
    ----------
    func : callable
        Maps a point in *constrained* coordinates to a real value.
    transforms : sequence of {"identity", "log", "softplus"}
        ``"log"`` maps the real line onto ``(0, inf)`` through ``exp``;
        ``"softplus"`` maps it onto ``(0, inf)`` through ``log(1 + exp(u))``,
        which is linear for large ``u`` and lets the value approach zero
        smoothly.
    """

    func: Callable[[np.ndarray], float]
    transforms: tuple[Transform, ...]

    def __post_init__(self) -> None:
        bad = [t for t in self.transforms if t not in ("identity", "log", "softplus")]
        if bad:
            raise ValueError(f"unknown transform(s): {bad}")
        object.__setattr__(self, "transforms", tuple(self.transforms))

    @property
    def dimension(self) -> int:
        return len(self.transforms)

    def to_constrained(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        x = u.copy()
        for i, t in enumerate(self.transforms):
            if t == "log":
                x[i] = np.exp(u[i])
            elif t == "softplus":
                x[i] = _softplus(u[i])
        return x

    def to_unconstrained(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = x.copy()
        for i, t in enumerate(self.transforms):
            if t == "identity":
                continue
            if not x[i] > 0:
                raise ValueError(
                    f"coordinate {i} must be strictly positive for a {t} transform, got {x[i]!r}"
                )
            u[i] = np.log(x[i]) if t == "log" else _softplus_inv(x[i])
        return u

    def unconstrained_objective(self, u: np.ndarray) -> float:
        return float(self.func(self.to_constrained(u)))


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fun: float
    iterations: int
    n_evals: int
    converged: bool
    message: str
    at_boundary: tuple[bool, ...] = field(default=())
    x_unconstrained: np.ndarray | None = None


def _initial_simplex(u0: np.ndarray) -> np.ndarray:
    n = u0.size
    sim = np.empty((n + 1, n))
    sim[0] = u0
    for k in range(n):
        v = u0.copy()
        v[k] = v[k] * 1.05 if v[k] != 0 else 0.00025
        sim[k + 1] = v
    return sim


def _nelder_mead(fun, u0, f_tol, x_tol, max_iter):
    n = u0.size
    n_evals = 0

    def f(u):
        nonlocal n_evals
        n_evals += 1
        val = fun(u)
        return val if np.isfinite(val) else np.inf

    sim = _initial_simplex(u0)
    fsim = np.array([f(v) for v in sim])
    order = np.argsort(fsim, kind="stable")
    sim, fsim = sim[order], fsim[order]

    it = 0
    converged = False
    while it < max_iter:
        f_spread = np.max(np.abs(fsim[1:] - fsim[0]))
        x_spread = np.max(np.abs(sim[1:] - sim[0]))
        if f_spread <= f_tol * max(1.0, abs(fsim[0])) and x_spread <= x_tol:
            converged = True
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + (centroid - worst)
        fr = f(xr)
        shrink = False
        if fr < fsim[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = f(xe)
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                sim[-1], fsim[-1] = xc, fc
            else:
                shrink = True
        else:
            xcc = centroid + 0.5 * (worst - centroid)
            fcc = f(xcc)
            if fcc < fsim[-1]:
                sim[-1], fsim[-1] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for k in range(1, n + 1):
                sim[k] = sim[0] + 0.5 * (sim[k] - sim[0])
                fsim[k] = f(sim[k])

        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]

    return sim[0].copy(), float(fsim[0]), it, n_evals, converged


def minimize(
    objective: ObjectiveSpec,
    start: Sequence[float],
    f_tol: float = 1e-10,
    x_tol: float = 1e-8,
    max_iter: int | None = None,
) -> OptimResult:
    """
    Minimize ``objective.func`` with a Nelder-Mead simplex in unconstrained space.

    The simplex uses the standard reflection, expansion, contraction and shrink
    coefficients (1, 2, 0.5, 0.5).  A pass stops once the spread of function
    values over the simplex is below ``f_tol * max(1, |f_best|)`` and the
    spread of the vertices is below ``x_tol``, or after ``max_iter`` iterations.
    A second pass is always started from the best vertex with a fresh simplex;
    the reported ``converged`` flag refers to that final pass.

    Parameters
    ----------
    objective : ObjectiveSpec
    start : array_like
        Starting point in constrained coordinates.
    f_tol, x_tol : float
        Relative function-value and absolute vertex tolerances.
    max_iter : int, optional
        Iteration budget per pass; defaults to ``5000 * dimension``.

    Returns
    -------
    OptimResult
    """
    start = np.asarray(start, dtype=float)
    if start.shape != (objective.dimension,):
        raise ValueError(
            f"start has shape {start.shape}, expected ({objective.dimension},)"
        )
    u0 = objective.to_unconstrained(start)
    f0 = objective.unconstrained_objective(u0)
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at the start point")
    if max_iter is None:
        max_iter = 5000 * objective.dimension

    fun = objective.unconstrained_objective
    u1, f1, it1, ne1, conv1 = _nelder_mead(fun, u0, f_tol, x_tol, max_iter)
    u2, f2, it2, ne2, conv2 = _nelder_mead(fun, u1, f_tol, x_tol, max_iter)
    if f2 > f1:
        u2, f2 = u1, f1
    if f2 > f0:  # cannot happen, the start vertex is part of the first simplex
        u2, f2 = u0, f0

    if conv2:
        message = "simplex spread below tolerance"
    else:
        message = f"iteration budget of {max_iter} exhausted after restart"

    x = objective.to_constrained(u2)
    at_boundary = tuple(
        t != "identity" and x[i] < BOUNDARY_TOL for i, t in enumerate(objective.transforms)
    )
    return OptimResult(
        x=x,
        fun=f2,
        iterations=it1 + it2,
        n_evals=ne1 + ne2 + 1,
        converged=conv2,
        message=message,
        at_boundary=at_boundary,
        x_unconstrained=u2,
    )


def _steps(x: np.ndarray, rel_step: float, min_step) -> np.ndarray:
    return np.maximum(rel_step * np.abs(x), np.asarray(min_step, dtype=float))


def numerical_gradient(
    f: Callable[[np.ndarray], float],
    point: Sequence[float],
    rel_step: float = 1e-6,
    min_step: float = 1e-8,
) -> np.ndarray:
    """Central-difference gradient with per-coordinate step ``max(rel_step*|x|, min_step)``."""
    x = np.asarray(point, dtype=float)
    h = _steps(x, rel_step, min_step)
    g = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        fp, fm = f(xp), f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericalError(f"non-finite function value perturbing coordinate {i}")
        g[i] = (fp - fm) / (2.0 * h[i])
    return g


def numerical_hessian(
    f: Callable[[np.ndarray], float],
    point: Sequence[float],
    rel_step: float = 1e-5,
    min_step: float | Sequence[float] = 1e-10,
) -> np.ndarray:
    """
    Central-difference Hessian of ``f`` at ``point``.

    Step sizes are ``h_i = max(rel_step * |x_i|, min_step)``; ``min_step`` may
    be given per coordinate.  Diagonal entries
    use the three-point second difference, off-diagonal entries the four-point
    cross difference; the result is symmetrized.

    Raises
    ------
    NumericalError
        If ``f`` is not finite at any of the evaluation points.
    """
    x = np.asarray(point, dtype=float)
    n = x.size
    h = _steps(x, rel_step, min_step)

    def ev(dx, coords):
        val = f(x + dx)
        if not np.isfinite(val):
            raise NumericalError(
                f"non-finite function value perturbing coordinate(s) {coords}"
            )
        return val

    f0 = ev(np.zeros(n), ())
    H = np.empty((n, n))
    e = np.eye(n) * h
    for i in range(n):
        fp = ev(e[i], (i,))
        fm = ev(-e[i], (i,))
        H[i, i] = (fp - 2.0 * f0 + fm) / h[i] ** 2
        for j in range(i):
            fpp = ev(e[i] + e[j], (i, j))
            fpm = ev(e[i] - e[j], (i, j))
            fmp = ev(-e[i] + e[j], (i, j))
            fmm = ev(-e[i] - e[j], (i, j))
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    return 0.5 * (H + H.T)


def invert_spd(H: np.ndarray) -> np.ndarray:
    """
    Invert a symmetric positive-definite matrix through its Cholesky factor.

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix is not numerically positive definite.  No regularized
        substitute is returned.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix")
    if not np.all(np.isfinite(H)):
        raise NotPositiveDefiniteError("matrix has non-finite entries")
    try:
        factor = linalg.cho_factor(H, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from None
    inv = linalg.cho_solve(factor, np.eye(H.shape[0]))
    return 0.5 * (inv + inv.T)
