"""Small optimizers: golden-section search and Levenberg-Marquardt."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a: float, b: float, tol: float = 1e-6) -> float:
    """Maximizer of a unimodal `f` on [a, b], located to within `tol`."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass
class LMReport:
    iterations: int
    function_evaluations: int
    chi2: float
    gradient_norm: float
    damping: float
    reason: str


def _jacobian(fun, x, r0):
    # central differences; step scaled to each parameter
    jac = np.empty((r0.size, x.size))
    nfev = 0
    for j in range(x.size):
        h = 6e-6 * max(abs(x[j]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = (fun(xp) - fun(xm)) / (2 * h)
        nfev += 2
    return jac, nfev


def _safe_eval(fun, x):
    try:
        r = np.asarray(fun(x), dtype=float)
    except (ValueError, ArithmeticError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def levenberg_marquardt(fun, x0, ftol: float = 1e-10, gtol: float = 1e-8, xtol: float = 1e-13,
                        max_iterations: int = 200, initial_damping: float = 1e-4,
                        max_damping: float = 1e12):
    """Minimize sum(fun(x)**2) by Levenberg-Marquardt.

    `fun` returns weighted residuals (model - data) / sigma. It may raise
    ValueError (or return non-finite values) for parameters outside its
    domain; such trial steps are rejected and the damping raised.

    Returns
    -------
    params : ndarray
    covariance : ndarray
        inv(J^T J) at the solution.
    report : LMReport
    """
    x = np.array(x0, dtype=float)
    r = _safe_eval(fun, x)
    if r is None:
        raise ValidationError("initial parameters are outside the model domain")
    if r.size < x.size:
        raise ValidationError("fewer residuals than parameters")
    chi2 = float(r @ r)
    lam = initial_damping
    nfev = 1
    accepted = 0
    reason = None
    jac, n = _jacobian(fun, x, r)
    nfev += n

    for _ in range(max_iterations):
        grad = jac.T @ r
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < gtol:
            reason = "gradient"
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        step_taken = False
        while lam <= max_damping:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            if np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol):
                reason = "step"
                break
            r_new = _safe_eval(fun, x + step)
            nfev += 1
            if r_new is not None and float(r_new @ r_new) < chi2:
                chi2_new = float(r_new @ r_new)
                if (chi2 - chi2_new) / chi2 < ftol:
                    reason = "chi2"
                x, r, chi2 = x + step, r_new, chi2_new
                lam = max(lam / 10, 1e-15)
                accepted += 1
                step_taken = True
                break
            lam *= 10
        else:
            raise ConvergenceError(f"damping exceeded {max_damping:g} without reducing chi2")
        if step_taken:
            jac, n = _jacobian(fun, x, r)
            nfev += n
        if reason is not None:
            break
    else:
        raise ConvergenceError(f"no convergence within {max_iterations} iterations")

    jtj = jac.T @ jac
    cond = np.linalg.cond(jtj)
    if not np.isfinite(cond) or cond > 1e15:
        raise ConvergenceError(f"singular normal equations (condition number {cond:.3g})")
    cov = np.linalg.inv(jtj)
    cov = 0.5 * (cov + cov.T)
    report = LMReport(accepted, nfev, chi2, float(np.max(np.abs(jac.T @ r))), lam, reason)
    return x, cov, report
