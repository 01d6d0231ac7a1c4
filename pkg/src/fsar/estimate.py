"""Fitting the spatially autoregressive functional regression.

Two routes: alternating least squares (slope solve and closed-form rho
update in turn) and profile maximum likelihood over rho.  Both start from
a coarse scan of the rho profile objective, because on small noisy
problems the profile can have several local minima.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DegenerateResidualError,
    InsufficientDofError,
    SingularDesignError,
    SingularInformationError,
)
from .model import ParamPoint, ll_gradients, ls_objective

LS_METHOD = "iterative_ls"
ML_METHOD = "profile_ml"


@dataclass
class SarFit:
    """Result of a fit: estimates, dispersion, and diagnostics."""

    b_hat: np.ndarray
    rho_hat: float
    sigma2_hat: float
    coef_cov: np.ndarray
    method: str
    iterations: int
    converged: bool
    objective_trace: np.ndarray
    rho_interval: tuple
    n: int
    k: int
    warnings: list = field(default_factory=list)


def _cho_solve(info, rhs, err):
    """Solve info @ x = rhs via Cholesky; raise err on rank deficiency."""
    try:
        chol = np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        raise err from None
    return np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))


def gls_coefficients(model, rho):
    """Slope solve at fixed rho: argmin_b of the whitened residual norm."""
    model._check_rho(rho)
    ma = model.apply_m(rho, model.a)
    my = model.apply_m(rho, model.y)
    return _cho_solve(
        ma.T @ ma,
        ma.T @ my,
        SingularDesignError(
            "design matrix is rank deficient; reduce the basis size "
            "or check for collinear curves"
        ),
    )


def effective_dof(model, rho):
    """trace(A (A'ZA)^-1 A'Z) with Z = (I - rho W)^2; equals k analytically."""
    model._check_rho(rho)
    ma = model.apply_m(rho, model.a)
    za = model.apply_m(rho, ma)
    sol = _cho_solve(
        ma.T @ ma,
        za.T @ model.a,
        SingularDesignError("design matrix is rank deficient"),
    )
    return float(np.trace(sol))


def estimate_sigma2(model, b_hat, rho):
    """Residual variance with the trace degrees-of-freedom correction."""
    q = ls_objective(model, b_hat, rho)
    dof = model.n - effective_dof(model, rho)
    if dof <= 0:
        raise InsufficientDofError(
            f"effective dof {model.n - dof:.3f} leaves no residual degrees of freedom"
        )
    return q / dof


def coef_covariance(model, rho, sigma2):
    """sigma2 (A'(I - rho W)^2 A)^-1, symmetrized against roundoff."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    ma = model.apply_m(rho, model.a)
    inv = _cho_solve(
        ma.T @ ma,
        np.eye(model.k),
        SingularInformationError("information matrix of the slopes is singular"),
    )
    cov = sigma2 * inv
    return (cov + cov.T) / 2.0


class _Profile:
    """rho profile of the least squares objective in the eigenbasis of W."""

    def __init__(self, model):
        lam, vec = model.w.spectrum()
        self.lam = lam
        self.at = vec.T @ model.a
        self.yt = vec.T @ model.y
        self.n = model.n

    def ls_value(self, rho):
        d = 1.0 - rho * self.lam
        ma = d[:, None] * self.at
        my = d * self.yt
        b, *_ = np.linalg.lstsq(ma, my, rcond=None)
        res = my - ma @ b
        return float(res @ res)

    def scan(self, interval, num):
        m = interval.margin
        rhos = np.linspace(interval.lo + m, interval.hi - m, int(num))
        return rhos, np.array([self.ls_value(r) for r in rhos])


def _perfect_fit(model, warnings_list, method, trace, iterations):
    warnings_list.append("residual is numerically zero; rho is not identifiable "
                         "and was kept at 0")
    b = gls_coefficients(model, 0.0)
    cov = coef_covariance(model, 0.0, 0.0)
    return SarFit(
        b_hat=b, rho_hat=0.0, sigma2_hat=0.0, coef_cov=cov, method=method,
        iterations=iterations, converged=True,
        objective_trace=np.asarray(trace, dtype=float),
        rho_interval=(model.interval.lo, model.interval.hi),
        n=model.n, k=model.k, warnings=warnings_list,
    )


def fit_ls(model, tol=1e-8, max_iter=500, scan_points=512):
    """Alternating least squares fit.

    Starts at rho = 0 with the ordinary least squares slope, then repeats
    the closed-form rho update rho = r'Wr / r'W'Wr (clamped into the
    admissible interval) and the slope solve until the step falls below
    tol.  A coarse profile scan afterwards restarts the alternation if a
    better basin exists.

    Returns
    -------
    SarFit
        With the trace-corrected residual variance and the slope
        covariance sigma2 (A'(I - rho W)^2 A)^-1.
    """
    interval = model.interval
    warnings_list = []
    y_scale = max(1.0, float(model.y @ model.y))
    iterations = 0
    clamp_count = 0
    converged = False

    b = gls_coefficients(model, 0.0)
    rho = 0.0
    trace = [ls_objective(model, b, rho)]

    def alternate(b, rho):
        nonlocal iterations, clamp_count, converged
        for _ in range(max_iter):
            iterations += 1
            r = model.residual(b)
            r2 = float(r @ r)
            if r2 <= 1e-20 * y_scale:
                return b, rho, True
            wr = model.w.matrix @ r
            denom = float(wr @ wr)
            if denom <= 1e-20 * r2:
                raise DegenerateResidualError(
                    "W annihilates the residual; the rho update is undefined"
                )
            rho_new, clamped = interval.clamp(float(r @ wr) / denom)
            clamp_count += clamped
            b_new = gls_coefficients(model, rho_new)
            trace.append(ls_objective(model, b_new, rho_new))
            step = max(abs(rho_new - rho), float(np.abs(b_new - b).max()))
            b, rho = b_new, rho_new
            if step < tol:
                converged = True
                return b, rho, False
        converged = False
        return b, rho, False

    r0 = model.residual(b)
    if float(r0 @ r0) <= 1e-20 * y_scale:
        return _perfect_fit(model, warnings_list, LS_METHOD, trace, iterations)

    b, rho, zero_resid = alternate(b, rho)
    if zero_resid:
        warnings_list.append("residual reached numerical zero; rho kept at the "
                             "last iterate")
        converged = True
    else:
        # guard against stalling in a secondary basin of the rho profile
        prof = _Profile(model)
        for _ in range(5):
            rhos, vals = prof.scan(interval, scan_points)
            best = int(np.argmin(vals))
            if vals[best] >= trace[-1] - max(1e-12, 1e-10 * abs(trace[-1])):
                break
            rho = float(rhos[best])
            b = gls_coefficients(model, rho)
            trace.append(ls_objective(model, b, rho))
            b, rho, _ = alternate(b, rho)

    if clamp_count:
        warnings_list.append(
            f"rho update clamped at the admissible interval boundary "
            f"({clamp_count} time(s))"
        )
    sigma2 = estimate_sigma2(model, b, rho)
    cov = coef_covariance(model, rho, sigma2)
    return SarFit(
        b_hat=b, rho_hat=float(rho), sigma2_hat=float(sigma2), coef_cov=cov,
        method=LS_METHOD, iterations=iterations, converged=converged,
        objective_trace=np.asarray(trace, dtype=float),
        rho_interval=(interval.lo, interval.hi), n=model.n, k=model.k,
        warnings=warnings_list,
    )


def fit_ml(model, tol=1e-8, scan_points=512):
    """Profile maximum likelihood fit.

    For fixed rho the slope solve and sigma2 = rss/n are closed-form, so
    the likelihood is maximized along a one-dimensional rho profile:
    coarse scan, bounded derivative-free refinement in the best bracket,
    then a root polish of the profile score.  sigma2_hat is the maximum
    likelihood value rss/n (no degrees-of-freedom correction).
    """
    interval = model.interval
    n = model.n
    lam = model.w.eigenvalues
    warnings_list = []
    y_scale = max(1.0, float(model.y @ model.y))
    prof = _Profile(model)

    q0 = prof.ls_value(0.0)
    if q0 <= 1e-20 * y_scale:
        return _perfect_fit(model, warnings_list, ML_METHOD, [q0], 1)

    def negll(rho):
        q = max(prof.ls_value(rho), 1e-300)
        return 0.5 * n * np.log(q / n) - np.log(1.0 - rho * lam).sum()

    def score(rho):
        # envelope derivative of the profile log-likelihood
        b = gls_coefficients(model, rho)
        q = ls_objective(model, b, rho)
        r = model.residual(b)
        wr = model.w.matrix @ r
        d_obj = 2.0 * rho * (wr @ wr) - 2.0 * (r @ wr)
        return -float((lam / (1.0 - rho * lam)).sum()) - d_obj * n / (2.0 * q)

    rhos, quads = prof.scan(interval, scan_points)
    with np.errstate(divide="ignore"):
        negs = 0.5 * n * np.log(np.maximum(quads, 1e-300) / n) - np.log(
            1.0 - np.outer(rhos, lam)
        ).sum(axis=1)
    best = int(np.argmin(negs))
    # the profile can be multimodal with nearly tied basins, so refine
    # every sampled local minimum and keep the best refined point
    interior = np.where((negs[1:-1] <= negs[:-2]) & (negs[1:-1] <= negs[2:]))[0] + 1
    candidates = sorted({0, len(negs) - 1, best, *interior.tolist()},
                        key=lambda i: negs[i])[:16]
    evals = int(scan_points)
    rho, fun = float(rhos[best]), float(negs[best])
    for i in candidates:
        res = minimize_scalar(
            negll,
            bounds=(rhos[max(i - 1, 0)], rhos[min(i + 1, len(rhos) - 1)]),
            method="bounded", options={"xatol": 1e-11},
        )
        evals += int(res.nfev)
        if float(res.fun) < fun:
            rho, fun = float(res.x), float(res.fun)
    trace = [float(negs[best]), fun]

    step = rhos[1] - rhos[0] if len(rhos) > 1 else interval.margin
    a = max(interval.lo + interval.margin, rho - step)
    c = min(interval.hi - interval.margin, rho + step)
    try:
        sa, sc = score(a), score(c)
        evals += 2
        if np.isfinite(sa) and np.isfinite(sc) and sa * sc < 0:
            rho = float(brentq(score, a, c, xtol=1e-13))
            evals += 40
    except SingularDesignError:
        pass
    trace.append(negll(rho))

    b = gls_coefficients(model, rho)
    q = ls_objective(model, b, rho)
    sigma2 = q / n
    at_boundary = (
        rho <= interval.lo + 1.5 * interval.margin
        or rho >= interval.hi - 1.5 * interval.margin
    )
    converged = True
    if at_boundary:
        warnings_list.append("profile maximum clamped at the admissible "
                             "interval boundary")
    else:
        grads = ll_gradients(model, ParamPoint(b=b, rho=rho, sigma2=sigma2))
        flat = max(float(np.abs(grads.b).max()), abs(grads.rho), abs(grads.sigma2))
        if flat > 1e-6:
            converged = False
            warnings_list.append(
                f"likelihood gradient norm {flat:.3g} above 1e-6 at the optimum"
            )
    cov = coef_covariance(model, rho, sigma2)
    return SarFit(
        b_hat=b, rho_hat=rho, sigma2_hat=float(sigma2), coef_cov=cov,
        method=ML_METHOD, iterations=evals, converged=converged,
        objective_trace=np.minimum.accumulate(np.asarray(trace, dtype=float)),
        rho_interval=(interval.lo, interval.hi), n=model.n, k=model.k,
        warnings=warnings_list,
    )
