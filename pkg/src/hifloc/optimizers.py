"""Full-batch optimizers: adaptive gradient descent, scaled conjugate
gradient, and restarting conjugate gradient with a Wolfe line search.

The three routines minimise a smooth scalar function given as (f, grad)
closures over a flat parameter vector, so they are usable both for
perceptron training and for plain test functions.  A per-iteration
callback may inspect progress and return a stop-reason string (the
training layer uses this for validation-based early stopping).

gdx_minimize
    Gradient descent with momentum plus a multiplicative learning-rate
    schedule: the rate grows by 5 % after an improving step, shrinks to
    70 % (and the step is rejected, momentum cleared) when the loss rises
    by more than 4 %, and is otherwise left alone.

scg_minimize
    Scaled conjugate gradient: curvature along the search direction is
    estimated from a finite-difference of gradients and regularised with
    an adaptive Levenberg-Marquardt scale; steps are only applied when
    the quadratic-model comparison parameter is non-negative, so the
    accepted-loss sequence never increases.  The conjugate direction is
    reset to steepest descent every n-parameters iterations.

cgb_minimize
    Polak-Ribiere conjugate gradient restarted to steepest descent when
    successive gradients lose orthogonality (|g_prev . g| >= 0.2 |g|^2),
    with a bracketing strong-Wolfe line search using quadratic
    interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import LineSearchFailure, NonFiniteLoss

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]
# callback(iteration, w, f(w)) -> optional stop reason
Callback = Callable[[int, np.ndarray, float], Optional[str]]

STOP_GOAL = "goal"
STOP_MAX_EPOCHS = "max_epochs"
STOP_GRADIENT = "gradient_floor"


@dataclass
class OptimResult:
    w: np.ndarray
    fval: float
    n_iter: int
    stop_reason: str


def _check_finite(value, what: str) -> None:
    if not np.all(np.isfinite(value)):
        raise NonFiniteLoss(f"{what} is not finite")


def gdx_minimize(f: Objective, grad: Gradient, w0: np.ndarray, *,
                 lr: float = 0.05, momentum: float = 0.9,
                 lr_increase: float = 1.05, lr_decrease: float = 0.7,
                 max_perf_increase: float = 1.04,
                 max_iter: int = 1000, goal: float = 0.0,
                 gradient_floor: float = 1e-10,
                 callback: Optional[Callback] = None,
                 rate_log: Optional[list] = None) -> OptimResult:
    """Momentum gradient descent with the adaptive learning-rate rule.

    Tentative step: dw = momentum * dw_prev - (1 - momentum) * lr * g.
    A step that raises the loss beyond max_perf_increase times the
    current value is rejected (weights kept, momentum memory cleared,
    rate scaled by lr_decrease); an improving step scales the rate by
    lr_increase.  When rate_log is given, the learning rate in force
    after each epoch's update is appended to it.
    """
    w = np.asarray(w0, dtype=float).copy()
    fw = f(w)
    _check_finite(fw, "initial loss")
    eta = lr
    dw = np.zeros_like(w)
    reason = STOP_MAX_EPOCHS
    k = 0
    for k in range(1, max_iter + 1):
        g = grad(w)
        _check_finite(g, "gradient")
        if float(np.linalg.norm(g)) < gradient_floor:
            reason = STOP_GRADIENT
            break
        step = momentum * dw - (1.0 - momentum) * eta * g
        w_new = w + step
        f_new = f(w_new)
        if math.isnan(f_new) or f_new > max_perf_increase * fw:
            eta *= lr_decrease
            dw = np.zeros_like(w)
        else:
            w = w_new
            dw = step
            if f_new < fw:
                eta *= lr_increase
            fw = f_new
        if rate_log is not None:
            rate_log.append(eta)
        cb_reason = callback(k, w, fw) if callback is not None else None
        if fw <= goal:
            reason = STOP_GOAL
            break
        if cb_reason is not None:
            reason = cb_reason
            break
    return OptimResult(w=w, fval=fw, n_iter=k, stop_reason=reason)


def scg_minimize(f: Objective, grad: Gradient, w0: np.ndarray, *,
                 sigma0: float = 5e-5, lambda0: float = 5e-7,
                 max_iter: int = 1000, goal: float = 0.0,
                 gradient_floor: float = 1e-10,
                 callback: Optional[Callback] = None) -> OptimResult:
    """Scaled conjugate gradient minimisation.

    Second-order information along the direction p comes from the
    one-sided gradient difference with perturbation sigma0/|p|; the
    curvature is shifted by the adaptive scale lambda until positive.
    A candidate step is applied only when the comparison parameter
    (actual over predicted reduction) is non-negative; otherwise lambda
    grows and the weights stay put.
    """
    w = np.asarray(w0, dtype=float).copy()
    fw = f(w)
    _check_finite(fw, "initial loss")
    g = grad(w)
    _check_finite(g, "initial gradient")
    r = -g
    p = r.copy()
    n = len(w)
    lam = lambda0
    lam_bar = 0.0
    success = True
    delta = 0.0
    p_norm2 = 0.0
    reason = STOP_MAX_EPOCHS
    k = 0
    for k in range(1, max_iter + 1):
        if float(np.linalg.norm(r)) < gradient_floor:
            reason = STOP_GRADIENT
            break
        if success:
            p_norm2 = float(p @ p)
            if p_norm2 == 0.0:
                reason = STOP_GRADIENT
                break
            sigma_k = sigma0 / math.sqrt(p_norm2)
            s = (grad(w + sigma_k * p) - (-r)) / sigma_k
            delta = float(p @ s)

        # Levenberg-Marquardt shift; force positive curvature if needed
        delta = delta + (lam - lam_bar) * p_norm2
        if delta <= 0.0:
            lam_bar = 2.0 * (lam - delta / p_norm2)
            delta = -delta + lam * p_norm2
            lam = lam_bar

        mu = float(p @ r)
        if mu == 0.0:
            # direction orthogonal to the gradient: restart from steepest descent
            p = r.copy()
            success = True
            if callback is not None:
                stop = callback(k, w, fw)
                if stop is not None:
                    reason = stop
                    break
            continue
        alpha = mu / delta
        f_new = f(w + alpha * p)
        if math.isfinite(f_new):
            comparison = 2.0 * delta * (fw - f_new) / (mu * mu)
        else:
            comparison = -1.0

        if comparison >= 0.0:
            w = w + alpha * p
            fw = f_new
            g = grad(w)
            _check_finite(g, "gradient")
            r_new = -g
            lam_bar = 0.0
            success = True
            if k % n == 0:
                p = r_new.copy()
            else:
                beta = float((r_new @ r_new - r_new @ r) / mu)
                p = r_new + beta * p
            r = r_new
            if comparison >= 0.75:
                lam *= 0.25
        else:
            lam_bar = lam
            success = False
        if comparison < 0.25:
            lam = lam + delta * (1.0 - comparison) / p_norm2
        lam = min(lam, 1e154)

        cb_reason = callback(k, w, fw) if callback is not None else None
        if fw <= goal:
            reason = STOP_GOAL
            break
        if cb_reason is not None:
            reason = cb_reason
            break
    return OptimResult(w=w, fval=fw, n_iter=k, stop_reason=reason)


def _wolfe_quadratic_search(f: Objective, grad: Gradient, w: np.ndarray,
                            d: np.ndarray, f0: float, dphi0: float,
                            alpha1: float, c1: float, c2: float,
                            max_evals: int, best_seen: Optional[list] = None):
    """Bracketing strong-Wolfe line search with quadratic interpolation.

    Returns (alpha, f_alpha, grad_alpha) or None when no acceptable step
    was found within max_evals trial evaluations.  When best_seen is
    given, the lowest trial loss is appended to it (used to distinguish
    a genuine failure from floating-point convergence).
    """
    evals = 0

    def trial(a: float):
        nonlocal evals
        evals += 1
        fa = f(w + a * d)
        ga = grad(w + a * d)
        if math.isnan(fa):
            fa = math.inf
        if best_seen is not None:
            best_seen.append(fa)
        return fa, ga, float(ga @ d)

    def zoom(lo, f_lo, dphi_lo, hi, f_hi):
        while evals < max_evals:
            span = hi - lo
            if abs(span) < 1e-16 * max(1.0, abs(lo)):
                return None
            denom = 2.0 * (f_hi - f_lo - dphi_lo * span)
            if denom != 0.0 and math.isfinite(denom):
                a = lo - dphi_lo * span * span / denom
            else:
                a = lo + 0.5 * span
            # keep the trial point comfortably interior
            frac = (a - lo) / span
            if not math.isfinite(frac) or frac < 0.1 or frac > 0.9:
                a = lo + 0.5 * span
            fa, ga, dphia = trial(a)
            if fa > f0 + c1 * a * dphi0 or fa >= f_lo:
                hi, f_hi = a, fa
            else:
                if abs(dphia) <= -c2 * dphi0:
                    return a, fa, ga
                if dphia * span >= 0.0:
                    hi, f_hi = lo, f_lo
                lo, f_lo, dphi_lo = a, fa, dphia
        return None

    def refine(a, fa, ga):
        # one interpolation pass through (0, f0, dphi0) and (a, fa):
        # lands on the exact minimiser when phi is quadratic
        if evals >= max_evals:
            return a, fa, ga
        denom = 2.0 * (fa - f0 - dphi0 * a)
        if not (math.isfinite(denom) and denom > 0.0):
            return a, fa, ga
        aq = -dphi0 * a * a / denom
        if not (math.isfinite(aq) and 0.0 < aq):
            return a, fa, ga
        fq, gq, dphiq = trial(aq)
        if (fq <= f0 + c1 * aq * dphi0 and abs(dphiq) <= -c2 * dphi0
                and fq <= fa):
            return aq, fq, gq
        return a, fa, ga

    a_prev, f_prev, dphi_prev = 0.0, f0, dphi0
    a = alpha1
    first = True
    while evals < max_evals:
        fa, ga, dphia = trial(a)
        if fa > f0 + c1 * a * dphi0 or (not first and fa >= f_prev):
            return zoom(a_prev, f_prev, dphi_prev, a, fa)
        if abs(dphia) <= -c2 * dphi0:
            return refine(a, fa, ga)
        if dphia >= 0.0:
            return zoom(a, fa, dphia, a_prev, f_prev)
        a_prev, f_prev, dphi_prev = a, fa, dphia
        a *= 2.0
        first = False
    return None


def cgb_minimize(f: Objective, grad: Gradient, w0: np.ndarray, *,
                 c1: float = 1e-4, c2: float = 0.1,
                 restart_threshold: float = 0.2,
                 ls_max_evals: int = 20,
                 max_iter: int = 1000, goal: float = 0.0,
                 gradient_floor: float = 1e-10,
                 callback: Optional[Callback] = None) -> OptimResult:
    """Conjugate gradient with Polak-Ribiere updates and Powell restarts.

    After each accepted step the direction is rebuilt as
    -g_new + beta * d unless |g . g_new| >= restart_threshold * |g_new|^2,
    in which case it resets to steepest descent.  If the line search
    exhausts its budget the direction resets to steepest descent once
    before LineSearchFailure is raised; a failure with the gradient
    already at floating-point resolution (|g| <= sqrt(eps)) counts as
    convergence instead, since no loss decrease is representable there.
    """
    w = np.asarray(w0, dtype=float).copy()
    fw = f(w)
    _check_finite(fw, "initial loss")
    g = grad(w)
    _check_finite(g, "initial gradient")
    d = -g
    f_before = fw + float(np.linalg.norm(g)) / 2.0  # primes the first step guess
    reason = STOP_MAX_EPOCHS
    k = 0
    for k in range(1, max_iter + 1):
        gnorm2 = float(g @ g)
        if math.sqrt(gnorm2) < gradient_floor:
            reason = STOP_GRADIENT
            break
        dphi0 = float(g @ d)
        steepest = False
        if dphi0 >= 0.0:
            # conjugacy lost its descent property: fall back
            d = -g
            dphi0 = -gnorm2
            steepest = True

        alpha1 = 1.0
        if dphi0 != 0.0:
            # previous actual decrease projected onto the new slope
            guess = 2.02 * (fw - f_before) / dphi0
            if math.isfinite(guess) and guess > 0.0:
                alpha1 = min(1.0, guess)
        trial_losses: list = []
        found = _wolfe_quadratic_search(f, grad, w, d, fw, dphi0, alpha1,
                                        c1, c2, ls_max_evals, trial_losses)
        if found is None and not steepest:
            d = -g
            dphi0 = -gnorm2
            found = _wolfe_quadratic_search(f, grad, w, d, fw, dphi0, 1.0,
                                            c1, c2, ls_max_evals, trial_losses)
        if found is None:
            # No trial beat the current loss beyond evaluation noise:
            # that is floating-point convergence, not a search failure.
            noise = 1e-10 * (1.0 + abs(fw))
            if trial_losses and min(trial_losses) >= fw - noise:
                reason = STOP_GRADIENT
                break
            raise LineSearchFailure(
                f"no strong-Wolfe step within {ls_max_evals} evaluations at iteration {k}")
        alpha, f_new, g_new = found

        f_before = fw
        w = w + alpha * d
        fw = f_new
        _check_finite(g_new, "gradient")

        if abs(float(g @ g_new)) >= restart_threshold * float(g_new @ g_new):
            d = -g_new
        else:
            beta = float(g_new @ (g_new - g)) / gnorm2
            d = -g_new + beta * d
        g = g_new

        cb_reason = callback(k, w, fw) if callback is not None else None
        if fw <= goal:
            reason = STOP_GOAL
            break
        if cb_reason is not None:
            reason = cb_reason
            break
    return OptimResult(w=w, fval=fw, n_iter=k, stop_reason=reason)
