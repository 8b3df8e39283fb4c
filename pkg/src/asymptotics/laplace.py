"""
Laplace-method apparatus for H#(eps).

Near its maximizer p = lambda * L on the hyperplane, the exponent F of the
H terms is a concave quadratic in the D - 1 free coordinates.  This module
locates p, builds the Hessian in closed form, checks it against finite
differences, and measures how well the quadratic describes F on the box
|t_i| <= |log eps|^(2/3) / sqrt(D - 1).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import pandas as pd
from scipy import linalg

from src.config.run_config import RUN_CONFIG
from src.errors import BoxOutsideDomain, DegenerateDirection
from src.fibred_system.config_io import check_epsilon, format_rational
from src.fibred_system.digit_system import DigitSystem, entropy
from src.asymptotics.hyperplane import f_tilde

logger = logging.getLogger(__name__)

TAYLOR_CONVENTIONS = ("taylor", "literal")


@dataclass(frozen=True)
class LaplaceAnalysis:
    eps: Fraction
    L: float
    p: np.ndarray              # (lambda_1 L, ..., lambda_D L)
    f_at_p: float
    hessian: np.ndarray        # closed-form Hessian of F at p (free coordinates)
    hessian_fd: np.ndarray     # central-difference Hessian at p
    hessian_rel_diff: float
    hessian_A: np.ndarray      # (log eps) * hessian
    eigenvalues: np.ndarray    # ascending
    eigenvectors: np.ndarray   # columns

    @property
    def log_eps(self) -> float:
        return _log_eps(self.eps)

    def to_dict(self) -> dict:
        return {
            "eps": format_rational(self.eps),
            "L": self.L,
            "p": self.p.tolist(),
            "f_at_p": self.f_at_p,
            "minus_log_eps": -self.log_eps,
            "hessian": self.hessian.tolist(),
            "hessian_fd": self.hessian_fd.tolist(),
            "hessian_rel_diff": self.hessian_rel_diff,
            "hessian_A": self.hessian_A.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
        }


def _log_eps(eps: Fraction) -> float:
    return math.log(eps.numerator) - math.log(eps.denominator)


def _lead_coordinate(sys: DigitSystem, log_eps: float, x_tail: np.ndarray) -> float:
    return (log_eps - float(x_tail @ sys.log_measures[1:])) / sys.log_measures[0]


def F_reduced(sys: DigitSystem, eps, x_tail) -> float:
    """F~ restricted to the hyperplane, as a function of coordinates 2..D."""
    eps = check_epsilon(eps)
    x_tail = np.asarray(x_tail, dtype=np.float64)
    x1 = _lead_coordinate(sys, _log_eps(eps), x_tail)
    return f_tilde(np.concatenate(([x1], x_tail)))


def hessian_closed_form(sys: DigitSystem, eps, x_tail) -> np.ndarray:
    """
    Second partials of F_reduced at x_tail.

    With b_i = log lambda_i / log lambda_1 and c_i = 1 - b_i:
    H_ij = c_i c_j / s - b_i b_j / x_1 - delta_ij / x_i, s the coordinate sum.
    """
    eps = check_epsilon(eps)
    x_tail = np.asarray(x_tail, dtype=np.float64)
    x1 = _lead_coordinate(sys, _log_eps(eps), x_tail)
    if x1 <= 0 or np.any(x_tail <= 0):
        raise BoxOutsideDomain(f"Hessian needs a positive point, got x_1={x1}, tail={x_tail.tolist()}")

    b = sys.log_measures[1:] / sys.log_measures[0]
    c = 1.0 - b
    s = x1 + x_tail.sum()
    return np.outer(c, c) / s - np.outer(b, b) / x1 - np.diag(1.0 / x_tail)


def finite_difference_hessian(fn: Callable[[np.ndarray], float], x, h: float) -> np.ndarray:
    """Central-difference Hessian of a scalar function (four-point stencil)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    out = np.zeros((n, n))
    eye = np.eye(n) * h
    for i in range(n):
        for j in range(i, n):
            v = (fn(x + eye[i] + eye[j]) - fn(x + eye[i] - eye[j])
                 - fn(x - eye[i] + eye[j]) + fn(x - eye[i] - eye[j])) / (4 * h * h)
            out[i, j] = out[j, i] = v
    return out


def laplace_maximizer(sys: DigitSystem, eps, config=RUN_CONFIG) -> LaplaceAnalysis:
    """
    Maximizer p of F~ on H_eps with the Hessian matrix A and its spectrum.

    Parameters
    ----------
    sys : DigitSystem
    eps : rational in (0, 1)

    Returns
    -------
    LaplaceAnalysis
        L = log eps / sum lambda log lambda, p = lambda L, F~(p) (equal to
        -log eps), the closed-form and finite-difference Hessians of F at p,
        A = (log eps) * Hessian and its eigen-decomposition.
    """
    eps = check_epsilon(eps, upper_inclusive=False)
    log_eps = _log_eps(eps)
    lam = np.array([float(m) for m in sys.measures])

    L = log_eps / float(lam @ sys.log_measures)
    p = lam * L
    f_at_p = f_tilde(p)

    hess = hessian_closed_form(sys, eps, p[1:])
    h = 1e-3 * float(p.min())
    hess_fd = finite_difference_hessian(lambda t: F_reduced(sys, eps, t), p[1:], h)
    rel_diff = float(np.abs(hess_fd - hess).max() / np.abs(hess).max())
    if rel_diff > config["hessian_rel_tol"]:
        logger.warning(f"Hessian finite differences differ from the closed form by {rel_diff:.2e}")

    A = log_eps * hess
    if not np.allclose(A, A.T, atol=config["eig_tol"]):
        raise ValueError(f"Hessian matrix is not symmetric: {A.tolist()}")
    eigenvalues, eigenvectors = linalg.eigh((A + A.T) / 2)

    if np.any(eigenvalues <= config["eig_tol"]):
        logger.error(f"Non-positive Hessian eigenvalue: {eigenvalues.tolist()}")

    return LaplaceAnalysis(
        eps=eps,
        L=L,
        p=p,
        f_at_p=f_at_p,
        hessian=hess,
        hessian_fd=hess_fd,
        hessian_rel_diff=rel_diff,
        hessian_A=A,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
    )


def _hyperplane_direction(rng: np.random.Generator, log_measures: np.ndarray) -> np.ndarray:
    """Random unit vector a with sum a_i log lambda_i = 0."""
    ell = log_measures / np.linalg.norm(log_measures)
    while True:
        a = rng.standard_normal(ell.size)
        a -= (a @ ell) * ell
        norm = np.linalg.norm(a)
        if norm > 1e-12:
            return a / norm


def gradient_check(sys: DigitSystem, eps, directions: int = RUN_CONFIG["gradient_directions"],
                   seed: int = RUN_CONFIG["seed"]) -> float:
    """Max |directional derivative| of F~ at p along random hyperplane-parallel directions."""
    eps = check_epsilon(eps, upper_inclusive=False)
    log_eps = _log_eps(eps)
    lam = np.array([float(m) for m in sys.measures])
    p = lam * log_eps / float(lam @ sys.log_measures)

    rng = np.random.default_rng(seed)
    h = 1e-4 * float(p.min())
    worst = 0.0
    for _ in range(directions):
        a = _hyperplane_direction(rng, sys.log_measures)
        d = (f_tilde(p + h * a) - f_tilde(p - h * a)) / (2 * h)
        worst = max(worst, abs(d))
    return worst


def second_directional_derivative(x, a) -> float:
    """d^2/dt^2 F~(x + t a) at t = 0: (sum a)^2 / sum x - sum a^2 / x."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if x.shape != a.shape:
        raise ValueError(f"Point and direction differ in shape: {x.shape} vs {a.shape}")
    if not np.any(a):
        raise DegenerateDirection("Direction vector is zero")
    if np.any(x <= 0):
        raise ValueError(f"Point must be strictly positive, got {x.tolist()}")
    return float(a.sum() ** 2 / x.sum() - (a * a / x).sum())


def concavity_check(sys: DigitSystem, eps, trials: int = RUN_CONFIG["concavity_trials"],
                    seed: int = RUN_CONFIG["seed"]) -> dict:
    """
    Second directional derivatives of F~ along random lines parallel to H_eps
    through random interior points of H_eps; every value must be negative.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    eps = check_epsilon(eps, upper_inclusive=False)
    log_eps = _log_eps(eps)

    rng = np.random.default_rng(seed)
    worst = -math.inf
    n_negative = 0
    for _ in range(trials):
        w = rng.dirichlet(np.ones(sys.D))
        x = w * log_eps / float(w @ sys.log_measures)
        a = _hyperplane_direction(rng, sys.log_measures)
        v = second_directional_derivative(x, a)
        worst = max(worst, v)
        n_negative += v < 0

    return {
        "trials": trials,
        "seed": seed,
        "max_second_derivative": worst,
        "n_negative": int(n_negative),
        "all_negative": n_negative == trials,
    }


def taylor_box_radius(sys: DigitSystem, eps) -> float:
    eps = check_epsilon(eps, upper_inclusive=False)
    return abs(_log_eps(eps)) ** (2 / 3) / math.sqrt(sys.D - 1)


def _check_box(sys: DigitSystem, p: np.ndarray, r: float) -> None:
    b = sys.log_measures[1:] / sys.log_measures[0]
    if np.any(p[1:] - r <= 0):
        raise BoxOutsideDomain(f"Box radius {r:.4g} exceeds tail coordinates {p[1:].tolist()}")
    if p[0] - r * np.abs(b).sum() <= 0:
        raise BoxOutsideDomain(f"Box radius {r:.4g} drives the first coordinate {p[0]:.4g} negative")


def _quadratic_coefficient(convention: str) -> float:
    if convention not in TAYLOR_CONVENTIONS:
        raise ValueError(f"convention must be one of {TAYLOR_CONVENTIONS}, got {convention!r}")
    return 0.5 if convention == "taylor" else 1.0


def taylor_error_at(analysis: LaplaceAnalysis, sys: DigitSystem, t, convention: str = "taylor") -> float:
    """|F(p + t) - (-log eps + coef * t^T Hess t)| for a single offset t."""
    coef = _quadratic_coefficient(convention)
    t = np.asarray(t, dtype=np.float64)
    exact = F_reduced(sys, analysis.eps, analysis.p[1:] + t)
    model = -analysis.log_eps + coef * float(t @ analysis.hessian @ t)
    return abs(exact - model)


def taylor_residual(sys: DigitSystem, eps, samples: int = RUN_CONFIG["taylor_samples"],
                    seed: int = RUN_CONFIG["seed"], convention: str = "taylor",
                    config=RUN_CONFIG) -> float:
    """
    Max over uniform samples of the box (and its center) of the gap between
    F and its quadratic model -log eps + sum (l_i / log eps) t_i^2 / 2.

    ``convention="literal"`` drops the Taylor factor 1/2.

    Raises
    ------
    BoxOutsideDomain
        If the box around p leaves the positive orthant.
    """
    analysis = laplace_maximizer(sys, eps, config)
    r = taylor_box_radius(sys, analysis.eps)
    _check_box(sys, analysis.p, r)

    rng = np.random.default_rng(seed)
    worst = taylor_error_at(analysis, sys, np.zeros(sys.D - 1), convention)
    for t in rng.uniform(-r, r, size=(samples, sys.D - 1)):
        worst = max(worst, taylor_error_at(analysis, sys, t, convention))
    return worst


def taylor_slice(sys: DigitSystem, eps, axis: int = 0, n_points: int = 41,
                 config=RUN_CONFIG) -> pd.DataFrame:
    """
    Residual of the quadratic model along one eigen-direction of A, next to
    the Lagrange bound max|g'''| |t|^3 / 6, with g''' from finite differences.
    """
    analysis = laplace_maximizer(sys, eps, config)
    if not 0 <= axis < sys.D - 1:
        raise ValueError(f"axis must lie in [0, {sys.D - 1}), got {axis}")
    r = taylor_box_radius(sys, analysis.eps)
    _check_box(sys, analysis.p, r)

    u = analysis.eigenvectors[:, axis]
    curvature = analysis.eigenvalues[axis] / analysis.log_eps

    def g(t: float) -> float:
        return F_reduced(sys, analysis.eps, analysis.p[1:] + t * u)

    h = 1e-2 * r
    grid = np.linspace(-r, r, 10 * n_points + 1)
    third = [(g(t + 2 * h) - 2 * g(t + h) + 2 * g(t - h) - g(t - 2 * h)) / (2 * h ** 3) for t in grid]
    g3 = float(np.nanmax(np.abs(third)))

    rows = []
    for t in np.linspace(-r, r, n_points):
        rows.append({
            "t": t,
            "residual": abs(g(t) - (-analysis.log_eps + 0.5 * curvature * t * t)),
            "third_order_bound": g3 * abs(t) ** 3 / 6,
        })
    df = pd.DataFrame(rows)
    df.attrs["eigenvalue"] = float(analysis.eigenvalues[axis])
    df.attrs["max_third_derivative"] = g3
    return df


def laplace_constant(sys: DigitSystem, config=RUN_CONFIG) -> dict:
    """
    Gaussian prediction of the limits of H#(eps) eps and H(eps) eps / |log eps|.

    Summing exp(F) over the lattice with the Stirling prefactor gives
    H#(eps) eps -> h^((D-1)/2) / sqrt(prod lambda * det A), h the entropy;
    the extra factor n ~ |log eps| / h in H divides the second limit by h.
    A does not depend on eps, so any eps in (0, 1) serves.
    """
    analysis = laplace_maximizer(sys, Fraction(1, 2 ** 40), config)
    h = entropy(sys)
    prod_lambda = math.prod(float(m) for m in sys.measures)
    det_A = float(np.prod(analysis.eigenvalues))
    sharp = h ** ((sys.D - 1) / 2) / math.sqrt(prod_lambda * det_A)
    return {
        "entropy": h,
        "det_A": det_A,
        "H_sharp_eps_limit": sharp,
        "H_norm_limit": sharp / h,
    }
