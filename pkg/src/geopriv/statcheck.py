"""Monte Carlo and quadrature checks validating the closed-form
distributional claims the mechanisms rely on.

Every check is deterministic under a fixed stream, reports its measured
statistic even on pass, and uses thresholds derived from binomial/KS
sampling theory rather than tuned constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .noise import (
    RandomStream,
    laplace_sum_pdf,
    sample_gaussian_vec,
    sample_laplace,
    sample_planar_laplace,
)


@dataclass(frozen=True)
class CheckReport:
    name: str
    statistic: float
    threshold: float
    passed: bool
    samples: int

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag} {self.name}: statistic={self.statistic:.6g} "
            f"threshold={self.threshold:.6g} samples={self.samples}"
        )


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(fa, fm, fb, h):
        return h * (fa + 4.0 * fm + fb) / 6.0

    def rec(a, m, b, fa, fm, fb, whole, tol, depth):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(
            m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1
        )

    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    return rec(a, m, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48)


def _binomial_band(p: float, samples: int) -> float:
    # 4-sigma binomial sampling band plus a small absolute floor
    return 4.0 * math.sqrt(p * (1.0 - p) / samples) + 0.002


def _survival_check(
    name: str,
    radii: np.ndarray,
    r_grid: Sequence[float],
    reference: Callable[[float], float],
) -> CheckReport:
    samples = len(radii)
    worst = 0.0
    for r in r_grid:
        p = reference(float(r))
        emp = float(np.mean(radii > r))
        worst = max(worst, abs(emp - p) / _binomial_band(p, samples))
    return CheckReport(name, worst, 1.0, worst < 1.0, samples)


def check_gp_radial_tail(
    eps: float,
    r_grid: Sequence[float] = (1.0, 3.0, 5.0),
    samples: int = 10**6,
    rng: RandomStream | None = None,
    survival: Callable[[float], float] | None = None,
) -> CheckReport:
    """Empirical norm survival of 2-D planar-Laplace noise against the
    closed form ``(1 + r*eps) * exp(-r*eps)``.

    ``survival`` overrides the reference formula (fault-injection hook for
    testing the harness itself).
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = rng or RandomStream(0)
    ref = survival or (lambda r: (1.0 + r * eps) * math.exp(-r * eps))
    draws = sample_planar_laplace(2, eps, rng, size=samples)
    radii = np.linalg.norm(draws, axis=1)
    return _survival_check(f"gp_radial_tail(eps={eps:g})", radii, r_grid, ref)


def check_cgp_radial_tail(
    rho: float,
    r_grid: Sequence[float] = (0.5, 1.0, 1.5),
    samples: int = 10**6,
    rng: RandomStream | None = None,
    survival: Callable[[float], float] | None = None,
) -> CheckReport:
    """Empirical norm survival of the 2-D Gaussian mechanism's noise
    (per-coordinate sigma 1/sqrt(2 rho)) against ``exp(-rho * r**2)``."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    rng = rng or RandomStream(0)
    ref = survival or (lambda r: math.exp(-rho * r * r))
    draws = sample_gaussian_vec(2, 1.0 / math.sqrt(2.0 * rho), rng, size=samples)
    radii = np.linalg.norm(draws, axis=1)
    return _survival_check(f"cgp_radial_tail(rho={rho:g})", radii, r_grid, ref)


def accept_probability(y, scale: float):
    """Pr[V <= y] for V ~ Laplace(scale): the per-visit accept chance of a
    scan whose gate sits at y."""
    y = np.asarray(y, dtype=np.float64)
    out = np.where(y < 0, 0.5 * np.exp(y / scale), 1.0 - 0.5 * np.exp(-y / scale))
    return float(out) if out.ndim == 0 else out


def check_expected_draws(
    b: float, samples: int = 10**5, rng: RandomStream | None = None
) -> CheckReport:
    """Mean number of Laplace(2b) draws until one falls below Z + W, for Z, W
    iid Laplace(b); the closed-form bound is 4.

    Given the gate value y the draw count is geometric with success
    probability Pr[V <= y], so the count is sampled directly from that
    geometric law.  Passes when the sample mean is within three standard
    errors of the bound.
    """
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    rng = rng or RandomStream(0)
    y = sample_laplace(b, rng, size=samples) + sample_laplace(b, rng, size=samples)
    p = accept_probability(y, 2.0 * b)
    counts = rng.generator.geometric(p).astype(np.float64)
    stat = float(counts.mean())
    sem = float(counts.std(ddof=1)) / math.sqrt(samples)
    threshold = 4.0 + 3.0 * sem
    return CheckReport(f"expected_draws(b={b:g})", stat, threshold, stat <= threshold, samples)


def _gaussian_logpdf(y: float, mu: float, sigma: float) -> float:
    z = (y - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - 0.5 * math.log(2.0 * math.pi)


def renyi_divergence_gaussian_quadrature(
    mu1: float, mu2: float, sigma: float, alpha: float, tol: float = 1e-10
) -> float:
    """Order-alpha Renyi divergence between N(mu1, sigma^2) and N(mu2, sigma^2)
    by numeric quadrature of the defining integral.

    The integrand can span hundreds of orders of magnitude, so it is scaled
    by a log offset found by scanning the interval before the adaptive pass;
    the tolerance is then effectively relative.
    """
    if not alpha > 1:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    mu_alpha = alpha * mu1 + (1.0 - alpha) * mu2  # mean of the tilted density
    lo = min(mu1, mu2, mu_alpha) - 12.0 * sigma
    hi = max(mu1, mu2, mu_alpha) + 12.0 * sigma

    def log_integrand(y: float) -> float:
        return alpha * _gaussian_logpdf(y, mu1, sigma) + (1.0 - alpha) * _gaussian_logpdf(
            y, mu2, sigma
        )

    scan = np.linspace(lo, hi, 4097)
    offset = max(log_integrand(float(y)) for y in scan)

    def integrand(y: float) -> float:
        return math.exp(log_integrand(y) - offset)

    integral = adaptive_simpson(integrand, lo, hi, tol)
    return (offset + math.log(integral)) / (alpha - 1.0)


def check_renyi_gaussian(
    mu1: float,
    mu2: float,
    sigma: float,
    alpha_grid: Sequence[float] = (1.5, 2.0, 3.0),
    tol: float = 1e-6,
) -> CheckReport:
    """Quadrature Renyi divergence of equal-variance Gaussians against the
    closed form ``alpha * (mu1 - mu2)^2 / (2 sigma^2)``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    worst = 0.0
    for alpha in alpha_grid:
        closed = alpha * (mu1 - mu2) ** 2 / (2.0 * sigma**2)
        quad = renyi_divergence_gaussian_quadrature(mu1, mu2, sigma, alpha)
        worst = max(worst, abs(quad - closed))
    return CheckReport(
        f"renyi_gaussian(mu={mu2 - mu1:g},sigma={sigma:g})", worst, tol, worst < tol, 0
    )


def check_gaussian_mech_divergence(
    rho: float,
    dist_grid: Sequence[float] = (0.5, 1.0, 2.0),
    alpha_grid: Sequence[float] = (1.5, 2.0, 3.0),
    tol: float = 1e-6,
) -> CheckReport:
    """For the 1-D Gaussian mechanism on the identity (sigma = 1/sqrt(2 rho)),
    the order-alpha divergence between outputs at inputs dist apart equals
    ``alpha * rho * dist^2`` exactly; verified by quadrature."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    sigma = 1.0 / math.sqrt(2.0 * rho)
    worst = 0.0
    for dist in dist_grid:
        for alpha in alpha_grid:
            quad = renyi_divergence_gaussian_quadrature(0.0, float(dist), sigma, alpha)
            worst = max(worst, abs(quad - alpha * rho * dist * dist))
    return CheckReport(f"gaussian_mech_divergence(rho={rho:g})", worst, tol, worst < tol, 0)


def laplace_sum_cdf_numeric(points: np.ndarray, scale: float) -> np.ndarray:
    """CDF of the two-Laplace sum at the given points, by numeric integration
    of its density on a fine grid (independent of any closed-form tail)."""
    span = 40.0 * scale
    grid = np.linspace(-span, span, 400_001)
    pdf = laplace_sum_pdf(grid, scale)
    step = grid[1] - grid[0]
    cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * step)])
    cdf /= cdf[-1]
    return np.interp(points, grid, cdf)


def check_laplace_sum_pdf(
    b: float,
    samples: int = 10**6,
    rng: RandomStream | None = None,
    ks_threshold: float | None = None,
) -> CheckReport:
    """KS distance between an empirical two-Laplace sum and the numerically
    integrated density of its closed form.

    The default threshold is the larger of 0.005 and the one-sample KS 99%
    critical value 1.63/sqrt(samples); at 10^6 samples the 0.005 floor
    governs.
    """
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    if ks_threshold is None:
        ks_threshold = max(0.005, 1.63 / math.sqrt(samples))
    rng = rng or RandomStream(0)
    y = np.sort(sample_laplace(b, rng, size=samples) + sample_laplace(b, rng, size=samples))
    ref = laplace_sum_cdf_numeric(y, b)
    i = np.arange(1, samples + 1)
    ks = max(float(np.max(i / samples - ref)), float(np.max(ref - (i - 1) / samples)))
    return CheckReport(f"laplace_sum_pdf(b={b:g})", ks, ks_threshold, ks < ks_threshold, samples)


def check_planar_laplace_mean(
    dim: int, eps: float, samples: int = 10**6, rng: RandomStream | None = None, rel_tol: float = 0.01
) -> CheckReport:
    """Mean norm of d-dimensional planar-Laplace noise against the closed
    form d/eps, at 1% relative tolerance."""
    rng = rng or RandomStream(0)
    draws = sample_planar_laplace(dim, eps, rng, size=samples)
    mean = float(np.linalg.norm(draws, axis=1).mean())
    stat = abs(mean * eps / dim - 1.0)
    return CheckReport(
        f"planar_laplace_mean(d={dim},eps={eps:g})", stat, rel_tol, stat < rel_tol, samples
    )
