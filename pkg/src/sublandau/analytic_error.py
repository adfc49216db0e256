"""Analytic nearest-neighbor error probability and union bound.

A detector that confuses the true support with a single-swap neighbor sees
two constellation points separated by |a_m c_m - a_k c_k| in each of the p
measurement rows. Averaging the Gaussian pairwise error over the row
geometry gives

    P(er) = E_{d, sigma} [ 1/2 erfc( d sigma sqrt(SNR/q) / 2 ) ]

where d is Chi with 2p degrees of freedom (the p complex rows) and sigma,
the content amplitude factor, has density 8 sigma^3 e^{-2 sigma^2} (a Chi
shape from the two complex content entries involved in the swap). The
union bound multiplies the pairwise term by the q(n-q) nearest neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

__all__ = [
    "QuadratureSpec",
    "QuadratureError",
    "chi_pdf_d",
    "sigma_pdf",
    "sigma_cdf",
    "pairwise_error_cond",
    "pairwise_error",
    "union_bound",
]


class QuadratureError(RuntimeError):
    """Raised when the integrator cannot certify the requested tolerance.

    Carries the value it did reach and the achieved error estimate."""

    def __init__(self, message: str, value: float, achieved: float) -> None:
        super().__init__(message)
        self.value = value
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive-quadrature contract for the pairwise error integral.

    Truncation limits default to Chi inverse-survival points chosen so the
    discarded tail mass stays below abs_tol/10 (each tail gets abs_tol/20;
    the integrand is bounded by 1/2, so the mass bound dominates the error).
    """

    abs_tol: float = 1e-10
    d_max: float | None = None
    sigma_max: float | None = None
    method: str = "adaptive-gk21"

    def __post_init__(self) -> None:
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be > 0")

    def d_limit(self, p: int) -> float:
        if self.d_max is not None:
            return self.d_max
        return float(stats.chi(2 * p).isf(self.abs_tol / 20.0))

    def sigma_limit(self) -> float:
        if self.sigma_max is not None:
            return self.sigma_max
        # 2*sigma is Chi with 4 degrees of freedom
        return float(stats.chi(4).isf(self.abs_tol / 20.0)) / 2.0


def chi_pdf_d(d, p: int):
    """Chi density with 2p degrees of freedom:
    P(d) = 2^{1-p}/Gamma(p) * d^{2p-1} e^{-d^2/2}. Vectorized over d."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("d must be >= 0")
    out = (2.0 ** (1 - p) / math.gamma(p)) * d ** (2 * p - 1) * np.exp(-d * d / 2.0)
    return out if out.ndim else float(out)


def sigma_pdf(sigma):
    """Density of the swap amplitude factor: P(sigma) = 8 sigma^3 e^{-2 sigma^2}."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    out = 8.0 * sigma ** 3 * np.exp(-2.0 * sigma * sigma)
    return out if out.ndim else float(out)


def sigma_cdf(sigma):
    """CDF of sigma_pdf: 1 - e^{-2 sigma^2} (1 + 2 sigma^2)."""
    sigma = np.asarray(sigma, dtype=float)
    t = 2.0 * sigma * sigma
    out = 1.0 - np.exp(-t) * (1.0 + t)
    return out if out.ndim else float(out)


def pairwise_error_cond(d: float, sigma: float, q: int, snr) -> float:
    """Error probability between two points at geometric separation d and
    amplitude sigma: 1/2 erfc(d sigma sqrt(SNR/q) / 2)."""
    if d < 0 or sigma < 0:
        raise ValueError("d and sigma must be >= 0")
    snr_value = getattr(snr, "value", snr)
    return 0.5 * special.erfc(0.5 * d * sigma * math.sqrt(snr_value / q))


def pairwise_error(p: int, q: int, snr, quad: QuadratureSpec | None = None) -> float:
    """Average the conditional pairwise error over d ~ Chi(2p) and the
    sigma density; nested adaptive quadrature, inner over d, outer over
    sigma."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    quad = quad or QuadratureSpec()
    snr_value = getattr(snr, "value", snr)
    coef = 0.5 * math.sqrt(snr_value / q)
    d_hi = quad.d_limit(p)
    s_hi = quad.sigma_limit()
    tol = quad.abs_tol

    def inner(sigma: float) -> float:
        val, _ = integrate.quad(
            lambda d: chi_pdf_d(d, p) * 0.5 * special.erfc(coef * d * sigma),
            0.0, d_hi, epsabs=tol / 10.0, epsrel=1e-10, limit=200,
        )
        return val

    value, err = integrate.quad(
        lambda s: sigma_pdf(s) * inner(s),
        0.0, s_hi, epsabs=tol / 10.0, epsrel=1e-10, limit=200,
    )
    if err > tol:
        raise QuadratureError(
            f"pairwise error quadrature reached {err:.3e} > abs_tol {tol:.3e}",
            value=value, achieved=err,
        )
    return value


def union_bound(n: int, p: int, q: int, snr, quad: QuadratureSpec | None = None) -> float:
    """Nearest-neighbor union bound q(n-q) * pairwise_error. Reported raw:
    it is a bound and may exceed 1."""
    if q > n:
        raise ValueError(f"need q <= n, got q={q}, n={n}")
    multiplier = q * (n - q)
    if multiplier == 0:
        return 0.0
    return multiplier * pairwise_error(p, q, snr, quad)
