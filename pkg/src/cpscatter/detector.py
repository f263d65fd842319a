"""Chi-square hypothesis test: densities, detection SNR, ML threshold, decision.

Under H0 (bit 0) the statistic is a normalized sum of W squared noise bins;
under H1 (bit 1) the backscatter adds a noncentral component with
noncentrality lambda = W * gamma, where gamma is the detection SNR

    gamma = |eta|^2 * Px * Pf / Pw
          = (R+1) |eta|^2 Ps (sum_m |g_m|^2)(sum_k |f_k|^2) / (2 (T+1) Nw).

Two degree-of-freedom conventions are supported. "paper" models the
statistic directly as chi-square with W dof (and noncentral chi-square with
lambda = W*gamma under H1). "complex" uses the statistically exact scaling
for complex samples: 2*Gamma_t is chi-square with 2W dof (noncentrality
2*W*gamma), i.e. density(x) = 2 * f(2x) with doubled parameters.

The ML threshold is where the two densities cross. threshold_paper evaluates
the closed form obtained by pulling the Bessel kernel's exponentials apart
(which is what makes it solvable, at the cost of an approximation);
threshold_exact finds the true crossing by bisection on the log-density
difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .numerics import (
    log_chi2_pdf,
    log_gamma,
    log_noncentral_chi2_pdf,
    sin_power_integral,
)
from .phy import ChannelSet, SystemConfig
from .receiver import DetectionStatistic

_LN2 = math.log(2.0)


class ThresholdBracketError(RuntimeError):
    """No density crossing could be bracketed (degenerate SNR)."""


class SnrBreakdown(NamedTuple):
    gamma: float
    Px: float
    Pf: float
    Pw: float


@dataclass(frozen=True)
class DetectorParams:
    """Hypothesis-test parameters for one operating point."""

    W: int
    gamma: float
    dof_convention: str = "paper"
    threshold: float | None = None

    def __post_init__(self):
        if self.W < 1:
            raise ValueError(f"W must be >= 1, got {self.W}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.dof_convention not in ("paper", "complex"):
            raise ValueError(f"unknown dof convention {self.dof_convention!r}")

    @property
    def lam(self) -> float:
        """Noncentrality parameter, lambda = W * gamma."""
        return self.W * self.gamma


def detection_snr(channels: ChannelSet, config: SystemConfig) -> SnrBreakdown:
    """Detection SNR gamma and the powers Px, Pf, Pw it is built from."""
    if config.Nw == 0:
        raise ValueError("detection SNR undefined for zero noise power")
    pw = 2.0 * (config.T + 1) * config.Nw
    px = (config.R + 1) * config.Ps * channels.sum_g2
    pf = channels.sum_f2
    gamma = (abs(config.eta) ** 2) * px * pf / pw
    return SnrBreakdown(gamma=gamma, Px=px, Pf=pf, Pw=pw)


def log_pdf_h0(x: float, params: DetectorParams) -> float:
    if params.dof_convention == "paper":
        return log_chi2_pdf(x, params.W)
    return _LN2 + log_chi2_pdf(2.0 * x, 2 * params.W)


def log_pdf_h1(x: float, params: DetectorParams) -> float:
    if params.dof_convention == "paper":
        return log_noncentral_chi2_pdf(x, params.W, params.lam)
    return _LN2 + log_noncentral_chi2_pdf(2.0 * x, 2 * params.W, 2.0 * params.lam)


def pdf_h0(x: float, params: DetectorParams) -> float:
    """Density of the statistic under H0 (bit 0); zero for x <= 0."""
    lv = log_pdf_h0(x, params)
    return 0.0 if lv == -math.inf else math.exp(lv)


def pdf_h1(x: float, params: DetectorParams) -> float:
    """Density of the statistic under H1 (bit 1); zero for x <= 0."""
    lv = log_pdf_h1(x, params)
    return 0.0 if lv == -math.inf else math.exp(lv)


@lru_cache(maxsize=None)
def threshold_paper(W: int, gamma: float) -> float:
    """Closed-form detection threshold (separable-kernel approximation).

    T_h = (ln( sqrt(pi) Gamma(W/2 - 1/2)
               / (e^{-W gamma/2} Gamma(W/2) integral) ))^2 / (W gamma)

    with integral = sin_power_integral(W). The log argument is assembled in
    the log domain so large W*gamma cannot overflow.
    """
    if W < 2:
        raise ValueError(f"closed form requires W >= 2, got {W}")
    if gamma <= 0:
        raise ValueError(f"closed form requires gamma > 0, got {gamma}")
    log_arg = (
        0.5 * math.log(math.pi)
        + log_gamma(W / 2.0 - 0.5)
        + W * gamma / 2.0
        - log_gamma(W / 2.0)
        - math.log(sin_power_integral(W))
    )
    return log_arg ** 2 / (W * gamma)


def _h0_mode(params: DetectorParams) -> float:
    if params.dof_convention == "paper":
        return max(params.W - 2.0, 0.0)
    return max(params.W - 1.0, 0.0)


@lru_cache(maxsize=None)
def _threshold_exact_cached(W: int, gamma: float, dof_convention: str,
                            xtol: float) -> float:
    params = DetectorParams(W=W, gamma=gamma, dof_convention=dof_convention)

    def diff(x: float) -> float:
        return log_pdf_h0(x, params) - log_pdf_h1(x, params)

    # f0 dominates below the crossing, f1 above; expand each end until the
    # sign change is bracketed
    lo = max(_h0_mode(params), 1e-8)
    hi = W * (1.0 + gamma)
    for _ in range(200):
        if diff(lo) > 0:
            break
        lo *= 0.5
    else:
        raise ThresholdBracketError(f"no H0-dominant region found (W={W}, gamma={gamma})")
    for _ in range(200):
        if diff(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ThresholdBracketError(f"no H1-dominant region found (W={W}, gamma={gamma})")
    # capped iterations: at large x one float64 ulp can exceed xtol
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid <= lo or mid >= hi:
            break
        if diff(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_exact(params: DetectorParams, xtol: float = 1e-10) -> float:
    """ML threshold as the true crossing of the H0/H1 densities (bisection)."""
    if params.gamma <= 0:
        raise ValueError(f"threshold requires gamma > 0, got {params.gamma}")
    return _threshold_exact_cached(params.W, params.gamma, params.dof_convention, xtol)


def threshold_for(config: SystemConfig, W: int, gamma: float) -> float:
    """Threshold per the configured mode; gamma == 0 degenerates to W.

    With gamma == 0 the two hypotheses coincide and any positive threshold
    yields chance-level decisions; the H0 mean keeps the detector runnable.
    """
    if gamma == 0:
        return float(W)
    if config.threshold_mode == "closed-form":
        return threshold_paper(W, gamma)
    return threshold_exact(
        DetectorParams(W=W, gamma=gamma, dof_convention=config.dof_convention)
    )


def decide(statistic, threshold: float) -> int:
    """Threshold comparison; exact ties resolve to 1."""
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    g = statistic.gamma_t if isinstance(statistic, DetectionStatistic) else float(statistic)
    return 1 if g >= threshold else 0
