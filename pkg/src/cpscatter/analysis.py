"""Theoretical performance: error probabilities, BER approximation, PDF tables.

With equiprobable bits the bit error rate is P_e = (p0 + p1) / 2, where
p0 (false alarm) integrates the H0 density above the threshold and p1
(missed detection) integrates the H1 density below it. ber_exact evaluates
both by adaptive quadrature against the configured densities; ber_approx is
the moment-matched Gaussian approximation

    P_e ~= 1/2 Q((T_h - W)/sqrt(2W)) + 1/2 Q((W(1+gamma) - T_h)/sqrt(2W(1+2gamma))).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .detector import DetectorParams, pdf_h0, pdf_h1
from .numerics import gaussian_q


@dataclass(frozen=True)
class BerPoint:
    """Theory values for one (SNR, W) operating point."""

    snr_db: float
    W: int
    ber_theory_approx: float
    ber_theory_exact: float
    p0: float
    p1: float


def ber_approx(W: int, gamma: float, threshold: float) -> float:
    """Moment-matched Gaussian approximation of the BER."""
    if W < 1 or gamma < 0 or not threshold > 0:
        raise ValueError("need W >= 1, gamma >= 0, threshold > 0")
    t1 = gaussian_q((threshold - W) / np.sqrt(2.0 * W))
    t2 = gaussian_q((W * (1.0 + gamma) - threshold) / np.sqrt(2.0 * W * (1.0 + 2.0 * gamma)))
    return 0.5 * t1 + 0.5 * t2


def _quad_checked(fn, lo, hi) -> float:
    val, err = quad(fn, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
    if err > max(1e-10, 1e-6 * abs(val)):
        raise RuntimeError(f"quadrature did not converge on [{lo}, {hi}] (err={err})")
    return max(val, 0.0)


def ber_exact(params: DetectorParams, threshold: float):
    """(p0, p1, P_e) by quadrature of the modeled densities around the threshold."""
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    p0 = _quad_checked(lambda x: pdf_h0(x, params), threshold, np.inf)
    p1 = _quad_checked(lambda x: pdf_h1(x, params), 0.0, threshold)
    p0 = min(p0, 1.0)
    p1 = min(p1, 1.0)
    return p0, p1, 0.5 * (p0 + p1)


def pdf_curves(params: DetectorParams, x_grid) -> np.ndarray:
    """Tabulated (x, f0(x), f1(x)) rows for plotting the two densities."""
    x = np.asarray(x_grid, dtype=np.float64)
    if x.ndim != 1 or np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be 1-D, positive, strictly increasing")
    f0 = np.array([pdf_h0(v, params) for v in x])
    f1 = np.array([pdf_h1(v, params) for v in x])
    return np.column_stack([x, f0, f1])


def theory_point(snr_db: float, W: int, gamma: float, threshold: float,
                 dof_convention: str) -> BerPoint:
    """Bundle exact and approximate theory values for one sweep point."""
    params = DetectorParams(W=W, gamma=gamma, dof_convention=dof_convention)
    p0, p1, pe = ber_exact(params, threshold)
    return BerPoint(
        snr_db=snr_db,
        W=W,
        ber_theory_approx=ber_approx(W, gamma, threshold),
        ber_theory_exact=pe,
        p0=p0,
        p1=p1,
    )
