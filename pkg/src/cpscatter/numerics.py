"""Special functions, transforms, and reproducible random streams.

Everything downstream (channel generation, the DFT receiver, the chi-square
detection densities, Monte Carlo trials) is built on the primitives in this
module. Complex baseband samples are plain ``numpy.complex128`` values; all
public functions return finite results on their documented domains.

Numerical conventions:
  * the DFT is the unnormalized matrix form, F[p, q] = exp(-2j*pi*p*q/n);
  * densities with large noncentrality are evaluated in the log domain
    (log-gamma plus a log-domain Bessel series) so nothing overflows for
    noncentralities up to ~1e4;
  * random streams are Philox4x64 counter-based generators keyed by
    (seed, stream) pairs, which makes every draw sequence a pure function
    of those two integers on any platform and worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp

_U64 = 1 << 64
_LN2 = math.log(2.0)

# series/asymptotic switch for the modified Bessel function; the series is
# exact-to-roundoff but needs ~u/2 terms, so very large arguments (far beyond
# any tested operating point) fall back to the large-argument expansion
_BESSEL_SERIES_MAX_U = 20_000.0


@dataclass(frozen=True)
class RngStream:
    """Value identifying one reproducible random stream.

    Identical (seed, stream) pairs always yield the identical sample
    sequence. Streams are single-owner values: derive a fresh stream id per
    trial instead of sharing one generator across consumers.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        """Materialize the stream as a Philox4x64-backed Generator."""
        return np.random.Generator(
            np.random.Philox(key=[self.seed % _U64, self.stream % _U64])
        )


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream or a live Generator and return a Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def complex_gaussian(rng, variance: float, size: int | None = None):
    """Draw circularly symmetric complex Gaussian samples, CN(0, variance).

    Real and imaginary parts are independent N(0, variance/2). With
    variance == 0 the result is exactly zero and the stream is not consumed.
    Returns a complex scalar if size is None, else a 1-D complex array.
    """
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    n = 1 if size is None else int(size)
    if variance == 0.0:
        out = np.zeros(n, dtype=np.complex128)
    else:
        gen = as_generator(rng)
        v = gen.standard_normal(2 * n)
        out = (v[0::2] + 1j * v[1::2]) * math.sqrt(variance / 2.0)
    return out[0] if size is None else out


def dft(v) -> np.ndarray:
    """Unnormalized DFT of a 1-D vector, any length.

    Matches the matrix definition sum_q v[q] exp(-2j*pi*p*q/n) with no
    1/sqrt(n) factor; length is preserved.
    """
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("dft expects a non-empty 1-D vector")
    return np.fft.fft(arr)


def gamma_fn(x: float) -> float:
    """Gamma function for x > 0.

    Values above x ~ 171.6 exceed the float64 range; use log_gamma for
    anything that large.
    """
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gaussian_q(x: float) -> float:
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Q(x) + Q(-x) = 1 to machine precision; deep tails underflow smoothly
    to 0.0 rather than raising.
    """
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def log_bessel_i(r: float, u: float) -> float:
    """log of the modified Bessel function of the first kind, I_r(u).

    Power series evaluated in the log domain (stable for large u where the
    linear-domain value overflows). Returns -inf for u == 0 with r > 0.
    """
    if r < 0:
        raise ValueError(f"order must be >= 0, got {r}")
    if u < 0:
        raise ValueError(f"argument must be >= 0, got {u}")
    if u == 0.0:
        return 0.0 if r == 0.0 else -math.inf
    if u > _BESSEL_SERIES_MAX_U:
        return _log_bessel_i_asymptotic(r, u)
    half_u = u / 2.0
    log_half_u = math.log(half_u)
    # term ratio reaches 1 near k*; extend until the tail is negligible
    k_star = 0.5 * (-(r + 2.0) + math.sqrt(r * r + 4.0 * half_u * half_u))
    k_max = int(max(k_star, 0.0)) + 32
    while True:
        k = np.arange(k_max + 1, dtype=np.float64)
        log_terms = (2.0 * k + r) * log_half_u - gammaln(k + 1.0) - gammaln(k + r + 1.0)
        if log_terms[-1] < log_terms.max() - 40.0:
            break
        k_max *= 2
    return float(logsumexp(log_terms))


def _log_bessel_i_asymptotic(r: float, u: float) -> float:
    # I_r(u) ~ e^u / sqrt(2 pi u) * sum_j (-1)^j a_j(r) / u^j, truncated at
    # the smallest term; accurate to ~1e-10 relative for u >> r^2
    mu = 4.0 * r * r
    term = 1.0
    total = 1.0
    for j in range(1, 12):
        factor = -(mu - (2 * j - 1) ** 2) / (8.0 * j * u)
        nxt = term * factor
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return u - 0.5 * math.log(2.0 * math.pi * u) + math.log(total)


def bessel_i(r: float, u: float) -> float:
    """Modified Bessel function of the first kind, I_r(u), r >= 0, u >= 0."""
    lv = log_bessel_i(r, u)
    if lv == -math.inf:
        return 0.0
    return float(np.exp(lv))


def sin_power_integral(w: int) -> float:
    """Integral of exp(cos(theta)) * sin(theta)^(w-2) over [0, pi].

    Appears in the closed-form detection threshold denominator; w >= 2.
    """
    if w < 2:
        raise ValueError(f"requires w >= 2, got {w}")
    p = w - 2
    val, err = quad(
        lambda th: math.exp(math.cos(th)) * math.sin(th) ** p,
        0.0,
        math.pi,
        epsabs=1e-12,
        epsrel=1e-9,
    )
    if err > 1e-8 * max(abs(val), 1.0):
        raise RuntimeError(f"quadrature did not converge (w={w}, err={err})")
    return val


def _check_dof(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"degrees of freedom must be an integer >= 1, got {n}")


def log_chi2_pdf(x: float, n: int) -> float:
    """Log density of the central chi-square with n degrees of freedom."""
    _check_dof(n)
    if x <= 0:
        return -math.inf
    hn = 0.5 * n
    return -0.5 * x + (hn - 1.0) * math.log(x) - hn * _LN2 - math.lgamma(hn)


def chi2_pdf(x: float, n: int) -> float:
    """Central chi-square density; zero for x <= 0."""
    lv = log_chi2_pdf(x, n)
    return 0.0 if lv == -math.inf else math.exp(lv)


def log_noncentral_chi2_pdf(x: float, n: int, lam: float) -> float:
    """Log density of the noncentral chi-square (n dof, noncentrality lam).

    Evaluated as log-gamma / log-Bessel combinations so large lam (up to
    ~1e4 and beyond) neither overflows nor underflows prematurely.
    """
    _check_dof(n)
    if lam < 0:
        raise ValueError(f"noncentrality must be >= 0, got {lam}")
    if x <= 0:
        return -math.inf
    if lam == 0.0:
        return log_chi2_pdf(x, n)
    r = 0.5 * n - 1.0
    return (
        -_LN2
        + 0.25 * (n - 2.0) * (math.log(x) - math.log(lam))
        - 0.5 * (x + lam)
        + log_bessel_i(r, math.sqrt(lam * x))
    )


def noncentral_chi2_pdf(x: float, n: int, lam: float) -> float:
    """Noncentral chi-square density; zero for x <= 0, continuous at lam -> 0."""
    lv = log_noncentral_chi2_pdf(x, n, lam)
    return 0.0 if lv == -math.inf else float(np.exp(lv))
