r"""Three-parameter (Prabhakar) Mittag-Leffler function.

.. math::

    E^{\gamma}_{\alpha,\beta}(z) = \sum_{p \ge 0}
        \frac{\Gamma(\gamma + p)\, z^p}{p!\, \Gamma(\gamma)\, \Gamma(\alpha p + \beta)}

The series is summed in double precision from log-magnitude coefficients.
When the terms cancel badly (large negative ``z``) the affected entries are
re-summed with :mod:`mpmath` at a working precision chosen from the size of
the largest term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, gammasgn

from fracdr.errors import AccuracyError, DomainError

__all__ = ["MlfParams", "mittag_leffler_3p", "ml", "ACCURACY_DOMAIN", "TERM_BUDGET"]

#: Largest |z| accepted. Outside it an :class:`AccuracyError` is raised.
ACCURACY_DOMAIN = 200.0
#: Maximum number of series terms, in either precision.
TERM_BUDGET = 10_000

_EPS = np.finfo(float).eps
_LOG_ABS_FLOOR = math.log(1e-18)
_LOG_REL_FLOOR = math.log(1e-16)
# entries whose cancellation error estimate exceeds both bounds are
# recomputed in extended precision
_CANCELLATION_RTOL = 1e-11
_CANCELLATION_ATOL = 1e-14


@dataclass(frozen=True)
class MlfParams:
    """Parameters ``(gamma1, gamma2, gamma3)`` = ``(alpha, beta, gamma)``."""

    gamma1: float
    gamma2: float
    gamma3: float = 1.0

    def __post_init__(self) -> None:
        if not (self.gamma1 > 0):
            raise DomainError(f"gamma1 must be positive, got {self.gamma1}")
        if not (self.gamma2 > 0):
            raise DomainError(f"gamma2 must be positive, got {self.gamma2}")
        if not math.isfinite(self.gamma3):
            raise DomainError(f"gamma3 must be finite, got {self.gamma3}")


def _log_rgamma(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log|1/Gamma(x)| and its sign; poles of Gamma give sign 0."""
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.round(x))
    with np.errstate(invalid="ignore"):
        logmag = np.where(pole, -np.inf, -gammaln(np.where(pole, 0.5, x)))
        sign = np.where(pole, 0.0, gammasgn(np.where(pole, 0.5, x)))
    return logmag, sign


@lru_cache(maxsize=512)
def _coefficients(alpha: float, beta: float, gamma: float, nterms: int):
    """Log-magnitudes and signs of the series coefficients c_0 .. c_{nterms-1}.

    ``beta`` may be non-positive here (used for time derivatives of kernels);
    the reciprocal gamma then vanishes at the poles.
    """
    p = np.arange(nterms, dtype=float)
    # Pochhammer (gamma)_p / p! accumulated in logs
    steps = gamma + p[:-1]
    step_sign = np.sign(steps)
    with np.errstate(divide="ignore"):
        step_log = np.log(np.abs(steps)) - np.log(p[1:])
    log_poch = np.concatenate(([0.0], np.cumsum(step_log)))
    sign_poch = np.concatenate(([1.0], np.cumprod(step_sign)))
    log_rg, sign_rg = _log_rgamma(alpha * p + beta)
    logc = log_poch + log_rg
    sign = sign_poch * sign_rg
    logc = np.where(sign == 0, -np.inf, logc)
    logc.setflags(write=False)
    sign.setflags(write=False)
    return logc, sign


def _nterms_for(alpha: float, beta: float, gamma: float, zmax: float) -> int:
    """Smallest term count after which every tail term is negligible."""
    logz = math.log(zmax) if zmax > 0 else -math.inf
    n = 64
    while True:
        logc, sign = _coefficients(alpha, beta, gamma, n)
        with np.errstate(invalid="ignore"):
            lt = logc + np.arange(n) * logz if zmax > 0 else np.where(np.arange(n) == 0, logc, -np.inf)
        lt = np.where(sign == 0, -np.inf, lt)
        peak = int(np.argmax(lt))
        lmax = lt[peak]
        floor = max(_LOG_ABS_FLOOR, _LOG_REL_FLOOR + lmax)
        small = lt < floor
        # first index past the peak from which all remaining terms are small
        tail_ok = np.flip(np.logical_and.accumulate(np.flip(small)))
        idx = np.nonzero(tail_ok[peak:])[0]
        if idx.size and peak + idx[0] < n - 1:
            return peak + int(idx[0]) + 1
        if n >= TERM_BUDGET:
            raise AccuracyError(
                f"Mittag-Leffler series did not converge within {TERM_BUDGET} terms "
                f"(alpha={alpha}, beta={beta}, gamma={gamma}, |z|={zmax})"
            )
        n = min(2 * n, TERM_BUDGET)


def _series_mp(alpha: float, beta: float, gamma: float, z: float, dps: int) -> float:
    with mpmath.workdps(dps):
        a, b, g, zz = (mpmath.mpf(v) for v in (alpha, beta, gamma, z))
        total = mpmath.mpf(0)
        poch = mpmath.mpf(1)
        zp = mpmath.mpf(1)
        tol = mpmath.mpf(10) ** (-dps)
        prev_small = False
        for p in range(TERM_BUDGET):
            term = poch * zp * mpmath.rgamma(a * p + b)
            total += term
            small = abs(term) <= tol * abs(total) or term == 0
            if small and prev_small and p > 2:
                return float(total)
            prev_small = small
            poch = poch * (g + p) / (p + 1)
            zp = zp * zz
    raise AccuracyError(f"extended-precision Mittag-Leffler sum exceeded {TERM_BUDGET} terms at z={z}")


def _rescue(alpha: float, beta: float, gamma: float, z: float, biggest: float, guess: float) -> float:
    """Re-sum one entry in extended precision, raising precision until stable."""
    dps = 0
    value = guess
    while True:
        ratio = biggest / max(abs(value), 1e-300)
        needed = int(24 + math.log10(max(ratio, 1.0)))
        if needed <= dps:
            return value
        if needed > 2000:
            raise AccuracyError(f"cancellation too severe at z={z}")
        dps = needed
        value = _series_mp(alpha, beta, gamma, z, dps)


def _series(alpha: float, beta: float, gamma: float, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    if flat.size == 0:
        return z.copy()
    if not np.all(np.isfinite(flat)):
        raise DomainError("Mittag-Leffler argument must be finite")
    zmax = float(np.max(np.abs(flat)))
    if zmax > ACCURACY_DOMAIN:
        raise AccuracyError(f"|z| = {zmax} outside the accuracy domain |z| <= {ACCURACY_DOMAIN}")
    n = _nterms_for(alpha, beta, gamma, zmax)
    logc, sign = _coefficients(alpha, beta, gamma, n)
    live = sign != 0
    logz = math.log(zmax) if zmax > 0 else 0.0
    if np.all(logc[live] > -700) and np.max(logc[live] + np.arange(n)[live] * logz) < 700:
        # everything representable: plain Horner, with |terms| summed for the error estimate
        coef = np.where(live, sign * np.exp(np.where(live, logc, 0.0)), 0.0)
        total = np.full(flat.shape, coef[-1])
        absum = np.full(flat.shape, abs(coef[-1]))
        absz = np.abs(flat)
        for c in coef[-2::-1]:
            total = total * flat + c
            absum = absum * absz + abs(c)
        err_est = 4.0 * _EPS * absum
        bad = err_est > np.maximum(_CANCELLATION_ATOL, _CANCELLATION_RTOL * np.abs(total))
        for i in np.nonzero(bad)[0]:
            total[i] = _rescue(alpha, beta, gamma, float(flat[i]), float(absum[i]), float(total[i]))
        return total.reshape(z.shape)
    p = np.arange(n, dtype=float)[:, None]
    absz = np.abs(flat)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.where(absz > 0, np.log(absz), -np.inf)
        lt = logc[:, None] + np.where(p == 0, 0.0, p * logz)
    zsign = np.where(flat < 0, -1.0, 1.0)[None, :] ** p
    with np.errstate(over="ignore", invalid="ignore"):
        terms = sign[:, None] * zsign * np.exp(lt)
        total = terms.sum(axis=0)
        biggest = np.max(np.abs(terms), axis=0)
    if not np.all(np.isfinite(total)):
        raise AccuracyError("Mittag-Leffler value overflows double precision")
    err_est = 4.0 * _EPS * biggest * math.sqrt(n)
    bad = err_est > np.maximum(_CANCELLATION_ATOL, _CANCELLATION_RTOL * np.abs(total))
    for i in np.nonzero(bad)[0]:
        total[i] = _rescue(alpha, beta, gamma, float(flat[i]), float(biggest[i]), float(total[i]))
    return total.reshape(z.shape)


def mittag_leffler_3p(params: MlfParams, z):
    """Evaluate :math:`E^{\\gamma_3}_{\\gamma_1,\\gamma_2}(z)` for real scalar or array ``z``.

    Accurate to about 1e-12 absolute or 1e-10 relative inside
    ``|z| <= ACCURACY_DOMAIN``.
    """
    out = _series(params.gamma1, params.gamma2, params.gamma3, z)
    return float(out) if np.ndim(z) == 0 else out


def ml(alpha: float, beta: float, gamma: float, z):
    """Shorthand for ``mittag_leffler_3p(MlfParams(alpha, beta, gamma), z)``."""
    return mittag_leffler_3p(MlfParams(alpha, beta, gamma), z)
