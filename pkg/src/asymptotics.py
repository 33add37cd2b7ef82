"""
Log-space evaluation of the asymptotic count and volume formulas.

Every formula is evaluated as a natural log at WORKING_DPS digits and
returned as a LogReal; conversion to plain numbers happens at the
reporting boundary.
"""

import functools
import logging
import math
from fractions import Fraction
from typing import Literal, Sequence

import mpmath

from .config import DEFAULT_OMEGA, WORKING_DPS
from .errors import DomainError
from .logreal import LogReal, to_mpf
from .schemas import CoefficientSet, DiagonalSpec, MomentSummary, RowSums, ValidityReport

logger = logging.getLogger("symstoch.asymptotics")


# --- Moments ---


def moments(rs: RowSums) -> MomentSummary:
    """lam, centered deviations eps_j and power sums y_2..y_4, exact where possible."""
    n, x = rs.n, rs.x
    if n < 3:
        raise DomainError(f"moments need N >= 3 (eps divides by N-2), got N={n}")
    lam = Fraction(x, n * (n - 1))
    centre = Fraction(x, n)  # lam * (N-1)
    deviations = [t - centre for t in rs.t]
    return MomentSummary(
        n=n,
        x=x,
        lam=lam,
        eps=tuple(float(Fraction(2, n - 2) * d) for d in deviations),
        y2=sum((d**2 for d in deviations), Fraction(0)),
        y3=sum((d**3 for d in deviations), Fraction(0)),
        y4=sum((d**4 for d in deviations), Fraction(0)),
    )


def contour_lambdas(rs: RowSums) -> list[float]:
    """Per-row saddle parameters lam_j = lam + eps_j."""
    m = moments(rs)
    return [float(m.lam) + e for e in m.eps]


# --- Counting formula ---


def _leading_log(n: int, x: int, lam: mpmath.mpf) -> mpmath.mpf:
    q = lam * (lam + 1)
    return (
        mpmath.log(2) / 2
        + math.comb(n, 2) * mpmath.log1p(lam)
        - mpmath.mpf(n) / 2 * mpmath.log(2 * mpmath.pi * q * n)
        + mpmath.mpf(x) / 2 * mpmath.log1p(1 / lam)
        + (14 * lam**2 + 14 * lam - 1) / (12 * q)
    )


def count_prefactor(n: int, x: int) -> LogReal:
    """The counting formula with every row-sum correction set to exp[0]."""
    if x <= 0:
        raise DomainError("the counting formula needs lam > 0")
    with mpmath.workdps(WORKING_DPS):
        lam = to_mpf(Fraction(x, n * (n - 1)))
        return LogReal.from_log(_leading_log(n, x, lam))


def estimate_count(rs: RowSums) -> LogReal:
    """Asymptotic number of matrices with row sums rs.t, without the error factor."""
    m = moments(rs)
    if m.lam == 0:
        raise DomainError("the counting formula needs lam > 0; count the zero matrix exactly")
    with mpmath.workdps(WORKING_DPS):
        n = m.n
        lam = to_mpf(m.lam)
        y2, y3, y4 = to_mpf(m.y2), to_mpf(m.y3), to_mpf(m.y4)
        q = lam * (lam + 1)
        corrections = (
            -y2 / (2 * q * n)
            - y2 / (q * n**2)
            + (2 * lam + 1) * y3 / (6 * q**2 * n**2)
            - (3 * lam**2 + 3 * lam + 1) * y4 / (12 * q**3 * n**3)
            + y2**2 / (4 * q**2 * n**4)
        )
        value = LogReal.from_log(_leading_log(n, m.x, lam) + corrections)
    logger.debug("Estimated count for N=%d t=%s: 10^%s", n, rs.t, mpmath.nstr(value.log10(), 6))
    return value


def total_matrices_asymptotic(n: int, x: int) -> LogReal:
    """Stirling form of the stars-and-bars total."""
    if x <= 0:
        raise DomainError("the Stirling form needs lam > 0")
    with mpmath.workdps(WORKING_DPS):
        lam = to_mpf(Fraction(x, n * (n - 1)))
        log_value = (
            -mpmath.log(n)
            - mpmath.log(mpmath.pi * lam * (lam + 1)) / 2
            + math.comb(n, 2) * mpmath.log1p(lam)
            + mpmath.mpf(x) / 2 * mpmath.log1p(1 / lam)
        )
        return LogReal.from_log(log_value)


def coverage_fraction(lam: float) -> float:
    """Fraction of all matrices with average entry lam that the counting formula covers."""
    if lam <= 0:
        raise DomainError(f"need lam > 0, got {lam}")
    return math.exp(-1.0 / (4.0 * lam * (lam + 1.0)))


def covered_matrices(n: int, x: int) -> LogReal:
    """Leading-order number of matrices within reach of the counting formula."""
    lam = x / (n * (n - 1))
    return total_matrices_asymptotic(n, x) * coverage_fraction(lam)


def reference_values(n: int, lam: float, k: int) -> float:
    """Reference scale 2^-k lam^k N^(1+k/2) for the power sum y_k."""
    if k < 2:
        raise DomainError(f"reference values start at k = 2, got {k}")
    return 2.0**-k * lam**k * n ** (1 + k / 2)


# --- Lower bound ---


def contour_pair_factor(lam_k: float, lam_l: float) -> mpmath.mpf:
    """sqrt((1+lam_k)(1+lam_l)) / (sqrt((1+lam_k)(1+lam_l)) - sqrt(lam_k lam_l))."""
    with mpmath.workdps(WORKING_DPS):
        a, b = to_mpf(lam_k), to_mpf(lam_l)
        s = mpmath.sqrt((1 + a) * (1 + b))
        return s / (s - mpmath.sqrt(a * b))


def lower_bound(rs: RowSums, alpha: float, lambdas: Sequence[float]) -> LogReal:
    """Threshold below which the counting formula does not aim for accuracy."""
    n = rs.n
    if not 0 < alpha < 0.5:
        raise DomainError(f"alpha must lie in (0, 1/2), got {alpha}")
    if len(lambdas) != n:
        raise DomainError(f"expected {n} contour parameters, got {len(lambdas)}")
    if any(v <= 0 for v in lambdas):
        raise DomainError("contour parameters must be positive")
    with mpmath.workdps(WORKING_DPS):
        lam_j = [to_mpf(v) for v in lambdas]
        lam = mpmath.fsum(lam_j) / n
        q = lam * (lam + 1)
        log_value = (
            -mpmath.mpf(n) / 2 * mpmath.log(2 * mpmath.pi * q * n)
            + mpmath.fsum(mpmath.mpf(t) / 2 * mpmath.log1p(1 / lj) for t, lj in zip(rs.t, lam_j))
            + mpmath.fsum(
                mpmath.log(contour_pair_factor(lam_j[k], lam_j[l]))
                for k in range(n)
                for l in range(k + 1, n)
            )
            + (14 * lam**2 + 14 * lam - 1) / (12 * q)
            - mpmath.power(n, 1 - 2 * to_mpf(alpha))
        )
        return LogReal.from_log(log_value)


# --- Polylogarithm coefficients ---


@functools.cache
def eulerian_number(m: int, k: int) -> int:
    """Eulerian number A(m, k): permutations of m elements with k ascents."""
    return sum((-1) ** i * math.comb(m + 1, i) * (k + 1 - i) ** m for i in range(k + 1))


def polylog_negative(m: int, z) -> mpmath.mpf:
    """Li_{-m}(z) for m >= 0 as the Eulerian rational function of z."""
    if m < 0:
        raise DomainError(f"order must be nonpositive, got Li_{-m}")
    with mpmath.workdps(WORKING_DPS):
        z = to_mpf(z)
        if z == 1:
            raise DomainError("Li_{-m}(z) has a pole at z = 1")
        if m == 0:
            return z / (1 - z)
        numerator = mpmath.fsum(eulerian_number(m, k) * z ** (m - k) for k in range(m))
        return numerator / (1 - z) ** (m + 1)


_CLOSED_FORMS = {
    1: lambda mu: mu,
    2: lambda mu: mu * (mu + 1) / 2,
    3: lambda mu: mu * (mu + 1) * (2 * mu + 1) / 6,
    4: lambda mu: mu * (mu + 1) * (6 * mu**2 + 6 * mu + 1) / 24,
}


def polylog_coefficient(
    n: int, mu: float, method: Literal["auto", "closed", "eulerian"] = "auto"
) -> float:
    """
    Coefficient A_n(mu) of (iy)^n in log 1/(1 - mu(e^{iy} - 1)).

    A_n(mu) = (-1)^n/n! Li_{1-n}(1 + 1/mu); at n = 1 the inversion of Li_0
    contributes an extra -1, which the Eulerian branch subtracts.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if mu <= 0:
        raise DomainError(f"mu must be positive, got {mu}")
    if method == "auto":
        method = "closed" if n in _CLOSED_FORMS else "eulerian"
    if method == "closed":
        if n not in _CLOSED_FORMS:
            raise DomainError(f"closed forms exist for n <= 4, got {n}")
        return float(_CLOSED_FORMS[n](mu))
    with mpmath.workdps(WORKING_DPS):
        z = 1 + 1 / to_mpf(mu)
        value = (-1) ** n / mpmath.factorial(n) * polylog_negative(n - 1, z)
        if n == 1:
            value -= 1
        return float(value)


def helper_constants(lam: float) -> CoefficientSet:
    if lam <= 0:
        raise DomainError(f"need lam > 0, got {lam}")
    q = lam * (lam + 1)
    return CoefficientSet(
        argument=lam,
        a1=polylog_coefficient(1, lam),
        a2=polylog_coefficient(2, lam),
        a3=polylog_coefficient(3, lam),
        a4=polylog_coefficient(4, lam),
        b1=(2 * lam + 1) / (8 * q),
        c1=(2 * lam**2 + 2 * lam + 1) / (16 * q**2),
        b2=(2 * lam + 1) / 4,
        c2=(2 * lam**2 + 2 * lam + 1) / (16 * q),
        d2=(6 * lam**2 + 6 * lam + 1) / (8 * q),
    )


# --- Validity diagnostics ---


def omega_window(n: int) -> tuple[float, float]:
    """Admissible omega range (log log N / (2 log N), 1/4) of the volume formula."""
    if n < 2:
        raise DomainError(f"need N >= 2, got {n}")
    log_n = math.log(n)
    return (math.log(log_n) / (2 * log_n), 0.25)


def omega_for_threshold(n: int, lam: float, threshold: float) -> float:
    """The omega for which lam * N^(1/2+omega) equals `threshold`."""
    return math.log(threshold / lam) / math.log(n) - 0.5


def _report(omega: float, n: int, ratios: list[float], threshold: float, lambda_log_n=None) -> ValidityReport:
    window = omega_window(n)
    max_ratio = max(ratios)
    omega_ok = window[0] < omega < window[1]
    rows_ok = max_ratio <= 1.0
    return ValidityReport(
        omega=omega,
        per_row_ratio=tuple(ratios),
        max_ratio=max_ratio,
        threshold=threshold,
        omega_window=window,
        omega_in_window=omega_ok,
        rows_satisfied=rows_ok,
        in_window=omega_ok and rows_ok,
        lambda_log_n=lambda_log_n,
    )


def validity_check(rs: RowSums, omega: float = DEFAULT_OMEGA) -> ValidityReport:
    """Per-row |t_j - lam(N-1)| / (lam N^(1/2+omega)); advisory only."""
    n = rs.n
    lam = Fraction(rs.x, n * (n - 1))
    centre = Fraction(rs.x, n)
    threshold = float(lam) * n ** (0.5 + omega)
    deviations = [abs(float(t - centre)) for t in rs.t]
    if threshold == 0:
        ratios = [0.0 if d == 0 else math.inf for d in deviations]
    else:
        ratios = [d / threshold for d in deviations]
    return _report(omega, n, ratios, threshold, lambda_log_n=float(lam) * math.log(n))


def diagonal_validity(ds: DiagonalSpec, omega: float = DEFAULT_OMEGA) -> ValidityReport:
    """Per-row N^(1/2-omega) (N-1)/(N-chi) |h_j - chi/N|; the volume-side criterion."""
    n = ds.n
    gap = float(n - ds.chi)
    scale = n ** (0.5 - omega) * (n - 1) / gap
    mean = ds.chi / n
    ratios = [scale * abs(float(h - mean)) for h in ds.h]
    return _report(omega, n, ratios, threshold=1.0 / scale)


def qualitative_criterion(ds: DiagonalSpec) -> float:
    """(N-1)^2 sum_j (h_j - chi/N)^2 / ((N-chi)^2 log N); small values mark reasonable diagonals."""
    n = ds.n
    mean = ds.chi / n
    z2 = sum(((h - mean) ** 2 for h in ds.h), Fraction(0))
    return float((n - 1) ** 2 * z2 / (n - ds.chi) ** 2) / math.log(n)


# --- Volume formula ---


def _volume_leading_log(n: int, gap: mpmath.mpf) -> mpmath.mpf:
    pairs = math.comb(n, 2)
    return (
        mpmath.log(2) / 2
        + mpmath.mpf(7) / 6
        + pairs * (1 + mpmath.log(gap / (n * (n - 1))))
        + mpmath.mpf(n) / 2 * mpmath.log(n * (n - 1) ** 2 / (2 * mpmath.pi * gap**2))
    )


def volume_prefactor(n: int, chi) -> LogReal:
    """The volume formula with every diagonal correction set to exp[0]."""
    if chi >= n:
        raise DomainError("the diagonal must sum to less than N")
    with mpmath.workdps(WORKING_DPS):
        return LogReal.from_log(_volume_leading_log(n, n - to_mpf(chi)))


def estimate_volume(ds: DiagonalSpec) -> LogReal:
    """Asymptotic volume of the symmetric stochastic matrices with diagonal ds.h."""
    n = ds.n
    if n < 4:
        raise DomainError(f"the volume formula needs N >= 4, got N={n}")
    chi = ds.chi
    if chi >= n:
        raise DomainError("the diagonal must sum to less than N")
    mean = chi / n
    deviations = [h - mean for h in ds.h]
    z2 = sum((d**2 for d in deviations), Fraction(0))
    z3 = sum((d**3 for d in deviations), Fraction(0))
    z4 = sum((d**4 for d in deviations), Fraction(0))
    with mpmath.workdps(WORKING_DPS):
        gap = n - to_mpf(chi)
        r = (n - 1) / gap
        z2, z3, z4 = to_mpf(z2), to_mpf(z3), to_mpf(z4)
        corrections = (
            -n * r**2 * z2 / 2
            - r**2 * z2
            - n * r**3 * z3 / 3
            - n * r**4 * z4 / 4
            + r**4 * z2**2 / 4
        )
        return LogReal.from_log(_volume_leading_log(n, gap) + corrections)
