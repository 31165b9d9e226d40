"""Effective-squeezing measures and ideal grid-state constructors.

A square-lattice grid state is characterized by the two stabilizer
displacement expectations <D(sqrt(2 pi))> and <D(i sqrt(2 pi))>. The
effective widths are Delta = sqrt(ln(1/|<D>|^2) / (2 pi)), quoted in dB as
-10 log10(Delta^2); the vacuum gives exactly 0 dB in both quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from gkpcavity import fock
from gkpcavity.fock import DensityMatrix, FockVector

STABILIZER_ALPHA = math.sqrt(2.0 * math.pi)

# Lattice step of the peak index s: peaks sit at alpha = s sqrt(pi/2).
PEAK_SPACING = math.sqrt(math.pi / 2.0)


def delta_to_db(delta: float) -> float:
    if delta == 0.0:
        return math.inf
    if math.isinf(delta):
        return -math.inf
    return -10.0 * math.log10(delta * delta)


def _delta_from_expect(value: complex) -> float:
    mag = abs(value)
    if mag >= 1.0 - 1e-12:
        return 0.0  # roundoff near an ideal state
    if mag == 0.0:
        return math.inf
    return math.sqrt(math.log(1.0 / mag**2) / (2.0 * math.pi))


@dataclass
class SqueezingReport:
    """Effective squeezing in both quadratures plus diagnostics.

    dx_expect is <D(i sqrt(2 pi))> (sets delta_x), dp_expect is
    <D(sqrt(2 pi))> (sets delta_p).
    """

    delta_x: float
    delta_p: float
    db_x: float
    db_p: float
    min_db: float
    dx_expect: complex
    dp_expect: complex
    success_probability: float = 1.0
    diagnostics: dict = field(default_factory=dict)


def effective_squeezing_from_expectations(
    dx_expect: complex,
    dp_expect: complex,
    success_probability: float = 1.0,
    **diagnostics,
) -> SqueezingReport:
    dx = _delta_from_expect(dx_expect)
    dp = _delta_from_expect(dp_expect)
    db_x = delta_to_db(dx)
    db_p = delta_to_db(dp)
    return SqueezingReport(
        delta_x=dx,
        delta_p=dp,
        db_x=db_x,
        db_p=db_p,
        min_db=min(db_x, db_p),
        dx_expect=complex(dx_expect),
        dp_expect=complex(dp_expect),
        success_probability=success_probability,
        diagnostics=dict(diagnostics),
    )


def effective_squeezing(
    rho: DensityMatrix, success_probability: float = 1.0
) -> SqueezingReport:
    """Effective squeezing of a normalized state in the Fock basis."""
    dim = rho.dim
    d_real = fock.displacement_operator(STABILIZER_ALPHA, dim)
    d_imag = fock.displacement_operator(1j * STABILIZER_ALPHA, dim)
    dp_expect = fock.expectation(rho, d_real)
    dx_expect = fock.expectation(rho, d_imag)
    return effective_squeezing_from_expectations(
        dx_expect, dp_expect, success_probability
    )


# ---------------------------------------------------------------------------
# peak weightings


@dataclass
class PeakWeights:
    """Amplitude envelope c_s over the grid peaks at alpha = s sqrt(pi/2).

    Support is restricted to one parity of s (even: logical 0 lattice,
    odd: the offset lattice the reflection protocol produces); both give
    the same stabilizer algebra.
    """

    s_values: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        self.s_values = np.asarray(self.s_values, dtype=int)
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.s_values.shape != self.coefficients.shape:
            raise ValueError("s_values and coefficients must have equal length")
        if self.s_values.size == 0:
            raise ValueError("need at least one peak")
        parities = set(int(s) % 2 for s in self.s_values)
        if len(parities) > 1:
            raise ValueError("peaks must share one parity of s")
        if len(set(self.s_values.tolist())) != self.s_values.size:
            raise ValueError("duplicate peak index")
        norm = np.linalg.norm(self.coefficients)
        if norm == 0:
            raise ValueError("all-zero weights")
        self.coefficients = self.coefficients / norm

    @property
    def parity(self) -> str:
        return "even" if int(self.s_values[0]) % 2 == 0 else "odd"

    @property
    def n_peaks(self) -> int:
        return self.s_values.size


def _centered_lattice(n_peaks: int) -> np.ndarray:
    """n peaks, step 2 in s, symmetric about 0 (even s for odd counts,
    odd s for even counts)."""
    return 2 * np.arange(n_peaks) - (n_peaks - 1)


def equal_weights(n_peaks: int) -> PeakWeights:
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    s = _centered_lattice(n_peaks)
    return PeakWeights(s, np.ones(n_peaks))


def two_level_weights(
    n_peaks: int, a: float | None = None, b: float | None = None
) -> PeakWeights:
    """Inner half of the peaks weighted by a, outer half by b (optimal
    constants when omitted)."""
    if n_peaks < 4 or n_peaks % 2:
        raise ValueError("two-level weighting needs an even n_peaks >= 4")
    if a is None or b is None:
        a, b = optimal_two_level()
    s = _centered_lattice(n_peaks)
    c = np.full(n_peaks, float(b))
    inner = np.argsort(np.abs(s), kind="stable")[: n_peaks // 2]
    c[inner] = a
    return PeakWeights(s, c)


def binomial_weights(rounds: int) -> PeakWeights:
    """2^rounds + 1 peaks with amplitudes proportional to binomial
    coefficients, as produced by iterated cat breeding."""
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    n = 2**rounds
    ks = np.arange(n + 1)
    logc = gammaln(n + 1.0) - gammaln(ks + 1.0) - gammaln(n - ks + 1.0)
    c = np.exp(logc - logc.max())
    s = 2 * ks - n
    return PeakWeights(s, c)


def optimal_two_level() -> tuple[float, float]:
    """The (a, b) pair maximizing the two-level stabilizer expectation:
    a = sqrt(1/2 + 1/sqrt(20)), b = sqrt(1/2 - 1/sqrt(20))."""
    a = math.sqrt(0.5 + 1.0 / math.sqrt(20.0))
    b = math.sqrt(0.5 - 1.0 / math.sqrt(20.0))
    return a, b


def analytic_Dp(weights: PeakWeights) -> float:
    """<D(sqrt(2 pi))> = sum_s c_s* c_{s+2} in the non-overlapping-peak
    limit; real for real envelopes."""
    index = {int(s): i for i, s in enumerate(weights.s_values)}
    c = weights.coefficients
    total = 0.0 + 0.0j
    for s, i in index.items():
        j = index.get(s + 2)
        if j is not None:
            total += np.conj(c[i]) * c[j]
    return float(total.real)


def two_level_expectation(a: float, n_peaks: int) -> float:
    """Closed-form <D(sqrt(2 pi))> for the two-level envelope with inner
    amplitude a (and b = sqrt(1-a^2)), used by the 1-D optimum check."""
    b = math.sqrt(max(0.0, 1.0 - a * a))
    return (n_peaks - (2 * a * a + 4 * b * b - 4 * a * b)) / n_peaks


def ideal_gkp_state(
    weights: PeakWeights, r: float, dim: int, tail_tol: float = 1e-6
) -> FockVector:
    """Normalized sum_s c_s D(s sqrt(pi/2)) S(r)|vac> on the truncated basis."""
    base = fock.squeezed_vacuum(r, dim).amplitudes
    psi = np.zeros(dim, dtype=complex)
    for s, c in zip(weights.s_values, weights.coefficients):
        d = fock.displacement_operator(PEAK_SPACING * float(s), dim)
        psi += c * (d @ base)
    # a truncated displacement silently sheds norm; catch cut-off peaks
    norm_sq = float(np.linalg.norm(psi) ** 2)
    if norm_sq < 0.9:
        raise fock.DimensionError(
            f"dim={dim} cuts off the outermost peaks (norm^2 = {norm_sq:.3f})"
        )
    vec = FockVector(psi).normalize()
    if not vec.is_well_truncated(tail_tol):
        raise fock.DimensionError(
            f"dim={dim} too small for the outermost peak "
            f"(tail {vec.tail_population:.2e} >= {tail_tol:.0e})"
        )
    return vec
