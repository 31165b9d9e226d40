"""Noisy reflection of a field mode off a cavity containing a two-level
emitter, as a Kraus channel on the truncated Fock space.

On resonance the reflection amplitudes depend only on the cooperativity C
and escape efficiency eta:

    r1 = (2C + 1 - 2 eta) / (2C + 1)      emitter coupled
    t1 = -2 sqrt(eta (1 - eta)) / (2C + 1)
    Gamma = -2i sqrt(2 eta C) / (2C + 1)
    r0 = 1 - 2 eta,  t0 = -2 sqrt(eta (1 - eta))   emitter in the dark state

A Kraus element K_{ml,mg} removes ml photons into the internal cavity loss
port and mg photons via emitter scattering. Conditioning on the emitter
preparation (a, b) and a projective measurement (m0, m1) leaves field-only
elements E = a m0* A_{ml,mg} + b m1* B_{ml,mg}; every E has support on a
single subdiagonal, which apply_reflection exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from gkpcavity.fock import DensityMatrix


class TruncationError(RuntimeError):
    """The Kraus sum did not converge within the configured index caps."""


class PostselectionError(RuntimeError):
    """The requested measurement outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class CavityParams:
    """Cavity QED working point.

    internal_cooperativity = C / (1 - eta) is coupling-rate independent and
    always >= C; constructors round-trip between (C, eta) and (C0, eta).
    """

    cooperativity: float
    escape_efficiency: float

    def __post_init__(self):
        if self.cooperativity < 0:
            raise ValueError("cooperativity must be >= 0")
        if not (0.0 <= self.escape_efficiency <= 1.0):
            raise ValueError("escape efficiency must be in [0, 1]")

    @property
    def internal_cooperativity(self) -> float:
        if self.escape_efficiency == 1.0:
            return math.inf if self.cooperativity > 0 else 0.0
        return self.cooperativity / (1.0 - self.escape_efficiency)

    @classmethod
    def from_internal(cls, c0: float, eta: float) -> "CavityParams":
        return cls(cooperativity=c0 * (1.0 - eta), escape_efficiency=eta)

    @classmethod
    def ideal(cls) -> "CavityParams":
        """Effectively lossless limit: C -> inf, eta -> 1."""
        return cls(cooperativity=1e9, escape_efficiency=1.0)


@dataclass(frozen=True)
class ReflectionCoefficients:
    r0: float
    t0: float
    r1: float
    t1: float
    gamma: complex


def reflection_coefficients(params: CavityParams) -> ReflectionCoefficients:
    """On-resonance amplitudes; r0^2 + t0^2 = 1 and r1^2 + t1^2 + |Gamma|^2 = 1."""
    c = params.cooperativity
    eta = params.escape_efficiency
    denom = 2.0 * c + 1.0
    return ReflectionCoefficients(
        r0=1.0 - 2.0 * eta,
        t0=-2.0 * math.sqrt(eta * (1.0 - eta)),
        r1=(2.0 * c + 1.0 - 2.0 * eta) / denom,
        t1=-2.0 * math.sqrt(eta * (1.0 - eta)) / denom,
        gamma=-2j * math.sqrt(2.0 * eta * c) / denom,
    )


@dataclass(frozen=True)
class AtomConfig:
    """Emitter preparation a|0> + b|1> and the post-reflection projection
    <m| = m0* <0| + m1* <1|. Both pairs are unit-normalized."""

    prep_a: complex
    prep_b: complex
    measure: tuple[complex, complex] = (1 / math.sqrt(2), 1 / math.sqrt(2))

    def __post_init__(self):
        if abs(abs(self.prep_a) ** 2 + abs(self.prep_b) ** 2 - 1.0) > 1e-10:
            raise ValueError("|a|^2 + |b|^2 must equal 1")
        m0, m1 = self.measure
        if abs(abs(m0) ** 2 + abs(m1) ** 2 - 1.0) > 1e-10:
            raise ValueError("measurement vector must be normalized")

    @classmethod
    def plus_plus(cls) -> "AtomConfig":
        """Prepare |+>, measure <+| (the protocol default)."""
        s = 1 / math.sqrt(2)
        return cls(s, s, (s, s))

    def with_measure(self, m0: complex, m1: complex) -> "AtomConfig":
        return AtomConfig(self.prep_a, self.prep_b, (m0, m1))

    def flipped(self) -> "AtomConfig":
        """Same preparation, orthogonal (<-|-type) measurement outcome."""
        m0, m1 = self.measure
        return AtomConfig(self.prep_a, self.prep_b, (np.conj(m1), -np.conj(m0)))


@dataclass(frozen=True)
class KrausTruncation:
    trace_tolerance: float = 1e-9
    max_ml: int = 40
    max_mgamma: int = 40

    def __post_init__(self):
        if not (0.0 < self.trace_tolerance < 1.0):
            raise ValueError("trace_tolerance must be in (0, 1)")
        if self.max_ml < 1 or self.max_mgamma < 1:
            raise ValueError("index caps must be >= 1")


def _branch_band(
    t: float, r: float, extra: complex, m_l: int, m_gamma: int, dim: int
) -> np.ndarray:
    """Subdiagonal entries <n-s|.|n> of t^ml extra^mg r^(n-s)
    sqrt(n!/((n-s)! ml! mg!)) for s = ml+mg, n = s..dim-1.

    Assembled in log magnitude so r = 0 or t = 0 produce exact zeros
    instead of 0/0 (xlogy(0, 0) = 0)."""
    s = m_l + m_gamma
    if s >= dim:
        return np.zeros(0, dtype=complex)
    n = np.arange(s, dim)
    if (m_l > 0 and t == 0.0) or (m_gamma > 0 and extra == 0):
        return np.zeros(n.size, dtype=complex)
    logmag = (
        xlogy(m_l, abs(t))
        + xlogy(m_gamma, abs(extra))
        + xlogy(n - s, abs(r))
        + 0.5 * (gammaln(n + 1.0) - gammaln(n - s + 1.0))
        - 0.5 * (gammaln(m_l + 1.0) + gammaln(m_gamma + 1.0))
    )
    # r = 0 gives logmag = -inf except at n = s, where sign(0)**0 = 1
    phase = (
        np.sign(t) ** m_l
        * ((extra / abs(extra)) ** m_gamma if m_gamma else 1.0)
        * np.sign(r) ** (n - s)
    )
    return np.exp(logmag) * phase


def _element_band(
    coeffs: ReflectionCoefficients,
    atom: AtomConfig,
    m_l: int,
    m_gamma: int,
    dim: int,
) -> np.ndarray:
    """Subdiagonal (offset m_l + m_gamma) of the conditioned Kraus element."""
    m0, m1 = atom.measure
    band = atom.prep_b * np.conj(m1) * _branch_band(
        coeffs.t1, coeffs.r1, coeffs.gamma, m_l, m_gamma, dim
    )
    if m_gamma == 0:
        band = band + atom.prep_a * np.conj(m0) * _branch_band(
            coeffs.t0, coeffs.r0, 1.0, m_l, 0, dim
        )
    return band


def field_kraus_element(
    coeffs: ReflectionCoefficients,
    atom: AtomConfig,
    m_l: int,
    m_gamma: int,
    dim: int,
) -> np.ndarray:
    """Field-only Kraus element for losing (m_l, m_gamma) photons, conditioned
    on the emitter preparation and measurement outcome."""
    if m_l < 0 or m_gamma < 0:
        raise ValueError("loss indices must be >= 0")
    out = np.zeros((dim, dim), dtype=complex)
    band = _element_band(coeffs, atom, m_l, m_gamma, dim)
    s = m_l + m_gamma
    if band.size:
        idx = np.arange(dim - s)
        out[idx, idx + s] = band
    return out


def apply_reflection(
    rho: DensityMatrix,
    params: CavityParams,
    atom: AtomConfig,
    trunc: KrausTruncation = KrausTruncation(),
) -> tuple[DensityMatrix, float]:
    """Reflect the state off the cavity and project the emitter.

    Accumulates E rho E^dag over loss indices in diagonals of constant
    m_l + m_gamma until a diagonal's trace contribution falls below
    trace_tolerance on the decaying side; returns the renormalized
    conditional state and its heralding probability.
    """
    coeffs = reflection_coefficients(params)
    dim = rho.dim
    out = np.zeros((dim, dim), dtype=complex)
    total = 0.0
    prev_contrib = math.inf
    max_total = trunc.max_ml + trunc.max_mgamma
    last_s = min(max_total, dim - 1)  # cannot lose more than dim-1 photons
    converged = False
    diag = np.real(np.diagonal(rho.elements)).copy()
    for s in range(0, last_s + 1):
        bands = []
        for m_gamma in range(0, s + 1):
            m_l = s - m_gamma
            if m_l > trunc.max_ml or m_gamma > trunc.max_mgamma:
                continue
            band = _element_band(coeffs, atom, m_l, m_gamma, dim)
            if band.size and np.any(band):
                bands.append(band)
        if not bands:
            contrib = 0.0
        else:
            # sum_t outer(b_t, b_t*) as one Gram product, then one Hadamard
            stack = np.array(bands)
            gram = stack.T @ stack.conj()
            out[: dim - s, : dim - s] += gram * rho.elements[s:, s:]
            contrib = float(np.real(np.diagonal(gram) @ diag[s:]))
        total += contrib
        if s >= 2 and contrib < trunc.trace_tolerance and contrib <= prev_contrib:
            converged = True
            break
        prev_contrib = contrib
    if not converged and last_s < dim - 1:
        raise TruncationError(
            f"Kraus sum not converged at m_l+m_gamma={last_s} "
            f"(last diagonal contributed {prev_contrib:.3e})"
        )
    if total < 1e-12:
        raise PostselectionError(
            f"measurement outcome probability {total:.3e} is degenerate"
        )
    return DensityMatrix(out / total), total
