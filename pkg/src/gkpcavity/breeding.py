"""Cat breeding: merge 2^M noisy squeezed cats into one grid state.

Each round interferes two copies on a balanced beamsplitter and conditions
one output on a momentum homodyne result of zero. In the momentum
representation psi(p, p') of the (mixed) input, M rounds collapse to

    psi(p, p') -> psi(p / sqrt(2)^M, p' / sqrt(2)^M) ^ (2^M),

so the stabilizer expectations of the bred state only require the input
kernel along two 1-D lines: the diagonal (p, p) and the shifted diagonal
(p - 2 sqrt(pi), p). Everything here works with those line samples; no
two-mode Fock space is ever built (the tests check round 1 against an
explicit two-mode simulation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gkpcavity import fock, metrics
from gkpcavity.channel import CavityParams, KrausTruncation
from gkpcavity.fock import DensityMatrix
from gkpcavity.metrics import SqueezingReport
from gkpcavity.protocol import ProtocolConfig, run_protocol

SHIFT = 2.0 * math.sqrt(math.pi)

DEFAULT_DP = 0.005


def cat_amplitude(rounds: int, scale: float = 1.0) -> float:
    """Input cat displacement sqrt(pi) sqrt(2)^(M-1), times the tuning scale."""
    return scale * math.sqrt(math.pi) * math.sqrt(2.0) ** (rounds - 1)


@dataclass
class GridSpec:
    """Uniform momentum grid; p_max=None applies the envelope default
    2 sqrt(pi) (1 + 2^(M/2)) + 6 e^r."""

    dp: float = DEFAULT_DP
    p_max: float | None = None

    def resolve(self, rounds: int, r: float) -> np.ndarray:
        p_max = self.p_max
        if p_max is None:
            p_max = 2.0 * math.sqrt(math.pi) * (1.0 + 2 ** (rounds / 2.0)) + 6.0 * math.exp(r)
        n = int(math.ceil(p_max / self.dp))
        return np.arange(-n, n + 1) * self.dp


@dataclass
class BreedConfig:
    rounds: int
    input_squeezing: float
    cavity: CavityParams
    scale: float = 1.0
    truncation: KrausTruncation = field(default_factory=KrausTruncation)
    grid: GridSpec = field(default_factory=GridSpec)
    dim: int | None = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not (0.5 <= self.scale <= 2.0):
            raise ValueError("scale outside the sane [0.5, 2] band")

    @property
    def amplitude(self) -> float:
        return cat_amplitude(self.rounds, self.scale)


@dataclass
class PWavefunction:
    """Momentum kernel of a state sampled along the two breeding lines.

    diag_values[k] = psi(grid[k]/sqrt(2)^M, grid[k]/sqrt(2)^M),
    offdiag_values[k] = psi((grid[k]-2 sqrt(pi))/sqrt(2)^M, grid[k]/sqrt(2)^M);
    the argument scaling for M rounds is already folded in.
    """

    grid: np.ndarray
    diag_values: np.ndarray
    offdiag_values: np.ndarray
    rounds: int

    def __post_init__(self):
        if self.diag_values.shape != self.grid.shape or (
            self.offdiag_values.shape != self.grid.shape
        ):
            raise ValueError("line samples must match the grid")
        if np.min(self.diag_values.real) < -1e-10 or (
            np.max(np.abs(self.diag_values.imag)) > 1e-10
        ):
            raise ValueError("diagonal of a PSD kernel must be real nonnegative")
        if np.trapezoid(self.diag_values.real, self.grid) <= 0:
            raise ValueError("diagonal integrates to <= 0")


def make_squeezed_cat(cfg: BreedConfig) -> tuple[DensityMatrix, float]:
    """One cavity reflection turning a displaced squeezed input into the
    (noisy) two-peak cat that seeds the breeding rounds.

    The protocol schedule is expressed relative to its first-step amplitude,
    so the cat amplitude enters as base_amplitude with N=1.
    """
    proto = ProtocolConfig(
        n_steps=1,
        input_squeezing=cfg.input_squeezing,
        cavity=cfg.cavity,
        displacement_scale=1.0,
        truncation=cfg.truncation,
        base_amplitude=cfg.amplitude,
        dim=cfg.dim,
    )
    result = run_protocol(proto)
    return result.state, result.success_probability


def fock_to_pkernel(
    rho: DensityMatrix, rounds: int, grid: np.ndarray
) -> PWavefunction:
    """Sample psi(p, p') = <p|rho|p'> along the two breeding lines.

    Uses <p|n> = (-i)^n h_n(p) and an eigendecomposition of rho, so the
    cost is linear in the number of significant eigenvectors.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1:
        dp = grid[1] - grid[0]
        if dp > 0.02:
            import warnings

            warnings.warn(f"grid spacing {dp:.3f} > 0.02 is coarse", stacklevel=2)
    scale = math.sqrt(2.0) ** rounds
    args_diag = grid / scale
    args_off = (grid - SHIFT) / scale
    evals, vecs = np.linalg.eigh(rho.elements)
    keep = evals > max(evals.max(), 0.0) * 1e-14
    evals = evals[keep]
    vecs = vecs[:, keep]
    # fold the (-i)^n basis phase into the eigenvectors: h(p) stays real
    twisted = vecs * ((-1j) ** np.arange(rho.dim))[:, None]
    h_diag = fock.hermite_functions(rho.dim, args_diag)
    h_off = fock.hermite_functions(rho.dim, args_off)
    phi_diag = h_diag.T @ twisted  # psi_k(p) for each eigenvector
    phi_off = h_off.T @ twisted
    diag = (np.abs(phi_diag) ** 2 * evals).sum(axis=1).astype(complex)
    off = (phi_off * phi_diag.conj() * evals).sum(axis=1)
    return PWavefunction(
        grid=grid, diag_values=diag, offdiag_values=off, rounds=rounds
    )


def breed_expectations(kernel: PWavefunction, rounds: int) -> tuple[complex, complex]:
    """Stabilizer expectations (<D(i sqrt(2 pi))>, <D(sqrt(2 pi))>) of the
    bred state, from the input kernel lines raised to the 2^M power and
    normalized by the diagonal integral."""
    if rounds != kernel.rounds:
        raise ValueError("kernel was sampled for a different number of rounds")
    power = 2**rounds
    ref = float(np.max(np.abs(kernel.diag_values)))
    if ref <= 0.0:
        raise FloatingPointError("kernel diagonal is identically zero")
    # common rescale keeps the powers in range; it cancels in the ratios
    diag = (kernel.diag_values / ref) ** power
    off = (kernel.offdiag_values / ref) ** power
    p = kernel.grid
    z = np.trapezoid(diag, p)
    if abs(z) < 1e-300:
        raise FloatingPointError("normalization underflow in the breeding fold")
    dp_expect = np.trapezoid(diag * np.exp(-2j * math.sqrt(math.pi) * p), p) / z
    dx_expect = np.trapezoid(off, p) / z
    return complex(dx_expect), complex(dp_expect)


def _kernel_grid(
    rho: DensityMatrix, rounds: int, grid: np.ndarray
) -> np.ndarray:
    """Full 2-D momentum kernel of the bred state on grid x grid,
    normalized to unit trace (trapezoid)."""
    scale = math.sqrt(2.0) ** rounds
    args = np.asarray(grid, dtype=float) / scale
    evals, vecs = np.linalg.eigh(rho.elements)
    keep = evals > max(evals.max(), 0.0) * 1e-14
    evals, vecs = evals[keep], vecs[:, keep]
    twisted = vecs * ((-1j) ** np.arange(rho.dim))[:, None]
    phi = fock.hermite_functions(rho.dim, args).T @ twisted
    psi_in = (phi * evals) @ phi.conj().T
    ref = np.abs(np.diagonal(psi_in)).max()
    psi = (psi_in / ref) ** (2**rounds)
    z = np.trapezoid(np.diagonal(psi).real, grid)
    if abs(z) < 1e-300:
        raise FloatingPointError("normalization underflow in the breeding fold")
    return psi / z


def _eigenmodes(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    evals, vecs = np.linalg.eigh(rho.elements)
    keep = evals > max(evals.max(), 0.0) * 1e-14
    return evals[keep], vecs[:, keep] * ((-1j) ** np.arange(rho.dim))[:, None]


def _kernel_lines(
    lam: np.ndarray,
    twisted: np.ndarray,
    rounds: int,
    a: np.ndarray,
    b: np.ndarray,
) -> np.ndarray:
    """psi_out(a_k, b_k) up to one overall constant (fixed prescale)."""
    scale = math.sqrt(2.0) ** rounds
    dim = twisted.shape[0]
    phi_a = fock.hermite_functions(dim, a / scale).T @ twisted
    phi_b = fock.hermite_functions(dim, b / scale).T @ twisted
    vals = (phi_a * lam * phi_b.conj()).sum(axis=1)
    return vals ** (2**rounds)


def bred_phase_space(
    cfg: BreedConfig,
    x_grid: np.ndarray,
    p_grid: np.ndarray,
    internal_dp: float = 0.04,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Wigner function and both quadrature densities of the bred state.

    Works entirely in the momentum representation:
    W(x, p) = (1/2pi) int du e^{i x u} psi(p + u/2, p - u/2) with the kernel
    lines evaluated exactly at the requested p values, and
    P(x) = (1/2pi) double Fourier sum of the 2-D kernel.
    Returns (wigner[len(p), len(x)], P_x, P_p).
    """
    cat, _ = make_squeezed_cat(cfg)
    lam, twisted = _eigenmodes(cat)
    spec = GridSpec(dp=internal_dp, p_max=cfg.grid.p_max)
    grid = spec.resolve(cfg.rounds, cfg.input_squeezing)
    psi = _kernel_grid(cat, cfg.rounds, grid)
    d = grid[1] - grid[0]
    x_grid = np.asarray(x_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    # P_x(x) = (1/2pi) sum_{ij} psi_ij e^{i x (p_i - p_j)} d^2
    vx = np.exp(1j * np.outer(grid, x_grid))
    p_x = np.einsum("ix,ij,jx->x", vx, psi, vx.conj()).real * d * d / (2 * math.pi)
    p_p = np.interp(p_grid, grid, np.diagonal(psi).real)
    # normalization constant shared by the exact line evaluations
    prescale = _kernel_lines(lam, twisted, cfg.rounds, grid, grid)
    z = np.trapezoid(prescale.real, grid)
    # Wigner rows at exact p: u = 2 k d
    half_u = np.arange(-grid.size // 2, grid.size // 2 + 1) * d
    phases = np.exp(1j * np.outer(2.0 * half_u, x_grid))
    wig = np.empty((p_grid.size, x_grid.size))
    for row, p in enumerate(p_grid):
        vals = _kernel_lines(lam, twisted, cfg.rounds, p + half_u, p - half_u)
        wig[row] = (vals @ phases).real * (2.0 * d) / (2.0 * math.pi) / z
    return wig, p_x, p_p


def breed(cfg: BreedConfig) -> SqueezingReport:
    """Full pipeline: noisy cat -> momentum kernel -> folded expectations.

    success_probability is the emitter-heralding probability for all 2^M
    input cats; the homodyne conditioning itself carries no extra factor in
    the exact-point limit used here.
    """
    cat, p_cat = make_squeezed_cat(cfg)
    grid = cfg.grid.resolve(cfg.rounds, cfg.input_squeezing)
    kernel = fock_to_pkernel(cat, cfg.rounds, grid)
    dx_expect, dp_expect = breed_expectations(kernel, cfg.rounds)
    return metrics.effective_squeezing_from_expectations(
        dx_expect,
        dp_expect,
        success_probability=p_cat ** (2**cfg.rounds),
        cat_probability=p_cat,
        cat_tail=cat.tail_population,
    )
