"""Truncated Fock-basis linear algebra.

States live on the photon-number basis |0>, ..., |dim-1>. Quadratures follow
the convention x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(sqrt(2) i), so
[x, p] = i and the vacuum has Var(x) = Var(p) = 1/2.

Operators are plain complex ndarrays; states carry a thin wrapper with
normalization and truncation diagnostics. All factorial ratios are evaluated
in log space, so the constructors stay finite up to dim ~ 1000.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

DEFAULT_TAIL_TOL = 1e-9

# Default cutoff rule: cover the displaced peaks plus four widths of the
# antisqueezed quadrature, in photon-number units.
DIM_FLOOR = 64
DIM_CAP = 256


class DimensionError(ValueError):
    """Invalid or mismatched Fock-space dimension."""


def default_dim(alpha_max: float, r_max: float, cap: int = DIM_CAP) -> int:
    """Photon-number cutoff covering displacements up to |alpha_max| with
    squeezing up to r_max, clamped to [64, cap]."""
    reach = (abs(alpha_max) + 4.0 * np.exp(abs(r_max))) ** 2 / 2.0
    return int(np.clip(np.ceil(reach) + 20, DIM_FLOOR, cap))


@dataclass
class FockVector:
    """Pure state as complex amplitudes over the number basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1 or self.amplitudes.size < 1:
            raise DimensionError("amplitudes must be a nonempty 1-D array")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def tail_population(self) -> float:
        """|c_{dim-1}|^2, the truncation-leakage diagnostic."""
        return float(abs(self.amplitudes[-1]) ** 2)

    def normalize(self) -> "FockVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.amplitudes / n)

    def is_well_truncated(self, tol: float = DEFAULT_TAIL_TOL) -> bool:
        return self.tail_population < tol

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass
class DensityMatrix:
    """Mixed state as a dim x dim complex matrix."""

    elements: np.ndarray

    def __post_init__(self):
        self.elements = np.asarray(self.elements, dtype=complex)
        if (
            self.elements.ndim != 2
            or self.elements.shape[0] != self.elements.shape[1]
            or self.elements.shape[0] < 1
        ):
            raise DimensionError("elements must be a square matrix")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.elements))

    @property
    def tail_population(self) -> float:
        return float(self.elements[-1, -1].real)

    def normalize(self) -> "DensityMatrix":
        t = self.trace.real
        if t <= 0.0:
            raise ValueError("cannot normalize a trace<=0 matrix")
        return DensityMatrix(self.elements / t)

    def is_well_truncated(self, tol: float = DEFAULT_TAIL_TOL) -> bool:
        return self.tail_population < tol

    def validate(self, herm_tol: float = 1e-10, psd_tol: float = 1e-8) -> None:
        """Raise if the matrix is not Hermitian/PSD within tolerance."""
        dev = np.max(np.abs(self.elements - self.elements.conj().T))
        if dev > herm_tol:
            raise ValueError(f"not Hermitian: max deviation {dev:.3e}")
        evals = np.linalg.eigvalsh(0.5 * (self.elements + self.elements.conj().T))
        if evals.min() < -psd_tol:
            raise ValueError(f"not PSD: min eigenvalue {evals.min():.3e}")


# ---------------------------------------------------------------------------
# elementary operators


def annihilation(dim: int) -> np.ndarray:
    """a = sum_k sqrt(k) |k-1><k| on the truncated basis."""
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    a = np.zeros((dim, dim), dtype=complex)
    ks = np.arange(1, dim)
    a[ks - 1, ks] = np.sqrt(ks)
    return a


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number_operator(dim: int) -> np.ndarray:
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    return np.diag(np.arange(dim).astype(complex))


def position_operator(dim: int) -> np.ndarray:
    a = annihilation(dim)
    return (a + a.conj().T) / np.sqrt(2.0)


def momentum_operator(dim: int) -> np.ndarray:
    a = annihilation(dim)
    return (a - a.conj().T) / (np.sqrt(2.0) * 1j)


def parity_operator(dim: int) -> np.ndarray:
    """exp(i pi n): diagonal of (-1)^n."""
    return np.diag(((-1.0) ** np.arange(dim)).astype(complex))


def _scaled_laguerre_diagonal(k: int, x: np.ndarray, nmax: int) -> np.ndarray:
    """d_n^(k)(x) = sqrt(n!/(n+k)!) x^(k/2) e^(-x/2) L_n^(k)(x) for n=0..nmax-1.

    These are the magnitudes of displacement matrix elements |<n+k|D|n>| at
    x = |alpha|^2; the scaled three-term recurrence keeps everything <= 1.
    Returns an array of shape (nmax, len(x)).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax, x.size), dtype=float)
    # d_0 = x^(k/2) e^(-x/2) / sqrt(k!), in log space; xlogy handles x = 0.
    log_d0 = xlogy(0.5 * k, x) - 0.5 * x - 0.5 * gammaln(k + 1.0)
    out[0] = np.exp(log_d0)
    if nmax == 1:
        return out
    out[1] = (k + 1.0 - x) * out[0] / np.sqrt(1.0 * (1 + k))
    for n in range(1, nmax - 1):
        out[n + 1] = (
            (2 * n + k + 1 - x) * out[n]
            - np.sqrt(n * (n + k) * 1.0) * out[n - 1]
        ) / np.sqrt((n + 1.0) * (n + 1 + k))
    return out


def displacement_operator(alpha: complex, dim: int) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha* a) on the truncated basis.

    Matrix elements are assembled from a scaled generalized-Laguerre
    recurrence, D[n+k, n] = sqrt(n!/(n+k)!) alpha^k e^{-|alpha|^2/2}
    L_n^k(|alpha|^2), so no factorial ever overflows. Unitary on the block
    where the state is well truncated (tail leakage only).
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    if x + 5.0 * abs(alpha) + 10.0 > dim:
        import warnings

        warnings.warn(
            f"dim={dim} is small for |alpha|={abs(alpha):.2f}; "
            "expect truncation leakage",
            stacklevel=2,
        )
    D = np.zeros((dim, dim), dtype=complex)
    if x == 0.0:
        np.fill_diagonal(D, 1.0)
        return D
    phase = alpha / abs(alpha)
    ks = np.arange(dim, dtype=float)
    # recurrence in n, vectorized over the diagonal offset k
    d_prev = np.exp(0.5 * ks * np.log(x) - 0.5 * x - 0.5 * gammaln(ks + 1.0))
    d_curr = (ks + 1.0 - x) * d_prev / np.sqrt(1.0 + ks)
    rows = np.arange(dim)
    lower = phase**rows
    upper = (-np.conj(phase)) ** rows
    for n in range(dim):
        valid = dim - n  # entries with n + k < dim
        D[rows[:valid] + n, n] = d_prev[:valid] * lower[:valid]
        if n + 1 < dim:
            D[n, rows[1:valid] + n] = d_prev[1:valid] * upper[1:valid]
        if n + 1 >= dim:
            break
        d_next = (
            (2 * n + ks + 3.0 - x) * d_curr
            - np.sqrt((n + 1.0) * (n + 1.0 + ks)) * d_prev
        ) / np.sqrt((n + 2.0) * (n + 2.0 + ks))
        d_prev, d_curr = d_curr, d_next
    return D


def coherent_state(alpha: complex, dim: int) -> FockVector:
    """|alpha> amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!), in log space."""
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return FockVector(amps)
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0) - 0.5 * abs(alpha) ** 2
    phase = (alpha / abs(alpha)) ** n
    return FockVector(np.exp(logmag) * phase)


def squeezed_vacuum(r: float, dim: int, tail_tol: float = 1e-6) -> FockVector:
    """S(r)|vac> with S(r) = exp((r a^2 - r a^dag^2)/2), real r.

    Positive r squeezes x (Var x = e^{-2r}/2); support on even n only:
    c_{2k} = sqrt((2k)!)/(2^k k!) (-tanh r)^k / sqrt(cosh r).
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    amps = np.zeros(dim, dtype=complex)
    if r == 0.0:
        amps[0] = 1.0
        return FockVector(amps)
    ks = np.arange((dim + 1) // 2)
    t = np.tanh(r)
    logmag = (
        0.5 * gammaln(2.0 * ks + 1.0)
        - ks * np.log(2.0)
        - gammaln(ks + 1.0)
        + ks * np.log(abs(t))
        - 0.5 * np.log(np.cosh(r))
    )
    signs = np.where(ks % 2 == 0, 1.0, -np.sign(t))
    amps[2 * ks] = signs * np.exp(logmag)
    vec = FockVector(amps)
    # amplitude at the largest populated even index, not amps[-1] (may be odd)
    last_even = 2 * ks[-1]
    if abs(amps[last_even]) ** 2 >= tail_tol:
        raise DimensionError(
            f"dim={dim} too small for r={r}: tail population "
            f"{abs(amps[last_even])**2:.2e} >= {tail_tol:.1e}"
        )
    return vec.normalize()


# ---------------------------------------------------------------------------
# expectation values and phase-space diagnostics


def expectation(rho: DensityMatrix, op: np.ndarray) -> complex:
    """tr(rho op)."""
    op = np.asarray(op)
    if op.shape != (rho.dim, rho.dim):
        raise DimensionError(
            f"operator shape {op.shape} does not match state dim {rho.dim}"
        )
    return complex(np.einsum("ij,ji->", rho.elements, op))


def hermite_functions(nmax: int, q: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions h_0..h_{nmax-1} on the grid q.

    h_n(q) = pi^{-1/4} e^{-q^2/2} H_n(q)/sqrt(2^n n!) via the stable
    recurrence h_n = q sqrt(2/n) h_{n-1} - sqrt((n-1)/n) h_{n-2}; safe for
    n well past 230. Shape (nmax, len(q)).
    """
    q = np.asarray(q, dtype=float)
    h = np.empty((nmax, q.size), dtype=float)
    h[0] = np.pi**-0.25 * np.exp(-0.5 * q**2)
    if nmax == 1:
        return h
    h[1] = np.sqrt(2.0) * q * h[0]
    for n in range(2, nmax):
        h[n] = q * np.sqrt(2.0 / n) * h[n - 1] - np.sqrt((n - 1.0) / n) * h[n - 2]
    return h


def _momentum_basis(nmax: int, q: np.ndarray) -> np.ndarray:
    """<p|n> = (-i)^n h_n(p): momentum wavefunctions of the number states."""
    return hermite_functions(nmax, q) * (-1j) ** np.arange(nmax)[:, None]


def quadrature_distribution(
    rho: DensityMatrix, axis: str, grid: np.ndarray
) -> np.ndarray:
    """Probability density of x or p on the given grid.

    P(q) = sum_{nm} rho_{nm} phi_n(q) phi_m(q)* with the momentum-basis
    functions phi_n = (-i)^n h_n. The x axis reuses the same kernel after
    rotating rho by e^{i pi n/2}.
    """
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid must be finite")
    if rho.dim > 1000:
        raise DimensionError("quadrature_distribution supports dim <= 1000")
    if axis == "x":
        twist = (1j) ** np.arange(rho.dim)
        elements = rho.elements * np.outer(twist, twist.conj())
    elif axis == "p":
        elements = rho.elements
    else:
        raise ValueError("axis must be 'x' or 'p'")
    phi = _momentum_basis(rho.dim, grid)
    dens = np.einsum("nq,nm,mq->q", phi, elements, phi.conj())
    return dens.real


def wigner(rho: DensityMatrix, x_grid: np.ndarray, p_grid: np.ndarray) -> np.ndarray:
    """Wigner function W(x, p) on the outer grid, shape (len(p), len(x)).

    Normalized so that integral dx dp W = tr(rho) and the vacuum peaks at
    1/pi. Evaluated as (1/pi) sum over density-matrix diagonals with the
    scaled-Laguerre recurrence (equivalent to tr[rho D(2 alpha) Pi]).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    X, P = np.meshgrid(x_grid, p_grid)
    alpha = (X + 1j * P) / np.sqrt(2.0)
    beta = 2.0 * alpha
    xval = (np.abs(beta) ** 2).ravel()
    absb = np.abs(beta).ravel()
    phase = np.where(absb > 0, beta.ravel() / np.where(absb > 0, absb, 1.0), 1.0)
    dim = rho.dim
    signs = (-1.0) ** np.arange(dim)
    acc = np.zeros(xval.size, dtype=complex)
    for k in range(dim):
        diag = np.diagonal(rho.elements, offset=k)  # rho_{n, n+k}
        if not np.any(diag):
            continue
        d = _scaled_laguerre_diagonal(k, xval, dim - k)
        coeff = signs[: dim - k] * diag
        term = coeff @ d
        if k == 0:
            acc += term
        else:
            acc += 2.0 * (phase**k * term).real
    W = acc.real.reshape(X.shape) / np.pi
    return W


def fidelity_to_pure(rho: DensityMatrix, vec: FockVector) -> float:
    """<v|rho|v> for a normalized target vector."""
    v = vec.normalize().amplitudes
    if v.size != rho.dim:
        raise DimensionError("state dims do not match")
    return float(np.real(v.conj() @ rho.elements @ v))


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    """U rho U^dag."""
    u = np.asarray(u)
    if u.shape != (rho.dim, rho.dim):
        raise DimensionError("unitary shape does not match state dim")
    return DensityMatrix(u @ rho.elements @ u.conj().T)
