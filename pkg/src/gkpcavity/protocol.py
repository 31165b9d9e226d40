"""Iterative displacement-reflection protocol that grows a squeezed input
into a grid state, plus the vacuum-input variant that synthesizes squeezing
from a comb of coherent states.

One round displaces the field and reflects it off the cavity with the
emitter prepared in a superposition; projecting the emitter onto <+| doubles
the number of peaks. Step n displaces by scale * 2^(n-1) * sqrt(pi/2), so N
rounds leave 2^N peaks on the grid lattice. The first round can be made
deterministic: the <-| branch differs from the <+| branch by a known
half-lattice momentum kick, which a feed-forward displacement
D(i sqrt(pi)/(2 sqrt(2))) undoes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gkpcavity import fock, metrics
from gkpcavity.channel import (
    AtomConfig,
    CavityParams,
    KrausTruncation,
    apply_reflection,
)
from gkpcavity.fock import DensityMatrix
from gkpcavity.metrics import SqueezingReport

BASE_AMPLITUDE = math.sqrt(math.pi / 2.0)
CORRECTION_AMPLITUDE = 1j * math.sqrt(math.pi) / (2.0 * math.sqrt(2.0))


class ConfigError(ValueError):
    """Inconsistent protocol configuration."""


@dataclass
class ProtocolConfig:
    """Settings for one protocol run.

    displacement_scale multiplies the whole doubling schedule (the one knob
    the displacement optimization tunes); base_amplitude is the first-step
    displacement before scaling and defaults to sqrt(pi/2). Cat generation
    for breeding reuses this with N=1 and a larger base.
    """

    n_steps: int
    input_squeezing: float
    cavity: CavityParams
    displacement_scale: float = 1.0
    atoms: list[AtomConfig] | None = None
    deterministic_first_step: bool = False
    truncation: KrausTruncation = field(default_factory=KrausTruncation)
    base_amplitude: complex = BASE_AMPLITUDE
    dim: int | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.input_squeezing < 0:
            raise ConfigError("input squeezing must be >= 0")
        if not (0.5 <= self.displacement_scale <= 2.0):
            raise ConfigError("displacement_scale outside the sane [0.5, 2] band")
        if self.atoms is None:
            self.atoms = [AtomConfig.plus_plus() for _ in range(self.n_steps)]
        if len(self.atoms) != self.n_steps:
            raise ConfigError("need one AtomConfig per step")

    def displacements(self) -> np.ndarray:
        """The doubling schedule scale * 2^(n-1) * base, n = 1..N."""
        return np.array(
            [
                self.displacement_scale * 2 ** (n - 1) * self.base_amplitude
                for n in range(1, self.n_steps + 1)
            ],
            dtype=complex,
        )

    def resolved_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        alpha_max = float(np.sum(np.abs(self.displacements())))
        return fock.default_dim(alpha_max, self.input_squeezing)


@dataclass
class ProtocolResult:
    state: DensityMatrix
    success_probability: float
    squeezing: SqueezingReport
    mean_photons: float
    mean_photons_per_step: list[float] = field(default_factory=list)
    minus_branch_fidelity: float | None = None
    quadrature_db: float | None = None


def _displace(rho: DensityMatrix, alpha: complex, dim: int) -> DensityMatrix:
    return fock.apply_unitary(rho, fock.displacement_operator(alpha, dim))


def run_protocol(cfg: ProtocolConfig) -> ProtocolResult:
    """Run the N-step protocol and report the output state and its
    effective squeezing.

    With deterministic_first_step the first reflection keeps both emitter
    outcomes; the <-| branch receives the feed-forward momentum kick and
    the two branches are mixed with their heralding weights, so the first
    step succeeds with probability 1 (the kick is only approximate, and the
    overlap of the corrected branch with the <+| branch is reported as
    minus_branch_fidelity). All later steps postselect on the configured
    measurement.
    """
    dim = cfg.resolved_dim()
    rho = fock.squeezed_vacuum(cfg.input_squeezing, dim).to_density_matrix()
    n_op = fock.number_operator(dim)
    probability = 1.0
    mean_photons_per_step: list[float] = []
    minus_fidelity = None
    for step, alpha in enumerate(cfg.displacements()):
        rho = _displace(rho, alpha, dim)
        mean_photons_per_step.append(fock.expectation(rho, n_op).real)
        atom = cfg.atoms[step]
        if step == 0 and cfg.deterministic_first_step:
            rho_plus, p_plus = apply_reflection(rho, cfg.cavity, atom, cfg.truncation)
            rho_minus, p_minus = apply_reflection(
                rho, cfg.cavity, atom.flipped(), cfg.truncation
            )
            rho_minus = _displace(
                rho_minus, cfg.displacement_scale * CORRECTION_AMPLITUDE, dim
            )
            minus_fidelity = float(
                np.real(np.trace(rho_plus.elements @ rho_minus.elements))
                / math.sqrt(
                    np.real(np.trace(rho_plus.elements @ rho_plus.elements))
                    * np.real(np.trace(rho_minus.elements @ rho_minus.elements))
                )
            )
            rho = DensityMatrix(
                p_plus * rho_plus.elements + p_minus * rho_minus.elements
            ).normalize()
            probability *= p_plus + p_minus
        else:
            try:
                rho, p = apply_reflection(rho, cfg.cavity, atom, cfg.truncation)
            except Exception as exc:
                raise type(exc)(f"step {step + 1}: {exc}") from exc
            probability *= p
    report = metrics.effective_squeezing(rho, probability)
    return ProtocolResult(
        state=rho,
        success_probability=probability,
        squeezing=report,
        mean_photons=max(mean_photons_per_step),
        mean_photons_per_step=mean_photons_per_step,
        minus_branch_fidelity=minus_fidelity,
    )


def two_level_weighting_config(
    n_steps: int,
    a: float | None = None,
    measure: tuple[complex, complex] | None = None,
) -> list[AtomConfig]:
    """Atom schedule producing a two-level peak envelope: |+> preparation
    everywhere except the second-to-last step, which uses the unequal
    superposition (a, sqrt(1-a^2)); measurement stays <+| throughout
    (override via `measure` if desired)."""
    if n_steps < 2:
        raise ConfigError("two-level weighting needs n_steps >= 2 (no "
                          "second-to-last step otherwise)")
    if a is None:
        a, b = metrics.optimal_two_level()
    else:
        if not (0.0 < a < 1.0):
            raise ConfigError("a must be in (0, 1)")
        b = math.sqrt(1.0 - a * a)
    plus = AtomConfig.plus_plus()
    special = AtomConfig(a, b)
    if measure is not None:
        special = special.with_measure(*measure)
    atoms = [plus for _ in range(n_steps)]
    atoms[n_steps - 2] = special
    return atoms


def squeeze_from_vacuum(
    n_steps: int,
    cavity: CavityParams,
    p_displacement: float,
    trunc: KrausTruncation = KrausTruncation(),
    dim: int | None = None,
) -> ProtocolResult:
    """Synthesize a quadrature-squeezed state from vacuum by superposing
    2^N coherent states along the momentum axis.

    Runs the standard circuit with zero input squeezing and the doubling
    schedule rotated onto the imaginary axis. The x-quadrature variance
    squeezing -10 log10(2 Var x) is reported in quadrature_db (this is
    ordinary squeezing, not the grid-state measure)."""
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if p_displacement < 0:
        raise ConfigError("p_displacement must be >= 0")
    if p_displacement == 0.0:
        dim = dim or fock.DIM_FLOOR
        rho = fock.squeezed_vacuum(0.0, dim).to_density_matrix()
        report = metrics.effective_squeezing(rho, 1.0)
        result = ProtocolResult(
            state=rho,
            success_probability=1.0,
            squeezing=report,
            mean_photons=0.0,
            mean_photons_per_step=[0.0] * n_steps,
        )
        result.quadrature_db = 0.0
        return result
    scale = 1.0  # the tuned knob is p_displacement itself
    cfg = ProtocolConfig(
        n_steps=n_steps,
        input_squeezing=0.0,
        cavity=cavity,
        displacement_scale=scale,
        truncation=trunc,
        base_amplitude=1j * p_displacement,
        dim=dim,
    )
    result = run_protocol(cfg)
    x_op = fock.position_operator(result.state.dim)
    x1 = fock.expectation(result.state, x_op).real
    x2 = fock.expectation(result.state, x_op @ x_op).real
    var_x = x2 - x1 * x1
    result.quadrature_db = -10.0 * math.log10(2.0 * var_x)
    return result
