import math

import numpy as np
import pytest

from gkpcavity import fock
from gkpcavity.acceptance import two_mode_breeding_oracle
from gkpcavity.breeding import (
    BreedConfig,
    GridSpec,
    breed,
    breed_expectations,
    cat_amplitude,
    fock_to_pkernel,
    make_squeezed_cat,
)
from gkpcavity.channel import CavityParams
from gkpcavity.fock import DensityMatrix, FockVector

from conftest import random_density_matrix

IDEAL = CavityParams.ideal()


def ideal_cat_vector(amplitude, r, dim):
    base = fock.squeezed_vacuum(r, dim).amplitudes
    cat = (
        fock.displacement_operator(amplitude, dim) @ base
        + fock.displacement_operator(-amplitude, dim) @ base
    )
    return FockVector(cat).normalize()


class TestMakeSqueezedCat:
    def test_ideal_single_round_cat(self):
        cfg = BreedConfig(rounds=1, input_squeezing=1.15, cavity=IDEAL)
        cat, prob = make_squeezed_cat(cfg)
        want = ideal_cat_vector(math.sqrt(math.pi), 1.15, cat.dim)
        assert fock.fidelity_to_pure(cat, want) > 0.999
        assert prob == pytest.approx(0.5, abs=1e-3)

    def test_amplitude_scales_with_rounds(self):
        assert cat_amplitude(1) == pytest.approx(math.sqrt(math.pi))
        assert cat_amplitude(3) == pytest.approx(2 * math.sqrt(math.pi))
        assert cat_amplitude(2, scale=1.1) == pytest.approx(
            1.1 * math.sqrt(2 * math.pi)
        )

    def test_decoupled_cavity_gives_gaussian(self):
        cfg = BreedConfig(rounds=1, input_squeezing=0.8, cavity=CavityParams(0.0, 0.0))
        cat, prob = make_squeezed_cat(cfg)
        assert prob == pytest.approx(1.0, abs=1e-10)
        grid = np.linspace(-5, 5, 81)
        w = fock.wigner(cat, grid, grid)
        assert w.min() > -1e-6  # no interference fringes, no negativity

    def test_noisy_cat_overlap_recorded(self):
        # optimized single-round cat at internal cooperativity 200; the
        # cavity decoheres the superposition, so the overlap with the ideal
        # cat sits well below one (frozen from the overlap oracle)
        cfg = BreedConfig(
            rounds=1, input_squeezing=1.121,
            cavity=CavityParams.from_internal(200.0, 0.9515), scale=1.051,
        )
        cat, _ = make_squeezed_cat(cfg)
        want = ideal_cat_vector(math.sqrt(math.pi), 1.121, cat.dim)
        assert fock.fidelity_to_pure(cat, want) == pytest.approx(0.569, abs=0.02)


class TestFockToPkernel:
    def test_vacuum_diagonal(self):
        vac = np.zeros(30, dtype=complex)
        vac[0] = 1.0
        rho = FockVector(vac).to_density_matrix()
        grid = np.linspace(-4, 4, 801)
        kern = fock_to_pkernel(rho, 0, grid)
        want = np.exp(-(grid**2)) / math.sqrt(math.pi)
        assert np.max(np.abs(kern.diag_values.real - want)) < 1e-12

    def test_one_photon_diagonal(self):
        one = np.zeros(30, dtype=complex)
        one[1] = 1.0
        rho = FockVector(one).to_density_matrix()
        grid = np.linspace(-4, 4, 801)
        kern = fock_to_pkernel(rho, 0, grid)
        want = 2 * grid**2 * np.exp(-(grid**2)) / math.sqrt(math.pi)
        assert np.max(np.abs(kern.diag_values.real - want)) < 1e-12

    def test_matches_direct_double_sum(self, rng):
        # independent reference: brute-force sum over rho_{nm} phi_n phi_m*
        rho = random_density_matrix(rng, 12)
        grid = np.linspace(-3, 3, 11)
        rounds = 1
        kern = fock_to_pkernel(rho, rounds, grid)
        scale = math.sqrt(2.0) ** rounds
        h = fock.hermite_functions(12, grid / scale)
        h_off = fock.hermite_functions(12, (grid - 2 * math.sqrt(math.pi)) / scale)
        phases = (-1j) ** np.arange(12)
        diag = np.zeros(grid.size, dtype=complex)
        off = np.zeros(grid.size, dtype=complex)
        for n in range(12):
            for m in range(12):
                coeff = rho.elements[n, m] * phases[n] * np.conj(phases[m])
                diag += coeff * h[n] * h[m]
                off += coeff * h_off[n] * h[m]
        assert np.max(np.abs(kern.diag_values - diag)) < 1e-12
        assert np.max(np.abs(kern.offdiag_values - off)) < 1e-12
        assert np.max(np.abs(kern.diag_values.imag)) < 1e-12

    def test_coarse_grid_warns(self):
        vac = np.zeros(10, dtype=complex)
        vac[0] = 1.0
        rho = FockVector(vac).to_density_matrix()
        with pytest.warns(UserWarning):
            fock_to_pkernel(rho, 0, np.linspace(-3, 3, 41))


class TestBreedExpectations:
    def test_vacuum_passthrough(self):
        vac = np.zeros(40, dtype=complex)
        vac[0] = 1.0
        rho = FockVector(vac).to_density_matrix()
        grid = GridSpec().resolve(0, 0.0)
        kern = fock_to_pkernel(rho, 0, grid)
        dx, dp = breed_expectations(kern, 0)
        assert dx == pytest.approx(math.exp(-math.pi), abs=1e-9)
        assert dp == pytest.approx(math.exp(-math.pi), abs=1e-9)

    def test_single_round_matches_two_mode_oracle(self):
        dim = 96
        for coop, eta in [(1e9, 1.0), (25.0, 0.98), (6.0, 0.85)]:
            cfg = BreedConfig(
                rounds=1, input_squeezing=0.9, cavity=CavityParams(coop, eta), dim=dim
            )
            cat, _ = make_squeezed_cat(cfg)
            trimmed = np.zeros_like(cat.elements)
            trimmed[:48, :48] = cat.elements[:48, :48]
            cat = DensityMatrix(trimmed).normalize()
            kern = fock_to_pkernel(cat, 1, cfg.grid.resolve(1, 0.9))
            dx, dp = breed_expectations(kern, 1)
            odx, odp = two_mode_breeding_oracle(cat, dim)
            assert abs(dx - odx) < 1e-6
            assert abs(dp - odp) < 1e-6

    def test_three_rounds_hit_binomial_value(self):
        cfg = BreedConfig(rounds=3, input_squeezing=1.15, cavity=IDEAL)
        rep = breed(cfg)
        want = 8.0 / 9.0  # nine peaks, binomial envelope
        assert abs(rep.dp_expect) == pytest.approx(want, abs=2e-4)

    def test_expectations_bounded(self, rng):
        rho = random_density_matrix(rng, 20)
        grid = GridSpec().resolve(1, 0.5)
        kern = fock_to_pkernel(rho, 1, grid)
        dx, dp = breed_expectations(kern, 1)
        assert abs(dx) <= 1.0 + 1e-9
        assert abs(dp) <= 1.0 + 1e-9

    def test_grid_convergence(self):
        cfg = BreedConfig(rounds=2, input_squeezing=1.0, cavity=IDEAL)
        cat, _ = make_squeezed_cat(cfg)
        vals = []
        for dp_step in (0.005, 0.0025):
            grid = GridSpec(dp=dp_step).resolve(2, 1.0)
            kern = fock_to_pkernel(cat, 2, grid)
            vals.append(breed_expectations(kern, 2))
        assert abs(vals[0][0] - vals[1][0]) < 1e-7
        assert abs(vals[0][1] - vals[1][1]) < 1e-7

    def test_rounds_mismatch_rejected(self):
        vac = np.zeros(10, dtype=complex)
        vac[0] = 1.0
        kern = fock_to_pkernel(
            FockVector(vac).to_density_matrix(), 2, np.linspace(-3, 3, 601)
        )
        with pytest.raises(ValueError):
            breed_expectations(kern, 1)


class TestBreed:
    def test_ideal_delta_x_is_input_squeezing(self):
        rep = breed(BreedConfig(rounds=2, input_squeezing=1.15, cavity=IDEAL))
        assert rep.db_x == pytest.approx(10.0, abs=0.05)

    def test_fixed_point_near_paper_values(self):
        # optimized working point at internal cooperativity 200 (M = 2)
        rep = breed(
            BreedConfig(
                rounds=2, input_squeezing=1.27,
                cavity=CavityParams.from_internal(200.0, 0.9526), scale=1.058,
            )
        )
        assert rep.min_db == pytest.approx(5.5, abs=0.3)

    def test_success_probability_counts_all_cats(self):
        cfg = BreedConfig(rounds=2, input_squeezing=1.0, cavity=IDEAL)
        rep = breed(cfg)
        cat_prob = rep.diagnostics["cat_probability"]
        assert rep.success_probability == pytest.approx(cat_prob ** 4, rel=1e-9)
