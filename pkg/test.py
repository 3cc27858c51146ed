import unittest
import glob
import random
import io
import json
import math
import os
import tempfile
import warnings
from threading import Thread
from threading import Lock

import numpy as np
from scipy.integrate import solve_ivp

import selfdual
from selfdual import cached, suppress_warnings, Phase
from selfdual.caching.general.keys import make_key
from selfdual.config.lattice_presets import get_lattice_preset
from selfdual.config.run_config import RunConfig, build_run_config, load_config_file
from selfdual.constant import defaults
from selfdual.constant.flag import OutputFormat, SectionSource
from selfdual.energetics import (a_plus, bkn_defect, energy_internal, energy_total, gl_residual,
                                 instability_coefficient, m_E_closed_form, normal_state_energy, pure_state_energy,
                                 trivial_pair)
from selfdual.errors import ConfigurationError, ContractError, DomainError, SolverError
from selfdual.landau.groundstate import (ThetaParams, apply_L_plus, apply_magnetic_hamiltonian, combine_sections,
                                         eval_A0, eval_section, eval_u0, eval_u_h, rayleigh_quotient)
from selfdual.landau.zeros import locate_zero
from selfdual.lattice.geometry import boundary_phase, lattice_from_basis, make_grid, make_lattice
from selfdual.lattice.spectral import (ScalarField, VectorField, band_limited_noise, curl, divergence, gradient,
                                       inverse_laplacian, laplacian, leray_project, resample, skew_gradient)
from selfdual.phase_diagram import (chi, classify, diagram_emit, estimate_S, h_k_functional, h_k_of_pair,
                                    hc1_lower_bound, hc1_upper_bound, quasimode_family, slope_sandwich)
from selfdual.selfdual import RefinementWarning, warnings_enabled
from selfdual.solver.bogomolny import bogomolny_residuals, build_pair, continuation_sweep, self_dual_mu
from selfdual.solver.kazdan_warner import SolverConfig, fixed_point_oracle, solve_kazdan_warner
from selfdual.util.output import format_float, render_table
from selfdual.util.verification import VerificationRun, random_pair, verify
from selfdual.cli import main

exec_times = {}                   # executed time of each tested function
lock = Lock()                     # for multi-threading tests
random.seed(100)                  # set seed to ensure that test results are reproducible

for i in range(1, 10):
    exec_times['f' + str(i)] = 0  # init to zero

SQRT2 = math.sqrt(2.0)
K0 = 1.0 / SQRT2
SQUARE = make_lattice(1.0, 0.0)
HEX = get_lattice_preset('hex')
THETA = ThetaParams()
CFG = SolverConfig()
GRID = make_grid(SQUARE, 64)


################################################################################
# Tested functions
################################################################################

@cached
def f1(x):
    exec_times['f1'] += 1
    return x


@cached(max_size=5, thread_safe=False)
def f2(x):
    exec_times['f2'] += 1
    return x


@cached(max_size=0)
def f3(x):
    exec_times['f3'] += 1
    return x


@cached(max_size=5, thread_safe=True)
def f4(x):
    with lock:
        exec_times['f4'] += 1
    return x


@cached
def f5(x, scale=1.0):
    exec_times['f5'] += 1
    return x * scale


################################################################################
# Test entry point
################################################################################

class TestCaching(unittest.TestCase):
    def test_cached_with_default_arguments(self):
        exec_times['f1'] = 0
        f1.cache_clear()
        for _ in range(5):
            f1(10)
        f1(20)
        self.assertEqual(exec_times['f1'], 2)
        info = f1.cache_info()
        self.assertIsNone(info.max_size)
        self.assertTrue(info.thread_safe)
        self.assertEqual(info.hits, 4)
        self.assertEqual(info.misses, 2)
        self.assertEqual(info.current_size, 2)
        self.assertGreaterEqual(info.seconds_saved, 0.0)
        self.assertFalse(f1.cache_is_full())

    def test_cached_with_lru_eviction(self):
        exec_times['f2'] = 0
        f2.cache_clear()
        self.assertTrue(f2.cache_is_empty())
        for i in range(20):
            f2(i)
        self.assertTrue(f2.cache_is_full())
        self.assertEqual(exec_times['f2'], 20)
        for i in (15, 16, 17, 18, 19):
            self.assertTrue(f2.cache_contains_argument((i, )))
        self.assertFalse(f2.cache_contains_argument((14, )))

        f2(15)                          # 15 becomes the most recently used
        f2(100)                         # evicts 16
        self.assertTrue(f2.cache_contains_argument((15, )))
        self.assertFalse(f2.cache_contains_argument((16, )))
        info = f2.cache_info()
        self.assertEqual(info.hits, 1)
        self.assertEqual(info.misses, 21)
        self.assertEqual(info.current_size, 5)
        self.assertEqual([arguments[0][0] for arguments, _ in f2.cache_items()], [100, 15, 19, 18, 17])

    def test_cached_statistic_only(self):
        exec_times['f3'] = 0
        f3.cache_clear()
        f3(1)
        f3(1)
        f3(2)
        self.assertEqual(exec_times['f3'], 3)
        info = f3.cache_info()
        self.assertEqual(info.max_size, 0)
        self.assertEqual(info.hits, 0)
        self.assertEqual(info.misses, 3)
        self.assertEqual(info.current_size, 0)
        self.assertTrue(f3.cache_is_empty())
        f3.cache_clear()
        self.assertEqual(f3.cache_info().misses, 0)

    def test_cached_multithread(self):
        exec_times['f4'] = 0
        f4.cache_clear()
        keys = list(range(5)) * 2000
        for i in range(5):
            f4(i)

        def run():
            shuffled = list(keys)
            random.shuffle(shuffled)
            for key in shuffled:
                f4(key)

        threads = [Thread(target=run) for _ in range(4)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        self.assertEqual(exec_times['f4'], 5)
        self.assertEqual(f4.cache_info().hits, 4 * len(keys))

    def test_cached_with_keyword_arguments_and_unhashable_arguments(self):
        exec_times['f5'] = 0
        f5.cache_clear()
        f5(2.0, scale=3.0)
        f5(2.0, scale=3.0)
        self.assertEqual(exec_times['f5'], 1)
        self.assertTrue(f5.cache_contains_argument([(2.0, ), {'scale': 3.0}]))
        f5(np.ones(3))
        f5(np.ones(3))
        self.assertEqual(exec_times['f5'], 3)       # arrays bypass the cache
        self.assertEqual(f5.cache_info().current_size, 1)
        self.assertIsNone(make_key((np.ones(2), ), {}))

    def test_cached_remove_if(self):
        f1.cache_clear()
        for i in range(10):
            f1(i)
        self.assertFalse(f1.cache_remove_if(lambda arguments, result: result > 100))
        self.assertTrue(f1.cache_remove_if(lambda arguments, result: result % 2 == 0))
        self.assertEqual(f1.cache_info().current_size, 5)
        self.assertFalse(f1.cache_contains_argument((4, )))
        self.assertTrue(f1.cache_contains_argument((5, )))

    def test_cached_argument_validation(self):
        with self.assertRaises(TypeError):
            cached(42)
        with self.assertRaises(TypeError):
            cached(max_size='5')(lambda x: x)
        with self.assertRaises(ValueError):
            cached(max_size=-1)(lambda x: x)
        with self.assertRaises(TypeError):
            cached(thread_safe=1)(lambda x: x)
        with self.assertRaises(TypeError):
            f1.cache_contains_argument(42)

    def test_cached_preserves_signature(self):
        import inspect
        self.assertEqual(str(inspect.signature(f5)), '(x, scale=1.0)')
        self.assertEqual(f5.__name__, 'f5')

    def test_numerical_builders_are_shared(self):
        self.assertIs(make_grid(SQUARE, 32), make_grid(make_lattice(1.0, 0.0), 32))
        self.assertIs(eval_u0(SQUARE, GRID, THETA), eval_u0(SQUARE, GRID, ThetaParams(10)))
        self.assertIs(build_pair(SQUARE, GRID, THETA, 0.3, CFG), build_pair(SQUARE, GRID, THETA, 0.3, SolverConfig()))


class TestLatticeGeometry(unittest.TestCase):
    def test_make_lattice(self):
        for u, w in ((1.0, 0.0), (2.0, 0.3), (math.sqrt(2.0 / math.sqrt(3.0)), 0.5 * math.sqrt(2.0 / math.sqrt(3.0)))):
            lat = make_lattice(u, w)
            self.assertAlmostEqual(lat.r * lat.u, 1.0, places=15)
            self.assertAlmostEqual(abs(np.linalg.det(lat.basis)), 1.0, places=14)
        self.assertEqual(make_lattice(2.0, 0.3).r, 0.5)
        self.assertEqual(make_lattice(1.0, 0.0), SQUARE)
        self.assertEqual(hash(make_lattice(1.0, 0.0)), hash(SQUARE))

    def test_make_lattice_rejects_nonpositive_u(self):
        with self.assertRaises(DomainError):
            make_lattice(0.0, 0.0)
        with self.assertRaises(DomainError):
            make_lattice(-1.0, 0.2)

    def test_hex_preset(self):
        a = HEX.u
        self.assertAlmostEqual(a * a * math.sqrt(3.0) / 2.0, 1.0, places=14)
        self.assertAlmostEqual(HEX.w, a / 2.0, places=15)
        self.assertAlmostEqual(HEX.r, a * math.sqrt(3.0) / 2.0, places=14)
        v1, v2 = HEX.v1, HEX.v2
        angle = math.degrees(math.acos(v1 @ v2 / (np.linalg.norm(v1) * np.linalg.norm(v2))))
        self.assertAlmostEqual(angle, 60.0, places=10)
        with self.assertRaises(ConfigurationError):
            get_lattice_preset('triangle')

    def test_lattice_from_basis(self):
        lat = lattice_from_basis((0.0, 2.0), (-3.0, 0.0))
        self.assertAlmostEqual(lat.u, 2.0 / math.sqrt(6.0), places=14)
        self.assertAlmostEqual(lat.r * lat.u, 1.0, places=14)
        rotated = lattice_from_basis((math.cos(0.4), math.sin(0.4)), (-math.sin(0.4), math.cos(0.4)))
        self.assertAlmostEqual(rotated.u, 1.0, places=14)
        self.assertAlmostEqual(rotated.w, 0.0, places=14)
        with self.assertRaises(DomainError):
            lattice_from_basis((1.0, 1.0), (2.0, 2.0))

    def test_grid_coordinates(self):
        grid = make_grid(SQUARE, 8)
        self.assertTrue(np.allclose(grid.coords_xy[0, :, 0], np.arange(8) / 8.0))
        self.assertTrue(np.allclose(grid.coords_xy[0, :, 1], 0.0))
        self.assertTrue(np.allclose(grid.coords_lat[:, 0, 1], np.arange(8) / 8.0))
        self.assertFalse(grid.x.flags.writeable)
        self.assertEqual(grid.wavevector(1, 0), (2.0 * math.pi, 0.0))
        self.assertEqual(tuple(grid.wavevectors[0, 0]), (0.0, 0.0))
        self.assertTrue(np.allclose(grid.wavevectors[0, 1], (2.0 * math.pi, 0.0)))
        stretched = make_grid(make_lattice(2.0, 0.0), 8)
        self.assertTrue(np.allclose(stretched.wavevector(1, 0), (math.pi, 0.0)))
        self.assertTrue(np.allclose(stretched.wavevectors[0, 1], (math.pi, 0.0)))

    def test_grid_wavevectors_invert_the_basis(self):
        lat = make_lattice(1.3, 0.4)
        grid = make_grid(lat, 16)
        for p, q in ((1, 0), (0, 1), (2, -3)):
            expected = 2.0 * math.pi * np.linalg.inv(lat.basis).T @ np.array([p, q])
            self.assertTrue(np.allclose(grid.wavevector(p, q), expected))
            self.assertTrue(np.allclose(grid.wavevectors[q % 16, p % 16], expected))

    def test_make_grid_rejects_bad_sizes(self):
        for n in (4, 6, 9, 17):
            with self.assertRaises(ConfigurationError):
                make_grid(SQUARE, n)
        with self.assertRaises(TypeError):
            make_grid(SQUARE, 16.0)

    def test_periodic_seam(self):
        lat = make_lattice(1.3, 0.4)
        grid = make_grid(lat, 16)
        field = np.cos(2.0 * math.pi * grid.s) * np.sin(2.0 * math.pi * grid.t)
        x1, y1 = grid.x + lat.u, grid.y
        s1, t1 = lat.to_lattice(x1, y1)
        self.assertTrue(np.allclose(np.cos(2.0 * math.pi * s1) * np.sin(2.0 * math.pi * t1), field))
        x0, y0, v = lat.reduce(2.7, -0.4)
        s, t = lat.to_lattice(x0, y0)
        self.assertTrue(0.0 <= s < 1.0 and 0.0 <= t < 1.0)
        self.assertAlmostEqual(x0 + v[0], 2.7, places=14)


class TestSpectral(unittest.TestCase):
    def _test_function(self, lat, n):
        grid = make_grid(lat, n)
        two_pi = 2.0 * math.pi
        s, t = grid.s, grid.t
        g = np.cos(two_pi * s) * np.sin(two_pi * t)
        gs = -two_pi * np.sin(two_pi * s) * np.sin(two_pi * t)
        gt = two_pi * np.cos(two_pi * s) * np.cos(two_pi * t)
        # d/dx = r d/ds, d/dy = -w d/ds + u d/dt
        return grid, g, lat.r * gs, -lat.w * gs + lat.u * gt

    def test_spectral_derivatives(self):
        for lat in (SQUARE, HEX, make_lattice(1.3, 0.4)):
            grid, g, gx, gy = self._test_function(lat, 16)
            grad = gradient(ScalarField(grid, g))
            self.assertLess(np.max(np.abs(grad.ax - gx)), 1e-10)
            self.assertLess(np.max(np.abs(grad.ay - gy)), 1e-10)
            lap = laplacian(ScalarField(grid, g)).values
            lap_from_grad = divergence(VectorField(grid, gx, gy)).values
            self.assertLess(np.max(np.abs(lap - lap_from_grad)), 1e-9)

    def test_inverse_laplacian(self):
        grid = make_grid(HEX, 32)
        f = band_limited_noise(grid, 3, np.random.default_rng(1))
        back = inverse_laplacian(laplacian(f))
        self.assertLess(np.max(np.abs(back.values - (f.values - f.mean()))), 1e-12)

    def test_skew_gradient_and_projection(self):
        grid = make_grid(HEX, 32)
        f = band_limited_noise(grid, 4, np.random.default_rng(2))
        a = skew_gradient(f)
        self.assertLess(divergence(a).max_norm(), 1e-10)
        self.assertTrue(np.allclose(a.mean(), (0.0, 0.0), atol=1e-14))
        self.assertLess(np.max(np.abs(curl(a).values + laplacian(f).values)), 1e-9)
        projected = leray_project(a)
        self.assertLess(np.max(np.abs(projected.ax - a.ax)), 1e-12)
        self.assertLess(leray_project(gradient(f)).max_norm(), 1e-12)
        shifted = leray_project(VectorField(grid, a.ax + 1.0, a.ay))
        self.assertAlmostEqual(shifted.mean()[0], 0.0, places=14)

    def test_resample(self):
        grid = make_grid(SQUARE, 16)
        f = band_limited_noise(grid, 5, np.random.default_rng(3))
        fine = resample(f, 64)
        self.assertEqual(fine.grid.n, 64)
        self.assertTrue(np.allclose(fine.values[::4, ::4], f.values, atol=1e-13))
        self.assertTrue(np.allclose(resample(fine, 16).values, f.values, atol=1e-13))

    def test_fields_are_read_only_and_checked(self):
        f = ScalarField(GRID, np.zeros(GRID.shape))
        with self.assertRaises(ValueError):
            f.values[0, 0] = 1.0
        with self.assertRaises(ContractError):
            ScalarField(GRID, np.zeros((4, 4)))
        with self.assertRaises(ContractError):
            f + ScalarField(make_grid(SQUARE, 32), np.zeros((32, 32)))


class TestLandauGroundState(unittest.TestCase):
    def test_u0_values(self):
        sample = eval_section(SQUARE, THETA, 0.0, 0.0)
        self.assertAlmostEqual(complex(sample.values).real, 1.0864348113, places=9)
        self.assertAlmostEqual(complex(sample.values).imag, 0.0, places=15)
        self.assertLess(abs(complex(eval_section(SQUARE, THETA, 0.5, 0.5).values)), 1e-14)
        coarse = eval_section(SQUARE, ThetaParams(5), 0.0, 0.0).values
        fine = eval_section(SQUARE, ThetaParams(20), 0.0, 0.0).values
        self.assertLess(abs(coarse - fine), 1e-14)

    def test_truncation_stability(self):
        for lat in (SQUARE, HEX):
            grid = make_grid(lat, 64)
            u10 = eval_u0(lat, grid, ThetaParams(10))
            u20 = eval_u0(lat, grid, ThetaParams(20))
            self.assertLess(np.max(np.abs(u10.values - u20.values)), 1e-12)

    def test_truncation_too_small(self):
        with self.assertRaises(ConfigurationError):
            eval_u0(SQUARE, GRID, ThetaParams(1))
        with self.assertRaises(ConfigurationError):
            ThetaParams(0)

    def test_u0_norm(self):
        u0 = eval_u0(SQUARE, GRID, THETA)
        self.assertAlmostEqual(u0.norm_squared(), K0, delta=1e-10)
        hex_grid = make_grid(HEX, 64)
        self.assertAlmostEqual(eval_u0(HEX, hex_grid, THETA).norm_squared(), HEX.u / SQRT2, delta=1e-10)
        self.assertEqual(u0.source, SectionSource.THETA_SERIES)

    def test_quasi_periodicity(self):
        rng = np.random.default_rng(4)
        x, y = rng.uniform(0.0, 1.0, size=(2, 50))
        for lat in (SQUARE, HEX, make_lattice(1.3, 0.4)):
            base = eval_section(lat, THETA, x, y).values
            for m, n in ((1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (1, -3)):
                v = lat.vector(m, n)
                moved = eval_section(lat, THETA, x + v[0], y + v[1]).values
                self.assertLess(np.max(np.abs(moved - boundary_phase(lat, m, n, x, y) * base)), 1e-10)
            translated = eval_section(lat, THETA, x + lat.u, y, h=(0.2, 0.1)).values
            expected = boundary_phase(lat, 1, 0, x, y) * eval_section(lat, THETA, x, y, h=(0.2, 0.1)).values
            self.assertLess(np.max(np.abs(translated - expected)), 1e-10)

    def test_L_plus_annihilates_u0(self):
        for lat in (SQUARE, HEX):
            u0 = eval_u0(lat, make_grid(lat, 64), THETA)
            self.assertLess(np.max(np.abs(apply_L_plus(u0))), 1e-10)

    def test_L_plus_on_translates(self):
        h = (0.1, 0.2)
        u_h = eval_u_h(SQUARE, GRID, THETA, h)
        expected = 2.0 * math.pi * complex(*h) * u_h.values
        self.assertLess(np.max(np.abs(apply_L_plus(u_h) - expected)) / np.max(np.abs(u_h.values)), 1e-9)
        self.assertIs(eval_u_h(SQUARE, GRID, THETA, (0.0, 0.0)), eval_u0(SQUARE, GRID, THETA))

    def test_magnetic_hamiltonian(self):
        u0 = eval_u0(SQUARE, GRID, THETA)
        self.assertLess(np.max(np.abs(apply_magnetic_hamiltonian(u0) - 2.0 * math.pi * u0.values)), 1e-8)
        self.assertAlmostEqual(rayleigh_quotient(u0), 2.0 * math.pi, delta=1e-8)
        # the orthogonal complement of u0 inside span{u0, u_h} stays on or above the lowest level
        u_h = eval_u_h(SQUARE, GRID, THETA, (0.3, 0.1))
        overlap = np.mean(np.conj(u0.values) * u_h.values) / np.mean(u0.modulus_squared())
        orthogonal = combine_sections([1.0, -overlap], [u_h, u0])
        self.assertGreaterEqual(rayleigh_quotient(orthogonal), 2.0 * math.pi - 1e-8)

    def test_eval_A0(self):
        self.assertTrue(np.allclose(eval_A0([0.0, 0.0]), (0.0, 0.0)))
        self.assertTrue(np.allclose(eval_A0([1.0, 2.0]), (-2.0 * math.pi, math.pi)))
        step = 1e-3
        points = GRID.coords_xy
        a = eval_A0(points)
        ax_up = eval_A0(points + np.array([0.0, step]))
        ay_right = eval_A0(points + np.array([step, 0.0]))
        discrete_curl = (ay_right[..., 1] - a[..., 1]) / step - (ax_up[..., 0] - a[..., 0]) / step
        self.assertTrue(np.allclose(discrete_curl, 2.0 * math.pi))

    def test_apply_L_plus_requires_provenance(self):
        bare = eval_u0(SQUARE, GRID, THETA)
        from selfdual.landau.groundstate import SectionField
        with self.assertRaises(ContractError):
            apply_L_plus(SectionField(SQUARE, GRID, bare.values))
        with self.assertRaises(TypeError):
            apply_L_plus(bare.values)

    def test_locate_zero(self):
        zero = locate_zero(eval_u0(SQUARE, GRID, THETA))
        self.assertEqual(zero.winding, 1)
        self.assertAlmostEqual(zero.point[0], 0.5, places=9)
        self.assertAlmostEqual(zero.point[1], 0.5, places=9)
        zero = locate_zero(eval_u_h(SQUARE, GRID, THETA, (0.25, 0.0)))
        self.assertEqual(zero.winding, 1)
        self.assertAlmostEqual(zero.point[0], 0.75, places=9)
        self.assertAlmostEqual(zero.point[1], 0.5, places=9)

    def test_locate_zero_on_other_lattices(self):
        hex_grid = make_grid(HEX, 64)
        self.assertEqual(locate_zero(eval_u0(HEX, hex_grid, THETA)).winding, 1)
        h = (0.137, 0.291)
        zero = locate_zero(eval_u_h(SQUARE, GRID, THETA, h))
        self.assertLess(math.hypot(zero.point[0] - 0.5 - h[0], zero.point[1] - 0.5 - h[1]), 1.0 / 64)

    def test_locate_zero_of_combinations(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            alpha, beta = rng.uniform(-1.0, 1.0, size=2)
            h = tuple(rng.uniform(0.0, 1.0, size=2))
            u = combine_sections([alpha, beta], [eval_u0(SQUARE, GRID, THETA), eval_u_h(SQUARE, GRID, THETA, h)])
            self.assertEqual(locate_zero(u).winding, 1)

    def test_locate_zero_needs_a_sampler_on_the_contour(self):
        u0 = eval_u0(SQUARE, GRID, THETA)
        from selfdual.landau.groundstate import SectionField
        with self.assertRaises(ContractError):
            locate_zero(SectionField(SQUARE, GRID, u0.values))


class TestKazdanWarner(unittest.TestCase):
    def test_constant_coefficient(self):
        h = ScalarField(GRID, np.full(GRID.shape, 2.0))
        f = solve_kazdan_warner(h, 0.5, 0.3, CFG)
        self.assertTrue(np.allclose(f.values, 0.5 * math.log(0.25)))
        self.assertEqual(f.diagnostics.iterations, 0)

    def test_ground_state_coefficient(self):
        H = 0.3
        mu = self_dual_mu(H)
        A = 1.0 - SQRT2 * H
        h = ScalarField(GRID, eval_u0(SQUARE, GRID, THETA).modulus_squared())
        f = solve_kazdan_warner(h, A, mu, CFG)
        residual = mu * laplacian(f).values - h.values * np.exp(2.0 * f.values) + A
        self.assertLess(np.max(np.abs(residual)), 1e-10)
        self.assertTrue(f.diagnostics.converged)
        self.assertEqual(len(f.diagnostics.residual_history), f.diagnostics.iterations + 1)

    def test_fixed_point_oracle_agrees(self):
        H = 0.3
        grid = make_grid(SQUARE, 32)
        h = ScalarField(grid, eval_u0(SQUARE, grid, THETA).modulus_squared())
        A, mu = 1.0 - SQRT2 * H, self_dual_mu(H)
        newton = solve_kazdan_warner(h, A, mu, CFG)
        oracle = fixed_point_oracle(h, A, mu)
        self.assertLess(np.max(np.abs(newton.values - oracle.values)), 1e-6)

    def test_uniqueness_from_random_starts(self):
        H = 0.3
        h = ScalarField(GRID, eval_u0(SQUARE, GRID, THETA).modulus_squared())
        A, mu = 1.0 - SQRT2 * H, self_dual_mu(H)
        reference = solve_kazdan_warner(h, A, mu, CFG)
        rng = np.random.default_rng(6)
        for _ in range(5):
            start = ScalarField(GRID, rng.uniform(-1.0, 0.5) + 0.1 * rng.standard_normal(GRID.shape))
            f = solve_kazdan_warner(h, A, mu, CFG, init=start)
            self.assertLess(np.max(np.abs(f.values - reference.values)), 1e-8)

    def test_domain_errors(self):
        h = ScalarField(GRID, np.ones(GRID.shape))
        with self.assertRaises(DomainError):
            solve_kazdan_warner(h, 0.0, 0.1, CFG)
        with self.assertRaises(DomainError):
            solve_kazdan_warner(h, 0.5, -0.1, CFG)
        with self.assertRaises(DomainError):
            solve_kazdan_warner(ScalarField(GRID, np.zeros(GRID.shape)), 0.5, 0.1, CFG)
        with self.assertRaises(DomainError):
            solve_kazdan_warner(ScalarField(GRID, -np.ones(GRID.shape)), 0.5, 0.1, CFG)

    def test_non_convergence_carries_history(self):
        h = ScalarField(GRID, eval_u0(SQUARE, GRID, THETA).modulus_squared())
        with self.assertRaises(SolverError) as context:
            solve_kazdan_warner(h, 0.5, 0.05, SolverConfig(max_newton=1))
        self.assertEqual(len(context.exception.residual_history), 2)

    def test_solver_config_validation(self):
        with self.assertRaises(ConfigurationError):
            SolverConfig(tol_residual=0.0)
        with self.assertRaises(ConfigurationError):
            SolverConfig(continuation_step=-0.1)
        with self.assertRaises(ConfigurationError):
            SolverConfig(grid_n=30 + 1)


class TestBogomolnySolver(unittest.TestCase):
    def test_pair_at_03(self):
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        mu = pair.mu
        self.assertAlmostEqual(mu, 0.3 / (math.pi * SQRT2), places=15)
        self.assertAlmostEqual(pair.norm_u2, 1.0 - SQRT2 * 0.3, delta=1e-6)
        self.assertAlmostEqual(pair.norm_u2, 0.575736, delta=1e-6)
        expected = mu * mu * (4.0 * math.pi ** 2 + pair.curl_energy)
        self.assertLess(abs(pair.potential_integral - expected) / expected, 1e-6)
        self.assertLessEqual(np.max(np.abs(pair.u.values)), 1.0 + 1e-8)
        d_plus, field_equation = bogomolny_residuals(pair.u, pair.a, mu)
        self.assertLess(d_plus, 1e-6)
        self.assertLess(field_equation, 1e-6)

    def test_pair_cache_evicts_least_recently_used(self):
        self.assertEqual(build_pair.cache_info().max_size, defaults.PAIR_CACHE_SIZE)
        self.assertEqual(eval_u0.cache_info().max_size, defaults.SECTION_CACHE_SIZE)
        build_pair.cache_clear()
        grid = make_grid(SQUARE, 16)
        fields = [round(0.6 - 0.01 * i, 2) for i in range(defaults.PAIR_CACHE_SIZE + 1)]
        for H in fields:
            build_pair(SQUARE, grid, THETA, H, CFG)
        self.assertTrue(build_pair.cache_is_full())
        self.assertFalse(build_pair.cache_contains_argument((SQUARE, grid, THETA, fields[0], CFG)))
        self.assertTrue(build_pair.cache_contains_argument((SQUARE, grid, THETA, fields[-1], CFG)))
        self.assertEqual(build_pair.cache_info().current_size, defaults.PAIR_CACHE_SIZE)

    def test_potential_is_divergence_free(self):
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        self.assertLess(divergence(pair.a).max_norm(), 1e-10)
        self.assertTrue(np.allclose(pair.a.mean(), (0.0, 0.0), atol=1e-14))
        self.assertLess(np.max(np.abs(curl(pair.a).values - pair.curl_a.values)), 1e-8)

    def test_vortex_sits_at_the_zero_of_u0(self):
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        zero = locate_zero(pair.u)
        self.assertEqual(zero.winding, 1)
        self.assertAlmostEqual(zero.point[0], 0.5, places=9)

    def test_degenerate_and_invalid_fields(self):
        pair = build_pair(SQUARE, GRID, THETA, K0, CFG)
        self.assertTrue(pair.degenerate)
        self.assertIsNone(pair.f)
        self.assertEqual(np.max(np.abs(pair.u.values)), 0.0)
        self.assertTrue(build_pair(SQUARE, GRID, THETA, 0.7071068, CFG).degenerate)
        for H in (0.0, -0.1, 0.8):
            with self.assertRaises(DomainError):
                build_pair(SQUARE, GRID, THETA, H, CFG)

    def test_vanishing_near_bifurcation(self):
        near = build_pair(SQUARE, GRID, THETA, 0.7071, CFG)
        self.assertLess(near.norm_u2, 1e-4)
        self.assertAlmostEqual(near.norm_u2, 1.0 - SQRT2 * 0.7071, delta=1e-6)

    def test_continuation_sweep(self):
        result = continuation_sweep(SQUARE, [0.7, 0.6, 0.5], CFG)
        self.assertIsNone(result.failure)
        self.assertEqual(len(result.pairs), 3)
        norms = [pair.norm_u2 for pair in result.pairs]
        self.assertTrue(norms[0] < norms[1] < norms[2])

    def test_warm_start_does_not_move_the_solution(self):
        cold = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        single = continuation_sweep(SQUARE, [0.3], CFG).pairs[0]
        self.assertLess(np.max(np.abs(single.f.values - cold.f.values)), 1e-9)
        warm = continuation_sweep(SQUARE, [0.5, 0.3], CFG).pairs[1]
        self.assertLess(np.max(np.abs(warm.f.values - cold.f.values)), 1e-9)

    def test_continuity_in_the_field(self):
        base = build_pair(SQUARE, GRID, THETA, 0.4, CFG).f.values
        gaps = [np.max(np.abs(build_pair(SQUARE, GRID, THETA, 0.4 - dH, CFG).f.values - base))
                for dH in (0.01, 0.005)]
        self.assertGreater(gaps[0], 0.0)
        self.assertAlmostEqual(gaps[0] / gaps[1], 2.0, delta=0.2)

    def test_sweep_failure_returns_prefix(self):
        result = continuation_sweep(SQUARE, [0.5, 0.3], SolverConfig(max_newton=1))
        self.assertIsInstance(result.failure, SolverError)
        self.assertEqual(result.failure.H_int, 0.5)
        self.assertEqual(result.pairs, ())
        with self.assertRaises(DomainError):
            continuation_sweep(SQUARE, [0.3, 0.5], CFG)
        with self.assertRaises(DomainError):
            continuation_sweep(SQUARE, [], CFG)

    def test_mesh_refinement(self):
        coarse = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        fine = build_pair(SQUARE, make_grid(SQUARE, 128), THETA, 0.3, CFG)
        for name in ('norm_u2', 'potential_integral', 'curl_energy', 'kinetic_integral'):
            self.assertLess(abs(getattr(coarse, name) - getattr(fine, name)), 1e-8)


class TestEnergetics(unittest.TestCase):
    def test_normal_state(self):
        u, a = trivial_pair(SQUARE, GRID)
        for k in (0.5, K0, 1.5):
            report = energy_internal(u, a, k, 0.4)
            self.assertEqual(report.kinetic, 0.0)
            self.assertEqual(report.field, 0.0)
            self.assertAlmostEqual(report.potential, 0.25, places=15)
            self.assertAlmostEqual(report.internal, 0.25, places=15)
            self.assertAlmostEqual(energy_total(u, a, k, 0.4, 0.4).total, 0.25, places=15)
        self.assertEqual(normal_state_energy(), 0.25)
        self.assertEqual(pure_state_energy(0.6), 0.18)

    def test_a_plus_and_bkn_of_the_normal_state(self):
        u, a = trivial_pair(SQUARE, GRID)
        H = 0.5
        mu = H / (2.0 * math.pi * K0)
        self.assertAlmostEqual(a_plus(u, a, H), 0.25 * (2.0 * math.pi * mu - 1.0) ** 2, places=14)
        self.assertLess(bkn_defect(u, a, H), 1e-12)

    def test_self_dual_energies(self):
        for H in (0.2, 0.3, 0.5, 0.65):
            pair = build_pair(SQUARE, GRID, THETA, H, CFG)
            report = energy_internal(pair.u, pair.a, K0, H)
            self.assertAlmostEqual(report.internal, m_E_closed_form(H), delta=1e-6)
            mu_pi = H / SQRT2
            self.assertLess(abs(report.kinetic + 2.0 * report.field - (mu_pi - 2.0 * mu_pi ** 2)) /
                            (mu_pi - 2.0 * mu_pi ** 2), 1e-6)
            self.assertLess(abs(4.0 * report.potential - pair.potential_integral), 1e-12)
            self.assertLess(report.a_plus, 1e-9)
            self.assertLess(report.bkn_defect, 1e-8)
        self.assertAlmostEqual(m_E_closed_form(0.3), 0.3 / SQRT2 - 0.045, places=12)

    def test_total_energy(self):
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        report = energy_total(pair.u, pair.a, K0, 0.3, 0.5)
        self.assertAlmostEqual(report.magnetic_gap, 0.02, places=15)
        self.assertAlmostEqual(report.total, 0.3 / SQRT2 - 0.045 + 0.02, delta=1e-6)
        self.assertAlmostEqual(report.total, report.internal + report.magnetic_gap, places=15)

    def test_closed_form(self):
        self.assertAlmostEqual(m_E_closed_form(0.3), 0.167132034, places=8)
        self.assertAlmostEqual(m_E_closed_form(K0), 0.25, places=15)
        self.assertEqual(m_E_closed_form(1.0), 0.25)
        with self.assertRaises(DomainError):
            m_E_closed_form(0.0)

    def test_bkn_identity_on_random_pairs(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(100):
            u, a = random_pair(SQUARE, GRID, THETA, rng)
            H = rng.uniform(0.05, 1.0)
            report = energy_internal(u, a, K0, H)
            self.assertGreaterEqual(report.a_plus, 0.0)
            worst = max(worst, report.bkn_defect, bkn_defect(u, a, H, k=rng.uniform(0.3, 2.0)))
        self.assertLess(worst, 1e-8)

    def test_bkn_identity_on_the_hex_lattice(self):
        grid = make_grid(HEX, 64)
        rng = np.random.default_rng(8)
        for _ in range(10):
            u, a = random_pair(HEX, grid, THETA, rng)
            self.assertLess(bkn_defect(u, a, 0.4), 1e-8)

    def test_normal_state_lower_bound(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            u, a = random_pair(SQUARE, GRID, THETA, rng)
            k = rng.uniform(K0, 2.0)
            H = k + rng.uniform(0.0, 1.0)
            self.assertGreaterEqual(energy_internal(u, a, k, H).internal, 0.25 - 1e-9)

    def test_instability_direction(self):
        u0 = eval_u0(SQUARE, GRID, THETA)
        k, H = 1.0, 0.8
        a = VectorField.zeros(GRID)
        expected = instability_coefficient(k, H)
        self.assertAlmostEqual(expected, -0.1, places=15)
        for alpha in (0.02, 0.01):
            u = combine_sections([alpha / math.sqrt(u0.norm_squared())], [u0])
            total = energy_total(u, a, k, H, H).total
            self.assertLess(total, 0.25)
            self.assertLess(abs((total - 0.25) / alpha ** 2 - expected), 0.05 * abs(expected))

    def test_gl_residuals(self):
        u, a = trivial_pair(SQUARE, GRID)
        self.assertEqual(gl_residual(u, a, K0, 0.3), (0.0, 0.0))
        for H in (0.2, 0.3, 0.5, 0.65):
            pair = build_pair(SQUARE, GRID, THETA, H, CFG)
            first, second = gl_residual(pair.u, pair.a, K0, H)
            self.assertLess(first, 1e-6)
            self.assertLess(second, 1e-6)
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        perturbed = combine_sections([1.0, 0.1], [pair.u, eval_u_h(SQUARE, GRID, THETA, (0.3, 0.2))])
        self.assertGreater(gl_residual(perturbed, pair.a, K0, 0.3)[0], 1e-3)

    def test_mismatched_grids(self):
        u, _ = trivial_pair(SQUARE, GRID)
        with self.assertRaises(ContractError):
            energy_internal(u, VectorField.zeros(make_grid(SQUARE, 32)), K0, 0.3)


class TestPhaseDiagram(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        result = quasimode_family(SQUARE, (0.6, 0.5, 0.4, 0.3, 0.2, 0.1), CFG)
        assert result.failure is None
        cls.pairs = result.pairs

    def test_family_cache(self):
        self.assertEqual(quasimode_family.cache_info().max_size, defaults.FAMILY_CACHE_SIZE)
        again = quasimode_family(SQUARE, [0.6, 0.5, 0.4, 0.3, 0.2, 0.1], CFG)
        self.assertIs(again.pairs, self.pairs)
        cfg = SolverConfig(tol_residual=1e-30)
        first = quasimode_family(SQUARE, (0.5, 0.4), cfg)
        self.assertIsInstance(first.failure, SolverError)
        second = quasimode_family(SQUARE, (0.5, 0.4), cfg)
        self.assertIsNot(second, first)             # failed sweeps are solved again
        self.assertIsInstance(second.failure, SolverError)
        self.assertIs(quasimode_family(SQUARE, (0.6, 0.5, 0.4, 0.3, 0.2, 0.1), CFG).pairs, self.pairs)

    def test_h_k_of_the_trivial_pair(self):
        u, a = trivial_pair(SQUARE, GRID)
        value = h_k_functional(u, a, 1.3)
        self.assertAlmostEqual(value.value, K0, places=15)
        self.assertAlmostEqual(value.H_int_opt, K0, places=15)
        self.assertFalse(value.degenerate)

    def test_h_k_of_self_dual_pairs(self):
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        value = h_k_functional(pair.u, pair.a, K0)
        self.assertAlmostEqual(value.value, K0, delta=1e-8)
        self.assertAlmostEqual(value.H_int_opt, 0.3, delta=1e-6)
        self.assertAlmostEqual(h_k_of_pair(pair, K0).value, value.value, delta=1e-12)

    def test_h_k_slope_is_chi(self):
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        delta = 1e-4
        slope = (h_k_of_pair(pair, K0 + delta).value - h_k_of_pair(pair, K0).value) / delta
        self.assertAlmostEqual(slope, -chi(pair), delta=1e-3)
        self.assertAlmostEqual(pair.kinetic_integral, 2.0 * math.pi * chi(pair), delta=1e-6)
        with self.assertRaises(DomainError):
            h_k_of_pair(pair, 0.5)

    def test_h_k_degenerate_when_u_has_modulus_one(self):
        from selfdual.landau.groundstate import SectionField
        ones, zeros = np.ones(GRID.shape), np.zeros(GRID.shape)
        u = SectionField(SQUARE, GRID, ones, zeros, zeros, zeros, source=SectionSource.COMBINED)
        value = h_k_functional(u, VectorField.zeros(GRID), 1.0)
        self.assertTrue(value.degenerate)
        self.assertIsNone(value.H_int_opt)

    def test_chi(self):
        for pair in self.pairs:
            self.assertTrue(0.0 < chi(pair) < 1.0)
        chis = [chi(pair) for pair in self.pairs]
        self.assertEqual(chis, sorted(chis))
        self.assertLess(chi(build_pair(SQUARE, GRID, THETA, K0, CFG)), 1e-6)

    def test_upper_bound(self):
        self.assertAlmostEqual(hc1_upper_bound(K0, self.pairs).value, K0, delta=1e-9)
        bound = hc1_upper_bound(K0 + 0.05, self.pairs)
        self.assertLess(bound.value, K0)
        self.assertIsNotNone(bound.witness)
        self.assertLessEqual(hc1_upper_bound(10.0, self.pairs).value, K0)
        with self.assertRaises(DomainError):
            hc1_upper_bound(1.0, [])
        ks = np.linspace(K0, 2.0, 15)
        products = [k * hc1_upper_bound(k, self.pairs).value for k in ks]
        for before, after in zip(products, products[1:]):
            self.assertGreaterEqual(after, before - 1e-12)

    def test_lower_bound(self):
        self.assertAlmostEqual(hc1_lower_bound(K0), K0, places=15)
        self.assertEqual(hc1_lower_bound(1.0), 0.5)
        self.assertEqual(hc1_lower_bound(2.0), 0.25)
        with self.assertRaises(DomainError):
            hc1_lower_bound(0.5)
        for k in np.linspace(K0 + 0.01, 2.0, 10):
            self.assertLess(hc1_lower_bound(k), hc1_upper_bound(k, self.pairs).value)

    def test_slope_sandwich(self):
        S = max(chi(pair) for pair in self.pairs)
        for check in slope_sandwich(self.pairs, S):
            self.assertTrue(check.passed, check)

    def test_single_point_estimate(self):
        estimate = estimate_S(SQUARE, (0.3, ), CFG)
        pair = build_pair(SQUARE, GRID, THETA, 0.3, CFG)
        self.assertAlmostEqual(estimate.grid_sup, chi(pair), delta=1e-9)
        self.assertAlmostEqual(estimate.extrapolated, estimate.grid_sup, places=15)

    def test_classify_examples(self):
        self.assertEqual(classify(0.5, 0.5).phase, Phase.PURE)
        self.assertEqual(classify(0.5, 0.9).phase, Phase.NORMAL)
        self.assertEqual(classify(1.0, 2.0).phase, Phase.NORMAL)
        point = classify(1.0, 0.71, self.pairs)
        self.assertEqual(point.phase, Phase.MIXED)
        self.assertLess(point.hc1_upper, 0.71)
        self.assertEqual(point.hc2, 1.0)
        self.assertEqual(classify(1.0, 0.4, self.pairs).phase, Phase.PURE)
        with self.assertRaises(DomainError):
            classify(0.0, 0.5)

    def test_classify_grid_has_no_contradictions(self):
        for k in np.linspace(0.3, 2.0, 20):
            for H in np.linspace(0.05, 2.5, 20):
                point = classify(k, H, self.pairs)
                self.assertLessEqual(point.hc1_lower, point.hc1_upper)
                self.assertEqual(point.hc2, max(k, K0))
                if k <= K0:
                    self.assertEqual(point.phase, Phase.PURE if H <= K0 else Phase.NORMAL)
                elif H >= k:
                    self.assertEqual(point.phase, Phase.NORMAL)
                elif K0 < H < k:
                    self.assertEqual(point.phase, Phase.MIXED)
                if point.phase is Phase.UNDETERMINED:
                    self.assertTrue(k > K0 and point.hc1_lower < H <= point.hc1_upper)

    def test_diagram(self):
        rows = diagram_emit((0.3, 2.0), 18, pairs=self.pairs)
        self.assertIn(K0, [row.k for row in rows])
        for row in rows:
            self.assertEqual(row.hc2, max(row.k, K0))
            self.assertLessEqual(row.hc1_lower, row.hc1_upper + 1e-12)
            if row.k == K0:
                self.assertEqual((row.hc1_lower, row.hc1_upper, row.hc2), (K0, K0, K0))
            if row.k < K0:
                self.assertEqual(row.hc1_upper, K0)
        self.assertEqual(diagram_emit((0.3, 2.0), 18, pairs=self.pairs, jobs=4), rows)


class TestConfiguration(unittest.TestCase):
    def test_defaults(self):
        cfg = RunConfig()
        self.assertEqual(cfg.lattice_object(), SQUARE)
        self.assertEqual(cfg.solver_config(), SolverConfig())
        self.assertEqual(cfg.H_grid[0], 0.7)
        self.assertEqual(cfg.H_grid[-4:], (0.05, 0.04, 0.03, 0.02))

    def test_file_then_flags(self):
        with tempfile.NamedTemporaryFile('w', suffix='.cfg', delete=False) as stream:
            stream.write('# run\nlattice = hex\ngrid=32\nH-grid = 0.6, 0.4\nformat=json\n')
            path = stream.name
        try:
            values = load_config_file(path)
        finally:
            os.remove(path)
        cfg = build_run_config(values, {'grid': 48, 'lattice': None})
        self.assertEqual(cfg.lattice, 'hex')
        self.assertEqual(cfg.grid, 48)
        self.assertEqual(cfg.H_grid, (0.6, 0.4))
        self.assertIs(cfg.format, OutputFormat.JSON)
        self.assertEqual(cfg.lattice_object(), HEX)

    def test_rejections(self):
        with self.assertRaises(ConfigurationError):
            build_run_config({'mesh': '64'})
        with self.assertRaises(ConfigurationError):
            build_run_config({'grid': '63'})
        with self.assertRaises(ConfigurationError):
            build_run_config({'H_grid': '0.3, 0.5'})
        with self.assertRaises(ConfigurationError):
            build_run_config({'tol': 'small'})
        with self.assertRaises(ConfigurationError):
            build_run_config({'lattice': 'kagome'}).lattice_object()
        with self.assertRaises(ConfigurationError):
            load_config_file(os.path.join(tempfile.gettempdir(), 'selfdual-missing.cfg'))

    def test_explicit_basis(self):
        cfg = build_run_config({}, {'u': 2.0, 'w': 0.3})
        self.assertEqual(cfg.lattice_object(), make_lattice(2.0, 0.3))

    def test_typing_marker_only_with_stubs(self):
        package = os.path.dirname(os.path.abspath(selfdual.__file__))
        stubs = glob.glob(os.path.join(package, '**', '*.pyi'), recursive=True)
        with open(os.path.join(os.path.dirname(package), 'setup.py'), 'r', encoding='utf8') as f:
            manifest = f.read()
        typed = os.path.exists(os.path.join(package, 'py.typed')) or 'Typing :: Typed' in manifest
        self.assertEqual(typed, bool(stubs))


class TestOutput(unittest.TestCase):
    def test_float_format(self):
        self.assertEqual(format_float(0.1), '1.00000000000e-01')
        self.assertEqual(format_float(K0), '7.07106781187e-01')

    def test_tables(self):
        rows = [(0.5, 0.25, 1), (K0, K0, 2)]
        text = render_table(('k', 'value', 'n'), rows)
        self.assertEqual(text.splitlines()[0], 'k,value,n')
        self.assertEqual(text.splitlines()[1], '5.00000000000e-01,2.50000000000e-01,1')
        self.assertEqual(text, render_table(('k', 'value', 'n'), rows))
        parsed = json.loads(render_table(('k', 'value', 'n'), rows, OutputFormat.JSON))
        self.assertEqual(parsed[1]['k'], float(format_float(K0)))
        self.assertEqual(parsed[0]['n'], 1)

    def test_verification_run(self):
        run = VerificationRun(quiet=True)
        run.expect_below('small', 1e-12, 1e-8)
        self.assertTrue(run.passed)
        run.expect_close('off', 1.1, 1.0, 1e-3)
        self.assertFalse(run.passed)
        report = run.report()
        self.assertEqual([check['name'] for check in report['checks']], ['small', 'off'])
        self.assertFalse(report['checks'][1]['passed'])


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        suppress_warnings(True)

    def _run(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        code = main(list(argv), stdout=stdout, stderr=stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def test_solve(self):
        code, out, _ = self._run('solve', '--lattice', 'square', '--H', '0.3', '--format', 'json', '--out', '-')
        self.assertEqual(code, defaults.EXIT_OK)
        summary = json.loads(out)
        self.assertAlmostEqual(summary['energy']['internal'], 0.167132, delta=1e-6)
        self.assertAlmostEqual(summary['zero']['x'], 0.5, places=9)
        self.assertEqual(summary['zero']['winding'], 1)
        self.assertFalse(summary['degenerate'])

    def test_solve_csv_is_deterministic(self):
        first = self._run('solve', '--H', '0.5', '--out', '-')[1]
        second = self._run('solve', '--H', '0.5', '--out', '-')[1]
        self.assertEqual(first, second)
        self.assertTrue(first.startswith('quantity,value\n'))

    def test_solve_degenerate(self):
        code, out, _ = self._run('solve', '--lattice', 'square', '--H', '0.7071068', '--format', 'json', '--out', '-')
        self.assertEqual(code, defaults.EXIT_OK)
        summary = json.loads(out)
        self.assertTrue(summary['degenerate'])
        self.assertAlmostEqual(summary['energy']['internal'], 0.25, places=12)

    def test_solve_hex_fine_grid(self):
        code, out, _ = self._run('solve', '--lattice', 'hex', '--H', '0.3', '--grid', '128', '--format', 'json',
                                 '--out', '-')
        self.assertEqual(code, defaults.EXIT_OK)
        residuals = json.loads(out)['residuals']
        self.assertLess(residuals['d_plus'], 1e-8)
        self.assertLess(residuals['bogomolny_field'], 1e-8)

    def test_solve_writes_files(self):
        directory = tempfile.mkdtemp()
        path = os.path.join(directory, 'pair.csv')
        code, _, _ = self._run('solve', '--H', '0.4', '--out', path, '--dump-fields')
        self.assertEqual(code, defaults.EXIT_OK)
        self.assertTrue(os.path.exists(path))
        archive = np.load(os.path.join(directory, 'pair.npz'))
        self.assertEqual(archive['u'].shape, (64, 64))

    def test_configuration_errors(self):
        code, _, err = self._run('solve', '--H', '0.3', '--grid', '7')
        self.assertEqual(code, defaults.EXIT_CONFIG)
        self.assertIn('message', json.loads(err.strip().splitlines()[-1]))
        self.assertEqual(self._run('solve', '--H', '0.9', '--out', '-')[0], defaults.EXIT_CONFIG)
        self.assertEqual(self._run('solve', '--out', '-')[0], defaults.EXIT_CONFIG)

    def test_solver_failure(self):
        code, _, err = self._run('solve', '--H', '0.3', '--tol', '1e-30', '--grid', '16', '--out', '-')
        self.assertEqual(code, defaults.EXIT_SOLVER)
        diagnostics = json.loads(err.strip().splitlines()[-1])
        self.assertEqual(diagnostics['error'], 'solver')
        self.assertTrue(diagnostics['residual_history'])

    def test_chi_sweep_single_point(self):
        code, out, _ = self._run('chi-sweep', '--H-grid', '0.3', '--out', '-')
        self.assertEqual(code, defaults.EXIT_OK)
        lines = out.splitlines()
        self.assertEqual(lines[0], 'H_int,chi,curl_energy')
        chi_value = lines[1].split(',')[1]
        self.assertEqual(lines[2], 'S grid_sup={} extrapolated={}'.format(chi_value, chi_value))

    def test_chi_sweep_rows_are_monotone(self):
        code, out, _ = self._run('chi-sweep', '--H-grid', '0.6,0.5,0.4,0.3,0.2,0.1', '--out', '-')
        self.assertEqual(code, defaults.EXIT_OK)
        chis = [float(line.split(',')[1]) for line in out.splitlines()[1:-1]]
        self.assertEqual(len(chis), 6)
        self.assertEqual(chis, sorted(chis))

    def test_phase(self):
        code, out, _ = self._run('phase', '--H-grid', '0.6,0.4,0.2', '--resolution', '8', '--classify', '1.0,0.71',
                                 '--classify', '0.5,0.9', '--out', '-')
        self.assertEqual(code, defaults.EXIT_OK)
        lines = out.splitlines()
        self.assertEqual(lines[0], 'k,hc1_lower,hc1_upper,hc2')
        triple = format_float(K0)
        self.assertIn(','.join([triple] * 4), lines)
        self.assertIn('k,H_ext,phase,hc1_lower,hc1_upper,hc2', lines)
        self.assertTrue(any(',Mixed,' in line and line.startswith(format_float(1.0)) for line in lines))
        self.assertTrue(any(',Normal,' in line and line.startswith(format_float(0.5)) for line in lines))

    def test_verify(self):
        code, out, _ = self._run('verify', '--out', '-', '--quiet')
        report = json.loads(out)
        failed = [check['name'] for check in report['checks'] if not check['passed']]
        self.assertEqual(failed, [])
        self.assertEqual(code, defaults.EXIT_OK)
        checks = {check['name']: check for check in report['checks']}
        self.assertLess(checks['random.bkn_defect']['value'], 1e-8)

    def test_verify_with_injected_fault(self):
        code, out, _ = self._run('verify', '--out', '-', '--inject-fault', '--quiet')
        self.assertEqual(code, defaults.EXIT_VERIFY)
        checks = {check['name']: check for check in json.loads(out)['checks']}
        self.assertTrue(checks['pair[0.3].bkn_defect']['passed'])
        self.assertTrue(checks['random.bkn_defect']['passed'])
        self.assertFalse(checks['pair[0.3].norm_u2']['passed'])

    def test_verify_coarse_grid_warns(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            self._run('verify', '--grid', '16', '--out', '-')
        self.assertTrue(any(issubclass(w.category, RefinementWarning) for w in caught))

    def test_refinement_check_at_the_smallest_field(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            run = verify(SQUARE, SolverConfig(grid_n=16), random_pairs=1, fields=(0.5, 0.3), quiet=True)
        notes = run.report()['warnings']
        self.assertTrue(any('H_int=0.02' in note for note in notes))
        self.assertFalse(any('H_int=0.3 ' in note for note in notes))      # resolved at n=16
        self.assertTrue(any(issubclass(w.category, RefinementWarning) and 'H_int=0.02' in str(w.message)
                            for w in caught))

    def test_quiet_run_restores_warnings(self):
        self.assertEqual(self._run('chi-sweep', '--H-grid', '0.5', '--out', '-', '--quiet')[0], defaults.EXIT_OK)
        self.assertTrue(warnings_enabled())
        self.assertEqual(self._run('solve', '--H', '0.9', '--out', '-', '--quiet')[0], defaults.EXIT_CONFIG)
        self.assertTrue(warnings_enabled())
        suppress_warnings()
        try:
            self._run('chi-sweep', '--H-grid', '0.5', '--out', '-')
            self.assertFalse(warnings_enabled())
        finally:
            suppress_warnings(True)

    def test_output_directory_from_environment(self):
        directory = tempfile.mkdtemp()
        previous = os.environ.get(defaults.OUTPUT_DIR_ENV)
        os.environ[defaults.OUTPUT_DIR_ENV] = directory
        try:
            code, _, _ = self._run('chi-sweep', '--H-grid', '0.5')
        finally:
            if previous is None:
                del os.environ[defaults.OUTPUT_DIR_ENV]
            else:
                os.environ[defaults.OUTPUT_DIR_ENV] = previous
        self.assertEqual(code, defaults.EXIT_OK)
        self.assertTrue(os.path.exists(os.path.join(directory, 'chi.csv')))


def _critical_vortex_ratio(radius=16.0):
    """
    1 - int (1 - g^2)^2 / int (1 - g^2) over the plane, for the isolated degree-one vortex at k = 1/sqrt(2)

    With log g^2 = 2 log r + w the radial profile solves w'' + w'/r = r^2 exp(w) - 1. w(0) is found by
    bisection on shots that either overshoot g = 1 or turn back; both integrals ride along with p = r w'.
    """
    start = 1e-6

    def rhs(r, state):
        w, p = state[0], state[1]
        deficit = 1.0 - r * r * np.exp(w)
        return [p / r, -r * deficit, r * deficit, r * deficit * deficit]

    def overshoots(r, state):
        return 2.0 * math.log(r) + state[0]
    overshoots.terminal, overshoots.direction = True, 1.0

    def turns_back(r, state):
        return 2.0 + state[1]
    turns_back.terminal, turns_back.direction = True, -1.0

    low, high = -10.0, 10.0
    shot = None
    while high - low > 1e-13:
        middle = 0.5 * (low + high)
        initial = [middle - start * start / 4.0, -start * start / 2.0, start * start / 2.0, start * start / 2.0]
        shot = solve_ivp(rhs, (start, radius), initial, method='DOP853', rtol=1e-12, atol=1e-14,
                         events=(overshoots, turns_back))
        if shot.t_events[0].size:
            high = middle
        elif shot.t_events[1].size:
            low = middle
        else:
            break
    _, _, first, second = shot.y[:, -1]
    return 1.0 - second / first


class TestChiSweepAcceptance(unittest.TestCase):
    """Full default sweep with grid escalation; the slowest class of the suite"""

    def test_chi_limit_on_the_square_lattice(self):
        estimate = estimate_S(SQUARE, defaults.DEFAULT_H_GRID, CFG)
        chis = [value for _, value in estimate.chis]
        self.assertEqual(len(chis), len(defaults.DEFAULT_H_GRID))
        for before, after in zip(chis, chis[1:]):
            self.assertGreaterEqual(after, before)
        self.assertAlmostEqual(estimate.extrapolated, _critical_vortex_ratio(), delta=5e-3)
        self.assertLessEqual(estimate.grid_sup, 1.0)

    def test_slope_sandwich_on_the_default_family(self):
        estimate = estimate_S(SQUARE, defaults.DEFAULT_H_GRID, CFG)
        pairs = quasimode_family(SQUARE, defaults.DEFAULT_H_GRID, CFG).pairs
        for check in slope_sandwich(pairs, estimate.grid_sup):
            self.assertTrue(check.passed, check)


if __name__ == '__main__':
    unittest.main()
