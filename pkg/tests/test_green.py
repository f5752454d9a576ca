"""Tests for the Ewald evaluation of the torus Green's function."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import DampedFourierOracle
from torus_vortex.errors import OutOfRange, ParameterError, SingularPoint
from torus_vortex.green import (GreenEvaluator, canonical, green_eval, green_grad, green_reg,
                                wrap, wrap_distance)

# ---------------------------------------------------------------------------
# Frozen reference values (damped Fourier oracle, K = 400, two damping levels)
# ---------------------------------------------------------------------------

ROBIN = 1.3105329259115495
F_CENTER = 0.5 * math.log(2.0)  # oracle gives 0.34657359027998, agrees to 4e-14
F_DIPOLE = 0.12239277505894873  # F((0.4, 0))

coord = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
point = st.tuples(coord, coord).filter(lambda p: np.hypot(*wrap(np.array(p))) > 1e-3)


@pytest.fixture(scope="module")
def oracle():
    return DampedFourierOracle()


class TestWrapping:
    def test_canonical_in_unit_square(self):
        p = canonical(np.array([[1.25, -0.5], [-1e-18, 2.0]]))
        assert np.all(p >= 0.0) and np.all(p < 1.0)

    def test_wrap_is_centred(self):
        w = wrap(np.array([0.7, -0.6]))
        np.testing.assert_allclose(w, [-0.3, 0.4], atol=1e-15)

    def test_wrap_distance_across_seam(self):
        assert wrap_distance(np.array([0.05, 0.5]), np.array([0.95, 0.5])) == pytest.approx(0.1)


class TestGreenValue:
    def test_matches_oracle_at_random_points(self, evaluator, oracle, rng):
        pts = rng.uniform(0.0, 1.0, size=(25, 2))
        for p in pts:
            assert abs(evaluator.value(p) - oracle.value(p)) <= 1e-8, p

    def test_frozen_values(self, evaluator):
        assert evaluator.value([0.5, 0.5]) == pytest.approx(F_CENTER, abs=1e-10)
        assert evaluator.value([0.4, 0.0]) == pytest.approx(F_DIPOLE, abs=1e-12)

    def test_even(self, evaluator, rng):
        p = rng.uniform(-1.0, 1.0, size=(20, 2))
        np.testing.assert_allclose(evaluator.value(p), evaluator.value(-p), atol=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(point, st.integers(-3, 3), st.integers(-3, 3))
    def test_periodic(self, p, mx, my):
        ev = GreenEvaluator()
        p = np.array(p)
        assert ev.value(p + [mx, my]) == pytest.approx(ev.value(p), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(point)
    def test_reflection_symmetry(self, p):
        ev = GreenEvaluator()
        x, y = p
        v = ev.value([x, y])
        for q in ([-x, y], [x, -y], [y, x]):
            assert ev.value(q) == pytest.approx(v, abs=1e-12)

    def test_log_singularity_converges_to_robin(self, evaluator):
        diffs = [evaluator.value([t, 0.0]) - math.log(t) for t in (1e-2, 1e-3, 1e-4)]
        errs = [abs(d - ROBIN) for d in diffs]
        assert errs[0] < 1e-3 and errs[1] < errs[0] and errs[2] < 1e-7

    def test_zero_mean(self, evaluator):
        # midpoint rule on an offset grid; aliasing error is O(n^-2)
        n = 64
        s = (np.arange(n) + 0.5) / n
        x, y = np.meshgrid(s, s, indexing="ij")
        vals = evaluator.value(np.stack([x, y], axis=-1))
        assert abs(vals.mean()) < 5e-4

    def test_laplacian_is_minus_two_pi(self, evaluator):
        # away from the origin Delta F = -2 pi (the background charge)
        h = 1e-3
        for p in ([0.3, 0.2], [0.5, 0.5], [0.1, 0.45]):
            p = np.array(p)
            lap = (evaluator.value(p + [h, 0]) + evaluator.value(p - [h, 0])
                   + evaluator.value(p + [0, h]) + evaluator.value(p - [0, h])
                   - 4.0 * evaluator.value(p)) / h**2
            assert lap == pytest.approx(-2.0 * math.pi, abs=1e-4)

    def test_vectorised_shape(self, evaluator):
        out = evaluator.value(np.full((3, 4, 2), 0.25))
        assert out.shape == (3, 4)

    def test_singular_point(self, evaluator):
        with pytest.raises(SingularPoint):
            evaluator.value([1.0, -2.0])

    def test_module_function_uses_default(self):
        assert green_eval([0.4, 0.0]) == pytest.approx(F_DIPOLE, abs=1e-12)


class TestGreenGradient:
    def test_vanishes_at_half_lattice_point(self, evaluator):
        np.testing.assert_allclose(evaluator.grad([0.5, 0.5]), 0.0, atol=1e-13)

    def test_odd(self, evaluator, rng):
        p = rng.uniform(-1.0, 1.0, size=(20, 2))
        np.testing.assert_allclose(evaluator.grad(-p), -evaluator.grad(p), atol=1e-12)

    def test_matches_finite_differences(self, evaluator, rng):
        h = 1e-5
        for p in rng.uniform(0.05, 0.95, size=(20, 2)):
            fd = [(evaluator.value(p + e) - evaluator.value(p - e)) / (2 * h)
                  for e in (np.array([h, 0.0]), np.array([0.0, h]))]
            np.testing.assert_allclose(evaluator.grad(p), fd, atol=1e-6)

    def test_singular_point(self):
        with pytest.raises(SingularPoint):
            green_grad([0.0, 0.0])


class TestRegularPart:
    def test_value_at_origin_is_robin(self, evaluator, oracle):
        val, grad = evaluator.regular(np.zeros(2))
        assert val == pytest.approx(ROBIN, abs=1e-12)
        for est in oracle.robin():
            assert val == pytest.approx(est, abs=1e-8)
        np.testing.assert_allclose(grad, 0.0, atol=1e-14)
        assert evaluator.robin_constant() == pytest.approx(ROBIN, abs=1e-12)

    def test_decomposition(self, evaluator, rng):
        for r in np.geomspace(1e-3, 0.4, 15):
            th = rng.uniform(0, 2 * math.pi)
            p = r * np.array([math.cos(th), math.sin(th)])
            reg, g = green_reg(p, evaluator)
            assert reg + math.log(r) == pytest.approx(evaluator.value(p), abs=1e-10)
            np.testing.assert_allclose(g + p / r**2, evaluator.grad(p), atol=1e-9)

    def test_regular_grad_matches_regular(self, evaluator, rng):
        p = rng.uniform(-0.3, 0.3, size=(10, 2))
        np.testing.assert_allclose(evaluator.regular_grad(p), evaluator.regular(p)[1], atol=1e-13)

    def test_out_of_range(self, evaluator):
        with pytest.raises(OutOfRange):
            evaluator.regular([0.5, 0.1])
        with pytest.raises(OutOfRange):
            evaluator.regular_grad([0.4, 0.4])


class TestCutoffs:
    def test_automatic_cutoffs_meet_target(self):
        ev = GreenEvaluator(target_abs_error=1e-12)
        assert ev.error_bound <= 1e-12

    def test_other_splitting_agrees(self, evaluator, rng):
        ev = GreenEvaluator(splitting=0.05)
        p = rng.uniform(0, 1, size=(10, 2))
        np.testing.assert_allclose(ev.value(p), evaluator.value(p), atol=1e-10)

    def test_explicit_cutoffs_too_small(self):
        with pytest.raises(ParameterError):
            GreenEvaluator(fourier_cutoff=1, realspace_cutoff=1)

    def test_bad_parameters(self):
        with pytest.raises(ParameterError):
            GreenEvaluator(splitting=-1.0)
        with pytest.raises(ParameterError):
            GreenEvaluator(target_abs_error=0.0)
