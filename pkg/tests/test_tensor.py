"""
Unit tests for the tensor module
"""

import math
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from errors import DimensionError, UsageError
from tensor import (
    CoeffTensor,
    Distribution,
    Field,
    basis_tensor,
    contract_except,
    contract_last,
    evaluate,
    littlewood_matrix,
    lp_coeff_norm,
    mixed_norm,
    random_tensor,
    rank_one,
    scalar,
    stream_rng,
    tensor_product,
    zeros,
)


class TestCoeffTensor(unittest.TestCase):
    """Test cases for CoeffTensor construction"""

    def test_immutable(self):
        """Test that coefficients are copied and read-only"""
        source = np.eye(2)
        T = CoeffTensor(source)
        source[0, 0] = 5.0
        self.assertEqual(T.coeffs[0, 0], 1.0)
        with self.assertRaises(ValueError):
            T.coeffs[0, 0] = 2.0

    def test_real_field_rejects_imaginary_parts(self):
        """Test that REAL tensors must have zero imaginary parts"""
        with self.assertRaises(UsageError):
            CoeffTensor(np.array([1 + 1j, 2]), Field.REAL)
        T = CoeffTensor(np.array([1 + 0j, 2]), Field.REAL)
        self.assertEqual(T.coeffs.dtype, np.float64)

    def test_from_array_infers_field(self):
        """Test field inference from dtype"""
        self.assertIs(CoeffTensor.from_array([1.0, 2.0]).field, Field.REAL)
        self.assertIs(CoeffTensor.from_array([1j, 2.0]).field, Field.COMPLEX)

    def test_shape_properties(self):
        """Test m, dims and size"""
        T = zeros((2, 3, 4))
        self.assertEqual(T.m, 3)
        self.assertEqual(T.dims, (2, 3, 4))
        self.assertEqual(T.size, 24)
        self.assertTrue(T.is_zero())

    def test_empty_mode_rejected(self):
        """Test that a mode of size 0 is rejected"""
        with self.assertRaises(DimensionError):
            CoeffTensor(np.zeros((2, 0)))

    def test_padded(self):
        """Test zero padding keeps the original block"""
        T = littlewood_matrix().padded((4, 3))
        self.assertEqual(T.dims, (4, 3))
        assert_array_equal(T.coeffs[:2, :2], littlewood_matrix().coeffs)
        self.assertEqual(np.count_nonzero(T.coeffs), 4)
        with self.assertRaises(DimensionError):
            T.padded((2, 2))


class TestEvaluate(unittest.TestCase):
    """Test cases for evaluate and contractions"""

    def test_identity_at_basis(self):
        """Test the identity matrix at (e1, e1)"""
        self.assertEqual(evaluate(CoeffTensor(np.eye(2)), [1, 0], [1, 0]), 1.0)

    def test_littlewood(self):
        """Test x1y1 + x1y2 + x2y1 - x2y2 at (1,1), (1,-1)"""
        self.assertEqual(evaluate(littlewood_matrix(), [1, 1], [1, -1]), 2.0)

    def test_zero_tensor(self):
        """Test that the zero tensor evaluates to 0"""
        self.assertEqual(evaluate(zeros((3, 3)), [1, 2, 3], [4, 5, 6]), 0.0)

    def test_basis_vectors_recover_coefficients(self):
        """Test T(e_j1, ..., e_jm) = a_J"""
        T = random_tensor((2, 3, 2), Field.REAL, Distribution.GAUSSIAN, seed=3)
        for index in np.ndindex(*T.dims):
            xs = [np.eye(n)[j] for n, j in zip(T.dims, index)]
            self.assertEqual(evaluate(T, *xs), T.coeffs[index])

    def test_multilinear(self):
        """Test linearity in the middle slot"""
        rng = np.random.default_rng(5)
        T = random_tensor((3, 4, 2), Field.COMPLEX, Distribution.GAUSSIAN, seed=5)
        x = rng.standard_normal(3)
        y1, y2 = rng.standard_normal(4), rng.standard_normal(4)
        z = rng.standard_normal(2)
        alpha, beta = 1.5 - 0.5j, -2.0
        left = evaluate(T, x, alpha * y1 + beta * y2, z)
        right = alpha * evaluate(T, x, y1, z) + beta * evaluate(T, x, y2, z)
        self.assertLess(abs(left - right), 1e-12 * max(1.0, abs(left)))

    def test_dimension_mismatch(self):
        """Test wrong vector lengths and counts"""
        with self.assertRaises(DimensionError):
            evaluate(CoeffTensor(np.eye(2)), [1, 0, 0], [1, 0])
        with self.assertRaises(DimensionError):
            evaluate(CoeffTensor(np.eye(2)), [1, 0])

    def test_contract_last(self):
        """Test the contraction examples"""
        assert_array_equal(contract_last(CoeffTensor(np.eye(2)), [0, 1]).coeffs, [0.0, 1.0])
        assert_array_equal(contract_last(littlewood_matrix(), [1, 1]).coeffs, [2.0, 0.0])
        self.assertTrue(contract_last(littlewood_matrix(), [0, 0]).is_zero())

    def test_contraction_commutes_with_evaluation(self):
        """Test evaluate(contract_last(T, z), x, y) = evaluate(T, x, y, z)"""
        T = random_tensor((2, 3, 4), Field.REAL, Distribution.GAUSSIAN, seed=9)
        x, y, z = np.ones(2), np.arange(3.0), np.linspace(-1, 1, 4)
        self.assertAlmostEqual(evaluate(contract_last(T, z), x, y), evaluate(T, x, y, z), places=12)

    def test_contract_except(self):
        """Test that the kept slot pairs back to the full evaluation"""
        T = random_tensor((2, 3, 4), Field.REAL, Distribution.GAUSSIAN, seed=1)
        xs = [np.ones(2), np.arange(1.0, 4.0), np.linspace(0, 1, 4)]
        for keep in range(3):
            c = contract_except(T.coeffs, xs, keep)
            self.assertEqual(c.shape, (T.dims[keep],))
            self.assertAlmostEqual(float(c @ xs[keep]), evaluate(T, *xs), places=12)


class TestNorms(unittest.TestCase):
    """Test cases for coefficient norms"""

    def test_lp_examples(self):
        """Test the isotropic coefficient norm examples"""
        self.assertAlmostEqual(lp_coeff_norm(littlewood_matrix(), 4 / 3), 4 ** 0.75, places=12)
        self.assertAlmostEqual(lp_coeff_norm(CoeffTensor(np.array([3.0, 4.0])), 2), 5.0, places=14)
        for rho in (1, 1.5, 2, 7, math.inf):
            self.assertAlmostEqual(lp_coeff_norm(CoeffTensor(np.array([[-2.0]])), rho), 2.0, places=14)

    def test_lp_rejects_small_rho(self):
        """Test rho < 1"""
        with self.assertRaises(UsageError):
            lp_coeff_norm(littlewood_matrix(), 0.5)

    def test_lp_monotone(self):
        """Test that the coefficient norm does not increase with rho"""
        T = random_tensor((3, 3, 3), Field.REAL, Distribution.GAUSSIAN, seed=2)
        values = [lp_coeff_norm(T, rho) for rho in (1, 4 / 3, 2, 3, 4, 10)]
        for a, b in zip(values, values[1:]):
            self.assertGreaterEqual(a + 1e-12, b)

    def test_mixed_examples(self):
        """Test the nested norm examples"""
        self.assertAlmostEqual(mixed_norm(CoeffTensor(np.ones((2, 2))), (1, 2)), 2 * math.sqrt(2), places=14)
        self.assertAlmostEqual(mixed_norm(CoeffTensor(np.eye(2)), (2, 1)), math.sqrt(2), places=14)

    def test_mixed_collapses_to_isotropic(self):
        """Test equal exponents on 100 random tensors"""
        for seed in range(100):
            T = random_tensor((2, 3, 2), Field.COMPLEX, Distribution.GAUSSIAN, seed=seed)
            rho = 1 + (seed % 7) * 0.5
            expected = lp_coeff_norm(T, rho)
            self.assertLess(abs(mixed_norm(T, (rho,) * 3) - expected), 1e-12 * expected)

    def test_mixed_length_mismatch(self):
        """Test that exponent count must equal m"""
        with self.assertRaises(DimensionError):
            mixed_norm(littlewood_matrix(), (2,))


class TestRandomTensor(unittest.TestCase):
    """Test cases for random ensembles"""

    def test_signs_are_unimodular(self):
        """Test |a_J| = 1 in both fields"""
        for field in Field:
            T = random_tensor((3, 3), field, Distribution.SIGNS, seed=4)
            assert_allclose(np.abs(T.coeffs), 1.0, rtol=0, atol=1e-15)
        real = random_tensor((4, 4), Field.REAL, Distribution.SIGNS, seed=4)
        self.assertTrue(set(np.unique(real.coeffs)) <= {-1.0, 1.0})

    def test_deterministic(self):
        """Test that the same seed and stream give identical tensors"""
        a = random_tensor((3, 3, 3), Field.COMPLEX, Distribution.GAUSSIAN, seed=42, stream=(1, 2))
        b = random_tensor((3, 3, 3), Field.COMPLEX, Distribution.GAUSSIAN, seed=42, stream=(1, 2))
        c = random_tensor((3, 3, 3), Field.COMPLEX, Distribution.GAUSSIAN, seed=42, stream=(1, 3))
        self.assertTrue(a.same_as(b))
        self.assertFalse(a.same_as(c))

    def test_gaussian_mean(self):
        """Test the sample mean of 10^4 entries is within 5 standard errors of 0"""
        T = random_tensor((100, 100), Field.REAL, Distribution.GAUSSIAN, seed=0)
        self.assertLess(abs(float(np.mean(T.coeffs))), 5 / math.sqrt(T.size))

    def test_empty_dims(self):
        """Test that dims must not be empty"""
        with self.assertRaises(DimensionError):
            random_tensor((), Field.REAL, Distribution.SIGNS)

    def test_stream_rng_rejects_negative_seed(self):
        """Test the seed range"""
        with self.assertRaises(UsageError):
            stream_rng(-1)


class TestTensorProduct(unittest.TestCase):
    """Test cases for tensor_product"""

    def test_scalar_identity(self):
        """Test T x 1 = T"""
        T = littlewood_matrix()
        self.assertTrue(tensor_product(T, scalar(1.0)).same_as(T))

    def test_littlewood_square(self):
        """Test l_1 multiplicativity 4 * 4 = 16"""
        square = tensor_product(littlewood_matrix(), littlewood_matrix())
        self.assertEqual(square.m, 4)
        self.assertEqual(lp_coeff_norm(square, 1), 16.0)

    def test_outer_product(self):
        """Test that two vectors give their outer product"""
        a, b = CoeffTensor(np.array([1.0, 2.0])), CoeffTensor(np.array([3.0, 4.0, 5.0]))
        assert_array_equal(tensor_product(a, b).coeffs, np.outer([1, 2], [3, 4, 5]))
        assert_array_equal(rank_one([[1, 2], [3, 4, 5]]).coeffs, np.outer([1, 2], [3, 4, 5]))

    def test_multiplicative_norms(self):
        """Test lp_coeff_norm(T1 x T2) = product of norms"""
        T1 = random_tensor((2, 3), Field.REAL, Distribution.GAUSSIAN, seed=1)
        T2 = random_tensor((3,), Field.REAL, Distribution.GAUSSIAN, seed=2)
        for rho in (1, 4 / 3, 2, 3.5):
            expected = lp_coeff_norm(T1, rho) * lp_coeff_norm(T2, rho)
            self.assertLess(abs(lp_coeff_norm(tensor_product(T1, T2), rho) - expected), 1e-12 * expected)

    def test_field_mismatch(self):
        """Test that REAL x COMPLEX needs promotion"""
        real = littlewood_matrix()
        complex_ = CoeffTensor(np.array([1j, 1.0]), Field.COMPLEX)
        with self.assertRaises(UsageError):
            tensor_product(real, complex_)
        self.assertIs(tensor_product(real, complex_, promote=True).field, Field.COMPLEX)

    def test_basis_tensor(self):
        """Test e_1 x e_1 x e_1"""
        T = basis_tensor((2, 2, 2), (0, 0, 0))
        self.assertEqual(lp_coeff_norm(T, 1), 1.0)
        self.assertEqual(T.coeffs[0, 0, 0], 1.0)


if __name__ == "__main__":
    unittest.main()
