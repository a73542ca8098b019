"""
Unit tests for the verify module
"""

import math
import unittest

import numpy as np
import pytest

from errors import BoundInapplicableError, DimensionError, DomainError, UsageError
from exponents import INF, SubsetMode
from norms import NormConfig, NormMethod, NormResult
from tensor import (
    CoeffTensor,
    Distribution,
    Field,
    basis_tensor,
    littlewood_matrix,
    lp_coeff_norm,
    random_tensor,
    zeros,
)
from verify import (
    BoundChoice,
    EnsembleSpec,
    Verdict,
    batch_verify,
    hl_lhs,
    judge,
    rademacher_moment,
    select_constant,
    verify_induction_step,
    verify_inequality,
    verify_khinchine_step,
)


# Exponent patterns and shapes of the theorem sweep
SWEEP_CONFIGURATIONS = [
    ((8, 8, 2), (3, 3, 3)),
    ((3, 4, INF), (3, 3, 3)),
    ((4, 4, 4), (3, 3, 3)),
    ((INF, INF), (4, 4)),
]


def _norm(value: float, certified: bool) -> NormResult:
    return NormResult(value, (), NormMethod.VERTEX_EXACT if certified else NormMethod.ALTERNATING,
                      certified_exact=certified)


class TestJudge(unittest.TestCase):
    """Test cases for the three-valued verdict"""

    def test_holds_within_tolerance(self):
        """Test that slack down to -1e-9 * max(1, lhs) still holds"""
        self.assertIs(judge(1.0 + 5e-10, 1.0, _norm(1.0, True)), Verdict.HOLDS)
        self.assertIs(judge(1000.0 + 5e-7, 1.0, _norm(1000.0, True)), Verdict.HOLDS)

    def test_violation_needs_certified_norm(self):
        """Test INCONCLUSIVE versus CERTIFIED_VIOLATION"""
        self.assertIs(judge(2.0, 1.0, _norm(1.0, False)), Verdict.INCONCLUSIVE)
        self.assertIs(judge(2.0, 1.0, _norm(1.0, True)), Verdict.CERTIFIED_VIOLATION)


class TestHlLhs(unittest.TestCase):
    """Test cases for hl_lhs"""

    def test_examples(self):
        """Test Littlewood, basis and zero tensors"""
        lhs, rho = hl_lhs(littlewood_matrix(), (INF, INF))
        self.assertAlmostEqual(lhs, 4 ** 0.75, places=12)
        self.assertAlmostEqual(rho, 4 / 3, places=14)

        lhs, rho = hl_lhs(basis_tensor((2, 2, 2), (0, 0, 0)), (8, 8, 2))
        self.assertEqual(lhs, 1.0)
        self.assertAlmostEqual(rho, 4.0, places=14)

        lhs, rho = hl_lhs(zeros((3, 3)), (INF, INF))
        self.assertEqual(lhs, 0.0)

    def test_invalid_regime(self):
        """Test that |1/p| >= 1 is rejected"""
        with self.assertRaises(DomainError):
            hl_lhs(littlewood_matrix(), (2, 2))

    def test_order_mismatch(self):
        """Test tensor order against exponent count"""
        with self.assertRaises(DimensionError):
            hl_lhs(littlewood_matrix(), (INF, INF, INF))

    def test_between_sup_and_l1(self):
        """Test max |a_J| <= hl_lhs <= lp_coeff_norm(T, 1)"""
        for seed in range(20):
            T = random_tensor((3, 2, 4), Field.COMPLEX, Distribution.GAUSSIAN, seed=seed)
            lhs, _ = hl_lhs(T, (3, 5, INF))
            self.assertGreaterEqual(lhs + 1e-12, float(np.max(np.abs(T.coeffs))))
            self.assertLessEqual(lhs, lp_coeff_norm(T, 1) + 1e-12)


class TestSelectConstant(unittest.TestCase):
    """Test cases for select_constant"""

    def test_rules(self):
        """Test each bound rule at p=(3,4,inf)"""
        self.assertEqual(select_constant((3, 4, INF), BoundChoice.CLASSICAL), (2.0, "CLASSICAL"))
        value, source = select_constant((3, 4, INF), BoundChoice.MAIN)
        self.assertAlmostEqual(value, 2 ** (5 / 12), places=12)
        self.assertEqual(source, "MAIN_THEOREM")
        value, source = select_constant((3, 4, INF), "best")
        self.assertAlmostEqual(value, 2 ** (5 / 12), places=12)
        self.assertEqual(source, "MAIN_THEOREM")

    def test_bh_range(self):
        """Test that only the classical bound applies below 1/2"""
        self.assertEqual(select_constant((INF, INF), BoundChoice.BEST), (math.sqrt(2), "CLASSICAL"))
        with self.assertRaises(BoundInapplicableError):
            select_constant((INF, INF), BoundChoice.UNIVERSAL)
        with self.assertRaises(BoundInapplicableError):
            select_constant((INF, INF), BoundChoice.MAIN)

    def test_main_falls_back_to_universal(self):
        """Test MAIN without a distinct-valued subset"""
        with self.assertLogs("verify", level="WARNING"):
            value, source = select_constant((4, 4, 4), BoundChoice.MAIN, SubsetMode.DISTINCT_VALUES)
        self.assertAlmostEqual(value, math.sqrt(2), places=12)
        self.assertEqual(source, "UNIVERSAL")

    def test_invalid(self):
        """Test |1/p| >= 1"""
        with self.assertRaises(DomainError):
            select_constant((2, 2), BoundChoice.CLASSICAL)


class TestVerifyInequality(unittest.TestCase):
    """Test cases for verify_inequality"""

    def test_littlewood_equality(self):
        """Test the classical bound is attained by the Littlewood matrix"""
        record = verify_inequality(littlewood_matrix(), (INF, INF), BoundChoice.CLASSICAL)
        self.assertAlmostEqual(record.lhs, 2 * math.sqrt(2), places=12)
        self.assertEqual(record.norm.value, 2.0)
        self.assertTrue(record.norm_certified)
        self.assertIs(record.verdict, Verdict.HOLDS)
        self.assertLess(abs(record.slack), 1e-9)
        self.assertLess(abs(record.ratio - math.sqrt(2)), 1e-9)

    def test_constant_one_attained(self):
        """Test e1 x e1 x e1 at p=(8,8,2) against the main-theorem constant 1"""
        record = verify_inequality(basis_tensor((2, 2, 2), (0, 0, 0)), (8, 8, 2), BoundChoice.MAIN)
        self.assertEqual(record.constant, 1.0)
        self.assertEqual(record.lhs, 1.0)
        self.assertAlmostEqual(record.norm.value, 1.0, places=14)
        self.assertTrue(record.holds)

    def test_zero_tensor(self):
        """Test that the zero tensor holds with ratio None"""
        record = verify_inequality(zeros((2, 2)), (INF, INF))
        self.assertTrue(record.holds)
        self.assertIsNone(record.ratio)

    def test_record_fields(self):
        """Test the serialized field names"""
        record = verify_inequality(littlewood_matrix(), (INF, INF), seed=3, tensor_id="littlewood")
        self.assertEqual(
            sorted(record.to_dict()),
            sorted(["lhs", "rho", "norm", "norm_method", "certified", "constant", "bound_source",
                    "ratio", "verdict", "slack", "seed", "tensor_id"]),
        )
        self.assertEqual(record.to_dict()["verdict"], "HOLDS")
        self.assertEqual(record.to_dict()["tensor_id"], "littlewood")

    def test_ratio_scale_invariance(self):
        """Test ratio(alpha T) = ratio(T)"""
        T = random_tensor((3, 3, 3), Field.REAL, Distribution.GAUSSIAN, seed=5)
        base = verify_inequality(T, (3, 4, INF)).ratio
        for alpha in (0.25, -2.0, 1024.0):
            scaled = verify_inequality(T.scaled(alpha), (3, 4, INF)).ratio
            self.assertLess(abs(scaled - base), 1e-12 * base)

    def test_gaussian_batch_main(self):
        """Test Gaussian 4x4x4 tensors at p=(8,8,2) with 32 starts hold under MAIN"""
        summary = batch_verify(
            EnsembleSpec(Distribution.GAUSSIAN, (4, 4, 4), count=20, seed=0),
            (8, 8, 2),
            BoundChoice.MAIN,
            NormConfig(starts=32),
        )
        self.assertEqual(summary.holds, 20)
        self.assertEqual(summary.inconclusive, 0)


class TestBatchVerify(unittest.TestCase):
    """Test cases for batch_verify"""

    def test_count_zero(self):
        """Test that an empty ensemble is rejected"""
        with self.assertRaises(UsageError):
            batch_verify(EnsembleSpec(count=0), (3, 4, INF))

    def test_dims_mismatch(self):
        """Test ensemble dims against m"""
        with self.assertRaises(DimensionError):
            batch_verify(EnsembleSpec(dims=(2, 2)), (3, 4, INF))

    def test_real_bilinear_signs(self):
        """Test 256 sign matrices against the classical bound sqrt 2"""
        summary = batch_verify(
            EnsembleSpec(Distribution.SIGNS, (2, 2), count=256, seed=0),
            (INF, INF),
            BoundChoice.CLASSICAL,
        )
        self.assertEqual(summary.holds, 256)
        self.assertEqual(summary.violations, 0)
        self.assertLessEqual(summary.max_ratio, math.sqrt(2) + 1e-9)
        self.assertAlmostEqual(summary.max_ratio, math.sqrt(2), places=9)
        self.assertTrue(all(r.norm_certified for r in summary.records))

    def test_gaussian_main(self):
        """Test Gaussian 3x3x3 tensors at p=(3,4,inf) under the constant 2^{5/12}"""
        summary = batch_verify(
            EnsembleSpec(Distribution.GAUSSIAN, (3, 3, 3), count=50, seed=0),
            (3, 4, INF),
            BoundChoice.MAIN,
        )
        self.assertEqual(summary.holds, 50)
        self.assertAlmostEqual(summary.constant, 2 ** (5 / 12), places=12)
        self.assertEqual(summary.bound_source, "MAIN_THEOREM")

    def test_deterministic(self):
        """Test that threads and reruns do not change the summary"""
        spec = EnsembleSpec(Distribution.SIGNS, (3, 3), count=12, seed=7)
        first = batch_verify(spec, (INF, 4), threads=1, norm_cfg=NormConfig(starts=4))
        second = batch_verify(spec, (INF, 4), threads=3, norm_cfg=NormConfig(starts=4))
        self.assertEqual(first.to_dict(), second.to_dict())
        self.assertEqual([r.to_dict() for r in first.records], [r.to_dict() for r in second.records])

    def test_argmax_id(self):
        """Test that the argmax id names the record with the largest ratio"""
        spec = EnsembleSpec(Distribution.GAUSSIAN, (2, 3), count=10, seed=1)
        summary = batch_verify(spec, (INF, INF))
        best = max(summary.records, key=lambda r: r.ratio)
        self.assertEqual(summary.argmax_id, best.tensor_id)
        self.assertEqual(summary.max_ratio, best.ratio)
        self.assertTrue(summary.argmax_id.startswith("gaussian-1-"))

    def test_sweep_no_certified_violation(self):
        """Test bound_best on sign and Gaussian ensembles for several exponent patterns"""
        for p, dims in SWEEP_CONFIGURATIONS:
            for dist in Distribution:
                summary = batch_verify(
                    EnsembleSpec(dist, dims, count=10, seed=0), p, BoundChoice.BEST, NormConfig(starts=8)
                )
                self.assertEqual(summary.violations, 0, f"{p} {dist}")
                for record in summary.records:
                    if record.norm_certified:
                        self.assertTrue(record.holds, f"{p} {record.tensor_id}")

    @pytest.mark.slow
    def test_full_sweep_no_certified_violation(self):
        """Test bound_best on 200 sign and 200 Gaussian tensors for every exponent pattern"""
        for p, dims in SWEEP_CONFIGURATIONS:
            for dist in Distribution:
                summary = batch_verify(EnsembleSpec(dist, dims, count=200, seed=0), p, BoundChoice.BEST,
                                       NormConfig(starts=16), threads=4)
                self.assertEqual(summary.count, 200)
                self.assertEqual(summary.violations, 0, f"{p} {dist}")
                for record in summary.records:
                    if record.norm_certified:
                        self.assertIs(record.verdict, Verdict.HOLDS, f"{p} {record.tensor_id}")


class TestKhinchineStep(unittest.TestCase):
    """Test cases for verify_khinchine_step"""

    def test_identity_equality(self):
        """Test equality sqrt(n) = sqrt(n) for the identity at s=1, p_1=2"""
        for n in range(2, 9):
            record = verify_khinchine_step(CoeffTensor(np.eye(n)), (2,))
            self.assertAlmostEqual(record.lhs, math.sqrt(n), places=12)
            self.assertLess(abs(record.norm.value - math.sqrt(n)), 1e-9)
            self.assertEqual(record.constant, 1.0)
            self.assertIs(record.verdict, Verdict.HOLDS)
            self.assertEqual(record.bound_source, "KHINCHINE_STEP")

    def test_zero_tensor(self):
        """Test 0 <= 0"""
        record = verify_khinchine_step(zeros((3, 3, 3)), (4, 4))
        self.assertEqual(record.lhs, 0.0)
        self.assertTrue(record.holds)

    def test_random_two_slot(self):
        """Test 50 sign tensors at s=2, p=(4,4), dims (3,3,3)"""
        for seed in range(50):
            T = random_tensor((3, 3, 3), Field.REAL, Distribution.SIGNS, seed=seed)
            record = verify_khinchine_step(T, (4, 4))
            self.assertAlmostEqual(record.constant, math.sqrt(2), places=12)
            self.assertIs(record.verdict, Verdict.HOLDS, f"seed {seed}")

    def test_dominates_isotropic_lhs(self):
        """Test the mixed l_2 inner norm dominates hl_lhs at the combined exponent"""
        for seed in range(10):
            T = random_tensor((3, 2, 4), Field.REAL, Distribution.GAUSSIAN, seed=seed)
            record = verify_khinchine_step(T, (3, 4))
            lhs, rho = hl_lhs(T, (3, 4, INF))
            self.assertAlmostEqual(record.rho, rho, places=12)
            self.assertGreaterEqual(record.lhs + 1e-12, lhs)

    def test_regime_violation(self):
        """Test |1/p|_(<=s) outside [1/2, 1)"""
        with self.assertRaises(DomainError):
            verify_khinchine_step(littlewood_matrix(), (4,))
        with self.assertRaises(DimensionError):
            verify_khinchine_step(littlewood_matrix(), (4, 4))


class TestInductionStep(unittest.TestCase):
    """Test cases for verify_induction_step"""

    def test_random_holds(self):
        """Test p=(4,4,4) with constant 2^{1/2}"""
        for seed in range(10):
            T = random_tensor((3, 3, 3), Field.REAL, Distribution.GAUSSIAN, seed=seed)
            record = verify_induction_step(T, (4, 4, 4))
            self.assertAlmostEqual(record.rho, 4.0, places=12)
            self.assertAlmostEqual(record.constant, math.sqrt(2), places=12)
            self.assertIs(record.verdict, Verdict.HOLDS)

    def test_regime(self):
        """Test head and total reciprocal sums"""
        with self.assertRaises(DomainError):
            verify_induction_step(zeros((2, 2, 2)), (8, 8, 8))
        with self.assertRaises(DomainError):
            verify_induction_step(zeros((2, 2, 2)), (2, 2, 4))


class TestRademacherMoment(unittest.TestCase):
    """Test cases for rademacher_moment"""

    def test_second_moment_is_l2(self):
        """Test that the second moment equals the l_2 norm"""
        self.assertAlmostEqual(rademacher_moment([1.0, 1.0], 2), math.sqrt(2), places=14)
        a = np.random.default_rng(0).standard_normal(8)
        self.assertAlmostEqual(rademacher_moment(a, 2), float(np.linalg.norm(a)), places=12)

    def test_higher_moments_dominate_l2(self):
        """Test A_q = 1 for q >= 2"""
        rng = np.random.default_rng(1)
        for q in (2.5, 3, 4, 6):
            a = rng.standard_normal(10)
            self.assertGreaterEqual(rademacher_moment(a, q) + 1e-12, float(np.linalg.norm(a)))

    def test_zero_vector(self):
        """Test the zero vector"""
        self.assertEqual(rademacher_moment([0.0, 0.0], 4), 0.0)

    def test_errors(self):
        """Test empty input, too many terms and bad order"""
        with self.assertRaises(DimensionError):
            rademacher_moment([], 2)
        with self.assertRaises(UsageError):
            rademacher_moment(np.ones(21), 2)
        with self.assertRaises(DomainError):
            rademacher_moment([1.0], 0)


if __name__ == "__main__":
    unittest.main()
