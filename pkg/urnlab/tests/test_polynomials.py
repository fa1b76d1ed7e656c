from fractions import Fraction
from unittest import TestCase

from urnlab import exceptions
from urnlab._arith import EXACT, FLOAT
from urnlab.polynomials import (
    MultiIndex,
    UPolynomial,
    basis_upto,
    evaluate,
    linear_form,
    monomials,
    order_less,
    phi_apply,
    phi_matrix,
    phi_shifted,
)
from urnlab.tests._fixtures import (
    CIRCULANT,
    CRITICAL,
    JORDAN,
    NEGATIVE,
    STRICTLY_SMALL,
    decomposition,
)


def u(*powers, coefficient=1, arithmetic=EXACT):
    return UPolynomial.monomial(powers, arithmetic, coefficient)


def transition(f, x, dec):
    """
    The transition operator straight from its definition at one point.
    """
    total = 0
    here = evaluate(f, x, dec)
    for k, row in enumerate(dec.urn.R):
        moved = [a + b for a, b in zip(x, row)]
        total += x[k] * (evaluate(f, moved, dec) - here)
    return total


class TestOrder(TestCase):
    def test_degree_first(self):
        self.assertTrue(order_less((0, 1), (2, 0)))
        self.assertFalse(order_less((2, 0), (0, 1)))

    def test_last_differing_position(self):
        self.assertTrue(order_less((1, 0), (0, 1)))
        self.assertTrue(order_less((2, 0), (1, 1)))
        self.assertTrue(order_less((1, 1), (0, 2)))

    def test_irreflexive(self):
        self.assertFalse(order_less((1, 1), (1, 1)))

    def test_monomials(self):
        self.assertEqual(
            monomials(2, 2),
            [MultiIndex((2, 0)), MultiIndex((1, 1)), MultiIndex((0, 2))],
        )

    def test_monomials_of_degree_zero(self):
        self.assertEqual(monomials(3, 0), [MultiIndex((0, 0, 0))])


class TestBasisUpto(TestCase):
    def test_includes_alpha(self):
        self.assertEqual(
            basis_upto((1, 1)),
            [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)],
        )

    def test_zero(self):
        self.assertEqual(basis_upto((0, 0, 0)), [(0, 0, 0)])

    def test_sorted(self):
        basis = basis_upto((0, 1, 2))
        self.assertEqual(basis, sorted(basis, key=MultiIndex.key))
        self.assertEqual(basis[-1], (0, 1, 2))

    def test_over_budget(self):
        with self.assertRaises(exceptions.BudgetExceeded) as e:
            basis_upto((13, 0))
        self.assertEqual(e.exception.requested, 13)

    def test_raised_budget(self):
        self.assertEqual(len(basis_upto((13,), budget=13)), 14)


class TestMultiIndex(TestCase):
    def test_delta(self):
        self.assertEqual(MultiIndex.delta(3, 1, 2), (0, 2, 0))

    def test_arithmetic(self):
        alpha = MultiIndex((1, 2))
        self.assertEqual(alpha.plus((1, 0)), (2, 2))
        self.assertEqual(alpha.minus((0, 3)), (1, -1))
        self.assertFalse(alpha.minus((0, 3)).nonnegative)
        self.assertEqual(alpha.times(3), (3, 6))

    def test_inner(self):
        dec = decomposition(STRICTLY_SMALL)
        self.assertEqual(MultiIndex((2, 3)).inner(dec), 3)

    def test_support(self):
        self.assertEqual(MultiIndex((0, 2, 0, 1)).support, {1, 3})

    def test_critical(self):
        dec = decomposition(CRITICAL)
        self.assertTrue(MultiIndex((0, 2)).is_strictly_critical(dec))
        self.assertTrue(MultiIndex((1, 2)).is_critical(dec))
        self.assertFalse(MultiIndex((1, 2)).is_strictly_critical(dec))
        self.assertFalse(MultiIndex((0, 1)).is_strictly_small(dec))
        self.assertTrue(MultiIndex((0, 1)).is_small(dec))

    def test_monogenic(self):
        dec = decomposition(JORDAN)
        self.assertTrue(MultiIndex((0, 1, 1, 0)).is_monogenic(dec))
        self.assertFalse(MultiIndex((0, 1, 0, 1)).is_monogenic(dec))
        self.assertFalse(MultiIndex((2, 0, 0, 0)).is_monogenic(dec))
        self.assertTrue(MultiIndex((2, 0, 0, 0)).is_quasi_monogenic(dec))
        self.assertTrue(MultiIndex((1, 0, 1, 0)).is_quasi_monogenic(dec))


class TestUPolynomial(TestCase):
    def test_zero_coefficients_are_dropped(self):
        f = UPolynomial.from_terms({(1, 0): 0, (0, 1): 2}, 2, EXACT)
        self.assertEqual(len(f), 1)
        self.assertEqual(f.coefficient((1, 0)), 0)

    def test_float_pruning(self):
        f = UPolynomial.from_terms({(1, 0): 1e-20, (0, 1): 1}, 2, FLOAT)
        self.assertEqual(list(f), [((0, 1), 1)])

    def test_repeated_powers_are_collected(self):
        f = UPolynomial.from_terms([((1, 0), 1), ((1, 0), 2)], 2, EXACT)
        self.assertEqual(f.coefficient((1, 0)), 3)

    def test_difference_of_squares(self):
        product = (u(1, 0) + u(0, 1)) * (u(1, 0) - u(0, 1))
        self.assertEqual(product, u(2, 0) - u(0, 2))

    def test_cancellation(self):
        self.assertFalse(u(1, 0) - u(1, 0))
        self.assertEqual((u(1, 0) - u(1, 0)).degree, -1)

    def test_scalar_multiplication(self):
        self.assertEqual(
            (u(1, 1) * Fraction(1, 2)).coefficient((1, 1)),
            Fraction(1, 2),
        )
        self.assertEqual(3 * u(0, 1), u(0, 1, coefficient=3))

    def test_iteration_is_ordered(self):
        f = u(0, 2) + u(1, 0) + u(2, 0) + u(0, 0)
        self.assertEqual(
            [beta for beta, _ in f],
            [(0, 0), (1, 0), (2, 0), (0, 2)],
        )

    def test_leading(self):
        f = u(0, 2) + u(1, 1) + u(3, 0)
        self.assertEqual(f.leading, (3, 0))
        self.assertEqual(f.degree, 3)

    def test_conjugate(self):
        f = u(1, 0, coefficient=1 + 2j, arithmetic=FLOAT)
        self.assertEqual(f.conjugate().coefficient((1, 0)), 1 - 2j)

    def test_conjugate_is_the_identity_when_exact(self):
        f = u(1, 1, coefficient=Fraction(2, 3))
        self.assertIs(f.conjugate(), f)


class TestEvaluate(TestCase):
    def test_principal_coordinate_is_total_mass(self):
        dec = decomposition(STRICTLY_SMALL)
        self.assertEqual(evaluate(u(1, 0), [3, 1], dec), 4)
        self.assertEqual(evaluate(u(2, 0), [3, 1], dec), 16)

    def test_constant(self):
        dec = decomposition(NEGATIVE)
        f = UPolynomial.constant(Fraction(5, 2), 2, EXACT)
        self.assertEqual(evaluate(f, [7, 3], dec), Fraction(5, 2))

    def test_linear_forms_are_coordinates(self):
        dec = decomposition(JORDAN)
        x = [2, 0, 5, 1]
        for k in range(dec.s):
            with self.subTest(k=k):
                self.assertEqual(evaluate(linear_form(dec, k), x, dec), x[k])


class TestPhiApply(TestCase):
    def test_constants_are_annihilated(self):
        dec = decomposition(STRICTLY_SMALL)
        self.assertFalse(phi_apply(u(0, 0), dec))

    def test_principal_coordinate(self):
        dec = decomposition(CRITICAL)
        self.assertEqual(phi_apply(u(1, 0), dec), u(1, 0))

    def test_square_of_the_principal_coordinate(self):
        dec = decomposition(STRICTLY_SMALL)
        self.assertEqual(
            phi_apply(u(2, 0), dec),
            u(2, 0, coefficient=2) + u(1, 0),
        )

    def test_eigen_covector(self):
        dec = decomposition(STRICTLY_SMALL)
        self.assertEqual(
            phi_apply(u(0, 1), dec),
            u(0, 1, coefficient=Fraction(1, 3)),
        )

    def test_chained_covector(self):
        dec = decomposition(JORDAN)
        # the second index of the critical block picks up its predecessor
        self.assertEqual(
            phi_shifted(u(0, 0, 1, 0), Fraction(1, 2), dec),
            u(0, 1, 0, 0),
        )

    def test_agrees_with_the_definition(self):
        for spec, x in [
            (STRICTLY_SMALL, [3, 5]),
            (NEGATIVE, [4, 1]),
            (JORDAN, [1, 2, 0, 3]),
        ]:
            dec = decomposition(spec)
            x = [Fraction(each, spec.m) for each in x]
            s = dec.s
            f = (
                u(*MultiIndex.delta(s, s - 1, 2))
                + u(*MultiIndex.delta(s, 0), coefficient=3)
                + u(*MultiIndex.delta(s, 1).plus(MultiIndex.delta(s, 0)))
            )
            with self.subTest(spec=spec.name):
                self.assertEqual(
                    evaluate(phi_apply(f, dec), x, dec),
                    transition(f, x, dec),
                )

    def test_agrees_with_the_definition_in_floats(self):
        dec = decomposition(CIRCULANT)
        x = [0.25, 0.5, 1.0]
        f = u(0, 1, 1, arithmetic=FLOAT) + u(0, 0, 2, arithmetic=FLOAT)
        self.assertAlmostEqual(
            evaluate(phi_apply(f, dec), x, dec),
            transition(f, x, dec),
        )


class TestPhiMatrix(TestCase):
    def test_diagonal(self):
        dec = decomposition(STRICTLY_SMALL)
        matrix = phi_matrix((0, 2), dec)
        self.assertEqual(
            matrix.diagonal,
            [0, 1, Fraction(1, 3), 2, Fraction(4, 3), Fraction(2, 3)],
        )

    def test_diagonal_is_the_inner_product(self):
        dec = decomposition(JORDAN)
        matrix = phi_matrix((0, 1, 1, 1), dec)
        self.assertEqual(
            matrix.diagonal,
            [beta.inner(dec) for beta in matrix.basis],
        )

    def test_upper_triangular(self):
        dec = decomposition(NEGATIVE)
        dense = phi_matrix((1, 2), dec).matrix
        for row in range(len(dense)):
            for column in range(row):
                self.assertEqual(dense[row, column], 0)

    def test_columns_are_transition_images(self):
        dec = decomposition(CRITICAL)
        matrix = phi_matrix((2, 1), dec)
        index = matrix.index
        for b, beta in enumerate(matrix.basis):
            image = phi_apply(u(*beta), dec)
            with self.subTest(beta=beta):
                self.assertEqual(
                    {index[gamma]: c for gamma, c in image.terms.items()},
                    matrix.columns[b],
                )

    def test_threads_agree(self):
        dec = decomposition(JORDAN)
        self.assertEqual(
            phi_matrix((0, 0, 1, 1), dec, n_jobs=2).columns,
            phi_matrix((0, 0, 1, 1), dec).columns,
        )

    def test_over_budget(self):
        with self.assertRaises(exceptions.BudgetExceeded):
            phi_matrix((0, 5), decomposition(CRITICAL), budget=4)
