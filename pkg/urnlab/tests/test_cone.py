from unittest import TestCase

from urnlab.cone import ConeSigma, cone_certificate, cone_contains


class TestConeSigma(TestCase):
    def test_edges(self):
        self.assertEqual(ConeSigma(2).edges, [(0, 1), (1, 0)])
        self.assertEqual(ConeSigma(2).edge(0, 1), (2, -1))
        self.assertEqual(len(ConeSigma(4).edges), 12)

    def test_faces(self):
        self.assertEqual(
            ConeSigma(3).faces,
            [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)],
        )

    def test_positive_dimension(self):
        with self.assertRaises(ValueError):
            ConeSigma(0)

    def test_wrong_length(self):
        with self.assertRaises(ValueError):
            ConeSigma(2).contains([1, 2, 3])

    def test_weakest_face(self):
        self.assertEqual(ConeSigma(2).weakest_face([1, -2]), ((1,), -3))
        self.assertEqual(ConeSigma(3).weakest_face([4, 1, 2]), ((1,), 8))

    def test_weakest_face_never_takes_everything(self):
        face, _ = ConeSigma(3).weakest_face([-1, -1, -1])
        self.assertEqual(len(face), 2)


class TestContains(TestCase):
    def test_edges_are_inside(self):
        cone = ConeSigma(3)
        for i, j in cone.edges:
            with self.subTest(edge=(i, j)):
                self.assertTrue(cone.contains(cone.edge(i, j)))

    def test_orthant_is_inside(self):
        self.assertTrue(cone_contains([0, 0]))
        self.assertTrue(cone_contains([3, 0, 1]))

    def test_boundary(self):
        self.assertTrue(cone_contains([2, -1, 0]))
        self.assertTrue(cone_contains([2, -1]))

    def test_outside(self):
        self.assertFalse(cone_contains([1, -2]))
        self.assertFalse(cone_contains([-1, 0]))
        self.assertFalse(cone_contains([-1, -1, 3]))

    def test_floats_near_a_face(self):
        self.assertTrue(cone_contains([2.0, -1.0 - 1e-15]))
        self.assertFalse(cone_contains([2.0, -1.1]))

    def test_one_dimension(self):
        self.assertTrue(cone_contains([0]))
        self.assertFalse(cone_contains([1]))
        self.assertFalse(cone_contains([-1]))


class TestCertificate(TestCase):
    def test_inside(self):
        certificate = cone_certificate([1, 1])
        self.assertTrue(certificate.contained)
        self.assertTrue(certificate.feasible)
        self.assertIsNone(certificate.violated_face)
        self.assertAlmostEqual(certificate.coefficients[0, 1], 1)
        self.assertAlmostEqual(certificate.coefficients[1, 0], 1)

    def test_outside(self):
        certificate = cone_certificate([1, -2])
        self.assertFalse(certificate.contained)
        self.assertFalse(certificate.feasible)
        self.assertEqual(certificate.violated_face, (1,))
        self.assertEqual(certificate.coefficients, {})

    def test_coefficients_reproduce_the_point(self):
        cone = ConeSigma(3)
        x = [3, -1, 2]
        certificate = cone.certificate(x)
        self.assertTrue(certificate.feasible)
        rebuilt = [0.0] * 3
        for (i, j), coefficient in certificate.coefficients.items():
            rebuilt[i] += 2 * coefficient
            rebuilt[j] -= coefficient
        for got, expected in zip(rebuilt, x):
            self.assertAlmostEqual(got, expected)

    def test_both_ways_agree(self):
        cone = ConeSigma(3)
        for x in [
            [1, 1, 1],
            [2, -1, 0],
            [-2, 1, 1],
            [0, 0, -1],
            [5, -3, 0],
            [-1, 2, -1],
        ]:
            with self.subTest(x=x):
                self.assertTrue(cone.certificate(x).consistent)

    def test_one_dimension(self):
        certificate = cone_certificate([0])
        self.assertTrue(certificate.consistent)
        self.assertTrue(certificate.feasible)
