import json

import numpy as np
import pytest

from oracles import match_error, random_hurwitz, resolvent_corner
from turing_one import grayscott as gs
from turing_one.errors import InvalidGainError, InvalidInputError, InvalidModelError
from turing_one.model import (
    LinearSystem,
    RationalTransfer,
    SpatialSpec,
    closed_loop_poly,
    detect_cancellation,
    is_decoupled,
    load_model,
    mode_gain,
    partition,
    transfer_function,
)
from turing_one.numerics import Poly, eigenvalues, poly_roots


class TestLinearSystem:
    def test_rejects_single_species(self):
        with pytest.raises(InvalidModelError):
            LinearSystem([[1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(InvalidModelError):
            LinearSystem(np.ones((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises(InvalidModelError):
            LinearSystem([[np.nan, 0], [0, 1]])

    def test_from_matrix_moves_diffuser_last(self):
        A = np.arange(9.0).reshape(3, 3)
        sys = LinearSystem.from_matrix(A, diffuser_index=0)
        # Species order becomes (1, 2, 0).
        np.testing.assert_array_equal(sys.A, A[np.ix_([1, 2, 0], [1, 2, 0])])

    def test_matrix_is_immutable(self):
        sys = LinearSystem(np.eye(2))
        with pytest.raises(ValueError):
            sys.A[0, 0] = 3


class TestPartition:
    def test_two_species(self):
        At, b, c, d = partition(LinearSystem([[-1, 1], [1, -2]]))
        np.testing.assert_array_equal(At, [[-1]])
        np.testing.assert_array_equal(b, [1])
        np.testing.assert_array_equal(c, [1])
        assert d == -2

    def test_gray_scott_top_left(self, jac_a):
        At, *_ = partition(LinearSystem(jac_a))
        np.testing.assert_array_equal(At, jac_a[:2, :2])

    def test_identity(self):
        At, b, c, d = partition(LinearSystem(np.eye(4)))
        np.testing.assert_array_equal(At, np.eye(3))
        assert not b.any() and not c.any() and d == 1

    def test_reassembles_exactly(self, rng):
        for n in range(2, 6):
            A = rng.normal(size=(n, n))
            At, b, c, d = partition(LinearSystem(A))
            B = np.block([[At, b[:, None]], [c[None, :], np.array([[d]])]])
            assert np.array_equal(A, B)


class TestTransferFunction:
    def test_hand_expansion(self):
        tf = transfer_function(LinearSystem([[-1, 1], [1, -2]]))
        assert tf.num.allclose(Poly([1, 1]))
        assert tf.den.allclose(Poly([1, 3, 1]))

    def test_decoupled_keeps_common_factor(self):
        sys = LinearSystem(np.diag([-1.0, -2.0]))
        tf = transfer_function(sys)
        assert tf.num.allclose(Poly([1, 1]))
        assert tf.den.allclose(Poly([1, 3, 2]))
        assert detect_cancellation(tf) == [pytest.approx(-1.0)]
        assert is_decoupled(sys)

    def test_set_a_zeros_are_spec_tilde(self, jac_a):
        tf = transfer_function(LinearSystem(jac_a))
        ref = np.linalg.eigvals(jac_a[:2, :2])
        assert match_error(poly_roots(tf.num).roots, ref) < 1e-10

    def test_relative_degree_enforced(self):
        with pytest.raises(InvalidInputError):
            RationalTransfer(Poly([1, 0, 1]), Poly([1, 2, 3]))

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_adjugate_identity(self, rng, n):
        for _ in range(10):
            A = random_hurwitz(rng, n)
            tf = transfer_function(LinearSystem(A))
            poles = np.linalg.eigvals(A)
            for _ in range(10):
                s = complex(*rng.uniform(-2, 2, 2))
                if np.min(np.abs(poles - s)) < 1e-2:
                    continue
                ref = resolvent_corner(A, s)
                assert abs(tf(s) - ref) <= 1e-8 * abs(ref)


class TestClosedLoop:
    tf = RationalTransfer(Poly([1, 1]), Poly([1, 3, 1]))

    def test_unit_gain(self):
        assert closed_loop_poly(self.tf, 1.0).allclose(Poly([1, 4, 2]))

    def test_zero_gain_is_exact(self):
        assert closed_loop_poly(self.tf, 0.0) == self.tf.den

    def test_negative_gain(self):
        with pytest.raises(InvalidGainError):
            closed_loop_poly(self.tf, -1e-9)

    def test_nan_gain(self):
        with pytest.raises(InvalidGainError):
            closed_loop_poly(self.tf, float("nan"))

    def test_set_a_mode_two_unstable(self, jac_a):
        tf = transfer_function(LinearSystem(jac_a))
        p = closed_loop_poly(tf, mode_gain(SpatialSpec(mu=1e-3), 2))
        assert poly_roots(p).max_real > 0

    def test_locus_endpoints(self, rng):
        for n in (2, 3, 4):
            A = rng.normal(size=(n, n))
            tf = transfer_function(LinearSystem(A))
            r0 = poly_roots(closed_loop_poly(tf, 0.0)).roots
            assert match_error(r0, np.linalg.eigvals(A)) < 1e-8
            big = 1e6 * tf.scale
            r = poly_roots(closed_loop_poly(tf, big)).roots
            r = r[np.argsort(np.abs(r))]
            assert match_error(r[:-1], np.linalg.eigvals(A[:-1, :-1])) < 1e-3
            escaping = r[-1]
            assert escaping.real < -0.5 * big and abs(escaping.imag) < 1e-6 * big


class TestModeGain:
    def test_values(self):
        spec = SpatialSpec(mu=1e-3, L=1.0)
        assert mode_gain(spec, 0) == 0
        assert mode_gain(spec, 2) == pytest.approx(3.9478417604e-2, rel=1e-10)
        assert mode_gain(SpatialSpec(mu=0.0), 7) == 0

    def test_quadratic_and_monotone(self):
        spec = SpatialSpec(mu=2.5e-3, L=3.0)
        g = spec.gains()
        assert np.all(np.diff(g) >= 0)
        for k in range(1, 50):
            assert mode_gain(spec, 2 * k) == pytest.approx(4 * mode_gain(spec, k), rel=1e-14)

    def test_negative_mode(self):
        with pytest.raises(InvalidInputError):
            mode_gain(SpatialSpec(mu=1.0), -1)

    @pytest.mark.parametrize("kw", [dict(mu=-1.0), dict(mu=1.0, L=0.0), dict(mu=1.0, k_max=0),
                                    dict(mu=1.0, lambda_policy="banana")])
    def test_invalid_spec(self, kw):
        with pytest.raises(InvalidModelError):
            SpatialSpec(**kw)

    def test_mode_of_inverts_gain(self):
        spec = SpatialSpec(mu=1e-3, L=2.0)
        assert spec.mode_of(spec.gain(5)) == pytest.approx(5.0)


class TestCancellation:
    def test_coprime(self):
        assert detect_cancellation(RationalTransfer(Poly([1, 1]), Poly([1, 3, 1]))) == []

    def test_random_coprime_pairs(self, rng):
        hits = 0
        for _ in range(1000):
            deg = int(rng.integers(1, 5))
            n = Poly(np.concatenate([[1.0], rng.normal(size=deg)]))
            d = Poly(np.concatenate([[1.0], rng.normal(size=deg + 1)]))
            hits += bool(detect_cancellation(RationalTransfer(n, d)))
        assert hits <= 1


class TestLoadModel:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"A": [[-1, 1], [1, -2]], "mu": 0.01, "L": 2,
                                    "k_max": 50, "lambda_policy": "continuous"}))
        sys, spec = load_model(str(path))
        np.testing.assert_array_equal(sys.A, [[-1, 1], [1, -2]])
        assert spec == SpatialSpec(mu=0.01, L=2.0, k_max=50, lambda_policy="continuous")

    def test_diffuser_index(self):
        sys, _ = load_model({"A": [[-2, 1], [1, -1]], "diffuser_index": 0, "mu": 1, "L": 1})
        np.testing.assert_array_equal(sys.A, [[-1, 1], [1, -2]])

    def test_malformed_json_reports_position(self):
        with pytest.raises(InvalidInputError, match="line 2, column"):
            load_model('{"A": [[1, 0],\n [0, 1]], "mu": }')

    @pytest.mark.parametrize("doc,field", [
        ({"mu": 1, "L": 1}, "A"),
        ({"A": [[1, 2, 3], [4, 5]], "mu": 1, "L": 1}, "A"),
        ({"A": [[1, "x"], [0, 1]], "mu": 1, "L": 1}, "A"),
        ({"A": [[1, 0], [0, 1]], "mu": "fast", "L": 1}, "mu"),
        ({"A": [[1, 0], [0, 1]], "mu": 1, "L": 1, "diffuser_index": 1.5}, "diffuser_index"),
    ])
    def test_field_diagnostics(self, doc, field):
        with pytest.raises(InvalidInputError, match=f"field '{field}'"):
            load_model(doc)

    def test_gray_scott_eigen_consistency(self, set_a):
        sys = gs.linear_system(set_a)
        assert match_error(eigenvalues(sys.A).roots,
                           poly_roots(transfer_function(sys).den).roots) < 1e-10
