import math

import numpy as np
import pytest
import scipy.linalg

from spintomo import (
    DensityMatrix,
    Direction,
    TwiceSpin,
    build_spin_operators,
    eigenbasis_of_axis,
    maximally_mixed,
    random_density,
    rotation_operator,
    validate_density,
)

from helpers import random_direction


class TestTwiceSpin:
    def test_basic(self):
        s = TwiceSpin(3)
        assert s.dim == 4
        assert s.spin == 1.5
        assert s.is_fermionic()
        assert not TwiceSpin(4).is_fermionic()
        assert TwiceSpin(4).mu(0) == 2.0 and TwiceSpin(4).mu(4) == -2.0

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            TwiceSpin(-1)
        with pytest.raises(ValueError):
            TwiceSpin(1.5)


class TestDirection:
    def test_round_trip_through_stereographic(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            d = Direction(theta=float(rng.uniform(0, math.pi - 1e-6)), phi=float(rng.uniform(0, 2 * math.pi)))
            d2 = Direction.from_stereographic(d.z)
            assert abs(d2.theta - d.theta) < 1e-12
            assert abs((d2.phi - d.phi + math.pi) % (2 * math.pi) - math.pi) < 1e-12

    def test_z_matches_half_angle_tangent(self):
        d = Direction(theta=1.0, phi=0.5)
        assert abs(abs(d.z) - math.tan(0.5)) < 1e-15
        assert abs(math.atan2(d.z.imag, d.z.real) - 0.5) < 1e-15

    def test_south_pole_has_no_z(self):
        with pytest.raises(ValueError):
            Direction(theta=math.pi, phi=0.0).z

    def test_theta_range_enforced(self):
        with pytest.raises(ValueError):
            Direction(theta=-0.1, phi=0.0)
        with pytest.raises(ValueError):
            Direction(theta=math.pi + 0.1, phi=0.0)


class TestSpinOperators:
    def test_ladder_entries_spin_half(self):
        ops = build_spin_operators(1)
        expected = np.zeros((2, 2))
        expected[0, 1] = 1.0
        assert np.allclose(ops.s_plus, expected, atol=1e-15)

    def test_ladder_entry_spin_one(self):
        # <mu=1| s_+ |mu=0>: rows/cols are k = s - mu
        ops = build_spin_operators(2)
        assert abs(ops.s_plus[0, 1] - math.sqrt(2)) < 1e-15

    def test_ladder_entry_spin_three_half(self):
        # <mu=1/2| s_+ |mu=-1/2> = sqrt(15/4 + 1/4) = 2
        ops = build_spin_operators(3)
        assert abs(ops.s_plus[1, 2] - 2.0) < 1e-15

    @pytest.mark.parametrize("twice_s", list(range(1, 41)))
    def test_commutators(self, twice_s):
        ops = build_spin_operators(twice_s)
        comm = ops.sx @ ops.sy - ops.sy @ ops.sx
        assert np.abs(comm - 1j * ops.sz).max() < 1e-12
        comm = ops.sy @ ops.sz - ops.sz @ ops.sy
        assert np.abs(comm - 1j * ops.sx).max() < 1e-12
        comm = ops.sz @ ops.sx - ops.sx @ ops.sz
        assert np.abs(comm - 1j * ops.sy).max() < 1e-12

    @pytest.mark.parametrize("twice_s", [1, 2, 3, 5, 8, 13, 21, 40])
    def test_casimir(self, twice_s):
        ops = build_spin_operators(twice_s)
        s = twice_s / 2
        total = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
        assert np.abs(total - s * (s + 1) * np.eye(twice_s + 1)).max() < 1e-10

    def test_sz_diagonal_projections(self):
        ops = build_spin_operators(5)
        assert np.allclose(np.diag(ops.sz).real, [2.5, 1.5, 0.5, -0.5, -1.5, -2.5])

    @pytest.mark.parametrize("twice_s", [1, 2, 3, 7, 16])
    def test_ladder_matrices_real_nonnegative(self, twice_s):
        # the time-reversal phase convention makes every ladder element real >= 0
        ops = build_spin_operators(twice_s)
        for mat in (ops.s_plus, ops.s_minus):
            assert np.abs(mat.imag).max() == 0.0
            assert mat.real.min() >= 0.0


class TestRotation:
    def test_zero_angle_is_identity(self):
        u = rotation_operator(1, Direction(theta=0.0, phi=0.3))
        assert np.abs(u - np.eye(2)).max() < 1e-15

    def test_spin_half_pi_flip(self):
        u = rotation_operator(1, Direction(theta=math.pi, phi=0.0))
        assert np.abs(u - np.array([[0, -1], [1, 0]])).max() < 1e-12

    @pytest.mark.parametrize("twice_s", [1, 2, 5, 9, 20])
    def test_unitarity(self, twice_s):
        rng = np.random.default_rng(twice_s)
        for _ in range(5):
            d = random_direction(rng)
            u = rotation_operator(twice_s, d)
            assert np.abs(u @ u.conj().T - np.eye(twice_s + 1)).max() < 1e-12

    @pytest.mark.parametrize("twice_s", [1, 3, 6, 11])
    def test_matches_scipy_expm(self, twice_s):
        # independent route: dense matrix exponential of the same generator
        rng = np.random.default_rng(100 + twice_s)
        ops = build_spin_operators(twice_s)
        for _ in range(3):
            d = random_direction(rng)
            gen = -math.sin(d.phi) * ops.sx + math.cos(d.phi) * ops.sy
            expected = scipy.linalg.expm(-1j * d.theta * gen)
            assert np.abs(rotation_operator(twice_s, d) - expected).max() < 1e-12


class TestEigenbasis:
    def test_z_axis_gives_standard_basis(self):
        basis = eigenbasis_of_axis(4, Direction(theta=0.0, phi=0.0))
        assert [mu for mu, _ in basis] == [2.0, 1.0, 0.0, -1.0, -2.0]
        for k, (_, vec) in enumerate(basis):
            expected = np.zeros(5)
            expected[k] = 1.0
            assert np.abs(vec - expected).max() < 1e-14

    def test_x_axis_spin_half(self):
        basis = eigenbasis_of_axis(1, Direction(theta=math.pi / 2, phi=0.0))
        plus = np.array([1, 1]) / math.sqrt(2)
        minus = np.array([1, -1]) / math.sqrt(2)
        # eigenvectors defined up to phase, compare overlaps
        assert abs(abs(np.vdot(plus, basis[0][1])) - 1) < 1e-12
        assert abs(abs(np.vdot(minus, basis[1][1])) - 1) < 1e-12

    @pytest.mark.parametrize("twice_s", [1, 4, 9, 15, 20])
    def test_eigen_residuals_and_orthonormality(self, twice_s):
        rng = np.random.default_rng(twice_s)
        ops = build_spin_operators(twice_s)
        for _ in range(4):
            d = random_direction(rng)
            n = d.unit_vector
            n_dot_s = n[0] * ops.sx + n[1] * ops.sy + n[2] * ops.sz
            vecs = []
            for mu, vec in eigenbasis_of_axis(twice_s, d):
                assert np.linalg.norm(n_dot_s @ vec - mu * vec) < 1e-10
                vecs.append(vec)
            gram = np.array(vecs).conj() @ np.array(vecs).T
            assert np.abs(gram - np.eye(twice_s + 1)).max() < 1e-10


class TestDensity:
    def test_maximally_mixed_is_clean(self):
        report = validate_density(maximally_mixed(4))
        assert report.hermiticity_defect == 0.0
        assert report.trace_defect < 1e-15
        assert report.physical and report.normalized

    def test_non_hermitian_defect_value(self):
        a = np.array([[0.5, 0.3], [0.1, 0.5]], dtype=complex)
        report = validate_density(DensityMatrix(twice_s=TwiceSpin(1), entries=a))
        assert abs(report.hermiticity_defect - 0.1) < 1e-15
        assert not report.physical

    def test_projector_is_physical(self):
        rho = random_density(3, seed=5, purity=1.0)
        report = validate_density(rho, tol=1e-10)
        assert report.physical
        assert abs(report.min_eigenvalue) < 1e-12
        eigs = np.linalg.eigvalsh(rho.entries)
        assert abs(eigs[-1] - 1.0) < 1e-12 and np.abs(eigs[:-1]).max() < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            DensityMatrix(twice_s=TwiceSpin(2), entries=np.eye(2))

    def test_random_density_deterministic(self):
        a = random_density(5, seed=123)
        b = random_density(5, seed=123)
        assert np.array_equal(a.entries, b.entries)

    @pytest.mark.parametrize("twice_s", [1, 2, 5, 10])
    def test_random_density_valid(self, twice_s):
        report = validate_density(random_density(twice_s, seed=twice_s), tol=1e-12)
        assert report.normalized and report.physical

    def test_purity_out_of_range(self):
        with pytest.raises(ValueError):
            random_density(2, seed=0, purity=0.0)

    def test_json_round_trip(self):
        rho = random_density(3, seed=9)
        again = DensityMatrix.from_json_dict(rho.to_json_dict())
        assert np.abs(again.entries - rho.entries).max() < 1e-15
        assert again.twice_s == rho.twice_s
