import itertools
import math

import numpy as np
import pytest

from simgroup.exceptions import DimensionError
from simgroup.opcore import expm_semigroup, numerical_abscissa, operator_norm
from simgroup.weightsolve import (
    LyapunovTarget,
    SteinTarget,
    certificate_check,
    discrete_similarity_constant,
    joint_similarity_constant,
    lyapunov_feasible,
    min_quasi_shift,
    quasi_similarity_constant,
    stein_feasible,
)

from conftest import random_stable
from oracles import grid_similarity_constant

JORDAN = np.array([[-1.0, 4.0], [0.0, -1.0]])
RANK_ONE = np.array([[0.0, 2.0], [0.0, 0.0]])


class TestSteinFeasible:
    def test_contraction_at_unit_budget(self):
        T = 0.5 * np.eye(3)
        res = stein_feasible([T], 1.0)
        assert res and res.certificate.kappa <= 1.0 + 1e-12
        assert res.certificate.residual <= 1e-12

    def test_hand_checked_weight(self):
        res = stein_feasible([RANK_ONE], 2.0)
        assert res
        rep = certificate_check(res.certificate, SteinTarget((RANK_ONE.astype(complex),)))
        assert rep.kappa <= 2.0 + 1e-9
        assert rep.worst <= 1e-9

    def test_distinct_leftzero_idempotents_absent(self):
        E1 = np.array([[1.0, 0.0], [1.0, 0.0]])
        E2 = np.array([[1.0, 0.0], [-1.0, 0.0]])
        res = stein_feasible([E1, E2], 1e6)
        assert not res
        assert res.best_residual >= 1e-3

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            stein_feasible([np.eye(2), np.eye(3)], 2.0)

    def test_kappa_below_one_rejected(self):
        with pytest.raises(ValueError):
            stein_feasible([np.eye(2)], 0.5)

    def test_monotone_replay(self, rng):
        T = 0.8 * random_stable(rng, 4, margin=0.0)
        T = 0.9 * T / max(1.0, operator_norm(T))
        res = stein_feasible([T], 1.5)
        if res:
            # the same weight must verify inside every larger box
            rep = certificate_check(res.certificate, SteinTarget((T,)))
            for bigger in (3.0, 30.0):
                assert rep.kappa <= bigger
                assert rep.worst <= 2e-8


class TestLyapunovFeasible:
    def test_skew_identity_weight(self):
        K = np.array([[1j, 0.0], [0.0, -0.5j]])
        res = lyapunov_feasible(K, 0.0, 1.0)
        assert res and res.certificate.residual <= 1e-10

    def test_jordan_near_critical_budget(self):
        # the optimal weight diag(1,4) sits exactly on the budget kappa=2;
        # a slightly enlarged budget must certify, and probing the exact
        # boundary must still surface a certificate within a fraction of
        # a percent of it (first-order solvers cannot pin the boundary)
        res = lyapunov_feasible(JORDAN, 0.0, 2.001)
        assert res
        rep = certificate_check(res.certificate, LyapunovTarget(JORDAN.astype(complex), 0.0))
        assert rep.worst <= 1e-7
        assert rep.kappa <= 2.001 * (1 + 1e-9)
        boundary = lyapunov_feasible(JORDAN, 0.0, 2.0)
        assert boundary.nearest is not None
        assert boundary.nearest.kappa <= 2.0 * (1 + 5e-3)

    def test_unstable_absent(self):
        A = np.diag([1.0, 0.0])
        res = lyapunov_feasible(A, 0.0, 100.0, maxiter=800)
        assert not res


class TestDiscreteConstant:
    def test_contraction_is_one(self):
        v = discrete_similarity_constant(0.3 * np.eye(2))
        assert v.finite and abs(v.constant - 1.0) <= 1e-9

    def test_rank_one_analytic(self):
        v = discrete_similarity_constant(RANK_ONE, tol=1e-5)
        assert v.finite
        assert abs(v.constant - 2.0) <= 1e-4

    def test_supercritical_radius_unbounded(self):
        v = discrete_similarity_constant(np.diag([1.1, 0.0]))
        assert v.status == "unbounded"
        assert "radius" in v.evidence

    def test_defective_unimodular_unbounded(self):
        v = discrete_similarity_constant(np.array([[1.0, 1.0], [0.0, 1.0]]))
        assert v.status == "unbounded"

    def test_constant_dominates_norm(self, rng):
        for _ in range(6):
            T = expm_semigroup(random_stable(rng, 5), 1.0)
            v = discrete_similarity_constant(T, tol=1e-3)
            assert v.finite
            assert v.constant >= operator_norm(T) * (1 - 1e-6)

    def test_certificate_within_twice_tol(self, rng):
        T = expm_semigroup(random_stable(rng, 6), 0.7)
        feas_tol = 1e-8
        v = discrete_similarity_constant(T, tol=1e-3, feas_tol=feas_tol)
        rep = certificate_check(v.certificate, SteinTarget((T,)))
        assert rep.worst <= 2 * max(feas_tol, 1e-8 * operator_norm(T) ** 2)


class TestJointConstant:
    def test_skew_is_one(self):
        v = joint_similarity_constant(np.array([[0.4j, 0], [0, -1.2j]]))
        assert v.finite and abs(v.constant - 1.0) <= 1e-9

    def test_jordan_analytic(self):
        v = joint_similarity_constant(JORDAN, tol=1e-4)
        assert v.finite
        assert abs(v.constant - 2.0) <= 1e-3

    def test_nilpotent_unbounded(self):
        v = joint_similarity_constant(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert v.status == "unbounded"

    def test_continuous_norm_floor(self, rng):
        A = random_stable(rng, 4)
        v = joint_similarity_constant(A, tol=1e-3)
        sup_norm = max(operator_norm(expm_semigroup(A, t)) for t in np.geomspace(0.01, 5, 25))
        assert v.constant >= sup_norm * (1 - 1e-6)


class TestQuasiConstant:
    def test_above_abscissa_is_one(self, rng):
        A = random_stable(rng, 4)
        v = quasi_similarity_constant(A, numerical_abscissa(A) + 0.1)
        assert v.finite and abs(v.constant - 1.0) <= 1e-9

    def test_jordan_zero_shift(self):
        v = quasi_similarity_constant(JORDAN, 0.0, tol=1e-4)
        assert abs(v.constant - 2.0) <= 1e-3

    def test_nilpotent_unit_shift(self):
        v = quasi_similarity_constant(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)
        assert v.finite and v.constant <= 2.0 + 1e-6
        assert v.certificate.residual <= 1e-6


class TestMinQuasiShift:
    def test_normal_matrix_reaches_growth_bound(self):
        A = np.diag([-1.0, -3.0])
        assert abs(min_quasi_shift(A, 5.0) - (-1.0)) <= 1e-3

    def test_jordan_budget_two(self):
        assert abs(min_quasi_shift(JORDAN, 2.0)) <= 1e-3

    def test_jordan_budget_one(self):
        assert abs(min_quasi_shift(JORDAN, 1.0) - 1.0) <= 1e-3

    def test_empty_bracket_returns_endpoint(self):
        A = np.diag([-2.0 + 0j])
        assert min_quasi_shift(A, 3.0) == -2.0

    def test_budget_below_one_rejected(self):
        with pytest.raises(ValueError):
            min_quasi_shift(JORDAN, 0.9)


class TestCertificateCheck:
    def test_identity_on_contraction(self):
        from simgroup.weightsolve import WeightCertificate

        cert = WeightCertificate(np.eye(2), 1.0, 0.0)
        rep = certificate_check(cert, SteinTarget((0.5 * np.eye(2),)))
        assert rep.residual == 0.0 and abs(rep.kappa - 1.0) < 1e-12

    def test_hand_lyapunov(self):
        from simgroup.weightsolve import WeightCertificate

        cert = WeightCertificate(np.diag([1.0, 4.0]).astype(complex), 2.0, 0.0)
        rep = certificate_check(cert, LyapunovTarget(JORDAN.astype(complex), 0.0))
        assert rep.residual <= 1e-12
        assert abs(rep.kappa - 2.0) <= 1e-12

    def test_identity_weight_on_rank_one(self):
        from simgroup.weightsolve import WeightCertificate

        cert = WeightCertificate(np.eye(2), 1.0, 0.0)
        rep = certificate_check(cert, SteinTarget((RANK_ONE.astype(complex),)))
        assert abs(rep.residual - 3.0) <= 1e-12


class TestGridOracleAgreement:
    def test_all_small_integer_matrices(self):
        """Exhaustive 2x2 sweep with integer entries in {-2..2}.

        The solver and the weight-grid oracle must agree within 1e-2 on
        every instance they both decide finite; solver-unbounded
        instances must yield an empty oracle grid.
        """
        vals = (-2, -1, 0, 1, 2)
        checked = 0
        for entries in itertools.product(vals, repeat=4):
            T = np.array(entries, dtype=float).reshape(2, 2)
            v = discrete_similarity_constant(T, tol=3e-3)
            oracle = grid_similarity_constant(T, kind="stein")
            if v.finite:
                checked += 1
                assert math.isfinite(oracle), f"oracle missed feasible weight for {entries}"
                assert abs(v.constant - oracle) <= 1e-2 * max(1.0, oracle), (
                    entries,
                    v.constant,
                    oracle,
                )
            else:
                assert not math.isfinite(oracle), (entries, oracle)
        assert checked > 80
