import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vawmkl.errors import InputError, InvariantError, ProtocolError
from vawmkl.vaw import Phase, VawState, vaw_regret_bound


def dense_vaw_predictions(phis, ys, lam):
    """Direct evaluation: w_t = (lam I + sum_{i<=t} phi phi^T)^{-1} sum_{i<t} y_i phi_i."""
    d = phis.shape[1]
    preds = []
    for t in range(len(ys)):
        s = lam * np.eye(d) + phis[: t + 1].T @ phis[: t + 1]
        b = phis[:t].T @ ys[:t]
        preds.append(phis[t] @ np.linalg.inv(s) @ b)
    return np.array(preds)


class TestConstruction:
    def test_initial_inverse(self):
        s = VawState(3, 2.0)
        assert np.array_equal(s.inv_matrix, np.diag([0.5, 0.5, 0.5]))
        assert np.array_equal(s.accumulator, np.zeros(3))
        assert s.phase is Phase.AWAITING_FEATURES
        assert s.rounds_seen == 0

    def test_scalar(self):
        assert VawState(1, 1.0).inv_matrix.tolist() == [[1.0]]

    @pytest.mark.parametrize("dim,lam", [(0, 1.0), (-1, 1.0), (2, 0.0), (2, -1.0)])
    def test_bad_args(self, dim, lam):
        with pytest.raises(InputError):
            VawState(dim, lam)


class TestRounds:
    def test_fresh_predicts_zero(self, rng):
        for dim in (1, 4, 9):
            assert VawState(dim, 0.3).absorb_features(rng.normal(size=dim)) == 0.0

    def test_scalar_example(self):
        s = VawState(1, 1.0)
        s.step([1.0], 1.0)
        # S_2 = 1 + 1 + 1, b = 1
        assert s.absorb_features([1.0]) == pytest.approx(1 / 3, abs=1e-15)

    def test_matches_dense_inversion(self, rng):
        phis = rng.normal(size=(50, 2))
        ys = rng.uniform(-1, 1, size=50)
        s = VawState(2, 1.0)
        preds = np.array([s.step(p, y) for p, y in zip(phis, ys)])
        assert np.max(np.abs(preds - dense_vaw_predictions(phis, ys, 1.0))) <= 1e-9

    def test_closed_form_constant_stream(self):
        s = VawState(1, 1.0)
        for t in range(1, 11):
            assert s.step([1.0], 1.0) == pytest.approx((t - 1) / (t + 1), abs=1e-14)

    def test_label_zero_leaves_accumulator(self, rng):
        s = VawState(3)
        phi = rng.normal(size=3)
        s.absorb_features(phi)
        s.absorb_label(phi, 0.0)
        assert np.array_equal(s.accumulator, np.zeros(3))
        assert s.rounds_seen == 1

    def test_accumulator_increment(self):
        s = VawState(1)
        s.absorb_features([2.0])
        s.absorb_label([2.0], 3.0)
        assert s.accumulator.tolist() == [6.0]

    def test_step_equals_two_calls(self, rng):
        a, b = VawState(4, 0.5), VawState(4, 0.5)
        for _ in range(100):
            phi, y = rng.normal(size=4), rng.normal()
            pa = a.step(phi, y)
            pb = b.absorb_features(phi)
            b.absorb_label(phi, y)
            assert pa == pb
        assert np.array_equal(a.inv_matrix, b.inv_matrix)
        assert np.array_equal(a.accumulator, b.accumulator)

    def test_interleaved_learners_identical(self, rng):
        a, b = VawState(3), VawState(3)
        for _ in range(30):
            phi, y = rng.normal(size=3), rng.normal()
            pa = a.absorb_features(phi)
            pb = b.absorb_features(phi)
            a.absorb_label(phi, y)
            b.absorb_label(phi, y)
            assert pa == pb
        assert np.array_equal(a.inv_matrix, b.inv_matrix)


class TestProtocol:
    def test_label_before_features(self):
        with pytest.raises(ProtocolError):
            VawState(2).absorb_label([1.0, 0.0], 1.0)

    def test_features_twice(self):
        s = VawState(2)
        s.absorb_features([1.0, 0.0])
        with pytest.raises(ProtocolError):
            s.absorb_features([1.0, 0.0])

    def test_label_with_other_features(self):
        s = VawState(2)
        s.absorb_features([1.0, 0.0])
        with pytest.raises(ProtocolError):
            s.absorb_label([0.0, 1.0], 1.0)

    def test_dimension(self):
        with pytest.raises(InputError):
            VawState(2).absorb_features([1.0, 2.0, 3.0])

    def test_corrupted_inverse_detected(self):
        s = VawState(2)
        s.inv_matrix = -np.eye(2, order="F")
        with pytest.raises(InvariantError):
            s.absorb_features([1.0, 1.0])


class TestInvariants:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 30), st.integers(1, 500), st.floats(0.1, 10.0), st.integers(0, 2**32 - 1))
    def test_inverse_matches_explicit(self, dim, rounds, lam, seed):
        rng = np.random.default_rng(seed)
        phis = rng.normal(size=(rounds, dim))
        s = VawState(dim, lam)
        for phi in phis:
            s.step(phi, rng.normal())
        explicit = np.linalg.inv(lam * np.eye(dim) + phis.T @ phis)
        assert np.max(np.abs(s.inv_matrix - explicit)) <= 1e-8

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 20), st.integers(1, 300), st.integers(0, 2**32 - 1))
    def test_batch_ridge(self, dim, rounds, seed):
        rng = np.random.default_rng(seed)
        phis = rng.normal(size=(rounds, dim))
        ys = rng.normal(size=rounds)
        s = VawState(dim, 1.0)
        for phi, y in zip(phis, ys):
            s.step(phi, y)
        ridge = np.linalg.solve(np.eye(dim) + phis.T @ phis, phis.T @ ys)
        assert np.max(np.abs(s.weights - ridge)) <= 1e-8

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 15), st.integers(1, 200), st.integers(0, 2**32 - 1))
    def test_positive_definite_and_symmetric(self, dim, rounds, seed):
        rng = np.random.default_rng(seed)
        s = VawState(dim, 0.5)
        for _ in range(rounds):
            s.step(rng.normal(size=dim) * rng.uniform(0.1, 10), rng.normal())
        probes = rng.normal(size=(10, dim))
        assert np.all(np.einsum("ij,jk,ik->i", probes, s.inv_matrix, probes) > 0)
        scale = np.abs(s.inv_matrix).max()
        assert np.max(np.abs(s.inv_matrix - s.inv_matrix.T)) <= 1e-8 * scale

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 300), st.integers(0, 2**32 - 1))
    def test_regret_bound_holds(self, dim, rounds, seed):
        rng = np.random.default_rng(seed)
        rho = 3.0
        raw = rng.normal(size=(rounds, dim))
        phis = raw / np.linalg.norm(raw, axis=1, keepdims=True) * rng.uniform(0, rho, size=(rounds, 1))
        ys = rng.uniform(-1, 1, size=rounds)
        s = VawState(dim, 1.0)
        preds = np.array([s.step(p, y) for p, y in zip(phis, ys)])
        alg = 0.5 * np.sum((preds - ys) ** 2)
        for w in rng.normal(size=(10, dim)) * 2:
            regret = alg - 0.5 * np.sum((phis @ w - ys) ** 2)
            assert regret <= vaw_regret_bound(1.0, dim, 1.0, rho, rounds, np.linalg.norm(w))


class TestRegretBound:
    def test_zero_comparator(self):
        got = vaw_regret_bound(2.0, 3, 1.5, 4.0, 100, 0.0)
        assert got == pytest.approx(3 * 1.5**2 / 2 * math.log(1 + 16 * 100 / (2.0 * 3)), rel=1e-14)

    def test_random_feature_specialization(self):
        m, lam, T, w = 7, 1.0, 250, 1.3
        got = vaw_regret_bound(lam, m, 1.0, math.sqrt(2 * m), T, w)
        assert got == pytest.approx(lam / 2 * w**2 + m / 2 * math.log(1 + 2 * T / lam), rel=1e-14)

    def test_worked_value(self):
        got = vaw_regret_bound(1.0, 4, 1.0, math.sqrt(8), 100, 1.0)
        assert got == pytest.approx(0.5 + 2 * math.log(201), rel=1e-14)


class TestSnapshot:
    def test_json_round_trip_and_resume(self, rng):
        phis = rng.normal(size=(40, 3))
        ys = rng.normal(size=40)
        full = VawState(3, 0.7)
        for p, y in zip(phis, ys):
            full.step(p, y)
        part = VawState(3, 0.7)
        for p, y in zip(phis[:25], ys[:25]):
            part.step(p, y)
        resumed = VawState.from_dict(json.loads(json.dumps(part.to_dict())))
        for p, y in zip(phis[25:], ys[25:]):
            resumed.step(p, y)
        assert np.array_equal(resumed.inv_matrix, full.inv_matrix)
        assert np.array_equal(resumed.accumulator, full.accumulator)
        assert resumed.rounds_seen == 40

    def test_no_snapshot_mid_round(self):
        s = VawState(1)
        s.absorb_features([1.0])
        with pytest.raises(ProtocolError):
            s.to_dict()
