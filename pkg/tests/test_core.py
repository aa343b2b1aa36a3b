import numpy as np
import pytest
from hypothesis import given, strategies as st

from labelflow.core import (
    LabelState,
    PointCloud,
    RunConfig,
    ValidationError,
    anchor_state,
    double_well,
    eval_double_well,
    init_labels,
    load_state_csv,
    save_state_csv,
)


def make_cloud(n=6, m=2, dim=1, seed=0):
    rng = np.random.Generator(np.random.Philox(seed))
    pts = rng.uniform(-1, 1, size=(n + m, dim))
    groups = (np.array([n]), np.array([n + 1])) if m == 2 else (np.arange(n, n + m),)
    return PointCloud(pts, n, groups)


class TestDoubleWell:
    def test_symmetric_wells(self):
        w = double_well("symmetric_pm1")
        assert eval_double_well(w, 1.0) == (0.0, 0.0)
        assert eval_double_well(w, -1.0) == (0.0, 0.0)
        assert eval_double_well(w, 0.0) == (1.0, 0.0)

    def test_symmetric_polynomial_values(self):
        # direct polynomial evaluation: W(0.5) = (0.25-1)^2, W'(0.5) = 4*0.5*(0.25-1)
        w = double_well("symmetric_pm1")
        value, slope = eval_double_well(w, 0.5)
        assert value == pytest.approx(0.5625, abs=1e-15)
        assert slope == pytest.approx(-1.5, abs=1e-15)

    def test_unit_interval_values(self):
        w = double_well("unit_interval")
        assert eval_double_well(w, 0.0) == (0.0, 0.0)
        assert eval_double_well(w, 1.0) == (0.0, 0.0)
        value, slope = eval_double_well(w, 0.5)
        assert value == pytest.approx(0.0625, abs=1e-15)
        assert slope == pytest.approx(0.0, abs=1e-15)

    def test_nonnegative_and_zero_only_at_wells(self):
        for kind in ("symmetric_pm1", "unit_interval"):
            w = double_well(kind)
            ts = np.linspace(-3, 3, 1201)
            vals = w.value(ts)
            assert np.all(vals >= 0)
            zero = ts[vals == 0]
            assert set(np.round(zero, 12)) == set(w.wells)

    @given(st.floats(min_value=1.0, max_value=50.0))
    def test_sign_structure_outside_wells(self, t):
        # t * W'(t) >= 0 whenever |t| >= 1 for the symmetric well
        w = double_well("symmetric_pm1")
        assert t * w.derivative(t) >= 0
        assert (-t) * w.derivative(-t) >= 0

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            double_well("triple")


class TestPointCloud:
    def test_invariants_enforced(self):
        pts = np.zeros((4, 1))
        with pytest.raises(ValidationError):
            PointCloud(pts, 2, (np.array([2]), np.array([2])))  # overlap
        with pytest.raises(ValidationError):
            PointCloud(pts, 2, (np.array([0]), np.array([3])))  # not trailing
        with pytest.raises(ValidationError):
            PointCloud(pts, 2, (np.array([2]),))  # partition too small

    def test_box_contains_points(self):
        cloud = make_cloud(dim=2)
        lo, hi = cloud.box
        assert np.all(cloud.points >= lo) and np.all(cloud.points <= hi)

    def test_stored_box_validated(self):
        pts = np.array([[0.0], [2.0], [1.0], [1.5]])
        with pytest.raises(ValidationError):
            PointCloud(pts, 2, (np.array([2]), np.array([3])),
                       box=(np.array([0.0]), np.array([1.0])))


class TestInitLabels:
    def test_zero_scheme(self):
        cloud = make_cloud()
        state = init_labels(cloud, "zero", seed=1)
        assert np.all(state.values[: cloud.n_unlabeled] == 0.0)
        assert state.values[cloud.n_unlabeled, 0] == -1.0
        assert state.values[cloud.n_unlabeled + 1, 0] == 1.0

    def test_uniform_support(self):
        cloud = make_cloud(n=200, m=2)
        state = init_labels(cloud, "uniform", seed=3)
        u = state.values[: cloud.n_unlabeled, 0]
        assert np.all((u >= -1.0) & (u <= 1.0))

    def test_normal_statistics(self):
        # statistical oracle: |mean| <= 3 sigma / sqrt(N) < 0.01 for N = 1e4
        cloud = make_cloud(n=10000, m=2)
        state = init_labels(cloud, "normal", seed=5, sigma=0.1)
        u = state.values[: cloud.n_unlabeled, 0]
        assert abs(u.mean()) <= 0.01
        assert u.std() == pytest.approx(0.1, rel=0.05)

    def test_normal_requires_positive_sigma(self):
        cloud = make_cloud()
        with pytest.raises(ValidationError):
            init_labels(cloud, "normal", seed=1, sigma=0.0)
        with pytest.raises(ValidationError):
            init_labels(cloud, "normal", seed=1, sigma=-0.5)

    def test_deterministic(self):
        cloud = make_cloud(n=50, m=2)
        a = init_labels(cloud, "uniform", seed=9)
        b = init_labels(cloud, "uniform", seed=9)
        assert np.array_equal(a.values, b.values)

    def test_anchor_immutability(self):
        cloud = make_cloud(n=50, m=2)
        for scheme, sigma in (("zero", None), ("uniform", None), ("normal", 0.4)):
            state = init_labels(cloud, scheme, seed=11, sigma=sigma)
            assert state.values[cloud.n_unlabeled, 0] == -1.0
            assert state.values[cloud.n_unlabeled + 1, 0] == 1.0
            assert np.array_equal(state.frozen_mask, np.arange(52) >= 50)

    def test_multilabel_anchor_codes(self):
        pts = np.zeros((6, 1))
        cloud = PointCloud(pts, 3, (np.array([3]), np.array([4]), np.array([5])))
        state = anchor_state(cloud)
        assert state.width == 3
        assert np.array_equal(state.values[3:], np.eye(3))


class TestRunConfig:
    def test_validation(self):
        with pytest.raises(ValidationError):
            RunConfig(gamma=0.0)
        with pytest.raises(ValidationError):
            RunConfig(kappa=-1.0)
        with pytest.raises(ValidationError):
            RunConfig(dt=0.0)
        with pytest.raises(ValidationError):
            RunConfig(epsilon=0.0)

    def test_dt_optional(self):
        assert RunConfig().dt is None


class TestStateCsv:
    def test_round_trip(self, tmp_path):
        cloud = make_cloud(n=10, m=2, dim=2, seed=4)
        state = init_labels(cloud, "uniform", seed=7)
        truth = np.arange(12) % 2
        path = tmp_path / "state.csv"
        save_state_csv(path, cloud, state, truth=truth)
        cloud2, state2, truth2 = load_state_csv(path)
        assert np.array_equal(cloud.points, cloud2.points)
        assert np.array_equal(state.values, state2.values)
        assert np.array_equal(state.frozen_mask, state2.frozen_mask)
        assert np.array_equal(truth, truth2)
        assert cloud2.n_unlabeled == 10

    def test_round_trip_without_truth(self, tmp_path):
        cloud = make_cloud(n=5, m=2)
        state = init_labels(cloud, "zero", seed=1)
        path = tmp_path / "state.csv"
        save_state_csv(path, cloud, state)
        _, _, truth = load_state_csv(path)
        assert truth is None

    def test_multilabel_round_trip(self, tmp_path):
        pts = np.linspace(0, 1, 7)[:, None]
        cloud = PointCloud(pts, 4, (np.array([4]), np.array([5]), np.array([6])))
        state = anchor_state(cloud)
        path = tmp_path / "state.csv"
        save_state_csv(path, cloud, state)
        cloud2, state2, _ = load_state_csv(path)
        assert state2.width == 3
        assert [len(g) for g in cloud2.labeled_groups] == [1, 1, 1]

    def test_rejects_non_state_file(self, tmp_path):
        path = tmp_path / "bogus.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValidationError):
            load_state_csv(path)
