import numpy as np
import pytest

from labelflow.core import (LabelState, PointCloud, RunConfig, SolverError,
                            ValidationError, anchor_state, double_well, init_labels)
from labelflow.data import gen_two_gaussians, place_labels, extremes_anchor_map
from labelflow.graph import WeightGraph, build_weights, indicator
from labelflow.micro import (MicroSystem, classify, discrete_energy, micro_step,
                             run_micro, save_trace_csv)


def pair_system(gamma=1.0, kappa=0.0, dt=0.1, w12=1.0):
    """One unlabeled point coupled to one anchored point."""
    cloud = PointCloud(np.array([[0.0], [1.0]]), 1, (np.array([1]),))
    graph = WeightGraph(2, np.array([0]), np.array([1]), np.array([w12]),
                        None, 1.0, True)
    cfg = RunConfig(gamma=gamma, kappa=kappa, dt=dt, t_end=1.0)
    return MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, "plain")


def two_gaussian_system(seed=7, gamma=250.0, kappa=0.25, n=250, t_end=50.0,
                        n_anchors=1, scaling="plain"):
    pts, truth = gen_two_gaussians(n, seed=seed)
    if n_anchors == 1:
        amap = extremes_anchor_map(pts)
    else:
        order = np.argsort(pts[:, 0])
        amap = {int(i): 0 for i in order[:n_anchors]}
        amap.update({int(i): 1 for i in order[-n_anchors:]})
    cloud, perm = place_labels(pts, amap)
    graph = build_weights(cloud, indicator(0.25), epsilon=1.0)
    cfg = RunConfig(gamma=gamma, kappa=kappa, t_end=t_end)
    sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, scaling)
    return sys_, truth[perm]


class TestMicroStep:
    def test_hand_computed_update(self):
        # one step of the population-normalized update:
        # u1 <- 0 + 0.1 * (1/2) * 1 * (1 - 0) = 0.05
        sys_ = pair_system()
        state = anchor_state(sys_.cloud)
        # single group => code -1; use an explicit +1 anchor instead
        values = state.values.copy()
        values[1, 0] = 1.0
        state = LabelState(values, state.frozen_mask, np.array([[1.0]]))
        out = micro_step(sys_, state, dt=0.1)
        assert out.values[0, 0] == pytest.approx(0.05, abs=1e-15)
        assert out.values[1, 0] == 1.0

    def test_state_at_wells_with_no_edges_is_fixed(self):
        cloud = PointCloud(np.array([[0.0], [5.0]]), 2, ())
        graph = WeightGraph(2, np.empty(0, int), np.empty(0, int), np.empty(0),
                            None, 1.0, False)
        cfg = RunConfig(gamma=1.0, kappa=3.0, dt=0.01, t_end=1.0)
        sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, "plain")
        state = LabelState(np.array([[1.0], [-1.0]]), np.zeros(2, bool), np.array([[1.0]]))
        out = micro_step(sys_, state)
        assert np.array_equal(out.values, state.values)

    def test_frozen_entries_unchanged(self):
        sys_, _ = two_gaussian_system(t_end=1.0)
        u0 = init_labels(sys_.cloud, "uniform", seed=3)
        out = micro_step(sys_, u0)
        n = sys_.cloud.n_unlabeled
        assert np.array_equal(out.values[n:], u0.values[n:])

    def test_rejects_non_finite(self):
        sys_ = pair_system()
        bad = LabelState(np.array([[np.nan], [1.0]]), np.array([False, True]),
                         np.array([[1.0]]))
        with pytest.raises(ValidationError):
            micro_step(sys_, bad)

    def test_rejects_unstable_dt(self):
        sys_, _ = two_gaussian_system(t_end=1.0)
        u0 = init_labels(sys_.cloud, "zero", seed=1)
        bound = sys_.stability_bound()
        with pytest.raises(ValidationError):
            micro_step(sys_, u0, dt=10 * bound)
        micro_step(sys_, u0, dt=10 * bound, allow_unstable_dt=True)


class TestDiscreteEnergy:
    def test_isolated_point_reaction_only(self):
        # single unlabeled point at u=0 with kappa=1: E = W(0) = 1
        cloud = PointCloud(np.array([[0.0]]), 1, ())
        graph = WeightGraph(1, np.empty(0, int), np.empty(0, int), np.empty(0),
                            None, 1.0, True)
        cfg = RunConfig(gamma=1.0, kappa=1.0, dt=0.01, t_end=1.0)
        sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, "plain")
        state = LabelState(np.zeros((1, 1)), np.zeros(1, bool), np.array([[1.0]]))
        assert discrete_energy(sys_, state) == pytest.approx(1.0, abs=1e-15)

    def test_wells_no_edges_zero(self):
        cloud = PointCloud(np.array([[0.0], [9.0]]), 2, ())
        graph = WeightGraph(2, np.empty(0, int), np.empty(0, int), np.empty(0),
                            None, 1.0, False)
        cfg = RunConfig(gamma=1.0, kappa=5.0, dt=0.01, t_end=1.0)
        sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, "plain")
        state = LabelState(np.array([[1.0], [-1.0]]), np.zeros(2, bool), np.array([[1.0]]))
        assert discrete_energy(sys_, state) == 0.0

    @pytest.mark.parametrize("scaling", ["plain", "eps2", "orig"])
    def test_matches_dense_double_sum(self, scaling, rng):
        # independent O(N^2) dense-sum oracle on a random 5-point instance
        pts = rng.uniform(-1, 1, size=(5, 1))
        cloud = PointCloud(pts, 3, (np.array([3]), np.array([4])))
        graph = build_weights(cloud, indicator(2.0), epsilon=0.7)
        cfg = RunConfig(gamma=2.0, kappa=0.7, dt=0.01, t_end=1.0, epsilon=0.7)
        sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, scaling)
        state = LabelState(rng.uniform(-1, 1, size=(5, 1)), np.arange(5) >= 3,
                           np.array([[-1.0], [1.0]]))

        w = graph.matrix().toarray()
        u = state.values[:, 0]
        n, total = 3, 5
        a = {"orig": 2.0, "plain": 2.0 / total, "eps2": 2.0 / (0.7 ** 2 * total)}[scaling]
        e_uu = sum(w[i, j] * (u[j] - u[i]) ** 2 for i in range(n) for j in range(n))
        e_ul = sum(w[i, j] * (u[j] - u[i]) ** 2 for i in range(n) for j in range(n, total))
        e_pot = sum((u[i] ** 2 - 1) ** 2 for i in range(n))
        expected = a / (4 * n) * e_uu + a / (2 * n) * e_ul + 0.7 / n * e_pot
        assert discrete_energy(sys_, state) == pytest.approx(expected, rel=1e-13)

    def test_gradient_flow_consistency(self, rng):
        # finite differences of the energy reproduce -du/dt (up to the 1/n metric)
        sys_, _ = two_gaussian_system(n=30, gamma=3.0, kappa=0.5, t_end=1.0)
        state = init_labels(sys_.cloud, "uniform", seed=13)
        n = sys_.cloud.n_unlabeled
        out = micro_step(sys_, state, dt=1e-9)
        rate = (out.values[:n, 0] - state.values[:n, 0]) / 1e-9
        h = 1e-6
        for i in [0, 5, 17]:
            bumped = state.values.copy()
            bumped[i, 0] += h
            up = discrete_energy(sys_, LabelState(bumped, state.frozen_mask, state.label_codes))
            bumped[i, 0] -= 2 * h
            dn = discrete_energy(sys_, LabelState(bumped, state.frozen_mask, state.label_codes))
            grad = (up - dn) / (2 * h)
            assert rate[i] == pytest.approx(-n * grad, rel=2e-4, abs=1e-8)


class TestRunMicro:
    def test_symmetric_midpoint_relaxes_to_zero(self):
        # single unlabeled point between -1 and +1 anchors with equal weights
        cloud = PointCloud(np.array([[0.0], [-1.0], [1.0]]), 1,
                           (np.array([1]), np.array([2])))
        graph = WeightGraph(3, np.array([0, 0]), np.array([1, 2]),
                            np.array([1.0, 1.0]), None, 1.0, True)
        cfg = RunConfig(gamma=1.0, kappa=0.0, t_end=100.0, stationarity_tol=1e-10)
        sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, "plain")
        u0 = anchor_state(cloud)
        values = u0.values.copy()
        values[0, 0] = 0.7
        res = run_micro(sys_, LabelState(values, u0.frozen_mask, u0.label_codes))
        assert res.stationary
        assert abs(res.final.values[0, 0]) < 1e-9

    def test_energy_dissipates_along_run(self):
        # oracle: direct evaluation of the energy along the recorded trajectory
        sys_, _ = two_gaussian_system(seed=3, t_end=20.0)
        res = run_micro(sys_, init_labels(sys_.cloud, "uniform", seed=3))
        e = res.trace.energies
        assert len(e) > 5
        diffs = np.diff(e)
        assert np.all(diffs <= 1e-10 * np.maximum(1.0, np.abs(e[:-1])))

    def test_two_cluster_recovery(self):
        sys_, truth = two_gaussian_system(seed=7, t_end=200.0)
        res = run_micro(sys_, init_labels(sys_.cloud, "zero", seed=7))
        assert res.stationary
        pred = classify(res.final)
        n = sys_.cloud.n_unlabeled
        agreement = np.mean(pred[:n] == truth[:n])
        assert agreement >= 0.95

    def test_equivariance_under_negation(self):
        # W even => the flow commutes with u -> -u once anchors flip
        sys_, _ = two_gaussian_system(seed=5, t_end=2.0)
        u0 = init_labels(sys_.cloud, "uniform", seed=5)
        res_pos = run_micro(sys_, u0)
        flipped = LabelState(-u0.values, u0.frozen_mask, -u0.label_codes)
        res_neg = run_micro(sys_, flipped)
        assert np.max(np.abs(res_pos.final.values + res_neg.final.values)) <= 1e-12

    def test_permutation_invariance(self):
        pts, _ = gen_two_gaussians(40, seed=2)
        order = np.argsort(pts[:, 0])
        amap = {int(order[0]): 0, int(order[-1]): 1}
        cloud, _ = place_labels(pts, amap)
        graph = build_weights(cloud, indicator(0.25), epsilon=1.0)
        cfg = RunConfig(gamma=5.0, kappa=0.1, dt=0.002, t_end=1.0)
        sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), cfg, "plain")
        u0 = init_labels(cloud, "uniform", seed=21)
        base = run_micro(sys_, u0).final.values

        rng = np.random.Generator(np.random.Philox(17))
        n = cloud.n_unlabeled
        perm = np.concatenate([rng.permutation(n), [n, n + 1]])
        cloud_p = PointCloud(cloud.points[perm], n, cloud.labeled_groups)
        graph_p = build_weights(cloud_p, indicator(0.25), epsilon=1.0)
        sys_p = MicroSystem(cloud_p, graph_p, double_well("symmetric_pm1"), cfg, "plain")
        u0_p = LabelState(u0.values[perm], u0.frozen_mask[perm], u0.label_codes)
        permuted = run_micro(sys_p, u0_p).final.values
        # identical up to summation-order roundoff in the sparse matvec
        assert np.abs(base[perm] - permuted).max() <= 1e-13

    def test_discrete_maximum_principle(self):
        sys_, _ = two_gaussian_system(seed=9, t_end=10.0)
        res = run_micro(sys_, init_labels(sys_.cloud, "uniform", seed=9))
        assert np.all(np.abs(res.final.values) <= 1.0 + 1e-12)

    def test_frozen_bitwise_constant(self):
        sys_, _ = two_gaussian_system(seed=1, t_end=5.0)
        u0 = init_labels(sys_.cloud, "zero", seed=1)
        res = run_micro(sys_, u0)
        n = sys_.cloud.n_unlabeled
        assert np.array_equal(res.final.values[n:], u0.values[n:])

    def test_instability_aborts_with_diagnostic(self):
        sys_, _ = two_gaussian_system(t_end=5.0)
        u0 = init_labels(sys_.cloud, "zero", seed=1)
        bad_cfg = RunConfig(gamma=250.0, kappa=0.25, dt=4 * sys_.stability_bound(),
                            t_end=5.0)
        bad_sys = MicroSystem(sys_.cloud, sys_.graph, sys_.potential, bad_cfg, "plain")
        with pytest.raises((SolverError, ValidationError)):
            run_micro(bad_sys, u0, allow_unstable_dt=True)


class TestClassify:
    def test_scalar_sign(self):
        state = LabelState(np.array([[-0.7], [0.4], [0.0]]), np.zeros(3, bool),
                           np.array([[-1.0], [1.0]]))
        assert classify(state).tolist() == [0, 1, -1]

    def test_argmax(self):
        state = LabelState(np.array([[0.2, 0.9, 0.1]]), np.zeros(1, bool), np.eye(3))
        assert classify(state).tolist() == [1]

    def test_tie_breaks_to_lowest_index(self):
        state = LabelState(np.array([[0.5, 0.5]]), np.zeros(1, bool), np.eye(2))
        assert classify(state).tolist() == [0]


def test_trace_csv(tmp_path):
    sys_, _ = two_gaussian_system(t_end=2.0)
    res = run_micro(sys_, init_labels(sys_.cloud, "zero", seed=1))
    path = tmp_path / "trace.csv"
    save_trace_csv(path, res.trace)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "step,time,energy,velocity_l2"
    assert len(lines) == len(res.trace.times) + 1
