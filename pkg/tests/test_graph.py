import numpy as np
import pytest
from hypothesis import given, strategies as st

from labelflow.core import PointCloud, ValidationError
from labelflow.graph import (
    WeightGraph,
    build_weights,
    check_connected,
    gaussian,
    indicator,
    inverse_distance,
    save_edges_csv,
    sigma_eta,
)


def cloud_from_points(pts):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[0] < pts.shape[1]:
        pts = pts.T
    return PointCloud(pts, len(pts), ())


def brute_force_weights(pts, kernel, epsilon):
    """Exact all-pairs oracle for the hashed construction."""
    pts = np.atleast_2d(pts)
    n, d = pts.shape
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist = np.linalg.norm(pts[i] - pts[j])
            w = epsilon ** (-d) * float(kernel.profile(np.array([dist / epsilon]))[0])
            if w > 1e-15:
                entries[(i, j)] = w
    return entries


class TestBuildWeights:
    def test_indicator_inside_support(self):
        cloud = cloud_from_points([[0.0], [0.2]])
        g = build_weights(cloud, indicator(0.25), epsilon=1.0)
        assert g.n_edges == 1
        assert g.weight(0, 1) == 1.0
        assert g.weight(1, 0) == 1.0

    def test_indicator_outside_support(self):
        cloud = cloud_from_points([[0.0], [0.3]])
        with pytest.warns(UserWarning, match="disconnected"):
            g = build_weights(cloud, indicator(0.25), epsilon=1.0)
        assert g.n_edges == 0
        assert not g.connected

    def test_collinear_chain(self):
        cloud = cloud_from_points([[0.0], [0.2], [0.4]])
        g = build_weights(cloud, indicator(0.25), epsilon=1.0)
        pairs = set(zip(g.rows.tolist(), g.cols.tolist()))
        assert pairs == {(0, 1), (1, 2)}
        assert g.connected

    def test_epsilon_rescaling(self):
        # w from eta_eps equals eps^-d * (w from eta at distance s / eps)
        pts = np.array([[0.0], [0.1], [0.35]])
        cloud = cloud_from_points(pts)
        eps = 0.5
        g = build_weights(cloud, indicator(0.25), epsilon=eps)
        ref = brute_force_weights(pts, indicator(0.25), eps)
        got = dict(zip(zip(g.rows.tolist(), g.cols.tolist()), g.weights))
        assert got.keys() == ref.keys()
        for key, w in ref.items():
            assert got[key] == pytest.approx(w, rel=1e-14)

    @pytest.mark.parametrize("dim,kernel,eps", [
        (1, indicator(0.25), 1.0),
        (2, indicator(0.3), 1.0),
        (2, gaussian(0.1), 1.0),
        (1, gaussian(0.2), 0.5),
        (2, indicator(1.0), 0.2),
    ])
    def test_hashing_matches_brute_force(self, dim, kernel, eps, rng):
        pts = rng.uniform(-1, 1, size=(180, dim))
        cloud = PointCloud(pts, 180, ())
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = build_weights(cloud, kernel, epsilon=eps)
        ref = brute_force_weights(pts, kernel, eps)
        got = dict(zip(zip(g.rows.tolist(), g.cols.tolist()), g.weights))
        assert got.keys() == ref.keys()
        for key in ref:
            assert got[key] == pytest.approx(ref[key], rel=1e-12)

    def test_symmetric_query(self, rng):
        pts = rng.uniform(0, 1, size=(40, 2))
        cloud = PointCloud(pts, 40, ())
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = build_weights(cloud, gaussian(0.2), epsilon=1.0)
        for i, j in [(3, 17), (0, 39), (12, 12)]:
            assert g.weight(i, j) == g.weight(j, i)
        mat = g.matrix()
        assert (mat != mat.T).nnz == 0

    def test_rejects_bad_epsilon(self):
        cloud = cloud_from_points([[0.0], [0.1]])
        with pytest.raises(ValidationError):
            build_weights(cloud, indicator(0.25), epsilon=0.0)

    def test_distance_matrix_path(self):
        dmat = np.array([[0.0, 0.5, 2.0], [0.5, 0.0, 0.75], [2.0, 0.75, 0.0]])
        g = build_weights(kernel=inverse_distance(1.0), distances=dmat)
        assert g.weight(0, 1) == pytest.approx(2.0)
        assert g.weight(1, 2) == pytest.approx(1.0 / 0.75)
        assert g.weight(0, 2) == 0.0  # beyond cutoff

    def test_distance_matrix_boundary_inclusive(self):
        dmat = np.array([[0.0, 1.0], [1.0, 0.0]])
        g = build_weights(kernel=inverse_distance(1.0), distances=dmat)
        assert g.weight(0, 1) == 1.0  # d == cutoff is kept

    def test_distance_matrix_shape_mismatch(self):
        with pytest.raises(ValidationError):
            build_weights(kernel=inverse_distance(1.0), distances=np.zeros((2, 3)))
        cloud = cloud_from_points([[0.0], [1.0], [2.0]])
        with pytest.raises(ValidationError):
            build_weights(cloud, inverse_distance(1.0), distances=np.zeros((2, 2)))

    @given(st.floats(min_value=0.0, max_value=2.0), st.floats(min_value=0.0, max_value=2.0))
    def test_kernel_monotone_in_distance(self, s1, s2):
        a, b = sorted((s1, s2))
        for kernel in (indicator(0.7), gaussian(0.4)):
            pa = kernel.profile(np.array([a]))[0]
            pb = kernel.profile(np.array([b]))[0]
            assert pa >= pb


class TestSigmaEta:
    def test_indicator_1d_analytic(self):
        # (1/2) * int_{-R}^{R} x^2 dx = R^3 / 3
        assert sigma_eta(indicator(0.25), 1) == pytest.approx(0.25 ** 3 / 3, rel=1e-6)
        assert sigma_eta(indicator(1.0), 1) == pytest.approx(1.0 / 3.0, rel=1e-6)

    def test_indicator_2d_analytic(self):
        # polar coordinates: (1/2) * int r^3 dr * int cos^2 = pi R^4 / 8
        assert sigma_eta(indicator(0.25), 2) == pytest.approx(np.pi * 0.25 ** 4 / 8, rel=1e-6)

    def test_gaussian_1d_analytic(self):
        # (1/2) * int exp(-x^2/(2 s^2)) x^2 dx = sqrt(2 pi) s^3 / 2 (up to truncation)
        s = 0.3
        assert sigma_eta(gaussian(s), 1) == pytest.approx(np.sqrt(2 * np.pi) * s ** 3 / 2, rel=1e-5)

    def test_monotone_in_kernel(self):
        assert sigma_eta(indicator(0.2), 1) < sigma_eta(indicator(0.4), 1)
        assert sigma_eta(indicator(0.2), 2) < sigma_eta(indicator(0.4), 2)

    def test_degenerate_rejected(self):
        with pytest.raises(ValidationError):
            indicator(0.0)
        with pytest.raises(ValidationError):
            sigma_eta(inverse_distance(1.0), 1)


class TestConnectivity:
    def test_complete_graph(self):
        g = WeightGraph(3, np.array([0, 0, 1]), np.array([1, 2, 2]),
                        np.ones(3), None, None, True)
        assert check_connected(g)

    def test_two_disjoint_edges(self):
        g = WeightGraph(4, np.array([0, 2]), np.array([1, 3]),
                        np.ones(2), None, None, False)
        assert not check_connected(g)

    def test_single_vertex(self):
        g = WeightGraph(1, np.empty(0, dtype=int), np.empty(0, dtype=int),
                        np.empty(0), None, None, True)
        assert check_connected(g)


def test_edges_csv(tmp_path, rng):
    pts = rng.uniform(0, 1, size=(20, 1))
    cloud = PointCloud(pts, 20, ())
    g = build_weights(cloud, indicator(0.5), epsilon=1.0)
    path = tmp_path / "edges.csv"
    save_edges_csv(path, g)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "i,j,w"
    assert len(rows) == g.n_edges + 1
