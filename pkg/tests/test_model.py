import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupsep import (
    AgentConfiguration,
    ConfigurationError,
    CouplingSet,
    decompose,
    rhs,
    system_matrix,
)


def brute_force_stats(x, y):
    """Loop-based oracle for the mean/deviation decomposition."""
    n1, d = x.shape
    n2 = y.shape[0]
    mean_x = np.zeros(d)
    mean_y = np.zeros(d)
    for i in range(n1):
        for k in range(d):
            mean_x[k] += x[i, k] / n1
    for j in range(n2):
        for k in range(d):
            mean_y[k] += y[j, k] / n2
    var_x = sum(sum((x[i, k] - mean_x[k]) ** 2 for k in range(d)) for i in range(n1)) / n1
    var_y = sum(sum((y[j, k] - mean_y[k]) ** 2 for k in range(d)) for j in range(n2)) / n2
    max_dev_x = max(
        np.sqrt(sum((x[i, k] - mean_x[k]) ** 2 for k in range(d))) for i in range(n1)
    )
    max_dev_y = max(
        np.sqrt(sum((y[j, k] - mean_y[k]) ** 2 for k in range(d))) for j in range(n2)
    )
    return mean_x, mean_y, var_x, var_y, max_dev_x, max_dev_y


def brute_force_rhs(x, y, ppx, ppy, pm):
    """Loop-based oracle for the alignment/anti-alignment derivative."""
    n1, n2 = x.shape[0], y.shape[0]
    dx = np.zeros_like(x)
    dy = np.zeros_like(y)
    for i in range(n1):
        for ip in range(n1):
            if ip != i:
                dx[i] += ppx[i, ip] * (x[ip] - x[i]) / n1
        for j in range(n2):
            dx[i] -= pm[i, j] * (y[j] - x[i]) / n2
    for j in range(n2):
        for jp in range(n2):
            if jp != j:
                dy[j] += ppy[j, jp] * (y[jp] - y[j]) / n2
        for i in range(n1):
            dy[j] -= pm[i, j] * (x[i] - y[j]) / n1
    return dx, dy


def random_couplings(n1, n2, rng, binary=True):
    ppx = rng.random((n1, n1))
    ppy = rng.random((n2, n2))
    if binary:
        ppx, ppy = (ppx < 0.5).astype(float), (ppy < 0.5).astype(float)
    ppx = np.triu(ppx, 1)
    ppy = np.triu(ppy, 1)
    pm = rng.random((n1, n2))
    if binary:
        pm = (pm < 0.5).astype(float)
    return CouplingSet(psi_plus_x=ppx + ppx.T, psi_plus_y=ppy + ppy.T, psi_minus=pm)


class TestDecompose:
    def test_identical_agents(self):
        stats = decompose(AgentConfiguration(x=[0.0, 0.0], y=[1.0, 1.0]))
        assert stats.mean_x == pytest.approx([0.0])
        assert stats.mean_y == pytest.approx([1.0])
        assert stats.var_x == 0.0 and stats.var_y == 0.0

    def test_symmetric_pairs(self):
        stats = decompose(AgentConfiguration(x=[0.0, 2.0], y=[3.0, 5.0]))
        assert stats.mean_x == pytest.approx([1.0])
        assert stats.mean_y == pytest.approx([4.0])
        assert stats.var_x == pytest.approx(1.0)
        assert stats.var_y == pytest.approx(1.0)
        assert stats.max_dev_x == pytest.approx(1.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(42)
        x = rng.normal(size=(5, 2))
        y = rng.normal(size=(5, 2))
        stats = decompose(AgentConfiguration(x=x, y=y))
        mean_x, mean_y, var_x, var_y, mdx, mdy = brute_force_stats(x, y)
        np.testing.assert_allclose(stats.mean_x, mean_x, atol=1e-12)
        np.testing.assert_allclose(stats.mean_y, mean_y, atol=1e-12)
        assert stats.var_x == pytest.approx(var_x, abs=1e-12)
        assert stats.var_y == pytest.approx(var_y, abs=1e-12)
        assert stats.max_dev_x == pytest.approx(mdx, abs=1e-12)
        assert stats.max_dev_y == pytest.approx(mdy, abs=1e-12)

    def test_variance_bounded_by_max_deviation(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            cfg = AgentConfiguration(x=rng.normal(size=(6, 3)), y=rng.normal(size=(4, 3)))
            stats = decompose(cfg)
            assert stats.var_x <= stats.max_dev_x**2 + 1e-12
            assert stats.var_y <= stats.max_dev_y**2 + 1e-12

    def test_deviations_sum_to_zero(self):
        rng = np.random.default_rng(3)
        cfg = AgentConfiguration(x=rng.normal(size=(9, 2)), y=rng.normal(size=(5, 2)))
        stats = decompose(cfg)
        assert np.max(np.abs((cfg.x - stats.mean_x).sum(axis=0))) < 1e-12
        assert np.max(np.abs((cfg.y - stats.mean_y).sum(axis=0))) < 1e-12

    @given(gamma=st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=40, deadline=None)
    def test_rescaling(self, gamma):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(4, 2))
        y = rng.normal(size=(3, 2))
        base = decompose(AgentConfiguration(x=x, y=y))
        scaled = decompose(AgentConfiguration(x=gamma * x, y=gamma * y))
        assert scaled.var_x == pytest.approx(gamma**2 * base.var_x, rel=1e-9)
        assert scaled.var_y == pytest.approx(gamma**2 * base.var_y, rel=1e-9)
        np.testing.assert_allclose(scaled.mean_x, gamma * base.mean_x, rtol=1e-9)


class TestRhs:
    def test_single_anti_aligned_pair(self):
        cs = CouplingSet(psi_plus_x=[[0.0]], psi_plus_y=[[0.0]], psi_minus=[[1.0]])
        dx, dy = rhs(AgentConfiguration(x=[0.0], y=[1.0]), cs)
        np.testing.assert_allclose(dx, [[-1.0]])
        np.testing.assert_allclose(dy, [[1.0]])

    def test_consensus_fixed_point(self):
        rng = np.random.default_rng(0)
        cs = random_couplings(4, 3, rng)
        cs = CouplingSet(psi_plus_x=cs.psi_plus_x, psi_plus_y=cs.psi_plus_y,
                         psi_minus=np.zeros((4, 3)))
        point = np.array([0.7, -0.2])
        cfg = AgentConfiguration(x=np.tile(point, (4, 1)), y=np.tile(point, (3, 1)))
        dx, dy = rhs(cfg, cs)
        assert np.max(np.abs(dx)) == 0.0
        assert np.max(np.abs(dy)) == 0.0

    def test_matches_system_matrix(self):
        rng = np.random.default_rng(5)
        cs = random_couplings(3, 4, rng, binary=False)
        cfg = AgentConfiguration(x=rng.normal(size=(3, 2)), y=rng.normal(size=(4, 2)))
        dx, dy = rhs(cfg, cs)
        mz = system_matrix(cs) @ cfg.stacked()
        np.testing.assert_allclose(np.vstack([dx, dy]), mz, atol=1e-12)

    def test_matches_brute_force_loops(self):
        rng = np.random.default_rng(9)
        cs = random_couplings(4, 5, rng, binary=False)
        x = rng.normal(size=(4, 3))
        y = rng.normal(size=(5, 3))
        dx, dy = rhs(AgentConfiguration(x=x, y=y), cs)
        bx, by = brute_force_rhs(x, y, cs.psi_plus_x, cs.psi_plus_y, cs.psi_minus)
        np.testing.assert_allclose(dx, bx, atol=1e-12)
        np.testing.assert_allclose(dy, by, atol=1e-12)

    @given(alpha=st.floats(min_value=-100.0, max_value=100.0))
    @settings(max_examples=40, deadline=None)
    def test_linearity(self, alpha):
        rng = np.random.default_rng(13)
        cs = random_couplings(3, 3, rng)
        x = rng.normal(size=(3, 1))
        y = rng.normal(size=(3, 1))
        dx, dy = rhs(AgentConfiguration(x=x, y=y), cs)
        sdx, sdy = rhs(AgentConfiguration(x=alpha * x, y=alpha * y), cs)
        np.testing.assert_allclose(sdx, alpha * dx, atol=1e-9 * max(1.0, abs(alpha)))
        np.testing.assert_allclose(sdy, alpha * dy, atol=1e-9 * max(1.0, abs(alpha)))

    def test_mean_conserved_without_cross_coupling(self):
        rng = np.random.default_rng(21)
        cs = random_couplings(6, 5, rng)
        cs = CouplingSet(psi_plus_x=cs.psi_plus_x, psi_plus_y=cs.psi_plus_y,
                         psi_minus=np.zeros((6, 5)))
        cfg = AgentConfiguration(x=rng.normal(size=(6, 2)), y=rng.normal(size=(5, 2)))
        dx, dy = rhs(cfg, cs)
        assert np.max(np.abs(dx.mean(axis=0))) < 1e-14
        assert np.max(np.abs(dy.mean(axis=0))) < 1e-14

    def test_dimension_mismatch(self):
        cs = CouplingSet(psi_plus_x=[[0.0]], psi_plus_y=[[0.0]], psi_minus=[[1.0]])
        with pytest.raises(ConfigurationError):
            rhs(AgentConfiguration(x=[0.0, 1.0], y=[1.0]), cs)


class TestSystemMatrix:
    def test_single_pair_assembly(self):
        cs = CouplingSet(psi_plus_x=[[0.0]], psi_plus_y=[[0.0]], psi_minus=[[1.0]])
        m = system_matrix(cs)
        np.testing.assert_allclose(m, [[1.0, -1.0], [-1.0, 1.0]])
        np.testing.assert_allclose(np.sort(np.linalg.eigvals(m).real), [0.0, 2.0], atol=1e-12)

    def test_complete_alignment_block(self):
        cs = CouplingSet(
            psi_plus_x=[[0.0, 1.0], [1.0, 0.0]],
            psi_plus_y=[[0.0]],
            psi_minus=np.zeros((2, 1)),
        )
        m = system_matrix(cs)
        np.testing.assert_allclose(m[:2, :2], [[-0.5, 0.5], [0.5, -0.5]])

    def test_rows_sum_to_zero_without_cross_coupling(self):
        rng = np.random.default_rng(17)
        cs = random_couplings(7, 6, rng)
        cs = CouplingSet(psi_plus_x=cs.psi_plus_x, psi_plus_y=cs.psi_plus_y,
                         psi_minus=np.zeros((7, 6)))
        m = system_matrix(cs)
        assert np.max(np.abs(m.sum(axis=1))) < 1e-14

    def test_matches_rhs_on_random_states(self):
        rng = np.random.default_rng(23)
        cs = random_couplings(5, 4, rng)
        m = system_matrix(cs)
        for _ in range(20):
            x = rng.normal(size=(5, 1))
            y = rng.normal(size=(4, 1))
            dx, dy = rhs(AgentConfiguration(x=x, y=y), cs)
            np.testing.assert_allclose(m @ np.vstack([x, y]), np.vstack([dx, dy]), atol=1e-12)


class TestValidation:
    def test_asymmetric_coupling_rejected(self):
        with pytest.raises(ConfigurationError):
            CouplingSet(psi_plus_x=[[0.0, 1.0], [0.0, 0.0]], psi_plus_y=[[0.0]],
                        psi_minus=np.zeros((2, 1)))

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(ConfigurationError):
            CouplingSet(psi_plus_x=[[0.5]], psi_plus_y=[[0.0]], psi_minus=[[0.0]])

    def test_out_of_range_entries_rejected(self):
        with pytest.raises(ConfigurationError):
            CouplingSet(psi_plus_x=[[0.0]], psi_plus_y=[[0.0]], psi_minus=[[1.5]])

    def test_nonfinite_state_rejected(self):
        with pytest.raises(ConfigurationError):
            AgentConfiguration(x=[np.nan], y=[1.0])

    def test_wrong_cross_shape_rejected(self):
        with pytest.raises(ConfigurationError):
            CouplingSet(psi_plus_x=np.zeros((2, 2)), psi_plus_y=np.zeros((3, 3)),
                        psi_minus=np.zeros((3, 2)))

    def test_one_dimensional_promotion(self):
        cfg = AgentConfiguration(x=[1.0, 2.0, 3.0], y=[4.0])
        assert cfg.x.shape == (3, 1)
        assert cfg.y.shape == (1, 1)
        assert cfg.dim == 1
