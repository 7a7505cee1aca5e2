import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graph
from prefrank.analysis import (
    AnalysisError,
    BoundReport,
    Family,
    ThetaFamily,
    bound_report,
    epsilon_limit,
    generalization_rhs,
    loglog_slope,
    rademacher_bound,
    rademacher_mc,
    sample_complexity,
    theta_bound,
    write_reports,
)
from prefrank.graph import gen_complete
from prefrank.kernels import NodeKernel, PairKernel, PairMode, laplacian_kernel, ls_kernel


class TestRademacherBound:
    @pytest.mark.parametrize("mode", list(PairMode))
    def test_zero_p(self, mode):
        assert rademacher_bound(NodeKernel(np.eye(4)), mode, 1.0, 0.0) == 0.0

    def test_kronecker_identity(self):
        assert rademacher_bound(NodeKernel(np.eye(3)), PairMode.KRONECKER, 1.0, 0.5) == pytest.approx(1.0)

    def test_pd_identity(self):
        assert rademacher_bound(NodeKernel(np.eye(4)), PairMode.PAIRWISE_DIFFERENCE, 1.0, 0.25) == pytest.approx(2.0)

    def test_generic_needs_matrix(self):
        with pytest.raises(AnalysisError):
            rademacher_bound(NodeKernel(np.eye(3)), "generic", 1.0, 0.1)

    def test_bad_p(self):
        with pytest.raises(AnalysisError):
            rademacher_bound(NodeKernel(np.eye(3)), PairMode.KRONECKER, 1.0, 1.5)


class TestRademacherMC:
    def test_small_p(self):
        est, _ = rademacher_mc(np.eye(10), 1.0, 1e-9, samples=200, seed=0)
        assert est == 0.0

    @pytest.mark.parametrize("p", [0.1, 0.25, 0.5])
    def test_identity_mean(self, p):
        est, err = rademacher_mc(np.eye(45), 1.0, p, samples=4000, seed=1)
        assert abs(est - 2 * p) <= 4 * err + 1e-12

    def test_seeded(self):
        K = PairKernel(ls_kernel(gen_complete(5)), "Kronecker").materialize()
        assert rademacher_mc(K, 1.0, 0.1, 100, seed=3) == rademacher_mc(K, 1.0, 0.1, 100, seed=3)

    @given(st.integers(3, 9), st.integers(0, 10_000), st.sampled_from([0.1, 0.25]))
    def test_bound_validity(self, n, seed, p):
        g = random_graph(np.random.default_rng(seed), n)
        for mode in (PairMode.KRONECKER, PairMode.PAIRWISE_DIFFERENCE, "generic"):
            r = bound_report(ls_kernel(g), mode, 1.0, p, samples=500, seed=seed)
            assert r.valid, r


class TestBoundReport:
    def test_fields_and_serialization(self, tmp_path):
        reports = [
            bound_report(ls_kernel(gen_complete(4)), m, 1.0, 0.1, "LS", samples=200, seed=0)
            for m in (PairMode.KRONECKER, PairMode.PAIRWISE_DIFFERENCE, "generic")
        ]
        assert [r.mode for r in reports] == ["Kronecker", "PairwiseDifference", "generic"]
        write_reports(reports, tmp_path / "r.jsonl")
        write_reports(reports, tmp_path / "r.csv")
        rows = [json.loads(x) for x in (tmp_path / "r.jsonl").read_text().splitlines()]
        import csv

        with open(tmp_path / "r.csv") as fh:
            csv_rows = list(csv.DictReader(fh))
        for j, c in zip(rows, csv_rows):
            assert float(c["bound_value"]) == j["bound_value"]
            assert float(c["mc_estimate"]) == j["mc_estimate"]

    def test_large_n_skips_mc(self):
        r = bound_report(NodeKernel(np.eye(PairKernel.MATERIALIZE_MAX_N + 1)), PairMode.KRONECKER, 1.0, 0.1)
        assert r.mc_estimate is None and r.valid
        assert isinstance(r, BoundReport)


class TestGeneralization:
    def test_zero_c_leaves_confidence_term(self):
        N, f, delta = 435, 0.3, 0.05
        rhs = generalization_rhs(0.0, PairMode.KRONECKER, 5.0, 0.0, f, N, delta)
        assert rhs == pytest.approx(5.05 / (1 - f) * math.sqrt(math.log(1 / delta) / (N * f)))

    def test_half_fraction_slack(self):
        lam, C, rho = 3.0, 0.7, 2.0
        base = generalization_rhs(0.0, PairMode.KRONECKER, lam, 0.0, 0.5, 100, 0.1, rho=rho)
        full = generalization_rhs(0.0, PairMode.KRONECKER, lam, C, 0.5, 100, 0.1, rho=rho)
        assert full - base == pytest.approx(2 * math.sqrt(2) * C * lam / rho)

    def test_delta_to_one(self):
        rhs = generalization_rhs(0.1, PairMode.KRONECKER, 1.0, 0.0, 0.5, 100, 1 - 1e-15)
        assert rhs == pytest.approx(0.1, abs=1e-6)

    def test_pd_needs_n(self):
        with pytest.raises(AnalysisError):
            generalization_rhs(0.0, PairMode.PAIRWISE_DIFFERENCE, 1.0, 1.0, 0.5, 10, 0.1)
        v = generalization_rhs(0.0, PairMode.PAIRWISE_DIFFERENCE, 1.0, 1.0, 0.5, 10, 0.1, n=5)
        assert v > 0


class TestTheta:
    def test_complete(self):
        assert all(theta_bound(ThetaFamily("complete"), n) == 1.0 for n in (2, 10, 100))

    def test_union_of_cliques(self):
        assert theta_bound(ThetaFamily(Family.UNION_OF_CLIQUES, k=10), 30) == 10.0

    def test_erdos_renyi(self):
        assert theta_bound(ThetaFamily("erdos-renyi", q=0.5), 100) == 10.0

    def test_missing_k(self):
        with pytest.raises(AnalysisError):
            ThetaFamily("union-cliques")
        with pytest.raises(ValueError):
            ThetaFamily("petersen")


class TestSampleComplexity:
    def test_reference_value(self):
        sc = sample_complexity(1.0, 100, 0.1)
        assert sc.f_star == pytest.approx(100 ** (-8 / 15), abs=1e-12)
        assert sc.f_star == pytest.approx(0.0858, abs=1e-4)
        assert sc.m_star == 425

    def test_theta_equals_n(self):
        with pytest.raises(AnalysisError):
            sample_complexity(100.0, 100, 0.1)
        sc = sample_complexity(100.0, 100, 0.1, strict=False)
        assert sc.f_raw >= 1.0 and sc.f_star == 1.0 and not sc.admissible

    @given(st.floats(1.0, 50.0), st.integers(10, 500), st.floats(0.01, 0.49))
    def test_bound_consistency(self, theta, n, eps):
        if theta > n or eps >= epsilon_limit(theta, n):
            return
        sc = sample_complexity(theta, n, eps)
        N = n * (n - 1) / 2
        assert N * sc.f_star <= sc.m_bound * (1 + 1e-12)

    def test_monotone_in_epsilon(self):
        values = [sample_complexity(2.0, 200, e).f_star for e in (0.05, 0.1, 0.2, 0.3)]
        assert values == sorted(values)


class TestGrowth:
    def test_ls_complete_slope_one(self):
        ns = [8, 16, 32, 64]
        assert loglog_slope(ns, [ls_kernel(gen_complete(n)).lambda1() for n in ns]) == pytest.approx(1.0, abs=1e-9)

    def test_laplacian_pd_bound_flat(self):
        # the Laplacian's order-one Rademacher growth appears in the PD bound, where n and 1/n cancel
        ns = [8, 16, 32, 64]
        vals = [rademacher_bound(laplacian_kernel(gen_complete(n)), PairMode.PAIRWISE_DIFFERENCE, 1.0, 0.25) for n in ns]
        assert loglog_slope(ns, vals) == pytest.approx(0.0, abs=1e-9)

    def test_slope_of_power_law(self):
        assert loglog_slope([1, 2, 4], [3, 12, 48]) == pytest.approx(2.0)
