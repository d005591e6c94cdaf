import math

import numpy as np
import pytest

from iidmatch import analytic as an

E_INV = 1 / math.e


class TestBaseProbs:
    def test_limit_values(self):
        bp = an.base_probs(100_000)
        assert bp.p1 == pytest.approx(0.5808, abs=1e-3)
        assert bp.p2 == pytest.approx(0.1485, abs=1e-3)
        assert bp.pb == pytest.approx(0.6321, abs=1e-3)

    def test_n_one(self):
        assert an.base_probs(1).pb == 1.0

    def test_cauchy_convergence(self):
        vals = [an.base_probs(n) for n in (100, 1000, 10_000)]
        d1 = abs(vals[0].p1 - vals[1].p1)
        d2 = abs(vals[1].p1 - vals[2].p1)
        assert d2 < d1 < 0.01

    def test_ordering_invariant(self):
        bp = an.base_probs(5000)
        assert 0 <= bp.p2 < bp.p1 < bp.pb <= 1


class TestEw0Ratio:
    def test_small_edge(self):
        assert an.ew0_ratio(0.4) == pytest.approx(0.7293, abs=1e-3)

    def test_worst_edge(self):
        assert an.ew0_ratio(1 - E_INV) == pytest.approx(0.6886, abs=1e-3)

    def test_minimum_at_cap(self):
        grid = np.linspace(0.0, 1 - E_INV, 20_001)
        vals = [an.ew0_ratio(f) for f in grid]
        i = int(np.argmin(vals))
        assert grid[i] == pytest.approx(1 - E_INV, abs=1e-4)
        assert vals[i] == pytest.approx(0.6886, abs=1e-3)

    def test_continuity_at_half(self):
        assert an.ew0_ratio(0.5 - 1e-9) == pytest.approx(an.ew0_ratio(0.5 + 1e-9), abs=1e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            an.ew0_ratio(0.7)


class TestEw07Ratio:
    def test_small_adjacent_large_worst(self):
        assert an.ew07_ratio(0.4, 0.0142) == pytest.approx(0.7006, abs=1e-3)

    def test_large_edge_at_cap(self):
        assert an.ew07_ratio(1 - E_INV, 0.0142) >= 0.7

    def test_eta_zero_reduces_to_ew0(self):
        assert an.ew07_ratio(0.6, 0.0) == pytest.approx(an.ew0_ratio(0.6), abs=1e-12)
        assert an.ew07_ratio(0.4, 0.0) == pytest.approx(an.ew0_ratio(0.4), abs=1e-3)


class TestEw1Ratios:
    def test_balanced_smalls(self):
        large, g1, g2 = an.ew1_ratios(0.537815)
        assert g1 == pytest.approx(0.751066, abs=1e-4)
        assert g2 == pytest.approx(0.751066, abs=1e-4)

    def test_balancing_h(self):
        assert an.ew1_balancing_h() == pytest.approx(0.537815, abs=1e-6)

    def test_h_zero_gamma2(self):
        assert an.ew1_ratios(0.0)[2] == pytest.approx(0.72933, abs=1e-6)

    def test_large_discrepancy_recorded(self):
        large = an.ew1_ratios(an.ew1_balancing_h())[0]
        assert large == pytest.approx(0.677354, abs=1e-4)
        rows = {r.name: r for r in an.constants_report(chain_n=200)}
        row = rows["ew1.large_formula_vs_stated"]
        assert row.verdict == "discrepancy"
        assert row.printed == pytest.approx(0.679417)


class TestEw2Ratios:
    def test_reference_values(self):
        large, small = an.ew2_ratios(0.687, 1.0)
        assert large == pytest.approx(0.8539, abs=1e-4)
        assert small == pytest.approx(0.4455, abs=1e-4)

    def test_zero_parameters(self):
        _, small = an.ew2_ratios(0.0, 0.0)
        assert small == 0.0
        assert an.ew2_small_configs(0.0, 0.0)["1b"] == 0.0

    def test_config_1a_constant(self):
        for y1, y2 in ((0.1, 0.2), (0.9, 0.4)):
            assert an.ew2_small_configs(y1, y2)["1a"] == pytest.approx(0.4455, abs=1e-4)


class TestMixOptimize:
    def test_reproduces_headline_value(self):
        l2, s2 = an.ew2_ratios(0.687, 1.0)
        w, r = an.mix_optimize(0.679417, 0.751066, l2, s2)
        assert r == pytest.approx(0.70546, abs=1e-3)
        assert w == pytest.approx(0.850749, abs=1e-3)

    def test_equal_algorithms_flat(self):
        w, r = an.mix_optimize(0.7, 0.8, 0.7, 0.8)
        r0 = an._mix_inner(0.0, 0.7, 0.8, 0.7, 0.8, np.linspace(1 / 3, 1 - E_INV, 1001))
        assert r == pytest.approx(r0, abs=1e-9)

    def test_degenerate_small_corner_attains_optimum(self):
        # equal small-edge ratios flatten the objective where the stronger
        # large dominates; the corner attains the optimum value
        grid = np.linspace(1 / 3, 1 - E_INV, 10_001)
        w, r = an.mix_optimize(0.6, 0.75, 0.9, 0.75)
        assert r == pytest.approx(an._mix_inner(0.0, 0.6, 0.75, 0.9, 0.75, grid),
                                  abs=1e-9)
        assert w <= 0.5 + 1e-6

    def test_inner_min_against_grid(self):
        grid = np.linspace(1 / 3, 1 - E_INV, 10_001)
        for q in (0.0, 0.3, 0.850749, 1.0):
            got = an._mix_inner(q, 0.679417, 0.751066, 0.8539, 0.4455, grid)
            A = q * 0.679417 + (1 - q) * 0.8539
            B = q * 0.751066 + (1 - q) * 0.4455
            brute = min([B] + [((3 * f - 1) * 2 * A / 3 + (2 - 3 * f) * B / 3) / f
                               for f in grid])
            assert got == pytest.approx(brute, abs=1e-12)


class TestGProb:
    def test_symmetric_point(self):
        assert an.g_prob_closed(0.1, 0.1) == pytest.approx(1 - math.exp(-0.1) * 1.1,
                                                           abs=1e-12)

    def test_argument_symmetry(self):
        assert an.g_prob_closed(0.6, 0.25) == pytest.approx(an.g_prob_closed(0.25, 0.6),
                                                            abs=1e-12)

    def test_limit_matches_two_branch(self):
        x = 0.37
        lim = an.g_prob_closed(x + 1e-7, x)
        assert lim == pytest.approx(an.g_prob_closed(x, x), abs=1e-6)
        assert an.g_prob_closed(x + 1e-3, x) == pytest.approx(an.g_prob_closed(x, x),
                                                              abs=1e-3)

    def test_markov_against_simulation(self):
        rng = np.random.default_rng(5)
        for i in range(5):
            b, c, d = rng.uniform(0.05, 0.8, size=3)
            cfg = an.ChainConfig(float(b), float(c), float(d), n=300)
            exact = an.g_prob_markov(cfg)
            trials = 40_000
            sim = an.simulate_chain(cfg, trials, np.random.default_rng(100 + i))
            se = math.sqrt(max(exact * (1 - exact), 1e-9) / trials)
            assert abs(sim - exact) <= 3 * se + 1e-9

    def test_markov_reference_config_against_simulation(self):
        cfg = an.ChainConfig(0.1, 0.15, 0.75, n=2000)
        exact = an.g_prob_markov(cfg)
        trials = 100_000
        sim = an.simulate_chain(cfg, trials, np.random.default_rng(77))
        se = math.sqrt(exact * (1 - exact) / trials)
        assert abs(sim - exact) <= 3 * se + 1e-9

    def test_markov_monotone_in_n(self):
        vals = [an.g_prob_markov(an.ChainConfig(0.1, 0.15, 0.75, n=n))
                for n in (200, 500, 1000, 2000)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_degenerate_rates(self):
        assert an.g_prob_markov(an.ChainConfig(0.0, 0.0, 1e-9, n=100, r1=0.0, r2=0.0)) == 0.0

    def test_row_sums(self):
        M = an.chain_matrix(an.ChainConfig(0.3, 0.2, 0.4, n=500))
        assert np.allclose(M.sum(axis=1), 1.0)
        assert M[4, 4] == 1.0


class TestPuCombine:
    def test_fig5_before(self):
        t = 1 / 3
        got = an.p_u_combine(1 - math.exp(-1.0),
                             [1 - math.exp(-t) * (1 + t),
                              1 - math.exp(-2 * t) * (1 + 2 * t)])
        assert got == pytest.approx(1 - 20 / (9 * math.e**2), abs=1e-12)
        assert got == pytest.approx(0.69925, abs=1e-5)

    def test_fig5_after(self):
        got = an.p_u_combine(1 - math.exp(-(0.9 + 1 / 3)),
                             [1 - math.exp(-0.1) * 1.1,
                              1 - math.exp(-2 / 3) * (1 + 2 / 3)])
        assert got == pytest.approx(0.751, abs=1e-3)

    def test_empty_certificates(self):
        assert an.p_u_combine(0.4, []) == pytest.approx(0.4)

    def test_certain_event(self):
        assert an.p_u_combine(0.2, [1.0, 0.3]) == pytest.approx(1.0)


class TestGammaTables:
    def test_hit_rate(self):
        rows = an.gamma_tables(2000)
        assert len(rows) == 32
        misses = [r for r in rows if r.diff > 5e-3]
        assert len(misses) / len(rows) <= 0.10
        for r in misses:
            assert r.note  # every miss carries its reconstruction note

    def test_known_anchor_values(self):
        rows = {(r.family, r.case): r for r in an.gamma_tables(2000)}
        assert rows[("1", "alpha1")].computed == pytest.approx(0.404667, abs=1e-5)
        assert rows[("1", "beta1")].computed == pytest.approx(0.601313, abs=1e-3)
        assert rows[("1/3", "alpha1")].computed == pytest.approx(0.643789, abs=1e-4)

    def test_worst_structure_ratios(self):
        rr = an.rla_ratios(2000)
        assert rr["rla_1_c1"] == pytest.approx(0.72933, abs=1e-4)
        assert rr["rla_1_two_neighbors"] == pytest.approx(0.735622, abs=1e-3)
        assert rr["rla_1_three_neighbors"] == pytest.approx(0.73967, abs=1e-3)
        assert rr["rla_2/3"] == pytest.approx(0.7870, abs=1e-3)
        assert rr["rla_1/3"] == pytest.approx(0.8107, abs=1e-3)


class TestVwMixture:
    def test_minimum(self):
        v, q = an.vw_mix_min()
        assert v == pytest.approx(0.729982, abs=1e-5)
        assert q[0] == pytest.approx(2 - 3 * E_INV, abs=1e-4)
        assert q[1] == pytest.approx(3 * E_INV - 1, abs=1e-4)
        assert q[2] == pytest.approx(0.0, abs=1e-4)

    def test_corner_values(self):
        r1, r2, r3 = an.VW_RATES
        assert r1 == pytest.approx(0.72933, abs=1e-5)
        assert r3 == 0.7847

    def test_uncapped_minimum_at_pure_c1(self):
        v, q = an.vw_mix_min(cap=1.0)
        assert v == pytest.approx(an.VW_RATES[0], abs=1e-5)
        assert q[0] == pytest.approx(1.0, abs=1e-4)

    def test_pure_two_thirds_corner(self):
        # the q3 = 1 corner evaluates to the 2/3-class rate itself
        r3 = an.VW_RATES[2]
        assert (2 / 3 * r3) / (2 / 3) == pytest.approx(0.7847)


class TestUniform:
    def test_f_at_one_ln2(self):
        assert an.uniform_F(1.0, math.log(2)) == pytest.approx(0.7026, abs=1e-3)

    def test_f_increasing_in_q(self):
        for fp in (0.5, 0.75, 1.0):
            vals = [an.uniform_F(fp, qp) for qp in np.linspace(0, 1, 101)]
            assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_half_ln2_discrepancy(self):
        assert an.uniform_F(math.log(2) / 2, 0.0) == pytest.approx(0.757, abs=1e-3)

    def test_delta_max(self):
        val, s = an.uniform_delta_max()
        assert val == pytest.approx(1 - math.log(2), abs=1e-9)
        assert s == pytest.approx(math.log(2), abs=1e-6)
        eps = 1e-4
        deriv = ((2 - 2 * math.exp(-(s + eps)) - (s + eps))
                 - (2 - 2 * math.exp(-(s - eps)) - (s - eps))) / (2 * eps)
        assert abs(deriv) < 1e-6

    def test_delta_at_zero(self):
        assert 2 - 2 * math.exp(0.0) - 0.0 == 0.0


class TestBmatchBound:
    def test_limit_to_one(self):
        assert an.bmatch_bound(10**9, 0.1) == pytest.approx(1.0, abs=1e-2)
        assert an.bmatch_bound(10**12, 0.2) == pytest.approx(1.0, abs=1e-3)

    def test_plugin_value(self):
        # independent plug-in: tau = 100^-0.4, (1-tau)(1-e^(-100 tau^2/3));
        # values near 0.82 are not reachable from this formula (the max over
        # all tau at b=100 is ~0.665); frozen from independent arithmetic
        tau = 100 ** (-0.4)
        want = (1 - tau) * (1 - math.exp(-100 * tau * tau / 3))
        assert an.bmatch_bound(100, 0.1) == pytest.approx(want, abs=1e-12)
        assert an.bmatch_bound(100, 0.1) == pytest.approx(0.477238, abs=1e-6)

    def test_dominates_first_order_expansion(self):
        for b in (10, 100, 1000):
            for eps in (0.05, 0.1, 0.2):
                tau = b ** (-0.5 + eps)
                lower = 1 - tau - math.exp(-b ** (2 * eps) / 3)
                assert an.bmatch_bound(b, eps) >= lower - 1e-12


class TestConstantsReport:
    def test_known_discrepancies_surface(self):
        rows = {r.name: r for r in an.constants_report(chain_n=2000)}
        expected_discrepancies = {
            "ew1.large_formula_vs_stated", "gamma.2/3.beta2",
            "rla.2/3.vs_stated", "rla.1/3.vs_stated", "uniform.F(ln2/2,0)",
        }
        got = {name for name, r in rows.items() if r.verdict == "discrepancy"}
        assert got == expected_discrepancies
        for name in expected_discrepancies:
            assert rows[name].note or name.startswith("gamma")

    def test_headline_rows_ok(self):
        rows = {r.name: r for r in an.constants_report(chain_n=2000)}
        for name in ("base.p1", "ew0.worst", "ew1.gamma1", "ew2.large",
                     "ew.mixture_ratio", "vw.mixture_min", "uniform.F(1,ln2)",
                     "rla.2/3.vs_tables", "rla.1/3.vs_tables"):
            assert rows[name].verdict == "ok", name
