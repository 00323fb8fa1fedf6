"""Lazy-walk local times: exact bridge DP, rejection MC, limit-law checks.

The exact DP routes are pinned against brute-force path enumeration
(tools/derive_constants.py, section walk) whose rationals are quoted
inline: at n = 2 the bridge pmf is (1/3, 2/3) over one and two visits,
at n = 4 it is (1/7, 2/7, 12/35, 8/35), and the unconditional means are
7/8, 187/128 and 7770342787/2147483648 at n = 2, 4, 16. Monte Carlo
regressions quote frozen oracle-run values next to each assertion.
"""

import math
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from renewlab.backend import USING_NUMBA
from renewlab.errors import ResourceError
from renewlab import walk
from renewlab.maps import fit_power_exponent
from renewlab.walk import (
    BridgeTable,
    WalkLaw,
    bridge_local_time_exact,
    bridge_local_time_mc,
    bridge_local_time_moments,
    expected_local_time,
    first_passage_pmf,
    local_time_sample,
    return_probabilities,
)

LAW = WalkLaw()
FIXTURES = pathlib.Path(__file__).parent / "fixtures"


class TestWalkLaw:
    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 1.5, math.nan])
    def test_rejects_bad_stay(self, bad):
        with pytest.raises(ValueError):
            WalkLaw(bad)

    def test_default_step_pmf(self):
        assert LAW.step_pmf == ((-1, 0.25), (0, 0.5), (1, 0.25))
        assert sum(p for _, p in LAW.step_pmf) == 1.0
        assert sum(s * p for s, p in LAW.step_pmf) == 0.0
        assert LAW.variance == 0.5

    def test_is_frozen(self):
        with pytest.raises(AttributeError):
            LAW.stay = 0.7


class TestExactDp:
    def test_return_probabilities(self):
        r = return_probabilities(LAW, 4)
        assert r[0] == 1.0
        assert r[1] == 0.5
        assert r[2] == pytest.approx(0.375, rel=1e-15)
        assert r[4] == pytest.approx(35.0 / 128.0, rel=1e-15)

    def test_first_passage_spot_values(self):
        f = first_passage_pmf(LAW, 6)
        assert f[0] == 0.0
        assert f[1] == 0.5
        # leave 0 (prob 1/2), come straight back (prob 1/4 each side)
        assert f[2] == pytest.approx(0.125, rel=1e-15)
        assert f.sum() < 1.0  # recurrent, but mass escapes any finite horizon

    @given(n=st.integers(min_value=1, max_value=40))
    @settings(max_examples=30, deadline=None)
    def test_renewal_identity(self, n):
        # r(n) = sum_m f(m) r(n-m): the two DPs describe one walk
        r = return_probabilities(LAW, n)
        f = first_passage_pmf(LAW, n)
        conv = sum(f[m] * r[n - m] for m in range(1, n + 1))
        assert r[n] == pytest.approx(conv, rel=1e-13)

    def test_expected_local_time_oracle_values(self):
        assert expected_local_time(LAW, 2) == pytest.approx(7.0 / 8.0, rel=1e-15)
        assert expected_local_time(LAW, 4) == pytest.approx(187.0 / 128.0, rel=1e-15)
        assert expected_local_time(LAW, 16) == pytest.approx(
            7770342787.0 / 2147483648.0, rel=1e-14
        )

    def test_mean_local_time_grows_like_sqrt(self):
        # exact exponent drifts toward 1/2 from above; measured 0.5212
        ns = np.array([125.0, 250.0, 500.0, 1000.0, 2000.0])
        els = np.array([expected_local_time(LAW, int(n)) for n in ns])
        assert abs(fit_power_exponent(ns, els) - 0.5) < 0.05

    def test_horizon_cap(self):
        with pytest.raises(ResourceError):
            return_probabilities(LAW, 2001)
        with pytest.raises(ValueError):
            first_passage_pmf(LAW, 0)


class TestBridgeExact:
    def test_n1_visit_is_forced(self):
        res = bridge_local_time_exact(LAW, 1)
        assert res.p_bridge == 0.5
        assert np.array_equal(res.pmf, [0.0, 1.0])

    def test_n2_golden_pmf(self):
        res = bridge_local_time_exact(LAW, 2)
        assert res.p_bridge == pytest.approx(0.375, rel=1e-15)
        assert res.pmf[1] == pytest.approx(1.0 / 3.0, rel=1e-14)
        assert res.pmf[2] == pytest.approx(2.0 / 3.0, rel=1e-14)
        assert res.pmf[0] == 0.0

    def test_n4_golden_pmf(self):
        res = bridge_local_time_exact(LAW, 4)
        want = [0.0, 1.0 / 7.0, 2.0 / 7.0, 12.0 / 35.0, 8.0 / 35.0]
        assert res.p_bridge == pytest.approx(35.0 / 128.0, rel=1e-15)
        assert res.pmf[:5] == pytest.approx(want, rel=1e-13)

    @pytest.mark.parametrize("n", [2, 4])
    def test_matches_golden_fixture(self, n):
        rows = (FIXTURES / f"walk_bridge_n{n}.csv").read_text().strip().splitlines()[1:]
        res = bridge_local_time_exact(LAW, n)
        assert len(rows) == res.pmf.shape[0]
        for row in rows:
            k, p = row.split(",")
            assert repr(float(res.pmf[int(k)])) == p

    def test_total_conditional_mass(self):
        for n in (1, 3, 10, 137):
            assert bridge_local_time_exact(LAW, n).pmf.sum() == pytest.approx(
                1.0, abs=1e-12
            )

    def test_bridge_mass_matches_position_dp(self):
        # sum_k f^(*k)(n) must reproduce P(S_n = 0) from the plain DP
        for n in (5, 50, 200):
            res = bridge_local_time_exact(LAW, n)
            assert res.p_bridge == pytest.approx(
                return_probabilities(LAW, n)[n], rel=1e-12
            )

    def test_horizon_cap(self):
        with pytest.raises(ResourceError) as err:
            bridge_local_time_exact(LAW, 2001)
        assert err.value.suggested == 2000


class TestBridgeTable:
    def test_mass_and_shape(self):
        tab = BridgeTable.build(LAW, 30)
        assert tab.table.shape == (61, 31)
        assert tab.total_mass() == pytest.approx(1.0, abs=1e-12)
        assert np.all(tab.table >= 0.0)

    def test_position_marginal_is_symmetric(self):
        tab = BridgeTable.build(LAW, 20)
        pos = tab.position_pmf()
        assert pos == pytest.approx(pos[::-1], rel=1e-13)
        assert pos.sum() == pytest.approx(1.0, abs=1e-12)

    @given(n=st.integers(min_value=1, max_value=60))
    @settings(max_examples=25, deadline=None)
    def test_agrees_with_convolution_route(self, n):
        # two independent exact routes to the same conditional law
        tab = BridgeTable.build(LAW, n)
        conv = bridge_local_time_exact(LAW, n)
        assert np.abs(tab.conditional_local_time(0) - conv.pmf).max() < 1e-13

    def test_off_bridge_conditioning(self):
        tab = BridgeTable.build(LAW, 10)
        pmf = tab.conditional_local_time(position=3)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
        # an excursion ending away from 0 may have visited it 0 times
        assert pmf[0] > 0.0

    def test_position_range_is_checked(self):
        tab = BridgeTable.build(LAW, 10)
        with pytest.raises(ValueError):
            tab.conditional_local_time(11)


class TestBridgeMoments:
    def test_j_zero_is_one(self):
        assert bridge_local_time_moments(LAW, 100, 0) == 1.0

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            bridge_local_time_moments(LAW, 100, 4)

    def test_n2_by_hand(self):
        # E(L_2 | S_2 = 0) = 5/3, E(L_2) = 7/8
        got = bridge_local_time_moments(LAW, 2, 1)
        assert got == pytest.approx((5.0 / 3.0) / (7.0 / 8.0), rel=1e-13)

    def test_size_biasing_ratio_at_depth(self):
        # measured 1.582134 at n = 2000, 0.72% from pi/2
        got = bridge_local_time_moments(LAW, 2000, 1)
        assert got == pytest.approx(1.5821338102775566, rel=1e-10)
        assert abs(got / (math.pi / 2.0) - 1.0) < 0.05

    def test_second_moment_at_depth(self):
        # measured 3.172714 at n = 2000, 0.99% from pi
        got = bridge_local_time_moments(LAW, 2000, 2)
        assert abs(got / math.pi - 1.0) < 0.08

    def test_third_moment_at_depth(self):
        # limit 3 pi^2 / 4; measured 0.89% off at n = 2000
        got = bridge_local_time_moments(LAW, 2000, 3)
        assert abs(got / (3.0 * math.pi**2 / 4.0) - 1.0) < 0.1


class TestBridgeMc:
    def test_validation(self):
        with pytest.raises(ValueError):
            bridge_local_time_mc(LAW, 100, 9999)
        with pytest.raises(ValueError):
            bridge_local_time_mc(LAW, 0, 10_000)

    def test_seeded_repeat_is_identical(self):
        one = bridge_local_time_mc(LAW, 60, 20_000, seed=5)
        two = bridge_local_time_mc(LAW, 60, 20_000, seed=5)
        assert one.accepted == two.accepted
        assert np.array_equal(one.pmf, two.pmf)
        assert one.pmf.sum() == pytest.approx(1.0, abs=1e-12)

    def test_matches_exact_law(self):
        # frozen oracle run: TV 0.04307 at 1590 accepted bridges
        mc = bridge_local_time_mc(LAW, 50, 20_000, seed=3)
        exact = bridge_local_time_exact(LAW, 50)
        tv = 0.5 * float(np.abs(mc.pmf - exact.pmf).sum())
        assert mc.accepted == 1590
        assert tv == pytest.approx(0.043071434414346646, abs=1e-12)
        # multinomial noise floor at this sample size is ~0.04
        assert tv < 0.08

    def test_acceptance_rate_decays_like_inverse_sqrt(self):
        # local CLT: P(S_n = 0) ~ n^(-1/2); measured slope -0.488
        ns = [50, 100, 200, 400]
        rates = [
            bridge_local_time_mc(LAW, n, 100_000, seed=1).acceptance_rate
            for n in ns
        ]
        slope = fit_power_exponent(np.array(ns, float), np.array(rates))
        assert abs(slope + 0.5) < 0.1

    def test_refuses_hopeless_acceptance(self):
        # at n = 3200 only ~0.8% of 10^4 walks come back; below sqrt(trials)
        with pytest.raises(ResourceError) as err:
            bridge_local_time_mc(LAW, 3200, 10_000, seed=0)
        assert "rerun with at least" in str(err.value)
        assert err.value.suggested == 40_000

    @pytest.mark.slow
    def test_tv_against_exact_at_depth(self):
        # frozen oracle run: TV 0.014576 at seed 0 with 39892 accepted.
        # The multinomial noise floor at this acceptance count is
        # E TV ~ 0.5 sum_k sqrt(2 p_k (1-p_k) / (pi A)) = 0.0147, so the
        # distance here is noise, not bias; it halves by 4x the trials.
        mc = bridge_local_time_mc(LAW, 200, 1_000_000, seed=0)
        exact = bridge_local_time_exact(LAW, 200)
        tv = 0.5 * float(np.abs(mc.pmf - exact.pmf).sum())
        assert tv == pytest.approx(0.014575506482209132, abs=1e-12)
        assert tv < 0.02


class TestLocalTimeSample:
    def test_validation(self):
        with pytest.raises(ValueError):
            local_time_sample(LAW, 100, 0)
        with pytest.raises(ValueError):
            local_time_sample(LAW, 0, 100)

    def test_counts_from_time_one(self):
        # L_1 = 1 exactly when the first step stays: mean 1/2 up to 4 SE
        lt = local_time_sample(LAW, 1, 40_000, seed=2)
        assert set(np.unique(lt)) <= {0, 1}
        assert abs(float(lt.mean()) - 0.5) < 4.0 * 0.5 / math.sqrt(40_000)

    def test_seeded_regression(self):
        lt = local_time_sample(LAW, 2000, 2000, seed=0)
        assert lt.dtype == np.int64
        assert float(lt.mean()) == pytest.approx(49.0045, rel=1e-12)
        assert list(lt[:5]) == [123, 66, 82, 43, 61]

    def test_mean_tracks_exact_dp(self):
        lt = local_time_sample(LAW, 500, 20_000, seed=9)
        want = expected_local_time(LAW, 500)
        se = float(lt.std(ddof=1)) / math.sqrt(lt.shape[0])
        assert abs(float(lt.mean()) - want) < 4.0 * se

    @pytest.mark.slow
    def test_occupation_limit_law(self):
        # L_n / mean against the half-normal law; measured ks 0.00826
        lt = local_time_sample(LAW, 100_000, 10_000, seed=0)
        a_hat = float(lt.mean())
        scaled = np.sort(lt / a_hat)
        vals, cnt = np.unique(scaled, return_counts=True)
        cum = np.cumsum(cnt) / lt.shape[0]
        fv = erf(vals / math.sqrt(math.pi))
        ks = float(np.max(np.maximum(np.abs(cum - fv),
                                     np.abs(fv - (cum - cnt / lt.shape[0])))))
        assert ks < 0.05


@pytest.mark.skipif(not USING_NUMBA, reason="compares the two backends")
class TestBackendParity:
    def test_fallback_blocks_match_kernels_bitwise(self):
        mc1 = bridge_local_time_mc(LAW, 80, 20_000, seed=4)
        lt1 = local_time_sample(LAW, 300, 5000, seed=4)
        walk.USING_NUMBA = False
        try:
            mc2 = bridge_local_time_mc(LAW, 80, 20_000, seed=4)
            lt2 = local_time_sample(LAW, 300, 5000, seed=4)
        finally:
            walk.USING_NUMBA = True
        assert mc1.accepted == mc2.accepted
        assert np.array_equal(mc1.pmf, mc2.pmf)
        assert np.array_equal(lt1, lt2)
