import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from safetyrisk.errors import InsufficientSupportError, ValidationError
from safetyrisk.quantiles import (
    RANGE_LABELS,
    EscalationQuery,
    EscalationReport,
    EscalationResult,
    RiskRanges,
    build_ranges,
    classify,
    empirical_quantile,
    escalation_estimate,
    format_quantile_table,
    format_ranges,
    parse_ranges_text,
    return_period_quantile,
)
from safetyrisk.riskcore import Basis
from safetyrisk.simgen import GeneratorConfig, RiskPairSample, smoothed_bootstrap_uni


def oracle_quantile(values, p):
    s = sorted(values)
    pos = (len(s) - 1) * p
    lo = int(np.floor(pos))
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


def oracle_escalation(x, y, x0, lo, hi, threshold):
    kept = [yy for xx, yy in zip(x, y) if x0 - lo < xx < x0 + hi]
    return (oracle_quantile(kept, threshold) if kept else None), len(kept)


class TestEmpiricalQuantile:
    @pytest.mark.parametrize("p, q", [(0.5, 3), (0, 1), (1, 5), (0.25, 2), (0.1, 1.4)])
    def test_one_to_five(self, p, q):
        assert empirical_quantile([5, 3, 1, 2, 4], p) == pytest.approx(q, abs=1e-15)

    def test_matches_numpy_linear(self, rng):
        x = rng.lognormal(size=999)
        ps = np.linspace(0, 1, 41)
        np.testing.assert_allclose(empirical_quantile(x, ps), np.quantile(x, ps), rtol=1e-14)

    @pytest.mark.parametrize("p", [-0.1, 1.1, np.nan])
    def test_bad_level(self, p):
        with pytest.raises(ValidationError):
            empirical_quantile([1, 2], p)

    def test_empty(self):
        with pytest.raises(ValidationError):
            empirical_quantile([], 0.5)

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(1, 50), elements=st.floats(-1e6, 1e6)),
           st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, x, p1, p2):
        p1, p2 = min(p1, p2), max(p1, p2)
        assert empirical_quantile(x, p1) <= empirical_quantile(x, p2)


class TestReturnPeriod:
    @pytest.mark.parametrize("period, p", [(2, 0.5), (100, 0.99), (500, 0.998)])
    def test_levels(self, period, p):
        x = np.arange(10_001.0)
        assert return_period_quantile(x, period) == pytest.approx(empirical_quantile(x, p), rel=1e-12)

    @pytest.mark.parametrize("period", [1, 0.5, -3])
    def test_bad_period(self, period):
        with pytest.raises(ValidationError):
            return_period_quantile([1, 2, 3], period)


class TestRanges:
    def test_published_labels(self):
        table5 = RiskRanges.published("real")
        assert classify(705, table5) == "extreme"
        assert classify(58, table5) == "medium"
        assert classify(7, table5) == "low"
        assert RiskRanges.published("worst").breakpoints == (0, 183, 395, 837, 7092, 10126)

    def test_left_closed(self):
        table5 = RiskRanges.published("real")
        assert classify(29, table5) == "medium"
        assert classify(28.999, table5) == "low"
        assert classify(647, table5) == "extreme"
        assert classify(1e9, table5) == "extreme"

    def test_engineered_sample(self):
        # a sample whose quantiles at the range levels are the published ones
        base = np.concatenate([np.linspace(0, 29, 25, endpoint=False),
                               np.linspace(29, 61, 25, endpoint=False),
                               np.linspace(61, 105, 25, endpoint=False),
                               np.linspace(105, 647, 24, endpoint=False), [647, 740]])
        x = np.interp(np.linspace(0, 1, 10_001), np.linspace(0, 1, base.size), base)
        qs = empirical_quantile(x, [0.25, 0.5, 0.75, 0.99])
        x = np.interp(x, np.concatenate([[0], qs, [740]]), [0, 29, 61, 105, 647, 740])
        assert build_ranges(x).breakpoints == pytest.approx((0, 29, 61, 105, 647, 740), abs=1e-9)

    def test_constant_sample(self):
        r = build_ranges([4.0] * 10, "worst")
        assert r.breakpoints == (4.0,) * 6 and r.basis is Basis.WORST
        assert classify(4.0, r) == "extreme"

    def test_validation(self):
        with pytest.raises(ValidationError):
            RiskRanges((0, 1, 2))
        with pytest.raises(ValidationError):
            RiskRanges((0, 2, 1, 3, 4, 5))
        with pytest.raises(ValidationError):
            classify(-1, RiskRanges.published("real"))

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(1, 60), elements=st.floats(0, 1e5)), st.floats(0, 1))
    def test_classify_consistent_with_ranges(self, x, p):
        r = build_ranges(x)
        q = empirical_quantile(x, p)
        lo, hi = r.interval(classify(q, r))
        assert lo <= q and (q < hi or hi == np.inf)

    def test_ranges_csv_round_trip(self):
        r = RiskRanges((0.0, 1.5, 2.25, 3.0, 9.125, 10.0), Basis.WORST)
        text = format_ranges(r)
        assert text.splitlines()[0] == "quantile,risk_value,range_label"
        assert text.splitlines()[1] == "0,0.0,low"
        assert parse_ranges_text(text, "worst") == r

    def test_quantile_table(self):
        assert format_quantile_table([1, 2, 3, 4, 5], [0.5]) == "p,value\n0.5,3.0\n"


class TestEscalation:
    def test_linear_pairs(self, rng):
        x = rng.uniform(0, 100, size=20_000)
        res = escalation_estimate(RiskPairSample(x, 10 * x), EscalationQuery(50.0),
                                  RiskRanges.published("worst"))
        assert 450 < res.value < 550
        assert res.label == "high"

    def test_empty_window(self, rng):
        x = rng.uniform(0, 10, size=100)
        with pytest.raises(InsufficientSupportError, match="insufficient conditional support: 0"):
            escalation_estimate(RiskPairSample(x, x), EscalationQuery(500.0),
                                RiskRanges.published("worst"))

    def test_min_support_configurable(self):
        x = np.array([49.0, 50.0, 51.0])
        pairs = RiskPairSample(x, x)
        with pytest.raises(InsufficientSupportError):
            escalation_estimate(pairs, EscalationQuery(50.0), RiskRanges.published("worst"))
        res = escalation_estimate(pairs, EscalationQuery(50.0), RiskRanges.published("worst"),
                                  min_support=3)
        assert res.support == 3

    def test_open_window(self):
        x = np.array([45.0, 55.0] + [50.0] * 40)
        res = escalation_estimate(RiskPairSample(x, x), EscalationQuery(50.0),
                                  RiskRanges.published("worst"))
        assert res.support == 40

    @pytest.mark.parametrize("kw", [dict(window_lo=-1), dict(threshold=1.0),
                                    dict(threshold=0.0), dict(x0=float("nan"))])
    def test_query_validation(self, kw):
        with pytest.raises(ValidationError):
            EscalationQuery(**{"x0": 1.0, **kw})

    def test_matches_oracle(self, rng):
        x = np.round(rng.lognormal(3, 1, size=3000), 1)
        y = x * rng.lognormal(2, 0.5, size=3000)
        pairs = RiskPairSample(x, y)
        ranges = build_ranges(y, "worst")
        checked = 0
        for _ in range(300):
            q = EscalationQuery(float(rng.uniform(0, 150)), float(rng.uniform(0, 10)),
                                float(rng.uniform(0, 10)), float(rng.uniform(0.01, 0.99)))
            want, count = oracle_escalation(x, y, q.x0, q.window_lo, q.window_hi, q.threshold)
            if count < 30:
                with pytest.raises(InsufficientSupportError):
                    escalation_estimate(pairs, q, ranges)
                continue
            got = escalation_estimate(pairs, q, ranges)
            assert got.value == want and got.support == count
            checked += 1
        assert checked > 100

    def test_report_format(self):
        q = EscalationQuery(704.2)
        rep = EscalationReport(("hazardous substance", "confined workspace"),
                               (589.6, 114.6), 704.2, "extreme", q,
                               EscalationResult(7265.3, "extreme", 812))
        text = rep.to_text()
        assert "x0 = 590 + 115 = 705" in text
        assert "7266" in text and "support: 812" in text
        d = json.loads(rep.to_json())
        assert d["x0_display"] == 705 and d["worst_range"] == "extreme"


def test_simulated_quantiles_track_source():
    x = np.random.default_rng(21).lognormal(3.5, 1.0, size=814)
    sim = smoothed_bootstrap_uni(x, GeneratorConfig(100_000, seed=0))
    for p in (0.5, 0.8, 0.9):
        q0 = empirical_quantile(x, p)
        assert abs(empirical_quantile(sim, p) - q0) / q0 <= 0.10


def test_labels():
    assert RANGE_LABELS == ("low", "medium", "high", "very high", "extreme")
