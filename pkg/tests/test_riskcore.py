import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from safetyrisk.datamodel import AttributeCatalog, AttributeRecord, ReportMatrix
from safetyrisk.errors import ValidationError
from safetyrisk.riskcore import (
    Basis,
    RelativeRiskVector,
    attribute_relative_risk,
    attribute_total_risk,
    catalog_relative_risks,
    display_risk,
    escalation_deltas,
    format_attribute_table,
    report_risks,
    situation_risk,
)

LADDER = ["ladder", "lifting/pulling/handling", "light vehicle", "improper body position"]


class TestAttributeRisk:
    def test_worked_example_total(self):
        assert attribute_total_risk((0, 15, 10, 1, 0)) == 3664

    def test_zero_and_all_ones(self):
        assert attribute_total_risk((0, 0, 0, 0, 0)) == 0
        assert attribute_total_risk((1, 1, 1, 1, 1)) == 27490

    def test_relative_risk_examples(self):
        assert display_risk(attribute_relative_risk(3664, 0.65)) == 5637
        assert display_risk(attribute_relative_risk(3664, 0.07)) == 52343
        assert attribute_relative_risk(3664, 0.65) == pytest.approx(5636.923, abs=1e-3)
        assert attribute_relative_risk(0, 0.5) == 0

    @pytest.mark.parametrize("exposure", [0.0, -0.2, 1.5])
    def test_bad_exposure(self, exposure):
        with pytest.raises(ValidationError):
            attribute_relative_risk(10, exposure)

    def test_negative_counts(self):
        with pytest.raises(ValidationError):
            attribute_total_risk((0, -1, 0, 0, 0))

    @given(st.floats(1e-6, 1e9), st.floats(1e-3, 1.0))
    def test_exposure_halving_doubles(self, total, e):
        assert attribute_relative_risk(total, e / 2) == pytest.approx(
            2 * attribute_relative_risk(total, e), rel=1e-12)


class TestDisplay:
    def test_ceil(self):
        assert display_risk(52.97) == 53
        assert display_risk(53.0) == 53
        assert display_risk(0.0) == 0

    def test_float_noise_absorbed(self):
        assert display_risk(53 + 1e-12) == 53

    def test_array(self):
        assert display_risk(np.array([0.2, 1.0, 1.5])).tolist() == [1, 1, 2]


class TestCatalogRisks:
    def test_lumber_displays_53(self, catalog):
        assert display_risk(catalog_relative_risks(catalog, Basis.REAL)["lumber"]) == 53

    def test_zero_counts(self):
        # an attribute never seen with any severity is impossible (counts sum
        # to report_count), so zero risk needs report_count = 0
        cat = AttributeCatalog((AttributeRecord("a", 0.3, (0,) * 5, (0,) * 5, 0),))
        assert catalog_relative_risks(cat, "real").values.tolist() == [0.0]

    def test_exposure_ratio(self):
        counts = (1, 2, 0, 1, 0)
        cat = AttributeCatalog((AttributeRecord("a", 0.1, counts, counts, 4),
                                AttributeRecord("b", 0.2, counts, counts, 4)))
        rr = catalog_relative_risks(cat, "worst")
        assert rr["a"] == pytest.approx(2 * rr["b"], rel=1e-15)

    def test_vector_validation(self):
        with pytest.raises(ValidationError):
            RelativeRiskVector(np.array([1.0, -1.0]), Basis.REAL, ("a", "b"))


class TestReportRisk:
    def test_ladder_scenario(self, catalog):
        real = situation_risk(LADDER, catalog_relative_risks(catalog, Basis.REAL))
        worst = situation_risk(LADDER, catalog_relative_risks(catalog, Basis.WORST))
        assert display_risk(real) == 74
        assert display_risk(worst) == 620

    @pytest.mark.parametrize("names, expected", [
        (["hazardous substance", "confined workspace"], 705),
        (["hammer", "lumber"], 58),
        (["hand size pieces"], 7),
    ])
    def test_escalation_table_step1(self, catalog, names, expected):
        rr = catalog_relative_risks(catalog, Basis.REAL)
        assert display_risk(situation_risk(names, rr)) == expected

    def test_single_attribute_row(self, catalog):
        rr = catalog_relative_risks(catalog, Basis.REAL)
        m = ReportMatrix(np.array([[0, 1]]), ("crane", "lumber"))
        assert report_risks(m, rr).values[0] == rr["lumber"]

    def test_dimension_mismatch(self, catalog):
        rr = catalog_relative_risks(catalog, Basis.REAL)
        m = ReportMatrix(np.array([[1]]), ("nonexistent",))
        with pytest.raises(ValidationError, match="dimension mismatch"):
            report_risks(m, rr)

    def test_unknown_or_repeated_names(self, catalog):
        rr = catalog_relative_risks(catalog, Basis.REAL)
        with pytest.raises(ValidationError, match="unknown"):
            situation_risk(["nope"], rr)
        with pytest.raises(ValidationError):
            situation_risk(["lumber", "lumber"], rr)
        with pytest.raises(ValidationError):
            situation_risk([""], rr)

    @settings(max_examples=50, deadline=None)
    @given(hnp.arrays(np.uint8, (10, 10), elements=st.integers(0, 1)),
           hnp.arrays(np.float64, 10, elements=st.floats(0, 1e4)))
    def test_linearity_oracle(self, cells, values):
        cells[:, 0] = 1  # keep every report non-empty
        names = tuple(f"a{k}" for k in range(10))
        rr = RelativeRiskVector(values, Basis.REAL, names)
        got = report_risks(ReportMatrix(cells, names), rr).values
        for r in range(10):
            acc = 0.0
            for p in range(10):
                if cells[r, p]:
                    acc += values[p]
            assert got[r] == pytest.approx(acc, rel=1e-12, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(hnp.arrays(np.uint8, 8, elements=st.integers(0, 1)), st.integers(0, 7))
    def test_monotone_in_attributes(self, row, add):
        row[0] = 1
        names = tuple(f"a{k}" for k in range(8))
        rr = RelativeRiskVector(np.linspace(0, 70, 8), Basis.REAL, names)
        more = row.copy()
        more[add] = 1
        m = ReportMatrix(np.vstack([row, more]), names)
        before, after = report_risks(m, rr).values
        assert after >= before

    def test_matrix_column_order_irrelevant(self, catalog, demo_matrix):
        rr = catalog_relative_risks(catalog, Basis.WORST)
        perm = np.random.default_rng(0).permutation(demo_matrix.cols)
        shuffled = ReportMatrix(demo_matrix.cells[:, perm],
                                tuple(demo_matrix.column_names[i] for i in perm))
        np.testing.assert_allclose(report_risks(shuffled, rr).values,
                                   report_risks(demo_matrix, rr).values, rtol=1e-12)


class TestEscalationDeltas:
    def test_published_top_two(self, catalog):
        ranked = escalation_deltas(catalog)
        (n1, d1), (n2, d2) = ranked[:2]
        assert (n1, n2) == ("hazardous substance", "machinery")
        assert abs(d1 - 6059) <= 1
        assert abs(d2 - 3092) <= 1

    def test_sorted_with_name_tiebreak(self):
        c = (1, 0, 0, 0, 0)
        recs = tuple(AttributeRecord(n, 0.5, c, c, 1) for n in ("zeta", "alpha", "mid"))
        ranked = escalation_deltas(AttributeCatalog(recs))
        assert [n for n, _ in ranked] == ["alpha", "mid", "zeta"]
        assert all(d == 0 for _, d in ranked)

    @pytest.mark.parametrize("factor", [0.001, 3.0, 1234.5])
    def test_scale_equivariance(self, catalog, factor):
        scaled = AttributeCatalog(catalog.records, catalog.severity_scale.scaled(factor))
        for basis in Basis:
            np.testing.assert_allclose(catalog_relative_risks(scaled, basis).values,
                                       factor * catalog_relative_risks(catalog, basis).values,
                                       rtol=1e-12)
        base = [n for n, _ in escalation_deltas(catalog)]
        assert [n for n, _ in escalation_deltas(scaled)] == base

    def test_table_format(self, catalog):
        text = format_attribute_table(catalog)
        lines = text.splitlines()
        assert lines[0] == "name,rr_real,rr_worst,delta"
        row = next(ln for ln in lines if ln.startswith("lumber,"))
        assert row.split(",")[1] == "53"
        ranked = format_attribute_table(catalog, ranked=True).splitlines()
        assert ranked[1].startswith("hazardous substance,")
