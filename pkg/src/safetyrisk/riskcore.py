"""Attribute- and report-level relative risk.

Risk of an attribute is its severity-weighted injury count divided by its
onsite exposure; the risk of a report is the sum over the attributes present
in it.  Everything is computed on unrounded values; :func:`display_risk`
applies the ceiling used when values are shown.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datamodel import AttributeCatalog, ReportMatrix, SeverityScale
from .errors import ValidationError

# absorbs float noise so that e.g. 53.000000000001 still displays as 53
_DISPLAY_EPS = 1e-9


class Basis(str, enum.Enum):
    REAL = "real"
    WORST = "worst"


@dataclass(frozen=True, eq=False)
class RelativeRiskVector:
    values: np.ndarray
    basis: Basis
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 1 or values.size != len(self.names):
            raise ValidationError("relative risk vector must align with attribute names")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValidationError("relative risks must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "basis", Basis(self.basis))
        object.__setattr__(self, "names", tuple(self.names))

    def __len__(self):
        return self.values.size

    def __getitem__(self, name: str) -> float:
        try:
            return float(self.values[self.names.index(name)])
        except ValueError:
            raise ValidationError(f"unknown attribute {name!r}") from None


@dataclass(frozen=True, eq=False)
class RiskSample:
    """One risk value per report."""

    values: np.ndarray
    basis: Basis

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 1:
            raise ValidationError("risk sample must be one-dimensional")
        if np.any(values < 0):
            raise ValidationError("risk cannot be negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "basis", Basis(self.basis))

    def __len__(self):
        return self.values.size


def display_risk(value):
    """Round a risk up to the nearest integer for display."""
    if np.ndim(value):
        return np.ceil(np.asarray(value, dtype=np.float64) - _DISPLAY_EPS).astype(np.int64)
    return int(math.ceil(float(value) - _DISPLAY_EPS))


def attribute_total_risk(counts: Sequence[int], scale: SeverityScale | None = None) -> float:
    """Severity-weighted injury count, ``sum(n_s * S_s)``."""
    scale = scale or SeverityScale.default()
    c = np.asarray(counts, dtype=np.float64)
    if c.shape != (5,):
        raise ValidationError(f"expected 5 severity counts, got shape {c.shape}")
    if np.any(c < 0):
        raise ValidationError("severity counts must be non-negative")
    return float(np.dot(c, scale.as_array()))


def attribute_relative_risk(total_risk: float, exposure: float) -> float:
    if not (exposure > 0):
        raise ValidationError(f"exposure must be positive, got {exposure}")
    if exposure > 1:
        raise ValidationError(f"exposure is a probability, got {exposure}")
    if total_risk < 0:
        raise ValidationError("total risk cannot be negative")
    return total_risk / exposure


def catalog_relative_risks(catalog: AttributeCatalog, basis: Basis | str) -> RelativeRiskVector:
    basis = Basis(basis)
    vals = []
    for rec in catalog:
        counts = rec.severity_counts_real if basis is Basis.REAL else rec.severity_counts_worst
        vals.append(attribute_relative_risk(
            attribute_total_risk(counts, catalog.severity_scale), rec.exposure))
    return RelativeRiskVector(np.array(vals), basis, catalog.names)


def _column_index(matrix: ReportMatrix, rr: RelativeRiskVector) -> np.ndarray:
    lookup = {n: i for i, n in enumerate(rr.names)}
    missing = [n for n in matrix.column_names if n not in lookup]
    if missing:
        raise ValidationError(
            f"dimension mismatch: matrix columns not in risk vector: {', '.join(missing)}")
    return np.array([lookup[n] for n in matrix.column_names], dtype=np.intp)


def report_risks(matrix: ReportMatrix, rr: RelativeRiskVector) -> RiskSample:
    """Sum of the relative risks of the attributes present in each report.

    Matrix columns are matched to the risk vector by attribute name, so the
    matrix may carry any subset of the catalog in any order.
    """
    idx = _column_index(matrix, rr)
    weights = rr.values[idx]
    return RiskSample(matrix.cells.astype(np.float64) @ weights, rr.basis)


def situation_risk(names: Sequence[str], rr: RelativeRiskVector) -> float:
    """Risk of a single situation given the attribute names observed in it."""
    names = [n.strip() for n in names if n.strip()]
    if not names:
        raise ValidationError("no attributes given")
    unknown = [n for n in names if n not in set(rr.names)]
    if unknown:
        raise ValidationError(f"unknown attribute(s): {', '.join(unknown)}")
    if len(set(names)) != len(names):
        raise ValidationError("attribute listed more than once")
    return float(sum(rr[n] for n in names))


def escalation_deltas(catalog: AttributeCatalog) -> list[tuple[str, float]]:
    """Worst-minus-real relative risk per attribute, largest first.

    Ties are broken by attribute name so the ranking is deterministic.
    """
    real = catalog_relative_risks(catalog, Basis.REAL).values
    worst = catalog_relative_risks(catalog, Basis.WORST).values
    deltas = [(name, float(w - r)) for name, r, w in zip(catalog.names, real, worst)]
    return sorted(deltas, key=lambda t: (-t[1], t[0]))


def format_attribute_table(catalog: AttributeCatalog, raw: bool = False,
                           ranked: bool = False) -> str:
    """CSV ``name,rr_real,rr_worst,delta``; display-rounded unless `raw`."""
    real = catalog_relative_risks(catalog, Basis.REAL)
    worst = catalog_relative_risks(catalog, Basis.WORST)
    rows = [(n, r, w, w - r) for n, r, w in zip(catalog.names, real.values, worst.values)]
    if ranked:
        rows.sort(key=lambda t: (-t[3], t[0]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "rr_real", "rr_worst", "delta"])
    for name, r, wv, d in rows:
        if raw:
            w.writerow([name, repr(float(r)), repr(float(wv)), repr(float(d))])
        else:
            w.writerow([name, display_risk(r), display_risk(wv), display_risk(d)])
    return buf.getvalue()


def format_report_risks(real: RiskSample, worst: RiskSample) -> str:
    if len(real) != len(worst):
        raise ValidationError("real and worst samples differ in length")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["report_index", "risk_real", "risk_worst"])
    for i, (r, wv) in enumerate(zip(real.values, worst.values)):
        w.writerow([i, repr(float(r)), repr(float(wv))])
    return buf.getvalue()
