"""Quantiles, return periods, risk ranges and escalation queries."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .density import linear_quantile
from .errors import InsufficientSupportError, ValidationError
from .riskcore import Basis, display_risk
from .simgen import RiskPairSample

RANGE_LEVELS = (0.0, 0.25, 0.50, 0.75, 0.99, 1.0)
RANGE_LABELS = ("low", "medium", "high", "very high", "extreme")

# breakpoints proposed from the published 10^5-value simulations; reference
# values only, the generating data set is not public
PUBLISHED_REAL_BREAKPOINTS = (0.0, 29.0, 61.0, 105.0, 647.0, 740.0)
PUBLISHED_WORST_BREAKPOINTS = (0.0, 183.0, 395.0, 837.0, 7092.0, 10126.0)

DEFAULT_MIN_SUPPORT = 30


def _sorted_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValidationError("empty sample")
    if np.isnan(x).any():
        raise ValidationError("sample contains NaN")
    return np.sort(x)


def empirical_quantile(sample, p):
    """Sample quantile, linear interpolation between order statistics.

    The value at level p sits at position ``(n - 1) * p + 1`` (1-based) in
    the sorted sample.  `p` may be a scalar or an array.
    """
    pa = np.asarray(p, dtype=np.float64)
    if np.any((pa < 0) | (pa > 1)) or np.isnan(pa).any():
        raise ValidationError(f"quantile level must lie in [0, 1], got {p}")
    q = linear_quantile(_sorted_sample(sample), pa)
    return float(q) if np.ndim(q) == 0 else q


def return_period_quantile(sample, period: float) -> float:
    """Value exceeded on average once every `period` observations."""
    if not period > 1:
        raise ValidationError(f"return period must exceed 1, got {period}")
    return empirical_quantile(sample, 1.0 - 1.0 / period)


@dataclass(frozen=True)
class RiskRanges:
    breakpoints: tuple[float, ...]
    basis: Basis = Basis.REAL
    labels: tuple[str, ...] = RANGE_LABELS

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        if len(bp) != len(RANGE_LEVELS):
            raise ValidationError(f"expected {len(RANGE_LEVELS)} breakpoints, got {len(bp)}")
        if any(b < a for a, b in zip(bp, bp[1:])):
            raise ValidationError("breakpoints must be non-decreasing")
        if len(self.labels) != len(bp) - 1:
            raise ValidationError("need exactly one label per interval")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "basis", Basis(self.basis))

    @classmethod
    def published(cls, basis: Basis | str) -> RiskRanges:
        basis = Basis(basis)
        bp = PUBLISHED_REAL_BREAKPOINTS if basis is Basis.REAL else PUBLISHED_WORST_BREAKPOINTS
        return cls(bp, basis)

    def interval(self, label: str) -> tuple[float, float]:
        k = self.labels.index(label)
        hi = math.inf if k == len(self.labels) - 1 else self.breakpoints[k + 1]
        return self.breakpoints[k], hi


def build_ranges(sample, basis: Basis | str = Basis.REAL) -> RiskRanges:
    """Breakpoints at the 0, 0.25, 0.5, 0.75, 0.99 and 1 quantiles."""
    qs = empirical_quantile(sample, np.array(RANGE_LEVELS))
    return RiskRanges(tuple(float(q) for q in qs), Basis(basis))


def classify(value: float, ranges: RiskRanges) -> str:
    """Label of the left-closed interval containing `value`.

    The top interval is unbounded above; values below the first breakpoint
    are ``low``.  With repeated breakpoints the highest matching label wins.
    """
    if value < 0:
        raise ValidationError("risk cannot be negative")
    bp = ranges.breakpoints
    k = 0
    for i in range(len(ranges.labels)):
        if bp[i] <= value:
            k = i
    return ranges.labels[k]


@dataclass(frozen=True)
class EscalationQuery:
    x0: float
    window_lo: float = 5.0
    window_hi: float = 5.0
    threshold: float = 0.8

    def __post_init__(self):
        if not (self.window_lo >= 0 and self.window_hi >= 0):
            raise ValidationError("window widths must be non-negative")
        if not 0 < self.threshold < 1:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not math.isfinite(self.x0):
            raise ValidationError("x0 must be finite")


@dataclass(frozen=True)
class EscalationResult:
    value: float
    label: str
    support: int


def escalation_estimate(pairs: RiskPairSample, query: EscalationQuery,
                        worst_ranges: RiskRanges,
                        min_support: int = DEFAULT_MIN_SUPPORT) -> EscalationResult:
    """Conditional quantile of worst-outcome risk near an observed real risk.

    Keeps the pairs with ``x0 - window_lo < x < x0 + window_hi`` and
    evaluates the quantile of their y values at ``query.threshold``.
    """
    if len(pairs) == 0:
        raise ValidationError("no simulated pairs")
    lo = query.x0 - query.window_lo
    hi = query.x0 + query.window_hi
    mask = (pairs.x > lo) & (pairs.x < hi)
    count = int(mask.sum())
    if count < max(int(min_support), 1):
        raise InsufficientSupportError(count, int(min_support))
    value = empirical_quantile(pairs.y[mask], query.threshold)
    return EscalationResult(value, classify(max(value, 0.0), worst_ranges), count)


@dataclass(frozen=True)
class EscalationReport:
    attributes: tuple[str, ...]
    attribute_risks: tuple[float, ...]
    x0: float
    real_label: str
    query: EscalationQuery
    result: EscalationResult

    def to_dict(self) -> dict:
        return {
            "attributes": list(self.attributes),
            "attribute_risks": list(self.attribute_risks),
            "x0": self.x0,
            "x0_display": display_risk(self.x0),
            "real_range": self.real_label,
            "window_lo": self.query.window_lo,
            "window_hi": self.query.window_hi,
            "threshold": self.query.threshold,
            "conditional_quantile": self.result.value,
            "conditional_quantile_display": display_risk(max(self.result.value, 0.0)),
            "worst_range": self.result.label,
            "support": self.result.support,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        pct = f"{self.query.threshold * 100:g}%"
        x0 = display_risk(self.x0)
        parts = [str(display_risk(r)) for r in self.attribute_risks]
        step1 = f"{' + '.join(parts)} = {x0}" if len(parts) > 1 else f"{x0}"
        return (
            f"attributes: {', '.join(self.attributes)}\n"
            f"step 1  prior evidence (real outcomes): x0 = {step1}  range: {self.real_label}\n"
            f"step 2  conditional quantile Q({self.query.threshold:g}) of worst-outcome risk "
            f"given {self.x0 - self.query.window_lo:g} < X < {self.x0 + self.query.window_hi:g}: "
            f"{display_risk(max(self.result.value, 0.0))}  range: {self.result.label}\n"
            f"support: {self.result.support} simulated pairs; exceeded in "
            f"{100 - self.query.threshold * 100:g}% of cases (threshold {pct})\n"
        )


def format_ranges(ranges: RiskRanges) -> str:
    lines = ["quantile,risk_value,range_label"]
    for k, (level, bp) in enumerate(zip(RANGE_LEVELS, ranges.breakpoints)):
        label = ranges.labels[k] if k < len(ranges.labels) else ""
        lines.append(f"{level:g},{bp!r},{label}")
    return "\n".join(lines) + "\n"


def parse_ranges_text(text: str, basis: Basis | str = Basis.REAL) -> RiskRanges:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or rows[0] != "quantile,risk_value,range_label":
        raise ValidationError("ranges file must start with quantile,risk_value,range_label")
    bps = []
    for ln in rows[1:]:
        parts = ln.split(",")
        try:
            bps.append(float(parts[1]))
        except (IndexError, ValueError):
            raise ValidationError(f"malformed ranges row {ln!r}") from None
    return RiskRanges(tuple(bps), Basis(basis))


def format_quantile_table(sample, levels) -> str:
    qs = empirical_quantile(sample, np.asarray(levels, dtype=np.float64))
    lines = ["p,value"]
    for p, q in zip(np.atleast_1d(levels), np.atleast_1d(qs)):
        lines.append(f"{float(p)!r},{float(q)!r}")
    return "\n".join(lines) + "\n"

