"""Attribute catalogs, report matrices and their CSV formats.

Catalog CSV columns::

    name,report_count,exposure_pct,real_s1..real_s5,worst_s1..worst_s5

Lines starting with ``#`` before the header are comments.  A comment of the
form ``# severity_scale: a,b,c,d,e`` sets the impact scores the catalog was
built against; it is overridden by an explicit ``scale`` argument.

Matrix CSV: a header of attribute names followed by rows of ``0``/``1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

SEVERITY_LEVELS = (
    "Pain",
    "First Aid",
    "Medical Case/Lost Work Time",
    "Permanent Disablement",
    "Fatality",
)
DEFAULT_SCORES = (12.0, 48.0, 192.0, 1024.0, 26214.0)

CATALOG_HEADER = (
    ["name", "report_count", "exposure_pct"]
    + [f"real_s{i}" for i in range(1, 6)]
    + [f"worst_s{i}" for i in range(1, 6)]
)
DEMO_CATALOG = "table1_demo.csv"
_SCALE_DIRECTIVE = "severity_scale:"


@dataclass(frozen=True)
class SeverityScale:
    """Impact score per severity level, Pain through Fatality."""

    scores: tuple[float, ...] = DEFAULT_SCORES

    def __post_init__(self):
        scores = tuple(float(s) for s in self.scores)
        if len(scores) != 5:
            raise ValidationError(f"severity scale needs 5 scores, got {len(scores)}")
        if any(not np.isfinite(s) or s <= 0 for s in scores):
            raise ValidationError("severity scores must be positive")
        if any(b <= a for a, b in zip(scores, scores[1:])):
            raise ValidationError("severity scores must be strictly increasing")
        object.__setattr__(self, "scores", scores)

    @classmethod
    def default(cls) -> SeverityScale:
        return cls(DEFAULT_SCORES)

    def scaled(self, factor: float) -> SeverityScale:
        return SeverityScale(tuple(s * factor for s in self.scores))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=np.float64)


def _counts(values: Iterable[int], what: str) -> tuple[int, ...]:
    out = tuple(int(v) for v in values)
    if len(out) != 5:
        raise ValidationError(f"{what}: expected 5 severity counts, got {len(out)}")
    if any(v < 0 for v in out):
        raise ValidationError(f"{what}: severity counts must be non-negative")
    return out


@dataclass(frozen=True)
class AttributeRecord:
    """One injury precursor with its severity counts and onsite exposure."""

    name: str
    exposure: float
    severity_counts_real: tuple[int, ...]
    severity_counts_worst: tuple[int, ...]
    report_count: int

    def __post_init__(self):
        if not self.name or self.name != self.name.strip():
            raise ValidationError(f"invalid attribute name {self.name!r}")
        exposure = float(self.exposure)
        if not (0.0 < exposure <= 1.0):
            raise ValidationError(
                f"{self.name}: exposure must lie in (0, 1], got {exposure}")
        real = _counts(self.severity_counts_real, self.name)
        worst = _counts(self.severity_counts_worst, self.name)
        n = int(self.report_count)
        if sum(real) != n or sum(worst) != n:
            raise ValidationError(
                f"{self.name}: severity counts (real {sum(real)}, worst "
                f"{sum(worst)}) must both sum to report_count {n}")
        object.__setattr__(self, "exposure", exposure)
        object.__setattr__(self, "severity_counts_real", real)
        object.__setattr__(self, "severity_counts_worst", worst)
        object.__setattr__(self, "report_count", n)


@dataclass(frozen=True)
class AttributeCatalog:
    records: tuple[AttributeRecord, ...]
    severity_scale: SeverityScale = field(default_factory=SeverityScale.default)

    def __post_init__(self):
        records = tuple(self.records)
        if not records:
            raise ValidationError("empty catalog")
        seen = set()
        for rec in records:
            if rec.name in seen:
                raise ValidationError(f"duplicate attribute name {rec.name!r}")
            seen.add(rec.name)
        object.__setattr__(self, "records", records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.records)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown attribute {name!r}") from None

    def __getitem__(self, name: str) -> AttributeRecord:
        return self.records[self.index(name)]


@dataclass(frozen=True, eq=False)
class ReportMatrix:
    """Binary report-by-attribute presence matrix.

    ``synthetic`` marks matrices produced by :func:`generate_demo_matrix`.
    ``dropped`` counts attribute-less rows removed in non-strict parsing.
    """

    cells: np.ndarray
    column_names: tuple[str, ...]
    synthetic: bool = False
    dropped: int = 0

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.uint8, copy=True)
        if cells.ndim != 2:
            raise ValidationError("report matrix must be two-dimensional")
        names = tuple(self.column_names)
        if cells.shape[1] != len(names):
            raise ValidationError(
                f"{cells.shape[1]} columns but {len(names)} column names")
        if len(set(names)) != len(names):
            raise ValidationError("duplicate column names in report matrix")
        if cells.size and cells.max() > 1:
            raise ValidationError("non-binary cell")
        empty = np.flatnonzero(cells.sum(axis=1) == 0)
        if empty.size:
            raise ValidationError(
                f"report with no attributes (row {int(empty[0])})")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "column_names", names)

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ReportMatrix):
            return NotImplemented
        return (self.column_names == other.column_names
                and np.array_equal(self.cells, other.cells))

    def check_against(self, catalog: AttributeCatalog) -> None:
        unknown = [n for n in self.column_names if n not in set(catalog.names)]
        if unknown:
            raise ValidationError(f"unknown column name(s): {', '.join(unknown)}")


def _split_comments(text: str) -> tuple[list[str], list[str]]:
    comments, lines = [], []
    body = False
    for line in text.splitlines():
        if not body and line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        body = True
        lines.append(line)
    return comments, lines


def _scale_from_comments(comments: Sequence[str]) -> SeverityScale | None:
    for c in comments:
        if c.startswith(_SCALE_DIRECTIVE):
            raw = c[len(_SCALE_DIRECTIVE):].split(",")
            try:
                return SeverityScale(tuple(float(v) for v in raw))
            except ValueError as exc:
                raise ValidationError(f"bad severity_scale comment: {exc}") from None
    return None


def _read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def parse_catalog_text(text: str, scale: SeverityScale | None = None) -> AttributeCatalog:
    comments, lines = _split_comments(text)
    rows = [r for r in csv.reader(lines)]
    # the first body line is the header; report data lines by file line number
    offset = len(comments) + 1
    if not rows or all(not r for r in rows):
        raise ValidationError("empty catalog")
    header = [h.strip() for h in rows[0]]
    if header != CATALOG_HEADER:
        raise ValidationError(
            f"line {offset}: catalog header must be {','.join(CATALOG_HEADER)}")
    records = []
    for k, row in enumerate(rows[1:], start=offset + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CATALOG_HEADER):
            raise ValidationError(
                f"line {k}: expected {len(CATALOG_HEADER)} fields, got {len(row)}")
        try:
            name = row[0].strip()
            report_count = int(row[1])
            exposure_pct = float(row[2])
            counts = [int(v) for v in row[3:]]
        except ValueError as exc:
            raise ValidationError(f"line {k}: malformed row ({exc})") from None
        if not (0.0 < exposure_pct <= 100.0):
            raise ValidationError(
                f"line {k}: exposure_pct must lie in (0, 100], got {row[2].strip()}")
        try:
            records.append(AttributeRecord(
                name=name,
                exposure=exposure_pct / 100.0,
                severity_counts_real=tuple(counts[:5]),
                severity_counts_worst=tuple(counts[5:]),
                report_count=report_count,
            ))
        except ValidationError as exc:
            raise ValidationError(f"line {k}: {exc}") from None
    if not records:
        raise ValidationError("empty catalog")
    if scale is None:
        scale = _scale_from_comments(comments) or SeverityScale.default()
    return AttributeCatalog(tuple(records), scale)


def parse_catalog(path, scale: SeverityScale | None = None) -> AttributeCatalog:
    """Read and validate an attribute catalog CSV.

    Exposure is given in percent and stored as a fraction.  Without an
    explicit `scale` the file's ``severity_scale`` comment is used, falling
    back to the default impact scores.
    """
    return parse_catalog_text(_read_text(path), scale)


def _pct_text(exposure: float) -> str:
    # percent text whose parse (x / 100) reproduces `exposure` bit for bit
    guess = exposure * 100.0
    candidates = [guess]
    lo = hi = guess
    for _ in range(4):
        lo, hi = np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)
        candidates += [float(lo), float(hi)]
    for c in sorted(candidates, key=lambda v: len(repr(v))):
        if c / 100.0 == exposure:
            return repr(c)
    return repr(guess)


def format_catalog(catalog: AttributeCatalog) -> str:
    buf = io.StringIO()
    scores = ",".join(repr(s) for s in catalog.severity_scale.scores)
    buf.write(f"# {_SCALE_DIRECTIVE} {scores}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CATALOG_HEADER)
    for r in catalog:
        w.writerow([r.name, r.report_count, _pct_text(r.exposure),
                    *r.severity_counts_real, *r.severity_counts_worst])
    return buf.getvalue()


def write_catalog(catalog: AttributeCatalog, path) -> None:
    Path(path).write_text(format_catalog(catalog), encoding="utf-8")


def load_demo_catalog() -> AttributeCatalog:
    """The bundled synthetic catalog transcribing the published attribute table.

    Names, report counts and exposures are transcribed; the per-severity
    counts are a synthetic back-fill (see ``tools/backfill_demo_catalog.py``)
    on a rescaled severity scale, chosen so ceiling-rounded relative risks
    reproduce the published values.
    """
    text = resources.files("safetyrisk").joinpath("data", DEMO_CATALOG).read_text("utf-8")
    return parse_catalog_text(text)


def demo_catalog_path():
    return resources.files("safetyrisk").joinpath("data", DEMO_CATALOG)


def parse_report_matrix_text(text: str, catalog: AttributeCatalog,
                             strict: bool = True) -> ReportMatrix:
    comments, lines = _split_comments(text)
    rows = [r for r in csv.reader(lines) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("empty report matrix")
    names = tuple(h.strip() for h in rows[0])
    known = set(catalog.names)
    unknown = [n for n in names if n not in known]
    if unknown:
        raise ValidationError(f"unknown column name(s): {', '.join(unknown)}")
    offset = len(comments) + 1
    data = []
    dropped = 0
    for k, row in enumerate(rows[1:], start=offset + 1):
        if len(row) != len(names):
            raise ValidationError(f"line {k}: expected {len(names)} cells, got {len(row)}")
        cells = [c.strip() for c in row]
        bad = [c for c in cells if c not in ("0", "1")]
        if bad:
            raise ValidationError(f"line {k}: non-binary cell {bad[0]!r}")
        vals = [int(c) for c in cells]
        if not any(vals):
            if strict:
                raise ValidationError(f"line {k}: report with no attributes")
            dropped += 1
            continue
        data.append(vals)
    if not data:
        raise ValidationError("report matrix has no usable rows")
    synthetic = any(c.startswith("synthetic") for c in comments)
    return ReportMatrix(np.array(data, dtype=np.uint8), names,
                        synthetic=synthetic, dropped=dropped)


def parse_report_matrix(path, catalog: AttributeCatalog, strict: bool = True) -> ReportMatrix:
    """Read a 0/1 report matrix CSV and validate it against `catalog`.

    All-zero rows raise in strict mode and are dropped (and counted in
    ``ReportMatrix.dropped``) otherwise.
    """
    return parse_report_matrix_text(_read_text(path), catalog, strict)


def format_report_matrix(matrix: ReportMatrix, header_comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in header_comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(matrix.column_names)
    for row in matrix.cells:
        w.writerow([int(v) for v in row])
    return buf.getvalue()


def write_report_matrix(matrix: ReportMatrix, path, header_comments: Sequence[str] = ()) -> None:
    Path(path).write_text(format_report_matrix(matrix, header_comments), encoding="utf-8")


def generate_demo_matrix(catalog: AttributeCatalog, n_reports: int, seed: int) -> ReportMatrix:
    """Synthetic report matrix for demos and tests.

    Each report holds 1 to 5 distinct attributes (uniform), drawn without
    replacement with probability proportional to catalog ``report_count``.
    """
    if int(n_reports) < 1:
        raise ValidationError(f"n_reports must be >= 1, got {n_reports}")
    if int(seed) < 0:
        raise ValidationError("seed must be non-negative")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    weights = np.array([r.report_count for r in catalog], dtype=np.float64)
    if weights.sum() <= 0:
        weights = np.ones_like(weights)
    p = weights / weights.sum()
    available = int(np.count_nonzero(p))
    cells = np.zeros((int(n_reports), len(catalog)), dtype=np.uint8)
    sizes = rng.integers(1, 6, size=int(n_reports))
    for r, k in enumerate(sizes):
        chosen = rng.choice(len(catalog), size=min(int(k), available), replace=False, p=p)
        cells[r, chosen] = 1
    return ReportMatrix(cells, catalog.names, synthetic=True)
