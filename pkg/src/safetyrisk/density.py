"""Gaussian kernel density estimation with boundary correction.

The plain estimator uses a standard normal kernel with Silverman's
rule-of-thumb bandwidth.  Bounded supports are handled by the transformation
trick: the sample is mapped to the real line by a smooth increasing ``T``
(``log`` on the half-line, the standard normal quantile function on the unit
interval), estimated there with its own bandwidth, and mapped back with the
Jacobian ``|T'(x)|``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import ndtri

from . import _backend
from .errors import ValidationError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Support(str, enum.Enum):
    REAL_LINE = "real_line"
    NONNEG_HALFLINE = "nonneg_halfline"
    UNIT_INTERVAL = "unit_interval"


def _as_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValidationError("empty sample")
    if not np.all(np.isfinite(x)):
        raise ValidationError("sample contains non-finite values")
    return x


def linear_quantile(sorted_x: np.ndarray, p):
    """Order-statistic quantile with linear interpolation at (n-1)p."""
    n = sorted_x.size
    pos = (n - 1) * np.asarray(p, dtype=np.float64)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n - 1)
    frac = pos - lo
    return sorted_x[lo] + frac * (sorted_x[hi] - sorted_x[lo])


def silverman_bandwidth(sample) -> float:
    """``0.9 * min(sd, IQR / 1.34) * n ** (-1/5)``.

    The standard deviation uses the n-1 denominator and the quartiles linear
    interpolation.  When the IQR is zero but the sample is not constant the
    standard deviation alone is used.
    """
    x = _as_sample(sample)
    if x.size < 2:
        raise ValidationError("bandwidth needs at least 2 observations")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise ValidationError("zero dispersion")
    q1, q3 = linear_quantile(np.sort(x), [0.25, 0.75])
    iqr = float(q3 - q1) / 1.34
    spread = min(sd, iqr) if iqr > 0 else sd
    return 0.9 * spread * x.size ** (-0.2)


def _transform(support: Support, x):
    if support is Support.NONNEG_HALFLINE:
        return np.log(x)
    if support is Support.UNIT_INTERVAL:
        return ndtri(x)
    return x


def _jacobian(support: Support, x):
    # |T'(x)| at points strictly inside the support
    if support is Support.NONNEG_HALFLINE:
        return 1.0 / x
    if support is Support.UNIT_INTERVAL:
        z = ndtri(x)
        return _SQRT_2PI * np.exp(0.5 * z * z)
    return np.ones_like(x)


def _inside(support: Support, x):
    if support is Support.NONNEG_HALFLINE:
        return x > 0
    if support is Support.UNIT_INTERVAL:
        return (x > 0) & (x < 1)
    return np.isfinite(x)


@dataclass(frozen=True, eq=False)
class KdeModel:
    """Observations, bandwidth and support of a Gaussian KDE."""

    observations: np.ndarray
    bandwidth: float
    support: Support = Support.REAL_LINE

    def __post_init__(self):
        obs = np.sort(_as_sample(self.observations))
        obs.setflags(write=False)
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ValidationError(f"bandwidth must be positive, got {self.bandwidth}")
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "support", Support(self.support))

    @classmethod
    def fit(cls, sample, support: Support | str = Support.REAL_LINE) -> KdeModel:
        """Model with the Silverman bandwidth of `sample`."""
        return cls(_as_sample(sample), silverman_bandwidth(sample), Support(support))

    @property
    def n(self) -> int:
        return self.observations.size

    @cached_property
    def transformed(self) -> KdeModel:
        """The real-line model fitted to ``T(observations)``."""
        if self.support is Support.REAL_LINE:
            return self
        obs = self.observations
        if not np.all(_inside(self.support, obs)):
            raise ValidationError(
                f"observations must lie strictly inside the {self.support.value} support")
        t = _transform(self.support, obs)
        return KdeModel(t, silverman_bandwidth(t), Support.REAL_LINE)


def kde_pdf(model: KdeModel, x):
    """Plain Gaussian KDE at `x` (scalar or array), ignoring the support."""
    xs = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(xs.ravel())
    sums = _backend.gauss_kernel_sum(model.observations, flat, model.bandwidth)
    dens = (sums / (model.n * model.bandwidth * _SQRT_2PI)).reshape(xs.shape)
    return float(dens) if dens.ndim == 0 else dens


def kde_pdf_corrected(model: KdeModel, x):
    """Boundary-corrected density at `x`.

    Returns ``(density, outside)``: points outside the open support get
    density 0 and ``outside=True``.  On the real line this is ``kde_pdf``.
    """
    xs = np.asarray(x, dtype=np.float64)
    inside = _inside(model.support, xs)
    dens = np.zeros(xs.shape)
    if model.support is Support.REAL_LINE:
        dens = np.asarray(kde_pdf(model, xs), dtype=np.float64)
    elif np.any(inside):
        tm = model.transformed
        xi = xs[inside]
        dens[inside] = np.asarray(kde_pdf(tm, _transform(model.support, xi))) \
            * _jacobian(model.support, xi)
    outside = ~inside
    if dens.ndim == 0:
        return float(dens), bool(outside)
    return dens, outside


def rescale(sample) -> np.ndarray:
    """Min-max rescaling to [0, 1]."""
    x = _as_sample(sample)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise ValidationError("cannot rescale a constant sample")
    return (x - lo) / (hi - lo)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    x: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        d = np.asarray(self.density, dtype=np.float64)
        if x.shape != d.shape or x.ndim != 1:
            raise ValidationError("grid points and densities must align")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("grid points must be strictly increasing")
        if np.any(d < 0):
            raise ValidationError("densities must be non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "density", d)

    def integral(self) -> float:
        return float(trapezoid(self.density, self.x))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density"])
        for xv, dv in zip(self.x, self.density):
            w.writerow([repr(float(xv)), repr(float(dv))])
        return buf.getvalue()


def default_grid_range(model: KdeModel) -> tuple[float, float]:
    """``[max(0, min - 3h), max + 3h]`` on bounded-below supports, else ±3h."""
    h = model.bandwidth
    lo = float(model.observations[0]) - 3 * h
    hi = float(model.observations[-1]) + 3 * h
    if model.support is not Support.REAL_LINE:
        lo = max(0.0, lo)
    if model.support is Support.UNIT_INTERVAL:
        hi = min(1.0, hi)
    return lo, hi


def density_grid(model: KdeModel, lo: float | None = None, hi: float | None = None,
                 n_points: int = 512, corrected: bool = False) -> DensityGrid:
    """Evenly spaced evaluations of the plain or corrected estimate."""
    if lo is None or hi is None:
        dlo, dhi = default_grid_range(model)
        lo = dlo if lo is None else lo
        hi = dhi if hi is None else hi
    if not lo < hi:
        raise ValidationError(f"grid needs lo < hi, got [{lo}, {hi}]")
    if int(n_points) < 2:
        raise ValidationError("grid needs at least 2 points")
    xs = np.linspace(lo, hi, int(n_points))
    if corrected:
        dens, _ = kde_pdf_corrected(model, xs)
    else:
        dens = kde_pdf(model, xs)
    return DensityGrid(xs, dens)


def histogram(sample, bins: int | None = None) -> list[tuple[float, float, int]]:
    """``(bin_lo, bin_hi, count)`` rows; Sturges bins by default."""
    x = _as_sample(sample)
    counts, edges = np.histogram(x, bins=bins if bins else "sturges")
    return [(float(a), float(b), int(c)) for a, b, c in zip(edges[:-1], edges[1:], counts)]


def format_histogram(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count"])
    for a, b, c in rows:
        w.writerow([repr(a), repr(b), c])
    return buf.getvalue()
