"""Smoothed bootstrap generators with variance correction.

Each draw resamples one observation (one *pair* in the bivariate case),
adds Gaussian noise with standard deviation equal to the KDE bandwidth and
shrinks the result towards the sample mean by ``sqrt(1 + h^2 / var)`` so the
synthetic sample keeps the mean and variance of the original.

Randomness: for ``streams = k`` the draws are split into k contiguous blocks
(sizes differ by at most one, larger blocks first).  Block ``j`` uses
``numpy.random.default_rng(SeedSequence(seed).spawn(k)[j])``; output is the
concatenation of the blocks in order.  Results are therefore a pure function
of (input, seed, streams, negatives), independent of thread scheduling.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .density import silverman_bandwidth
from .errors import RejectionLimitError, ValidationError

MAX_CONSECUTIVE_REJECTS = 10**6


class Negatives(str, enum.Enum):
    REJECT = "reject"
    KEEP = "keep"


@dataclass(frozen=True)
class GeneratorConfig:
    n_sim: int
    seed: int = 0
    negatives: Negatives = Negatives.REJECT
    streams: int = 1

    def __post_init__(self):
        if int(self.n_sim) < 1:
            raise ValidationError(f"n_sim must be >= 1, got {self.n_sim}")
        if int(self.streams) < 1:
            raise ValidationError(f"streams must be >= 1, got {self.streams}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a non-negative 64-bit integer")
        object.__setattr__(self, "n_sim", int(self.n_sim))
        object.__setattr__(self, "streams", int(self.streams))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "negatives", Negatives(self.negatives))


def rank_transform(sample) -> np.ndarray:
    """Pseudo-observations ``rank / (n + 1)`` with average ranks for ties."""
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValidationError("empty sample")
    return rankdata(x, method="average") / (x.size + 1)


@dataclass(frozen=True, eq=False)
class RiskPairSample:
    """Paired real-outcome (x) and worst-outcome (y) risks.

    ``u``/``v`` hold the normal-CDF pseudo pairs recorded by the bivariate
    generator; they are None for observed data.
    """

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, copy=True).ravel()
        y = np.array(self.y, dtype=np.float64, copy=True).ravel()
        if x.size != y.size:
            raise ValidationError("x and y must have the same length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("pairs contain non-finite values")
        for arr in (x, y):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if (self.u is None) != (self.v is None):
            raise ValidationError("u and v must be given together")
        if self.u is not None:
            u = np.array(self.u, dtype=np.float64, copy=True).ravel()
            v = np.array(self.v, dtype=np.float64, copy=True).ravel()
            if u.size != x.size or v.size != x.size:
                raise ValidationError("pseudo pairs must align with x and y")
            u.setflags(write=False)
            v.setflags(write=False)
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    def __len__(self):
        return self.x.size

    @classmethod
    def from_rows(cls, rows) -> RiskPairSample:
        arr = np.asarray(rows, dtype=np.float64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def pseudo_rank(self) -> tuple[np.ndarray, np.ndarray]:
        return rank_transform(self.x), rank_transform(self.y)

    def pseudo_normal(self) -> tuple[np.ndarray, np.ndarray]:
        if self.u is not None and self.v is not None:
            return self.u, self.v
        return ndtr(self.x), ndtr(self.y)


@dataclass(frozen=True)
class _Margin:
    mean: float
    shift: float  # h, the noise standard deviation
    shrink: float  # 1 / sqrt(1 + h^2 / var)

    @classmethod
    def of(cls, values: np.ndarray) -> _Margin:
        if values.size < 2:
            raise ValidationError("generator needs at least 2 observations")
        h = silverman_bandwidth(values)
        var = float(np.var(values, ddof=1))
        return cls(float(values.mean()), h, 1.0 / np.sqrt(1.0 + h * h / var))

    def apply(self, picked: np.ndarray, noise: np.ndarray) -> np.ndarray:
        return self.mean + (picked - self.mean + self.shift * noise) * self.shrink


def _block_sizes(n_sim: int, streams: int) -> list[int]:
    base, extra = divmod(n_sim, streams)
    return [base + (1 if j < extra else 0) for j in range(streams)]


def _stream_rngs(cfg: GeneratorConfig) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.streams)]


def _draw_block(columns, margins, rng: np.random.Generator, count: int, reject: bool):
    """`count` simulated rows sharing one resampled index per row."""
    n = columns[0].size
    done = [[] for _ in columns]
    have = 0
    since_accept = 0
    while have < count:
        need = count - have
        batch = need if not reject else need + need // 8 + 16
        idx = rng.integers(0, n, size=batch)
        noise = rng.standard_normal(size=(len(columns), batch))
        sims = [m.apply(col[idx], noise[k]) for k, (col, m) in enumerate(zip(columns, margins))]
        if reject:
            ok = np.ones(batch, dtype=bool)
            for s in sims:
                ok &= s >= 0
            if not ok.any():
                since_accept += batch
                if since_accept > MAX_CONSECUTIVE_REJECTS:
                    raise RejectionLimitError(
                        f"more than {MAX_CONSECUTIVE_REJECTS} consecutive negative draws")
                continue
            since_accept = 0
            sims = [s[ok] for s in sims]
        take = min(need, sims[0].size)
        for k, s in enumerate(sims):
            done[k].append(s[:take])
        have += take
    return [np.concatenate(d) if d else np.empty(0) for d in done]


def _generate(columns, cfg: GeneratorConfig):
    margins = [_Margin.of(c) for c in columns]
    reject = cfg.negatives is Negatives.REJECT
    sizes = _block_sizes(cfg.n_sim, cfg.streams)
    rngs = _stream_rngs(cfg)
    jobs = [(rng, size) for rng, size in zip(rngs, sizes) if size > 0]
    if len(jobs) == 1:
        blocks = [_draw_block(columns, margins, jobs[0][0], jobs[0][1], reject)]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            blocks = list(pool.map(
                lambda job: _draw_block(columns, margins, job[0], job[1], reject), jobs))
    return [np.concatenate([b[k] for b in blocks]) for k in range(len(columns))]


def _column(values, what: str) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValidationError(f"{what}: generator needs at least 2 observations")
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{what}: non-finite values")
    return x


def smoothed_bootstrap_uni(sample, cfg: GeneratorConfig) -> np.ndarray:
    """Exactly ``cfg.n_sim`` synthetic values from `sample`.

    In ``reject`` mode negative draws are discarded and replaced.
    """
    (out,) = _generate([_column(sample, "sample")], cfg)
    return out


def smoothed_bootstrap_biv(pairs: RiskPairSample, cfg: GeneratorConfig) -> RiskPairSample:
    """Synthetic pairs resampling whole (x, y) pairs.

    Noise is independent per coordinate; in ``reject`` mode a pair is
    discarded when either coordinate is negative.  The returned sample's
    ``u``/``v`` are the standard normal CDF of the simulated values.
    """
    x, y = _generate([_column(pairs.x, "x"), _column(pairs.y, "y")], cfg)
    return RiskPairSample(x, y, u=ndtr(x), v=ndtr(y))
