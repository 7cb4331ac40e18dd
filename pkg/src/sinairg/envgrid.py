"""Discrete two-sided Brownian environments and their x-extrema.

A :class:`Path` holds ``w`` sampled on a uniform grid with ``w(0) = 0``.
:func:`extract_slopes` applies the x-extremum definition to the
piecewise-linear interpolant of the samples, so extrema are always grid
points.  Only extrema whose two witnesses lie inside the sampled domain are
reported.

Ties between equal sample values resolve to the leftmost point: a minimum
needs strictly larger values on its left up to the witness and allows equal
values on its right (mirrored for maxima).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numba
import numpy as np

from . import streams
from .errors import InsufficientDomain, InvalidChain, NonFiniteInput

UP = 1
DOWN = -1

_MAX_SIDE = 2**40


@dataclass(frozen=True)
class Path:
    step: float
    origin_index: int
    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise NonFiniteInput("a path needs at least 3 samples")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("path values must be finite")
        if not (np.isfinite(self.step) and self.step > 0):
            raise NonFiniteInput("step must be positive and finite")
        if not 0 <= self.origin_index < v.size:
            raise NonFiniteInput("origin index outside the grid")
        if v[self.origin_index] != 0.0:
            raise NonFiniteInput("path must vanish at the origin")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_samples(cls, values, step: float, origin_index: int) -> "Path":
        """Build a path from raw samples, re-anchoring so that w(0) = 0."""
        v = np.asarray(values, dtype=float)
        return cls(step=float(step), origin_index=int(origin_index), values=v - v[origin_index])

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.values.size) - self.origin_index) * self.step

    def __len__(self) -> int:
        return self.values.size


class Slope(NamedTuple):
    left: float
    right: float
    height: float
    direction: int

    @property
    def length(self) -> float:
        return self.right - self.left


@dataclass
class SlopeChain:
    """Alternating slopes between consecutive extrema at one level.

    ``left_stub``/``right_stub`` are the rises from the outermost extrema to
    the most extreme sample beyond them.  They are not slopes (their outer
    end is not an extremum) but they decide whether the outermost extrema
    survive at higher levels, which keeps coarsening of a finite chain
    consistent with re-extraction.  ``None`` means the chain is cut
    with no boundary information.
    """

    level: float
    left: np.ndarray
    right: np.ndarray
    height: np.ndarray
    direction: np.ndarray
    central_index: int
    left_stub: float | None = None
    right_stub: float | None = None
    extrema_index: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.height)

    def __getitem__(self, i: int) -> Slope:
        return Slope(float(self.left[i]), float(self.right[i]), float(self.height[i]), int(self.direction[i]))

    def __iter__(self) -> Iterator[Slope]:
        return (self[i] for i in range(len(self)))

    @property
    def slopes(self) -> list[Slope]:
        return list(self)

    @property
    def central(self) -> Slope:
        return self[self.central_index]

    @property
    def extrema(self) -> np.ndarray:
        """Positions of all extrema, sorted."""
        return np.append(self.left, self.right[-1:])

    @classmethod
    def from_slopes(cls, level: float, slopes, central_index: int, **kw) -> "SlopeChain":
        s = list(slopes)
        return cls(
            level=float(level),
            left=np.array([t.left for t in s], dtype=float),
            right=np.array([t.right for t in s], dtype=float),
            height=np.array([t.height for t in s], dtype=float),
            direction=np.array([t.direction for t in s], dtype=np.int8),
            central_index=int(central_index),
            **kw,
        )

    def validate(self) -> "SlopeChain":
        n = len(self.height)
        if n == 0:
            raise InvalidChain("empty chain")
        if not (len(self.left) == len(self.right) == len(self.direction) == n):
            raise InvalidChain("field arrays differ in length")
        if not self.level > 0:
            raise InvalidChain("level must be positive")
        if np.any(self.left >= self.right):
            raise InvalidChain("slopes need left < right")
        if np.any(self.right[:-1] != self.left[1:]):
            raise InvalidChain("slopes are not contiguous")
        if not np.all(np.isin(self.direction, (UP, DOWN))):
            raise InvalidChain("directions must be +1 or -1")
        if np.any(self.direction[:-1] == self.direction[1:]):
            raise InvalidChain("directions do not alternate")
        if np.any(self.height <= self.level):
            raise InvalidChain("every slope must be higher than the level")
        c = self.central_index
        if not 0 <= c < n or not (self.left[c] <= 0.0 < self.right[c]):
            raise InvalidChain("central slope does not contain the origin")
        for stub in (self.left_stub, self.right_stub):
            if stub is not None and not stub >= self.level:
                raise InvalidChain("boundary stub lower than the level")
        return self


class CentralStats(NamedTuple):
    excess: float
    length: float
    direction: int
    rel_origin: float
    b: float


# ------------------------------------------------------------------ sampling


def sample_path(half_length: float, step: float, seed: int, replica: int = 0) -> Path:
    """Two-sided Gaussian random walk with variance ``step`` per increment.

    The right and left halves use independent streams derived from
    ``(seed, replica)``.
    """
    if not (np.isfinite(half_length) and np.isfinite(step)) or step <= 0:
        raise NonFiniteInput("half_length and step must be finite, step > 0")
    if half_length < step:
        raise NonFiniteInput("half_length must be at least one step")
    ratio = half_length / step
    if not np.isfinite(ratio) or ratio > _MAX_SIDE:
        raise NonFiniteInput("grid too large for the index range")
    m = int(round(ratio))
    sd = np.sqrt(step)
    right = np.cumsum(streams.rng_for(seed, streams.PATH, replica, 0).standard_normal(m)) * sd
    left = np.cumsum(streams.rng_for(seed, streams.PATH, replica, 1).standard_normal(m)) * sd
    values = np.concatenate((left[::-1], [0.0], right))
    return Path(step=float(step), origin_index=m, values=values, seed=int(seed))


def rescale_path(path: Path, a: float, c: float) -> Path:
    """The path ``t -> w(c t) / a``.

    Sample ``i`` of the result sits at time ``i * step / c``, so no
    interpolation is needed.
    """
    if not (np.isfinite(a) and np.isfinite(c)) or a <= 0 or c <= 0:
        raise NonFiniteInput("scale factors must be positive and finite")
    step = path.step / c
    values = path.values / a
    if not np.isfinite(step) or step <= 0 or not np.all(np.isfinite(values)):
        raise NonFiniteInput("rescaled path is not representable")
    return Path(step=step, origin_index=path.origin_index, values=values, seed=path.seed)


# ---------------------------------------------------------------- extraction


@numba.njit(cache=True)
def _zigzag(w, x):
    """Single forward scan for the x-extrema of ``w``.

    Returns (indices, kinds, first, last) where kinds is +1 for maxima and
    -1 for minima, ``first`` is the prefix turning point that has no left
    witness and ``last`` the unconfirmed final candidate.  When fewer than
    one turning point exists, indices is empty and first = last = -1.
    """
    n = w.size
    out = np.empty(n, dtype=np.int64)
    kinds = np.empty(n, dtype=np.int8)
    m = 0
    imin = 0
    imax = 0
    trend = 0
    first = -1
    cand = -1
    i = 1
    while i < n:
        v = w[i]
        if v < w[imin]:
            imin = i
        if v > w[imax]:
            imax = i
        if v - w[imin] >= x:
            trend = 1
            first = imin
            cand = i
            break
        if w[imax] - v >= x:
            trend = -1
            first = imax
            cand = i
            break
        i += 1
    if trend == 0:
        return out[:0], kinds[:0], -1, -1
    for j in range(i + 1, n):
        v = w[j]
        if trend == 1:
            if v > w[cand]:
                cand = j
            elif w[cand] - v >= x:
                out[m] = cand
                kinds[m] = 1
                m += 1
                trend = -1
                cand = j
        else:
            if v < w[cand]:
                cand = j
            elif v - w[cand] >= x:
                out[m] = cand
                kinds[m] = -1
                m += 1
                trend = 1
                cand = j
    return out[:m], kinds[:m], first, cand


def extrema_indices(values: np.ndarray, level: float):
    """Grid indices and kinds (+1 max, -1 min) of the interior x-extrema."""
    if not level > 0:
        raise ValueError("level must be positive")
    idx, kinds, first, last = _zigzag(np.ascontiguousarray(values, dtype=float), float(level))
    return idx, kinds, first, last


def extract_slopes(path: Path, level: float) -> SlopeChain:
    """Level-``level`` slope chain of ``path``."""
    w = path.values
    idx, kinds, first, last = extrema_indices(w, level)
    if idx.size < 2:
        raise InsufficientDomain(f"fewer than two interior {level}-extrema in the domain")
    pos = (idx - path.origin_index) * path.step
    c = int(np.searchsorted(pos, 0.0, side="right")) - 1
    if c < 0 or c >= idx.size - 1:
        raise InsufficientDomain("no interior slope covers the origin")
    vals = w[idx]
    height = np.abs(np.diff(vals))
    # a slope starting at a minimum goes up
    direction = np.where(kinds[:-1] == -1, UP, DOWN).astype(np.int8)
    return SlopeChain(
        level=float(level),
        left=pos[:-1],
        right=pos[1:],
        height=height,
        direction=direction,
        central_index=c,
        left_stub=float(abs(vals[0] - w[first])),
        right_stub=float(abs(vals[-1] - w[last])),
        extrema_index=idx,
    )


def central_stats(chain: SlopeChain) -> CentralStats:
    s = chain.central
    length = s.right - s.left
    b = s.left if s.direction == UP else s.right
    return CentralStats(
        excess=s.height - chain.level,
        length=length,
        direction=s.direction,
        rel_origin=(0.0 - s.left) / length,
        b=b,
    )


def b_value(path: Path, level: float) -> float:
    """Localization point at ``level`` on a sampled path."""
    return central_stats(extract_slopes(path, level)).b


@dataclass
class GridStats:
    """Per-path statistics of the central slope and its two neighbours."""

    central_excess: np.ndarray
    central_length: np.ndarray
    direction: np.ndarray
    rel_origin: np.ndarray
    left_excess: np.ndarray
    right_excess: np.ndarray
    left_length: np.ndarray
    right_length: np.ndarray

    def __len__(self) -> int:
        return self.central_excess.size


def grid_statistics(n_paths: int, step: float, half_length: float, level: float, seed: int) -> GridStats:
    """Sample ``n_paths`` paths and collect level-``level`` central statistics."""
    rows = np.empty((n_paths, 8))
    for i in range(n_paths):
        chain = extract_slopes(sample_path(half_length, step, seed, replica=i), level)
        c = chain.central_index
        if c == 0 or c == len(chain) - 1:
            raise InsufficientDomain(f"path {i}: central slope has no neighbour on one side")
        st = central_stats(chain)
        rows[i] = (
            st.excess, st.length, st.direction, st.rel_origin,
            chain.height[c - 1] - level, chain.height[c + 1] - level,
            chain.right[c - 1] - chain.left[c - 1], chain.right[c + 1] - chain.left[c + 1],
        )
    return GridStats(*(rows[:, j].copy() for j in range(8)))
