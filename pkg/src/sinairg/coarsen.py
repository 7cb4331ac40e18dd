"""Event-driven coarsening of a slope chain.

Raising the level absorbs the lowest slope into its two neighbours; the
three become one slope of height ``H_left + H_right - H_mid`` with the
direction of the left one.  The localization point changes sign exactly
when the absorbed slope is the central one.

The chain is a doubly linked list over flat arrays and events come from a
binary min-heap keyed by ``(height, node id)`` with lazy deletion: an entry
is stale when its node is dead or its height has changed.  Merged slopes
reuse the id of their left member.

Two modes:

* grid mode (:func:`engine_from_chain`): positions are tracked and the
  chain may carry open boundary stubs (see :class:`SlopeChain`).  A lowest
  stub is dropped and its inner neighbour becomes the new stub; a merge
  with a stub yields a stub.  Without stubs a merge at the chain end raises
  :class:`WindowExhausted`.
* synthetic mode (:func:`engine_synthetic`): i.i.d. heights, no positions.
  The finite window is extended by one of two policies.  ``minimal``
  attaches a fresh slope of height ``x (1 + Exp(1))`` at a chain end
  whenever a merge reaches that end at level ``x``.  ``refresh`` does the
  same between refresh levels ``x0 2^j``; at each refresh level the central
  slope is kept and every other slope is redrawn fresh, ``keep`` per side.
  Given the history of the central slope, its neighbours at a fixed level
  are i.i.d. fresh slopes, so refreshing removes the drift that stale end
  slopes cause in small windows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np

from . import laws, streams
from .envgrid import DOWN, UP, SlopeChain
from .errors import NonMonotoneEvent, UnsupportedMode, WindowExhausted

POOL_SIZE = 2048
DEFAULT_POLICY = "refresh"
REFRESH_KEEP = 64
REFRESH_RATIO = 2.0

# node flags
_ALIVE = 1
_STUB = 2

# boundary policies
GRID, MINIMAL, REFRESH = 0, 1, 2
POLICIES = {"minimal": MINIMAL, "refresh": REFRESH}

# integer state slots
_HSIZE, _NALLOC, _HEAD, _TAIL, _CENTRAL, _NL, _NR = 0, 1, 2, 3, 4, 5, 6
_NMERGE, _NREP, _POOLPOS, _NFLIP, _NLIVE, _KEYLO, _KEYHI, _LOST = 7, 8, 9, 10, 11, 12, 13, 14
_NREFRESH = 15
_NSLOTS = 16

# kernel status codes
OK, NEED_POOL, NEED_ROOM, EXHAUSTED, NONMONO, LOG_FULL = 0, 1, 2, 3, 4, 5


# ---------------------------------------------------------------- min-heap


@numba.njit(inline="always")
def _less(k1, i1, k2, i2):
    return k1 < k2 or (k1 == k2 and i1 < i2)


@numba.njit
def _sift_down(hk, hi, size, pos):
    k = hk[pos]
    i = hi[pos]
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        r = child + 1
        if r < size and _less(hk[r], hi[r], hk[child], hi[child]):
            child = r
        if _less(hk[child], hi[child], k, i):
            hk[pos] = hk[child]
            hi[pos] = hi[child]
            pos = child
        else:
            break
    hk[pos] = k
    hi[pos] = i


@numba.njit
def _push(hk, hi, size, k, i):
    pos = size
    while pos > 0:
        parent = (pos - 1) >> 1
        if _less(k, i, hk[parent], hi[parent]):
            hk[pos] = hk[parent]
            hi[pos] = hi[parent]
            pos = parent
        else:
            break
    hk[pos] = k
    hi[pos] = i
    return size + 1


@numba.njit
def _pop(hk, hi, size):
    size -= 1
    if size > 0:
        hk[0] = hk[size]
        hi[0] = hi[size]
        _sift_down(hk, hi, size, 0)
    return size


@numba.njit
def _heapify(hk, hi, size):
    for pos in range((size - 2) // 2, -1, -1):
        _sift_down(hk, hi, size, pos)


# ------------------------------------------------------------------ kernel


@numba.njit
def _init_chain(h, d, prv, nxt, fl, okey, hk, hi, si, n, central):
    for j in range(n):
        prv[j] = j - 1
        nxt[j] = j + 1 if j + 1 < n else -1
        fl[j] = _ALIVE
        okey[j] = j
        hk[j] = h[j]
        hi[j] = j
    _heapify(hk, hi, n)
    si[_HSIZE] = n
    si[_NALLOC] = n
    si[_HEAD] = 0
    si[_TAIL] = n - 1
    si[_CENTRAL] = central
    si[_NL] = central
    si[_NR] = n - 1 - central
    si[_NLIVE] = n
    si[_KEYLO] = 0
    si[_KEYHI] = n - 1


@numba.njit
def _attach(h, d, prv, nxt, fl, okey, hk, hi, si, height, left, flag):
    j = si[_NALLOC]
    si[_NALLOC] = j + 1
    h[j] = height
    fl[j] = flag
    if left:
        end = si[_HEAD]
        d[j] = -d[end]
        prv[j] = -1
        nxt[j] = end
        prv[end] = j
        si[_HEAD] = j
        si[_KEYLO] -= 1
        okey[j] = si[_KEYLO]
        si[_NL] += 1
    else:
        end = si[_TAIL]
        d[j] = -d[end]
        nxt[j] = -1
        prv[j] = end
        nxt[end] = j
        si[_TAIL] = j
        si[_KEYHI] += 1
        okey[j] = si[_KEYHI]
        si[_NR] += 1
    si[_HSIZE] = _push(hk, hi, si[_HSIZE], height, j)
    si[_NREP] += 1
    si[_NLIVE] += 1


@numba.njit
def _refresh(h, d, prv, nxt, fl, okey, hk, hi, si, level, pool, keep):
    """Keep the central slope and redraw ``keep`` fresh slopes on each side."""
    c = si[_CENTRAL]
    hc = h[c]
    dc = d[c]
    n = 2 * keep + 1
    p = si[_POOLPOS]
    for j in range(n):
        if j == keep:
            h[j] = hc
        else:
            h[j] = level * (1.0 + pool[p])
            p += 1
        d[j] = dc if (j - keep) % 2 == 0 else -dc
    si[_POOLPOS] = p
    for j in range(n, si[_NALLOC]):
        fl[j] = 0
    _init_chain(h, d, prv, nxt, fl, okey, hk, hi, si, n, keep)
    si[_NREFRESH] += 1


@numba.njit
def _advance(h, d, prv, nxt, fl, okey, lp, rp, hk, hi, si, sf, flips, pool, x_max, policy, keep, ratio, track):
    cap = h.size
    hcap = hk.size
    while True:
        if si[_NFLIP] >= flips.size:
            return LOG_FULL
        if si[_NALLOC] + 2 > cap or si[_HSIZE] + 3 > hcap:
            return NEED_ROOM

        # lowest live slope
        while True:
            if si[_HSIZE] == 0:
                return EXHAUSTED
            k = hk[0]
            b = hi[0]
            if (fl[b] & _ALIVE) == 0 or h[b] != k:
                si[_HSIZE] = _pop(hk, hi, si[_HSIZE])
                continue
            break
        if k > sf[1] and sf[1] <= x_max:
            # all events below the refresh level are done
            if si[_POOLPOS] + 2 * keep > pool.size:
                return NEED_POOL
            if 2 * keep + 1 > cap or 2 * keep + 1 > hcap:
                return NEED_ROOM
            sf[0] = sf[1]
            _refresh(h, d, prv, nxt, fl, okey, hk, hi, si, sf[1], pool, keep)
            sf[1] *= ratio
            continue
        if k > x_max:
            if x_max > sf[0]:
                sf[0] = x_max
            return OK
        if k < sf[0]:
            return NONMONO

        a = prv[b]
        c = nxt[b]

        if fl[b] & _STUB:
            si[_HSIZE] = _pop(hk, hi, si[_HSIZE])
            sf[0] = k
            fl[b] = 0
            si[_NLIVE] -= 1
            if a == -1:
                inner = c
                prv[c] = -1
                si[_HEAD] = c
                si[_NL] -= 1
            else:
                inner = a
                nxt[a] = -1
                si[_TAIL] = a
                si[_NR] -= 1
            if inner == -1:
                return EXHAUSTED
            fl[inner] |= _STUB
            if inner == si[_CENTRAL]:
                si[_LOST] = 1
                return EXHAUSTED
            continue

        if a == -1 or c == -1:
            if policy == GRID:
                return EXHAUSTED
            need = (a == -1) + (c == -1)
            if si[_POOLPOS] + need > pool.size:
                return NEED_POOL
            sf[0] = k
            if a == -1:
                _attach(h, d, prv, nxt, fl, okey, hk, hi, si, k * (1.0 + pool[si[_POOLPOS]]), True, _ALIVE)
                si[_POOLPOS] += 1
                a = prv[b]
            if c == -1:
                _attach(h, d, prv, nxt, fl, okey, hk, hi, si, k * (1.0 + pool[si[_POOLPOS]]), False, _ALIVE)
                si[_POOLPOS] += 1
                c = nxt[b]

        si[_HSIZE] = _pop(hk, hi, si[_HSIZE])
        sf[0] = k
        ha = h[a]
        hc = h[c]
        nh = ha + hc - k
        if nh < ha or nh < hc:
            return NONMONO
        cen = si[_CENTRAL]
        e = nxt[c]
        h[a] = nh
        fl[a] |= fl[c] & _STUB
        si[_HSIZE] = _push(hk, hi, si[_HSIZE], nh, a)
        if track:
            rp[a] = rp[c]
        fl[b] = 0
        fl[c] = 0
        nxt[a] = e
        if e != -1:
            prv[e] = a
        else:
            si[_TAIL] = a
        if b == cen:
            flips[si[_NFLIP]] = k
            si[_NFLIP] += 1
            si[_CENTRAL] = a
            si[_NL] -= 1
            si[_NR] -= 1
        elif a == cen:
            si[_NR] -= 2
        elif c == cen:
            si[_CENTRAL] = a
            si[_NL] -= 2
        elif okey[a] < okey[cen]:
            si[_NL] -= 2
        else:
            si[_NR] -= 2
        si[_NMERGE] += 1
        si[_NLIVE] -= 2
        if fl[si[_CENTRAL]] & _STUB:
            si[_LOST] = 1
            return EXHAUSTED


@numba.njit(parallel=True, cache=True)
def _synthetic_batch(excess, updir, pools, x_max, policy, keep, ratio, first_refresh, flips_out, nflip_out,
                     status_out, nrep_out):
    reps, n = excess.shape
    psize = pools.shape[1]
    cap = max(n, 2 * keep + 1) + psize + 4
    hcap = 2 * cap + 8
    mid = n // 2
    for r in numba.prange(reps):
        h = np.empty(cap)
        d = np.empty(cap, dtype=np.int8)
        prv = np.empty(cap, dtype=np.int64)
        nxt = np.empty(cap, dtype=np.int64)
        fl = np.zeros(cap, dtype=np.int8)
        okey = np.empty(cap, dtype=np.int64)
        pos = np.empty(0)
        hk = np.empty(hcap)
        hi = np.empty(hcap, dtype=np.int64)
        si = np.zeros(_NSLOTS, dtype=np.int64)
        sf = np.array([1.0, first_refresh])
        s0 = 1 if updir[r] else -1
        for j in range(n):
            h[j] = 1.0 + excess[r, j]
            d[j] = s0 if (j - mid) % 2 == 0 else -s0
        _init_chain(h, d, prv, nxt, fl, okey, hk, hi, si, n, mid)
        st = _advance(
            h, d, prv, nxt, fl, okey, pos, pos, hk, hi, si, sf,
            flips_out[r], pools[r], x_max, policy, keep, ratio, False,
        )
        status_out[r] = st
        nflip_out[r] = si[_NFLIP]
        nrep_out[r] = si[_NREP]


# ------------------------------------------------------------------ Python


@dataclass(frozen=True)
class SignChangeLog:
    """Levels at which the localization point changed sign.

    ``initial_sign`` is the sign of ``b`` at ``x_start``: ``-1`` when the
    central slope goes up (``b`` is its left end, ``<= 0``), ``+1`` otherwise.
    """

    initial_sign: int
    levels: tuple
    x_start: float
    x_max: float

    def count(self, x: float) -> int:
        from .renewal import count_flips

        return count_flips(self, x)


def _grow(a: np.ndarray, size: int, fill=0) -> np.ndarray:
    out = np.full(size, fill, dtype=a.dtype)
    out[: a.size] = a
    return out


def first_refresh_level(n_slopes: int, keep: int = REFRESH_KEEP) -> float:
    """Level where a window of ``n_slopes`` has thinned to about ``keep``
    slopes per side (slope counts fall like ``x^-2``)."""
    return max(1.0, float(np.sqrt(n_slopes / (2.0 * keep))))


class Engine:
    """Mutable coarsening state; build with :func:`engine_from_chain` or
    :func:`engine_synthetic`."""

    def __init__(self, heights, directions, central, level, *, lpos=None, rpos=None, stubs=(False, False),
                 policy=GRID, keep=REFRESH_KEEP, ratio=REFRESH_RATIO, first_refresh=np.inf, rng=None):
        n = len(heights)
        self.track = lpos is not None
        cap = max(n, 2 * keep + 1) + 16
        self.h = np.empty(cap)
        self.h[:n] = heights
        self.d = np.zeros(cap, dtype=np.int8)
        self.d[:n] = directions
        self.prv = np.empty(cap, dtype=np.int64)
        self.nxt = np.empty(cap, dtype=np.int64)
        self.fl = np.zeros(cap, dtype=np.int8)
        self.okey = np.empty(cap, dtype=np.int64)
        self.lp = np.zeros(cap if self.track else 0)
        self.rp = np.zeros(cap if self.track else 0)
        if self.track:
            self.lp[:n] = lpos
            self.rp[:n] = rpos
        self.hk = np.empty(2 * cap)
        self.hi = np.empty(2 * cap, dtype=np.int64)
        self.si = np.zeros(_NSLOTS, dtype=np.int64)
        self.sf = np.array([float(level), float(first_refresh) if policy == REFRESH else np.inf])
        _init_chain(self.h, self.d, self.prv, self.nxt, self.fl, self.okey, self.hk, self.hi, self.si, n, central)
        if stubs[0]:
            self.fl[0] |= _STUB
        if stubs[1]:
            self.fl[n - 1] |= _STUB
        self.flips = np.empty(16)
        self.policy = int(policy)
        self.keep = int(keep)
        self.ratio = float(ratio)
        self.rng = rng
        self.pool = np.empty(0)
        self.x_start = float(level)
        self.initial_sign = -int(directions[central])

    # -- state -------------------------------------------------------------

    @property
    def level(self) -> float:
        return float(self.sf[0])

    @property
    def n_live(self) -> int:
        return int(self.si[_NLIVE])

    @property
    def n_merges(self) -> int:
        return int(self.si[_NMERGE])

    @property
    def n_replenished(self) -> int:
        return int(self.si[_NREP])

    @property
    def n_refreshes(self) -> int:
        return int(self.si[_NREFRESH])

    @property
    def central_direction(self) -> int:
        return int(self.d[self.si[_CENTRAL]])

    @property
    def central_height(self) -> float:
        return float(self.h[self.si[_CENTRAL]])

    @property
    def flip_levels(self) -> np.ndarray:
        return self.flips[: self.si[_NFLIP]].copy()

    def log(self) -> SignChangeLog:
        return SignChangeLog(self.initial_sign, tuple(self.flip_levels.tolist()), self.x_start, self.level)

    # -- evolution ---------------------------------------------------------

    def _refill(self):
        if self.rng is None:
            raise WindowExhausted("replenishment needs a random stream")
        rest = self.pool[self.si[_POOLPOS]:]
        self.pool = np.concatenate((rest, self.rng.standard_exponential(POOL_SIZE)))
        self.si[_POOLPOS] = 0

    def _make_room(self):
        cap = 2 * self.h.size
        self.h = _grow(self.h, cap)
        self.d = _grow(self.d, cap)
        self.prv = _grow(self.prv, cap)
        self.nxt = _grow(self.nxt, cap)
        self.fl = _grow(self.fl, cap)
        self.okey = _grow(self.okey, cap)
        if self.track:
            self.lp = _grow(self.lp, cap)
            self.rp = _grow(self.rp, cap)
        self.hk = _grow(self.hk, 2 * self.hk.size)
        self.hi = _grow(self.hi, 2 * self.hi.size)

    def advance_to(self, x_max: float) -> SignChangeLog:
        if x_max < self.level:
            raise ValueError(f"x_max={x_max} is below the current level {self.level}")
        if self.si[_LOST]:
            raise WindowExhausted("the central slope merged into a boundary stub")
        while True:
            st = _advance(
                self.h, self.d, self.prv, self.nxt, self.fl, self.okey, self.lp, self.rp,
                self.hk, self.hi, self.si, self.sf, self.flips, self.pool,
                float(x_max), self.policy, self.keep, self.ratio, self.track,
            )
            if st == OK:
                return self.log()
            if st == NEED_POOL:
                self._refill()
            elif st == NEED_ROOM:
                self._make_room()
            elif st == LOG_FULL:
                self.flips = _grow(self.flips, 2 * self.flips.size)
            elif st == EXHAUSTED:
                raise WindowExhausted(f"chain end reached at level {self.level}")
            else:
                raise NonMonotoneEvent(f"event below the current level {self.level}")

    def live_nodes(self) -> list[int]:
        out = []
        j = int(self.si[_HEAD])
        while j != -1:
            out.append(j)
            j = int(self.nxt[j])
        return out

    def chain_at(self) -> SlopeChain:
        if not self.track:
            raise UnsupportedMode("synthetic engines do not track slope positions")
        if self.si[_LOST]:
            raise WindowExhausted("the central slope merged into a boundary stub")
        nodes = self.live_nodes()
        stub_l = stub_r = None
        if nodes and self.fl[nodes[0]] & _STUB:
            stub_l = float(self.h[nodes[0]])
            nodes = nodes[1:]
        if nodes and self.fl[nodes[-1]] & _STUB:
            stub_r = float(self.h[nodes[-1]])
            nodes = nodes[:-1]
        idx = np.array(nodes, dtype=np.int64)
        central = int(np.flatnonzero(idx == self.si[_CENTRAL])[0])
        return SlopeChain(
            level=self.level,
            left=self.lp[idx].copy(),
            right=self.rp[idx].copy(),
            height=self.h[idx].copy(),
            direction=self.d[idx].copy(),
            central_index=central,
            left_stub=stub_l,
            right_stub=stub_r,
        )


def engine_from_chain(chain: SlopeChain) -> Engine:
    """Grid-mode engine; refuses chains that break the chain invariants."""
    chain.validate()
    heights = np.asarray(chain.height, dtype=float)
    dirs = np.asarray(chain.direction, dtype=np.int8)
    lpos = np.asarray(chain.left, dtype=float)
    rpos = np.asarray(chain.right, dtype=float)
    c = chain.central_index
    stubs = [False, False]
    if chain.left_stub is not None:
        heights = np.concatenate(([chain.left_stub], heights))
        dirs = np.concatenate(([-dirs[0]], dirs))
        lpos = np.concatenate(([-np.inf], lpos))
        rpos = np.concatenate(([lpos[1]], rpos))
        c += 1
        stubs[0] = True
    if chain.right_stub is not None:
        heights = np.concatenate((heights, [chain.right_stub]))
        dirs = np.concatenate((dirs, [-dirs[-1]]))
        lpos = np.concatenate((lpos, [rpos[-1]]))
        rpos = np.concatenate((rpos, [np.inf]))
        stubs[1] = True
    return Engine(heights, dirs, c, chain.level, lpos=lpos, rpos=rpos, stubs=tuple(stubs))


def synthetic_draws(rng: np.random.Generator, n_slopes: int):
    """Initial draws of a synthetic chain, in stream order.

    Returns (central goes up, excess array) with the central excess at the
    middle index.
    """
    up = bool(rng.random() < 0.5)
    central = laws.sample_central_excess(rng, 1)
    excess = rng.standard_exponential(n_slopes)
    excess[n_slopes // 2] = central[0]
    return up, excess


def _check_window(n_slopes: int):
    if int(n_slopes) != n_slopes or n_slopes < 3 or n_slopes % 2 == 0:
        raise ValueError("n_slopes must be an odd integer >= 3")


def _policy(policy: str) -> int:
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {sorted(POLICIES)}")
    return POLICIES[policy]


def engine_synthetic(n_slopes: int, seed: int, policy: str = DEFAULT_POLICY, replenish: bool = True,
                     replica: int = 0, keep: int = REFRESH_KEEP, ratio: float = REFRESH_RATIO) -> Engine:
    """Synthetic level-1 chain with the exact level-1 law around the origin.

    Non-central excesses are i.i.d. Exp(1), the central one has density
    ``(2y+1) e^{-y} / 3``, and the central slope goes up with probability 1/2.
    With ``replenish=False`` the chain is closed and a merge at an end raises
    :class:`WindowExhausted`.
    """
    _check_window(n_slopes)
    code = _policy(policy) if replenish else GRID
    if keep < 1 or ratio <= 1:
        raise ValueError("refresh needs keep >= 1 and ratio > 1")
    rng = streams.rng_for(seed, streams.SYNTHETIC, replica)
    up, excess = synthetic_draws(rng, n_slopes)
    mid = n_slopes // 2
    s0 = UP if up else DOWN
    dirs = np.where((np.arange(n_slopes) - mid) % 2 == 0, s0, -s0).astype(np.int8)
    eng = Engine(1.0 + excess, dirs, mid, 1.0, policy=code, keep=keep, ratio=ratio,
                 first_refresh=first_refresh_level(n_slopes, keep), rng=rng)
    if replenish:
        eng.pool = rng.standard_exponential(POOL_SIZE)
    return eng


def advance_to(engine: Engine, x_max: float) -> SignChangeLog:
    return engine.advance_to(x_max)


def chain_at(engine: Engine) -> SlopeChain:
    return engine.chain_at()


# ------------------------------------------------------------------ batches


@dataclass
class SyntheticBatch:
    """Flip logs of many synthetic replicas run to ``x_max``."""

    n_slopes: int
    x_max: float
    seed: int
    policy: str
    initial_sign: np.ndarray
    flips: list  # one float array per replica
    n_replenished: np.ndarray

    def __len__(self):
        return len(self.flips)

    def counts(self, x: float) -> np.ndarray:
        if x > self.x_max:
            raise ValueError("x beyond the completed range of the logs")
        return np.array([np.searchsorted(f, x, side="right") for f in self.flips], dtype=np.int64)

    def log(self, i: int) -> SignChangeLog:
        return SignChangeLog(int(self.initial_sign[i]), tuple(self.flips[i].tolist()), 1.0, self.x_max)


def run_synthetic_batch(replicas: int, n_slopes: int, x_max: float, seed: int, policy: str = DEFAULT_POLICY,
                        chunk: int = 256, start: int = 0, keep: int = REFRESH_KEEP,
                        ratio: float = REFRESH_RATIO) -> SyntheticBatch:
    """Run replicas ``start .. start+replicas-1`` of the synthetic engine.

    Replica ``i`` uses the same stream as ``engine_synthetic(..., replica=i)``
    and produces the identical log.  Replicas that outgrow the pre-drawn
    replenishment pool are rerun through :class:`Engine`.
    """
    _check_window(n_slopes)
    code = _policy(policy)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    if keep < 1 or ratio <= 1:
        raise ValueError("refresh needs keep >= 1 and ratio > 1")
    first = first_refresh_level(n_slopes, keep) if code == REFRESH else np.inf
    signs = np.empty(replicas, dtype=np.int8)
    nrep = np.empty(replicas, dtype=np.int64)
    flips: list = [None] * replicas
    fcap = 64
    for lo in range(0, replicas, chunk):
        k = min(chunk, replicas - lo)
        excess = np.empty((k, n_slopes))
        updir = np.empty(k, dtype=np.bool_)
        pools = np.empty((k, POOL_SIZE))
        for j in range(k):
            rng = streams.rng_for(seed, streams.SYNTHETIC, start + lo + j)
            updir[j], excess[j] = synthetic_draws(rng, n_slopes)
            pools[j] = rng.standard_exponential(POOL_SIZE)
        fl = np.empty((k, fcap))
        nfl = np.empty(k, dtype=np.int64)
        status = np.empty(k, dtype=np.int64)
        nr = np.empty(k, dtype=np.int64)
        with warnings.catch_warnings():
            # numba probes an old TBB runtime and falls back on its own
            warnings.filterwarnings("ignore", message=".*TBB.*", category=numba.NumbaWarning)
            _synthetic_batch(excess, updir, pools, float(x_max), code, int(keep), float(ratio), first,
                             fl, nfl, status, nr)
        for j in range(k):
            i = lo + j
            signs[i] = -1 if updir[j] else 1
            if status[j] == OK:
                flips[i] = fl[j, : nfl[j]].copy()
                nrep[i] = nr[j]
            elif status[j] in (NEED_POOL, LOG_FULL, NEED_ROOM):
                eng = engine_synthetic(n_slopes, seed, policy=policy, replica=start + i, keep=keep, ratio=ratio)
                eng.advance_to(x_max)
                flips[i] = eng.flip_levels
                nrep[i] = eng.n_replenished
            elif status[j] == EXHAUSTED:
                raise WindowExhausted(f"replica {start + i} ran out of chain")
            else:
                raise NonMonotoneEvent(f"replica {start + i} produced an out-of-order event")
    return SyntheticBatch(n_slopes, float(x_max), int(seed), policy, signs, flips, nrep)
