"""Monte Carlo engine for stable processes on a time grid.

Increments are drawn exactly in distribution with the Chambers-Mallows-Stuck
method, so the only bias comes from observing the path at grid times. Each
path owns a counter-based Philox stream keyed by (seed, path index), which
makes every estimator bit-reproducible whatever the number of workers.

Step sizes follow one of three clocks:

* ``uniform``: process-time step ``dt``.
* ``radial``: step ``dt * |X|^alpha``, a uniform grid in the Lamperti-Kiu
  time. Spatial resolution then scales with the current radius, which is what
  extremum and avoidance functionals need, and runs from x0 = c are exact
  rescalings of runs from x0 = 1 under the same stream.
* ``running_max``: step ``dt * max(M, 1)^alpha`` with M the running maximum of
  |X|, the natural clock for the radially reflected process.
* ``boundary``: step ``dt * d^alpha`` with d the distance to the nearest edge
  of the exit box or target interval, so small targets are resolved at the
  scale of their own size.

Stopping radii in :class:`McConfig` are multiples of the start radius.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DomainError, InsufficientSamplesError
from .params import Regime, StableParams

__all__ = [
    "CLOCKS",
    "STOP_REASONS",
    "McConfig",
    "GridPath",
    "MapPath",
    "SampleSet",
    "AvoidEstimate",
    "default_workers",
    "path_rng",
    "beta_from_rho",
    "rho_from_beta",
    "sample_stable_increment",
    "simulate_path",
    "lamperti_kiu",
    "lamperti_kiu_inverse",
    "map_infimum_event",
    "closest_reach_mc",
    "furthest_reach_mc",
    "reflected_stationary_mc",
    "avoid_strip_samples",
    "avoid_estimate",
    "avoid_strip_mc",
    "cauchy_exit_mc",
    "hit_interval_mc",
]

CLOCKS = {"uniform": 0, "radial": 1, "running_max": 2, "boundary": 3}

# kernel stop codes
_RUNNING, _OUTER, _INNER, _HORIZON, _MAX_STEPS, _TARGET = 0, 1, 2, 3, 4, 5
STOP_REASONS = {_OUTER: "outer", _INNER: "inner", _HORIZON: "horizon", _MAX_STEPS: "max_steps", _TARGET: "target"}

_CHUNK0 = 4096
_CHUNK_MAX = 1 << 16


def default_workers() -> int:
    """Worker count from the ``DEEPWH_WORKERS`` environment variable (default 1)."""
    raw = os.environ.get("DEEPWH_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"DEEPWH_WORKERS must be an integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"DEEPWH_WORKERS must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    ``r_stop`` and ``eps_abs`` are relative to the start radius |x0|: a path
    stops when |X| > r_stop * |x0| (alpha < 1) or |X| < eps_abs * |x0|
    (alpha > 1). ``t_max`` caps process time; paths reaching it without the
    target event are censored and reported.
    """

    n_paths: int = 10_000
    dt: float = 1e-3
    r_stop: float = 50.0
    eps_abs: float = 1e-3
    t_max: float = math.inf
    seed: int = 0
    workers: int = field(default_factory=default_workers)
    clock: str = "radial"
    max_steps: int = 10**8

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not self.dt > 0.0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if not self.r_stop > 1.0:
            raise DomainError(f"r_stop must be > 1, got {self.r_stop}")
        if not 0.0 < self.eps_abs < 1.0:
            raise DomainError(f"eps_abs must lie in (0, 1), got {self.eps_abs}")
        if not self.t_max > 0.0:
            raise DomainError(f"t_max must be > 0, got {self.t_max}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.workers) < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.clock not in CLOCKS:
            raise DomainError(f"clock must be one of {sorted(CLOCKS)}, got {self.clock!r}")
        if int(self.max_steps) < 1:
            raise DomainError("max_steps must be >= 1")


@dataclass(frozen=True)
class GridPath:
    """Path observed at grid times; ``absorbed`` indexes the first value with |X| < eps."""

    times: np.ndarray
    values: np.ndarray
    absorbed: int | None = None
    stop_reason: str = "horizon"

    def __post_init__(self):
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise DomainError("times and values must be 1-D arrays of equal length")
        if self.times.size == 0 or self.times[0] != 0.0:
            raise DomainError("times must start at 0")
        if np.any(np.diff(self.times) <= 0.0):
            raise DomainError("times must be strictly increasing")


@dataclass(frozen=True)
class MapPath:
    """Lamperti-Kiu image: xi = log|X / x0| and j = sign(X) on the MAP clock s."""

    s_times: np.ndarray
    xi: np.ndarray
    j: np.ndarray
    x0: float


@dataclass(frozen=True)
class SampleSet:
    """One row per path; ``accepted`` marks rows that belong to the sample."""

    functional: str
    path_index: np.ndarray
    values: np.ndarray
    stop_code: np.ndarray
    steps: np.ndarray
    accepted: np.ndarray
    meta: dict

    @property
    def samples(self) -> np.ndarray:
        return self.values[self.accepted]

    @property
    def n_accepted(self) -> int:
        return int(np.count_nonzero(self.accepted))

    @property
    def n_censored(self) -> int:
        return int(self.accepted.size - self.n_accepted)

    @property
    def stop_reason(self) -> list[str]:
        return [STOP_REASONS[int(c)] for c in self.stop_code]


@dataclass(frozen=True)
class AvoidEstimate:
    """Binomial estimate with a Wilson score interval."""

    estimate: float
    successes: int
    n: int
    censored: int
    ci_low: float
    ci_high: float
    level: float

    def covers(self, value: float, allowance: float = 0.0) -> bool:
        return self.ci_low - allowance <= value <= self.ci_high + allowance


def _wilson(k: int, n: int, level: float) -> tuple[float, float]:
    from scipy.stats import norm

    z = float(norm.ppf(0.5 + 0.5 * level))
    ph = k / n
    den = 1.0 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1.0 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


# ---------------------------------------------------------------------------
# Increments


def beta_from_rho(alpha: float, rho: float) -> float:
    """CMS skewness beta with rho = 1/2 + arctan(beta tan(pi alpha / 2)) / (pi alpha)."""
    if alpha == 1.0:
        if rho != 0.5:
            raise DomainError("alpha = 1 supports only rho = 1/2")
        return 0.0
    return math.tan(math.pi * alpha * (rho - 0.5)) / math.tan(0.5 * math.pi * alpha)


def rho_from_beta(alpha: float, beta: float) -> float:
    if alpha == 1.0:
        if beta != 0.0:
            raise DomainError("alpha = 1 supports only beta = 0")
        return 0.5
    return 0.5 + math.atan(beta * math.tan(0.5 * math.pi * alpha)) / (math.pi * alpha)


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for path ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def _cms(U, W, alpha, rho):
    # V uniform on (-pi/2, pi/2); shifting by B = pi (rho - 1/2) makes P(S >= 0) = rho
    V = np.pi * (U - 0.5)
    a = alpha * (V + math.pi * (rho - 0.5))
    return np.sin(a) / np.cos(V) ** (1.0 / alpha) * (np.cos(V - a) / W) ** ((1.0 - alpha) / alpha)


def sample_stable_increment(dt: float, p: StableParams, rng: np.random.Generator, size=None):
    """X_dt under P_0: dt^(1/alpha) S with S strictly stable, P(S >= 0) = rho."""
    if not dt > 0.0:
        raise DomainError(f"dt must be > 0, got {dt}")
    U = rng.random(size)
    W = rng.standard_exponential(size)
    return dt ** (1.0 / p.alpha) * _cms(U, W, p.alpha, p.rho)


# ---------------------------------------------------------------------------
# Kernel

# state vector layout
_X, _T, _XMIN, _XMAX, _MRUN, _SUP, _INF = range(7)


@njit(cache=True)
def _advance(state, U, W, alpha, B, dt, clock, r_out, r_in, box_lo, box_hi,
             tgt_lo, tgt_hi, t_max, rec_t, rec_x, record):
    """Run up to len(U) steps in place; returns (steps taken, stop code)."""
    inv = 1.0 / alpha
    ex = (1.0 - alpha) / alpha
    x = state[0]
    t = state[1]
    xmin = state[2]
    xmax = state[3]
    m_run = state[4]
    sup = state[5]
    inf = state[6]
    code = 0
    k = 0
    n = U.shape[0]
    while k < n:
        ax = abs(x)
        if clock == 0:
            h = dt
        elif clock == 1:
            h = dt * ax ** alpha
        elif clock == 2:
            h = dt * max(m_run, 1.0) ** alpha
        else:
            d = min(x - box_lo, box_hi - x)
            if x < tgt_lo:
                d = min(d, tgt_lo - x)
            elif x > tgt_hi:
                d = min(d, x - tgt_hi)
            h = dt * d ** alpha
        last = False
        if t + h >= t_max:
            h = t_max - t
            last = True
        V = math.pi * (U[k] - 0.5)
        a = alpha * (V + B)
        S = math.sin(a) / math.cos(V) ** inv * (math.cos(V - a) / W[k]) ** ex
        x = x + h ** inv * S
        t = t + h if not last else t_max
        k += 1
        if record:
            rec_t[k - 1] = t
            rec_x[k - 1] = x
        ax = abs(x)
        if ax > r_out or x <= box_lo or x >= box_hi:
            code = 1
            break
        if ax < r_in:
            code = 2
            break
        if tgt_lo <= x <= tgt_hi:
            code = 5
            break
        # running statistics only over the pre-exit path
        if ax < abs(xmin):
            xmin = x
        if ax > abs(xmax):
            xmax = x
        if ax > m_run:
            m_run = ax
        if x > sup:
            sup = x
        if x < inf:
            inf = x
        if last:
            code = 3
            break
    state[0] = x
    state[1] = t
    state[2] = xmin
    state[3] = xmax
    state[4] = m_run
    state[5] = sup
    state[6] = inf
    return k, code


@dataclass(frozen=True)
class _Task:
    x0: float
    alpha: float
    rho: float
    dt: float
    clock: int
    r_out: float
    r_in: float
    box_lo: float
    box_hi: float
    tgt_lo: float
    tgt_hi: float
    t_max: float
    max_steps: int
    seed: int


def _run_one(task: _Task, index: int, record: bool = False):
    rng = path_rng(task.seed, index)
    B = math.pi * (task.rho - 0.5)
    x0 = task.x0
    state = np.array([x0, 0.0, x0, x0, abs(x0), x0, x0])
    steps = 0
    chunk = _CHUNK0
    empty = np.empty(0)
    ts, xs = [], []
    while True:
        chunk = min(chunk, task.max_steps - steps)
        U = rng.random(chunk)
        W = rng.standard_exponential(chunk)
        rt = np.empty(chunk) if record else empty
        rx = np.empty(chunk) if record else empty
        k, code = _advance(state, U, W, task.alpha, B, task.dt, task.clock, task.r_out,
                           task.r_in, task.box_lo, task.box_hi, task.tgt_lo, task.tgt_hi, task.t_max,
                           rt, rx, record)
        steps += k
        if record:
            ts.append(rt[:k])
            xs.append(rx[:k])
        if code == _RUNNING and steps >= task.max_steps:
            code = _MAX_STEPS
        if code != _RUNNING:
            break
        chunk = min(2 * chunk, _CHUNK_MAX)
    if record:
        return state, steps, code, np.concatenate(ts), np.concatenate(xs)
    return state, steps, code


def _run_range(args):
    task, lo, hi = args
    states = np.empty((hi - lo, 7))
    steps = np.empty(hi - lo, dtype=np.int64)
    codes = np.empty(hi - lo, dtype=np.int64)
    for i in range(lo, hi):
        st, n, c = _run_one(task, i)
        states[i - lo], steps[i - lo], codes[i - lo] = st, n, c
    return states, steps, codes


def _run_paths(task: _Task, n_paths: int, workers: int):
    if workers <= 1 or n_paths < 2:
        return _run_range((task, 0, n_paths))
    # contiguous index blocks; order of results is fixed by the block order
    n_blocks = min(n_paths, 8 * workers)
    edges = np.linspace(0, n_paths, n_blocks + 1).astype(int)
    jobs = [(task, int(edges[b]), int(edges[b + 1])) for b in range(n_blocks)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_range, jobs))
    return tuple(np.concatenate([pt[k] for pt in parts]) for k in range(3))


def _task(x0, p, cfg, *, clock=None, r_out=math.inf, r_in=0.0, box=(-math.inf, math.inf),
          target=(math.inf, -math.inf), t_max=None):
    return _Task(
        x0=float(x0), alpha=p.alpha, rho=p.rho, dt=cfg.dt,
        clock=CLOCKS[clock or cfg.clock], r_out=r_out, r_in=r_in,
        box_lo=box[0], box_hi=box[1], tgt_lo=target[0], tgt_hi=target[1],
        t_max=cfg.t_max if t_max is None else t_max, max_steps=int(cfg.max_steps), seed=int(cfg.seed),
    )


def _meta(functional, x0, p, cfg, **extra):
    out = {
        "functional": functional, "alpha": p.alpha, "rho": p.rho, "x": x0,
        "n_paths": cfg.n_paths, "dt": cfg.dt, "clock": cfg.clock, "seed": cfg.seed,
    }
    out.update(extra)
    return out


def _sample_set(functional, values, codes, steps, accepted, meta):
    meta = dict(meta)
    meta["accepted"] = int(np.count_nonzero(accepted))
    meta["censored"] = int(accepted.size - meta["accepted"])
    return SampleSet(functional, np.arange(values.size), values, codes, steps, accepted, meta)


# ---------------------------------------------------------------------------
# Paths and the Lamperti-Kiu transform


def simulate_path(x0: float, p: StableParams, cfg: McConfig, rng_index: int = 0) -> GridPath:
    """One grid path from x0 using the stream of path ``rng_index`` under ``cfg.seed``.

    Stops at the first grid time with |X| > r_stop |x0| (alpha < 1 or = 1),
    |X| < eps_abs |x0| (alpha > 1), or at t_max.
    """
    x0 = float(x0)
    if x0 == 0.0:
        raise DomainError("simulate_path needs x0 != 0")
    ax = abs(x0)
    if p.regime is Regime.HIGH:
        task = _task(x0, p, cfg, r_in=cfg.eps_abs * ax)
    else:
        task = _task(x0, p, cfg, r_out=cfg.r_stop * ax)
    _, _, code, ts, xs = _run_one(task, rng_index, record=True)
    times = np.concatenate([[0.0], ts])
    values = np.concatenate([[x0], xs])
    absorbed = values.size - 1 if code == _INNER else None
    return GridPath(times, values, absorbed, STOP_REASONS[code])


def lamperti_kiu(path: GridPath, p: StableParams) -> MapPath:
    """xi = log|X/x0|, J = sign X, s(t) = int_0^t |X_u/x0|^-alpha du (left-endpoint rule)."""
    vals = path.values
    if np.any(vals == 0.0):
        raise DomainError("path sits exactly at 0; the Lamperti-Kiu transform is undefined there")
    x0 = float(vals[0])
    r = np.abs(vals / x0)
    ds = np.diff(path.times) * r[:-1] ** (-p.alpha)
    s = np.concatenate([[0.0], np.cumsum(ds)])
    return MapPath(s, np.log(r), np.sign(vals).astype(np.int8), x0)


def lamperti_kiu_inverse(m: MapPath, p: StableParams) -> GridPath:
    """Invert :func:`lamperti_kiu`: t(s) = int_0^s exp(alpha xi) ds, X = J |x0| e^xi."""
    dt = np.diff(m.s_times) * np.exp(p.alpha * m.xi[:-1])
    t = np.concatenate([[0.0], np.cumsum(dt)])
    return GridPath(t, m.j * abs(m.x0) * np.exp(m.xi))


def map_infimum_event(m: MapPath, level: float) -> bool:
    """Event {xi stays above ``level`` and J = +1 at the infimum of xi}."""
    k = int(np.argmin(m.xi))
    return bool(m.xi[k] > level and m.j[k] == 1)


# ---------------------------------------------------------------------------
# Estimators


def closest_reach_mc(x: float, p: StableParams, cfg: McConfig) -> SampleSet:
    """Signed position of least |X| over grid times before |X| first exceeds r_stop x."""
    p.require(Regime.LOW)
    if not x > 0.0:
        raise DomainError("closest reach needs x > 0")
    task = _task(x, p, cfg, r_out=cfg.r_stop * x)
    states, steps, codes = _run_paths(task, cfg.n_paths, cfg.workers)
    return _sample_set("closest", states[:, _XMIN], codes, steps, codes == _OUTER,
                       _meta("closest", x, p, cfg, r_stop=cfg.r_stop))


def furthest_reach_mc(x: float, p: StableParams, cfg: McConfig) -> SampleSet:
    """Signed position of greatest |X| over grid times before |X| drops below eps_abs x."""
    p.require(Regime.HIGH)
    if not x > 0.0:
        raise DomainError("furthest reach needs x > 0")
    task = _task(x, p, cfg, r_in=cfg.eps_abs * x)
    states, steps, codes = _run_paths(task, cfg.n_paths, cfg.workers)
    return _sample_set("furthest", states[:, _XMAX], codes, steps, codes == _INNER,
                       _meta("furthest", x, p, cfg, eps_abs=cfg.eps_abs))


def reflected_stationary_mc(p: StableParams, cfg: McConfig, x0: float = 0.5) -> SampleSet:
    """R_T = X_T / (M_T v 1) at T = t_max, one independent path per sample, from x0 in (-1, 1)."""
    p.require(Regime.LOW)
    if not (-1.0 < x0 < 1.0) or x0 == 0.0:
        raise DomainError("reflected sampling needs x0 in (-1, 1) \\ {0}")
    if not math.isfinite(cfg.t_max):
        raise DomainError("reflected sampling needs a finite t_max")
    task = _task(x0, p, cfg, clock="running_max")
    states, steps, codes = _run_paths(task, cfg.n_paths, cfg.workers)
    m = np.maximum(np.maximum(states[:, _MRUN], np.abs(states[:, _X])), 1.0)
    values = states[:, _X] / m
    return _sample_set("reflected", values, codes, steps, codes == _HORIZON,
                       _meta("reflected", x0, p, cfg, t_max=cfg.t_max, clock="running_max"))


def avoid_strip_samples(x: float, p: StableParams, cfg: McConfig) -> SampleSet:
    """Per-path strip-avoidance runs from x > 1.

    ``values`` holds the signed grid position of least radius; a path is
    accepted when it is decided (radius below 1, stop ``inner``, or above
    r_stop x, stop ``outer``) and avoided the strip when it stopped ``outer``.
    """
    p.require(Regime.LOW)
    if not x > 1.0:
        raise DomainError("avoid_strip_mc needs x > 1")
    task = _task(x, p, cfg, r_out=cfg.r_stop * x, r_in=1.0)
    states, steps, codes = _run_paths(task, cfg.n_paths, cfg.workers)
    decided = (codes == _OUTER) | (codes == _INNER)
    return _sample_set("avoid", states[:, _XMIN], codes, steps, decided,
                       _meta("avoid", x, p, cfg, r_stop=cfg.r_stop))


def avoid_estimate(samples: SampleSet, level: float = 0.99) -> AvoidEstimate:
    """Binomial estimate of the avoidance probability from :func:`avoid_strip_samples`."""
    n = samples.n_accepted
    if n == 0:
        raise InsufficientSamplesError("every path was censored")
    k = int(np.count_nonzero(samples.stop_code == _OUTER))
    lo, hi = _wilson(k, n, level)
    return AvoidEstimate(k / n, k, n, samples.n_censored, lo, hi, level)


def avoid_strip_mc(x: float, p: StableParams, cfg: McConfig, level: float = 0.99) -> AvoidEstimate:
    """Fraction of paths from x > 1 whose grid radius never falls below 1 before exceeding r_stop x."""
    return avoid_estimate(avoid_strip_samples(x, p, cfg), level)


def cauchy_exit_mc(x: float, cfg: McConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """Symmetric Cauchy from x in (-1, 1), run until it leaves (-1, 1).

    Returns (u, y) for the paths that leave upwards with sup > -inf before
    passage, u = 1 - sup and y = overshoot, plus the number of paths run.
    """
    if not -1.0 < x < 1.0:
        raise DomainError("cauchy_exit_mc needs x in (-1, 1)")
    p = StableParams(1.0, 0.5)
    task = _task(x, p, cfg, clock="uniform", box=(-1.0, 1.0))
    states, _, codes = _run_paths(task, cfg.n_paths, cfg.workers)
    up = (codes == _OUTER) & (states[:, _X] >= 1.0) & (states[:, _SUP] > -states[:, _INF])
    return 1.0 - states[up, _SUP], states[up, _X] - 1.0, cfg.n_paths


def hit_interval_mc(x: float, lo: float, hi: float, p: StableParams, cfg: McConfig) -> AvoidEstimate:
    """Fraction of paths from x in (-1, 1) landing in [lo, hi] on the grid before leaving (-1, 1)."""
    if not (-1.0 < x < 1.0) or not (-1.0 < lo < hi < 1.0) or lo <= x <= hi:
        raise DomainError("hit_interval_mc needs x, [lo, hi] inside (-1, 1) with x outside [lo, hi]")
    task = _task(x, p, cfg, clock="boundary", box=(-1.0, 1.0), target=(lo, hi))
    _, _, codes = _run_paths(task, cfg.n_paths, cfg.workers)
    decided = (codes == _TARGET) | (codes == _OUTER)
    n = int(np.count_nonzero(decided))
    if n == 0:
        raise InsufficientSamplesError("every path was censored")
    k = int(np.count_nonzero(codes == _TARGET))
    a, b = _wilson(k, n, 0.99)
    return AvoidEstimate(k / n, k, n, int(codes.size - n), a, b, 0.99)
