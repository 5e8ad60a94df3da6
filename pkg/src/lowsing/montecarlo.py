"""Monte Carlo for the subordinate process and the thinned jump SDE.

The thinned SDE proposes jumps from the dominating intensity ``J(z)/c0`` on
``eps < |z| <= r_max`` and accepts a proposal ``z`` at state ``x`` with
probability ``a(x, z) c0``. Paths advance together in vectorised rounds; round
``k`` handles candidate event ``k`` of every live path.

Randomness for the SDE comes from a counter-based generator: every uniform is
a hash of ``(seed, path, event, slot)``, so a path's trajectory does not
depend on how many other paths are simulated or in which order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, interpolate

from .fields import GridField
from .operator import CoefficientField
from .orlicz import MeasuredSamples, NFunction, luxemburg_norm
from .symbols import SubordinatorSpec, kernel_first_moment, kernel_tail_mass, sphere_area

__all__ = [
    "PathConfig",
    "JumpPath",
    "Estimate",
    "ThinningError",
    "counter_uniform",
    "sample_gamma_increments",
    "sample_vg_path",
    "RadialSampler",
    "radial_sampler",
    "simulate_thinned_sde",
    "simulate_endpoints",
    "resolvent_mc",
    "mollified_indicator",
    "krylov_report",
    "KrylovReport",
    "exit_time_mc",
]


class ThinningError(RuntimeError):
    """An acceptance probability exceeded one."""


# -- counter-based uniforms ------------------------------------------------------------

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_K_PATH = np.uint64(0xD1B54A32D192ED03)
_K_EVENT = np.uint64(0xAEF17502108EF2D9)
_K_SLOT = np.uint64(0xDB4F0B9175AE2165)


def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def counter_uniform(seed: int, path, event, slot: int) -> np.ndarray:
    """Uniforms in ``(0, 1)`` keyed by ``(seed, path, event, slot)`` (splitmix64 finaliser)."""
    with np.errstate(over="ignore"):
        key = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLD)
        h = key ^ (np.asarray(path, dtype=np.uint64) * _K_PATH)
        h = _mix(h + _GOLD)
        h = h ^ (np.asarray(event, dtype=np.uint64) * _K_EVENT)
        h = _mix(h + _GOLD)
        h = h ^ (np.uint64(slot) * _K_SLOT)
        h = _mix(h + _GOLD)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


# -- configuration and records ---------------------------------------------------------

@dataclass(frozen=True)
class PathConfig:
    T: float = 1.0
    eps: float = 1e-3
    lam: float = 1.0
    n_paths: int = 10_000
    seed: int = 0
    x0: tuple = (0.0,)
    r_max: float = 8.0

    def __post_init__(self):
        if not (self.T > 0 and self.eps > 0 and self.lam > 0):
            raise ValueError("T, eps and lambda must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.r_max > self.eps:
            raise ValueError("r_max must exceed eps")

    @property
    def d(self) -> int:
        return len(self.x0)


@dataclass(frozen=True)
class JumpPath:
    """Accepted jumps of one trajectory; the state is constant between events."""

    times: np.ndarray      # (k,)
    jumps: np.ndarray      # (k, d)
    states: np.ndarray     # (k + 1, d), states[0] = x0
    n_candidates: int
    horizon: float

    def state_at(self, t: float) -> np.ndarray:
        return self.states[int(np.searchsorted(self.times, t, side="right"))]

    def to_csv(self, path) -> None:
        d = self.states.shape[1]
        names = ["x", "y"][:d]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time [time units]"] + [f"jump_{c} [length]" for c in names]
                       + [f"state_{c} [length]" for c in names])
            for k in range(self.times.size):
                w.writerow([repr(float(self.times[k]))] + [repr(float(v)) for v in self.jumps[k]]
                           + [repr(float(v)) for v in self.states[k + 1]])


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    eps_bias: float = 0.0
    horizon_bias: float = 0.0
    large_jump_bias: float = 0.0

    @classmethod
    def from_samples(cls, samples: np.ndarray, **biases) -> "Estimate":
        x = np.asarray(samples, dtype=float)
        n = x.size
        if n < 2:
            raise ValueError("an estimate needs at least two samples")
        # exactly rounded sums: independent of sample order
        mean = math.fsum(x) / n
        var = math.fsum((x - mean) ** 2) / (n - 1)
        return cls(mean, math.sqrt(var / n), n, **biases)

    def total_bias(self) -> float:
        return self.eps_bias + self.horizon_bias + self.large_jump_bias


# -- gamma subordinator and variance gamma -----------------------------------------------

def sample_gamma_increments(dt: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Independent Gamma(shape=dt, rate=1) draws."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return rng.gamma(dt, 1.0, size=count)


def sample_vg_path(t_grid, rng: np.random.Generator, d: int = 1, n_paths: int = 1) -> np.ndarray:
    """``Z = sqrt(2) B_{S}`` at the times ``t_grid`` (starting from 0 at time 0).

    Returns an array of shape ``(n_paths, len(t_grid), d)``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing and nonnegative")
    dt = np.diff(np.concatenate([[0.0], t]))
    ds = np.empty((n_paths, t.size))
    for i, h in enumerate(dt):
        ds[:, i] = rng.gamma(h, 1.0, size=n_paths) if h > 0 else 0.0
    dz = np.sqrt(2.0 * ds)[..., None] * rng.standard_normal((n_paths, t.size, d))
    return np.cumsum(dz, axis=1)


# -- the radial law of candidate jumps ---------------------------------------------------

@dataclass(frozen=True)
class RadialSampler:
    """Inverse CDF of ``|z|`` under ``J(z) dz`` restricted to ``eps < |z| <= r_max``."""

    eps: float
    r_max: float
    mass: float            # int_{eps < |z| <= r_max} J
    knots_r: np.ndarray
    knots_F: np.ndarray
    _inv: Callable = field(repr=False, compare=False)

    def __call__(self, u):
        return np.exp(self._inv(np.clip(u, 0.0, 1.0)))


_SAMPLERS: dict = {}


def radial_sampler(spec: SubordinatorSpec, eps: float, r_max: float, knots: int = 4096) -> RadialSampler:
    key = (spec, eps, r_max, knots)
    if key in _SAMPLERS:
        return _SAMPLERS[key]
    # the radial density in log r is S_d r^d j(r); integrate on a finer grid, then tabulate
    fine = np.linspace(math.log(eps), math.log(r_max), 4 * (knots - 1) + 1)
    r = np.exp(fine)
    dens = sphere_area(spec.dimension) * r ** spec.dimension * np.asarray(spec.jump_kernel(r), dtype=float)
    cum = integrate.cumulative_simpson(dens, x=fine, initial=0.0)
    if not np.all(np.diff(cum) > 0):
        raise ValueError("radial CDF tabulation is not strictly increasing")
    mass = kernel_tail_mass(spec, eps) - kernel_tail_mass(spec, r_max)
    F = cum[::4] / cum[-1]
    lr = fine[::4]
    inv = interpolate.PchipInterpolator(F, lr)
    s = RadialSampler(eps, r_max, mass, np.exp(lr), F, inv)
    _SAMPLERS[key] = s
    return s


# -- thinned SDE -----------------------------------------------------------------------

def _directions(seed, paths, event, d):
    if d == 1:
        return np.where(counter_uniform(seed, paths, event, 2) < 0.5, -1.0, 1.0)[:, None]
    th = 2.0 * np.pi * counter_uniform(seed, paths, event, 2)
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def _evaluate_coefficient(a: CoefficientField, x: np.ndarray, z: np.ndarray, c0: float) -> np.ndarray:
    vals = np.asarray(a(x, z), dtype=float)
    p = vals * c0
    if np.any(p > 1.0 + 1e-12):
        raise ThinningError(f"acceptance probability {float(np.max(p))} exceeds 1: a must stay below 1/c0")
    return p


def _run_rounds(a: CoefficientField, spec: SubordinatorSpec, cfg: PathConfig, on_interval=None,
                on_jump=None, stop=None, paths: Optional[np.ndarray] = None):
    """Advance all paths event by event.

    ``on_interval(idx, x, t0, t1)`` sees each holding interval ``[t0, t1]`` of
    the paths ``idx`` (positions into ``paths``) in states ``x``.
    ``on_jump(idx, t, x_old, x_new)`` sees accepted jumps.
    ``stop(idx, x)`` may return a boolean mask of paths to retire.
    Returns the final states.
    """
    d = cfg.d
    if spec.dimension != d:
        raise ValueError("start point and spec dimension differ")
    sampler = radial_sampler(spec, cfg.eps, cfg.r_max)
    c0 = a.c0
    rate = sampler.mass / c0
    if paths is None:
        paths = np.arange(cfg.n_paths, dtype=np.uint64)
    n = paths.size
    x = np.tile(np.asarray(cfg.x0, dtype=float), (n, 1))
    t = np.zeros(n)
    live = np.arange(n)
    event = 0
    while live.size:
        pid = paths[live]
        t_new = t[live] - np.log(counter_uniform(cfg.seed, pid, event, 0)) / rate
        done = t_new >= cfg.T
        t_end = np.minimum(t_new, cfg.T)
        if on_interval is not None:
            on_interval(live, x[live], t[live], t_end)
        t[live] = t_end
        go = live[~done]
        if go.size:
            pg = paths[go]
            rad = sampler(counter_uniform(cfg.seed, pg, event, 1))
            z = rad[:, None] * _directions(cfg.seed, pg, event, d)
            p = _evaluate_coefficient(a, x[go], z, c0)
            acc = counter_uniform(cfg.seed, pg, event, 3) < p
            jumped = go[acc]
            if jumped.size:
                x_old = x[jumped].copy()
                x[jumped] += z[acc]
                if on_jump is not None:
                    on_jump(jumped, t[jumped], x_old, x[jumped])
            if stop is not None and jumped.size:
                retire = stop(jumped, x[jumped])
                if np.any(retire):
                    t[jumped[retire]] = np.inf
        alive = (t[live] < cfg.T) & ~done
        live = live[alive]
        event += 1
    return x


def simulate_thinned_sde(a: CoefficientField, spec: SubordinatorSpec, config: PathConfig,
                         path_index: int = 0) -> JumpPath:
    """One trajectory of the thinned SDE (path ``path_index`` of the seeded family)."""
    times, jumps, states = [], [], [np.asarray(config.x0, dtype=float)]
    counter = {"n": 0}

    def on_interval(idx, x, t0, t1):
        counter["n"] += 1

    def on_jump(idx, t, x_old, x_new):
        times.append(float(t[0]))
        jumps.append(x_new[0] - x_old[0])
        states.append(x_new[0].copy())

    _run_rounds(a, spec, config, on_interval, on_jump,
                paths=np.array([path_index], dtype=np.uint64))
    d = config.d
    return JumpPath(np.array(times), np.array(jumps).reshape(-1, d), np.array(states).reshape(-1, d),
                    counter["n"] - 1, config.T)


def simulate_endpoints(a: CoefficientField, spec: SubordinatorSpec, config: PathConfig) -> np.ndarray:
    """``X_T`` for every path, shape ``(n_paths, d)``."""
    return _run_rounds(a, spec, config)


# -- estimators ------------------------------------------------------------------------

FieldLike = Union[GridField, Callable]


def _as_function(f: FieldLike) -> Callable:
    if isinstance(f, GridField):
        return lambda x: f.interpolate(x if f.d > 1 else x[:, :1])
    return f


def _discount_weight(lam, t0, t1):
    # (e^{-lam t0} - e^{-lam t1}) / lam without cancellation
    return np.exp(-lam * t0) * (-np.expm1(-lam * (t1 - t0))) / lam


def _small_jump_bias(f: FieldLike, spec, a: CoefficientField, cfg: PathConfig, lam: float) -> float:
    # for z-only coefficients grad u = G_lam grad f, so |grad u| <= |grad f| / lam
    if isinstance(f, GridField):
        g = float(np.max(f.gradient_magnitude()))
    else:
        return float("nan")
    return g / lam * kernel_first_moment(spec, cfg.eps) / (a.c0 * lam)


def _sup(f: FieldLike, cfg: PathConfig) -> float:
    if isinstance(f, GridField):
        return f.max_abs()
    return float("nan")


def resolvent_mc(f: FieldLike, lam: float, config: PathConfig,
                 a: Optional[CoefficientField] = None,
                 spec: Optional[SubordinatorSpec] = None) -> Estimate:
    """``E_x0 int_0^T e^{-lam t} f(X_t) dt`` with exact integration between events."""
    return _resolvent_many([f], lam, config, a, spec)[0]


def _resolvent_many(fs: Sequence[FieldLike], lam: float, config: PathConfig,
                    a: Optional[CoefficientField], spec: Optional[SubordinatorSpec]) -> list:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a = a or CoefficientField.constant(1.0)
    spec = spec or SubordinatorSpec.gamma(config.d)
    funcs = [_as_function(f) for f in fs]
    acc = np.zeros((len(fs), config.n_paths))

    def on_interval(idx, x, t0, t1):
        w = _discount_weight(lam, t0, t1)
        for i, fn in enumerate(funcs):
            acc[i, idx] += np.asarray(fn(x), dtype=float) * w

    _run_rounds(a, spec, config, on_interval)
    out = []
    tail = math.exp(-lam * config.T) / lam
    big = kernel_tail_mass(spec, config.r_max) / a.c0
    for i, f in enumerate(fs):
        sup = _sup(f, config)
        out.append(Estimate.from_samples(
            acc[i], eps_bias=_small_jump_bias(f, spec, a, config, lam),
            horizon_bias=tail * sup,
            large_jump_bias=2.0 * sup * big / lam ** 2))
    return out


def mollified_indicator(r: float, center=(0.0,)) -> Callable:
    """``(1 - tanh((|x - c| - r) / (r/8))) / 2``, a smooth stand-in for the ball indicator."""
    c = np.asarray(center, dtype=float)
    width = r / 8.0

    def f(x):
        dist = np.sqrt(np.sum((np.asarray(x, dtype=float) - c) ** 2, axis=-1))
        return 0.5 * (1.0 - np.tanh((dist - r) / width))

    return f


def _indicator_norm(r: float, A: NFunction, d: int) -> float:
    # the profile is negligible beyond 4r, so a local grid carries the whole norm
    h = r / 256.0
    ax = np.arange(-4.0 * r, 4.0 * r, h) + 0.5 * h
    if d == 1:
        pts = ax[:, None]
    else:
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    vals = mollified_indicator(r, (0.0,) * d)(pts)
    return luxemburg_norm(MeasuredSamples(vals, h ** d), A)


@dataclass(frozen=True)
class KrylovReport:
    radii: list
    estimates: list          # Estimate per radius
    norms: list              # ||f_r||_A
    ratios: list             # lam * estimate / ||f_r||_A
    max_ratio: float
    exponent: float          # least-squares slope of log estimate against log r
    growth_c: float          # measured c in A(t) >= psi^{-1}(c t^{1+e})^d
    growth_e: float


def krylov_report(radii: Sequence[float], lam: float, A: NFunction, a: CoefficientField,
                  spec: SubordinatorSpec, config: PathConfig) -> KrylovReport:
    """Discounted occupation of shrinking balls against the Orlicz norm of their indicators."""
    from .fields import morrey2_exponent
    e = morrey2_exponent(spec, A, spec.dimension)
    if e <= 0:
        raise ValueError("the N-function does not dominate psi^{-1}(t^{1+e})^d for any e > 0")
    radii = [float(r) for r in radii]
    fs = [mollified_indicator(r, config.x0) for r in radii]
    cfg = PathConfig(config.T, config.eps, lam, config.n_paths, config.seed, config.x0, config.r_max)
    ests = _resolvent_many(fs, lam, cfg, a, spec)
    norms = [_indicator_norm(r, A, spec.dimension) for r in radii]
    ratios = [lam * est.mean / nm for est, nm in zip(ests, norms)]
    slope = float(np.polyfit(np.log(radii), np.log([est.mean for est in ests]), 1)[0])
    return KrylovReport(radii, ests, norms, ratios, max(ratios), slope, 1.0, e)


def exit_time_mc(x0, delta: float, lam: float, config: PathConfig,
                 a: Optional[CoefficientField] = None,
                 spec: Optional[SubordinatorSpec] = None) -> Estimate:
    """``E exp(-lam min(tau, T))`` for the first exit time of the ball ``B_delta(x0)``.

    Paths that have not left by ``T`` contribute ``exp(-lam T)``; that cap is
    reported as the horizon bias.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    a = a or CoefficientField.constant(1.0)
    x0 = tuple(float(v) for v in np.atleast_1d(x0))
    spec = spec or SubordinatorSpec.gamma(len(x0))
    cfg = PathConfig(config.T, config.eps, lam, config.n_paths, config.seed, x0, config.r_max)
    tau = np.full(cfg.n_paths, cfg.T)
    origin = np.asarray(x0)

    def on_jump(idx, t, x_old, x_new):
        out = np.sqrt(np.sum((x_new - origin) ** 2, axis=1)) > delta
        hit = idx[out]
        tau[hit] = np.minimum(tau[hit], t[out])

    def stop(idx, x):
        return np.sqrt(np.sum((x - origin) ** 2, axis=1)) > delta

    _run_rounds(a, spec, cfg, on_jump=on_jump, stop=stop)
    vals = np.exp(-lam * tau)
    return Estimate.from_samples(vals, horizon_bias=math.exp(-lam * cfg.T),
                                 eps_bias=kernel_first_moment(spec, cfg.eps) / (a.c0 * lam * delta))
