"""N-functions, Legendre conjugates and Luxemburg norms.

An N-function is ``A(t) = int_0^t a(s) ds`` for a nondecreasing, right
continuous density ``a`` with ``a(0) = 0`` and ``a(s) -> inf``. Three families
are supported:

* ``power(p)``      A(t) = t**p, p > 1
* ``exp_power(b)``  A(t) = exp(t**b) - 1, b >= 1
* ``custom``        density sampled on a log grid, monotone interpolation

Everything here is pure; ``NFunction`` instances are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, optimize

__all__ = [
    "NFunction",
    "MeasuredSamples",
    "nfun_eval",
    "nfun_inverse",
    "legendre_conjugate",
    "conjugate_inverse",
    "luxemburg_norm",
    "integral_functional",
]



@dataclass(frozen=True)
class NFunction:
    """A Young function A together with its family parameters.

    Use the ``power``, ``exp_power`` and ``from_density`` constructors rather
    than building instances by hand.
    """

    family: str
    param: float = float("nan")
    # custom family only: knots of the density and its monotone interpolant
    _knots: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _density: Optional[Callable] = field(default=None, repr=False, compare=False)
    _primitive: Optional[Callable] = field(default=None, repr=False, compare=False)

    @classmethod
    def power(cls, p: float) -> "NFunction":
        if not p > 1.0:
            raise ValueError(f"power family needs p > 1, got {p}")
        return cls("power", float(p))

    @classmethod
    def exp_power(cls, beta: float) -> "NFunction":
        if not beta >= 1.0:
            raise ValueError(f"exp_power family needs beta >= 1, got {beta}")
        return cls("exp_power", float(beta))

    @classmethod
    def from_density(cls, density: Callable[[np.ndarray], np.ndarray],
                     s_min: float = 1e-6, s_max: float = 1e6,
                     points_per_decade: int = 64) -> "NFunction":
        """Build a custom N-function from its density ``a``.

        The density is sampled on a log grid over ``[s_min, s_max]`` and
        interpolated with a monotone cubic (PCHIP). Below ``s_min`` it is
        linear through the origin; above ``s_max`` it continues with the slope
        of the last interval, so it stays nondecreasing and unbounded.
        """
        decades = math.log10(s_max / s_min)
        n = max(8, int(math.ceil(decades * points_per_decade)) + 1)
        s = np.concatenate([[0.0], np.geomspace(s_min, s_max, n)])
        a = np.asarray(density(s), dtype=float)
        a[0] = 0.0
        if np.any(np.diff(a) < 0) or np.any(a[1:] <= 0):
            raise ValueError("density must be positive and nondecreasing")
        pchip = interpolate.PchipInterpolator(s, a, extrapolate=False)
        prim = pchip.antiderivative()
        s_top, a_top = s[-1], a[-1]
        slope = max((a[-1] - a[-2]) / (s[-1] - s[-2]), 0.0)
        if slope == 0.0:
            slope = a_top / s_top
        A_top = float(prim(s_top))

        def dens(t):
            t = np.asarray(t, dtype=float)
            inner = np.nan_to_num(pchip(np.minimum(t, s_top)))
            return np.where(t > s_top, a_top + slope * (t - s_top), inner)

        def primitive(t):
            t = np.asarray(t, dtype=float)
            inner = np.nan_to_num(prim(np.minimum(t, s_top)))
            dt = t - s_top
            return np.where(t > s_top, A_top + a_top * dt + 0.5 * slope * dt * dt, inner)

        return cls("custom", float("nan"), s, dens, primitive)

    @classmethod
    def parse(cls, text: str) -> "NFunction":
        """Parse ``family=power p=2.0`` or ``exp_power beta=1.5``."""
        toks = text.split()
        kv = dict(tok.split("=", 1) for tok in toks if "=" in tok)
        fam = kv.get("family") or next((tok for tok in toks if "=" not in tok), None)
        if fam == "power":
            return cls.power(float(kv["p"]))
        if fam == "exp_power":
            return cls.exp_power(float(kv["beta"]))
        raise ValueError(f"cannot parse N-function from {text!r}")

    def describe(self) -> str:
        if self.family == "power":
            return f"family=power p={self.param!r}"
        if self.family == "exp_power":
            return f"family=exp_power beta={self.param!r}"
        return "family=custom"

    # -- evaluation -----------------------------------------------------

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "power":
            return t ** self.param
        if self.family == "exp_power":
            with np.errstate(over="ignore"):
                return np.expm1(t ** self.param)
        return self._primitive(t)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "power":
            return self.param * t ** (self.param - 1.0)
        if self.family == "exp_power":
            b = self.param
            with np.errstate(over="ignore"):
                return b * t ** (b - 1.0) * np.exp(t ** b)
        return self._density(t)

    def inverse(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "power":
            return s ** (1.0 / self.param)
        if self.family == "exp_power":
            return np.log1p(s) ** (1.0 / self.param)
        return np.vectorize(self._bisect_inverse, otypes=[float])(s)

    def inverse_of_log(self, w):
        """``A^{-1}(exp(w))`` without overflowing for large ``w``."""
        w = np.asarray(w, dtype=float)
        if self.family == "power":
            return np.exp(w / self.param)
        if self.family == "exp_power":
            # log(1 + e^w) = w + log1p(e^-w) for w > 0
            lg = np.where(w > 0, w + np.log1p(np.exp(-np.abs(w))), np.log1p(np.exp(np.minimum(w, 0))))
            return lg ** (1.0 / self.param)
        return self.inverse(np.exp(w))

    def _bisect_inverse(self, s: float) -> float:
        if s <= 0.0:
            return 0.0
        hi = 1.0
        while float(self(hi)) <= s:
            hi *= 2.0
        lo = 0.0 if hi == 1.0 else hi / 2.0
        return optimize.bisect(lambda t: float(self(t)) - s, lo, hi, xtol=1e-300, rtol=1e-13, maxiter=400)

    def conjugate(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "power":
            p = self.param
            q = p / (p - 1.0)
            return (p - 1.0) * (s / p) ** q
        return np.vectorize(self._conjugate_scalar, otypes=[float])(s)

    def _root_in_t(self, h, s: float) -> float:
        # h is increasing with h(0) = 0: bracket by doubling, then brentq
        hi = 1.0
        while h(hi) <= s:
            hi *= 2.0
        lo = 0.0 if hi == 1.0 else hi / 2.0
        return optimize.brentq(lambda t: h(t) - s, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=400)

    def _conjugate_scalar(self, s: float) -> float:
        # A_*(a(t)) = t a(t) - A(t): find t with a(t) = s
        if s <= float(self.density(0.0)):
            return 0.0
        t = self._root_in_t(lambda t: float(self.density(t)), s)
        return max(s * t - float(self(t)), 0.0)

    def conjugate_inverse(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "power":
            p = self.param
            return p * (s / (p - 1.0)) ** ((p - 1.0) / p)
        return np.vectorize(self._conjugate_inverse_scalar, otypes=[float])(s)

    def _conjugate_inverse_scalar(self, s: float) -> float:
        # A_*(y) = s with y = a(t) and t a(t) - A(t) = s
        if s <= 0.0:
            # A_* vanishes exactly on [0, a(0+)]; nonzero only for exp_power(1)
            return float(self.density(0.0))
        t = self._root_in_t(lambda t: t * float(self.density(t)) - float(self(t)), s)
        return float(self.density(t))

    def is_n_function_on(self, t_grid: np.ndarray) -> bool:
        """Check A(0)=0, strict increase, convexity and superlinearity on a grid."""
        t = np.asarray(t_grid, dtype=float)
        vals = np.asarray(self(t))
        if float(self(0.0)) != 0.0 or np.any(np.diff(vals) <= 0):
            return False
        slopes = np.diff(vals) / np.diff(t)
        if np.any(np.diff(slopes) < -1e-9 * np.abs(slopes[1:])):
            return False
        ratio = vals / t
        return bool(ratio[-1] > 10 * ratio[len(ratio) // 2])


@dataclass(frozen=True)
class MeasuredSamples:
    """Grid samples of a function with a uniform cell measure."""

    values: np.ndarray
    cell_volume: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if not self.cell_volume > 0:
            raise ValueError("cell_volume must be positive")
        if not np.all(np.isfinite(vals)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def total_volume(self) -> float:
        return self.cell_volume * self.values.size


def nfun_eval(A: NFunction, t: float) -> float:
    if t < 0:
        raise ValueError(f"N-function argument must be nonnegative, got {t}")
    return float(A(t))


def nfun_inverse(A: NFunction, s: float) -> float:
    if s < 0:
        raise ValueError(f"inverse N-function argument must be nonnegative, got {s}")
    return float(A.inverse(s))


def legendre_conjugate(A: NFunction, s: float) -> float:
    if s < 0:
        raise ValueError(f"conjugate argument must be nonnegative, got {s}")
    return float(A.conjugate(s))


def conjugate_inverse(A: NFunction, s: float) -> float:
    return float(A.conjugate_inverse(s))


def integral_functional(f: MeasuredSamples, A: NFunction, scale: float = 1.0) -> float:
    """Discretised ``I_A(f / scale) = sum A(|f_i| / scale) * cell_volume``."""
    with np.errstate(over="ignore"):
        return float(np.sum(A(np.abs(f.values) / scale)) * f.cell_volume)


def _conjugate_samples_functional(f: MeasuredSamples, A: NFunction, scale: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.sum(A.conjugate(np.abs(f.values) / scale)) * f.cell_volume)


def luxemburg_norm(f: MeasuredSamples, A: NFunction, conjugate: bool = False) -> float:
    """Luxemburg norm ``inf{a > 0 : I_A(f/a) <= 1}``.

    With ``conjugate=True`` the norm is taken with respect to the Legendre
    conjugate ``A_*`` instead of ``A``.

    The bracket comes from indicator bounds: the largest sample alone forces
    ``a >= max|f| / A^{-1}(1/cell_volume)``, while spreading ``max|f|`` over the
    whole grid gives ``a <= max|f| / A^{-1}(1/total_volume)``.
    """
    m = float(np.max(np.abs(f.values))) if f.values.size else 0.0
    if m == 0.0:
        return 0.0
    if conjugate:
        inv = A.conjugate_inverse
        functional = _conjugate_samples_functional
    else:
        inv = A.inverse
        functional = integral_functional
    # I(a) is decreasing in a; solve in log a for scale invariance
    def g(la):
        return functional(f, A, math.exp(la)) - 1.0

    la_lo = math.log(m / float(inv(1.0 / f.cell_volume)))
    la_hi = math.log(m / float(inv(1.0 / f.total_volume)))
    # the lower end is the exact root when a single sample carries all the mass
    if g(la_lo) <= 0.0:
        return math.exp(la_lo)
    if g(la_hi) >= 0.0:
        return math.exp(la_hi)
    root = optimize.brentq(g, la_lo, la_hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    return math.exp(root)
