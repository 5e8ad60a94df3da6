"""Exponents of subordinate Brownian motion together with their jump kernels.

``Z_t = sqrt(2) B_{S_t}`` where ``S`` is a driftless subordinator with Laplace
exponent ``phi`` and Levy density ``pi``. Then

* ``psi(R) = phi(R**2)`` is the Levy exponent of ``Z`` (radial form),
* ``rho(r) = 1 / psi(1/r)`` is the intrinsic scale,
* ``j(r) = int_0^inf (4 pi t)^{-d/2} exp(-r^2 / 4t) pi(t) dt`` is the radial
  jump kernel, ``J(z) = j(|z|)``.

Two closed-form families are provided (``gamma`` with ``phi = log(1 + lam)``
and ``stable(alpha)`` with ``phi = lam**(alpha/2)``); ``custom`` specs take
user callables. Every kernel integral is computed by quadrature; the closed
forms known for the two families are kept out of this module so tests can
use them as independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "QuadratureError",
    "UnsupportedFamilyError",
    "SubordinatorSpec",
    "CustomScale",
    "psi_eval",
    "psi_inverse",
    "rho_eval",
    "jump_kernel",
    "potential_density",
    "kernel_tail_mass",
    "kernel_first_moment",
    "sphere_area",
    "morrey_scale",
]


class QuadratureError(RuntimeError):
    """A quadrature failed to reach its relative error target."""


class UnsupportedFamilyError(ValueError):
    pass


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d=1, 2*pi for d=2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _bisect_increasing(fn: Callable[[float], float], y: float, rtol: float = 1e-12) -> float:
    """Smallest x >= 0 with fn(x) >= y for increasing fn, by geometric bracketing."""
    if y <= 0.0:
        return 0.0
    hi = 1.0
    while fn(hi) < y:
        hi *= 2.0
        if hi > 1e300:
            raise OverflowError("bracket growth exceeded float range")
    lo = hi / 2.0
    while fn(lo) >= y and lo > 1e-300:
        hi, lo = lo, lo / 2.0
    return optimize.bisect(lambda x: fn(x) - y, lo, hi, xtol=1e-300, rtol=rtol, maxiter=2000)


@dataclass(frozen=True)
class SubordinatorSpec:
    """A subordinator family plus the spatial dimension of the subordinated motion."""

    family: str
    alpha: float = float("nan")
    dimension: int = 1
    _phi: Optional[Callable] = field(default=None, repr=False, compare=False)
    _dphi: Optional[Callable] = field(default=None, repr=False, compare=False)
    _levy: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.family == "stable" and not 0.0 < self.alpha < 2.0:
            raise ValueError("stable family needs alpha in (0, 2)")
        if self.family not in ("gamma", "stable", "custom"):
            raise ValueError(f"unknown subordinator family {self.family!r}")

    @classmethod
    def gamma(cls, dimension: int = 1) -> "SubordinatorSpec":
        return cls("gamma", float("nan"), dimension)

    @classmethod
    def stable(cls, alpha: float, dimension: int = 1) -> "SubordinatorSpec":
        return cls("stable", float(alpha), dimension)

    @classmethod
    def custom(cls, phi, dphi, levy_density, dimension: int = 1) -> "SubordinatorSpec":
        return cls("custom", float("nan"), dimension, phi, dphi, levy_density)

    @classmethod
    def parse(cls, text: str, dimension: int = 1) -> "SubordinatorSpec":
        """Parse ``gamma`` or ``stable alpha=1.0`` (optionally ``dimension=2``)."""
        toks = text.replace(",", " ").split()
        kv = dict(t.split("=", 1) for t in toks[1:] if "=" in t)
        dim = int(kv.get("dimension", dimension))
        if toks[0] in ("gamma", "subordinator=gamma"):
            return cls.gamma(dim)
        if toks[0] in ("stable", "subordinator=stable"):
            return cls.stable(float(kv.get("alpha", 1.0)), dim)
        raise ValueError(f"cannot parse subordinator spec {text!r}")

    def with_dimension(self, d: int) -> "SubordinatorSpec":
        return SubordinatorSpec(self.family, self.alpha, d, self._phi, self._dphi, self._levy)

    def describe(self) -> str:
        if self.family == "stable":
            return f"stable alpha={self.alpha!r} dimension={self.dimension}"
        return f"{self.family} dimension={self.dimension}"

    # -- Laplace exponent and Levy density --------------------------------

    def phi(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.family == "gamma":
            return np.log1p(lam)
        if self.family == "stable":
            return lam ** (self.alpha / 2.0)
        return np.asarray(self._phi(lam), dtype=float)

    def dphi(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.family == "gamma":
            return 1.0 / (1.0 + lam)
        if self.family == "stable":
            a = self.alpha / 2.0
            with np.errstate(divide="ignore"):
                return a * lam ** (a - 1.0)
        return np.asarray(self._dphi(lam), dtype=float)

    def log_levy_density(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "gamma":
            return -t - np.log(t)
        if self.family == "stable":
            a = self.alpha / 2.0
            return math.log(a / math.gamma(1.0 - a)) - (1.0 + a) * np.log(t)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self._levy(t), dtype=float))

    def levy_density(self, t):
        return np.exp(self.log_levy_density(t))

    # -- Levy exponent and intrinsic scale ---------------------------------

    def psi(self, R):
        R = np.asarray(R, dtype=float)
        return self.phi(R * R)

    def dpsi(self, R):
        R = np.asarray(R, dtype=float)
        return 2.0 * R * self.dphi(R * R)

    def psi_of_log(self, v):
        """``psi(exp(v))`` evaluated without overflow for large ``v``."""
        v = np.asarray(v, dtype=float)
        if self.family == "gamma":
            # log(1 + e^{2v})
            return np.logaddexp(0.0, 2.0 * v)
        if self.family == "stable":
            return np.exp(self.alpha * v)
        return self.psi(np.exp(v))

    def rdpsi_of_log(self, v):
        """``t * psi'(t)`` at ``t = exp(v)``."""
        v = np.asarray(v, dtype=float)
        if self.family == "gamma":
            # 2 t^2 / (1 + t^2)
            return 2.0 * special.expit(2.0 * v)
        if self.family == "stable":
            return self.alpha * np.exp(self.alpha * v)
        t = np.exp(v)
        return t * self.dpsi(t)

    def psi_inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self.family == "gamma":
            return np.sqrt(np.expm1(y))
        if self.family == "stable":
            return y ** (1.0 / self.alpha)
        return np.vectorize(lambda v: _bisect_increasing(lambda R: float(self.psi(R)), v),
                            otypes=[float])(y)

    def rho(self, r):
        r = np.asarray(r, dtype=float)
        return 1.0 / self.psi(1.0 / r)

    # -- kernels ------------------------------------------------------------

    def jump_kernel(self, r, rtol: float = 1e-6):
        return jump_kernel(self, r, rtol=rtol)


@dataclass(frozen=True)
class CustomScale:
    """An increasing scale function usable wherever fields expect ``psi``.

    ``psi_inverse`` is computed by bisection with geometric bracket growth.
    """

    fn: Callable
    name: str = "custom"
    # scalar results are memoised: each evaluation may itself be a quadrature
    _memo: dict = field(default_factory=dict, repr=False, compare=False)
    _inv_memo: dict = field(default_factory=dict, repr=False, compare=False)

    def _value(self, x: float) -> float:
        if x <= 0:
            return 0.0
        if x not in self._memo:
            self._memo[x] = float(self.fn(x))
        return self._memo[x]

    def psi(self, R):
        R = np.asarray(R, dtype=float)
        return np.vectorize(self._value, otypes=[float])(R)

    def _inverse(self, v: float) -> float:
        if v not in self._inv_memo:
            self._inv_memo[v] = _bisect_increasing(self._value, v)
        return self._inv_memo[v]

    def psi_inverse(self, y):
        y = np.asarray(y, dtype=float)
        return np.vectorize(self._inverse, otypes=[float])(y)

    def rho(self, r):
        r = np.asarray(r, dtype=float)
        return 1.0 / self.psi(1.0 / r)

    def describe(self) -> str:
        return self.name


# -- module-level operations ----------------------------------------------------

def psi_eval(spec: SubordinatorSpec, R: float) -> float:
    if R < 0:
        raise ValueError("psi needs R >= 0")
    return float(spec.psi(R))


def psi_inverse(spec: SubordinatorSpec, y: float) -> float:
    if y < 0:
        raise ValueError("psi_inverse needs y >= 0")
    return float(spec.psi_inverse(y))


def rho_eval(spec: SubordinatorSpec, r: float) -> float:
    if not r > 0:
        raise ValueError(f"rho needs r > 0, got {r}")
    return float(spec.rho(r))


def _kernel_on_tgrid(spec: SubordinatorSpec, r: np.ndarray, ppd: int) -> np.ndarray:
    d = spec.dimension
    rmin, rmax = float(np.min(r)), float(np.max(r))
    lt_lo = math.log(min(1e-12, 1e-3 * rmin * rmin))
    lt_hi = math.log(max(1e4, 1e3 * rmax * rmax))
    n = int(math.ceil((lt_hi - lt_lo) / math.log(10.0) * ppd)) + 1
    lt = np.linspace(lt_lo, lt_hi, n)
    t = np.exp(lt)
    # log of the integrand in the variable log t
    base = -0.5 * d * np.log(4.0 * math.pi * t) + spec.log_levy_density(t) + lt
    out = np.empty(r.shape, dtype=float)
    flat_r, flat_out = r.ravel(), out.reshape(-1)
    chunk = max(1, 2_000_000 // n)
    h = lt[1] - lt[0]
    for i in range(0, flat_r.size, chunk):
        rr = flat_r[i:i + chunk, None]
        logs = base[None, :] - rr * rr / (4.0 * t[None, :])
        vals = np.exp(logs)
        acc = h * (vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1]))
        # power-law tail beyond the grid (slowly decaying for heavy Levy densities)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = (logs[:, -1] - logs[:, -2]) / h
        tail = np.where(slope < 0, vals[:, -1] / np.where(slope < 0, -slope, 1.0), 0.0)
        flat_out[i:i + chunk] = acc + tail
    return out


def jump_kernel(spec: SubordinatorSpec, r, rtol: float = 1e-6):
    """Radial jump kernel ``j(r)`` by log-grid quadrature in the subordination time.

    The grid is refined by doubling the points per decade until successive
    results agree to ``rtol``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("jump_kernel needs r > 0")
    ppd = 16
    prev = _kernel_on_tgrid(spec, r_arr, ppd)
    while ppd < 2048:
        ppd *= 2
        cur = _kernel_on_tgrid(spec, r_arr, ppd)
        err = np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300))
        if err < rtol:
            return float(cur) if np.ndim(r) == 0 else cur
        prev = cur
    raise QuadratureError(f"jump_kernel did not converge: relative change {err:.3e} at {ppd} points/decade")


def _radial_tail(spec: SubordinatorSpec, r: float, ppd: int) -> float:
    # integrate in log(s - r) so that kernels decaying on an O(1) scale stay
    # resolved when r is large
    d = spec.dimension
    lx_lo = math.log(r * 1e-10)
    lx_hi = math.log(max(r, 1.0) * 1e8)
    n = int(math.ceil((lx_hi - lx_lo) / math.log(10.0) * ppd)) | 1
    lx = np.linspace(lx_lo, lx_hi, n)
    x = np.exp(lx)
    s = r + x
    g = jump_kernel(spec, s) * s ** (d - 1) * x
    val = integrate.simpson(g, x=lx) + g[0]  # g ~ x j(r) r^{d-1} below the grid
    if g[-1] > 0 and g[-2] > 0:
        slope = (math.log(g[-1]) - math.log(g[-2])) / (lx[-1] - lx[-2])
        if slope < 0:
            val += g[-1] / (-slope)
    return sphere_area(d) * val


def _radial_first_moment(spec: SubordinatorSpec, r: float, ppd: int) -> float:
    d = spec.dimension
    ls_hi = math.log(r)
    ls_lo = ls_hi - 14.0 * math.log(10.0)
    n = int(math.ceil(14.0 * ppd)) + 1
    ls = np.linspace(ls_lo, ls_hi, n)
    s = np.exp(ls)
    g = jump_kernel(spec, s) * s ** (d + 1)
    val = integrate.simpson(g, x=ls)
    if g[0] > 0 and g[1] > 0:
        slope = (math.log(g[1]) - math.log(g[0])) / (ls[1] - ls[0])
        if slope <= 0:
            return math.inf
        val += g[0] / slope
    return sphere_area(d) * val


def _refine(fn, spec, r, rtol=1e-6):
    ppd = 16
    prev = fn(spec, r, ppd)
    while ppd < 512:
        ppd *= 2
        cur = fn(spec, r, ppd)
        if not math.isfinite(cur) or abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(f"radial quadrature did not converge at r={r}")


def kernel_tail_mass(spec: SubordinatorSpec, r: float) -> float:
    """``int_{|z| > r} J(z) dz`` by radial quadrature over ``jump_kernel``."""
    if not r > 0:
        raise ValueError("kernel_tail_mass needs r > 0")
    return _refine(_radial_tail, spec, float(r))


def kernel_first_moment(spec: SubordinatorSpec, r: float) -> float:
    """``int_{|z| <= r} |z| J(z) dz``; infinite when the kernel is too singular."""
    if not r > 0:
        raise ValueError("kernel_first_moment needs r > 0")
    if spec.family == "stable" and spec.alpha >= 1.0:
        return math.inf
    return _refine(_radial_first_moment, spec, float(r))


def potential_density(spec: SubordinatorSpec, lam: float, u: float) -> float:
    """Density of the lambda-potential measure of the gamma subordinator.

    ``mu_lam(u) = int_0^inf exp(-lam t) u^{t-1} e^{-u} / Gamma(t) dt``.
    """
    if spec.family != "gamma":
        raise UnsupportedFamilyError("potential_density needs the gamma family (closed-form law of S_t)")
    if not (lam > 0 and u > 0):
        raise ValueError("potential_density needs lam > 0 and u > 0")
    lu = math.log(u)

    def integrand(t):
        return math.exp(-lam * t + (t - 1.0) * lu - u - special.gammaln(t))

    # mass concentrates near t ~ 1/log(1/u) for small u
    peak = 1.0 / max(1.0, -lu)
    pieces = [0.0, peak, 10.0 * peak, 1.0, 10.0, math.inf]
    pieces = sorted(set(pieces))
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-11, limit=400)
        total += val
    return total


def morrey_scale(spec: SubordinatorSpec, A) -> CustomScale:
    """The scale ``Psi(R) = (int_R^inf A^{-1}(t^d) psi'(t) / psi(t)^2 dt)^{-1}``.

    The integral is taken in ``v = log t`` so that slowly decaying tails (for
    exponential Orlicz functions the integrand decays like a power of log t)
    are handled by the infinite-interval quadrature instead of a truncation.
    """
    d = spec.dimension

    def integrand(v):
        ps = float(spec.psi_of_log(v))
        return float(A.inverse_of_log(d * v)) * float(spec.rdpsi_of_log(v)) / (ps * ps)

    def Psi(R):
        if R <= 0:
            return 0.0
        val, _ = integrate.quad(integrand, math.log(R), math.inf, epsabs=0.0, epsrel=1e-10, limit=500)
        if not math.isfinite(val) or val <= 0:
            raise QuadratureError("Morrey scale integral diverges for this N-function")
        return 1.0 / val

    return CustomScale(Psi, name=f"morrey[{spec.describe()}; {A.describe()}]")
