"""Periodic grid fields with intrinsic dyadic blocks, plus the norms built on them.

Frequencies are angular (``exp(i k x)``) throughout. A grid of ``n`` points
per dimension on a torus of side ``L`` carries wavenumbers ``2 pi m / L``
with ``|m| <= n/2``; its Nyquist frequency is ``pi n / L``. Grid coordinates
run over ``[-L/2, L/2)`` so the origin is the sample at index ``n // 2``.

The scale argument accepted by the block operations is anything with
vectorised ``psi`` and ``psi_inverse`` methods (a ``SubordinatorSpec`` or a
``CustomScale``).
"""

from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .orlicz import MeasuredSamples, NFunction, luxemburg_norm

__all__ = [
    "OutOfBandError",
    "GridField",
    "CutoffProfile",
    "DecompositionStack",
    "admissible_jmax",
    "psi_block",
    "decompose",
    "low_pass",
    "classical_block_norms",
    "paraproduct_support_leak",
    "profile_values",
    "besov_norm",
    "block_norms",
    "holder_norm",
    "modulus_quotient",
    "bessel_norm",
    "classical_block",
    "classical_jmax",
    "xspace_norm",
    "counterexample_field",
    "CounterexampleInfo",
    "counterexample_value",
    "counterexample_growth",
    "GrowthReport",
    "paraproduct",
    "paraproduct_order",
    "ParaproductResult",
    "random_field",
    "morrey2_exponent",
    "mode_field",
]


class OutOfBandError(ValueError):
    """A requested block lies (partly) above the grid's Nyquist frequency."""


# -- grid fields ------------------------------------------------------------------

class GridField:
    """Real samples of a function on the periodic grid ``[-L/2, L/2)^d``.

    Values are read-only after construction. The real FFT of the values is
    computed on first use and cached.
    """

    __slots__ = ("values", "L", "__dict__")

    def __init__(self, values, L: float):
        vals = np.array(values, dtype=float)
        if vals.ndim not in (1, 2) or len(set(vals.shape)) != 1:
            raise ValueError("values must be a 1-d or square 2-d array")
        n = vals.shape[0]
        if n < 2 or n & (n - 1):
            raise ValueError(f"points per dimension must be a power of two, got {n}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if not L > 0:
            raise ValueError("side length must be positive")
        vals.flags.writeable = False
        self.values = vals
        self.L = float(L)

    # geometry
    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.d

    @property
    def nyquist(self) -> float:
        return math.pi * self.n / self.L

    def axis(self) -> np.ndarray:
        return -0.5 * self.L + self.spacing * np.arange(self.n)

    def coords(self) -> list[np.ndarray]:
        ax = self.axis()
        if self.d == 1:
            return [ax]
        return list(np.meshgrid(ax, ax, indexing="ij"))

    # spectral side
    @functools.cached_property
    def spectrum(self) -> np.ndarray:
        spec = np.fft.rfftn(self.values)
        spec.flags.writeable = False
        return spec

    @functools.cached_property
    def wavevectors(self) -> list[np.ndarray]:
        return _wavevectors(self.n, self.L, self.d)

    @functools.cached_property
    def kabs(self) -> np.ndarray:
        return _kabs(self.n, self.L, self.d)

    def from_spectrum(self, spec: np.ndarray) -> "GridField":
        return GridField(np.fft.irfftn(spec, s=self.values.shape, axes=tuple(range(self.d))), self.L)

    def apply_multiplier(self, m) -> "GridField":
        """Return ``F^{-1}(m * F f)`` for a radial function ``m(|k|)`` or an array."""
        mult = m(self.kabs) if callable(m) else np.asarray(m)
        return self.from_spectrum(self.spectrum * mult)

    def gradient(self) -> list["GridField"]:
        out = []
        nyq_mask = self._nyquist_mask()
        for k in self.wavevectors:
            out.append(self.from_spectrum(self.spectrum * (1j * k) * nyq_mask))
        return out

    def gradient_magnitude(self) -> np.ndarray:
        comps = [g.values for g in self.gradient()]
        return np.sqrt(sum(c * c for c in comps))

    def _nyquist_mask(self) -> np.ndarray:
        # the Nyquist mode has no well-defined derivative on an even grid
        mask = np.ones(self.spectrum.shape)
        h = self.n // 2
        if self.d == 1:
            mask[h] = 0.0
        else:
            mask[h, :] = 0.0
            mask[:, h] = 0.0
        return mask

    # arithmetic helpers
    def __add__(self, other: "GridField") -> "GridField":
        self._check_same_grid(other)
        return GridField(self.values + other.values, self.L)

    def __sub__(self, other: "GridField") -> "GridField":
        self._check_same_grid(other)
        return GridField(self.values - other.values, self.L)

    def __mul__(self, other):
        if isinstance(other, GridField):
            self._check_same_grid(other)
            return GridField(self.values * other.values, self.L)
        return GridField(self.values * float(other), self.L)

    __rmul__ = __mul__

    def _check_same_grid(self, other: "GridField"):
        if other.values.shape != self.values.shape or other.L != self.L:
            raise ValueError("fields live on different grids")

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def samples(self) -> MeasuredSamples:
        return MeasuredSamples(self.values, self.cell_volume)

    def value_at_origin(self) -> float:
        return float(self.values[(self.n // 2,) * self.d])

    def interpolate(self, points: np.ndarray, order: int = 3) -> np.ndarray:
        """Periodic spline interpolation at arbitrary points of shape (..., d)."""
        from scipy import ndimage
        pts = np.asarray(points, dtype=float)
        if self.d == 1 and pts.ndim >= 1 and (pts.shape[-1] != 1):
            pts = pts[..., None]
        idx = (pts + 0.5 * self.L) / self.spacing
        coords = np.moveaxis(idx, -1, 0).reshape(self.d, -1)
        coeffs = self._cubic_coefficients if order == 3 else _spline_coefficients(self.values, order)
        out = ndimage.map_coordinates(coeffs, coords, order=order, mode="grid-wrap", prefilter=False)
        return out.reshape(pts.shape[:-1])

    @functools.cached_property
    def _cubic_coefficients(self) -> np.ndarray:
        return _spline_coefficients(self.values, 3)

    # construction helpers
    @classmethod
    def from_function(cls, fn: Callable, n: int, L: float, d: int = 1) -> "GridField":
        ax = -0.5 * L + (L / n) * np.arange(n)
        if d == 1:
            return cls(fn(ax), L)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        return cls(fn(X, Y), L)

    @classmethod
    def from_fourier_transform(cls, ft: Callable, n: int, L: float, d: int = 1) -> "GridField":
        """Periodise a function given by its continuous Fourier transform.

        ``ft(k)`` receives the wavevector magnitude when ``d == 1`` is radial
        (callers pass radial transforms), i.e. ``ft(|k|)``. The resulting grid
        values are ``(1/L^d) sum_k ft(|k|) exp(i k x)``.
        """
        kab = _kabs(n, L, d)
        idx = [np.arange(n) for _ in range(d - 1)] + [np.arange(n // 2 + 1)]
        grids = np.meshgrid(*idx, indexing="ij") if d == 2 else idx
        sign = np.ones(kab.shape)
        for g in grids:
            sign = sign * np.where(g % 2 == 0, 1.0, -1.0)  # shift origin to index n/2
        coeff = ft(kab) * sign * (n / L) ** d
        return cls(np.fft.irfftn(coeff, s=(n,) * d, axes=tuple(range(d))), L)

    # serialisation
    def save(self, path) -> None:
        """Flat binary container: ``<qqd`` header (d, n, L) then row-major float64."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<qqd", self.d, self.n, self.L))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "GridField":
        raw = Path(path).read_bytes()
        d, n, L = struct.unpack("<qqd", raw[:24])
        vals = np.frombuffer(raw[24:], dtype="<f8")
        if vals.size != n ** d:
            raise ValueError(f"container holds {vals.size} values, header says {n}^{d}")
        return cls(vals.reshape((n,) * d), L)

    def to_csv(self, path, row: Optional[int] = None) -> None:
        """Write a 1-d slice (the whole field in 1-d, row ``row`` in 2-d)."""
        vals = self.values if self.d == 1 else self.values[self.n // 2 if row is None else row]
        data = np.column_stack([self.axis(), vals])
        np.savetxt(path, data, delimiter=",", header="x [length],value [field units]", comments="")

    def __repr__(self) -> str:
        return f"GridField(d={self.d}, n={self.n}, L={self.L})"


def _wavevectors(n: int, L: float, d: int) -> list[np.ndarray]:
    h = L / n
    full = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    half = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
    if d == 1:
        return [half]
    KX, KY = np.meshgrid(full, half, indexing="ij")
    return [KX, KY]


@functools.lru_cache(maxsize=16)
def _kabs_cached(n: int, L: float, d: int) -> np.ndarray:
    ks = _wavevectors(n, L, d)
    out = np.sqrt(sum(k * k for k in ks))
    out.flags.writeable = False
    return out


def _kabs(n: int, L: float, d: int) -> np.ndarray:
    return _kabs_cached(n, float(L), d)


def _spline_coefficients(values: np.ndarray, order: int) -> np.ndarray:
    from scipy import ndimage
    if order <= 1:
        return values
    return ndimage.spline_filter(values, order=order, mode="grid-wrap")


# -- cutoff profile ---------------------------------------------------------------

def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x) bumps."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
        out = a / (a + b)
    return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out))


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff: 1 on ``[0, inner]``, 0 on ``[outer, inf)``, smooth between."""

    inner: float = 0.75
    outer: float = 1.0

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return 1.0 - _smooth_step((r - self.inner) / (self.outer - self.inner))

    def bar(self, r):
        return self(2.0 * np.asarray(r, dtype=float))

    def tilde(self, r):
        return self(0.5 * np.asarray(r, dtype=float))

    def classical(self, r):
        """The annular profile ``chi(r) - chi(2r)`` of the classical blocks."""
        r = np.asarray(r, dtype=float)
        return self(r) - self(2.0 * r)


DEFAULT_CUTOFF = CutoffProfile()


# -- psi-dyadic blocks ------------------------------------------------------------

def _edges(scale, jmax: int) -> np.ndarray:
    """``psi^{-1}(2^j)`` for ``j = 0 .. jmax + 1``."""
    return np.asarray(scale.psi_inverse(2.0 ** np.arange(jmax + 2)), dtype=float)


def admissible_jmax(f: GridField, scale, limit: int = 64) -> int:
    """Largest ``j`` with ``psi^{-1}(2^{j+1})`` at or below the Nyquist frequency."""
    nyq = f.nyquist
    if float(scale.psi_inverse(1.0)) > nyq:
        return -2
    j = -1
    while j + 1 < limit and float(scale.psi_inverse(2.0 ** (j + 2))) <= nyq:
        j += 1
    return j


def _scale_name(scale) -> str:
    return scale.describe() if hasattr(scale, "describe") else repr(scale)


def _block_multiplier(kabs: np.ndarray, j: int, edges: np.ndarray, chi: CutoffProfile) -> np.ndarray:
    if j == -1:
        return chi(kabs / edges[0])
    return chi(kabs / edges[j + 1]) - chi(kabs / edges[j])


def psi_block(f: GridField, j: int, scale, chi: CutoffProfile = DEFAULT_CUTOFF) -> GridField:
    """The intrinsic block: frequencies between ``3/4 psi^{-1}(2^j)`` and ``psi^{-1}(2^{j+1})``."""
    if j < -1:
        raise ValueError("block index must be >= -1")
    jmax = admissible_jmax(f, scale)
    if j > jmax:
        raise OutOfBandError(
            f"block j={j} exceeds the grid band: admissible J_max={jmax} for n={f.n}, L={f.L}, "
            f"scale {_scale_name(scale)}")
    edges = _edges(scale, max(j, 0))
    return f.apply_multiplier(_block_multiplier(f.kabs, j, edges, chi))


@dataclass(frozen=True)
class DecompositionStack:
    """Blocks ``j = -1 .. J_max`` of one field."""

    scale: object
    blocks: tuple
    J_max: int

    def block(self, j: int) -> GridField:
        return self.blocks[j + 1]

    def reconstruct(self) -> GridField:
        total = np.sum([b.values for b in self.blocks], axis=0)
        return GridField(total, self.blocks[0].L)


def decompose(f: GridField, scale, J_max: Optional[int] = None,
              chi: CutoffProfile = DEFAULT_CUTOFF) -> DecompositionStack:
    jadm = admissible_jmax(f, scale)
    if J_max is None:
        J_max = jadm
    if J_max > jadm:
        raise OutOfBandError(f"J_max={J_max} exceeds admissible J_max={jadm} for n={f.n}, L={f.L}")
    if J_max < -1:
        raise OutOfBandError(f"grid n={f.n}, L={f.L} cannot host even the j=-1 block")
    edges = _edges(scale, max(J_max, 0))
    blocks = tuple(f.apply_multiplier(_block_multiplier(f.kabs, j, edges, chi))
                   for j in range(-1, J_max + 1))
    return DecompositionStack(scale, blocks, J_max)


def low_pass(f: GridField, scale, J: int, chi: CutoffProfile = DEFAULT_CUTOFF) -> GridField:
    """``F^{-1}(chi_{J+1} F f)``, the sum of blocks ``-1 .. J``."""
    edge = float(scale.psi_inverse(2.0 ** (J + 1)))
    return f.apply_multiplier(lambda k: chi(k / edge))


def _norm(g: GridField, A) -> float:
    if A is None or (isinstance(A, float) and math.isinf(A)):
        return g.max_abs()
    return luxemburg_norm(g.samples(), A)


def block_norms(f: GridField, A, scale, J_max: Optional[int] = None) -> np.ndarray:
    """``||Pi_j f||_A`` for ``j = -1 .. J_max`` (``A=None`` for the sup norm)."""
    stack = decompose(f, scale, J_max)
    return np.array([_norm(b, A) for b in stack.blocks])


def besov_norm(f: GridField, s: float, A, scale, J_max: Optional[int] = None,
               norms: Optional[np.ndarray] = None) -> float:
    """``sup_j 2^{j s} ||Pi_j f||_A`` over the available blocks.

    ``A=None`` (or ``inf``) gives the sup-norm version. Pass precomputed
    ``norms`` from ``block_norms`` to evaluate several ``s`` cheaply.
    """
    if norms is None:
        norms = block_norms(f, A, scale, J_max)
    js = np.arange(-1, len(norms) - 1)
    return float(np.max(2.0 ** (js * s) * norms))


# -- modulus of continuity -----------------------------------------------------

def _shift_set(f: GridField, max_sep: float, max_pairs: int, seed: int):
    n, d = f.n, f.d
    hmax = max(1, int(math.floor(max_sep / f.spacing)))
    hmax = min(hmax, n // 2)
    pts = n ** d
    budget = max(1, int(max_pairs // pts))
    rng = np.random.default_rng(seed)
    if d == 1:
        if budget >= hmax:
            shifts = np.arange(1, hmax + 1)
        else:
            k = max(budget, 32)
            shifts = np.unique(np.round(np.geomspace(1, hmax, 4 * k)).astype(int))
            if shifts.size > k:
                keep = np.unique(np.round(np.linspace(0, shifts.size - 1, k)).astype(int))
                shifts = shifts[keep]
        shifts = shifts[:, None]
    else:
        k = max(budget, 32)
        n_rad = max(4, int(math.sqrt(k)))
        n_ang = max(4, k // n_rad)
        radii = np.geomspace(1, hmax, n_rad)
        angles = (np.arange(n_ang) + rng.uniform()) * (np.pi / n_ang)
        vecs = np.round(np.stack([np.outer(radii, np.cos(angles)).ravel(),
                                  np.outer(radii, np.sin(angles)).ravel()], axis=1)).astype(int)
        vecs = vecs[np.any(vecs != 0, axis=1)]
        vecs = vecs[np.hypot(vecs[:, 0], vecs[:, 1]) <= hmax]
        shifts = np.unique(vecs, axis=0)
    stride = max(1, int(math.ceil(shifts.shape[0] * pts / max_pairs)))
    offset = int(rng.integers(stride)) if stride > 1 else 0
    return shifts, stride, offset


def modulus_quotient(f: GridField, modulus: Callable, max_sep: Optional[float] = None,
                     max_pairs: int = 1_000_000, seed: int = 0) -> float:
    """``sup |f(x) - f(y)| / modulus(dist(x, y))`` over a deterministic pair subsample.

    Separations go up to ``max_sep`` (default ``L/4``) in torus distance. All
    grid points are used when the budget allows; otherwise points are taken
    with a fixed stride from a seed-determined offset.
    """
    if max_sep is None:
        max_sep = f.L / 4.0
    shifts, stride, offset = _shift_set(f, max_sep, max_pairs, seed)
    vals = f.values
    flat = vals.ravel()
    sel = np.arange(offset, flat.size, stride)
    best = 0.0
    for h in shifts:
        dist = f.spacing * float(np.sqrt(np.sum(h.astype(float) ** 2)))
        if dist > max_sep:
            continue
        shifted = np.roll(vals, shift=tuple(-int(x) for x in h), axis=tuple(range(f.d))).ravel()
        diff = np.max(np.abs(shifted[sel] - flat[sel]))
        best = max(best, float(diff) / float(modulus(dist)))
    return best


def holder_norm(f: GridField, s: float, scale, max_pairs: int = 1_000_000,
                seed: int = 0, max_sep: Optional[float] = None) -> float:
    """Generalised Holder norm ``||f||_inf + sup |f(x)-f(y)| / rho(|x-y|)^s``."""
    if not s > 0:
        raise ValueError("holder_norm needs s > 0")
    quot = modulus_quotient(f, lambda r: float(scale.rho(r)) ** s, max_sep, max_pairs, seed)
    return f.max_abs() + quot


def bessel_norm(f: GridField, A, scale) -> float:
    """``||(1 + psi(|D|)) f||_A`` (``A=None`` for the sup norm)."""
    g = f.apply_multiplier(lambda k: 1.0 + scale.psi(k))
    return _norm(g, A)


# -- classical Littlewood-Paley blocks -----------------------------------------------

def classical_jmax(f: GridField) -> int:
    return int(math.floor(math.log2(f.nyquist)))


def _classical_multiplier(kabs, j, chi):
    if j == -1:
        return chi(2.0 * kabs)
    return chi(kabs / 2.0 ** j) - chi(kabs / 2.0 ** (j - 1))


def classical_block(f: GridField, j: int, chi: CutoffProfile = DEFAULT_CUTOFF) -> GridField:
    """``Delta_j f``: ``chi(2k)`` for ``j=-1`` and ``chi(2^{-j} k) - chi(2^{1-j} k)`` otherwise."""
    if j < -1:
        raise ValueError("block index must be >= -1")
    jmax = classical_jmax(f)
    if j > jmax:
        raise OutOfBandError(f"classical block j={j} exceeds admissible J_max={jmax} for n={f.n}, L={f.L}")
    return f.apply_multiplier(_classical_multiplier(f.kabs, j, chi))


def classical_block_norms(f: GridField, J_max: Optional[int] = None,
                          chi: CutoffProfile = DEFAULT_CUTOFF) -> np.ndarray:
    jmax = classical_jmax(f) if J_max is None else J_max
    return np.array([f.apply_multiplier(_classical_multiplier(f.kabs, j, chi)).max_abs()
                     for j in range(-1, jmax + 1)])


def xspace_norm(f: GridField, s: float, weighting: str = "shifted", J_max: Optional[int] = None,
                norms: Optional[np.ndarray] = None) -> float:
    """``sup_j w_j^s ||Delta_j f||_inf`` over the available classical blocks.

    ``weighting="shifted"`` uses ``w_j = 2 + j``; ``weighting="clipped"`` uses
    ``w_j = max(1, j)``. The two are comparable but not equal.
    """
    if norms is None:
        norms = classical_block_norms(f, J_max)
    js = np.arange(-1, len(norms) - 1)
    if weighting == "shifted":
        w = (2.0 + js) ** s
    elif weighting == "clipped":
        w = np.maximum(1.0, js) ** s
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return float(np.max(w * norms))


# -- the unbounded field with finite X^1 norm ------------------------------------------

def _annular_bump(eta):
    """Radial spectrum of the profile: support in (1/2, 3/4), equal to 1 on [9/16, 11/16]."""
    eta = np.abs(np.asarray(eta, dtype=float))
    up = _smooth_step((eta - 0.5) / (0.5625 - 0.5))
    down = 1.0 - _smooth_step((eta - 0.6875) / (0.75 - 0.6875))
    return up * down


def profile_values(x, d: int = 1) -> np.ndarray:
    """The Schwartz profile with spectrum ``_annular_bump`` at radii ``|x|``."""
    r = np.abs(np.asarray(x, dtype=float)).ravel()
    eta = np.linspace(0.5, 0.75, 2049)
    b = _annular_bump(eta)
    if d == 1:
        kern = np.cos(np.outer(r, eta))
        out = integrate.simpson(kern * b, x=eta, axis=1) / math.pi
    else:
        kern = special.j0(np.outer(r, eta))
        out = integrate.simpson(kern * b * eta, x=eta, axis=1) / (2.0 * math.pi)
    return out.reshape(np.shape(x))


@dataclass(frozen=True)
class CounterexampleInfo:
    J_trunc: int
    profile_max_abs: float
    decay_constant: float
    decay_power: int

    def tail_bound(self, x: float) -> float:
        """Bound on ``sum_{j > J_trunc} j^{-1} |phi(2^j x)|`` from ``|phi(y)| <= C min(1, |y|^-k)``."""
        js = np.arange(self.J_trunc + 1, self.J_trunc + 400)
        y = (2.0 ** js) * abs(x)
        terms = np.minimum(self.profile_max_abs, self.decay_constant * y ** (-float(self.decay_power))) / js
        return float(np.sum(terms))


def counterexample_field(L: float, n: int, J_trunc: int, d: int = 1,
                         decay_power: int = 2) -> tuple[GridField, CounterexampleInfo]:
    """The truncated sum ``sum_{j=1}^{J_trunc} j^{-1} phi(2^j x)`` on the torus.

    ``phi`` has spectrum in the annulus ``1/2 < |k| < 3/4`` so the ``j``-th
    term is exactly the classical block ``Delta_j`` of the sum.
    """
    nyq = math.pi * n / L
    if J_trunc < 1 or 0.75 * 2.0 ** J_trunc > nyq:
        jmax = int(math.floor(math.log2(nyq / 0.75)))
        raise OutOfBandError(f"J_trunc={J_trunc} out of band: this grid allows J_trunc <= {jmax}")

    def ft(kab):
        total = np.zeros_like(kab)
        for j in range(1, J_trunc + 1):
            scale = 2.0 ** j
            sel = (kab > 0.5 * scale) & (kab < 0.75 * scale)
            total[sel] += _annular_bump(kab[sel] / scale) * scale ** (-d) / j
        return total

    field = GridField.from_fourier_transform(ft, n, L, d)
    # the continuous profile's sup is at the origin; the decay constant is measured on a grid
    pmax = float(profile_values(np.array([0.0]), d)[0])
    y = np.geomspace(1.0, 1e3, 4000)
    cdec = float(np.max(np.abs(profile_values(y, d)) * y ** decay_power))
    return field, CounterexampleInfo(J_trunc, pmax, cdec, decay_power)


def counterexample_value(x, J: Optional[int] = None, d: int = 1, tol: float = 1e-12) -> np.ndarray:
    """Pointwise value of ``sum_{j>=1} j^{-1} phi(2^j x)`` on the whole space.

    The origin is assigned the value 0, as in the definition of the field.
    With ``J=None`` the series is summed until the decay bound on the tail
    drops below ``tol``.
    """
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.zeros_like(x)
    nz = x > 0
    if not np.any(nz):
        return out
    xs = x[nz]
    if J is None:
        J = int(math.ceil(math.log2(1.0 / float(np.min(xs))))) + int(math.ceil(0.5 * math.log2(1.0 / tol))) + 8
    acc = np.zeros_like(xs)
    for j in range(1, J + 1):
        acc += profile_values(2.0 ** j * xs, d) / j
    out[nz] = acc
    return out


@dataclass(frozen=True)
class GrowthReport:
    m: np.ndarray
    values: np.ndarray
    loglog: np.ndarray
    eps0: float          # measured lower slope: f >= (eps0/2) loglog - C_lower
    C_lower: float
    C_upper: float       # measured: |f| <= C_upper (loglog + 1)
    ratio_min: float
    ratio_max: float


def counterexample_growth(f: GridField, ms: Sequence[int]) -> GrowthReport:
    """Values at the dyadic points ``x = 2^-m`` (first axis) against ``log log_2(1/x)``."""
    ms = np.asarray(list(ms), dtype=int)
    vals = []
    for m in ms:
        off = 2.0 ** (-float(m)) / f.spacing
        if abs(off - round(off)) > 1e-9 or off < 1:
            raise ValueError(f"2^-{m} is not a grid point for spacing {f.spacing}")
        idx = [f.n // 2] * f.d
        idx[0] += int(round(off))
        vals.append(float(f.values[tuple(idx)]))
    vals = np.array(vals)
    ll = np.log(ms.astype(float))  # log log_2(2^m)
    slope, icpt = np.polyfit(ll, vals, 1)
    c_low = float(np.max(0.5 * slope * ll - vals))
    ratios = vals / ll
    return GrowthReport(ms, vals, ll, float(slope), max(c_low, 0.0),
                        float(np.max(np.abs(vals) / (ll + 1.0))),
                        float(np.min(ratios)), float(np.max(ratios)))


# -- paraproducts ---------------------------------------------------------------------

def paraproduct_order(scale, lam_max: float) -> int:
    """Smallest ``N >= 1`` with ``psi^{-1}(2^{1-N} lam) <= (3/8) psi^{-1}(lam)`` for ``lam`` in ``[1, lam_max]``."""
    lam = np.geomspace(1.0, max(lam_max, 1.0), 400)
    top = np.asarray(scale.psi_inverse(lam), dtype=float)
    for N in range(1, 64):
        low = np.asarray(scale.psi_inverse(2.0 ** (1 - N) * lam), dtype=float)
        if np.all(low <= 0.375 * top * (1 + 1e-12)):
            return N
    raise ValueError("no admissible paraproduct order found below 64")


@dataclass(frozen=True)
class ParaproductResult:
    T_fg: GridField
    T_gf: GridField
    R: GridField
    N: int
    J_max: int
    residue: float  # max-abs of f*g minus the three pieces, relative to max|f*g|


def paraproduct(f: GridField, g: GridField, scale, J_max: Optional[int] = None) -> ParaproductResult:
    """Bony decomposition ``f g = T_f g + T_g f + R(f, g)`` with intrinsic blocks.

    ``S_k f`` sums blocks ``l < k - N``; the remainder pairs blocks with
    ``|k - l| <= N``. The reported residue comes from truncating at ``J_max``
    and from aliasing of products above the Nyquist frequency.
    """
    f._check_same_grid(g)
    sf = decompose(f, scale, J_max)
    sg = decompose(g, scale, sf.J_max)
    J = sf.J_max
    N = paraproduct_order(scale, 2.0 ** (J + 1))
    fb = [b.values for b in sf.blocks]
    gb = [b.values for b in sg.blocks]
    zero = np.zeros_like(f.values)

    def low(blocks, k):
        # S_k: blocks l with l < k - N, indices l = -1 .. k - N - 1
        stop = k - N  # exclusive upper block index
        acc = zero.copy()
        for l in range(-1, stop):
            acc += blocks[l + 1]
        return acc

    T_fg = zero.copy()
    T_gf = zero.copy()
    R = zero.copy()
    for k in range(-1, J + 1):
        T_fg += low(fb, k) * gb[k + 1]
        T_gf += low(gb, k) * fb[k + 1]
        for l in range(max(-1, k - N), min(J, k + N) + 1):
            R += fb[k + 1] * gb[l + 1]
    prod = f.values * g.values
    resid = prod - (T_fg + T_gf + R)
    denom = max(float(np.max(np.abs(prod))), 1e-300)
    return ParaproductResult(GridField(T_fg, f.L), GridField(T_gf, f.L), GridField(R, f.L),
                             N, J, float(np.max(np.abs(resid))) / denom)


def paraproduct_support_leak(f: GridField, g: GridField, scale, J_max: Optional[int] = None) -> float:
    """Largest relative spectral mass of ``Pi_j(S_k f . Pi_k g)`` over pairs with ``|j - k| >= N``."""
    sf = decompose(f, scale, J_max)
    sg = decompose(g, scale, sf.J_max)
    J = sf.J_max
    N = paraproduct_order(scale, 2.0 ** (J + 1))
    worst = 0.0
    for k in range(-1, J + 1):
        low = np.zeros_like(f.values)
        for l in range(-1, k - N):
            low += sf.blocks[l + 1].values
        piece = GridField(low * sg.blocks[k + 1].values, f.L)
        mass = float(np.sum(np.abs(piece.spectrum) ** 2))
        if mass == 0.0:
            continue
        for j in range(-1, J + 1):
            if abs(j - k) >= N:
                blk = psi_block(piece, j, scale)
                worst = max(worst, float(np.sum(np.abs(blk.spectrum) ** 2)) / mass)
    return worst


# -- test-field families -------------------------------------------------------------

def mode_field(n: int, L: float, wave_index: Sequence[int], amplitude: float = 1.0,
               phase: float = 0.0) -> GridField:
    """``amplitude * cos(k . x + phase)`` for the lattice wavevector ``2 pi m / L``."""
    m = np.asarray(wave_index, dtype=float)
    d = m.size
    k = 2.0 * np.pi * m / L
    ax = -0.5 * L + (L / n) * np.arange(n)
    if d == 1:
        return GridField(amplitude * np.cos(k[0] * ax + phase), L)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    return GridField(amplitude * np.cos(k[0] * X + k[1] * Y + phase), L)


def random_field(n: int, L: float, rng: np.random.Generator, k_max: float, d: int = 1,
                 n_modes: int = 8, k_min: float = 0.0, decay: float = 0.0,
                 include_mean: bool = True) -> GridField:
    """A random trigonometric polynomial with wavenumbers in ``[k_min, k_max]``.

    Mode indices are drawn uniformly among the lattice points in the band;
    amplitudes are Gaussian, damped by ``(1 + |k|)^-decay``.
    """
    kab = _kabs(n, L, d)
    band = (kab <= k_max) & (kab >= k_min) & (kab > 0)
    if d == 1:
        band[n // 2] = False
    else:
        band[n // 2, :] = False
        band[:, n // 2] = False
    cand = np.flatnonzero(band.ravel())
    if cand.size == 0:
        raise ValueError("no lattice wavenumbers in the requested band")
    pick = rng.choice(cand, size=min(n_modes, cand.size), replace=False)
    spec = np.zeros(kab.shape, dtype=complex)
    amp = rng.standard_normal(pick.size) + 1j * rng.standard_normal(pick.size)
    amp *= (1.0 + kab.ravel()[pick]) ** (-decay)
    spec.ravel()[pick] = amp * (n ** d) / 2.0
    if include_mean:
        spec.ravel()[0] = rng.standard_normal() * (n ** d)
    return GridField(np.fft.irfftn(spec, s=(n,) * d, axes=tuple(range(d))), L)


# -- Morrey-type exponents -------------------------------------------------------------

def morrey2_exponent(scale, A: NFunction, d: int = 1, t_max: float = 20.0,
                     c: float = 1.0, points: int = 2000) -> float:
    """Largest ``eps`` with ``psi^{-1}(c t^{1+eps})^d <= A(t)`` on ``t`` in ``[1, t_max]``.

    Found by bisection on ``eps`` in ``(0, 8]``; returns 0 when no positive
    exponent qualifies. Comparisons are done on logarithms to avoid overflow.
    """
    t = np.geomspace(1.0, t_max, points)
    with np.errstate(over="ignore"):
        logA = np.log(np.asarray(A(t), dtype=float))
    if A.family == "exp_power":
        logA = t ** A.param + np.log1p(-np.exp(-t ** A.param))

    def ok(eps):
        y = c * t ** (1.0 + eps)
        with np.errstate(over="ignore"):
            inv = np.asarray(scale.psi_inverse(y), dtype=float)
        return bool(np.all(d * np.log(inv) <= logA + 1e-12))

    lo, hi = 0.0, 8.0
    if not ok(1e-9):
        return 0.0
    if ok(hi):
        return hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo
