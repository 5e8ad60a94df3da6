"""The nonlocal generator and the resolvent solvers built on it.

    L u(x) = int (u(x+z) - u(x)) a(x, z) J(z) dz

No gradient compensation is needed: the kernels here have a finite first
moment near the origin, so the jumps below the cutoff ``eps`` are dropped and
their contribution is bounded by ``|grad u| * a_max * first_moment(eps)``.

Quadrature nodes are shared by every routine: radii log-spaced at 512 per
decade on ``[eps, z_max]`` (trapezoid in ``log r``), with the two directions
``+-r`` in one dimension and 64 equally spaced angles in two.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fields import GridField, admissible_jmax, besov_norm, block_norms, decompose
from .symbols import SubordinatorSpec, kernel_first_moment, kernel_tail_mass, sphere_area

__all__ = [
    "CoefficientField",
    "SolverConfig",
    "DivergenceError",
    "RadialQuadrature",
    "radial_quadrature",
    "generator_symbol",
    "GeneratorResult",
    "apply_generator",
    "Solution",
    "solve_homogeneous",
    "solve_inhomogeneous",
    "SchauderRecord",
    "schauder_report",
    "paraproduct_ratios",
]

RADII_PER_DECADE = 512
MAX_DECADES = 64
ANGLES_2D = 64


class DivergenceError(RuntimeError):
    """The frozen-coefficient iteration failed to contract."""


# -- coefficients -----------------------------------------------------------------

_EXPR_NAMES = {name: getattr(np, name) for name in
               ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "minimum", "maximum", "where", "sign")}
_EXPR_NAMES["pi"] = math.pi


@dataclass(frozen=True)
class CoefficientField:
    """The jump coefficient ``a(x, z)``.

    ``fn(x, z)`` receives arrays with a trailing axis of length ``d`` that
    broadcast against each other and returns ``a`` with the broadcast shape
    minus the trailing axis. ``z_only`` marks coefficients independent of x.
    """

    fn: Callable
    c0: float
    rho0: float = 0.5
    alpha: float = 1.0
    holder_const: float = float("nan")
    z_only: bool = False
    name: str = "custom"
    constant_value: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.c0 <= 1.0:
            raise ValueError("c0 must lie in (0, 1]")
        if not 0.0 < self.rho0 <= 1.0:
            raise ValueError("rho0 must lie in (0, 1]")

    @classmethod
    def constant(cls, c: float = 1.0, c0: Optional[float] = None) -> "CoefficientField":
        c = float(c)
        if c0 is None:
            c0 = min(c, 1.0 / c)
        return cls(lambda x, z: np.full(np.broadcast_shapes(np.shape(x), np.shape(z))[:-1], c),
                   c0, z_only=True, holder_const=0.0, name=f"const({c!r})", constant_value=c)

    @classmethod
    def from_expression(cls, expr: str, c0: float, L: float, alpha: float = 1.0,
                        rho0: float = 0.5) -> "CoefficientField":
        """Coefficient from an arithmetic expression in ``x, y, r, z1, z2, L``.

        ``x, y`` are the coordinates of the base point, ``z1, z2`` those of the
        jump and ``r = |z|``. Only numpy elementary functions are in scope.
        """
        code = compile(expr, "<coefficient>", "eval")
        names = set(code.co_names)
        allowed = set(_EXPR_NAMES) | {"x", "y", "r", "z1", "z2", "L"}
        if not names <= allowed:
            raise ValueError(f"unknown names in coefficient expression: {sorted(names - allowed)}")
        z_only = not ({"x", "y"} & names)

        def fn(x, z):
            x = np.asarray(x, dtype=float)
            z = np.asarray(z, dtype=float)
            shape = np.broadcast_shapes(x.shape, z.shape)[:-1]
            env = dict(_EXPR_NAMES)
            env.update(x=x[..., 0], y=x[..., 1] if x.shape[-1] > 1 else 0.0,
                       z1=z[..., 0], z2=z[..., 1] if z.shape[-1] > 1 else 0.0,
                       r=np.sqrt(np.sum(z * z, axis=-1)), L=L)
            return np.broadcast_to(np.asarray(eval(code, {"__builtins__": {}}, env), dtype=float), shape)

        return cls(fn, c0, rho0=rho0, alpha=alpha, z_only=z_only, name=expr)

    def __call__(self, x, z):
        return self.fn(x, z)

    def frozen(self, x_star) -> "CoefficientField":
        """``a_0(z) = a(x_star, z)``."""
        xs = np.asarray(x_star, dtype=float).reshape(-1)
        base = self.fn
        return CoefficientField(lambda x, z: base(np.broadcast_to(xs, np.shape(z)), z) *
                                np.ones(np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]),
                                self.c0, self.rho0, self.alpha, 0.0, True,
                                f"{self.name} at x*={xs.tolist()}")

    def check_bounds(self, x: np.ndarray, z: np.ndarray) -> dict:
        """Spot-check ``a >= c0`` for ``|z| < rho0`` and ``a <= 1/c0`` on a sample."""
        vals = np.asarray(self.fn(x[None, :, :], z[:, None, :]))
        small = np.sqrt(np.sum(z * z, axis=-1)) < self.rho0
        lower = float(np.min(vals[small])) if np.any(small) else float("inf")
        upper = float(np.max(vals))
        return {"min_small_jumps": lower, "max": upper,
                "lower_ok": lower >= self.c0 - 1e-12, "upper_ok": upper <= 1.0 / self.c0 + 1e-12}


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    eps: float = 1e-3
    tol: float = 1e-10
    max_iter: int = 200
    x_star: Optional[tuple] = None
    lam0: float = 8.0
    z_max: Optional[float] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def validate_grid(self, f: GridField):
        if not self.eps < 4.0 * f.spacing:
            raise ValueError(f"eps={self.eps} must be below 4 x grid spacing = {4 * f.spacing}")


# -- quadrature ---------------------------------------------------------------------

@dataclass(frozen=True)
class RadialQuadrature:
    """Jump nodes ``z_i`` with weights ``w_i`` approximating ``int_{eps<|z|<z_max} g(z) J(z) dz``."""

    z: np.ndarray        # (m, d)
    w: np.ndarray        # (m,), includes J and the surface measure
    eps: float
    z_max: float


@functools.lru_cache(maxsize=32)
def radial_quadrature(spec: SubordinatorSpec, eps: float, z_max: float,
                      per_decade: int = RADII_PER_DECADE) -> RadialQuadrature:
    if not 0 < eps < z_max:
        raise ValueError("need 0 < eps < z_max")
    decades = min(math.log10(z_max / eps), MAX_DECADES)
    m = max(8, int(math.ceil(decades * per_decade)) + 1)
    lr = np.linspace(math.log(eps), math.log(eps) + decades * math.log(10.0), m)
    r = np.exp(lr)
    tw = np.full(m, lr[1] - lr[0])
    tw[0] *= 0.5
    tw[-1] *= 0.5
    d = spec.dimension
    radial = tw * r ** d * np.asarray(spec.jump_kernel(r), dtype=float)
    if d == 1:
        dirs = np.array([[1.0], [-1.0]])
        dw = np.array([1.0, 1.0])
    else:
        th = 2.0 * np.pi * np.arange(ANGLES_2D) / ANGLES_2D
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        dw = np.full(ANGLES_2D, sphere_area(2) / ANGLES_2D)
    z = (r[None, :, None] * dirs[:, None, :]).reshape(-1, d)
    w = (dw[:, None] * radial[None, :]).reshape(-1)
    z.flags.writeable = False
    w.flags.writeable = False
    return RadialQuadrature(z, w, eps, float(r[-1]))


def _as_points(xi, d):
    xi = np.asarray(xi, dtype=float)
    if d == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
        xi = xi[..., None]
    return xi


def generator_symbol(spec: SubordinatorSpec, a0: Optional[CoefficientField], xi,
                     eps: float = 1e-4, z_max: float = 64.0, with_tail: bool = True):
    """``int (exp(i z.xi) - 1) a0(z) J(z) dz`` at frequencies ``xi``.

    ``xi`` has shape ``(..., d)`` (a plain array of scalars is accepted when
    ``d == 1``). Jumps above ``z_max`` are added as ``-a0(z_max) * tail_mass``
    (their oscillating part averages out); jumps below ``eps`` are dropped.
    Returns ``(symbol, bias_bound)`` with the bound on the dropped part.
    """
    d = spec.dimension
    pts = _as_points(xi, d)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, d)
    q = radial_quadrature(spec, eps, z_max)
    if a0 is None:
        aw = q.w
        a_top = 1.0
        a_sup = 1.0
    else:
        if not a0.z_only:
            raise ValueError("generator_symbol needs a coefficient that depends on z only")
        av = np.asarray(a0(np.zeros((1, d)), q.z), dtype=float).reshape(-1)
        aw = q.w * av
        a_top = float(np.mean(np.abs(av[-max(1, len(av) // 64):])))
        a_sup = float(np.max(np.abs(av)))
    out = np.empty(pts.shape[0], dtype=complex)
    step = max(1, 4_000_000 // q.z.shape[0])
    for s in range(0, pts.shape[0], step):
        phase = pts[s:s + step] @ q.z.T
        out[s:s + step] = np.expm1(1j * phase) @ aw
    if with_tail:
        out -= a_top * kernel_tail_mass(spec, q.z_max)
    knorm = np.sqrt(np.sum(pts * pts, axis=-1))
    bias = knorm * a_sup * kernel_first_moment(spec, eps)
    return out.reshape(shape), bias.reshape(shape)


# -- generator on grid fields ----------------------------------------------------------

@dataclass(frozen=True)
class GeneratorResult:
    field: GridField
    eps_bias: float      # bound on the dropped jumps below eps
    tail_bias: float     # bound on the dropped jumps above z_max


def _grid_points(u: GridField) -> np.ndarray:
    return np.stack([c.ravel() for c in u.coords()], axis=-1)


@functools.lru_cache(maxsize=4)
def _shift_basis(spec: SubordinatorSpec, eps: float, z_max: float, n: int, L: float, d: int):
    """Phases ``exp(i k.z)`` for every quadrature node and half-spectrum wavevector."""
    q = radial_quadrature(spec, eps, z_max)
    probe = GridField(np.zeros((n,) * d), L)
    kz = sum(np.tensordot(q.z[:, i], k, axes=0) for i, k in enumerate(probe.wavevectors))
    phases = np.exp(1j * kz)
    phases.flags.writeable = False
    return q, phases


class _GeneratorPlan:
    """Cached coefficient samples and shift phases for repeated application."""

    def __init__(self, u: GridField, a: CoefficientField, spec: SubordinatorSpec,
                 eps: float, z_max: float):
        self.q, self.phases = _shift_basis(spec, float(eps), float(z_max), u.n, u.L, u.d)
        self.shape = u.values.shape
        pts = _grid_points(u)
        m = self.q.z.shape[0]
        self.aw = None
        if a.z_only:
            av = np.asarray(a(np.zeros((1, u.d)), self.q.z), dtype=float).reshape(m)
            wa = self.q.w * av
            self.symbol = np.tensordot(wa, self.phases, axes=1) - wa.sum()
            self.a_sup = float(np.max(np.abs(av)))
        else:
            self.symbol = None
            amat = np.asarray(a(pts[None, :, :], self.q.z[:, None, :]), dtype=float).reshape(m, -1)
            self.aw = amat * self.q.w[:, None]
            self.aw_sum = self.aw.sum(axis=0)
            self.a_sup = float(np.max(np.abs(amat)))

    def apply(self, u: GridField) -> np.ndarray:
        if self.symbol is not None:
            return np.fft.irfftn(u.spectrum * self.symbol, s=self.shape, axes=tuple(range(len(self.shape))))
        m = self.q.z.shape[0]
        flat = u.values.ravel()
        out = np.zeros_like(flat)
        step = max(1, 2_000_000 // flat.size)
        axes = tuple(range(1, u.d + 1))
        for s in range(0, m, step):
            shifted = np.fft.irfftn(u.spectrum[None] * self.phases[s:s + step], s=self.shape, axes=axes)
            aw = self.aw[s:s + step]
            out += np.einsum("ij,ij->j", aw, shifted.reshape(aw.shape[0], -1))
        out -= flat * self.aw_sum
        return out.reshape(self.shape)


def apply_generator(u: GridField, a: CoefficientField, spec: SubordinatorSpec, eps: float = 1e-3,
                    z_max: Optional[float] = None, _plan: Optional[_GeneratorPlan] = None) -> GeneratorResult:
    """``L u`` on the grid by quadrature over ``eps <= |z| <= z_max`` (default ``L/2``).

    Shifted values ``u(x + z)`` are exact trigonometric interpolation (Fourier
    phase shifts). The reported biases bound the omitted small and large jumps.
    """
    if spec.dimension != u.d:
        raise ValueError("spec dimension and field dimension differ")
    zm = u.L / 2.0 if z_max is None else z_max
    plan = _plan or _GeneratorPlan(u, a, spec, eps, zm)
    vals = plan.apply(u)
    grad = u.gradient_magnitude()
    eps_bias = float(np.max(grad)) * plan.a_sup * kernel_first_moment(spec, eps)
    tail_bias = 2.0 * u.max_abs() * plan.a_sup * kernel_tail_mass(spec, plan.q.z_max)
    return GeneratorResult(GridField(vals, u.L), eps_bias, tail_bias)


# -- solvers ------------------------------------------------------------------------

@dataclass
class Solution:
    u: GridField
    residual: float = float("nan")         # ||lam u - L u - f||_inf with the quadrature generator
    iterations: int = 0
    contraction: float = float("nan")      # last measured ratio of successive differences
    x_star: Optional[list] = None
    oscillation: float = float("nan")      # sup |a(x, z) - a(x*, z)| over the sample
    eps_bias: float = float("nan")
    tail_bias: float = float("nan")
    history: list = field(default_factory=list)


def _homogeneous_multiplier(f: GridField, spec, a0, eps, z_max):
    if a0 is None or a0.constant_value is not None:
        c = 1.0 if a0 is None else a0.constant_value
        return -c * np.asarray(spec.psi(f.kabs), dtype=float)
    plan = _GeneratorPlan(f, a0, spec, eps, z_max)
    return plan.symbol


def solve_homogeneous(f: GridField, lam: float, spec: SubordinatorSpec,
                      a0: Optional[CoefficientField] = None, eps: float = 1e-3,
                      residual: bool = False, z_max: Optional[float] = None) -> Solution:
    """Solve ``lam u - L_0 u = f`` for a coefficient depending on ``z`` only.

    For ``a0 = None`` (the constant 1) the exact symbol ``-psi(|k|)`` is used;
    otherwise the symbol of the quadrature generator. With ``residual=True``
    the residual is measured with ``apply_generator``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    zm = f.L / 2.0 if z_max is None else z_max
    m = _homogeneous_multiplier(f, spec, a0, eps, zm)
    u = f.from_spectrum(f.spectrum / (lam - m))
    sol = Solution(u)
    if residual:
        coeff = a0 or CoefficientField.constant(1.0)
        g = apply_generator(u, coeff, spec, eps, zm)
        sol.residual = float(np.max(np.abs(lam * u.values - g.field.values - f.values)))
        sol.eps_bias, sol.tail_bias = g.eps_bias, g.tail_bias
    return sol


def _candidate_points(f: GridField, count: int = 16) -> np.ndarray:
    ax = f.axis()
    idx = np.linspace(0, f.n, count, endpoint=False).astype(int)
    if f.d == 1:
        return ax[idx][:, None]
    side = int(math.isqrt(count))
    idx = np.linspace(0, f.n, side, endpoint=False).astype(int)
    X, Y = np.meshgrid(ax[idx], ax[idx], indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def solve_inhomogeneous(f: GridField, lam: float, a: CoefficientField, spec: SubordinatorSpec,
                        config: Optional[SolverConfig] = None) -> Solution:
    """Frozen-coefficient iteration for ``lam u - L_a u = f``.

    ``u_{k+1}`` solves ``lam u - L_0 u = f + (L_a - L_0) u_k`` with
    ``a_0(z) = a(x*, z)``. Both generators use the same quadrature, so the
    fixed point satisfies the discrete equation exactly and the reported
    residual measures convergence only.
    """
    cfg = config or SolverConfig(lam)
    cfg.validate_grid(f)
    if lam < cfg.lam0:
        raise ValueError(f"lambda={lam} is below the configured lambda_0={cfg.lam0}")
    zm = f.L / 2.0 if cfg.z_max is None else cfg.z_max
    plan_a = _GeneratorPlan(f, a, spec, cfg.eps, zm)
    q = plan_a.q
    pts = _grid_points(f)

    def frozen_parts(xs):
        a0 = a.frozen(xs)
        plan0 = _GeneratorPlan(f, a0, spec, cfg.eps, zm)
        return a0, plan0

    if a.z_only:
        xs = np.zeros(f.d)
    elif cfg.x_star is not None:
        xs = np.asarray(cfg.x_star, dtype=float)
    else:
        # pick x* by the contraction factor of one trial step from the first iterate
        best = None
        for cand in _candidate_points(f):
            _, plan0 = frozen_parts(cand)
            u0 = f.from_spectrum(f.spectrum / (lam - plan0.symbol))
            if u0.max_abs() == 0.0:
                xs = cand
                break
            pert = plan_a.apply(u0) - plan0.apply(u0)
            step = f.from_spectrum(GridField(pert, f.L).spectrum / (lam - plan0.symbol))
            factor = step.max_abs() / u0.max_abs()
            if best is None or factor < best[0]:
                best = (factor, cand)
        else:
            xs = best[1]
    a0, plan0 = frozen_parts(xs)
    denom = lam - plan0.symbol
    osc_a = np.asarray(a(pts[None, :, :], q.z[:, None, :])).reshape(q.z.shape[0], -1)
    osc0 = np.asarray(a0(np.zeros((1, f.d)), q.z)).reshape(-1, 1)
    oscillation = float(np.max(np.abs(osc_a - osc0)))

    u = f.from_spectrum(f.spectrum / denom)
    history = []
    ratio = float("nan")
    bad = 0
    prev_diff = None
    it = 0
    fnorm = max(f.max_abs(), 1e-300)
    while it < cfg.max_iter:
        it += 1
        rhs = f.values + plan_a.apply(u) - plan0.apply(u)
        new = f.from_spectrum(GridField(rhs, f.L).spectrum / denom)
        diff = float(np.max(np.abs(new.values - u.values)))
        history.append(diff)
        u = new
        if prev_diff is not None and prev_diff > 0:
            ratio = diff / prev_diff
            bad = bad + 1 if ratio >= 1.0 else 0
            if bad >= 3:
                raise DivergenceError(
                    f"frozen-coefficient iteration does not contract: ratio {ratio:.3g} "
                    f"for 3 iterations at lambda={lam}; try a larger lambda")
        prev_diff = diff
        if diff <= cfg.tol * fnorm:
            break
    res = float(np.max(np.abs(lam * u.values - plan_a.apply(u) - f.values)))
    grad = float(np.max(u.gradient_magnitude()))
    return Solution(u, res, it, ratio, np.asarray(xs).tolist(), oscillation,
                    grad * plan_a.a_sup * kernel_first_moment(spec, cfg.eps),
                    2.0 * u.max_abs() * plan_a.a_sup * kernel_tail_mass(spec, q.z_max), history)


# -- Schauder diagnostics ----------------------------------------------------------------

@dataclass(frozen=True)
class SchauderRecord:
    lam: float
    beta: float
    lam_norm_u: float        # lam * N_beta(u)
    top_norm_u: float        # block norm of u at order 1 + beta
    norm_f: float            # N_beta(f)
    ratio: float             # (lam_norm_u + top_norm_u) / norm_f, nan when f = 0
    J_max: int
    residual: float
    iterations: int


def _order_norm(g: GridField, beta: float, spec) -> float:
    return g.max_abs() if beta == 0 else besov_norm(g, beta, None, spec)


def schauder_report(f: GridField, lam: float, a: CoefficientField, spec: SubordinatorSpec,
                    beta: float, config: Optional[SolverConfig] = None,
                    solution: Optional[Solution] = None) -> SchauderRecord:
    """Measure ``(lam N_beta(u) + ||u||_{1+beta}) / N_beta(f)`` for the solution of the resolvent equation.

    ``N_0`` is the sup norm and ``N_beta`` for ``beta > 0`` the sup-type block
    norm of order ``beta`` (equivalent to the Holder-type norm).
    """
    if solution is None:
        if a.z_only:
            solution = solve_homogeneous(f, lam, spec, a, eps=(config.eps if config else 1e-3))
        else:
            cfg = config or SolverConfig(lam)
            if cfg.lam != lam:
                cfg = SolverConfig(lam, cfg.eps, cfg.tol, cfg.max_iter, cfg.x_star, cfg.lam0, cfg.z_max)
            solution = solve_inhomogeneous(f, lam, a, spec, cfg)
    u = solution.u
    jmax = admissible_jmax(u, spec)
    nf = _order_norm(f, beta, spec)
    lam_u = lam * _order_norm(u, beta, spec)
    top = besov_norm(u, 1.0 + beta, None, spec)
    ratio = (lam_u + top) / nf if nf > 0 else float("nan")
    return SchauderRecord(lam, beta, lam_u, top, nf, ratio, jmax, solution.residual, solution.iterations)


def _coefficient_sup_norm(a: CoefficientField, u: GridField, spec, theta: float, eps: float) -> float:
    """``sup_z ||a(., z)||`` in the sup-type block norm of order ``theta``, over the quadrature radii."""
    q = radial_quadrature(spec, eps, u.L / 2.0)
    pts = _grid_points(u)
    if a.z_only:
        return float(np.max(np.abs(a(np.zeros((1, u.d)), q.z))))
    # coefficient slices on a thinned set of jumps; a(., z) varies slowly in z
    sel = np.unique(np.linspace(0, q.z.shape[0] - 1, 48).astype(int))
    best = 0.0
    for i in sel:
        vals = np.asarray(a(pts, q.z[i][None, :])).reshape(u.values.shape)
        best = max(best, besov_norm(GridField(vals, u.L), theta, None, spec))
    return best


def paraproduct_ratios(u: GridField, a: CoefficientField, spec: SubordinatorSpec,
                       alpha: float = 0.5, theta: float = 0.25, eps: float = 1e-3) -> dict:
    """Measured constants of the two paraproduct bounds for ``L u`` with sup-type block norms.

    first:  ||L u||_0 / (||u||_1 sup_z ||a(., z)||_theta)
    second: ||L u||_alpha / (||u||_{1+alpha} sup_z ||a||_theta + ||u||_{1+theta} sup_z ||a||_alpha)
    """
    Lu = apply_generator(u, a, spec, eps).field
    nLu = block_norms(Lu, None, spec)
    nu = block_norms(u, None, spec)
    a_theta = _coefficient_sup_norm(a, u, spec, theta, eps)
    a_alpha = _coefficient_sup_norm(a, u, spec, alpha, eps)
    first_den = besov_norm(u, 1.0, None, spec, norms=nu) * a_theta
    second_den = (besov_norm(u, 1.0 + alpha, None, spec, norms=nu) * a_theta
                  + besov_norm(u, 1.0 + theta, None, spec, norms=nu) * a_alpha)
    first = besov_norm(Lu, 0.0, None, spec, norms=nLu) / first_den if first_den > 0 else float("nan")
    second = besov_norm(Lu, alpha, None, spec, norms=nLu) / second_den if second_den > 0 else float("nan")
    return {"first": first, "second": second, "alpha": alpha, "theta": theta}
