"""Spectral discretization of the SW system on the flat 3-torus and a
least-squares solver for it.

Fields live on an ``N^3`` grid over ``[0, 2 pi)^3`` with components last.
:class:`SpectralBackend` plugs FFT differentiation into the generic operator
stack of :mod:`sp1sw.swop`, so the torus residual is literally the same code
as the chart-level residual, evaluated on the flat chart.  The nonlinear
terms are dealiased with the 2/3 rule: iterates are kept in the band
``|k_j| < N/3`` and residuals are projected back onto it, which makes the
quadratic products exact.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ._xp import array_namespace
from .backend import Backend, enable_jax
from .chart import FlatTorus
from .quat import axial, moment_explicit, qconj, qmul, rotation
from .swop import _spinor_cov, big_L_squared, curvature_F, sw_residual, Configuration

__all__ = [
    "AliasingError", "Grid", "SpectralBackend", "GridConfig", "FlowReport",
    "assemble_residual", "residual_norm", "objective", "flow_to_solution",
    "energy_identity", "gauge_transform", "random_start", "preset", "resample",
    "l2_inner", "offdiag_L2_flat", "gradient_check",
]

VOLUME = (2 * np.pi) ** 3


class AliasingError(ValueError):
    """Field content above the dealiased band of the grid."""


class Grid:
    def __init__(self, n=16):
        if n < 4 or n & (n - 1):
            raise ValueError("grid resolution must be a power of two >= 4")
        self.n = n
        t = 2 * np.pi * np.arange(n) / n
        self.x = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1)
        k = np.fft.fftfreq(n, 1.0 / n)
        self.k = k
        self.K = np.stack(np.meshgrid(k, k, k, indexing="ij"), axis=-1)
        self.k2 = np.sum(self.K ** 2, axis=-1)
        self.band = np.all(np.abs(self.K) < n / 3.0, axis=-1)

    def mean(self, v, xp=np):
        return xp.mean(v, axis=(0, 1, 2))

    def integrate(self, v, xp=np):
        return VOLUME * xp.mean(v, axis=(0, 1, 2))

    def dealias(self, v, xp=np):
        """Project a grid field (components last) onto the 2/3 band."""
        mask = xp.asarray(self.band.reshape(self.band.shape + (1,) * (v.ndim - 3)))
        return xp.real(xp.fft.ifftn(xp.fft.fftn(v, axes=(0, 1, 2)) * mask, axes=(0, 1, 2)))

    def check_band(self, v, tol=1e-10):
        spec = np.fft.fftn(np.asarray(v), axes=(0, 1, 2))
        out = ~self.band.reshape(self.band.shape + (1,) * (np.ndim(v) - 3))
        leak = np.abs(spec * out).max() / max(1.0, np.abs(spec).max())
        if leak > tol:
            raise AliasingError(f"field has content above the |k| < N/3 band (relative {leak:.2e})")


class SpectralBackend(Backend):
    """Exact derivatives of grid fields; ``x`` must be the full grid."""

    name = "spectral"
    tol = 1e-12

    def __init__(self, grid):
        self.grid = grid

    def partial(self, F, j):
        n = self.grid.n

        def dF(x):
            xp = array_namespace(x)
            v = F(x)
            ik = 1j * np.fft.fftfreq(n, 1.0 / n)
            ik[n // 2] = 0.0
            shape = [1] * v.ndim
            shape[j] = n
            ik = xp.asarray(ik.reshape(shape))
            return xp.real(xp.fft.ifft(xp.fft.fft(v, axis=j) * ik, axis=j))
        return dF


@dataclass
class GridConfig:
    """``a[N, N, N, 3, 3]``, ``f[N, N, N]``, ``sigma[N, N, N, 3]``."""

    a: np.ndarray
    f: np.ndarray
    sigma: np.ndarray

    def to_vector(self):
        xp = array_namespace(self.a)
        return xp.concatenate([self.a.reshape(-1), self.f.reshape(-1), self.sigma.reshape(-1)])

    @classmethod
    def from_vector(cls, u, n):
        m = n ** 3
        return cls(u[:9 * m].reshape(n, n, n, 3, 3), u[9 * m:10 * m].reshape(n, n, n),
                   u[10 * m:].reshape(n, n, n, 3))

    def configuration(self):
        return Configuration(lambda x: self.a, lambda x: self.f, lambda x: self.sigma)

    def spinor(self):
        xp = array_namespace(self.f)
        return xp.concatenate([self.f[..., None], self.sigma], axis=-1)


def preset(name, grid):
    n = grid.n
    z = np.zeros((n, n, n))
    if name == "zero":
        return GridConfig(np.zeros((n, n, n, 3, 3)), z, np.zeros((n, n, n, 3)))
    if name == "phi-one":
        return GridConfig(np.zeros((n, n, n, 3, 3)), z + 1.0, np.zeros((n, n, n, 3)))
    raise ValueError(f"unknown start preset {name!r}; expected 'zero' or 'phi-one'")


def resample(cfg, grid, new):
    """Spectral interpolation of a band-limited configuration onto a finer grid."""
    if new.n < grid.n:
        raise ValueError("resample only refines the grid")
    k = np.fft.fftfreq(grid.n, 1.0 / grid.n).astype(int) % new.n
    idx = np.ix_(k, k, k)

    def up(v):
        spec = np.fft.fftn(v, axes=(0, 1, 2))
        out = np.zeros((new.n,) * 3 + v.shape[3:], dtype=complex)
        out[idx] = spec
        return np.real(np.fft.ifftn(out, axes=(0, 1, 2))) * (new.n / grid.n) ** 3
    return GridConfig(up(cfg.a), up(cfg.f), up(cfg.sigma))


def random_start(rng, grid, amplitude=1.0, kmax=1):
    """Band-limited random configuration with sup norm ``amplitude`` per slot."""
    def rand(shape):
        v = np.zeros(grid.x.shape[:-1] + shape)
        for k in np.ndindex(*(2 * kmax + 1,) * 3):
            kv = np.array(k) - kmax
            ph = grid.x @ kv
            c = rng.standard_normal((2,) + shape)
            v = v + np.multiply.outer(np.cos(ph), c[0]) + np.multiply.outer(np.sin(ph), c[1])
        return amplitude * v / np.abs(v).max()
    return GridConfig(rand((3, 3)), rand(()), rand((3,)))


def assemble_residual(cfg, grid, xp=np, check=True, dealias=True):
    """``(F - mu, D_1, D_2)`` on the grid, projected onto the 2/3 band by default."""
    if check and xp is np:
        for v in (cfg.a, cfg.f, cfg.sigma):
            grid.check_band(v)
    be = SpectralBackend(grid)
    r = sw_residual(FlatTorus(), cfg.configuration(), xp.asarray(grid.x), be)
    return tuple(grid.dealias(v, xp) for v in r) if dealias else r


def _stack_residual(r, xp):
    cur, d1, d2 = r
    return xp.concatenate([cur.reshape(cur.shape[:3] + (9,)), d1[..., None], d2], axis=-1)


def coulomb(cfg, grid, xp=np):
    """``d^* a = -sum_i d_i a_i`` (flat metric), the Coulomb gauge condition."""
    be = SpectralBackend(grid)
    x = xp.asarray(grid.x)
    return -sum(be.partial(lambda y, i=i: cfg.a[..., i, :], i)(x) for i in range(3))


def _objective_stack(cfg, grid, xp, gauge_weight):
    r = _stack_residual(assemble_residual(cfg, grid, xp, check=False), xp)
    if gauge_weight:
        r = xp.concatenate([r, gauge_weight * grid.dealias(coulomb(cfg, grid, xp), xp)], axis=-1)
    return r


def residual_norm(cfg, grid, xp=np, dealias=True):
    r = _stack_residual(assemble_residual(cfg, grid, xp, check=dealias, dealias=dealias), xp)
    return xp.sqrt(grid.integrate(xp.sum(r * r, axis=-1), xp))


def objective(u, grid, xp=np, gauge_weight=1.0):
    """``1/2 ||residual||^2_{L^2}`` of a flattened configuration vector,
    with the Coulomb condition appended to the SW residual unless
    ``gauge_weight`` is 0."""
    cfg = GridConfig.from_vector(u, grid.n)
    r = _objective_stack(cfg, grid, xp, gauge_weight)
    return 0.5 * grid.integrate(xp.sum(r * r, axis=-1), xp)


def l2_inner(u, v, grid, xp=np):
    """``L^2`` pairing of two grid fields with matching component shapes."""
    prod = u * v
    return grid.integrate(xp.sum(prod.reshape(prod.shape[:3] + (-1,)), axis=-1), xp)


# --------------------------------------------------------------------------
# solver

@dataclass
class FlowReport:
    method: str
    converged: bool
    iterations: int
    residual_history: list = field(default_factory=list)
    final_residual: float = float("nan")
    phi_sup: float = float("nan")
    curvature_l2: float = float("nan")
    energy: tuple = (float("nan"),) * 3
    energy_sum: float = float("nan")
    sw_residual: float = float("nan")
    message: str = ""

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Compiled:
    """jit-compiled objective pieces for one grid size."""

    _cache = {}

    def __new__(cls, grid, gauge_weight=1.0):
        key = (grid.n, float(gauge_weight))
        if key not in cls._cache:
            obj = super().__new__(cls)
            obj._build(grid, float(gauge_weight))
            cls._cache[key] = obj
        return cls._cache[key]

    def _build(self, grid, gauge_weight):
        jax, jnp = enable_jax()
        self.jax, self.jnp = jax, jnp
        n = grid.n

        def project(u):
            cfg = GridConfig.from_vector(u, n)
            return GridConfig(grid.dealias(cfg.a, jnp), grid.dealias(cfg.f, jnp),
                              grid.dealias(cfg.sigma, jnp)).to_vector()

        def resid(u):
            cfg = GridConfig.from_vector(u, n)
            r = _objective_stack(cfg, grid, jnp, gauge_weight)
            return r * jnp.sqrt(VOLUME / n ** 3)

        def obj(u):
            r = resid(u)
            return 0.5 * jnp.sum(r * r)

        self.project = jax.jit(project)
        self.resid = jax.jit(resid)
        self.obj = jax.jit(obj)
        self.value_and_grad = jax.jit(jax.value_and_grad(obj))
        shaped = {c: jnp.asarray((grid.band / (1.0 + grid.k2)).reshape(grid.k2.shape + (1,) * c))
                  for c in (0, 1, 2)}

        def precondition(u):
            # (1 + |k|^2)^{-1} in Fourier space, restricted to the band
            cfg = GridConfig.from_vector(u, n)
            out = [jnp.real(jnp.fft.ifftn(jnp.fft.fftn(v, axes=(0, 1, 2)) * shaped[v.ndim - 3],
                                          axes=(0, 1, 2)))
                   for v in (cfg.a, cfg.f, cfg.sigma)]
            return GridConfig(*out).to_vector()

        def gn_step(u, damping, tol, maxiter):
            r, jvp_fn = jax.linearize(resid, u)
            vjp_fn = jax.linear_transpose(jvp_fn, u)

            def normal(v):
                v = project(v)
                return project(vjp_fn(jvp_fn(v))[0]) + damping * v

            rhs = -project(vjp_fn(r)[0])
            sol, _ = jax.scipy.sparse.linalg.cg(normal, rhs, tol=tol, atol=0.0, maxiter=maxiter,
                                                M=precondition)
            return project(sol)
        self.gn_step = jax.jit(gn_step, static_argnums=(3,))


def flow_to_solution(init, grid, method="gd", max_iters=500, tol=1e-9, step=0.1,
                     armijo=1e-4, backtrack=0.5, cg_tol=1e-8, cg_maxiter=500,
                     min_step=1e-14, damping=1e-2, gauge_weight=1.0, callback=None):
    """Minimize ``1/2 ||residual||^2`` from ``init``.

    ``method="gd"`` is gradient descent with Armijo backtracking;
    ``method="gn"`` is Gauss-Newton with preconditioned CG inner solves and
    the same line search.  Convergence means ``||residual||_{L^2} <= tol``.
    """
    if method not in ("gd", "gn"):
        raise ValueError("method must be 'gd' or 'gn'")
    for v in (init.a, init.f, init.sigma):
        grid.check_band(v)
    C = _Compiled(grid, gauge_weight)
    jnp = C.jnp
    u = C.project(jnp.asarray(init.to_vector()))
    val, g = C.value_and_grad(u)
    hist = [float(np.sqrt(2 * val))]
    converged = hist[-1] <= tol
    it = 0
    msg = "converged" if converged else ""
    t = step
    lm = damping
    while not converged and it < max_iters:
        it += 1
        g = C.project(g)
        if method == "gd":
            d = -g
            t = min(2.0 * t, 1e3 * step) if it > 1 else step
        else:
            d = C.gn_step(u, lm * hist[-1], cg_tol, cg_maxiter)
            t = 1.0
        slope = float(jnp.vdot(g, d))
        if slope >= 0:
            d, slope = -g, -float(jnp.vdot(g, g))
        while True:
            new = C.obj(u + t * d)
            if float(new) <= float(val) + armijo * t * slope:
                break
            t *= backtrack
            if t < min_step:
                break
        if t < min_step:
            msg = "step underflow"
            break
        if method == "gn":
            # Levenberg-Marquardt style: relax damping after full steps
            lm = lm / 4.0 if t == 1.0 else lm * 4.0
        u = u + t * d
        val, g = C.value_and_grad(u)
        hist.append(float(np.sqrt(2 * val)))
        converged = hist[-1] <= tol
        if callback is not None:
            callback(it, hist[-1], t)
    if converged:
        msg = "converged"
    elif not msg:
        msg = "iteration limit"
    cfg = GridConfig.from_vector(np.asarray(u), grid.n)
    return _finish(cfg, grid, method, converged, it, hist, msg), cfg


def _finish(cfg, grid, method, converged, it, hist, msg):
    F = curvature_F(FlatTorus(), cfg.configuration().a, grid.x, SpectralBackend(grid))
    curv = float(np.sqrt(grid.integrate(np.sum(F * F, axis=(-2, -1)))))
    e = energy_identity(cfg, grid)
    return FlowReport(method=method, converged=bool(converged), iterations=it,
                      residual_history=hist, final_residual=hist[-1],
                      phi_sup=float(np.abs(cfg.spinor()).max()), curvature_l2=curv,
                      energy=tuple(float(v) for v in e), energy_sum=float(sum(e)),
                      sw_residual=float(residual_norm(cfg, grid, dealias=False)), message=msg)


def energy_identity(cfg, grid, scal=0.0):
    """``(||nabla_A Phi||^2, 2 ||mu(Phi)||^2, 1/4 int scal |Phi|^2)``.

    For a solution on the flat torus the three terms sum to zero.
    """
    phi = cfg.spinor()
    psi = _spinor_cov(FlatTorus(), cfg.configuration().a, lambda x: phi, grid.x, SpectralBackend(grid))
    mu = moment_explicit(phi)
    t1 = grid.integrate(np.sum(psi * psi, axis=(-2, -1)))
    t2 = 2.0 * grid.integrate(np.sum(mu * mu, axis=(-2, -1)))
    t3 = 0.25 * scal * grid.integrate(np.sum(phi * phi, axis=-1))
    return float(t1), float(t2), float(t3)


# --------------------------------------------------------------------------
# gauge transformations

def gauge_transform(cfg, xi, grid):
    """Finite gauge transformation ``u = exp(xi)`` acting through ``rho``.

    The spinor becomes ``Phi conj(q)`` with ``q = exp(xi)`` as a unit
    quaternion, the ad index of ``a`` rotates by ``R = Ad_q`` and picks up
    the Maurer-Cartan term, ``a_i -> R a_i - 1/2 axial(R d_i R^T)``.  The
    result is generally not band-limited.
    """
    th = np.linalg.norm(xi, axis=-1)
    safe = np.where(th > 0, th, 1.0)
    q = np.concatenate([np.cos(th)[..., None], (np.sin(th) / safe)[..., None] * xi], axis=-1)
    phi = qmul(cfg.spinor(), qconj(q))
    R = rotation(q)
    be = SpectralBackend(grid)
    dR = be.jacobian(lambda x: R)(grid.x)  # [..., 3, 3, i]
    mc = np.stack([axial(-(dR[..., i] @ np.swapaxes(R, -1, -2))) for i in range(3)], axis=-2)
    a_new = np.einsum("...pl,...il->...ip", R, cfg.a) - 0.5 * mc
    return GridConfig(a_new, phi[..., 0], phi[..., 1:])


# --------------------------------------------------------------------------
# linearization at reducible flat solutions

def offdiag_L2_flat(grid, cfg, tangents):
    """Largest off-diagonal block of ``L^2`` at a reducible configuration.

    The blocks are ``adot``, the spinor ``phidot = (fdot, sigmadot)`` and
    ``xi``.  ``tangents`` maps block names to :class:`TangentInput` grid
    fields supported in that block only; for each, ``L^2`` is applied
    spectrally and the size of the other blocks of the output is collected.
    """
    be = SpectralBackend(grid)
    blocks = {"adot": (0,), "phidot": (1, 2), "xi": (3,)}
    out = {}
    for nm, T in tangents.items():
        res = big_L_squared(FlatTorus(), cfg.configuration(), T, grid.x, be)
        out[nm] = {other: max(float(np.abs(res[j]).max()) for j in idx)
                   for other, idx in blocks.items() if other != nm}
    return out


def gradient_check(u, grid, rng, n_dirs=10, h=1e-3, gauge_weight=1.0):
    """Relative error of the autodiff gradient against central differences."""
    # the objective is O(1e3) at random starts, so smaller steps lose to rounding
    C = _Compiled(grid, gauge_weight)
    jnp = C.jnp
    u = C.project(jnp.asarray(u))
    _, g = C.value_and_grad(u)
    errs = []
    for _ in range(n_dirs):
        d = C.project(jnp.asarray(rng.standard_normal(u.shape)))
        d = d / jnp.linalg.norm(d)
        fd = (float(C.obj(u + h * d)) - float(C.obj(u - h * d))) / (2 * h)
        ad = float(jnp.vdot(g, d))
        errs.append(abs(fd - ad) / max(abs(ad), 1e-12))
    return max(errs)
