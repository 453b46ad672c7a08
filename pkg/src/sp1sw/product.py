"""The ``S^1 x Sigma`` reduction of the curvature equation.

Coordinates are ``(t, y_1, y_2)`` with the circle first.  A Matrix3 ``m``
splits as ``B = B11 dt(x)dt + B12 (x) dt + dt (x) B21 + B22``, so ``B11 =
m[0, 0]``, ``B12 = m[1:, 0]`` (Sigma form, dt value), ``B21 = m[0, 1:]`` (dt
form, Sigma value) and ``B22 = m[1:, 1:]``.

Circle-invariant configurations are ``a = beta (x) dt + delta`` and
``sigma = lambda dt + omega`` with all fields pulled back from Sigma.  On
Sigma, ``*e^1 = e^2`` and ``*e^2 = -e^1``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._xp import array_namespace
from .chart import CircleHyperbolicDisk, FlatProduct
from .swop import Configuration, frame_jet, cov1, cov2

__all__ = [
    "BlockTensor", "ReducedConfig", "block_decompose", "block_assemble",
    "hodge_sigma", "reduced_terms", "assemble_terms", "reduced_residual",
    "last_block", "last_block_displayed", "last_block_solve", "sigma_curvature",
    "PRODUCT_CHARTS",
]

PRODUCT_CHARTS = {"s1xh2": CircleHyperbolicDisk, "s1xt2": FlatProduct}


@dataclass
class BlockTensor:
    B11: np.ndarray
    B12: np.ndarray
    B21: np.ndarray
    B22: np.ndarray

    def __add__(self, other):
        return BlockTensor(self.B11 + other.B11, self.B12 + other.B12,
                           self.B21 + other.B21, self.B22 + other.B22)

    def __rmul__(self, c):
        return BlockTensor(c * self.B11, c * self.B12, c * self.B21, c * self.B22)

    def max_abs(self):
        return max(float(np.max(np.abs(v))) if np.size(v) else 0.0
                   for v in (self.B11, self.B12, self.B21, self.B22))


def block_decompose(m):
    return BlockTensor(m[..., 0, 0], m[..., 1:, 0], m[..., 0, 1:], m[..., 1:, 1:])


def block_assemble(b):
    xp = array_namespace(b.B22)
    top = xp.concatenate([b.B11[..., None], b.B21], axis=-1)
    bottom = xp.concatenate([b.B12[..., :, None], b.B22], axis=-1)
    return xp.concatenate([top[..., None, :], bottom], axis=-2)


def hodge_sigma(v):
    """``*_Sigma`` on the last axis of a Sigma 1-form: ``(v1, v2) -> (-v2, v1)``."""
    xp = array_namespace(v)
    return xp.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True)
class ReducedConfig:
    """Fields on Sigma in its orthonormal frame, evaluated at 3-D points (``t`` ignored)."""

    beta: Callable
    delta: Callable
    f: Callable
    lam: Callable
    omega: Callable

    def configuration(self):
        def a(x):
            xp = array_namespace(x)
            b = self.beta(x)
            d = self.delta(x)
            rows = xp.concatenate([b[..., :, None], d], axis=-1)
            return xp.concatenate([xp.zeros_like(rows[..., :1, :]), rows], axis=-2)

        def sigma(x):
            xp = array_namespace(x)
            return xp.concatenate([self.lam(x)[..., None], self.omega(x)], axis=-1)
        return Configuration(a, self.f, sigma)


def sigma_curvature(chart, x):
    """Gauss curvature of the Sigma factor."""
    return -1.0 + 0.0 * x[..., 0] if isinstance(chart, CircleHyperbolicDisk) else 0.0 * x[..., 0]


def _zeros(x, *shape):
    xp = array_namespace(x)
    return xp.zeros(x.shape[:-1] + shape)


def reduced_terms(chart, rc, x, backend):
    """The six block matrices of the curvature equation, in order
    ``((f^2 - |sigma|^2) g, -2 f *sigma, sigma (x) sigma, R_g, *d_LC a, 1/2 *[a ^ a])``,
    written with Sigma quantities only.
    """
    xp = array_namespace(x)
    f, lam, om = rc.f(x), rc.lam(x), rc.omega(x)
    be, de = rc.beta(x), rc.delta(x)
    I2 = xp.asarray(np.eye(2))
    vol = xp.asarray(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    z1, z2, z22 = _zeros(x), _zeros(x, 2), _zeros(x, 2, 2)

    s = f * f - lam * lam - xp.sum(om * om, axis=-1)
    t1 = BlockTensor(s, z2, z2, s[..., None, None] * I2)

    hs = hodge_sigma(om)
    t2 = BlockTensor(z1, -2.0 * f[..., None] * hs, 2.0 * f[..., None] * hs,
                     -2.0 * (f * lam)[..., None, None] * vol)

    t3 = BlockTensor(lam * lam, lam[..., None] * om, lam[..., None] * om,
                     om[..., :, None] * om[..., None, :])

    t4 = BlockTensor(-0.5 * sigma_curvature(chart, x), z2, z2, z22)

    # Sigma covariant derivatives via the 3-D frame connection restricted to Sigma
    w = chart.frame_connection(x)[..., 1:, 1:, 1:]
    bv, db = frame_jet(chart, rc.beta, x, backend)
    dv, dd = frame_jet(chart, rc.delta, x, backend)
    Nb = cov1(bv, db[..., 1:, :], w)
    Nd = cov2(dv, dd[..., 1:, :, :], w)
    eps2 = xp.asarray(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    star_dbeta = xp.einsum("ab,...ab->...", eps2, Nb)
    star_dlc_delta = xp.einsum("ab,...abc->...c", eps2, Nd)
    t5 = BlockTensor(star_dbeta, z2, star_dlc_delta, z22)

    det = de[..., 0, 0] * de[..., 1, 1] - de[..., 0, 1] * de[..., 1, 0]
    cross = be[..., 0, None] * hodge_sigma(de[..., 1, :]) - be[..., 1, None] * hodge_sigma(de[..., 0, :])
    t6 = BlockTensor(2.0 * det, z2, 2.0 * cross, z22)
    return t1, t2, t3, t4, t5, t6


def assemble_terms(terms):
    """``F - mu`` from the six terms, with ``mu = 1/2 t1 + 1/2 t2 + t3``."""
    t1, t2, t3, t4, t5, t6 = terms
    return t4 + t5 + t6 + (-0.5) * t1 + (-0.5) * t2 + (-1.0) * t3


def reduced_residual(chart, rc, x, backend):
    """The four block equations ``(B11, B12, B21, B22)`` of ``F - mu = 0``."""
    return assemble_terms(reduced_terms(chart, rc, x, backend))


def last_block(v):
    """``B22`` of ``mu`` for ``v = (f, lambda, omega_1, omega_2)``, flattened to 4 numbers.

    Vanishing is equivalent to ``omega (x) omega - 1/2 |omega|^2 g = 0``,
    ``f^2 - lambda^2 = 0`` and ``f lambda = 0``.
    """
    f, lam, w1, w2 = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    s = 0.5 * (f * f - lam * lam - w1 * w1 - w2 * w2)
    return np.stack([s + w1 * w1, w1 * w2 - f * lam, w1 * w2 + f * lam, s + w2 * w2], axis=-1)


def last_block_displayed(v):
    """The three consequences as printed (with ``f^2 - lambda^2 - 1/2 |omega|^2``)."""
    f, lam, w1, w2 = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    nw = w1 * w1 + w2 * w2
    return np.stack([w1 * w1 - 0.5 * nw, w1 * w2, f * f - lam * lam - 0.5 * nw, f * lam], axis=-1)


def _last_block_jac(v):
    f, lam, w1, w2 = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    rows = [
        [f, -lam, w1, -w2],
        [-lam, -f, w2, w1],
        [lam, f, w2, w1],
        [f, -lam, -w1, w2],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _newton_chunk(v, equations, iters, step_tol):
    v = v.copy()
    active = np.arange(len(v))
    for _ in range(iters):
        if not len(active):
            break
        w = v[active]
        r = equations(w)
        J = _last_block_jac(w) if equations is last_block else _num_jac(equations, w)
        JT = np.swapaxes(J, -1, -2)
        A = JT @ J
        # Levenberg damping proportional to the local scale keeps singular
        # Jacobians solvable without stalling the contraction
        damp = 1e-10 * np.trace(A, axis1=-2, axis2=-1) + 1e-300
        A = A + damp[..., None, None] * np.eye(4)
        step = np.linalg.solve(A, JT @ r[..., None])[..., 0]
        v[active] = w - step
        active = active[np.linalg.norm(step, axis=-1) > step_tol]
    return v


def last_block_solve(density=41, box=2.0, tol=1e-8, iters=100, equations=last_block,
                     chunk=100_000, workers=1):
    """Scan ``[-box, box]^4`` and run damped Newton from every grid point.

    A start stops once its Newton step drops below ``tol / 100``.
    Returns a dict with the distinct solutions found (endpoints whose
    residual and mutual distance are below ``tol``), the number of starts,
    and how many starts stalled with a residual above ``tol``.  Chunks may
    run on ``workers`` threads; results are merged in chunk order.
    """
    ax = np.linspace(-box, box, density)
    grid = np.stack(np.meshgrid(ax, ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 4)
    chunks = [grid[s:s + chunk] for s in range(0, len(grid), chunk)]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            ends = list(ex.map(lambda c: _newton_chunk(c, equations, iters, tol / 100), chunks))
    else:
        ends = [_newton_chunk(c, equations, iters, tol / 100) for c in chunks]
    sols = []
    stalled = 0
    best_nonzero = np.inf
    max_dist = 0.0
    for v in ends:
        res = np.linalg.norm(equations(v), axis=-1)
        ok = res <= tol
        stalled += int(np.sum(~ok))
        if np.any(~ok):
            best_nonzero = min(best_nonzero, float(res[~ok].min()))
        good = v[ok]
        while len(good):
            p = good[0]
            near = np.linalg.norm(good - p, axis=-1) <= tol
            if not any(np.linalg.norm(p - q) <= tol for q in sols):
                sols.append(p)
            max_dist = max(max_dist, float(np.abs(good[near]).max()))
            good = good[~near]
    return {"solutions": [list(map(float, p)) for p in sols], "starts": int(len(grid)),
            "stalled": stalled, "min_stalled_residual": best_nonzero,
            "max_endpoint_norm": max_dist, "tolerance": tol}


def _num_jac(F, v, h=1e-7):
    cols = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        cols.append((F(v + e) - F(v - e)) / (2 * h))
    return np.stack(cols, axis=-1)
