"""The Sp(1)-Seiberg-Witten operator stack in an orthonormal frame.

Fields are callables ``x -> frame components``: a connection deviation
``a[..., i, l]`` (row ``i`` is the form index, column ``l`` the ad index), a
scalar ``f[...]`` and a 1-form ``sigma[..., 3]``.  The spin connection is
``nabla_A = nabla_LC + rho(a)``, whose induced ad-connection is
``nabla_LC + 2 a x .``.

Operators are built from first jets only: every second-order quantity
(Weitzenboeck, squares of the linearization) is obtained by applying a
first-order operator to the *field* produced by another one, so the outer
derivative is taken by the backend.  Tangent vectors and configurations are
packed into one array per point so that each application differentiates
once.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._xp import EPS, EYE3, array_namespace
from .chart import tr_tau_S
from .quat import (clifford, cross, gamma_tilde_matrix, moment_bilinear,
                   moment_explicit, rho, spinor, split, star)

__all__ = [
    "Configuration", "TangentInput", "constant", "frame_jet", "cov0", "cov1",
    "cov2", "ad_connection_derivative", "curvature_F", "curvature_terms",
    "dirac", "dirac_frame_sum", "b_term", "b_term_displayed", "sw_residual",
    "weitzenboeck_residual", "weitzenboeck_terms", "gauge_lin",
    "gauge_lin_adjoint", "big_L_apply", "big_L_field", "big_L_squared",
    "laplacian_blocks", "big_L_squared_check", "codazzi_residual",
    "dstar_moment_identity",
    "canonical", "pack_tangent", "unpack_tangent",
]


def constant(value):
    """Field returning ``value`` at every point."""
    value = np.asarray(value, dtype=float)

    def F(x):
        xp = array_namespace(x)
        z = xp.zeros(x.shape[:-1] + (1,) * value.ndim, dtype=x.dtype)
        return z + xp.asarray(value)
    return F


def _zero(shape):
    return constant(np.zeros(shape))


@dataclass(frozen=True)
class Configuration:
    a: Callable
    f: Callable
    sigma: Callable

    def spinor(self, x):
        return spinor(self.f(x), self.sigma(x))

    def packed(self):
        def P(x):
            xp = array_namespace(x)
            A = self.a(x)
            return xp.concatenate([A.reshape(A.shape[:-2] + (9,)), self.f(x)[..., None],
                                   self.sigma(x)], axis=-1)
        return P


@dataclass(frozen=True)
class TangentInput:
    adot: Callable
    fdot: Callable
    sigmadot: Callable
    xi: Callable

    @classmethod
    def zero(cls):
        return cls(_zero((3, 3)), _zero(()), _zero((3,)), _zero((3,)))

    def packed(self):
        return pack_tangent(self.adot, self.fdot, self.sigmadot, self.xi)


def canonical(sign=1.0):
    """The configuration ``(0, +-1, 0)``."""
    return Configuration(_zero((3, 3)), constant(float(sign)), _zero((3,)))


def pack_tangent(adot, fdot, sigmadot, xi):
    def P(x):
        xp = array_namespace(x)
        A = adot(x)
        return xp.concatenate([A.reshape(A.shape[:-2] + (9,)), fdot(x)[..., None],
                               sigmadot(x), xi(x)], axis=-1)
    return P


def unpack_tangent(T):
    """Split ``[..., 16]`` (or ``[..., i, 16]``) into ``(adot, fdot, sigmadot, xi)``."""
    return (T[..., :9].reshape(T.shape[:-1] + (3, 3)), T[..., 9], T[..., 10:13], T[..., 13:16])


def _slot(P, sl, shape=None):
    def F(x):
        v = P(x)[..., sl]
        return v if shape is None else v.reshape(v.shape[:-1] + shape)
    return F


def tangent_from_packed(P):
    return TangentInput(_slot(P, slice(0, 9), (3, 3)), _slot(P, 9), _slot(P, slice(10, 13)),
                        _slot(P, slice(13, 16)))


# --------------------------------------------------------------------------
# frame jets and covariant derivatives

def frame_jet(chart, F, x, backend):
    """``(F(x), e(F)(x))`` with ``e(F)[..., i, *comp] = h_i^{-1} d_i F``."""
    xp = array_namespace(x)
    val = F(x)
    J = backend.jacobian(F)(x)
    nb = x.ndim - 1
    J = xp.moveaxis(J, -1, nb)
    h = chart.scale(x)
    return val, J / h.reshape(h.shape + (1,) * (J.ndim - nb - 1))


def cov0(df):
    return df


def cov1(s, ds, w):
    """``(nabla_i s)_m = e_i(s_m) + w[i, m, k] s_k``."""
    xp = array_namespace(s, ds, w)
    return ds + xp.einsum("...imk,...k->...im", w, s)


def cov2(T, dT, w):
    xp = array_namespace(T, dT, w)
    return (dT + xp.einsum("...imk,...kn->...imn", w, T)
            + xp.einsum("...ink,...mk->...imn", w, T))


def _star_d(N):
    """``(*d N)_kl = eps_ijk N[i, j, l]`` for a covariant derivative ``N[i, j, l]``."""
    xp = array_namespace(N)
    return xp.einsum("ijk,...ijl->...kl", EPS, N)


def _half_bracket_wedge(a, b):
    """``*[a ^ b]`` on the form factor, row k = ``2 sum eps_ijk a_i x b_j``."""
    xp = array_namespace(a, b)
    return 2.0 * xp.einsum("ijk,lpq,...ip,...jq->...kl", EPS, EPS, a, b)


def ad_connection_derivative(chart, a, v, x, backend):
    """``nabla_LC v + 2 *(a ^ v)``: row ``i`` is the derivative along ``e_i``."""
    vv, dv = frame_jet(chart, v, x, backend)
    A = a(x)
    w = chart.frame_connection(x)
    return cov1(vv, dv, w) + 2.0 * cross(A, vv[..., None, :])


def curvature_terms(chart, a, x, backend):
    """``(R_g, *d_LC a, 1/2 *[a ^ a])`` as Matrix3."""
    A, dA = frame_jet(chart, a, x, backend)
    w = chart.frame_connection(x)
    return (chart.riemann_matrix(x), _star_d(cov2(A, dA, w)), 0.5 * _half_bracket_wedge(A, A))


def curvature_F(chart, a, x, backend):
    R, D, Q = curvature_terms(chart, a, x, backend)
    return R + D + Q


def b_term(a, sigma):
    """``iota(sigma) S(a) - tr(a) sigma``, the combination the frame-sum Dirac operator produces."""
    xp = array_namespace(a, sigma)
    tr, _, S = tr_tau_S(a)
    return xp.einsum("...i,...ij->...j", sigma, S) - tr[..., None] * sigma


def b_term_displayed(a, sigma):
    """The helper identity as printed: ``tr(a) sigma - iota(sigma) S(a)``."""
    return -b_term(a, sigma)


def _dirac_parts(A, f, df, s, ds, w):
    xp = array_namespace(A, s)
    tr, tau, _ = tr_tau_S(A)
    N = cov1(s, ds, w)
    dstar = -xp.trace(N, axis1=-2, axis2=-1)
    curl = xp.einsum("ijk,...ij->...k", EPS, N)
    d1 = dstar - xp.sum(tau * s, axis=-1) + tr * f
    d2 = df + curl - f[..., None] * tau + b_term(A, s)
    return spinor(d1, d2)


def dirac(chart, a, f, sigma, x, backend):
    """Closed-form Dirac operator ``(d*s - <tau(a), s> + tr(a) f, df + *ds - f tau(a) - tr(a) s + iota(s) S(a))``."""
    P = Configuration(a, f, sigma).packed()
    V, D = frame_jet(chart, P, x, backend)
    A = V[..., :9].reshape(V.shape[:-1] + (3, 3))
    return _dirac_parts(A, V[..., 9], D[..., 9], V[..., 10:], D[..., 10:], chart.frame_connection(x))


def dirac_frame_sum(chart, a, f, sigma, x, backend):
    """``sum_i gamma(e_i) nabla_{A, e_i}(f, sigma)`` evaluated literally."""
    xp = array_namespace(x)
    fv, df = frame_jet(chart, f, x, backend)
    sv, ds = frame_jet(chart, sigma, x, backend)
    A = a(x)
    w = chart.frame_connection(x)
    phi = spinor(fv, sv)
    N = cov1(sv, ds, w)
    out = 0.0
    for i in range(3):
        psi = spinor(df[..., i], N[..., i, :]) + rho(A[..., i, :], phi)
        out = out + clifford(xp.asarray(EYE3[i]), psi)
    return out


def sw_residual(chart, config, x, backend):
    """``(F_ad(A) - mu(Phi), D_1, D_2)``; zero exactly at solutions."""
    F = curvature_F(chart, config.a, x, backend)
    mu = moment_explicit(config.spinor(x))
    D = dirac(chart, config.a, config.f, config.sigma, x, backend)
    return F - mu, D[..., 0], D[..., 1:]


# --------------------------------------------------------------------------
# Weitzenboeck

def _spinor_cov(chart, a, phi, x, backend):
    """``psi[..., i, :] = nabla_{A, e_i} phi`` (spinor-valued, frame index ``i``)."""
    p, dp = frame_jet(chart, phi, x, backend)
    w = chart.frame_connection(x)
    A = a(x)
    xp = array_namespace(x)
    N = cov1(p[..., 1:], dp[..., 1:], w)
    base = xp.concatenate([dp[..., :1], N], axis=-1)
    return base + rho(A, p[..., None, :])


def weitzenboeck_terms(chart, a, phi, x, backend):
    """``(D^2 phi, nabla* nabla phi, gamma~(F) phi, scal/4 phi)``."""

    def Dphi(y):
        return dirac(chart, a, lambda z: phi(z)[..., 0], lambda z: phi(z)[..., 1:], y, backend)

    D2 = dirac(chart, a, lambda y: Dphi(y)[..., 0], lambda y: Dphi(y)[..., 1:], x, backend)

    def Psi(y):
        return _spinor_cov(chart, a, phi, y, backend)

    psi, dpsi = frame_jet(chart, Psi, x, backend)  # psi[i, :], dpsi[j, i, :]
    w = chart.frame_connection(x)
    A = a(x)
    xp = array_namespace(x)
    rough = 0.0
    for i in range(3):
        q = psi[..., i, :]
        dq = dpsi[..., i, i, :]
        inner = xp.concatenate([dq[..., :1], dq[..., 1:] + xp.einsum("...mk,...k->...m", w[..., i, :, :], q[..., 1:])], axis=-1)
        inner = inner + rho(A[..., i, :], q)
        inner = inner - xp.einsum("...k,...ks->...s", w[..., i, :, i], psi)
        rough = rough - inner
    F = curvature_F(chart, a, x, backend)
    p = phi(x)
    return D2, rough, gamma_tilde_matrix(F, p), 0.25 * chart.scalar_curvature(x)[..., None] * p


def weitzenboeck_residual(chart, a, phi, x, backend):
    """``D^2 phi - nabla* nabla phi - gamma~(F) phi - scal/4 phi``."""
    D2, rough, curv, scal = weitzenboeck_terms(chart, a, phi, x, backend)
    return D2 - rough - curv - scal


# --------------------------------------------------------------------------
# linearization

def _d_ad(A, xi, dxi, w):
    return cov1(xi, dxi, w) + 2.0 * cross(A, xi[..., None, :])


def _d_ad_star(A, adot, dadot, w):
    """``d*_ad adot = -sum_i (nabla_i adot)_i - 2 sum_i a_i x adot_i``."""
    xp = array_namespace(A, adot)
    N = cov2(adot, dadot, w)
    return -xp.einsum("...iil->...l", N) - 2.0 * xp.sum(cross(A, adot), axis=-2)


def _rho_star(s, sdot):
    """Adjoint of ``xi -> rho(xi) s`` evaluated on ``sdot``."""
    f, sig = split(s)
    g, tau = split(sdot)
    return g[..., None] * sig - f[..., None] * tau + cross(sig, tau)


def gauge_lin(chart, config, xi, x, backend):
    """Infinitesimal gauge action ``(-d_ad xi, rho(xi) Phi)`` split as (Matrix3, real, 1-form)."""
    xv, dxi = frame_jet(chart, xi, x, backend)
    A = config.a(x)
    s = config.spinor(x)
    r = rho(xv, s)
    return -_d_ad(A, xv, dxi, chart.frame_connection(x)), r[..., 0], r[..., 1:]


def gauge_lin_adjoint(chart, config, adot, fdot, sigmadot, x, backend):
    av, da = frame_jet(chart, adot, x, backend)
    A = config.a(x)
    s = config.spinor(x)
    return -_d_ad_star(A, av, da, chart.frame_connection(x)) + _rho_star(s, spinor(fdot(x), sigmadot(x)))


def _big_L_packed(chart, Cfg, T, x, backend):
    """Apply the linearization to packed config/tangent fields; returns packed ``[..., 16]``."""
    xp = array_namespace(x)
    C = Cfg(x)
    A = C[..., :9].reshape(C.shape[:-1] + (3, 3))
    s = C[..., 9:13]
    V, D = frame_jet(chart, T, x, backend)
    w = chart.frame_connection(x)
    ad, fd, sd, xi = unpack_tangent(V)
    dad, dfd, dsd, dxi = unpack_tangent(D)
    sdot = spinor(fd, sd)

    row1 = (_star_d(cov2(ad, dad, w)) + _half_bracket_wedge(A, ad)
            - 2.0 * moment_bilinear(s, sdot) - _d_ad(A, xi, dxi, w))
    lin_dirac = _dirac_parts(A, fd, dfd, sd, dsd, w) + gamma_tilde_matrix(ad, s)
    row23 = -lin_dirac + rho(xi, s)
    row4 = -_d_ad_star(A, ad, dad, w) + _rho_star(s, sdot)
    return xp.concatenate([row1.reshape(row1.shape[:-2] + (9,)), row23, row4], axis=-1)


def big_L_field(chart, config, tangent, backend):
    """The linearization applied to a tangent field, itself returned as a packed field."""
    Cfg = config.packed()
    T = tangent.packed() if isinstance(tangent, TangentInput) else tangent
    return lambda y: _big_L_packed(chart, Cfg, T, y, backend)


def big_L_apply(chart, config, tangent, x, backend):
    """``L(adot, fdot, sigmadot, xi)`` as (Matrix3, real, 1-form, 1-form)."""
    return unpack_tangent(big_L_field(chart, config, tangent, backend)(x))


def big_L_squared(chart, config, tangent, x, backend):
    inner = big_L_field(chart, config, tangent, backend)
    return unpack_tangent(big_L_field(chart, config, inner, backend)(x))


def big_L_squared_check(chart, tangent, x, backend, claimed="displayed"):
    """Residual of ``L^2`` at ``(0, 1, 0)`` against a claimed block-diagonal operator.

    ``claimed="displayed"`` uses ``diag(Delta_LC + 2 g tr + 2 *tau, Delta + 6,
    Delta + 5, Delta_LC + 1)``; ``claimed="derived"`` uses the operator that
    actually results from this normalization, ``diag(Delta_LC + g tr + *tau,
    Delta + 3, Delta + 3, Delta_LC + 1)``.  Returns the four slot residuals.
    """
    coef = {"displayed": (2.0, 2.0, 6.0, 5.0, 1.0), "derived": (1.0, 1.0, 3.0, 3.0, 1.0)}[claimed]
    ct, cs, cf, csig, cxi = coef
    cfg = canonical(1.0)
    T = tangent.packed() if isinstance(tangent, TangentInput) else tangent
    La, Lf, Ls, Lx = big_L_squared(chart, cfg, T, x, backend)
    lap = laplacian_blocks(chart, T, x, backend)
    ad, fd, sd, xi = unpack_tangent(T(x))
    tr, tau, _ = tr_tau_S(ad)
    xp = array_namespace(x)
    ra = La - (lap[0] + ct * tr[..., None, None] * xp.asarray(EYE3) + cs * star(tau))
    rf = Lf - (lap[1] + cf * fd)
    rs = Ls - (lap[2] + csig * sd)
    rx = Lx - (lap[3] + cxi * xi)
    return ra, rf, rs, rx


def laplacian_blocks(chart, tangent, x, backend):
    """``(Delta_LC adot, Delta fdot, Delta sigmadot, Delta_LC xi)``.

    ``Delta_LC = d_LC d*_LC + d*_LC d_LC`` on T*M-valued forms and the Hodge
    Laplacian on scalars and 1-forms, each assembled from first-order pieces
    so the outer derivative is taken by the backend.
    """
    xp = array_namespace(x)
    T = tangent.packed() if isinstance(tangent, TangentInput) else tangent

    def first(y):
        xp = array_namespace(y)
        V, D = frame_jet(chart, T, y, backend)
        w = chart.frame_connection(y)
        ad, fd, sd, xi = unpack_tangent(V)
        dad, dfd, dsd, dxi = unpack_tangent(D)
        Na = cov2(ad, dad, w)
        Ns = cov1(sd, dsd, w)
        Nx = cov1(xi, dxi, w)
        nb = y.shape[:-1]
        return xp.concatenate([
            -xp.einsum("...iil->...l", Na),                # d*_LC adot
            _star_d(Na).reshape(nb + (9,)),                # *d_LC adot
            dfd,                                           # d fdot
            -xp.trace(Ns, axis1=-2, axis2=-1)[..., None],  # d* sigmadot
            xp.einsum("ijk,...ij->...k", EPS, Ns),         # *d sigmadot
            Nx.reshape(nb + (9,)),                         # d_LC xi
        ], axis=-1)

    V, D = frame_jet(chart, first, x, backend)
    w = chart.frame_connection(x)

    def m3(v):
        return v.reshape(v.shape[:-1] + (3, 3))

    lap_a = cov1(V[..., 0:3], D[..., 0:3], w) + _star_d(cov2(m3(V[..., 3:12]), m3(D[..., 3:12]), w))
    lap_f = -xp.trace(cov1(V[..., 12:15], D[..., 12:15], w), axis1=-2, axis2=-1)
    lap_s = D[..., 15] + xp.einsum("ijk,...ij->...k", EPS, cov1(V[..., 16:19], D[..., 16:19], w))
    lap_x = -xp.einsum("...iil->...l", cov2(m3(V[..., 19:28]), m3(D[..., 19:28]), w))
    return lap_a, lap_f, lap_s, lap_x


def codazzi_residual(chart, a, x, backend):
    """``(*d_LC a, tr a, tau(a))``; all zero for a trace-free Codazzi tensor."""
    A, dA = frame_jet(chart, a, x, backend)
    tr, tau, _ = tr_tau_S(A)
    return _star_d(cov2(A, dA, chart.frame_connection(x))), tr, tau


def _dstar_moment_pieces(chart, a, phi, psi, x, backend):
    """``(d*_ad mu(phi, psi), mu(D phi, psi) + mu(D psi, phi), Q)`` with
    ``Q[i, l] = <rho(e_l) psi, nabla_i phi> + <rho(e_l) phi, nabla_i psi>``."""
    xp = array_namespace(x)

    def M(y):
        return moment_bilinear(phi(y), psi(y))

    Mv, dM = frame_jet(chart, M, x, backend)
    w = chart.frame_connection(x)
    A = a(x)
    lhs = _star_d(cov2(Mv, dM, w)) + _half_bracket_wedge(A, Mv)
    p, q = phi(x), psi(x)
    Dp = dirac(chart, a, lambda y: phi(y)[..., 0], lambda y: phi(y)[..., 1:], x, backend)
    Dq = dirac(chart, a, lambda y: psi(y)[..., 0], lambda y: psi(y)[..., 1:], x, backend)
    P = moment_bilinear(Dp, q) + moment_bilinear(Dq, p)
    Np = _spinor_cov(chart, a, phi, x, backend)
    Nq = _spinor_cov(chart, a, psi, x, backend)
    E = xp.asarray(EYE3)
    rq = rho(E, q[..., None, :])  # [l, s]
    rp = rho(E, p[..., None, :])
    Q = xp.einsum("...ls,...is->...il", rq, Np) + xp.einsum("...ls,...is->...il", rp, Nq)
    return lhs, P, Q


def dstar_moment_identity(chart, a, phi, psi, x, backend):
    """Residual of ``d*_ad mu(phi, psi) = *mu(D phi, psi) + *mu(D psi, phi) - 1/2 rho*((nabla phi) psi* + (nabla psi) phi*)``.

    The ``rho*`` term is the ad-valued 1-form
    ``Q[i, l] = <rho(e_l) psi, nabla_i phi> + <rho(e_l) phi, nabla_i psi>``.
    """
    lhs, P, Q = _dstar_moment_pieces(chart, a, phi, psi, x, backend)
    return lhs - P + 0.5 * Q
