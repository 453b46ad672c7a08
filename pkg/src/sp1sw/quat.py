"""Quaternionic representations, Clifford multiplication and the moment map.

Conventions
-----------
Quaternions and spinors share one array layout: the last axis has length 4,
``q = (re, i, j, k)`` and ``s = (f, sigma_1, sigma_2, sigma_3)``.  The
identification of H with R + T*M is ``f + sigma_1 i + sigma_2 j + sigma_3 k``
in an oriented orthonormal coframe.  Matrix3 values are ``[..., 3, 3]``
arrays; for moment maps and curvatures the first index is the (Hodge-starred)
form index and the second index is the adjoint index.

Every function broadcasts over leading axes and accepts numpy or jax arrays.
"""

import numpy as np

from ._xp import EPS, EYE3, array_namespace

__all__ = [
    "qmul", "qconj", "pure", "quat_gamma", "quat_rho", "gamma_tilde",
    "spinor", "split", "cross", "star", "axial", "gamma_pm", "clifford", "rho",
    "gamma_tilde_matrix", "moment_abstract", "moment_explicit",
    "moment_bilinear", "lie_bracket", "bracket", "bracket_moment_identity",
    "rotation", "moment_equivariance_residual", "is_symmetric",
    "is_antisymmetric", "properness_constant", "PROPERNESS_CONSTANT",
]

# |mu(s)|^2 = 3/4 |s|^4 in this normalization, so min over the unit sphere is sqrt(3)/2.
PROPERNESS_CONSTANT = float(np.sqrt(3.0) / 2.0)


def qmul(p, q):
    """Hamilton product of quaternion arrays."""
    xp = array_namespace(p, q)
    p0, p1, p2, p3 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    q0, q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return xp.stack([
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
        p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
        p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
    ], axis=-1)


def qconj(q):
    xp = array_namespace(q)
    return xp.concatenate([q[..., :1], -q[..., 1:]], axis=-1)


def pure(v):
    """Embed 3-vectors as imaginary quaternions."""
    xp = array_namespace(v)
    return xp.concatenate([xp.zeros_like(v[..., :1]), v], axis=-1)


def quat_gamma(p, phi):
    """Left multiplication, ``gamma(p) phi = p phi``."""
    return qmul(p, phi)


def quat_rho(p, phi):
    """Right multiplication by the conjugate, ``rho(p) phi = phi conj(p)``."""
    return qmul(phi, qconj(p))


def gamma_tilde(v, xi, phi):
    """``gamma(v) rho(xi) phi = -v phi xi`` for 3-vectors ``v`` and ``xi``."""
    return -qmul(qmul(pure(v), phi), pure(xi))


def spinor(f, sigma):
    xp = array_namespace(f, sigma)
    f = xp.asarray(f)
    sigma = xp.asarray(sigma)
    return xp.concatenate([f[..., None], sigma], axis=-1)


def split(s):
    return s[..., 0], s[..., 1:]


def cross(u, w):
    xp = array_namespace(u, w)
    return xp.einsum("ijk,...j,...k->...i", EPS, u, w)


def star(v):
    """Hodge star of a 1-form as a skew Matrix3, ``(*v)_ij = eps_ijk v_k``."""
    xp = array_namespace(v)
    return xp.einsum("ijk,...k->...ij", EPS, v)


def axial(m):
    """Inverse of :func:`star` on the skew part: ``axial(star(v)) == v``."""
    xp = array_namespace(m)
    return 0.5 * xp.einsum("ijk,...ij->...k", EPS, m)


def gamma_pm(sign, nu, s):
    """Explicit ``gamma_+`` (sign=+1) or ``gamma_-`` (sign=-1) on R + T*M.

    ``gamma_pm(nu)(f, sigma) = (-<nu, sigma>, f nu +- *(nu ^ sigma))``.
    """
    xp = array_namespace(nu, s)
    f, sigma = split(s)
    head = -xp.sum(nu * sigma, axis=-1)
    tail = f[..., None] * nu + sign * cross(nu, sigma)
    return xp.concatenate([head[..., None], tail], axis=-1)


def clifford(nu, s):
    """Clifford multiplication ``gamma = gamma_+``."""
    return gamma_pm(1, nu, s)


def rho(xi, s):
    """Adjoint-bundle action ``rho = -gamma_-``."""
    return -gamma_pm(-1, xi, s)


def gamma_tilde_matrix(m, s):
    """``sum_kl m_kl gamma(e_k) rho(e_l) s`` for a Matrix3 ``m``."""
    xp = array_namespace(m, s)
    out = 0.0
    for k in range(3):
        for l in range(3):
            ek = xp.asarray(EYE3[k])
            el = xp.asarray(EYE3[l])
            out = out + m[..., k, l, None] * clifford(ek, rho(el, s))
    return out


def moment_abstract(phi, psi):
    """Bilinear moment map from its quaternionic definition.

    Returns the Matrix3 ``M_kl = 1/2 <gamma~(e_k (x) e_l) phi, psi>``, i.e.
    ``1/2 gamma~^*(phi psi^*)`` paired against the basis ``e_k (x) e_l``.
    """
    xp = array_namespace(phi, psi)
    rows = []
    for k in range(3):
        row = []
        for l in range(3):
            gt = gamma_tilde(xp.asarray(EYE3[k]), xp.asarray(EYE3[l]), phi)
            row.append(0.5 * xp.sum(gt * psi, axis=-1))
        rows.append(xp.stack(row, axis=-1))
    return xp.stack(rows, axis=-2)


def moment_explicit(s):
    """``mu(f, sigma) = 1/2 (f^2 - |sigma|^2) g - f *sigma + sigma (x) sigma``."""
    xp = array_namespace(s)
    f, sigma = split(s)
    scal = 0.5 * (f * f - xp.sum(sigma * sigma, axis=-1))
    return (scal[..., None, None] * EYE3 - f[..., None, None] * star(sigma)
            + sigma[..., :, None] * sigma[..., None, :])


def moment_bilinear(s, t):
    """Polarization of :func:`moment_explicit`; ``moment_bilinear(s, s) == moment_explicit(s)``."""
    xp = array_namespace(s, t)
    f, sigma = split(s)
    g, tau = split(t)
    scal = 0.5 * (f * g - xp.sum(sigma * tau, axis=-1))
    outer = sigma[..., :, None] * tau[..., None, :]
    return (scal[..., None, None] * EYE3
            - 0.5 * (f[..., None, None] * star(tau) + g[..., None, None] * star(sigma))
            + 0.5 * (outer + xp.swapaxes(outer, -1, -2)))


def lie_bracket(v, w):
    """Bracket on ad = T*M: ``[v, w] = 2 *(v ^ w)``."""
    return 2.0 * cross(v, w)


def bracket(xi, m):
    """``[xi, m]`` acting on the adjoint (second) index of a Matrix3."""
    xp = array_namespace(xi, m)
    return 2.0 * xp.einsum("lpq,...p,...kq->...kl", EPS, xi, m)


def bracket_moment_identity(xi, phi, psi):
    """Residual of ``[xi, mu(phi, psi)] = mu(phi, rho(xi) psi) + mu(psi, rho(xi) phi)``."""
    lhs = bracket(xi, moment_bilinear(phi, psi))
    rhs = moment_bilinear(phi, rho(xi, psi)) + moment_bilinear(psi, rho(xi, phi))
    return lhs - rhs


def rotation(p):
    """Matrix of ``v -> p v conj(p)`` for unit quaternions ``p``."""
    xp = array_namespace(p)
    cols = [qmul(qmul(p, pure(xp.asarray(EYE3[l]) + 0.0 * p[..., 1:])), qconj(p))[..., 1:]
            for l in range(3)]
    return xp.stack(cols, axis=-1)


def moment_equivariance_residual(p, s):
    """``mu(rho(p) s) - mu(s) R_p^T``; the adjoint index rotates by ``Ad_p``."""
    xp = array_namespace(p, s)
    lhs = moment_explicit(quat_rho(p, s))
    rhs = xp.einsum("...kq,...lq->...kl", moment_explicit(s), rotation(p))
    return lhs - rhs


def is_symmetric(m, tol=1e-12):
    return bool(np.all(np.abs(m - np.swapaxes(m, -1, -2)) <= tol))


def is_antisymmetric(m, tol=1e-12):
    return bool(np.all(np.abs(m + np.swapaxes(m, -1, -2)) <= tol))


def properness_constant(rng, n_samples=100_000, n_polish=20):
    """Estimate ``min |mu(s)|`` over unit spinors by sampling plus local descent.

    This is a brute-force oracle; it does not use the closed form of ``|mu|``.
    """
    from scipy.optimize import minimize

    s = rng.standard_normal((n_samples, 4))
    s /= np.linalg.norm(s, axis=-1, keepdims=True)
    vals = np.linalg.norm(moment_explicit(s), axis=(-2, -1))
    best = np.argsort(vals)[:n_polish]

    def objective(y):
        y = y / np.linalg.norm(y)
        return float(np.linalg.norm(moment_explicit(y)))

    polished = [minimize(objective, s[i], method="Nelder-Mead",
                         options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000}).fun
                for i in best]
    return float(min(min(polished), vals.min()))
