"""Seeded random smooth fields used by the verification suites.

Every generator returns a callable ``x[..., 3] -> [..., *shape]``.  A leading
``batch`` lets one callable hold many independent random fields: coefficient
arrays carry a batch axis that broadcasts against points shaped
``[batch, npts, 3]``.
"""

import itertools

import numpy as np

from ._xp import array_namespace

__all__ = ["monomials", "poly_field", "trig_field", "bump", "localized"]


def monomials(degree):
    return [m for m in itertools.product(range(degree + 1), repeat=3) if sum(m) <= degree]


def poly_field(rng, shape=(), degree=2, scale=1.0, batch=None, center=None):
    """Random polynomial of total degree ``degree`` in ``x - center``.

    With ``batch=B`` the field expects points ``[B, npts, 3]``.
    """
    mons = np.array(monomials(degree))
    lead = () if batch is None else (batch,)
    coef = scale * rng.standard_normal(lead + (len(mons),) + tuple(shape))
    c0 = np.zeros(3) if center is None else np.asarray(center, float)

    def F(x):
        xp = array_namespace(x)
        y = x - xp.asarray(c0)
        terms = xp.stack([y[..., 0] ** m[0] * y[..., 1] ** m[1] * y[..., 2] ** m[2] for m in mons], axis=-1)
        if batch is None:
            return xp.tensordot(terms, xp.asarray(coef), axes=([-1], [0]))
        # terms [B, P, M], coef [B, M, *shape]
        return xp.einsum("bpm,bm...->bp...", terms, xp.asarray(coef))
    F.coef = coef
    return F


def trig_field(rng, shape=(), kmax=2, scale=1.0, batch=None):
    """Random real trigonometric polynomial on the 3-torus with ``|k|_inf <= kmax``."""
    ks = np.array([k for k in itertools.product(range(-kmax, kmax + 1), repeat=3)])
    lead = () if batch is None else (batch,)
    ca = scale * rng.standard_normal(lead + (len(ks),) + tuple(shape)) / len(ks) ** 0.5
    cb = scale * rng.standard_normal(lead + (len(ks),) + tuple(shape)) / len(ks) ** 0.5

    def F(x):
        xp = array_namespace(x)
        ph = x @ xp.asarray(ks.T.astype(float))
        if batch is None:
            return (xp.tensordot(xp.cos(ph), xp.asarray(ca), axes=([-1], [0]))
                    + xp.tensordot(xp.sin(ph), xp.asarray(cb), axes=([-1], [0])))
        return (xp.einsum("bpm,bm...->bp...", xp.cos(ph), xp.asarray(ca))
                + xp.einsum("bpm,bm...->bp...", xp.sin(ph), xp.asarray(cb)))
    F.modes = ks
    return F


def bump(center, radius):
    """Smooth compactly supported ``exp(1 - 1 / (1 - r^2))`` with ``r = |x - c| / radius``."""
    c = np.asarray(center, float)

    def B(x):
        xp = array_namespace(x)
        r2 = xp.sum((x - xp.asarray(c)) ** 2, axis=-1) / radius ** 2
        inside = r2 < 1.0
        safe = xp.where(inside, r2, 0.0)
        return xp.where(inside, xp.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)
    return B


def localized(field, center, radius):
    """``bump * field``; vanishes outside the ball of ``radius`` around ``center``."""
    B = bump(center, radius)

    def F(x):
        v = field(x)
        b = B(x)
        return v * b.reshape(b.shape + (1,) * (v.ndim - b.ndim))
    return F
