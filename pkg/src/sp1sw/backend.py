"""Differentiation backends for pointwise fields.

A field is any callable ``F(x)`` taking points ``x[..., 3]`` and returning
components ``[..., *comp]``, where every output point depends only on its own
input point.  Both backends exploit this: one directional derivative along
``e_j`` at *all* points at once gives ``dF/dx_j`` everywhere, so batches of
points (and batches of random fields carried as broadcast coefficients) cost
the same number of passes as a single point.

``jacobian(F)`` returns another field, ``x -> [..., *comp, 3]``, so backends
nest for higher derivatives.
"""

import os

import numpy as np

from ._xp import array_namespace

__all__ = ["Backend", "FDBackend", "ADBackend", "get_backend", "enable_jax"]


def enable_jax():
    """Import jax with 64-bit floats on; returns ``(jax, jax.numpy)``."""
    os.environ.setdefault("JAX_ENABLE_X64", "1")
    import jax
    jax.config.update("jax_enable_x64", True)
    return jax, jax.numpy


class Backend:
    name = "abstract"
    tol = 0.0

    def partial(self, F, j):
        raise NotImplementedError

    def jacobian(self, F):
        def J(x):
            xp = array_namespace(x)
            return xp.stack([self.partial(F, j)(x) for j in range(3)], axis=-1)
        return J

    def hessian(self, F):
        return self.jacobian(self.jacobian(F))

    def __repr__(self):
        return f"{type(self).__name__}()"


class FDBackend(Backend):
    """Fourth-order central differences, default step 1e-3."""

    name = "fd"
    tol = 1e-6
    _W = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
    _K = np.array([-2.0, -1.0, 1.0, 2.0])

    def __init__(self, step=1e-3):
        if not step > 0:
            raise ValueError("fd step must be positive")
        self.step = float(step)

    def partial(self, F, j):
        h = self.step

        def dF(x):
            xp = array_namespace(x)
            e = np.zeros(3)
            e[j] = h
            out = 0.0
            for w, k in zip(self._W, self._K):
                out = out + w * F(x + xp.asarray(k * e))
            return out / h
        return dF

    def __repr__(self):
        return f"FDBackend(step={self.step:g})"


class ADBackend(Backend):
    """Forward-mode differentiation through jax (exact to rounding)."""

    name = "ad"
    tol = 1e-8

    def __init__(self):
        self.jax, self.jnp = enable_jax()

    def partial(self, F, j):
        jax, jnp = self.jax, self.jnp

        def dF(x):
            xj = jnp.asarray(x, dtype=jnp.float64)
            t = jnp.zeros_like(xj).at[..., j].set(1.0)
            _, tangent = jax.jvp(F, (xj,), (t,))
            return tangent if array_namespace(x) is not np else np.asarray(tangent)
        return dF


def get_backend(name="fd", step=1e-3):
    if name == "fd":
        return FDBackend(step)
    if name == "ad":
        return ADBackend()
    raise ValueError(f"unknown backend {name!r}; expected 'ad' or 'fd'")
