"""Array-namespace dispatch so pointwise kernels run on numpy or jax arrays."""

import numpy as np


def array_namespace(*arrays):
    """Return ``jax.numpy`` if any argument is a jax array/tracer, else ``numpy``."""
    for a in arrays:
        getns = getattr(a, "__array_namespace__", None)
        if getns is None:
            continue
        ns = getns()
        if ns is not np:
            return ns
    return np


# Levi-Civita symbol, orientation e1^e2^e3 positive.
EPS = np.zeros((3, 3, 3))
EPS[0, 1, 2] = EPS[1, 2, 0] = EPS[2, 0, 1] = 1.0
EPS[0, 2, 1] = EPS[2, 1, 0] = EPS[1, 0, 2] = -1.0

EYE3 = np.eye(3)
