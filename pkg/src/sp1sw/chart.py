"""Coordinate charts with diagonal (conformally flat or product) metrics.

Every supported metric is ``g = diag(h_1^2, h_2^2, h_3^2)`` with closed-form
scale factors ``h`` and log-derivatives ``dlogh[i, j] = d_j log h_i``, which
is all that is needed for Christoffel symbols, the orthonormal frame
``e_i = h_i^{-1} d_i`` and its connection coefficients.

Two calculus layers live here:

* coordinate components (``lc_derivative``, ``hodge3``, ``exterior_d``,
  ``codifferential``, ``dlc``, ``cotton``) acting on :class:`TensorField`;
* closed-form curvature of each chart in the orthonormal frame, with the
  ``Omega^2(T*M) -> Matrix3`` identification used throughout the package.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._xp import EPS, EYE3, array_namespace

__all__ = [
    "DomainError", "ContractError", "Chart", "TensorField", "Jet2", "CHARTS",
    "get_chart", "jet2", "lc_derivative", "hodge3", "exterior_d",
    "codifferential", "dlc", "dlc_star", "dlc_reduced", "riemann_as_matrix",
    "scalar_curvature", "riemann_from_frame", "tr_tau_S", "levi_civita_tensor",
    "christoffel_from_metric", "ricci_from_metric", "schouten", "cotton",
    "metric_field",
]


class DomainError(ValueError):
    """A point lies outside the admissible domain of a chart."""


class ContractError(TypeError):
    """A field has the wrong valence for an operator."""


@dataclass(frozen=True)
class TensorField:
    """Covariant tensor field in coordinate components.

    ``rank`` is the number of covariant indices; ``form=True`` marks a fully
    antisymmetric ``rank``-form stored as a full ``3**rank`` array.
    """

    fn: Callable
    rank: int
    form: bool = False

    def __call__(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class Jet2:
    value: np.ndarray
    first: np.ndarray
    second: np.ndarray


def jet2(field, backend, x):
    return Jet2(np.asarray(field(x)), np.asarray(backend.jacobian(field)(x)),
                np.asarray(backend.hessian(field)(x)))


# --------------------------------------------------------------------------
# charts

def _ones(x):
    xp = array_namespace(x)
    return xp.ones_like(x)


def _zeros33(x):
    xp = array_namespace(x)
    return xp.zeros(x.shape[:-1] + (3, 3), dtype=x.dtype)


class Chart:
    """Base chart: Euclidean R^3."""

    kind = "euclidean"
    sectional = 0.0
    periodic = False

    def scale(self, x):
        return _ones(x)

    def dlogh(self, x):
        return _zeros33(x)

    def check(self, x):
        if array_namespace(x) is not np:
            return  # traced values (nested derivatives) were checked on the way in
        x = np.asarray(x)
        if x.shape[-1] != 3:
            raise DomainError("points must have a trailing axis of length 3")
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite coordinates")
        self._check_domain(x)

    def _check_domain(self, x):
        pass

    def sample(self, rng, n):
        return rng.uniform(-1.0, 1.0, (n, 3))

    # derived geometry ------------------------------------------------------

    def metric(self, x):
        xp = array_namespace(x)
        h = self.scale(x)
        return (h * h)[..., :, None] * xp.asarray(EYE3)

    def sqrt_det(self, x):
        h = self.scale(x)
        return h[..., 0] * h[..., 1] * h[..., 2]

    def christoffel(self, x):
        """Coordinate symbols ``G[..., k, i, j] = Gamma^k_ij``."""
        xp = array_namespace(x)
        h = self.scale(x)
        L = self.dlogh(x)  # [i, j] = d_j log h_i
        ratio = (h * h)[..., None, :] / (h * h)[..., :, None]  # [k, i] = h_i^2 / h_k^2
        t1 = xp.einsum("kj,...ki->...kij", EYE3, L)
        t2 = xp.einsum("ki,...kj->...kij", EYE3, L)
        t3 = xp.einsum("ij,...ki,...ik->...kij", EYE3, ratio, L)
        return t1 + t2 - t3

    def frame_connection(self, x):
        """``conn[..., i, m, k] = <nabla_{e_i} e_k, e_m>`` in the orthonormal frame."""
        xp = array_namespace(x)
        h = self.scale(x)
        G = self.christoffel(x)
        L = self.dlogh(x)
        main = xp.einsum("...m,...mik->...imk", h, G) / (h[..., :, None, None] * h[..., None, None, :])
        corr = xp.einsum("mk,...ki->...imk", EYE3, L) / h[..., :, None, None]
        return main - corr

    def riemann_matrix(self, x):
        """Closed-form curvature as a Matrix3 in the orthonormal frame."""
        xp = array_namespace(x)
        c = -0.5 * self.sectional
        return c * xp.zeros_like(self.metric(x)) + c * xp.asarray(EYE3)

    def scalar_curvature(self, x):
        xp = array_namespace(x)
        return 6.0 * self.sectional + xp.zeros(x.shape[:-1])

    def ricci(self, x):
        """Closed-form Ricci tensor in coordinate components."""
        return 2.0 * self.sectional * self.metric(x)


class Euclidean(Chart):
    kind = "euclidean"


class PoincareBall(Chart):
    """Unit ball with ``g = (2 / (1 - |x|^2))^2 delta``; sectional curvature -1."""

    kind = "ball"
    sectional = -1.0

    def scale(self, x):
        xp = array_namespace(x)
        lam = 2.0 / (1.0 - xp.sum(x * x, axis=-1))
        return lam[..., None] * xp.ones_like(x)

    def dlogh(self, x):
        xp = array_namespace(x)
        d = 2.0 * x / (1.0 - xp.sum(x * x, axis=-1))[..., None]
        return xp.broadcast_to(d[..., None, :], x.shape[:-1] + (3, 3))

    def _check_domain(self, x):
        if np.any(np.sum(x ** 2, axis=-1) >= 1.0):
            raise DomainError("point outside the open unit ball")

    def sample(self, rng, n, radius=0.9):
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=-1, keepdims=True)
        return v * radius * rng.uniform(0.0, 1.0, (n, 1)) ** (1.0 / 3.0)


class HalfSpace(Chart):
    """Upper half-space ``x_3 > 0`` with ``g = x_3^{-2} delta``."""

    kind = "half-space"
    sectional = -1.0

    def scale(self, x):
        xp = array_namespace(x)
        return (1.0 / x[..., 2])[..., None] * xp.ones_like(x)

    def dlogh(self, x):
        xp = array_namespace(x)
        col = xp.stack([0.0 * x[..., 2], 0.0 * x[..., 2], -1.0 / x[..., 2]], axis=-1)
        return xp.broadcast_to(col[..., None, :], x.shape[:-1] + (3, 3))

    def _check_domain(self, x):
        if np.any(x[..., 2] <= 0.0):
            raise DomainError("point outside the upper half-space")

    def sample(self, rng, n):
        x = rng.uniform(-1.0, 1.0, (n, 3))
        x[:, 2] = rng.uniform(0.5, 2.0, n)
        return x


class CircleHyperbolicDisk(Chart):
    """``S^1 x D`` with coordinates ``(t, y_1, y_2)``; the disk has curvature -1."""

    kind = "s1xh2"
    sectional = None
    periodic = True

    def scale(self, x):
        xp = array_namespace(x)
        y = x[..., 1:]
        lam = 2.0 / (1.0 - xp.sum(y * y, axis=-1))
        return xp.stack([xp.ones_like(lam), lam, lam], axis=-1)

    def dlogh(self, x):
        xp = array_namespace(x)
        y = x[..., 1:]
        q = 2.0 / (1.0 - xp.sum(y * y, axis=-1))
        d = xp.stack([0.0 * q, q * y[..., 0], q * y[..., 1]], axis=-1)
        z = xp.zeros_like(d)
        return xp.stack([z, d, d], axis=-2)

    def _check_domain(self, x):
        if np.any(np.sum(x[..., 1:] ** 2, axis=-1) >= 1.0):
            raise DomainError("disk coordinates outside the open unit disk")

    def sample(self, rng, n, radius=0.9):
        t = rng.uniform(0.0, 2 * np.pi, n)
        ang = rng.uniform(0.0, 2 * np.pi, n)
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
        return np.stack([t, r * np.cos(ang), r * np.sin(ang)], axis=-1)

    def riemann_matrix(self, x):
        xp = array_namespace(x)
        return 0.0 * self.metric(x) + xp.asarray(np.diag([0.5, 0.0, 0.0]))

    def scalar_curvature(self, x):
        xp = array_namespace(x)
        return -2.0 + xp.zeros(x.shape[:-1])

    def ricci(self, x):
        g = self.metric(x)
        return -g * np.array([0.0, 1.0, 1.0])


class FlatProduct(Chart):
    kind = "s1xt2"
    periodic = True

    def sample(self, rng, n):
        return rng.uniform(0.0, 2 * np.pi, (n, 3))


class FlatTorus(FlatProduct):
    kind = "t3"


CHARTS = {c.kind: c for c in (Euclidean, PoincareBall, HalfSpace,
                              CircleHyperbolicDisk, FlatProduct, FlatTorus)}


def get_chart(kind):
    try:
        return CHARTS[kind]()
    except KeyError:
        raise ValueError(f"unknown chart {kind!r}; expected one of {sorted(CHARTS)}") from None


# --------------------------------------------------------------------------
# coordinate calculus

def _bdims(x):
    return x.shape[:-1]


def lc_derivative(chart, field, x, backend):
    """``nabla_i T_{j...}`` for a covariant tensor field; the new index comes first."""
    if not isinstance(field, TensorField):
        raise ContractError("lc_derivative needs a TensorField with a declared rank")
    chart.check(x)
    xp = array_namespace(x)
    T = field(x)
    dT = backend.jacobian(field)(x)
    out = xp.moveaxis(dT, -1, len(_bdims(x)))
    G = chart.christoffel(x)
    letters = "abcdefgh"[:field.rank]
    for s in range(field.rank):
        src = letters[:s] + "k" + letters[s + 1:]
        out = out - xp.einsum(f"...kz{letters[s]},...{src}->...z{letters}", G, T)
    return out


def metric_field(chart):
    return TensorField(chart.metric, 2)


def levi_civita_tensor(chart, x):
    """``sqrt(det g) eps_ijk``, the volume form in coordinates."""
    return chart.sqrt_det(x)[..., None, None, None] * EPS


def _inv_metric(chart, x):
    xp = array_namespace(x)
    return xp.linalg.inv(chart.metric(x))


def hodge3(chart, form, x):
    """Hodge star of a coordinate p-form (p = 0..3), orientation ``dx_1^dx_2^dx_3``."""
    if not isinstance(form, TensorField) or not (form.form or form.rank <= 1):
        raise ContractError("hodge3 needs a differential form")
    chart.check(x)
    xp = array_namespace(x)
    vol = levi_civita_tensor(chart, x)
    gi = _inv_metric(chart, x)
    w = form(x)
    if form.rank == 0:
        return w[..., None, None, None] * vol
    if form.rank == 1:
        up = xp.einsum("...ab,...b->...a", gi, w)
        return xp.einsum("...a,...ajk->...jk", up, vol)
    if form.rank == 2:
        up = xp.einsum("...ac,...bd,...cd->...ab", gi, gi, w)
        return 0.5 * xp.einsum("...ab,...abk->...k", up, vol)
    if form.rank == 3:
        up = xp.einsum("...ad,...be,...cf,...def->...abc", gi, gi, gi, w)
        return xp.einsum("...abc,...abc->...", up, vol) / 6.0
    raise ContractError("form degree must be at most 3")


def _star_field(chart, form):
    return TensorField(lambda y: hodge3(chart, form, y), 3 - form.rank, form=True)


def exterior_d(chart, field, x, backend):
    """Exterior derivative from antisymmetrized partials (chart independent)."""
    if not isinstance(field, TensorField) or not (field.form or field.rank <= 1):
        raise ContractError("exterior_d needs a differential form")
    chart.check(x)
    xp = array_namespace(x)
    J = backend.jacobian(field)(x)  # derivative index last
    if field.rank == 0:
        return J
    if field.rank == 1:
        dT = xp.swapaxes(J, -1, -2)  # [i, j] = d_i w_j
        return dT - xp.swapaxes(dT, -1, -2)
    if field.rank == 2:
        dT = xp.moveaxis(J, -1, -3)  # [i, j, k] = d_i w_jk
        return (dT + xp.moveaxis(dT, -3, -1) + xp.moveaxis(dT, -1, -3))
    return 0.0 * xp.zeros(_bdims(x) + (3,) * 4)


def codifferential(chart, field, x, backend):
    """``d* = (-1)^p * d *`` on p-forms in dimension 3."""
    if not isinstance(field, TensorField) or not (field.form or field.rank <= 1):
        raise ContractError("codifferential needs a differential form")
    if field.rank == 0:
        xp = array_namespace(x)
        return xp.zeros(_bdims(x))
    p = field.rank
    sf = _star_field(chart, field)
    dsf = TensorField(lambda y: exterior_d(chart, sf, y, backend), sf.rank + 1, form=True)
    return (-1.0) ** p * hodge3(chart, dsf, x)


def dlc(chart, a, x, backend):
    """Exterior covariant derivative of a T*M-valued 1-form ``a[..., form, value]``.

    Returns ``(d_LC a)[..., i, j, l] = nabla_i a_jl - nabla_j a_il``.
    """
    if not isinstance(a, TensorField) or a.rank != 2:
        raise ContractError("dlc needs a T*M-valued 1-form (rank 2)")
    xp = array_namespace(x)
    N = lc_derivative(chart, a, x, backend)
    return N - xp.swapaxes(N, -3, -2)


def dlc_star(chart, a, x, backend):
    """Star on the form factor of ``d_LC a``, giving a 1-form with T*M values."""
    xp = array_namespace(x)
    D = dlc(chart, a, x, backend)
    gi = _inv_metric(chart, x)
    vol = levi_civita_tensor(chart, x)
    up = xp.einsum("...ac,...bd,...cdl->...abl", gi, gi, D)
    return 0.5 * xp.einsum("...abl,...abk->...kl", up, vol)


def dlc_reduced(chart, a, x, backend):
    """Same as :func:`dlc` but twisting only the value index (form Christoffels cancel)."""
    xp = array_namespace(x)
    J = xp.moveaxis(backend.jacobian(a)(x), -1, -3)  # [i, j, l] = d_i a_jl
    G = chart.christoffel(x)
    A = a(x)
    t = J - xp.einsum("...kil,...jk->...ijl", G, A)
    return t - xp.swapaxes(t, -3, -2)


# --------------------------------------------------------------------------
# curvature

def riemann_as_matrix(chart, x):
    chart.check(x)
    return chart.riemann_matrix(x)


def scalar_curvature(chart, x):
    chart.check(x)
    return chart.scalar_curvature(x)


def riemann_from_frame(chart, x, backend):
    """Curvature Matrix3 computed from the frame connection by differentiation.

    ``R(e_i, e_j) = e_i(w_j) - e_j(w_i) + [w_i, w_j] - (G^k_ij - G^k_ji) w_k``
    as skew endomorphisms, then mapped to ad by ``E v = 2 xi x v`` and starred
    on the form pair.  Serves as the oracle for the closed forms.
    """
    xp = array_namespace(x)
    w = chart.frame_connection(x)                       # [i, m, k]
    dw = backend.jacobian(chart.frame_connection)(x)    # [i, m, k, c]
    h = chart.scale(x)
    ew = xp.einsum("...imkc,...jc->...jimk", dw, 1.0 / h[..., None, :] * xp.asarray(EYE3))
    comm = xp.einsum("...imp,...jpk->...ijmk", w, w)
    tors = xp.einsum("...ikj,...kmn->...ijmn", w, w)
    Rend = (ew - xp.swapaxes(ew, -4, -3)) + (comm - xp.swapaxes(comm, -4, -3)) \
        - (tors - xp.swapaxes(tors, -4, -3))
    xi = -0.25 * xp.einsum("qmn,...ijmn->...ijq", EPS, Rend)
    return 0.5 * xp.einsum("ijk,...ijq->...kq", EPS, xi)


def tr_tau_S(a):
    """``(tr a, tau(a), S(a))`` with ``tau(a)_k = eps_ijk a_ij`` and ``S(a) = a + a^T``."""
    xp = array_namespace(a)
    tr = xp.trace(a, axis1=-2, axis2=-1)
    tau = xp.einsum("ijk,...ij->...k", EPS, a)
    return tr, tau, a + xp.swapaxes(a, -1, -2)


# --------------------------------------------------------------------------
# Schouten and Cotton for a general metric field

def christoffel_from_metric(g, backend):
    """Field ``x -> Gamma^k_ij`` of a metric field ``x -> g_ij``."""
    dg = backend.jacobian(g)

    def G(x):
        xp = array_namespace(x)
        gi = xp.linalg.inv(g(x))
        D = dg(x)  # [a, b, c] = d_c g_ab
        low = 0.5 * (xp.einsum("...lji->...lij", D) + xp.einsum("...lij->...lij", D)
                     - xp.einsum("...ijl->...lij", D))
        return xp.einsum("...kl,...lij->...kij", gi, low)
    return G


def ricci_from_metric(g, backend):
    Gf = christoffel_from_metric(g, backend)
    dG = backend.jacobian(Gf)

    def Ric(x):
        xp = array_namespace(x)
        G = Gf(x)
        D = dG(x)  # [r, n, s, m] = d_m Gamma^r_ns
        t1 = xp.einsum("...rsnr->...sn", D)       # d_r Gamma^r_ns
        t2 = xp.einsum("...rrsn->...sn", D)       # d_n Gamma^r_rs
        t3 = xp.einsum("...rrl,...lns->...sn", G, G)
        t4 = xp.einsum("...rnl,...lrs->...sn", G, G)
        return t1 - t2 + t3 - t4
    return Ric, Gf


def schouten(chart=None, x=None, metric=None, backend=None):
    """``P = Ric - scal/4 g`` in coordinates.

    With only ``chart`` and ``x`` the closed-form curvature of the chart is
    used; with a ``metric`` field the curvature is differentiated from it and
    the result is returned as a field.
    """
    if metric is None:
        chart.check(x)
        g = chart.metric(x)
        return chart.ricci(x) - 0.25 * chart.scalar_curvature(x)[..., None, None] * g
    Ric, Gf = ricci_from_metric(metric, backend)

    def P(y):
        xp = array_namespace(y)
        g = metric(y)
        r = Ric(y)
        scal = xp.einsum("...ab,...ab->...", xp.linalg.inv(g), r)
        return r - 0.25 * scal[..., None, None] * g
    return P if x is None else P(x)


def cotton(chart, x, backend, metric=None):
    """Cotton tensor ``C = *_3 d_LC P`` as (0,2) coordinate components.

    ``C_rl = sqrt(g) eps_rab g^am g^bn nabla_m P_nl``; ``metric`` defaults to
    the chart metric.
    """
    g = chart.metric if metric is None else metric
    chart.check(x)
    P = schouten(metric=g, backend=backend)
    Gf = christoffel_from_metric(g, backend)
    dP = backend.jacobian(P)
    xp = array_namespace(x)
    gx = g(x)
    gi = xp.linalg.inv(gx)
    G = Gf(x)
    Px = P(x)
    N = xp.moveaxis(dP(x), -1, -3)  # [m, n, l] = d_m P_nl
    N = N - xp.einsum("...kmn,...kl->...mnl", G, Px) - xp.einsum("...kml,...nk->...mnl", G, Px)
    vol = xp.sqrt(xp.linalg.det(gx))
    return vol[..., None, None] * xp.einsum("rab,...am,...bn,...mnl->...rl", EPS, gi, gi, N)
