import numpy as np
import pytest

from sp1sw import chart as ch
from sp1sw._xp import EPS, array_namespace
from sp1sw.chart import TensorField
from sp1sw.fields import poly_field, trig_field
from sp1sw.torus import Grid, SpectralBackend

ALL = ("euclidean", "ball", "half-space", "s1xh2", "s1xt2", "t3")
HYP = ("ball", "half-space")


def test_get_chart_rejects_unknown():
    with pytest.raises(ValueError):
        ch.get_chart("sphere")


def test_domain_errors():
    ball, hs = ch.get_chart("ball"), ch.get_chart("half-space")
    g = ch.metric_field(ball)
    with pytest.raises(ch.DomainError):
        ch.lc_derivative(ball, g, np.array([[0.6, 0.6, 0.6]]), None)
    with pytest.raises(ch.DomainError):
        ch.riemann_as_matrix(hs, np.array([0.0, 0.0, -1.0]))
    with pytest.raises(ch.DomainError):
        ch.get_chart("s1xh2").check(np.array([0.0, 0.8, 0.8]))


def test_contract_errors(fd):
    euc = ch.get_chart("euclidean")
    x = np.zeros((1, 3))
    with pytest.raises(ch.ContractError):
        ch.lc_derivative(euc, lambda y: y, x, fd)
    with pytest.raises(ch.ContractError):
        ch.hodge3(euc, TensorField(lambda y: np.zeros(y.shape[:-1] + (3, 3)), 2), x)
    with pytest.raises(ch.ContractError):
        ch.dlc(euc, TensorField(lambda y: y, 1), x, fd)


@pytest.mark.parametrize("kind", ALL)
def test_metric_spd_and_christoffel_symmetric(kind, rng):
    c = ch.get_chart(kind)
    x = c.sample(rng, 100)
    assert np.all(np.linalg.eigvalsh(c.metric(x)) > 0)
    G = c.christoffel(x)
    assert np.array_equal(G, np.swapaxes(G, -1, -2))


@pytest.mark.parametrize("kind", ALL)
def test_metric_compatibility(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 100)
    assert np.abs(ch.lc_derivative(c, ch.metric_field(c), x, ad)).max() <= 1e-10


@pytest.mark.parametrize("kind", ALL)
def test_christoffel_closed_form_matches_metric(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 50)
    G = ch.christoffel_from_metric(c.metric, ad)(x)
    np.testing.assert_allclose(G, c.christoffel(x), atol=1e-10)


@pytest.mark.parametrize("kind", ALL)
def test_ricci_closed_form_matches_metric(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 30)
    Ric, _ = ch.ricci_from_metric(c.metric, ad)
    np.testing.assert_allclose(Ric(x), c.ricci(x), atol=1e-9)


def test_constant_form_is_parallel_on_euclidean(fd, rng):
    c = ch.get_chart("euclidean")
    v = rng.standard_normal(3)
    F = TensorField(lambda y: 0.0 * y + v, 1)
    assert np.abs(ch.lc_derivative(c, F, rng.standard_normal((10, 3)), fd)).max() <= 1e-12


def test_half_space_christoffel_example(ad):
    # Gamma^k_ij = -(d_ki d_j3 + d_kj d_i3 - d_ij d_k3) / x3 for g = x3^-2 delta
    c = ch.get_chart("half-space")
    x = np.array([0.0, 0.0, 1.0])
    d, e3 = np.eye(3), np.eye(3)[2]
    G = -(np.einsum("ki,j->kij", d, e3) + np.einsum("kj,i->kij", d, e3)
          - np.einsum("ij,k->kij", d, e3)) / x[2]
    np.testing.assert_allclose(c.christoffel(x), G, atol=1e-15)
    sigma = TensorField(lambda y: array_namespace(y).stack([0 * y[..., 2], 0 * y[..., 2], 1 / y[..., 2]], -1), 1)
    dsig = np.array([[0, 0, 0], [0, 0, 0], [0, 0, -1.0]])
    np.testing.assert_allclose(ch.lc_derivative(c, sigma, x, ad), dsig - G[2], atol=1e-14)
    np.testing.assert_allclose(ch.lc_derivative(c, sigma, x, ad), np.diag([-1.0, -1.0, 0.0]),
                               atol=1e-14)


def test_hodge_orientation():
    c = ch.get_chart("euclidean")
    dx1 = TensorField(lambda y: 0.0 * y + np.array([1.0, 0, 0]), 1)
    w = ch.hodge3(c, dx1, np.zeros(3))
    expect = np.zeros((3, 3))
    expect[1, 2], expect[2, 1] = 1.0, -1.0
    np.testing.assert_array_equal(w, expect)


@pytest.mark.parametrize("kind", ("euclidean", "ball", "half-space", "s1xh2"))
def test_double_star_is_identity(kind, rng):
    c = ch.get_chart(kind)
    x = c.sample(rng, 50)
    v = rng.standard_normal((50, 3))
    m = rng.standard_normal((50, 3, 3))
    m = m - np.swapaxes(m, -1, -2)
    one = TensorField(lambda y: v, 1)
    two = TensorField(lambda y: m, 2, form=True)
    s1 = ch.hodge3(c, TensorField(lambda y: ch.hodge3(c, one, y), 2, form=True), x)
    s2 = ch.hodge3(c, TensorField(lambda y: ch.hodge3(c, two, y), 1), x)
    np.testing.assert_allclose(s1, v, atol=1e-12 * np.abs(v).max())
    np.testing.assert_allclose(s2, m, atol=1e-12 * np.abs(m).max())


@pytest.mark.parametrize("kind", ("euclidean", "ball", "half-space"))
def test_d_squared_vanishes(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 50)
    f = TensorField(poly_field(rng, (), degree=4), 0)
    df = TensorField(lambda y: ch.exterior_d(c, f, y, ad), 1)
    assert np.abs(ch.exterior_d(c, df, x, ad)).max() <= 1e-10
    w = TensorField(poly_field(rng, (3,), degree=3), 1)
    dw = TensorField(lambda y: ch.exterior_d(c, w, y, ad), 2, form=True)
    assert np.abs(ch.exterior_d(c, dw, x, ad)).max() <= 1e-10


def test_integration_by_parts_on_torus(rng):
    grid = Grid(16)
    be = SpectralBackend(grid)
    t3 = ch.get_chart("t3")
    alpha = TensorField(trig_field(rng, (3,), kmax=2), 1)
    b = trig_field(rng, (3, 3), kmax=2)
    beta = TensorField(lambda y: b(y) - np.swapaxes(b(y), -1, -2), 2, form=True)
    da = ch.exterior_d(t3, alpha, grid.x, be)
    dsb = ch.codifferential(t3, beta, grid.x, be)
    lhs = grid.integrate(0.5 * np.sum(da * beta(grid.x), axis=(-2, -1)))
    rhs = grid.integrate(np.sum(alpha(grid.x) * dsb, axis=-1))
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


def test_codifferential_of_function_is_zero(fd):
    c = ch.get_chart("ball")
    f = TensorField(lambda y: np.sum(y * y, -1), 0)
    assert np.all(ch.codifferential(c, f, np.zeros((2, 3)), fd) == 0)


@pytest.mark.parametrize("kind", ALL)
def test_dlc_of_metric_vanishes(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 50)
    assert np.abs(ch.dlc(c, ch.metric_field(c), x, ad)).max() <= 1e-10
    assert np.abs(ch.dlc_star(c, ch.metric_field(c), x, ad)).max() <= 1e-10


def test_dlc_constant_on_euclidean(rng, fd):
    c = ch.get_chart("euclidean")
    A = rng.standard_normal((3, 3))
    a = TensorField(lambda y: 0.0 * y[..., None] + A, 2)
    assert np.abs(ch.dlc(c, a, rng.standard_normal((10, 3)), fd)).max() <= 1e-12


@pytest.mark.parametrize("kind", HYP)
def test_dlc_against_stencil_oracle(kind, rng, ad, fd):
    c = ch.get_chart(kind)
    x = c.sample(rng, 50)
    a = TensorField(poly_field(rng, (3, 3), degree=3), 2)
    exact = ch.dlc(c, a, x, ad)
    oracle = ch.dlc_reduced(c, a, x, fd)
    assert np.abs(exact - oracle).max() <= 1e-6 * max(1.0, np.abs(exact).max())


def test_riemann_examples():
    euc, ball, hs = (ch.get_chart(k) for k in ("euclidean", "ball", "half-space"))
    np.testing.assert_array_equal(ch.riemann_as_matrix(euc, np.zeros(3)), 0)
    assert ch.scalar_curvature(euc, np.zeros(3)) == 0
    np.testing.assert_array_equal(ch.riemann_as_matrix(ball, np.zeros(3)), 0.5 * np.eye(3))
    assert ch.scalar_curvature(ball, np.zeros(3)) == -6
    x = np.array([0.0, 0.0, 2.0])
    np.testing.assert_array_equal(ch.riemann_as_matrix(hs, x), 0.5 * np.eye(3))
    # coordinate components: 1/2 g with g = x3^-2 delta = 1/4 delta
    h = hs.scale(x)
    np.testing.assert_allclose(h[:, None] * h[None, :] * ch.riemann_as_matrix(hs, x),
                               0.5 * hs.metric(x))
    assert ch.scalar_curvature(hs, x) == -6


@pytest.mark.parametrize("kind", ALL)
def test_riemann_closed_form_matches_frame_oracle(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 50)
    np.testing.assert_allclose(ch.riemann_from_frame(c, x, ad), c.riemann_matrix(x), atol=1e-10)


@pytest.mark.parametrize("kind", ALL)
def test_scalar_curvature_is_trace_of_ricci(kind, rng):
    c = ch.get_chart(kind)
    x = c.sample(rng, 20)
    scal = np.einsum("...ij,...ij->...", np.linalg.inv(c.metric(x)), c.ricci(x))
    np.testing.assert_allclose(scal, c.scalar_curvature(x), atol=1e-12)


def test_tr_tau_S_examples(rng):
    tr, tau, S = ch.tr_tau_S(np.eye(3))
    assert tr == 3 and np.all(tau == 0) and np.array_equal(S, 2 * np.eye(3))
    a = np.zeros((3, 3))
    a[0, 1] = 1.0
    tr, tau, S = ch.tr_tau_S(a)
    assert tr == 0
    np.testing.assert_array_equal(tau, [0, 0, 1])
    np.testing.assert_array_equal(S, a + a.T)
    m = rng.standard_normal((3, 3))
    assert np.all(ch.tr_tau_S(m + m.T)[1] == 0)
    np.testing.assert_allclose(ch.tr_tau_S(m)[1], np.einsum("ijk,ij->k", EPS, m))


def test_euclidean_schouten_and_cotton(ad, rng):
    c = ch.get_chart("euclidean")
    x = rng.standard_normal((10, 3))
    assert np.abs(ch.schouten(c, x)).max() == 0
    assert np.abs(ch.cotton(c, x, ad)).max() <= 1e-14


@pytest.mark.parametrize("kind", HYP)
def test_hyperbolic_cotton_vanishes(kind, rng, ad):
    c = ch.get_chart(kind)
    x = c.sample(rng, 20)
    assert np.abs(ch.cotton(c, x, ad)).max() <= 1e-8
    np.testing.assert_allclose(ch.schouten(metric=c.metric, backend=ad)(x), ch.schouten(c, x),
                               atol=1e-10)


def _perturbed(rng, eps=0.1):
    h = poly_field(rng, (3, 3), degree=2)

    def g(y):
        xp = array_namespace(y)
        H = h(y)
        return xp.asarray(np.eye(3)) + eps * (H + xp.swapaxes(H, -1, -2)) / 2
    return g


def test_cotton_symmetric_trace_free(rng, ad):
    c = ch.get_chart("euclidean")
    g = _perturbed(rng)
    x = 0.3 * rng.uniform(-1, 1, (20, 3))
    C = ch.cotton(c, x, ad, metric=g)
    assert np.abs(C).max() > 1e-3  # non-trivial
    assert np.abs(C - np.swapaxes(C, -1, -2)).max() <= 1e-8
    assert np.abs(np.einsum("...ij,...ij->...", np.linalg.inv(g(x)), C)).max() <= 1e-8


def test_cotton_conformal_covariance(rng, ad):
    c = ch.get_chart("euclidean")
    g = _perturbed(rng)
    phi = poly_field(rng, (), degree=2, scale=0.3)
    x = 0.3 * rng.uniform(-1, 1, (20, 3))
    C = ch.cotton(c, x, ad, metric=g)
    Ct = ch.cotton(c, x, ad, metric=lambda y: array_namespace(y).exp(2 * phi(y))[..., None, None] * g(y))
    lhs = np.exp(-phi(x))[..., None, None] * C
    assert np.abs(Ct - lhs).max() <= 1e-6 * np.abs(lhs).max()


def test_fd_and_ad_agree_on_polynomials(rng, fd, ad):
    F = poly_field(rng, (2,), degree=3)
    x = rng.standard_normal((20, 3))
    np.testing.assert_allclose(fd.jacobian(F)(x), ad.jacobian(F)(x), atol=1e-9)
    J = ch.jet2(F, ad, x)
    assert J.second.shape == (20, 2, 3, 3)
    np.testing.assert_allclose(J.second, np.swapaxes(J.second, -1, -2), atol=1e-12)
