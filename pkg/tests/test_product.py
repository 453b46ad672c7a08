import numpy as np
import pytest

from sp1sw.fields import poly_field
from sp1sw.product import (PRODUCT_CHARTS, BlockTensor, ReducedConfig, block_assemble,
                           block_decompose, hodge_sigma, last_block, last_block_displayed,
                           last_block_solve, reduced_residual, reduced_terms)
from sp1sw.quat import moment_explicit, spinor
from sp1sw.swop import constant, sw_residual


def sigma_only(F):
    return lambda x: F(x * np.array([0.0, 1.0, 1.0]))


def zero_rc():
    z2, z22, z = constant(np.zeros(2)), constant(np.zeros((2, 2))), constant(0.0)
    return ReducedConfig(z2, z22, z, z, z2)


def random_rc(rng, scale=0.7):
    return ReducedConfig(*(sigma_only(poly_field(rng, sh, degree=2, scale=scale))
                           for sh in ((2,), (2, 2), (), (), (2,))))


def test_block_examples(rng):
    b = block_decompose(np.eye(3))
    assert b.B11 == 1 and np.all(b.B12 == 0) and np.all(b.B21 == 0)
    np.testing.assert_array_equal(b.B22, np.eye(2))
    m = np.zeros((3, 3))
    m[0, 1] = 1.0  # dt (x) e^1
    b = block_decompose(m)
    np.testing.assert_array_equal(b.B21, [1, 0])
    np.testing.assert_array_equal(b.B12, [0, 0])
    M = rng.standard_normal((10, 3, 3))
    np.testing.assert_array_equal(block_assemble(block_decompose(M)), M)


def test_block_arithmetic(rng):
    M, N = rng.standard_normal((2, 3, 3))
    s = block_decompose(M) + 2.0 * block_decompose(N)
    np.testing.assert_allclose(block_assemble(s), M + 2 * N)
    assert isinstance(s, BlockTensor)


def test_hodge_sigma_orientation():
    np.testing.assert_array_equal(hodge_sigma(np.array([1.0, 0])), [0, 1])
    np.testing.assert_array_equal(hodge_sigma(hodge_sigma(np.array([0.3, -2.0]))), [-0.3, 2.0])


def test_zero_config_on_hyperbolic_disk(rng, fd):
    chart = PRODUCT_CHARTS["s1xh2"]()
    x = chart.sample(rng, 5)
    terms = reduced_terms(chart, zero_rc(), x, fd)
    for i, t in enumerate(terms):
        if i == 3:
            np.testing.assert_allclose(t.B11, 0.5)
            assert max(np.abs(t.B12).max(), np.abs(t.B21).max(), np.abs(t.B22).max()) == 0
        else:
            assert t.max_abs() == 0


def test_constant_omega_on_flat_sigma(rng, fd):
    chart = PRODUCT_CHARTS["s1xt2"]()
    z2, z22, z = constant(np.zeros(2)), constant(np.zeros((2, 2))), constant(0.0)
    rc = ReducedConfig(z2, z22, z, z, constant([1.0, 0.0]))
    t1, t2, t3, *_ = reduced_terms(chart, rc, chart.sample(rng, 3), fd)
    np.testing.assert_array_equal(t3.B11, 0)
    np.testing.assert_array_equal(t3.B22, np.broadcast_to([[1, 0], [0, 0]], (3, 2, 2)))
    np.testing.assert_array_equal(t1.B11, -1)
    np.testing.assert_array_equal(t1.B22, np.broadcast_to(-np.eye(2), (3, 2, 2)))
    assert t2.max_abs() == 0


def test_reduced_residual_examples(rng, fd):
    flat, hyp = PRODUCT_CHARTS["s1xt2"](), PRODUCT_CHARTS["s1xh2"]()
    assert reduced_residual(flat, zero_rc(), flat.sample(rng, 4), fd).max_abs() == 0
    r = reduced_residual(hyp, zero_rc(), hyp.sample(rng, 4), fd)
    np.testing.assert_allclose(r.B11, 0.5)
    # omega = f = lambda = 0 leaves the last block at zero whatever a is
    z, z2 = constant(0.0), constant(np.zeros(2))
    rc = random_rc(rng)
    rc = ReducedConfig(rc.beta, rc.delta, z, z, z2)
    for chart in (flat, hyp):
        r = reduced_residual(chart, rc, chart.sample(rng, 10), fd)
        assert np.abs(r.B22).max() <= 1e-12


@pytest.mark.parametrize("kind", ("s1xh2", "s1xt2"))
def test_reduction_matches_full_operator(kind, rng, ad):
    chart = PRODUCT_CHARTS[kind]()
    rc = random_rc(rng)
    x = chart.sample(rng, 30)
    red = block_assemble(reduced_residual(chart, rc, x, ad))
    full = sw_residual(chart, rc.configuration(), x, ad)[0]
    assert np.abs(red - full).max() <= 1e-10 * max(1.0, np.abs(full).max())


def test_configuration_is_circle_invariant(rng, fd):
    chart = PRODUCT_CHARTS["s1xh2"]()
    cfg = random_rc(rng).configuration()
    x = chart.sample(rng, 5)
    shifted = x + np.array([1.3, 0, 0])
    np.testing.assert_array_equal(cfg.a(x), cfg.a(shifted))
    np.testing.assert_array_equal(cfg.spinor(x), cfg.spinor(shifted))
    assert np.all(cfg.a(x)[..., 0, :] == 0)


def test_last_block_is_moment_block(rng):
    v = rng.standard_normal((100, 4))
    mu = moment_explicit(spinor(v[:, 0], v[:, 1:]))  # sigma = lambda dt + omega
    np.testing.assert_allclose(last_block(v), mu[:, 1:, 1:].reshape(100, 4), atol=1e-13)


def test_last_block_examples():
    assert np.all(last_block(np.zeros(4)) == 0)
    assert np.all(last_block_displayed(np.zeros(4)) == 0)
    v = np.array([1.0, 0, 0, 0])
    assert np.abs(last_block(v)).max() > 0.1
    assert last_block_displayed(v)[2] == 1.0


def test_case_split_forces_zero_omega():
    t = np.linspace(-2, 2, 4001)
    for w in (np.stack([t, 0 * t], -1), np.stack([0 * t, t], -1)):  # omega_1 omega_2 = 0
        ok = np.abs(w[:, 0] ** 2 - 0.5 * np.sum(w * w, -1)) <= 1e-12
        assert np.all(np.abs(w[ok]) <= 1e-6)


def test_consequence_chain(rng):
    # once the last block forces omega = f = lambda = 0 the third equation holds trivially
    v = np.zeros(4)
    assert np.all(last_block(v) == 0)
    f, lam, om = v[0], v[1], v[2:]
    third = lam * om - 2 * f * hodge_sigma(om)
    assert np.all(third == 0)


@pytest.mark.parametrize("density", (8, 9))
def test_last_block_scan_small(density):
    out = last_block_solve(density=density, tol=1e-8)
    assert out["starts"] == density ** 4
    assert out["stalled"] == 0
    assert len(out["solutions"]) == 1
    assert np.abs(out["solutions"][0]).max() <= 1e-8


def test_last_block_scan_displayed_equations():
    out = last_block_solve(density=7, tol=1e-8, equations=last_block_displayed)
    assert out["stalled"] == 0 and len(out["solutions"]) == 1


def test_last_block_scan_threads_agree():
    a = last_block_solve(density=9, chunk=1000)
    b = last_block_solve(density=9, chunk=1000, workers=2)
    assert a == b
