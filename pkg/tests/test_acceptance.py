"""Acceptance criteria, one test each.

A summary line per criterion is printed at the end of the pytest run.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from sp1sw import chart as ch
from sp1sw.backend import get_backend
from sp1sw.config import RunConfig
from sp1sw.fields import trig_field
from sp1sw.quat import PROPERNESS_CONSTANT
from sp1sw.suites import run_suite
from sp1sw.swop import TangentInput, canonical, sw_residual
from sp1sw.torus import Grid, GridConfig, offdiag_L2_flat, preset


def suite(subcommand, **kw):
    t0 = time.perf_counter()
    records, attach, notes = run_suite(RunConfig(subcommand, **kw).validate())
    return {r.check_id: r for r in records}, attach, time.perf_counter() - t0


def show(recs):
    for r in recs.values():
        print(f"  {r.check_id:<44} {r.max_residual:.3e} <= {r.tolerance:.0e}  "
              f"{'pass' if r.passed else 'FAIL'}")


def worst(recs, prefix):
    sel = [r for k, r in recs.items() if k.startswith(prefix)]
    assert sel, prefix
    return max(r.max_residual for r in sel)


@pytest.mark.acceptance(1, "algebraic identities on 1e4 random inputs, <= 1e-12, <= 5 s")
def test_01_algebra():
    recs, _, dt = suite("verify-algebra", samples=10_000)
    show(recs)
    for prefix in ("algebra.clifford", "algebra.moment-chain", "algebra.moment-abstract",
                   "algebra.bracket-identity", "algebra.equivariance"):
        assert worst(recs, prefix) <= 1e-12, prefix
    assert dt <= 5.0, dt


@pytest.mark.acceptance(2, "moment map properness on 1e6 unit spinors and homogeneity, <= 30 s")
def test_02_properness():
    recs, _, dt = suite("verify-algebra")
    r = recs["algebra.properness"]
    print(f"  min |mu| = {r.details['min_norm']:.12f} over {r.details['samples']} samples, "
          f"c = {PROPERNESS_CONSTANT:.12f}")
    assert r.details["samples"] >= 1_000_000
    assert r.details["min_norm"] >= PROPERNESS_CONSTANT - 1e-6
    assert recs["algebra.homogeneity"].max_residual <= 1e-12
    assert dt <= 30.0, dt


@pytest.mark.acceptance(3, "canonical solution (0, +-1, 0) on ball and half-space, <= 1e-10, <= 10 s")
def test_03_canonical():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    fd = get_backend("fd")
    worst_r = 0.0
    for kind in ("ball", "half-space"):
        c = ch.get_chart(kind)
        x = c.sample(rng, 1000)
        for sign in (1.0, -1.0):
            F, d1, d2 = sw_residual(c, canonical(sign), x, fd)
            worst_r = max(worst_r, np.abs(F).max(), np.abs(d1).max(), np.abs(d2).max())
    dt = time.perf_counter() - t0
    print(f"  max residual {worst_r:.3e} in {dt:.2f} s")
    assert worst_r <= 1e-10
    assert dt <= 10.0


@pytest.mark.acceptance(4, "Weitzenboeck formula on 100 polynomial fields, fd <= 1e-6 / ad <= 1e-8, <= 60 s")
def test_04_weitzenboeck():
    t0 = time.perf_counter()
    for backend, tol in (("fd", 1e-6), ("ad", 1e-8)):
        recs, _, dt = suite("verify-weitzenboeck", backend=backend)
        show(recs)
        assert worst(recs, "weitzenboeck.formula") <= tol, backend
        assert len([k for k in recs if k.startswith("weitzenboeck.formula")]) == 4
        assert all(r.details["fields"] == 100 for r in recs.values())
    assert time.perf_counter() - t0 <= 60.0


@pytest.mark.acceptance(5, "square of the linearization at (0,1,0) against the stated block diagonal, <= 1e-5, <= 120 s")
def test_05_L2_structure():
    recs, _, dt = suite("verify-hyperbolic", chart="ball")
    show(recs)
    print(f"  {dt:.1f} s")
    assert dt <= 120.0
    assert recs["hyperbolic.L2-offdiag"].details["tangents"] == 50
    assert recs["hyperbolic.L2-offdiag"].max_residual <= 1e-5
    # the stated diagonal (Delta_LC + 2g tr + 2*tau, Delta + 6, Delta + 5, Delta_LC + 1)
    assert recs["hyperbolic.L2-diag-displayed"].max_residual <= 1e-5


@pytest.mark.acceptance(6, "off-diagonal blocks of the square vanish at reducible flat-torus solutions, <= 1e-8, <= 60 s")
def test_06_L2_flat():
    t0 = time.perf_counter()
    grid = Grid(16)
    rng = np.random.default_rng(0)
    n = grid.n
    z3, z, z33 = np.zeros((n, n, n, 3)), np.zeros((n, n, n)), np.zeros((n, n, n, 3, 3))
    f = {k: trig_field(rng, sh, kmax=2)(grid.x)
         for k, sh in (("adot", (3, 3)), ("fdot", ()), ("sigmadot", (3,)), ("xi", (3,)))}
    tangents = {
        "adot": TangentInput(lambda y: f["adot"], lambda y: z, lambda y: z3, lambda y: z3),
        "phidot": TangentInput(lambda y: z33, lambda y: f["fdot"], lambda y: f["sigmadot"],
                               lambda y: z3),
        "xi": TangentInput(lambda y: z33, lambda y: z, lambda y: z3, lambda y: f["xi"]),
    }
    worst_r = 0.0
    for _ in range(3):
        v, w = rng.standard_normal((2, 3))
        a = rng.uniform(0.1, 1.0) * np.broadcast_to(np.outer(v, w), z33.shape).copy()
        for cfg in (preset("zero", grid), GridConfig(a, z, z3)):
            res = offdiag_L2_flat(grid, cfg, tangents)
            worst_r = max(worst_r, max(x for d in res.values() for x in d.values()))
    dt = time.perf_counter() - t0
    print(f"  max off-diagonal block {worst_r:.3e} in {dt:.1f} s")
    assert worst_r <= 1e-8
    assert dt <= 60.0


@pytest.mark.acceptance(7, "torus solver from 20 random starts: Phi, F_ad and energy at the endpoints, <= 10 min")
def test_07_torus_solver():
    recs, attach, dt = suite("solve-torus")
    flows = attach["flows"]
    conv = [f for f in flows if f["converged"]]
    print(f"  {len(conv)}/{len(flows)} starts converged in {dt:.0f} s")
    print(f"  max |Phi|_inf {max(f['phi_sup'] for f in conv):.2e}, "
          f"max |F| {max(f['curvature_l2'] for f in conv):.2e}, "
          f"max |energy| {max(abs(f['energy_sum']) for f in conv):.2e}")
    assert len(flows) == 20 and conv
    for f in conv:
        assert f["phi_sup"] <= 1e-4
        assert f["curvature_l2"] <= 1e-4
        assert abs(f["energy_sum"]) <= 1e-6
    assert dt <= 600.0


@pytest.mark.acceptance(8, "S^1 x Sigma block identities on 200 configurations and the 41^4 last-block scan, <= 5 min")
def test_08_product():
    recs, _, dt = suite("verify-product")
    show(recs)
    print(f"  {dt:.0f} s")
    blocks = [k for k in recs if k.startswith("product.block")]
    assert len(blocks) == 12
    assert all(recs[k].max_residual <= 1e-6 for k in blocks)
    assert all(recs[k].details["configs"] == 200 for k in blocks)
    scan = recs["product.last-block-scan"]
    assert scan.details["starts"] == 41 ** 4
    assert len(scan.details["solutions"]) == 1
    assert np.abs(scan.details["solutions"][0]).max() <= 1e-8
    assert dt <= 300.0


@pytest.mark.acceptance(9, "Cotton tensor: hyperbolic, symmetric, trace-free, conformal covariance, <= 60 s")
def test_09_cotton():
    recs, _, dt = suite("verify-cotton")
    show(recs)
    assert worst(recs, "cotton.hyperbolic") <= 1e-8
    assert recs["cotton.symmetric"].max_residual <= 1e-8
    assert recs["cotton.trace-free"].max_residual <= 1e-8
    assert recs["cotton.conformal"].max_residual <= 1e-6
    assert dt <= 60.0


@pytest.mark.acceptance(10, "repeated CLI runs with the same seed and one thread are byte-identical")
@pytest.mark.parametrize("argv", [
    ["verify-algebra", "--samples", "5000"],
    ["verify-hyperbolic", "--chart", "half-space", "--seed", "7"],
    ["verify-product", "--samples", "10", "--scan-density", "9"],
], ids=["algebra", "hyperbolic", "product"])
def test_10_determinism(argv):
    cmd = [sys.executable, "-m", "sp1sw", *argv, "--threads", "1"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a and a == b
