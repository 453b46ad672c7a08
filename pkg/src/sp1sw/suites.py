"""Verification suites behind the command-line subcommands.

Each suite takes a :class:`~sp1sw.config.RunConfig` and returns a list of
:class:`~sp1sw.report.Record`.  All randomness comes from one generator
seeded by ``cfg.seed``, so a configuration fixes every sampled point and
random field.
"""

import numpy as np

from . import chart as ch
from .backend import get_backend
from .config import ConfigError, tolerance_key
from ._xp import array_namespace
from .fields import bump, poly_field, trig_field
from .quat import (PROPERNESS_CONSTANT, bracket_moment_identity, clifford, gamma_pm,
                   gamma_tilde, moment_abstract, moment_bilinear, moment_equivariance_residual,
                   moment_explicit, rho)
from .report import record

__all__ = ["TOLERANCES", "tolerance", "run_suite", "algebra_suite", "hyperbolic_suite",
           "weitzenboeck_suite", "product_suite", "cotton_suite", "torus_suite"]

# Default tolerances by check id (prefix match); pairs are (fd, ad).
TOLERANCES = {
    "algebra": 1e-12,
    "algebra.properness": 1e-6,
    "hyperbolic.canonical": 1e-10,
    "hyperbolic.riemann": (1e-6, 1e-10),
    "hyperbolic.gauge-direction": (1e-5, 1e-8),
    "hyperbolic.L2-offdiag": (1e-5, 1e-8),
    "hyperbolic.L2-diag-displayed": (1e-5, 1e-8),
    "hyperbolic.L2-diag-derived": (1e-5, 1e-8),
    "weitzenboeck": (1e-6, 1e-8),
    "product.block": 1e-6,
    "product.assembled": 1e-6,
    "product.last-block-scan": 1e-8,
    "cotton": 1e-8,
    "cotton.conformal": 1e-6,
    "torus.residual": 1e-6,
    "torus.phi": 1e-4,
    "torus.curvature": 1e-4,
    "torus.energy": 1e-6,
    "torus.gradient": 1e-5,
    "torus.gauge-orbit": 1e-6,
    "torus.L2-offdiag": 1e-8,
}

DEFAULT_BACKEND = {"verify-cotton": "ad"}

ANCHORS = {
    "algebra.clifford": "Clifford relation gamma(v)^2 = -|v|^2",
    "algebra.gamma-factorization": "gamma~(v (x) xi) = gamma(v) rho(xi) in the R + T*M model",
    "algebra.moment-chain": "moment map pairing 2<mu(s), v (x) xi> = -<s, gamma_+(v) gamma_-(xi) s>",
    "algebra.moment-abstract": "explicit moment map equals 1/2 gamma~^*(Phi Phi^*)",
    "algebra.hyperkahler": "moment map derivative <d mu(phi), v (x) xi> = <gamma(v) rho(xi) Phi, phi>",
    "algebra.bracket-identity": "moment identity [xi, mu(phi, psi)] = mu(phi, rho(xi) psi) + mu(psi, rho(xi) phi)",
    "algebra.equivariance": "moment map is equivariant for the rho action",
    "algebra.properness": "mu^{-1}(0) = 0 with |Phi|^2 <= C |mu(Phi)|",
    "algebra.homogeneity": "moment map is quadratic: |mu(t Phi)| = t^2 |mu(Phi)|",
    "hyperbolic.canonical": "hyperbolic metric carries the irreducible solution (0, +-1, 0)",
    "hyperbolic.riemann": "curvature of the hyperbolic metric as a T*M-valued 1-form",
    "hyperbolic.gauge-direction": "linearized equation annihilates gauge directions at a solution",
    "hyperbolic.L2-offdiag": "square of the linearization at (0,1,0) has no off-diagonal blocks",
    "hyperbolic.L2-diag-displayed": "square of the linearization at (0,1,0): diagonal (Delta_LC + 2g tr + 2*tau, Delta+6, Delta+5, Delta_LC+1)",
    "hyperbolic.L2-diag-derived": "square of the linearization at (0,1,0): diagonal (Delta_LC + g tr + *tau, Delta+3, Delta+3, Delta_LC+1)",
    "weitzenboeck.formula": "Lichnerowicz-Weitzenboeck formula D_A^2 = nabla*nabla + gamma~(F) + scal/4",
    "weitzenboeck.dirac-frame": "Dirac operator closed form equals sum_i gamma(e_i) nabla_{A,e_i}",
    "weitzenboeck.dstar-moment": "moment identity for d*_ad mu(phi, psi)",
    "product.block": "block matrices of the curvature equation on S^1 x Sigma",
    "product.assembled": "reduced system on S^1 x Sigma equals the full curvature equation",
    "product.last-block-scan": "last block forces omega = 0 and then f = lambda = 0",
    "cotton.hyperbolic": "hyperbolic metric is locally conformally flat: C_g = 0",
    "cotton.symmetric": "Cotton tensor is symmetric",
    "cotton.trace-free": "Cotton tensor is trace-free",
    "cotton.conformal": "conformal covariance e^{-phi} C_g = C_{e^{2 phi} g}",
    "torus.residual": "flow endpoint solves the equations on the flat torus",
    "torus.phi": "scal >= 0 forces mu(Phi) = 0 and hence Phi = 0",
    "torus.curvature": "solutions with Phi = 0 are flat connections",
    "torus.energy": "energy identity ||nabla_A Phi||^2 + 2||mu(Phi)||^2 + 1/4 int scal |Phi|^2 = 0",
    "torus.gradient": "objective gradient matches central differences",
    "torus.gauge-orbit": "residual norm is gauge invariant",
    "torus.L2-offdiag": "square of the linearization has no off-diagonal blocks at reducible solutions",
}

PRODUCT_NOTE = ("Emptiness of the irreducible locus on S^1 x Sigma is conditional: it applies "
                "to solutions gauge equivalent to circle-invariant ones, which is assumed, "
                "not verified here.")


def _lookup(table, check_id):
    parts = check_id.split(".")
    for n in range(len(parts), 0, -1):
        key = ".".join(parts[:n])
        if key in table:
            return table[key]
    raise KeyError(check_id)


def tolerance(cfg, check_id, backend=None):
    """Tolerance for ``check_id``: overrides by longest prefix, then defaults."""
    parts = check_id.split(".")
    for n in range(len(parts), 0, -1):
        key = ".".join(parts[:n])
        for k in (key, tolerance_key(key)):
            if k in cfg.tol:
                return float(cfg.tol[k])
    t = _lookup(TOLERANCES, check_id)
    if isinstance(t, tuple):
        t = t[0] if (backend or "fd") == "fd" else t[1]
    return float(t)


def anchor(check_id):
    return _lookup(ANCHORS, check_id)


def _rec(cfg, check_id, residual, backend=None, **details):
    return record(check_id, anchor(check_id), residual, tolerance(cfg, check_id, backend),
                  **details)


def _backend(cfg):
    name = cfg.backend or DEFAULT_BACKEND.get(cfg.subcommand, "fd")
    return name, get_backend(name, cfg.fd_step)


def _charts(cfg, allowed, default):
    charts = cfg.charts(default)
    bad = [c for c in charts if c not in allowed]
    if bad:
        raise ConfigError(f"{cfg.subcommand} does not run on chart(s) {', '.join(bad)}; "
                          f"allowed: {', '.join(allowed)}")
    return charts


def _rel(diff, ref):
    return float(np.max(np.abs(diff)) / max(1.0, float(np.max(np.abs(ref)))))


def _unit(rng, shape):
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# --------------------------------------------------------------------------
# algebra

def algebra_suite(cfg):
    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples or 10_000
    s, t = _unit(rng, (n, 4)), _unit(rng, (n, 4))
    nu, xi = _unit(rng, (n, 3)), _unit(rng, (n, 3))
    out = []

    r = clifford(nu, clifford(nu, s)) + np.sum(nu * nu, axis=-1)[:, None] * s
    out.append(_rec(cfg, "algebra.clifford", np.abs(r).max(), samples=n))

    gpgm = gamma_pm(1, nu, gamma_pm(-1, xi, s))
    gmgp = gamma_pm(-1, xi, gamma_pm(1, nu, s))
    r = max(np.abs(gpgm + gamma_tilde(nu, xi, s)).max(), np.abs(gpgm - gmgp).max())
    out.append(_rec(cfg, "algebra.gamma-factorization", r, samples=n))

    lhs = 2.0 * np.einsum("nkl,nk,nl->n", moment_explicit(s), nu, xi)
    rhs = -np.sum(s * gpgm, axis=-1)
    out.append(_rec(cfg, "algebra.moment-chain", np.abs(lhs - rhs).max(), samples=n))

    r = max(np.abs(moment_abstract(s, s) - moment_explicit(s)).max(),
            np.abs(0.5 * (moment_abstract(s, t) + moment_abstract(t, s))
                   - moment_bilinear(s, t)).max())
    out.append(_rec(cfg, "algebra.moment-abstract", r, samples=n))

    # central difference is exact on a quadratic map for any step
    h = 0.5
    dmu = (moment_explicit(s + h * t) - moment_explicit(s - h * t)) / (2 * h)
    lhs = np.einsum("nkl,nk,nl->n", dmu, nu, xi)
    rhs = np.sum(clifford(nu, rho(xi, s)) * t, axis=-1)
    out.append(_rec(cfg, "algebra.hyperkahler", np.abs(lhs - rhs).max(), samples=n))

    r = bracket_moment_identity(xi, s, t)
    out.append(_rec(cfg, "algebra.bracket-identity", np.abs(r).max(), samples=n))

    p = _unit(rng, (n, 4))
    r = moment_equivariance_residual(p, s)
    out.append(_rec(cfg, "algebra.equivariance", np.abs(r).max(), samples=n))

    m = 1_000_000 if cfg.samples is None else max(cfg.samples, 1000)
    u = _unit(rng, (m, 4))
    vals = np.linalg.norm(moment_explicit(u), axis=(-2, -1))
    deficit = max(0.0, PROPERNESS_CONSTANT - float(vals.min()))
    out.append(_rec(cfg, "algebra.properness", deficit, samples=m, min_norm=float(vals.min()),
                    constant=PROPERNESS_CONSTANT))

    tt = rng.uniform(0.1, 10.0, n)
    a = np.linalg.norm(moment_explicit(tt[:, None] * s), axis=(-2, -1))
    b = tt ** 2 * np.linalg.norm(moment_explicit(s), axis=(-2, -1))
    out.append(_rec(cfg, "algebra.homogeneity", np.max(np.abs(a - b) / tt ** 2), samples=n))
    return out


# --------------------------------------------------------------------------
# hyperbolic charts

def _sample_batch(chart, rng, b, p):
    return chart.sample(rng, b * p).reshape(b, p, 3)


def _l2_tangents(rng, n, npts):
    """Compactly supported random tangents in the ball and points inside their supports."""
    centers = 0.45 * _unit(rng, (n, 3)) * rng.uniform(0, 1, (n, 1)) ** (1 / 3)
    radius = 0.35
    base = poly_field(rng, (16,), degree=2, scale=1.0, batch=n)
    B = bump(centers[:, None, :], radius)

    def T(x):
        return base(x) * B(x)[..., None]
    pts = centers[:, None, :] + 0.8 * radius * _unit(rng, (n, npts, 3)) * \
        rng.uniform(0, 1, (n, npts, 1)) ** (1 / 3)
    return T, pts


def _slot_mask(j):
    m = np.zeros(16)
    m[{0: slice(0, 9), 1: slice(9, 10), 2: slice(10, 13), 3: slice(13, 16)}[j]] = 1.0
    return m


def hyperbolic_suite(cfg):
    from .swop import (big_L_field, big_L_squared, canonical, gauge_lin, laplacian_blocks,
                       sw_residual, unpack_tangent)
    from .chart import riemann_from_frame, tr_tau_S
    from .quat import star
    from ._xp import EYE3

    charts = _charts(cfg, ("ball", "half-space"), ("ball", "half-space"))
    bname, be = _backend(cfg)
    rng = np.random.default_rng(cfg.seed)
    out = []
    n = cfg.samples or 1000
    for c in charts:
        chart = ch.get_chart(c)
        x = chart.sample(rng, n)
        for sign, lab in ((1.0, "plus"), (-1.0, "minus")):
            F, d1, d2 = sw_residual(chart, canonical(sign), x, be)
            r = max(np.abs(F).max(), np.abs(d1).max(), np.abs(d2).max())
            out.append(_rec(cfg, f"hyperbolic.canonical.{c}.{lab}", r, bname, points=n))
        xr = x[:50]
        R = riemann_from_frame(chart, xr, be)
        out.append(_rec(cfg, f"hyperbolic.riemann.{c}", np.abs(R - 0.5 * EYE3).max(), bname,
                        points=len(xr)))

        # dSW(G xi) at the canonical solution
        npg = 20
        xi = poly_field(rng, (3,), degree=2, batch=npg)
        cfg0 = canonical(1.0)

        def gxi(y, xi=xi, chart=chart):
            A, f, s = gauge_lin(chart, cfg0, xi, y, be)
            z = 0.0 * s
            return array_namespace(y).concatenate([A.reshape(A.shape[:-2] + (9,)), f[..., None], s, z], axis=-1)
        xg = _sample_batch(chart, rng, npg, 5)
        La, Lf, Ls, _ = unpack_tangent(big_L_field(chart, cfg0, gxi, be)(xg))
        r = max(np.abs(La).max(), np.abs(Lf).max(), np.abs(Ls).max())
        out.append(_rec(cfg, f"hyperbolic.gauge-direction.{c}", r, bname, fields=npg))

    if "ball" in charts:
        chart = ch.get_chart("ball")
        nt = cfg.samples if cfg.samples and cfg.samples < 1000 else 50
        T, pts = _l2_tangents(rng, nt, 8)
        off = 0.0
        diag = {"displayed": 0.0, "derived": 0.0}
        coefs = {"displayed": (2.0, 2.0, 6.0, 5.0, 1.0), "derived": (1.0, 1.0, 3.0, 3.0, 1.0)}
        cfg0 = canonical(1.0)
        for j in range(4):
            m = _slot_mask(j)

            def Tj(y, m=m):
                return T(y) * m
            L2 = big_L_squared(chart, cfg0, Tj, pts, be)
            lap = laplacian_blocks(chart, Tj, pts, be)
            ad, fd, sd, xv = unpack_tangent(Tj(pts))
            tr, tau, _ = tr_tau_S(ad)
            for i in range(4):
                if i != j:
                    off = max(off, float(np.abs(L2[i]).max()))
            for name, (ct, cs, cf, csig, cxi) in coefs.items():
                claim = (lap[0] + ct * tr[..., None, None] * EYE3 + cs * star(tau),
                         lap[1] + cf * fd, lap[2] + csig * sd, lap[3] + cxi * xv)[j]
                diag[name] = max(diag[name], float(np.abs(L2[j] - claim).max()))
        out.append(_rec(cfg, "hyperbolic.L2-offdiag", off, bname, tangents=nt))
        out.append(_rec(cfg, "hyperbolic.L2-diag-displayed", diag["displayed"], bname,
                        tangents=nt))
        out.append(_rec(cfg, "hyperbolic.L2-diag-derived", diag["derived"], bname, tangents=nt))
    return out


# --------------------------------------------------------------------------
# Weitzenboeck and first-order identities

def weitzenboeck_suite(cfg):
    from .swop import dirac, dirac_frame_sum, dstar_moment_identity, weitzenboeck_terms

    charts = _charts(cfg, ch.CHARTS, ("euclidean", "ball", "half-space", "s1xh2"))
    bname, be = _backend(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples or 100
    out = []
    for c in charts:
        chart = ch.get_chart(c)
        x = _sample_batch(chart, rng, n, 2)
        phi = poly_field(rng, (4,), degree=3, batch=n)
        a = poly_field(rng, (3, 3), degree=2, scale=0.5, batch=n)
        D2, rough, curv, scal = weitzenboeck_terms(chart, a, phi, x, be)
        out.append(_rec(cfg, f"weitzenboeck.formula.{c}", _rel(D2 - rough - curv - scal, D2),
                        bname, fields=n))

        f = lambda y: phi(y)[..., 0]
        s = lambda y: phi(y)[..., 1:]
        D, Dsum = dirac(chart, a, f, s, x, be), dirac_frame_sum(chart, a, f, s, x, be)
        out.append(_rec(cfg, f"weitzenboeck.dirac-frame.{c}", _rel(D - Dsum, D), bname,
                        fields=n))

        psi = poly_field(rng, (4,), degree=2, batch=n)
        r = dstar_moment_identity(chart, a, phi, psi, x, be)
        out.append(_rec(cfg, f"weitzenboeck.dstar-moment.{c}", _rel(r, D), bname, fields=n))
    return out


# --------------------------------------------------------------------------
# product reduction

def _sigma_only(F):
    """Make a field independent of the circle coordinate."""
    def G(x):
        return F(x * np.array([0.0, 1.0, 1.0]))
    return G


def product_suite(cfg):
    from .product import (PRODUCT_CHARTS, ReducedConfig, block_assemble, last_block_solve,
                          reduced_residual, reduced_terms)
    from .quat import star
    from .swop import curvature_terms, sw_residual
    from ._xp import EYE3

    charts = _charts(cfg, tuple(PRODUCT_CHARTS), tuple(PRODUCT_CHARTS))
    bname, be = _backend(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples or 200
    out = []
    names = ("trace-term", "star-term", "sigma-sigma", "riemann", "dlc-a", "a-wedge-a")
    for c in charts:
        chart = PRODUCT_CHARTS[c]()
        x = _sample_batch(chart, rng, n, 3)
        rc = ReducedConfig(*(_sigma_only(poly_field(rng, sh, degree=2, scale=0.7, batch=n))
                             for sh in ((2,), (2, 2), (), (), (2,))))
        full = rc.configuration()
        terms = [block_assemble(t) for t in reduced_terms(chart, rc, x, be)]
        s = full.spinor(x)
        f, sig = s[..., 0], s[..., 1:]
        R, Da, Q = curvature_terms(chart, full.a, x, be)
        oracle = [
            (f * f - np.sum(sig * sig, axis=-1))[..., None, None] * EYE3,
            -2.0 * f[..., None, None] * star(sig),
            sig[..., :, None] * sig[..., None, :],
            R, Da, Q,
        ]
        for nm, t, o in zip(names, terms, oracle):
            out.append(_rec(cfg, f"product.block.{nm}.{c}", _rel(t - o, o), bname, configs=n))
        red = block_assemble(reduced_residual(chart, rc, x, be))
        ref = sw_residual(chart, full, x, be)[0]
        out.append(_rec(cfg, f"product.assembled.{c}", _rel(red - ref, ref), bname, configs=n))

    scan = last_block_solve(density=cfg.scan_density, tol=tolerance(cfg, "product.last-block-scan"))
    sols = scan["solutions"]
    ok = len(sols) == 1 and scan["stalled"] == 0
    resid = float(np.max(np.abs(sols))) if ok else float("inf")
    out.append(_rec(cfg, "product.last-block-scan", resid, None, density=cfg.scan_density,
                    starts=scan["starts"], solutions=sols, stalled=scan["stalled"]))
    return out


# --------------------------------------------------------------------------
# Cotton tensor

def cotton_suite(cfg):
    charts = _charts(cfg, ("ball", "half-space"), ("ball", "half-space"))
    bname, be = _backend(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples or 20
    out = []
    for c in charts:
        chart = ch.get_chart(c)
        x = chart.sample(rng, n)
        C = ch.cotton(chart, x, be)
        out.append(_rec(cfg, f"cotton.hyperbolic.{c}", np.abs(C).max(), bname, points=n))

    euc = ch.get_chart("euclidean")
    h = poly_field(rng, (3, 3), degree=2, scale=1.0)

    def g(y):
        xp = array_namespace(y)
        H = h(y)
        return xp.asarray(np.eye(3)) + 0.1 * (H + xp.swapaxes(H, -1, -2)) / 2
    x = 0.3 * rng.uniform(-1, 1, (n, 3))
    C = ch.cotton(euc, x, be, metric=g)
    gi = np.linalg.inv(g(x))
    out.append(_rec(cfg, "cotton.symmetric", np.abs(C - np.swapaxes(C, -1, -2)).max(), bname,
                    points=n, max_abs_cotton=float(np.abs(C).max())))
    out.append(_rec(cfg, "cotton.trace-free", np.abs(np.einsum("...ij,...ij->...", gi, C)).max(),
                    bname, points=n))

    phi = poly_field(rng, (), degree=2, scale=0.3)

    def gt(y):
        return array_namespace(y).exp(2.0 * phi(y))[..., None, None] * g(y)
    Ct = ch.cotton(euc, x, be, metric=gt)
    lhs = np.exp(-phi(x))[..., None, None] * C
    out.append(_rec(cfg, "cotton.conformal", np.abs(Ct - lhs).max() / np.abs(lhs).max(), bname,
                    points=n))
    return out


# --------------------------------------------------------------------------
# torus solver

def torus_suite(cfg):
    from .swop import TangentInput
    from .torus import (Grid, GridConfig, flow_to_solution, gauge_transform, gradient_check,
                        offdiag_L2_flat, preset, random_start, residual_norm)

    if cfg.chart not in (None, "t3"):
        raise ConfigError("solve-torus runs on the flat 3-torus only (chart t3)")
    grid = Grid(cfg.grid)
    rng = np.random.default_rng(cfg.seed)
    if cfg.start == "random":
        n = cfg.samples or 20
        starts = [random_start(rng, grid, 1.0) for _ in range(n)]
    else:
        starts = [preset(cfg.start, grid)]
    out, flows, ends = [], [], []
    for i, init in enumerate(starts):
        rep, end = flow_to_solution(init, grid, method=cfg.method, max_iters=50)
        flows.append(rep.to_dict())
        ends.append((rep, end))
        tag = f"{i:02d}"
        out.append(_rec(cfg, f"torus.residual.{tag}", rep.final_residual, None,
                        converged=rep.converged, iterations=rep.iterations))
        if rep.converged:
            out.append(_rec(cfg, f"torus.phi.{tag}", rep.phi_sup))
            out.append(_rec(cfg, f"torus.curvature.{tag}", rep.curvature_l2))
            out.append(_rec(cfg, f"torus.energy.{tag}", abs(rep.energy_sum)))

    u = random_start(rng, grid, 0.5).to_vector()
    out.append(_rec(cfg, "torus.gradient", gradient_check(u, grid, rng)))

    rep, end = ends[0]
    if rep.converged:
        xi = 1e-2 * trig_field(rng, (3,), kmax=1)(grid.x)
        moved = gauge_transform(end, xi, grid)
        r = abs(float(residual_norm(moved, grid, dealias=False))
                - float(residual_norm(end, grid, dealias=False)))
        out.append(_rec(cfg, "torus.gauge-orbit", r))

    # off-diagonal blocks of L^2 at reducible flat solutions
    z = np.zeros(grid.x.shape[:-1])
    v, w = _unit(rng, (2, 3))
    rank_one = 0.3 * np.broadcast_to(np.outer(v, w), grid.x.shape[:-1] + (3, 3)).copy()
    reducible = {"zero": preset("zero", grid),
                 "rank-one": GridConfig(rank_one, z, np.zeros(grid.x.shape))}
    fields = {nm: trig_field(rng, sh, kmax=2)(grid.x)
              for nm, sh in (("adot", (3, 3)), ("fdot", ()), ("sigmadot", (3,)), ("xi", (3,)))}
    zero = {"adot": np.zeros(grid.x.shape[:-1] + (3, 3)), "fdot": z,
            "sigmadot": np.zeros(grid.x.shape), "xi": np.zeros(grid.x.shape)}
    members = {"adot": ("adot",), "phidot": ("fdot", "sigmadot"), "xi": ("xi",)}
    tangents = {}
    for block, slots in members.items():
        vals = {k: (fields[k] if k in slots else zero[k]) for k in zero}
        tangents[block] = TangentInput(*(lambda y, v=vals[k]: v
                                         for k in ("adot", "fdot", "sigmadot", "xi")))
    for lab, red in reducible.items():
        res = offdiag_L2_flat(grid, red, tangents)
        r = max(v for d in res.values() for v in d.values())
        out.append(_rec(cfg, f"torus.L2-offdiag.{lab}", r))
    return out, {"flows": flows}


SUITES = {
    "verify-algebra": algebra_suite,
    "verify-hyperbolic": hyperbolic_suite,
    "verify-weitzenboeck": weitzenboeck_suite,
    "verify-product": product_suite,
    "verify-cotton": cotton_suite,
    "solve-torus": torus_suite,
}


def run_suite(cfg):
    """Run the suite for ``cfg.subcommand``; returns ``(records, attachments, notes)``."""
    res = SUITES[cfg.subcommand](cfg)
    records, attach = res if isinstance(res, tuple) else (res, {})
    notes = [PRODUCT_NOTE] if cfg.subcommand == "verify-product" else []
    return records, attach, notes
