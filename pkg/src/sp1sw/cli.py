"""Command-line front end: ``sp1sw <subcommand> [flags]``.

Settings merge as defaults < config file < ``SP1SW_*`` environment < flags.
Tolerances are overridden per check id with ``--tol.<check-id> VALUE``
(prefixes allowed, e.g. ``--tol.algebra 1e-10``) or ``SP1SW_TOL_<ID>``.

Exit status: 0 all checks pass, 1 some check fails, 2 configuration error.

Only the standard library is imported at module level so that thread
limits can be set before numpy or jax load.
"""

import argparse
import os
import sys

from .config import SUBCOMMANDS, ConfigError, RunConfig, tolerance_key

__all__ = ["main", "build_config", "run"]

_KEYS = {
    # key: (type, RunConfig attribute)
    "chart": (str, "chart"),
    "backend": (str, "backend"),
    "fd-step": (float, "fd_step"),
    "seed": (int, "seed"),
    "samples": (int, "samples"),
    "grid": (int, "grid"),
    "threads": (int, "threads"),
    "out": (str, "out"),
    "csv": (str, "csv"),
    "start": (str, "start"),
    "method": (str, "method"),
    "scan-density": (int, "scan_density"),
}


def _convert(key, value):
    typ = _KEYS[key][0]
    try:
        return typ(value)
    except ValueError:
        raise ConfigError(f"invalid value {value!r} for {key}") from None


def _tol_value(name, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"invalid tolerance {value!r} for {name}") from None


def read_config_file(path):
    """``key = value`` lines; ``#`` starts a comment; ``tol.<id>`` keys allowed."""
    values, tols = {}, {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        k = k.replace("_", "-")
        if k.startswith("tol."):
            tols[k[4:]] = _tol_value(k, v)
        elif k in _KEYS:
            values[k] = _convert(k, v)
        else:
            raise ConfigError(f"{path}:{n}: unknown key {k!r}")
    return values, tols


def _split_tol_flags(argv):
    """Pull ``--tol.<id> V`` / ``--tol.<id>=V`` out of ``argv``."""
    rest, tols = [], {}
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--tol."):
            name, eq, val = a[6:].partition("=")
            if not eq:
                if i + 1 >= len(argv):
                    raise ConfigError(f"{a} needs a value")
                val = argv[i + 1]
                i += 1
            if not name:
                raise ConfigError("--tol. needs a check id")
            tols[name] = _tol_value(a, val)
        else:
            rest.append(a)
        i += 1
    return rest, tols


def _parser():
    p = argparse.ArgumentParser(prog="sp1sw", description=(
        "Verification suites and a flat-torus solver for the Sp(1) Seiberg-Witten equations."))
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--chart", help="chart id (comma separated list where a suite allows several)")
    p.add_argument("--backend", help="differentiation backend: fd or ad")
    p.add_argument("--fd-step", dest="fd_step", help="finite-difference step (default 1e-3)")
    p.add_argument("--seed", help="random seed (default 0)")
    p.add_argument("--samples", help="primary sample count of the suite")
    p.add_argument("--grid", help="torus grid resolution N (power of two, default 16)")
    p.add_argument("--threads", help="worker threads; 1 gives bit-stable reports (default 1)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="also write a flat CSV table of the records")
    p.add_argument("--start", help="solve-torus start: random, zero or phi-one")
    p.add_argument("--method", help="solve-torus optimizer: gn (default) or gd")
    p.add_argument("--scan-density", dest="scan_density",
                   help="verify-product scan points per axis (default 41)")
    return p


def build_config(argv, environ=None):
    """Parse ``argv`` (without the program name) into a validated :class:`RunConfig`."""
    environ = os.environ if environ is None else environ
    argv, flag_tols = _split_tol_flags(list(argv))
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError("invalid command line") if exc.code else exc
    values, tols = {}, {}
    if ns.config:
        v, t = read_config_file(ns.config)
        values.update(v)
        tols.update(t)
    for k in _KEYS:
        env = "SP1SW_" + k.upper().replace("-", "_")
        if env in environ:
            values[k] = _convert(k, environ[env])
    env_tols = {k[len("SP1SW_TOL_"):]: v for k, v in environ.items() if k.startswith("SP1SW_TOL_")}
    for k in _KEYS:
        flag = getattr(ns, _KEYS[k][1], None)
        if flag is not None:
            values[k] = _convert(k, flag)
    cfg = RunConfig(subcommand=ns.subcommand)
    for k, v in values.items():
        setattr(cfg, _KEYS[k][1], v)
    tol = dict(tols)
    # environment names are matched against check ids in normalized form
    for k, v in env_tols.items():
        tol[tolerance_key(k)] = _tol_value("SP1SW_TOL_" + k, v)
    tol.update(flag_tols)
    cfg.tol = tol
    return cfg.validate()


def _limit_threads(n):
    n = str(n)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = n
    if n == "1":
        flags = os.environ.get("XLA_FLAGS", "")
        extra = "--xla_cpu_multi_thread_eigen=false intra_op_parallelism_threads=1"
        if extra not in flags:
            os.environ["XLA_FLAGS"] = (flags + " " + extra).strip()


def run(cfg):
    """Run a validated configuration; returns the :class:`ReportDocument`."""
    from . import __version__
    from .report import ReportDocument
    from .suites import run_suite

    records, attach, notes = run_suite(cfg)
    return ReportDocument(__version__, cfg.echo(), records, notes, attach)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = build_config(argv)
        _limit_threads(cfg.threads)
        doc = run(cfg)
    except ConfigError as exc:
        print(f"sp1sw: configuration error: {exc}", file=sys.stderr)
        return 2
    text = doc.to_json()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.csv:
        with open(cfg.csv, "w") as fh:
            fh.write(doc.to_csv())
    failed = [r.check_id for r in doc.records if not r.passed]
    for cid in failed:
        print(f"FAIL {cid}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
