"""Run configuration shared by the suites and the command-line tool.

Stdlib only, so the CLI can set thread limits before numpy or jax load.
"""

from dataclasses import asdict, dataclass, field

__all__ = ["RunConfig", "ConfigError", "SUBCOMMANDS", "CHART_IDS", "tolerance_key"]

SUBCOMMANDS = ("verify-algebra", "verify-hyperbolic", "verify-weitzenboeck",
               "verify-product", "verify-cotton", "solve-torus")
CHART_IDS = ("euclidean", "ball", "half-space", "s1xh2", "s1xt2", "t3")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (exit status 2)."""


def tolerance_key(name):
    """Normalized form used to match env-var tolerance names to check ids."""
    return "".join(c if c.isalnum() else "_" for c in name).upper()


@dataclass
class RunConfig:
    subcommand: str
    chart: str = None
    backend: str = None
    fd_step: float = 1e-3
    tol: dict = field(default_factory=dict)
    seed: int = 0
    samples: int = None
    grid: int = 16
    threads: int = 1
    out: str = None
    csv: str = None
    start: str = "random"
    method: str = "gn"
    scan_density: int = 41

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.chart is not None:
            for c in self.charts():
                if c not in CHART_IDS:
                    raise ConfigError(f"unknown chart {c!r}; expected one of {', '.join(CHART_IDS)}")
        if self.backend not in (None, "fd", "ad"):
            raise ConfigError("backend must be 'fd' or 'ad'")
        if not self.fd_step > 0:
            raise ConfigError("fd-step must be positive")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("samples must be a positive integer")
        if self.grid < 4 or self.grid & (self.grid - 1):
            raise ConfigError("grid resolution must be a power of two >= 4")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.start not in ("random", "zero", "phi-one"):
            raise ConfigError("start must be 'random', 'zero' or 'phi-one'")
        if self.method not in ("gd", "gn"):
            raise ConfigError("method must be 'gd' or 'gn'")
        if self.scan_density < 2:
            raise ConfigError("scan-density must be >= 2")
        for k, v in self.tol.items():
            if not isinstance(v, float) or v != v or v < 0:
                raise ConfigError(f"tolerance for {k!r} must be a non-negative number")
        return self

    def charts(self, default=()):
        if self.chart is None:
            return tuple(default)
        return tuple(c.strip() for c in self.chart.split(",") if c.strip())

    def echo(self):
        """The configuration as written into reports (output paths omitted)."""
        d = asdict(self)
        d.pop("out")
        d.pop("csv")
        d["tol"] = dict(sorted(self.tol.items()))
        return d
