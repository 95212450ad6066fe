"""
Runtime settings and logging setup.

Numerical tolerances and work budgets live in one frozen :class:`Settings`
object. The only environment input is ``SENBE_THREADS``, which caps the number
of worker threads; results never depend on it.
"""

import logging
import os
import sys
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .errors import ConfigurationError

THREADS_ENV = "SENBE_THREADS"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class Settings:
    """
    Tunables shared by the numerical modules.

    Parameters
    ----------
    threads : int
        Upper bound on worker threads for seed evaluation, truncation grids and
        simulation blocks.
    optimizer_budget : int
        Objective evaluations granted to the local simplex searches of the
        constant optimizer.
    quasi_random_seeds : int
        Sobol points added to the published rows as optimizer starts.
    boundary_margin : float
        Minimum distance the optimizer keeps from every parameter bound.
    quad_epsrel, quad_limit :
        Relative tolerance and subinterval limit passed to QUADPACK.
    truncation_grid_points : int
        Size of the logarithmic grid of truncation points.
    simulation_block_cells : int
        Matrix cells (samples times n) drawn per random block.
    output_digits : int
        Significant digits in CLI output.
    """

    threads: int = _default_threads()
    optimizer_budget: int = 20000
    quasi_random_seeds: int = 32
    boundary_margin: float = 1e-9
    quad_epsrel: float = 1e-10
    quad_limit: int = 200
    truncation_grid_points: int = 64
    simulation_block_cells: int = 1 << 22
    output_digits: int = 10

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ConfigurationError(f"threads must be positive, got {self.threads}")
        if self.optimizer_budget < 0:
            raise ConfigurationError(
                f"optimizer_budget must be nonnegative, got {self.optimizer_budget}"
            )

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        """Build settings, honouring ``SENBE_THREADS`` when set."""
        env = os.environ if environ is None else environ
        raw = env.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return cls()
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigurationError(
                f"{THREADS_ENV} must be a positive integer, got {raw!r}"
            ) from None
        return cls(threads=threads)

    def with_overrides(self, **changes: object) -> "Settings":
        return replace(self, **changes)  # type: ignore[arg-type]


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, read from the environment on first use."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def configure_logging(verbosity: int = 0) -> None:
    """
    Send senbe log records to stderr.

    ``verbosity`` 0 shows warnings, 1 adds progress messages, 2 and above
    adds per-candidate detail.
    """
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    package = logging.getLogger(__name__.rsplit(".", 1)[0])
    package.handlers[:] = [handler]
    package.setLevel(level)
    package.propagate = False
