r"""
Numerical self-checks.

Monte Carlo
-----------

:func:`simulate_delta` estimates

.. math::

    \sup_z |P(T \le z) - \Phi(z)| \quad\text{and}\quad
    \sup_z |P(t \le z) - \Phi_n(z)|

for the self-normalized sum :math:`T = S/V` (``T = 0`` when ``V = 0``) and the
Student statistic ``t``. Sample blocks are drawn from counter-based Philox
streams keyed by ``(seed, block index)``, so results do not depend on the
number of worker threads. The supremum is taken exactly at the order
statistics; the uniform 99% confidence half-width comes from the
Dvoretzky-Kiefer-Wolfowitz inequality.

Analytic checks
---------------

The remaining functions confirm numerically the inequalities the constants
rest on: the sharp constant in :math:`|\Phi - \Phi_n| < C/(n-1)`, the
envelope :math:`\Psi^*`, and the auxiliary facts of the moderate-deviation
case.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special, stats

from .bounds import BoundReport, shao_bound, theorem_bound
from .config import Settings, get_settings
from .constants import ConstantTriple
from .errors import ConfigurationError, DomainError
from .moments import DistributionSpec, gamma_functionals, moment_summary
from .specfun import (
    PSI_STAR_KNOT,
    PSI_STAR_LEVEL,
    big_r,
    cantelli_between,
    max_moment_density,
    normal_pdf,
    normal_tail,
    student_cdf,
    x_of_t,
)

logger = logging.getLogger(__name__)

CONFIDENCE_LEVEL = 0.01
MIN_SAMPLES = 10_000


def dkw_half_width(samples: int, level: float = CONFIDENCE_LEVEL) -> float:
    """
    Uniform half-width of a ``1 - level`` confidence band for an empirical CDF.

    Examples
    --------
    >>> round(dkw_half_width(10**6), 6)
    0.001628
    """
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    return math.sqrt(math.log(2.0 / level) / (2.0 * samples))


def _phi_n_array(z: np.ndarray, n: int) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        scaled = z / np.sqrt(1.0 + (z * z - 1.0) / n)
    scaled = np.where(np.isinf(z), np.sign(z) * math.sqrt(n), scaled)
    return special.ndtr(scaled)


def _student_stat_array(T: np.ndarray, n: int) -> np.ndarray:
    room = np.maximum(1.0 - T * T / n, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = math.sqrt((n - 1) / n) * T / np.sqrt(room)
    return np.where(room == 0.0, np.sign(T) * np.inf, t)


def sup_distance(
    values: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]
) -> float:
    """
    Exact ``sup_z |F_hat(z) - G(z)|`` between the empirical CDF of ``values``
    and a nondecreasing ``G`` (callable on arrays), checked on both sides of
    every jump.
    """
    atoms, counts = np.unique(values, return_counts=True)
    total = counts.sum()
    upper = np.cumsum(counts) / total
    lower = upper - counts / total
    g = np.asarray(cdf(atoms), dtype=float)
    return float(max(np.max(np.abs(upper - g)), np.max(np.abs(lower - g))))


@dataclass(frozen=True)
class SimResult:
    n: int
    samples: int
    seed: int
    sup_delta_T: float
    sup_delta_t: float
    mc_half_width: float


def _block_statistic(
    spec: DistributionSpec, n: int, rows: int, seed: int, block: int
) -> np.ndarray:
    stream = np.random.SeedSequence(seed, spawn_key=(block,))
    generator = np.random.Generator(np.random.Philox(stream))
    x = spec.draw(generator, (rows, n))
    s = x.sum(axis=1)
    v = np.sqrt((x * x).sum(axis=1))
    return np.divide(s, v, out=np.zeros_like(s), where=v > 0)


def simulate_delta(
    spec: DistributionSpec,
    n: int,
    samples: int,
    seed: int,
    settings: Optional[Settings] = None,
) -> SimResult:
    """
    Monte Carlo distances of T to Phi and of t to Phi_n.

    The sample range is cut into blocks of ``max(1, cells // n)`` rows, where
    ``cells`` is ``settings.simulation_block_cells``; block ``k`` uses the
    Philox stream ``SeedSequence(seed, spawn_key=(k,))``.

    Raises
    ------
    UnsupportedSpecError
        For a moments-only spec, which cannot be sampled.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if samples < MIN_SAMPLES:
        raise DomainError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    cfg = settings if settings is not None else get_settings()
    spec.law(cfg)
    rows = max(1, cfg.simulation_block_cells // n)
    blocks = [
        (k, min(rows, samples - k * rows)) for k in range(math.ceil(samples / rows))
    ]
    logger.info(
        "simulating %s: n=%d, samples=%d in %d blocks",
        spec.describe(),
        n,
        samples,
        len(blocks),
    )
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        parts = list(
            pool.map(lambda kb: _block_statistic(spec, n, kb[1], seed, kb[0]), blocks)
        )
    T = np.concatenate(parts)
    sup_T = sup_distance(T, special.ndtr)
    sup_t = sup_distance(_student_stat_array(T, n), lambda z: _phi_n_array(z, n))
    logger.info("sup distances: T %.6g, t %.6g", sup_T, sup_t)
    return SimResult(n, samples, seed, sup_T, sup_t, dkw_half_width(samples))


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of comparing a bound with a simulated distance."""

    bound: BoundReport
    sim: Optional[SimResult]
    passed: bool
    margin: float
    vacuous: bool

    def to_text(self, digits: int = 10) -> str:
        lines = [self.bound.to_text(digits)]
        if self.sim is not None:
            lines.append(f"samples={self.sim.samples}")
            lines.append(f"seed={self.sim.seed}")
            lines.append(f"sup_delta_T={self.sim.sup_delta_T:.{digits}g}")
            lines.append(f"sup_delta_t={self.sim.sup_delta_t:.{digits}g}")
            lines.append(f"mc_half_width={self.sim.mc_half_width:.{digits}g}")
        lines.append(f"margin={self.margin:.{digits}g}")
        lines.append(f"passed={str(self.passed).lower()}")
        return "\n".join(lines)


def check_bound_holds(
    spec: DistributionSpec,
    n: int,
    samples: int,
    seed: int,
    triple: Optional[ConstantTriple] = None,
    family: Optional[str] = None,
    settings: Optional[Settings] = None,
) -> BoundCheck:
    """
    Check ``sup_delta_T + mc_half_width <= bound`` by simulation.

    Give either a ``triple`` (applied in its own theorem form) or
    ``family="shao"``. A vacuous bound passes without simulating.
    """
    if (triple is None) == (family is None):
        raise ConfigurationError("give exactly one of triple and family")
    if triple is not None:
        bound = theorem_bound(moment_summary(spec, settings).with_n(n), triple)
    elif family == "shao":
        bound = shao_bound(gamma_functionals(spec, n, settings), n)
    else:
        raise ConfigurationError(f"unknown bound family {family!r}")
    if bound.vacuous:
        return BoundCheck(bound, None, True, bound.value - 1.0, True)
    sim = simulate_delta(spec, n, samples, seed, settings)
    margin = bound.value - (sim.sup_delta_T + sim.mc_half_width)
    return BoundCheck(bound, sim, margin >= 0.0, margin, False)


def binomial_sup_delta(n: int) -> float:
    """Exact ``sup_z |P(T <= z) - Phi(z)|`` for n Rademacher summands."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    k = np.arange(n + 1)
    z = (2.0 * k - n) / math.sqrt(n)
    upper = stats.binom.cdf(k, n, 0.5)
    lower = upper - stats.binom.pmf(k, n, 0.5)
    g = special.ndtr(z)
    return float(max(np.max(np.abs(upper - g)), np.max(np.abs(lower - g))))


@dataclass(frozen=True)
class Prop1Constants:
    k: float
    C: float
    sup2C: float


def _u_factor(u: float) -> float:
    return abs(u * (1.0 - u * u)) * normal_pdf(u)


def prop1_constants() -> Prop1Constants:
    r"""
    The sharp constant :math:`C = (k - 1/2)e^{-k}\sqrt{k/\pi}`,
    :math:`k = 1 + \sqrt3/2`, and the numerical supremum of
    :math:`|u(1 - u^2)\varphi(u)|`, which equals :math:`2C`.

    Examples
    --------
    >>> round(prop1_constants().C, 4)
    0.1629
    """
    k = 1.0 + math.sqrt(3.0) / 2.0
    C = (k - 0.5) * math.exp(-k) * math.sqrt(k / math.pi)
    grid = np.linspace(0.0, 8.0, 8001)
    values = np.abs(grid * (1.0 - grid * grid)) * np.exp(-0.5 * grid * grid)
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda u: -_u_factor(u),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return Prop1Constants(k, C, -float(res.fun))


def prop1_gap(n: int) -> float:
    r"""
    :math:`\sup_z |\Phi(z) - \Phi_n(z)|`, including the limit
    :math:`z \to \infty` where the gap is :math:`\Psi(\sqrt n)`.

    The gap is odd in ``z``, so only ``z >= 0`` is scanned; the best grid point
    is refined by a bounded scalar search.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")

    def gap(z: float) -> float:
        arg = z / math.sqrt(1.0 + (z * z - 1.0) / n)
        return abs(float(special.ndtr(z)) - float(special.ndtr(arg)))

    grid = np.linspace(0.0, max(12.0, 4.0 * math.sqrt(n)), 24001)
    values = np.abs(special.ndtr(grid) - _phi_n_array(grid, n))
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda z: -gap(z),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(-float(res.fun), float(values[i]), normal_tail(math.sqrt(n)))


def _log_psi_x(x: float) -> float:
    return math.log(x * normal_tail(x))


def _log_psi_x_slope(x: float) -> float:
    return 1.0 / x - normal_pdf(x) / normal_tail(x)


@dataclass(frozen=True)
class Lemma2Report:
    """Numerical evidence that the envelope Psi* dominates x*Psi(x)."""

    slope_below_knot: float
    slope_at_knot: float
    tangent_value: float
    log_level: float
    slope_root: float
    concave: bool

    @property
    def passed(self) -> bool:
        return (
            self.slope_below_knot > 0.0 > self.slope_at_knot
            and self.tangent_value < self.log_level
            and self.concave
        )


def lemma2_proof_checks() -> Lemma2Report:
    """
    With ``L(x) = ln(x*Psi(x))``: ``L'(0.751) > 0 > L'(0.752)``, the tangent at
    0.752 evaluated at 0.751 lies below ``ln 0.17``, and ``L`` is concave.
    """
    left = PSI_STAR_KNOT - 0.001
    tangent = _log_psi_x(PSI_STAR_KNOT) + _log_psi_x_slope(PSI_STAR_KNOT) * (
        left - PSI_STAR_KNOT
    )
    x = np.linspace(0.05, 10.0, 4000)
    L = np.log(x * special.ndtr(-x))
    second = L[2:] - 2.0 * L[1:-1] + L[:-2]
    root = float(optimize.brentq(_log_psi_x_slope, left, PSI_STAR_KNOT, xtol=1e-14))
    return Lemma2Report(
        slope_below_knot=_log_psi_x_slope(left),
        slope_at_knot=_log_psi_x_slope(PSI_STAR_KNOT),
        tangent_value=tangent,
        log_level=math.log(PSI_STAR_LEVEL),
        slope_root=root,
        concave=bool(np.all(second <= 1e-12)),
    )


@dataclass(frozen=True)
class Theorem1Report:
    """Pass flags for the auxiliary facts of the moderate-deviation case."""

    x_t_maximizes: bool
    r_increasing: bool
    s_j_supremum: bool
    between_identity: bool
    convexity: bool
    failures: Tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.failures


def theorem1_proof_checks() -> Theorem1Report:
    """Verify the auxiliary inequalities on grids."""
    x = np.linspace(1e-3, 10.0, 20001)
    ts = np.linspace(0.01, 0.5, 50)

    x_t_ok = True
    for t in ts:
        xt = x_of_t(float(t))
        at_xt = float(special.ndtr(xt) - special.ndtr((1.0 - t) * xt))
        on_grid = special.ndtr(x) - special.ndtr((1.0 - t) * x)
        x_t_ok &= bool(np.max(on_grid) <= at_xt + 1e-13)

    r_values = np.array([big_r(float(t)) for t in np.linspace(1e-4, 0.5, 200)])
    r_ok = bool(np.all(np.diff(r_values) > 0))

    s_ok = True
    for j in (2, 3):
        on_grid = x**j * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        s_j = max_moment_density(j)
        s_ok &= bool(np.max(on_grid) <= s_j + 1e-15 and np.max(on_grid) >= s_j - 1e-6)

    between_ok = True
    for kappa in (0.05, 0.2, 0.5, 1.0):
        for r4 in (0.01, 0.1, 0.5, 1.0):
            eps = kappa * r4
            if eps >= 2.0:
                continue
            spread = 2.0 * math.sqrt(2.0 * eps)
            value = cantelli_between(r4, spread - 2.0 * eps, 2.0 * eps + spread)
            expected = (1.0 + 4.0 * kappa * kappa) * r4 / (8.0 * kappa)
            between_ok &= math.isclose(value, expected, rel_tol=1e-12)

    parts = np.linspace(0.0, 5.0, 26)
    a, b = np.meshgrid(parts, parts)
    convex_ok = True
    for alpha in np.linspace(0.01, 0.99, 50):
        lhs = (a + b) ** 3
        rhs = a**3 / (1.0 - alpha) ** 2 + b**3 / alpha**2
        convex_ok &= bool(np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-12))

    flags = {
        "x_t_maximizes": x_t_ok,
        "r_increasing": r_ok,
        "s_j_supremum": s_ok,
        "between_identity": between_ok,
        "convexity": convex_ok,
    }
    failures = tuple(name for name, ok in flags.items() if not ok)
    return Theorem1Report(**flags, failures=failures)


@dataclass(frozen=True)
class TailRatioRow:
    z: float
    log_ratio_phi: float
    log_ratio_phi_scaled: float
    log_ratio_phi_n: Optional[float]


@dataclass(frozen=True)
class TailRatioTable:
    n: int
    rows: List[TailRatioRow]
    notes: Tuple[str, ...] = ()


def tail_ratio_data(n: int, z_grid: Sequence[float]) -> TailRatioTable:
    r"""
    Log ratios of normal-type tails to the Student tail with ``n - 1`` degrees
    of freedom:

    .. math::

        \ln\frac{1 - \Phi(z)}{1 - F_{n-1}(z)}, \quad
        \ln\frac{1 - \Phi(z\sqrt{n/(n-1)})}{1 - F_{n-1}(z)}, \quad
        \ln\frac{1 - \Phi_n(z)}{1 - F_{n-1}(z)}.

    The last column is left empty for ``z >= sqrt(n)``.
    """
    if n < 3:
        raise DomainError(f"n must be at least 3, got {n}")
    root_n = math.sqrt(n)
    scale = math.sqrt(n / (n - 1))
    rows = []
    cut = False
    for z in z_grid:
        if not z > 0:
            raise DomainError(f"tail ratios need z > 0, got {z}")
        log_student = math.log(student_cdf(-z, n - 1))
        phi_n_col: Optional[float] = None
        if z < root_n:
            arg = z / math.sqrt(1.0 + (z * z - 1.0) / n)
            phi_n_col = math.log(normal_tail(arg)) - log_student
        else:
            cut = True
        rows.append(
            TailRatioRow(
                z=float(z),
                log_ratio_phi=math.log(normal_tail(z)) - log_student,
                log_ratio_phi_scaled=math.log(normal_tail(z * scale)) - log_student,
                log_ratio_phi_n=phi_n_col,
            )
        )
    notes = (f"log_ratio_phi_n omitted for z >= sqrt(n) = {root_n:.6g}",) if cut else ()
    return TailRatioTable(n, rows, notes)
