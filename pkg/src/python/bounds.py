"""
Berry-Esseen bounds for the self-normalized sum and their comparators.

Theorem-form bounds take a :class:`MomentSummary` and a
:class:`ConstantTriple`; a non-i.i.d. triple is applied as
``A3*r3 + A4*r4 + A6*r6`` and an i.i.d. triple as
``(A3*rho3 + A4*rho4 + A6*rho6)/sqrt(n)`` (see :func:`theorem_bound`).
Truncated bounds add the failure mass ``1 - P(-a < X < b)**n`` to the bound
of the zero-mean truncated variable, and :func:`minimize_truncated_bound`
chooses ``b``.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy import optimize

from .config import Settings, get_settings
from .constants import ConstantTriple
from .errors import (
    ConfigurationError,
    DegenerateMomentsError,
    DomainError,
    InfeasibleTruncationError,
    LyapunovViolationError,
    MomentDivergenceError,
    UnsupportedSpecError,
)
from .moments import (
    INF,
    DistributionSpec,
    GammaFunctionals,
    MomentSummary,
    analytic_moments,
    gamma_functionals,
    keep_probability,
    truncated_moments,
    two_point_moments,
    zero_mean_truncation_find_a,
)

logger = logging.getLogger(__name__)

SHAO_C2 = 10.2
SHAO_C3 = 25.0

NAGAEV_NOTE = "comparator; the proof behind this bound is disputed"

CSV_COLUMNS = (
    "family",
    "n",
    "triple",
    "value",
    "components",
    "b_star",
    "keep_prob",
    "failure_mass",
)


def format_number(value: Optional[float], digits: int = 10) -> str:
    """Format with ``digits`` significant digits; infinities print as ``inf``."""
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"


@dataclass(frozen=True)
class Truncation:
    a: float
    b: float
    keep_prob: float
    failure_mass: float


@dataclass(frozen=True)
class BoundReport:
    """
    A bound value together with its additive components.

    ``value`` is the exactly rounded sum of ``components``. Values above 1 are
    kept as they are and flagged by :attr:`vacuous`.
    """

    value: float
    family: str
    components: Dict[str, float] = field(default_factory=dict)
    triple: Optional[ConstantTriple] = None
    truncation: Optional[Truncation] = None
    n: Optional[int] = None
    notes: Tuple[str, ...] = ()

    @classmethod
    def from_components(
        cls, family: str, components: Dict[str, float], **kwargs: object
    ) -> "BoundReport":
        value = math.fsum(components.values())
        return cls(value, family, components, **kwargs)  # type: ignore[arg-type]

    @property
    def vacuous(self) -> bool:
        return self.value > 1.0

    def to_text(self, digits: int = 10) -> str:
        """Flat ``key=value`` block, one entry per line."""
        lines = [f"family={self.family}"]
        if self.n is not None:
            lines.append(f"n={self.n}")
        if self.triple is not None:
            a3, a4, a6 = self.triple.values
            lines.append(f"triple={self.triple.label()}")
            lines.append(
                "constants="
                + ",".join(format_number(v, digits) for v in (a3, a4, a6))
            )
        lines.append(f"value={format_number(self.value, digits)}")
        for key, value in self.components.items():
            lines.append(f"{key}={format_number(value, digits)}")
        if self.truncation is not None:
            t = self.truncation
            lines.append(f"a={format_number(t.a, digits)}")
            lines.append(f"b={format_number(t.b, digits)}")
            lines.append(f"keep_prob={format_number(t.keep_prob, digits)}")
            lines.append(f"failure_mass={format_number(t.failure_mass, digits)}")
        lines.append(f"vacuous={str(self.vacuous).lower()}")
        lines.extend(f"note={note}" for note in self.notes)
        return "\n".join(lines)

    def to_csv_row(self, digits: int = 10) -> Tuple[str, ...]:
        """Cells in ``CSV_COLUMNS`` order."""
        components = ";".join(
            f"{k}={format_number(v, digits)}" for k, v in self.components.items()
        )
        t = self.truncation
        return (
            self.family,
            "" if self.n is None else str(self.n),
            "" if self.triple is None else self.triple.label(),
            format_number(self.value, digits),
            components,
            "" if t is None else format_number(t.b, digits),
            "" if t is None else format_number(t.keep_prob, digits),
            "" if t is None else format_number(t.failure_mass, digits),
        )


def bound_noniid(m: MomentSummary, t: ConstantTriple) -> BoundReport:
    """
    Bound for independent, not necessarily identical, summands:
    ``A3*r3 + A4*r4 + A6*r6`` with the r's taken at beta2 = 1.

    Raises
    ------
    DegenerateMomentsError
        If ``m.beta2`` or ``m.beta3`` is zero.

    Examples
    --------
    >>> m = MomentSummary.from_iid(1.0, 0.0, 0.0, n=4)
    >>> round(bound_noniid(m, ConstantTriple.published("t4")).value, 12)
    0.67
    """
    if not (m.beta2 > 0 and m.beta3 > 0):
        raise DegenerateMomentsError(
            f"bound needs beta2 > 0 and beta3 > 0, got {m.beta2}, {m.beta3}"
        )
    components = {
        "A3*r3": t.a3 * m.r3,
        "A4*r4": t.a4 * m.r4,
        "A6*r6": t.a6 * m.r6,
    }
    return BoundReport.from_components("thm1", components, triple=t, n=m.n)


def bound_iid(m: MomentSummary, t: ConstantTriple) -> BoundReport:
    """
    Bound for ``n`` i.i.d. unit-variance summands:
    ``(A3*rho3 + A4*rho4 + A6*rho6)/sqrt(n)``.

    Any triple is accepted; :func:`theorem_bound` picks the form a triple was
    derived for.

    Raises
    ------
    LyapunovViolationError
        If ``rho3 < 1``.
    """
    if not m.is_iid or m.n is None:
        raise ConfigurationError("bound_iid needs an i.i.d. summary with n")
    assert m.rho3 is not None and m.rho4 is not None and m.rho6 is not None
    if m.rho3 < 1.0 - 1e-12:
        raise LyapunovViolationError(f"rho3={m.rho3} is below 1")
    root_n = math.sqrt(m.n)
    components = {
        "A3*rho3/sqrt(n)": t.a3 * m.rho3 / root_n,
        "A4*rho4/sqrt(n)": t.a4 * m.rho4 / root_n,
        "A6*rho6/sqrt(n)": t.a6 * m.rho6 / root_n,
    }
    return BoundReport.from_components("thm2", components, triple=t, n=m.n)


def theorem_bound(m: MomentSummary, t: ConstantTriple) -> BoundReport:
    """Apply ``t`` in the form of the theorem it belongs to."""
    if t.theorem == "iid":
        return bound_iid(m, t)
    return bound_noniid(m, t)


def shao_bound(g: GammaFunctionals, n: Optional[int] = None) -> BoundReport:
    """Shao's bound ``10.2*gamma2 + 25*gamma3``."""
    components = {
        "10.2*gamma2": SHAO_C2 * g.gamma2,
        "25*gamma3": SHAO_C3 * g.gamma3,
    }
    return BoundReport.from_components("shao", components, n=n)


def shao_lyapunov_bound(rho_p: float, p: float, n: int) -> BoundReport:
    """
    Shao's bound through a single moment of order ``p`` in (2, 3]:
    ``25 * E|X|**p * n**(1 - p/2)`` for i.i.d. unit-variance summands.
    """
    if not 2.0 < p <= 3.0:
        raise DomainError(f"p must lie in (2, 3], got {p}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    components = {f"25*E|X|^{p:g}*n^(1-p/2)": SHAO_C3 * rho_p * n ** (1.0 - 0.5 * p)}
    return BoundReport.from_components("shao_lyapunov", components, n=n)


def nagaev_bounds(
    rho3: float, ex4: float, rho6rho3: float, n: int
) -> Tuple[BoundReport, BoundReport]:
    """
    Nagaev-type comparators for i.i.d. unit-variance summands.

    Returns ``(4.4*E|X|^3 + E X^4/E|X|^3 + E|X^2-1|^3)/sqrt(n)`` and the crude
    ``(36*E|X|^3 + 9)/sqrt(n)``. Both are reported for comparison only.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    root_n = math.sqrt(n)
    fine = BoundReport.from_components(
        "nagaev",
        {
            "4.4*E|X|^3/sqrt(n)": 4.4 * rho3 / root_n,
            "E X^4/E|X|^3/sqrt(n)": ex4 / rho3 / root_n,
            "E|X^2-1|^3/sqrt(n)": rho6rho3 / root_n,
        },
        n=n,
        notes=(NAGAEV_NOTE,),
    )
    crude = BoundReport.from_components(
        "nagaev_crude",
        {"36*E|X|^3/sqrt(n)": 36.0 * rho3 / root_n, "9/sqrt(n)": 9.0 / root_n},
        n=n,
        notes=(NAGAEV_NOTE,),
    )
    return fine, crude


def failure_mass(keep_prob: float, n: int) -> float:
    """``1 - keep_prob**n`` without cancellation for keep_prob near 1."""
    if not 0.0 <= keep_prob <= 1.0:
        raise DomainError(f"keep_prob must lie in [0, 1], got {keep_prob}")
    if keep_prob == 0.0:
        return 1.0
    return -math.expm1(n * math.log1p(keep_prob - 1.0))


def _window(
    spec: DistributionSpec, b: float, settings: Optional[Settings]
) -> Tuple[DistributionSpec, float]:
    base = spec.untruncated()
    a = zero_mean_truncation_find_a(base, b, settings)
    return base, a


def truncated_bound(
    spec: DistributionSpec,
    n: int,
    b: float,
    t: ConstantTriple,
    settings: Optional[Settings] = None,
    a: Optional[float] = None,
) -> BoundReport:
    r"""
    Theorem bound after zero-mean truncation at ``b``, plus the failure mass.

    Mathematical Definition:
    ----------------------

    With :math:`p = P(-a < X < b)` and the truncated variable
    :math:`\tilde X = X 1\{-a < X < b\}`, which puts the removed mass on an
    atom at zero,

    .. math::

        \sup_z |P(T_n \le z) - \Phi(z)| \le (1 - p^n) + B_n(\tilde X)

    where :math:`B_n` is the theorem bound of ``t``. The n summands agree with
    their truncated copies outside an event of probability :math:`1 - p^n`.

    The left cut ``a`` is solved from ``b`` unless given; a given window must
    be zero-mean. ``b = inf`` leaves the law untouched and reproduces
    :func:`theorem_bound`.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if a is None:
        base, a = _window(spec, b, settings)
    else:
        base = spec.untruncated()
    if a == INF and b == INF:
        summary, keep = analytic_moments(base, settings), 1.0
    else:
        summary, keep = truncated_moments(base, a, b, settings)
    inner = theorem_bound(summary.with_n(n), t)
    lost = failure_mass(keep, n)
    components = {"failure_mass": lost, **inner.components}
    return BoundReport.from_components(
        inner.family + "_truncated",
        components,
        triple=t,
        truncation=Truncation(a, b, keep, lost),
        n=n,
    )


def truncated_shao_bound(
    spec: DistributionSpec, n: int, b: float, settings: Optional[Settings] = None
) -> BoundReport:
    r"""
    Shao's bound for the truncated law plus the failure mass.

    .. math::

        (1 - p^n) + 10.2\,\tilde\gamma_2 + 25\,\tilde\gamma_3

    with :math:`\tilde\gamma_2, \tilde\gamma_3` taken for
    :math:`X 1\{-a < X < b\}`; the gamma threshold uses the truncated variance.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    base, a = _window(spec, b, settings)
    windowed = base if a == INF and b == INF else base.truncated(a, b)
    keep = keep_probability(windowed, settings)
    inner = shao_bound(gamma_functionals(windowed, n, settings), n)
    lost = failure_mass(keep, n)
    components = {"failure_mass": lost, **inner.components}
    return BoundReport.from_components(
        "shao_truncated",
        components,
        truncation=Truncation(a, b, keep, lost),
        n=n,
    )


def _divergent_report(
    family: str,
    n: int,
    t: Optional[ConstantTriple],
    note: str = "no finite bound at any tried truncation point",
) -> BoundReport:
    return BoundReport(INF, family, {"moment_term": INF}, triple=t, n=n, notes=(note,))


def minimize_truncated_bound(
    spec: DistributionSpec,
    n: int,
    t: Optional[ConstantTriple] = None,
    family: str = "thm",
    settings: Optional[Settings] = None,
) -> Tuple[float, BoundReport]:
    r"""
    Minimize a truncated bound over the cut point ``b``.

    .. math::

        b^* = \operatorname{arg\,min}_{b \in (0, \infty]}
        \bigl[(1 - p(b)^n) + B_n(X 1\{-a(b) < X < b\})\bigr]

    where :math:`a(b)` is the zero-mean left cut for ``b``.

    ``b`` runs over a logarithmic grid on ``[0.1, 1e4]`` times the standard
    deviation of the law (1 when it is infinite) together with ``b = inf``.
    The best grid point is refined by a bounded golden-section search in
    ``log b`` between its neighbours. Every evaluated point is kept, and the
    smallest value wins; ties go to the smaller ``b``.

    Parameters
    ----------
    family : {"thm", "shao"}
        ``"thm"`` uses :func:`truncated_bound` with ``t``; ``"shao"`` uses
        :func:`truncated_shao_bound`.

    Returns
    -------
    (b_star, report)
        ``b_star`` is ``inf`` when no truncation helps or every candidate
        diverges; in the latter case the report has value ``inf``. A
        moments-only spec has nothing to cut and gets ``b = inf``.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if family not in ("thm", "shao"):
        raise ConfigurationError(f"family must be 'thm' or 'shao', got {family!r}")
    if family == "thm" and t is None:
        raise ConfigurationError("family 'thm' needs a constant triple")
    cfg = settings if settings is not None else get_settings()
    if spec.kind == "moments":
        # no law to cut: only the untouched candidate b = inf exists
        logger.info("moments-only spec %s: returning b=inf", spec.describe())
        if family == "shao":
            note = "a moments-only spec carries no gamma functionals"
            return INF, _divergent_report(family, n, None, note)
        assert t is not None
        return INF, truncated_bound(spec, n, INF, t, cfg, a=INF)
    variance = spec.law(cfg).variance
    scale = math.sqrt(variance) if math.isfinite(variance) and variance > 0 else 1.0

    evaluated: Dict[float, Optional[BoundReport]] = {}

    def evaluate(b: float) -> Optional[BoundReport]:
        try:
            if family == "thm":
                assert t is not None
                return truncated_bound(spec, n, b, t, cfg)
            return truncated_shao_bound(spec, n, b, cfg)
        except (
            MomentDivergenceError,
            InfeasibleTruncationError,
            UnsupportedSpecError,
        ) as exc:
            logger.debug("b=%g skipped: %s", b, exc)
            return None

    def value(b: float) -> float:
        if b not in evaluated:
            evaluated[b] = evaluate(b)
        report = evaluated[b]
        return INF if report is None else report.value

    grid = np.geomspace(0.1 * scale, 1e4 * scale, cfg.truncation_grid_points)
    candidates = [float(b) for b in grid] + [INF]
    logger.info(
        "minimizing %s bound for %s, n=%d over %d cut points",
        family,
        spec.describe(),
        n,
        len(candidates),
    )
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for b, report in zip(candidates, pool.map(evaluate, candidates)):
            evaluated[b] = report

    values = [value(b) for b in candidates]
    best = min(range(len(candidates)), key=lambda i: (values[i], candidates[i]))
    if best < len(grid) and math.isfinite(values[best]):
        lo = math.log(grid[max(best - 1, 0)])
        hi = math.log(grid[min(best + 1, len(grid) - 1)])
        optimize.minimize_scalar(
            lambda log_b: value(math.exp(log_b)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-6},
        )

    b_star = min(evaluated, key=lambda b: (value(b), b))
    report = evaluated[b_star]
    if report is None:
        logger.info("every cut point diverges; returning b=inf")
        return INF, _divergent_report(family, n, t)
    logger.info("best cut b=%g, bound=%g", b_star, report.value)
    return b_star, report


def student_stat_transform(T: float, n: int) -> float:
    """
    Student statistic from the self-normalized sum:
    ``t = sqrt((n - 1)/n) * T / sqrt(1 - T**2/n)``.

    ``|T| = sqrt(n)`` maps to an infinite ``t``.

    Examples
    --------
    >>> student_stat_transform(1.0, 2)
    1.0
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    root_n = math.sqrt(n)
    if abs(T) > root_n:
        raise DomainError(f"|T| must not exceed sqrt(n)={root_n}, got {T}")
    if abs(T) == root_n:
        return math.copysign(INF, T)
    return math.sqrt((n - 1) / n) * T / math.sqrt(1.0 - T * T / n)


def inverse_student_stat_transform(t: float, n: int) -> float:
    """Self-normalized sum from the Student statistic.

    ``T = t*sqrt(n/(n - 1 + t**2))``; infinite ``t`` maps to ``±sqrt(n)``.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if math.isinf(t):
        return math.copysign(math.sqrt(n), t)
    return t * math.sqrt(n / (n - 1 + t * t))


class Crossover(NamedTuple):
    """Asymmetry ``b`` where the theorem bound starts to lose, and ``(2b)**2``."""

    b: float
    n_min: float


def two_point_crossover(t: ConstantTriple) -> Crossover:
    """
    Smallest ``b >= 1`` at which Shao's two-point bound ``25*rho3/sqrt(n)``
    drops below the i.i.d.-form bound with triple ``t``.

    The comparison is free of ``n`` while ``b <= sqrt(n)/2``, hence the
    accompanying sample size ``(2b)**2``. Returns ``b = inf`` when the theorem
    bound never loses.
    """

    def excess(b: float) -> float:
        m = two_point_moments(b)
        assert m.rho3 is not None and m.rho4 is not None and m.rho6 is not None
        theorem = t.a3 * m.rho3 + t.a4 * m.rho4 + t.a6 * m.rho6
        return theorem - SHAO_C3 * m.rho3

    if excess(1.0) >= 0:
        return Crossover(1.0, 4.0)
    hi = 2.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            return Crossover(INF, INF)
    b = float(optimize.brentq(excess, hi / 2.0 if hi > 2.0 else 1.0, hi, xtol=1e-12))
    return Crossover(b, (2.0 * b) ** 2)
