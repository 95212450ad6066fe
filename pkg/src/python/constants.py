r"""
Closed-form case constants and their numerical optimization.

The bound :math:`|\Delta| \le A_3 r_3 + A_4 r_4 + A_6 r_6` is proved by
splitting into three cases (small n; large deviations; moderate deviations).
Each case yields coefficients :math:`A_{p,j}` that depend on seven free
parameters :math:`(\alpha, \varepsilon_4, \varepsilon_3, \varepsilon_2, \kappa,
\theta_3, \theta_4)`; the triple is :math:`A_p = \max_j A_{p,j}`. A weighted
maximum :math:`(w_3A_3)\vee(w_4A_4)\vee(w_6A_6)` has many local minima over the
parameter box, so :func:`optimize_constants` runs a deterministic multi-start
simplex search.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from decimal import Decimal
from fractions import Fraction
from typing import (
    ClassVar,
    Dict,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from scipy import optimize, special
from scipy.stats import qmc

from .config import Settings, get_settings
from .errors import ConfigurationError, ParameterRangeError
from .specfun import big_r, max_moment_density, psi_cantelli, psi_star
from .tables import (
    BE_IID,
    BE_NONIID,
    LOOSE_ENTRIES,
    PUBLISHED_ROWS,
    PublishedRow,
    ceil_to_published,
    published_row,
)

logger = logging.getLogger(__name__)

ADMITTED_BE_CONSTS = (BE_NONIID, BE_IID)

Weights = Tuple[float, float, float]

# (lower, upper, upper is inclusive); None means unbounded above
_RANGES: Dict[str, Tuple[float, Optional[float], bool]] = {
    "alpha": (0.0, 1.0, False),
    "eps4": (0.0, 0.5, True),
    "eps3": (0.0, None, False),
    "eps2": (0.0, 1.0, False),
    "kappa": (0.0, None, False),
    "theta3": (0.0, 1.0, False),
    "theta4": (0.0, None, False),
}


def check_be_const(be_const: float) -> float:
    """Return ``be_const`` if it is one of the two admitted Berry-Esseen constants."""
    for admitted in ADMITTED_BE_CONSTS:
        if math.isclose(be_const, admitted, rel_tol=0.0, abs_tol=1e-12):
            return admitted
    raise ConfigurationError(
        f"be_const must be one of {ADMITTED_BE_CONSTS}, got {be_const}"
    )


def theorem_for(be_const: float) -> str:
    return "iid" if check_be_const(be_const) == BE_IID else "noniid"


@dataclass(frozen=True)
class ParameterVector:
    """
    The seven free proof parameters.

    Ranges: ``alpha``, ``eps2``, ``theta3`` in (0, 1); ``eps4`` in (0, 1/2];
    ``eps3``, ``kappa``, ``theta4`` positive. Construction fails with
    :class:`ParameterRangeError` naming the first violated bound.
    """

    alpha: float
    eps4: float
    eps3: float
    eps2: float
    kappa: float
    theta3: float
    theta4: float

    NAMES: ClassVar[Tuple[str, ...]] = tuple(_RANGES)

    def __post_init__(self) -> None:
        for name in self.NAMES:
            value = getattr(self, name)
            lo, hi, closed = _RANGES[name]
            if not math.isfinite(value) or value <= lo:
                raise ParameterRangeError(name, value, f"{name} > {lo:g}")
            if hi is not None and (value > hi or (value == hi and not closed)):
                op = "<=" if closed else "<"
                raise ParameterRangeError(name, value, f"{name} {op} {hi:g}")

    @classmethod
    def from_fractions(cls, values: Sequence[Fraction]) -> "ParameterVector":
        return cls(*(float(v) for v in values))

    @classmethod
    def from_row(cls, row: PublishedRow) -> "ParameterVector":
        return cls.from_fractions(row.fractions)

    def as_tuple(self) -> Tuple[float, ...]:
        return astuple(self)

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DerivedParams:
    r"""
    Quantities derived from a :class:`ParameterVector` used by the case formulas.

    - ``teps4`` :math:`= \varepsilon_4/\kappa`, ``teps2`` :math:`= \varepsilon_2(2 - \varepsilon_2)`
    - ``ttheta3``, ``ttheta4`` :math:`= (1 - \varepsilon_2)\theta_j`
    - ``rho_star`` :math:`= 1/((1 - \theta_3) + \sqrt{1 - \theta_3})`
    - ``sigma_star`` :math:`= \sqrt{1 + \theta_3 + \theta_4^2/4}`
    - ``rho_ss2``, ``rho_ss3`` :math:`= 1/(\sigma_*^{1-j} + \sigma_*^{2-j})`
    - ``s2``, ``s3`` :math:`= \sup_v v^j\varphi(v)`; ``r_eps4`` :math:`= R(\varepsilon_4)`
    """

    teps4: float
    teps2: float
    ttheta3: float
    ttheta4: float
    rho_star: float
    rho_ss2: float
    rho_ss3: float
    sigma_star: float
    s2: float
    s3: float
    r_eps4: float
    be_const: float

    @classmethod
    def from_parameters(cls, p: ParameterVector, be_const: float) -> "DerivedParams":
        be = check_be_const(be_const)
        root = math.sqrt(1.0 - p.theta3)
        sigma_star = math.sqrt(1.0 + p.theta3 + 0.25 * p.theta4 * p.theta4)
        return cls(
            teps4=p.eps4 / p.kappa,
            teps2=p.eps2 * (2.0 - p.eps2),
            ttheta3=(1.0 - p.eps2) * p.theta3,
            ttheta4=(1.0 - p.eps2) * p.theta4,
            rho_star=1.0 / ((1.0 - p.theta3) + root),
            rho_ss2=1.0 / (1.0 / sigma_star + 1.0),
            rho_ss3=1.0 / (sigma_star**-2 + 1.0 / sigma_star),
            sigma_star=sigma_star,
            s2=max_moment_density(2),
            s3=max_moment_density(3),
            r_eps4=big_r(p.eps4),
            be_const=be,
        )


class CaseConstants(NamedTuple):
    """Coefficients of r3, r4, r6 contributed by one case."""

    a3: float
    a4: float
    a6: float


@dataclass(frozen=True)
class ConstantTriple:
    """
    Coefficients (A3, A4, A6) of a bound.

    ``cases`` keeps the three per-case contributions when the triple was
    computed; published triples carry ``cases=None`` and a ``name``.
    ``theorem`` is ``"noniid"`` or ``"iid"`` and decides which bound form the
    triple is applied with.
    """

    a3: float
    a4: float
    a6: float
    cases: Optional[Tuple[CaseConstants, CaseConstants, CaseConstants]] = None
    theorem: str = "noniid"
    name: Optional[str] = None

    @classmethod
    def from_cases(
        cls,
        cases: Tuple[CaseConstants, CaseConstants, CaseConstants],
        theorem: str = "noniid",
    ) -> "ConstantTriple":
        a3, a4, a6 = (max(column) for column in zip(*cases))
        return cls(a3, a4, a6, cases=cases, theorem=theorem)

    @classmethod
    def published(cls, name: str) -> "ConstantTriple":
        """The triple exactly as printed for the published row ``name``."""
        row = published_row(name)
        a3, a4, a6 = row.triple_values
        return cls(a3, a4, a6, theorem=row.theorem, name=name)

    @classmethod
    def custom(
        cls, a3: float, a4: float, a6: float, theorem: str = "noniid"
    ) -> "ConstantTriple":
        if min(a3, a4, a6) < 0:
            raise ConfigurationError(
                f"constants must be nonnegative: {a3}, {a4}, {a6}"
            )
        if theorem not in ("noniid", "iid"):
            raise ConfigurationError(f"unknown theorem form {theorem!r}")
        return cls(a3, a4, a6, theorem=theorem, name="custom")

    @property
    def values(self) -> Tuple[float, float, float]:
        return self.a3, self.a4, self.a6

    @property
    def breakdown(self) -> Dict[str, float]:
        """Per-case values keyed ``"A31"`` ... ``"A63"``, empty when published."""
        if self.cases is None:
            return {}
        out = {}
        for p, column in zip((3, 4, 6), zip(*self.cases)):
            for j, value in enumerate(column, start=1):
                out[f"A{p}{j}"] = value
        return out

    @property
    def attained_by(self) -> Tuple[int, int, int]:
        """Case number (1-3) attaining each maximum; first case wins ties."""
        if self.cases is None:
            return (0, 0, 0)
        picks = []
        for column in zip(*self.cases):
            picks.append(1 + max(range(3), key=lambda j: (column[j], -j)))
        return picks[0], picks[1], picks[2]

    def label(self) -> str:
        return self.name if self.name is not None else "computed"


def case1_constants(p: ParameterVector) -> CaseConstants:
    """Small-n case: (1/eps3, kappa/eps4, 0)."""
    return CaseConstants(1.0 / p.eps3, p.kappa / p.eps4, 0.0)


def case2_constants(
    p: ParameterVector, derived: Optional[DerivedParams] = None
) -> CaseConstants:
    r"""
    Large-deviation case.

    .. math::

        A_{3,2} = \psi(\varepsilon_3, \tilde\theta_3) \vee \Psi^*(\theta_3/\varepsilon_3)/\theta_3

        A_{4,2} = [\psi(\tilde\varepsilon_4, \tilde\theta_4) + \psi(\tilde\varepsilon_4, \tilde\varepsilon_2)]
                  \vee \Psi^*(\theta_4/\tilde\varepsilon_4)/\theta_4

    and :math:`A_{6,2} = 0`.
    """
    d = derived if derived is not None else DerivedParams.from_parameters(p, BE_NONIID)
    a3 = max(
        psi_cantelli(p.eps3, d.ttheta3),
        psi_star(p.theta3 / p.eps3) / p.theta3,
    )
    a4 = max(
        psi_cantelli(d.teps4, d.ttheta4) + psi_cantelli(d.teps4, d.teps2),
        psi_star(p.theta4 / d.teps4) / p.theta4,
    )
    return CaseConstants(a3, a4, 0.0)


def case3_constants(
    p: ParameterVector, be_const: float, derived: Optional[DerivedParams] = None
) -> CaseConstants:
    r"""
    Moderate-deviation case.

    .. math::

        A_{3,3} = \frac{c_{BE}}{(1 - \theta_3)^{3/2}(1 - \alpha)^2}
                + \frac{s_2(\rho_* \vee \rho_{**,2})}{1 - \varepsilon_4}

        A_{4,3} = \frac{1 + 4\kappa^2}{8\kappa}
                + \frac{\tilde\varepsilon_4 s_3(\rho_* \vee \rho_{**,3})}{4(1 - \varepsilon_4)^2}
                + R(\varepsilon_4)\kappa

        A_{6,3} = \frac{c_{BE}/8}{\alpha^2}\Big(\frac{\theta_3^2}{1 - \theta_3}\Big)^{3/2}

    where :math:`c_{BE}` is ``be_const`` (0.56 or 0.4785); with 0.56 the
    leading factor of :math:`A_{6,3}` is 0.07.

    Raises
    ------
    ConfigurationError
        If ``be_const`` is not an admitted constant.
    """
    d = (
        derived
        if derived is not None and derived.be_const == check_be_const(be_const)
        else DerivedParams.from_parameters(p, be_const)
    )
    be = d.be_const
    one_m_theta3 = 1.0 - p.theta3
    a3 = be / (one_m_theta3**1.5 * (1.0 - p.alpha) ** 2) + d.s2 * max(
        d.rho_star, d.rho_ss2
    ) / (1.0 - p.eps4)
    a4 = (
        (1.0 + 4.0 * p.kappa * p.kappa) / (8.0 * p.kappa)
        + d.teps4 * d.s3 * max(d.rho_star, d.rho_ss3) / (4.0 * (1.0 - p.eps4) ** 2)
        + d.r_eps4 * p.kappa
    )
    a6 = (be / 8.0) / (p.alpha * p.alpha) * (p.theta3**2 / one_m_theta3) ** 1.5
    return CaseConstants(a3, a4, a6)


def combined_constants(p: ParameterVector, be_const: float) -> ConstantTriple:
    """Componentwise maximum over the three cases, with the breakdown kept."""
    d = DerivedParams.from_parameters(p, be_const)
    cases = (
        case1_constants(p),
        case2_constants(p, d),
        case3_constants(p, be_const, d),
    )
    return ConstantTriple.from_cases(cases, theorem=theorem_for(be_const))


def objective(p: ParameterVector, weights: Weights, be_const: float) -> float:
    """Weighted maximum ``max(w3*A3, w4*A4, w6*A6)``."""
    t = combined_constants(p, be_const)
    return max(weights[0] * t.a3, weights[1] * t.a4, weights[2] * t.a6)


class ConstantOptimizer:
    """
    Multi-start downhill-simplex search over the parameter box.

    Bounded parameters are mapped to the real line through a logit, positive
    ones through a log, so every simplex vertex decodes to an admissible
    vector at least ``settings.boundary_margin`` inside the box.

    Parameters
    ----------
    weights : (float, float, float)
        Positive weights (w3, w4, w6).
    be_const : float
        0.56 or 0.4785.
    settings : Settings, optional
        Budget, thread count and margin; defaults to :func:`get_settings`.
    """

    DIM = 7
    _PENALTY = 1e300

    def __init__(
        self,
        weights: Weights,
        be_const: float,
        settings: Optional[Settings] = None,
    ) -> None:
        if len(weights) != 3 or not all(w > 0 and math.isfinite(w) for w in weights):
            raise ConfigurationError(
                f"weights must be three positive reals, got {weights}"
            )
        w3, w4, w6 = (float(w) for w in weights)
        self.weights: Weights = (w3, w4, w6)
        self.be_const = check_be_const(be_const)
        self.settings = settings if settings is not None else get_settings()
        m = self.settings.boundary_margin
        self._lo = np.empty(self.DIM)
        self._hi = np.empty(self.DIM)
        self._bounded = np.zeros(self.DIM, dtype=bool)
        for i, name in enumerate(ParameterVector.NAMES):
            lo, hi, _ = _RANGES[name]
            self._lo[i] = lo + m
            self._bounded[i] = hi is not None
            self._hi[i] = (hi - m) if hi is not None else 1.0 / m

    def project(self, p: ParameterVector) -> ParameterVector:
        """Clip ``p`` into the inner box."""
        x = np.clip(np.asarray(p.as_tuple()), self._lo, self._hi)
        return ParameterVector(*(float(v) for v in x))

    def encode(self, p: ParameterVector) -> np.ndarray:
        x = np.asarray(self.project(p).as_tuple())
        y = np.empty(self.DIM)
        b = self._bounded
        u = (x[b] - self._lo[b]) / (self._hi[b] - self._lo[b])
        y[b] = special.logit(np.clip(u, 1e-15, 1.0 - 1e-15))
        y[~b] = np.log(x[~b])
        return y

    def decode(self, y: np.ndarray) -> ParameterVector:
        x = np.empty(self.DIM)
        b = self._bounded
        x[b] = self._lo[b] + (self._hi[b] - self._lo[b]) * special.expit(y[b])
        x[~b] = np.exp(np.clip(y[~b], -700.0, 700.0))
        x = np.clip(x, self._lo, self._hi)
        return ParameterVector(*(float(v) for v in x))

    def evaluate(self, p: ParameterVector) -> float:
        value = objective(p, self.weights, self.be_const)
        return value if math.isfinite(value) else self._PENALTY

    def _local_search(
        self, start: ParameterVector, maxfev: int
    ) -> Tuple[float, ParameterVector]:
        def fun(y: np.ndarray) -> float:
            return self.evaluate(self.decode(y))

        result = optimize.minimize(
            fun,
            self.encode(start),
            method="Nelder-Mead",
            options={
                "maxfev": maxfev,
                "xatol": 1e-10,
                "fatol": 1e-13,
                "adaptive": True,
            },
        )
        best = self.decode(result.x)
        value = self.evaluate(best)
        logger.debug(
            "local search from %s: %.10g after %d evaluations",
            start.as_tuple(),
            value,
            result.nfev,
        )
        return value, best

    def run(
        self, seeds: Sequence[ParameterVector], budget: Optional[int] = None
    ) -> Tuple[ParameterVector, ConstantTriple]:
        """
        Search from ``seeds`` and return the best vector with its triple.

        Seeds are projected into the inner box and always evaluated; they do
        not count against ``budget``. The budget is divided among the
        best-ranked starts so each simplex gets at least ``DIM + 2``
        evaluations. Candidates are ranked by (objective, parameters), which
        makes the answer independent of thread scheduling.

        Raises
        ------
        ConfigurationError
            If ``seeds`` is empty.
        """
        if not seeds:
            raise ConfigurationError("optimize_constants needs at least one seed")
        budget = self.settings.optimizer_budget if budget is None else budget
        starts = [self.project(s) for s in seeds]
        workers = min(self.settings.threads, len(starts))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(self.evaluate, starts))
        candidates = sorted(zip(values, starts), key=_rank)

        per_start_min = self.DIM + 2
        n_searches = min(len(candidates), max(budget, 0) // per_start_min)
        logger.info(
            "optimizing constants: weights=%s be=%g seeds=%d searches=%d budget=%d",
            self.weights,
            self.be_const,
            len(starts),
            n_searches,
            budget,
        )
        if n_searches > 0:
            maxfev = budget // n_searches
            chosen = [p for _, p in candidates[:n_searches]]
            with ThreadPoolExecutor(max_workers=min(workers, n_searches)) as pool:
                found = list(pool.map(lambda s: self._local_search(s, maxfev), chosen))
            candidates = sorted(candidates + found, key=_rank)

        value, best = candidates[0]
        logger.info("best objective %.10g", value)
        return best, combined_constants(best, self.be_const)


def _rank(candidate: Tuple[float, ParameterVector]) -> Tuple[float, Tuple[float, ...]]:
    return candidate[0], candidate[1].as_tuple()


def default_seeds(settings: Optional[Settings] = None) -> List[ParameterVector]:
    """
    Published parameter rows followed by Sobol points.

    The Sobol points cover the box linearly for bounded parameters and
    log-uniformly over [1e-7, 1e2] for the unbounded ones.
    """
    cfg = settings if settings is not None else get_settings()
    seeds: List[ParameterVector] = []
    seen = set()
    for row in PUBLISHED_ROWS:
        if row.fractions not in seen:
            seen.add(row.fractions)
            seeds.append(ParameterVector.from_row(row))
    count = cfg.quasi_random_seeds
    if count <= 0:
        return seeds
    sobol = qmc.Sobol(d=ConstantOptimizer.DIM, scramble=False)
    points = sobol.random_base2(m=max(0, math.ceil(math.log2(count))))[:count]
    margin = cfg.boundary_margin
    log_lo, log_hi = math.log(1e-7), math.log(1e2)
    for u in points:
        values = []
        for ui, name in zip(u, ParameterVector.NAMES):
            lo, hi, _ = _RANGES[name]
            if hi is None:
                values.append(math.exp(log_lo + ui * (log_hi - log_lo)))
            else:
                values.append(min(max(lo + ui * (hi - lo), lo + margin), hi - margin))
        seeds.append(ParameterVector(*values))
    return seeds


def optimize_constants(
    weights: Weights,
    be_const: float,
    seeds: Optional[Sequence[ParameterVector]] = None,
    budget: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> Tuple[ParameterVector, ConstantTriple]:
    """
    Minimize ``max(w3*A3, w4*A4, w6*A6)`` over the parameter box.

    ``seeds`` defaults to :func:`default_seeds`. The result is deterministic
    given seeds and budget and never worse than the best seed.

    Examples
    --------
    >>> row = ParameterVector.from_row(published_row("t1"))
    >>> p, t = optimize_constants((1, 1, 1), 0.56, seeds=[row], budget=1)
    >>> p == row
    True
    """
    optimizer = ConstantOptimizer(weights, be_const, settings)
    if seeds is None:
        seeds = default_seeds(optimizer.settings)
    return optimizer.run(seeds, budget)


class RowCheck(NamedTuple):
    """Recomputed triple of a published row next to the printed one."""

    name: str
    computed: ConstantTriple
    ceiled: Tuple[Decimal, Decimal, Decimal]
    matches: Tuple[bool, bool, bool]

    @property
    def passed(self) -> bool:
        return all(self.matches)


def published_entry_matches(value: float, shown: str, rel_tol: float = 0.0) -> bool:
    """
    Whether a computed constant reproduces its printed value.

    The ceiling of ``value`` at the printed precision must equal ``shown``:
    the value lies at most one printed unit below it and never above it.
    A positive ``rel_tol`` also accepts values within that relative distance.

    Examples
    --------
    >>> published_entry_matches(1.6095, "1.61")
    True
    >>> published_entry_matches(1.6101, "1.61")
    False
    """
    if ceil_to_published(value, shown) == Decimal(shown):
        return True
    return rel_tol > 0.0 and math.isclose(value, float(shown), rel_tol=rel_tol)


def check_published_row(name: str, rel_tol: float = 0.005) -> RowCheck:
    """
    Recompute row ``name`` from its parameters and compare with the print.

    Every entry must pass the ceiling rule of :func:`published_entry_matches`.
    Only the entries in ``LOOSE_ENTRIES`` (large constants printed with few
    significant digits) are also accepted within ``rel_tol``.
    """
    row = published_row(name)
    computed = combined_constants(ParameterVector.from_row(row), row.be_const)
    ceiled = tuple(
        ceil_to_published(value, shown)
        for value, shown in zip(computed.values, row.triple)
    )
    matches = tuple(
        published_entry_matches(
            value, shown, rel_tol if (name, i) in LOOSE_ENTRIES else 0.0
        )
        for i, (value, shown) in enumerate(zip(computed.values, row.triple))
    )
    return RowCheck(
        name,
        computed,
        (ceiled[0], ceiled[1], ceiled[2]),
        (matches[0], matches[1], matches[2]),
    )
