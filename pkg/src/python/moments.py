r"""
Moment functionals of zero-mean input laws.

For independent zero-mean :math:`X_1, \ldots, X_n` the bounds use

.. math::

    \beta_p = \sum E|X_i|^p, \qquad
    \tilde\beta_p = \sum E|X_i^2 - E X_i^2|^{p/2},

reduced after normalizing :math:`\beta_2 = 1` to
:math:`r_3 = \beta_3`, :math:`r_4 = \tilde\beta_4^{1/2}`,
:math:`r_6 = \tilde\beta_6/\beta_3^3`. For i.i.d. unit-variance variables the
per-variable ratios are

.. math::

    \rho_3 = E|X|^3, \qquad \rho_4 = \sqrt{E(X^2 - 1)^2}, \qquad
    \rho_6 = E|X^2 - 1|^3 / E|X|^3.

Laws are the centered two-point law on :math:`\{-1/b, b\}`, Student's t with
``d`` degrees of freedom, the centered Pareto law with density
:math:`f_s(x) = s(x + s/(s-1))^{-s-1}` on :math:`(-1/(s-1), \infty)`, an
empirical sample, or a bare moment summary. A spec may carry a truncation
window :math:`(-a, b)`; the truncated variable :math:`X 1\{-a < X < b\}` keeps
the removed mass as an atom at zero.
"""

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .config import Settings, get_settings
from .errors import (
    ConfigurationError,
    DegenerateMomentsError,
    DegenerateSampleError,
    DomainError,
    InfeasibleTruncationError,
    MomentDivergenceError,
    SpecSyntaxError,
    TruncationContractError,
    UnsupportedSpecError,
)
from .specfun import student_cdf

logger = logging.getLogger(__name__)

INF = math.inf

SPEC_GRAMMAR = """\
distribution spec grammar:
  two-point:b=<real>                 centered two-point law on {-1/b, b}, b >= 1
  student:d=<real>                   Student's t with d > 0 degrees of freedom
  pareto:s=<real>                    centered Pareto law, s > 1
  sample:<path>                      one real per line; '#' starts a comment
  moments:rho3=<r>,rho4=<r>,rho6=<r> i.i.d. moment ratios of a unit-variance law
optional suffix:
  |trunc:b=<real>                    zero-mean truncation, a solved from b
  |trunc:a=<real>,b=<real>           explicit window (-a, b)
"""

_BRENT_MAXITER = 200
_BRACKET_EPS = 1e-12
_MEAN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MomentSummary:
    """
    Moment functionals of a sum, with the reduced quantities r3, r4, r6.

    Build with :meth:`from_sums` for general independent summands or
    :meth:`from_iid` for i.i.d. unit-variance summands; the latter also fills
    ``n`` and the per-variable ``rho3``, ``rho4``, ``rho6``.
    """

    beta2: float
    beta3: float
    tbeta4: float
    tbeta6: float
    r3: float
    r4: float
    r6: float
    n: Optional[int] = None
    rho3: Optional[float] = None
    rho4: Optional[float] = None
    rho6: Optional[float] = None

    @classmethod
    def from_sums(
        cls,
        beta2: float,
        beta3: float,
        tbeta4: float,
        tbeta6: float,
        n: Optional[int] = None,
    ) -> "MomentSummary":
        """
        Reduce raw sums to r3, r4, r6 at beta2 = 1.

        The reduction is invariant under rescaling every summand by the same
        factor.

        Raises
        ------
        DegenerateMomentsError
            If ``beta2`` or ``beta3`` is zero.
        DomainError
            If any input is negative or not finite.
        """
        raw = (beta2, beta3, tbeta4, tbeta6)
        if any(not math.isfinite(v) or v < 0 for v in raw):
            raise DomainError(f"moment sums must be finite and nonnegative: {raw}")
        if beta2 <= 0 or beta3 <= 0:
            raise DegenerateMomentsError(
                f"beta2 and beta3 must be positive, got {beta2}, {beta3}"
            )
        return cls(
            beta2=beta2,
            beta3=beta3,
            tbeta4=tbeta4,
            tbeta6=tbeta6,
            r3=beta3 / beta2**1.5,
            r4=math.sqrt(tbeta4) / beta2,
            r6=tbeta6 * beta2**1.5 / beta3**3,
            n=n,
        )

    @classmethod
    def from_iid(
        cls, rho3: float, rho4: float, rho6: float, n: int = 1
    ) -> "MomentSummary":
        """Summary of n i.i.d. unit-variance summands with the given ratios."""
        if n < 1:
            raise DomainError(f"n must be at least 1, got {n}")
        base = cls.from_sums(n, n * rho3, n * rho4 * rho4, n * rho6 * rho3, n)
        return replace(base, rho3=rho3, rho4=rho4, rho6=rho6)

    @property
    def is_iid(self) -> bool:
        return self.rho3 is not None

    def with_n(self, n: int) -> "MomentSummary":
        """The same i.i.d. ratios summed over ``n`` summands."""
        if self.rho3 is None or self.rho4 is None or self.rho6 is None:
            raise ConfigurationError("with_n needs an i.i.d. summary")
        return MomentSummary.from_iid(self.rho3, self.rho4, self.rho6, n)


@dataclass(frozen=True)
class GammaFunctionals:
    """Second- and third-moment functionals split at the threshold sqrt(beta2)/2."""

    gamma2: float
    gamma3: float


class _Law:
    """Zero-mean law used internally for expectations and sampling."""

    name = "law"
    symmetric = False
    lower = -INF
    upper = INF
    # E|X|^p is finite exactly for p < tail_order on an unbounded heavy side
    tail_order = INF
    heavy_left = False
    heavy_right = False

    def expect(
        self,
        func: Callable[[float], float],
        lo: float,
        hi: float,
        breaks: Iterable[float] = (),
        closed: bool = False,
    ) -> float:
        raise NotImplementedError

    def outside(self, a: float, b: float) -> float:
        """P(X <= -a) + P(X >= b)."""
        raise NotImplementedError

    def partial_mean(self, lo: float, hi: float) -> float:
        return self.expect(lambda x: x, lo, hi, (0.0,))

    def ppf(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    def require(self, order: float, lo: float, hi: float) -> None:
        """Raise unless E|X|^order is finite over (lo, hi)."""
        unbounded_heavy = (self.heavy_left and lo == -INF) or (
            self.heavy_right and hi == INF
        )
        if unbounded_heavy and order >= self.tail_order:
            raise MomentDivergenceError(order, self.name)

    def left_cut(self, b: float) -> float:
        """Left truncation point a making X 1{-a < X < b} zero-mean."""
        raise NotImplementedError


class _DiscreteLaw(_Law):
    def __init__(self, name: str, atoms: Sequence[float], weights: Sequence[float]):
        self.name = name
        self.atoms = np.asarray(atoms, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.lower = float(self.atoms.min())
        self.upper = float(self.atoms.max())
        order = np.argsort(self.atoms)
        self._sorted = self.atoms[order]
        self._cum = np.cumsum(self.weights[order])
        mirrored = -self._sorted[::-1]
        self.symmetric = bool(
            np.allclose(self._sorted, mirrored, rtol=0.0, atol=1e-12)
            and np.allclose(
                self.weights[order], self.weights[order][::-1], rtol=0.0, atol=1e-12
            )
        )

    def expect(
        self,
        func: Callable[[float], float],
        lo: float,
        hi: float,
        breaks: Iterable[float] = (),
        closed: bool = False,
    ) -> float:
        x = self.atoms
        mask = (x >= lo) & (x <= hi) if closed else (x > lo) & (x < hi)
        pairs = zip(x[mask], self.weights[mask])
        return float(sum(w * func(float(v)) for v, w in pairs))

    def outside(self, a: float, b: float) -> float:
        mask = (self.atoms <= -a) | (self.atoms >= b)
        return float(self.weights[mask].sum())

    def ppf(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._cum, u, side="right")
        return self._sorted[np.minimum(idx, self._sorted.size - 1)]

    @property
    def variance(self) -> float:
        return float(np.dot(self.weights, self.atoms**2))

    def left_cut(self, b: float) -> float:
        if self.symmetric:
            return b
        if b > self.upper:
            return INF
        raise InfeasibleTruncationError(
            f"{self.name}: cutting at b={b} removes an atom of a discrete "
            f"asymmetric law; no zero-mean window exists"
        )


class _ContinuousLaw(_Law):
    def __init__(self, settings: Settings) -> None:
        self._epsrel = settings.quad_epsrel
        self._limit = settings.quad_limit

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def expect(
        self,
        func: Callable[[float], float],
        lo: float,
        hi: float,
        breaks: Iterable[float] = (),
        closed: bool = False,
    ) -> float:
        lo, hi = max(lo, self.lower), min(hi, self.upper)
        if not lo < hi:
            return 0.0
        points = sorted({lo, hi, *(p for p in breaks if lo < p < hi)})
        total = 0.0
        for left, right in zip(points[:-1], points[1:]):
            value, _ = integrate.quad(
                lambda x: func(x) * self.pdf(x),
                left,
                right,
                epsabs=1e-15,
                epsrel=self._epsrel,
                limit=self._limit,
            )
            total += value
        return total

    def left_cut(self, b: float) -> float:
        if self.symmetric:
            return b
        if b == INF:
            return INF
        a_hi = -self.lower - _BRACKET_EPS
        a_lo = _BRACKET_EPS

        def mean(a: float) -> float:
            return self.partial_mean(-a, b)

        f_lo, f_hi = mean(a_lo), mean(a_hi)
        if f_lo == 0.0:
            return a_lo
        if f_lo * f_hi > 0:
            raise InfeasibleTruncationError(
                f"{self.name}: no zero-mean window with b={b}"
            )
        return float(
            optimize.brentq(mean, a_lo, a_hi, xtol=1e-15, maxiter=_BRENT_MAXITER)
        )


class _StudentLaw(_ContinuousLaw):
    symmetric = True
    heavy_left = True
    heavy_right = True

    def __init__(self, d: float, settings: Settings) -> None:
        super().__init__(settings)
        self.d = d
        self.name = f"student(d={d:g})"
        self.tail_order = d
        self._log_norm = (
            special.gammaln(0.5 * (d + 1.0))
            - special.gammaln(0.5 * d)
            - 0.5 * math.log(d * math.pi)
        )
        self._power = 0.5 * (d + 1.0)

    def pdf(self, x: float) -> float:
        return math.exp(self._log_norm - self._power * math.log1p(x * x / self.d))

    def outside(self, a: float, b: float) -> float:
        return student_cdf(-a, self.d) + student_cdf(-b, self.d)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return special.stdtrit(self.d, u)

    @property
    def variance(self) -> float:
        return self.d / (self.d - 2.0) if self.d > 2.0 else INF


class _ParetoLaw(_ContinuousLaw):
    heavy_right = True

    def __init__(self, s: float, settings: Settings) -> None:
        super().__init__(settings)
        self.s = s
        self.shift = s / (s - 1.0)
        self.name = f"pareto(s={s:g})"
        self.tail_order = s
        self.lower = -1.0 / (s - 1.0)

    def pdf(self, x: float) -> float:
        y = x + self.shift
        return self.s * y ** (-self.s - 1.0) if y > 1.0 else 0.0

    def survival(self, x: float) -> float:
        return (x + self.shift) ** (-self.s) if x > self.lower else 1.0

    def outside(self, a: float, b: float) -> float:
        left = 1.0 - self.survival(-a) if -a > self.lower else 0.0
        right = self.survival(b) if b < INF else 0.0
        return left + right

    def _mean_antiderivative(self, x: float) -> float:
        # d/dx of c*y^-s*(1 - y) is x*f_s(x), with y = x + c
        if x == INF:
            return 0.0
        y = max(x + self.shift, 1.0)
        return self.shift * y ** (-self.s) * (1.0 - y)

    def partial_mean(self, lo: float, hi: float) -> float:
        lo, hi = max(lo, self.lower), hi
        if not lo < hi:
            return 0.0
        return self._mean_antiderivative(hi) - self._mean_antiderivative(lo)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return np.power(1.0 - u, -1.0 / self.s) - self.shift

    @property
    def variance(self) -> float:
        s = self.s
        return s / ((s - 2.0) * (s - 1.0) ** 2) if s > 2.0 else INF


@dataclass(frozen=True)
class DistributionSpec:
    """
    A zero-mean input law, optionally truncated to the window (-a, b).

    Use the constructors :meth:`two_point`, :meth:`student`, :meth:`pareto`,
    :meth:`sample` and :meth:`from_moments`, or :func:`parse_distribution_spec`.
    """

    kind: str
    param: Optional[float] = None
    values: Optional[Tuple[float, ...]] = None
    summary: Optional[MomentSummary] = None
    window: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if self.kind == "two_point":
            if self.param is None or not self.param >= 1.0:
                raise DomainError(f"two-point law needs b >= 1, got {self.param}")
        elif self.kind == "student":
            if self.param is None or not self.param > 0.0:
                raise DomainError(f"student law needs d > 0, got {self.param}")
        elif self.kind == "pareto":
            if self.param is None or not self.param > 1.0:
                raise DomainError(f"pareto law needs s > 1, got {self.param}")
        elif self.kind == "sample":
            if not self.values:
                raise ConfigurationError("sample spec needs at least one value")
        elif self.kind == "moments":
            if self.summary is None:
                raise ConfigurationError("moments spec needs a MomentSummary")
        else:
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        if self.window is not None:
            a, b = self.window
            if not (a > 0 and b > 0):
                raise DomainError(f"truncation window needs a, b > 0, got {a}, {b}")

    @classmethod
    def two_point(cls, b: float) -> "DistributionSpec":
        return cls("two_point", param=float(b))

    @classmethod
    def student(cls, d: float) -> "DistributionSpec":
        return cls("student", param=float(d))

    @classmethod
    def pareto(cls, s: float) -> "DistributionSpec":
        return cls("pareto", param=float(s))

    @classmethod
    def sample(cls, values: Iterable[float]) -> "DistributionSpec":
        """Empirical law of ``values``, shifted to mean zero."""
        arr = np.asarray(list(values), dtype=float)
        if arr.size == 0:
            raise ConfigurationError("sample spec needs at least one value")
        return cls("sample", values=tuple(float(v) for v in arr - arr.mean()))

    @classmethod
    def from_moments(cls, summary: MomentSummary) -> "DistributionSpec":
        return cls("moments", summary=summary)

    def truncated(self, a: float, b: float) -> "DistributionSpec":
        return replace(self, window=(float(a), float(b)))

    def untruncated(self) -> "DistributionSpec":
        return replace(self, window=None)

    @property
    def is_truncated(self) -> bool:
        return self.window is not None and self.window != (INF, INF)

    def law(self, settings: Optional[Settings] = None) -> _Law:
        """The underlying (untruncated) law."""
        cfg = settings if settings is not None else get_settings()
        if self.kind == "two_point":
            b = float(self.param)  # type: ignore[arg-type]
            upper_weight = 1.0 / (1.0 + b * b)
            return _DiscreteLaw(
                f"two-point(b={b:g})", (-1.0 / b, b), (1.0 - upper_weight, upper_weight)
            )
        if self.kind == "student":
            return _StudentLaw(float(self.param), cfg)  # type: ignore[arg-type]
        if self.kind == "pareto":
            return _ParetoLaw(float(self.param), cfg)  # type: ignore[arg-type]
        if self.kind == "sample":
            atoms, counts = np.unique(np.asarray(self.values), return_counts=True)
            return _DiscreteLaw("sample", atoms, counts / counts.sum())
        raise UnsupportedSpecError(
            "a moments-only spec has no distribution to integrate or sample"
        )

    def describe(self) -> str:
        """Canonical spec string (samples are abbreviated)."""
        if self.kind == "two_point":
            text = f"two-point:b={self.param:g}"
        elif self.kind == "student":
            text = f"student:d={self.param:g}"
        elif self.kind == "pareto":
            text = f"pareto:s={self.param:g}"
        elif self.kind == "sample":
            text = f"sample:<{len(self.values or ())} values>"
        else:
            m = self.summary
            assert m is not None
            text = f"moments:rho3={m.rho3:g},rho4={m.rho4:g},rho6={m.rho6:g}"
        if self.window is not None:
            text += f"|trunc:a={self.window[0]:g},b={self.window[1]:g}"
        return text

    def draw(
        self, generator: np.random.Generator, shape: Tuple[int, int]
    ) -> np.ndarray:
        """
        Draw an i.i.d. matrix by inverse-CDF sampling; truncation zeroes values
        outside the window.
        """
        law = self.law()
        x = law.ppf(generator.random(shape))
        if self.window is not None:
            a, b = self.window
            x = np.where((x > -a) & (x < b), x, 0.0)
        return x


def two_point_moments(b: float) -> MomentSummary:
    r"""
    Closed-form ratios of the centered unit-variance two-point law on {-1/b, b}.

    .. math::

        \rho_3 = \frac{b^4 + 1}{b(b^2 + 1)}, \qquad \rho_4 = b - 1/b,
        \qquad \rho_6 = (b - 1/b)^3

    P(X = b) = 1/(1 + b^2).

    Raises
    ------
    DomainError
        If ``b < 1``; pass ``1/b`` instead.

    Examples
    --------
    >>> m = two_point_moments(2.0)
    >>> round(m.rho3, 12), round(m.rho4, 12), round(m.rho6, 12)
    (1.7, 1.5, 3.375)
    """
    if not b >= 1.0:
        raise DomainError(f"two_point_moments needs b >= 1, got {b}")
    gap = b - 1.0 / b
    return MomentSummary.from_iid((b**4 + 1.0) / (b * (b * b + 1.0)), gap, gap**3)


def _summarize(law: _Law, a: float, b: float) -> Tuple[MomentSummary, float]:
    lo, hi = -a, b
    for order in (2.0, 3.0, 4.0, 6.0):
        law.require(order, lo, hi)
    m2 = law.expect(lambda x: x * x, lo, hi, (0.0,))
    if not m2 > 0:
        raise DegenerateMomentsError(f"{law.name}: zero variance on ({lo}, {hi})")
    sigma = math.sqrt(m2)
    breaks = (-sigma, 0.0, sigma)
    m3 = law.expect(lambda x: abs(x) ** 3, lo, hi, breaks)
    removed = law.outside(a, b)
    # the atom at zero sits at distance 1 from E X^2 after normalization
    q2 = law.expect(lambda x: (x * x / m2 - 1.0) ** 2, lo, hi, breaks) + removed
    q3 = law.expect(lambda x: abs(x * x / m2 - 1.0) ** 3, lo, hi, breaks) + removed
    rho3 = m3 / sigma**3
    summary = MomentSummary.from_iid(rho3, math.sqrt(q2), q3 / rho3)
    return summary, 1.0 - removed


def analytic_moments(
    spec: DistributionSpec, settings: Optional[Settings] = None
) -> MomentSummary:
    """
    rho3, rho4, rho6 of the variance-normalized untruncated law.

    Student and Pareto moments come from adaptive Gauss-Kronrod quadrature
    (QUADPACK, infinite ranges mapped to finite ones), two-point moments from
    closed forms, samples from plug-in estimates.

    Raises
    ------
    MomentDivergenceError
        If a required moment is infinite; ``order`` is the smallest failing one.
    ConfigurationError
        If ``spec`` is truncated.
    """
    if spec.window is not None:
        raise ConfigurationError("analytic_moments needs an untruncated spec")
    if spec.kind == "two_point":
        return two_point_moments(float(spec.param))  # type: ignore[arg-type]
    if spec.kind == "sample":
        return empirical_moments(spec.values or ())
    if spec.kind == "moments":
        assert spec.summary is not None
        return spec.summary
    summary, _ = _summarize(spec.law(settings), INF, INF)
    return summary


def empirical_moments(values: Sequence[float]) -> MomentSummary:
    """
    Plug-in rho3, rho4, rho6 of a sample after studentizing it to mean 0 and
    variance 1 (population variance).

    Raises
    ------
    DegenerateSampleError
        If the sample variance is zero.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ConfigurationError("empirical_moments needs a nonempty sample")
    centered = x - x.mean()
    var = float(np.mean(centered**2))
    if not var > 0:
        raise DegenerateSampleError(f"sample of size {x.size} has zero variance")
    z = centered / math.sqrt(var)
    rho3 = float(np.mean(np.abs(z) ** 3))
    dev = z * z - 1.0
    rho4 = math.sqrt(float(np.mean(dev**2)))
    rho6 = float(np.mean(np.abs(dev) ** 3)) / rho3
    return MomentSummary.from_iid(rho3, rho4, rho6)


def zero_mean_truncation_find_a(
    spec: DistributionSpec, b: float, settings: Optional[Settings] = None
) -> float:
    r"""
    Left cut ``a`` such that X 1{-a < X < b} has mean zero.

    Mathematical Definition:
    ----------------------

    .. math::

        E\,X 1\{-a < X < b\} = \int_{-a}^{b} x \, dF(x) = 0

    Since E X = 0 this balances the two removed tails,
    :math:`E\,X 1\{X \le -a\} + E\,X 1\{X \ge b\} = 0`.

    Symmetric laws return ``a = b``. For the Pareto law the root is bracketed
    in (1e-12, 1/(s-1) - 1e-12) and found with Brent's method; ``b = inf``
    returns ``inf``. Discrete asymmetric laws only admit windows that keep the
    whole support.

    Raises
    ------
    InfeasibleTruncationError
        If no zero-mean window exists for ``b``.
    """
    if not b > 0:
        raise DomainError(f"truncation point b must be positive, got {b}")
    a = spec.law(settings).left_cut(b)
    logger.debug("zero-mean cut for %s at b=%g: a=%g", spec.describe(), b, a)
    return a


def truncated_moments(
    spec: DistributionSpec, a: float, b: float, settings: Optional[Settings] = None
) -> Tuple[MomentSummary, float]:
    r"""
    Moments of the truncated variable X 1{-a < X < b} and P(-a < X < b).

    .. math::

        \tilde X = X 1\{-a < X < b\}, \qquad
        \tilde\sigma^2 = E \tilde X^2, \qquad
        \rho_3 = E|\tilde X|^3/\tilde\sigma^3, \qquad
        \rho_4^2 = E(\tilde X^2/\tilde\sigma^2 - 1)^2

    The truncated variable has an atom at zero carrying the removed mass. It
    contributes nothing to the absolute moments and its distance to the
    mean square to rho4 and rho6.

    Raises
    ------
    TruncationContractError
        If the window does not leave the variable zero-mean.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"truncation window needs a, b > 0, got {a}, {b}")
    if spec.kind == "moments":
        if a == INF and b == INF:
            return analytic_moments(spec.untruncated()), 1.0
        raise UnsupportedSpecError("a moments-only spec cannot be truncated")
    law = spec.law(settings)
    law.require(2.0, -a, b)
    m2 = law.expect(lambda x: x * x, -a, b, (0.0,))
    mean = law.partial_mean(-a, b)
    if abs(mean) > _MEAN_TOLERANCE * math.sqrt(max(m2, 0.0)):
        raise TruncationContractError(
            f"{law.name}: window (-{a:g}, {b:g}) has mean {mean:.3e}, not zero"
        )
    return _summarize(law, a, b)


def moment_summary(
    spec: DistributionSpec, settings: Optional[Settings] = None
) -> MomentSummary:
    """Per-variable summary of ``spec``, truncated if it carries a window."""
    if spec.window is None:
        return analytic_moments(spec, settings)
    a, b = spec.window
    return truncated_moments(spec.untruncated(), a, b, settings)[0]


def keep_probability(
    spec: DistributionSpec, settings: Optional[Settings] = None
) -> float:
    """P(-a < X < b) for the spec's window, 1 when untruncated."""
    if spec.window is None or spec.kind == "moments":
        return 1.0
    a, b = spec.window
    return 1.0 - spec.law(settings).outside(a, b)


def gamma_functionals(
    spec: DistributionSpec, n: int, settings: Optional[Settings] = None
) -> GammaFunctionals:
    r"""
    Split second and third moments of n i.i.d. copies at :math:`\sqrt{\beta_2}/2`.

    .. math::

        \gamma_2 = E X^2 1\{|X| > \sqrt n/2\}, \qquad
        \gamma_3 = E|X|^3 1\{|X| \le \sqrt n/2\}/\sqrt n

    for the unit-variance version of the (possibly truncated) law; the
    threshold uses the truncated variance.

    Examples
    --------
    >>> g = gamma_functionals(DistributionSpec.two_point(1.0), 9)
    >>> g.gamma2, round(g.gamma3, 12)
    (0.0, 0.333333333333)
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    a, b = spec.window if spec.window is not None else (INF, INF)
    law = spec.law(settings)
    law.require(2.0, -a, b)
    m2 = law.expect(lambda x: x * x, -a, b, (0.0,))
    if not m2 > 0:
        raise DegenerateMomentsError(f"{law.name}: zero variance")
    sigma = math.sqrt(m2)
    h = 0.5 * sigma * math.sqrt(n)

    def square(x: float) -> float:
        return x * x

    def cube(x: float) -> float:
        return abs(x) ** 3

    tails = law.expect(square, -a, min(-h, b), (-sigma,)) + law.expect(
        square, max(h, -a), b, (sigma,)
    )
    if isinstance(law, _DiscreteLaw):
        inside = law.atoms
        mask = (inside > -a) & (inside < b) & (np.abs(inside) <= h)
        middle = float(np.dot(law.weights[mask], np.abs(inside[mask]) ** 3))
    else:
        middle = law.expect(cube, max(-h, -a), min(h, b), (0.0,))
    return GammaFunctionals(tails / m2, middle / (sigma**3 * math.sqrt(n)))


def _parse_real(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SpecSyntaxError(
            f"{what}: {text!r} is not a real number\n{SPEC_GRAMMAR}"
        ) from None


def _parse_pairs(body: str, keys: Sequence[str], what: str) -> dict:
    pairs = {}
    for item in body.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in keys or key in pairs:
            raise SpecSyntaxError(f"{what}: bad field {item!r}\n{SPEC_GRAMMAR}")
        pairs[key] = _parse_real(value.strip(), what)
    return pairs


def parse_distribution_spec(
    text: str, settings: Optional[Settings] = None
) -> DistributionSpec:
    """
    Parse the command-line spec grammar (see ``SPEC_GRAMMAR``).

    A ``|trunc:b=<real>`` suffix solves the zero-mean left cut immediately.

    Raises
    ------
    SpecSyntaxError
        If ``text`` does not follow the grammar.
    """
    base, bar, trunc = text.strip().partition("|")
    kind, colon, body = base.partition(":")
    kind = kind.strip()
    if not colon:
        raise SpecSyntaxError(f"missing ':' in {text!r}\n{SPEC_GRAMMAR}")
    if kind == "two-point":
        spec = DistributionSpec.two_point(_parse_pairs(body, ("b",), kind)["b"])
    elif kind == "student":
        spec = DistributionSpec.student(_parse_pairs(body, ("d",), kind)["d"])
    elif kind == "pareto":
        spec = DistributionSpec.pareto(_parse_pairs(body, ("s",), kind)["s"])
    elif kind == "sample":
        path = Path(body.strip())
        if not path.is_file():
            raise SpecSyntaxError(
                f"sample file {str(path)!r} not found\n{SPEC_GRAMMAR}"
            )
        spec = DistributionSpec.sample(np.loadtxt(path, ndmin=1, comments="#"))
    elif kind == "moments":
        keys = ("rho3", "rho4", "rho6")
        pairs = _parse_pairs(body, keys, kind)
        if set(pairs) != set(keys):
            raise SpecSyntaxError(f"moments needs rho3, rho4 and rho6\n{SPEC_GRAMMAR}")
        summary = MomentSummary.from_iid(*(pairs[k] for k in keys))
        spec = DistributionSpec.from_moments(summary)
    else:
        raise SpecSyntaxError(f"unknown distribution {kind!r}\n{SPEC_GRAMMAR}")
    if not bar:
        return spec
    tkind, colon, tbody = trunc.partition(":")
    if tkind.strip() != "trunc" or not colon:
        raise SpecSyntaxError(f"bad truncation suffix {trunc!r}\n{SPEC_GRAMMAR}")
    window = _parse_pairs(tbody, ("a", "b"), "trunc")
    if "b" not in window:
        raise SpecSyntaxError(f"truncation needs b\n{SPEC_GRAMMAR}")
    b = window["b"]
    a = window["a"] if "a" in window else zero_mean_truncation_find_a(spec, b, settings)
    return spec.truncated(a, b)
