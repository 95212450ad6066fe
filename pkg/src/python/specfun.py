r"""
Scalar special functions shared by the bound, constant and verification code.

Every function here is pure and thread-safe. Accuracy contracts:

- ``normal_pdf``: absolute error below 1e-15.
- ``normal_cdf``: absolute error below 1e-12 (``scipy.special.ndtr``).
- ``normal_tail``: relative error below 1e-10 up to x = 38; evaluated as
  :math:`\Phi(-x)` so there is no cancellation in the upper tail.
- ``student_cdf``: relative error below 1e-10 through the regularized incomplete
  beta function.
"""

import math

from scipy import special

from .errors import DomainError

SQRT_2PI = math.sqrt(2.0 * math.pi)

PSI_STAR_KNOT = 0.752
PSI_STAR_LEVEL = 0.17


def normal_pdf(x: float) -> float:
    r"""
    Standard normal density :math:`\varphi(x) = e^{-x^2/2}/\sqrt{2\pi}`.

    Examples
    --------
    >>> round(normal_pdf(0.0), 10)
    0.3989422804
    """
    return math.exp(-0.5 * x * x) / SQRT_2PI


def normal_cdf(x: float) -> float:
    r"""
    Standard normal distribution function :math:`\Phi(x)`.

    Accepts ``±inf``; :math:`\Phi(-\infty) = 0` and :math:`\Phi(\infty) = 1`.
    """
    return float(special.ndtr(x))


def normal_tail(x: float) -> float:
    r"""
    Normal tail function :math:`\Psi(x) = 1 - \Phi(x)`.

    Evaluated as :math:`\Phi(-x)`, which ``ndtr`` computes from ``erfc``
    without subtracting from one.

    Examples
    --------
    >>> normal_tail(float("inf"))
    0.0
    """
    return float(special.ndtr(-x))


def student_cdf(x: float, df: float) -> float:
    r"""
    Distribution function of Student's t with ``df`` degrees of freedom.

    Mathematical Definition:
    ----------------------

    With :math:`u = d/(d + x^2)` and the regularized incomplete beta function
    :math:`I_u(a, b)`,

    .. math::

        F_d(x) = \tfrac12 I_u(d/2, 1/2) \quad (x \le 0), \qquad
        F_d(x) = 1 - \tfrac12 I_u(d/2, 1/2) \quad (x > 0).

    ``df`` is treated as a positive real.

    Raises
    ------
    DomainError
        If ``df`` is not positive.

    Examples
    --------
    >>> student_cdf(1.0, 1.0)
    0.75
    """
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    half_tail = 0.5 * float(special.betainc(0.5 * df, 0.5, df / (df + x * x)))
    return 1.0 - half_tail if x > 0 else half_tail


def psi_cantelli(u: float, v: float) -> float:
    r"""
    Hybrid Chebyshev-Cantelli factor
    :math:`\psi(u, v) = (u\wedge v)/(v^2 + (u\wedge v)^2)`.

    For ``u <= v`` and a zero-mean ``Y`` with standard deviation ``v``,
    Cantelli gives :math:`P(Y \ge u) \le v^2\psi(u, v)/u`. The factor is
    nondecreasing in ``u`` and equals :math:`1/(2v)` once :math:`u \ge v`.

    Raises
    ------
    DomainError
        If either argument is not positive.

    Examples
    --------
    >>> psi_cantelli(1.0, 1.0)
    0.5
    """
    if not (u > 0 and v > 0):
        raise DomainError(f"psi_cantelli needs u > 0 and v > 0, got u={u}, v={v}")
    m = min(u, v)
    return m / (v * v + m * m)


def cantelli_between(sigma: float, a: float, b: float) -> float:
    r"""
    Bound on :math:`P(Y \notin (-a, b))` for zero-mean ``Y`` with standard deviation ``sigma``.

    .. math::

        P(Y \notin (-a, b)) \le \frac{4\sigma^2 + (a - b)^2}{(a + b)^2}

    Raises
    ------
    DomainError
        If ``a`` or ``b`` is not positive, or ``sigma`` is negative.
    """
    if not (a > 0 and b > 0) or sigma < 0:
        raise DomainError(
            f"cantelli_between needs a, b > 0 and sigma >= 0, got "
            f"sigma={sigma}, a={a}, b={b}"
        )
    return (4.0 * sigma * sigma + (a - b) ** 2) / (a + b) ** 2


def psi_star(x: float) -> float:
    r"""
    Log-concave envelope of :math:`x\Psi(x)`.

    .. math::

        \Psi^*(x) = 0.17 \cdot 1\{0 < x < 0.752\} + x\Psi(x) \cdot 1\{x \ge 0.752\}

    The knot itself takes the :math:`x\Psi(x)` branch. For every ``z > 0``,
    :math:`\sup_{x \ge z} x\Psi(x) \le \Psi^*(z)`.

    Raises
    ------
    DomainError
        If ``x`` is not positive.
    """
    if not x > 0:
        raise DomainError(f"psi_star needs x > 0, got {x}")
    if x < PSI_STAR_KNOT:
        return PSI_STAR_LEVEL
    return x * normal_tail(x)


def phi_n(z: float, n: int) -> float:
    r"""
    Improper distribution function :math:`\Phi_n(z) = \Phi(z/\sqrt{1 + (z^2 - 1)/n})`.

    :math:`\Phi_n` approximates the law of the Student statistic better than
    :math:`\Phi`; its range is :math:`(\Phi(-\sqrt n), \Phi(\sqrt n))`. The
    points ``z = ±1`` are fixed: :math:`\Phi_n(\pm 1) = \Phi(\pm 1)`.

    Raises
    ------
    DomainError
        If ``n < 2``.
    """
    if n < 2:
        raise DomainError(f"phi_n needs n >= 2, got {n}")
    if math.isinf(z):
        return normal_cdf(math.copysign(math.sqrt(n), z))
    return normal_cdf(z / math.sqrt(1.0 + (z * z - 1.0) / n))


def phi_n_defect(n: int) -> float:
    r"""
    Mass missing from :math:`\Phi_n`, equal to :math:`2\Psi(\sqrt n)`.
    """
    if n < 2:
        raise DomainError(f"phi_n_defect needs n >= 2, got {n}")
    return 2.0 * normal_tail(math.sqrt(n))


def x_of_t(t: float) -> float:
    r"""
    Maximizer of :math:`x \mapsto \Phi(x) - \Phi((1 - t)x)` over ``x > 0``.

    .. math::

        x_t = \sqrt{\frac{-2\ln(1 - t)}{t(2 - t)}}

    Tends to 1 as ``t`` tends to 0.

    Raises
    ------
    DomainError
        If ``t`` is outside (0, 1).
    """
    if not 0.0 < t < 1.0:
        raise DomainError(f"x_of_t needs t in (0, 1), got {t}")
    return math.sqrt(-2.0 * math.log1p(-t) / (t * (2.0 - t)))


def big_r(eps4: float) -> float:
    r"""
    Normal increment rate :math:`R(\varepsilon_4)`.

    .. math::

        R(\varepsilon_4) = \frac{\Phi(x_{\varepsilon_4}) - \Phi((1 - \varepsilon_4)x_{\varepsilon_4})}{\varepsilon_4}
                         = \sup_{x > 0} \frac{\Phi(x) - \Phi((1 - \varepsilon_4)x)}{\varepsilon_4}

    Increases from :math:`\varphi(1)` at :math:`\varepsilon_4 \to 0`.
    ``eps4`` may equal 1/2, the right end of its admissible range.

    Raises
    ------
    DomainError
        If ``eps4`` is outside (0, 1/2].
    """
    if not 0.0 < eps4 <= 0.5:
        raise DomainError(f"big_r needs eps4 in (0, 1/2], got {eps4}")
    x = x_of_t(eps4)
    return (normal_cdf(x) - normal_cdf((1.0 - eps4) * x)) / eps4


def max_moment_density(j: int) -> float:
    r"""
    :math:`s_j = \sup_{v > 0} v^j\varphi(v) = (j/e)^{j/2}/\sqrt{2\pi}`, attained at :math:`v = \sqrt j`.
    """
    if j < 1:
        raise DomainError(f"max_moment_density needs j >= 1, got {j}")
    return (j / math.e) ** (0.5 * j) / SQRT_2PI
