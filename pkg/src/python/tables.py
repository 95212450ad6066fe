"""
Published parameter rows and constant triples.

Each row lists the weights the triple was optimized for, the seven proof
parameters as exact rationals, the Berry-Esseen constant used in Case 3, and
the triple as printed. Rows named ``t*`` belong to the non-i.i.d. theorem
(constant 0.56), rows named ``t*iid*`` to the i.i.d. theorem (constant 0.4785).
"""

from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal
from fractions import Fraction
from typing import Dict, FrozenSet, Tuple

from .errors import ConfigurationError

BE_NONIID = 0.56
BE_IID = 0.4785

F = Fraction


@dataclass(frozen=True)
class PublishedRow:
    """One row of a published parameter table."""

    name: str
    label: str
    weights: Tuple[float, float, float]
    alpha: Fraction
    eps4: Fraction
    eps3: Fraction
    eps2: Fraction
    kappa: Fraction
    theta3: Fraction
    theta4: Fraction
    be_const: float
    triple: Tuple[str, str, str]

    @property
    def theorem(self) -> str:
        return "iid" if self.be_const == BE_IID else "noniid"

    @property
    def fractions(self) -> Tuple[Fraction, ...]:
        return (
            self.alpha,
            self.eps4,
            self.eps3,
            self.eps2,
            self.kappa,
            self.theta3,
            self.theta4,
        )

    @property
    def triple_values(self) -> Tuple[float, float, float]:
        a3, a4, a6 = (float(Decimal(v)) for v in self.triple)
        return a3, a4, a6


_TAU1 = (F(2, 25), F(123, 1000), F(2703, 1000), F(22, 125), F(43, 250),
         F(377, 1000), F(5407, 1000))
_TAU2 = (F(27, 200), F(363, 1000), F(1401, 1000), F(19, 50), F(91, 250),
         F(413, 1000), F(3167, 1000))


def _row(
    name: str,
    label: str,
    weights: Tuple[float, float, float],
    params: Tuple[Fraction, ...],
    be_const: float,
    triple: Tuple[str, str, str],
) -> PublishedRow:
    return PublishedRow(name, label, weights, *params, be_const, triple)


PUBLISHED_ROWS: Tuple[PublishedRow, ...] = (
    _row("t1", "tau_1", (1, 1, 1), _TAU1, BE_NONIID, ("1.61", "1.60", "1.20")),
    _row("t2", "tau_2", (1, 2, 1), _TAU2, BE_NONIID, ("2.01", "1.02", "0.61")),
    _row(
        "t3",
        "tau_3",
        (1, 1, 1e6),
        (F(381, 500), F(471, 1000), F(6927, 1000), F(23, 1000), F(79, 50),
         F(9, 200), F(3809, 1000)),
        BE_NONIID,
        ("11.38", "11.02", "11.78e-6"),
    ),
    _row(
        "t4",
        "tau_4",
        (1, 1e-5, 1e-6),
        (F("8.39e-5"), F("3.17e-5"), F("1.32"), F("3.49e-5"), F("9.97e-7"),
         F("0.3738"), F("2.69")),
        BE_NONIID,
        ("1.34", "125377", "1.049e6"),
    ),
    _row(
        "t1iid",
        "tilde tau_1,1",
        (1, 1, 1),
        (F(41, 500), F(113, 500), F(277, 100), F(39, 200), F(83, 500),
         F(409, 1000), F(4467, 1000)),
        BE_IID,
        ("1.53", "1.52", "1.34"),
    ),
    _row(
        "t1iid2", "tilde tau_1,2", (1, 1, 1), _TAU1, BE_IID, ("1.61", "1.60", "1.02")
    ),
    _row(
        "t2iid2", "tilde tau_2,2", (1, 2, 1), _TAU2, BE_IID, ("1.96", "1.02", "0.52")
    ),
    _row(
        "t21iid",
        "tilde tau_2.1,1",
        (1, 2.1, 1),
        (F("0.14"), F("0.275"), F("6.7"), F("0.42"), F("0.27"), F("0.44"),
         F("3.2")),
        BE_IID,
        ("1.96", "0.99", "0.63"),
    ),
    _row(
        "t3iid",
        "tilde tau_3,1",
        (1, 1, 1e6),
        (F(777, 1000), F(1, 2), F(1381, 500), F(27, 1000), F(451, 1000),
         F(47, 1000), F(4569, 500)),
        BE_IID,
        ("10.94", "9.40", "11.06e-6"),
    ),
    _row(
        "t4iid",
        "tilde tau_4,1",
        (1, 1e-5, 1e-6),
        (F("3e-4"), F("43e-5"), F("10.3"), F("13e-4"), F("3.5"), F("0.401"),
         F("1.6")),
        BE_IID,
        ("1.25", "8140", "92437"),
    ),
)

_BY_NAME: Dict[str, PublishedRow] = {row.name: row for row in PUBLISHED_ROWS}

# (row, entry) pairs printed with too few digits for the ceiling rule
LOOSE_ENTRIES: FrozenSet[Tuple[str, int]] = frozenset(
    {("t4", 1), ("t4", 2), ("t4iid", 2)}
)


def published_row(name: str) -> PublishedRow:
    """Look up a published row by its short name (``t1`` ... ``t4iid``)."""
    try:
        return _BY_NAME[name]
    except KeyError:
        known = ", ".join(_BY_NAME)
        raise ConfigurationError(
            f"unknown published triple {name!r}; known: {known}"
        ) from None


def ceil_to_published(value: float, shown: str) -> Decimal:
    """
    Round ``value`` up at the precision ``shown`` is printed with.

    ``"1.60"`` rounds to hundredths, ``"125377"`` to units, ``"1.049e6"`` to
    thousands and ``"11.78e-6"`` to 1e-8.

    Examples
    --------
    >>> ceil_to_published(1.5926, "1.60")
    Decimal('1.60')
    """
    quantum = Decimal(1).scaleb(Decimal(shown).as_tuple().exponent)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_CEILING)


def published_triple(name: str) -> Tuple[float, float, float]:
    """The printed (A3, A4, A6) of row ``name`` as floats."""
    return published_row(name).triple_values
