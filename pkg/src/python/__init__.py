"""
senbe - explicit Berry-Esseen bounds for self-normalized sums
=============================================================

Numerically explicit uniform bounds on the distance between the distribution
of the self-normalized sum (and the Student statistic) and the standard normal
law, together with the tooling to derive their constants, evaluate them for
concrete distributions and check them by simulation.
"""

import logging

__version__ = "0.2.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
