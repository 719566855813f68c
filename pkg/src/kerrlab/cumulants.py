"""Quadrature cumulants, their large-N scaling laws and number-state reference values."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .moments import FrameSpec, ModeParams, QuadratureMoments, mp, quadrature_moments

__all__ = [
    "CumulantSet",
    "DegenerateMeanError",
    "cumulants",
    "cumulants_at",
    "asymptotic_kappa3",
    "number_state_kappa4",
    "skew_ratio",
    "loglog_slope",
]


class DegenerateMeanError(ValueError):
    """The quadrature mean used as a normalisation is (numerically) zero."""


@dataclass(frozen=True)
class CumulantSet:
    """Second to fourth cumulants of one quadrature.

    ``kappa4_paper`` is m4 + 2 m1^4 - 3 m2^2 - m1 kappa3, the fourth-order
    measure used for the Kerr figures; ``kappa4_std`` is the textbook fourth
    cumulant.  They differ by exactly 3 m1 kappa3 and coincide when the mean
    vanishes.
    """

    kappa2: float
    kappa3: float
    kappa4_paper: float
    kappa4_std: float


def _cumulants_mp(m1, m2, m3, m4):
    m1, m2, m3, m4 = (mp.mpf(m) for m in (m1, m2, m3, m4))
    kappa3 = m3 + 2 * m1**3 - 3 * m1 * m2
    kappa4_paper = m4 + 2 * m1**4 - 3 * m2**2 - m1 * kappa3
    kappa4_std = m4 - 4 * m1 * m3 - 3 * m2**2 + 12 * m1**2 * m2 - 6 * m1**4
    return m2 - m1**2, kappa3, kappa4_paper, kappa4_std


def cumulants(q: QuadratureMoments) -> CumulantSet:
    return CumulantSet(*(float(k) for k in _cumulants_mp(q.m1, q.m2, q.m3, q.m4)))


def cumulants_at(params: ModeParams, frame: FrameSpec) -> CumulantSet:
    return cumulants(quadrature_moments(params, frame))


def asymptotic_kappa3(n_bar: float, chi_n_t: float) -> float:
    """Large-N third cumulant of the rotating-frame Y quadrature, -256 N^{-1/2} (chi N t)^3."""
    if not n_bar > 0:
        raise ValueError(f"n_bar must be positive, got {n_bar}")
    return -256.0 / math.sqrt(n_bar) * chi_n_t**3


def number_state_kappa4(n: int) -> float:
    """Fourth cumulant of any quadrature of the Fock state |n>."""
    if int(n) != n or n < 0:
        raise ValueError(f"photon number must be a nonnegative integer, got {n!r}")
    n = int(n)
    return float(-6 * n * (n + 1))


def skew_ratio(
    params: ModeParams,
    frame: FrameSpec,
    reference: Literal["amplitude", "same"] = "amplitude",
) -> tuple[float, float]:
    """Relative skew (kappa3 / <X>^3, kappa4 / <X>^4) of the quadrature in ``frame``.

    With ``reference="amplitude"`` the normalising mean is that of the
    amplitude quadrature (rotating frame aligned with arg alpha), which is
    the quantity whose cube the growth of kappa3 is compared against: at
    fixed chi*t both ratios grow linearly with N.  ``reference="same"``
    divides by the mean of the analysed quadrature itself.
    """
    q = quadrature_moments(params, frame)
    _, kappa3, kappa4_paper, _ = _cumulants_mp(q.m1, q.m2, q.m3, q.m4)
    if reference == "amplitude":
        amplitude_frame = FrameSpec("rotating", cmath.phase(params.alpha))
        mean = quadrature_moments(params, amplitude_frame).m1
    elif reference == "same":
        mean = q.m1
    else:
        raise ValueError(f"unknown reference {reference!r}")
    if abs(mean) < 1e-12:
        raise DegenerateMeanError(
            f"quadrature mean {float(mean):.3g} is zero; use a quadrature with nonzero mean"
        )
    return float(kappa3 / mean**3), float(kappa4_paper / mean**4)


def loglog_slope(x, y) -> float:
    """Ordinary least-squares slope of log|y| against log x."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if x.size < 2 or np.any(x <= 0) or np.any(y == 0):
        raise ValueError("log-log fit needs at least two points with positive x and nonzero y")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
