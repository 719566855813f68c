"""Closed-form operator and quadrature moments of a Kerr-evolved coherent state.

A coherent state |alpha> evolved under H = hbar*chi*(a^dag a)^2 has normally
ordered moments

    <a^dag^p a^q>(t) = conj(alpha)^p alpha^q
                       * exp(-i chi t (q^2 - p^2))
                       * exp(N (exp(-2 i chi t (q - p)) - 1)),    N = |alpha|^2.

Quadrature moments of X(theta) = a e^{-i theta} + a^dag e^{i theta} are
assembled from these.  At large N the raw moments are of order N^2 while the
cumulants built from them can be twenty or more orders of magnitude smaller,
so everything below runs in a private mpmath context at 60 significant digits.
Values that leave this module as ``float`` are safe to use in double precision;
``QuadratureMoments`` keeps its fields as ``mpf`` so that cumulants can be
formed without cancellation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import mpmath

__all__ = [
    "WORKING_DIGITS",
    "ModeParams",
    "FrameSpec",
    "QuadratureMoments",
    "Fluctuations",
    "kerr_moment",
    "mean_field_angle",
    "quadrature_moments",
    "variance",
    "fluctuations",
]

WORKING_DIGITS = 60

# Never mutated after import, so sharing it between threads is safe.
mp = mpmath.MPContext()
mp.dps = WORKING_DIGITS
_TWO_PI = 2 * mp.pi

# Normally ordered expansions of X^k in terms of a_theta = a e^{-i theta}:
# {(p, q): c} means c * a_theta^dag^p a_theta^q.
NORMAL_ORDER = {
    1: {(0, 1): 1, (1, 0): 1},
    2: {(2, 0): 1, (1, 1): 2, (0, 2): 1, (0, 0): 1},
    3: {(3, 0): 1, (2, 1): 3, (1, 2): 3, (0, 3): 1, (1, 0): 3, (0, 1): 3},
    4: {
        (0, 4): 1, (1, 3): 4, (2, 2): 6, (3, 1): 4, (4, 0): 1,
        (0, 2): 6, (1, 1): 12, (2, 0): 6, (0, 0): 3,
    },
}


@dataclass(frozen=True)
class ModeParams:
    """One Kerr-evolved coherent mode.

    ``chi_t`` is the dimensionless interaction angle (nonlinearity times
    time); only this product enters any result.
    """

    alpha: complex
    chi_t: float

    def __post_init__(self):
        alpha = complex(self.alpha)
        if not (cmath.isfinite(alpha) and math.isfinite(self.chi_t)):
            raise ValueError(f"non-finite mode parameters: alpha={self.alpha!r}, chi_t={self.chi_t!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "chi_t", float(self.chi_t))

    @classmethod
    def from_photon_number(cls, n_bar: float, chi_t: float, phase: float = 0.0) -> "ModeParams":
        return cls(cmath.rect(math.sqrt(n_bar), phase), chi_t)

    @property
    def n_bar(self) -> float:
        # Correctly rounded |alpha|^2, identical to the p = q = 1 moment.
        return float(_n_bar_mp(self))

    def with_chi_t(self, chi_t: float) -> "ModeParams":
        return ModeParams(self.alpha, chi_t)


@dataclass(frozen=True)
class FrameSpec:
    """Analysis frame for a quadrature measurement.

    In the rotating frame the local-oscillator angle follows the Kerr
    mean-field rotation, ``theta = theta0 - 2 N chi_t``.  With the
    ``a e^{-i theta}`` quadrature convention the mean amplitude rotates as
    ``exp(-2 i N chi t)``, so the compensating shift carries a minus sign.
    """

    kind: Literal["lab", "rotating"] = "lab"
    theta0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lab", "rotating"):
            raise ValueError(f"frame kind must be 'lab' or 'rotating', got {self.kind!r}")

    def effective_angle(self, params: ModeParams) -> float:
        return float(self._angle_mp(params))

    def shifted(self, delta: float) -> "FrameSpec":
        return FrameSpec(self.kind, self.theta0 + delta)

    def _angle_mp(self, params: ModeParams):
        theta = mp.mpf(self.theta0)
        if self.kind == "rotating":
            theta -= 2 * _n_bar_mp(params) * mp.mpf(params.chi_t)
        return theta


@dataclass(frozen=True)
class QuadratureMoments:
    """Raw moments of X(theta) and the symmetrized X/Y covariance.

    m1..m4 and cov_xy are extended-precision ``mpf`` values; wrap in
    ``float()`` for display.
    """

    theta_effective: float
    m1: mpmath.mpf
    m2: mpmath.mpf
    m3: mpmath.mpf
    m4: mpmath.mpf
    cov_xy: mpmath.mpf

    @property
    def variance(self):
        return self.m2 - self.m1**2


class Fluctuations(NamedTuple):
    """Second-order fluctuation parameters of a single mode.

    ``excess`` is <a^dag a> - |<a>|^2 and ``pair`` is <a^2> - <a>^2.  For
    any angle, V(theta) = 1 + 2*excess + 2*Re(pair*e^{-2i theta}).
    """

    excess: float
    pair: complex

    def quadrature_variance(self, theta):
        return 1 + 2 * self.excess + 2 * (self.pair * cmath.exp(-2j * theta)).real

    def principal_variances(self) -> tuple[float, float]:
        centre = 1 + 2 * self.excess
        return centre - 2 * abs(self.pair), centre + 2 * abs(self.pair)


def _n_bar_mp(params: ModeParams):
    return mp.mpf(params.alpha.real) ** 2 + mp.mpf(params.alpha.imag) ** 2


def _reduce(angle):
    # fmod is only accurate to ~1e-60 absolute, so leave small angles untouched.
    return angle if abs(angle) <= _TWO_PI else mp.fmod(angle, _TWO_PI)


def _moment_mp(params: ModeParams, p: int, q: int):
    """<a^dag^p a^q>(t) as an mpc, no quadrature phase applied."""
    if p < 0 or q < 0:
        raise ValueError(f"moment orders must be nonnegative, got p={p}, q={q}")
    alpha = mp.mpc(params.alpha.real, params.alpha.imag)
    prefactor = mp.conj(alpha) ** p * alpha**q
    d = q - p
    if d == 0:
        # Photon number is conserved: no time dependence at all.
        return prefactor
    n_bar = _n_bar_mp(params)
    chi_t = mp.mpf(params.chi_t)
    phi = _reduce(-2 * chi_t * d)
    # N (cos phi - 1) = -2 N sin^2(phi/2) <= 0, so the modulus never exceeds |prefactor|.
    modulus = mp.exp(-2 * n_bar * mp.sin(phi / 2) ** 2)
    phase = _reduce(n_bar * mp.sin(phi) - chi_t * (q * q - p * p))
    return prefactor * modulus * mp.expj(phase)


def kerr_moment(params: ModeParams, p: int, q: int) -> complex:
    """Normally ordered moment <a^dag^p a^q> after Kerr evolution for ``params.chi_t``.

    Arbitrary nonnegative orders are accepted.  The magnitude stays finite as
    a Python complex up to N of order 1e8 for p + q <= 8 (and far beyond);
    an ``OverflowError`` would signal N outside any physical range.
    """
    value = _moment_mp(params, p, q)
    return complex(float(value.real), float(value.imag))


def mean_field_angle(params: ModeParams) -> float:
    """Mean-field Kerr rotation angle 2 N chi_t."""
    return 2 * params.n_bar * params.chi_t


def _rotated_table(params: ModeParams, theta, orders):
    table = {}
    for p, q in orders:
        table[p, q] = _moment_mp(params, p, q) * mp.expj(_reduce(-theta * (q - p)))
    return table


def _assemble(table, k):
    total = mp.mpc(0)
    for (p, q), c in NORMAL_ORDER[k].items():
        total += c * (table[p, q] if (p, q) != (0, 0) else 1)
    scale = max(abs(total.real), mp.mpf(1))
    if abs(total.imag) > mp.mpf("1e-40") * scale:
        raise ArithmeticError(f"order-{k} quadrature moment has imaginary residue {total.imag}")
    return total.real


def quadrature_moments(params: ModeParams, frame: FrameSpec) -> QuadratureMoments:
    """First four raw moments of X(theta) plus cov(X(theta), X(theta + pi/2)).

    Every (p, q) term of the normal-ordered expansions is evaluated
    independently, including the conjugate partners, so the assembled moments
    double as a check of the Hermitian symmetry of the closed form.
    """
    theta = frame._angle_mp(params)
    orders = {pq for k in NORMAL_ORDER for pq in NORMAL_ORDER[k] if pq != (0, 0)}
    table = _rotated_table(params, theta, orders)
    m1, m2, m3, m4 = (_assemble(table, k) for k in (1, 2, 3, 4))
    # (XY + YX)/2 = -i a_theta^2 + i a_theta^dag^2
    i = mp.mpc(0, 1)
    sym_xy = (-i * table[0, 2] + i * table[2, 0]).real
    mean_y = (-i * table[0, 1] + i * table[1, 0]).real
    return QuadratureMoments(
        theta_effective=float(theta),
        m1=m1,
        m2=m2,
        m3=m3,
        m4=m4,
        cov_xy=sym_xy - m1 * mean_y,
    )


def variance(params: ModeParams, frame: FrameSpec) -> float:
    """Quadrature variance m2 - m1^2; values below 1 are squeezed."""
    return float(quadrature_moments(params, frame).variance)


def fluctuations(params: ModeParams) -> Fluctuations:
    mean = _moment_mp(params, 0, 1)
    excess = _moment_mp(params, 1, 1).real - abs(mean) ** 2
    pair = _moment_mp(params, 0, 2) - mean**2
    return Fluctuations(float(excess), complex(float(pair.real), float(pair.imag)))
