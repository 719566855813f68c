"""Brute-force truncated Fock-space reference for the closed-form engine.

States are explicit number-basis amplitude vectors; Kerr evolution is the
diagonal phase exp(-i chi t n^2); moments come from applying ladder or
quadrature operators to the vector.  Nothing here uses the normally ordered
closed forms, so agreement with them is a genuine check.  Amplitudes and
Kerr phases are generated with mpmath and stored as extended-precision
complex numbers, which keeps cancellation in centred moments well below the
1e-9 comparison budget for N <= ORACLE_MAX_N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .cumulants import CumulantSet
from .entanglement import TwoModeVariances
from .moments import ModeParams, QuadratureMoments

__all__ = [
    "ORACLE_MAX_N",
    "OracleRangeError",
    "CutoffLeakageError",
    "TruncationPolicy",
    "FockVector",
    "OracleTwoMode",
    "auto_cutoff",
    "coherent_fock",
    "number_state",
    "evolve_kerr",
    "kerr_state",
    "oracle_moment",
    "oracle_quadrature_moments",
    "oracle_cumulants",
    "oracle_two_mode",
]

ORACLE_MAX_N = 200
NORM_TOLERANCE = 1e-12

# Per-level amplitudes and Kerr phases are formed at 30 digits so that the
# phase n^2 chi t (hundreds of radians at the cutoff) stays accurate once
# reduced.  Vector algebra runs in the platform's extended precision
# (80-bit on x86-64), which buys about three digits on centred moments.
_mp = mpmath.MPContext()
_mp.dps = 30
_REAL = np.longdouble
_COMPLEX = np.clongdouble
_I = _COMPLEX(1j)


def _to_complex(z) -> np.clongdouble:
    z = _mp.mpc(z)
    return _REAL(_mp.nstr(z.real, 25)) + _I * _REAL(_mp.nstr(z.imag, 25))


def _unit(phi: float):
    phi = _REAL(phi)
    return np.cos(phi) + _I * np.sin(phi)


class OracleRangeError(ValueError):
    """Mean photon number beyond what the Fock oracle represents."""


class CutoffLeakageError(ArithmeticError):
    """Probability near the truncation edge exceeds the tolerance."""


@dataclass(frozen=True)
class TruncationPolicy:
    tail_tolerance: float = 1e-14
    cutoff_override: int | None = None

    def formula_cutoff(self, n_bar: float) -> int:
        return math.ceil(n_bar + 10 * math.sqrt(n_bar) + 20)


def poisson_tail(n_bar: float, cutoff: int) -> float:
    """P(n > cutoff) for a Poisson distribution of mean ``n_bar``."""
    if n_bar == 0:
        return 0.0
    return float(mpmath.gammainc(cutoff + 1, 0, n_bar, regularized=True))


def auto_cutoff(n_bar: float, policy: TruncationPolicy = TruncationPolicy()) -> int:
    if policy.cutoff_override is not None:
        return int(policy.cutoff_override)
    cutoff = policy.formula_cutoff(n_bar)
    while poisson_tail(n_bar, cutoff) >= policy.tail_tolerance:
        cutoff += max(1, int(math.sqrt(n_bar)))
    return cutoff


@dataclass(frozen=True, eq=False)
class FockVector:
    """Truncated number-basis amplitudes c_0..c_cutoff.

    ``tail_mass`` is the probability the untruncated state carries above the
    cutoff (zero for states that fit exactly).
    """

    amplitudes: np.ndarray = field(repr=False)
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=_COMPLEX)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @property
    def cutoff(self) -> int:
        return len(self.amplitudes) - 1

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_range(n_bar: float) -> None:
    if n_bar > ORACLE_MAX_N * (1 + 1e-12):
        raise OracleRangeError(
            f"N = {n_bar:g} exceeds the Fock oracle range N <= {ORACLE_MAX_N}; "
            "the closed-form engine has no such limit"
        )


def coherent_fock(alpha: complex, policy: TruncationPolicy = TruncationPolicy()) -> FockVector:
    """Coherent state e^{-N/2} sum alpha^n / sqrt(n!) |n>, built in the log domain."""
    alpha = complex(alpha)
    n_bar = alpha.real**2 + alpha.imag**2
    _check_range(n_bar)
    cutoff = auto_cutoff(n_bar, policy)
    if n_bar == 0:
        amps = np.zeros(cutoff + 1, dtype=_COMPLEX)
        amps[0] = 1
        return FockVector(amps)
    z = _mp.mpc(alpha.real, alpha.imag)
    log_abs, arg = _mp.log(abs(z)), _mp.arg(z)
    amps = np.empty(cutoff + 1, dtype=_COMPLEX)
    for k in range(cutoff + 1):
        log_mod = -abs(z) ** 2 / 2 + k * log_abs - _mp.loggamma(k + 1) / 2
        amps[k] = _to_complex(_mp.exp(log_mod) * _mp.expj(k * arg))
    state = FockVector(amps, poisson_tail(n_bar, cutoff))
    if state.tail_mass < policy.tail_tolerance and abs(state.norm() - 1) > NORM_TOLERANCE:
        raise CutoffLeakageError(f"coherent state norm {state.norm():.17g} outside tolerance")
    return state


def number_state(n: int, policy: TruncationPolicy = TruncationPolicy()) -> FockVector:
    cutoff = policy.cutoff_override if policy.cutoff_override is not None else n
    if n < 0 or n > cutoff:
        raise ValueError(f"number state |{n}> does not fit below cutoff {cutoff}")
    amps = np.zeros(cutoff + 1, dtype=_COMPLEX)
    amps[n] = 1
    return FockVector(amps)


def evolve_kerr(state: FockVector, chi_t: float) -> FockVector:
    """Apply exp(-i chi t (a^dag a)^2), i.e. multiply c_n by exp(-i chi t n^2)."""
    two_pi = 2 * _mp.pi
    reduced = _mp.fmod(_mp.mpf(chi_t), two_pi)
    phases = np.array(
        [_to_complex(_mp.expj(-_mp.fmod(k * k * reduced, two_pi))) for k in range(state.cutoff + 1)],
        dtype=_COMPLEX,
    )
    return FockVector(state.amplitudes * phases, state.tail_mass)


def kerr_state(params: ModeParams, policy: TruncationPolicy = TruncationPolicy()) -> FockVector:
    return evolve_kerr(coherent_fock(params.alpha, policy), params.chi_t)


def _lower(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.arange(1, len(v), dtype=_REAL)) * v[1:]


def _check_leakage(state: FockVector, tolerance: float = TruncationPolicy.tail_tolerance) -> None:
    if state.tail_mass > tolerance:
        raise CutoffLeakageError(
            f"probability {state.tail_mass:.3g} lies above the cutoff {state.cutoff}; increase the cutoff"
        )


def oracle_moment(state: FockVector, p: int, q: int) -> complex:
    """<a^dag^p a^q> = <a^p psi | a^q psi> by explicit ladder application."""
    if p < 0 or q < 0:
        raise ValueError("moment orders must be nonnegative")
    _check_leakage(state)
    bra = state.amplitudes
    for _ in range(p):
        bra = _lower(bra)
    ket = state.amplitudes
    for _ in range(q):
        ket = _lower(ket)
    size = min(len(bra), len(ket))
    return complex(np.vdot(bra[:size], ket[:size]))


def _apply_quadrature(v: np.ndarray, phi: float, shift: float = 0.0) -> np.ndarray:
    """(a e^{-i phi} + a^dag e^{i phi} - shift) v, growing the vector by one level."""
    out = np.zeros(len(v) + 1, dtype=_COMPLEX)
    root = np.sqrt(np.arange(1, len(v) + 1, dtype=_REAL))
    rot = _unit(phi)
    out[:-2] += np.conj(rot) * root[:-1] * v[1:]
    out[1:] += rot * root * v
    out[:-1] -= _REAL(shift) * v
    return out


def _overlap(u: np.ndarray, v: np.ndarray):
    size = min(len(u), len(v))
    return np.vdot(u[:size], v[:size])


def _quadrature_mean(psi: np.ndarray, phi: float):
    return _overlap(psi, _apply_quadrature(psi, phi)).real


def oracle_quadrature_moments(state: FockVector, theta: float) -> QuadratureMoments:
    """Raw moments of X(theta) by repeated operator application (float fields)."""
    _check_leakage(state)
    psi = state.amplitudes
    x1 = _apply_quadrature(psi, theta)
    x2 = _apply_quadrature(x1, theta)
    y1 = _apply_quadrature(psi, theta + math.pi / 2)
    m1 = _overlap(psi, x1).real
    m1_y = _overlap(psi, y1).real
    # <psi|XY|psi> = <X psi|Y psi>; its real part is the symmetrized product.
    sym = _overlap(x1, y1).real
    return QuadratureMoments(
        theta_effective=float(theta),
        m1=float(m1),
        m2=float(_overlap(x1, x1).real),
        m3=float(_overlap(x1, x2).real),
        m4=float(_overlap(x2, x2).real),
        cov_xy=float(sym - m1 * m1_y),
    )


def oracle_cumulants(state: FockVector, theta: float) -> CumulantSet:
    """Cumulants of X(theta) from central moments, i.e. powers of (X - <X>) applied to the state."""
    _check_leakage(state)
    psi = state.amplitudes
    mean = _quadrature_mean(psi, theta)
    d1 = _apply_quadrature(psi, theta, mean)
    d2 = _apply_quadrature(d1, theta, mean)
    mu2 = _overlap(d1, d1).real
    mu3 = _overlap(d1, d2).real
    mu4 = _overlap(d2, d2).real
    kappa4_std = mu4 - 3 * mu2**2
    return CumulantSet(float(mu2), float(mu3), float(kappa4_std + 3 * mean * mu3), float(kappa4_std))


class _CentredWords:
    """Expectation values of ordered products of centred quadratures in one mode."""

    def __init__(self, state: FockVector):
        _check_leakage(state)
        self.psi = state.amplitudes
        self._mean = lru_cache(maxsize=None)(lambda phi: _quadrature_mean(self.psi, phi))
        self.expect = lru_cache(maxsize=None)(self._expect)

    def mean(self, phi: float) -> float:
        return self._mean(phi)

    def _expect(self, word: tuple[float, ...]) -> complex:
        v = self.psi
        for phi in reversed(word):
            v = _apply_quadrature(v, phi, self.mean(phi))
        return _overlap(self.psi, v)


@dataclass(frozen=True)
class OracleTwoMode:
    variances: TwoModeVariances
    duan_simon_plus: float
    duan_simon_minus: float
    reid_1: float
    reid_2: float
    mean_x1: float
    kappa3_x1: float
    kappa4_x1_std: float


def _output_quadrature(j: int, phi: float, eta: float):
    # b1 = sqrt(eta) a1 + i sqrt(1-eta) a2 and i e^{-i phi} = e^{-i (phi - pi/2)}
    r, t = math.sqrt(eta), math.sqrt(1 - eta)
    if j == 1:
        return ((0, r, phi), (1, t, phi - math.pi / 2))
    return ((0, t, phi - math.pi / 2), (1, r, phi))


def _combine(*weighted):
    terms = []
    for weight, quad in weighted:
        terms.extend((m, weight * c, phi) for m, c, phi in quad)
    return tuple(terms)


def _expect_product(modes, factors) -> float:
    """<prod_k (centred linear combination k)> for independent input modes."""
    total = 0j
    for choice in _choices(factors):
        coeff = 1.0
        words = ([], [])
        for m, c, phi in choice:
            coeff *= c
            words[m].append(phi)
        value = coeff
        for m in (0, 1):
            if words[m]:
                value *= modes[m].expect(tuple(words[m]))
        total += value
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"expectation of a Hermitian product has imaginary part {total.imag}")
    return float(total.real)


def _choices(factors):
    if not factors:
        yield ()
        return
    for term in factors[0]:
        for rest in _choices(factors[1:]):
            yield (term,) + rest


def oracle_two_mode(
    mode1: ModeParams,
    mode2: ModeParams,
    eta: float,
    theta: float,
    policy: TruncationPolicy = TruncationPolicy(),
) -> OracleTwoMode:
    """Beamsplitter output statistics by expanding output operators into input operators.

    Each output quadrature is a linear combination of input quadratures.
    Products of them are expanded term by term; each term factorises over
    the two independent input states with operator order kept inside a mode.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    modes = (_CentredWords(kerr_state(mode1, policy)), _CentredWords(kerr_state(mode2, policy)))
    half = math.pi / 2
    x1, x2 = _output_quadrature(1, theta, eta), _output_quadrature(2, theta, eta)
    y1, y2 = _output_quadrature(1, theta + half, eta), _output_quadrature(2, theta + half, eta)

    def cov(a, b):
        return _expect_product(modes, (a, b))

    variances = TwoModeVariances(
        v_x1=cov(x1, x1), v_x2=cov(x2, x2), v_y1=cov(y1, y1), v_y2=cov(y2, y2),
        c_x1x2=cov(x1, x2), c_y1y2=cov(y1, y2), theta=float(theta),
    )

    def ds(sign):
        xs = _combine((1.0, x1), (sign, x2))
        ys = _combine((1.0, y1), (-sign, y2))
        return cov(xs, xs) + cov(ys, ys)

    def residual(v_a, v_b, c):
        return v_a - c**2 / v_b

    v = variances
    reid_1 = residual(v.v_x1, v.v_x2, v.c_x1x2) * residual(v.v_y1, v.v_y2, v.c_y1y2)
    reid_2 = residual(v.v_x2, v.v_x1, v.c_x1x2) * residual(v.v_y2, v.v_y1, v.c_y1y2)
    mean_x1 = float(sum(c * modes[m].mean(phi) for m, c, phi in x1))
    mu2 = cov(x1, x1)
    kappa3 = _expect_product(modes, (x1, x1, x1))
    mu4 = _expect_product(modes, (x1, x1, x1, x1))
    return OracleTwoMode(
        variances=variances,
        duan_simon_plus=ds(1.0),
        duan_simon_minus=ds(-1.0),
        reid_1=float(reid_1),
        reid_2=float(reid_2),
        mean_x1=mean_x1,
        kappa3_x1=kappa3,
        kappa4_x1_std=float(mu4 - 3 * mu2**2),
    )
