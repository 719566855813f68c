"""Two Kerr modes mixed on a beamsplitter: output (co)variances and entanglement tests.

The beamsplitter convention is

    b1 = sqrt(eta) a1 + i sqrt(1 - eta) a2
    b2 = i sqrt(1 - eta) a1 + sqrt(eta) a2

and both outputs are analysed with one local-oscillator angle theta:
X_j = X_{b_j}(theta), Y_j = X_{b_j}(theta + pi/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .cumulants import _cumulants_mp
from .moments import FrameSpec, ModeParams, fluctuations, quadrature_moments

__all__ = [
    "BeamsplitterConfig",
    "TwoModeVariances",
    "CriterionResult",
    "AngleOptimum",
    "OutputCumulants",
    "DegenerateInputError",
    "DS_THRESHOLD",
    "REID_THRESHOLD",
    "output_variances",
    "duan_simon",
    "reid_epr",
    "optimize_angle",
    "output_cumulants",
    "angle_landscape",
]

DS_THRESHOLD = 4.0
REID_THRESHOLD = 1.0
DEGENERATE_VARIANCE = 1e-12
GRID_POINTS = 720
ANGLE_TOL = 1e-10
_INV_PHI = (math.sqrt(5) - 1) / 2

Criterion = Literal["duan-simon", "reid"]


class DegenerateInputError(ValueError):
    """A conditional-variance denominator vanished."""


@dataclass(frozen=True)
class BeamsplitterConfig:
    eta: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"reflectivity eta must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class TwoModeVariances:
    v_x1: float
    v_x2: float
    v_y1: float
    v_y2: float
    c_x1x2: float
    c_y1y2: float
    theta: float


@dataclass(frozen=True)
class CriterionResult:
    value: float
    threshold: float
    violated: bool
    theta_opt: float | None = None
    sign_choice: str | None = None


@dataclass(frozen=True)
class AngleOptimum:
    theta: float
    value: float
    criterion: str
    sign_choice: str | None = None
    theta2: float | None = None


@dataclass(frozen=True)
class OutputCumulants:
    """Cumulants of X_1 after a balanced beamsplitter.

    ``kappa4_x1`` is the quarter-sum of the input
    kappa4_paper values plus 4 <X_1> kappa3; ``kappa4_x1_std`` is the
    additive textbook value.  ``kappa4_discrepancy`` is their difference
    and is reported as is.
    """

    kappa3_x1: float
    kappa4_x1: float
    kappa4_x1_std: float
    mean_x1: float
    kappa4_discrepancy: float


def _result(value: float, threshold: float, theta=None, sign=None) -> CriterionResult:
    return CriterionResult(float(value), threshold, bool(value < threshold), theta, sign)


def output_variances(
    mode1: ModeParams, mode2: ModeParams, bs: BeamsplitterConfig, frame: FrameSpec
) -> TwoModeVariances:
    """Output variances and covariances from the input-mode statistics.

    The analysis angle is ``frame.effective_angle(mode1)``; in the rotating
    frame it therefore follows the first input's mean-field rotation and is
    applied unchanged to the second input.
    """
    theta = frame.effective_angle(mode1)
    lab_x = FrameSpec("lab", theta)
    lab_y = FrameSpec("lab", theta + math.pi / 2)
    q1x, q1y = quadrature_moments(mode1, lab_x), quadrature_moments(mode1, lab_y)
    q2x, q2y = quadrature_moments(mode2, lab_x), quadrature_moments(mode2, lab_y)
    vx_a1, vy_a1 = float(q1x.variance), float(q1y.variance)
    vx_a2, vy_a2 = float(q2x.variance), float(q2y.variance)
    eta = bs.eta
    cov = -math.sqrt(eta * (1 - eta)) * float(q1x.cov_xy + q2x.cov_xy)
    return TwoModeVariances(
        v_x1=eta * vx_a1 + (1 - eta) * vy_a2,
        v_x2=(1 - eta) * vy_a1 + eta * vx_a2,
        v_y1=eta * vy_a1 + (1 - eta) * vx_a2,
        v_y2=(1 - eta) * vx_a1 + eta * vy_a2,
        c_x1x2=cov,
        c_y1y2=-cov,
        theta=theta,
    )


def _sign_label(sign: int) -> str:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return "+" if sign > 0 else "-"


def duan_simon(v: TwoModeVariances, sign: int = 1) -> CriterionResult:
    """V(X1 +/- X2) + V(Y1 -/+ Y2); values below 4 certify entanglement.

    ``sign=+1`` pairs X1 + X2 with Y1 - Y2, ``sign=-1`` pairs X1 - X2 with
    Y1 + Y2.
    """
    label = _sign_label(sign)
    value = (v.v_x1 + v.v_x2 + 2 * sign * v.c_x1x2) + (v.v_y1 + v.v_y2 - 2 * sign * v.c_y1y2)
    return _result(value, DS_THRESHOLD, sign=label)


def reid_epr(v: TwoModeVariances, inferred_mode: int = 1) -> CriterionResult:
    """Product of inferred variances of mode ``inferred_mode``; below 1 is an EPR paradox."""
    if inferred_mode == 1:
        vx, vy, vx_k, vy_k = v.v_x1, v.v_y1, v.v_x2, v.v_y2
    elif inferred_mode == 2:
        vx, vy, vx_k, vy_k = v.v_x2, v.v_y2, v.v_x1, v.v_y1
    else:
        raise ValueError(f"inferred_mode must be 1 or 2, got {inferred_mode!r}")
    if vx_k < DEGENERATE_VARIANCE or vy_k < DEGENERATE_VARIANCE:
        raise DegenerateInputError(
            f"conditioning variances ({vx_k:.3g}, {vy_k:.3g}) of mode {3 - inferred_mode} "
            "are degenerate; the inferred variance is undefined"
        )
    inf_x = vx - v.c_x1x2**2 / vx_k
    inf_y = vy - v.c_y1y2**2 / vy_k
    return _result(inf_x * inf_y, REID_THRESHOLD)


# Vectorised second-order statistics for the angle search.  Each input mode
# enters through (excess, pair); see moments.Fluctuations.


def _pair_cov(f, phi1, phi2):
    """Symmetrized covariance of X(phi1) and X(phi2) for one mode."""
    return 2 * np.real(f.pair * np.exp(-1j * (phi1 + phi2))) + (1 + 2 * f.excess) * np.cos(phi1 - phi2)


def _output_terms(j: int, phi, eta: float):
    # X_{b_j}(phi) as [(input index, coefficient, input angle)]
    r, t = math.sqrt(eta), math.sqrt(1 - eta)
    if j == 1:
        return [(0, r, phi), (1, t, phi - math.pi / 2)]
    return [(0, t, phi - math.pi / 2), (1, r, phi)]


def _output_cov(flucts, eta, j, phi, k, psi):
    total = 0.0
    for m1, c1, a1 in _output_terms(j, phi, eta):
        for m2, c2, a2 in _output_terms(k, psi, eta):
            if m1 == m2:
                total = total + c1 * c2 * _pair_cov(flucts[m1], a1, a2)
    return total


def angle_landscape(
    mode1: ModeParams,
    mode2: ModeParams,
    bs: BeamsplitterConfig,
    theta1,
    theta2=None,
) -> dict[str, np.ndarray]:
    """Vectorised output statistics at analysis angles ``theta1`` (output 1) and ``theta2`` (output 2).

    ``theta2`` defaults to ``theta1``.  Returns the six (co)variances plus both
    Duan-Simon branches and both Reid products, broadcast over the inputs.
    """
    flucts = (fluctuations(mode1), fluctuations(mode2))
    return _landscape(flucts, bs.eta, theta1, theta1 if theta2 is None else theta2)


def _landscape(flucts, eta, theta1, theta2):
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    half = math.pi / 2
    v_x1 = _output_cov(flucts, eta, 1, theta1, 1, theta1)
    v_y1 = _output_cov(flucts, eta, 1, theta1 + half, 1, theta1 + half)
    v_x2 = _output_cov(flucts, eta, 2, theta2, 2, theta2)
    v_y2 = _output_cov(flucts, eta, 2, theta2 + half, 2, theta2 + half)
    c_x = _output_cov(flucts, eta, 1, theta1, 2, theta2)
    c_y = _output_cov(flucts, eta, 1, theta1 + half, 2, theta2 + half)
    with np.errstate(divide="ignore", invalid="ignore"):
        reid1 = (v_x1 - c_x**2 / v_x2) * (v_y1 - c_y**2 / v_y2)
        reid2 = (v_x2 - c_x**2 / v_x1) * (v_y2 - c_y**2 / v_y1)
    return {
        "v_x1": v_x1, "v_x2": v_x2, "v_y1": v_y1, "v_y2": v_y2,
        "c_x1x2": c_x, "c_y1y2": c_y,
        "ds_plus": v_x1 + v_x2 + 2 * c_x + v_y1 + v_y2 - 2 * c_y,
        "ds_minus": v_x1 + v_x2 - 2 * c_x + v_y1 + v_y2 + 2 * c_y,
        "reid_1": reid1, "reid_2": reid2,
    }


def _golden(f, lo: float, hi: float, tol: float = ANGLE_TOL) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def _minimise_periodic(f_vec, grid: int) -> tuple[float, float]:
    thetas = np.arange(grid) * (math.pi / grid)
    values = f_vec(thetas)
    i = int(np.argmin(values))  # lowest-angle tie-break
    step = math.pi / grid
    theta, value = _golden(lambda x: float(f_vec(np.array([x]))[0]), thetas[i] - step, thetas[i] + step)
    if value > values[i]:
        theta, value = thetas[i], float(values[i])
    return float(np.mod(theta, math.pi)), float(value)


def optimize_angle(
    mode1: ModeParams,
    mode2: ModeParams,
    bs: BeamsplitterConfig,
    criterion: Criterion = "duan-simon",
    *,
    inferred_mode: int = 1,
    independent: bool = False,
    grid: int = GRID_POINTS,
) -> AngleOptimum:
    """Minimise a criterion over the local-oscillator angle.

    A grid of ``grid`` angles over [0, pi) locates the best basin, then a
    golden-section search refines it to 1e-10 rad.  For Duan-Simon both sign
    branches are optimised and the better one is returned.  Angles are lab
    angles.  With ``independent=True`` each output gets its own angle
    (coordinate-wise refinement from a coarse 2-D grid).
    """
    flucts = (fluctuations(mode1), fluctuations(mode2))
    eta = bs.eta
    if criterion == "duan-simon":
        keys = [("ds_plus", "+"), ("ds_minus", "-")]
    elif criterion == "reid":
        if inferred_mode not in (1, 2):
            raise ValueError(f"inferred_mode must be 1 or 2, got {inferred_mode!r}")
        keys = [(f"reid_{inferred_mode}", None)]
    else:
        raise ValueError(f"unknown criterion {criterion!r}")

    best = None
    for key, sign in keys:
        if independent:
            candidate = _optimise_two_angles(flucts, eta, key, grid)
            candidate = AngleOptimum(candidate[0], candidate[2], criterion, sign, candidate[1])
        else:
            theta, value = _minimise_periodic(lambda th: _landscape(flucts, eta, th, th)[key], grid)
            candidate = AngleOptimum(theta, value, criterion, sign)
        if best is None or candidate.value < best.value:
            best = candidate
    return best


def _optimise_two_angles(flucts, eta, key, grid):
    n = max(grid // 4, 8)
    axis = np.arange(n) * (math.pi / n)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    values = _landscape(flucts, eta, t1, t2)[key]
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    th1, th2, value = axis[i], axis[j], float(values[i, j])
    step = math.pi / n
    for _ in range(50):
        th1, _ = _golden(lambda x: float(_landscape(flucts, eta, x, th2)[key]), th1 - step, th1 + step)
        th2, new = _golden(lambda x: float(_landscape(flucts, eta, th1, x)[key]), th2 - step, th2 + step)
        converged = value - new < 1e-15
        value = min(value, new)
        if converged:
            break
    return float(np.mod(th1, math.pi)), float(np.mod(th2, math.pi)), value


def output_cumulants(
    mode1: ModeParams, mode2: ModeParams, bs: BeamsplitterConfig, frame: FrameSpec
) -> OutputCumulants:
    """Third and fourth cumulants of X_1 behind a 50:50 beamsplitter."""
    if abs(bs.eta - 0.5) > 1e-15:
        raise ValueError(f"output cumulant relations hold only for eta = 1/2, got {bs.eta}")
    theta = frame.effective_angle(mode1)
    qa = quadrature_moments(mode1, FrameSpec("lab", theta))
    qb = quadrature_moments(mode2, FrameSpec("lab", theta + math.pi / 2))
    _, k3a, k4a, k4a_std = _cumulants_mp(qa.m1, qa.m2, qa.m3, qa.m4)
    _, k3b, k4b, k4b_std = _cumulants_mp(qb.m1, qb.m2, qb.m3, qb.m4)
    kappa3 = (k3a - k3b) / math.sqrt(8)
    mean = (qa.m1 - qb.m1) / math.sqrt(2)
    kappa4 = (k4a + k4b) / 4 + 4 * mean * kappa3
    kappa4_std = (k4a_std + k4b_std) / 4
    return OutputCumulants(
        kappa3_x1=float(kappa3),
        kappa4_x1=float(kappa4),
        kappa4_x1_std=float(kappa4_std),
        mean_x1=float(mean),
        kappa4_discrepancy=float(kappa4 - kappa4_std),
    )
