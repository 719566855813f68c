"""Parameter sweeps, figure data and the analytic-versus-oracle check matrix."""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Iterator, Literal

import numpy as np

from . import __version__
from .cumulants import asymptotic_kappa3, cumulants, number_state_kappa4
from .entanglement import (
    BeamsplitterConfig,
    duan_simon,
    optimize_angle,
    output_cumulants,
    output_variances,
    reid_epr,
)
from .moments import FrameSpec, ModeParams, fluctuations, kerr_moment, quadrature_moments
from .oracle import ORACLE_MAX_N, kerr_state, oracle_moment, oracle_quadrature_moments, oracle_two_mode

__all__ = [
    "QUANTITIES",
    "SweepSpecError",
    "SweepSpec",
    "Table",
    "run_sweep",
    "sweep_table",
    "figure_table",
    "reproduce_figure",
    "write_table",
    "relative_error",
    "OracleReport",
    "oracle_check",
]

QUANTITIES = ("moments", "cumulants", "variance", "duan-simon", "reid", "asymptotics")
Axis = Literal["chi_t", "chi_n_t"]
Kappa4Variant = Literal["paper", "standard", "both"]

ResultRow = dict


class SweepSpecError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class SweepSpec:
    """Grid of photon numbers and interaction times to evaluate.

    Both input modes of the beamsplitter are the same real-amplitude Kerr
    state, ``alpha = sqrt(N)``.
    """

    n_photons: tuple[float, ...] = (1000.0,)
    axis: Axis = "chi_n_t"
    start: float = 0.0
    stop: float = 2.0
    steps: int = 101
    eta: float = 0.5
    frame: FrameSpec = field(default_factory=lambda: FrameSpec("rotating", 0.0))
    optimize: bool = False
    quantities: tuple[str, ...] = ("variance", "cumulants")
    kappa4: Kappa4Variant = "both"

    def validate(self) -> None:
        if not self.n_photons:
            raise SweepSpecError("n_photons", "at least one photon number is required")
        for n in self.n_photons:
            if not (math.isfinite(n) and n > 0):
                raise SweepSpecError("n_photons", f"every N must be positive and finite, got {n}")
        if self.axis not in ("chi_t", "chi_n_t"):
            raise SweepSpecError("axis", f"must be 'chi_t' or 'chi_n_t', got {self.axis!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise SweepSpecError("steps", f"must be an integer >= 2, got {self.steps}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or not self.start < self.stop:
            raise SweepSpecError("start/stop", f"need finite start < stop, got {self.start} >= {self.stop}")
        if not 0.0 <= self.eta <= 1.0:
            raise SweepSpecError("eta", f"must lie in [0, 1], got {self.eta}")
        if not math.isfinite(self.frame.theta0):
            raise SweepSpecError("theta0", "must be finite")
        unknown = set(self.quantities) - set(QUANTITIES)
        if unknown or not self.quantities:
            raise SweepSpecError("quantities", f"choose from {', '.join(QUANTITIES)}; got {sorted(unknown) or 'none'}")
        if self.kappa4 not in ("paper", "standard", "both"):
            raise SweepSpecError("kappa4", f"must be paper, standard or both, got {self.kappa4!r}")

    def times(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.steps))


@dataclass
class Table:
    """Rows plus the metadata written into the file header."""

    columns: list[str]
    rows: list[ResultRow]
    meta: dict[str, str]


def _kappa4_columns(variant: str) -> list[str]:
    return {"paper": ["kappa4_paper"], "standard": ["kappa4_std"], "both": ["kappa4_paper", "kappa4_std"]}[variant]


def sweep_columns(spec: SweepSpec) -> list[str]:
    cols = ["n_photons", "chi_t", "chi_n_t", "theta", "frame", "axis", "kappa4_variant"]
    q = set(spec.quantities)
    if "moments" in q:
        cols += ["m1", "m2", "m3", "m4", "cov_xy"]
    if "cumulants" in q:
        cols += ["kappa2", "kappa3"] + _kappa4_columns(spec.kappa4)
    if "variance" in q:
        cols += ["v_x", "v_y", "hup_product", "v_min"]
    if "duan-simon" in q:
        cols += ["ds_plus", "ds_minus"]
        if spec.optimize:
            cols += ["ds_opt", "ds_opt_theta", "ds_opt_sign"]
    if "reid" in q:
        cols += ["reid"]
        if spec.optimize:
            cols += ["reid_opt", "reid_opt_theta"]
    if "asymptotics" in q:
        cols += ["kappa3_scaled", "kappa3_asymptotic_scaled", "kappa4_scaled"]
    return cols


def evaluate_point(spec: SweepSpec, point: tuple[float, float]) -> ResultRow:
    """All requested quantities at one (N, time) grid point."""
    n_bar, t = point
    chi_t = t if spec.axis == "chi_t" else t / n_bar
    mode = ModeParams.from_photon_number(n_bar, chi_t)
    frame = spec.frame
    theta = frame.effective_angle(mode)
    row: ResultRow = {
        "n_photons": n_bar,
        "chi_t": chi_t,
        "chi_n_t": chi_t * n_bar,
        "theta": theta,
        "frame": f"{frame.kind}:{frame.theta0:.17g}",
        "axis": spec.axis,
        "kappa4_variant": spec.kappa4,
    }
    q = set(spec.quantities)
    if q & {"moments", "cumulants", "asymptotics"}:
        qm = quadrature_moments(mode, frame)
        cs = cumulants(qm)
    if "moments" in q:
        row.update(m1=float(qm.m1), m2=float(qm.m2), m3=float(qm.m3), m4=float(qm.m4), cov_xy=float(qm.cov_xy))
    if "cumulants" in q:
        row.update(kappa2=cs.kappa2, kappa3=cs.kappa3)
        if spec.kappa4 in ("paper", "both"):
            row["kappa4_paper"] = cs.kappa4_paper
        if spec.kappa4 in ("standard", "both"):
            row["kappa4_std"] = cs.kappa4_std
    if "variance" in q:
        f = fluctuations(mode)
        v_x, v_y = f.quadrature_variance(theta), f.quadrature_variance(theta + math.pi / 2)
        row.update(v_x=v_x, v_y=v_y, hup_product=v_x * v_y, v_min=f.principal_variances()[0])
    if q & {"duan-simon", "reid"}:
        bs = BeamsplitterConfig(spec.eta)
        tv = output_variances(mode, mode, bs, frame)
    if "duan-simon" in q:
        row.update(ds_plus=duan_simon(tv, 1).value, ds_minus=duan_simon(tv, -1).value)
        if spec.optimize:
            best = optimize_angle(mode, mode, bs, "duan-simon")
            row.update(ds_opt=best.value, ds_opt_theta=best.theta, ds_opt_sign=best.sign_choice)
    if "reid" in q:
        row["reid"] = reid_epr(tv, 1).value
        if spec.optimize:
            best = optimize_angle(mode, mode, bs, "reid")
            row.update(reid_opt=best.value, reid_opt_theta=best.theta)
    if "asymptotics" in q:
        chi_n_t = chi_t * n_bar
        row.update(
            kappa3_scaled=cs.kappa3 * math.sqrt(n_bar),
            kappa3_asymptotic_scaled=asymptotic_kappa3(n_bar, chi_n_t) * math.sqrt(n_bar),
            kappa4_scaled=(cs.kappa4_std if spec.kappa4 == "standard" else cs.kappa4_paper) * n_bar,
        )
    return row


def _map_points(fn: Callable, points: list, jobs: int) -> list:
    if jobs <= 1 or len(points) < 2:
        return [fn(p) for p in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, points, chunksize=max(1, len(points) // (4 * jobs))))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> Iterator[ResultRow]:
    """Rows in canonical order (N-major, then time ascending), independent of ``jobs``."""
    spec.validate()
    points = [(float(n), float(t)) for n in spec.n_photons for t in spec.times()]
    yield from _map_points(partial(evaluate_point, spec), points, jobs)


def sweep_table(spec: SweepSpec, jobs: int = 1) -> Table:
    rows = list(run_sweep(spec, jobs))
    meta = {
        "figure": "none",
        "frame": spec.frame.kind,
        "theta0": f"{spec.frame.theta0:.17g}",
        "axis": spec.axis,
        "eta": f"{spec.eta:.17g}",
        "kappa4": spec.kappa4,
        "optimize": str(spec.optimize).lower(),
    }
    return Table(sweep_columns(spec), rows, meta)


# Figures.  Each builder returns the point list, a row function and metadata.

FIG1_N = (1e2, 1e3, 1e4, 1e6)
FIG_SCAN_N = tuple(int(round(10 ** (1 + k / 4))) for k in range(25))  # 10 .. 1e7
FIG_FIXED_CHI_N_T = 25.0
FIG_TWO_MODE_N = 1000.0
ROTATING_Y = FrameSpec("rotating", math.pi / 2)
ROTATING_X = FrameSpec("rotating", 0.0)


def _fig_cumulant_time(point, order):
    n_bar, chi_n_t = point
    mode = ModeParams.from_photon_number(n_bar, chi_n_t / n_bar)
    cs = cumulants(quadrature_moments(mode, ROTATING_Y))
    row = {"n_photons": n_bar, "chi_n_t": chi_n_t}
    if order == 3:
        row.update(
            kappa3=cs.kappa3,
            kappa3_scaled=cs.kappa3 * math.sqrt(n_bar),
            kappa3_asymptotic_scaled=asymptotic_kappa3(n_bar, chi_n_t) * math.sqrt(n_bar),
        )
    else:
        row.update(
            kappa4_paper=cs.kappa4_paper,
            kappa4_std=cs.kappa4_std,
            kappa4_paper_scaled=cs.kappa4_paper * n_bar,
            kappa4_std_scaled=cs.kappa4_std * n_bar,
            kappa4_number_state=number_state_kappa4(int(round(n_bar))),
        )
    return row


def _fig_cumulant_number(n_bar, order):
    mode = ModeParams.from_photon_number(n_bar, FIG_FIXED_CHI_N_T / n_bar)
    cs = cumulants(quadrature_moments(mode, ROTATING_Y))
    if order == 3:
        return {"N": n_bar, "kappa3": cs.kappa3, "kappa3_scaled": cs.kappa3 * math.sqrt(n_bar)}
    return {
        "N": n_bar,
        "kappa4_kerr": cs.kappa4_paper,
        "kappa4_kerr_std": cs.kappa4_std,
        "kappa4_number_state": number_state_kappa4(n_bar),
    }


def _fig_variances(chi_n_t):
    mode = ModeParams.from_photon_number(FIG_TWO_MODE_N, chi_n_t / FIG_TWO_MODE_N)
    f = fluctuations(mode)
    theta = ROTATING_X.effective_angle(mode)
    v_x, v_y = f.quadrature_variance(theta), f.quadrature_variance(theta + math.pi / 2)
    v_min, v_max = f.principal_variances()
    return {
        "chi_n_t": chi_n_t, "v_x": v_x, "v_y": v_y,
        "v_min": v_min, "v_max": v_max, "hup_product": v_x * v_y, "hup_principal": v_min * v_max,
    }


def _fig_two_mode(chi_t, criterion):
    mode = ModeParams.from_photon_number(FIG_TWO_MODE_N, chi_t)
    bs = BeamsplitterConfig(0.5)
    tv = output_variances(mode, mode, bs, ROTATING_X)
    best = optimize_angle(mode, mode, bs, criterion)
    row = {"chi_t": chi_t, "chi_n_t": chi_t * FIG_TWO_MODE_N}
    if criterion == "duan-simon":
        row.update(
            ds_x1_minus_x2=duan_simon(tv, -1).value,
            ds_x1_plus_x2=duan_simon(tv, 1).value,
            ds_opt=best.value,
            theta_opt=best.theta,
            opt_sign=best.sign_choice,
        )
    else:
        row.update(reid_canonical=reid_epr(tv, 1).value, reid_opt=best.value, theta_opt=best.theta)
    return row


def _figure_plan(fig_id: int):
    """(points, row function, columns, metadata) for one figure."""
    chi_n_t_grid = [float(x) for x in np.linspace(0.0, 2.0, 101)]
    if fig_id in (1, 2):
        order = 3 if fig_id == 1 else 4
        points = [(n, x) for n in FIG1_N for x in chi_n_t_grid]
        fn = partial(_fig_cumulant_time, order=order)
        cols = (
            ["n_photons", "chi_n_t", "kappa3", "kappa3_scaled", "kappa3_asymptotic_scaled"]
            if order == 3
            else ["n_photons", "chi_n_t", "kappa4_paper", "kappa4_std", "kappa4_paper_scaled",
                  "kappa4_std_scaled", "kappa4_number_state"]
        )
        meta = {"frame": "rotating", "theta0": "pi/2", "axis": "chi_n_t",
                "scaling": "kappa3*sqrt(N)" if order == 3 else "kappa4*N",
                "kappa4": "both" if order == 4 else "n/a"}
    elif fig_id in (3, 4):
        order = fig_id
        points = list(FIG_SCAN_N)
        fn = partial(_fig_cumulant_number, order=order)
        cols = (["N", "kappa3", "kappa3_scaled"] if order == 3
                else ["N", "kappa4_kerr", "kappa4_kerr_std", "kappa4_number_state"])
        meta = {"frame": "rotating", "theta0": "pi/2", "axis": "N", "chi_n_t": "25",
                "kappa4": "kappa4_kerr=paper,kappa4_kerr_std=standard" if order == 4 else "n/a"}
    elif fig_id == 5:
        points = [float(x) for x in np.linspace(0.0, 3.0, 151)]
        fn = _fig_variances
        cols = ["chi_n_t", "v_x", "v_y", "v_min", "v_max", "hup_product", "hup_principal"]
        meta = {"frame": "rotating", "theta0": "0", "axis": "chi_n_t", "n_photons": "1000",
                "v_min": "principal (optimal-angle) variance"}
    elif fig_id in (6, 7):
        points = [float(x) for x in np.linspace(0.0, 3e-3, 151)]
        criterion = "duan-simon" if fig_id == 6 else "reid"
        fn = partial(_fig_two_mode, criterion=criterion)
        cols = (["chi_t", "chi_n_t", "ds_x1_minus_x2", "ds_x1_plus_x2", "ds_opt", "theta_opt", "opt_sign"]
                if fig_id == 6 else ["chi_t", "chi_n_t", "reid_canonical", "reid_opt", "theta_opt"])
        meta = {"frame": "rotating", "theta0": "0", "axis": "chi_t", "n_photons": "1000", "eta": "0.5",
                "theta_opt": "lab angle, common to both outputs"}
    else:
        raise ValueError(f"unknown figure id {fig_id!r}; choose 1-7")
    return points, fn, cols, meta


def figure_table(fig_id: int, jobs: int = 1) -> Table:
    points, fn, cols, meta = _figure_plan(fig_id)
    rows = _map_points(fn, points, jobs)
    return Table(cols, rows, {"figure": str(fig_id), **meta})


def reproduce_figure(fig_id: int, out, fmt: str = "csv", jobs: int = 1) -> Table:
    table = figure_table(fig_id, jobs)
    write_table(table, out, fmt)
    return table


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_table(table: Table, out, fmt: str = "csv") -> None:
    """Write to a path or a text stream.  CSV gets a '#' metadata header."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    if fmt == "csv":
        meta = dict(table.meta)
        first = (
            f"# kerrlab v{__version__} figure={meta.pop('figure', 'none')} "
            f"frame={meta.pop('frame', 'n/a')} axis={meta.pop('axis', 'n/a')}"
        )
        buf.write(first + "\n")
        for key, value in meta.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format(row[c]) for c in table.columns])
    else:
        json.dump([{c: row[c] for c in table.columns} for row in table.rows], buf, indent=1, allow_nan=False)
        buf.write("\n")
    text = buf.getvalue()
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# Analytic-versus-oracle equivalence matrix.

CHECK_N = (1, 4, 16, 25)
CHECK_CHI_T = (1e-3, 1e-2, 1e-1)
CHECK_ETA = (0.3, 0.5, 0.7)
CHECK_THETA = (0.0, math.pi / 2, 0.3)
CHECK_TOLERANCE = 1e-9
ERROR_FLOOR = 1e-6
SECOND_PHASE = 0.7
FORMULAS = (
    "mean_amplitude",
    "normal_ordered_moments",
    "quadrature_moments",
    "output_variances",
    "output_covariances",
    "duan_simon",
    "reid_inferred",
    "output_cumulants",
)


def relative_error(a: float | complex, b: float | complex, floor: float = ERROR_FLOOR) -> float:
    """|a - b| / max(|a|, |b|, floor).

    With tolerance 1e-9 this passes values that agree to 1e-9 relative, or
    to 1e-15 absolute when both are essentially zero.
    """
    return abs(a - b) / max(abs(a), abs(b), floor)


@dataclass
class OracleReport:
    worst: dict[str, float]
    where: dict[str, str]
    tolerance: float
    cases: int

    @property
    def failures(self) -> list[str]:
        return [name for name, err in self.worst.items() if not err <= self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failures

    def render(self) -> str:
        lines = [f"# kerrlab v{__version__} oracle-check cases={self.cases} tolerance={self.tolerance:g}"]
        lines.append("formula,worst_relative_error,status,worst_case")
        for name in FORMULAS:
            err = self.worst[name]
            status = "PASS" if err <= self.tolerance else "FAIL"
            lines.append(f"{name},{err:.3e},{status},{self.where[name]}")
        lines.append(f"# overall={'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def check_photon_numbers(max_n: int) -> list[int]:
    if max_n < 0 or max_n > ORACLE_MAX_N:
        raise ValueError(f"max_n must lie in [0, {ORACLE_MAX_N}], got {max_n}")
    values = {n for n in CHECK_N if n <= max_n}
    values.add(max_n)
    return sorted(values)


def oracle_check(
    max_n: int = 25,
    report=None,
    inject_fault: str | None = None,
    photon_numbers: Iterable[int] | None = None,
    error_floor: float = ERROR_FLOOR,
) -> OracleReport:
    """Compare every closed-form quantity against the Fock oracle on a fixed grid.

    ``inject_fault`` names a formula whose analytic value is perturbed by one
    part in 1e6 before comparison; it exists to prove that the check can fail.
    ``error_floor=0`` makes the comparison purely relative (two exact zeros
    still count as agreement).
    """
    if inject_fault is not None and inject_fault not in FORMULAS:
        raise ValueError(f"unknown formula {inject_fault!r}; choose from {', '.join(FORMULAS)}")
    numbers = list(photon_numbers) if photon_numbers is not None else check_photon_numbers(max_n)
    worst = {name: 0.0 for name in FORMULAS}
    where = {name: "-" for name in FORMULAS}
    cases = 0

    def record(name, analytic, exact, label):
        if name == inject_fault:
            analytic = analytic * (1 + 1e-6) + 1e-6
        err = relative_error(analytic, exact, error_floor) if analytic != exact else 0.0
        if err > worst[name] or math.isnan(err):
            worst[name] = err
            where[name] = label

    for n_bar in numbers:
        for chi_t in CHECK_CHI_T:
            mode1 = ModeParams.from_photon_number(n_bar, chi_t)
            mode2 = ModeParams(cmath.rect(math.sqrt(n_bar), SECOND_PHASE), chi_t)
            state = kerr_state(mode1)
            label = f"N={n_bar} chi_t={chi_t:g}"
            record("mean_amplitude", kerr_moment(mode1, 0, 1), oracle_moment(state, 0, 1), label)
            for p in range(5):
                for q in range(5 - p):
                    record("normal_ordered_moments", kerr_moment(mode1, p, q), oracle_moment(state, p, q),
                           f"{label} p={p} q={q}")
            for theta in CHECK_THETA:
                lab = FrameSpec("lab", theta)
                qa = quadrature_moments(mode1, lab)
                qo = oracle_quadrature_moments(state, theta)
                for name in ("m1", "m2", "m3", "m4", "cov_xy"):
                    record("quadrature_moments", float(getattr(qa, name)), getattr(qo, name),
                           f"{label} theta={theta:.4g} {name}")
                for eta in CHECK_ETA:
                    cases += 1
                    case = f"{label} theta={theta:.4g} eta={eta}"
                    bs = BeamsplitterConfig(eta)
                    tv = output_variances(mode1, mode2, bs, lab)
                    ov = oracle_two_mode(mode1, mode2, eta, theta)
                    for name in ("v_x1", "v_x2", "v_y1", "v_y2"):
                        record("output_variances", getattr(tv, name), getattr(ov.variances, name), f"{case} {name}")
                    for name in ("c_x1x2", "c_y1y2"):
                        record("output_covariances", getattr(tv, name), getattr(ov.variances, name), f"{case} {name}")
                    record("duan_simon", duan_simon(tv, 1).value, ov.duan_simon_plus, f"{case} +")
                    record("duan_simon", duan_simon(tv, -1).value, ov.duan_simon_minus, f"{case} -")
                    record("reid_inferred", reid_epr(tv, 1).value, ov.reid_1, f"{case} j=1")
                    record("reid_inferred", reid_epr(tv, 2).value, ov.reid_2, f"{case} j=2")
                    if eta == 0.5:
                        oc = output_cumulants(mode1, mode2, bs, lab)
                        record("output_cumulants", oc.kappa3_x1, ov.kappa3_x1, f"{case} kappa3")
    result = OracleReport(worst, where, CHECK_TOLERANCE, cases)
    if report is not None:
        text = result.render()
        if hasattr(report, "write"):
            report.write(text)
        else:
            with open(report, "w") as fh:
                fh.write(text)
    return result
