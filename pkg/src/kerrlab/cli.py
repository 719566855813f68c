"""Command-line entry point: ``kerrlab sweep | figure | oracle-check | optimize``.

Exit status: 0 success, 1 tolerance breach, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .entanglement import BeamsplitterConfig, DegenerateInputError, optimize_angle
from .moments import FrameSpec, ModeParams
from .sweep import FORMULAS, QUANTITIES, SweepSpec, SweepSpecError, oracle_check, sweep_table, write_table
from .sweep import reproduce_figure

EXIT_OK, EXIT_BREACH, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _add_output(p):
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_point(p):
    p.add_argument("--n-photons", type=_float_list, default=[1000.0], help="comma-separated mean photon numbers")
    axis = p.add_mutually_exclusive_group()
    axis.add_argument("--chi-t", dest="axis", action="store_const", const="chi_t", help="time axis is chi*t")
    axis.add_argument("--chi-n-t", dest="axis", action="store_const", const="chi_n_t", help="time axis is chi*N*t")
    p.add_argument("--eta", type=float, default=0.5, help="beamsplitter reflectivity")
    p.add_argument("--theta0", type=float, default=0.0, help="quadrature angle offset (radians)")
    p.add_argument("--frame", choices=("lab", "rotating"), default="rotating")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kerrlab", description="Kerr-squeezing statistics and entanglement sweeps.")
    parser.add_argument("--version", action="version", version=f"kerrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="evaluate quantities on an (N, time) grid")
    _add_point(sw)
    sw.add_argument("--start", type=float, default=0.0)
    sw.add_argument("--stop", type=float, default=2.0)
    sw.add_argument("--steps", type=int, default=101)
    sw.add_argument("--optimize-angle", action="store_true", help="add angle-optimized criteria")
    sw.add_argument("--quantities", default="variance,cumulants",
                    help=f"comma-separated subset of {','.join(QUANTITIES)}")
    sw.add_argument("--kappa4", choices=("paper", "standard", "both"), default="both")
    sw.add_argument("--jobs", type=int, default=1)
    _add_output(sw)

    fig = sub.add_parser("figure", help="write the data behind figure 1-7")
    fig.add_argument("id", type=int, choices=range(1, 8), metavar="{1..7}")
    fig.add_argument("--jobs", type=int, default=1)
    _add_output(fig)

    oc = sub.add_parser("oracle-check", help="compare closed forms against the Fock oracle")
    oc.add_argument("--max-n", type=int, default=25)
    oc.add_argument("--report", default="-")
    oc.add_argument("--inject-fault", choices=FORMULAS, help="perturb one formula to confirm the check fails")

    op = sub.add_parser("optimize", help="best quadrature angle at one point")
    _add_point(op)
    op.add_argument("--time", type=float, required=False, help="interaction time on the chosen axis")
    op.add_argument("--criterion", choices=("duan-simon", "reid"), default="duan-simon")
    op.add_argument("--independent", action="store_true", help="search separate angles for the two modes")
    _add_output(op)
    return parser


_CONVERTERS = {
    "n_photons": _float_list,
    "eta": float, "theta0": float, "start": float, "stop": float, "time": float,
    "steps": int, "jobs": int, "max_n": int,
    "optimize_angle": _bool, "independent": _bool,
}


def load_config(path: str) -> dict:
    """Parse ``key = value`` lines.  Keys use flag spelling without the dashes."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key == "axis":
                value = value.replace("-", "_")
            elif key in ("chi_t", "chi_n_t"):
                key, value = ("axis", key) if _bool(value) else (None, None)
                if key is None:
                    continue
            values[key] = _CONVERTERS.get(key, str)(value)
    return values


def _parse(parser: argparse.ArgumentParser, argv):
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if path:
        config = load_config(path)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = set(config) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    if getattr(args, "axis", "unset") is None:
        args.axis = "chi_n_t"
    return args


def _open(path):
    return sys.stdout if path == "-" else path


def _frame(args) -> FrameSpec:
    return FrameSpec(args.frame, args.theta0)


def _cmd_sweep(args) -> int:
    spec = SweepSpec(
        n_photons=tuple(args.n_photons),
        axis=args.axis,
        start=args.start,
        stop=args.stop,
        steps=args.steps,
        eta=args.eta,
        frame=_frame(args),
        optimize=args.optimize_angle,
        quantities=tuple(q.strip() for q in args.quantities.split(",") if q.strip()),
        kappa4=args.kappa4,
    )
    write_table(sweep_table(spec, args.jobs), _open(args.output), args.format)
    return EXIT_OK


def _cmd_figure(args) -> int:
    reproduce_figure(args.id, _open(args.output), args.format, args.jobs)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    result = oracle_check(args.max_n, _open(args.report), args.inject_fault)
    if not result.passed:
        print(f"tolerance breach in: {', '.join(result.failures)}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def _cmd_optimize(args) -> int:
    if args.time is None:
        raise ValueError("--time is required")
    if len(args.n_photons) != 1:
        raise ValueError("optimize takes a single --n-photons value")
    n_bar = args.n_photons[0]
    if not n_bar > 0:
        raise ValueError(f"--n-photons must be positive, got {n_bar}")
    chi_t = args.time if args.axis == "chi_t" else args.time / n_bar
    mode = ModeParams.from_photon_number(n_bar, chi_t)
    best = optimize_angle(mode, mode, BeamsplitterConfig(args.eta), args.criterion, independent=args.independent)
    row = {
        "n_photons": n_bar, "chi_t": chi_t, "chi_n_t": chi_t * n_bar, "eta": args.eta,
        "criterion": best.criterion, "value": best.value, "theta": best.theta,
        "theta2": best.theta if best.theta2 is None else best.theta2,
        "sign": best.sign_choice or "n/a",
    }
    if args.format == "json":
        text = json.dumps(row, indent=1) + "\n"
    else:
        text = ",".join(row) + "\n" + ",".join(
            format(v, ".17g") if isinstance(v, float) else str(v) for v in row.values()
        ) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


_COMMANDS = {"sweep": _cmd_sweep, "figure": _cmd_figure, "oracle-check": _cmd_oracle, "optimize": _cmd_optimize}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        return _COMMANDS[args.command](args)
    except (SweepSpecError, DegenerateInputError, ValueError, OSError) as exc:
        print(f"kerrlab: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
