"""Command-line interface.

Exit codes: 0 success, 2 the process has no Bayesian inverse channel,
3 the predicted state is rank deficient, 64 bad usage, 65 unparsable input.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys

import numpy as np

from . import adc, bayes, circuit, linalg
from .channel import Process, channel_from_json, channel_to_json, identity_channel
from .errors import DimMismatch, NotInvertible, ParamOutOfRange, QsotError, RankDeficientPrediction

EXIT_OK = 0
EXIT_NOT_INVERTIBLE = 2
EXIT_RANK = 3
EXIT_USAGE = 64
EXIT_PARSE = 65

TABLE_NAMES = ("forward", "bayes", "petz", "ls_forward", "ls_petz")


class UsageError(Exception):
    pass


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- formatting ---------------------------------------------------------------


def fmt(x: float) -> str:
    """12 significant digits; negative zero prints as 0."""
    x = float(x) + 0.0
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _clean(obj):
    if isinstance(obj, float):
        return 0.0 if obj == 0 else obj
    if isinstance(obj, np.floating):
        return _clean(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def dump_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


@contextlib.contextmanager
def _tolerance(tol: float | None):
    """Temporarily route ``--tol`` through the QSOT_TOL variable read by the library."""
    if tol is None:
        yield
        return
    old = os.environ.get("QSOT_TOL")
    os.environ["QSOT_TOL"] = repr(tol)
    try:
        yield
    finally:
        if old is None:
            del os.environ["QSOT_TOL"]
        else:
            os.environ["QSOT_TOL"] = old


# -- validation ---------------------------------------------------------------


def _check_r3(r3: float) -> float:
    if not -1.0 < r3 < 1.0:
        raise UsageError(f"--r3 must lie in (-1, 1), got {r3}")
    return r3


def _check_unit(name: str, v: float) -> float:
    if not 0.0 <= v <= 1.0:
        raise UsageError(f"--{name} must lie in [0, 1], got {v}")
    return v


def _not_invertible_message(r3: float, gamma: float) -> str:
    bound = gamma / (gamma - 2.0)
    return f"no Bayesian inverse channel: r3 = {fmt(r3)} < gamma/(gamma-2) = {fmt(bound)}"


# -- subcommands --------------------------------------------------------------


def cmd_tables(args) -> int:
    r3 = _check_r3(args.r3)
    gamma = _check_unit("gamma", args.gamma)
    wanted = {
        "forward": ["forward"],
        "bayes": ["bayes"],
        "petz": ["petz"],
        "ls": ["ls_forward", "ls_petz"],
        "all": list(TABLE_NAMES),
    }[args.which]
    if "bayes" in wanted and not adc.cp_condition(r3, gamma):
        print(f"qsot: {_not_invertible_message(r3, gamma)}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    t = adc.tables(r3, gamma)
    if args.format == "json":
        doc = {"r3": r3, "gamma": gamma, "s3": adc.s3(r3, gamma)}
        doc.update({name: getattr(t, name) for name in wanted})
        _emit(dump_json(doc), args.output)
    else:
        rows = []
        for name in wanted:
            for a, row in enumerate(getattr(t, name)):
                rows.append([name, str(a)] + list(row))
        _emit(dump_csv(["table", "first", "sigma0", "sigma1", "sigma2", "sigma3"], rows), args.output)
    return EXIT_OK


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _state_from_json(doc) -> np.ndarray:
    if isinstance(doc, dict) and "bloch" in doc:
        from .observable import bloch_state

        r = doc["bloch"]
        if not (isinstance(r, list) and len(r) == 3):
            raise ValueError("'bloch' must be a list of three numbers")
        return bloch_state(r)
    if isinstance(doc, dict) and "matrix" in doc:
        doc = doc["matrix"]
    return linalg.matrix_from_json(doc)


def cmd_invert(args) -> int:
    try:
        ch = channel_from_json(_load_json(args.channel))
        rho = _state_from_json(_load_json(args.state))
        proc = Process(ch, rho)
    except ParseError:
        raise
    except (ValueError, TypeError, QsotError) as exc:
        raise ParseError(str(exc)) from None
    tol = linalg.default_tol()
    cand = bayes.bayes_candidate_eigen(proc)
    report = bayes.verify_bayes(proc, cand, tol)
    inverse = bayes.bayesian_inverse(proc, tol) if report.is_cp else None
    doc = {
        "is_cp": report.is_cp,
        "min_choi_eig": report.min_choi_eig,
        "defining_residual": report.defining_eq_residual,
        "symmetry_residual": report.symmetry_residual,
        "inverse": channel_to_json(inverse) if inverse else None,
    }
    _emit(dump_json(doc), args.output)
    if not report.is_cp:
        print(f"qsot: candidate is not completely positive (min Choi eigenvalue {fmt(report.min_choi_eig)})",
              file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    return EXIT_OK


def _grid(name: str, spec, lo_bound: float, hi_bound: float) -> np.ndarray:
    lo, hi, n = spec
    n_int = int(n)
    if n_int != n or n_int < 0:
        raise UsageError(f"--{name} resolution must be a non-negative integer")
    if lo > hi:
        raise UsageError(f"--{name} range is reversed ({lo} > {hi})")
    if lo < lo_bound or hi > hi_bound:
        raise UsageError(f"--{name} range must stay within [{lo_bound}, {hi_bound}]")
    if n_int == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n_int)


def cmd_region(args) -> int:
    eps = _grid("epsilon", args.epsilon, 0.0, 1.0)
    gam = _grid("gamma", args.gamma, 0.0, 1.0)
    r3s = _grid("r3", args.r3, -1.0, 1.0)
    if r3s.size and (r3s[0] <= -1.0 or r3s[-1] >= 1.0):
        raise UsageError("--r3 range must lie strictly inside (-1, 1)")
    points = adc.region_scan(eps, gam, r3s)
    if args.format == "json":
        doc = [{"epsilon": p.epsilon, "gamma": p.gamma, "r3": p.r3, "inside": int(p.inside)} for p in points]
        _emit(dump_json(doc), args.output)
    else:
        rows = [[p.epsilon, p.gamma, p.r3, str(int(p.inside))] for p in points]
        _emit(dump_csv(["epsilon", "gamma", "r3", "inside"], rows), args.output)
    return EXIT_OK


def cmd_bloch(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.channel:
        try:
            ch = channel_from_json(_load_json(args.channel))
        except ParseError:
            raise
        except (ValueError, TypeError, QsotError) as exc:
            raise ParseError(str(exc)) from None
        if (ch.dim_in, ch.dim_out) != (2, 2):
            raise ParseError("bloch needs a qubit channel")
    elif args.r3 is None and args.gamma is None and args.map is None:
        ch = identity_channel(2)
    else:
        if args.gamma is None:
            raise UsageError("--gamma is required unless --channel is given")
        gamma = _check_unit("gamma", args.gamma)
        which = args.map or "forward"
        if which == "forward":
            ch = adc.adc_channel(gamma)
        else:
            if args.r3 is None:
                raise UsageError(f"--r3 is required for --map {which}")
            r3 = _check_r3(args.r3)
            ch = adc.bayes_or_petz(r3, gamma, which)
            if which == "bayes" and not adc.cp_condition(r3, gamma):
                print(f"qsot: warning: {_not_invertible_message(r3, gamma)}; "
                      "sampling the non-positive candidate map", file=sys.stderr)
    pairs = adc.bloch_image(ch, args.n, args.seed)
    if args.format == "json":
        doc = [{"in": list(a), "out": list(b)} for a, b in pairs]
        _emit(dump_json(doc), args.output)
    else:
        rows = [list(a) + list(b) for a, b in pairs]
        _emit(dump_csv(["x", "y", "z", "x_out", "y_out", "z_out"], rows), args.output)
    return EXIT_OK


def cmd_circuit(args) -> int:
    r3 = _check_r3(args.r3)
    gamma = _check_unit("gamma", args.gamma)
    if args.mode == "shots" and args.shots < 1:
        raise UsageError("--shots must be at least 1")
    if args.direction == "forward":
        c = circuit.forward_circuit(args.alpha, args.beta, r3, gamma)
    else:
        if not adc.cp_condition(r3, gamma):
            print(f"qsot: {_not_invertible_message(r3, gamma)}", file=sys.stderr)
            return EXIT_NOT_INVERTIBLE
        c = circuit.reverse_circuit(args.beta, args.alpha, r3, gamma)
    if args.mode == "exact":
        res = circuit.simulate_exact(c)
    else:
        res = circuit.simulate_shots(c, args.shots, args.seed)
    _emit(dump_json({"expectation": res.expectation, "stderr": res.stderr, "shots": res.shots}), args.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, formats: bool = True) -> None:
    p.add_argument("--output", "-o", default=None, help="output file (default: standard output)")
    if formats:
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default: csv)")
    p.add_argument("--tol", type=float, default=None,
                   help="numerical tolerance; overrides the QSOT_TOL environment variable (default 1e-9)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsot", description="States over time, two-time expectation values and Bayesian inverses.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tables", help="two-time expectation value tables of the amplitude-damping example")
    p.add_argument("--r3", type=float, required=True, help="Bloch z-component of the prior state")
    p.add_argument("--gamma", type=float, required=True, help="damping parameter in [0, 1]")
    p.add_argument("--which", choices=("forward", "bayes", "petz", "ls", "all"), default="all",
                   help="which tables to emit; ls gives both Leifer-Spekkens tables")
    _common(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("invert", help="Bayesian inverse of a channel and a state given as JSON documents")
    p.add_argument("channel", help='channel JSON: {"kraus": [Matrix, ...]} or {"choi": Matrix}')
    p.add_argument("state", help='state JSON: Matrix, {"matrix": Matrix} or {"bloch": [x, y, z]}')
    _common(p, formats=False)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("region", help="scan the invertibility region of the depolarized amplitude-damping channel")
    p.add_argument("--epsilon", nargs=3, type=float, metavar=("LO", "HI", "N"), default=(0.025, 0.975, 21),
                   help="depolarizing weight grid (default 0.025 0.975 21)")
    p.add_argument("--gamma", nargs=3, type=float, metavar=("LO", "HI", "N"), default=(0.025, 0.975, 21),
                   help="damping grid (default 0.025 0.975 21)")
    p.add_argument("--r3", nargs=3, type=float, metavar=("LO", "HI", "N"), default=(-0.95, 0.95, 21),
                   help="prior Bloch z grid (default -0.95 0.95 21)")
    _common(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("bloch", help="sample the image of the Bloch ball under a qubit map")
    p.add_argument("--channel", default=None, help="channel JSON document (overrides --map)")
    p.add_argument("--r3", type=float, default=None, help="prior Bloch z (needed for bayes and petz)")
    p.add_argument("--gamma", type=float, default=None, help="damping parameter")
    p.add_argument("--map", choices=("forward", "bayes", "petz"), default=None,
                   help="forward channel, Bayes inverse candidate, or Petz map (default forward)")
    p.add_argument("--n", type=int, default=500, help="number of sample points (default 500)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    _common(p)
    p.set_defaults(func=cmd_bloch)

    p = sub.add_parser("circuit", help="simulate the two-time measurement circuits")
    p.add_argument("--alpha", type=int, choices=range(4), required=True, help="Pauli index measured on the input")
    p.add_argument("--beta", type=int, choices=range(4), required=True, help="Pauli index measured on the output")
    p.add_argument("--r3", type=float, required=True, help="prior Bloch z")
    p.add_argument("--gamma", type=float, required=True, help="damping parameter")
    p.add_argument("--mode", choices=("exact", "shots"), default="exact", help="exact branching or sampled shots")
    p.add_argument("--shots", type=int, default=100000, help="number of shots in shots mode (default 100000)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--direction", choices=("forward", "reverse"), default="forward",
                   help="forward: sigma_alpha, channel, sigma_beta; reverse: sigma_beta, inverse, sigma_alpha")
    _common(p, formats=False)
    p.set_defaults(func=cmd_circuit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and not (np.isfinite(args.tol) and args.tol > 0):
        parser.error("--tol must be a positive finite number")
    try:
        with _tolerance(args.tol):
            linalg.default_tol()
            return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except ParseError as exc:
        print(f"qsot: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RankDeficientPrediction as exc:
        print(f"qsot: {exc}", file=sys.stderr)
        return EXIT_RANK
    except NotInvertible as exc:
        print(f"qsot: {exc}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    except (ParamOutOfRange, DimMismatch) as exc:
        parser.error(str(exc))
    except ValueError as exc:
        if "QSOT_TOL" in str(exc):
            parser.error(str(exc))
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
