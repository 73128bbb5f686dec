"""Command-line front end.

Exit codes: 0 success, 1 usage/file/parse error, 2 unphysical input,
3 numerical failure, 4 property failure in ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from importlib import resources

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, OutOfDomainError, UnphysicalStateError
from .optimize import (
    brute_force_optimal,
    fidelity_bounds,
    omega_theta,
    optimal_tgcp,
)
from .state import TwoModeCM, from_blocks, invariants, log_negativity, make_cm, pt_spectrum, random_entangled_cm
from .teleport import fidelity_coherent, isotropize_noise, noise_matrix, swap_nu

SCHEMA_VERSION = "1.0"
UINT64_MAX = 2**64 - 1

EXIT_OK, EXIT_USAGE, EXIT_UNPHYSICAL, EXIT_NUMERICAL, EXIT_PROPERTY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _uint64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= UINT64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def load_schema() -> dict:
    text = resources.files("cvtelefid").joinpath("schema/report-v1.schema.json").read_text("utf-8")
    return json.loads(text)


def dumps(doc) -> str:
    """Deterministic JSON; floats use the shortest round-trip representation."""
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def parse_cm_document(doc, tol: float = 1e-9) -> tuple:
    """Validate a CM document; returns ``(label, TwoModeCM)``.

    Raises:
        InvalidInputError: malformed document.
        UnphysicalStateError: the matrix is not a physical covariance matrix.
    """
    if not isinstance(doc, dict):
        raise InvalidInputError("document must be a JSON object")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise InvalidInputError("label must be a string")
    has_cm, has_blocks = "cm" in doc, "blocks" in doc
    if has_cm == has_blocks:
        raise InvalidInputError("document needs exactly one of 'cm' or 'blocks'")
    try:
        if has_cm:
            M = np.array(doc["cm"], dtype=float)
            if M.shape != (4, 4):
                raise InvalidInputError(f"'cm' must be a 4x4 array, got shape {M.shape}")
            return label, make_cm(M, tol)
        blk = doc["blocks"]
        if not isinstance(blk, dict) or set(blk) != {"A", "B", "C"}:
            raise InvalidInputError("'blocks' must contain exactly A, B and C")
        mats = {}
        for key in "ABC":
            mats[key] = np.array(blk[key], dtype=float)
            if mats[key].shape != (2, 2):
                raise InvalidInputError(f"block {key} must be 2x2")
        return label, from_blocks(mats["A"], mats["B"], mats["C"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"non-numeric matrix entries: {exc}") from None


def _mat(M) -> list:
    return [[float(x) for x in row] for row in M]


def build_report(label: str, V: TwoModeCM, oracle: bool = False, seed: int = 0, starts: int = 32) -> dict:
    spec = pt_spectrum(V)
    inv = invariants(V)
    rep = optimal_tgcp(V)
    try:
        om = omega_theta(V)
        om_doc = {"theta": om.theta, "epsilon": om.epsilon, "fidelity": om.fidelity}
    except OutOfDomainError:
        om_doc = None
    m = rep.optimal_map
    doc = {
        "schema_version": SCHEMA_VERSION,
        "label": label,
        "nu": spec.nu,
        "mu": spec.mu,
        "log_negativity": log_negativity(V),
        "entangled": rep.entangled,
        "invariants": {"a": inv.a, "b": inv.b, "c": inv.c, "sign_detC": inv.sign_detC, "v": inv.v},
        "fidelity_unoptimized": rep.f_unoptimized,
        "bounds": {"lower": rep.bounds.lower, "upper": rep.bounds.upper},
        "omega_theta": om_doc,
        "optimal": {
            "fidelity": rep.f_opt,
            "eta": rep.tau_star,
            "lambda": rep.lam_star,
            "attenuation_side": rep.attenuation_side,
            "tau": rep.tau_star,
            "S_a": _mat(m.S_a),
            "G_a": _mat(m.G_a),
            "S_b": _mat(m.S_b),
            "G_b": _mat(m.G_b),
        },
        "notes": list(rep.notes),
    }
    if oracle:
        res = brute_force_optimal(V, starts, seed)
        doc["oracle"] = {"fidelity": res.fidelity, "starts": starts, "seed": seed}
    return doc


def _error_doc(kind: str, message: str, **extra) -> str:
    body = {"kind": kind, "message": message}
    body.update(extra)
    return dumps({"schema_version": SCHEMA_VERSION, "error": body})


def cmd_analyze(args) -> int:
    try:
        with open(args.input_path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(_error_doc("file", str(exc)))
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(_error_doc("parse", f"invalid JSON: {exc}"))
        return EXIT_USAGE
    try:
        label, V = parse_cm_document(doc, args.tol)
    except UnphysicalStateError as exc:
        print(_error_doc("unphysical", str(exc), williamson_eigenvalue=exc.eigenvalue))
        return EXIT_UNPHYSICAL
    except InvalidInputError as exc:
        print(_error_doc("invalid", str(exc)))
        return EXIT_USAGE
    try:
        report = build_report(label, V, args.oracle, args.seed, args.oracle_starts)
    except (NumericalFailureError, OutOfDomainError, ValueError) as exc:
        print(_error_doc("numerical", str(exc)))
        return EXIT_NUMERICAL
    print(dumps(report))
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds / swap-demo
# ---------------------------------------------------------------------------


def linear_grid(lo: float, hi: float, steps: int) -> list:
    """``steps`` evenly spaced points with both ends exact."""
    h = (hi - lo) / (steps - 1)
    return [lo + k * h for k in range(steps - 1)] + [hi]


def bounds_rows(nu_min: float, nu_max: float, steps: int) -> list:
    if not (0.0 < nu_min <= nu_max <= 1.0) or steps < 2:
        raise UsageError("need 0 < nu-min <= nu-max <= 1 and steps >= 2")
    rows = []
    for nu in linear_grid(nu_min, nu_max, steps):
        b = fidelity_bounds(nu)
        rows.append((nu, b.lower, b.upper, b.upper - b.lower))
    return rows


def swap_rows(n_opt: float, r_max: float, steps: int) -> list:
    if not (n_opt >= 0 and r_max > 0 and steps >= 2) or not math.isfinite(n_opt + r_max):
        raise UsageError("need n-opt >= 0, r-max > 0 and steps >= 2")
    return [(r, swap_nu(n_opt, r)) for r in linear_grid(0.0, r_max, steps)]


def _write_csv(stream, header, rows):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) for x in row])


def cmd_bounds(args) -> int:
    try:
        rows = bounds_rows(args.nu_min, args.nu_max, args.steps)
    except UsageError as exc:
        print(f"bounds: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_csv(sys.stdout, ("nu", "lower", "upper", "gap"), rows)
    return EXIT_OK


def cmd_swap_demo(args) -> int:
    try:
        rows = swap_rows(args.n_opt, args.r_max, args.steps)
    except UsageError as exc:
        print(f"swap-demo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_csv(sys.stdout, ("r", "nu_swap"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

ORACLE_TOL = 1e-4
BOUND_SLACK = 1e-9
ISO_TOL = 1e-9
FIXED_POINT_TOL = 1e-8


def check_state(seed: int, oracle_budget: int) -> dict:
    """Run the property suite on the state drawn from ``seed``."""
    V = random_entangled_cm(seed)
    rep = optimal_tgcp(V)
    b = rep.bounds
    checks = {}
    checks["bounds"] = b.lower - BOUND_SLACK <= rep.f_opt <= b.upper + BOUND_SLACK
    if oracle_budget > 0:
        orc = brute_force_optimal(V, oracle_budget, seed)
        checks["oracle"] = abs(orc.fidelity - rep.f_opt) < ORACLE_TOL
    N = noise_matrix(V)
    _, Vi = isotropize_noise(V)
    Ni = noise_matrix(Vi)
    det0, det1 = float(np.linalg.det(N)), float(np.linalg.det(Ni))
    checks["isotropy"] = (
        abs(np.trace(Ni) - 2.0 * math.sqrt(det1)) <= ISO_TOL * max(1.0, np.trace(Ni))
        and abs(det1 - det0) <= ISO_TOL * max(1.0, abs(det0))
        and fidelity_coherent(Vi) >= fidelity_coherent(V) - 1e-12
    )
    again = optimal_tgcp(rep.output)
    checks["fixed_point"] = (
        again.tau_star == 1.0
        and abs(again.f_opt - rep.f_opt) < FIXED_POINT_TOL
        and np.max(np.abs(again.optimal_map.S - np.eye(4))) < FIXED_POINT_TOL
    )
    return {"seed": seed, "nu": rep.nu, "f_opt": rep.f_opt, "checks": checks}


def cmd_verify(args) -> int:
    if args.count < 1:
        print("verify: --count must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.oracle_budget < 0:
        print("verify: --oracle-budget must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    failing = []
    totals: dict = {}
    print(f"{'seed':>20}  {'nu':>10}  {'f_opt':>18}  result")
    for i in range(args.count):
        seed = (args.seed + i) % (UINT64_MAX + 1)
        try:
            row = check_state(seed, args.oracle_budget)
        except (NumericalFailureError, InvalidInputError, OutOfDomainError) as exc:
            failing.append(seed)
            print(f"{seed:>20}  {'-':>10}  {'-':>18}  error: {exc}")
            continue
        bad = [k for k, ok in row["checks"].items() if not ok]
        for k, ok in row["checks"].items():
            totals[k] = totals.get(k, 0) + int(ok)
        if bad:
            failing.append(seed)
        status = "ok" if not bad else "FAIL " + ",".join(bad)
        print(f"{seed:>20}  {row['nu']:>10.6f}  {row['f_opt']:>18.15f}  {status}")
    print("summary: " + ", ".join(f"{k} {v}/{args.count}" for k, v in totals.items()))
    if failing:
        print("failing seeds: " + " ".join(str(s) for s in failing))
        return EXIT_PROPERTY
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cvtelefid", description="Optimal local Gaussian preprocessing for CV teleportation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="analyze a covariance-matrix document")
    a.add_argument("input_path")
    a.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    a.add_argument("--seed", type=_uint64, default=0)
    a.add_argument("--oracle-starts", type=int, default=32)
    a.add_argument("--tol", type=float, default=1e-9, help="symmetry tolerance of the input matrix")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bounds", help="fidelity bound curves as CSV")
    b.add_argument("--nu-min", type=float, default=0.001)
    b.add_argument("--nu-max", type=float, default=1.0)
    b.add_argument("--steps", type=int, default=1000)
    b.add_argument("--format", choices=["csv"], default="csv")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="randomized property campaign")
    v.add_argument("--count", type=int, default=50)
    v.add_argument("--seed", type=_uint64, default=0)
    v.add_argument("--oracle-budget", type=int, default=32, help="oracle starts per state (0 disables)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("swap-demo", help="PT eigenvalue of the swapped state versus squeezing")
    s.add_argument("--n-opt", type=float, required=True)
    s.add_argument("--r-max", type=float, default=15.0)
    s.add_argument("--steps", type=int, default=151)
    s.set_defaults(func=cmd_swap_demo)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "analyze" and (args.oracle_starts < 1 or not args.tol > 0):
        print("analyze: --oracle-starts must be positive and --tol > 0", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
