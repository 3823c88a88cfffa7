"""Experiment runner.

Subcommands (one per acceptance cluster):

  characteristic   weight characteristics with witness cubes (one-row CSV)
  weaktype         weak-type quotients and empirical constants over seeded
                   step-function families (CSV sweep)
  lowerbound       endpoint lower-bound delta sweep (CSV + slope)
  sparse-check     Calderon-Zygmund / sparse-family invariant suite
  matrix-check     matrix-weight invariant suite
  constants        proof-exponent bookkeeping table over |x|^-a weights

Conventions: a single integer --seed drives all randomness; outputs are
written atomically (temp file + rename) with floats at 12 significant
digits, so identical configurations reproduce byte-identical files.  A
``key = value`` config file supplies defaults; command-line flags override.

Exit codes: 0 success; 1 invariant-suite violation; 2 invalid exponent
relation or malformed input; 3 numerical failure (non-integrable weight,
degenerate data, unresolved level set).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import lowerbound as lb
from .grid import DyadicGrid, Mesh, MeshFunction
from .matrix import (
    MatrixWeight,
    dual_reducing_matrix,
    matrix_ap_characteristic,
    op_norm,
    random_matrix_weight,
    reducing_matrix,
    scalar_restriction_characteristic,
)
from .operators import dyadic_maximal, multiplier_apply
from .sparse import build_sparse_family, cz_decompose
from .weaktype import proof_constants, quotient_from_output
from .weights import (
    DegenerateWeightError,
    NonIntegrableError,
    PowerLogWeight,
    SampledWeight,
    SearchSpace,
    a1_characteristic,
    a1q_characteristic,
    ainfty_characteristic,
    ap_characteristic,
    apq_characteristic,
    rh_characteristic,
    sharp_rh_exponent,
)

SCHEMA_VERSION = "1"

# CSV column schemas, one per subcommand (also rendered into --help and the
# docs/cli_schema.md file); the first header cell carries the schema version.
CSV_COLUMNS = {
    "characteristic": ["kind", "weight", "p", "q", "s", "value", "witness_lo", "witness_hi",
                       "witness_label", "min_level", "max_level", "grids"],
    "weaktype": ["trial", "quotient", "best_lambda", "char_main", "char_ainfty", "product",
                 "constant"],
    "lowerbound": ["delta", "a1_char", "sharp_rh_nu", "lambda_star", "best_lambda",
                   "quotient", "c0_lower", "ratio_to_sqrt_a1", "measure_path"],
    "sparse-check": ["trial", "height", "cz_cubes", "omega_measure", "family_size", "ok",
                     "issues"],
    "matrix-check": ["trial", "matrix_ap", "fit_lower", "fit_upper", "reducing_product",
                     "product_ratio", "scalar_restriction_ap", "ok", "issues"],
    "constants": ["a", "p", "ainfty", "nu", "r", "r_prime", "pnu_prime", "pr_prime",
                  "conjugate_ratio", "r_prime_pow_r", "nu_gap_times_ainfty"],
}


def fmt(x) -> str:
    """Fixed CSV float format: 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_rows(path: str, header: list[str], rows: list[list]) -> None:
    """Atomic CSV write (temp file + rename), schema version in a comment row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"#schema=v{SCHEMA_VERSION}"] + header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    _atomic_write(path, buf.getvalue())


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def parse_weight(spec: str):
    """Weight descriptor: 'powerlog:a=-0.5[,b=0][,c=1]' or 'sampled:<json file>'."""
    kind, _, rest = spec.partition(":")
    if kind == "powerlog":
        params = {"a": 0.0, "b": 0.0, "c": 1.0}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                if key not in params:
                    raise ValueError(f"unknown powerlog parameter {key!r}")
                params[key] = float(val)
        return PowerLogWeight(params["a"], params["b"], params["c"])
    if kind == "sampled":
        with open(rest) as f:
            data = json.load(f)
        mesh = Mesh(float(data["mesh"]["radius"]), int(data["mesh"]["level"]))
        return SampledWeight(mesh, np.asarray(data["values"], dtype=float))
    raise ValueError(f"unknown weight kind {kind!r} (use powerlog: or sampled:)")


def parse_matrix_weight(spec: str, mesh: Mesh, rng: np.random.Generator, d: int):
    """Matrix-weight descriptor.

    ``random`` (seeded, d x d); ``diag:a1=-0.4,a2=0.25`` (PowerLog exponents
    on the diagonal, discretized to cell averages); ``rotdiag:a1=..,a2=..,
    turns=1`` (the same diagonal conjugated by a rotation sweeping
    ``turns`` half-revolutions across the domain, d = 2);
    ``json:<file>`` with {"matrices": [[..d x d..], ...]} per cell.
    """
    kind, _, rest = spec.partition(":")
    if kind == "random":
        return random_matrix_weight(mesh, d, rng)
    if kind in ("diag", "rotdiag"):
        params: dict[str, float] = {}
        for item in rest.split(","):
            key, _, val = item.partition("=")
            params[key.strip()] = float(val)
        exps = [params[f"a{i + 1}"] for i in range(d)]
        cols = [PowerLogWeight(a).cell_averages(mesh) for a in exps]
        n = mesh.n_cells
        mats = np.zeros((n, d, d))
        for i, cv in enumerate(cols):
            mats[:, i, i] = cv
        if kind == "rotdiag":
            if d != 2:
                raise ValueError("rotdiag descriptors are two-dimensional")
            turns = params.get("turns", 1.0)
            theta = np.pi * turns * (np.arange(n) + 0.5) / n
            c, s = np.cos(theta), np.sin(theta)
            R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
            mats = np.einsum("xij,xjk,xlk->xil", R, mats, R)
            mats = 0.5 * (mats + np.swapaxes(mats, 1, 2))
        return MatrixWeight(mesh, mats)
    if kind == "json":
        with open(rest) as f:
            data = json.load(f)
        return MatrixWeight(mesh, np.asarray(data["matrices"], dtype=float))
    raise ValueError(f"unknown matrix weight kind {kind!r}")


def random_step(mesh: Mesh, rng: np.random.Generator, max_blocks: int = 6,
                lo: float = 0.0, hi: float = 1.0, span: tuple[float, float] | None = None):
    """Seeded random nonnegative step function on aligned cells."""
    n = mesh.n_cells
    vals = np.zeros(n)
    if span is None:
        i0, i1 = 0, n
    else:
        i0, i1 = mesh.cell_span(*span)
    for _ in range(int(rng.integers(1, max_blocks + 1))):
        a = int(rng.integers(i0, i1))
        b = int(rng.integers(a + 1, min(a + max(2, (i1 - i0) // 2), i1) + 1))
        vals[a:b] = rng.uniform(lo, hi)
    if not vals.any():
        vals[i0] = rng.uniform(max(lo, 0.1), hi)
    return MeshFunction(mesh, vals)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_characteristic(args) -> int:
    w = parse_weight(args.weight)
    search = SearchSpace.default(radius=args.radius, max_level=args.max_level)
    kind = args.kind
    if kind == "ap":
        rep = ap_characteristic(w, args.p, search)
    elif kind == "a1":
        rep = a1_characteristic(w, search)
    elif kind == "rh":
        rep = rh_characteristic(w, args.s, search)
    elif kind == "ainfty":
        rep = ainfty_characteristic(w, mesh=Mesh(args.radius, args.level))
    elif kind == "apq":
        _check_pq(args.p, args.q, args.alpha)
        rep = apq_characteristic(w, args.p, args.q, search)
    elif kind == "a1q":
        rep = a1q_characteristic(w, args.q, search)
    else:
        raise ValueError(f"unknown characteristic kind {kind!r}")
    header = CSV_COLUMNS["characteristic"]
    row = [kind, args.weight, args.p, args.q, args.s, rep.value, rep.witness[0],
           rep.witness[1], rep.witness_label, rep.search_levels[0], rep.search_levels[1],
           rep.grids_used]
    write_rows(args.output, header, [row])
    print(f"{rep.quantity} = {fmt(rep.value)} on [{fmt(rep.witness[0])}, {fmt(rep.witness[1])})")
    return 0


def _check_pq(p, q, alpha):
    if alpha is None:
        return
    if q is None or abs((1.0 / p - 1.0 / q) - alpha) > 1e-12:
        raise ExponentError(f"exponent relation 1/p - 1/q = alpha fails: p={p}, q={q}, alpha={alpha}")


class ExponentError(ValueError):
    pass


def cmd_weaktype(args) -> int:
    w = parse_weight(args.weight)
    mesh = Mesh(args.radius, args.level)
    rng = np.random.default_rng(args.seed)
    p, q, alpha = args.p, args.q, args.alpha
    fractional = alpha is not None and alpha > 0
    if fractional:
        _check_pq(p, q, alpha)
    else:
        q = p
    search = SearchSpace.default(radius=args.radius, max_level=min(args.level, 8))
    if fractional:
        char1 = apq_characteristic(w, p, q, search).value if p > 1 else a1q_characteristic(w, q, search).value
        char2 = ainfty_characteristic(w.power(q), mesh=mesh).value
        product = char1 * char2**q
    else:
        char1 = ap_characteristic(w, p, search).value if p > 1 else a1_characteristic(w, search).value
        char2 = ainfty_characteristic(w, mesh=mesh).value
        product = char1 * char2**p
    rows = []
    for trial in range(args.trials):
        f = random_step(mesh, rng)
        kwargs = {}
        op = args.operator
        if op in ("AS", "ASalpha"):
            wv = w.cell_averages(mesh) if isinstance(w, PowerLogWeight) else w.values
            gmag = MeshFunction(mesh, np.abs(f.values) * wv ** (-(1.0 if fractional else 1.0 / p)))
            kwargs["family"] = build_sparse_family(gmag)
        if fractional:
            kwargs["alpha"] = alpha
            kwargs["weight_power"] = 1.0
            op = {"AS": "ASalpha", "M": "Malpha", "Md": "Malpha", "Ialpha": "Ialpha"}.get(op, op)
        out = multiplier_apply(op, w, p, f, **kwargs)
        wq = quotient_from_output(out.magnitude(), f.lp_norm(p), p, q, operator=op)
        rows.append([trial, wq.quotient, wq.best_lambda, char1, char2, product,
                     wq.quotient / product])
    header = CSV_COLUMNS["weaktype"]
    write_rows(args.output, header, rows)
    cmax = max(r[-1] for r in rows)
    print(f"{args.operator}: {args.trials} trials, max empirical constant {fmt(cmax)}")
    return 0


def cmd_lowerbound(args) -> int:
    deltas = [float(d) for d in args.delta.split(",")]
    for d in deltas:
        if not (0 < d < 0.5):
            raise ExponentError(f"delta must lie in (0, 1/2), got {d}")
    mesh = lb.GradedMesh(cells_per_band=args.cells_per_band, x_min=args.x_min)
    reports = lb.delta_sweep(
        deltas, mesh=mesh, lambda_window=args.window, allow_closed_form=not args.no_closed_form
    )
    slope = lb.sweep_slope(reports) if len(reports) >= 2 else float("nan")
    header = CSV_COLUMNS["lowerbound"]
    rows = [[r.delta, r.a1_char, r.sharp_rh_nu, r.lambda_star, r.best_lambda,
             r.quotient, r.c0_lower, r.ratio_to_sqrt_a1, r.measure_path] for r in reports]
    write_rows(args.output, header, rows)
    if args.json_output:
        payload = {
            "schema": f"v{SCHEMA_VERSION}",
            "rows": [{k: (fmt(v) if isinstance(v, float) else v)
                      for k, v in r.__dict__.items()} for r in reports],
            "slope_log_quotient_vs_log_inv_delta": fmt(slope),
        }
        _atomic_write(args.json_output, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"lower-bound sweep over deltas {deltas}: slope = {fmt(slope)}")
    return 0


def cmd_sparse_check(args) -> int:
    mesh = Mesh(args.radius, args.level)
    rng = np.random.default_rng(args.seed)
    failures = 0
    rows = []
    for trial in range(args.trials):
        f = random_step(mesh, rng)
        height = float(rng.uniform(0.25, 2.0) * max(f.values.mean(), 1e-3))
        dec = cz_decompose(f, height)
        issues = []
        if not np.allclose(dec.good.values + dec.bad.values, f.values, rtol=0, atol=1e-12):
            issues.append("reconstruction")
        for qbe in dec.cubes:
            if abs(dec.bad.integral(qbe.left, qbe.right)) > 1e-12 * max(1.0, f.integral()):
                issues.append("mean-zero")
                break
        if dec.omega_measure > f.integral() / height + 1e-12:
            issues.append("omega-measure")
        fam = build_sparse_family(f)
        issues.extend(fam.verify())
        Md = dyadic_maximal(f, max_level=mesh.aligned_cell_level())
        As = fam.apply(f)
        inside = As.values > 0
        if np.any(Md.values[inside] > 4 * As.values[inside] + 1e-10):
            issues.append("domination")
        ok = not issues
        failures += 0 if ok else 1
        rows.append([trial, height, len(dec.cubes), dec.omega_measure, len(fam.cubes),
                     ok, ";".join(issues)])
    header = CSV_COLUMNS["sparse-check"]
    write_rows(args.output, header, rows)
    print(f"sparse-check: {args.trials} trials, {failures} failures")
    return 0 if failures == 0 else 1


def cmd_matrix_check(args) -> int:
    mesh = Mesh(args.radius, args.level)
    rng = np.random.default_rng(args.seed)
    grid = DyadicGrid()
    cube = grid.cube(mesh.aligned_cell_level() - mesh.level, 0)
    failures = 0
    rows = []
    for trial in range(args.trials):
        W = parse_matrix_weight(args.weight, mesh, rng, args.d)
        issues = []
        red2 = reducing_matrix(W, cube, 2.0)
        if max(abs(red2.lower_factor - 1), abs(red2.upper_factor - 1)) > 1e-12:
            issues.append("p2-exactness")
        red_p = reducing_matrix(W, cube, args.p) if args.p != 2.0 else red2
        if red_p.upper_factor / red_p.lower_factor > math.sqrt(args.d) * 1.05:
            issues.append("fit-ceiling")
        char = matrix_ap_characteristic(W, args.p)
        dual = dual_reducing_matrix(W, cube, args.p)
        prod = float(op_norm(red_p.matrix @ dual.matrix))
        ratio = prod / char.value ** (1.0 / args.p)
        if not (0.25 <= ratio <= 4.0):
            issues.append("product-ratio")
        v = rng.standard_normal(args.d)
        sc = scalar_restriction_characteristic(W, args.p, v).value
        if sc > char.value * (1 + 1e-9):
            issues.append("scalar-restriction")
        ok = not issues
        failures += 0 if ok else 1
        rows.append([trial, char.value, red_p.lower_factor, red_p.upper_factor, prod,
                     ratio, sc, ok, ";".join(issues)])
    header = CSV_COLUMNS["matrix-check"]
    write_rows(args.output, header, rows)
    print(f"matrix-check: {args.trials} trials, {failures} failures")
    return 0 if failures == 0 else 1


def cmd_constants(args) -> int:
    rows = []
    for a in (float(x) for x in args.a_list.split(",")):
        w = PowerLogWeight(-a)
        ainf = ainfty_characteristic(w, mesh=Mesh(args.radius, args.level)).value
        nu = sharp_rh_exponent(w, SearchSpace.anchored_only())
        pc = proof_constants(nu, args.p)
        rows.append([a, args.p, ainf, nu, pc.r, pc.r_prime, pc.p_nu_prime, pc.p_r_prime,
                     pc.p_r_prime / pc.p_nu_prime, pc.r_prime**pc.r,
                     (nu - 1.0) * ainf])
    header = CSV_COLUMNS["constants"]
    write_rows(args.output, header, rows)
    print(f"constants: {len(rows)} rows")
    return 0


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weaklab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="key = value file with defaults; flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(
            name, help=help_text,
            epilog="CSV columns: " + ", ".join(CSV_COLUMNS[name]),
        )

    def common(p):
        p.add_argument("--out", default=None, help="output directory (default $WEAKLAB_OUT or .)")
        p.add_argument("--output", default=None, help="output file path (overrides --out)")
        p.add_argument("--seed", type=int, default=0)

    p = add("characteristic", "weight characteristic with witness cube")
    common(p)
    p.add_argument("--weight", required=True, help="powerlog:a=..,b=..,c=.. or sampled:file.json")
    p.add_argument("--kind", default="ap", choices=["ap", "a1", "ainfty", "rh", "apq", "a1q"])
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--level", type=int, default=8)
    p.add_argument("--max-level", type=int, default=8)
    p.set_defaults(func=cmd_characteristic, default_name="characteristic.csv")

    p = add("weaktype", "weak-type quotient sweep over seeded step functions")
    common(p)
    p.add_argument("--operator", default="AS", choices=["AS", "M", "Md", "H", "Ialpha", "Malpha"])
    p.add_argument("--weight", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--level", type=int, default=7)
    p.set_defaults(func=cmd_weaktype, default_name="weaktype.csv")

    p = add("lowerbound", "endpoint lower-bound delta sweep")
    common(p)
    p.add_argument("--delta", default="0.05,0.1,0.2", help="comma-separated deltas in (0, 1/2)")
    p.add_argument("--cells-per-band", type=int, default=16)
    p.add_argument("--x-min", type=float, default=1e-12)
    p.add_argument("--window", type=float, default=4.0, help="lambda window factor around e^(1/delta)")
    p.add_argument("--no-closed-form", action="store_true",
                   help="cell-counted measures only (errors below resolution)")
    p.add_argument("--json-output", default=None, help="also write a JSON report")
    p.set_defaults(func=cmd_lowerbound, default_name="lowerbound.csv")

    p = add("sparse-check", "CZ + sparse-family invariant suite")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--level", type=int, default=7)
    p.set_defaults(func=cmd_sparse_check, default_name="sparse_check.csv")

    p = add("matrix-check", "matrix-weight invariant suite")
    common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--d", type=int, default=2, choices=[2, 3])
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--weight", default="random",
                   help="random | diag:a1=..,a2=.. | rotdiag:a1=..,a2=..,turns=.. | json:file")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--level", type=int, default=6)
    p.set_defaults(func=cmd_matrix_check, default_name="matrix_check.csv")

    p = add("constants", "proof-exponent table over |x|^-a weights")
    common(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--a-list", default="0.3,0.6,0.9")
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--level", type=int, default=8)
    p.set_defaults(func=cmd_constants, default_name="constants.csv")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Prepend config-file values as flags so the command line overrides them."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    extra: list[str] = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            extra.extend([f"--{key.strip().replace('_', '-')}", val.strip()])
    head = argv[: i + 2]
    rest = argv[i + 2 :]
    if rest and not rest[0].startswith("-"):
        # subcommand first, then config defaults, then explicit flags
        return head[:i] + [rest[0]] + extra + rest[1:]
    return head[:i] + extra + rest


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # the config flag may appear before the subcommand; fold its values in
    argv = _apply_config(build_parser(), argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.output is None:
        out_dir = args.out or os.environ.get("WEAKLAB_OUT", ".")
        args.output = os.path.join(out_dir, args.default_name)
    try:
        return args.func(args)
    except ExponentError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NonIntegrableError, DegenerateWeightError, lb.MeshResolutionError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
