"""Command-line front end: ``logpot <subcommand> CONFIG [options]``.

Config files are line oriented. The first non-comment line is either
``finite`` or ``family <name> key=value ...``; ``finite`` is followed by
``re im charge`` records (also accepted after ``family custom``). ``#``
starts a comment.

Exit codes: 0 success, 1 a checked identity or inequality failed,
2 bad input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field
from math import comb, factorial
from pathlib import Path

import numpy as np

from . import conjecture, dbs, hausdorff, infinite, majorization
from .errors import CapacityError, ConfigSyntaxError, ConfigurationError, ConvergenceError
from .linalg import collinear_frame
from .potential import ChargeConfiguration, barycenter, normalize, solve_equilibria, weighted_std

__all__ = ["format_config", "main", "parse_config", "run"]

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
MARGIN_TOL = 1e-9
DEFAULT_TRUNCATION = 16
SUBCOMMANDS = ("solve", "majorize", "hierarchy", "hausdorff", "ladder", "conjecture")


# ---------------------------------------------------------------------------
# Config format


@dataclass
class ParsedConfig:
    """A finite configuration or a family, with its truncation length."""

    config: ChargeConfiguration | None = None
    family: infinite.SequenceFamily | None = None
    n: int | None = None
    diagnostics: list[str] = field(default_factory=list)

    def finite(self) -> ChargeConfiguration:
        if self.config is not None:
            return self.config
        n = self.n or DEFAULT_TRUNCATION
        if self.family.kind == "complex-charge":
            raise ConfigurationError("complex-charge families only support the ladder subcommand")
        return infinite.truncate(self.family, n)


def _number(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigSyntaxError(f"expected a number, got {token!r}", lineno) from None


def _records(lines, lineno_of):
    pts, charges, where = [], [], []
    for idx, line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise ConfigSyntaxError(f"expected 're im charge', got {line!r}", lineno_of(idx))
        re, im, a = (_number(p, lineno_of(idx)) for p in parts)
        if not a > 0:
            raise ConfigSyntaxError(f"charge {a!r} is not positive", lineno_of(idx))
        pts.append(complex(re, im))
        charges.append(a)
        where.append(lineno_of(idx))
    return np.array(pts, dtype=complex), np.array(charges), where


def _coincidences(points, where, sep) -> list[tuple[int, int]]:
    if len(points) < 2:
        return []
    limit = sep * np.abs(points[:, None] - points[None, :]).max()
    return [(where[i], where[j]) for i in range(len(points)) for j in range(i + 1, len(points))
            if abs(points[i] - points[j]) <= limit]


def parse_config(text: str, merge_coincident: bool = False) -> ParsedConfig:
    """Parse config text into a finite configuration or a sequence family."""
    body = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            body.append((lineno, line))
    if not body:
        raise ConfigSyntaxError("empty configuration")
    head_no, head = body[0]
    tokens = head.split()
    rest = body[1:]
    if tokens[0] == "finite":
        if len(tokens) != 1:
            raise ConfigSyntaxError("'finite' takes no arguments", head_no)
        if not rest:
            raise ConfigSyntaxError("finite configuration has no records", head_no)
        z, a, where = _records(rest, lambda i: i)
        parsed = ParsedConfig()
        if abs(a.sum() - 1.0) > 1e-12:
            parsed.diagnostics.append(f"charges sum to {a.sum():.17g}; normalized")
        clashes = _coincidences(z, where, 1e-9)
        if clashes and not merge_coincident:
            i, j = clashes[0]
            raise ConfigSyntaxError(f"point coincides with the one on line {i}", j)
        if clashes:
            parsed.diagnostics.append(f"merged {len(clashes)} coincident pair(s)")
        parsed.config = ChargeConfiguration.from_records(z, a, merge_coincident=merge_coincident)
        return parsed
    if tokens[0] == "family":
        if len(tokens) < 2:
            raise ConfigSyntaxError("family needs a name", head_no)
        name = tokens[1]
        params = {}
        for tok in tokens[2:]:
            if "=" not in tok:
                raise ConfigSyntaxError(f"expected key=value, got {tok!r}", head_no)
            key, value = tok.split("=", 1)
            params[key] = value
        n_text = params.pop("n", "auto")
        n = None if n_text == "auto" else int(_number(n_text, head_no))
        try:
            if name == "custom":
                if not rest:
                    raise ConfigSyntaxError("custom family has no records", head_no)
                z, a, _ = _records(rest, lambda i: i)
                rho = params.pop("rho", None)
                if params:
                    raise ConfigSyntaxError(f"unknown parameters {sorted(params)}", head_no)
                family = infinite.custom_family(z, a, None if rho is None else _number(rho, head_no))
            else:
                if rest:
                    raise ConfigSyntaxError("built-in families take no records", rest[0][0])
                values = {k: _number(v, head_no) for k, v in params.items()}
                family = infinite.builtin_family(name, **values)
        except ConfigSyntaxError:
            raise
        except ConfigurationError as exc:
            raise ConfigSyntaxError(str(exc), head_no) from None
        return ParsedConfig(family=family, n=n)
    raise ConfigSyntaxError(f"expected 'finite' or 'family', got {tokens[0]!r}", head_no)


def format_config(config: ChargeConfiguration) -> str:
    """Text that :func:`parse_config` reads back to the same configuration."""
    lines = ["finite"]
    for z, a in zip(config.points, config.charges):
        lines.append(f"{z.real:.17g} {z.imag:.17g} {a:.17g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Report plumbing


def _g(x) -> str:
    return f"{float(x):.17g}"


class Report:
    """CSV tables plus a key=value summary, written to a directory or stdout."""

    def __init__(self):
        self.tables: dict[str, tuple[list[str], list[list[str]]]] = {}
        self.summary: list[tuple[str, str]] = []

    def table(self, name: str, header: list[str]):
        rows: list[list[str]] = []
        self.tables[name] = (header, rows)
        return rows

    def put(self, key: str, value) -> None:
        if isinstance(value, float):
            value = _g(value)
        self.summary.append((key, str(value)))

    def summary_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.summary)

    def table_text(self, name: str) -> str:
        header, rows = self.tables[name]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def emit(self, out: Path | None, stream) -> None:
        if out is None:
            for name in self.tables:
                stream.write(f"# {name}.csv\n")
                stream.write(self.table_text(name))
            stream.write(self.summary_text())
            return
        out.mkdir(parents=True, exist_ok=True)
        for name in self.tables:
            (out / f"{name}.csv").write_text(self.table_text(name))
        (out / "summary.txt").write_text(self.summary_text())
        stream.write(self.summary_text())


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_solve(args, parsed: ParsedConfig, rep: Report) -> int:
    cfg = parsed.finite()
    eq = solve_equilibria(cfg)
    rows = rep.table("equilibria", ["re", "im", "residual"])
    for w, r in zip(eq.points, eq.residuals):
        rows.append([_g(w.real), _g(w.imag), _g(r)])
    zeta = barycenter(cfg)
    rep.put("n", cfg.n)
    rep.put("barycenter_re", zeta.real)
    rep.put("barycenter_im", zeta.imag)
    rep.put("sigma2", weighted_std(cfg))
    rep.put("max_residual", eq.max_residual)
    ok = eq.max_residual <= args.tol
    rep.put("status", "ok" if ok else "residual-above-tol")
    return EXIT_OK if ok else EXIT_CHECK


def _tuples(cfg: ChargeConfiguration):
    cfg = normalize(cfg)
    eq = solve_equilibria(cfg)
    n = cfg.n
    w = majorization.WeightedTuple(eq.points, np.full(n - 1, 1.0 / (n - 1)))
    z = majorization.WeightedTuple(cfg.points, (1.0 - cfg.charges) / (n - 1))
    return w, z


def _cmd_majorize(args, parsed: ParsedConfig, rep: Report) -> int:
    cfg = parsed.finite()
    if args.against:
        other = parse_config(Path(args.against).read_text(), args.merge_coincident).finite()
        x = majorization.WeightedTuple(cfg.points, normalize(cfg).charges)
        y = majorization.WeightedTuple(other.points, normalize(other).charges)
        expect_dominated = False
    else:
        if cfg.n < 2:
            raise ConfigurationError("majorize needs at least two charges")
        x, y = _tuples(cfg)
        expect_dominated = True
    if args.swap:
        x, y = y, x
        expect_dominated = False
    cmp = majorization.choquet_compare(x, y, args.tol)
    res = cmp.result
    rep.put("verdict", cmp.verdict.value)
    rep.put("lp_objective", res.objective)
    if res.feasible:
        cert = res.certificate
        rows = rep.table("certificate", [f"c{j}" for j in range(y.size)])
        for line in cert.r:
            rows.append([_g(v) for v in line])
        rep.put("row_residual", cert.row_residual)
        rep.put("mix_residual", cert.mix_residual)
        rep.put("weight_residual", cert.weight_residual)
        certified = cert.certifies(args.tol)
        rep.put("certified", str(certified).lower())
        return EXIT_OK if certified else EXIT_CHECK
    phi = res.witness
    rows = rep.table("witness", [f"slope{c}" for c in range(phi.slopes.shape[1])] + ["offset"])
    for s, c in zip(phi.slopes, phi.offsets):
        rows.append([_g(v) for v in s] + [_g(c)])
    rep.put("witness", str(phi))
    rep.put("witness_violation", phi.violation(x, y))
    if cmp.battery is not None:
        rep.put("battery_worst_margin", cmp.battery.worst_margin)
    return EXIT_CHECK if expect_dominated else EXIT_OK


def _levels(arg: str | None, n: int) -> list[int]:
    if arg is None or arg == "all":
        return list(range(1, n))
    return [int(arg)]


def _cmd_hierarchy(args, parsed: ParsedConfig, rep: Report) -> int:
    cfg = normalize(parsed.finite())
    eq = solve_equilibria(cfg)
    rows = rep.table("hierarchy", ["k", "status", "row_residual", "mix_residual", "weight_residual",
                                   "newton_residual", "newton_scale", "worst_moment_margin"])
    failed = skipped = 0
    alphas = [args.alpha] if args.alpha is not None else [1.0, 1.5, 2.0, 3.0]
    for k in _levels(args.k, cfg.n):
        if not 1 <= k <= cfg.n - 1:
            raise ConfigurationError(f"k={k} outside 1..{cfg.n - 1}")
        if comb(cfg.n, k) > dbs.MAX_SETS:
            rows.append([str(k), "skipped", "", "", "", "", "", ""])
            skipped += 1
            continue
        cert = dbs.construct_hierarchy(cfg, k, eq, seed=args.seed)
        lhs, rhs, scale = dbs.newton_identity_sides(cfg, eq, k)
        orders = [args.m] if args.m is not None else range(1, k + 1)
        margin = min(dbs.moment_inequalities(cfg, eq, k, m, al) for m in orders for al in alphas)
        ok = cert.certifies(args.tol) and abs(lhs - rhs) <= args.tol * scale and margin >= -MARGIN_TOL
        failed += not ok
        rows.append([str(k), "ok" if ok else "failed", _g(cert.row_residual), _g(cert.mix_residual),
                     _g(cert.weight_residual), _g(abs(lhs - rhs)), _g(scale), _g(margin)])
    rep.put("levels_failed", failed)
    rep.put("levels_skipped", skipped)
    return EXIT_CHECK if failed else EXIT_OK


def _cmd_hausdorff(args, parsed: ParsedConfig, rep: Report) -> int:
    cfg = normalize(parsed.finite())
    eq = solve_equilibria(cfg)
    rows = rep.table("hausdorff", ["bound", "distance", "sigma2", "margin"])
    directed = hausdorff.verify_t5(cfg, eq)
    rows.append(["directed", _g(directed.distance), _g(directed.sigma), _g(directed.margin)])
    ok = directed.margin >= -MARGIN_TOL
    if collinear_frame(cfg.points) is not None:
        sym = hausdorff.verify_t6(cfg, eq)
        rows.append(["symmetric", _g(sym.distance), _g(sym.sigma), _g(sym.margin)])
        ok &= sym.margin >= -MARGIN_TOL
        rep.put("collinear", "true")
    else:
        rep.put("collinear", "false")
    rep.put("status", "ok" if ok else "bound-violated")
    return EXIT_OK if ok else EXIT_CHECK


def _parse_levels(text: str | None) -> list[int]:
    if not text:
        return [8, 16, 32, 64]
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigurationError(f"bad --levels value {text!r}") from None


def _cmd_ladder(args, parsed: ParsedConfig, rep: Report) -> int:
    if parsed.family is not None:
        family = parsed.family
    else:
        cfg = parsed.config
        family = infinite.custom_family(cfg.points, cfg.charges)
    levels = _parse_levels(args.levels)
    ladder = infinite.zero_count_explorer(family, levels, threads=args.threads)
    rows = rep.table("ladder", ["level", "zeros", "in_region", "max_step"])
    for n, z, c, s in zip(ladder.levels, ladder.zeros, ladder.counts, ladder.max_steps):
        rows.append([str(n), str(z.size), str(c), _g(s)])
    traj = rep.table("trajectories", ["level", "trajectory", "re", "im", "step"])
    for n, z, ids, steps in zip(ladder.levels, ladder.zeros, ladder.trajectory_ids, ladder.steps):
        for order in np.lexsort((z.imag, z.real)):
            traj.append([str(n), str(ids[order]), _g(z[order].real), _g(z[order].imag), _g(steps[order])])
    rep.put("family", family.name)
    rep.put("region_outer", float(ladder.region.outer))
    rep.put("counts_nondecreasing", str(ladder.counts_nondecreasing()).lower())
    return EXIT_OK


def _cmd_conjecture(args, parsed: ParsedConfig, rep: Report) -> int:
    cfg = normalize(parsed.finite())
    eq = solve_equilibria(cfg)
    alpha = 2.0 if args.alpha is None else args.alpha
    spec = conjecture.InertiaSpec(alpha)
    trials = max(args.trials, 10_000)
    inertia = rep.table("inertia", ["k", "alpha", "lhs", "lhs_se", "rhs", "rhs_se", "margin", "verdict"])
    for k in _levels(args.k, cfg.n):
        if comb(cfg.n, k) > conjecture.MAX_HULLS:
            continue
        r = conjecture.inertia_inequality_trial(cfg, eq, k, spec, trials, args.seed, args.threads)
        inertia.append([str(k), _g(alpha), _g(r.lhs_estimate), _g(r.lhs_se), _g(r.rhs_estimate),
                        _g(r.rhs_se), _g(r.margin), r.verdict.value])
    sweep = rep.table("hierarchy_trials", ["trial", "k", "m", "t_kind", "function", "margin", "flag"])
    rng = conjecture.make_rng(args.seed)
    funcs = majorization.battery_functions(cfg.points, angles=8, grid=3, alphas=(1.0, 2.0, 3.0))
    proven_flags = 0
    sweeps = min(args.trials, 1000)
    levels = [k for k in _levels(args.k, cfg.n)
              if factorial(k) * comb(cfg.n, k) <= conjecture.MAX_PERMUTED_TERMS]
    for trial in range(sweeps if levels else 0):
        k = levels[int(rng.integers(len(levels)))]
        m = int(rng.integers(1, k + 1)) if args.m is None else args.m
        phi = funcs[int(rng.integers(len(funcs)))]
        proven = trial % 2 == 0
        t = None if proven else rng.normal(size=k) + 1j * rng.normal(size=k)
        margin = conjecture.dbs_hierarchy_trial(cfg, eq, k, m, t, phi)
        flag = "violation-candidate" if margin < -MARGIN_TOL else "consistent"
        if flag != "consistent" and not proven:
            # confirm against equilibria from the independent polynomial route
            alt = solve_equilibria(cfg, method="polynomial")
            margin = max(margin, conjecture.dbs_hierarchy_trial(cfg, alt, k, m, t, phi))
            flag = "violation-candidate" if margin < -MARGIN_TOL else "consistent"
        proven_flags += proven and flag != "consistent"
        sweep.append([str(trial), str(k), str(m), "ones" if proven else "random", str(phi), _g(margin), flag])
    rep.put("trials", trials)
    rep.put("proven_case_flags", proven_flags)
    return EXIT_CHECK if proven_flags else EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "majorize": _cmd_majorize,
    "hierarchy": _cmd_hierarchy,
    "hausdorff": _cmd_hausdorff,
    "ladder": _cmd_ladder,
    "conjecture": _cmd_conjecture,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logpot", description="Equilibria of planar charge configurations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="configuration file ('-' for stdin)")
        p.add_argument("--out", type=Path, default=None, help="report directory (default: stdout)")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--k", default=None, help="level or 'all'")
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--levels", default=None, help="comma-separated truncation lengths")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--merge-coincident", action="store_true")
        if name == "majorize":
            p.add_argument("--swap", action="store_true", help="test the reversed relation")
            p.add_argument("--against", default=None, help="compare with a second configuration")
    return parser


def run(args: argparse.Namespace, stdout=None, stderr=None) -> int:
    """Execute a parsed command line and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if args.tol <= 0:
            raise ConfigurationError("--tol must be positive")
        if args.trials < 1:
            raise ConfigurationError("--trials must be positive")
        if args.k is not None and args.k != "all" and not args.k.isdigit():
            raise ConfigurationError("--k takes a positive integer or 'all'")
        text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text(encoding="utf-8")
        parsed = parse_config(text, args.merge_coincident)
        rep = Report()
        for note in parsed.diagnostics:
            stderr.write(f"note: {note}\n")
        code = _COMMANDS[args.command](args, parsed, rep)
        rep.emit(args.out, stdout)
        return code
    except (ConfigurationError, CapacityError, OSError, UnicodeDecodeError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


def main(argv=None) -> int:
    return run(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
