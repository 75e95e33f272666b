"""Command-line front end: run configs, emit JSON reports and CSV geometry.

Subcommands::

    convexity      sampled H-convexity audit
    section-h      radial boundary of one H-section (CSV: dir_1..dir_2n, radius)
    section-hn     three-hop section boundary profile (CSV: rho, t_sup)
    m-M            slope functionals over a radius grid (CSV: r, m, M)
    engulfing      K'' estimate, point-swap and section-inclusion checks
    quasimetric    distance matrix over configured points + H estimate
    decompose      three-segment decompositions of configured points
    example-verify closed-form oracle agreement for the archetypal example
    chain          the full implication-chain suite

Exit codes: 0 all checks passed, 1 violations or defects found, 2 usage or
config error, 3 numerical failure (non-convex input, bracket cap).

Reports are deterministic for a fixed (config, seed, budget): stage timings
default to 0.0 so identical runs produce byte-identical JSON; pass
``--timings`` to record wall-clock seconds instead.  The env var HEIS_JOBS
overrides ``--jobs``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import engulfing as eng
from . import hnsections as hns
from . import quasimetric as qm
from . import sections as sec
from . import validate as val
from .core import (
    HPoint,
    decompose3,
    empirical_decomposition_constant,
    gauge_dist,
    recompose3,
)
from .exprparse import ExprError
from .funcs import check_h_convexity, make_function
from .sections import NonMonotoneExcessError, UnboundedSectionError

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_plot_script(path: str, csv_path: str, title: str) -> None:
    """Plain-text plotting commands (gnuplot dialect) referencing the CSV."""
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set xlabel 'rho'",
        "set ylabel 't'",
        f"plot '{csv_path}' skip 1 using 1:2 with lines title 't_sup(rho)', \\",
        f"     '{csv_path}' skip 1 using 1:(-$2) with lines title '-t_sup(rho)'",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _point(coords, n) -> HPoint:
    vals = [float(c) for c in coords]
    if len(vals) != 2 * n + 1:
        raise ConfigError(f"point needs {2 * n + 1} coordinates for n={n}, got {len(vals)}")
    return HPoint(np.array(vals[:n]), np.array(vals[n : 2 * n]), vals[-1])


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}")


def _exact(v):
    return {"value": v, "provenance": "exact"}


def _est(v):
    return {"value": v, "provenance": "est"}


def _bracket(lo, hi):
    return {"value": hi, "s_lo": lo, "s_hi": hi, "provenance": "bracket"}


class Runner:
    """Shared state of one CLI invocation: config, seed, budget, report."""

    def __init__(self, args):
        self.args = args
        self.config = load_config(args.config)
        self.seed = args.seed if args.seed is not None else int(self.config.get("seed", 0))
        budget_name = args.budget or self.config.get("budgets", {}).get("preset", "default")
        self.budget = hns.Budget.preset(budget_name)
        self.budget_name = budget_name
        jobs_env = os.environ.get("HEIS_JOBS")
        self.jobs = int(jobs_env) if jobs_env else (args.jobs or os.cpu_count() or 1)
        self.stages = []
        self.exit = EXIT_OK

    def function(self, default=None):
        spec = self.config.get("function", default or {"builtin": "sqnorm", "n": 1})
        try:
            return make_function(spec)
        except (ValueError, ExprError) as exc:
            raise ConfigError(f"bad function config: {exc}")

    def center(self, f) -> HPoint:
        if "center" in self.config:
            return _point(self.config["center"], f.n)
        return HPoint.origin(f.n)

    def stage(self, name, status, constants, violations):
        self.stages.append(
            {
                "name": name,
                "status": status,
                "constants": constants,
                "violations": violations,
                "seconds": 0.0,
            }
        )
        if status == "fail" and self.exit == EXIT_OK:
            self.exit = EXIT_VIOLATIONS

    def finish(self, t0: float) -> int:
        if self.args.timings and self.stages:
            # one wall-clock figure for the run; per-stage timing is not
            # tracked separately at the CLI layer
            self.stages[-1]["seconds"] = round(time.perf_counter() - t0, 3)
        report = {
            "version": __version__,
            "config": {
                "config": self.config,
                "seed": self.seed,
                "budget": self.budget_name,
            },
            "stages": self.stages,
        }
        text = json.dumps(report, indent=2, sort_keys=True)
        if self.args.out:
            with open(self.args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return self.exit


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_convexity(r: Runner) -> None:
    f = r.function()
    rep = check_h_convexity(
        f,
        n_points=int(r.config.get("n_points", 200)),
        n_dirs=int(r.config.get("n_dirs", 16)),
        seed=r.seed,
        box_radius=float(r.config.get("box", 5.0)),
    )
    rows = [
        list(v[0].flat()) + list(v[1].as_array()) + [v[2], v[3]]
        for v in rep.violations
    ]
    if r.args.csv:
        n = f.n
        head = (
            [f"xi_{i}" for i in range(2 * n + 1)]
            + [f"v_{i}" for i in range(2 * n)]
            + ["lam", "defect"]
        )
        write_csv(r.args.csv, head, rows)
    r.stage(
        "convexity",
        "pass" if rep.ok else "fail",
        {"samples": _exact(rep.samples), "max_defect": _est(rep.max_defect)},
        rows[:50],
    )


def cmd_section_h(r: Runner) -> None:
    f = r.function()
    center = r.center(f)
    s = float(r.config.get("height", 1.0))
    n_dirs = int(r.config.get("grid", {}).get("n_dirs", 720))
    boundary = sec.h_section_boundary(f, sec.section_spec(f, center, s), n_dirs)
    if r.args.csv:
        n = f.n
        head = [f"dir_{i + 1}" for i in range(2 * n)] + ["radius"]
        rows = np.column_stack([boundary.directions, boundary.radii])
        write_csv(r.args.csv, head, rows)
    r.stage(
        "section-h",
        "pass",
        {
            "r_min": _est(boundary.r_min),
            "r_max": _est(boundary.r_max),
            "bounded": _exact(boundary.bounded),
        },
        [],
    )


def cmd_section_hn(r: Runner) -> None:
    f = r.function()
    center = r.center(f)
    s = float(r.config.get("height", 1.0))
    grid = r.config.get("grid", {})
    rho_max = float(grid.get("rho_max", 3.2 * math.sqrt(s)))
    n_rho = int(grid.get("n_rho", 33))
    rho_grid = np.linspace(0.0, rho_max, n_rho)
    profile = hns.hn_boundary_profile(f, center, s, rho_grid, r.budget)
    if r.args.csv:
        write_csv(r.args.csv, ["rho", "t_sup"], profile)
        if r.args.plot_script:
            write_plot_script(
                r.args.plot_script, r.args.csv, "three-hop section boundary profile"
            )
    r.stage(
        "section-hn",
        "pass",
        {"t_sup_max": _est(max(t for _, t in profile))},
        [],
    )


def cmd_m_M(r: Runner) -> None:
    f = r.function()
    center = r.center(f)
    r_grid = [float(v) for v in r.config.get("r", [0.5, 1.0, 2.0, 4.0])]
    rows = []
    for rr in r_grid:
        prof = sec.m_M(f, center, rr)
        rows.append([rr, prof.m, prof.M])
    if r.args.csv:
        write_csv(r.args.csv, ["r", "m", "M"], rows)
    ratios = [row[2] / row[1] for row in rows if row[1] > 0]
    r.stage(
        "m-M",
        "pass",
        {"max_ratio": _est(max(ratios)) if ratios else _est(math.inf)},
        [],
    )


def _violation_rows(violations, n):
    rows = []
    for v in violations:
        xi, s, xi_p, witness, defect = v
        rows.append(
            list(xi.flat()) + [s] + list(xi_p.flat()) + list(witness.flat()) + [defect]
        )
    return rows


def cmd_engulfing(r: Runner) -> None:
    f = r.function()
    box = float(r.config.get("box", 10.0))
    pairs = int(r.config.get("n_pairs", 2000))
    samples = int(r.config.get("samples", 30))
    rep = eng.engulfing_report(f, pairs, samples, r.seed, box)
    mono = eng.check_h_monotone(f, pairs, r.seed + 3, box)
    if r.args.csv:
        n = f.n
        head = (
            [f"xi_{i}" for i in range(2 * n + 1)]
            + ["s"]
            + [f"xip_{i}" for i in range(2 * n + 1)]
            + [f"w_{i}" for i in range(2 * n + 1)]
            + ["defect"]
        )
        write_csv(r.args.csv, head, _violation_rows(rep.violations, f.n))
    ok = rep.ok and mono >= -1e-9
    r.stage(
        "engulfing",
        "pass" if ok else "fail",
        {
            "Kpp_est": _est(rep.Kpp_est),
            "K_derived": _est(rep.K_derived),
            "checked": _exact(rep.checked),
            "monotonicity_min": _est(mono),
        },
        _violation_rows(rep.violations[:50], f.n),
    )


def cmd_quasimetric(r: Runner) -> None:
    f = r.function()
    pts_cfg = r.config.get(
        "points", [[0.0] * (2 * f.n) + [0.0], [1.0] * (2 * f.n) + [0.0]]
    )
    points = [_point(c, f.n) for c in pts_cfg]
    rel_tol = float(r.config.get("tol", {}).get("d_phi_rel", 1e-3))
    rows = []
    brackets = {}
    finite = True
    for i, a in enumerate(points):
        for j, b in enumerate(points):
            if j <= i:
                continue
            d = qm.d_phi(f, a, b, rel_tol, r.budget)
            rows.append([i, j, d.value, d.s_lo, d.s_hi])
            brackets[f"d_{i}_{j}"] = _bracket(d.s_lo, d.s_hi)
            finite &= math.isfinite(d.value)
    H = qm.quasi_triangle_constant(
        f,
        n_triples=int(r.config.get("n_triples", 30)),
        seed=r.seed,
        rel_tol=rel_tol,
        budget=r.budget,
    )
    if r.args.csv:
        write_csv(r.args.csv, ["row", "col", "value", "s_lo", "s_hi"], rows)
    r.stage(
        "quasimetric",
        "pass" if finite and math.isfinite(H) else "fail",
        {"H_est": _est(H), "pairs": _exact(len(rows)), **brackets},
        [],
    )


def cmd_decompose(r: Runner) -> None:
    n = int(r.config.get("function", {}).get("n", 1))
    pts_cfg = r.config.get("points", [[0.0] * n + [0.0] * n + [math.sqrt(3.0)]])
    strategy = r.config.get("strategy", "minmax")
    rows = []
    worst_err = 0.0
    for coords in pts_cfg:
        p = _point(coords, n)
        d = decompose3(p, strategy)
        err = gauge_dist(recompose3(*d.hops()), p)
        worst_err = max(worst_err, err)
        rows.append(
            [*p.flat(), d.max_norm, err]
        )
    if r.args.csv:
        head = [f"p_{i}" for i in range(2 * n + 1)] + ["max_norm", "recomp_err"]
        write_csv(r.args.csv, head, rows)
    const = empirical_decomposition_constant(
        n, samples=int(r.config.get("decomposition_samples", 500)), seed=r.seed
    )
    r.stage(
        "decompose",
        "pass",
        {
            "decomposition_constant_est": _est(const),
            "max_recomposition_gauge_err": _est(worst_err),
        },
        [],
    )


def cmd_example_verify(r: Runner) -> None:
    s = float(r.config.get("height", 1.0))
    grid = r.config.get("grid", {})
    rep = val.example_agreement(
        s=s,
        grid=(int(grid.get("n_rho", 101)), int(grid.get("n_t", 101))),
        band=float(r.config.get("tol", {}).get("band", 1e-2)),
        budget=r.budget,
        jobs=r.jobs,
    )
    profile = hns.hn_boundary_profile(
        make_function({"builtin": "sqnorm", "n": 1}),
        HPoint.origin(1),
        s,
        [0.0, 2.0 * math.sqrt(s), 3.0 * math.sqrt(s)],
        r.budget,
        t_tol=1e-4,
    )
    if r.args.csv:
        write_csv(r.args.csv, ["rho", "t_sup"], profile)
        if r.args.plot_script:
            write_plot_script(r.args.plot_script, r.args.csv, "example boundary profile")
    ok = rep.rate >= 0.99 and rep.false_in == 0
    r.stage(
        "example-verify",
        "pass" if ok else "fail",
        {
            "agreement_rate": _est(rep.rate),
            "compared": _exact(rep.compared),
            "excluded_band": _exact(rep.excluded),
            "false_in": _exact(rep.false_in),
            "t_sup_checkpoints": {
                "value": [[rho, t] for rho, t in profile],
                "provenance": "est",
            },
        },
        [list(d) for d in rep.disagreements[:50]],
    )


def cmd_chain(r: Runner) -> None:
    f = r.function()
    cfg = val.ChainConfig(seed=r.seed, budget=r.budget)
    rep = val.chain_suite(f, cfg)
    for st in rep.stages:
        r.stage(
            f"chain:{st.name}",
            st.status,
            {k: v for k, v in st.constants.items()},
            [],
        )
    honored = all(h for _, _, h in rep.implications)
    r.stage(
        "chain:implications",
        "pass" if honored else "fail",
        {"implications": _exact([list(i) for i in rep.implications])},
        [],
    )


COMMANDS = {
    "convexity": cmd_convexity,
    "section-h": cmd_section_h,
    "section-hn": cmd_section_hn,
    "m-M": cmd_m_M,
    "engulfing": cmd_engulfing,
    "quasimetric": cmd_quasimetric,
    "decompose": cmd_decompose,
    "example-verify": cmd_example_verify,
    "chain": cmd_chain,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heisconvex",
        description="Sections, engulfing, and quasi-metrics of H-convex functions on H^n",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="subcommand to run")
    parser.add_argument("--config", help="JSON run config")
    parser.add_argument("--out", help="write the JSON report here (default: stdout)")
    parser.add_argument("--csv", help="write bulk geometry CSV here")
    parser.add_argument("--plot-script", help="emit plain-text plot commands here")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config)")
    parser.add_argument(
        "--budget", choices=["quick", "default", "thorough"], default=None,
        help="search budget preset (thorough multiplies counts x8)",
    )
    parser.add_argument("--jobs", type=int, default=None, help="worker count (HEIS_JOBS overrides)")
    parser.add_argument(
        "--timings", action="store_true",
        help="record wall-clock seconds (reports are then not byte-stable)",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    t0 = time.perf_counter()
    try:
        runner = Runner(args)
        COMMANDS[args.command](runner)
        return runner.finish(t0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExprError as exc:
        print(f"expression error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        NonMonotoneExcessError,
        UnboundedSectionError,
        eng.NotEngulfingError,
        eng.DegenerateExcessError,
        sec.DegenerateSlopeError,
        qm.BracketCapError,
        ArithmeticError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
