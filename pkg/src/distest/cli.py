"""Command-line surface: experiment sweeps, bound tables, verification suites.

Subcommands::

    distest simulate <config> [--out PATH] [--gnuplot-hints]
    distest bounds <queries.csv> [--out PATH]
    distest verify <suite>[,<suite>...] --count N --seed S [--out PATH]

Exit codes: 0 success, 1 inequality violation, 2 usage or config error.
Output CSV is byte-deterministic given the inputs and seed. The only
environment variable honored is DISTEST_THREADS (worker count for sweep grid
points; output order is unaffected).

Config files are flat ``key = value`` text; repeating one of the grid keys
(theta, d, m, n, sigma, budget_bits) forms a sweep over the cartesian
product, rows ordered with later keys varying fastest in the order above.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bounds as bnd
from . import protocols as proto
from .designs import build_designs
from .errors import ConfigError, InvalidArgumentError
from .families import (BoundedProductSpec, GaussianLocationSpec, ProbitSpec,
                       RegressionSpec, UniformLocationSpec, design_eigenbounds)
from .sweeps import SUITE_CSV_HEADER, SUITE_NAMES, run_suite

FAMILY_IDS = ("gaussian", "bounded_two_point", "bounded_uniform", "uniform",
              "regression", "probit")

GRID_KEYS = ("theta", "d", "m", "n", "sigma", "budget_bits")

SIMULATE_HEADER = ("protocol,family,design,d,m,n,sigma,theta,budget_bits,"
                   "trials,seed,protocol_kind,mse_mean,mse_stderr,bits_mean,"
                   "bits_max,flagged_trials,centralized_rate,bound_formula,"
                   "bound_value,error")

BOUNDS_INPUT_COLUMNS = ("formula", "family", "d", "m", "n", "sigma2",
                        "budget_total", "budgets_per_machine", "lambda_max2",
                        "lambda_min2", "c", "c1", "c2", "a", "delta")


def parse_config(text: str) -> dict:
    """Flat key-value config; '#' starts a comment, repeated keys append."""
    config = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        config.setdefault(key, []).append(value)
    if not config:
        raise ConfigError("config file is empty")
    return config


def _single(config, key, default=None, cast=str):
    values = config.get(key)
    if values is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    if len(values) > 1:
        raise ConfigError(f"key {key!r} must appear once")
    try:
        return cast(values[0])
    except ValueError as err:
        raise ConfigError(f"key {key!r}: {err}") from err


def _grid(config, key, cast):
    values = config.get(key)
    if values is None:
        return [None]
    try:
        return [cast(v) for v in values]
    except ValueError as err:
        raise ConfigError(f"key {key!r}: {err}") from err


def _parse_theta(text: str):
    try:
        return tuple(float(part) for part in text.split(";"))
    except ValueError as err:
        raise ConfigError(f"theta: {err}") from err


def _theta_vector(theta, d: int) -> np.ndarray:
    if len(theta) == 1:
        return np.full(d, theta[0])
    if len(theta) != d:
        raise ConfigError(f"theta has {len(theta)} entries but d = {d}")
    return np.asarray(theta)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _build_spec(family, theta_vec, sigma, design_kind, m, n, d, seed):
    if family == "gaussian":
        return GaussianLocationSpec(theta_vec, sigma if sigma is not None else 1.0)
    if family == "bounded_two_point":
        return BoundedProductSpec(theta_vec, "two_point")
    if family == "bounded_uniform":
        return BoundedProductSpec(theta_vec, "uniform_interval")
    if family == "uniform":
        return UniformLocationSpec(theta_vec)
    designs = build_designs(design_kind, m, n, d, seed)
    if family == "regression":
        return RegressionSpec(designs, theta_vec, sigma if sigma is not None else 1.0)
    if family == "probit":
        return ProbitSpec(designs, theta_vec)
    raise ConfigError(f"unknown family {family!r}; choices: {FAMILY_IDS}")


def _centralized_rate(family, d, m, n, sigma):
    s2 = (sigma if sigma is not None else 1.0) ** 2
    if family == "gaussian":
        return bnd.centralized_rate("gaussian", d, m, n, s2)
    if family in ("bounded_two_point", "bounded_uniform"):
        return bnd.centralized_rate("bounded", d, m, n)
    if family == "uniform":
        return bnd.centralized_rate("uniform", d, m, n)
    if family == "regression":
        return bnd.centralized_rate("regression", d, m, n, s2)
    return bnd.centralized_rate("regression", d, m, n, 1.0)


def _matching_bound(protocol, spec, d, m, n, sigma, budget_bits, bits_mean):
    """Family lower bound evaluated at the measured communication."""
    s2 = (sigma if sigma is not None else 1.0) ** 2
    if protocol == proto.SINGLE_MEAN:
        res = bnd.prop1_lower(budget_bits, bnd.unit_interval_entropy_inverse)
    elif protocol == proto.ONEBIT:
        q = bnd.RateQuery(d=d, m=m, n=n,
                          budgets_per_machine=(bits_mean / m,) * m)
        res = bnd.prop2_lower(q)
    elif isinstance(spec, GaussianLocationSpec):
        res = bnd.theorem2_lower(bnd.RateQuery(d=d, m=m, n=n, sigma2=s2,
                                               budget_total=bits_mean))
    elif isinstance(spec, UniformLocationSpec):
        res = bnd.prop3_lower(bnd.RateQuery(d=d, m=m, n=n, budget_total=bits_mean))
    elif isinstance(spec, RegressionSpec):
        lmax2, lmin2 = design_eigenbounds(spec.designs)
        res, _ = bnd.cor1_rates(bnd.RateQuery(d=d, m=m, n=n, sigma2=s2,
                                              budget_total=bits_mean,
                                              lambda_max2=lmax2, lambda_min2=lmin2))
    elif isinstance(spec, ProbitSpec):
        lmax2, lmin2 = design_eigenbounds(spec.designs)
        res, _ = bnd.cor2_rates(bnd.RateQuery(d=d, m=m, n=n,
                                              budget_total=bits_mean,
                                              lambda_max2=lmax2, lambda_min2=lmin2))
    else:
        q = bnd.RateQuery(d=d, m=m, n=n,
                          budgets_per_machine=(bits_mean / m,) * m)
        res = bnd.prop2_lower(q)
    return res.formula_id, res.value


def _simulate_point(args) -> str:
    (protocol, family, design_kind, theta, d, m, n, sigma, budget_bits,
     trials, seed) = args
    base = (f"{protocol},{family},{design_kind if family in ('regression', 'probit') else ''},"
            f"{d},{m},{n},{_fmt(sigma)},{';'.join(repr(v) for v in theta)},"
            f"{_fmt(budget_bits)},{trials},{seed}")
    try:
        theta_vec = _theta_vector(theta, d)
        spec = _build_spec(family, theta_vec, sigma, design_kind, m, n, d, seed)
        report = proto.estimate_risk(protocol, spec, trials, seed, m=m, n=n,
                                     budget_bits=budget_bits)
        central = _centralized_rate(family, d, m, n, sigma)
        formula, bound_value = _matching_bound(protocol, spec, d, m, n, sigma,
                                               budget_bits, report.bits_mean)
        return (f"{base},{report.protocol_kind},{report.mse_mean!r},"
                f"{report.mse_stderr!r},{report.bits_mean!r},{report.bits_max},"
                f"{report.flagged_trials},{central!r},{formula},{bound_value!r},")
    except (InvalidArgumentError, ConfigError, np.linalg.LinAlgError) as err:
        msg = str(err).replace(",", ";").replace("\n", " ")
        return f"{base},,,,,,,,,,{msg}"


def run_simulate(config: dict, gnuplot_hints: bool = False):
    protocol = _single(config, "protocol")
    if protocol not in proto.PROTOCOL_KINDS:
        raise ConfigError(f"unknown protocol {protocol!r}")
    family = _single(config, "family")
    if family not in FAMILY_IDS:
        raise ConfigError(f"unknown family {family!r}; choices: {FAMILY_IDS}")
    design_kind = _single(config, "design", default="orthogonal")
    trials = _single(config, "trials", cast=int)
    if trials < 2:
        raise ConfigError("trials must be >= 2")
    seed = _single(config, "seed", default=0, cast=int)
    thetas = _grid(config, "theta", _parse_theta)
    if thetas == [None]:
        thetas = [(0.0,)]
    ds = _grid(config, "d", int)
    ms = _grid(config, "m", int)
    ns = _grid(config, "n", int)
    sigmas = _grid(config, "sigma", float)
    budgets = _grid(config, "budget_bits", int)
    known = set(GRID_KEYS) | {"protocol", "family", "design", "trials", "seed"}
    for key in config:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    if None in ds or None in ms or None in ns:
        raise ConfigError("d, m and n are required")

    points = [(protocol, family, design_kind, theta, d, m, n, sigma,
               budget_bits, trials, seed)
              for d in ds for m in ms for n in ns for sigma in sigmas
              for budget_bits in budgets for theta in thetas]
    if not points:
        raise ConfigError("the sweep grid is empty")

    workers = int(os.environ.get("DISTEST_THREADS", "1"))
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_simulate_point, points))
    else:
        rows = [_simulate_point(p) for p in points]

    lines = [SIMULATE_HEADER] + rows
    if gnuplot_hints:
        lines.append("# gnuplot: set datafile separator ','")
        lines.append("# gnuplot: set logscale xy")
        lines.append("# gnuplot: plot 'out.csv' every ::1 using 5:13 with linespoints"
                     " title 'mse vs m'")
    return lines


# ---------------------------------------------------------------------------
# bounds tables

def _parse_bounds_row(cells: dict) -> bnd.RateResult:
    def fnum(key, default=None):
        text = cells.get(key, "")
        if text == "":
            return default
        return float(text)

    def inum(key, default=None):
        text = cells.get(key, "")
        if text == "":
            return default
        return int(text)

    formula = cells.get("formula", "")
    constants = {"c": fnum("c", 1.0), "c1": fnum("c1", 1.0), "c2": fnum("c2", 1.0)}
    d, m, n = inum("d", 1), inum("m", 1), inum("n", 1)
    budgets = cells.get("budgets_per_machine", "")
    per_machine = tuple(float(x) for x in budgets.split(";")) if budgets else None
    query = bnd.RateQuery(d=d, m=m, n=n, sigma2=fnum("sigma2", 1.0),
                          budget_total=fnum("budget_total"),
                          budgets_per_machine=per_machine,
                          lambda_max2=fnum("lambda_max2"),
                          lambda_min2=fnum("lambda_min2"),
                          constants=constants)
    if formula == "prop1":
        return bnd.prop1_lower(query.need_total(), bnd.unit_interval_entropy_inverse)
    if formula == "thm1":
        return bnd.theorem1_lower(query)
    if formula == "prop2":
        return bnd.prop2_lower(query)
    if formula == "prop3_lower":
        return bnd.prop3_lower(query)
    if formula == "prop3_budget":
        return bnd.prop3_budget(d, m, n)
    if formula == "thm2":
        return bnd.theorem2_lower(query)
    if formula in ("cor1_lower", "cor1_upper"):
        lower, upper = bnd.cor1_rates(query)
        return lower if formula == "cor1_lower" else upper
    if formula in ("cor2_lower", "cor2_upper"):
        lower, upper = bnd.cor2_rates(query)
        return lower if formula == "cor2_lower" else upper
    if formula == "centralized":
        value = bnd.centralized_rate(cells.get("family", ""), d, m, n,
                                     fnum("sigma2", 1.0))
        return bnd.RateResult(value, "centralized", {"value": value})
    if formula == "pstar":
        value = bnd.tail_pstar(fnum("a", 0.0), fnum("delta", 0.0), n,
                               math.sqrt(fnum("sigma2", 1.0)))
        return bnd.RateResult(value, "pstar", {"value": value})
    raise InvalidArgumentError(f"unknown formula id {formula!r}")


def run_bounds(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("empty query file")
    header = [h.strip() for h in lines[0].split(",")]
    unknown = [h for h in header if h not in BOUNDS_INPUT_COLUMNS]
    if "formula" not in header or unknown:
        raise ConfigError(f"bad query header; unknown columns {unknown}")
    out = [",".join(BOUNDS_INPUT_COLUMNS) + ",value,terms,error"]
    for raw in lines[1:]:
        cells_list = [c.strip() for c in raw.split(",")]
        if len(cells_list) != len(header):
            echo = ",".join([""] * len(BOUNDS_INPUT_COLUMNS))
            out.append(f"{echo},,,row has {len(cells_list)} cells; expected {len(header)}")
            continue
        cells = dict(zip(header, cells_list))
        echo = ",".join(cells.get(col, "") for col in BOUNDS_INPUT_COLUMNS)
        try:
            result = _parse_bounds_row(cells)
            terms = ";".join(f"{k}={result.terms[k]!r}" for k in sorted(result.terms))
            out.append(f"{echo},{result.value!r},{terms},")
        except (ValueError, InvalidArgumentError) as err:
            msg = str(err).replace(",", ";").replace("\n", " ")
            out.append(f"{echo},,,{msg}")
    return out


def run_verify(suites, count: int, seed: int):
    rows = [SUITE_CSV_HEADER]
    violations = 0
    for name in suites:
        for row in run_suite(name, count, seed):
            rows.append(row.csv_row())
            violations += int(not row.holds)
    return rows, violations


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="distest")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a protocol risk sweep")
    p_sim.add_argument("config")
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--gnuplot-hints", action="store_true")

    p_bnd = sub.add_parser("bounds", help="evaluate bound formulas from a query CSV")
    p_bnd.add_argument("queries")
    p_bnd.add_argument("--out", default=None)

    p_ver = sub.add_parser("verify", help="run inequality verification suites")
    p_ver.add_argument("suites")
    p_ver.add_argument("--count", type=int, default=1000)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            with open(args.config, encoding="utf-8") as fh:
                config = parse_config(fh.read())
            lines = run_simulate(config, gnuplot_hints=args.gnuplot_hints)
            _emit(lines, args.out)
            return 0
        if args.command == "bounds":
            with open(args.queries, encoding="utf-8") as fh:
                text = fh.read()
            _emit(run_bounds(text), args.out)
            return 0
        suites = [s.strip() for s in args.suites.split(",") if s.strip()]
        for name in suites:
            if name not in SUITE_NAMES:
                print(f"unknown suite {name!r}; choices: {', '.join(SUITE_NAMES)}",
                      file=sys.stderr)
                return 2
        if not suites:
            print("no suites named", file=sys.stderr)
            return 2
        rows, violations = run_verify(suites, args.count, args.seed)
        _emit(rows, args.out)
        return 1 if violations else 0
    except (ConfigError, InvalidArgumentError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
