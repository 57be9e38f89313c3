"""Command-line front end: ``finetti <subcommand> [options]``.

Every subcommand prints one report. JSON is the default; ``--format csv``
prints the same numbers as CSV. Exit codes: 0 success, 1 usage error,
2 invalid model or parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from finetti.ensemble import (
    concentration_profile,
    convergence_sweep,
    max_ratio,
    pushforward_ensemble,
    sweep_rows_dicts,
)
from finetti.exceptions import NumericalError, ValidationError
from finetti.finite import (
    bayes_expansion_check,
    conditional_law_given_counts,
    df_gap,
    mc_joint_estimate,
    tail_mass,
)
from finetti.io import (
    load_model,
    model_to_dict,
    parse_events,
    parse_int_list,
    parse_rational_list,
    read_moments_csv,
)
from finetti.measures import format_fraction
from finetti.models import exchangeability_check_exact
from finetti.moments import check_complete_monotonicity, moments_from_model
from finetti.recovery import recover_atoms_prony, recover_mixing_grid


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _rational(q: Fraction) -> dict:
    return {"value": format_fraction(q), "value_f": float(q)}


def _load(args):
    model = load_model(args.model)
    return model, model_to_dict(model)


def _moments_arg(args) -> list[Fraction]:
    if args.moments is not None:
        return parse_rational_list(args.moments)
    if args.moments_csv is not None:
        return read_moments_csv(args.moments_csv)
    raise UsageError("one of --moments or --moments-csv is required")


def _write_plot(path, rows) -> None:
    Path(path).write_text("".join(f"{x!r} {y!r}\n" for x, y in rows))


def cmd_exact_joint(args):
    model, model_json = _load(args)
    inputs = {"model": model_json}
    if args.states is not None:
        states = parse_int_list(args.states)
        inputs["states"] = states
        value = model.joint_prob(states)
    elif args.events is not None:
        events = parse_events(args.events, model.alphabet)
        inputs["events"] = args.events
        value = model.joint_event_prob(events)
    else:
        raise UsageError("one of --states or --events is required")
    return {"inputs": inputs, **_rational(value)}


def cmd_df_gap(args):
    model, model_json = _load(args)
    events = parse_events(args.events, model.alphabet)
    report = df_gap(model, args.n, events)
    return {"inputs": {"model": model_json, "n": args.n, "events": args.events}, **report.to_dict()}


def cmd_bayes_check(args):
    model, model_json = _load(args)
    partition = parse_events(args.partition, model.alphabet)
    mult = parse_int_list(args.mult)
    result = bayes_expansion_check(model, args.N, partition, mult)
    return {"inputs": {"model": model_json, "N": args.N, "partition": args.partition, "mult": mult},
            **result.to_dict()}


def cmd_cond_law(args):
    counts = parse_int_list(args.counts)
    mult = parse_int_list(args.mult)
    value = conditional_law_given_counts(args.N, counts, mult)
    return {"inputs": {"N": args.N, "counts": counts, "mult": mult}, **_rational(value)}


def cmd_mc_estimate(args):
    model, model_json = _load(args)
    events = parse_events(args.events, model.alphabet)
    est, se = mc_joint_estimate(model, args.n, args.reps, events, args.seed, args.workers)
    return {"inputs": {"model": model_json, "n": args.n, "reps": args.reps, "events": args.events,
                       "seed": args.seed},
            "estimate": est, "std_error": se}


def cmd_moments(args):
    model, model_json = _load(args)
    partition = parse_events(args.partition, model.alphabet)
    table = moments_from_model(model, partition, args.degree)
    rows = [{"index": ",".join(map(str, k)), "value": format_fraction(v), "value_f": float(v)}
            for k, v in table.entries.items()]
    return {"inputs": {"model": model_json, "partition": args.partition, "degree": args.degree},
            "rows": rows}


def cmd_check_cm(args):
    moments = _moments_arg(args)
    ok, violation = check_complete_monotonicity(moments)
    return {"inputs": {"moments": [format_fraction(m) for m in moments]},
            "ok": ok, "first_violation": list(violation) if violation else None}


def cmd_recover_grid(args):
    moments = _moments_arg(args)
    fitted = recover_mixing_grid(moments, args.grid_size, args.tol, args.max_iters)
    if args.plot_data:
        _write_plot(args.plot_data, zip(fitted.grid.tolist(), fitted.weights.tolist()))
    return {"inputs": {"moments": [format_fraction(m) for m in moments],
                       "grid_size": args.grid_size, "tol": args.tol,
                       "max_iters": args.max_iters},
            **fitted.to_dict(), "iterations": fitted.n_iter}


def cmd_recover_prony(args):
    moments = _moments_arg(args)
    fitted = recover_atoms_prony(moments, args.atoms)
    return {"inputs": {"moments": [format_fraction(m) for m in moments], "atoms": args.atoms},
            **fitted.to_dict()}


def cmd_pushforward(args):
    model, model_json = _load(args)
    partition = parse_events(args.partition, model.alphabet)
    ens = pushforward_ensemble(model, args.n, partition)
    out = {"inputs": {"model": model_json, "n": args.n, "partition": args.partition}}
    rows = [{"point": ",".join(format_fraction(x) for x in point),
             "mass": format_fraction(mass), "mass_f": float(mass)}
            for point, mass in ens.support]
    out["rows"] = rows
    if args.epsilon is not None:
        out["concentration"] = concentration_profile(ens, args.epsilon)
    return out


def cmd_converge(args):
    model, model_json = _load(args)
    partition = parse_events(args.partition, model.alphabet)
    n_list = parse_int_list(args.n_list)
    rows = convergence_sweep(model, partition, n_list, args.degree)
    if args.plot_data:
        _write_plot(args.plot_data, [(r.n, float(r.discrepancy)) for r in rows])
    return {"inputs": {"model": model_json, "partition": args.partition, "n_list": n_list,
                       "degree": args.degree},
            "rows": sweep_rows_dicts(rows),
            "max_ratio": format_fraction(max_ratio(rows)),
            "all_within_bound": all(r.discrepancy <= r.bound for r in rows)}


def cmd_exch_test(args):
    model, model_json = _load(args)
    deviation = exchangeability_check_exact(model, args.k)
    return {"inputs": {"model": model_json, "k": args.k}, **_rational(deviation),
            "exchangeable": deviation == 0}


def cmd_tail_mass(args):
    model, model_json = _load(args)
    partition = parse_events(args.partition, model.alphabet)
    value = tail_mass(model, args.N, partition, args.m)
    return {"inputs": {"model": model_json, "N": args.N, "partition": args.partition, "m": args.m},
            **_rational(value)}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finetti", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, model=True):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        if model:
            p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        return p

    def add_moments(p):
        p.add_argument("--moments", help='comma-separated m_0..m_D, e.g. "1,1/2,1/3"')
        p.add_argument("--moments-csv", help="CSV file with header order,value")

    p = add("exact-joint", cmd_exact_joint)
    p.add_argument("--states")
    p.add_argument("--events")

    p = add("df-gap", cmd_df_gap)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--events", required=True)

    p = add("bayes-check", cmd_bayes_check)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--mult", required=True)

    p = add("cond-law", cmd_cond_law, model=False)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--counts", required=True)
    p.add_argument("--mult", required=True)

    p = add("mc-estimate", cmd_mc_estimate)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = add("moments", cmd_moments)
    p.add_argument("--partition", required=True)
    p.add_argument("--degree", type=int, required=True)

    p = add("check-cm", cmd_check_cm, model=False)
    add_moments(p)

    p = add("recover-grid", cmd_recover_grid, model=False)
    add_moments(p)
    p.add_argument("--grid-size", type=int, default=101)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iters", type=int, default=100000)
    p.add_argument("--plot-data")

    p = add("recover-prony", cmd_recover_prony, model=False)
    add_moments(p)
    p.add_argument("--atoms", type=int, required=True)

    p = add("pushforward", cmd_pushforward)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--epsilon", type=Fraction)

    p = add("converge", cmd_converge)
    p.add_argument("--partition", required=True)
    p.add_argument("--n-list", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--plot-data")

    p = add("exch-test", cmd_exch_test)
    p.add_argument("--k", type=int, required=True)

    p = add("tail-mass", cmd_tail_mass)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--m", type=int, required=True)
    return parser


def _flatten(value, prefix=""):
    if isinstance(value, dict):
        for key, v in value.items():
            yield from _flatten(v, f"{prefix}.{key}" if prefix else key)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            yield from _flatten(v, f"{prefix}.{i}")
    elif isinstance(value, list):
        yield prefix, ";".join(_scalar(v) for v in value)
    else:
        yield prefix, _scalar(value)


def _scalar(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    rows = report.get("rows")
    if rows:
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_scalar(v) for v in row.values()])
        rest = {k: v for k, v in report.items() if k != "rows"}
        buf.write("\n")
    else:
        rest = report
    writer.writerow(["key", "value"])
    writer.writerows(_flatten(rest))
    return buf.getvalue().rstrip("\n")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        if args.seed < 0 or args.seed >= 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        report = {"command": args.command, **args.func(args)}
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}), file=stdout)
        return 2
    except NumericalError as exc:
        print(json.dumps({"error": "numerical", "message": str(exc),
                          "diagnostics": exc.diagnostics}), file=stdout)
        return 3
    print(render(report, args.format), file=stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
