"""``qbc`` command line: sweeps, protocol simulations and the invariant suite.

Exit codes: 0 success, 1 failed invariant or out-of-band simulation,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from qbc import measures, protocol, states, strategies, verify

SWEEP_COLUMNS = (
    "fidelity",
    "theta",
    "bob_info",
    "mayers_info",
    "hk_info",
    "entanglement",
    "sum_bob_hk",
    "sum_bob_mayers",
)
SIMULATE_COLUMNS = (
    "strategy",
    "evidence_bit",
    "unveil",
    "theta",
    "fidelity",
    "trials",
    "inconsistencies",
    "empirical_rate",
    "analytic_bound",
    "binomial_3sigma",
    "passed",
    "seed",
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def fmt(x: float) -> str:
    """10 significant digits, always with a decimal point or exponent."""
    return format(float(x), ".10g")


def _num(x):
    return None if x is None else float(fmt(x))


def sweep_rows(grid_points: int) -> list[dict]:
    if grid_points < 2:
        raise ConfigError("--grid-points must be at least 2")
    rows = []
    for k in range(grid_points):
        f = k / (grid_points - 1)
        fam = states.ProtocolFamily.from_fidelity(f)
        rep = measures.report(fam)
        m = rep.mayers_info
        rows.append(
            {
                "fidelity": f,
                "theta": fam.theta,
                "bob_info": rep.bob_info,
                "mayers_info": m,
                "hk_info": rep.hk_info,
                "entanglement": rep.entanglement,
                "sum_bob_hk": rep.bob_info + rep.hk_info,
                "sum_bob_mayers": None if m is None else rep.bob_info + m,
            }
        )
    return rows


def _write_csv(out, columns, rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r[c] is None else _cell(r[c]) for c in columns])


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def _write_json(out, payload) -> None:
    def clean(v):
        if isinstance(v, float):
            return _num(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, list):
            return [clean(x) for x in v]
        return v

    json.dump(clean(payload), out, indent=2, sort_keys=False)
    out.write("\n")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_sweep(args) -> int:
    rows = sweep_rows(args.grid_points)
    buf = io.StringIO()
    if args.format == "csv":
        _write_csv(buf, SWEEP_COLUMNS, rows)
    else:
        _write_json(buf, rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _family(args) -> states.ProtocolFamily:
    if args.fidelity is not None:
        if not 0.0 <= args.fidelity <= 1.0:
            raise ConfigError(f"--fidelity {args.fidelity} outside [0, 1]")
        return states.ProtocolFamily.from_fidelity(args.fidelity)
    if not 0.0 <= args.theta <= math.pi / 4:
        raise ConfigError(f"--theta {args.theta} outside [0, pi/4]")
    return states.ProtocolFamily(args.theta)


def simulate(args) -> dict:
    fam = _family(args)
    if args.trials <= 0:
        raise ConfigError("--trials must be positive")
    if not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    evidence = None
    if args.strategy == "honest":
        stats = protocol.run_honest(fam, args.unveil, args.trials, args.seed)
    elif args.strategy == "mayers":
        evidence = args.evidence_bit
        plan = strategies.mayers_plan(fam, evidence)
        stats = protocol.run_cheat(fam, plan, args.unveil, args.trials, args.seed)
    else:
        stats = protocol.run_cheat(fam, strategies.hk_plan(fam), args.unveil, args.trials, args.seed)
    return {
        "strategy": args.strategy,
        "evidence_bit": evidence,
        "unveil": args.unveil,
        "theta": fam.theta,
        "fidelity": measures.fidelity_canonical(fam.theta),
        "trials": stats.trials,
        "inconsistencies": stats.inconsistencies,
        "empirical_rate": stats.empirical_rate,
        "analytic_bound": stats.analytic_bound,
        "binomial_3sigma": stats.binomial_3sigma,
        "passed": stats.passed,
        "seed": stats.seed,
    }


def cmd_simulate(args) -> int:
    row = simulate(args)
    buf = io.StringIO()
    if args.format == "csv":
        _write_csv(buf, SIMULATE_COLUMNS, [row])
    else:
        _write_json(buf, row)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if row["passed"] else EXIT_FAIL


def cmd_verify(args) -> int:
    results = verify.run_all(seed=args.seed, extra_thetas=args.theta or ())
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _bit(s: str) -> int:
    if s not in ("0", "1"):
        raise argparse.ArgumentTypeError("expected 0 or 1")
    return int(s)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbc", description="Quantum bit commitment trade-off toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="information measures on a uniform fidelity grid")
    sw.add_argument("--grid-points", type=int, default=101)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--out", default=None, help="output path (default: stdout)")
    sw.set_defaults(func=cmd_sweep)

    sim = sub.add_parser("simulate", help="Monte Carlo run of one opening strategy")
    sim.add_argument("--strategy", choices=("honest", "mayers", "hk"), required=True)
    sim.add_argument("--evidence-bit", type=_bit, default=0)
    sim.add_argument("--unveil", type=_bit, required=True)
    g = sim.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", type=float)
    g.add_argument("--fidelity", type=float)
    sim.add_argument("--trials", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--format", choices=("csv", "json"), default="json")
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--seed", type=int, default=12345)
    ver.add_argument("--theta", type=float, action="append",
                     help="extra angle to include in the grids (repeatable)")
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, protocol.MinimalModelError) as exc:
        print(f"qbc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # out-of-range parameters rejected by the model types
        print(f"qbc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qbc: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except measures.InvariantError as exc:
        print(f"qbc: invariant violated: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
