"""Batch front end: one subcommand per experiment family.

Outputs are CSV tables (with ``# seed=... config=...`` header comments,
floats at 12 significant digits) and JSON reports, byte-identical for
identical (subcommand, config, seed).  Exit codes: 0 ok, 2 config error,
3 horizon/overflow, 4 failed acceptance threshold in --check mode.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cocycle, lattice, lcltlab, polyrange, twosys
from .polyrange import OverflowGuardError, PolynomialError, parse_polynomial
from .schedule import ParameterRangeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HORIZON = 3
EXIT_CHECK = 4

DEFAULT_SEED = 20260810


class CheckFailure(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[tuple], seed: int,
               config: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(f"# seed={seed} config={config}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {path}")


def _write_json(path: Path, obj: dict, seed: int, config: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    obj = {"seed": seed, "config": config, **obj}
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_fmt)
        f.write("\n")
    print(f"wrote {path}")


def _parse_ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _config_str(args, keys) -> str:
    return " ".join(f"{k}={getattr(args, k)}" for k in keys)


def _load_config_file(path: str) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {line!r} is not key=value")
        k, v = line.split("=", 1)
        values[k.strip().replace("-", "_")] = v.strip()
    return values


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_lclt(args) -> None:
    ns = _parse_ints(args.ns)
    rows = lcltlab.discrepancy_curve(ns, args.source, dim=args.dim,
                                     mc_samples=args.mc_samples,
                                     seed=args.seed, tol_l2sq=args.tol)
    out = Path(args.out) / f"lclt_{args.source}.csv"
    _write_csv(out, ["n", "gap", "defect_bound", "variance_ratio", "source"],
               [(r.n, r.gap, r.defect_bound, r.variance_ratio, r.source) for r in rows],
               args.seed, _config_str(args, ["source", "ns", "dim", "mc_samples", "tol"]))
    if args.check:
        gaps = [r.gap for r in rows]
        if not (all(g > 0 for g in gaps) and gaps[-1] < gaps[0]
                and lcltlab.ascending_runs(gaps) <= 1):
            raise CheckFailure(f"gap sequence {gaps} fails the trend checks")


def cmd_decomp(args) -> None:
    rng = np.random.default_rng(args.seed)
    rows = []
    failures = 0
    for _ in range(args.cases):
        seed = int(rng.integers(0, 1 << 63))
        n = int(rng.integers(2, args.n_max + 1))
        traj = cocycle.trajectory(seed, horizon=n, dim=args.dim)
        r = cocycle.decompose(traj, n)
        ok = (np.array_equal(r.s_n, r.z_sm + r.y_hat + r.z_la)
              and np.array_equal(r.y_hat, r.w + r.z_script)
              and np.array_equal(r.w, r.u + r.e)
              and np.array_equal(r.e, r.e_display)
              and np.array_equal(r.u + r.v_extra, r.u_full))
        failures += not ok
        rows.append((seed, n, int(ok), int(r.s_n[0]), int(r.u[0]), int(r.e[0])))
    _write_csv(Path(args.out) / "decomp.csv",
               ["seed", "n", "identities_ok", "s_n_0", "u_0", "e_0"],
               rows, args.seed, _config_str(args, ["cases", "n_max", "dim"]))
    if args.check and failures:
        raise CheckFailure(f"{failures} decomposition cases failed")


def cmd_range(args) -> None:
    p = parse_polynomial(args.poly)
    grid = _parse_ints(args.grid)
    rows = polyrange.range_moments_mc(p, grid, args.samples, args.seed, dim=args.dim)
    _write_csv(Path(args.out) / "range_moments.csv",
               ["n", "mean_range_ratio", "stderr_mean", "var_scaled", "k_hat", "samples"],
               [(r.n, r.mean_ratio, r.stderr_mean, r.var_scaled, r.k_hat, r.samples)
                for r in rows],
               args.seed, _config_str(args, ["poly", "grid", "samples", "dim"]))
    # first-trajectory profile for replay inspection
    from .streams import derive_seed

    traj = cocycle.trajectory(derive_seed(args.seed, 0), p(max(grid)), dim=args.dim)
    rec = polyrange.range_profile(polyrange.polynomial_orbit(p=p, traj=traj,
                                                             count=max(grid)))
    key_cum = np.cumsum(np.bincount(np.array(rec.key_set, dtype=np.int64),
                                    minlength=max(grid) + 1))[1:]
    _write_csv(Path(args.out) / "range_profile.csv",
               ["n", "range_size", "key_count"],
               [(n + 1, int(rec.sizes[n]), int(key_cum[n])) for n in range(max(grid))],
               args.seed, _config_str(args, ["poly", "grid", "samples", "dim"]))
    if args.check:
        if not (rows[-1].mean_ratio > rows[0].mean_ratio
                and rows[-1].mean_ratio > 0.85):
            raise CheckFailure(
                f"range density trend failed: {[r.mean_ratio for r in rows]}")


def cmd_diverge(args) -> None:
    p1 = parse_polynomial(args.p1)
    p2 = parse_polynomial(args.p2)
    c1, c2, depth = _parse_ints(args.epochs)
    epochs = polyrange.build_epochs(c1, c2, depth)
    table = twosys.divergence_averages(p1, p2, epochs, args.samples, args.seed)
    _write_csv(Path(args.out) / "divergence.csv",
               ["k", "n_mark", "avg_at_n", "stderr_n", "m_mark", "avg_at_m", "stderr_m"],
               [(r.k, r.n_mark, r.avg_at_n, r.stderr_n, r.m_mark, r.avg_at_m, r.stderr_m)
                for r in table.rows],
               args.seed, _config_str(args, ["p1", "p2", "epochs", "samples"]))
    tags = sorted(table.tag_counts.items())
    _write_csv(Path(args.out) / "divergence_tags.csv", ["tag", "count"],
               tags, args.seed, _config_str(args, ["p1", "p2", "epochs", "samples"]))
    _write_csv(Path(args.out) / "epochs.csv", ["k", "n_mark", "m_mark"],
               [(k + 1, epochs.n_marks[k], epochs.m_marks[k])
                for k in range(epochs.depth)],
               args.seed, _config_str(args, ["epochs"]))
    _write_csv(Path(args.out) / "pairprob.csv", ["n", "pair_prob", "tag"],
               [(n, float(v), t) for n, (v, t) in
                enumerate(zip(table.first_values, table.first_tags))],
               args.seed, _config_str(args, ["p1", "p2", "epochs"]))
    if args.check:
        rows = table.rows
        if len(rows) >= 2 and rows[1].avg_at_n - rows[1].avg_at_m < 0.05:
            raise CheckFailure("divergence gap at k=2 below 0.05")
        if len(rows) >= 3 and not rows[2].avg_at_m < rows[1].avg_at_m:
            raise CheckFailure("averages along the long marks are not decreasing")


def cmd_recur(args) -> None:
    report = twosys.cp_certificate(args.L, args.d, args.horizon, args.samples,
                                   args.seed)
    _write_json(Path(args.out) / "recur_certificate.json",
                {"beta": report.beta, "horizon": report.horizon,
                 "samples": report.samples, "empirical": report.empirical,
                 "sampling_error": report.sampling_error,
                 "tail_bound": report.tail_bound,
                 "lower_bound": report.lower_bound},
                args.seed, _config_str(args, ["L", "d", "horizon", "samples"]))
    if args.check and report.lower_bound < 0.9:
        raise CheckFailure(f"certified lower bound {report.lower_bound} < 0.9")


def cmd_transfer(args) -> None:
    ns = _parse_ints(args.ns)
    def y_family(n):
        return cocycle.exact_dist_U(n, dim=1).components[0]
    def z_family(n):
        return lattice.centered_pair_law(0.25, max(1, int(n ** 0.25)))
    report = lcltlab.transfer_check(y_family, z_family, ns)
    _write_csv(Path(args.out) / "transfer.csv",
               ["n", "gap_y", "gap_x", "z_variance", "certificate_ok"],
               [(r.n, r.gap_y, r.gap_x, r.z_variance, int(r.certificate_ok))
                for r in report.rows],
               args.seed, _config_str(args, ["ns"]))
    if args.check and not (report.passed and report.certificate_ok):
        raise CheckFailure("transfer trend or certificate failed")


def cmd_claims(args) -> None:
    p = parse_polynomial(args.poly)
    gamma, ok = polyrange.growth_claims_check(p, args.n_max)
    rows = [("growth", str(p), args.n_max, gamma, int(ok))]
    for d in _parse_ints(args.d_list):
        ok_d = polyrange.claim2_check(d, args.n_max)
        rows.append((f"power_d{d}", f"n^{d}", args.n_max, math.nan, int(ok_d)))
    _write_csv(Path(args.out) / "claims.csv",
               ["claim", "polynomial", "n_max", "gamma_fit", "passed"],
               rows, args.seed, _config_str(args, ["poly", "n_max", "d_list"]))
    if args.check and not all(r[-1] for r in rows):
        raise CheckFailure("a growth claim found a counterexample")


def cmd_charfn(args) -> None:
    rows = []
    for n in _parse_ints(args.ns):
        r = lcltlab.charfn_regime_check(n)
        rows.append((r.n, int(r.applicable), r.l_fit, r.c_fit, int(r.passed)))
    _write_csv(Path(args.out) / "charfn.csv",
               ["n", "applicable", "l_fit", "c_fit", "passed"],
               rows, args.seed, _config_str(args, ["ns"]))
    if args.check and not all(r[-1] for r in rows if r[1]):
        raise CheckFailure("a characteristic-function regime fit failed")


def cmd_smallball(args) -> None:
    rows = lcltlab.small_ball_check(_parse_ints(args.ns), args.radius)
    _write_csv(Path(args.out) / "smallball.csv",
               ["n", "value", "bound", "margin"],
               [(r.n, r.value, r.bound, r.margin) for r in rows],
               args.seed, _config_str(args, ["ns", "radius"]))
    if args.check and not all(r.value <= r.bound for r in rows):
        raise CheckFailure("a small-ball value exceeded the covering bound")


# --------------------------------------------------------------------------
# parser / entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cocyclelab",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="key=value file overriding defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--dim", type=int, default=2)
        sp.add_argument("--out", default="reports")
        sp.add_argument("--check", action="store_true",
                        help="exit 4 when the experiment's thresholds fail")

    sp = sub.add_parser("lclt", help="discrepancy curve for a law family")
    common(sp)
    sp.add_argument("--source", choices=["u-exact", "s-exact", "s-montecarlo"],
                    default="u-exact")
    sp.add_argument("--ns", default="64,256,1024,4096")
    sp.add_argument("--mc-samples", type=int, default=100_000, dest="mc_samples")
    sp.add_argument("--tol", type=float, default=0.01)
    sp.set_defaults(func=cmd_lclt, dim=1)

    sp = sub.add_parser("decomp", help="exact decomposition identity sweep")
    common(sp)
    sp.add_argument("--cases", type=int, default=200)
    sp.add_argument("--n-max", type=int, default=10_000, dest="n_max")
    sp.set_defaults(func=cmd_decomp)

    sp = sub.add_parser("range", help="range density at polynomial times")
    common(sp)
    sp.add_argument("--poly", default="n^2")
    sp.add_argument("--grid", default="250,1000,4000")
    sp.add_argument("--samples", type=int, default=30)
    sp.set_defaults(func=cmd_range)

    sp = sub.add_parser("diverge", help="divergence averages along epochs")
    common(sp)
    sp.add_argument("--p1", default="n^2")
    sp.add_argument("--p2", default="n^2")
    sp.add_argument("--epochs", default="2,2,3")
    sp.add_argument("--samples", type=int, default=30)
    sp.set_defaults(func=cmd_diverge)

    sp = sub.add_parser("recur", help="recurrence counterexample certificate")
    common(sp)
    sp.add_argument("--L", type=int, default=100)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--horizon", type=int, default=50)
    sp.add_argument("--samples", type=int, default=200)
    sp.set_defaults(func=cmd_recur)

    sp = sub.add_parser("transfer", help="perturbation transfer harness")
    common(sp)
    sp.add_argument("--ns", default="256,1024,4096")
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("claims", help="exhaustive growth-claim checks")
    common(sp)
    sp.add_argument("--poly", default="n^2")
    sp.add_argument("--n-max", type=int, default=500, dest="n_max")
    sp.add_argument("--d-list", default="3,4,5", dest="d_list")
    sp.set_defaults(func=cmd_claims)

    sp = sub.add_parser("charfn", help="characteristic-function regime fits")
    common(sp)
    sp.add_argument("--ns", default="256,1024,4096")
    sp.set_defaults(func=cmd_charfn)

    sp = sub.add_parser("smallball", help="small-ball probability table")
    common(sp)
    sp.add_argument("--ns", default="256,1024")
    sp.add_argument("--radius", type=int, default=0)
    sp.set_defaults(func=cmd_smallball)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            overrides = _load_config_file(args.config)
        except (OSError, ValueError) as exc:
            print(json.dumps({"error": {"kind": "config", "detail": str(exc)}}),
                  file=sys.stderr)
            return EXIT_CONFIG
        for k, v in overrides.items():
            if hasattr(args, k):
                current = getattr(args, k)
                cast = type(current) if current is not None else str
                setattr(args, k, cast(v) if cast is not bool else v == "true")
    try:
        args.func(args)
    except CheckFailure as exc:
        print(json.dumps({"error": {"kind": "check", "detail": str(exc)}}),
              file=sys.stderr)
        return EXIT_CHECK
    except (cocycle.HorizonError, twosys.HorizonError, OverflowGuardError,
            lattice.SupportOverflowError, OverflowError) as exc:
        print(json.dumps({"error": {"kind": "horizon", "detail": str(exc)}}),
              file=sys.stderr)
        return EXIT_HORIZON
    except (PolynomialError, ParameterRangeError, ValueError) as exc:
        print(json.dumps({"error": {"kind": "config", "detail": str(exc)}}),
              file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
