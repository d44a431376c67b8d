"""Command line entry point: identity suites, chaos kernels and Monte Carlo checks.

Exit codes: 0 when every check passes, 1 when an identity fails (or a Monte
Carlo z-score exceeds the bound), 2 for usage and configuration errors.
"""

import argparse
import csv
import io as _io
import json
import os
import sys
import traceback
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import io as dio
from . import randgen as rg
from .chaos import is_in_Hn, kernels_general, reconstruct
from .law import expect_poly
from .measure import FiniteMeasure, TensorFn, bracket_integrate
from .montecarlo import SAMPLERS, mc_expect_many
from .report import VerificationReport, describe, reports_to_csv, reports_to_json
from .scalar import DEFAULT_MEMORY_CAP, EXACT, FLOAT, format_scalar, rising_factorial
from .suites import SUITES, Context, cycling_measures, rising_sum_sweep, run_checks, trial_rng

SEED_ENV = "DFCALC_SEED"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str
    d: int
    max_degree: int
    trials: int
    seed: int
    tolerance: float
    memory_cap: int
    out: str
    fmt: str

    @property
    def rtol(self):
        return self.tolerance if self.mode == FLOAT else None


def _common(p, mode_default):
    p.add_argument("--mode", choices=[EXACT, FLOAT], default=mode_default)
    p.add_argument("--d", type=int, default=3, help="number of atoms")
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=1, help=f"overridden by ${SEED_ENV}")
    p.add_argument("--tolerance", type=float, default=1e-9, help="relative tolerance, float mode only")
    p.add_argument("--memory-cap", type=int, default=DEFAULT_MEMORY_CAP, help="largest dense bracket tensor")
    p.add_argument("--out", default=None, help="output file; standard output when omitted")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")


def build_parser():
    parser = argparse.ArgumentParser(prog="dfcalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the identity suites")
    _common(v, EXACT)
    v.add_argument("--suites", default=",".join(list(SUITES) + ["rising_sum"]), help="comma-separated suite names")
    v.add_argument("--inject-fault", action="store_true", help="add a check with a deliberately perturbed kernel")

    k = sub.add_parser("kernels", help="chaos kernels of a functional")
    _common(k, EXACT)
    k.add_argument("functional", help="functional JSON (may also hold a 'measure')")
    k.add_argument("--measure", default=None, help="measure JSON; unit weights when absent")

    m = sub.add_parser("mc", help="Monte Carlo estimates against exact expectations")
    _common(m, FLOAT)
    m.add_argument("functional", help="functional JSON, or {'functionals': [...]} (may also hold a 'measure')")
    m.add_argument("--measure", default=None)
    m.add_argument("--samples", type=int, default=100_000)
    m.add_argument("--sampler", choices=sorted(SAMPLERS), default="gamma")
    m.add_argument("--z-bound", type=float, default=4.0, help="exit 1 when some |z| exceeds this")
    return parser


def make_config(args):
    seed = args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError as exc:
            raise UsageError(f"${SEED_ENV} must be an integer, got {env!r}") from exc
    if args.d < 1:
        raise UsageError("--d must be at least 1")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.max_degree < 1:
        raise UsageError("--max-degree must be at least 1")
    if not args.tolerance > 0:
        raise UsageError("--tolerance must be positive")
    if args.memory_cap < 1:
        raise UsageError("--memory-cap must be positive")
    return RunConfig(args.mode, args.d, args.max_degree, args.trials, seed, args.tolerance, args.memory_cap, args.out, args.fmt)


def emit(config, text):
    if config.out:
        dio.write_atomic(config.out, text)
    else:
        sys.stdout.write(text)


# verify


def check_perturbed_round_trip(c):
    """Self-test: a chaos decomposition with one kernel entry changed must not round-trip."""
    F = c.poly(c.degree(1))
    ce = kernels_general(c.rho, F)
    n = max(ce.kernels)
    bumped = ce.kernels[n].values.copy()
    bumped[(0,) * n] = bumped[(0,) * n] + 1
    ce.kernels[n] = TensorFn._wrap(bumped, c.d, c.mode)
    back = reconstruct(c.rho, ce, check=False)
    return back, F, c.same_poly(back, F)


def cmd_verify(config, suites, inject_fault=False):
    unknown = [s for s in suites if s not in SUITES and s != "rising_sum"]
    if unknown:
        raise UsageError(f"unknown suites: {', '.join(unknown)}")
    measures = cycling_measures([config.d], rg.THETAS, config.mode)
    params = {"d": config.d, "mode": config.mode}
    if config.mode == FLOAT:
        params["tolerance"] = config.tolerance
    reports = []
    for name in suites:
        if name == "rising_sum":
            reports.append(rising_sum_sweep(seed=config.seed, mode=config.mode))
            continue
        reports.append(
            run_checks(name, SUITES[name], measures, config.max_degree, config.trials, config.seed, config.rtol, config.memory_cap, params)
        )
    if inject_fault:
        rep = VerificationReport("self_test", dict(params, seed=config.seed))
        for t in range(config.trials):
            rng = trial_rng(config.seed, "injected_fault", t)
            ctx = Context(measures(rng, t), rng, config.max_degree, config.rtol, config.memory_cap)
            lhs, rhs, ok = check_perturbed_round_trip(ctx)
            rep.add("injected_fault", "perturbed kernel must break the chaos round trip", lhs, rhs, ok, config.seed, t)
        reports.append(rep)
    text = reports_to_json(reports) if config.fmt == "json" else reports_to_csv(reports)
    emit(config, text)
    for rep in reports:
        print(f"{rep.suite}: {len(rep.results)} checks, {rep.failures} failures", file=sys.stderr)
    return 0 if all(r.ok for r in reports) else 1


# kernels and mc inputs


def _parse(fn, data):
    try:
        return fn(data)
    except dio.SchemaError:
        raise
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise dio.SchemaError(f"cannot parse input: {exc}") from exc


def _load_inputs(path, measure_path, mode):
    data = dio.load_json(path)
    if not isinstance(data, dict):
        raise UsageError("input must be a JSON object")
    mdata = dio.load_json(measure_path) if measure_path else data.get("measure")
    if "functionals" in data:
        raw = data["functionals"]
    elif "functional" in data:
        raw = [data["functional"]]
    else:
        raw = [data]
    if not raw:
        raise UsageError("no functional given")
    Fs = [_parse(dio.poly_from_json, f) for f in raw]
    if mode == EXACT and any(F.mode == FLOAT for F in Fs):
        raise UsageError("float-valued functional given in exact mode")
    Fs = [F.astype(mode) for F in Fs]
    d = Fs[0].d
    if any(F.d != d for F in Fs):
        raise UsageError("functionals differ in d")
    rho = FiniteMeasure([1] * d, EXACT) if mdata is None else _parse(dio.measure_from_json, mdata)
    if rho.mode == FLOAT and mode == EXACT:
        raise UsageError("float-valued measure given in exact mode")
    if rho.d != d:
        raise UsageError(f"measure has d={rho.d}, functional has d={d}")
    return rho.astype(mode), Fs


def cmd_kernels(config, path, measure_path):
    rho, Fs = _load_inputs(path, measure_path, config.mode)
    F = Fs[0]
    ce = kernels_general(rho, F)
    kernels = {}
    norm = ce.f0 * ce.f0
    for n, k in ce.kernels.items():
        if config.mode == EXACT and all(v == 0 for v in k.flat):
            continue
        kernels[str(n)] = {"values": dio.tensor_to_json(k)["values"], "in_Hn": bool(is_in_Hn(rho, k))}
        norm = norm + factorial(n) * bracket_integrate(rho, k * k) / rising_factorial(rho.theta, 2 * n)
    payload = {
        "measure": dio.measure_to_json(rho),
        "f0": format_scalar(ce.f0, rho.mode),
        "kernels": kernels,
        "isometry_norm": format_scalar(norm, rho.mode),
    }
    if config.fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "index", "value", "in_Hn"])
        w.writerow([0, "", payload["f0"], ""])
        for n, entry in kernels.items():
            k = ce.kernels[int(n)]
            for idx in np.ndindex(*k.values.shape):
                w.writerow([n, " ".join(map(str, idx)), describe(k.values[idx]), entry["in_Hn"]])
        w.writerow(["isometry_norm", "", payload["isometry_norm"], ""])
        text = buf.getvalue()
    emit(config, text)
    return 0


def cmd_mc(config, path, measure_path, samples, sampler, z_bound):
    if config.mode == EXACT:
        raise UsageError("mc runs in float mode; pass --mode float")
    if samples < 2:
        raise UsageError("--samples must be at least 2")
    try:
        rho_x, Fs_x = _load_inputs(path, measure_path, EXACT)
    except UsageError:
        rho_x, Fs_x = _load_inputs(path, measure_path, FLOAT)
    exact_refs = [expect_poly(rho_x, F) for F in Fs_x]
    estimates = mc_expect_many(rho_x, [F.astype(FLOAT) for F in Fs_x], samples, config.seed, sampler)
    rows = []
    for i, (est, ref) in enumerate(zip(estimates, exact_refs)):
        row = {"functional": i, "sampler": sampler}
        row.update(est.report(ref))
        rows.append(row)
    worst = max(abs(r["z_score"]) for r in rows)
    if config.fmt == "json":
        text = json.dumps({"measure": dio.measure_to_json(rho_x), "estimates": rows}, sort_keys=True, indent=2) + "\n"
    else:
        cols = ["functional", "sampler", "mean", "std_error", "n", "seed", "exact_ref", "z_score"]
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        text = buf.getvalue()
    emit(config, text)
    return 0 if worst <= z_bound else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = make_config(args)
        if args.command == "verify":
            suites = [s.strip() for s in args.suites.split(",") if s.strip()]
            return cmd_verify(config, suites, args.inject_fault)
        if args.command == "kernels":
            return cmd_kernels(config, args.functional, args.measure)
        return cmd_mc(config, args.functional, args.measure, args.samples, args.sampler, args.z_bound)
    except (UsageError, dio.SchemaError, MemoryError, OSError, json.JSONDecodeError) as exc:
        print(f"dfcalc: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        # exit code 1 is reserved for failed checks
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
