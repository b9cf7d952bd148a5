"""Command-line interface: ``sparselaw <command> [options]``."""

import argparse
import math
import secrets
import sys
import time

import numpy as np

from . import experiments as ex
from . import io
from .ensemble import EnsembleConfig, sample_er
from .ldp import (
    LdpInstance,
    exact_lr_enumerate,
    hypotheses_hold,
    monte_carlo_lr,
)
from .semicircle import SpectralParam, appendix_conditions, explicit_constants


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _intervals(text):
    out = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        if not b:
            raise CliError(f"bad interval {part!r}; expected a:b")
        out.append((float(a), float(b)))
    return out


def _add_run_options(p):
    p.add_argument("--seed", type=int, help="master seed (drawn from OS entropy if omitted)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: $SPARSELAW_THREADS or 1)")
    p.add_argument("--out", help="output prefix for JSON/CSV/manifest files")


def _add_ensemble_options(p, need_q=True):
    p.add_argument("--config", help="key = value file with n, q, f_override, include_diagonal, seed")
    p.add_argument("--n", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--q", type=float)
    g.add_argument("--q-mult", type=float, help="q = MULT * sqrt(log N)")
    g.add_argument("--p", dest="p_edge", type=float, help="edge probability")
    g.add_argument("--kappa", type=float, help="subcritical p = kappa log(N) / N")
    p.add_argument("--f", dest="f_override", type=float, help="override the mean shift f")
    p.add_argument("--simple", action="store_true", help="no self-loops (simple graph)")
    p.add_argument("--trials", type=int, default=10)


def _seed(args):
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise CliError("--seed must be an unsigned 64-bit integer")
        return args.seed, "flag"
    if getattr(args, "config_seed", None) is not None:
        return args.config_seed, "config"
    return secrets.randbits(63), "entropy"


def _ensemble(args, seed):
    conf = io.read_config(args.config) if getattr(args, "config", None) else {}
    n = args.n if args.n is not None else conf.get("n")
    if n is None:
        raise CliError("--n is required (or n in --config)")
    kw = {
        "f_override": args.f_override if args.f_override is not None else conf.get("f_override"),
        "include_diagonal": not args.simple and conf.get("include_diagonal", True),
        "seed": seed,
    }
    if args.q is not None:
        return EnsembleConfig(n, args.q, **kw)
    if args.q_mult is not None:
        return EnsembleConfig.with_q_multiplier(n, args.q_mult, **kw)
    if args.p_edge is not None:
        return EnsembleConfig.from_p(n, args.p_edge, **kw)
    if args.kappa is not None:
        return EnsembleConfig.from_p(n, args.kappa * math.log(n) / n, subcritical=True, **kw)
    if "q" in conf:
        return EnsembleConfig(n, conf["q"], **kw)
    raise CliError("one of --q, --q-mult, --p or --kappa is required")


def _pre_seed(args):
    if getattr(args, "config", None):
        args.config_seed = io.read_config(args.config).get("seed")
    return _seed(args)


def _emit(args, command, params, payload, seed, source, started, rows=None, long_rows=None,
          workers=1):
    artifacts = []
    if args.out:
        path = f"{args.out}.json"
        io.write_json(path, payload)
        artifacts.append(path)
        if rows:
            path = f"{args.out}.csv"
            header = list(_flatten(rows[0]).keys())
            io.write_csv(path, header, [_flatten(r) for r in rows])
            artifacts.append(path)
        if long_rows:
            path = f"{args.out}.long.csv"
            io.write_csv(path, io.LONG_HEADER, long_rows)
            artifacts.append(path)
        manifest = io.RunManifest(command, params, seed, source, artifacts,
                                  time.perf_counter() - started, workers)
        manifest.artifacts.append(f"{args.out}.manifest.json")
        manifest.write(f"{args.out}.manifest.json")
    return artifacts


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        elif isinstance(v, complex):
            out[key + "_re"] = v.real
            out[key + "_im"] = v.imag
        else:
            out[key] = v
    return out


def _print_table(rows, keys):
    print("  ".join(f"{k:>14}" for k in keys))
    for row in rows:
        flat = _flatten(row)
        cells = []
        for k in keys:
            v = flat.get(k, "")
            cells.append(f"{v:>14.6g}" if isinstance(v, float) else f"{v!s:>14}")
        print("  ".join(cells))


def _workers(args):
    return args.threads if args.threads is not None else ex.default_workers()


# ---------------------------------------------------------------- commands


def cmd_sample(args):
    started = time.perf_counter()
    seed, source = _pre_seed(args)
    cfg = _ensemble(args, seed)
    sample = sample_er(cfg)
    edges = sample.edges
    fmt = args.format
    if fmt == "auto":
        if args.out and args.out.endswith(".edges"):
            fmt = "edges"
        elif args.out and args.out.endswith(".bin"):
            fmt = "matrix"
        else:
            fmt = "both"
    artifacts = []
    if args.out:
        base = args.out
        if fmt in ("edges", "both"):
            path = base if base.endswith(".edges") else f"{base}.edges"
            io.write_edge_list(path, edges)
            artifacts.append(path)
        if fmt in ("matrix", "both"):
            path = base if base.endswith(".bin") else f"{base}.bin"
            io.write_matrix(path, sample.rescaled)
            artifacts.append(path)
        manifest = io.RunManifest("sample", cfg.to_dict(), seed, source, artifacts,
                                  time.perf_counter() - started, 1)
        manifest.write(f"{base}.manifest.json")
    loops = int(np.count_nonzero(edges[:, 0] == edges[:, 1]))
    print(f"N={cfg.n} q={cfg.q:.6g} p={cfg.p:.6g} f={cfg.f:.6g} seed={seed}")
    print(f"edges={len(edges)} (self_loops={loops}) isolated={sample.isolated_vertices().size}")
    for a in artifacts:
        print(f"wrote {a}")


def _sweep_plan(args, seed):
    cfg = _ensemble(args, seed)
    etas = ex.parse_eta_spec(args.etas, cfg.n) if args.etas else ex.geometric_eta_grid(cfg.n)
    return ex.SweepPlan(cfg, _floats(args.energies), etas, args.trials, _ints(args.r),
                        args.minors, args.method)


def cmd_localaw(args):
    started = time.perf_counter()
    seed, source = _pre_seed(args)
    plan = _sweep_plan(args, seed)
    workers = _workers(args)
    rep = ex.local_law_sweep(plan, n_jobs=workers)
    payload = rep.to_dict()
    payload["seed"] = seed
    _emit(args, "localaw", plan.to_dict(), payload, seed, source, started, rep.rows,
          rep.long_rows, workers)
    _print_table(rep.rows, ["E", "eta", "statistic_q50", "statistic_max", "s_minus_m_q50",
                            "Gamma_max", "phi_frequency"])
    print(f"failed trials: {rep.failures}")


def cmd_bootstrap(args):
    started = time.perf_counter()
    seed, source = _pre_seed(args)
    plan = _sweep_plan(args, seed)
    workers = _workers(args)
    rep = ex.bootstrap_trace(plan, args.xi, n_jobs=workers)
    payload = rep.to_dict()
    payload["seed"] = seed
    params = dict(plan.to_dict(), xi=args.xi)
    _emit(args, "bootstrap", params, payload, seed, source, started, rep.rows, None, workers)
    _print_table(rep.rows, ["E", "eta", "zeta", "P_omega", "P_xi", "P_both"])


def _study(args, command, fn, params_extra, table_keys=None):
    started = time.perf_counter()
    seed, source = _pre_seed(args)
    workers = _workers(args)
    rep = fn(seed, workers)
    payload = rep.to_dict()
    payload["seed"] = seed
    params = dict(rep.params, **params_extra)
    _emit(args, command, params, payload, seed, source, started, rep.rows, rep.long_rows,
          workers)
    for k, v in _flatten(rep.summary).items():
        print(f"{k}: {v}")
    if table_keys and rep.rows:
        _print_table(rep.rows, table_keys)
    return rep


def cmd_deloc(args):
    def run(seed, workers):
        return ex.delocalization_study(_ensemble(args, seed), args.trials, n_jobs=workers)

    _study(args, "deloc", run, {})


def cmd_dos(args):
    intervals = _intervals(args.intervals)

    def run(seed, workers):
        return ex.dos_local_law(_ensemble(args, seed), intervals, args.trials, n_jobs=workers)

    _study(args, "dos", run, {}, ["a", "b", "rho", "median_mu", "abs_deviation_q50"])


def _test_vector(kind, n):
    if kind == "half":
        return np.r_[np.ones(n // 2), np.zeros(n - n // 2)] - (n // 2) / n
    if kind == "alternating":
        a = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        return a - a.mean()
    raise CliError(f"unknown test vector {kind!r}")


def cmd_que(args):
    def run(seed, workers):
        cfg = _ensemble(args, seed)
        ks = _ints(args.k) if args.k else [0, cfg.n // 4, cfg.n // 2, 3 * cfg.n // 4, cfg.n - 2]
        a = _test_vector(args.vector, cfg.n)
        return ex.que_statistic(cfg, a, ks, args.trials, theta=args.theta,
                                auto_center=args.auto_center, n_jobs=workers)

    _study(args, "que", run, {"vector": args.vector})


def cmd_subcritical(args):
    if args.n is None or args.kappa is None:
        raise CliError("--n and --kappa are required")

    def run(seed, workers):
        return ex.subcritical_demo(args.n, args.kappa, args.trials, seed=seed, n_jobs=workers)

    _study(args, "subcritical", run, {})


def cmd_mainest(args):
    def run(seed, workers):
        cfg = _ensemble(args, seed)
        return ex.main_estimates_study(cfg, SpectralParam(args.E, args.eta), args.r,
                                       args.trials, args.indices, n_jobs=workers)

    _study(args, "mainest", run, {},
           ["quantity", "estimate", "stderr", "bound", "dominated"])


def cmd_ldp(args):
    started = time.perf_counter()
    if args.instance:
        spec = io.read_ldp_instance(args.instance)
    else:
        if args.kind is None:
            raise CliError("--kind is required")
        if args.coeffs is None and args.coeffs_file is None:
            raise CliError("--coeffs or --coeffs-file is required")
        vector = args.kind in ("linear", "squares")
        if args.coeffs is not None:
            coeffs = io.parse_coefficients(args.coeffs)
            if not vector and coeffs.ndim == 1:
                n = math.isqrt(coeffs.size)
                if n * n != coeffs.size:
                    raise CliError("matrix coefficients must have a square number of entries")
                coeffs = coeffs.reshape(n, n)
        else:
            coeffs = io.read_coefficient_file(args.coeffs_file, vector)
        spec = {"kind": args.kind, "coefficients": coeffs}
    for key in ("n", "q", "r", "p"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    coeffs = spec["coefficients"]
    n = spec.get("n", coeffs.shape[0])
    if n != coeffs.shape[0]:
        raise CliError(f"--n {n} does not match {coeffs.shape[0]} coefficients")
    p = spec.get("p")
    q = spec.get("q")
    if q is None:
        if p is None:
            raise CliError("need --q or --p")
        q = math.sqrt(p * n)
    if p is None:
        p = q * q / n
    inst = LdpInstance(spec["kind"], coeffs, n, q, spec.get("r", 4))
    row = {
        "kind": inst.kind, "N": n, "q": q, "r": inst.r, "gamma": inst.gamma, "psi": inst.psi,
        "bound": inst.bound, "exact_or_mc": args.mode, "estimate": "", "stderr": "", "pass": "",
    }
    seed, source = None, "none"
    if args.mode != "bound":
        row["hypotheses_hold"] = hypotheses_hold(inst, p)
    if args.mode == "enumerate":
        est = exact_lr_enumerate(inst, p)
        row.update(estimate=est, stderr=0.0, **{"pass": est <= inst.bound})
    elif args.mode == "mc":
        seed, source = _seed(args)
        mc = monte_carlo_lr(inst, p, args.samples, seed, n_jobs=_workers(args))
        row.update(estimate=mc.estimate, stderr=mc.std_error,
                   **{"pass": mc.estimate <= inst.bound + 3 * mc.std_error})
    params = {"kind": inst.kind, "n": n, "q": q, "r": inst.r, "p": p, "mode": args.mode,
              "samples": args.samples if args.mode == "mc" else None}
    payload = {"experiment": "ldp", "params": params, "result": row, "seed": seed}
    artifacts = []
    if args.out:
        io.write_json(f"{args.out}.json", payload)
        header = ["kind", "N", "q", "r", "gamma", "psi", "bound", "exact_or_mc", "estimate",
                  "stderr", "pass"]
        io.write_csv(f"{args.out}.csv", header, [row])
        artifacts = [f"{args.out}.json", f"{args.out}.csv"]
        io.RunManifest("ldp", params, seed if seed is not None else 0, source, artifacts,
                       time.perf_counter() - started, 1).write(f"{args.out}.manifest.json")
    print(f"gamma={inst.gamma:.10g} psi={inst.psi:.10g} bound={inst.bound:.10g}")
    if args.mode != "bound":
        verdict = "PASS" if row["pass"] else "FAIL"
        print(f"estimate={row['estimate']:.10g} stderr={row['stderr']:.3g} {verdict}")
        if not row["hypotheses_hold"]:
            print("note: moment hypotheses do not hold for this (p, q, r)")


def cmd_constants(args):
    consts = explicit_constants(args.delta, args.D)
    out = {"delta": args.delta, "D": args.D, "C": consts.C, "log_C": consts.log_C,
           "log_N0": consts.log_N0}
    print(f"C(delta, D) = {consts.C:.6e}")
    print(f"log N0(delta, D) = {consts.log_N0:.6e}")
    given = [args.q, args.f, args.n, args.tau]
    if any(v is not None for v in given):
        if any(v is None for v in given):
            raise CliError("condition checks need all of --q, --f, --n, --tau")
        checks = appendix_conditions(args.q, args.f, args.n, args.tau, args.delta, args.D)
        out["conditions"] = [c.as_dict() for c in checks]
        for c in checks:
            state = "PASS" if c.passed else "FAIL"
            print(f"{c.name:>22} log lhs={c.log_lhs:.6g} {c.relation} log rhs={c.log_rhs:.6g}"
                  f"  {state}")
    if args.out:
        io.write_json(f"{args.out}.json", out)
        if "conditions" in out:
            io.write_csv(f"{args.out}.csv", ["name", "relation", "log_lhs", "log_rhs", "passed"],
                         out["conditions"])


# ---------------------------------------------------------------- parser


def build_parser():
    parser = _Parser(prog="sparselaw", description="Local-law experiments for sparse random matrices")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw one sample and export it")
    _add_ensemble_options(p)
    _add_run_options(p)
    p.add_argument("--format", choices=("auto", "edges", "matrix", "both"), default="auto")
    p.set_defaults(func=cmd_sample)

    for name, func, helptext in (
        ("localaw", cmd_localaw, "local-law sweep over a spectral grid"),
        ("bootstrap", cmd_bootstrap, "event frequencies along a decreasing eta grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_ensemble_options(p)
        _add_run_options(p)
        p.add_argument("--energies", default="0")
        p.add_argument("--etas", help="geometric:TOP:BOTTOM:POINTS or comma list")
        p.add_argument("--r", default="2", help="comma list of even r for zeta")
        p.add_argument("--minors", type=int, default=8)
        p.add_argument("--method", choices=("auto", "eigen", "direct"), default="auto")
        if name == "bootstrap":
            p.add_argument("--xi", type=float, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("deloc", help="eigenvector sup-norm study")
    _add_ensemble_options(p)
    _add_run_options(p)
    p.set_defaults(func=cmd_deloc)

    p = sub.add_parser("dos", help="eigenvalue counts on intervals")
    _add_ensemble_options(p)
    _add_run_options(p)
    p.add_argument("--intervals", default="-1:1,0:2,-2:2")
    p.set_defaults(func=cmd_dos)

    p = sub.add_parser("que", help="eigenvector mass against a centred test vector")
    _add_ensemble_options(p)
    _add_run_options(p)
    p.add_argument("--vector", default="half", choices=("half", "alternating"))
    p.add_argument("--k", help="comma list of eigenvector indices")
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("--auto-center", action="store_true")
    p.set_defaults(func=cmd_que)

    p = sub.add_parser("subcritical", help="isolated vertices and Im s below the threshold")
    p.add_argument("--n", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--trials", type=int, default=10)
    _add_run_options(p)
    p.set_defaults(func=cmd_subcritical)

    p = sub.add_parser("mainest", help="L^r norms of fluctuation terms against their bounds")
    _add_ensemble_options(p)
    _add_run_options(p)
    p.add_argument("--E", type=float, default=0.2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--r", type=int, default=4)
    p.add_argument("--indices", type=int, default=8)
    p.set_defaults(func=cmd_mainest)

    p = sub.add_parser("ldp", help="large-deviation bound and its verification")
    p.add_argument("--instance", help="instance file (key = value)")
    p.add_argument("--kind", choices=("linear", "squares", "bilinear", "quadratic"))
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--r", type=int)
    p.add_argument("--coeffs", help="comma list; rows separated by ';'")
    p.add_argument("--coeffs-file")
    p.add_argument("--mode", choices=("bound", "enumerate", "mc"), default="bound")
    p.add_argument("--samples", type=int, default=100_000)
    _add_run_options(p)
    p.set_defaults(func=cmd_ldp)

    p = sub.add_parser("constants", help="explicit constants and admissibility conditions")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--q", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--n", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)
    return parser


# list-valued options whose values may start with "-"
_LIST_OPTIONS = ("--intervals", "--etas", "--coeffs")


def _glue_list_values(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_OPTIONS:
            value = next(it, None)
            out.append(tok if value is None else f"{tok}={value}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_list_values(argv))
        args.func(args)
    except (CliError, ValueError, TypeError, OSError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        msg = " ".join(str(exc).split())
        print(f"sparselaw: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
