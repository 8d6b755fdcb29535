"""Command-line front door.

Exit codes: 0 pass/informational, 1 verdict fail, 2 usage error,
3 runtime error. Reports are written atomically (write-then-rename) as
UTF-8 JSON with stable key order; progress goes to stderr, the summary
to stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .core import GeneralMatrix, Spectrum, SymmetricMatrix, unvech_array, vech_array
from .distributions import (
    BetaParams,
    build_beta2,
    density_beta2,
    density_f1_unnormalized,
    density_latent_roots,
    sample_f1,
    sample_wishart,
)
from .errors import DomainError, MatrixBetaError
from .jacobians import sweep
from .mcverify import (
    estimate_vol_jordan,
    f1_shape_experiment,
    spectral_equality_suite,
    verify_root_density,
)
from .special import mv_beta, mv_gamma, vol_orthogonal

SEED_ENV = "MATRIXBETA_SEED"
SCHEMA_VERSION = "1"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def write_report(report: dict, path: str, config: dict) -> None:
    """Atomic JSON report write with schema version and echoed config."""
    body = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "config": config,
        "report": report,
    }
    text = json.dumps(body, indent=2, sort_keys=True)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _load_config_defaults(argv: list[str]) -> dict:
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 < len(argv):
            with open(argv[i + 1], encoding="utf-8") as fh:
                return json.load(fh)
    return {}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="matrixbeta",
        description="Matrix beta type II machinery and numeric verification",
    )
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--threads", type=int, default=1, help="worker cap (advisory)")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", help="multivariate gamma function")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--r", type=float, required=True)

    bt = sub.add_parser("beta", help="multivariate beta function")
    bt.add_argument("--m", type=int, required=True)
    bt.add_argument("--r", type=float, required=True)
    bt.add_argument("--q", type=float, required=True)

    vo = sub.add_parser("vol-orthogonal", help="volume of the orthogonal group")
    vo.add_argument("--m", type=int, required=True)

    sp = sub.add_parser("sample", help="draw seeded samples to CSV")
    sp.add_argument("what", choices=["wishart", "beta2", "f1"])
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--def", dest="definition", type=int, choices=[1, 2, 3], default=1)
    sp.add_argument("--out", default="samples.csv")

    dp = sub.add_parser("density", help="evaluate a closed-form density")
    dp.add_argument("what", choices=["beta2", "roots", "f1"])
    dp.add_argument("--m", type=int, required=True)
    dp.add_argument("--a", type=float, required=True)
    dp.add_argument("--b", type=float, required=True)
    dp.add_argument("--point", required=True, help="comma-separated entries")
    dp.add_argument("--vol", type=float, default=1.0)

    vp = sub.add_parser("verify", help="run a verification battery")
    vsub = vp.add_subparsers(dest="verify_what", required=True)

    vj = vsub.add_parser("jacobian")
    vj.add_argument(
        "--which",
        required=True,
        choices=["congruence", "square", "jordan", "polar", "scalar"],
    )
    vj.add_argument("--m", type=int, required=True)
    vj.add_argument("--trials", type=int, default=None)
    vj.add_argument("--seed", type=int, default=None)
    vj.add_argument("--out", default=None)

    ve = vsub.add_parser("eig-density")
    ve.add_argument("--m", type=int, required=True)
    ve.add_argument("--a", type=float, required=True)
    ve.add_argument("--b", type=float, required=True)
    ve.add_argument("--n", type=int, default=None)
    ve.add_argument("--seed", type=int, default=None)
    ve.add_argument("--out", default=None)

    vs = vsub.add_parser("spectra")
    vs.add_argument("--m", type=int, required=True)
    vs.add_argument("--a", type=float, required=True)
    vs.add_argument("--b", type=float, required=True)
    vs.add_argument("--n", type=int, default=None)
    vs.add_argument("--seed", type=int, default=None)
    vs.add_argument("--out", default=None)

    ev = sub.add_parser("estimate-vol", help="estimate the eigenvector-manifold volume")
    ev.add_argument("--m", type=int, required=True)
    ev.add_argument("--a", type=float, required=True)
    ev.add_argument("--b", type=float, required=True)
    ev.add_argument("--n", type=int, default=None)
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--refs", type=int, default=None)
    ev.add_argument("--out", default=None)

    ex = sub.add_parser("experiment", help="informational experiments")
    ex.add_argument("what", choices=["f1-shape"])
    ex.add_argument("--m", type=int, default=2)
    ex.add_argument("--a", type=float, required=True)
    ex.add_argument("--b", type=float, required=True)
    ex.add_argument("--n", type=int, default=None)
    ex.add_argument("--seed", type=int, default=None)
    ex.add_argument("--out", default=None)
    return p


_N_FALLBACK = {
    "sample": 1,
    "eig-density": 100_000,
    "spectra": 1000,
    "estimate-vol": 100_000,
    "experiment": 1_000_000,
}


def _apply_config(args: argparse.Namespace, cfg: dict) -> None:
    # config supplies values only where the flag was left unset
    for key, value in cfg.items():
        if getattr(args, key, "missing") is None:
            setattr(args, key, value)
    if getattr(args, "seed", "missing") is None:
        args.seed = _default_seed()
    if getattr(args, "n", "missing") is None:
        key = getattr(args, "verify_what", None) or args.command
        args.n = _N_FALLBACK.get(key, 100_000)
    if getattr(args, "trials", "missing") is None:
        args.trials = 50
    if getattr(args, "refs", "missing") is None:
        args.refs = 5


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"config"}
    return {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None
    }


def _print_value(label: str, value: float, log_value: float) -> None:
    print(f"{label}: {value!r}  log: {log_value!r}")


def _cmd_gamma(args) -> int:
    lg = mv_gamma(args.m, args.r)
    _print_value(f"Gamma_{args.m}[{args.r}]", math.exp(lg), lg)
    return EXIT_PASS


def _cmd_beta(args) -> int:
    lb = mv_beta(args.m, args.r, args.q)
    _print_value(f"B_{args.m}[{args.r},{args.q}]", math.exp(lb), lb)
    return EXIT_PASS


def _cmd_vol_orth(args) -> int:
    v = vol_orthogonal(args.m)
    _print_value(f"Vol[O({args.m})]", v, math.log(v))
    return EXIT_PASS


def _vech_header(m: int) -> list[str]:
    rows, cols = np.triu_indices(m)
    return [f"vech_{c + 1}{r + 1}" for r, c in zip(rows, cols)]


def _vec_header(m: int, prefix: str = "f1") -> list[str]:
    return [f"{prefix}_{i + 1}{j + 1}" for i in range(m) for j in range(m)]


def _cmd_sample(args) -> int:
    rng = np.random.default_rng(args.seed)
    m = args.m
    rows = []
    if args.what == "wishart":
        if args.a < m:
            raise DomainError("dof must be >= m")
        header = _vech_header(m)
        for _ in range(args.n):
            w = sample_wishart(m, args.a, rng)
            rows.append(vech_array(w.matrix.entries))
    elif args.what == "beta2":
        if args.b is None:
            raise DomainError("--b is required for beta2 samples")
        a_int, b_int = int(args.a), int(args.b)
        if a_int != args.a or b_int != args.b:
            raise DomainError("beta2 sampling needs integer --a and --b")
        if args.definition in (1, 2) and a_int < m:
            raise DomainError("definitions 1 and 2 require a >= m")
        if b_int < m:
            raise DomainError("b must be >= m")
        from .distributions import sample_wishart as _sw

        out_m = a_int if args.definition == 3 else m
        header = _vech_header(out_m)
        for _ in range(args.n):
            y1 = rng.standard_normal((a_int, m))
            y2 = rng.standard_normal((b_int, m))
            from .core import PDMatrix

            h = PDMatrix.from_array(y1.T @ y1) if args.definition != 3 else None
            e = PDMatrix.from_array(y2.T @ y2)
            f = build_beta2(
                h if h is not None else e, e, args.definition, y1_raw=y1
            )
            rows.append(vech_array(f.entries))
    else:  # f1
        if args.b is None:
            raise DomainError("--b is required for f1 samples")
        params = BetaParams(m, args.a, args.b)
        header = _vec_header(m)
        for _ in range(args.n):
            s = sample_f1(params, rng)
            rows.append(s.f1.entries.ravel())
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(repr(float(v)) for v in r) + "\n")
    print(f"wrote {len(rows)} samples to {args.out}")
    return EXIT_PASS


def _cmd_density(args) -> int:
    point = np.array([float(v) for v in args.point.split(",")])
    params = BetaParams(args.m, args.a, args.b)
    if args.what == "beta2":
        f = SymmetricMatrix(unvech_array(point, args.m))
        ld = density_beta2(f, params)
    elif args.what == "roots":
        ld = density_latent_roots(Spectrum(point), params)
    else:
        f1 = GeneralMatrix(point.reshape(args.m, args.m))
        base = density_f1_unnormalized(f1, params)
        from .distributions import LogDensity

        ld = LogDensity(base.log_value - math.log(args.vol))
    _print_value(f"density {args.what}", math.exp(ld.log_value), ld.log_value)
    return EXIT_PASS


def _cmd_verify_jacobian(args) -> int:
    t0 = time.perf_counter()
    reports = sweep(args.which, args.m, args.trials, args.seed)
    errs = [r.rel_err for r in reports]
    tol = {
        "congruence": 1e-8,
        "square": 1e-6,
        "jordan": 1e-5,
        "polar": 1e-5,
        "scalar": 1e-10,
    }[args.which]
    failures = [r for r in reports if r.rel_err >= tol]
    body = {
        "which": args.which,
        "m": args.m,
        "trials": args.trials,
        "max_rel_err": max(errs),
        "mean_rel_err": float(np.mean(errs)),
        "tolerance": tol,
        "failures": [r.to_dict() for r in failures],
        "runtime_seconds": time.perf_counter() - t0,
    }
    if args.out:
        write_report(body, args.out, _config_dict(args))
    verdict = "pass" if not failures else "fail"
    print(
        f"jacobian {args.which} m={args.m} trials={args.trials}: "
        f"max_rel_err={max(errs):.3e} {verdict}"
    )
    return EXIT_PASS if not failures else EXIT_FAIL


def _mc_exit(rep) -> int:
    if rep.verdict in ("pass", "informational"):
        return EXIT_PASS
    return EXIT_FAIL


def _cmd_verify_eig_density(args) -> int:
    params = BetaParams(args.m, args.a, args.b)
    rep = verify_root_density(params, args.n, args.seed)
    if args.out:
        write_report(rep.to_dict(), args.out, _config_dict(args))
    print(
        f"eig-density m={args.m} a={args.a} b={args.b} n={args.n}: "
        f"p={rep.p_value:.4g} {rep.verdict}"
    )
    return _mc_exit(rep)


def _cmd_verify_spectra(args) -> int:
    params = BetaParams(args.m, args.a, args.b)
    rep = spectral_equality_suite(params, args.n, args.seed)
    if args.out:
        write_report(rep.to_dict(), args.out, _config_dict(args))
    print(
        f"spectra m={args.m} n={args.n}: max discrepancy "
        f"{rep.statistic:.3e} {rep.verdict}"
    )
    return _mc_exit(rep)


def _cmd_estimate_vol(args) -> int:
    params = BetaParams(args.m, args.a, args.b)
    est = estimate_vol_jordan(params, args.n, args.seed, k_refs=args.refs)
    if args.out:
        write_report(est.to_dict(), args.out, _config_dict(args))
    print(
        f"Vol estimate m={args.m} (a={args.a}, b={args.b}): "
        f"{est.estimate:.4f}  95% CI [{est.ci_low:.4f}, {est.ci_high:.4f}]"
        + (f"  flags={','.join(est.flags)}" if est.flags else "")
    )
    return EXIT_PASS


def _cmd_experiment(args) -> int:
    params = BetaParams(args.m, args.a, args.b)
    rep = f1_shape_experiment(params, args.n, args.seed)
    if args.out:
        write_report(rep.to_dict(), args.out, _config_dict(args))
    print(
        f"f1-shape m={args.m} n={args.n}: ratio={rep.statistic:.4f} "
        f"CI=[{rep.ci[0]:.4f}, {rep.ci[1]:.4f}] "
        f"({rep.details['reading']} with similarity-invariant density)"
    )
    return EXIT_PASS


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        cfg = _load_config_defaults(argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    _apply_config(args, cfg)

    handlers = {
        "gamma": _cmd_gamma,
        "beta": _cmd_beta,
        "vol-orthogonal": _cmd_vol_orth,
        "sample": _cmd_sample,
        "density": _cmd_density,
        "estimate-vol": _cmd_estimate_vol,
        "experiment": _cmd_experiment,
    }
    try:
        if args.command == "verify":
            handler = {
                "jacobian": _cmd_verify_jacobian,
                "eig-density": _cmd_verify_eig_density,
                "spectra": _cmd_verify_spectra,
            }[args.verify_what]
            return handler(args)
        return handlers[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MatrixBetaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
