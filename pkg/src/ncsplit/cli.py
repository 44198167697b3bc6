"""Command-line front end.

    ncsplit cpv --m 50 --n 200 --r 10 --seed 1
    ncsplit pcf --n 1000 --r 20 --tau 0.05
    ncsplit concave --m 100 --n 300 --ball l1
    ncsplit cycle --eta 1 --beta 1 --steps 80
    ncsplit check --pattern strongly_convex --beta 0.5
    ncsplit solve --problem problem.json

Exit status: 0 on success, 1 on a solver error, 2 on a configuration error.
The seed falls back to ``$NCSPLIT_SEED``, then 0.
"""

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import experiments as ex
from .admm import (
    AdmmConfig,
    BetaHeuristic,
    DivergenceError,
    NoValidBetaError,
    admm_solve,
    check_assumption,
)
from .core import (
    ContractError,
    DenseOperator,
    FactorizationError,
    FirstDifference,
    IdentityOperator,
    NotSurjectiveError,
    SpectralEstimationError,
)
from .pg import PgConfig, estimate_ell, pg_solve
from .prox import (
    Cardinality,
    FiniteSet,
    L0Ball,
    L0Penalty,
    L1Ball,
    L1Penalty,
    LHalfPenalty,
    LinfBall,
)
from .rng import RngStream
from .smooth import (
    IndefiniteQuadratic,
    LeastSquares,
    NegatedLeastSquares,
    ProximalTerm,
    Proximity,
)

CPV_FIELDS = ["mode", "r", "n", "iter", "vio", "dist"]
PCF_FIELDS = ["tau", "r", "n", "iter", "card", "err"]
CONCAVE_FIELDS = ["n", "lambda_max", "beta_mult", "iter", "fval"]
CYCLE_FIELDS = ["t", "y1_1", "y1_2", "y2_1", "y2_2", "x_1", "x_2",
                "z1_1", "z1_2", "z2_1", "z2_2"]

SOLVER_ERRORS = (FactorizationError, NotSurjectiveError, SpectralEstimationError,
                 DivergenceError, NoValidBetaError, FloatingPointError)


class ConfigError(ValueError):
    pass


def fmt(v):
    """17 significant digits for floats, so every value round-trips."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(fields, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([fmt(row[f]) for f in fields])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def to_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def render(fields, rows, fmt_name):
    if fmt_name == "json":
        return to_json([{f: r[f] for f in fields} for r in rows])
    return to_csv(fields, rows)


def _pmap(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# experiment commands


def _cpv_rows(task):
    m, n, r, seed, modes, tol, max_iter, timing = task
    inst = ex.gen_cpv(m, n, r, seed)
    base = ex.l1_baseline(inst, tol=tol, max_iter=max_iter) if {"l1_baseline", "l0_warm"} & set(modes) else None
    out = []
    for mode in modes:
        row = ex.run_cpv(inst, mode, tol=tol, max_iter=max_iter, baseline=base)
        d = dict(mode=mode, r=row.r, n=row.n, iter=row.iter, vio=row.vio, dist=row.dist,
                 seed=seed, cpu_s=row.cpu_s)
        out.append(d)
    return out


def cmd_cpv(args):
    modes = args.modes.split(",")
    for mode in modes:
        if mode not in ("l0_cold", "l1_baseline", "l0_warm"):
            raise ConfigError(f"unknown cpv mode {mode!r}")
    if not args.n >= args.m >= args.r >= 0:
        raise ConfigError("need n >= m >= r >= 0")
    tasks = [(args.m, args.n, args.r, s, modes, args.tol, args.max_iter, args.timing)
             for s in _seeds(args)]
    rows = [r for chunk in _pmap(_cpv_rows, tasks, args.jobs) for r in chunk]
    fields = CPV_FIELDS + (["seed"] if args.count > 1 else []) + (["cpu_s"] if args.timing else [])
    emit(render(fields, rows, args.format), args.out)


def _pcf_row(task):
    n, r, tau, seed, tol, max_iter = task
    inst = ex.gen_pcf(n, r, tau, seed)
    row = ex.run_pcf(inst, tol=tol, max_iter=max_iter)
    return dict(tau=tau, r=r, n=n, iter=row.iter, card=row.card, err=row.err,
                seed=seed, cpu_s=row.cpu_s, signals=(inst.x_orig, inst.x_hat, row.x))


def cmd_pcf(args):
    if not 2 <= args.r <= args.n - 1:
        raise ConfigError("need 2 <= r <= n - 1")
    if args.tau < 0:
        raise ConfigError("tau must be nonnegative")
    tasks = [(args.n, args.r, args.tau, s, args.tol, args.max_iter) for s in _seeds(args)]
    rows = _pmap(_pcf_row, tasks, args.jobs)
    fields = PCF_FIELDS + (["seed"] if args.count > 1 else []) + (["cpu_s"] if args.timing else [])
    emit(render(fields, rows, args.format), args.out)
    if args.signals:
        x_orig, x_hat, x = rows[0]["signals"]
        sig = [dict(i=i, x_orig=a, x_hat=b, x=c) for i, (a, b, c) in enumerate(zip(x_orig, x_hat, x))]
        emit(to_csv(["i", "x_orig", "x_hat", "x"], sig), args.signals)


def _concave_rows(task):
    m, n, seed, ball, mults, tol, max_iter = task
    inst = ex.gen_concave(m, n, seed, ball)
    return [dict(n=r.n, lambda_max=r.lambda_max, beta_mult=r.beta_mult, iter=r.iter,
                 fval=r.fval, seed=seed, cpu_s=r.cpu_s)
            for r in ex.run_concave(inst, mults, tol=tol, max_iter=max_iter)]


def cmd_concave(args):
    try:
        mults = [float(v) for v in args.multipliers.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --multipliers: {exc}") from exc
    if any(k <= 0 for k in mults):
        raise ConfigError("multipliers must be positive")
    tasks = [(args.m, args.n, s, args.ball, mults, args.tol, args.max_iter) for s in _seeds(args)]
    rows = [r for chunk in _pmap(_concave_rows, tasks, args.jobs) for r in chunk]
    fields = CONCAVE_FIELDS + (["seed"] if args.count > 1 else []) + (["cpu_s"] if args.timing else [])
    emit(render(fields, rows, args.format), args.out)


def cmd_cycle(args):
    if not 0 < args.eta <= 1:
        raise ConfigError("eta must lie in (0, 1]")
    if args.beta <= 0:
        raise ConfigError("beta must be positive")
    trace = ex.cycle_run(args.eta, args.beta, args.steps)
    verdict = ex.cycle_check(trace)
    if args.out:
        rows = []
        for t, (y1, y2, x, z1, z2) in enumerate(trace.iterates):
            vals = np.concatenate([y1, y2, x, z1, z2])
            rows.append(dict(zip(CYCLE_FIELDS, [t, *vals.tolist()])))
        emit(render(CYCLE_FIELDS, rows, args.format), args.out)
    period = "none" if verdict.period is None else verdict.period
    sys.stdout.write(
        f"period={period} verdict={'PASS' if verdict.passed else 'FAIL'} "
        f"table_error={fmt(verdict.table_error)}\n"
    )
    return 0 if verdict.passed else 1


# ---------------------------------------------------------------------------
# problem files


def _matrix(sec, name):
    try:
        rows, cols = int(sec["rows"]), int(sec["cols"])
        data = np.asarray(sec["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: need rows, cols and row-major data") from exc
    if data.size != rows * cols:
        raise ConfigError(f"{name}: data has {data.size} entries, expected {rows * cols}")
    return data.reshape(rows, cols)


def _vec(sec, key, name):
    try:
        return np.asarray(sec[key], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: missing or bad {key!r}") from exc


def build_smooth(sec):
    kind = sec.get("kind")
    if kind in ("least_squares", "negated_least_squares"):
        cls = LeastSquares if kind == "least_squares" else NegatedLeastSquares
        return cls(_matrix(sec["A"], "A"), _vec(sec, "b", "smooth"))
    if kind == "proximity":
        return Proximity(_vec(sec, "center", "smooth"))
    if kind == "indefinite_quadratic":
        c = _vec(sec, "c", "smooth") if "c" in sec else None
        return IndefiniteQuadratic(_matrix(sec["Q"], "Q"), c)
    raise ConfigError(f"unknown smooth kind {kind!r}")


def build_prox(sec):
    kind = sec.get("kind")
    try:
        if kind == "indicator_l0_ball":
            return L0Ball(_vec(sec, "center", "prox"), int(sec["budget"]))
        if kind == "indicator_card":
            return Cardinality(int(sec["budget"]))
        if kind == "l0_penalty":
            return L0Penalty(float(sec["weight"]))
        if kind == "l1_penalty":
            center = _vec(sec, "center", "prox") if "center" in sec else None
            return L1Penalty(float(sec["weight"]), center)
        if kind == "l_half_penalty":
            return LHalfPenalty(float(sec["weight"]))
        if kind == "indicator_l1_ball":
            return L1Ball(float(sec.get("radius", 1.0)))
        if kind == "indicator_linf_ball":
            return LinfBall(float(sec.get("radius", 1.0)))
        if kind == "indicator_finite_set":
            return FiniteSet(sec["points"])
    except KeyError as exc:
        raise ConfigError(f"prox {kind}: missing {exc}") from exc
    raise ConfigError(f"unknown prox kind {kind!r}")


def build_operator(sec, n=None):
    kind = sec.get("kind", "identity")
    if kind == "dense":
        return DenseOperator(_matrix(sec["matrix"], "operator"))
    if kind == "identity":
        return IdentityOperator(int(sec.get("n", n or 0)))
    if kind == "first_difference":
        return FirstDifference(int(sec.get("n", n or 0)))
    raise ConfigError(f"unknown operator kind {kind!r}")


def load_problem(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read problem file: {exc}") from exc
    h = build_smooth(doc.get("smooth", {}))
    P = build_prox(doc.get("prox", {}))
    M = build_operator(doc.get("operator", {"kind": "identity"}), h.dim)
    if M.cols != h.dim:
        raise ConfigError(f"operator has {M.cols} columns but h lives in R^{h.dim}")
    return doc, h, P, M


def _phi(solver, h):
    mode = solver.get("phi", "zero")
    if mode == "zero":
        return ProximalTerm.zero()
    if mode == "l_smoothing":
        return ProximalTerm.l_smoothing(float(solver.get("L", h.lipschitz)))
    raise ConfigError(f"unknown phi mode {mode!r}")


def cmd_solve(args):
    doc, h, P, M = load_problem(args.problem)
    solver = doc.get("solver", {})
    method = solver.get("method", "admm")
    init = doc.get("init", {})
    if method == "pg":
        if not M.is_identity:
            raise ConfigError("pg needs the identity operator")
        ell = solver.get("ell")
        if ell is None:
            ell, _ = estimate_ell(h, solver.get("eps"))
        cfg = PgConfig(beta=float(solver["beta"]), ell=float(ell),
                       tol=float(solver.get("tol", 1e-8)),
                       max_iter=int(solver.get("max_iter", 100_000)))
        x0 = np.asarray(init.get("x0", np.zeros(h.dim)), dtype=float)
        rep = pg_solve(h, P, cfg, x0)
        out = dict(method="pg", termination=rep.termination, iters=rep.iters,
                   x=rep.x_final, objective=rep.objective, residual=rep.residual, ell=rep.ell)
    elif method == "admm":
        phi = _phi(solver, h)
        heur = None
        if solver.get("heuristic"):
            beta0 = solver.get("beta0", 1.0 / (5.0 * M.cols * M.sigma()))
            heur = BetaHeuristic(beta0=float(beta0))
        beta = solver.get("beta")
        if beta is None and heur is None:
            beta = check_assumption(h, M, phi).suggested_beta
        cfg = AdmmConfig(beta=beta, gamma=solver.get("gamma"), phi=phi,
                         tol=float(solver.get("tol", 1e-8)),
                         max_iter=int(solver.get("max_iter", 200_000)),
                         beta_heuristic=heur)
        triple = None
        if init:
            triple = (init.get("x0", np.zeros(M.cols)), init.get("y0", np.zeros(M.rows)),
                      init.get("z0", np.zeros(M.rows)))
        rep = admm_solve(h, P, M, cfg, init=triple)
        out = dict(method="admm", termination=rep.termination, iters=rep.iters,
                   x=rep.x_final, y=rep.y_final, z=rep.z_final,
                   residuals=rep.residuals._asdict(), objective=rep.objective,
                   beta_final=rep.beta_final, assumption_ok=rep.assumption_ok)
    else:
        raise ConfigError(f"unknown method {method!r}")
    emit(to_json(out), args.out)


def _pattern_problem(pattern, m, n, r, seed):
    rng = RngStream(seed)
    if pattern == "linearized":
        h = LeastSquares(rng.randn_matrix(m, n), rng.randn(m))
        return h, LHalfPenalty(1.0), IdentityOperator(n), ProximalTerm.l_smoothing(h.lipschitz)
    if pattern == "least_squares":
        h = LeastSquares(rng.randn_matrix(m, n), rng.randn(m))
        return h, LHalfPenalty(1.0), IdentityOperator(n), ProximalTerm.zero()
    if pattern == "strongly_convex":
        if m > n:
            raise ConfigError("strongly_convex pattern needs m <= n")
        M = DenseOperator(rng.randn_matrix(m, n))
        h = Proximity(rng.randn(n))
        return h, L0Ball(rng.randn(m), min(r, m)), M, ProximalTerm.zero()
    raise ConfigError(f"unknown pattern {pattern!r}")


def cmd_check(args):
    if args.problem:
        doc, h, P, M = load_problem(args.problem)
        phi = _phi(doc.get("solver", {}), h)
    else:
        h, P, M, phi = _pattern_problem(args.pattern, args.m, args.n, args.r, args.seed)
    rep = check_assumption(h, M, phi, beta=args.beta, gamma=args.gamma, P=P)
    emit(to_json(rep.as_dict()), args.out)


# ---------------------------------------------------------------------------


def _seeds(args):
    return [args.seed + k for k in range(args.count)]


def _default_seed():
    raw = os.environ.get("NCSPLIT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"NCSPLIT_SEED={raw!r} is not an integer")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="ncsplit", description="Splitting methods for nonconvex composite problems.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, runs=True):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="write here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if runs:
            sp.add_argument("--count", type=int, default=1, help="number of consecutive seeds")
            sp.add_argument("--jobs", type=int, default=1)
            sp.add_argument("--tol", type=float, default=1e-8)
            sp.add_argument("--timing", action="store_true", help="add a cpu_s column")

    sp = sub.add_parser("cpv", help="closest point violating at most r equations")
    common(sp)
    sp.add_argument("--m", type=int, default=50)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--r", type=int, default=10)
    sp.add_argument("--modes", default="l0_cold,l1_baseline,l0_warm")
    sp.add_argument("--max-iter", type=int, default=200_000)
    sp.set_defaults(func=cmd_cpv)

    sp = sub.add_parser("pcf", help="piecewise constant fitting")
    common(sp)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--r", type=int, default=20)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--max-iter", type=int, default=200_000)
    sp.add_argument("--signals", default=None, help="CSV path for x_orig, x_hat, x of the first seed")
    sp.set_defaults(func=cmd_pcf)

    sp = sub.add_parser("concave", help="concave minimization over a unit ball")
    common(sp)
    sp.add_argument("--m", type=int, default=100)
    sp.add_argument("--n", type=int, default=300)
    sp.add_argument("--ball", choices=("l1", "linf"), default="l1")
    sp.add_argument("--multipliers", default="1,2,10,50")
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.set_defaults(func=cmd_concave)

    sp = sub.add_parser("cycle", help="replay the period-8 ADMM orbit")
    common(sp, runs=False)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=80)
    sp.set_defaults(func=cmd_cycle)

    sp = sub.add_parser("check", help="assumption report for a problem")
    common(sp, runs=False)
    sp.add_argument("--problem", default=None)
    sp.add_argument("--pattern", choices=("linearized", "least_squares", "strongly_convex"),
                    default="strongly_convex")
    sp.add_argument("--m", type=int, default=50)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--r", type=int, default=10)
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("solve", help="one ADMM or PG run from a JSON problem file")
    common(sp, runs=False)
    sp.add_argument("--problem", required=True)
    sp.set_defaults(func=cmd_solve)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        if getattr(args, "count", 1) < 1 or getattr(args, "jobs", 1) < 1:
            raise ConfigError("--count and --jobs must be positive")
        if getattr(args, "tol", 1.0) <= 0:
            raise ConfigError("--tol must be positive")
        code = args.func(args)
        return 0 if code is None else code
    except SOLVER_ERRORS as exc:
        print(f"ncsplit: solver error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ContractError, ValueError, KeyError, TypeError) as exc:
        print(f"ncsplit: {exc}", file=sys.stderr)
        return 2


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
