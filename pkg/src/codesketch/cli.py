"""Command-line front end: ``codesketch {codeinfo,lowrank,regress,embed-check,sweep}``.

Every command writes a deterministic JSON report (sorted keys, no timestamps)
to ``--out`` or stdout; ``--format csv`` emits a flat table instead. Errors
go to stderr with exit status 1.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import __version__
from .codes import (
    CodeFamily,
    _check_bch_params,
    custom_code,
    dual_bch_generator,
    hadamard_code_generator,
    random_code_with_dual_distance,
)
from .diagnostics import ORACLE_LIMIT, embedding_error, lowrank_bound_report
from .gf2 import BitMatrix, DistanceTooExpensive, dual_distance, min_distance
from .lowrank import projection_error, randomized_svd, reconstruct
from .mmio import read_matrix_market, read_vector, save_factors, write_vector
from .regress import regression_bound_report, sketch_lsq
from .report import BoundReport, dumps
from .scm import build_scm, to_descriptor

log = logging.getLogger("codesketch")

DEFAULT_REQUIRED_DUAL_DISTANCE = 4


class CliError(Exception):
    pass


# -- configuration helpers ---------------------------------------------------

def _threads() -> int:
    raw = os.environ.get("CODESKETCH_THREADS")
    if not raw:
        return min(os.cpu_count() or 1, 8)
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"CODESKETCH_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise CliError("CODESKETCH_THREADS must be >= 1")
    return n


def _map_trials(fn, seeds, threads):
    # Results come back in seed order whatever the scheduling.
    if threads <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, seeds))


def _positive(name):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v
    return conv


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _ell_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("--sweep expects a comma-separated list of integers") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("--sweep values must be positive")
    return vals


def choose_dual_bch(n: int, min_ell: int = 1, required: int = DEFAULT_REQUIRED_DUAL_DISTANCE,
                    q: int | None = None, t: int | None = None):
    """Smallest dual-BCH code with length ``>= min_ell``, ``2^r >= n`` and dual
    distance ``> required``; ``q`` and/or ``t`` may be pinned."""
    need_bits = max(1, math.ceil(math.log2(max(n, 2))))
    t_min = -(-required // 2)  # smallest t with 2t + 1 > required
    for qq in ([q] if q is not None else range(2, 17)):
        if (1 << qq) - 1 < min_ell:
            continue
        for tt in ([t] if t is not None else range(max(t_min, 1), 1 << qq)):
            try:
                _check_bch_params(qq, tt)
            except ValueError:
                break
            if 2 * tt + 1 <= required and t is None:
                continue
            code = dual_bch_generator(qq, tt)
            if code[1].dim >= need_bits:
                return code
    raise CliError(f"no dual-BCH code with length >= {min_ell}, 2^r >= {n} and dual distance "
                   f"> {required}" + (f" for q = {q}" if q is not None else ""))


def make_code(args, n: int, k: int = 1):
    fam = args.code
    required = args.require_dual_distance
    if fam == "dual-bch":
        q = args.q
        if args.ell is not None:
            qq = (args.ell + 1).bit_length() - 1
            if (1 << qq) - 1 != args.ell:
                raise CliError(f"dual-BCH lengths are 2^q - 1; --ell {args.ell} is not")
            if q is not None and q != qq:
                raise CliError(f"--ell {args.ell} conflicts with --q {q}")
            q = qq
        if args.t is not None and q is None:
            raise CliError("--t needs --q or --ell")
        req = DEFAULT_REQUIRED_DUAL_DISTANCE if required is None else required
        if args.t is not None:
            return dual_bch_generator(q, args.t)
        min_ell = 1 if q is not None else _smallest_length(2 * k)
        return choose_dual_bch(n, min_ell, req, q=q)
    if fam == "hadamard":
        r = args.r if args.r is not None else max(1, math.ceil(math.log2(max(n, 2))))
        simplex = args.simplex or (args.ell is not None and args.ell == (1 << r) - 1)
        code = hadamard_code_generator(r, simplex=simplex)
        if args.ell is not None and args.ell != code[1].length:
            raise CliError(f"--ell {args.ell} does not match Hadamard length {code[1].length}")
        return code
    if fam == "random":
        if args.ell is None:
            raise CliError("--code random needs --ell")
        r = args.r if args.r is not None else max(1, math.ceil(math.log2(max(n, 2))))
        kk = 2 if required is None else required
        return random_code_with_dual_distance(args.ell, kk, r, seed=args.code_seed)
    if fam == "file":
        if not args.generator:
            raise CliError("--code file needs --generator PATH")
        G = BitMatrix.from_text(Path(args.generator).read_text())
        return custom_code(G)
    raise CliError(f"unknown code family {fam!r}")


def _smallest_length(at_least: int) -> int:
    q = 2
    while (1 << q) - 1 < at_least:
        q += 1
    return (1 << q) - 1


def _read_matrix(path):
    if not path:
        raise CliError("--input is required")
    return read_matrix_market(path)


def _dense(A, what="matrix"):
    if sp.issparse(A):
        if A.shape[0] * A.shape[1] > (1 << 26):
            raise CliError(f"{what} too large to densify")
        return A.toarray()
    return A


def _emit(args, payload, csv_text=None):
    text = csv_text if (args.format == "csv" and csv_text is not None) else dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _stats(vals):
    a = np.asarray([v for v in vals if v is not None and math.isfinite(v)], dtype=np.float64)
    if a.size == 0:
        return {"count": 0}
    return {"count": int(a.size), "min": float(a.min()), "median": float(np.median(a)),
            "mean": float(a.mean()), "max": float(a.max())}


def _frequencies(reports: list[BoundReport]) -> dict:
    names = sorted({e.name for r in reports for e in r})
    out = {}
    for name in names:
        hits = [e.satisfied for r in reports for e in r if e.name == name and e.applicable]
        out[name] = {"applicable": len(hits), "satisfied": int(sum(hits)),
                     "frequency": (sum(hits) / len(hits)) if hits else None}
    return out


# -- commands ----------------------------------------------------------------

def cmd_codeinfo(args) -> int:
    n = args.n if args.n is not None else 1
    G, spec = make_code(args, n, args.k or 1)
    info = {
        "family": spec.family.value,
        "ell": spec.length,
        "r": spec.dim,
        "size": str(spec.size),
        "params": {k: v for k, v in spec.params.items()},
        "dual_distance_lb": spec.dual_distance_lb,
        "min_distance_lb": spec.min_distance_lb,
    }
    try:
        info["dual_distance"] = dual_distance(G)
    except DistanceTooExpensive:
        info["dual_distance"] = None
    try:
        d = min_distance(G)
        info["min_distance"] = d
    except DistanceTooExpensive:
        d = spec.min_distance_lb
        info["min_distance"] = None
    info["coherence_formula"] = (spec.length - 2 * d) / 2.0**spec.dim if d is not None else None
    if spec.family is CodeFamily.DUAL_BCH:
        t = spec.params["t"]
        info["coherence_dual_bch_formula"] = (2 * (t - 1) * math.sqrt(spec.length + 1) - 1) / 2.0**spec.dim
    dd = info["dual_distance"] if info["dual_distance"] is not None else spec.dual_distance_lb
    checks = {}
    if args.n is not None:
        checks["size_ok"] = spec.dim >= 63 or (1 << spec.dim) >= args.n
    req = args.require_dual_distance if args.require_dual_distance is not None else args.k
    if req is not None:
        checks["required_dual_distance_gt"] = req
        checks["dual_distance_ok"] = dd is not None and dd > req
    info["checks"] = checks
    payload = {"command": "codeinfo", "version": __version__,
               "config": _config(args, ["code", "q", "t", "r", "ell", "n", "k",
                                        "require_dual_distance", "simplex"]),
               "results": info}
    csv_text = "key,value\n" + "".join(
        f"{k},{v}\n" for k, v in sorted(info.items()) if not isinstance(v, dict)
    )
    _emit(args, payload, csv_text)
    return 0


def _lowrank_trial(A, args, code, seed, oracle):
    s = build_scm(code, A.shape[1], seed=seed, strategy=args.strategy)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        f = randomized_svd(A, args.k, s, power=args.power)
    res = {
        "seed": seed,
        "e_ell": projection_error(A, f.basis),
        "singvals": f.singvals.tolist(),
        "rank_deficient": f.rank_deficient,
        "warnings": [str(w.message) for w in caught],
    }
    if max(A.shape[0] * A.shape[1], 0) <= (1 << 24):
        res["frobenius_error"] = float(np.linalg.norm(_dense(A) - reconstruct(f)))
    rep = None
    if oracle is not None:
        rep = lowrank_bound_report(_dense(A), f, s, oracle=oracle, epsilon=args.epsilon)
        res["bounds"] = rep.to_list()
    return f, s, res, rep


def _oracle_for(A, args):
    if not args.oracle:
        return None
    if max(A.shape) > ORACLE_LIMIT:
        raise CliError(f"--oracle needs max(m, n) <= {ORACLE_LIMIT}, input is {A.shape}")
    return np.linalg.svd(_dense(A), full_matrices=True)


def cmd_lowrank(args) -> int:
    if args.sweep:
        return cmd_sweep(args)
    A = _read_matrix(args.input)
    if args.k is None:
        raise CliError("--k is required")
    code = make_code(args, A.shape[1], args.k)
    oracle = _oracle_for(A, args)
    seeds = [args.seed + i for i in range(args.trials)]
    trials = _map_trials(lambda sd: _lowrank_trial(A, args, code, sd, oracle), seeds, args.threads)
    f, s, _, _ = trials[0]
    results = {"trials": [t[2] for t in trials],
               "e_ell": _stats([t[2]["e_ell"] for t in trials])}
    reports = [t[3] for t in trials if t[3] is not None]
    if reports:
        results["bound_frequencies"] = _frequencies(reports)
        for key in ("frobenius_ratio", "spectral_ratio"):
            results[key] = reports[0].get(key).measured
    payload = {"command": "lowrank", "version": __version__,
               "config": _config(args, ["input", "k", "power", "seed", "trials", "oracle",
                                        "epsilon", "strategy"]),
               "sampler": to_descriptor(s), "results": results}
    if args.out:
        out = Path(args.out)
        save_factors(out, f, {"sampler": to_descriptor(s)})
        name = "report.csv" if args.format == "csv" else "report.json"
        text = (_merge_csv(reports) if args.format == "csv" else dumps(payload))
        (out / name).write_text(text)
    else:
        _emit(args, payload, _merge_csv(reports))
    return 0


def _merge_csv(reports):
    merged = BoundReport()
    for r in reports:
        merged.extend(r)
    return merged.to_csv()


def cmd_sweep(args) -> int:
    """Projection error ``e_ell = ||A - Q Q^T A||_2`` for each ``ell`` in ``--sweep``."""
    A = _read_matrix(args.input)
    ells = args.sweep or [15, 31, 63]
    sig = None
    if max(A.shape) <= ORACLE_LIMIT or args.oracle:
        if max(A.shape) > ORACLE_LIMIT:
            raise CliError(f"--oracle needs max(m, n) <= {ORACLE_LIMIT}")
        sig = np.linalg.svd(_dense(A), compute_uv=False)
    rows = []
    for ell in ells:
        sub = argparse.Namespace(**{**vars(args), "ell": ell, "t": None, "q": None})
        code = make_code(sub, A.shape[1], 1)
        if code[1].length != ell:
            raise CliError(f"code family {args.code} has no length-{ell} member")

        def trial(sd, code=code):
            s = build_scm(code, A.shape[1], seed=sd, strategy=args.strategy)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f = randomized_svd(A, min(ell, min(A.shape)), s, power=args.power)
            return projection_error(A, f.basis)

        errs = _map_trials(trial, [args.seed + i for i in range(args.trials)], args.threads)
        nxt = float(sig[ell]) if sig is not None and sig.shape[0] > ell else (
            0.0 if sig is not None else None)
        rows.append({"ell": ell, "e_ell": float(np.median(errs)), "sigma_ell_plus_1": nxt,
                     "trials": args.trials, "r": code[1].dim})
    payload = {"command": "sweep", "version": __version__,
               "config": _config(args, ["input", "power", "seed", "trials", "code", "strategy"]),
               "results": {"rows": rows}}
    csv_text = "ell,e_ell,sigma_ell_plus_1\n" + "".join(
        f"{r['ell']},{r['e_ell']!r},{'' if r['sigma_ell_plus_1'] is None else repr(r['sigma_ell_plus_1'])}\n"
        for r in rows)
    if args.out and Path(args.out).is_dir():
        Path(args.out, "sweep.csv" if args.format == "csv" else "sweep.json").write_text(
            csv_text if args.format == "csv" else dumps(payload))
    else:
        _emit(args, payload, csv_text)
    return 0


def cmd_regress(args) -> int:
    A = _dense(_read_matrix(args.input), "design matrix")
    if not args.vector:
        raise CliError("--vector is required")
    b = read_vector(args.vector)
    if b.shape[0] != A.shape[0]:
        raise CliError(f"vector has {b.shape[0]} entries, matrix has {A.shape[0]} rows")
    code = make_code(args, A.shape[0], A.shape[1])

    def trial(sd):
        s = build_scm(code, A.shape[0], seed=sd, strategy=args.strategy)
        res = sketch_lsq(A, b, s, exact=True)
        rep = regression_bound_report(A, b, res, epsilon=args.epsilon)
        return s, res, rep

    seeds = [args.seed + i for i in range(args.trials)]
    trials = _map_trials(trial, seeds, args.threads)
    s0, r0, _ = trials[0]
    per = []
    for sd, (_, res, rep) in zip(seeds, trials):
        per.append({
            "seed": sd,
            "residual_sketch": res.residual_sketch,
            "residual_sketched_space": res.residual_sketched_space,
            "residual_exact": res.residual_exact,
            "residual_ratio": (res.residual_sketch / res.residual_exact
                               if res.residual_exact > 0 else None),
            "bounds": rep.to_list(),
        })
    results = {
        "trials": per,
        "kappa": r0.kappa,
        "gamma": r0.gamma,
        "x_sketch": r0.x_sketch.tolist(),
        "bound_frequencies": _frequencies([t[2] for t in trials]),
        "realized_epsilon": {
            name: _stats([t[2].get(name).measured for t in trials if t[2].get(name).applicable])
            for name in ("sketched_residual", "residual", "solution_sigma_min", "solution_kappa")
        },
    }
    payload = {"command": "regress", "version": __version__,
               "config": _config(args, ["input", "vector", "seed", "trials", "epsilon", "strategy"]),
               "sampler": to_descriptor(s0), "results": results}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_vector(out / "x.txt", r0.x_sketch)
        if args.format == "csv":
            (out / "report.csv").write_text(_merge_csv([t[2] for t in trials]))
        else:
            (out / "report.json").write_text(dumps(payload))
    else:
        _emit(args, payload, _merge_csv([t[2] for t in trials]))
    return 0


def cmd_embed_check(args) -> int:
    if args.input:
        M = _dense(_read_matrix(args.input))
        V, _ = np.linalg.qr(M)
    else:
        if args.n is None or args.k is None:
            raise CliError("embed-check needs --input or both --n and --k")
        rng = np.random.default_rng(args.seed)
        V, _ = np.linalg.qr(rng.standard_normal((args.n, args.k)))
    n, k = V.shape
    code = make_code(args, n, k)

    def trial(sd):
        return embedding_error(V, build_scm(code, n, seed=sd, strategy=args.strategy))

    seeds = [args.seed + i for i in range(args.trials)]
    reps = _map_trials(trial, seeds, args.threads)
    results = {
        "trials": [r.to_dict() for r in reps],
        "epsilon": _stats([r.epsilon_measured for r in reps]),
        "sigma_min": _stats([r.sigma_min for r in reps]),
        "sigma_max": _stats([r.sigma_max for r in reps]),
    }
    payload = {"command": "embed-check", "version": __version__,
               "config": _config(args, ["input", "n", "k", "seed", "trials", "strategy"]),
               "sampler": to_descriptor(build_scm(code, n, seed=args.seed, strategy=args.strategy)),
               "results": results}
    csv_text = "seed,epsilon,sigma_min,sigma_max\n" + "".join(
        f"{r.seed},{r.epsilon_measured!r},{r.sigma_min!r},{r.sigma_max!r}\n" for r in reps)
    _emit(args, payload, csv_text)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="codesketch", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, io=True):
        g = sp_.add_argument_group("code")
        g.add_argument("--code", choices=["dual-bch", "hadamard", "random", "file"],
                       default="dual-bch")
        g.add_argument("--q", type=_positive("--q"), help="dual-BCH field degree (ell = 2^q - 1)")
        g.add_argument("--t", type=_positive("--t"), help="dual-BCH designed parameter")
        g.add_argument("--r", type=_positive("--r"), help="code dimension (hadamard, random)")
        g.add_argument("--ell", type=_positive("--ell"), help="code length / number of samples")
        g.add_argument("--simplex", action="store_true",
                       help="Hadamard code without its zero column (dual distance 3)")
        g.add_argument("--generator", help="generator matrix file for --code file")
        g.add_argument("--code-seed", type=_nonneg, default=0,
                       help="seed for --code random generator search")
        g.add_argument("--require-dual-distance", type=_nonneg,
                       help="require dual distance strictly greater than this")
        g.add_argument("--strategy", choices=["sequential", "random"], default="sequential",
                       help="row selection: first n messages or random downsampling")
        if io:
            sp_.add_argument("--input", help="MatrixMarket file")
            sp_.add_argument("--seed", type=_nonneg, default=0)
            sp_.add_argument("--trials", type=_positive("--trials"), default=1)
            sp_.add_argument("--out", help="output file or directory")
        sp_.add_argument("--format", choices=["json", "csv"], default="json")

    c = sub.add_parser("codeinfo", help="code parameters and suitability checks")
    common(c, io=False)
    c.add_argument("--n", type=_positive("--n"), help="target number of sampler rows")
    c.add_argument("--k", type=_nonneg, help="target rank (checks dual distance > k)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_codeinfo)

    lr = sub.add_parser("lowrank", help="randomized SVD of a MatrixMarket matrix")
    common(lr)
    lr.add_argument("--k", type=_positive("--k"))
    lr.add_argument("--power", type=_nonneg, default=0)
    lr.add_argument("--oracle", action="store_true", help="compare against an exact SVD")
    lr.add_argument("--epsilon", type=float, default=0.5)
    lr.add_argument("--sweep", type=_ell_list, help="comma-separated ell values")
    lr.set_defaults(func=cmd_lowrank)

    sw = sub.add_parser("sweep", help="projection error versus ell")
    common(sw)
    sw.add_argument("--sweep", type=_ell_list, help="comma-separated ell values")
    sw.add_argument("--power", type=_nonneg, default=0)
    sw.add_argument("--oracle", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    rg = sub.add_parser("regress", help="sketch-and-solve least squares")
    common(rg)
    rg.add_argument("--vector", help="right-hand side, one value per line")
    rg.add_argument("--epsilon", type=float, default=0.5)
    rg.set_defaults(func=cmd_regress)

    em = sub.add_parser("embed-check", help="subspace embedding error over seeds")
    common(em)
    em.add_argument("--n", type=_positive("--n"))
    em.add_argument("--k", type=_positive("--k"))
    em.set_defaults(func=cmd_embed_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.threads = _threads()
        return args.func(args)
    except (CliError, ValueError, OSError, MemoryError) as exc:
        print(f"codesketch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
