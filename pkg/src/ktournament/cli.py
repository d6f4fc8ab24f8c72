"""Command-line front end.

Exit status: 0 on success, 1 on invalid input or parameters, 2 when a
verification fails or a lottery solve is not certified.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Sequence

from . import bench, certificates, rules
from .certificates import CertificateError
from .lottery import SolverConfig, defensive_gap, solve_reverse_stable, solve_stable
from .lottery_types import Lottery
from .metric import distortion_exact
from .profile import Profile, ProfileError, load_profile, parse_profile
from .rules import RuleError

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2
RULES = ("copeland", "uncovered", "ranked-pairs", "unblanketed", "slv", "pdl")
CERT_METHODS = ("partition", "post-shift", "post-shift-edge", "local", "two-step", "lottery-partition", "regular-lambda")
SWEEP_FLAGS = ("theta", "k", "alpha", "beta", "mu")
SWEEP_QUANTITIES = ("prune-size", "stable-worst", "rule-winner", "rule-distortion", "cert-lambda")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- serialization ---------------------------------------------------------------------

def encode(value):
    """JSON-ready form: Fractions as "p/q", floats at 12 significant digits."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) or hasattr(value, "__float__"):
        f = float(value)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return float(f"{f:.12g}")
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [encode(v) for v in items]
    return str(value)


def parse_number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_range(text: str) -> list[Fraction]:
    """Values of "a:b:step" (inclusive) or "v1,v2,...", or a single value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range {text!r} must look like start:stop:step")
        a, b, step = (parse_number(x) for x in parts)
        if step <= 0:
            raise UsageError("range step must be positive")
        vals = []
        v = a
        while v <= b:
            vals.append(v)
            v += step
        if not vals:
            raise UsageError(f"range {text!r} is empty")
        return vals
    vals = [parse_number(x) for x in text.split(",") if x.strip()]
    if not vals:
        raise UsageError(f"range {text!r} is empty")
    return vals


def _is_range(text) -> bool:
    return isinstance(text, str) and (":" in text or "," in text)


def _render_checks(checks: list[dict], fmt: str) -> str:
    cols = ["check", "pass", "value"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for c in checks:
            w.writerow([c.get(k, "") for k in cols])
        return buf.getvalue()
    width = max(len(c["check"]) for c in checks)
    return "".join(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check'].ljust(width)}  {c['value']}\n" for c in checks)


def render(report: dict, fmt: str) -> str:
    data = encode(report)
    if fmt == "json":
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    if isinstance(data.get("checks"), list):
        return _render_checks(data["checks"], fmt)
    if fmt == "table":
        width = max((len(k) for k in data), default=0)
        lines = []
        for k, v in data.items():
            shown = v if isinstance(v, (str, int, float)) else json.dumps(v, ensure_ascii=False)
            lines.append(f"{k.ljust(width)}  {shown}")
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(data))
    w.writerow([v if isinstance(v, (str, int, float)) else json.dumps(v, ensure_ascii=False) for v in data.values()])
    return buf.getvalue()


# -- helpers ----------------------------------------------------------------------------------

def _load(path: str) -> Profile:
    if path == "-":
        return parse_profile(sys.stdin.read())
    try:
        return load_profile(path)
    except OSError as exc:
        raise UsageError(f"cannot read profile {path!r}: {exc.strerror}") from None


def _cfg(args) -> SolverConfig:
    return SolverConfig(
        epsilon=None if args.eps is None else float(args.eps),
        max_iters=args.max_iters,
        seed=args.seed,
    )


def _solver_params(args, k=None) -> dict:
    cfg = _cfg(args)
    out = {"max_iters": cfg.max_iters, "seed": cfg.seed}
    out["eps"] = cfg.eps_for(k) if k is not None else cfg.epsilon
    return out


def _cand(p: Profile, text) -> int:
    if text is None:
        return None
    text = str(text)
    if text in p.labels:
        return p.labels.index(text)
    try:
        return p.index_of(int(text))
    except ValueError:
        raise ProfileError(f"unknown candidate {text!r}") from None


def _lottery_report(p: Profile, D: Lottery, cert) -> dict:
    return {
        "candidates": list(p.labels),
        "probs": list(D.probs),
        "worst_response": p.labels[cert.worst_response],
        "worst_value": cert.worst_value,
        "target_value": cert.target_value,
        "certified": cert.certified,
        "method": cert.method,
    }


def _parse_lottery(p: Profile, text: str) -> Lottery:
    vals = [parse_number(x) for x in text.split(",")]
    if len(vals) != p.m:
        raise UsageError(f"lottery needs {p.m} probabilities, got {len(vals)}")
    total = sum(vals)
    if total <= 0 or any(v < 0 for v in vals):
        raise UsageError("lottery probabilities must be nonnegative with a positive sum")
    return Lottery(tuple(v / total for v in vals))


# -- subcommands ---------------------------------------------------------------------------------

def cmd_stats(args) -> tuple[dict, int]:
    p = _load(args.profile)
    s = p.tournament_matrix().s
    rep = {
        "parameters": {"profile": args.profile, "k": args.k},
        "m": p.m,
        "candidates": list(p.labels),
        "blocks": len(p.blocks),
        "normalization": p.normalization,
        "pairwise": [list(r) for r in s],
        "plurality": [p.plurality_share(c) for c in range(p.m)],
        "profile": p.to_json(),
    }
    if args.k is not None:
        ks = p.summarize(args.k)
        rep["tuple_freq"] = {">".join(p.labels[c] for c in t): v for t, v in ks.tuple_freq.items() if v}
    return rep, EXIT_OK


def _rule_params(args, rule: str) -> dict:
    prm: dict = {"rule": rule}
    if rule in ("copeland", "uncovered"):
        prm["beta"] = parse_number(args.beta) if args.beta is not None else Fraction(1, 2)
    elif rule == "unblanketed":
        dflt = bench.blanket_params()
        prm["alpha"] = parse_number(args.alpha) if args.alpha is not None else dflt["alpha"]
        prm["beta"] = parse_number(args.beta) if args.beta is not None else dflt["beta"]
    elif rule in ("slv", "pdl"):
        prm["k"] = args.k if args.k is not None else 2
        prm["theta"] = parse_number(args.theta) if args.theta is not None else rules.DEFAULT_THETA
        if rule == "pdl":
            prm["mu"] = parse_number(args.mu) if args.mu is not None else Fraction(1, 2)
    return prm


def run_rule(p: Profile, prm: dict, cfg: SolverConfig) -> tuple[dict, bool]:
    """Apply one rule; returns its report fields and whether all solves certified."""
    rule = prm["rule"]
    if rule == "copeland":
        return {"winner": rules.copeland_weighted(p, prm["beta"])}, True
    if rule == "uncovered":
        U = rules.uncovered_set(p, prm["beta"])
        return {"winner": rules.copeland_weighted(p, prm["beta"]), "set": U}, True
    if rule == "ranked-pairs":
        return {"winner": rules.ranked_pairs(p)}, True
    if rule == "unblanketed":
        w, U = rules.unblanketed_set(p, prm["alpha"], prm["beta"])
        return {"winner": w, "set": U}, True
    if rule == "slv":
        w, tr = rules.simultaneous_lottery_veto(p, prm["k"], prm["theta"], cfg)
        trace = {
            "kernel": tr.kernel,
            "initial_scores": tr.initial_scores,
            "events": [{"time": e.time, "eliminated": list(e.eliminated),
                        "rates": None if e.rates is None else list(e.rates.probs)} for e in tr.events],
            "integrals": tr.integrals,
            "total_time": tr.total_time,
        }
        return {"winner": w, "trace": trace}, tr.certified
    if rule == "pdl":
        L, ok = rules.pruned_double_lotteries(p, prm["k"], prm["mu"], prm["theta"], cfg)
        return {"lottery": list(L.probs), "kernel": rules.quasi_kernel_prune(p, prm["theta"])}, ok
    raise UsageError(f"unknown rule {rule!r}")


def cmd_run(args) -> tuple[dict, int]:
    p = _load(args.profile)
    prm = _rule_params(args, args.rule)
    cfg = _cfg(args)
    out, ok = run_rule(p, prm, cfg)
    for key in ("winner",):
        if key in out:
            out[key] = p.labels[out[key]]
    if "set" in out:
        out["set"] = [p.labels[c] for c in out["set"]]
    if "kernel" in out:
        out["kernel"] = [p.labels[c] for c in out["kernel"]]
    rep = {"parameters": dict(prm, profile=args.profile, **_solver_params(args, prm.get("k"))), "candidates": list(p.labels)}
    rep.update(out)
    rep["certified"] = ok
    return rep, EXIT_OK if ok else EXIT_FAILED


def cmd_distortion(args) -> tuple[dict, int]:
    p = _load(args.profile)
    if (args.candidate is None) == (args.lottery is None):
        raise UsageError("give exactly one of --candidate or --lottery")
    target = _cand(p, args.candidate) if args.candidate is not None else _parse_lottery(p, args.lottery)
    rep = distortion_exact(p, target)
    metric = [[rep.witness_metric.d[v][c] for c in range(p.m)] for v in range(len(p.blocks))]
    return {
        "parameters": {"profile": args.profile, "candidate": args.candidate, "lottery": args.lottery},
        "value": rep.value,
        "witness_istar": None if rep.witness_istar is None else p.labels[rep.witness_istar],
        "per_istar": {p.labels[i]: v for i, v in rep.per_istar.items()},
        "blocks": [">".join(p.labels[c] for c in b.ranking) for b in p.blocks],
        "metric": metric,
    }, EXIT_OK


def cmd_lottery(args) -> tuple[dict, int]:
    p = _load(args.profile)
    cfg = _cfg(args)
    solve = solve_reverse_stable if args.reverse else solve_stable
    D, cert = solve(p, args.k, cfg)
    rep = {"parameters": dict(profile=args.profile, k=args.k, reverse=args.reverse, **_solver_params(args, args.k))}
    rep.update(_lottery_report(p, D, cert))
    if args.defensive:
        rep["defensive_gap"] = defensive_gap(p.reverse() if args.reverse else p, D, args.k, cfg)
    return rep, EXIT_OK if cert.certified else EXIT_FAILED


def _cert_json(p: Profile | None, r, labels) -> dict:
    lab = (lambda c: c) if labels is None else (lambda c: labels[c])
    wit = dict(r.witnesses)
    for key in ("partition", "edge_partition"):
        if key in wit:
            wit[key] = {side: [lab(c) for c in v] for side, v in wit[key].items()}
    if wit.get("kcand") is not None:
        wit["kcand"] = lab(wit["kcand"])
    if wit.get("path"):
        wit["path"] = [lab(c) for c in wit["path"]]
    if "per_istar" in wit:
        wit["per_istar"] = {lab(i): b for i, b in wit["per_istar"].items()}
    return {
        "method": r.method,
        "lambda": r.lam,
        "bound": r.bound,
        "jstar": None if r.jstar is None else lab(r.jstar),
        "istar": None if r.istar is None else lab(r.istar),
        "witnesses": wit,
    }


def cmd_certify(args) -> tuple[dict, int]:
    method = args.method
    prm = {"method": method, "profile": args.profile, "jstar": args.jstar, "istar": args.istar, "kcand": args.kcand}
    if method == "regular-lambda":
        k = args.k if args.k is not None else 2
        theta = parse_number(args.theta) if args.theta is not None else Fraction(51, 100)
        lam = certificates.regular_lambda(k, theta)
        prm.update(k=k, theta=theta)
        return {"parameters": prm, "method": method, "lambda": lam, "bound": 1 + 2 * lam}, EXIT_OK
    if args.profile is None:
        raise UsageError(f"method {method} needs a profile")
    p = _load(args.profile)
    labels = p.labels
    if method == "lottery-partition":
        cfg = _cfg(args)
        if args.lottery is not None:
            L = _parse_lottery(p, args.lottery)
            prm["lottery"] = args.lottery
        else:
            k = args.k if args.k is not None else 2
            L, cert = solve_stable(p, k, cfg)
            prm.update(k=k, **_solver_params(args, k))
        istars = [_cand(p, args.istar)] if args.istar is not None else list(range(p.m))
        reps = [certificates.cert_lottery_partition(p, L, i) for i in istars]
        worst = max(reps, key=lambda r: (r.lam, -r.istar))
        out = {"parameters": prm, "lottery": list(L.probs)}
        out.update(_cert_json(p, worst, labels))
        out["per_istar"] = {labels[r.istar]: r.lam for r in reps}
        return out, EXIT_OK
    if args.jstar is None:
        raise UsageError(f"method {method} needs --jstar")
    jstar = _cand(p, args.jstar)
    kw = {}
    if method == "post-shift-edge":
        fn, kw = certificates.cert_post_shift, {"edge_only": True}
    else:
        fn = certificates.METHODS[method]
    if method.startswith("post-shift"):
        kw["kcand"] = _cand(p, args.kcand)
    elif args.kcand is not None:
        raise UsageError("--kcand only applies to post-shift certificates")
    if args.istar is None:
        reps = [fn(p, jstar, i, **kw) for i in range(p.m) if i != jstar]
        if not reps:
            raise UsageError("certificates need at least two candidates")
        r = max(reps, key=lambda r: (r.bound, -r.istar))
        r.witnesses = dict(r.witnesses, per_istar={x.istar: x.bound for x in reps})
    else:
        r = fn(p, jstar, _cand(p, args.istar), **kw)
    out = {"parameters": prm}
    out.update(_cert_json(p, r, labels))
    return out, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    inst = args.instance
    if inst == "lb5":
        checks = bench.verify_lb5()
    elif inst == "theorem6-params":
        checks = bench.verify_blanket_params()
    else:
        rep = bench.cyclic_suite(args.m, args.trials, args.seed)
        checks = [{"check": f"trial {r['trial']}: all distortions <= 3", "value": max(r["values"]), "pass": r["pass"]}
                  for r in rep["rows"]]
    ok = all(c["pass"] for c in checks)
    prm = {"instance": inst}
    if inst == "cyclic":
        prm.update(m=args.m, trials=args.trials, seed=args.seed)
    return {"parameters": prm, "pass": ok, "checks": checks}, EXIT_OK if ok else EXIT_FAILED


def _sweep_source(profile_path, instance):
    """(profile, matrix-or-profile) named by the sweep source."""
    if instance == "lb5":
        inst = bench.build_lb5()
        return inst.profiles[0], inst.matrix
    if profile_path is None:
        raise UsageError("sweep needs a profile or --instance lb5")
    p = _load(profile_path)
    return p, p


def _sweep_row(task) -> tuple[dict, bool]:
    """One sweep row; a top-level function so a process pool can run it."""
    what, rule, profile_path, instance, cfg, prm, flag, v = task
    p, source = _sweep_source(profile_path, instance)
    row = {flag: v}
    ok = True
    if what == "prune-size":
        K = rules.quasi_kernel_prune(source, prm.get("theta", rules.DEFAULT_THETA))
        row.update(size=len(K), kernel=" ".join(str(c) for c in K))
    elif what == "stable-worst":
        D, cert = solve_stable(p, prm.get("k", 1), cfg)
        row.update(worst_value=cert.worst_value, target_value=cert.target_value, certified=cert.certified)
        ok = cert.certified
    elif what in ("rule-winner", "rule-distortion"):
        rp = _rule_params(argparse.Namespace(**{f: None for f in SWEEP_FLAGS}), rule)
        rp.update({f: x for f, x in prm.items() if f in rp})
        out, ok = run_rule(p, rp, cfg)
        if "winner" in out:
            row["winner"] = p.labels[out["winner"]]
            target = out["winner"]
        else:
            row["lottery"] = " ".join(f"{float(x):.12g}" for x in out["lottery"])
            target = Lottery(tuple(out["lottery"]))
        if what == "rule-distortion":
            row["distortion"] = distortion_exact(p, target).value
        row["certified"] = ok
    elif what == "cert-lambda":
        k = prm.get("k", 2)
        theta = prm.get("theta", Fraction(51, 100))
        row["regular_lambda"] = certificates.regular_lambda(k, theta)
        D, cert = solve_stable(p, k, cfg)
        row["lottery_lambda"] = max(certificates.cert_lottery_partition(p, D, i).lam for i in range(p.m))
        row["certified"] = ok = cert.certified
    return row, ok


def cmd_sweep(args) -> tuple[str, int]:
    ranged = [f for f in SWEEP_FLAGS if _is_range(getattr(args, f))]
    if len(ranged) != 1:
        raise UsageError(f"sweep needs exactly one ranged flag, got {len(ranged)}: {', '.join(ranged) or 'none'}")
    flag = ranged[0]
    values = parse_range(getattr(args, flag))
    if flag == "k":
        if any(v.denominator != 1 or v < 1 for v in values):
            raise UsageError("k values must be positive integers")
        values = [int(v) for v in values]
    if args.quantity.startswith("rule-") and args.rule is None:
        raise UsageError(f"{args.quantity} sweeps need --rule")
    _sweep_source(args.profile, args.instance)  # fail fast on a bad source
    fixed = {f: (int(x) if f == "k" else parse_number(x))
             for f in SWEEP_FLAGS if f != flag and (x := getattr(args, f)) is not None}
    cfg = _cfg(args)
    tasks = [(args.quantity, args.rule, args.profile, args.instance, cfg, dict(fixed, **{flag: v}), flag, v)
             for v in values]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_row, tasks))
    else:
        results = [_sweep_row(t) for t in tasks]
    header = []
    for row, _ in results:
        header += [key for key in row if key not in header]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row, _ in results:
        w.writerow([encode(row.get(h, "")) for h in header])
    status = EXIT_OK if all(ok for _, ok in results) else EXIT_FAILED
    return buf.getvalue(), status


# -- parser and dispatch -----------------------------------------------------------------------------

def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("json", "table", "csv"), default=d("json"))
    parser.add_argument("--eps", type=float, default=d(None), help="stability tolerance")
    parser.add_argument("--max-iters", type=int, default=d(100_000))
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--output", "-o", default=d(None), help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ktournament", description="Metric distortion tools for tournament voting rules.")
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("stats", help="profile statistics")
    sp.add_argument("profile")
    sp.add_argument("--k", type=int, help="also list ordered k-tuple frequencies")
    _common(sp, suppress=True)

    sp = sub.add_parser("run", help="apply a voting rule")
    sp.add_argument("profile")
    sp.add_argument("--rule", choices=RULES, required=True)
    for f in ("alpha", "beta", "theta", "mu"):
        sp.add_argument(f"--{f}")
    sp.add_argument("--k", type=int)
    _common(sp, suppress=True)

    sp = sub.add_parser("distortion", help="exact worst-case distortion")
    sp.add_argument("profile")
    sp.add_argument("--candidate")
    sp.add_argument("--lottery", help="comma-separated probabilities in candidate order")
    _common(sp, suppress=True)

    sp = sub.add_parser("lottery", help="stable k-lottery")
    sp.add_argument("profile")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--reverse", action="store_true")
    sp.add_argument("--defensive", action="store_true", help="also report the defensive gap")
    _common(sp, suppress=True)

    sp = sub.add_parser("certify", help="ordinal distortion certificate")
    sp.add_argument("profile", nargs="?")
    sp.add_argument("--method", choices=CERT_METHODS, required=True)
    sp.add_argument("--jstar")
    sp.add_argument("--istar")
    sp.add_argument("--kcand")
    sp.add_argument("--k", type=int)
    sp.add_argument("--theta")
    sp.add_argument("--lottery")
    _common(sp, suppress=True)

    sp = sub.add_parser("verify-paper", help="check the bundled reference instances")
    sp.add_argument("--instance", choices=("lb5", "cyclic", "theorem6-params"), required=True)
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--trials", type=int, default=10)
    _common(sp, suppress=True)

    sp = sub.add_parser("sweep", help="vary one parameter, emit CSV")
    sp.add_argument("profile", nargs="?")
    sp.add_argument("--instance", choices=("lb5",))
    sp.add_argument("--quantity", choices=SWEEP_QUANTITIES, required=True)
    sp.add_argument("--rule", choices=RULES)
    for f in SWEEP_FLAGS:
        sp.add_argument(f"--{f}", help="single value, a:b:step, or a comma list")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes for independent rows")
    _common(sp, suppress=True)
    return ap


COMMANDS = {
    "stats": cmd_stats,
    "run": cmd_run,
    "distortion": cmd_distortion,
    "lottery": cmd_lottery,
    "certify": cmd_certify,
    "verify-paper": cmd_verify,
    "sweep": cmd_sweep,
}


def dispatch(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        result, status = COMMANDS[args.command](args)
    except (UsageError, ProfileError, RuleError, CertificateError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    text = result if isinstance(result, str) else render(result, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return status


def main() -> None:
    sys.exit(dispatch())
