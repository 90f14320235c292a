"""Command-line entry point: ``pdi <subcommand> ...``.

Exit codes: 0 success, 1 validation or schema error, 2 numeric failure
(non-convergent limit, failing verification suite, closed-form mismatch).
"""

from __future__ import annotations

import argparse
import dataclasses
import functools
import json
import os
import sys
import tempfile
from fractions import Fraction
from importlib import resources

import jsonschema

from . import verify as verify_mod
from .algebra import tau_apply_info, tau_from_spec
from .ddf import (
    DDF,
    DDFError,
    INF,
    as_number,
    compare,
    evaluate,
    evaluate_right,
    lam,
    make_ddf,
    quantile,
    scalar_mul,
    sibley,
    to_csv,
    uniform,
)
from .integral import (
    SimpleFunction,
    choquet_like,
    choquet_of,
    function_from_spec,
    identity,
    integrate,
    integrate_simple,
    layered_closed_form,
    layered_integral,
    moore_utility,
    probe_linearity,
    tau_m,
)
from .measures import check_measure, gamma_a, length, measure_eval, measure_from_spec, null_sets, scaled_body
from .plot import to_svg
from .sets import Intervals, IntervalSet

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
EXAMPLE_ALIASES = {"5.4": "layered", "4.3": "lebesgue"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# -- I/O helpers --------------------------------------------------------------


def fmt(v) -> str:
    """Twelve significant digits; integers and infinity verbatim."""
    if v == INF:
        return "inf"
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.12g}"


@functools.cache
def _schema() -> dict:
    text = resources.files("pdi").joinpath("schemas/pdi.schema.json").read_text()
    return json.loads(text)


_DISCRIMINATORS = ("type", "kind")


def _matching_branch(err):
    """Follow a failed oneOf/anyOf into the branch whose type/kind tag matched the document."""
    while err.context:
        branches: dict = {}
        for sub in err.context:
            branches.setdefault(sub.relative_schema_path[0], []).append(sub)
        tagged = [errs for errs in branches.values()
                  if not any(e.validator == "const" and list(e.relative_path)[-1:] in ([d] for d in _DISCRIMINATORS)
                             for e in errs)]
        if len(tagged) != 1:
            break
        err = jsonschema.exceptions.best_match(tagged[0])
    return err


def validate(doc, kind: str):
    schema = {"$defs": _schema()["$defs"], "$ref": f"#/$defs/{kind}"}
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        best = _matching_branch(jsonschema.exceptions.best_match(errors))
        where = "/".join(str(p) for p in best.absolute_path) or "<root>"
        raise DDFError(f"{kind} document invalid at {where}: {best.message}")
    return doc


def load_doc(arg: str, kind: str):
    """Inline JSON (starting with '{' or '[') or a path to a JSON file."""
    text = arg if arg.lstrip()[:1] in "{[" else open(arg, encoding="utf-8").read()
    return validate(json.loads(text, parse_float=Fraction), kind)


def write_atomic(path: str, text: str):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".pdi-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def emit(args, F: DDF, diagnostics: dict | None = None):
    csv = to_csv(F)
    if getattr(args, "out", None):
        write_atomic(args.out, csv)
    else:
        sys.stdout.write(csv)
    if diagnostics is not None and getattr(args, "diagnostics", None):
        write_atomic(args.diagnostics, json.dumps(_plain(diagnostics), indent=2, sort_keys=True) + "\n")
    if getattr(args, "plot", None):
        write_atomic(args.plot, to_svg(F))


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, float):
        return float(fmt(v)) if v != INF else "inf"
    return v


def _outputs(p: argparse.ArgumentParser):
    p.add_argument("--out", help="write the result as canonical CSV here (default: stdout)")
    p.add_argument("--diagnostics", help="write diagnostics JSON here")
    p.add_argument("--plot", help="write an SVG plot of the result here")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("PDI_SEED", "0"))


# -- subcommands --------------------------------------------------------------


def cmd_ddf(args) -> int:
    F = make_ddf(load_doc(args.spec, "ddf"))
    if args.action == "eval":
        if args.x is None:
            raise DDFError("ddf eval needs --x")
        x = as_number(args.x)
        print(fmt(evaluate_right(F, x) if args.right else evaluate(F, x)))
    elif args.action == "quantile":
        if args.a is None:
            raise DDFError("ddf quantile needs --a")
        print(fmt(quantile(F, as_number(args.a), args.side)))
    elif args.action in ("sibley", "compare"):
        if not args.other:
            raise DDFError(f"ddf {args.action} needs --other")
        G = make_ddf(load_doc(args.other, "ddf"))
        print(fmt(sibley(F, G)) if args.action == "sibley" else compare(F, G).value)
    else:
        emit(args, F, {"top": F.top, "mass_at_infinity": F.mass_at_infinity, "is_step": F.is_step})
    return EXIT_OK


def cmd_tau(args) -> int:
    tau = tau_from_spec(load_doc(args.tau, "tau"))
    if args.resolution:
        tau = dataclasses.replace(tau, resolution=args.resolution)
    G = make_ddf(load_doc(args.g, "ddf"))
    H = make_ddf(load_doc(args.h, "ddf"))
    out, info = tau_apply_info(tau, G, H)
    emit(args, out, {"op": tau.name, "route": info.route, "exact": info.exact,
                     "resolution": info.resolution, "gap_bound": info.gap_bound})
    return EXIT_OK


def cmd_measure(args) -> int:
    gamma = measure_from_spec(load_doc(args.spec, "measure"))
    U = gamma.universe
    if args.action == "eval":
        if args.set is None:
            raise DDFError("measure eval needs --set")
        E = U.parse(json.loads(args.set, parse_float=Fraction))
        emit(args, measure_eval(gamma, E), {"set": repr(E)})
        return EXIT_OK
    if args.action == "check":
        rep = check_measure(gamma, seed=_seed(args))
        for line in rep.lines():
            print(line)
        if args.diagnostics:
            write_atomic(args.diagnostics, json.dumps(_plain({"results": rep.results,
                                                              "failures": [repr(f) for f in rep.failures],
                                                              "chain_gaps": rep.chain_gaps}),
                                                      indent=2, sort_keys=True) + "\n")
        return EXIT_OK if rep.passed else EXIT_NUMERIC
    candidates = None
    if args.candidates:
        candidates = [U.parse(c) for c in json.loads(args.candidates, parse_float=Fraction)]
    rep = null_sets(gamma, candidates)
    for E in rep.null_sets:
        print(sorted(E) if isinstance(E, frozenset) else [[fmt(a), fmt(b)] for a, b in E.pieces])
    print(f"closed_under_union={rep.closed_under_union} closed_under_subsets={rep.closed_under_subsets}")
    return EXIT_OK


def _job(args) -> dict:
    job = load_doc(args.job, "job")
    if getattr(args, "depth", None):
        job["depth"] = args.depth
    return job


def _job_measure(job):
    if "measure" not in job:
        raise DDFError(f"job op {job['op']!r} needs a 'measure'")
    return measure_from_spec(job["measure"])


def _job_set(job, gamma):
    return gamma.universe.parse(job["set"]) if "set" in job else gamma.universe.full()


def cmd_integrate(args) -> int:
    job = _job(args)
    op = job["op"]
    if op == "moore":
        return _moore(args, job.get("scores"), job.get("intervals"))
    if op == "choquet":
        return _choquet(args, job)
    gamma = _job_measure(job)
    E = _job_set(job, gamma)
    if "function" not in job:
        raise DDFError("job needs a 'function'")
    f = function_from_spec(job["function"], gamma.universe)
    if op == "probe_linearity":
        if "function2" not in job or f.kind != "simple":
            raise DDFError("probe_linearity needs two simple functions: 'function' and 'function2'")
        g = function_from_spec(job["function2"], gamma.universe)
        rep = probe_linearity(f.simple, g.simple, gamma, E)
        emit(args, rep.sum_integral, {"order": rep.order.value, "gap": rep.gap,
                                      "expects_equality": rep.expects_equality,
                                      "oplus_csv": to_csv(rep.oplus_integral)})
        return EXIT_OK if rep.ok else EXIT_NUMERIC
    res = integrate(f, gamma, E, job.get("depth", 12))
    emit(args, res.value, res.diagnostics())
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_NUMERIC if res.warnings else EXIT_OK


def _choquet(args, job) -> int:
    gamma = _job_measure(job)
    E = _job_set(job, gamma)
    if "levels" in job:
        sets = [gamma.universe.parse(s) for s in job.get("level_sets", [])]
        value = choquet_like(job["levels"], sets, gamma, E)
    else:
        f = function_from_spec(job["function"], gamma.universe)
        if f.kind != "simple":
            raise DDFError("choquet without explicit levels needs a simple function")
        value = choquet_of(f.simple, gamma, E)
    emit(args, value, {"op": "choquet"})
    return EXIT_OK


def cmd_choquet(args) -> int:
    job = _job(args)
    job["op"] = "choquet"
    return _choquet(args, job)


def _moore(args, scores, intervals) -> int:
    if not scores or not intervals:
        raise DDFError("moore needs scores and intervals")
    out = moore_utility(scores, intervals)
    emit(args, out, {"alpha": out.knots[0].x if out.knots else INF,
                     "beta": out.knots[-1].x if out.knots else INF})
    return EXIT_OK


def cmd_moore(args) -> int:
    scores = [as_number(s) for s in args.scores.split(",")]
    flat = [as_number(s) for s in args.intervals.split(",")]
    if len(flat) % 2:
        raise DDFError("--intervals needs an even number of values a1,b1,a2,b2,...")
    intervals = list(zip(flat[::2], flat[1::2]))
    out = moore_utility(scores, intervals)
    alpha = sum(x * a for x, (a, _) in zip(scores, intervals))
    beta = sum(x * b for x, (_, b) in zip(scores, intervals))
    print(f"uniform({fmt(alpha)}, {fmt(beta)})", file=sys.stderr)
    emit(args, out, {"alpha": alpha, "beta": beta})
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _seed(args)
    try:
        results = verify_mod.run_suite(args.suite, args.count, seed)
    except KeyError as exc:
        raise DDFError(f"unknown suite {exc.args[0]!r}") from exc
    for r in results:
        print(r.line())
    report = verify_mod.report_json(results, suite=args.suite, seed=seed, count=args.count)
    if args.out:
        write_atomic(args.out, report + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def cmd_example(args) -> int:
    name = EXAMPLE_ALIASES.get(args.name, args.name)
    if name == "layered":
        E = IntervalSet.of((0, 1))
        parts = [(IntervalSet.of((0, Fraction(1, 4))), Fraction(1, 4)),
                 (IntervalSet.of((Fraction(1, 4), Fraction(1, 2))), Fraction(1, 2)),
                 (IntervalSet.of((Fraction(1, 2), 1)), Fraction(3, 4))]
        got = layered_integral(2, E, parts)
        want = layered_closed_form(2, E, parts)
        emit(args, got, {"matches_closed_form": got == want, "closed_form_csv": to_csv(want)})
        return EXIT_OK if got == want else EXIT_NUMERIC
    if name == "lebesgue":
        U, a = Intervals(), Fraction(2, 5)
        f = SimpleFunction(U, ((IntervalSet.of((0, Fraction(1, 2))), 1), (IntervalSet.of((Fraction(1, 2), 1)), 3)))
        got = integrate_simple(f, gamma_a(U, tau_m(), length, a), U.full())
        want = scalar_mul(2, lam(a))
        emit(args, got, {"classical_value": 2, "matches_closed_form": got == want})
        return EXIT_OK if got == want else EXIT_NUMERIC
    if name == "limit":
        phi = uniform(0, 1)
        res = integrate(identity(), scaled_body(Intervals(), tau_m(), length, phi), Intervals().full(), args.depth or 12)
        gap = sibley(res.value, scalar_mul(Fraction(1, 2), phi))
        emit(args, res.value, {**res.diagnostics(), "gap_to_half_phi": gap})
        return EXIT_OK if gap < 1e-2 else EXIT_NUMERIC
    raise DDFError(f"unknown example {args.name!r}; choose layered, lebesgue or limit")


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdi", description="Distance distribution functions, decomposable measures and their integral.")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default: $PDI_SEED or 0)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ddf", help="build, evaluate and compare DDFs")
    p.add_argument("action", choices=["eval", "quantile", "csv", "sibley", "compare"])
    p.add_argument("--spec", required=True, help="DDF descriptor (JSON file or inline)")
    p.add_argument("--x")
    p.add_argument("--right", action="store_true", help="evaluate the right limit instead")
    p.add_argument("--a")
    p.add_argument("--side", choices=["minus", "plus"], default="minus")
    p.add_argument("--other", help="second descriptor for sibley/compare")
    _outputs(p)
    p.set_defaults(func=cmd_ddf)

    p = sub.add_parser("tau", help="apply a triangle function")
    p.add_argument("--tau", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--resolution", type=int)
    _outputs(p)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("measure", help="evaluate or check a decomposable measure")
    p.add_argument("action", choices=["eval", "check", "null-sets"])
    p.add_argument("--spec", required=True)
    p.add_argument("--set", help="set as JSON: element list, bitmask, or [[a,b],...]")
    p.add_argument("--candidates", help="JSON list of candidate sets (interval universes)")
    _outputs(p)
    p.set_defaults(func=cmd_measure)

    for name, fn in (("integrate", cmd_integrate), ("choquet", cmd_choquet)):
        p = sub.add_parser(name, help=f"run a {name} job")
        p.add_argument("--job", required=True)
        p.add_argument("--depth", type=int)
        _outputs(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("moore", help="probabilistic weighted mean of interval ratings")
    p.add_argument("--scores", required=True, help="comma-separated scores x1,...,xn")
    p.add_argument("--intervals", required=True, help="comma-separated a1,b1,...,an,bn")
    _outputs(p)
    p.set_defaults(func=cmd_moore)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all", choices=["all", *verify_mod.SUITES])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="reproduce a worked example")
    p.add_argument("name", help="layered | lebesgue | limit")
    p.add_argument("--depth", type=int)
    _outputs(p)
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DDFError, OSError, json.JSONDecodeError, jsonschema.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
