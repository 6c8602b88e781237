"""Command-line front end: ``ellbloch <command> [flags]`` or ``ellbloch run job.json``.

Every invocation is turned into a job record, validated against
``schemas/jobspec.schema.json``, executed by :func:`run` and written out as
a report (``schemas/report.schema.json``).  Exit status is 0 when the run
raised no error and every verdict passed, 1 when a verdict failed, 2 on
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
from mpmath import mp, mpf

from . import __version__
from .analytic import PrecisionCtx, elliptic_log, periods, point_from_log
from .bloch import Divisor, HeightsProvider, check_kernel, norm_push, regulator
from .cache import DiskCache, default_cache_dir
from .curve import CurvePoint, RationalCurve
from .ekseries import KroneckerEvaluator, eis_value, g_value
from .errors import EllBlochError, MissingRationalTorsionError, SchemaError
from .heights import place_set
from .numfmt import mp_to_str, mpc_exact

REPORT_FORMAT = 1
COMMANDS = ("periods", "log", "ek", "heights", "check", "regulator", "norm-test", "specseq-selftest")
# keys that name local paths; they never reach the report
_LOCAL_KEYS = ("cache_dir", "output")

log = logging.getLogger("ellbloch")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("ellbloch").joinpath("schemas", f"{name}.schema.json").read_text())


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(obj, name: str):
    """Raise SchemaError at the deepest failing location."""
    v = jsonschema.Draft202012Validator(load_schema(name))
    errs = list(v.iter_errors(obj))
    if not errs:
        return
    best = jsonschema.exceptions.best_match(errs)
    raise SchemaError(best.message, _pointer(best.absolute_path))


# -- numbers in reports ------------------------------------------------


def _num(x, err, prec: int):
    return {"value": mp_to_str(x, prec), "err_bound": mp_to_str(err, 53)}


def _cnum(z, err, prec: int, exact: bool = False):
    out = {"re": mp_to_str(z.real, prec), "im": mp_to_str(z.imag, prec), "err_bound": mp_to_str(err, 53)}
    if exact:
        out["exact"] = mpc_exact(z)
    return out


def _verdict(name, status, provenance, tol, detail=None):
    out = {"name": name, "status": status, "provenance": provenance, "tolerance": tol}
    if detail is not None:
        out["detail"] = detail
    return out


class Runner:
    def __init__(self, job: dict):
        self.job = job
        self.ctx = PrecisionCtx(job.get("prec_bits", 192), deterministic=job.get("deterministic", True))
        root = job.get("cache_dir") or default_cache_dir()
        self.cache = DiskCache(root) if root else None
        self.stats: dict = {}
        with mp.workprec(self.ctx.prec_bits):
            self.tol = mpf(job["tol"]) if "tol" in job else mpf(2) ** (-(self.ctx.prec_bits // 2))

    @property
    def tol_str(self):
        return mp_to_str(self.tol, 53)

    # -- inputs --------------------------------------------------------

    def curve(self, obj=None) -> RationalCurve:
        obj = self.job["curve"] if obj is None else obj
        try:
            return RationalCurve.from_json(obj)
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, EllBlochError):
                raise
            raise SchemaError(str(exc), "/curve") from None

    def point(self, C) -> CurvePoint:
        P = CurvePoint.from_json(self.job["point"])
        if not C.contains(P):
            from .errors import PointNotOnCurveError

            raise PointNotOnCurveError(f"{P} is not on {C.key()}")
        return P

    def divisor(self) -> Divisor:
        obj = self.job["divisor"]
        C = self.curve(obj["curve"])
        terms = [(CurvePoint.from_json(t["point"]), Fraction(t["lambda"])) for t in obj["terms"]]
        return Divisor.make(C, terms, obj["k"])

    def lattice(self, C):
        L = self.cache.get_periods(C, self.ctx) if self.cache else None
        if L is None:
            L = periods(C, self.ctx)
            if self.cache:
                self.cache.put_periods(C, self.ctx, L)
        return L

    def heights(self, C, L=None):
        return HeightsProvider(C, self.ctx, L, store=self.cache)

    def err(self, *vals):
        # periods and Weierstrass data are computed with guard bits; this is
        # the working estimate, not an interval enclosure
        with mp.workprec(self.ctx.work_bits):
            return self.ctx.tol * max([mpf(1)] + [abs(v) for v in vals])

    # -- commands --------------------------------------------------------

    def cmd_periods(self):
        C = self.curve()
        L = self.lattice(C)
        p = self.ctx.prec_bits
        with mp.workprec(self.ctx.work_bits):
            return {
                "curve": C.to_json(),
                "omega1": _cnum(L.omega1, self.err(L.omega1), p),
                "omega2": _cnum(L.omega2, self.err(L.omega2), p),
                "tau": _cnum(L.tau, self.err(L.tau) * 4, p),
                "covol": _num(L.covol, self.err(L.covol) * 4, p),
            }, []

    def cmd_log(self):
        C = self.curve()
        P = self.point(C)
        L = self.lattice(C)
        z = elliptic_log(C, L, P, self.ctx).z
        p = self.ctx.prec_bits
        with mp.workprec(self.ctx.work_bits):
            a, b = L.coords(z)
            res = {
                "curve": C.to_json(),
                "point": P.to_json(),
                "z": _cnum(z, self.err(z, L.omega1, L.omega2), p),
                "coords": [_num(a, self.err(a), p), _num(b, self.err(b), p)],
            }
            if P.is_infinity:
                return res, [_verdict("log_inverse", "exact_pass", "exact", None)]
            x, _ = point_from_log(C, L, z)
            X = mpf(P.x.numerator) / P.x.denominator
            d = abs(x - X) / (1 + abs(X))
        status = "numeric_pass" if d <= self.tol else "fail"
        return res, [_verdict("log_inverse", status, "numeric", self.tol_str, {"residual": mp_to_str(d, 53)})]

    def cmd_ek(self):
        C = self.curve()
        P = self.point(C)
        L = self.lattice(C)
        z = elliptic_log(C, L, P, self.ctx)
        ev = KroneckerEvaluator(L, z.z, self.ctx)
        g = g_value(L, z.z, self.job["k"], self.ctx, ev)
        self.stats["summation"] = ev.stats.to_json()
        return {"curve": C.to_json(), "point": P.to_json(), "g_value": g.to_json(exact=True)}, [self._reality(g)]

    def _reality(self, g):
        with mp.workprec(self.ctx.work_bits):
            scale = 1 + max(abs(c) for c in g.coeffs)
            d = g.reality_defect()
            bound = self.tol * scale + 10 * g.err_bound
        status = "numeric_pass" if d <= bound else "fail"
        return _verdict("reality", status, "numeric", self.tol_str, {"defect": mp_to_str(d, 53)})

    def cmd_heights(self):
        C = self.curve()
        P = self.point(C)
        L = self.lattice(C)
        hp = self.heights(C, L)
        tab = hp.local(P)
        places = self.job.get("places") or (place_set(C, [P]) + ["inf"])
        p = self.ctx.prec_bits
        with mp.workprec(self.ctx.work_bits):
            local = []
            for v in places:
                val = tab.value(v)
                entry = {"place": str(v), "value": _num(val, self.err(val), p)}
                if v != "inf":
                    entry["exact"] = str(tab.nonarch.get(int(v), Fraction(0))) + " log " + str(v)
                local.append(entry)
            total = tab.total()
            return {
                "curve": C.to_json(),
                "point": P.to_json(),
                "local": local,
                "table": tab.to_json(),
                "canonical_height": _num(total, self.err(total) * 4, p),
            }, []

    def _kernel(self, D, L=None):
        C = D.curve
        places = self.job.get("places")
        if places is not None:
            places = [v if v == "inf" else int(v) for v in places]
        kv = check_kernel(D, self.heights(C, L), self.ctx, tol=self.tol, places=places)
        prov = "exact" if kv.overall == "exact_pass" else "numeric"
        return kv, _verdict("kernel", kv.overall, prov, self.tol_str, kv.to_json())

    def cmd_check(self):
        D = self.divisor()
        _, v = self._kernel(D)
        return {"divisor": D.to_json()}, [v]

    def cmd_regulator(self):
        D = self.divisor()
        L = self.lattice(D.curve)
        verdicts = []
        kv = None
        try:
            kv, v = self._kernel(D, L)
            verdicts.append(v)
        except EllBlochError as exc:
            verdicts.append(_verdict("kernel", "not_applicable", "exact", None, {"reason": f"{exc.code}: {exc}"}))
        res = regulator(D, L, self.ctx, verdict=kv, with_verdict=False)
        verdicts.append(self._reality(res.value))
        return {"divisor": D.to_json(), "regulator": res.value.to_json(exact=True)}, verdicts

    def cmd_norm_test(self):
        D = self.divisor()
        N = self.job["N"]
        push = norm_push(D, N)
        out = {"divisor": D.to_json(), "push": push.to_json()}
        if not push.full_kernel:
            return out, [_verdict("distribution", "not_applicable", "exact", None, {"reason": "E[N](Q) is trivial"})]
        C, k = D.curve, D.k
        L = self.lattice(C)
        lhs = eis_value([(lam, elliptic_log(C, L, P, self.ctx)) for P, lam in push.expanded.terms], k, L, self.ctx)
        rhs = eis_value([(lam, elliptic_log(C, L, P, self.ctx)) for P, lam in push.contracted.terms], k, L, self.ctx)
        with mp.workprec(self.ctx.work_bits):
            rhs.coeffs = [c / mpf(N) ** k for c in rhs.coeffs]
            rhs.err_bound /= mpf(N) ** k
            diff = lhs.max_abs_diff(rhs)
            scale = 1 + max(abs(c) for c in lhs.coeffs)
            bound = self.tol * scale + 10 * (lhs.err_bound + rhs.err_bound)
        out["expanded_value"] = lhs.to_json()
        out["contracted_value_scaled"] = rhs.to_json()
        status = "numeric_pass" if diff <= bound else "fail"
        return out, [_verdict("distribution", status, "numeric", self.tol_str, {"residual": mp_to_str(diff, 53)})]

    def cmd_specseq_selftest(self):
        from .specseq.selftest import run_selftest

        rep = run_selftest(self.job.get("seed", 0), self.job.get("suites"), self.job.get("scale", 1.0))
        verdicts = [
            _verdict(s["name"], "exact_pass" if not s["failures"] else "fail", "exact", None, {"count": s["count"], "failures": s["failures"]})
            for s in rep["suites"]
        ]
        return rep, verdicts


def _passes(verdicts, strict: bool) -> bool:
    ok = {"exact_pass", "not_applicable"} if strict else {"exact_pass", "numeric_pass", "not_applicable"}
    return all(v["status"] in ok for v in verdicts)


def _blank_report(command, echo) -> dict:
    return {
        "artifact": {"name": "ellbloch", "version": __version__, "report_format": REPORT_FORMAT},
        "command": str(command),
        "inputs": echo,
        "results": None,
        "verdicts": [],
        "stats": {},
        "ok": False,
        "error": None,
    }


def run(job: dict) -> dict:
    """Validate and execute a job; errors are captured in the report."""
    t0 = time.perf_counter()
    if not isinstance(job, dict):
        job = {"_": job}
    echo = {k: v for k, v in job.items() if k not in _LOCAL_KEYS}
    command = job.get("command", "")
    report = _blank_report(command, echo)
    runner = None
    try:
        validate(job, "jobspec")
        runner = Runner(job)
        fn = getattr(runner, "cmd_" + command.replace("-", "_"))
        with mp.workprec(runner.ctx.prec_bits):
            results, verdicts = fn()
        report["results"] = results
        report["verdicts"] = verdicts
        report["stats"] = runner.stats
        report["ok"] = _passes(verdicts, job.get("strict", False))
    except EllBlochError as exc:
        err = {"code": exc.code, "message": str(exc), "context": {"command": str(command)}}
        if isinstance(exc, SchemaError):
            err["pointer"] = exc.pointer
        if isinstance(exc, MissingRationalTorsionError):
            err["context"]["available"] = [P.to_json() for P in exc.available]
        for attr in ("locus", "witness"):
            if getattr(exc, attr, None) is not None:
                err["context"][attr] = repr(getattr(exc, attr))
        report["error"] = err
    except (ValueError, ArithmeticError) as exc:
        report["error"] = {"code": "invalid-input", "message": str(exc), "context": {"command": str(command)}}
    if not job.get("deterministic", True):
        report["runtime"] = {"wall_seconds": round(time.perf_counter() - t0, 6)}
        if runner is not None and runner.cache is not None:
            report["runtime"]["cache"] = runner.cache.stats()
    return report


def dumps(report: dict, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"


def exit_code(report: dict) -> int:
    if report["error"] is not None:
        return 2
    return 0 if report["ok"] else 1


# -- argument parsing ---------------------------------------------------


def _json_or_file(text: str, pointer: str):
    """Inline JSON, ``@path`` or a path to a JSON file."""
    src = text
    if text.startswith("@"):
        src = Path(text[1:]).read_text()
    elif not text.lstrip().startswith(("{", "[", '"')) and os.path.exists(text):
        src = Path(text).read_text()
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}", pointer) from None


def _curve_arg(text: str):
    t = text.strip()
    if t.startswith(("{", "@")) or t.endswith(".json"):
        return _json_or_file(t, "/curve")
    return t


def _point_arg(text: str):
    t = text.strip()
    if t in ("O", "0"):
        return "O"
    if t.startswith(("{", "@")) or t.endswith(".json"):
        return _json_or_file(t, "/point")
    x, _, y = t.partition(",")
    return {"x": x.strip(), "y": y.strip()}


def _places_arg(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(tok if tok == "inf" else int(tok))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec-bits", type=int, default=192)
    common.add_argument("--tol", help="numeric tolerance as a decimal string")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True)
    common.add_argument("--cache-dir", help="defaults to $ELLBLOCH_CACHE_DIR; no cache if unset")
    common.add_argument("--places", help="comma separated primes and/or 'inf'")
    common.add_argument("--strict", action="store_true", help="numeric_pass counts as failure")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    common.set_defaults(pretty=False)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="ellbloch", description="Elliptic Bloch group verification tools")
    ap.add_argument("--version", action="version", version=f"ellbloch {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, *fields):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if "curve" in fields:
            sp.add_argument("--curve", required=True, help="label (e.g. 37a1), inline JSON or @file")
        if "point" in fields:
            sp.add_argument("--point", required=True, help="'x,y', 'O', inline JSON or @file")
        if "k" in fields:
            sp.add_argument("--k", type=int, required=True)
        if "divisor" in fields:
            sp.add_argument("--divisor", required=True, help="inline JSON, @file or file path")
        if "N" in fields:
            sp.add_argument("--N", type=int, required=True)
        return sp

    add("periods", "period lattice", "curve")
    add("log", "elliptic logarithm of a point", "curve", "point")
    add("ek", "G_{E,k} at a point", "curve", "point", "k")
    add("heights", "local and canonical heights", "curve", "point")
    add("check", "kernel conditions for a divisor", "divisor")
    add("regulator", "regulator of a divisor", "divisor")
    add("norm-test", "distribution relation through [N]", "divisor", "N")
    sp = add("specseq-selftest", "randomized spectral sequence suites")
    sp.add_argument("--suite", action="append", dest="suites")
    sp.add_argument("--scale", type=float, default=1.0)
    sp = sub.add_parser("run", help="execute a job file")
    sp.add_argument("job")
    sp.add_argument("--pretty", action="store_true")
    sp.add_argument("-o", "--output")
    sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def job_from_args(ns) -> dict:
    job = {"command": ns.command, "prec_bits": ns.prec_bits, "seed": ns.seed, "deterministic": ns.deterministic}
    if ns.tol is not None:
        job["tol"] = ns.tol
    if ns.strict:
        job["strict"] = True
    if ns.cache_dir:
        job["cache_dir"] = ns.cache_dir
    if ns.places:
        job["places"] = _places_arg(ns.places)
    for name in ("k", "N", "suites"):
        v = getattr(ns, name, None)
        if v is not None:
            job[name] = v
    if ns.command == "specseq-selftest" and ns.scale != 1.0:
        job["scale"] = ns.scale
    if getattr(ns, "curve", None) is not None:
        job["curve"] = _curve_arg(ns.curve)
    if getattr(ns, "point", None) is not None:
        job["point"] = _point_arg(ns.point)
    if getattr(ns, "divisor", None) is not None:
        job["divisor"] = _json_or_file(ns.divisor, "/divisor")
    return job


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if ns.command == "run":
            job = _json_or_file("@" + ns.job, "")
        else:
            job = job_from_args(ns)
    except SchemaError as exc:
        report = _blank_report(ns.command, {})
        report["error"] = {"code": exc.code, "message": str(exc), "pointer": exc.pointer, "context": {"command": ns.command}}
    except (OSError, ValueError) as exc:
        print(f"ellbloch: {exc}", file=sys.stderr)
        return 2
    else:
        report = run(job)
    text = dumps(report, ns.pretty)
    if ns.output:
        Path(ns.output).write_text(text)
    else:
        sys.stdout.write(text)
    if report["error"] is not None:
        print(f"ellbloch: {report['error']['code']}: {report['error']['message']}", file=sys.stderr)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
