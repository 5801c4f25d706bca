"""
Command-line driver: suites, JSON reports, CSV samples.

    qgv verify --suite <id> [--b B] [--prec BITS] [--tol T] [--out PATH]
    qgv replay --script <name|all>
    qgv sample <gb-line|phi-lambda> --range START:STOP[@IM] --step H --csv PATH [--lam L]

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or config error.
Configuration precedence: flags, then QGV_B / QGV_PREC, then defaults.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import analytic_engine as ae
from .gb_rewrite import RewriteContext, list_scripts, load_script, replay_script
from .reporting import FAIL, PASS, IdentityReport
from .representations import (
    build_sl2_rep,
    build_sl3_rep,
    check_all,
    consistency,
    relation_ids,
    swap_indices,
)
from .special_functions import DEFAULT_B, DEFAULT_PREC, GbPoleError, gb_eval, lattice_classify, mp_new

__all__ = ["SUITES", "SuiteConfig", "ConfigError", "run_suite", "emit_report", "report_document",
           "sample_csv", "measured_rewrite_context", "main"]

SUITES = ("scalar", "symbolic", "rewrite", "sl2-kac", "eigen", "isometry", "all")

KAC_POINTS = ((0.3, 0.5, 0.4), (0.7, 0.2, 0.6))
EIGEN_POINTS = ((0.5, 0.3j), (0.8, -0.2j))


class ConfigError(ValueError):
    """Bad suite id, parameter or range; maps to exit code 2."""


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    b: float = DEFAULT_B
    prec: int = DEFAULT_PREC
    tol: float | None = None
    out: str | None = None
    seed: int = 20240601

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")
        if not self.b > 0:
            raise ConfigError("b must be positive")
        if self.prec < 64:
            raise ConfigError("prec must be at least 64 bits")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _scalar(cfg):
    mp = mp_new(cfg.b)
    out = []
    out += ae.functional_equation_check(mp, 100, cfg.seed, cfg.prec)
    out.append(ae.reflection_check(mp, 100, cfg.seed + 1, cfg.prec))
    out += ae.four_five_check(mp, prec=cfg.prec)
    out += ae.fourier_check(mp, prec=cfg.prec)
    out += ae.asymptotic_check(mp, prec=cfg.prec)
    out += ae.inversion_constant_check(mp, prec=cfg.prec)[0]
    return out


def _symbolic(cfg):
    out = []
    reps = {"sl2": build_sl2_rep(), "sl3.s1s2s1": build_sl3_rep("s1s2s1"), "sl3.s2s1s2": build_sl3_rep("s2s1s2")}
    for tag, rep in reps.items():
        for r in check_all(rep):
            out.append(IdentityReport.symbolic("symbolic", f"relation.{tag}.{r.relation_id}", r.passed,
                                               "" if r.passed else str(r.residual_terms) + " terms"))
        gens = ("E", "F") if tag == "sl2" else ("E1", "E2", "F1", "F2")
        for g in gens:
            out.append(IdentityReport.symbolic("symbolic", f"conjugated.{tag}.{g}", consistency(rep, g)))
    for word in ("s1s2s1", "s2s1s2"):
        rep = reps[f"sl3.{word}"]
        back = swap_indices(swap_indices(rep))
        ok = back.E == rep.E and back.F == rep.F and back.K == rep.K
        out.append(IdentityReport.symbolic("symbolic", f"swap_involution.{word}", ok))
    return out


def measured_rewrite_context(cfg):
    """RewriteContext whose Inversion rule uses the numerically identified constant."""
    reps, ph = ae.inversion_constant_check(mp_new(cfg.b), prec=cfg.prec)
    if ph is None:
        return reps, None
    return reps, RewriteContext(inversion_constant=ph)


def _rewrite(cfg):
    reps, ctx = measured_rewrite_context(cfg)
    out = [IdentityReport(r.suite.replace("scalar", "rewrite"), r.check_id, r.status, r.residual,
                          r.tolerance, r.details) for r in reps]
    for name in list_scripts():
        if ctx is None:
            out.append(IdentityReport("rewrite", f"script.{name}", FAIL, "no exact inversion constant", "exact-zero"))
            continue
        res = replay_script(load_script(name), ctx)
        out.append(IdentityReport.symbolic("rewrite", f"script.{name}", res.passed, res.message,
                                           steps=len(res.steps), checked_intermediates=res.checked_intermediates,
                                           inversion_constant=str(ctx.inversion_constant)))
    return out


def _kac(cfg):
    out = []
    for s, t, nu in KAC_POINTS:
        spec = ae.KacCheckSpec(s, t, nu, b=cfg.b)
        out += ae.kac_reports(spec)
    s, t, nu = KAC_POINTS[0]
    spec = ae.KacCheckSpec(s, t, nu, b=cfg.b)
    out.append(ae.kac_pair_consistency(spec, ae.gaussian(1.5, 0.3, -0.1), ae.gaussian(0.8, 0.0, 0.25)))
    f, g = ae.gaussian(1.0, 0.1, 0.2), ae.gaussian(1.0, -0.2, -0.3)
    for name in ("K", "E", "F"):
        out.append(ae.hermiticity_check(name, f, g, b=cfg.b))
    return out


def _eigen(cfg):
    out = []
    for lam, w in EIGEN_POINTS:
        out += ae.eigenfunction_check(ae.EigenCheckSpec(lam, w, b=cfg.b))
    return out


def _isometry(cfg):
    return ae.isometry_check(ae.gaussian(1.0, 0.1, 0.2), ae.TransformSpec(b=cfg.b))


_RUNNERS = {
    "scalar": _scalar,
    "symbolic": _symbolic,
    "rewrite": _rewrite,
    "sl2-kac": _kac,
    "eigen": _eigen,
    "isometry": _isometry,
}


def run_suite(cfg: SuiteConfig) -> list:
    """Run the checks of ``cfg.suite``; reports come back ordered by check id."""
    names = [n for n in SUITES if n != "all"] if cfg.suite == "all" else [cfg.suite]
    out = []
    for n in names:
        t0 = time.perf_counter()
        reps = _RUNNERS[n](cfg)
        ms = (time.perf_counter() - t0) * 1e3
        for r in reps:
            r.suite = n
            r.runtime_ms = r.runtime_ms or ms / max(len(reps), 1)
            if cfg.tol is not None and isinstance(r.residual, float):
                r.tolerance = cfg.tol
                r.status = PASS if r.residual <= cfg.tol else FAIL
        out += reps
    return sorted(out, key=lambda r: (r.suite, r.check_id))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _num(x):
    """Decimal-string serialization; floats use the shortest round-trip repr."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer, Fraction)):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": repr(float(x.real)), "im": repr(float(x.imag))}
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return _num(complex(x)) if isinstance(x, mpmath.mpc) else repr(float(x))
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    return None if x is None else str(x)


def report_document(reports, cfg: SuiteConfig | None = None) -> dict:
    cfg = cfg or SuiteConfig()
    checks = []
    for r in sorted(reports, key=lambda r: (r.suite, r.check_id)):
        checks.append({
            "suite": r.suite,
            "id": r.check_id,
            "status": r.status,
            "residual": _num(r.residual),
            "tolerance": _num(r.tolerance),
            "details": _num(r.details),
        })
    return {"suite": cfg.suite, "b": repr(float(cfg.b)), "prec": str(cfg.prec), "checks": checks}


def emit_report(reports, path, cfg: SuiteConfig | None = None) -> None:
    """Write the JSON report; byte-stable for identical inputs (no timings)."""
    text = json.dumps(report_document(reports, cfg), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------

def _parse_range(spec: str):
    try:
        body, _, im = spec.partition("@")
        a, b = body.split(":")
        return float(a), float(b), float(im) if im else 0.0
    except ValueError as e:
        raise ConfigError(f"bad range {spec!r}; expected START:STOP[@IM]") from e


def sample_csv(what, range_spec, step, path, b=DEFAULT_B, prec=DEFAULT_PREC, lam=0.5) -> int:
    """Tabulate G_b on a horizontal segment or Phi_lambda along u; returns the row count."""
    if what not in ("gb-line", "phi-lambda"):
        raise ConfigError(f"unknown sample {what!r}")
    if not step > 0:
        raise ConfigError("step must be positive")
    start, stop, im = _parse_range(range_spec) if isinstance(range_spec, str) else range_spec
    if stop < start:
        raise ConfigError("range must be increasing")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    mp = mp_new(b)
    rows = []
    for k in range(n):
        z = complex(round(start + k * step, 12), im)
        if what == "gb-line":
            if lattice_classify(mp, z, 1e-6 * mp.Q).kind == "pole":
                raise ConfigError(f"G_b pole at {z} inside the range")
            v = complex(gb_eval(mp, z, prec).value)
        else:
            for w in (-1j * z + 1j * lam, -1j * z - 1j * lam):
                if lattice_classify(mp, w, 1e-6 * mp.Q).kind == "pole":
                    raise ConfigError(f"Phi_lambda pole at u = {z} inside the range")
            v = complex(ae.phi_lambda_eval(mp, lam, z, prec))
        rows.append((z.real, z.imag, v.real, v.imag, abs(v)))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["re_z", "im_z", "re_val", "im_val", "abs_val"])
        for row in rows:
            wr.writerow([repr(float(x)) for x in row])
    return len(rows)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser():
    p = _Parser(prog="qgv", description="Numeric and symbolic checks for G_b and the modular double.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run a suite and write a JSON report")
    v.add_argument("--suite", required=True)
    v.add_argument("--b", type=float)
    v.add_argument("--prec", type=int)
    v.add_argument("--tol", type=float)
    v.add_argument("--out")
    r = sub.add_parser("replay", help="replay a derivation script")
    r.add_argument("--script", required=True)
    s = sub.add_parser("sample", help="tabulate a function to CSV")
    s.add_argument("what")
    s.add_argument("--range", required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--csv", required=True)
    s.add_argument("--lam", type=float, default=0.5)
    s.add_argument("--b", type=float)
    s.add_argument("--prec", type=int)
    return p


def _env_config(args):
    def pick(flag, env, cast, default):
        if flag is not None:
            return flag
        if os.environ.get(env):
            try:
                return cast(os.environ[env])
            except ValueError as e:
                raise ConfigError(f"{env}={os.environ[env]!r} is not valid") from e
        return default

    return pick(getattr(args, "b", None), "QGV_B", float, DEFAULT_B), \
        pick(getattr(args, "prec", None), "QGV_PREC", int, DEFAULT_PREC)


def _print_reports(reports):
    for r in reports:
        res = r.residual if isinstance(r.residual, str) else f"{r.residual:.3e}"
        print(f"{r.status.upper():4s} {r.suite:9s} {r.check_id}  residual={res}  "
              f"({r.runtime_ms:.0f} ms)", file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        b, prec = _env_config(args)
        if args.cmd == "verify":
            cfg = SuiteConfig(args.suite, b, prec, args.tol, args.out)
            reports = run_suite(cfg)
            _print_reports(reports)
            if cfg.out:
                emit_report(reports, cfg.out, cfg)
            else:
                sys.stdout.write(json.dumps(report_document(reports, cfg), indent=2, sort_keys=True) + "\n")
            return 0 if all(r.passed for r in reports) else 1
        if args.cmd == "replay":
            names = list_scripts() if args.script == "all" else [args.script]
            unknown = [n for n in names if n not in list_scripts()]
            if unknown:
                raise ConfigError(f"unknown script {unknown[0]!r}; available: {', '.join(list_scripts())}")
            ok = True
            for n in names:
                res = replay_script(load_script(n))
                ok &= res.passed
                print(f"{'PASS' if res.passed else 'FAIL'} {n}: {len(res.steps)} steps, "
                      f"{res.checked_intermediates} intermediates matched" + (f"\n{res.message}" if res.message else ""))
            return 0 if ok else 1
        if args.cmd == "sample":
            n = sample_csv(args.what, args.range, args.step, args.csv, b, prec, args.lam)
            print(f"wrote {n} rows to {args.csv}", file=sys.stderr)
            return 0
    except ConfigError as e:
        print(f"qgv: error: {e}", file=sys.stderr)
        return 2
    except GbPoleError as e:
        print(f"qgv: error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
