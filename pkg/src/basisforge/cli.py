"""Command-line front end.

Exit codes: 0 success, 1 parse or usage error, 2 resource limit hit,
3 unsupported symbol for lowering, 4 verification failed or inconclusive.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass

from . import bases, certificates, lowering, refute
from .evaluation import EvalLimits, LimitExceeded, UnboundVariable, default_max_bits, evaluate
from .report import VerificationReport
from .syntax import ParseError, parse, parse_with_names, to_dag_text, to_text
from .terms import (Signature, UnknownSymbol, size, symbol_from_text)

EXIT_OK, EXIT_PARSE, EXIT_LIMIT, EXIT_UNSUPPORTED, EXIT_FAILED = 0, 1, 2, 3, 4
TREE_WARN = 10 ** 5
TREE_REFUSE = 10 ** 7


@dataclass
class RunConfig:
    max_bits: int
    max_steps: int
    format: str
    seed: int
    workers: int
    command: str
    grid: list | None = None
    max_size: int | None = None
    max_const: int | None = None

    @property
    def limits(self) -> EvalLimits:
        return EvalLimits(self.max_bits, self.max_steps)


def parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers in {text!r}") from None
    if lo_i < 0 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return lo_i, hi_i


class Output:
    def __init__(self, cfg: RunConfig, stream=None):
        self.cfg = cfg
        self.stream = stream or sys.stdout

    def record(self, kind: str, text: str, **data):
        if self.cfg.format == "json":
            rec = {"type": kind, **data, "config": asdict(self.cfg)}
            self.stream.write(json.dumps(rec, sort_keys=True, default=str) + "\n")
        elif text:
            self.stream.write(text + "\n")

    def report(self, rep: VerificationReport):
        self.record("verification", rep.summary(), report=rep.to_dict())
        return EXIT_OK if rep.ok else EXIT_FAILED


def _ranges_for(t, grid):
    n = max(max(t.free, default=-1) + 1, 1)
    if len(grid) == 1:
        return grid * n
    return grid


def cmd_eval(args, cfg, out):
    t, names = parse_with_names(args.expr)
    env = {}
    for name, value in (("x", args.x), ("y", args.y), ("z", args.z)):
        if value is not None and name in names:
            env[names[name]] = value
    for binding in args.define or []:
        name, _, value = binding.partition("=")
        if name not in names:
            continue
        env[names[name]] = int(value)
    value = evaluate(t, env, cfg.limits)
    out.record("value", str(value), expr=to_text(t), value=str(value))
    return EXIT_OK


def cmd_lower(args, cfg, out):
    t = parse(args.expr)
    lowered, trace = lowering.lower(t)
    tree, dag = size(lowered)
    if tree > TREE_WARN:
        print(f"warning: lowered term has {tree} tree nodes ({dag} shared)", file=sys.stderr)
    if args.dag or tree > TREE_REFUSE:
        text = to_dag_text(lowered)
    else:
        text = to_text(lowered)
    summary = f"{text}\n# rules {trace.rule_counts()} size tree={tree} dag={dag}"
    out.record("lowered", summary, term=text, tree_size=tree, dag_size=dag,
               rules=trace.rule_counts())
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_jsonl())
    if args.verify:
        rep = lowering.verify_lowering(t, _ranges_for(t, [args.verify]), cfg.limits,
                                       workers=cfg.workers)
        return out.report(rep)
    return EXIT_OK


def cmd_certify(args, cfg, out):
    fn, sig = certificates.CERTIFIERS[args.lemma]
    if args.random:
        rng = random.Random(cfg.seed)
        status = EXIT_OK
        violations = inconclusive = 0
        for _ in range(args.random):
            t = certificates.random_term(sig, args.size, args.consts, rng)
            rep = certificates.check_certificate(t, fn(t), args.range, cfg.limits)
            violations += len(rep.counterexamples)
            inconclusive += len(rep.inconclusive)
            if rep.counterexamples:
                status = EXIT_FAILED
                out.record("violation", f"{to_text(t)}: {rep.summary()}",
                           term=to_text(t), report=rep.to_dict())
        out.record("soundness", f"{args.lemma}: {args.random} terms, {violations} violations, "
                   f"{inconclusive} inconclusive points",
                   terms=args.random, violations=violations, inconclusive=inconclusive)
        return status
    t = parse(args.expr)
    cert = fn(t)
    rep = certificates.check_certificate(t, cert, args.range, cfg.limits)
    out.record("certificate", f"{cert} {rep.status}", certificate=str(cert),
               report=rep.to_dict())
    return EXIT_OK if rep.ok else EXIT_FAILED


def cmd_refute(args, cfg, out):
    if args.preset:
        target_text, sig_text = refute.PRESETS[args.preset]
    else:
        if not args.target or not args.sig:
            raise ParseError("refute needs TARGET and --sig (or --preset)")
        target_text, sig_text = args.target, args.sig
    target = parse(target_text)
    sig = Signature(symbol_from_text(s) for s in sig_text.split(",") if s.strip())
    lim = EvalLimits(min(cfg.max_bits, args.probe_bits), cfg.max_steps)
    plant = [lowering.lower(parse(p))[0] for p in args.plant or []]
    ev = refute.refute_membership(target, sig, args.size, args.consts, lim=lim,
                                  max_classes=args.max_classes, plant=plant)
    for level in ev.per_size:
        out.record("level", "", **level)
    text = f"{ev.outcome}: {ev.classes_enumerated} classes up to size {ev.max_size}"
    if ev.witness:
        text += f"; witness {ev.witness} (size {ev.witness_size})"
    if ev.truncated:
        text += " [truncated]"
    out.record("evidence", text, evidence=ev.to_dict())
    return EXIT_OK


def _basis_symbols(text):
    return [symbol_from_text(s) for s in text.split(",") if s.strip()]


def cmd_bases(args, cfg, out):
    lim = cfg.limits
    sub = args.bases_cmd
    if sub == "lift":
        t = parse(args.expr)
        n = max(t.free, default=-1) + 1
        lifted = bases.lift_binary(t) if n == 2 else bases.lift_unary(t)
        out.record("lifted", to_text(lifted), term=to_text(lifted))
        return EXIT_OK
    if sub == "compile-unary":
        lb = bases.LiftedBasis.of(_basis_symbols(args.basis))
        F = parse(args.expr)
        compiled = bases.compile_to_unary(F, lb)
        out.record("compiled", to_text(compiled), term=to_text(compiled))
        if args.verify:
            return out.report(bases.check_unary_compilation(F, lb, args.verify, lim))
        return EXIT_OK
    if sub == "h":
        if args.compile:
            t = lowering.lower(parse(args.compile))[0]
            ht = bases.compile_to_h(t, pure=args.pure)
            out.record("h-term", to_text(ht), term=to_text(ht))
            if args.verify:
                from .report import check_equivalent
                rep = check_equivalent(t, ht, _ranges_for(t, [args.verify]), lim, name="h compilation")
                return out.report(rep)
            return EXIT_OK
        if args.audit:
            return out.report(bases.h_disjointness_audit())
        if args.xy is None:
            raise ParseError("bases h needs X Y, --compile or --audit")
        value = bases.eval_h(*args.xy, lim)
        out.record("value", str(value), value=str(value))
        return EXIT_OK
    if sub == "g":
        fs = [parse("2 * (x + 1)")] + [parse(f) for f in args.f or []]
        basis = bases.UnaryBasis(fs)
        if args.audit:
            return out.report(bases.g_disjointness_audit(basis))
        if args.xy is None:
            raise ParseError("bases g needs X Y or --audit")
        value = bases.eval_g(*args.xy, basis, lim)
        out.record("value", str(value), value=str(value))
        return EXIT_OK
    if sub == "mod2-identity":
        return out.report(bases.check_mod2_identity(args.range, lim))
    raise ParseError(f"unknown bases subcommand {sub!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="basisforge",
                                description="Terms over {x+y, x mod y, 2^x}: evaluate, lower, certify, refute.")
    p.add_argument("--max-bits", type=int, default=None,
                   help="bit cap for intermediate values (default 2^26 or $BASISFORGE_MAX_BITS)")
    p.add_argument("--max-steps", type=int, default=10 ** 7)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a term")
    e.add_argument("expr")
    e.add_argument("-x", type=int)
    e.add_argument("-y", type=int)
    e.add_argument("-z", type=int)
    e.add_argument("-D", "--define", action="append", metavar="NAME=VALUE")
    e.set_defaults(func=cmd_eval)

    lo = sub.add_parser("lower", help="rewrite into {add, mod, exp2}")
    lo.add_argument("expr")
    lo.add_argument("--verify", type=parse_range, metavar="LO..HI")
    lo.add_argument("--trace", metavar="FILE", help="write the rewrite trace as JSON lines")
    lo.add_argument("--dag", action="store_true", help="print shared subterms as a listing")
    lo.set_defaults(func=cmd_lower)

    c = sub.add_parser("certify", help="compute and check a growth certificate")
    c.add_argument("expr", nargs="?")
    c.add_argument("--lemma", choices=sorted(certificates.CERTIFIERS), required=True)
    c.add_argument("--range", type=parse_range, default=(0, 1000))
    c.add_argument("--random", type=int, default=0, metavar="N",
                   help="check N random terms of the sub-basis instead of EXPR")
    c.add_argument("--size", type=int, default=12)
    c.add_argument("--consts", type=int, default=10)
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("refute", help="bounded search for a term matching a target")
    r.add_argument("target", nargs="?")
    r.add_argument("--sig")
    r.add_argument("--preset", choices=sorted(refute.PRESETS))
    r.add_argument("--size", type=int, default=9)
    r.add_argument("--consts", type=int, default=3)
    r.add_argument("--max-classes", type=int, default=2_000_000)
    r.add_argument("--probe-bits", type=int, default=refute.REFUTE_MAX_BITS)
    r.add_argument("--plant", action="append", metavar="EXPR",
                   help="lower EXPR and plant it as a known witness")
    r.set_defaults(func=cmd_refute)

    b = sub.add_parser("bases", help="pairing-based low-arity bases")
    bsub = b.add_subparsers(dest="bases_cmd", required=True)
    bl = bsub.add_parser("lift")
    bl.add_argument("expr")
    bc = bsub.add_parser("compile-unary")
    bc.add_argument("expr")
    bc.add_argument("--basis", default="add,mod,exp2")
    bc.add_argument("--verify", type=parse_range, metavar="LO..HI")
    bh = bsub.add_parser("h")
    bh.add_argument("xy", nargs="*", type=int)
    bh.add_argument("--compile", metavar="EXPR")
    bh.add_argument("--pure", action="store_true")
    bh.add_argument("--verify", type=parse_range, metavar="LO..HI")
    bh.add_argument("--audit", action="store_true")
    bg = bsub.add_parser("g")
    bg.add_argument("xy", nargs="*", type=int)
    bg.add_argument("--f", action="append", metavar="EXPR", help="f1, f2, ... (f0 is 2(x+1))")
    bg.add_argument("--audit", action="store_true")
    bm = bsub.add_parser("mod2-identity")
    bm.add_argument("--range", type=parse_range, default=(0, 64))
    b.set_defaults(func=cmd_bases)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr in ("xy",):
        v = getattr(args, attr, None)
        if v is not None:
            if len(v) not in (0, 2):
                parser.error("expected two integers X Y")
            setattr(args, attr, tuple(v) if v else None)
    cfg = RunConfig(max_bits=args.max_bits or default_max_bits(), max_steps=args.max_steps,
                    format=args.format, seed=args.seed, workers=args.workers,
                    command=args.command)
    cfg.grid = [list(r) for r in (getattr(args, "verify", None), getattr(args, "range", None)) if r]
    cfg.max_size = getattr(args, "size", None)
    cfg.max_const = getattr(args, "consts", None)
    out = Output(cfg)
    try:
        return args.func(args, cfg, out)
    except (ParseError, UnknownSymbol, UnboundVariable, certificates.SignatureViolation,
            bases.NonUnary, ValueError) as e:
        if isinstance(e, lowering.UnsupportedSymbol):
            print(f"error: UnsupportedSymbol({e.symbol.name})", file=sys.stderr)
            return EXIT_UNSUPPORTED
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except LimitExceeded as e:
        print(f"error: LimitExceeded: {e}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
