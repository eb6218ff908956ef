"""Command-line front end.

Exit status is 0 on success and 1 when the input itself is the problem,
for instance an unparsable formula or a failed verification. Bad flags
and unreadable input or config files give 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence as Seq, TextIO

from . import __version__
from .config import Config, load_config
from .errors import ConfigError, MathSemError, MathSyntaxError, UndecidedNode
from .evalharness import bundled_corpus_path, evaluate_corpus, load_gold
from .lexicon import DIALECTS
from .mst import parse_latex, render, to_dict, tokenize
from .numeric import check_equivalence, free_symbols, probe_branch_cuts
from .pipeline import analyze_document, lexicon_for, semantify
from .translator import parse_cas, translate


class UsageError(Exception):
    pass


def _dump(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def _fixed(pairs: Seq[str] | None) -> dict[str, complex]:
    out = {}
    for pair in pairs or ():
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise UsageError(f"--fix expects NAME=VALUE, got {pair!r}")
        out[name] = _complex(value)
    return out


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _underline(source: str, spans) -> str:
    marks = [" "] * (len(source) + 1)
    for start, end in spans:
        for k in range(start, max(end, start + 1)):
            if k < len(marks):
                marks[k] = "^"
    return "".join(marks).rstrip()


def diagnostic(exc: Exception, source: str | None = None) -> str:
    lines = [f"error: {exc}"]
    if source is None:
        return lines[0]
    spans = []
    if isinstance(exc, UndecidedNode):
        spans = [span for _, _, span in exc.nodes]
    elif getattr(exc, "position", None) is not None:
        spans = [(exc.position, exc.position + 1)]
    if spans:
        lines += ["  " + source, "  " + _underline(source, spans)]
    return "\n".join(lines)


# -- subcommands -------------------------------------------------------------


def cmd_parse(args, cfg: Config, err: TextIO) -> tuple[str, int]:
    lexicon = lexicon_for(cfg)
    tree = parse_latex(args.expr, lexicon.macro_signatures())
    if args.json:
        return _dump({"source": args.expr, "canonical": render(tree),
                      "tokens": len(tokenize(args.expr)), "tree": to_dict(tree)}), 0
    return render(tree), 0


def _hypotheses(fused) -> list[dict]:
    return [{"path": list(p), "symbol": fused.symbol(p), "decided": fused.decided_sense(p),
             "provenance": fused.provenance.get(p),
             "hypotheses": [{"sense": h.sense_id, "score": h.score} for h in hs]}
            for p, hs in fused.hypotheses.items()]


def cmd_translate(args, cfg: Config, err: TextIO) -> tuple[str, int]:
    lexicon = lexicon_for(cfg)
    context = _read(args.context) if args.context else None
    fused = semantify(args.expr, lexicon, cfg, context)
    report = translate(fused, args.to, lexicon)
    if args.json:
        return _dump({**report.to_dict(), "nodes": _hypotheses(fused)}), 0
    for w in report.warnings:
        print(f"warning: {w.message}", file=err)
    return report.output.rendered, 0


def cmd_verify(args, cfg: Config, err: TextIO) -> tuple[str, int]:
    lexicon = lexicon_for(cfg)
    context = _read(args.context) if args.context else None
    fused = semantify(args.expr, lexicon, cfg, context)
    report = translate(fused, args.to, lexicon)
    cas = parse_cas(report.output.rendered, args.to)
    fixed = _fixed(args.fix)
    names = [v for v in free_symbols(fused, lexicon) if v not in fixed]
    result = check_equivalence(fused, cas, names, cfg.sampler, cfg.tolerance,
                               rename=report.variables, fixed=fixed, lexicon=lexicon)
    code = 0 if result.passed else 1
    if args.json:
        return _dump({"translation": report.output.rendered, **result.to_dict()}), code
    verdict = "pass" if result.passed else "FAIL"
    return (f"{verdict}: {report.output.rendered}\n"
            f"max relative deviation {result.max_deviation:.3e} over {result.samples} samples "
            f"(seed {result.seed}, tol {result.tol:g})"), code


def cmd_probe(args, cfg: Config, err: TextIO) -> tuple[str, int]:
    lexicon = lexicon_for(cfg)
    fused = semantify(args.expr, lexicon, cfg)
    try:
        report = probe_branch_cuts(fused, args.var, args.radius, args.samples, _fixed(args.fix), lexicon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    if args.json:
        return _dump(report.to_dict()), 0
    lines = [f"circle |{args.var}| = {args.radius:g}, {args.samples} samples: "
             f"{'continuous' if report.continuous else f'{len(report.jumps)} jump(s)'}"]
    for j in report.jumps:
        lines.append(f"  jump at phi = {j.angle:.6f} rad, magnitude {j.magnitude:.6g}")
    if report.gaps:
        lines.append(f"  {len(report.gaps)} sample(s) could not be evaluated")
    return "\n".join(lines), 0


def cmd_analyze(args, cfg: Config, err: TextIO) -> tuple[str, int]:
    lexicon = lexicon_for(cfg)
    analysis = analyze_document(_read(args.document), lexicon, cfg)
    if args.json:
        return _dump(analysis.to_dict()), 0
    return analysis.to_text(), 0


def cmd_eval_gold(args, cfg: Config, err: TextIO) -> tuple[str, int]:
    lexicon = lexicon_for(cfg)
    cases = load_gold(args.corpus or bundled_corpus_path(), lexicon)
    report = evaluate_corpus(cases, cfg, lexicon, jobs=args.jobs)
    if args.json:
        return _dump(report.to_dict()), 0
    return report.to_text(), 0


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--config", help="config file (default: $MATHSEM_CONFIG or ./mathsem.json)")
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for batch commands")
    common.add_argument("--lexicon", help="lexicon file replacing the bundled one")
    common.add_argument("--tau", type=float, help="decision threshold for sense scores")
    common.add_argument("--window", type=int, help="context window in sentences")

    parser = argparse.ArgumentParser(prog="mathsem", description="Semantic LaTeX to CAS translation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("parse", parents=[common], help="print the canonical form of a formula")
    p.add_argument("expr")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("translate", parents=[common], help="translate a formula to a CAS dialect")
    p.add_argument("expr")
    p.add_argument("--to", choices=DIALECTS, required=True)
    p.add_argument("--context", help="text document surrounding the formula")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("verify", parents=[common], help="check a translation numerically")
    p.add_argument("expr")
    p.add_argument("--to", choices=DIALECTS, required=True)
    p.add_argument("--context", help="text document surrounding the formula")
    p.add_argument("--fix", action="append", metavar="NAME=VALUE", help="hold a symbol at a value")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--region", choices=("disk", "right-half"))
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("probe", parents=[common], help="look for branch-cut jumps on a circle")
    p.add_argument("expr")
    p.add_argument("--var", default="z")
    p.add_argument("--radius", type=float, default=2.5)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--fix", action="append", metavar="NAME=VALUE", help="hold another symbol at a value")
    p.add_argument("--csv", help="also write phi, Re f, Im f per sample to this file")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("analyze", parents=[common], help="semantify every formula of a document")
    p.add_argument("document")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eval-gold", parents=[common], help="score the pipeline on a gold corpus")
    p.add_argument("corpus", nargs="?", help="corpus JSON (default: the bundled corpus)")
    p.add_argument("--cutoff", type=float, help="score above which a definiens counts as retrieved")
    p.set_defaults(func=cmd_eval_gold)
    return parser


def _config(args) -> Config:
    cfg = load_config(args.config)
    return cfg.with_overrides(**{
        "lexicon": args.lexicon,
        "weights.tau": args.tau,
        "context.window": args.window,
        "sampler.seed": getattr(args, "seed", None),
        "sampler.count": getattr(args, "count", None),
        "sampler.radius": getattr(args, "radius", None) if args.command == "verify" else None,
        "sampler.region": getattr(args, "region", None),
        "tolerance": getattr(args, "tol", None),
        "cutoff": getattr(args, "cutoff", None),
    })


def run(argv: Seq[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    out = sys.stdout if stdout is None else stdout
    err = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    source = getattr(args, "expr", None)
    try:
        cfg = _config(args)
        text, code = args.func(args, cfg, err)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=err)
        return 2
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"error: {exc.strerror or exc}: {name}".rstrip(": "), file=err)
        return 2
    except MathSemError as exc:
        shown = source if isinstance(exc, (MathSyntaxError, UndecidedNode)) or hasattr(exc, "position") else None
        print(diagnostic(exc, shown), file=err)
        return 1
    if args.out:
        try:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror or exc}", file=err)
            return 2
    else:
        print(text, file=out)
    return code


def main(argv: Seq[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
