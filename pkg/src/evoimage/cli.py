"""Command-line entry points.

Subcommands: enhance (search + trace), replay (re-derive an output from a
trace), score (one metric, one number on stdout), degrade (synthetic
fog/blur/noise), bench (directory benchmark with CSV/Markdown report).

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import run_bench, write_report
from .degrade import DEGRADE_KINDS, degrade
from .errors import EvoImageError
from .evolve import EvolveConfig, evolve
from .image import load_image, save_image, to_luma
from .iqa import ScorerConfig, brisque_score, noise_variance, ssim
from .trace import load_trace, replay, save_trace

__all__ = ["cli_main", "main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_evolve_flags(p: _Parser) -> None:
    p.add_argument("--scorer", choices=["brisque", "external"], default="brisque")
    p.add_argument("--scorer-cmd", metavar="TEMPLATE",
                   help="external scorer command; {image} is replaced by a PNG path")
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--min-ssim", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=25)
    p.add_argument("--eval-downscale", type=int, metavar="PX",
                   help="cap the longest side before scoring (box filter)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="evoimage", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="evolve an improving transform sequence")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", required=True)
    _add_evolve_flags(p)

    p = sub.add_parser("replay", help="re-apply a trace to a source image")
    p.add_argument("--input", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true",
                   help="check source and result hashes against the trace")

    p = sub.add_parser("score", help="print one quality metric")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", required=True, choices=["brisque", "noise", "ssim"])
    p.add_argument("--ref", help="reference image (ssim only)")

    p = sub.add_parser("degrade", help="apply a synthetic degradation")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--op", required=True, metavar="KIND:STRENGTH",
                   help="fog:<s> | blur:<sigma> | noise:<sigma>")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", help="evolve every image in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--report", required=True, help="CSV path; .md written alongside")
    p.add_argument("--degrade", metavar="KIND:STRENGTH",
                   help="degrade inputs first (fog:<s> | blur:<sigma> | noise:<sigma>)")
    _add_evolve_flags(p)

    return parser


def _parse_degrade(text: str) -> tuple[str, float]:
    kind, sep, raw = text.partition(":")
    if not sep or kind not in DEGRADE_KINDS:
        raise _UsageError(f"bad degradation {text!r}; expected fog:<s>|blur:<sigma>|noise:<sigma>")
    try:
        return kind, float(raw)
    except ValueError:
        raise _UsageError(f"bad degradation strength {raw!r}") from None


def _evolve_config(args) -> EvolveConfig:
    if args.scorer == "external":
        if not args.scorer_cmd:
            raise _UsageError("--scorer external requires --scorer-cmd")
        scorer = ScorerConfig(kind="external", command=args.scorer_cmd,
                              orientation="higher_better",
                              eval_downscale=args.eval_downscale)
    else:
        scorer = ScorerConfig(kind="brisque_builtin",
                              eval_downscale=args.eval_downscale)
    return EvolveConfig(
        population_size=args.population,
        epochs=args.epochs,
        min_ssim=args.min_ssim,
        seed=args.seed,
        scorer=scorer,
        max_sequence_len=args.max_steps,
    )


def _cmd_enhance(args) -> int:
    img = load_image(args.input)
    best, trace = evolve(img, _evolve_config(args))
    save_image(best.image, args.out)
    save_trace(trace, args.trace)
    s = trace.scores
    print(f"score: {s.raw_before:.4f} -> {s.raw_after:.4f}  "
          f"ssim: {s.ssim_final:.4f}  steps: {len(trace.steps)}")
    return 0


def _cmd_replay(args) -> int:
    img = load_image(args.input)
    trace = load_trace(args.trace)
    out = replay(img, trace, verify=args.verify)
    save_image(out, args.out)
    return 0


def _cmd_score(args) -> int:
    img = load_image(args.input)
    if args.metric == "brisque":
        value = brisque_score(img).value
    elif args.metric == "noise":
        value = noise_variance(to_luma(img))
    else:
        if not args.ref:
            raise _UsageError("--metric ssim requires --ref")
        value = ssim(img, load_image(args.ref))
    print(f"{value:.6f}")
    return 0


def _cmd_degrade(args) -> int:
    kind, strength = _parse_degrade(args.op)
    img = load_image(args.input)
    save_image(degrade(img, kind, strength, seed=args.seed), args.out)
    return 0


def _cmd_bench(args) -> int:
    degrade_spec = _parse_degrade(args.degrade) if args.degrade else None
    from pathlib import Path

    report_path = Path(args.report)
    report = run_bench(
        args.dir,
        _evolve_config(args),
        degrade_spec=degrade_spec,
        trace_dir=report_path.parent,
    )
    write_report(report, report_path)
    mean = report.summary
    print(f"images: {len(report.rows)}  "
          f"mean score: {mean['score_before']:.4f} -> {mean['score_after']:.4f}")
    return 0


_COMMANDS = {
    "enhance": _cmd_enhance,
    "replay": _cmd_replay,
    "score": _cmd_score,
    "degrade": _cmd_degrade,
    "bench": _cmd_bench,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"evoimage: error: {exc}", file=sys.stderr)
        return 1
    except EvoImageError as exc:
        print(f"evoimage: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"evoimage: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
