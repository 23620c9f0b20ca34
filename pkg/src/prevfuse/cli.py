"""Command-line entry point: ``prevfuse weights | screen | evaluate``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 screening score at or
above ``--threshold``. Settings may also come from a JSON file named by the
PREVFUSE_CONFIG environment variable; command-line flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from prevfuse import __version__
from prevfuse.classifiers import (
    DEFAULT_FEVER_C,
    DEFAULT_TAU,
    assemble_indicators,
    build_registry,
    group_by_subject,
    parse_observations_csv,
    parse_scores_csv,
)
from prevfuse.errors import DataError, PrevfuseError, UsageError
from prevfuse.evaluation import evaluate, parse_evaluation_csv, render_report
from prevfuse.fusion import fuse, parse_indicator_spec
from prevfuse.prevalence import (
    DEFAULT_MODES,
    aggregate_prevalence,
    derive_weights,
    load_weights_json,
    parse_prevalence_csv,
    weights_to_json,
)

CONFIG_ENV = "PREVFUSE_CONFIG"
EXIT_FLAGGED = 3

DEFAULTS = {
    "modes": ",".join(DEFAULT_MODES),
    "agg": "mean",
    "out": "-",
    "tau": DEFAULT_TAU,
    "fever_threshold": DEFAULT_FEVER_C,
    "rounding": "full",
    "format": "table",
}
AGG_NAMES = {"mean": "mean", "pop-weighted": "population_weighted", "population_weighted": "population_weighted"}
ROUNDING_NAMES = {"full": "full_precision", "paper": "paper_rounding"}

log = logging.getLogger("prevfuse")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(UsageError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prevfuse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    # argparse defaults stay None so config values can fill the gaps
    w = sub.add_parser("weights", help="derive fusion weights from a prevalence CSV")
    w.add_argument("--prevalence", help="CSV with study_id,population,symptom,prevalence_pct")
    w.add_argument("--modes", help="comma-separated mode order (default cough,breath,fever)")
    w.add_argument("--agg", choices=sorted(AGG_NAMES), help="prevalence aggregation (default mean)")
    w.add_argument("--out", help="weights JSON destination, '-' for stdout (default)")
    w.add_argument("--figure", help="also save a bar chart of the weights here")

    s = sub.add_parser("screen", help="fuse one subject's indicators into a screening score")
    s.add_argument("--weights", help="weights JSON from the weights command")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--indicators", help="mode=0/1 pairs, e.g. cough=1,breath=0,fever=1")
    src.add_argument("--observations", help="CSV with subject_id,mode,kind,value")
    src.add_argument("--scores", help="CSV with subject_id,mode,score")
    s.add_argument("--subject", help="subject id recorded with --indicators")
    s.add_argument("--tau", type=float, help="score threshold for score payloads (default 0.5)")
    s.add_argument("--fever-threshold", type=float, help="fever cut-off in deg C (default 38.0)")
    s.add_argument("--threshold", type=float, help="exit 3 when percent >= this value")
    s.add_argument("--log", help="append a JSONL screening record per subject")

    e = sub.add_parser("evaluate", help="compare weighted and equal-weight fusion on labeled data")
    e.add_argument("--dataset", help="CSV with subject_id,truth,<mode columns>")
    e.add_argument("--weights", help="weights JSON from the weights command")
    e.add_argument("--rounding", choices=sorted(ROUNDING_NAMES), help="full (default) or paper")
    e.add_argument("--format", choices=["table", "csv", "json"], help="report format (default table)")
    e.add_argument("--out", help="report destination, '-' for stdout (default)")
    e.add_argument("--figure", help="also save a case comparison chart here")

    for p in (w, s, e):
        p.add_argument("--version", action="version", version=f"prevfuse {__version__}")
    return parser


def load_config(command: str) -> dict:
    """Flat keys apply to every command; a nested object keyed by command name overrides them."""
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"{CONFIG_ENV}: cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{CONFIG_ENV}: {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError(f"{CONFIG_ENV}: top level must be an object")
    flat = {k.replace("-", "_"): v for k, v in doc.items() if not isinstance(v, dict)}
    section = doc.get(command, {})
    flat.update({k.replace("-", "_"): v for k, v in section.items()})
    return flat


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    config = load_config(args.command)
    for key in vars(args):
        if getattr(args, key) is None:
            if key in config:
                setattr(args, key, config[key])
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
    return args


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _emit(text: str, out: str):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc.strerror or exc}") from None


def cmd_weights(args) -> int:
    _require(args, "prevalence")
    agg = AGG_NAMES.get(args.agg)
    if agg is None:
        raise UsageError(f"unknown aggregation {args.agg!r}")
    modes = args.modes if isinstance(args.modes, list) else args.modes.split(",")
    modes = [m for m in modes if m.strip()]
    table = aggregate_prevalence(parse_prevalence_csv(args.prevalence), modes, agg)
    weights = derive_weights(table, modes)
    _emit(weights_to_json(weights, agg, table.source_digest), args.out)
    if args.figure:
        from prevfuse.plotting import plot_weights

        plot_weights(weights, args.figure)
    # keep stdout pure JSON when the export goes there
    print(weights.summary(), file=sys.stdout if args.out not in (None, "-") else sys.stderr)
    return 0


def _screening_inputs(args):
    if args.indicators:
        yield parse_indicator_spec(args.indicators, args.subject), False
        return
    if args.observations:
        observations = parse_observations_csv(args.observations)
    elif args.scores:
        observations = parse_scores_csv(args.scores)
    else:
        raise UsageError("one of --indicators, --observations or --scores is required")
    if not (0.0 <= float(args.tau) <= 1.0):
        raise UsageError(f"--tau must be in [0, 1], got {args.tau}")
    registry = build_registry(observations, float(args.tau), float(args.fever_threshold))
    for subject, obs in group_by_subject(observations).items():
        yield assemble_indicators(obs, registry), True


def cmd_screen(args) -> int:
    _require(args, "weights")
    weights, _ = load_weights_json(args.weights)
    digest = weights.digest()
    flagged = False
    for indicators, from_file in _screening_inputs(args):
        try:
            result = fuse(indicators, weights)
        except UsageError as exc:
            if from_file:
                raise DataError(f"subject {indicators.subject_id!r}: {exc}") from None
            raise
        prefix = f"subject={indicators.subject_id} " if from_file else ""
        print(prefix + result.line())
        if args.log:
            _append_log(args.log, indicators, result, digest)
        if args.threshold is not None and result.percent >= float(args.threshold):
            flagged = True
    return EXIT_FLAGGED if flagged else 0


def screening_record(indicators, result, digest: str) -> dict:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "subject_id": indicators.subject_id,
        "indicators": dict(indicators.labels),
        "modes_used": list(result.modes_used),
        "score": result.score,
        "percent": result.percent,
        "weights_digest": digest,
        "renormalized": result.renormalized,
    }


def _append_log(path, indicators, result, digest):
    line = json.dumps(screening_record(indicators, result, digest), separators=(",", ":"))
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
    except OSError as exc:
        raise DataError(f"cannot append to {path}: {exc.strerror or exc}") from None


def cmd_evaluate(args) -> int:
    _require(args, "dataset", "weights")
    rounding = ROUNDING_NAMES.get(args.rounding)
    if rounding is None:
        raise UsageError(f"unknown rounding {args.rounding!r}; use full or paper")
    weights, _ = load_weights_json(args.weights)
    samples = parse_evaluation_csv(args.dataset, weights.mode_order)
    summary = evaluate(samples, weights, rounding)
    _emit(render_report(summary, args.format), args.out)
    if args.figure:
        from prevfuse.plotting import plot_cases

        plot_cases(summary, args.figure)
    return 0


COMMANDS = {"weights": cmd_weights, "screen": cmd_screen, "evaluate": cmd_evaluate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](resolve(args))
    except PrevfuseError as exc:
        print(f"prevfuse: error: {exc}", file=sys.stderr)
        return exc.exit_code
