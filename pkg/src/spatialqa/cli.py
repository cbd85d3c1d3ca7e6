"""Command-line interface.

Subcommands: ``generate`` (build a dataset), ``solve`` (run the pipeline),
``closure`` (close a raw facts file), and ``eval`` (score predictions and
write the report bundle).

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 contradiction
budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .engine import Fact, Stated, TruthValue, closure
from .errors import SpatialQAError
from .generator import GenConfig, generate_dataset, load_dataset, save_dataset
from .metrics import evaluate
from .pipeline import Prediction, PipelineMode, run_pipeline
from .relations import Relation
from .report import render_table, write_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONTRADICTION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="spatialqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("generate", help="generate a synthetic dataset")
    p_gen.add_argument("--seed", type=int, required=True, help="unsigned 64-bit seed")
    p_gen.add_argument("--stories", type=int, required=True, help="number of stories")
    p_gen.add_argument("--config", type=Path, default=None, help="generation config JSON")
    p_gen.add_argument("--out", type=Path, required=True, help="output dataset path")

    p_solve = sub.add_parser("solve", help="run the QA pipeline over a dataset")
    p_solve.add_argument("--dataset", type=Path, required=True)
    p_solve.add_argument("--mode", choices=("gold", "parse"), required=True)
    p_solve.add_argument("--trace", action="store_true", help="embed derivation traces")
    p_solve.add_argument("--out", type=Path, required=True, help="predictions output path")
    p_solve.add_argument(
        "--max-contradictions",
        type=int,
        default=None,
        help="exit 3 when more stories than this are contradictory",
    )

    p_closure = sub.add_parser("closure", help="close a facts file under the rules")
    p_closure.add_argument("--facts", type=Path, required=True, help="JSON facts array")
    p_closure.add_argument("--trace", action="store_true", help="dump the trace JSON")
    p_closure.add_argument("--query", type=str, default=None, help='e.g. "LEFT(0,2)"')

    p_eval = sub.add_parser("eval", help="score predictions against a dataset")
    p_eval.add_argument("--pred", type=Path, required=True)
    p_eval.add_argument("--dataset", type=Path, required=True)
    p_eval.add_argument("--by-hops", action="store_true", help="slice by hop count")
    p_eval.add_argument("--report", type=Path, required=True)

    return parser


def _cmd_generate(args) -> int:
    raw = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_DATA
    raw["seed"] = args.seed
    config = GenConfig.from_dict(raw)
    if args.stories < 1:
        print("error: --stories must be positive", file=sys.stderr)
        return EXIT_USAGE
    dataset = generate_dataset(config, args.stories)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, args.out)
    n_questions = sum(len(s.questions) for s in dataset.stories)
    print(f"wrote {len(dataset.stories)} stories / {n_questions} questions to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    dataset = load_dataset(args.dataset)
    mode = PipelineMode.GOLD_TRIPLETS if args.mode == "gold" else PipelineMode.FULL_PARSE
    run = run_pipeline(dataset, mode, trace=args.trace)
    payload = {
        "mode": args.mode,
        "mean_runtime_s": run.mean_runtime_s,
        "contradictions": run.contradictions,
        "predictions": [p.to_dict() for p in run.predictions],
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(run.predictions)} predictions to {args.out}")
    for story_id, error in run.story_errors:
        print(f"note: story {story_id} abstained: {error}", file=sys.stderr)
    if args.max_contradictions is not None and run.contradictions > args.max_contradictions:
        print(
            f"error: {run.contradictions} contradictory stories exceed the budget "
            f"of {args.max_contradictions}",
            file=sys.stderr,
        )
        return EXIT_CONTRADICTION
    return EXIT_OK


_QUERY_RE = re.compile(r"^\s*([A-Za-z]+)\((\d+)\s*,\s*(\d+)\)\s*$")


def _load_facts(path: Path) -> list[Fact]:
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise SpatialQAError("facts file must be a JSON array")
    facts = []
    for i, entry in enumerate(raw):
        try:
            relation = Relation[str(entry["relation"]).upper()]
            facts.append(
                Fact(
                    int(entry["subject"]),
                    relation,
                    int(entry["object"]),
                    provenance=Stated(int(entry.get("sentence", 0))),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpatialQAError(f"facts[{i}] is malformed: {exc}") from None
    return facts


def _cmd_closure(args) -> int:
    facts = _load_facts(args.facts)
    result = closure(facts)
    print(f"stated: {result.stated_count}")
    print(f"positives: {len(result.positives)}")
    print(f"negatives: {len(result.negatives)}")

    if result.contradiction is not None:
        if args.trace:
            print(json.dumps(result.to_json_dict(), indent=2, sort_keys=True))
        positive, negative = result.contradiction
        print(f"contradiction: {positive} vs {negative}", file=sys.stderr)
        return EXIT_CONTRADICTION

    queried = None
    if args.query:
        match = _QUERY_RE.match(args.query)
        if match is None:
            print('error: query must look like "LEFT(0,2)"', file=sys.stderr)
            return EXIT_USAGE
        name, subject, obj = match.groups()
        try:
            relation = Relation[name.upper()]
        except KeyError:
            print(f"error: unknown relation {name!r}", file=sys.stderr)
            return EXIT_USAGE
        truth = result.query(int(subject), relation, int(obj))
        queried = (int(subject), relation, int(obj), truth)
        print(f"query {name.upper()}({subject},{obj}): {truth.value}")

    if args.trace:
        if queried is not None and queried[3] is not TruthValue.UNKNOWN:
            subject, relation, obj, truth = queried
            node = result.explain(subject, relation, obj, negated=truth is TruthValue.FALSE)
            print(json.dumps(node.to_dict(), indent=2))
        else:
            print(json.dumps(result.to_json_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _load_predictions(path: Path) -> tuple[list[Prediction], float | None]:
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or "predictions" not in raw:
        raise SpatialQAError("predictions file must contain a 'predictions' array")
    predictions = []
    for entry in raw["predictions"]:
        predictions.append(
            Prediction(
                question_id=entry["question_id"],
                answer=entry["answer"],
                abstained=bool(entry.get("abstained", False)),
            )
        )
    return predictions, raw.get("mean_runtime_s")


def _cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset)
    predictions, mean_runtime = _load_predictions(args.pred)
    metrics = evaluate(predictions, dataset, by_hops=args.by_hops)
    if metrics.mean_runtime_s is None:
        metrics.mean_runtime_s = mean_runtime
    written = write_report(metrics, args.report)
    print(render_table(metrics))
    print()
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "solve": _cmd_solve,
        "closure": _cmd_closure,
        "eval": _cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except SpatialQAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
