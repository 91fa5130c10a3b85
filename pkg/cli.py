# cli.py

"""Command-line surface: analyze one page, evaluate a corpus, or serve the HTTP endpoint."""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import uvicorn

from config.settings import RunConfig, load_settings
from engine.eval_runner import run_suite
from engine.phish_engine import build_engine
from main import create_app
from models.errors import GEPAgentError
from models.records import Verdict, validate_sample
from services.corpus_loader import load_corpus, load_sample_dir
from services.external_clients import Mode
from services.report_assembler import ReportAssembler

EXIT_BENIGN = 0
EXIT_PHISHING = 1
EXIT_ERROR = 2


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML settings file (default config/gepagent.yaml)")
    common.add_argument("--mode", choices=[m.value for m in Mode], help="live, replay or record")
    common.add_argument("--strategy", choices=["agent", "one_shot"], help="brand recognizer")
    common.add_argument("--model", help="chat model used by the live gateway")
    common.add_argument("--list-size", dest="list_size", type=int, choices=[1, 5, 10], help="official domains per brand")
    common.add_argument("--redirect-check", dest="redirect_check", action="store_const", const=True,
                        help="re-test the final URL after following redirects")
    common.add_argument("--budget", type=int, help="tool calls per sample (1-5)")
    common.add_argument("--condenser-budget", dest="condenser_budget", type=int, help="token budget of the condensed HTML")
    common.add_argument("--no-vision", dest="use_vision", action="store_const", const=False, help="drop the screenshot description")
    common.add_argument("--no-logo-detector", dest="use_logo_detector", action="store_const", const=False,
                        help="drop the logo detector output")
    common.add_argument("--cassette", type=Path, help="record/replay cassette file")
    common.add_argument("--scenario", dest="scenarios", type=Path, help="directory of scripted model responses")
    common.add_argument("--concurrency", type=int, help="samples processed in parallel")
    common.add_argument("--out", type=Path, help="report output directory")
    common.add_argument("--verbose", action="store_true", help="debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="gepagent", description="Reference-based phishing detection with a tool-calling brand agent")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", parents=[common], help="classify one URL or sample directory")
    analyze.add_argument("target", help="URL or sample directory (info.txt, html.txt, shot.png, logo.png)")
    analyze.add_argument("--id", dest="sample_id", help="sample id for a bare URL (selects the scenario in replay mode)")
    analyze.add_argument("--transcript", type=Path, help="write the agent transcript as JSON")

    evaluate = commands.add_parser("eval", parents=[common], help="evaluate a labelled corpus")
    evaluate.add_argument("corpus", type=Path, help="directory with one sub-directory per sample")
    evaluate.add_argument("--labels", type=Path, help="labels file (default <corpus>/labels.jsonl)")
    evaluate.add_argument("--ablation", action="store_true", help="also classify under every checker configuration")

    serve_cmd = commands.add_parser("serve", parents=[common], help="run the HTTP service")
    serve_cmd.add_argument("--host", help="bind address")
    serve_cmd.add_argument("--port", type=int, help="bind port")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    keys = [
        "mode", "strategy", "model", "list_size", "redirect_check", "budget", "condenser_budget", "use_vision",
        "use_logo_detector", "cassette", "scenarios", "concurrency", "out", "host", "port",
    ]
    overrides = {key: getattr(args, key, None) for key in keys}
    if args.verbose:
        overrides["log_level"] = "DEBUG"
    return overrides


def _configure_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


async def cmd_analyze(target: str, config: RunConfig, sample_id: Optional[str] = None, transcript_path: Optional[Path] = None) -> int:
    """Print the classification JSON; exit 0 benign, 1 phishing, 2 error."""
    try:
        path = Path(target)
        if path.is_dir():
            sample = await load_sample_dir(path)
        else:
            sample = validate_sample({"id": sample_id or "cli", "url": target})
        engine = build_engine(config)
        result = await engine.analyze(sample)
    except (GEPAgentError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logging.exception(f"Unexpected failure analyzing {target}")
        print(f"error: {e!r}", file=sys.stderr)
        return EXIT_ERROR

    print(json.dumps(result.summary(), sort_keys=True, ensure_ascii=False))
    if transcript_path is not None:
        transcript_path.write_text(result.transcript.to_json(), encoding="utf-8")
    return EXIT_PHISHING if result.classification.value is Verdict.PHISHING else EXIT_BENIGN


async def cmd_eval(corpus: Path, config: RunConfig, labels: Optional[Path] = None, ablation: bool = False) -> int:
    """Write report.json and report.md under the output directory and print the metrics row."""
    try:
        samples, unreadable = await load_corpus(corpus, labels)
        if not samples:
            print(f"error: no samples found under {corpus}", file=sys.stderr)
            return EXIT_ERROR
        engine = build_engine(config)
        _, report = await run_suite(
            samples,
            engine,
            concurrency=config.concurrency,
            out_dir=config.out,
            ablation=ablation,
            include_wall_time=config.mode is not Mode.REPLAY,
        )
    except (GEPAgentError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logging.exception(f"Unexpected failure evaluating {corpus}")
        print(f"error: {e!r}", file=sys.stderr)
        return EXIT_ERROR

    print(ReportAssembler().summary_row(report))
    if report.errored or unreadable:
        print(f"{report.errored} errored, {len(unreadable)} unreadable", file=sys.stderr)
    return 0


def serve(config: RunConfig):
    uvicorn.run(create_app(config), host=config.host, port=config.port)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_settings(_overrides(args), config_path=args.config)
    except GEPAgentError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    _configure_logging(config.log_level)

    if args.command == "analyze":
        return asyncio.run(cmd_analyze(args.target, config, args.sample_id, args.transcript))
    if args.command == "eval":
        return asyncio.run(cmd_eval(args.corpus, config, args.labels, args.ablation))
    try:
        serve(config)
    except GEPAgentError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
