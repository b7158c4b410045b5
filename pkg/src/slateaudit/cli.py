"""Command-line surface.

One command, one mode flag; every mode writes the same canonical JSON
documents the HTTP service serves. Wall-clock timing goes to stderr, never
into the documents.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .pipeline import build_state, run_pipeline
from .sessionio import dumps_canonical, write_document

log = logging.getLogger("slateaudit")

MODES = ("audit", "random", "optimize", "generate", "compare", "eval-embeddings", "serve")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slateaudit",
        description=(
            "Audit how representative a slate of questions is (JR value), "
            "and build representative slates by optimization or generation."
        ),
    )
    parser.add_argument("--session", required=True, help="session JSON file")
    parser.add_argument("--mode", required=True, choices=MODES)
    parser.add_argument("--out", help="output report path (default: stdout)")
    parser.add_argument("--k", type=int, help="override the session slate size")
    parser.add_argument(
        "--embedding-model",
        help="provider spec: hash, hash-<dim>, cache:<model>, http:<model>, sbert:<model> "
        "(default: the session's embedded reference, else hash)",
    )
    parser.add_argument("--cache", help="embedding cache file (JSONL)")
    parser.add_argument("--slate", help="comma-separated question ids to audit")
    parser.add_argument("--witnesses", type=int, default=10, help="max witnesses to report")
    parser.add_argument("--algorithm", default="fast", choices=("oracle", "naive", "fast"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", help="threshold grid: exact or step:<h> (default: auto)")
    parser.add_argument(
        "--solver", default="auto", choices=("auto", "builtin", "scipy", "export")
    )
    parser.add_argument("--timeout", type=float, help="solver timeout in seconds")
    parser.add_argument("--samples", type=int, default=100, help="LLM samples")
    parser.add_argument("--random-seeds", type=int, default=100, help="random baseline seeds")
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument("--llm", default="mock", help="LLM client: mock or http:<model>")
    parser.add_argument(
        "--prompt-file",
        help="generation prompt template with {questions} and {k} slots "
        "(default: the bundled data/prompts/slate_prompt.txt text)",
    )
    parser.add_argument("--transcript", help="write LLM transcripts to this JSONL file")
    parser.add_argument("--heatmap", help="also write the similarity heatmap here")
    parser.add_argument("--pairs", help="labeled pair file for eval-embeddings")
    parser.add_argument(
        "--delimiter", default="tab", help="pair file delimiter: tab, comma, or a literal"
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    return parser


def _delimiter(arg: str) -> str:
    return {"tab": "\t", "comma": ","}.get(arg, arg)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        state = build_state(
            args.session,
            embedding_model=args.embedding_model,
            cache_path=args.cache,
            k_override=args.k,
        )
    except ValueError as exc:
        log.error("%s", exc)
        return 2

    if args.mode == "serve":
        from .service import serve_api

        serve_api(state, host=args.host, port=args.port)
        return 0

    options: dict = {
        "witnesses": args.witnesses,
        "algorithm": args.algorithm,
        "seed": args.seed,
        "grid": args.grid,
        "timeout": args.timeout,
        "samples": args.samples,
        "random_seeds": args.random_seeds,
        "temperature": args.temperature,
        "llm": args.llm,
        "transcript_path": args.transcript,
        "prompt_file": args.prompt_file,
        "heatmap": bool(args.heatmap),
    }
    if args.slate:
        options["slate_ids"] = [s.strip() for s in args.slate.split(",") if s.strip()]
    if args.mode == "optimize" and args.solver == "export":
        if not args.out:
            log.error("--solver export requires --out for the model file")
            return 2
        from .optimize import build_ip_instance, write_lp

        grid = None
        started = time.perf_counter()
        from .pipeline import _resolve_grid

        grid = _resolve_grid(state, args.grid)
        inst = build_ip_instance(state.matrix, state.session.k, grid)
        write_lp(inst, args.out)
        log.info(
            "exported LP model (%d candidates, %d levels) to %s in %.3fs",
            inst.m, len(inst.levels), args.out, time.perf_counter() - started,
        )
        return 0
    if args.mode == "optimize":
        options["solver"] = args.solver
    if args.mode == "compare":
        options["solver"] = "auto" if args.solver == "export" else args.solver
    if args.mode == "eval-embeddings":
        if not args.pairs:
            log.error("--mode eval-embeddings requires --pairs")
            return 2
        options["pairs_path"] = args.pairs
        options["delimiter"] = _delimiter(args.delimiter)

    started = time.perf_counter()
    try:
        documents = run_pipeline(state, args.mode, options)
    except ValueError as exc:
        log.error("%s", exc)
        return 2
    elapsed = time.perf_counter() - started
    report = documents.get("report")
    if report is not None:
        if args.out:
            write_document(report, args.out)
            log.info("wrote %s", args.out)
        else:
            sys.stdout.buffer.write(dumps_canonical(report))
    if "heatmap" in documents and args.heatmap:
        write_document(documents["heatmap"], args.heatmap)
        log.info("wrote %s", args.heatmap)
    log.info("mode=%s wall_time=%.3fs", args.mode, elapsed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
