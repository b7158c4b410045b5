"""Shared engine behind the CLI and the HTTP service.

A loaded state (session + embeddings + utility matrix) is immutable; every
mode runner is a pure function from state and options to JSON-ready
documents, so both front ends serialize identical bytes through
``sessionio.dumps_canonical``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .audit import AuditConfig, audit, audit_fast
from .embedding import (
    EmbeddingCache,
    EmbeddingMatrix,
    EmbeddingProvider,
    make_provider,
)
from .generate import (
    GenerationConfig,
    HttpChatClient,
    MockSlateClient,
    best_of,
    expand_siblings,
    generate_slates,
    mean_ci95,
)
from .inference import LabeledPair, build_utility_matrix, eval_roc_auc
from .model import Session, Slate, UtilityMatrix, member_column, slate_from_ids
from .optimize import (
    default_grid,
    optimize_ip,
    parse_grid_spec,
    select_random,
    threshold_grid,
)
from .sessionio import (
    REPORT_SCHEMA,
    EmbeddingsRef,
    audit_result_block,
    build_heatmap,
    heatmap_document,
    load_session,
    matrix_document,
    session_to_document,
    slate_block,
)

DEFAULT_EMBEDDING_MODEL = "hash"
DEFAULT_RANDOM_SEEDS = 100


@dataclass(frozen=True)
class AppState:
    session: Session
    embeddings: EmbeddingMatrix
    matrix: UtilityMatrix
    provider: EmbeddingProvider
    cache: EmbeddingCache | None
    embeddings_ref: EmbeddingsRef | None
    session_path: Path | None

    def session_summary(self) -> dict:
        return {
            "k": self.session.k,
            "m": self.session.m,
            "n": self.session.n,
            "embedding_model": self.embeddings.model_id,
        }


def build_state(
    session_path,
    embedding_model: str | None = None,
    cache_path=None,
    k_override: int | None = None,
) -> AppState:
    """Load a session and materialize its utility matrix.

    Sessions referencing a precomputed embedding cache load offline
    (cache-only provider); otherwise the provider spec decides, defaulting
    to the deterministic hash embedder.
    """
    loaded = load_session(session_path)
    session = loaded.session
    if k_override is not None:
        session = Session(
            questions=session.questions,
            k=k_override,
            sibling_groups=session.sibling_groups,
            human_slate=session.human_slate,
            n_explicit=session.n_explicit,
        )
    ref = loaded.embeddings_ref
    if ref is not None and embedding_model is None:
        provider = make_provider(f"cache:{ref.model_id}")
        resolved_cache = (loaded.path.parent / ref.cache_path).resolve()
        cache = EmbeddingCache(resolved_cache)
    else:
        provider = make_provider(embedding_model or DEFAULT_EMBEDDING_MODEL)
        cache = EmbeddingCache(cache_path) if cache_path else None
    embeddings = build_session_embeddings(session, provider, cache)
    matrix = build_utility_matrix(embeddings, session)
    return AppState(
        session=session,
        embeddings=embeddings,
        matrix=matrix,
        provider=provider,
        cache=cache,
        embeddings_ref=ref,
        session_path=loaded.path,
    )


def build_session_embeddings(
    session: Session, provider: EmbeddingProvider, cache: EmbeddingCache | None
) -> EmbeddingMatrix:
    from .embedding import embed_questions

    return embed_questions(
        [q.text for q in session.questions],
        provider,
        ids=session.question_ids,
        cache=cache,
    )


def _report_skeleton(state: AppState, mode: str, config: dict) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "mode": mode,
        "session": state.session_summary(),
        "config": config,
    }


def _human_slate(state: AppState) -> Slate:
    if state.session.human_slate is None:
        raise ValueError("session has no human slate")
    return slate_from_ids(state.matrix, state.session.human_slate, provenance="human")


def run_audit(
    state: AppState,
    slate_ids: list[str] | None = None,
    witnesses: int = 10,
    algorithm: str = "fast",
) -> dict:
    """Audit an explicit slate, or the session's human slate (expanding
    sibling groups and averaging) when none is given."""
    session = state.session
    cfg = AuditConfig(
        algorithm=algorithm, collect_witnesses=witnesses > 0,
        max_witnesses=max(witnesses, 1),
    )
    doc = _report_skeleton(
        state,
        "audit",
        {"algorithm": algorithm, "max_witnesses": witnesses},
    )
    if slate_ids is not None:
        slate = slate_from_ids(state.matrix, slate_ids, provenance="custom")
        report = audit(state.matrix, slate, session.k, cfg)
        doc["slate"] = slate_block(slate, session)
        doc["result"] = audit_result_block(report)
        return doc
    slate = _human_slate(state)
    doc["slate"] = slate_block(slate, session)
    if session.sibling_groups:
        expansion = expand_siblings(session, state.matrix)
        expansions = []
        for s in expansion.slates:
            report = audit(state.matrix, s, session.k, cfg)
            expansions.append(
                {"slate": slate_block(s, session), "result": audit_result_block(report)}
            )
        doc["expansions"] = expansions
        doc["mean_jr_value"] = expansion.mean_jr_value
        doc["satisfies_jr"] = expansion.mean_jr_value < 1.0
    else:
        report = audit(state.matrix, slate, session.k, cfg)
        doc["result"] = audit_result_block(report)
    return doc


def run_random(state: AppState, seed: int, witnesses: int = 10) -> dict:
    slate = select_random(state.session, seed, state.matrix)
    cfg = AuditConfig(collect_witnesses=witnesses > 0, max_witnesses=max(witnesses, 1))
    report = audit(state.matrix, slate, state.session.k, cfg)
    doc = _report_skeleton(state, "random", {"seed": seed})
    doc["slate"] = slate_block(slate, state.session)
    doc["result"] = audit_result_block(report)
    return doc


def _resolve_grid(state: AppState, grid_spec: str | None):
    if grid_spec is None:
        return default_grid(state.matrix)
    mode, step = parse_grid_spec(grid_spec)
    return threshold_grid(state.matrix, mode, step)


def run_optimize(
    state: AppState,
    grid_spec: str | None = None,
    solver: str = "auto",
    timeout: float | None = None,
    witnesses: int = 10,
    export_path=None,
) -> dict:
    grid = _resolve_grid(state, grid_spec)
    result = optimize_ip(
        state.matrix,
        state.session.k,
        grid=grid,
        solver=solver,
        timeout=timeout,
        export_path=export_path,
    )
    cfg = AuditConfig(collect_witnesses=witnesses > 0, max_witnesses=max(witnesses, 1))
    report = audit(state.matrix, result.slate, state.session.k, cfg)
    doc = _report_skeleton(
        state,
        "optimize",
        {
            "grid": result.grid_mode,
            "solver": result.solver,
            "timeout": timeout,
            "levels": len(grid.levels),
        },
    )
    doc["slate"] = slate_block(result.slate, state.session)
    doc["result"] = audit_result_block(report)
    doc["ip"] = {
        "objective_size": result.objective_size,
        "objective_jr_value": result.objective_jr_value,
        "optimal": result.optimal,
    }
    return doc


def make_llm_client(spec: str, seed: int = 0):
    if spec == "mock":
        return MockSlateClient(seed=seed)
    if spec.startswith("http:"):
        return HttpChatClient(model_id=spec.split(":", 1)[1])
    raise ValueError(f"unknown llm spec {spec!r}")


def run_generate(
    state: AppState,
    samples: int = 100,
    shuffle_seed: int = 0,
    temperature: float = 1.0,
    llm: str = "mock",
    transcript_path=None,
    prompt_file=None,
) -> dict:
    kwargs = {}
    if prompt_file is not None:
        kwargs["prompt_template"] = Path(prompt_file).read_text(encoding="utf-8")
    config = GenerationConfig(
        model_id=llm,
        temperature=temperature,
        num_samples=samples,
        shuffle_seed=shuffle_seed,
        **kwargs,
    )
    client = make_llm_client(llm, seed=shuffle_seed)
    result = generate_slates(
        state.session,
        state.embeddings,
        state.matrix,
        config,
        client,
        state.provider,
        cache=state.cache,
        transcript_path=transcript_path,
    )
    doc = _report_skeleton(
        state,
        "generate",
        {
            "llm": llm,
            "samples": samples,
            "shuffle_seed": shuffle_seed,
            "temperature": temperature,
        },
    )
    doc["samples"] = [
        {
            "index": s.index,
            "jr_value": s.jr_value,
            "attempts": s.attempts,
            "members": [
                {"question_id": mem.question_id, "text": mem.text}
                for mem in s.slate.members
            ],
        }
        for s in result.samples
    ]
    doc["failures"] = [
        {"index": f.index, "attempts": f.attempts, "reason": f.reason}
        for f in result.failures
    ]
    if result.samples:
        mean, ci = mean_ci95(result.jr_values)
        chosen = best_of(result.samples)
        best_slate = Slate(members=chosen.slate.members, provenance="llm_best")
        best_report = audit(
            state.matrix,
            best_slate,
            state.session.k,
            AuditConfig(collect_witnesses=True),
        )
        doc["mean_jr_value"] = mean
        doc["ci95"] = ci
        doc["best"] = {
            "sample_index": chosen.index,
            "slate": slate_block(best_slate, state.session),
            "result": audit_result_block(best_report),
            "member_utilities": [
                [float(x) for x in member_column(state.matrix, mem)]
                for mem in best_slate.members
            ],
        }
    return doc


def run_compare(
    state: AppState,
    samples: int = 100,
    random_seeds: int = DEFAULT_RANDOM_SEEDS,
    base_seed: int = 0,
    grid_spec: str | None = None,
    solver: str = "auto",
    llm: str = "mock",
    timeout: float | None = None,
) -> dict:
    """One row per selection method, in the shape of the headline results
    table: Human / Random / IP / LLM / LLM_best."""
    session = state.session
    doc = _report_skeleton(
        state,
        "compare",
        {
            "samples": samples,
            "random_seeds": random_seeds,
            "base_seed": base_seed,
            "grid": grid_spec or default_grid(state.matrix).mode,
            "solver": solver,
            "llm": llm,
        },
    )
    methods: dict = {}
    if session.human_slate is not None:
        if session.sibling_groups:
            expansion = expand_siblings(session, state.matrix)
            methods["human"] = {
                "mean_jr_value": expansion.mean_jr_value,
                "expansions": len(expansion.slates),
                "jr_values": list(expansion.jr_values),
                "satisfies_jr": expansion.mean_jr_value < 1.0,
            }
        else:
            report = audit_fast(state.matrix, _human_slate(state), session.k)
            methods["human"] = {
                "jr_value": report.jr_value,
                "satisfies_jr": report.satisfies_jr,
            }
    random_values = [
        audit_fast(
            state.matrix, select_random(session, base_seed + i, state.matrix), session.k
        ).jr_value
        for i in range(random_seeds)
    ]
    mean, ci = mean_ci95(random_values)
    methods["random"] = {"mean_jr_value": mean, "ci95": ci, "seeds": random_seeds}
    grid = _resolve_grid(state, grid_spec)
    ip = optimize_ip(state.matrix, session.k, grid=grid, solver=solver, timeout=timeout)
    methods["ip"] = {
        "jr_value": ip.jr_value,
        "objective_size": ip.objective_size,
        "objective_jr_value": ip.objective_jr_value,
        "optimal": ip.optimal,
        "satisfies_jr": ip.jr_value < 1.0,
    }
    gen = run_generate(
        state, samples=samples, shuffle_seed=base_seed, temperature=1.0, llm=llm
    )
    methods["llm"] = {
        "mean_jr_value": gen.get("mean_jr_value"),
        "ci95": gen.get("ci95"),
        "samples": samples,
        "failures": len(gen["failures"]),
    }
    if "best" in gen:
        methods["llm_best"] = {
            "jr_value": gen["best"]["result"]["jr_value"],
            "sample_index": gen["best"]["sample_index"],
            "satisfies_jr": gen["best"]["result"]["satisfies_jr"],
        }
    doc["methods"] = methods
    return doc


def read_labeled_pairs(path, delimiter: str = "\t") -> list[LabeledPair]:
    """QQP-style file: delimiter-separated text_a, text_b, label rows.
    A first row whose label field is not 0/1 is treated as a header."""
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise ValueError(f"{path}: row {i + 1} has {len(row)} fields, expected 3")
        a, b, label = row
        if label.strip() not in ("0", "1"):
            if i == 0:
                continue
            raise ValueError(f"{path}: row {i + 1} label {label!r} is not 0/1")
        pairs.append(LabeledPair(text_a=a, text_b=b, label=int(label)))
    if not pairs:
        raise ValueError(f"{path}: no labeled pairs found")
    return pairs


def run_eval_embeddings(state_or_provider, pairs_path, delimiter: str = "\t", cache=None) -> dict:
    """ROC/AUC of similarity-as-duplicate-detector on a labeled pair file."""
    if isinstance(state_or_provider, AppState):
        provider = state_or_provider.provider
        cache = cache if cache is not None else state_or_provider.cache
        model_id = state_or_provider.embeddings.model_id
    else:
        provider = state_or_provider
        model_id = provider.model_id
    pairs = read_labeled_pairs(pairs_path, delimiter)
    roc = eval_roc_auc(pairs, provider, cache=cache)
    return {
        "schema": REPORT_SCHEMA,
        "mode": "eval-embeddings",
        "config": {"embedding_model": model_id, "pairs_file": str(pairs_path)},
        "pairs": len(pairs),
        "positives": sum(p.label for p in pairs),
        "auc": roc.auc,
        "roc_points": [[fpr, tpr] for fpr, tpr in roc.points],
    }


def heatmap_for_ids(state: AppState, slate_ids: list[str]) -> dict:
    slate = slate_from_ids(state.matrix, slate_ids, provenance="custom")
    return heatmap_document(build_heatmap(state.matrix, slate, state.session))


def export_document(state: AppState) -> dict:
    return {
        "schema": "slateaudit/export-v1",
        "session": session_to_document(state.session, state.embeddings_ref),
        "utility_matrix": matrix_document(state.matrix),
        "embedding_model": state.embeddings.model_id,
    }


def run_pipeline(state: AppState, mode: str, options: dict) -> dict[str, dict]:
    """Dispatch one CLI/service mode; returns named documents to write."""
    out: dict[str, dict] = {}
    if mode == "audit":
        out["report"] = run_audit(
            state,
            slate_ids=options.get("slate_ids"),
            witnesses=options.get("witnesses", 10),
            algorithm=options.get("algorithm", "fast"),
        )
    elif mode == "random":
        out["report"] = run_random(
            state, seed=options.get("seed", 0), witnesses=options.get("witnesses", 10)
        )
    elif mode == "optimize":
        out["report"] = run_optimize(
            state,
            grid_spec=options.get("grid"),
            solver=options.get("solver", "auto"),
            timeout=options.get("timeout"),
            witnesses=options.get("witnesses", 10),
            export_path=options.get("export_path"),
        )
    elif mode == "generate":
        out["report"] = run_generate(
            state,
            samples=options.get("samples", 100),
            shuffle_seed=options.get("seed", 0),
            temperature=options.get("temperature", 1.0),
            llm=options.get("llm", "mock"),
            transcript_path=options.get("transcript_path"),
            prompt_file=options.get("prompt_file"),
        )
    elif mode == "compare":
        out["report"] = run_compare(
            state,
            samples=options.get("samples", 100),
            random_seeds=options.get("random_seeds", DEFAULT_RANDOM_SEEDS),
            base_seed=options.get("seed", 0),
            grid_spec=options.get("grid"),
            solver=options.get("solver", "auto"),
            llm=options.get("llm", "mock"),
            timeout=options.get("timeout"),
        )
    elif mode == "eval-embeddings":
        out["report"] = run_eval_embeddings(
            state, options["pairs_path"], options.get("delimiter", "\t")
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if options.get("heatmap") and "report" in out:
        slate_ids = options.get("slate_ids")
        if slate_ids is None and "slate" in out["report"]:
            members = out["report"]["slate"]["members"]
            slate_ids = [m["question_id"] for m in members]
        if slate_ids is not None:
            try:
                out["heatmap"] = heatmap_for_ids(state, slate_ids)
            except KeyError:
                pass  # generated slates export their columns in the report
    return out
