#!/usr/bin/env python3
"""Generate the bundled synthetic sessions and their embedding caches.

Each session plants a cluster structure directly in the embedding vectors:
every cluster shares one direction (so cluster mates are mutual
near-duplicates with similarity 1), and any two different clusters meet at a
single common similarity. That makes the audit and optimizer outcomes fully
analyzable: the largest blocking coalition of a slate is exactly its largest
uncovered cluster, and the optimal extractive slate covers the k largest
clusters.

Outputs (committed to the repo, regenerated deterministically):
  data/sessions/{a1r_like,cf23_like,cf24_like,demo_small}.json
  data/caches/planted.jsonl
  data/prompts/slate_prompt.txt
  data/pairs_auc075.tsv

Run from the repo root:  python3 scripts/make_synthetic_sessions.py
"""

from __future__ import annotations

import itertools
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from slateaudit.audit import audit_fast, audit_oracle  # noqa: E402
from slateaudit.embedding import EmbeddingCache, HashEmbeddingProvider  # noqa: E402
from slateaudit.generate import DEFAULT_PROMPT_TEMPLATE, expand_siblings  # noqa: E402
from slateaudit.inference import roc_auc_from_scores  # noqa: E402
from slateaudit.model import Question, Session, slate_from_ids  # noqa: E402
from slateaudit.optimize import optimize_ip, select_random  # noqa: E402
from slateaudit.pipeline import build_state  # noqa: E402
from slateaudit.sessionio import EmbeddingsRef, save_session  # noqa: E402

DIM = 48

OPENINGS = [
    "How can",
    "How should",
    "In what ways could",
    "Could",
    "To what extent can",
    "Under what conditions can",
]
TAILS = [
    "?",
    " in the near term?",
    " at the national level?",
    " without unintended side effects?",
    " given current constraints?",
    " across different communities?",
]

A1R_THEMES = [
    "updating voting machines for ranked-choice voting be paid for",
    "ranked-choice voting improve general elections",
    "independent commissions reduce gerrymandering",
    "reforming the electoral college gain broad support",
    "voters be educated about new ballot systems",
    "campaign finance rules limit the influence of big donors",
    "third parties gain a real foothold in a two-party system",
    "early voting and vote-by-mail raise turnout",
    "open primaries change the candidates we get",
    "term limits for legislators improve representation",
]

CF23_THEMES = [
    "AI chatbots protect the privacy of user conversations",
    "chatbots avoid spreading misinformation",
    "AI assistants be made safe for children and teenagers",
    "companies be transparent about how chatbots are trained",
    "chatbots avoid cultural and political bias",
    "society handle jobs displaced by conversational AI",
    "people be protected from unhealthy emotional reliance on chatbots",
    "chatbots support students without enabling cheating",
    "chatbots give medical or mental-health guidance responsibly",
    "platforms moderate harmful chatbot conversations",
    "chatbots serve speakers of less common languages well",
    "conversational AI be made accessible to people with disabilities",
    "governments regulate consumer chatbots",
    "liability be assigned when a chatbot causes harm",
    "advertising inside chatbot conversations be controlled",
    "limits on chatbot data retention be enforced",
    "users be shielded from manipulative chatbot persuasion",
    "open-source chatbot models be governed",
    "the energy footprint of large chatbots be reduced",
    "chatbots be kept neutral during elections",
    "chatbots credit the creative work they draw on",
]

CF24_THEMES = [
    "limits be set on what AI agents may do without asking",
    "AI agents be allowed to spend money on a person's behalf",
    "impersonation by AI agents be prevented",
    "human oversight of autonomous agents stay meaningful",
    "workplaces delegate tasks to AI agents fairly",
    "AI agents keep the contents of private messages confidential",
    "AI agents be secured against hijacking and abuse",
    "accountability work when an AI agent makes a costly mistake",
    "high-stakes agent decisions be routed to human review",
    "consent be obtained before agents act for someone",
    "vulnerable users be protected from overreaching agents",
    "AI agents operating across borders follow local rules",
    "AI agents be required to disclose that they are not human",
    "emergency shutdown of misbehaving agents be guaranteed",
]

SIBLING_TEXTS = [
    "What is the approximate cost of updating our voting machines for ranked-choice voting?",
    "Roughly how much would it cost to update voting machines for ranked-choice voting?",
]


def theme_texts(core: str, count: int) -> list[str]:
    combos = list(itertools.product(OPENINGS, TAILS))
    if count > len(combos):
        raise ValueError(f"cluster of {count} exceeds {len(combos)} variants")
    return [f"{opening} {core}{tail}" for opening, tail in combos[:count]]


def cluster_directions(num: int, common: float, rng: np.random.Generator | None = None,
                       noise: float = 0.0) -> np.ndarray:
    """Unit directions with pairwise dot exactly ``common`` (noise-free)."""
    if num + 1 > DIM:
        raise ValueError("not enough dimensions for the cluster count")
    dirs = np.zeros((num, DIM))
    shared = np.sqrt(common)
    ortho = np.sqrt(1.0 - common)
    for c in range(num):
        dirs[c, 0] = shared
        dirs[c, c + 1] = ortho
    return dirs


def planted_vectors(
    sizes: list[int],
    common: float,
    noise: float = 0.0,
    seed: int = 0,
) -> tuple[np.ndarray, list[int]]:
    """One vector per question; cluster labels aligned with rows."""
    dirs = cluster_directions(len(sizes), common)
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for c, size in enumerate(sizes):
        for _ in range(size):
            vec = dirs[c].copy()
            if noise > 0.0:
                vec = vec + noise * rng.normal(size=DIM)
                vec = vec / np.linalg.norm(vec)
            rows.append(vec)
            labels.append(c)
    return np.asarray(rows), labels


def build_session(
    name: str,
    sizes: list[int],
    k: int,
    themes: list[str],
    human_clusters: list[int],
    common: float,
    shuffle_seed: int,
    siblings: bool = False,
    human_duplicate_cluster: int | None = None,
) -> tuple[Session, dict[str, np.ndarray], list[int]]:
    """Assemble questions, the human slate, and per-question vectors."""
    texts: list[str] = []
    for c, size in enumerate(sizes):
        generated = theme_texts(themes[c], size)
        if siblings and c == 0:
            generated = SIBLING_TEXTS + generated[: size - 2]
        texts.extend(generated)
    vectors, labels = planted_vectors(sizes, common)
    order = np.random.default_rng(shuffle_seed).permutation(len(texts))
    texts = [texts[i] for i in order]
    vectors = vectors[order]
    labels = [labels[i] for i in order]

    qids = [f"q{i + 1:03d}" for i in range(len(texts))]
    questions = tuple(
        Question(id=qids[i], author_id=f"p{i + 1:03d}", text=texts[i])
        for i in range(len(texts))
    )
    by_cluster: dict[int, list[str]] = {}
    for i, c in enumerate(labels):
        by_cluster.setdefault(c, []).append(qids[i])

    human_ids: list[str] = []
    groups: tuple = ()
    if siblings:
        pair = [qids[i] for i, t in enumerate(texts) if t in SIBLING_TEXTS]
        human_ids.extend(sorted(pair))
        groups = (frozenset(pair),)
        human_clusters = [c for c in human_clusters if c != 0]
    for c in human_clusters:
        human_ids.append(by_cluster[c][0])
    if human_duplicate_cluster is not None:
        human_ids.append(by_cluster[human_duplicate_cluster][1])

    session = Session(
        questions=questions,
        k=k,
        human_slate=tuple(human_ids),
        sibling_groups=groups,
    )
    vec_by_text = {texts[i]: vectors[i] for i in range(len(texts))}
    return session, vec_by_text, labels


def write_cache(cache_path: Path, model_id: str, vec_by_text: dict[str, np.ndarray]) -> None:
    cache = EmbeddingCache(cache_path)
    texts = list(vec_by_text)
    cache.put_many(model_id, texts, [vec_by_text[t].tolist() for t in texts])


def make_pairs_file(path: Path) -> None:
    """Four labeled pairs whose hash-embedding similarities order as
    pos > neg > pos > neg, i.e. pairwise AUC exactly 3/4."""
    provider = HashEmbeddingProvider(dim=64)
    bank = [
        f"{opening} {core}{tail}"
        for opening, core, tail in itertools.product(
            OPENINGS[:4], A1R_THEMES[:5], TAILS[:3]
        )
    ]
    vecs = np.asarray(provider.embed_batch(bank))
    units = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    sims = units @ units.T
    pairs = [
        (i, j, float(sims[i, j]))
        for i in range(len(bank))
        for j in range(i + 1, len(bank))
    ]
    pairs.sort(key=lambda p: -p[2])
    distinct = [p for i, p in enumerate(pairs) if i == 0 or p[2] != pairs[i - 1][2]]
    quartile = len(distinct) // 4
    chosen = [distinct[0], distinct[quartile], distinct[2 * quartile], distinct[-1]]
    labels = [1, 0, 1, 0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("text_a\ttext_b\tlabel\n")
        for (i, j, _), label in zip(chosen, labels):
            fh.write(f"{bank[i]}\t{bank[j]}\t{label}\n")
    scores = [s for _, _, s in chosen]
    assert scores[0] > scores[1] > scores[2] > scores[3]
    assert roc_auc_from_scores(labels, scores).auc == 0.75


SESSIONS = {
    "a1r_like": dict(
        sizes=[9, 8, 8, 7, 6, 5, 5, 4, 3, 2],
        k=8,
        themes=A1R_THEMES,
        # covers clusters {0,1,3,4,5,6,8,9}; misses {2 (8), 7 (4)} -> c=8
        human_clusters=[0, 1, 3, 4, 5, 6, 8, 9],
        common=0.2,
        shuffle_seed=101,
        siblings=True,
        expected_ip_c=3,  # top-8 covered leaves {3, 2}
        expected_human_c=8,
    ),
    "cf23_like": dict(
        sizes=[30, 30, 30, 30, 30, 20, 18, 15, 12, 10, 9, 7, 7, 7, 7, 7, 7, 7, 5, 3, 2],
        k=11,
        themes=CF23_THEMES,
        # misses cluster 4 (30) and wastes a pick duplicating cluster 5
        human_clusters=[0, 1, 2, 3, 5, 6, 7, 8, 9, 10],
        human_duplicate_cluster=5,
        common=0.15,
        shuffle_seed=202,
        expected_ip_c=7,
        expected_human_c=30,
    ),
    "cf24_like": dict(
        sizes=[25, 24, 22, 20, 16, 14, 12, 10, 5, 5, 4, 3, 2, 2],
        k=8,
        themes=CF24_THEMES,
        # covers top 7 plus a size-5 cluster; misses cluster 7 (10) -> c=10
        human_clusters=[0, 1, 2, 3, 4, 5, 6, 8],
        common=0.25,
        shuffle_seed=303,
        expected_ip_c=5,
        expected_human_c=10,
    ),
}


def make_demo_session(sessions_dir: Path, cache_path: Path) -> None:
    """Small noisy session with two planted embedding models for the
    cross-model validation grid and UI demos."""
    sizes = [4, 3, 3, 2]
    themes = A1R_THEMES[: len(sizes)]
    texts = []
    for c, size in enumerate(sizes):
        texts.extend(theme_texts(themes[c], size))
    questions = tuple(
        Question(id=f"q{i + 1:03d}", author_id=f"p{i + 1:03d}", text=texts[i])
        for i in range(len(texts))
    )
    session = Session(questions=questions, k=3, human_slate=("q001", "q002", "q003"))
    for model_id, common, noise, seed in (
        ("planted-demo-a", 0.2, 0.15, 11),
        ("planted-demo-b", 0.35, 0.1, 23),
    ):
        vectors, _ = planted_vectors(sizes, common, noise=noise, seed=seed)
        write_cache(cache_path, model_id, {texts[i]: vectors[i] for i in range(len(texts))})
    save_session(
        session,
        sessions_dir / "demo_small.json",
        EmbeddingsRef(model_id="planted-demo-a", cache_path="../caches/planted.jsonl"),
    )


def verify(name: str, spec: dict, sessions_dir: Path) -> None:
    state = build_state(sessions_dir / f"{name}.json")
    session, matrix = state.session, state.matrix
    n, k = session.n, session.k
    ip = optimize_ip(matrix, k, solver="scipy")
    expected_ip = (spec["expected_ip_c"] * k) / n
    assert ip.jr_value == expected_ip, (name, ip.jr_value, expected_ip)
    assert ip.objective_size == spec["expected_ip_c"]
    if session.sibling_groups:
        human = expand_siblings(session, matrix).mean_jr_value
    else:
        human = audit_fast(
            matrix, slate_from_ids(matrix, session.human_slate, "human"), k
        ).jr_value
    expected_human = (spec["expected_human_c"] * k) / n
    assert human == expected_human, (name, human, expected_human)
    randoms = [
        audit_fast(matrix, select_random(session, seed, matrix), k).jr_value
        for seed in range(100)
    ]
    mean_random = float(np.mean(randoms))
    assert mean_random > ip.jr_value, (name, mean_random, ip.jr_value)
    spot = audit_oracle(matrix, ip.slate, k)
    assert spot.jr_value == ip.jr_value
    print(
        f"{name}: n={n} k={k} ip={ip.jr_value:.3f} human={human:.3f} "
        f"random_mean={mean_random:.3f} (levels={len(np.unique(matrix.values))})"
    )


def main() -> None:
    sessions_dir = ROOT / "data" / "sessions"
    caches_dir = ROOT / "data" / "caches"
    prompts_dir = ROOT / "data" / "prompts"
    for d in (sessions_dir, caches_dir, prompts_dir):
        d.mkdir(parents=True, exist_ok=True)
    cache_path = caches_dir / "planted.jsonl"
    if cache_path.exists():
        cache_path.unlink()

    for name, spec in SESSIONS.items():
        session, vec_by_text, _ = build_session(
            name,
            sizes=spec["sizes"],
            k=spec["k"],
            themes=spec["themes"],
            human_clusters=list(spec["human_clusters"]),
            common=spec["common"],
            shuffle_seed=spec["shuffle_seed"],
            siblings=spec.get("siblings", False),
            human_duplicate_cluster=spec.get("human_duplicate_cluster"),
        )
        model_id = f"planted-{name.split('_')[0]}"
        write_cache(cache_path, model_id, vec_by_text)
        save_session(
            session,
            sessions_dir / f"{name}.json",
            EmbeddingsRef(model_id=model_id, cache_path="../caches/planted.jsonl"),
        )

    make_demo_session(sessions_dir, cache_path)
    (prompts_dir / "slate_prompt.txt").write_text(DEFAULT_PROMPT_TEMPLATE, encoding="utf-8")
    make_pairs_file(ROOT / "data" / "pairs_auc075.tsv")

    for name, spec in SESSIONS.items():
        verify(name, spec, sessions_dir)
    print("all synthetic sessions verified")


if __name__ == "__main__":
    main()
