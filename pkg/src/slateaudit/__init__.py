"""Justified-representation auditing and slate optimization for deliberations."""

from .audit import (
    AuditConfig,
    audit,
    audit_fast,
    audit_naive,
    audit_oracle,
    find_witnesses,
    verify_witness,
)
from .embedding import (
    EmbeddingCache,
    EmbeddingMatrix,
    EmbeddingProviderConfig,
    HashEmbeddingProvider,
    ProviderError,
    embed_questions,
    make_provider,
)
from .generate import (
    GenerationConfig,
    MockSlateClient,
    best_of,
    best_of_slates,
    expand_siblings,
    generate_slates,
    mean_ci95,
)
from .inference import (
    LabeledPair,
    build_utility_matrix,
    cosine_similarity,
    cross_validate,
    eval_roc_auc,
    roc_auc_from_scores,
)
from .model import (
    AuditReport,
    Question,
    Session,
    Slate,
    SlateMember,
    UtilityMatrix,
    Witness,
    jr_value_from_coalition,
    slate_from_ids,
    slate_from_indices,
    slate_utility,
    slate_values,
)
from .optimize import (
    IpResult,
    ThresholdGrid,
    default_grid,
    enumerate_exhaustive,
    optimize_ip,
    select_random,
    threshold_grid,
    write_lp,
)
from .sessionio import HeatmapExport, build_heatmap, load_session, save_session

__version__ = "0.1.0"
