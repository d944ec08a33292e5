"""Element-wise P/R/F, Q-averages and CodeBLEU."""

from .codebleu import (
    CodeBleuBreakdown,
    CodeBleuWeights,
    ast_match,
    bleu_ngram,
    bleu_weighted,
    codebleu,
    dataflow_match,
    default_keywords,
)
from .elements import (
    CategoryCounts,
    MatchCounts,
    MetricRow,
    aggregate,
    compute_prf,
    f_measure,
    fmt2,
    match_inventories,
    q_average,
    round_half_up,
    score_counts,
)

__all__ = [
    "CategoryCounts",
    "CodeBleuBreakdown",
    "CodeBleuWeights",
    "MatchCounts",
    "MetricRow",
    "aggregate",
    "ast_match",
    "bleu_ngram",
    "bleu_weighted",
    "codebleu",
    "compute_prf",
    "dataflow_match",
    "default_keywords",
    "f_measure",
    "fmt2",
    "match_inventories",
    "q_average",
    "round_half_up",
    "score_counts",
]
