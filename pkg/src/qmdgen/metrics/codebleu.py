"""CodeBLEU: n-gram BLEU, keyword-weighted BLEU, AST match and dataflow match.

The four components are combined with weights ``alpha..delta``. Component
choices:

* BLEU uses clipped n-gram precisions for n = 1..4. A precision whose
  clipped count is zero is add-one smoothed to ``1 / (total + 1)``.
* Weighted BLEU gives keyword unigrams ``weight_ratio`` times the weight of
  other tokens, in the clipped numerator, the denominator and the lengths
  fed to the brevity penalty. Higher orders are unweighted.
* AST match counts reference subtrees of height >= 2 whose anonymized shape
  also occurs in the hypothesis (multiset-clipped), over the number of
  reference subtrees.
* Dataflow match counts normalized def-use edges of the reference found in
  the hypothesis (clipped), over the number of reference edges. An empty
  reference edge set makes this component degenerate: it is dropped and the
  remaining weights renormalized.
"""

from __future__ import annotations

import keyword
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

from .._assets import gate_alias_table
from ..analysis.dataflow import DataFlowGraph, extract_dataflow
from ..analysis.lexer import code_tokens
from ..analysis.parser import parse_source
from ..analysis.tree import ANONYMIZED_LEAVES, Node, SyntaxTree
from ..errors import EmptyHypothesis, EmptyReference

COMPONENTS = ("bleu", "bleu_weighted", "match_ast", "match_df")


def default_keywords() -> frozenset:
    return frozenset(keyword.kwlist) | frozenset(gate_alias_table()["methods"])


def _ngrams(tokens, n) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _check(hyp, ref):
    if not hyp:
        raise EmptyHypothesis("hypothesis is empty")
    if not ref:
        raise EmptyReference("reference is empty")


def _brevity_penalty(hyp_len: float, ref_len: float) -> float:
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1 - ref_len / hyp_len)


def _smoothed(matched: float, total: float) -> float:
    if matched == 0:
        return 1 / (total + 1)
    return matched / total


def _higher_order_logs(hyp, ref, max_n):
    logs = []
    for n in range(2, max_n + 1):
        h, r = _ngrams(hyp, n), _ngrams(ref, n)
        total = sum(h.values())
        matched = sum((h & r).values())
        logs.append(math.log(_smoothed(matched, total)))
    return logs


def bleu_ngram(hyp: list, ref: list, max_n: int = 4) -> float:
    return bleu_weighted(hyp, ref, frozenset(), 1, max_n)


def bleu_weighted(hyp: list, ref: list, keyword_set=None, weight_ratio: float = 5, max_n: int = 4) -> float:
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if weight_ratio < 1:
        raise ValueError("weight_ratio must be >= 1")
    hyp, ref = list(hyp), list(ref)
    _check(hyp, ref)
    keywords = default_keywords() if keyword_set is None else frozenset(keyword_set)

    def w(tok):
        return weight_ratio if tok in keywords else 1

    h1, r1 = Counter(hyp), Counter(ref)
    matched = sum(w(t) * min(c, r1[t]) for t, c in h1.items())
    total = sum(w(t) * c for t, c in h1.items())
    logs = [math.log(_smoothed(matched, total))] + _higher_order_logs(hyp, ref, max_n)
    hyp_len = sum(w(t) for t in hyp)
    ref_len = sum(w(t) for t in ref)
    return _brevity_penalty(hyp_len, ref_len) * math.exp(sum(logs) / max_n)


# AST match


def _shape_id(node: Node, intern: dict, sink: Optional[Counter] = None):
    """Interned anonymized shape id and height of ``node``. Subtrees of
    height >= 2 are tallied into ``sink`` when given."""
    if node.is_leaf:
        key = node.kind if node.kind in ANONYMIZED_LEAVES else f"{node.kind}:{node.text}"
        return intern.setdefault(("leaf", key), len(intern)), 1
    child_info = [_shape_id(c, intern, sink) for c in node.children]
    key = (node.kind,) + tuple(i for i, _ in child_info)
    sid = intern.setdefault(key, len(intern))
    height = 1 + max((h for _, h in child_info), default=0)
    if sink is not None and height >= 2:
        sink[sid] += 1
    return sid, height


def _subtree_shapes(root: Node, intern: dict, statements_only: bool) -> Counter:
    out = Counter()
    if not statements_only:
        _shape_id(root, intern, out)
        return out
    for stmt in root.children:
        sid, height = _shape_id(stmt, intern)
        if height >= 2:
            out[sid] += 1
    return out


def ast_match(hyp_tree: SyntaxTree, ref_tree: SyntaxTree, statements_only: bool = False) -> float:
    intern: dict = {}
    ref = _subtree_shapes(ref_tree.root, intern, statements_only)
    hyp = _subtree_shapes(hyp_tree.root, intern, statements_only)
    total = sum(ref.values())
    if total == 0:
        return 0.0 if hyp_tree.degraded else 1.0
    return sum((ref & hyp).values()) / total


# dataflow match


def dataflow_match(hyp_dfg: DataFlowGraph, ref_dfg: DataFlowGraph) -> Optional[float]:
    """Share of reference edges found in the hypothesis; ``None`` when the
    reference has no edges (degenerate)."""
    ref = ref_dfg.normalized()
    total = sum(ref.values())
    if total == 0:
        return None
    return sum((ref & hyp_dfg.normalized()).values()) / total


# combination


@dataclass(frozen=True)
class CodeBleuWeights:
    alpha: float = 0.25
    beta: float = 0.25
    gamma: float = 0.25
    delta: float = 0.25

    def __post_init__(self):
        values = self.as_tuple()
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ValueError("CodeBLEU weights must be finite and non-negative")
        if sum(values) == 0:
            raise ValueError("CodeBLEU weights must not all be zero")

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)

    def normalized(self) -> "CodeBleuWeights":
        s = sum(self.as_tuple())
        return CodeBleuWeights(*(v / s for v in self.as_tuple()))


@dataclass(frozen=True)
class CodeBleuBreakdown:
    bleu: float
    bleu_weighted: float
    match_ast: float
    match_df: Optional[float]
    total: float
    weights: CodeBleuWeights = field(default_factory=CodeBleuWeights)
    components_used: frozenset = frozenset(COMPONENTS)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["components_used"] = sorted(self.components_used)
        return d


def combine(scores: dict, weights: CodeBleuWeights) -> tuple[float, frozenset]:
    used = [c for c in COMPONENTS if scores.get(c) is not None]
    raw = dict(zip(COMPONENTS, weights.as_tuple()))
    mass = sum(raw[c] for c in used)
    if mass == 0:
        # every weighted component was degenerate; fall back to equal weights
        total = sum(scores[c] for c in used) / len(used)
    else:
        total = sum(raw[c] * scores[c] for c in used) / mass
    return min(1.0, max(0.0, total)), frozenset(used)


def codebleu(hyp: str, ref: str, weights: CodeBleuWeights | None = None, keyword_set=None) -> CodeBleuBreakdown:
    weights = weights or CodeBleuWeights()
    if not hyp or not hyp.strip():
        raise EmptyHypothesis("hypothesis source is empty")
    if not ref or not ref.strip():
        raise EmptyReference("reference source is empty")
    hyp_toks, ref_toks = code_tokens(hyp), code_tokens(ref)
    _check(hyp_toks, ref_toks)
    hyp_tree, ref_tree = parse_source(hyp), parse_source(ref)
    scores = {
        "bleu": bleu_ngram(hyp_toks, ref_toks),
        "bleu_weighted": bleu_weighted(hyp_toks, ref_toks, keyword_set),
        "match_ast": ast_match(hyp_tree, ref_tree),
        "match_df": dataflow_match(extract_dataflow(hyp_tree), extract_dataflow(ref_tree)),
    }
    total, used = combine(scores, weights)
    return CodeBleuBreakdown(weights=weights.normalized(), total=total, components_used=used, **scores)
