"""Scan 1: structure-only sense scoring for the symbols of a math tree.

Each candidate sense gets a log-linear score

    ln prior(s) + sum_r w_r * f_r(features, s)

with four rules (signature match, signature violation, function with a
trailing parenthesized group, standalone constant), normalized by softmax.
A node is *decided* when its best score reaches the threshold ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import ArityMismatch, InvalidPath, NoSenses, UnknownMacro
from .lexicon import Lexicon, Sense, Signature
from .mst import (
    GREEK,
    Fenced,
    Identifier,
    MathTree,
    Path,
    Scripted,
    SemanticMacro,
    Sequence,
    list_items,
    node_at,
    parent_of,
    walk,
)

SUP_SHAPES = ("none", "single", "parenthesized-single", "parenthesized-pair", "other")

GENERIC_VARIABLE = Sense("var:generic", "variable", "variable", Signature(), 1.0)


@dataclass(frozen=True)
class FeatureVector:
    has_subscript: bool = False
    sup_shape: str = "none"
    trailing_paren_group: bool = False
    trailing_group_arity: int = 0
    is_standalone: bool = True

    def to_dict(self) -> dict:
        return {
            "has-subscript": self.has_subscript,
            "sup-shape": self.sup_shape,
            "trailing-paren-group": self.trailing_paren_group,
            "trailing-group-arity": self.trailing_group_arity,
            "is-standalone": self.is_standalone,
        }


@dataclass(frozen=True)
class Hypothesis:
    node_path: Path
    sense_id: str
    score: float


@dataclass(frozen=True)
class RuleWeights:
    signature: float = 2.0
    function: float = 1.0
    constant: float = 1.0
    tau: float = 0.8

    def __post_init__(self):
        for name in ("signature", "function", "constant"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"rule weight {name} must be finite")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")


@dataclass(frozen=True)
class TaggedTree:
    """A tree plus per-node hypotheses.

    ``hypotheses`` maps the path of every Identifier and SemanticMacro node
    to its ranked hypothesis list; ``provenance`` records which scan decided
    a node (``"scan1"``, ``"scan2"`` or ``None``).
    """

    tree: MathTree
    hypotheses: dict[Path, tuple[Hypothesis, ...]]
    decided: dict[Path, bool]
    tau: float = 0.8
    provenance: dict[Path, str | None] = field(default_factory=dict)

    def decided_sense(self, path: Path) -> str | None:
        if not self.decided.get(path):
            return None
        return self.hypotheses[path][0].sense_id

    def undecided_paths(self) -> list[Path]:
        return [p for p in self.hypotheses if not self.decided.get(p)]

    def symbol(self, path: Path) -> str:
        node = node_at(self.tree, path)
        return node.symbol if isinstance(node, Identifier) else "\\" + node.name

    def override(self, decisions: Mapping[Path, str]) -> "TaggedTree":
        """Copy with the given nodes forced to a sense at score 1."""
        hyps, dec, prov = dict(self.hypotheses), dict(self.decided), dict(self.provenance)
        for path, sid in decisions.items():
            path = tuple(path)
            if path not in hyps:
                raise InvalidPath(path)
            hyps[path] = (Hypothesis(path, sid, 1.0),)
            dec[path] = True
            prov[path] = "override"
        return replace(self, hypotheses=hyps, decided=dec, provenance=prov)


# -- features ----------------------------------------------------------------


def _sup_shape(sup: MathTree | None) -> str:
    if sup is None:
        return "none"
    if isinstance(sup, Fenced) and sup.delims == "()":
        n = len(list_items(sup.body))
        if n == 1:
            return "parenthesized-single"
        if n == 2:
            return "parenthesized-pair"
        return "other"
    if isinstance(sup, Sequence) and sup.is_list:
        return "other"
    return "single"


def _sup_count(sup: MathTree | None) -> int:
    if sup is None:
        return 0
    if isinstance(sup, Fenced) and sup.delims == "()":
        return len(list_items(sup.body))
    return len(list_items(sup))


def extract_features(tree: MathTree, path: Path) -> FeatureVector:
    """Structural features of a symbol, looking through a Scripted wrapper.

    ``path`` may address the Scripted node or the Identifier at its base.
    """
    path = tuple(path)
    node = node_at(tree, path)
    if isinstance(node, Scripted):
        scripted, head_path = node, path
    elif isinstance(node, (Identifier, SemanticMacro)):
        parent, idx = parent_of(tree, path)
        if isinstance(parent, Scripted) and idx == 0:
            scripted, head_path = parent, path[:-1]
        else:
            scripted, head_path = None, path
    else:
        raise InvalidPath(path)

    has_sub = scripted is not None and scripted.subscript is not None
    sup_shape = _sup_shape(scripted.superscript if scripted is not None else None)

    trailing, arity = False, 0
    parent, idx = parent_of(tree, head_path)
    if isinstance(parent, Sequence) and not parent.is_list and idx + 1 < len(parent.children):
        nxt = parent.children[idx + 1]
        if isinstance(nxt, Fenced) and nxt.delims == "()":
            trailing, arity = True, len(list_items(nxt.body))
    standalone = scripted is None and not trailing
    return FeatureVector(has_sub, sup_shape, trailing, arity, standalone)


def signature_matches(features: FeatureVector, sig: Signature) -> bool:
    shape = features.sup_shape
    if sig.sup == 0:
        sup_ok = shape == "none"
    elif sig.sup == 1:
        sup_ok = shape in ("single", "parenthesized-single")
    elif sig.sup == 2:
        sup_ok = shape == "parenthesized-pair"
    else:
        sup_ok = shape == "other"
    sub_ok = features.has_subscript == (sig.sub > 0)
    return sup_ok and sub_ok and features.trailing_group_arity == sig.args


def _rule_total(features: FeatureVector, sense: Sense, weights: RuleWeights) -> float:
    total = 0.0
    if sense.signature.is_structural:
        total += weights.signature if signature_matches(features, sense.signature) else -weights.signature
    if sense.role == "function" and features.trailing_paren_group:
        total += weights.function
    if sense.role == "constant" and features.is_standalone:
        total += weights.constant
    return total


def score_senses(features: FeatureVector, senses: Iterable[Sense], weights: RuleWeights = RuleWeights(),
                 path: Path = ()) -> list[Hypothesis]:
    """Softmax-normalized hypotheses, best first; ties keep declaration order."""
    senses = list(senses)
    if not senses:
        raise NoSenses("no candidate senses")
    logits = []
    for s in senses:
        lp = math.log(s.prior) if s.prior > 0 else -math.inf
        logits.append(lp + _rule_total(features, s, weights))
    top = max(logits)
    if top == -math.inf:
        # every prior is zero: fall back to uniform
        logits = [0.0] * len(senses)
        top = 0.0
    exps = [math.exp(v - top) for v in logits]
    z = math.fsum(exps)
    hyps = [Hypothesis(tuple(path), s.id, e / z) for s, e in zip(senses, exps)]
    order = sorted(range(len(hyps)), key=lambda i: -hyps[i].score)
    return [hyps[i] for i in order]


def is_single_letter(symbol: str) -> bool:
    if len(symbol) == 1 and symbol.isalpha():
        return True
    return symbol.startswith("\\") and symbol[1:] in GREEK


def candidate_senses(lexicon: Lexicon, symbol: str) -> list[Sense]:
    """Lexicon senses for ``symbol``; unknown letters get an implicit generic variable."""
    senses = lexicon.lookup(symbol)
    if senses:
        return senses
    if is_single_letter(symbol):
        return [GENERIC_VARIABLE]
    return []


def find_sense(lexicon: Lexicon, symbol: str, sense_id: str) -> Sense | None:
    for s in candidate_senses(lexicon, symbol):
        if s.id == sense_id:
            return s
    return None


def tag(tree: MathTree, lexicon: Lexicon, weights: RuleWeights = RuleWeights()) -> TaggedTree:
    """Attach scored hypotheses to every Identifier and SemanticMacro node."""
    hyps: dict[Path, tuple[Hypothesis, ...]] = {}
    decided: dict[Path, bool] = {}
    prov: dict[Path, str | None] = {}
    for path, node in walk(tree):
        if isinstance(node, SemanticMacro):
            key = "\\" + node.name
            senses = lexicon.lookup(key)
            if not senses:
                raise UnknownMacro(node.name)
            fn = next((s for s in senses if s.role in ("function", "operator")), senses[0])
            sig = fn.signature
            if (len(node.params), len(node.args)) != (sig.n_params, sig.args):
                raise ArityMismatch(
                    f"\\{node.name} takes {sig.n_params} parameter(s) and {sig.args} argument(s)",
                    node.span[0],
                )
            hyps[path] = (Hypothesis(path, fn.id, 1.0),)
            decided[path] = True
            prov[path] = "scan1"
        elif isinstance(node, Identifier):
            senses = candidate_senses(lexicon, node.symbol)
            if not senses:
                hyps[path] = ()
                decided[path] = False
                prov[path] = None
                continue
            ranked = score_senses(extract_features(tree, path), senses, weights, path)
            hyps[path] = tuple(ranked)
            decided[path] = ranked[0].score >= weights.tau
            prov[path] = "scan1" if decided[path] else None
    return TaggedTree(tree, hyps, decided, weights.tau, prov)
