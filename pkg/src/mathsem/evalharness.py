"""Gold-standard corpora and precision/recall/F1 scoring of semantification output."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence as Seq

from .config import Config
from .context import DefiniensCandidate, MathSegment, segment_document
from .errors import InvalidPath, MathSemError, PathMismatch, SchemaError
from .lexicon import Lexicon
from .mst import node_at
from .pipeline import analyze_document, lexicon_for
from .tagger import TaggedTree

DEFAULT_CUTOFF = 0.3


@dataclass(frozen=True)
class GoldDefiniens:
    identifier: str
    aliases: tuple[str, ...]


@dataclass(frozen=True)
class GoldSense:
    segment: int
    path: tuple[int, ...]
    sense: str


@dataclass(frozen=True)
class GoldCase:
    id: str
    document: str
    identifier_definiens: tuple[GoldDefiniens, ...] = ()
    sense_assignments: tuple[GoldSense, ...] = ()


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self) -> float:
        retrieved = self.tp + self.fp
        return self.tp / retrieved if retrieved else 1.0

    @property
    def recall(self) -> float:
        relevant = self.tp + self.fn
        return self.tp / relevant if relevant else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass
class MetricsReport:
    """Per-case counts plus their micro-averaged total."""

    cases: dict[str, Counts] = field(default_factory=dict)

    @property
    def total(self) -> Counts:
        out = Counts()
        for c in self.cases.values():
            out = out + c
        return out

    @property
    def precision(self) -> float:
        return self.total.precision

    @property
    def recall(self) -> float:
        return self.total.recall

    @property
    def f1(self) -> float:
        return self.total.f1

    def to_dict(self) -> dict:
        return {"cases": {k: v.to_dict() for k, v in self.cases.items()}, "aggregate": self.total.to_dict()}

    def to_table(self, title: str = "") -> str:
        width = max([len("aggregate"), *map(len, self.cases)])
        head = f"{'case':<{width}}  {'TP':>4} {'FP':>4} {'FN':>4}  {'P':>6} {'R':>6} {'F1':>6}"
        lines = [title] if title else []
        lines += [head, "-" * len(head)]
        rows = [*self.cases.items(), ("aggregate", self.total)]
        for i, (name, c) in enumerate(rows):
            if i == len(rows) - 1:
                lines.append("-" * len(head))
            lines.append(f"{name:<{width}}  {c.tp:>4} {c.fp:>4} {c.fn:>4}  "
                         f"{c.precision:>6.3f} {c.recall:>6.3f} {c.f1:>6.3f}")
        return "\n".join(lines)


# -- loading -----------------------------------------------------------------


def _expect(cond: bool, pointer: str, message: str):
    if not cond:
        raise SchemaError(pointer, message)


def _parse_case(raw: Any, ptr: str) -> GoldCase:
    _expect(isinstance(raw, dict), ptr, "case must be an object")
    cid = raw.get("id")
    _expect(isinstance(cid, str) and cid != "", ptr + "/id", "id must be a non-empty string")
    doc = raw.get("document")
    _expect(isinstance(doc, str), ptr + "/document", "document must be a string")
    defs = []
    for i, d in enumerate(raw.get("identifier_definiens", [])):
        p = f"{ptr}/identifier_definiens/{i}"
        _expect(isinstance(d, dict) and isinstance(d.get("identifier"), str), p, "identifier must be a string")
        aliases = d.get("definiens")
        if isinstance(aliases, str):
            aliases = [aliases]
        _expect(isinstance(aliases, list) and aliases and all(isinstance(a, str) for a in aliases),
                p + "/definiens", "definiens must be a non-empty list of strings")
        defs.append(GoldDefiniens(d["identifier"], tuple(a.lower() for a in aliases)))
    senses = []
    for i, s in enumerate(raw.get("sense_assignments", [])):
        p = f"{ptr}/sense_assignments/{i}"
        _expect(isinstance(s, dict), p, "assignment must be an object")
        seg, path, sid = s.get("segment"), s.get("path"), s.get("sense")
        _expect(isinstance(seg, int) and not isinstance(seg, bool) and seg >= 0, p + "/segment",
                "segment must be a non-negative integer")
        _expect(isinstance(path, list) and all(isinstance(k, int) and k >= 0 for k in path), p + "/path",
                "path must be a list of child indices")
        _expect(isinstance(sid, str) and sid != "", p + "/sense", "sense must be a string")
        senses.append(GoldSense(seg, tuple(path), sid))
    return GoldCase(cid, doc, tuple(defs), tuple(senses))


def _check_references(case: GoldCase, ptr: str, macros) -> None:
    if not case.sense_assignments:
        return
    try:
        doc = segment_document(case.document, macros)
    except MathSemError as exc:
        raise SchemaError(ptr + "/document", str(exc)) from None
    math = doc.math
    for i, s in enumerate(case.sense_assignments):
        p = f"{ptr}/sense_assignments/{i}"
        _expect(s.segment < len(math), p + "/segment",
                f"segment {s.segment} does not exist; document has {len(math)} math segment(s)")
        seg: MathSegment = math[s.segment]
        _expect(seg.tree is not None, p + "/segment", f"segment {s.segment} does not parse: {seg.error}")
        try:
            node_at(seg.tree, s.path)
        except InvalidPath:
            raise SchemaError(p + "/path", f"no node at {list(s.path)} in segment {s.segment}") from None


def parse_gold(data: Any, lexicon: Lexicon | None = None) -> list[GoldCase]:
    _expect(isinstance(data, dict), "", "corpus must be a JSON object")
    raw_cases = data.get("cases")
    _expect(isinstance(raw_cases, list), "/cases", "expected an array of cases")
    macros = lexicon.macro_signatures() if lexicon is not None else None
    if macros is None:
        from .lexicon import default_lexicon

        macros = default_lexicon().macro_signatures()
    cases, seen = [], set()
    for i, raw in enumerate(raw_cases):
        case = _parse_case(raw, f"/cases/{i}")
        _expect(case.id not in seen, f"/cases/{i}/id", f"duplicate case id {case.id!r}")
        seen.add(case.id)
        _check_references(case, f"/cases/{i}", macros)
        cases.append(case)
    return cases


def load_gold(path: str | Path, lexicon: Lexicon | None = None) -> list[GoldCase]:
    """Read and validate a gold corpus. Unreadable files raise ``OSError``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    return parse_gold(data, lexicon)


def bundled_corpus_path() -> Path:
    return Path(str(resources.files("mathsem") / "data" / "gold" / "corpus.json"))


# -- metrics -----------------------------------------------------------------


def evaluate_definiens(predicted: Iterable[DefiniensCandidate], gold: GoldCase,
                       cutoff: float = DEFAULT_CUTOFF) -> Counts:
    """Count identifier/definiens matches.

    Only candidates scoring strictly above ``cutoff`` are retrieved. A gold
    pair counts once however many of its aliases were retrieved; every
    distinct retrieved pair matching no gold pair is a false positive.
    """
    retrieved = {(c.identifier, c.definiens.lower()) for c in predicted if c.score > cutoff}
    matched = set()
    fp = 0
    for ident, definiens in sorted(retrieved):
        hits = [i for i, g in enumerate(gold.identifier_definiens)
                if g.identifier == ident and definiens in g.aliases]
        if hits:
            matched.update(hits)
        else:
            fp += 1
    tp = len(matched)
    return Counts(tp, fp, len(gold.identifier_definiens) - tp)


def evaluate_senses(fused: Mapping[int, TaggedTree], gold: GoldCase) -> Counts:
    """Compare decided senses with gold labels at the labelled nodes only."""
    tp = fp = fn = 0
    for s in gold.sense_assignments:
        tagged = fused.get(s.segment)
        if tagged is None or s.path not in tagged.hypotheses:
            raise PathMismatch(f"case {gold.id}: no tagged node at segment {s.segment} path {list(s.path)}")
        decided = tagged.decided_sense(s.path)
        if decided is None:
            fn += 1
        elif decided == s.sense:
            tp += 1
        else:
            fp += 1
            fn += 1
    return Counts(tp, fp, fn)


def perfect_predictions(gold: GoldCase) -> list[DefiniensCandidate]:
    return [DefiniensCandidate(g.identifier, g.aliases[0], 0.0, 0.0, 1.0) for g in gold.identifier_definiens]


@dataclass
class CorpusReport:
    definiens: MetricsReport
    senses: MetricsReport

    def to_dict(self) -> dict:
        return {"definiens": self.definiens.to_dict(), "senses": self.senses.to_dict()}

    def to_text(self) -> str:
        return self.definiens.to_table("identifier-definiens") + "\n\n" + self.senses.to_table("senses")


def evaluate_case(case: GoldCase, lexicon: Lexicon, cfg: Config = Config()) -> tuple[Counts, Counts]:
    analysis = analyze_document(case.document, lexicon, cfg)
    return (evaluate_definiens(analysis.all_candidates(), case, cfg.cutoff),
            evaluate_senses(analysis.fused_by_segment(), case))


def _evaluate_worker(args: tuple[GoldCase, Config]) -> tuple[Counts, Counts]:
    case, cfg = args
    return evaluate_case(case, lexicon_for(cfg), cfg)


def evaluate_corpus(cases: Seq[GoldCase], cfg: Config = Config(), lexicon: Lexicon | None = None,
                    jobs: int = 1) -> CorpusReport:
    """Score every case; results keep input order whatever ``jobs`` is."""
    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_worker, [(c, cfg) for c in cases]))
    else:
        lexicon = lexicon_for(cfg) if lexicon is None else lexicon
        results = [evaluate_case(c, lexicon, cfg) for c in cases]
    definiens = MetricsReport({c.id: r[0] for c, r in zip(cases, results)})
    senses = MetricsReport({c.id: r[1] for c, r in zip(cases, results)})
    return CorpusReport(definiens, senses)
