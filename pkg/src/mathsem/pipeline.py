"""Run both scans and fuse their results, for one formula or a whole document."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import Config
from .context import (
    DefiniensCandidate,
    Document,
    FusionResult,
    extract_identifiers,
    find_candidates,
    fuse,
    segment_document,
)
from .errors import IdentifierAbsent, MathSemError
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .mst import parse_latex
from .tagger import TaggedTree, tag


def lexicon_for(cfg: Config) -> Lexicon:
    return load_lexicon(cfg.lexicon) if cfg.lexicon else default_lexicon()


def candidates_for(doc: Document, identifiers, cfg: Config) -> dict[str, list[DefiniensCandidate]]:
    out = {}
    for ident in sorted(identifiers):
        try:
            out[ident] = find_candidates(doc, ident, cfg.window, cfg.scoring)
        except IdentifierAbsent:
            continue
    return out


def semantify(latex: str, lexicon: Lexicon, cfg: Config = Config(), context: str | None = None) -> FusionResult:
    """Parse, tag and (with a context document) fuse one formula."""
    tree = parse_latex(latex, lexicon.macro_signatures())
    scan1 = tag(tree, lexicon, cfg.weights)
    cands: dict[str, list[DefiniensCandidate]] = {}
    if context is not None:
        doc = segment_document(context, lexicon.macro_signatures())
        cands = candidates_for(doc, extract_identifiers(tree, scan1, lexicon), cfg)
    return fuse(scan1, cands, lexicon)


@dataclass
class FormulaAnalysis:
    index: int
    source: str
    error: str | None = None
    fused: FusionResult | None = None

    def nodes(self) -> list[dict]:
        if self.fused is None:
            return []
        rows = []
        for path, hyps in self.fused.hypotheses.items():
            rows.append({
                "path": list(path),
                "symbol": self.fused.symbol(path),
                "hypotheses": [{"sense": h.sense_id, "score": h.score} for h in hyps],
                "decided": self.fused.decided_sense(path),
                "provenance": self.fused.provenance.get(path),
            })
        return rows

    def to_dict(self) -> dict:
        out = {"index": self.index, "source": self.source}
        if self.error is not None:
            out["error"] = self.error
        out["nodes"] = self.nodes()
        return out


@dataclass
class DocumentAnalysis:
    formulas: list[FormulaAnalysis] = field(default_factory=list)
    candidates: dict[str, list[DefiniensCandidate]] = field(default_factory=dict)

    def fused_by_segment(self) -> dict[int, TaggedTree]:
        return {f.index: f.fused for f in self.formulas if f.fused is not None}

    def all_candidates(self) -> list[DefiniensCandidate]:
        return [c for cs in self.candidates.values() for c in cs]

    def to_dict(self) -> dict:
        return {
            "formulas": [f.to_dict() for f in self.formulas],
            "candidates": {k: [c.to_dict() for c in v] for k, v in self.candidates.items()},
        }

    def to_text(self) -> str:
        lines = []
        for f in self.formulas:
            lines.append(f"formula {f.index}: ${f.source}$")
            if f.error is not None:
                lines.append(f"  error: {f.error}")
                continue
            for row in f.nodes():
                hyps = ", ".join(f"{h['sense']}={h['score']:.4f}" for h in row["hypotheses"]) or "-"
                decided = row["decided"] or "undecided"
                prov = row["provenance"] or "-"
                lines.append(f"  {str(row['path']):<12} {row['symbol']:<10} {decided:<26} {prov:<6} {hyps}")
        if self.candidates:
            lines.append("definiens candidates:")
            for ident, cands in self.candidates.items():
                for c in cands:
                    lines.append(f"  {ident:<10} {c.definiens:<28} {c.score:.4f}  dw={c.dw:g} df={c.df:g}")
        return "\n".join(lines)


def analyze_document(text: str | Document, lexicon: Lexicon, cfg: Config = Config()) -> DocumentAnalysis:
    """Both scans over every formula of a document; failing formulas are reported, not fatal."""
    doc = text if isinstance(text, Document) else segment_document(text, lexicon.macro_signatures())
    report = DocumentAnalysis()
    scans: list[tuple[int, TaggedTree]] = []
    identifiers: set[str] = set()
    for seg in doc.math:
        fa = FormulaAnalysis(seg.index, seg.source, seg.error)
        report.formulas.append(fa)
        if seg.tree is None:
            continue
        try:
            scan1 = tag(seg.tree, lexicon, cfg.weights)
        except MathSemError as exc:
            fa.error = str(exc)
            continue
        scans.append((len(report.formulas) - 1, scan1))
        identifiers |= extract_identifiers(seg.tree, scan1, lexicon)
    report.candidates = candidates_for(doc, identifiers, cfg)
    for pos, scan1 in scans:
        report.formulas[pos].fused = fuse(scan1, report.candidates, lexicon)
    return report
