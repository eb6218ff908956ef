"""Scan 2: identifier/definiens candidates from the text around formulae.

Documents are plain text with ``$...$``, ``$$...$$`` or ``\\[...\\]`` math.
Distances are counted in word tokens, every math segment counting as one
token. Noun detection is rule based: a bundled dictionary of mathematical
nouns, plural stripping, the suffixes -tion/-ity/-ness, and capitalized
words that do not start a sentence.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path as FsPath
from typing import Iterable, Mapping, Sequence as Seq, Union

from .errors import IdentifierAbsent, MathSemError, UnterminatedMath
from .lexicon import Lexicon
from .mst import Identifier, MathTree, Path, Sequence, Fenced, parse_latex, walk, parent_of
from .tagger import Hypothesis, TaggedTree, find_sense, is_single_letter

STOPWORDS = frozenset(
    """a an the of for and or nor but to in on at by with from into onto over under
    that this these those is are was were be been being it its as if then than so such
    every each all some any no not there here where which who whom whose what when
    let we us our one two i you he she they them their his her
    exists exist holds hold satisfy satisfies satisfying given denote denotes denoted
    called call where while also only both either neither very more most less least
    small large arbitrarily positive negative real complex""".split()
)

_WORD = re.compile(r"[A-Za-z0-9]+(?:['’-][A-Za-z0-9]+)*")
_BOUNDARY = re.compile(r"(?<=[.!?])\s+(?=[A-Z])")
_END_BOUNDARY = re.compile(r"[.!?]\s+$")
_NOUN_SUFFIXES = ("tion", "ity", "ness")


@dataclass(frozen=True)
class TextSegment:
    text: str
    sentences: tuple[str, ...]
    start: int


@dataclass(frozen=True)
class MathSegment:
    source: str
    tree: MathTree | None
    error: str | None
    start: int
    index: int  # position among math segments
    sentence: int
    position: int  # global token position


Segment = Union[TextSegment, MathSegment]


@dataclass(frozen=True)
class DocToken:
    kind: str  # "word" or "math"
    text: str
    position: int
    sentence: int
    segment: int
    sentence_initial: bool = False


@dataclass(frozen=True)
class Document:
    segments: tuple[Segment, ...]
    tokens: tuple[DocToken, ...]

    @property
    def math(self) -> list[MathSegment]:
        return [s for s in self.segments if isinstance(s, MathSegment)]

    @property
    def has_text(self) -> bool:
        return any(t.kind == "word" for t in self.tokens)


@dataclass(frozen=True)
class DefiniensCandidate:
    identifier: str
    definiens: str
    dw: float  # word distance to the nearest mention of the identifier
    df: float  # word distance to the nearest formula containing it
    score: float = 0.0

    def to_dict(self) -> dict:
        return {"identifier": self.identifier, "definiens": self.definiens,
                "dw": self.dw, "df": self.df, "score": self.score}


@dataclass(frozen=True)
class ScoringParams:
    lambda_w: float = 5.0
    lambda_f: float = 10.0

    def __post_init__(self):
        if not (self.lambda_w > 0 and self.lambda_f > 0):
            raise ValueError("distance scales must be positive")


# -- nouns -------------------------------------------------------------------


def _read_noun_file(path) -> frozenset[str]:
    words = set()
    for line in FsPath(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


@lru_cache(maxsize=None)
def math_nouns(path: str | None = None) -> frozenset[str]:
    if path is None:
        path = str(resources.files("mathsem") / "data" / "math_nouns.txt")
    return _read_noun_file(path)


def is_noun(word: str, sentence_initial: bool = False, nouns: frozenset[str] | None = None) -> bool:
    nouns = math_nouns() if nouns is None else nouns
    w = word.lower()
    if w in STOPWORDS or not w[:1].isalpha():
        return False
    if w in nouns:
        return True
    if w.endswith("es") and w[:-2] in nouns:
        return True
    if w.endswith("s") and w[:-1] in nouns:
        return True
    if len(w) > 5 and w.endswith(_NOUN_SUFFIXES):
        return True
    return word[0].isupper() and not sentence_initial and len(word) > 1


def content_words(text: str) -> set[str]:
    return {w.lower() for w in _WORD.findall(text) if w.lower() not in STOPWORDS}


# -- segmentation ------------------------------------------------------------


def _find_math(text: str, i: int) -> tuple[int, int, int, int] | None:
    """Next math region as ``(open_start, body_start, body_end, close_end)``."""
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            if text[i + 1] == "[":
                end = text.find("\\]", i + 2)
                if end < 0:
                    raise UnterminatedMath(i)
                return i, i + 2, end, end + 2
            i += 2  # escaped character such as \$
            continue
        if ch == "$":
            if text.startswith("$$", i):
                end = text.find("$$", i + 2)
                if end < 0:
                    raise UnterminatedMath(i)
                return i, i + 2, end, end + 2
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == "$":
                    return i, i + 1, j, j + 1
                j += 1
            raise UnterminatedMath(i)
        i += 1
    return None


def segment_document(text: str, macros: Mapping[str, tuple[int, int]] | None = None) -> Document:
    """Split text into sentence-annotated text and parsed math segments."""
    segments: list[Segment] = []
    tokens: list[DocToken] = []
    sentence = 0
    at_sentence_start = True
    pos = 0
    math_index = 0

    def add_text(chunk: str, start: int):
        nonlocal sentence, at_sentence_start
        if not chunk:
            return
        pieces, last = [], 0
        bounds = list(_BOUNDARY.finditer(chunk))
        for b in bounds:
            pieces.append((chunk[last:b.start()], last))
            last = b.end()
        pieces.append((chunk[last:], last))
        seg_no = len(segments)
        sentences = []
        for k, (piece, _) in enumerate(pieces):
            if k > 0:
                sentence += 1
                at_sentence_start = True
            if piece.strip():
                sentences.append(piece.strip())
            for m in _WORD.finditer(piece):
                tokens.append(DocToken("word", m.group(), len(tokens), sentence, seg_no, at_sentence_start))
                at_sentence_start = False
        segments.append(TextSegment(chunk, tuple(sentences), start))
        if _END_BOUNDARY.search(chunk):
            sentence += 1
            at_sentence_start = True

    while True:
        found = _find_math(text, pos)
        if found is None:
            add_text(text[pos:], pos)
            break
        open_start, body_start, body_end, close_end = found
        add_text(text[pos:open_start], pos)
        source = text[body_start:body_end]
        try:
            tree, error = parse_latex(source, macros), None
        except MathSemError as exc:
            tree, error = None, str(exc)
        seg = MathSegment(source, tree, error, open_start, math_index, sentence, len(tokens))
        tokens.append(DocToken("math", source, len(tokens), sentence, len(segments), at_sentence_start))
        at_sentence_start = False
        segments.append(seg)
        math_index += 1
        pos = close_end
    return Document(tuple(segments), tuple(tokens))


# -- identifiers -------------------------------------------------------------


def extract_identifiers(tree: MathTree, tagged: TaggedTree | None = None,
                        lexicon: Lexicon | None = None) -> set[str]:
    """Single-letter and Greek symbols of a formula.

    With scan-1 output, symbols decided as functions or constants are dropped.
    """
    if tagged is not None and lexicon is None:
        from .lexicon import default_lexicon

        lexicon = default_lexicon()
    out = set()
    for path, node in walk(tree):
        if not isinstance(node, Identifier) or not is_single_letter(node.symbol):
            continue
        if tagged is not None:
            sid = tagged.decided_sense(path)
            sense = find_sense(lexicon, node.symbol, sid) if sid else None
            if sense is not None and sense.role in ("function", "constant"):
                continue
        out.add(node.symbol)
    return out


def function_like_identifiers(tree: MathTree) -> set[str]:
    """Identifiers directly followed by a parenthesized group."""
    out = set()
    for path, node in walk(tree):
        if isinstance(node, Identifier) and is_single_letter(node.symbol):
            parent, idx = parent_of(tree, path)
            if isinstance(parent, Sequence) and not parent.is_list and idx + 1 < len(parent.children):
                nxt = parent.children[idx + 1]
                if isinstance(nxt, Fenced) and nxt.delims == "()":
                    out.add(node.symbol)
    return out


# -- candidates --------------------------------------------------------------


@dataclass(frozen=True)
class _Phrase:
    text: str
    positions: tuple[int, ...]
    sentence: int


def noun_phrases(doc: Document, nouns: frozenset[str] | None = None) -> list[_Phrase]:
    """Maximal runs of adjacent nouns in one sentence, truncated to the last 3 words."""
    phrases: list[_Phrase] = []
    run: list[DocToken] = []

    def flush():
        if run:
            tail = run[-3:]
            phrases.append(_Phrase(" ".join(t.text.lower() for t in tail),
                                   tuple(t.position for t in tail), tail[0].sentence))
            run.clear()

    for tok in doc.tokens:
        noun = tok.kind == "word" and is_noun(tok.text, tok.sentence_initial, nouns)
        if noun and run and (run[-1].sentence != tok.sentence or run[-1].position + 1 != tok.position):
            flush()
        if noun:
            run.append(tok)
        else:
            flush()
    flush()
    return phrases


def score_candidate(c: DefiniensCandidate, params: ScoringParams = ScoringParams()) -> float:
    """Equal mix of two exponential distance decays; 1.0 at zero distance."""
    if c.dw < 0 or c.df < 0:
        raise ValueError("distances must be non-negative")
    return 0.5 * math.exp(-c.dw / params.lambda_w) + 0.5 * math.exp(-c.df / params.lambda_f)


def find_candidates(doc: Document, identifier: str, window: int = 2,
                    params: ScoringParams = ScoringParams(),
                    nouns: frozenset[str] | None = None) -> list[DefiniensCandidate]:
    """Score every noun phrase within ``window`` sentences of a mention.

    A mention is any math segment containing the identifier. Distances:
    ``dw`` to the nearest segment that is just the identifier (falling back
    to any mention), ``df`` to the nearest larger formula containing it
    (falling back to any mention). One candidate per distinct phrase, keeping
    the best score. Sorted by descending score.
    """
    mentions = [m for m in doc.math if m.tree is not None and identifier in extract_identifiers(m.tree)]
    if not mentions:
        raise IdentifierAbsent(identifier)
    bare = [m for m in mentions if isinstance(m.tree, Identifier) and m.tree.symbol == identifier]
    formulas = [m for m in mentions if m not in bare]
    near = [m.position for m in (bare or mentions)]
    far = [m.position for m in (formulas or mentions)]
    allowed = set()
    for m in mentions:
        allowed.update(range(m.sentence - window, m.sentence + window + 1))

    best: dict[str, DefiniensCandidate] = {}
    for ph in noun_phrases(doc, nouns):
        if ph.sentence not in allowed:
            continue
        dw = min(abs(p - q) for p in ph.positions for q in near)
        df = min(abs(p - q) for p in ph.positions for q in far)
        cand = DefiniensCandidate(identifier, ph.text, float(dw), float(df))
        cand = replace(cand, score=score_candidate(cand, params))
        prev = best.get(ph.text)
        if prev is None or cand.score > prev.score:
            best[ph.text] = cand
    return sorted(best.values(), key=lambda c: (-c.score, c.definiens))


# -- fusion ------------------------------------------------------------------


class FusionResult(TaggedTree):
    """Scan-1 output refined with context candidates."""


def _group(candidates) -> dict[str, list[DefiniensCandidate]]:
    if isinstance(candidates, Mapping):
        return {k: list(v) for k, v in candidates.items()}
    out: dict[str, list[DefiniensCandidate]] = {}
    for c in candidates:
        out.setdefault(c.identifier, []).append(c)
    return out


def fuse(scan1: TaggedTree, candidates: Mapping[str, Seq[DefiniensCandidate]] | Iterable[DefiniensCandidate],
         lexicon: Lexicon) -> FusionResult:
    """Boost undecided senses whose description shares a word with a definiens.

    Each matching sense's score is multiplied by ``1 + score`` of its best
    matching candidate; scores are renormalized and the threshold re-applied.
    Nodes decided by scan 1 pass through unchanged.
    """
    by_id = _group(candidates)
    hyps = dict(scan1.hypotheses)
    decided = dict(scan1.decided)
    prov = dict(scan1.provenance)
    for path, ranked in scan1.hypotheses.items():
        if scan1.decided.get(path) or not ranked:
            continue
        symbol = scan1.symbol(path)
        cands = by_id.get(symbol)
        if not cands:
            continue
        boosted = []
        for h in ranked:
            sense = find_sense(lexicon, symbol, h.sense_id)
            desc = content_words(sense.description) if sense else set()
            matches = [c.score for c in cands if desc & content_words(c.definiens)]
            factor = 1.0 + max(matches) if matches else 1.0
            boosted.append(h.score * factor)
        z = math.fsum(boosted)
        new = [Hypothesis(h.node_path, h.sense_id, b / z) for h, b in zip(ranked, boosted)]
        order = sorted(range(len(new)), key=lambda i: -new[i].score)
        new = tuple(new[i] for i in order)
        hyps[path] = new
        decided[path] = new[0].score >= scan1.tau
        prov[path] = "scan2" if decided[path] else None
    return FusionResult(scan1.tree, hyps, decided, scan1.tau, prov)
