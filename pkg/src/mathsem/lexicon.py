"""Dictionary of token meanings with structural signatures and CAS patterns."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import PlaceholderError, SchemaError

DIALECTS = ("maple", "mathematica")
ROLES = ("function", "constant", "variable", "operator")
KINDS = ("symbol", "semantic-macro")
DEFAULT_PRIOR = 0.5

PLACEHOLDER = re.compile(r"\$([pa])(\d+)")


@dataclass(frozen=True)
class Signature:
    params: int = 0
    sup: int = 0
    sub: int = 0
    args: int = 0

    @property
    def n_params(self) -> int:
        """Total ``$p`` placeholders: macro params, then superscript, then subscript."""
        return self.params + self.sup + self.sub

    @property
    def is_structural(self) -> bool:
        return self.sup > 0 or self.sub > 0 or self.args > 0

    def to_dict(self) -> dict:
        out = {"params": self.params, "sup-params": self.sup, "sub-params": self.sub, "args": self.args}
        return {k: v for k, v in out.items() if v}


@dataclass(frozen=True)
class TranslationPattern:
    template: str
    reserved_collisions: tuple[str, ...] = ()

    def to_json(self):
        if self.reserved_collisions:
            return {"template": self.template, "reserved-collisions": list(self.reserved_collisions)}
        return self.template


@dataclass(frozen=True)
class Sense:
    id: str
    role: str
    description: str = ""
    signature: Signature = Signature()
    prior: float = DEFAULT_PRIOR
    translations: dict[str, TranslationPattern] = field(default_factory=dict, hash=False)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"id": self.id, "role": self.role, "description": self.description}
        sig = self.signature.to_dict()
        if sig:
            out["signature"] = sig
        out["prior"] = self.prior
        if self.translations:
            out["translations"] = {d: p.to_json() for d, p in self.translations.items()}
        return out


@dataclass(frozen=True)
class Entry:
    key: str
    kind: str
    senses: tuple[Sense, ...]


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, Entry] = field(default_factory=dict)
    version: int = 1
    reserved: dict[str, frozenset[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, key: str) -> list[Sense] | None:
        entry = self.entries.get(key)
        return list(entry.senses) if entry else None

    def sense(self, key: str, sense_id: str) -> Sense | None:
        for s in self.lookup(key) or ():
            if s.id == sense_id:
                return s
        return None

    def macro_signatures(self) -> dict[str, tuple[int, int]]:
        """``name -> (params, args)`` for semantic-macro entries, for the parser."""
        out = {}
        for key, entry in self.entries.items():
            if entry.kind == "semantic-macro":
                sig = entry.senses[0].signature
                out[key.lstrip("\\")] = (sig.params, sig.args)
        return out

    def reserved_for(self, dialect: str) -> frozenset[str]:
        return self.reserved.get(dialect, frozenset())

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "reserved": {d: sorted(names) for d, names in sorted(self.reserved.items())},
            "entries": [
                {"key": e.key, "kind": e.kind, "senses": [s.to_dict() for s in e.senses]}
                for e in self.entries.values()
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def lookup(lexicon: Lexicon, key: str) -> list[Sense] | None:
    """All senses for ``key`` in declaration order, or ``None`` if absent."""
    return lexicon.lookup(key)


# -- loading -----------------------------------------------------------------


def _expect(cond: bool, pointer: str, message: str):
    if not cond:
        raise SchemaError(pointer, message)


def _count(value: Any, pointer: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool) and value >= 0,
            pointer, "expected a non-negative integer")
    return value


def check_placeholders(sense_id: str, template: str, signature: Signature) -> None:
    stripped = PLACEHOLDER.sub("", template)
    if "$" in stripped:
        raise PlaceholderError(sense_id, f"malformed placeholder in {template!r}")
    for kind, idx in PLACEHOLDER.findall(template):
        limit = signature.n_params if kind == "p" else signature.args
        if int(idx) >= limit:
            raise PlaceholderError(sense_id, f"${kind}{idx} exceeds signature in {template!r}")


def _load_pattern(raw: Any, pointer: str) -> TranslationPattern:
    if isinstance(raw, str):
        template, collisions = raw, []
    else:
        _expect(isinstance(raw, dict), pointer, "pattern must be a string or object")
        template = raw.get("template")
        collisions = raw.get("reserved-collisions", [])
        _expect(isinstance(collisions, list) and all(isinstance(c, str) for c in collisions),
                pointer + "/reserved-collisions", "expected a list of names")
    _expect(isinstance(template, str) and template != "", pointer, "template must be a non-empty string")
    return TranslationPattern(template, tuple(collisions))


def _load_sense(raw: Any, pointer: str, kind: str) -> Sense:
    _expect(isinstance(raw, dict), pointer, "sense must be an object")
    sid = raw.get("id")
    _expect(isinstance(sid, str) and ":" in sid, pointer + "/id", "id must be a namespaced string")
    role = raw.get("role")
    _expect(role in ROLES, pointer + "/role", f"role must be one of {ROLES}")
    desc = raw.get("description", "")
    _expect(isinstance(desc, str), pointer + "/description", "expected a string")
    sig_raw = raw.get("signature", {})
    _expect(isinstance(sig_raw, dict), pointer + "/signature", "expected an object")
    unknown = set(sig_raw) - {"params", "sup-params", "sub-params", "args"}
    _expect(not unknown, pointer + "/signature", f"unknown fields {sorted(unknown)}")
    sig = Signature(
        params=_count(sig_raw.get("params", 0), pointer + "/signature/params"),
        sup=_count(sig_raw.get("sup-params", 0), pointer + "/signature/sup-params"),
        sub=_count(sig_raw.get("sub-params", 0), pointer + "/signature/sub-params"),
        args=_count(sig_raw.get("args", 0), pointer + "/signature/args"),
    )
    prior = raw.get("prior", DEFAULT_PRIOR)
    _expect(isinstance(prior, (int, float)) and not isinstance(prior, bool) and 0 <= prior <= 1,
            pointer + "/prior", "prior must be a number in [0, 1]")
    trans_raw = raw.get("translations", {})
    _expect(isinstance(trans_raw, dict), pointer + "/translations", "expected an object")
    translations = {}
    for dialect, pat in trans_raw.items():
        _expect(dialect in DIALECTS, f"{pointer}/translations/{dialect}", "unknown dialect")
        translations[dialect] = _load_pattern(pat, f"{pointer}/translations/{dialect}")
    if kind == "semantic-macro":
        missing = [d for d in DIALECTS if d not in translations]
        _expect(not missing, pointer + "/translations", f"semantic macro sense lacks {missing}")
    for pat in translations.values():
        check_placeholders(sid, pat.template, sig)
    return Sense(sid, role, desc, sig, float(prior), translations)


def parse_lexicon(data: Any) -> Lexicon:
    """Validate a decoded ``lexicon.json`` document eagerly."""
    _expect(isinstance(data, dict), "", "lexicon must be a JSON object")
    version = data.get("version", 1)
    _expect(isinstance(version, int) and not isinstance(version, bool), "/version", "expected an integer")
    reserved_raw = data.get("reserved", {})
    _expect(isinstance(reserved_raw, dict), "/reserved", "expected an object")
    reserved = {}
    for dialect, names in reserved_raw.items():
        _expect(dialect in DIALECTS, f"/reserved/{dialect}", "unknown dialect")
        _expect(isinstance(names, list) and all(isinstance(n, str) for n in names),
                f"/reserved/{dialect}", "expected a list of names")
        reserved[dialect] = frozenset(names)
    entries_raw = data.get("entries", [])
    _expect(isinstance(entries_raw, list), "/entries", "expected an array")
    entries: dict[str, Entry] = {}
    for i, raw in enumerate(entries_raw):
        ptr = f"/entries/{i}"
        _expect(isinstance(raw, dict), ptr, "entry must be an object")
        key = raw.get("key")
        _expect(isinstance(key, str) and key != "", ptr + "/key", "key must be a non-empty string")
        _expect(key not in entries, ptr + "/key", f"duplicate key {key!r}")
        kind = raw.get("kind")
        _expect(kind in KINDS, ptr + "/kind", f"kind must be one of {KINDS}")
        if kind == "semantic-macro":
            _expect(key.startswith("\\"), ptr + "/key", "semantic macro keys start with a backslash")
        senses_raw = raw.get("senses")
        _expect(isinstance(senses_raw, list) and senses_raw, ptr + "/senses", "entry needs at least one sense")
        senses = tuple(_load_sense(s, f"{ptr}/senses/{j}", kind) for j, s in enumerate(senses_raw))
        ids = [s.id for s in senses]
        _expect(len(set(ids)) == len(ids), ptr + "/senses", "duplicate sense ids")
        if kind == "semantic-macro":
            sigs = {s.signature for s in senses}
            _expect(len(sigs) == 1, ptr + "/senses", "semantic macro senses must share one signature")
        entries[key] = Entry(key, kind, senses)
    return Lexicon(entries, version, reserved)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load and validate a lexicon file. I/O failures raise ``OSError``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    return parse_lexicon(data)


def bundled_lexicon_path() -> Path:
    return Path(str(resources.files("mathsem") / "data" / "lexicon.json"))


_DEFAULT: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_lexicon(bundled_lexicon_path())
    return _DEFAULT
