"""Math syntax trees: tokenizer, recursive-descent parser and canonical renderer.

The accepted language is a closed subset of LaTeX math mode:

* letters, digits, the operators ``+ - * / = < > | ! ; . ,``
* scripts ``^`` and ``_``, braces, parentheses and brackets
* ``\\frac``, ``\\sqrt``, ``\\left``/``\\right``, ``\\cdot``, ``\\times``
* semantic macros ``\\Name{p1}...{pk}@{a1}...@{am}``
* any other control sequence, which becomes an :class:`Identifier`

Braces are transparent: ``{x}`` parses to the same tree as ``x``.  The
parser stays free of semantics; deciding whether ``f(x)`` is a function
application is left to the tagger.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence as Seq, Union

from .errors import (
    ArityMismatch,
    DanglingScript,
    DoubleScript,
    EmptyGroup,
    IllegalCharacter,
    InvalidPath,
    MathSyntaxError,
    MissingArgument,
    NestingTooDeep,
    UnbalancedDelimiter,
    UnexpectedToken,
    UnterminatedControlSeq,
)

Span = tuple[int, int]
Path = tuple[int, ...]

GREEK = frozenset(
    """alpha beta gamma delta epsilon varepsilon zeta eta theta vartheta iota
    kappa lambda mu nu xi pi varpi rho varrho sigma varsigma tau upsilon phi
    varphi chi psi omega Gamma Delta Theta Lambda Xi Pi Sigma Upsilon Phi Psi
    Omega""".split()
)

MAX_DEPTH = 200


class TokenKind(enum.Enum):
    CONTROL = "control"
    LETTER = "letter"
    DIGIT = "digit"
    OPERATOR = "operator"
    SUB = "sub"
    SUP = "sup"
    GROUP_OPEN = "group_open"
    GROUP_CLOSE = "group_close"
    PAREN_OPEN = "paren_open"
    PAREN_CLOSE = "paren_close"
    BRACKET_OPEN = "bracket_open"
    BRACKET_CLOSE = "bracket_close"
    AT = "at"
    COMMA = "comma"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str
    span: Span

    def __repr__(self):
        return f"{self.kind.name}({self.value!r})"


_SINGLE = {
    "^": TokenKind.SUP,
    "_": TokenKind.SUB,
    "{": TokenKind.GROUP_OPEN,
    "}": TokenKind.GROUP_CLOSE,
    "(": TokenKind.PAREN_OPEN,
    ")": TokenKind.PAREN_CLOSE,
    "[": TokenKind.BRACKET_OPEN,
    "]": TokenKind.BRACKET_CLOSE,
    "@": TokenKind.AT,
    ",": TokenKind.COMMA,
}
_OPERATORS = frozenset("+-*/=<>|!;.")
_SPACING = frozenset(",;:! ")  # \, \; \: \! and "\ " are pure spacing


def _is_ascii_letter(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def tokenize(source: str | bytes) -> list[Token]:
    """Split a math-mode string into tokens.

    Whitespace is dropped. Spans are character offsets; since only ASCII is
    accepted they coincide with byte offsets.
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IllegalCharacter("invalid UTF-8", exc.start) from None
    tokens: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
        elif ch == "\\":
            if i + 1 >= n:
                raise UnterminatedControlSeq("lone backslash", i)
            nxt = source[i + 1]
            if _is_ascii_letter(nxt):
                j = i + 1
                while j < n and _is_ascii_letter(source[j]):
                    j += 1
                tokens.append(Token(TokenKind.CONTROL, source[i + 1 : j], (i, j)))
                i = j
            elif nxt in _SPACING:
                i += 2
            else:
                raise IllegalCharacter(f"illegal control symbol \\{nxt!r}", i)
        elif _is_ascii_letter(ch):
            tokens.append(Token(TokenKind.LETTER, ch, (i, i + 1)))
            i += 1
        elif "0" <= ch <= "9":
            tokens.append(Token(TokenKind.DIGIT, ch, (i, i + 1)))
            i += 1
        elif ch in _OPERATORS:
            tokens.append(Token(TokenKind.OPERATOR, ch, (i, i + 1)))
            i += 1
        elif ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], ch, (i, i + 1)))
            i += 1
        else:
            raise IllegalCharacter(f"illegal character {ch!r}", i)
    return tokens


# -- tree --------------------------------------------------------------------


@dataclass(frozen=True)
class Identifier:
    symbol: str  # "x" or "\\alpha"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Number:
    literal: str
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Operator:
    """Bare operator leaf inside a Sequence: ``,`` ``;`` ``!`` or ``.``."""

    symbol: str
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "MathTree"
    right: "MathTree"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: "MathTree"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Scripted:
    base: "MathTree"
    subscript: "MathTree | None" = None
    superscript: "MathTree | None" = None
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Fenced:
    delims: str  # two characters: opener and closer
    body: "MathTree"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Sequence:
    children: tuple["MathTree", ...]
    span: Span = field(default=(0, 0), compare=False, repr=False)

    @property
    def is_list(self) -> bool:
        """True for comma/semicolon separated lists, False for juxtaposition."""
        return any(isinstance(c, Operator) and c.symbol in ",;" for c in self.children)


@dataclass(frozen=True)
class Frac:
    num: "MathTree"
    den: "MathTree"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Sqrt:
    body: "MathTree"
    degree: "MathTree | None" = None
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class SemanticMacro:
    name: str  # without backslash
    params: tuple["MathTree", ...] = ()
    args: tuple["MathTree", ...] = ()
    span: Span = field(default=(0, 0), compare=False, repr=False)


MathTree = Union[
    Identifier, Number, Operator, BinaryOp, UnaryOp, Scripted, Fenced, Sequence,
    Frac, Sqrt, SemanticMacro,
]


def children(node: MathTree) -> list[MathTree | None]:
    """Child slots in path order. Absent optional slots are ``None``."""
    if isinstance(node, (BinaryOp,)):
        return [node.left, node.right]
    if isinstance(node, UnaryOp):
        return [node.operand]
    if isinstance(node, Scripted):
        return [node.base, node.subscript, node.superscript]
    if isinstance(node, Fenced):
        return [node.body]
    if isinstance(node, Sequence):
        return list(node.children)
    if isinstance(node, Frac):
        return [node.num, node.den]
    if isinstance(node, Sqrt):
        return [node.degree, node.body]
    if isinstance(node, SemanticMacro):
        return [*node.params, *node.args]
    return []


def walk(node: MathTree, path: Path = ()) -> Iterator[tuple[Path, MathTree]]:
    """Pre-order traversal yielding ``(path, node)``."""
    yield path, node
    for i, child in enumerate(children(node)):
        if child is not None:
            yield from walk(child, path + (i,))


def node_at(tree: MathTree, path: Seq[int]) -> MathTree:
    node = tree
    for i in path:
        slots = children(node)
        if not 0 <= i < len(slots) or slots[i] is None:
            raise InvalidPath(path)
        node = slots[i]
    return node


def parent_of(tree: MathTree, path: Seq[int]) -> tuple[MathTree | None, int | None]:
    if not path:
        return None, None
    return node_at(tree, path[:-1]), path[-1]


def list_items(node: MathTree) -> list[MathTree]:
    """Split a comma/semicolon list into its items; other nodes are one item."""
    if isinstance(node, Sequence) and node.is_list:
        return [c for c in node.children if not (isinstance(c, Operator) and c.symbol in ",;")]
    return [node]


# -- parser ------------------------------------------------------------------

_REL_OPS = frozenset("=<>")
_ADD_OPS = frozenset("+-")
_MUL_OPS = frozenset("*/")
_MUL_MACROS = {"cdot": "\\cdot", "times": "\\times"}
_STRUCTURAL = frozenset({"frac", "sqrt", "left", "right", "cdot", "times"})
_OPENERS = {TokenKind.PAREN_OPEN: "(", TokenKind.BRACKET_OPEN: "["}
_CLOSERS = {TokenKind.PAREN_CLOSE: ")", TokenKind.BRACKET_CLOSE: "]"}


class _Parser:
    def __init__(self, tokens: Seq[Token], macros: Mapping[str, tuple[int, int]] | None):
        self.toks = list(tokens)
        self.pos = 0
        self.macros = dict(macros or {})
        self.depth = 0
        self.in_bar = False

    # ---- helpers ----
    def peek(self, k: int = 0) -> Token | None:
        j = self.pos + k
        return self.toks[j] if j < len(self.toks) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise UnexpectedToken("unexpected end of input", self._end())
        self.pos += 1
        return tok

    def _end(self) -> int:
        return self.toks[-1].span[1] if self.toks else 0

    def _is_op(self, tok: Token | None, ops) -> bool:
        return tok is not None and tok.kind is TokenKind.OPERATOR and tok.value in ops

    def _enter(self, tok: Token):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise NestingTooDeep("nesting too deep", tok.span[0])

    def _leave(self):
        self.depth -= 1

    # ---- grammar ----
    def parse(self) -> MathTree:
        if not self.toks:
            raise EmptyGroup("empty expression", 0)
        tree = self.list_expr()
        tok = self.peek()
        if tok is not None:
            if tok.kind in (TokenKind.GROUP_CLOSE, TokenKind.PAREN_CLOSE, TokenKind.BRACKET_CLOSE) or (
                tok.kind is TokenKind.CONTROL and tok.value == "right"
            ):
                raise UnbalancedDelimiter(f"unmatched {tok.value!r}", tok.span[0])
            raise UnexpectedToken(f"unexpected {tok.value!r}", tok.span[0])
        return tree

    def list_expr(self) -> MathTree:
        items = [self.rel()]
        while True:
            tok = self.peek()
            if tok is not None and (tok.kind is TokenKind.COMMA or self._is_op(tok, ";")):
                self.pos += 1
                items.append(Operator(tok.value, tok.span))
                items.append(self.rel())
            else:
                break
        if len(items) == 1:
            return items[0]
        return Sequence(tuple(items), (items[0].span[0], items[-1].span[1]))

    def rel(self) -> MathTree:
        left = self.add()
        while self._is_op(self.peek(), _REL_OPS):
            op = self.next().value
            right = self.add()
            left = BinaryOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def add(self) -> MathTree:
        left = self.signed()
        while self._is_op(self.peek(), _ADD_OPS):
            op = self.next().value
            right = self.signed()
            left = BinaryOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def signed(self) -> MathTree:
        tok = self.peek()
        if self._is_op(tok, _ADD_OPS):
            self.pos += 1
            self._enter(tok)
            operand = self.signed()
            self._leave()
            return UnaryOp(tok.value, operand, (tok.span[0], operand.span[1]))
        return self.term()

    def _mul_op(self) -> str | None:
        tok = self.peek()
        if self._is_op(tok, _MUL_OPS):
            return tok.value
        if tok is not None and tok.kind is TokenKind.CONTROL and tok.value in _MUL_MACROS:
            return _MUL_MACROS[tok.value]
        return None

    def term(self) -> MathTree:
        left = self.juxt()
        while (op := self._mul_op()) is not None:
            self.pos += 1
            right = self.juxt()
            left = BinaryOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def _starts_atom(self, tok: Token | None) -> bool:
        if tok is None:
            return False
        k = tok.kind
        if k in (TokenKind.LETTER, TokenKind.DIGIT, TokenKind.GROUP_OPEN,
                 TokenKind.PAREN_OPEN, TokenKind.BRACKET_OPEN):
            return True
        if k is TokenKind.CONTROL:
            return tok.value not in ("right", "cdot", "times")
        if k is TokenKind.OPERATOR:
            if tok.value == "|":
                return not self.in_bar
            return tok.value in "!."
        return False

    def juxt(self) -> MathTree:
        tok = self.peek()
        if tok is not None and tok.kind in (TokenKind.SUB, TokenKind.SUP):
            raise DanglingScript("script without base", tok.span[0])
        if not self._starts_atom(tok):
            if tok is None:
                raise UnexpectedToken("unexpected end of input", self._end())
            if tok.kind in (TokenKind.GROUP_CLOSE, TokenKind.PAREN_CLOSE, TokenKind.BRACKET_CLOSE):
                raise UnbalancedDelimiter(f"unexpected {tok.value!r}", tok.span[0])
            raise UnexpectedToken(f"unexpected {tok.value!r}", tok.span[0])
        items = []
        while self._starts_atom(self.peek()):
            items.append(self.atom())
        if len(items) == 1:
            return items[0]
        return Sequence(tuple(items), (items[0].span[0], items[-1].span[1]))

    def atom(self) -> MathTree:
        base = self.primary()
        sub = sup = None
        while (tok := self.peek()) is not None and tok.kind in (TokenKind.SUB, TokenKind.SUP):
            self.pos += 1
            arg = self.script_arg(tok)
            if tok.kind is TokenKind.SUB:
                if sub is not None:
                    raise DoubleScript("double subscript", tok.span[0])
                sub = arg
            else:
                if sup is not None:
                    raise DoubleScript("double superscript", tok.span[0])
                sup = arg
        if sub is None and sup is None:
            return base
        end = max(s.span[1] for s in (sub, sup) if s is not None)
        return Scripted(base, sub, sup, (base.span[0], end))

    def script_arg(self, script: Token) -> MathTree:
        tok = self.peek()
        if tok is None:
            raise DanglingScript("script without argument", script.span[0])
        if tok.kind is TokenKind.GROUP_OPEN:
            return self.group()
        if tok.kind is TokenKind.LETTER:
            self.pos += 1
            return Identifier(tok.value, tok.span)
        if tok.kind is TokenKind.DIGIT:
            self.pos += 1
            return Number(tok.value, tok.span)
        if tok.kind is TokenKind.CONTROL and tok.value not in ("right", "cdot", "times", "left"):
            return self.primary()
        raise DanglingScript("script without argument", script.span[0])

    def macro_arg(self, macro: Token) -> MathTree:
        tok = self.peek()
        if tok is None:
            raise MissingArgument(f"\\{macro.value} is missing an argument", macro.span[0])
        if tok.kind is TokenKind.GROUP_OPEN:
            return self.group()
        if tok.kind is TokenKind.LETTER:
            self.pos += 1
            return Identifier(tok.value, tok.span)
        if tok.kind is TokenKind.DIGIT:
            self.pos += 1
            return Number(tok.value, tok.span)
        raise MissingArgument(f"\\{macro.value} is missing an argument", macro.span[0])

    def group(self) -> MathTree:
        open_tok = self.next()
        self._enter(open_tok)
        if self.peek() is not None and self.peek().kind is TokenKind.GROUP_CLOSE:
            raise EmptyGroup("empty group", open_tok.span[0])
        saved, self.in_bar = self.in_bar, False
        body = self.list_expr()
        self.in_bar = saved
        close = self.peek()
        if close is None or close.kind is not TokenKind.GROUP_CLOSE:
            raise UnbalancedDelimiter("unclosed '{'", open_tok.span[0])
        self.pos += 1
        self._leave()
        return replace(body, span=(open_tok.span[0], close.span[1]))

    def fence(self) -> MathTree:
        open_tok = self.next()
        self._enter(open_tok)
        if self.peek() is not None and self.peek().kind in _CLOSERS:
            raise EmptyGroup("empty fence", open_tok.span[0])
        saved, self.in_bar = self.in_bar, False
        body = self.list_expr()
        self.in_bar = saved
        close = self.peek()
        if close is None or close.kind not in _CLOSERS:
            raise UnbalancedDelimiter(f"unclosed {open_tok.value!r}", open_tok.span[0])
        self.pos += 1
        self._leave()
        return Fenced(_OPENERS[open_tok.kind] + _CLOSERS[close.kind], body,
                      (open_tok.span[0], close.span[1]))

    def bar(self) -> MathTree:
        open_tok = self.next()
        self._enter(open_tok)
        if self._is_op(self.peek(), "|"):
            raise EmptyGroup("empty absolute value", open_tok.span[0])
        saved, self.in_bar = self.in_bar, True
        body = self.list_expr()
        self.in_bar = saved
        close = self.peek()
        if not self._is_op(close, "|"):
            raise UnbalancedDelimiter("unclosed '|'", open_tok.span[0])
        self.pos += 1
        self._leave()
        return Fenced("||", body, (open_tok.span[0], close.span[1]))

    def left_right(self, left_tok: Token) -> MathTree:
        self._enter(left_tok)
        opener = self.peek()
        if opener is None or not (opener.kind in _OPENERS or self._is_op(opener, "|")):
            raise UnbalancedDelimiter("\\left needs ( [ or |", left_tok.span[0])
        self.pos += 1
        saved, self.in_bar = self.in_bar, False
        body = self.list_expr()
        self.in_bar = saved
        right_tok = self.peek()
        if right_tok is None or right_tok.kind is not TokenKind.CONTROL or right_tok.value != "right":
            raise UnbalancedDelimiter("\\left without \\right", left_tok.span[0])
        self.pos += 1
        closer = self.peek()
        if closer is None or not (closer.kind in _CLOSERS or self._is_op(closer, "|")):
            raise UnbalancedDelimiter("\\right needs ) ] or |", right_tok.span[0])
        self.pos += 1
        self._leave()
        o = "|" if opener.value == "|" else _OPENERS[opener.kind]
        c = "|" if closer.value == "|" else _CLOSERS[closer.kind]
        if (o == "|") != (c == "|"):
            raise UnbalancedDelimiter("mismatched \\left/\\right bars", left_tok.span[0])
        return Fenced(o + c, body, (left_tok.span[0], closer.span[1]))

    def number(self) -> Number:
        start = self.peek().span[0]
        digits = []
        while (tok := self.peek()) is not None and tok.kind is TokenKind.DIGIT:
            digits.append(tok.value)
            self.pos += 1
        nxt, after = self.peek(), self.peek(1)
        if self._is_op(nxt, ".") and after is not None and after.kind is TokenKind.DIGIT:
            self.pos += 1
            digits.append(".")
            while (tok := self.peek()) is not None and tok.kind is TokenKind.DIGIT:
                digits.append(tok.value)
                self.pos += 1
        return Number("".join(digits), (start, self.toks[self.pos - 1].span[1]))

    def _skip_group(self, j: int) -> int | None:
        """Index after the balanced brace group starting at ``j``."""
        level = 0
        while j < len(self.toks):
            k = self.toks[j].kind
            if k is TokenKind.GROUP_OPEN:
                level += 1
            elif k is TokenKind.GROUP_CLOSE:
                level -= 1
                if level == 0:
                    return j + 1
            j += 1
        return None

    def _looks_semantic(self) -> bool:
        j = self.pos
        while j < len(self.toks) and self.toks[j].kind is TokenKind.GROUP_OPEN:
            end = self._skip_group(j)
            if end is None:
                return False
            j = end
        return j < len(self.toks) and self.toks[j].kind is TokenKind.AT

    def semantic_macro(self, tok: Token) -> SemanticMacro:
        name = tok.value
        params, args = [], []
        if name in self.macros:
            n_params, n_args = self.macros[name]
            for _ in range(n_params):
                nxt = self.peek()
                if nxt is None or nxt.kind is not TokenKind.GROUP_OPEN:
                    raise ArityMismatch(f"\\{name} expects {n_params} parameter group(s)", tok.span[0])
                params.append(self.group())
            for _ in range(n_args):
                nxt = self.peek()
                if nxt is None or nxt.kind is not TokenKind.AT:
                    raise ArityMismatch(f"\\{name} expects {n_args} @-argument(s)", tok.span[0])
                self.pos += 1
                args.append(self._at_group(nxt))
            if self.peek() is not None and self.peek().kind is TokenKind.AT:
                raise ArityMismatch(f"\\{name} expects {n_args} @-argument(s)", tok.span[0])
        else:
            while (nxt := self.peek()) is not None and nxt.kind is TokenKind.GROUP_OPEN:
                params.append(self.group())
            while (nxt := self.peek()) is not None and nxt.kind is TokenKind.AT:
                self.pos += 1
                args.append(self._at_group(nxt))
        end = self.toks[self.pos - 1].span[1]
        return SemanticMacro(name, tuple(params), tuple(args), (tok.span[0], end))

    def _at_group(self, at: Token) -> MathTree:
        nxt = self.peek()
        if nxt is None or nxt.kind is not TokenKind.GROUP_OPEN:
            raise UnexpectedToken("'@' must be followed by a brace group", at.span[0])
        return self.group()

    def primary(self) -> MathTree:
        tok = self.peek()
        if tok is None:
            raise UnexpectedToken("unexpected end of input", self._end())
        k = tok.kind
        if k is TokenKind.LETTER:
            self.pos += 1
            return Identifier(tok.value, tok.span)
        if k is TokenKind.DIGIT:
            return self.number()
        if k is TokenKind.GROUP_OPEN:
            return self.group()
        if k in _OPENERS:
            return self.fence()
        if k is TokenKind.OPERATOR:
            if tok.value == "|":
                return self.bar()
            if tok.value in "!.":
                self.pos += 1
                return Operator(tok.value, tok.span)
        if k is TokenKind.CONTROL:
            self.pos += 1
            name = tok.value
            if name == "frac":
                self._enter(tok)
                num = self.macro_arg(tok)
                den = self.macro_arg(tok)
                self._leave()
                return Frac(num, den, (tok.span[0], den.span[1]))
            if name == "sqrt":
                self._enter(tok)
                degree = None
                nxt = self.peek()
                if nxt is not None and nxt.kind is TokenKind.BRACKET_OPEN:
                    self.pos += 1
                    if self.peek() is not None and self.peek().kind is TokenKind.BRACKET_CLOSE:
                        raise EmptyGroup("empty root degree", nxt.span[0])
                    saved, self.in_bar = self.in_bar, False
                    degree = self.list_expr()
                    self.in_bar = saved
                    close = self.peek()
                    if close is None or close.kind is not TokenKind.BRACKET_CLOSE:
                        raise UnbalancedDelimiter("unclosed root degree", nxt.span[0])
                    self.pos += 1
                body = self.macro_arg(tok)
                self._leave()
                return Sqrt(body, degree, (tok.span[0], body.span[1]))
            if name == "left":
                return self.left_right(tok)
            if name in ("right", "cdot", "times"):
                raise UnexpectedToken(f"unexpected \\{name}", tok.span[0])
            if name in self.macros and sum(self.macros[name]) > 0:
                self._enter(tok)
                node = self.semantic_macro(tok)
                self._leave()
                return node
            if self._looks_semantic():
                self._enter(tok)
                node = self.semantic_macro(tok)
                self._leave()
                return node
            return Identifier("\\" + name, tok.span)
        if k in _CLOSERS or k is TokenKind.GROUP_CLOSE:
            raise UnbalancedDelimiter(f"unexpected {tok.value!r}", tok.span[0])
        if k in (TokenKind.SUB, TokenKind.SUP):
            raise DanglingScript("script without base", tok.span[0])
        raise UnexpectedToken(f"unexpected {tok.value!r}", tok.span[0])


def parse(tokens: Seq[Token], macros: Mapping[str, tuple[int, int]] | None = None) -> MathTree:
    """Parse a token list into a single tree.

    ``macros`` maps known semantic-macro names (no backslash) to their
    ``(param_count, arg_count)``; known macros must match exactly. Unknown
    control sequences followed by brace groups and an ``@`` group are still
    read as semantic macros.
    """
    try:
        return _Parser(tokens, macros).parse()
    except RecursionError:
        pos = tokens[0].span[0] if tokens else 0
        raise NestingTooDeep("nesting too deep", pos) from None


def parse_latex(source: str | bytes, macros: Mapping[str, tuple[int, int]] | None = None) -> MathTree:
    return parse(tokenize(source), macros)


# -- renderer ----------------------------------------------------------------

# binding strength: higher binds tighter
_P_LIST, _P_REL, _P_ADD, _P_SIGNED, _P_MUL, _P_JUXT, _P_ATOM = range(7)


def _prec(node: MathTree) -> int:
    if isinstance(node, Sequence):
        return _P_LIST if node.is_list else _P_JUXT
    if isinstance(node, BinaryOp):
        if node.op in _REL_OPS:
            return _P_REL
        if node.op in _ADD_OPS:
            return _P_ADD
        return _P_MUL
    if isinstance(node, UnaryOp):
        return _P_SIGNED
    return _P_ATOM


_CS_TAIL = re.compile(r"\\[A-Za-z]+$")


def _cat(parts: Seq[str]) -> str:
    out = ""
    for part in parts:
        if out and part and part[0].isalpha() and _CS_TAIL.search(out):
            out += " "
        out += part
    return out


def _brace(node: MathTree) -> str:
    return "{" + render(node) + "}"


def _wrap(node: MathTree, min_prec: int) -> str:
    return _brace(node) if _prec(node) < min_prec else render(node)


def _script(node: MathTree) -> str:
    if isinstance(node, Identifier) and len(node.symbol) == 1:
        return node.symbol
    if isinstance(node, Number) and len(node.literal) == 1:
        return node.literal
    return _brace(node)


def render(tree: MathTree) -> str:
    """Canonical LaTeX for a tree; ``parse(tokenize(render(t))) == t``."""
    t = tree
    if isinstance(t, Identifier):
        return t.symbol
    if isinstance(t, Number):
        return t.literal
    if isinstance(t, Operator):
        return t.symbol
    if isinstance(t, BinaryOp):
        p = _prec(t)
        return _cat([_wrap(t.left, p), t.op, _wrap(t.right, p + 1)])
    if isinstance(t, UnaryOp):
        return _cat([t.op, _wrap(t.operand, _P_SIGNED)])
    if isinstance(t, Scripted):
        base = render(t.base) if _prec(t.base) == _P_ATOM and not isinstance(t.base, Scripted) else _brace(t.base)
        parts = [base]
        if t.subscript is not None:
            parts += ["_", _script(t.subscript)]
        if t.superscript is not None:
            parts += ["^", _script(t.superscript)]
        return _cat(parts)
    if isinstance(t, Fenced):
        body = render(t.body)
        if t.delims == "||" and "|" in body:
            body = "{" + body + "}"  # an unbraced inner bar would close the outer one
        return _cat([t.delims[0], body, t.delims[1]])
    if isinstance(t, Sequence):
        if t.is_list:
            return _cat([_wrap(c, _P_REL) if not isinstance(c, Operator) else c.symbol for c in t.children])
        parts: list[str] = []
        for child in t.children:
            piece = _wrap(child, _P_ATOM)
            if parts and piece[:1] in "0123456789." and parts[-1][-1:] in "0123456789.":
                piece = _brace(child)
            parts.append(piece)
        return _cat(parts)
    if isinstance(t, Frac):
        return _cat(["\\frac", _brace(t.num), _brace(t.den)])
    if isinstance(t, Sqrt):
        if t.degree is None:
            return _cat(["\\sqrt", _brace(t.body)])
        return _cat(["\\sqrt[", render(t.degree), "]", _brace(t.body)])
    if isinstance(t, SemanticMacro):
        parts = ["\\" + t.name]
        parts += [_brace(p) for p in t.params]
        for a in t.args:
            parts += ["@", _brace(a)]
        return _cat(parts)
    raise TypeError(f"not a MathTree node: {t!r}")


def to_dict(tree: MathTree) -> dict:
    """JSON-friendly structural dump (with spans)."""
    name = type(tree).__name__
    out: dict = {"kind": name, "span": list(tree.span)}
    if isinstance(tree, Identifier):
        out["symbol"] = tree.symbol
    elif isinstance(tree, (Number,)):
        out["literal"] = tree.literal
    elif isinstance(tree, Operator):
        out["symbol"] = tree.symbol
    elif isinstance(tree, (BinaryOp, UnaryOp)):
        out["op"] = tree.op
    elif isinstance(tree, Fenced):
        out["delims"] = tree.delims
    elif isinstance(tree, SemanticMacro):
        out["name"] = tree.name
        out["n_params"] = len(tree.params)
    kids = children(tree)
    if kids:
        out["children"] = [None if c is None else to_dict(c) for c in kids]
    return out
