"""Node-by-node translation of decided trees into Maple or Mathematica.

Every lexicon pattern is instantiated with the already translated
parameters and arguments, then read back through :func:`parse_cas`, so the
output tree and the rendered string always agree. Rendering is canonical:
Maple writes implicit products with a space and ``", "`` between call
arguments. Mathematica glues a product onto a following ``\\[Name]``
symbol and otherwise uses a space; its call arguments have no spaces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import (
    ArityMismatch,
    CasSyntaxError,
    MissingPattern,
    UndecidedNode,
    UnknownSense,
    UnsupportedConstruct,
)
from .lexicon import DIALECTS, PLACEHOLDER, Lexicon, Sense, TranslationPattern, default_lexicon
from .mst import (
    BinaryOp,
    Fenced,
    Frac,
    Identifier,
    MathTree,
    Number,
    Operator,
    Path,
    Scripted,
    SemanticMacro,
    Sequence,
    Sqrt,
    UnaryOp,
    list_items,
    node_at,
    render,
)
from .tagger import TaggedTree, find_sense

# -- CAS trees ---------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    literal: str


@dataclass(frozen=True)
class Symbol:
    name: str
    special: bool = False  # Mathematica named character such as \[Alpha]


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["CasTree", ...] = ()


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^ = < >
    left: "CasTree"
    right: "CasTree"


@dataclass(frozen=True)
class Neg:
    operand: "CasTree"


CasTree = Union[Num, Symbol, Call, BinOp, Neg]


@dataclass(frozen=True)
class CasExpression:
    dialect: str
    tree: CasTree
    rendered: str

    @classmethod
    def of(cls, tree: CasTree, dialect: str) -> "CasExpression":
        return cls(dialect, tree, render_cas(tree, dialect))


def _check_dialect(dialect: str) -> None:
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}; expected one of {DIALECTS}")


# -- rendering ---------------------------------------------------------------

_PREC = {"=": 1, "<": 1, ">": 1, "+": 2, "-": 2, "*": 4, "/": 4, "^": 6}
_NEG_PREC = 3
_ATOM = 7


def _prec(t: CasTree) -> int:
    if isinstance(t, BinOp):
        return _PREC[t.op]
    if isinstance(t, Neg):
        return _NEG_PREC
    return _ATOM


def render_cas(tree: CasTree, dialect: str) -> str:
    _check_dialect(dialect)
    return _render(tree, dialect)


def _paren(t: CasTree, dialect: str, need: int) -> str:
    s = _render(t, dialect)
    return f"({s})" if _prec(t) < need else s


def _render(t: CasTree, d: str) -> str:
    if isinstance(t, Num):
        return t.literal
    if isinstance(t, Symbol):
        return f"\\[{t.name}]" if t.special else t.name
    if isinstance(t, Call):
        inner = (", " if d == "maple" else ",").join(_render(a, d) for a in t.args)
        return f"{t.name}({inner})" if d == "maple" else f"{t.name}[{inner}]"
    if isinstance(t, Neg):
        return "-" + _paren(t.operand, d, _NEG_PREC + 1)
    p = _PREC[t.op]
    if t.op == "^":
        return _paren(t.left, d, _ATOM) + "^" + _paren(t.right, d, p)
    left = _paren(t.left, d, p + (p == 1))
    right = _paren(t.right, d, p + 1)
    if t.op == "*":
        if d == "mathematica" and right.startswith("\\["):
            return left + right
        return f"{left} {right}"
    if t.op == "/":
        return f"{left}/{right}"
    op = "==" if (t.op == "=" and d == "mathematica") else t.op
    return f"{left} {op} {right}" if d == "maple" else f"{left}{op}{right}"


# -- parsing -----------------------------------------------------------------

_CAS_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:\.\d+)?)"
    r"|(?P<special>\\\[[A-Za-z]+\])"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>==|[-+*/^=<>(),\[\]])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int
    spaced: bool  # whitespace precedes the token


def _cas_tokens(source: str) -> list[_Tok]:
    out, pos, spaced = [], 0, False
    while pos < len(source):
        m = _CAS_TOKEN.match(source, pos)
        if m is None:
            raise CasSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "ws":
            spaced = True
        else:
            out.append(_Tok(kind, m.group(), pos, spaced))
            spaced = False
        pos = m.end()
    return out


class _CasParser:
    def __init__(self, source: str, dialect: str):
        self.src = source
        self.d = dialect
        self.toks = _cas_tokens(source)
        self.i = 0

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise CasSyntaxError("unexpected end of input", len(self.src))
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.text != text:
            where = tok.pos if tok else len(self.src)
            raise CasSyntaxError(f"expected {text!r}", where)
        return self.take()

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "op" and tok.text in texts

    def parse(self) -> CasTree:
        tree = self.rel()
        tok = self.peek()
        if tok is not None:
            raise CasSyntaxError(f"unexpected {tok.text!r}", tok.pos)
        return tree

    def rel(self) -> CasTree:
        left = self.add()
        rel_ops = ("==", "<", ">") if self.d == "mathematica" else ("=", "<", ">")
        if self.at(*rel_ops):
            op = self.take().text
            left = BinOp("=" if op == "==" else op, left, self.add())
        return left

    def add(self) -> CasTree:
        left = self.signed()
        while self.at("+", "-"):
            op = self.take().text
            left = BinOp(op, left, self.signed())
        return left

    def signed(self) -> CasTree:
        if self.at("-"):
            self.take()
            return Neg(self.signed())
        if self.at("+"):
            self.take()
            return self.signed()
        return self.mul()

    def _starts_atom(self) -> bool:
        tok = self.peek()
        return tok is not None and (tok.kind in ("num", "name", "special") or tok.text == "(")

    def mul(self) -> CasTree:
        left = self.power()
        while True:
            if self.at("*", "/"):
                op = self.take().text
                left = BinOp(op, left, self.power())
            elif self._starts_atom():
                left = BinOp("*", left, self.power())
            else:
                return left

    def power(self) -> CasTree:
        base = self.atom()
        if self.at("^"):
            self.take()
            return BinOp("^", base, self.exponent())
        return base

    def exponent(self) -> CasTree:
        if self.at("-"):
            self.take()
            return Neg(self.exponent())
        return self.power()

    def atom(self) -> CasTree:
        tok = self.take()
        if tok.kind == "num":
            return Num(tok.text)
        if tok.kind == "special":
            return Symbol(tok.text[2:-1], special=True)
        if tok.kind == "name":
            nxt = self.peek()
            opener = "(" if self.d == "maple" else "["
            if nxt is not None and nxt.text == opener and not nxt.spaced:
                return Call(tok.text, self.call_args(")" if opener == "(" else "]"))
            return Symbol(tok.text)
        if tok.text == "(":
            inner = self.rel()
            self.expect(")")
            return inner
        raise CasSyntaxError(f"unexpected {tok.text!r}", tok.pos)

    def call_args(self, closer: str) -> tuple[CasTree, ...]:
        self.take()  # opener
        args: list[CasTree] = []
        if self.at(closer):
            self.take()
            return ()
        while True:
            args.append(self.rel())
            if self.at(","):
                self.take()
                continue
            self.expect(closer)
            return tuple(args)


def parse_cas(source: str, dialect: str) -> CasExpression:
    """Read a Maple or Mathematica expression in the call/infix subset."""
    _check_dialect(dialect)
    tree = _CasParser(source, dialect).parse()
    return CasExpression(dialect, tree, render_cas(tree, dialect))


# -- pattern instantiation ---------------------------------------------------


def instantiate_pattern(pattern: TranslationPattern | str, params: list[str], args: list[str],
                        signature=None) -> str:
    """Substitute ``$pN``/``$aN`` placeholders.

    With a signature the list lengths must match it exactly; without one
    they must cover every placeholder the template uses.
    """
    template = pattern.template if isinstance(pattern, TranslationPattern) else pattern
    if signature is not None:
        if len(params) != signature.n_params or len(args) != signature.args:
            raise ArityMismatch(
                f"pattern {template!r} takes {signature.n_params} parameter(s) and {signature.args} "
                f"argument(s), got {len(params)} and {len(args)}"
            )

    def sub(m: re.Match) -> str:
        pool = params if m.group(1) == "p" else args
        idx = int(m.group(2))
        if idx >= len(pool):
            raise ArityMismatch(f"pattern {template!r} needs ${m.group(1)}{idx}")
        return pool[idx]

    return PLACEHOLDER.sub(sub, template)


# -- translation -------------------------------------------------------------

_MAPLE_GREEK = {"varepsilon": "varepsilon", "vartheta": "vartheta", "varphi": "varphi"}
_MMA_GREEK = {"varepsilon": "CurlyEpsilon", "vartheta": "CurlyTheta", "varphi": "CurlyPhi",
              "varrho": "CurlyRho", "varpi": "CurlyPi", "varsigma": "FinalSigma"}

_BUILTINS = {
    "maple": {"abs": "abs", "factorial": "factorial", "sqrt": "sqrt", "exp": "exp", "subscript": None},
    "mathematica": {"abs": "Abs", "factorial": "Factorial", "sqrt": "Sqrt", "exp": "Exp",
                    "subscript": "Subscript"},
}


@dataclass(frozen=True)
class TranslationWarning:
    kind: str  # "collision-rename" or "lossy-construct"
    message: str
    path: Path = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "path": list(self.path)}


@dataclass
class TranslationReport:
    output: CasExpression
    warnings: list[TranslationWarning] = field(default_factory=list)
    sense_trace: dict[Path, str] = field(default_factory=dict)
    variables: dict[str, str] = field(default_factory=dict)  # LaTeX symbol -> CAS name

    def to_dict(self) -> dict:
        return {
            "dialect": self.output.dialect,
            "output": self.output.rendered,
            "warnings": [w.to_dict() for w in self.warnings],
            "sense-trace": [{"path": list(p), "sense": s} for p, s in sorted(self.sense_trace.items())],
            "variables": dict(sorted(self.variables.items())),
        }


def variable_name(symbol: str, dialect: str) -> tuple[str, bool]:
    """Default CAS spelling of a variable: ``(name, is_special)``."""
    if not symbol.startswith("\\"):
        return symbol, False
    greek = symbol[1:]
    if dialect == "maple":
        return _MAPLE_GREEK.get(greek, greek), False
    if greek in _MMA_GREEK:
        return _MMA_GREEK[greek], True
    if greek[0].isupper():
        return "Capital" + greek, True
    return greek[0].upper() + greek[1:], True


def _powered_group(node: MathTree) -> bool:
    return (isinstance(node, Scripted) and node.subscript is None and node.superscript is not None
            and isinstance(node.base, Fenced) and node.base.delims == "()")


class _Translator:
    def __init__(self, tagged: TaggedTree, lexicon: Lexicon, dialect: str):
        self.tagged = tagged
        self.lex = lexicon
        self.d = dialect
        self.names = _BUILTINS[dialect]
        self.warnings: list[TranslationWarning] = []
        self.trace: dict[Path, str] = {}
        self.variables: dict[str, str] = {}

    # senses

    def sense_of(self, path: Path) -> Sense:
        sid = self.tagged.decided_sense(path)
        symbol = self.tagged.symbol(path)
        sense = find_sense(self.lex, symbol, sid)
        if sense is None:
            raise UnknownSense(sid)
        self.trace[path] = sid
        return sense

    def pattern(self, sense: Sense) -> TranslationPattern:
        pat = sense.translations.get(self.d)
        if pat is None:
            raise MissingPattern(sense.id, self.d)
        return pat

    def from_pattern(self, sense: Sense, params: list[CasTree], args: list[CasTree]) -> CasTree:
        text = instantiate_pattern(self.pattern(sense), [self.arg_text(p) for p in params],
                                   [self.arg_text(a) for a in args], sense.signature)
        return parse_cas(text, self.d).tree

    def arg_text(self, t: CasTree) -> str:
        s = render_cas(t, self.d)
        return s if _prec(t) == _ATOM else f"({s})"

    def call(self, key: str, *args: CasTree) -> CasTree:
        return Call(self.names[key], tuple(args))

    # variables

    def variable(self, path: Path, sense: Sense, symbol: str) -> CasTree:
        pat = sense.translations.get(self.d)
        if pat is not None:
            tree = parse_cas(pat.template, self.d).tree
            collisions = set(pat.reserved_collisions)
        else:
            name, special = variable_name(symbol, self.d)
            tree, collisions = Symbol(name, special), set()
        if isinstance(tree, Symbol) and not tree.special:
            if tree.name in self.lex.reserved_for(self.d) or tree.name in collisions:
                renamed = tree.name + "_"
                self.warnings.append(TranslationWarning(
                    "collision-rename", f"{tree.name} is reserved in {self.d}; renamed to {renamed}", path))
                tree = Symbol(renamed)
        self.variables[symbol] = render_cas(tree, self.d)
        return tree

    def subscript_name(self, node: MathTree, path: Path) -> str:
        if isinstance(node, Number):
            return node.literal
        if isinstance(node, Identifier):
            sense = self.sense_of(path)
            if sense.role != "variable":
                raise UnsupportedConstruct("Maple subscripts must be variables or digits", path)
            return variable_name(node.symbol, "maple")[0]
        raise UnsupportedConstruct("compound subscript on a variable", path)

    # nodes

    def is_function_head(self, node: MathTree, path: Path) -> bool:
        if isinstance(node, Scripted):
            node, path = node.base, path + (0,)
        if not isinstance(node, Identifier) or not self.tagged.decided.get(path):
            return False
        sense = find_sense(self.lex, node.symbol, self.tagged.decided_sense(path))
        return sense is not None and sense.role in ("function", "operator")

    def conv(self, node: MathTree, path: Path) -> CasTree:
        if isinstance(node, Number):
            return Num(node.literal)
        if isinstance(node, Identifier):
            sense = self.sense_of(path)
            if sense.role == "variable":
                return self.variable(path, sense, node.symbol)
            if sense.role == "constant":
                return self.from_pattern(sense, [], [])
            raise UnsupportedConstruct(f"function {node.symbol} is not applied to an argument", path)
        if isinstance(node, BinaryOp):
            op = {"\\cdot": "*", "\\times": "*"}.get(node.op, node.op)
            return BinOp(op, self.conv(node.left, path + (0,)), self.conv(node.right, path + (1,)))
        if isinstance(node, UnaryOp):
            inner = self.conv(node.operand, path + (0,))
            return Neg(inner) if node.op == "-" else inner
        if isinstance(node, Frac):
            return BinOp("/", self.conv(node.num, path + (0,)), self.conv(node.den, path + (1,)))
        if isinstance(node, Sqrt):
            body = self.conv(node.body, path + (1,))
            if node.degree is None:
                return self.call("sqrt", body)
            return BinOp("^", body, BinOp("/", Num("1"), self.conv(node.degree, path + (0,))))
        if isinstance(node, Fenced):
            if isinstance(node.body, Sequence) and node.body.is_list:
                raise UnsupportedConstruct("tuple outside a function call", path)
            body = self.conv(node.body, path + (0,))
            if node.delims == "||":
                return self.call("abs", body)
            if node.delims in ("()", "[]"):
                return body
            raise UnsupportedConstruct(f"interval-style delimiters {node.delims}", path)
        if isinstance(node, SemanticMacro):
            sense = self.sense_of(path)
            n = len(node.params)
            params = [self.conv(p, path + (i,)) for i, p in enumerate(node.params)]
            args = [self.conv(a, path + (n + i,)) for i, a in enumerate(node.args)]
            return self.from_pattern(sense, params, args)
        if isinstance(node, Scripted):
            return self.scripted(node, path)
        if isinstance(node, Sequence):
            if node.is_list:
                raise UnsupportedConstruct("comma-separated list outside a function call", path)
            return self.sequence(node, path)
        if isinstance(node, Operator):
            raise UnsupportedConstruct(f"stray operator {node.symbol}", path)
        raise TypeError(f"not a MathTree node: {node!r}")

    def scripted(self, node: Scripted, path: Path) -> CasTree:
        base = node.base
        if self.is_function_head(node, path):
            raise UnsupportedConstruct("function is not applied to an argument", path)
        if node.subscript is not None:
            if not isinstance(base, Identifier):
                raise UnsupportedConstruct("subscript on a compound base", path)
            sense = self.sense_of(path + (0,))
            if sense.role != "variable":
                raise UnsupportedConstruct(f"subscripted {sense.role} {base.symbol}", path)
            if self.d == "maple":
                head = self.variable(path + (0,), sense, base.symbol)
                name = render_cas(head, "maple") + "__" + self.subscript_name(node.subscript, path + (1,))
                head = Symbol(name)
            else:
                head = self.call("subscript", self.variable(path + (0,), sense, base.symbol),
                                 self.conv(node.subscript, path + (1,)))
            self.variables[render(Scripted(base, node.subscript))] = render_cas(head, self.d)
        else:
            if isinstance(base, Identifier):
                sense = self.sense_of(path + (0,))
                if sense.id == "const:EulerNumber" and node.superscript is not None:
                    return self.call("exp", self.conv(node.superscript, path + (2,)))
            head = self.conv(base, path + (0,))
        if node.superscript is None:
            return head
        return BinOp("^", head, self.conv(node.superscript, path + (2,)))

    def application(self, head: MathTree, head_path: Path, arg: MathTree, arg_path: Path) -> CasTree:
        scripted = head if isinstance(head, Scripted) else None
        ident_path = head_path + (0,) if scripted else head_path
        ident = scripted.base if scripted else head
        sense = self.sense_of(ident_path)
        sig = sense.signature
        params: list[CasTree] = []
        power = None
        if scripted is not None and scripted.superscript is not None:
            sup = scripted.superscript
            if sig.sup:
                inner = sup.body if isinstance(sup, Fenced) and sup.delims == "()" else sup
                inner_path = head_path + (2, 0) if inner is not sup else head_path + (2,)
                params += self.items(inner, inner_path)
            else:
                power = self.conv(sup, head_path + (2,))
        if scripted is not None and scripted.subscript is not None:
            if not sig.sub:
                raise UnsupportedConstruct(f"{ident.symbol} takes no subscript", head_path)
            params += self.items(scripted.subscript, head_path + (1,))
        outer = None
        if _powered_group(arg):
            # \cos(x)^2 squares the value, not the argument
            outer = self.conv(arg.superscript, arg_path + (2,))
            arg, arg_path = arg.base, arg_path + (0,)
        if isinstance(arg, Fenced) and arg.delims == "()":
            args = self.items(arg.body, arg_path + (0,))
        else:
            args = [self.conv(arg, arg_path)]
        try:
            out = self.from_pattern(sense, params, args)
        except ArityMismatch as exc:
            raise ArityMismatch(f"{ident.symbol}: {exc}", ident.span[0]) from None
        for exp in (power, outer):
            if exp is not None:
                out = BinOp("^", out, exp)
        return out

    def items(self, node: MathTree, path: Path) -> list[CasTree]:
        if isinstance(node, Sequence) and node.is_list:
            out = []
            for i, child in enumerate(node.children):
                if isinstance(child, Operator) and child.symbol in ",;":
                    continue
                out.append(self.conv(child, path + (i,)))
            return out
        return [self.conv(node, path)]

    def sequence(self, node: Sequence, path: Path) -> CasTree:
        factors: list[CasTree] = []
        kids = node.children
        i = 0
        while i < len(kids):
            child, cpath = kids[i], path + (i,)
            if isinstance(child, Operator):
                if child.symbol == "!" and factors:
                    factors[-1] = self.call("factorial", factors[-1])
                elif child.symbol == "." and i == len(kids) - 1:
                    self.warnings.append(TranslationWarning("lossy-construct", "trailing period dropped", cpath))
                else:
                    raise UnsupportedConstruct(f"operator {child.symbol} inside a product", cpath)
                i += 1
                continue
            if self.is_function_head(child, cpath):
                if i + 1 >= len(kids) or isinstance(kids[i + 1], Operator):
                    raise UnsupportedConstruct("function is not applied to an argument", cpath)
                factors.append(self.application(child, cpath, kids[i + 1], path + (i + 1,)))
                i += 2
                continue
            factors.append(self.conv(child, cpath))
            i += 1
        if not factors:
            raise UnsupportedConstruct("empty product", path)
        out = factors[0]
        for f in factors[1:]:
            out = BinOp("*", out, f)
        return out


def translate(tagged: TaggedTree, dialect: str, lexicon: Lexicon | None = None) -> TranslationReport:
    """Translate a fully decided tree; undecided symbols abort with :class:`UndecidedNode`."""
    _check_dialect(dialect)
    lexicon = default_lexicon() if lexicon is None else lexicon
    pending = tagged.undecided_paths()
    if pending:
        raise UndecidedNode(
            (p, tagged.symbol(p), node_at(tagged.tree, p).span) for p in pending
        )
    t = _Translator(tagged, lexicon, dialect)
    tree = t.conv(tagged.tree, ())
    return TranslationReport(CasExpression.of(tree, dialect), t.warnings, t.trace, t.variables)
