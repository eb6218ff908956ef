import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import JACOBI_MACRO, JACOBI_LATEX
from mathsem.errors import (
    ArityMismatch,
    DanglingScript,
    DoubleScript,
    EmptyGroup,
    IllegalCharacter,
    InvalidPath,
    MathSemError,
    NestingTooDeep,
    UnbalancedDelimiter,
    UnterminatedControlSeq,
)
from mathsem.mst import (
    BinaryOp,
    Fenced,
    Frac,
    Identifier,
    Number,
    Scripted,
    SemanticMacro,
    Sequence,
    Sqrt,
    TokenKind,
    UnaryOp,
    node_at,
    parse_latex,
    render,
    tokenize,
    walk,
)

K = TokenKind


def kinds(src):
    return [(t.kind, t.value) for t in tokenize(src)]


class TestTokenize:
    def test_control_sequence(self):
        assert kinds(r"\gamma") == [(K.CONTROL, "gamma")]

    def test_simple(self):
        assert kinds("x+1") == [(K.LETTER, "x"), (K.OPERATOR, "+"), (K.DIGIT, "1")]

    def test_generic_jacobi_prefix_and_count(self):
        toks = tokenize(JACOBI_LATEX)
        # hand count: P _ n ^ { ( \alpha , \beta ) } ( \cos ( a \Theta ) )
        assert len(toks) == 18
        assert [(t.kind, t.value) for t in toks[:8]] == [
            (K.LETTER, "P"), (K.SUB, "_"), (K.LETTER, "n"), (K.SUP, "^"),
            (K.GROUP_OPEN, "{"), (K.PAREN_OPEN, "("), (K.CONTROL, "alpha"), (K.COMMA, ","),
        ]

    def test_spans_cover_non_whitespace(self):
        src = r"  \frac{a }{ b}+ x_1 "
        toks = tokenize(src)
        covered = set()
        last_end = -1
        for t in toks:
            start, end = t.span
            assert start >= last_end and end > start
            last_end = end
            covered.update(range(start, end))
        assert covered == {i for i, ch in enumerate(src) if not ch.isspace()}

    def test_thin_space_is_dropped(self):
        assert kinds(r"a\,b") == [(K.LETTER, "a"), (K.LETTER, "b")]

    def test_bytes_input(self):
        assert kinds(b"x") == [(K.LETTER, "x")]

    @pytest.mark.parametrize("src,pos", [("x#y", 1), ("α", 0), ("a\\%", 1)])
    def test_illegal_character(self, src, pos):
        with pytest.raises(IllegalCharacter) as info:
            tokenize(src)
        assert info.value.position == pos

    def test_lone_backslash(self):
        with pytest.raises(UnterminatedControlSeq):
            tokenize("x+\\")


class TestParse:
    def test_identifier(self):
        assert parse_latex("x") == Identifier("x")

    def test_juxtaposition_is_sequence(self):
        assert parse_latex("ab") == Sequence((Identifier("a"), Identifier("b")))

    def test_scripts_bind_to_previous_atom(self):
        assert parse_latex("ab^2") == Sequence((Identifier("a"), Scripted(Identifier("b"), None, Number("2"))))

    def test_application_deferred(self):
        tree = parse_latex("f(x)")
        assert tree == Sequence((Identifier("f"), Fenced("()", Identifier("x"))))

    def test_precedence(self):
        tree = parse_latex("a+b c=d")
        assert tree == BinaryOp("=", BinaryOp("+", Identifier("a"), Sequence((Identifier("b"), Identifier("c")))),
                                Identifier("d"))

    def test_unary_minus(self):
        assert parse_latex("-x") == UnaryOp("-", Identifier("x"))

    def test_frac_and_sqrt(self):
        assert parse_latex(r"\frac{1}{x}") == Frac(Number("1"), Identifier("x"))
        assert parse_latex(r"\sqrt[3]{x}") == Sqrt(Identifier("x"), Number("3"))

    def test_absolute_value(self):
        assert parse_latex("|x|") == Fenced("||", Identifier("x"))

    def test_multi_digit_number(self):
        assert parse_latex("12.5") == Number("12.5")

    def test_generic_jacobi_structure(self):
        tree = parse_latex(JACOBI_LATEX)
        head, arg = tree.children
        assert head.base == Identifier("P") and head.subscript == Identifier("n")
        assert isinstance(head.superscript, Fenced) and head.superscript.delims == "()"
        assert isinstance(arg, Fenced)

    def test_known_macro(self, macros):
        tree = parse_latex(JACOBI_MACRO, macros)
        assert isinstance(tree, SemanticMacro) and tree.name == "JacobiP"
        assert [render(p) for p in tree.params] == [r"\alpha", r"\beta", "n"]

    def test_macro_arity(self, macros):
        with pytest.raises(ArityMismatch):
            parse_latex(r"\JacobiP{\alpha}{\beta}@{x}", macros)

    @pytest.mark.parametrize("src,exc", [
        ("(x", UnbalancedDelimiter),
        ("x)", UnbalancedDelimiter),
        ("{x", UnbalancedDelimiter),
        ("^x", DanglingScript),
        ("_x", DanglingScript),
        ("x^", DanglingScript),
        ("x^1^2", DoubleScript),
        ("{}", EmptyGroup),
        (r"\left( x", UnbalancedDelimiter),
    ])
    def test_errors(self, src, exc):
        with pytest.raises(exc):
            parse_latex(src)

    def test_deep_nesting_is_an_error_not_a_crash(self):
        with pytest.raises(NestingTooDeep):
            parse_latex("{" * 3000 + "x" + "}" * 3000)

    def test_spans_point_into_source(self):
        src = r"x+\alpha"
        tree = parse_latex(src)
        assert src[slice(*tree.right.span)] == r"\alpha"

    def test_node_at(self):
        tree = parse_latex("a+b")
        assert node_at(tree, (1,)) == Identifier("b")
        with pytest.raises(InvalidPath):
            node_at(tree, (5,))


class TestRender:
    @pytest.mark.parametrize("src,canonical", [
        (JACOBI_LATEX, JACOBI_LATEX),
        ("x^{2}", "x^2"),
        ("{a+b}c", "{a+b}c"),
        (r"\frac 1 x", r"\frac{1}{x}"),
        (r"\alpha x", r"\alpha x"),
        ("1{2}", "1{2}"),
    ])
    def test_canonical(self, src, canonical):
        assert render(parse_latex(src)) == canonical

    @pytest.mark.parametrize("src", ["|{x}{|x|}|", "|{|x|}|", r"\sqrt{|-{|x|}|}"])
    def test_nested_bars_stay_braced(self, src):
        tree = parse_latex(src)
        assert parse_latex(render(tree)) == tree

    def test_macro_round_trip(self, macros):
        tree = parse_latex(JACOBI_MACRO, macros)
        assert parse_latex(render(tree), macros) == tree


# -- property: render is a right inverse of parse -----------------------------

_leaves = st.sampled_from(["x", "y", "n", r"\alpha", r"\Theta", "1", "2", "3.5", r"\pi"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-=<"), children).map(lambda t: f"{t[0]}{t[1]}{t[2]}"),
        st.tuples(children, children).map(lambda t: f"{{{t[0]}}}{{{t[1]}}}"),
        st.tuples(children, children).map(lambda t: f"{{{t[0]}}}^{{{t[1]}}}"),
        st.tuples(children, children).map(lambda t: f"{{{t[0]}}}_{{{t[1]}}}"),
        st.tuples(children, children).map(lambda t: rf"\frac{{{t[0]}}}{{{t[1]}}}"),
        children.map(lambda c: rf"\sqrt{{{c}}}"),
        children.map(lambda c: f"({c})"),
        children.map(lambda c: f"|{c}|"),
        children.map(lambda c: f"-{c}"),
        st.tuples(children, children).map(lambda t: f"f({t[0]},{t[1]})"),
    )


latex_exprs = st.recursive(_leaves, _combine, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(latex_exprs)
def test_render_parse_round_trip(src):
    # nested bars such as ||x|| are ambiguous and may be rejected
    try:
        tree = parse_latex(src)
    except MathSemError:
        assume(False)
    again = parse_latex(render(tree))
    assert again == tree
    assert render(again) == render(tree)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(list("xy12+-^_{}()[]|,@\\ ab=") + [r"\alpha", r"\frac", r"\sqrt"]), max_size=24)
       .map("".join))
def test_parse_never_crashes(src):
    try:
        parse_latex(src)
    except MathSemError:
        pass


def test_walk_visits_every_node_once():
    tree = parse_latex(r"\frac{a+b}{c^2}")
    paths = [p for p, _ in walk(tree)]
    assert len(paths) == len(set(paths)) == 7

