import time

import pytest
from hypothesis import given, settings, strategies as st

from conftest import JACOBI_MACRO, JACOBI_LATEX, JACOBI_MAPLE, JACOBI_MATHEMATICA
from mathsem.errors import ArityMismatch, CasSyntaxError, UndecidedNode
from mathsem.lexicon import Signature
from mathsem.mst import parse_latex
from mathsem.pipeline import semantify
from mathsem.tagger import tag
from mathsem.translator import (
    BinOp,
    Call,
    Neg,
    Num,
    Symbol,
    instantiate_pattern,
    parse_cas,
    render_cas,
    translate,
    variable_name,
)


def tr(src, dialect, lexicon, override=None):
    tagged = tag(parse_latex(src, lexicon.macro_signatures()), lexicon)
    if override:
        tagged = tagged.override(override)
    return translate(tagged, dialect, lexicon)


@pytest.mark.parametrize("dialect,expected", [("maple", JACOBI_MAPLE), ("mathematica", JACOBI_MATHEMATICA)])
def test_generic_jacobi(lexicon, dialect, expected):
    start = time.perf_counter()
    out = translate(semantify(JACOBI_LATEX, lexicon), dialect, lexicon).output.rendered
    assert out == expected
    assert time.perf_counter() - start < 1.0


@pytest.mark.parametrize("dialect,expected", [("maple", JACOBI_MAPLE), ("mathematica", JACOBI_MATHEMATICA)])
def test_semantic_macro_gives_same_output(lexicon, dialect, expected):
    assert tr(JACOBI_MACRO, dialect, lexicon).output.rendered == expected


@pytest.mark.parametrize("src,maple,mathematica", [
    (r"\gamma", "gamma", "EulerGamma"),
    ("e", "exp(1)", "E"),
    ("e^{x}", "exp(x)", "Exp[x]"),
    (r"\pi", "Pi", "Pi"),
    (r"\Gamma(z)", "GAMMA(z)", "Gamma[z]"),
    (r"\sqrt{x}+|y|", "sqrt(x) + abs(y)", "Sqrt[x]+Abs[y]"),
    (r"\sqrt[3]{x}", "x^(1/3)", "x^(1/3)"),
    ("n!", "factorial(n)", "Factorial[n]"),
    (r"\frac{x_1}{2}", "x__1/2", "Subscript[x,1]/2"),
    (r"\alpha-\beta", "alpha - beta", r"\[Alpha]-\[Beta]"),
    ("x^{-1}", "x^(-1)", "x^(-1)"),
    (r"\cos(x)^2", "cos(x)^2", "Cos[x]^2"),
])
def test_translations(lexicon, src, maple, mathematica):
    assert tr(src, "maple", lexicon).output.rendered == maple
    assert tr(src, "mathematica", lexicon).output.rendered == mathematica


def test_variable_gamma_collides_in_maple(lexicon):
    report = tr(r"\gamma", "maple", lexicon, {(): "var:gamma"})
    assert report.output.rendered == "gamma_"
    assert [w.kind for w in report.warnings] == ["collision-rename"]
    assert report.variables == {"\\gamma": "gamma_"}


def test_variable_gamma_is_plain_in_mathematica(lexicon):
    report = tr(r"\gamma", "mathematica", lexicon, {(): "var:gamma"})
    assert report.output.rendered == r"\[Gamma]"
    assert report.warnings == []


def test_trailing_period_is_lossy(lexicon):
    report = tr("x+1.", "maple", lexicon)
    assert report.output.rendered == "x + 1"
    assert [w.kind for w in report.warnings] == ["lossy-construct"]


def test_undecided_nodes_listed(lexicon):
    with pytest.raises(UndecidedNode) as info:
        tr("E=mc^2", "maple", lexicon)
    assert [sym for _, sym, _ in info.value.nodes] == ["E", "m", "c"]
    spans = [span for _, _, span in info.value.nodes]
    assert spans == [(0, 1), (2, 3), (3, 4)]


def test_unknown_dialect(lexicon):
    with pytest.raises(ValueError):
        tr("x", "maxima", lexicon)


@pytest.mark.parametrize("symbol,dialect,expected", [
    (r"\alpha", "maple", ("alpha", False)),
    (r"\Theta", "mathematica", ("CapitalTheta", True)),
    (r"\varepsilon", "mathematica", ("CurlyEpsilon", True)),
    ("x", "mathematica", ("x", False)),
])
def test_variable_name(symbol, dialect, expected):
    assert variable_name(symbol, dialect) == expected


def test_instantiate_pattern():
    sig = Signature(params=3, args=1)
    assert instantiate_pattern("JacobiP($p2, $p0, $p1, $a0)", ["a", "b", "n"], ["x"], sig) == "JacobiP(n, a, b, x)"
    with pytest.raises(ArityMismatch):
        instantiate_pattern("JacobiP($p2, $p0, $p1, $a0)", ["a", "b"], ["x"], sig)
    with pytest.raises(ArityMismatch):
        instantiate_pattern("f($a1)", [], ["x"])


@pytest.mark.parametrize("src,dialect,tree", [
    ("f(x, y)", "maple", Call("f", (Symbol("x"), Symbol("y")))),
    ("f (x)", "maple", BinOp("*", Symbol("f"), Symbol("x"))),
    ("f[x,y]", "mathematica", Call("f", (Symbol("x"), Symbol("y")))),
    (r"a\[Alpha]", "mathematica", BinOp("*", Symbol("a"), Symbol("Alpha", True))),
    ("a == b", "mathematica", BinOp("=", Symbol("a"), Symbol("b"))),
    ("2^-x", "maple", BinOp("^", Num("2"), Neg(Symbol("x")))),
    ("2^3^4", "maple", BinOp("^", Num("2"), BinOp("^", Num("3"), Num("4")))),
    ("a-b-c", "maple", BinOp("-", BinOp("-", Symbol("a"), Symbol("b")), Symbol("c"))),
    ("-x^2", "maple", Neg(BinOp("^", Symbol("x"), Num("2")))),
])
def test_parse_cas(src, dialect, tree):
    assert parse_cas(src, dialect).tree == tree


@pytest.mark.parametrize("src,dialect", [("f(x", "maple"), ("x +", "maple"), ("a ? b", "maple"),
                                         ("f[x", "mathematica"), ("(x))", "maple")])
def test_parse_cas_errors(src, dialect):
    with pytest.raises(CasSyntaxError):
        parse_cas(src, dialect)


_names = st.sampled_from(["x", "y", "a1", "Pi", "alpha"])
_cas_leaves = st.one_of(
    _names.map(Symbol),
    st.sampled_from(["Alpha", "CapitalTheta"]).map(lambda n: Symbol(n, True)),
    st.sampled_from(["0", "2", "3.5", "10"]).map(Num),
)


def _cas_combine(children):
    arith = st.sampled_from(["+", "-", "*", "/", "^"])
    return st.one_of(
        st.tuples(arith, children, children).map(lambda t: BinOp(*t)),
        children.map(Neg),
        st.tuples(st.sampled_from(["f", "JacobiP"]), st.lists(children, min_size=1, max_size=3))
        .map(lambda t: Call(t[0], tuple(t[1]))),
    )


cas_trees = st.recursive(_cas_leaves, _cas_combine, max_leaves=10)


@settings(max_examples=300, deadline=None)
@given(cas_trees, st.sampled_from(["maple", "mathematica"]), st.booleans())
def test_cas_render_parse_round_trip(tree, dialect, relation):
    if relation:
        tree = BinOp("=", tree, Symbol("y"))
    text = render_cas(tree, dialect)
    assert parse_cas(text, dialect).tree == tree
