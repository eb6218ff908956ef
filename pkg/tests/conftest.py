from pathlib import Path

import pytest

from mathsem.evalharness import bundled_corpus_path, load_gold
from mathsem.lexicon import default_lexicon

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "mathsem" / "data" / "fixtures"
JACOBI_LATEX = r"P_n^{(\alpha,\beta)}(\cos(a\Theta))"
JACOBI_MAPLE = "JacobiP(n, alpha, beta, cos(a Theta))"
JACOBI_MATHEMATICA = r"JacobiP[n,\[Alpha],\[Beta],Cos[a\[CapitalTheta]]]"
JACOBI_MACRO = r"\JacobiP{\alpha}{\beta}{n}@{\cos@{a\Theta}}"


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def macros(lexicon):
    return lexicon.macro_signatures()


@pytest.fixture(scope="session")
def dlmf_text():
    return (FIXTURES / "dlmf_1_5.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def gold_cases(lexicon):
    return load_gold(bundled_corpus_path(), lexicon)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        terminalreporter.write_line(verdicts[number])
