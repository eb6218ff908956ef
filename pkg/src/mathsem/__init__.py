"""Parse LaTeX formulae, disambiguate their symbols, translate to Maple or Mathematica, verify numerically."""

__version__ = "0.1.0"

from .errors import MathSemError
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .mst import parse_latex, render, tokenize
from .numeric import check_equivalence, eval_tree, jacobi_p, probe_branch_cuts
from .pipeline import analyze_document, semantify
from .tagger import tag
from .translator import parse_cas, translate

__all__ = [
    "MathSemError", "Lexicon", "default_lexicon", "load_lexicon", "parse_latex", "render", "tokenize",
    "check_equivalence", "eval_tree", "jacobi_p", "probe_branch_cuts", "analyze_document", "semantify",
    "tag", "parse_cas", "translate",
]
