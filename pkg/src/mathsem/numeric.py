"""Complex evaluation of semantic and CAS trees, equivalence sampling, branch-cut probing.

All multi-valued functions use principal branches: ``log`` is cut along the
negative real axis, ``sqrt`` is ``cmath.sqrt`` and ``z**w`` is
``exp(w log z)`` unless ``w`` is an integer.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence as Seq, Union

from .errors import (
    DomainError,
    NegativeDegree,
    NumericError,
    PoleError,
    UnboundSymbol,
    UnsupportedFunction,
)
from .lexicon import Lexicon, default_lexicon
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
    children,
    render,
)
from .tagger import TaggedTree, find_sense
from .translator import BinOp, Call, CasExpression, Neg, Num, Symbol, _powered_group, render_cas

Binding = Mapping[str, complex]

# -- kernels -----------------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z: complex) -> complex:
    """Lanczos approximation (g=7, n=9) with reflection for Re z < 1/2."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f"gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma(1 - z))
    z -= 1
    x = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        x += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def _as_degree(n) -> int:
    if isinstance(n, complex):
        if n.imag != 0:
            raise DomainError("polynomial degree must be real")
        n = n.real
    if n != math.floor(n):
        raise DomainError(f"polynomial degree must be an integer, got {n}")
    n = int(n)
    if n < 0:
        raise NegativeDegree(f"degree {n} is negative")
    return n


def jacobi_p(n, alpha: complex, beta: complex, x: complex) -> complex:
    """Jacobi polynomial by the standard three-term recurrence in the degree."""
    n = _as_degree(n)
    a, b, x = complex(alpha), complex(beta), complex(x)
    p_prev = 1 + 0j
    if n == 0:
        return p_prev
    p = (a + 1) + (a + b + 2) * (x - 1) / 2
    for k in range(2, n + 1):
        s = 2 * k + a + b
        lead = 2 * k * (k + a + b) * (s - 2)
        if lead == 0:
            raise DomainError(f"recurrence degenerates at degree {k} for alpha+beta={a + b}")
        c1 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c2 = 2 * (k + a - 1) * (k + b - 1) * s
        p_prev, p = p, (c1 * p - c2 * p_prev) / lead
    return p


def _on_axis(z: complex) -> complex:
    # cmath reads -0.0 as "below the cut"; principal values put the cut's
    # image on the upper side, so drop the sign of a zero imaginary part
    z = complex(z)
    return complex(z.real, 0.0) if z.imag == 0 else z


def _log(z: complex) -> complex:
    if z == 0:
        raise PoleError("log(0)")
    return cmath.log(_on_axis(z))


def _sqrt(z: complex) -> complex:
    return cmath.sqrt(_on_axis(z))


def power(z: complex, w: complex) -> complex:
    z, w = complex(z), complex(w)
    if w.imag == 0 and w.real == math.floor(w.real) and abs(w.real) <= 1 << 20:
        k = int(w.real)
        if z == 0 and k < 0:
            raise PoleError("0 raised to a negative power")
        return z ** k
    if z == 0:
        if w.real > 0:
            return 0j
        raise PoleError("0 raised to a non-positive power")
    return cmath.exp(w * _log(z))


def _divide(a: complex, b: complex) -> complex:
    if b == 0:
        raise PoleError("division by zero")
    return a / b


def _factorial(z: complex) -> complex:
    return gamma(z + 1)


def _legendre(n, x):
    return jacobi_p(n, 0, 0, x)


KERNELS: dict[str, Callable[..., complex]] = {
    "exp": cmath.exp,
    "log": _log,
    "sqrt": _sqrt,
    "sin": cmath.sin,
    "cos": cmath.cos,
    "tan": cmath.tan,
    "gamma": gamma,
    "jacobi": jacobi_p,
    "legendre": _legendre,
    "abs": lambda z: complex(abs(z)),
    "factorial": _factorial,
}

CONSTANTS = {"pi": complex(math.pi), "e": complex(math.e), "euler-gamma": complex(0.5772156649015329)}

_SENSE_KERNELS = {
    "func:exp": "exp", "func:ln": "log", "func:log": "log", "func:sin": "sin", "func:cos": "cos",
    "func:tan": "tan", "func:Gamma": "gamma", "dlmf:EulerGamma": "gamma", "dlmf:JacobiP": "jacobi",
    "dlmf:LegendrePolynomial": "legendre",
}
_SENSE_CONSTANTS = {"const:pi": "pi", "const:EulerNumber": "e", "const:EulerMascheroni": "euler-gamma"}
# used when a plain MathTree is evaluated without decided senses
_LATEX_CONSTANTS = {"\\pi": "pi", "e": "e", "\\gamma": "euler-gamma"}

_CAS_FUNCTIONS = {
    "maple": {"exp": "exp", "ln": "log", "log": "log", "sqrt": "sqrt", "sin": "sin", "cos": "cos",
              "tan": "tan", "GAMMA": "gamma", "JacobiP": "jacobi", "LegendreP": "legendre",
              "abs": "abs", "factorial": "factorial"},
    "mathematica": {"Exp": "exp", "Log": "log", "Sqrt": "sqrt", "Sin": "sin", "Cos": "cos", "Tan": "tan",
                    "Gamma": "gamma", "JacobiP": "jacobi", "LegendreP": "legendre", "Abs": "abs",
                    "Factorial": "factorial"},
}
_CAS_CONSTANTS = {
    "maple": {"Pi": "pi", "gamma": "euler-gamma"},
    "mathematica": {"Pi": "pi", "E": "e", "EulerGamma": "euler-gamma"},
}


def _apply(kernel: str, args: Seq[complex]) -> complex:
    fn = KERNELS[kernel]
    try:
        return complex(fn(*args))
    except TypeError:
        raise DomainError(f"{kernel} called with {len(args)} argument(s)") from None
    except ZeroDivisionError:
        raise PoleError(f"{kernel} hit a pole") from None
    except OverflowError:
        raise NumericError(f"{kernel} overflowed") from None
    except ValueError as exc:
        raise DomainError(f"{kernel}: {exc}") from None


# -- semantic trees ----------------------------------------------------------


class _SemanticEvaluator:
    def __init__(self, tagged: TaggedTree | None, tree: MathTree, bindings: Binding, lexicon: Lexicon):
        self.tagged = tagged
        self.tree = tree
        self.env = bindings
        self.lex = lexicon

    def sense(self, node: Identifier | SemanticMacro, path: Path):
        symbol = node.symbol if isinstance(node, Identifier) else "\\" + node.name
        sid = self.tagged.decided_sense(path) if self.tagged is not None else None
        if sid is None:
            return None
        return find_sense(self.lex, symbol, sid)

    def kernel_for(self, node: Identifier, path: Path) -> str | None:
        sense = self.sense(node, path)
        if sense is not None:
            if sense.role not in ("function", "operator"):
                return None
            if sense.id not in _SENSE_KERNELS:
                raise UnsupportedFunction(sense.id)
            return _SENSE_KERNELS[sense.id]
        if self.tagged is None and node.symbol.startswith("\\"):
            senses = self.lex.lookup(node.symbol) or []
            for s in senses:
                if s.role == "function" and s.id in _SENSE_KERNELS:
                    return _SENSE_KERNELS[s.id]
        return None

    def value(self, node: MathTree, path: Path) -> complex:
        if isinstance(node, Number):
            return complex(float(node.literal))
        if isinstance(node, Identifier):
            return self.identifier(node, path)
        if isinstance(node, BinaryOp):
            a, b = self.value(node.left, path + (0,)), self.value(node.right, path + (1,))
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op in ("*", "\\cdot", "\\times"):
                return a * b
            if node.op == "/":
                return _divide(a, b)
            raise UnsupportedFunction(f"relation {node.op}")
        if isinstance(node, UnaryOp):
            v = self.value(node.operand, path + (0,))
            return -v if node.op == "-" else v
        if isinstance(node, Frac):
            return _divide(self.value(node.num, path + (0,)), self.value(node.den, path + (1,)))
        if isinstance(node, Sqrt):
            body = self.value(node.body, path + (1,))
            if node.degree is None:
                return _apply("sqrt", [body])
            return power(body, _divide(1, self.value(node.degree, path + (0,))))
        if isinstance(node, Fenced):
            body = self.value(node.body, path + (0,))
            return _apply("abs", [body]) if node.delims == "||" else body
        if isinstance(node, Scripted):
            return self.scripted(node, path)
        if isinstance(node, SemanticMacro):
            sense = self.sense(node, path)
            sid = sense.id if sense is not None else next(
                (s.id for s in self.lex.lookup("\\" + node.name) or [] if s.role == "function"), node.name)
            if sid not in _SENSE_KERNELS:
                raise UnsupportedFunction(sid)
            n = len(node.params)
            params = [self.value(p, path + (i,)) for i, p in enumerate(node.params)]
            args = [self.value(a, path + (n + i,)) for i, a in enumerate(node.args)]
            return self.call(_SENSE_KERNELS[sid], sid, params, args)
        if isinstance(node, Sequence):
            if node.is_list:
                raise UnsupportedFunction("tuple")
            return self.sequence(node, path)
        raise UnsupportedFunction(type(node).__name__)

    def call(self, kernel: str, sid: str, params: list[complex], args: list[complex]) -> complex:
        if kernel == "jacobi":
            # parameter order: alpha, beta, then degree
            if len(params) != 3 or len(args) != 1:
                raise DomainError("JacobiP needs three parameters and one argument")
            return _apply(kernel, [params[2], params[0], params[1], args[0]])
        if params and kernel != "legendre":
            raise DomainError(f"{sid} takes no parameters")
        return _apply(kernel, [*params, *args])

    def identifier(self, node: Identifier, path: Path) -> complex:
        sense = self.sense(node, path)
        if sense is not None and sense.id in _SENSE_CONSTANTS:
            return CONSTANTS[_SENSE_CONSTANTS[sense.id]]
        if node.symbol in self.env:
            return complex(self.env[node.symbol])
        if sense is None and node.symbol in _LATEX_CONSTANTS:
            return CONSTANTS[_LATEX_CONSTANTS[node.symbol]]
        raise UnboundSymbol(node.symbol)

    def scripted(self, node: Scripted, path: Path) -> complex:
        if node.subscript is not None:
            key = render(Scripted(node.base, node.subscript))
            if key not in self.env:
                raise UnboundSymbol(key)
            base = complex(self.env[key])
        else:
            base = self.value(node.base, path + (0,))
        if node.superscript is None:
            return base
        return power(base, self.value(node.superscript, path + (2,)))

    def head_kernel(self, node: MathTree, path: Path) -> str | None:
        if isinstance(node, Scripted):
            node, path = node.base, path + (0,)
        return self.kernel_for(node, path) if isinstance(node, Identifier) else None

    def application(self, head: MathTree, head_path: Path, arg: MathTree, arg_path: Path, kernel: str) -> complex:
        params: list[complex] = []
        exponent = None
        if isinstance(head, Scripted):
            ident = head.base
            sense = self.sense(ident, head_path + (0,))
            sig = sense.signature if sense is not None else None
            sup = head.superscript
            if sup is not None:
                if sig is not None and sig.sup:
                    inner = sup.body if isinstance(sup, Fenced) and sup.delims == "()" else sup
                    inner_path = head_path + (2, 0) if inner is not sup else head_path + (2,)
                    params += self.items(inner, inner_path)
                else:
                    exponent = self.value(sup, head_path + (2,))
            if head.subscript is not None:
                params += self.items(head.subscript, head_path + (1,))
        outer = None
        if _powered_group(arg):
            outer = self.value(arg.superscript, arg_path + (2,))
            arg, arg_path = arg.base, arg_path + (0,)
        if isinstance(arg, Fenced) and arg.delims == "()":
            args = self.items(arg.body, arg_path + (0,))
        else:
            args = [self.value(arg, arg_path)]
        out = self.call(kernel, kernel, params, args)
        for exp in (exponent, outer):
            if exp is not None:
                out = power(out, exp)
        return out

    def items(self, node: MathTree, path: Path) -> list[complex]:
        if isinstance(node, Sequence) and node.is_list:
            return [self.value(c, path + (i,)) for i, c in enumerate(node.children)
                    if not (isinstance(c, Operator) and c.symbol in ",;")]
        return [self.value(node, path)]

    def sequence(self, node: Sequence, path: Path) -> complex:
        factors: list[complex] = []
        kids = node.children
        i = 0
        while i < len(kids):
            child, cpath = kids[i], path + (i,)
            if isinstance(child, Operator):
                if child.symbol == "!" and factors:
                    factors[-1] = _apply("factorial", [factors[-1]])
                elif child.symbol != ".":
                    raise UnsupportedFunction(f"operator {child.symbol}")
                i += 1
                continue
            kernel = self.head_kernel(child, cpath)
            if kernel is not None and i + 1 < len(kids):
                factors.append(self.application(child, cpath, kids[i + 1], path + (i + 1,), kernel))
                i += 2
                continue
            factors.append(self.value(child, cpath))
            i += 1
        out = 1 + 0j
        for f in factors:
            out *= f
        return out


# -- CAS trees ---------------------------------------------------------------


def _eval_cas(t, dialect: str, env: Binding) -> complex:
    if isinstance(t, Num):
        return complex(float(t.literal))
    if isinstance(t, Symbol):
        key = f"\\[{t.name}]" if t.special else t.name
        if t.name == "I" and not t.special:
            return 1j
        const = _CAS_CONSTANTS[dialect].get(key)
        if const is not None:
            return CONSTANTS[const]
        if key in env:
            return complex(env[key])
        raise UnboundSymbol(key)
    if isinstance(t, Neg):
        return -_eval_cas(t.operand, dialect, env)
    if isinstance(t, BinOp):
        a, b = _eval_cas(t.left, dialect, env), _eval_cas(t.right, dialect, env)
        if t.op == "+":
            return a + b
        if t.op == "-":
            return a - b
        if t.op == "*":
            return a * b
        if t.op == "/":
            return _divide(a, b)
        if t.op == "^":
            return power(a, b)
        raise UnsupportedFunction(f"relation {t.op}")
    if isinstance(t, Call):
        if t.name == "Subscript":
            key = render_cas(t, dialect)
            if key not in env:
                raise UnboundSymbol(key)
            return complex(env[key])
        kernel = _CAS_FUNCTIONS[dialect].get(t.name)
        if kernel is None:
            raise UnsupportedFunction(t.name)
        if kernel == "legendre" and len(t.args) != 2:
            raise UnsupportedFunction("associated Legendre function")
        return _apply(kernel, [_eval_cas(a, dialect, env) for a in t.args])
    raise TypeError(f"not a CAS tree: {t!r}")


def eval_tree(tree: Union[MathTree, TaggedTree, CasExpression], bindings: Binding | None = None,
              lexicon: Lexicon | None = None) -> complex:
    """Evaluate a semantic tree (plain or tagged) or a parsed CAS expression."""
    env = dict(bindings or {})
    if isinstance(tree, CasExpression):
        return _eval_cas(tree.tree, tree.dialect, env)
    lexicon = default_lexicon() if lexicon is None else lexicon
    if isinstance(tree, TaggedTree):
        return _SemanticEvaluator(tree, tree.tree, env, lexicon).value(tree.tree, ())
    return _SemanticEvaluator(None, tree, env, lexicon).value(tree, ())


def free_symbols(tagged: TaggedTree, lexicon: Lexicon | None = None) -> list[str]:
    """Binding keys a tagged tree needs: its variables and its constants without a value.

    A subscripted variable is one key, its canonical LaTeX such as ``x_n``.
    """
    lexicon = default_lexicon() if lexicon is None else lexicon
    found: set[str] = set()

    def visit(node: MathTree | None, path: Path):
        if node is None:
            return
        if isinstance(node, Scripted) and node.subscript is not None and isinstance(node.base, Identifier):
            sid = tagged.decided_sense(path + (0,))
            sense = find_sense(lexicon, node.base.symbol, sid) if sid else None
            if sense is not None and sense.role == "variable":
                found.add(render(Scripted(node.base, node.subscript)))
                visit(node.superscript, path + (2,))
                return
        if isinstance(node, Identifier):
            sid = tagged.decided_sense(path)
            sense = find_sense(lexicon, node.symbol, sid) if sid else None
            if sense is None or (sense.role in ("variable", "constant") and sid not in _SENSE_CONSTANTS):
                found.add(node.symbol)
            return
        for i, child in enumerate(children(node)):
            visit(child, path + (i,))

    visit(tagged.tree, ())
    return sorted(found)


# -- equivalence -------------------------------------------------------------


@dataclass(frozen=True)
class Sampler:
    seed: int = 0
    count: int = 100
    radius: float = 1.0
    region: str = "disk"  # or "right-half"

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be positive")
        if not self.radius > 0:
            raise ValueError("sampling radius must be positive")
        if self.region not in ("disk", "right-half"):
            raise ValueError(f"unknown sampling region {self.region!r}")

    def point(self, rng: random.Random) -> complex:
        r = self.radius * math.sqrt(rng.random())
        if self.region == "disk":
            phi = 2 * math.pi * rng.random()
        else:
            phi = math.pi * (rng.random() - 0.5)
        return cmath.rect(r, phi)


@dataclass(frozen=True)
class EquivalenceReport:
    passed: bool
    max_deviation: float
    worst_point: dict[str, complex]
    samples: int
    resamples: int
    tol: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max-deviation": self.max_deviation,
            "worst-point": {k: [v.real, v.imag] for k, v in sorted(self.worst_point.items())},
            "samples": self.samples,
            "resamples": self.resamples,
            "tol": self.tol,
            "seed": self.seed,
        }


MAX_RESAMPLES = 10


def deviation(a: complex, b: complex) -> float:
    """Relative difference with a unit floor so values near zero compare absolutely."""
    d = abs(a - b) / max(abs(a), 1.0)
    return d if not math.isnan(d) else math.inf


def check_equivalence(a, b, vars: Seq[str], sampler: Sampler = Sampler(), tol: float = 1e-10,
                      rename: Mapping[str, str] | None = None, fixed: Mapping[str, complex] | None = None,
                      lexicon: Lexicon | None = None) -> EquivalenceReport:
    """Compare two trees at ``sampler.count`` seeded random points.

    ``vars`` name the free symbols of ``a``; ``rename`` maps them (and the
    keys of ``fixed``) to the corresponding names in ``b``. A point where
    either side fails to evaluate is redrawn, at most 10 times in a row.
    """
    rename = dict(rename or {})
    fixed = dict(fixed or {})
    rng = random.Random(sampler.seed)
    worst, worst_point, resamples = 0.0, {}, 0
    for _ in range(sampler.count):
        attempts = 0
        while True:
            env_a = {v: sampler.point(rng) for v in vars}
            env_a.update({k: complex(v) for k, v in fixed.items()})
            env_b = {rename.get(k, k): v for k, v in env_a.items()}
            try:
                va = eval_tree(a, env_a, lexicon)
                vb = eval_tree(b, env_b, lexicon)
                break
            except (PoleError, DomainError):
                attempts += 1
                resamples += 1
                if attempts > MAX_RESAMPLES:
                    raise
        dev = deviation(va, vb)
        if dev > worst or not worst_point:
            worst, worst_point = dev, {k: env_a[k] for k in vars}
    return EquivalenceReport(worst <= tol, worst, worst_point, sampler.count, resamples, tol, sampler.seed)


# -- branch-cut probe --------------------------------------------------------


@dataclass(frozen=True)
class Jump:
    angle: float
    magnitude: float


@dataclass(frozen=True)
class ProbeReport:
    radius: float
    samples: int
    jumps: tuple[Jump, ...]
    gaps: tuple[float, ...] = ()
    values: tuple[complex | None, ...] = field(default=(), repr=False)

    @property
    def continuous(self) -> bool:
        return not self.jumps

    def to_dict(self) -> dict:
        return {
            "curve": {"radius": self.radius, "samples": self.samples},
            "jumps": [{"angle": j.angle, "magnitude": j.magnitude} for j in self.jumps],
            "gaps": list(self.gaps),
            "continuous": self.continuous,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["phi", "re", "im"])
        for k, v in enumerate(self.values):
            phi = 2 * math.pi * k / self.samples
            w.writerow([repr(phi), repr(v.real) if v is not None else "nan", repr(v.imag) if v is not None else "nan"])
        return buf.getvalue()


MIN_PROBE_SAMPLES = 64


def jump_threshold(a: complex, b: complex, radius: float, samples: int) -> float:
    """Largest step between neighbouring samples still counted as continuous.

    Ten times the local scale times the arc step; the arc step grows with
    the radius, so the bound does too (with a floor of one).
    """
    scale = max(abs(a), abs(b), 1.0)
    return 10 * scale * max(radius, 1.0) * 2 * math.pi / samples


def probe_branch_cuts(tree, var: str, radius: float, samples: int,
                      bindings: Binding | None = None, lexicon: Lexicon | None = None) -> ProbeReport:
    """Walk the circle ``|var| = radius`` and report discontinuities between samples."""
    if samples < MIN_PROBE_SAMPLES:
        raise ValueError(f"at least {MIN_PROBE_SAMPLES} samples are needed")
    if not radius > 0:
        raise ValueError("radius must be positive")
    base = dict(bindings or {})
    values: list[complex | None] = []
    gaps: list[float] = []
    for k in range(samples):
        phi = 2 * math.pi * k / samples
        try:
            values.append(eval_tree(tree, {**base, var: cmath.rect(radius, phi)}, lexicon))
        except NumericError:
            values.append(None)
            gaps.append(phi)
    jumps = []
    for k in range(samples):
        a, b = values[k], values[(k + 1) % samples]
        if a is None or b is None:
            continue
        step = abs(b - a)
        if step > jump_threshold(a, b, radius, samples):
            jumps.append(Jump(2 * math.pi * (k + 0.5) / samples, step))
    return ProbeReport(radius, samples, tuple(jumps), tuple(gaps), tuple(values))
