"""Exception hierarchy shared by all mathsem modules."""

from __future__ import annotations


class MathSemError(Exception):
    """Base class for every domain error raised by mathsem."""


# -- parsing -----------------------------------------------------------------


class MathSyntaxError(MathSemError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class IllegalCharacter(MathSyntaxError):
    pass


class UnterminatedControlSeq(MathSyntaxError):
    pass


class UnbalancedDelimiter(MathSyntaxError):
    pass


class DanglingScript(MathSyntaxError):
    pass


class DoubleScript(MathSyntaxError):
    pass


class EmptyGroup(MathSyntaxError):
    pass


class MissingArgument(MathSyntaxError):
    pass


class UnexpectedToken(MathSyntaxError):
    pass


class NestingTooDeep(MathSyntaxError):
    pass


class ArityMismatch(MathSemError):
    """Wrong number of parameters/arguments for a macro or pattern."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


# -- lexicon -----------------------------------------------------------------


class LexiconError(MathSemError):
    pass


class SchemaError(LexiconError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


class PlaceholderError(LexiconError):
    def __init__(self, sense_id: str, message: str = "placeholder out of range"):
        self.sense_id = sense_id
        super().__init__(f"{sense_id}: {message}")


# -- tagging -----------------------------------------------------------------


class TaggingError(MathSemError):
    pass


class InvalidPath(TaggingError):
    def __init__(self, path):
        self.path = tuple(path)
        super().__init__(f"no node at path {list(self.path)}")


class NoSenses(TaggingError):
    pass


class UnknownMacro(NoSenses):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"semantic macro \\{name} is not in the lexicon")


# -- context -----------------------------------------------------------------


class ContextError(MathSemError):
    pass


class UnterminatedMath(ContextError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"unterminated math delimiter at {position}")


class IdentifierAbsent(ContextError):
    def __init__(self, identifier: str):
        self.identifier = identifier
        super().__init__(f"identifier {identifier} does not occur in any formula")


# -- translation -------------------------------------------------------------


class TranslationError(MathSemError):
    pass


class UndecidedNode(TranslationError):
    """Semantification incomplete: at least one symbol has no decided sense.

    ``nodes`` holds ``(path, symbol, span)`` triples for every undecided node.
    """

    def __init__(self, nodes):
        self.nodes = list(nodes)
        names = ", ".join(sym for _, sym, _ in self.nodes)
        super().__init__(f"undecided symbols: {names}")


class UnknownSense(TranslationError):
    def __init__(self, sense_id: str):
        self.sense_id = sense_id
        super().__init__(f"unknown sense {sense_id}")


class MissingPattern(TranslationError):
    def __init__(self, sense_id: str, dialect: str):
        self.sense_id = sense_id
        self.dialect = dialect
        super().__init__(f"sense {sense_id} has no {dialect} pattern")


class UnsupportedConstruct(TranslationError):
    def __init__(self, message: str, path=()):
        self.path = tuple(path)
        super().__init__(f"{message} (node {list(self.path)})")


class CasSyntaxError(TranslationError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at {position}")


# -- numeric -----------------------------------------------------------------


class NumericError(MathSemError):
    pass


class UnboundSymbol(NumericError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound symbol {name}")


class PoleError(NumericError):
    pass


class UnsupportedFunction(NumericError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no numeric kernel for {name}")


class NegativeDegree(NumericError):
    pass


class DomainError(NumericError):
    pass


# -- evaluation / config -----------------------------------------------------


class PathMismatch(MathSemError):
    pass


class ConfigError(MathSemError):
    pass
