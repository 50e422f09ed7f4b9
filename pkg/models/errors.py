"""
Exception hierarchy shared by the interpreters, the translator and the harness.

Everything raised on purpose derives from EbSqlError so the CLI and the HTTP
layer can tell user-facing failures from genuine crashes.
"""

from typing import Any, Iterable, Optional


class EbSqlError(Exception):
    """Base class for all expected failures"""


class ParseError(EbSqlError):
    def __init__(self, message: str, position: int = 0, expected: Iterable[str] = ()):
        self.position = position
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class DuplicateTarget(ParseError):
    def __init__(self, name: str, position: int = 0):
        self.name = name
        super().__init__(f"variable '{name}' is assigned more than once", position)


class EbTypeError(EbSqlError):
    def __init__(self, node: Any, expected: str, found: str):
        self.node = node
        self.expected = expected
        self.found = found
        super().__init__(f"type error in {node}: expected {expected}, found {found}")


class UnboundVariable(EbSqlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable '{name}'")


class KindMismatch(EbSqlError):
    def __init__(self, left: Any, right: Any):
        super().__init__(f"cannot compare {left!r} with {right!r}: scalar kinds differ")


class SchemaMismatch(EbSqlError):
    pass


class UnboundTable(EbSqlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"table '{name}' is not bound in the database")


class SchemaError(EbSqlError):
    pass


class DuplicateRowError(EbSqlError):
    pass


class StatementError(EbSqlError):
    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"statement {index}: {cause}")


class AssignmentError(EbSqlError):
    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"assignment {index}: {cause}")


class Untranslatable(EbSqlError):
    def __init__(self, node: Any, reason: Optional[str] = None):
        self.node = node
        super().__init__(f"no translation rule for {node}" + (f": {reason}" if reason else ""))


class PrimedNamePresent(EbSqlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"primed name '{name}' must not appear here")


class Unsatisfiable(EbSqlError):
    def __init__(self, want: Any):
        self.want = want
        super().__init__(f"cannot generate a term of type {want}")
