"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class ReqmonError(Exception):
    """Base class; the CLI maps every subclass to exit code 2."""


class PositionedError(ReqmonError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LexError(PositionedError):
    pass


class ParseError(PositionedError):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        if expected:
            message = f"{message} (expected one of: {', '.join(sorted(expected))})"
        super().__init__(message, line, col)
        self.expected = expected


class NonMonitorable(ReqmonError):
    pass


class MissingSignal(ReqmonError):
    def __init__(self, name: str):
        super().__init__(f"missing signal {name!r}")
        self.name = name


class TypeMismatch(ReqmonError):
    def __init__(self, name: str, expected: str, found: str):
        super().__init__(f"signal {name!r}: expected {expected}, found {found}")
        self.name = name
        self.expected = expected
        self.found = found


class BoundTooLarge(ReqmonError):
    def __init__(self, bound: int, cap: int):
        super().__init__(f"interval bound {bound} exceeds cap {cap}")
        self.bound = bound
        self.cap = cap


class UnsupportedConstruct(ReqmonError):
    pass


class EmptyInput(ReqmonError):
    pass


class HeterogeneousTypes(ReqmonError):
    pass


class ParamSyntaxError(ReqmonError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateKey(ReqmonError):
    def __init__(self, name: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate key {name!r}")
        self.name = name
        self.line = line


class MissingParam(ReqmonError):
    def __init__(self, placeholder: str, key: str):
        super().__init__(f"placeholder {{{placeholder}}} needs parameter {key!r}, which is not set")
        self.placeholder = placeholder
        self.key = key


class TemplateError(ReqmonError):
    pass


class TraceFormatError(ReqmonError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
