"""Errors raised by the RDF layer."""


class RdfError(Exception):
    pass


class RdfSyntaxError(RdfError):
    """A document failed to parse; carries position and the offending token."""

    def __init__(self, message: str, line: int = 0, column: int = 0, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        where = f" at line {line}, column {column}" if line else ""
        tok = f" (near {token!r})" if token else ""
        super().__init__(f"{message}{where}{tok}")


class IRIError(RdfError):
    """An IRI is relative or otherwise malformed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


class UnsupportedSyntax(RdfError):
    """Asked to serialize content the target syntax cannot carry."""
