class FaultlineError(Exception):
    """Base class for errors raised by faultline."""


class SourceError(FaultlineError):
    def __init__(self, message: str, loc=None, path: str = "<fic>"):
        self.loc = loc
        self.path = path
        where = f"{path}:{loc[0]}:{loc[1]}: " if loc else f"{path}: "
        super().__init__(where + message)


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class TypeCheckError(SourceError):
    pass


class UnsupportedConstruct(SourceError):
    pass


class UnknownAssertion(FaultlineError):
    pass


class MultiFaultContext(FaultlineError):
    pass


class NonTerminating(FaultlineError):
    pass


class ReplayMismatch(FaultlineError):
    pass


class FlagConflict(FaultlineError):
    pass


class SchemaMismatch(FaultlineError):
    pass


class StrategyError(FaultlineError):
    pass
