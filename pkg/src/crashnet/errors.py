"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to stable
process exit codes: 2 for usage-type problems, 1 for runtime failures.
"""


class CrashnetError(Exception):
    exit_code = 1


class UsageError(CrashnetError):
    exit_code = 2


class InvalidParameter(UsageError, ValueError):
    pass


class LengthMismatch(CrashnetError, ValueError):
    pass


class InsufficientData(CrashnetError, ValueError):
    pass


class TooFewObservations(InsufficientData):
    pass


class EmptyWindow(InsufficientData):
    pass


# ingest

class NetworkError(CrashnetError):
    """Transport failure that survived the retry budget."""


class SymbolUnknown(UsageError):
    def __init__(self, symbol, exchange=None):
        self.symbol = symbol
        self.exchange = exchange
        where = f" on {exchange}" if exchange else ""
        super().__init__(f"unknown symbol {symbol!r}{where}")


class HistoryUnavailable(CrashnetError):
    pass


class MissingSymbol(CrashnetError):
    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(f"no stored data for symbol {symbol!r}")


class GapTooLarge(CrashnetError):
    def __init__(self, symbol, start, end):
        self.symbol = symbol
        self.range = (start, end)
        super().__init__(f"{symbol}: missing hours [{start}, {end}) exceed the gap limit")


class MixedQuote(CrashnetError):
    pass


# panel

class NonPositivePrice(CrashnetError, ValueError):
    pass


class UnknownAsset(CrashnetError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class TooFewAssetsRemain(CrashnetError, ValueError):
    pass


# tmfg

class TooFewVertices(CrashnetError, ValueError):
    pass


class NonSymmetricInput(CrashnetError, ValueError):
    pass


class NoConvergence(CrashnetError):
    def __init__(self, iterations, delta):
        self.iterations = iterations
        self.delta = delta
        super().__init__(f"power iteration stalled after {iterations} steps (last change {delta:.3e})")


# herding

class RankDeficient(CrashnetError, ValueError):
    pass


class LagTooLarge(CrashnetError, ValueError):
    pass


# microstructure

class UnorderedInput(CrashnetError, ValueError):
    pass


# cli

class MissingData(CrashnetError):
    pass


class MissingStageOutput(CrashnetError):
    def __init__(self, stage, path=None):
        self.stage = stage
        detail = f" (expected {path})" if path else ""
        super().__init__(f"missing output of stage '{stage}'{detail}; run `crashnet {stage}` first")
