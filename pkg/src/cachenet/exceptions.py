class InadmissibleTilingError(ValueError):
    """Raised when a node count or cluster size cannot form an exact square tiling"""
    pass

class ParameterBoundError(ValueError):
    """Raised when an analytic parameter violates its admissible range"""
    pass

class OracleSizeError(ValueError):
    """Raised when a brute-force oracle is asked to enumerate too large a space"""
    pass

class ConvergenceError(RuntimeError):
    """Raised when a root solver hits its iteration cap"""
    pass

class CsvFormatError(ValueError):
    """Raised when an input CSV file cannot be parsed"""

    def __init__(self, message: str, row: int = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
