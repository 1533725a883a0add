"""Exception types and CLI exit codes."""


class BlockscanError(Exception):
    """Base class for all blockscan errors."""


class EmptyInput(BlockscanError):
    """Input stream contained a header but no data rows (or nothing at all)."""


class ParseError(BlockscanError):
    """Malformed CSV input. Carries the 1-based row number (header = row 1)."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class DegenerateLabels(BlockscanError):
    """All labels equal; the permutation null distribution is degenerate."""


class EmptyBlockRange(BlockscanError):
    """The dataset is too small to form any scan block."""


class InvalidSide(BlockscanError):
    """Tail-bound side does not match the position of x relative to the mean."""


class InvalidAlternative(BlockscanError):
    """Alternative parameters violate q < p."""


class TooLarge(BlockscanError):
    """Input exceeds a hard size guard for a brute-force operation."""


class NoContainedRect(BlockscanError):
    """No enumerated rectangle is contained in the query rectangle."""


class BlockMismatch(BlockscanError):
    """Calibration block range does not match the dataset's block range."""


# CLI exit codes: 0 success (even with zero detections), 2 parse/validation,
# 3 degenerate labels, 4 internal invariant failure.
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_INTERNAL = 4
