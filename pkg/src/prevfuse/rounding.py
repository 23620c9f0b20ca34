"""Display rounding. Half-up on the shortest decimal repr of a float."""

from decimal import ROUND_HALF_UP, Decimal


def round_half_up(value: float, places: int) -> float:
    """Round ``value`` half away from zero at ``places`` decimals.

    Python's ``round`` is banker's rounding on the binary value, so
    ``round(0.845, 2)`` gives 0.84. Tables in reports expect 0.85.
    """
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def fmt(value: float, places: int) -> str:
    return f"{round_half_up(value, places):.{places}f}"
