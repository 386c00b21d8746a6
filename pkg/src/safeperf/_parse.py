from __future__ import annotations

import math
from decimal import Decimal, InvalidOperation
from typing import Any

from .errors import ValidationError


def parse_number(value: Any, field: str) -> float:
    """Accept an int, float, or decimal / scientific-notation string."""
    if isinstance(value, bool):
        raise ValidationError(f"expected a number, got {value!r}", field)
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        try:
            x = float(Decimal(value.strip()))
        except (InvalidOperation, ValueError):
            raise ValidationError(f"not a number: {value!r}", field) from None
    else:
        raise ValidationError(f"expected a number, got {type(value).__name__}", field)
    if not math.isfinite(x):
        raise ValidationError(f"must be finite, got {value!r}", field)
    return x


def parse_probability(value: Any, field: str) -> float:
    p = parse_number(value, field)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {value!r}", field)
    return p


def check_probability(p: float, field: str) -> float:
    if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
        raise ValidationError(f"probability must lie in [0, 1], got {p!r}", field)
    return float(p)
