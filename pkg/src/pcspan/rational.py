"""Exact rational parsing/formatting ("num/den" strings, ints as shorthand)."""

from fractions import Fraction

from .errors import ParseError


def parse_rational(value) -> Fraction:
    """Parse an int, "num/den" string, or plain integer string into a Fraction."""
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            frac = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed rational {value!r}: {exc}") from None
        return frac
    raise ParseError(f"not a rational: {value!r}")


def format_rational(q: Fraction):
    """Canonical JSON form: bare int when integral, else "num/den"."""
    q = Fraction(q)
    if q.denominator == 1:
        return int(q)
    return f"{q.numerator}/{q.denominator}"
