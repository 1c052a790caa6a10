"""
Text Utilities for PyQuadMat
Helper functions for parsing command line values and formatting results
"""

from core.errors import InvalidSpecError


def parse_worker_counts(text):
    """Parse '1,2,4' into an ascending list of distinct positive counts"""
    try:
        counts = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidSpecError(f"worker counts must be integers: {text!r}") from None
    if not counts or any(c < 1 for c in counts):
        raise InvalidSpecError(f"worker counts must be positive: {text!r}")
    if counts != sorted(set(counts)):
        raise InvalidSpecError(f"worker counts must be distinct and ascending: {text!r}")
    return counts


def format_element(domain, value):
    """Text of one entry; float64 values use the domain's formatting"""
    return domain.format(value) if domain.name == "float64" else str(value)


def format_vector(domain, vector):
    """Space separated entries; polynomial entries are bracketed"""
    if domain.name == "poly":
        return " ".join(f"[{value}]" for value in vector)
    return " ".join(format_element(domain, value) for value in vector)
