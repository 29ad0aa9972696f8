"""Conversions between vectors over Z_d, flattened indices, and digit strings.

Index convention used everywhere in this package: a length-n vector
(v_0, ..., v_{n-1}) flattens to the base-d number with v_0 as the most
significant digit.  Scanning flattened indices in increasing order is
therefore the same as scanning vectors in lexicographic order.
"""

from __future__ import annotations

import numpy as np

from .errors import EncodingError

# digit alphabet for compact text forms like "d4:2031"; covers d <= 36
DIGIT_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"
_DIGIT_VALUE = {ch: i for i, ch in enumerate(DIGIT_ALPHABET)}


def digits_to_index(digits, d: int) -> int:
    """Flatten a digit sequence (most significant first) to an integer."""
    idx = 0
    for e in digits:
        idx = idx * d + int(e)
    return idx


def index_to_digits(index: int, d: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`digits_to_index` for a length-n vector."""
    out = [0] * n
    for i in range(n - 1, -1, -1):
        index, out[i] = divmod(index, d)
    return tuple(out)


def digit_matrix(d: int, n: int) -> np.ndarray:
    """All d**n digit vectors as an int64 array of shape (d**n, n), row i = digits of i."""
    idx = np.arange(d**n, dtype=np.int64)
    cols = [(idx // d**(n - 1 - j)) % d for j in range(n)]
    return np.stack(cols, axis=1)


def flat_powers(d: int, n: int) -> np.ndarray:
    """Place values (d^{n-1}, ..., d, 1) used to flatten digit rows."""
    return d ** np.arange(n - 1, -1, -1, dtype=np.int64)


def digits_to_text(digits, d: int) -> str:
    """Render digits as a compact string, e.g. (2,0,3,1) over Z_4 -> "2031"."""
    if d > len(DIGIT_ALPHABET):
        raise EncodingError(
            f"compact digit strings support d <= {len(DIGIT_ALPHABET)}, got d={d}; "
            "use the JSON integer-array form instead"
        )
    return "".join(DIGIT_ALPHABET[int(e)] for e in digits)


def text_to_digits(text: str, d: int) -> tuple[int, ...]:
    """Parse a compact digit string back into a digit tuple, validating range."""
    out = []
    for ch in text:
        v = _DIGIT_VALUE.get(ch.lower())
        if v is None or v >= d:
            raise EncodingError(f"invalid base-{d} digit {ch!r} in {text!r}")
        out.append(v)
    if not out:
        raise EncodingError("empty digit string")
    return tuple(out)
