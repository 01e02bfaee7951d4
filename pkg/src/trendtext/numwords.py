"""Integer <-> English word conversion for counts inside rendered answers.

Covers 0..999,999, hyphenated compound tens ("twenty-one"), no "and".
The reverse parser exists for the verifier, which must read counts written
either way ("7 shifts", "seven shifts").
"""

from __future__ import annotations

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
]

MAX_WORDABLE = 999_999


def int_to_words(n: int) -> str:
    if not (0 <= n <= MAX_WORDABLE):
        raise ValueError(f"number out of wordable range [0, {MAX_WORDABLE}]: {n}")
    if n < 20:
        return _ONES[n]
    if n < 100:
        tens, ones = divmod(n, 10)
        return _TENS[tens] + (f"-{_ONES[ones]}" if ones else "")
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        out = f"{_ONES[hundreds]} hundred"
        return out + (f" {int_to_words(rest)}" if rest else "")
    thousands, rest = divmod(n, 1000)
    out = f"{int_to_words(thousands)} thousand"
    return out + (f" {int_to_words(rest)}" if rest else "")


def _build_word_values() -> dict[str, int]:
    values = {w: i for i, w in enumerate(_ONES)}
    for i, w in enumerate(_TENS):
        if w:
            values[w] = i * 10
    return values


_WORD_VALUES = _build_word_values()
_SCALES = {"hundred": 100, "thousand": 1000}

# Every token that may start a spelled-out number (for the verifier's regexes).
NUMBER_WORDS = set(_WORD_VALUES) | set(_SCALES)


def words_to_int(text: str) -> int | None:
    """Parse a spelled-out nonnegative integer; None when it isn't one."""
    tokens: list[str] = []
    for chunk in text.strip().lower().replace("-", " ").split():
        tokens.append(chunk)
    if not tokens:
        return None
    total = 0
    current = 0
    seen_any = False
    for tok in tokens:
        if tok in _WORD_VALUES:
            current += _WORD_VALUES[tok]
            seen_any = True
        elif tok == "hundred":
            if not seen_any:
                return None
            current *= 100
        elif tok == "thousand":
            if not seen_any:
                return None
            total += current * 1000
            current = 0
        else:
            return None
    return total + current


def parse_count(text: str) -> int | None:
    """Digits or words -> int; None when neither parses."""
    text = text.strip()
    if text.isdigit():
        return int(text)
    return words_to_int(text)
