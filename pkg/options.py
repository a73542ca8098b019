"""
Options - Parsing of command-line values

Converters used as argparse `type=` callables:
- exponent lists such as "inf,8,2" (inf, infinity and ∞ accepted)
- integer lists such as "3,3,3" or "2:16:x2" (geometric range)
- real values written as decimals or fractions ("4/3")
- enum words, case-insensitive ("MAIN", "main")
"""

import argparse
import re
from enum import Enum
from typing import Callable, Tuple, Type, TypeVar

from errors import UsageError
from exponents import PVector, parse_exponent

E = TypeVar("E", bound=Enum)


class OptionParser:
    """Helpers for parsing inline option values"""

    FRACTION_PATTERN = re.compile(r'^\s*([+-]?\d+(?:\.\d*)?)\s*/\s*(\d+(?:\.\d*)?)\s*$')
    RANGE_PATTERN = re.compile(r'^\s*(\d+)\s*:\s*(\d+)\s*:\s*x(\d+)\s*$', re.IGNORECASE)

    @staticmethod
    def real(text: str) -> float:
        """
        Parse a real number

        Args:
            text: Decimal, fraction "a/b", or inf

        Returns:
            The value as float
        """
        match = OptionParser.FRACTION_PATTERN.match(text)
        if match:
            denominator = float(match.group(2))
            if denominator == 0:
                raise UsageError(f"zero denominator in {text!r}")
            return float(match.group(1)) / denominator
        return parse_exponent(text)

    @staticmethod
    def exponents(text: str) -> PVector:
        """Parse a comma separated exponent tuple; entries may be fractions"""
        tokens = [t for t in text.split(",") if t.strip()]
        if not tokens:
            raise UsageError("empty exponent list")
        return PVector(tuple(OptionParser.real(t) for t in tokens))

    @staticmethod
    def exponent_sequence(text: str) -> Tuple[float, ...]:
        """Like exponents() but without the m >= 2 requirement"""
        tokens = [t for t in text.split(",") if t.strip()]
        if not tokens:
            raise UsageError("empty exponent list")
        return tuple(OptionParser.real(t) for t in tokens)

    @staticmethod
    def integers(text: str) -> Tuple[int, ...]:
        """Parse "3,3,3" or the geometric range "2:16:x2" (2, 4, 8, 16)"""
        match = OptionParser.RANGE_PATTERN.match(text)
        if match:
            start, stop, factor = (int(g) for g in match.groups())
            if start < 1 or factor < 2:
                raise UsageError(f"invalid geometric range {text!r}")
            values = []
            n = start
            while n <= stop:
                values.append(n)
                n *= factor
            return tuple(values)
        try:
            values = tuple(int(t) for t in text.split(",") if t.strip())
        except ValueError:
            raise UsageError(f"cannot parse integer list {text!r}") from None
        if not values:
            raise UsageError("empty integer list")
        return values

    @staticmethod
    def choice(enum_cls: Type[E]) -> Callable[[str], E]:
        """Converter matching enum values or names, ignoring case"""

        def convert(text: str) -> E:
            word = text.strip().lower().replace("-", "_")
            for member in enum_cls:
                if word in (str(member.value).lower(), member.name.lower()):
                    return member
            allowed = ", ".join(str(member.value) for member in enum_cls)
            raise UsageError(f"invalid choice {text!r} (choose from {allowed})")

        convert.__name__ = enum_cls.__name__
        return convert


def argparse_type(parse: Callable[[str], object]) -> Callable[[str], object]:
    """Wrap a parser so argparse reports its UsageError as a usage message"""

    def convert(text: str):
        try:
            return parse(text)
        except UsageError as e:
            raise argparse.ArgumentTypeError(str(e)) from None

    convert.__name__ = getattr(parse, "__name__", "value")
    return convert
