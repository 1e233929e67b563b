"""Input validators."""

from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple


class Validators:
    """Validation of command-line inputs, checked before any computation."""

    @staticmethod
    def split_list(text: str) -> List[str]:
        """Comma-separated items with surrounding whitespace removed."""
        return [part.strip() for part in text.split(",")]

    @staticmethod
    def validate_rationals(text: str, count: Optional[int] = None) -> Tuple[bool, Optional[str]]:
        """
        Validate a comma-separated list of rationals such as ``1,0,-1/2``.

        Args:
            text: List to validate
            count: Required number of entries, or None for any

        Returns:
            Tuple of (is_valid, error_message)
        """
        if not text or not text.strip():
            return False, "List of constants cannot be empty"

        parts = Validators.split_list(text)
        if count is not None and len(parts) != count:
            return False, f"Expected {count} constants, got {len(parts)}"

        for part in parts:
            try:
                Fraction(part)
            except (ValueError, ZeroDivisionError):
                return False, f"Not a rational number: {part!r}"

        return True, None

    @staticmethod
    def validate_grid_spec(text: str) -> Tuple[bool, Optional[str]]:
        """
        Validate ``tmin,tmax,nt,xmin,xmax,nx``.

        Returns:
            Tuple of (is_valid, error_message)
        """
        parts = Validators.split_list(text)
        if len(parts) != 6:
            return False, "Grid needs six entries: tmin,tmax,nt,xmin,xmax,nx"

        try:
            tmin, tmax, xmin, xmax = (float(parts[i]) for i in (0, 1, 3, 4))
            nt, nx = int(parts[2]), int(parts[5])
        except ValueError:
            return False, f"Invalid grid entries in {text!r}"

        if not (tmin < tmax and xmin < xmax):
            return False, "Grid ranges need min < max"

        if nt < 2 or nx < 2:
            return False, "Grid counts must be at least 2"

        return True, None

    @staticmethod
    def validate_tolerance(value: float) -> Tuple[bool, Optional[str]]:
        """Tolerances and thresholds must be positive and finite."""
        if not 0 < value < float("inf"):
            return False, f"Expected a positive tolerance, got {value}"
        return True, None

    @staticmethod
    def validate_heat_labels(text: str, count: int = 3) -> Tuple[bool, Optional[str]]:
        """
        Validate a triple of heat catalog labels.

        Labels of the trigonometric family contain a comma themselves, so the
        split respects parentheses.
        """
        labels = Validators.split_labels(text)
        if len(labels) != count:
            return False, f"Expected {count} heat labels, got {len(labels)}"

        if any(not label for label in labels):
            return False, "Heat labels cannot be empty"

        return True, None

    @staticmethod
    def split_labels(text: str) -> List[str]:
        """Split ``h0,trig(1,0),e(1)`` at top-level commas."""
        labels, depth, current = [], 0, []
        for char in text:
            if char == "(":
                depth += 1
            elif char == ")":
                depth -= 1
            if char == "," and depth == 0:
                labels.append("".join(current).strip())
                current = []
            else:
                current.append(char)
        labels.append("".join(current).strip())
        return labels

    @staticmethod
    def validate_criteria(text: str, count: int = 10) -> Tuple[bool, Optional[str]]:
        """Criterion numbers for ``selftest --only``, each in 1..count."""
        for part in Validators.split_list(text):
            if not part.isdigit() or not 1 <= int(part) <= count:
                return False, f"Criterion numbers must lie in 1..{count}, got {part!r}"
        return True, None

    @staticmethod
    def validate_output_path(path: str) -> Tuple[bool, Optional[str]]:
        """
        Validate an output file path.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if not path or not path.strip():
            return False, "Output path cannot be empty"

        if Path(path).is_dir():
            return False, f"Output path is a directory: {path}"

        return True, None

    @staticmethod
    def sanitize_expression(text: str) -> str:
        """
        Collapse whitespace in expression text.

        Args:
            text: Input text

        Returns:
            Sanitized text
        """
        return " ".join(text.split())
