"""Validators and type converters for command-line arguments."""

import argparse
import os

from sepvote.errors import UsageError
from sepvote.segmentation.scheme import SCHEME_NAMES, get_scheme
from sepvote.utils.paths import resolve_path


class Validator:
    """
    Collection of argparse-compatible validators and normalizers.
    """

    @staticmethod
    def scheme_name(value: str) -> str:
        """
        Normalise a segmentation scheme name.

        Raises:
            argparse.ArgumentTypeError: The name is unknown; the message lists the valid names.
        """
        try:
            return get_scheme(value.strip().lower()).name
        except UsageError as err:
            raise argparse.ArgumentTypeError(str(err)) from err

    @staticmethod
    def scheme_list(value: str) -> list[str]:
        """
        Parse a comma-separated list of scheme names; `all` expands to every listed scheme.

        Raises:
            argparse.ArgumentTypeError: The list is empty or holds an unknown or repeated name.
        """
        items = [s.strip() for s in value.split(",") if s.strip()]
        if not items:
            raise argparse.ArgumentTypeError("Expected at least one scheme name")
        if items == ["all"]:
            return list(SCHEME_NAMES)
        names = [Validator.scheme_name(s) for s in items]
        repeated = sorted({n for n in names if names.count(n) > 1})
        if repeated:
            raise argparse.ArgumentTypeError(f"Schemes listed more than once: {repeated}")
        return names

    @staticmethod
    def split_list(value: str) -> list[str]:
        items = [s.strip() for s in value.split(",") if s.strip()]
        if not items:
            raise argparse.ArgumentTypeError("Expected at least one split name")
        return list(dict.fromkeys(items))

    @staticmethod
    def positive_int(value: str | int) -> int:
        """
        Ensure the provided value is a positive integer (> 0).

        Raises:
            argparse.ArgumentTypeError: The value is non-numeric or not positive.
        """
        try:
            n = int(value)
        except (TypeError, ValueError) as err:
            raise argparse.ArgumentTypeError(f"Expected a positive integer, got '{value}'") from err
        if n <= 0:
            raise argparse.ArgumentTypeError(f"Expected a positive integer, got {n}")
        return n

    @staticmethod
    def non_negative_int(value: str | int) -> int:
        try:
            n = int(value)
        except (TypeError, ValueError) as err:
            raise argparse.ArgumentTypeError(f"Expected an integer >= 0, got '{value}'") from err
        if n < 0:
            raise argparse.ArgumentTypeError(f"Expected an integer >= 0, got {n}")
        return n

    @staticmethod
    def probability(value: str | float) -> float:
        """
        Parse a threshold in [0, 1].

        Raises:
            argparse.ArgumentTypeError: The value is not a number in [0, 1].
        """
        try:
            p = float(value)
        except (TypeError, ValueError) as err:
            raise argparse.ArgumentTypeError(f"Expected a number in [0, 1], got '{value}'") from err
        if not 0.0 <= p <= 1.0:
            raise argparse.ArgumentTypeError(f"Expected a number in [0, 1], got {p}")
        return p

    @staticmethod
    def fraction(value: str | float) -> float:
        try:
            f = float(value)
        except (TypeError, ValueError) as err:
            raise argparse.ArgumentTypeError(f"Expected a fraction in [0, 1), got '{value}'") from err
        if not 0.0 <= f < 1.0:
            raise argparse.ArgumentTypeError(f"Expected a fraction in [0, 1), got {f}")
        return f

    @staticmethod
    def existing_path(value: str) -> str:
        """
        Ensure the supplied value points to an existing filesystem path.

        Whitespace is stripped, `~` and environment variables are expanded, and the result is
        returned in absolute form.

        Raises:
            argparse.ArgumentTypeError: The path does not exist.
        """
        s = str(value).strip()
        abs_path = resolve_path(s)
        if not abs_path.exists():
            raise argparse.ArgumentTypeError(f"Path does not exist: {s}")
        return str(abs_path)

    @staticmethod
    def worker_count(n: int | None) -> int:
        """
        Interpret None or non-positive values as CPU-count auto detection.

        Returns:
            Number of workers to use, never less than one.
        """
        if n is None or n <= 0:
            return os.cpu_count() or 1
        return n

    @staticmethod
    def env_int(name: str, default: int | None = None) -> int | None:
        """
        Read an integer default from the environment.

        Raises:
            UsageError: The variable is set but not an integer.
        """
        raw = os.getenv(name)
        if raw is None or not raw.strip():
            return default
        try:
            return int(raw)
        except ValueError:
            raise UsageError(f"{name} must be an integer, got '{raw}'") from None
