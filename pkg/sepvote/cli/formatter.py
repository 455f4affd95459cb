"""Help formatting for the sepvote CLI."""

import argparse


class CustomHelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """
    Mark each flag as required or optional and show its default.

    List defaults (scheme and split lists) are shown comma-joined, the form the flags accept.
    """

    def __init__(
        self,
        prog: str,
        indent_increment: int = 2,
        max_help_position: int = 35,
        width: int | None = None,
    ) -> None:
        super().__init__(
            prog, indent_increment=indent_increment, max_help_position=max_help_position, width=width
        )

    @staticmethod
    def _default_text(default: object) -> str | None:
        if default in (None, False, argparse.SUPPRESS) or default == [] or default == {}:
            return None
        if isinstance(default, (list, tuple)):
            return ",".join(str(item) for item in default)
        return str(default)

    def _get_help_string(self, action: argparse.Action) -> str:
        help_text = action.help or ""
        if not action.option_strings:
            return help_text
        help_text += " (required)" if action.required else " (optional)"
        default = self._default_text(action.default)
        if default is not None:
            help_text += f" (default: '{default}')"
        return help_text
