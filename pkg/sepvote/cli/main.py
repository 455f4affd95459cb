import sys
from collections.abc import Sequence

from sepvote.cli.commands import get_command
from sepvote.cli.parser import parse_args
from sepvote.errors import DataError, InvariantError, SepvoteError
from sepvote.utils.logger import set_logger


def run(argv: Sequence[str] | None = None) -> int:
    """
    Parse `argv`, run the selected command and return the process exit status.

    0 on success, 1 for usage errors, 2 for data errors and 3 for internal failures.
    """
    logger = set_logger("sepvote")
    try:
        args = parse_args(argv)
        get_command(args.command)(args).run()
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else (0 if exc.code is None else 1)
    except SepvoteError as err:
        logger.error(str(err))
        return err.exit_code
    except OSError as err:
        logger.error(str(err))
        return DataError.exit_code
    except Exception as err:  # noqa: BLE001
        logger.exception(f"Internal error: {err}")
        return InvariantError.exit_code
    return 0


def main() -> None:
    """
    Entry point for the sepvote CLI.
    """
    sys.exit(run())


if __name__ == "__main__":
    main()
