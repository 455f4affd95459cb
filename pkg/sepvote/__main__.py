"""Entry point for running sepvote as a module with `python -m sepvote`."""

from sepvote.cli.main import main

if __name__ == "__main__":
    main()
