"""Command-line interface: parser, validators, subcommands and ablation reports."""
