"""Command-line application: subcommands, acceptance suite and reports."""
