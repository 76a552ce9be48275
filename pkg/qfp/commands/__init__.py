"""Command handlers behind the qfp CLI."""
