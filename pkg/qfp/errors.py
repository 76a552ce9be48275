"""
Base exception shared by every qfp module.
"""


class QfpError(Exception):
    """Root of all errors raised by qfp."""
    pass
