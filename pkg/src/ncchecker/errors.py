"""Exception types shared across the package.

The CLI maps ValidationError to exit code 1 and OSError to exit code 2;
everything raised for bad user input or malformed files should therefore
be (a subclass of) ValidationError.
"""


class ValidationError(Exception):
    """Invalid input, configuration, or file content."""
