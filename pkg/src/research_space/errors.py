"""Exception types shared across the toolkit.

Config/usage problems map to CLI exit code 2, everything else to 1.
"""


class ResearchSpaceError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ResearchSpaceError):
    """Invalid configuration: bad thresholds, inconsistent inputs, unknown ids."""


class ParseError(ResearchSpaceError):
    """Malformed input file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" ({loc})"
        super().__init__(f"{message}{loc}")


class TrainingError(ResearchSpaceError):
    """Embedding training cannot proceed (e.g. no trainable bags)."""
