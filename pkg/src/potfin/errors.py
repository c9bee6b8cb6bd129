"""Exception types shared by every module.

The CLI maps these onto exit codes: input problems exit 2, resource caps exit 3.
"""


class PotfinError(Exception):
    pass


class InputError(PotfinError, ValueError):
    """A precondition on the arguments does not hold."""


class ResourceError(PotfinError):
    """An enumeration would exceed its configured cap."""


class SchemaError(InputError):
    """A system-definition document is malformed.

    ``path`` is a JSON path such as ``$.stages.1[2]``.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
