"""Exception hierarchy shared by every layer of the library."""


class SeqnnError(Exception):
    pass


class DimensionError(SeqnnError, ValueError):
    """Operand shapes are incompatible for a tensor operation."""


class ShapeError(SeqnnError, ValueError):
    """A module received a Value whose structure does not match what it expects.

    ``path`` accumulates the container chain the error travelled through so the
    message points at the offending submodule.
    """

    def __init__(self, message, path=None):
        self.message = message
        self.path = list(path or [])
        super().__init__(self._render())

    def _render(self):
        if not self.path:
            return self.message
        return f"{'/'.join(self.path)}: {self.message}"

    def prefixed(self, name):
        return ShapeError(self.message, [name] + self.path)


class ConfigError(SeqnnError, ValueError):
    """Invalid constructor or harness configuration."""


class ProtocolError(SeqnnError, RuntimeError):
    """Methods called out of order (e.g. backward before forward)."""
