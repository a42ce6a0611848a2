"""Exception hierarchy shared by every module of the package."""


class ReflectorError(Exception):
    """Base class for all errors raised by reflector_sim."""


class InvalidArgumentError(ReflectorError, ValueError):
    pass


class NoIntersectionError(ReflectorError):
    pass


class DegenerateGeometryError(ReflectorError):
    pass


class MeshError(ReflectorError):
    pass


class ParseError(MeshError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateKeyError(MeshError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"duplicate node id {label!r}")


class InvalidPanelError(MeshError):
    pass


class DanglingReferenceError(MeshError):
    pass


class EmptyCapError(MeshError):
    pass


class OptimizationFailedError(ReflectorError):
    pass


class EmptyRegionError(ReflectorError):
    pass
