from __future__ import annotations


class IsothermicError(ValueError):
    """Base class for all errors raised by the isothermic package."""


class UndefinedConicError(IsothermicError):
    pass


class StencilError(IsothermicError):
    pass


class InsufficientSmoothnessError(IsothermicError):
    pass


class NonFiniteFieldError(IsothermicError):
    pass


class IntegrationAccuracyError(IsothermicError):
    pass


class ProfileEscapedError(IsothermicError):
    pass


class SurfaceSpecError(IsothermicError):
    pass


class ConfigError(IsothermicError):
    pass
