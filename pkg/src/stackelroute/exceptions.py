"""Exception hierarchy shared by every stackelroute module."""

from __future__ import annotations


class StackelrouteError(Exception):
    """Base class for all library errors."""


class ConfigError(StackelrouteError, ValueError):
    """A game configuration violates one of the model's orderings."""


class NonIncreasingDifficulties(ConfigError):
    pass


class BetaOrderViolated(ConfigError):
    pass


class TerritoryOrderViolated(ConfigError):
    pass


class NonPositiveParameter(ConfigError):
    pass


class CostOrderViolated(ConfigError):
    pass


class InvalidRouteIndex(StackelrouteError, IndexError):
    pass


class UnsupportedConfig(StackelrouteError, ValueError):
    """The requested solver does not cover this kind of configuration."""


class NotTwoRoutes(UnsupportedConfig):
    pass


class NotOneRoute(UnsupportedConfig):
    pass


class HeterogeneousCosts(UnsupportedConfig):
    pass


class NonPositiveStep(StackelrouteError, ValueError):
    pass


class LeaderActionOffGrid(StackelrouteError, ValueError):
    pass


class InvalidRange(StackelrouteError, ValueError):
    pass


class IoFailure(StackelrouteError, OSError):
    pass
