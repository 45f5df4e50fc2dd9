"""Exception types raised across the package."""


class TopologyError(ValueError):
    """Base class for invalid wiring descriptions."""


class SelfLoop(TopologyError):
    """An antenna was wired to itself."""


class DuplicateEdge(TopologyError):
    """The same transmission line appears more than once."""


class WrongEdgeCount(TopologyError):
    """The number of lines differs from the m-1 line budget."""


class IndexOutOfRange(TopologyError):
    """An antenna index lies outside 1..m."""


class NotEffective(TopologyError):
    """Some ordinary antenna has no wired path to the reference."""


class ScenarioError(ValueError):
    """Physically inconsistent scenario parameters."""


class AmplitudeMismatch(ValueError):
    """Gain amplitudes disagree with the scenario's nominal values."""


class SingularFisherMatrix(ValueError):
    """Information matrix cannot be inverted reliably; the wiring is not
    effective or the gains are degenerate."""


class BudgetError(ValueError):
    """Time budget too small for even one collection round."""


class DivisionHazard(ArithmeticError):
    """An intermediate gain estimate fell below the magnitude floor, so
    propagating through it would only amplify noise."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
