"""Exception hierarchy shared by all modules."""


class TransactiveError(Exception):
    """Base class for every error raised by the package."""


class TopologyError(TransactiveError, ValueError):
    pass


class UnknownAgentError(TopologyError, KeyError):
    def __init__(self, agent):
        super().__init__(f"unknown agent {agent!r}")
        self.agent = agent

    def __str__(self):
        return self.args[0]


class EmptyTopologyError(TopologyError):
    pass


class DisconnectedError(TopologyError):
    pass


class IncompleteTableError(TransactiveError):
    pass


class CycleError(TransactiveError):
    pass


class OverlayMismatchError(TransactiveError, ValueError):
    pass


class ZeroDemandError(TransactiveError, ZeroDivisionError):
    pass


class NonPositivePriceError(TransactiveError, ValueError):
    pass


class ZeroGeneratorError(TransactiveError, ValueError):
    pass


class InfeasibleError(TransactiveError):
    def __init__(self, message, demand_range=None, supply_range=None):
        super().__init__(message)
        self.demand_range = demand_range
        self.supply_range = supply_range


class ProtocolError(TransactiveError):
    """Raised when the round-synchronous message discipline is broken."""


class ScenarioError(TransactiveError):
    pass


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))
