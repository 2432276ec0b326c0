"""Exception hierarchy shared by all eqsearch modules."""


class ContractError(ValueError):
    """An argument violated a documented precondition."""


class InvalidOrderError(ContractError):
    """A joint action contained an order that is illegal in the given state."""


class UndefinedScoreError(ContractError):
    """Scores cannot be computed, e.g. every supply-center count is zero."""


class UnsupportedOracleError(ContractError):
    """The utility oracle cannot be enumerated exactly."""


class DivergenceError(ArithmeticError):
    def __init__(self, step, value):
        super().__init__(f"loss became non-finite ({value!r}) at step {step}")
        self.step = step
        self.value = value


class ConfigError(ValueError):
    """An experiment configuration is malformed or references missing files."""
