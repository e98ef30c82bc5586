"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class SubscaleError(Exception):
    exit_code = 1


class ConfigError(SubscaleError):
    exit_code = 2


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnresolvedReferenceError(ConfigError):
    pass


class UnknownAttributeError(ConfigError):
    pass


class UnsupportedRadiusError(ConfigError):
    pass


class CapacityError(SubscaleError):
    exit_code = 3


class BudgetExceededError(CapacityError):
    pass


class InstanceTooLargeError(CapacityError):
    pass


class ContractViolation(SubscaleError):
    exit_code = 4


class ScopeError(ContractViolation):
    pass


class LifecycleError(ContractViolation):
    pass


class IntegrityError(SubscaleError):
    pass


class ConsistencyError(SubscaleError):
    pass
