"""Exception hierarchy.

Every error carries a ``where`` tag naming the subsystem that raised it, so
the command line front end can print module-qualified messages.
"""


class FormsensError(Exception):
    where = "formsens"

    def __str__(self):
        return f"{self.where}: {super().__str__()}"


class ValidationError(FormsensError):
    """Bad input: malformed config, unknown names, out-of-range values."""


class NumericalError(FormsensError):
    """A numerical procedure failed on otherwise valid input."""


# probability-model
class OutOfSupport(ValidationError):
    where = "probability-model"


class NonFinite(NumericalError):
    where = "probability-model"


# limit-state
class ExpressionSyntaxError(ValidationError):
    where = "limit-state"

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifier(ValidationError):
    where = "limit-state"

    def __init__(self, name):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name


class DomainError(NumericalError):
    where = "limit-state"


# mvn-cdf
class NotPSD(NumericalError):
    where = "mvn-cdf"


# form-engine
class NoConvergence(NumericalError):
    where = "form-engine"


class ZeroGradient(NumericalError):
    where = "form-engine"


class Infeasible(NumericalError):
    where = "form-engine"


class DimensionMismatch(ValidationError):
    where = "form-engine"


# system-sensitivity
class TooManyCutSets(ValidationError):
    where = "system-sensitivity"


class SubsetTooLarge(ValidationError):
    where = "system-sensitivity"


class InconsistentEstimate(NumericalError):
    where = "system-sensitivity"


class DegenerateProbability(NumericalError):
    where = "system-sensitivity"


# mc-oracle
class DegenerateVariance(NumericalError):
    where = "mc-oracle"


# cli
class ConfigError(ValidationError):
    where = "cli"
