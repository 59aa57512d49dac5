"""Exception types raised across the package."""


class BuildDagError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(BuildDagError, ValueError):
    pass


class SelfLoopError(BuildDagError, ValueError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"self loop at node {node}")


class CycleDetectedError(BuildDagError, ValueError):
    def __init__(self, witness):
        self.witness = list(witness)
        super().__init__(f"directed cycle through nodes {self.witness}")


class NoEdgesError(BuildDagError, ValueError):
    pass


class NotPositiveDefiniteError(BuildDagError, ValueError):
    pass


class TooFewSamplesError(BuildDagError, ValueError):
    pass


class EmptySelectionError(BuildDagError, ValueError):
    pass


class SingularCovarianceError(BuildDagError, ArithmeticError):
    pass


class ConfigError(BuildDagError, ValueError):
    pass


class DimensionMismatchError(BuildDagError, ValueError):
    pass


class ZeroTruthError(BuildDagError, ValueError):
    pass
