"""Exception hierarchy shared by all solver and checker modules."""


class BibranchError(Exception):
    pass


class InstanceError(BibranchError, ValueError):
    """Malformed instance text or an instance violating its invariants."""


class Infeasible(BibranchError):
    """No feasible object exists (arborescence, branching, bibranching, flow)."""


class NegativeWeight(BibranchError, ValueError):
    pass


class TooLarge(BibranchError, ValueError):
    """Input exceeds the size an exhaustive routine is willing to sweep."""


class GroundTooLarge(TooLarge):
    pass


class BoxTooLarge(TooLarge):
    pass


class UnboundedDual(BibranchError):
    """(D) is unbounded, i.e. the instance admits no bibranching."""


class InfeasibleInput(BibranchError, ValueError):
    pass


class NotOptimalFlow(BibranchError):
    pass


class NotOptimalPotential(BibranchError):
    pass


class InputNotOptimal(BibranchError):
    pass


class NegativeRootWeight(BibranchError, ValueError):
    pass


class CertificateError(BibranchError, ValueError):
    """Malformed certificate, or one issued for a different instance."""
