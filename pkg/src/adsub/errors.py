"""Exception hierarchy shared across the package."""


class AdsubError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(AdsubError, ValueError):
    """A constructor or operation received an out-of-contract argument."""


class InvalidInstanceError(AdsubError, ValueError):
    """Instance components disagree (item counts, state ranges, prior mass)."""


class UnobservablePartialRealizationError(AdsubError):
    """A partial realization has zero mass under the prior; conditioning on it is undefined."""


class PolicyDomainViolationError(AdsubError):
    """A policy selected an item inside the conditioning domain."""


class MalformedPolicyError(AdsubError):
    """A policy tree is missing a branch for an observed state."""


class InvalidRestrictionError(AdsubError, ValueError):
    """Restriction arguments violate the disjointness or feasibility preconditions."""


class InvalidWitnessError(AdsubError, ValueError):
    """A hand-supplied witness does not satisfy the refutation preconditions."""


class CapacityError(AdsubError):
    """An exact enumeration would exceed its configured budget."""


class EdgeListParseError(AdsubError, ValueError):
    """An edge-list line could not be parsed."""


class DuplicateEdgeError(AdsubError, ValueError):
    """The same directed edge appears twice in a graph description."""
