"""Core data model for stochastic item-selection instances.

Items are dense integer ids in [0, n). Each item carries a hidden state;
the joint assignment (a realization) is drawn from an explicit finite
prior. Everything downstream (marginals, policy values, checkers) is an
exact expectation over that support, accumulated with ``math.fsum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence, runtime_checkable

from .errors import (
    InvalidInstanceError,
    InvalidParameterError,
    PolicyDomainViolationError,
    UnobservablePartialRealizationError,
)

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Realization:
    """A full assignment of one state to every item (phi: V -> O)."""

    states: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(int(s) for s in self.states))

    def __len__(self) -> int:
        return len(self.states)

    def state_of(self, item: int) -> int:
        if not 0 <= item < len(self.states):
            raise InvalidInstanceError(f"item {item} out of range for {len(self.states)} items")
        return self.states[item]

    def restrict(self, items: Iterable[int]) -> "PartialRealization":
        """Observations of this realization on the given item subset."""
        return PartialRealization.from_pairs((e, self.state_of(e)) for e in items)


@dataclass(frozen=True, order=True)
class PartialRealization:
    """An observation set psi: distinct items with their observed states.

    Stored canonically as a tuple of (item, state) pairs sorted by item, so
    equal observation sets compare and hash equal regardless of the order
    in which observations were made.
    """

    observations: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(e), int(s)) for e, s in self.observations))
        items = [e for e, _ in pairs]
        if len(set(items)) != len(items):
            raise InvalidParameterError(f"duplicate items in partial realization: {items}")
        object.__setattr__(self, "observations", pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "PartialRealization":
        return cls(tuple(pairs))

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(e for e, _ in self.observations)

    @property
    def domain_set(self) -> frozenset[int]:
        return frozenset(e for e, _ in self.observations)

    def __len__(self) -> int:
        return len(self.observations)

    def has(self, item: int) -> bool:
        return any(e == item for e, _ in self.observations)

    def state_of(self, item: int) -> int:
        for e, s in self.observations:
            if e == item:
                return s
        raise InvalidParameterError(f"item {item} not observed")

    def with_observation(self, item: int, state: int) -> "PartialRealization":
        return PartialRealization(self.observations + ((item, state),))

    def restrict_to(self, items: Iterable[int]) -> "PartialRealization":
        keep = set(items)
        return PartialRealization(tuple(p for p in self.observations if p[0] in keep))


EMPTY = PartialRealization()


@dataclass(frozen=True)
class Prior:
    """Explicit finite-support distribution over realizations."""

    realizations: tuple[Realization, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "realizations", tuple(self.realizations))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        if len(self.realizations) != len(self.probabilities):
            raise InvalidInstanceError("support and probability lengths differ")
        if not self.realizations:
            raise InvalidInstanceError("prior support is empty")
        if len(set(self.realizations)) != len(self.realizations):
            raise InvalidInstanceError("prior support contains duplicate realizations")
        if any(p <= 0.0 for p in self.probabilities):
            raise InvalidInstanceError("prior probabilities must be strictly positive")
        total = math.fsum(self.probabilities)
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidInstanceError(f"prior probabilities sum to {total}, not 1")

    def __len__(self) -> int:
        return len(self.realizations)

    def items(self) -> Iterable[tuple[Realization, float]]:
        return zip(self.realizations, self.probabilities)

    def consistent_indices(self, psi: PartialRealization) -> list[int]:
        return [i for i, phi in enumerate(self.realizations) if is_consistent(phi, psi)]


@runtime_checkable
class UtilityFunction(Protocol):
    """f(S, phi): deterministic value of an item set under a realization."""

    def evaluate(self, items: frozenset[int], realization: Realization) -> float:
        ...


@dataclass(frozen=True)
class TableUtility:
    """Utility given extensionally: one value per (subset, support realization).

    ``values`` maps each subset of items to a tuple aligned with the order
    used to index realizations (``realization_index``); this is the format
    the instance-file ``table`` descriptor deserializes into.
    """

    values: dict
    realization_index: dict

    @classmethod
    def from_aligned(cls, values: dict, realizations: Sequence[Realization]) -> "TableUtility":
        idx = {phi: i for i, phi in enumerate(realizations)}
        table = {frozenset(k): tuple(float(v) for v in vs) for k, vs in values.items()}
        for key, vs in table.items():
            if len(vs) != len(realizations):
                raise InvalidInstanceError(f"table row for {sorted(key)} has {len(vs)} values")
        return cls(values=table, realization_index=idx)

    def evaluate(self, items: frozenset[int], realization: Realization) -> float:
        key = frozenset(items)
        try:
            row = self.values[key]
        except KeyError:
            raise InvalidInstanceError(f"utility table missing subset {sorted(key)}") from None
        try:
            i = self.realization_index[realization]
        except KeyError:
            raise InvalidInstanceError(f"realization {realization.states} not in utility table") from None
        return row[i]


@dataclass(frozen=True)
class Instance:
    """Bundle consumed by solvers, checkers, and the CLI."""

    n: int
    state_count: int
    prior: Prior
    utility: UtilityFunction
    system: "object"

    def __post_init__(self):
        for phi in self.prior.realizations:
            if len(phi) != self.n:
                raise InvalidInstanceError(f"realization of length {len(phi)} in an {self.n}-item instance")
            if any(not 0 <= s < self.state_count for s in phi.states):
                raise InvalidInstanceError("realization state outside [0, state_count)")
        sys_n = getattr(self.system, "n", None)
        if sys_n is not None and sys_n != self.n:
            raise InvalidInstanceError(f"system over {sys_n} items attached to an {self.n}-item instance")

    def ground_set(self) -> range:
        return range(self.n)


def is_consistent(phi: Realization, psi: PartialRealization) -> bool:
    """True iff phi agrees with every observation in psi (phi ~ psi)."""
    return all(phi.state_of(e) == s for e, s in psi.observations)


def is_subrealization(psi_a: PartialRealization, psi_b: PartialRealization) -> bool:
    """True iff dom(psi_a) is a subset of dom(psi_b) and the states agree there."""
    lookup = dict(psi_b.observations)
    return all(lookup.get(e) == s for e, s in psi_a.observations)


def conditional_prior(prior: Prior, psi: PartialRealization) -> Prior:
    """Filter the support to realizations consistent with psi and renormalize."""
    idx = prior.consistent_indices(psi)
    if not idx:
        raise UnobservablePartialRealizationError(
            f"no support realization is consistent with {psi.observations}"
        )
    mass = math.fsum(prior.probabilities[i] for i in idx)
    return Prior(
        realizations=tuple(prior.realizations[i] for i in idx),
        probabilities=tuple(prior.probabilities[i] / mass for i in idx),
    )


def base_value(inst: Instance) -> float:
    """Expected utility of the empty set; not assumed zero."""
    empty = frozenset()
    return math.fsum(p * inst.utility.evaluate(empty, phi) for phi, p in inst.prior.items())


def marginal_item(inst: Instance, psi: PartialRealization, item: int) -> float:
    """Expected marginal value of adding one item on top of psi.

    E[f(dom(psi) + item, Phi) - f(dom(psi), Phi) | Phi ~ psi], exact over the
    conditional support. Zero when the item is already in dom(psi).
    """
    dom = psi.domain_set
    if item in dom:
        return 0.0
    cond = conditional_prior(inst.prior, psi)
    with_item = dom | {item}
    return math.fsum(
        p * (inst.utility.evaluate(with_item, phi) - inst.utility.evaluate(dom, phi))
        for phi, p in cond.items()
    )


def marginal_policy(inst: Instance, psi: PartialRealization, policy) -> float:
    """Expected marginal value of running a policy tree on top of psi.

    The policy may only select items outside dom(psi); a violation raises
    PolicyDomainViolationError during simulation.
    """
    from .policy import execute  # local import to avoid a module cycle

    dom = psi.domain_set
    cond = conditional_prior(inst.prior, psi)
    terms = []
    for phi, p in cond.items():
        selected, _trace = execute(policy, phi)
        overlap = selected & dom
        if overlap:
            raise PolicyDomainViolationError(f"policy revisited observed items {sorted(overlap)}")
        terms.append(
            p * (inst.utility.evaluate(dom | selected, phi) - inst.utility.evaluate(dom, phi))
        )
    return math.fsum(terms)


def expected_utility(inst: Instance, policy) -> float:
    """f_avg(policy): expectation of f(V(policy, Phi), Phi) over the prior."""
    from .policy import execute

    terms = []
    for phi, p in inst.prior.items():
        selected, _trace = execute(policy, phi)
        terms.append(p * inst.utility.evaluate(selected, phi))
    return math.fsum(terms)
