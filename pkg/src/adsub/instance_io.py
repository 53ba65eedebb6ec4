"""Instance-file and policy serialization.

Instance files are JSON with fields ``n``, ``state_count``, ``prior``
(list of {states, prob}), ``utility`` (an extensional ``table`` or a named
application constructor), and ``system``. Subset keys in tables are the
sorted item ids joined by '-' (empty string for the empty set). Policies
serialize as nested {item, children} objects with "stop" leaves.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .active_learning import generate_al_instance
from .errors import InvalidParameterError
from .model import Instance, Prior, Realization, TableUtility
from .policy import STOP, Policy
from .systems import (
    CardinalitySystem,
    ExplicitSystem,
    IndependenceSystem,
    KnapsackSystem,
    PartitionMatroidSystem,
)
from .viral import DEFAULT_EDGE_PROB, Graph, ic_instance, parse_edge_list


def subset_key(items) -> str:
    return "-".join(str(e) for e in sorted(items))


def parse_subset_key(key: str) -> frozenset[int]:
    if not key:
        return frozenset()
    return frozenset(int(tok) for tok in key.split("-"))


def system_to_descriptor(system: IndependenceSystem) -> dict:
    if isinstance(system, CardinalitySystem):
        return {"kind": "cardinality", "k": system.k}
    if isinstance(system, KnapsackSystem):
        return {"kind": "knapsack", "costs": list(system.costs), "budget": system.budget}
    if isinstance(system, PartitionMatroidSystem):
        return {
            "kind": "partition",
            "blocks": [list(b) for b in system.blocks],
            "limits": list(system.limits),
        }
    if isinstance(system, ExplicitSystem):
        return {"kind": "explicit", "sets": sorted(sorted(s) for s in system.sets)}
    raise InvalidParameterError(f"system {type(system).__name__} has no file descriptor")


def system_from_descriptor(desc: dict, n: int) -> IndependenceSystem:
    kind = desc.get("kind")
    if kind == "cardinality":
        return CardinalitySystem(n=n, k=int(desc["k"]))
    if kind == "knapsack":
        return KnapsackSystem(costs=tuple(desc["costs"]), budget=float(desc["budget"]))
    if kind == "partition":
        return PartitionMatroidSystem(
            blocks=tuple(tuple(b) for b in desc["blocks"]),
            limits=tuple(desc["limits"]),
        )
    if kind == "explicit":
        return ExplicitSystem(n, [frozenset(s) for s in desc["sets"]])
    raise InvalidParameterError(f"unknown system kind {kind!r}")


def instance_from_dict(data: dict) -> Instance:
    utility_desc = data.get("utility")
    if utility_desc is None:
        raise InvalidParameterError("instance file is missing the utility field")
    kind = utility_desc.get("kind")
    if kind == "table":
        return _table_instance_from_dict(data)
    if kind == "active-learning":
        al = generate_al_instance(
            num_hypotheses=int(utility_desc["hypotheses"]),
            num_points=int(utility_desc["points"]),
            num_queries=int(utility_desc["queries"]),
            labels_per_point=utility_desc["labels"],
            k=int(utility_desc.get("k", 2)),
            seed=int(utility_desc.get("seed", 0)),
        )
        inst = al.instance
        if "system" in data:
            inst = Instance(
                n=inst.n,
                state_count=inst.state_count,
                prior=inst.prior,
                utility=inst.utility,
                system=system_from_descriptor(data["system"], inst.n),
            )
        return inst
    if kind == "independent-cascade":
        graph = _graph_from_descriptor(utility_desc)
        if "system" in data:
            system = system_from_descriptor(data["system"], graph.n)
        else:
            system = CardinalitySystem(n=graph.n, k=int(utility_desc.get("k", graph.n)))
        return ic_instance(graph, system=system)
    raise InvalidParameterError(f"unknown utility kind {kind!r}")


def _graph_from_descriptor(desc: dict) -> Graph:
    if "path" in desc:
        text = Path(desc["path"]).read_text()
        return parse_edge_list(text, default_prob=float(desc.get("default_prob", DEFAULT_EDGE_PROB)))
    edges = tuple((int(u), int(v), float(p)) for u, v, p in desc["edges"])
    n = desc.get("n")
    if n is None:
        n = 1 + max(max(u, v) for u, v, _p in edges) if edges else 0
    return Graph(n=int(n), edges=edges)


def _table_instance_from_dict(data: dict) -> Instance:
    n = int(data["n"])
    state_count = int(data["state_count"])
    realizations = tuple(Realization(tuple(entry["states"])) for entry in data["prior"])
    probabilities = tuple(float(entry["prob"]) for entry in data["prior"])
    prior = Prior(realizations=realizations, probabilities=probabilities)
    raw = data["utility"]["values"]
    values = {parse_subset_key(k): tuple(v) for k, v in raw.items()}
    utility = TableUtility.from_aligned(values, realizations)
    system = system_from_descriptor(data["system"], n)
    return Instance(n=n, state_count=state_count, prior=prior, utility=utility, system=system)


def instance_to_dict(inst: Instance) -> dict:
    if not isinstance(inst.utility, TableUtility):
        raise InvalidParameterError("only table utilities serialize extensionally")
    order = sorted(inst.utility.realization_index, key=inst.utility.realization_index.get)
    if tuple(order) != inst.prior.realizations:
        raise InvalidParameterError("table order does not match the prior support order")
    return {
        "n": inst.n,
        "state_count": inst.state_count,
        "prior": [
            {"states": list(phi.states), "prob": p} for phi, p in inst.prior.items()
        ],
        "utility": {
            "kind": "table",
            "values": {
                subset_key(k): list(v) for k, v in sorted(inst.utility.values.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
            },
        },
        "system": system_to_descriptor(inst.system),
    }


def load_instance(source: Union[str, Path]) -> Instance:
    name = str(source)
    if name == "builtin:lower-bound":
        from .sampling import lower_bound_instance

        return lower_bound_instance()
    if name == "builtin:counterexample":
        from .checkers import policy_adaptive_counterexample

        return policy_adaptive_counterexample()[0]
    data = json.loads(Path(source).read_text())
    return instance_from_dict(data)


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def policy_to_obj(policy: Policy):
    if policy.is_stop:
        return "stop"
    return {
        "item": policy.item,
        "children": {str(state): policy_to_obj(child) for state, child in policy.children},
    }


def policy_from_obj(obj) -> Policy:
    if obj == "stop":
        return STOP
    children = {int(state): policy_from_obj(child) for state, child in obj["children"].items()}
    return Policy.select(obj["item"], children)


def dump_policy(policy: Policy) -> str:
    return json.dumps(policy_to_obj(policy), indent=2, sort_keys=True)


def load_policy(text: str) -> Policy:
    return policy_from_obj(json.loads(text))
