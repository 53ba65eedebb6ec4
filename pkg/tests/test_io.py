"""Instance-file and policy serialization round trips, plus the CLI surface."""

import json
import subprocess
import sys

import pytest

from adsub.errors import InvalidParameterError
from adsub.fixtures import random_independent_instance
from adsub.instance_io import (
    dump_policy,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    load_policy,
    parse_subset_key,
    save_instance,
    subset_key,
    system_from_descriptor,
    system_to_descriptor,
)
from adsub.model import EMPTY, expected_utility, marginal_item
from adsub.policy import optimal_restricted_policy
from adsub.sampling import lower_bound_instance
from adsub.systems import (
    CardinalitySystem,
    ExplicitSystem,
    KnapsackSystem,
    PartitionMatroidSystem,
)


def test_subset_keys():
    assert subset_key(frozenset()) == ""
    assert subset_key({2, 0}) == "0-2"
    assert parse_subset_key("0-2") == frozenset({0, 2})
    assert parse_subset_key("") == frozenset()


@pytest.mark.parametrize(
    "system",
    [
        CardinalitySystem(n=4, k=2),
        KnapsackSystem(costs=(1.0, 2.0, 0.5, 1.5), budget=2.5),
        PartitionMatroidSystem(blocks=((0, 1), (2, 3)), limits=(1, 2)),
        ExplicitSystem(4, [{0, 1}, {2}], close=True),
    ],
)
def test_system_descriptor_round_trip(system):
    desc = system_to_descriptor(system)
    again = system_from_descriptor(json.loads(json.dumps(desc)), system.n)
    for bits in range(1 << system.n):
        s = frozenset(e for e in range(system.n) if bits >> e & 1)
        assert system.contains(s) == again.contains(s)


@pytest.mark.parametrize("seed", range(4))
def test_instance_round_trip(tmp_path, seed):
    inst = random_independent_instance(seed, max_items=3, max_states=2)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    again = load_instance(path)
    assert again.n == inst.n and again.state_count == inst.state_count
    assert again.prior == inst.prior
    for e in range(inst.n):
        assert marginal_item(again, EMPTY, e) == pytest.approx(
            marginal_item(inst, EMPTY, e), abs=1e-12
        )


def test_builtin_names():
    inst = load_instance("builtin:lower-bound")
    assert inst.n == 1
    counter = load_instance("builtin:counterexample")
    assert counter.n == 7


def test_generator_descriptors():
    inst = instance_from_dict(
        {"utility": {"kind": "active-learning", "hypotheses": 6, "points": 3,
                     "queries": 3, "labels": 2, "k": 2, "seed": 4}}
    )
    assert inst.n == 3
    cascade = instance_from_dict(
        {"utility": {"kind": "independent-cascade",
                     "edges": [[0, 1, 0.5], [1, 2, 1.0]], "k": 1}}
    )
    assert cascade.n == 3 and cascade.system.k == 1


def test_policy_serialization_round_trip():
    inst = lower_bound_instance()
    policy = optimal_restricted_policy(inst, inst.system).policy
    text = dump_policy(policy)
    again = load_policy(text)
    assert again == policy
    assert expected_utility(inst, again) == pytest.approx(1.0, abs=1e-12)
    assert json.loads(text)["item"] == 0


def test_table_required_for_serialization():
    inst = load_instance("builtin:counterexample")
    with pytest.raises(InvalidParameterError):
        instance_to_dict(inst)


def test_cli_gap_and_check(tmp_path):
    inst = lower_bound_instance()
    path = tmp_path / "lb.json"
    save_instance(inst, path)
    gap = subprocess.run(
        [sys.executable, "-m", "adsub.cli", "gap", "--instance", str(path), "--rate", "0.5"],
        capture_output=True,
        text=True,
    )
    assert gap.returncode == 0
    payload = json.loads(gap.stdout[: gap.stdout.rindex("}") + 1])
    assert payload["gap"] == pytest.approx(2.0)
    check = subprocess.run(
        [sys.executable, "-m", "adsub.cli", "check", "--instance", str(path),
         "--class", "policywise"],
        capture_output=True,
        text=True,
    )
    assert check.returncode == 0
    assert json.loads(check.stdout)["holds"] is True


def test_cli_check_fails_on_counterexample():
    proc = subprocess.run(
        [sys.executable, "-m", "adsub.cli", "check", "--instance",
         "builtin:counterexample", "--class", "policy-adaptive"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    payload = json.loads(proc.stdout)
    assert payload["holds"] is False
    assert "witness" in payload


def test_cli_run_edge_list_persists_id_map(tmp_path):
    edge_file = tmp_path / "g.txt"
    edge_file.write_text("# demo\nalpha beta\nbeta gamma 0.4\ngamma alpha\n")
    cfg = {
        "instance": {"kind": "edge-list", "path": str(edge_file)},
        "algorithms": ["RDM"],
        "rates": [1.0],
        "samples_per_rate": 2,
        "trials": 20,
        "k": 2,
        "master_seed": 6,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "rows.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "adsub.cli", "run", "--config", str(cfg_path),
         "--out", str(out), "--edge-prob", "0.3", "--k", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    id_map = json.loads((tmp_path / "rows.csv.idmap.json").read_text())
    assert id_map == {"alpha": 0, "beta": 1, "gamma": 2}


def test_cli_run_writes_csv(tmp_path):
    cfg = {
        "instance": {"kind": "lower-bound"},
        "algorithms": ["AG"],
        "rates": [0.5, 1.0],
        "samples_per_rate": 4,
        "trials": 5,
        "k": 1,
        "master_seed": 3,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "rows.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "adsub.cli", "run", "--config", str(cfg_path),
         "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    assert any(line.startswith("algorithm,") for line in lines)
    assert (tmp_path / "rows.csv.summary.csv").exists()
