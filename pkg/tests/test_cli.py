import json

import pytest
from click.testing import CliRunner

from desguard.cli import main
from desguard.modelio import dumps_doc, model_to_doc
from desguard.systems import (
    actuator_demo_system,
    traffic_admissible,
    traffic_alphabet,
    traffic_plant,
)


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def demo_files(tmp_path):
    system = actuator_demo_system()
    plant = tmp_path / "plant.json"
    supervisor = tmp_path / "supervisor.json"
    plant.write_text(
        dumps_doc(
            model_to_doc(system.plant, system.vuln.alphabet, system.vuln.unsafe_plant_states)
        )
    )
    supervisor.write_text(dumps_doc(model_to_doc(system.supervisor, system.vuln.alphabet)))
    return plant, supervisor


@pytest.fixture()
def demo_model_file(runner, demo_files, tmp_path):
    plant, supervisor = demo_files
    out = tmp_path / "model.json"
    result = runner.invoke(
        main,
        ["build", str(plant), str(supervisor), "--mode", "ae", "--vulnerable", "b",
         "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture()
def traffic_files(tmp_path):
    plant = traffic_plant()
    alphabet = traffic_alphabet()
    unsafe = frozenset((i, i) for i in range(1, 5))
    plant_path = tmp_path / "traffic_plant.json"
    spec_path = tmp_path / "traffic_spec.json"
    plant_path.write_text(dumps_doc(model_to_doc(plant, alphabet, unsafe)))
    spec_path.write_text(dumps_doc(model_to_doc(traffic_admissible(plant), alphabet)))
    return plant_path, spec_path


class TestBuild:
    def test_build_demo_model(self, demo_model_file):
        doc = json.loads(demo_model_file.read_text())
        assert doc["format"] == "attacked-model"
        assert len(doc["states"]) == 4
        assert doc["attack_events"] == ["b#a"]

    def test_build_matches_library_construction(self, demo_model_file):
        from desguard.attacks import build_ae_model
        from desguard.modelio import attacked_to_doc

        system = actuator_demo_system()
        expected = attacked_to_doc(build_ae_model(system.plant, system.supervisor, system.vuln))
        assert json.loads(demo_model_file.read_text()) == expected

    def test_traffic_erasure_build_matches_library(self, runner, traffic_files, tmp_path):
        from desguard.attacks import build_se_model
        from desguard.modelio import attacked_to_doc
        from desguard.systems import traffic_system

        plant_path, spec_path = traffic_files
        supervisor_path = tmp_path / "sup.json"
        assert runner.invoke(
            main, ["synthesize", str(plant_path), str(spec_path), "--out", str(supervisor_path)]
        ).exit_code == 0
        model_path = tmp_path / "model.json"
        assert runner.invoke(
            main,
            ["build", str(plant_path), str(supervisor_path), "--mode", "se",
             "--vulnerable", "a3,b3", "--out", str(model_path)],
        ).exit_code == 0
        system = traffic_system(vulnerable_sensors={"a3", "b3"})
        expected = attacked_to_doc(
            build_se_model(system.plant, system.supervisor, system.vuln)
        )
        assert json.loads(model_path.read_text()) == expected

    def test_empty_vulnerable_is_an_error(self, runner, demo_files):
        plant, supervisor = demo_files
        result = runner.invoke(
            main, ["build", str(plant), str(supervisor), "--mode", "ae", "--vulnerable", " "]
        )
        assert result.exit_code == 2
        assert "vulnerable set empty" in result.output

    def test_vulnerable_must_match_mode(self, runner, demo_files):
        plant, supervisor = demo_files
        result = runner.invoke(
            main, ["build", str(plant), str(supervisor), "--mode", "ae", "--vulnerable", "a"]
        )
        assert result.exit_code == 2
        assert "controllable" in result.output

    def test_corrupt_file_is_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        result = runner.invoke(
            main, ["build", str(bad), str(bad), "--mode", "ae", "--vulnerable", "b"]
        )
        assert result.exit_code == 2


class TestCheck:
    def test_demo_is_unsafe_exit_1(self, runner, demo_model_file):
        result = runner.invoke(main, ["check", str(demo_model_file)])
        assert result.exit_code == 1
        doc = json.loads(result.stdout)
        assert doc["safe"] is False
        assert doc["violated_condition"] == "uncontrollable-unsafe"
        assert doc["counterexample"] == ["a", "b#a", "c"]
        assert sorted(doc["x_uc"]) == ["(2,3)", "(2,4)"]

    def test_all_methods_agree(self, runner, demo_model_file):
        result = runner.invoke(main, ["check", str(demo_model_file), "--method", "all"])
        assert result.exit_code == 1
        doc = json.loads(result.stdout)
        assert doc["methods_agree"] is True

    def test_corrupt_model_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[]")
        result = runner.invoke(main, ["check", str(bad)])
        assert result.exit_code == 2

    def test_traffic_erasure_safe_with_deadlock_warning(
        self, runner, traffic_files, tmp_path
    ):
        plant_path, spec_path = traffic_files
        supervisor_path = tmp_path / "supervisor.json"
        result = runner.invoke(
            main, ["synthesize", str(plant_path), str(spec_path), "--out", str(supervisor_path)]
        )
        assert result.exit_code == 0, result.output
        model_path = tmp_path / "se_model.json"
        result = runner.invoke(
            main,
            ["build", str(plant_path), str(supervisor_path), "--mode", "se",
             "--vulnerable", "a3,b3", "--out", str(model_path)],
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(main, ["check", str(model_path), "--out", str(tmp_path / "v.json")])
        assert result.exit_code == 0
        assert "deadlocks" in result.output
        doc = json.loads((tmp_path / "v.json").read_text())
        assert doc["safe"] is True
        assert doc["deadlocks"] == ["(0,3)", "(3,0)", "(3,5)", "(5,3)"]


class TestExport:
    def test_plant_dot(self, runner, demo_files):
        plant, _ = demo_files
        result = runner.invoke(main, ["export", str(plant)])
        assert result.exit_code == 0
        assert result.output.startswith("digraph")
        assert '"4" [shape=box];' in result.output

    def test_model_dot_has_dashed_attack(self, runner, demo_model_file):
        result = runner.invoke(main, ["export", str(demo_model_file)])
        assert result.exit_code == 0
        assert 'label="b#a", style=dashed' in result.output


class TestSimulate:
    def test_all_out_log(self, runner, demo_model_file):
        result = runner.invoke(main, ["simulate", str(demo_model_file)])
        assert result.exit_code == 0
        records = [json.loads(line) for line in result.output.splitlines()]
        assert records[0]["step"] == 0
        assert records[-1]["plant"] == "4"
        assert records[-1]["safe_mode"] is True

    def test_zero_steps_logs_initial_only(self, runner, demo_model_file):
        result = runner.invoke(main, ["simulate", str(demo_model_file), "--max-steps", "0"])
        records = [json.loads(line) for line in result.output.splitlines()]
        assert len(records) == 1
        assert records[0]["event"] is None

    def test_random_zero_probability_never_attacks(self, runner, demo_model_file):
        result = runner.invoke(
            main, ["simulate", str(demo_model_file), "--policy", "random:0.0"]
        )
        records = [json.loads(line) for line in result.output.splitlines()]
        assert all("#" not in (r["event"] or "") for r in records)

    def test_unknown_policy_exit_2(self, runner, demo_model_file):
        result = runner.invoke(
            main, ["simulate", str(demo_model_file), "--policy", "nonsense"]
        )
        assert result.exit_code == 2

    def test_script_policy(self, runner, demo_model_file, tmp_path):
        script = tmp_path / "script.json"
        script.write_text(json.dumps([None, None, None]))
        result = runner.invoke(
            main, ["simulate", str(demo_model_file), "--policy", str(script)]
        )
        records = [json.loads(line) for line in result.output.splitlines()]
        assert all("#" not in (r["event"] or "") for r in records)


class TestSynthesize:
    def test_spec_equals_plant_gives_full_supervisor(self, runner, demo_files, tmp_path):
        plant, _ = demo_files
        out = tmp_path / "sup.json"
        result = runner.invoke(main, ["synthesize", str(plant), str(plant), "--out", str(out)])
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        # One supervisor state per plant state, same transition count.
        assert len(doc["transitions"]) == 3

    def test_unobservable_spec_refused_with_witness(self, runner, tmp_path):
        from desguard.automata import Alphabet, Automaton

        plant = Automaton.build(
            "0",
            [("0", "u", "1"), ("0", "v", "2"), ("1", "c", "3"), ("2", "c", "4")],
        )
        admissible = Automaton.build(
            "0",
            [("0", "u", "1"), ("0", "v", "2"), ("2", "c", "4")],
            events=["u", "v", "c"],
        )
        alphabet = Alphabet.from_sets(["u", "v", "c"], observable=["c"], controllable=["c"])
        plant_path = tmp_path / "p.json"
        spec_path = tmp_path / "s.json"
        plant_path.write_text(dumps_doc(model_to_doc(plant, alphabet)))
        spec_path.write_text(dumps_doc(model_to_doc(admissible, alphabet)))
        result = runner.invoke(main, ["synthesize", str(plant_path), str(spec_path)])
        assert result.exit_code == 1
        assert "not observable" in result.output

    def test_traffic_synthesis_avoids_collisions(self, runner, traffic_files, tmp_path):
        from desguard.automata import parallel_compose, state_name
        from desguard.modelio import load_path

        plant_path, spec_path = traffic_files
        out = tmp_path / "sup.json"
        result = runner.invoke(
            main, ["synthesize", str(plant_path), str(spec_path), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        supervisor = load_path(str(out)).automaton
        plant_doc = load_path(str(plant_path))
        closed = parallel_compose(supervisor, plant_doc.automaton)
        plant_states = {s[1] for s in closed.states}
        assert not plant_states & plant_doc.unsafe
        assert "(5,5)" in {state_name(s) for s in plant_states}
