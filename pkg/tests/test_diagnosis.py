import random

import pytest

from desguard.attacks import VulnerabilitySpec, build_ae_model
from desguard.automata import project, state_name
from desguard.diagnosis import (
    ATTACKED,
    CERTAIN,
    CLEAN,
    NORMAL,
    SINK,
    UNCERTAIN,
    build_diagnoser,
    build_verifier,
    confusion_witness,
    diagnoser_initial,
    diagnoser_step,
    first_entered_certain,
    label_compose,
)

from generators import random_model
from langtools import enumerate_traces


class TestLabelCompose:
    def test_demo_chain_labels(self, actuator_model):
        labeled = label_compose(actuator_model)
        doc = labeled.automaton.canonical_doc()
        assert doc["transitions"] == [
            ("((1,1),N)", "a", "((2,2),N)"),
            ("((2,2),N)", "b#a", "((2,3),Y)"),
            ("((2,3),Y)", "c", "((2,4),Y)"),
        ]

    def test_no_attack_events_all_clean(self, actuator_demo):
        vuln = VulnerabilitySpec(actuator_demo.vuln.alphabet)
        model = build_ae_model(actuator_demo.plant, actuator_demo.supervisor, vuln)
        labeled = label_compose(model)
        assert all(label == CLEAN for _, label in labeled.automaton.states)

    def test_label_is_absorbing(
        self, actuator_model, erasure_model, insertion_model, traffic_si_model
    ):
        for model in (actuator_model, erasure_model, insertion_model, traffic_si_model):
            labeled = label_compose(model)
            for (src, _event), dst in labeled.automaton.transitions.items():
                assert not (src[1] == ATTACKED and dst[1] == CLEAN)


class TestDiagnoser:
    def test_demo_diagnoser_mirrors_labeled_model(self, actuator_model):
        # Every event of the demo model is observable, so the estimates are
        # singletons and the diagnoser has the labeled model's shape.
        labeled = label_compose(actuator_model)
        diag = build_diagnoser(labeled, actuator_model.unobservable_events())
        assert len(diag.automaton.states) == len(labeled.automaton.states)
        assert all(len(q) == 1 for q in diag.automaton.states)
        names = {state_name(q): c for q, c in diag.classification.items()}
        assert names == {
            "{((1,1),N)}": NORMAL,
            "{((2,2),N)}": NORMAL,
            "{((2,3),Y)}": CERTAIN,
            "{((2,4),Y)}": CERTAIN,
        }

    def test_erasure_demo_has_uncertain_state(self, erasure_model):
        labeled = label_compose(erasure_model)
        diag = build_diagnoser(labeled, erasure_model.unobservable_events())
        names = {state_name(q) for q, c in diag.classification.items() if c == UNCERTAIN}
        assert "{((3,3),N),((3,5),Y)}" in names

    def test_insertion_demo_never_certain(self, insertion_model):
        labeled = label_compose(insertion_model)
        diag = build_diagnoser(labeled, insertion_model.unobservable_events())
        assert not diag.states_of(CERTAIN)

    def test_classification_exhaustive_and_exclusive(self, traffic_si_model):
        labeled = label_compose(traffic_si_model)
        diag = build_diagnoser(labeled, traffic_si_model.unobservable_events())
        for estimate, kind in diag.classification.items():
            labels = {label for _, label in estimate}
            if kind == NORMAL:
                assert labels == {CLEAN}
            elif kind == CERTAIN:
                assert labels == {ATTACKED}
            else:
                assert labels == {CLEAN, ATTACKED}

    def test_initial_is_normal_without_silent_attacks(self, actuator_model):
        labeled = label_compose(actuator_model)
        diag = build_diagnoser(labeled, actuator_model.unobservable_events())
        assert diag.classification[diag.automaton.initial] == NORMAL

    def test_incremental_matches_batch(self, erasure_model, traffic_si_model):
        for model in (erasure_model, traffic_si_model):
            labeled = label_compose(model)
            unobservable = model.unobservable_events()
            diag = build_diagnoser(labeled, unobservable)
            for trace in enumerate_traces(model.model, 5):
                observation = project(trace, model.observable_events())
                batch = diag.automaton.run(observation)
                estimate = diagnoser_initial(labeled, unobservable)
                for event in observation:
                    estimate = diagnoser_step(labeled, unobservable, estimate, event)
                assert estimate == batch

    def test_step_rejects_inconsistent_observation(self, actuator_model):
        labeled = label_compose(actuator_model)
        estimate = diagnoser_initial(labeled, frozenset())
        with pytest.raises(KeyError):
            diagnoser_step(labeled, frozenset(), estimate, "c")


class TestFirstEnteredCertain:
    def test_empty_without_certain_states(self, insertion_model):
        labeled = label_compose(insertion_model)
        diag = build_diagnoser(labeled, insertion_model.unobservable_events())
        assert first_entered_certain(diag) == frozenset()

    def test_demo_first_certain(self, actuator_model):
        labeled = label_compose(actuator_model)
        diag = build_diagnoser(labeled, actuator_model.unobservable_events())
        assert {state_name(q) for q in first_entered_certain(diag)} == {"{((2,3),Y)}"}

    def test_certain_after_certain_excluded(self, actuator_model):
        # ((2,4),Y) is certain but only entered from the certain ((2,3),Y).
        labeled = label_compose(actuator_model)
        diag = build_diagnoser(labeled, actuator_model.unobservable_events())
        names = {state_name(q) for q in first_entered_certain(diag)}
        assert "{((2,4),Y)}" not in names


class TestVerifier:
    def test_normal_part_has_no_attack_events(
        self, actuator_model, erasure_model, insertion_model
    ):
        for model in (actuator_model, erasure_model, insertion_model):
            artifacts = build_verifier(model)
            used = {e for (_s, e) in artifacts.normal_part.transitions}
            assert not (used & model.attack_events)

    def test_attacked_part_label_flips_only_on_attack_events(
        self, actuator_model, erasure_model, insertion_model
    ):
        for model in (actuator_model, erasure_model, insertion_model):
            artifacts = build_verifier(model)
            aut = artifacts.attacked_part.automaton
            for (src, event), dst in aut.transitions.items():
                if src[1] == CLEAN and dst[1] == ATTACKED:
                    assert event in model.attack_events

    def test_attacked_part_reaches_labels(self, erasure_model):
        artifacts = build_verifier(erasure_model)
        aut = artifacts.attacked_part.automaton
        # Every state can still reach an attacked label (that is the trim rule).
        labeled = {s for s in aut.states if s[1] == ATTACKED}
        assert labeled
        for state in aut.states:
            frontier = {state}
            seen = set(frontier)
            while frontier:
                nxt = set()
                for s in frontier:
                    for _e, t in aut.out_edges(s):
                        if t not in seen:
                            seen.add(t)
                            nxt.add(t)
                frontier = nxt
            assert seen & labeled

    def test_demo_tracker_contains_post_detection_unsafe(self, actuator_model):
        artifacts = build_verifier(actuator_model)
        names = {state_name(s) for s in artifacts.tracker.states}
        assert "(A,((2,4),Y))" in names

    def test_sink_self_loops_are_uncontrollable_plus_attacks(self, actuator_model):
        # For actuator attacks the sink continues on E_uc and the attack
        # artifacts, which are uncontrollable by construction.
        artifacts = build_verifier(actuator_model)
        loops = {
            e
            for (s, e), d in artifacts.completed.transitions.items()
            if s == SINK and d == SINK
        }
        genuine_uncontrollable = {"a", "c"}
        assert loops == genuine_uncontrollable | actuator_model.attack_events

    def test_no_attacked_behavior_yields_empty_pipeline(self, actuator_demo):
        vuln = VulnerabilitySpec(
            actuator_demo.vuln.alphabet,
            unsafe_plant_states=actuator_demo.vuln.unsafe_plant_states,
        )
        model = build_ae_model(actuator_demo.plant, actuator_demo.supervisor, vuln)
        artifacts = build_verifier(model)
        assert artifacts.attacked_part is None
        assert artifacts.verifier is None
        assert artifacts.tracker is None

    def test_verifier_pairs_have_equal_observations(self, erasure_model):
        # Reaching any verifier state plays an attacked trace against an
        # attack-free trace with the same observation.
        pair = confusion_witness(erasure_model)
        assert pair is not None
        normal_trace, attacked_trace = pair
        observable = erasure_model.observable_events()
        assert project(normal_trace, observable) == project(attacked_trace, observable)
        assert erasure_model.model.generates(normal_trace)
        assert erasure_model.model.generates(attacked_trace)
        assert any(e in erasure_model.attack_events for e in attacked_trace)
        assert not any(e in erasure_model.attack_events for e in normal_trace)

    def test_random_models_verifier_states_shape(self):
        rng = random.Random(2)
        for mode in ("ae", "se", "si"):
            model = random_model(rng, mode)
            artifacts = build_verifier(model)
            if artifacts.verifier is None:
                continue
            for state in artifacts.verifier.states:
                _normal_component, (base, label) = state
                assert label in (CLEAN, ATTACKED)
                assert base in model.model.states
