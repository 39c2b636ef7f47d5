import numpy as np
import pytest

from restartfa.closure import overall_decision
from restartfa.engine import round_table
from restartfa.machine import CENT, DOLLAR, tape_word
from restartfa.qcfa import (
    Measurement,
    QcfaCaps,
    QcfaSpec,
    Unitary,
    lift_reset_to_qcfa,
    qcfa_decision,
    qcfa_from_jsonable,
    qcfa_round,
    qcfa_to_jsonable,
    run_qcfa,
    validate_qcfa,
)

def sweep_right_toy():
    prog, delta = {}, {}
    for sym in (CENT, "a", DOLLAR):
        prog[(0, sym)] = Unitary(np.eye(1, dtype=complex))
        delta[(0, sym, "unit")] = (1, 0) if sym == DOLLAR else (0, 1)
    return QcfaSpec(1, ("sweep", "acc", "rej"), 0, frozenset({1}), frozenset({2}),
                    ("a",), prog, delta)


class TestRunQcfa:
    def test_sweep_and_accept(self):
        toy = sweep_right_toy()
        res = run_qcfa(toy, tape_word("aa", toy.alphabet))
        assert res.P_acc == 1.0
        assert res.residual == 0.0
        assert res.expected_steps == 4.0

    @pytest.mark.filterwarnings("ignore::restartfa.engine.NonterminationWarning")
    def test_trace_conservation_stepwise(self, am_qfa):
        lift = lift_reset_to_qcfa(am_qfa)
        word = tape_word("a", am_qfa.alphabet)
        for steps in (1, 2, 5, 9):
            res = run_qcfa(lift, word, QcfaCaps(step_cap=steps, tol=0.0))
            assert res.P_acc + res.P_rej + res.residual == pytest.approx(1.0, abs=1e-9)

    def test_literal_engine_converges_to_closure(self, am_qfa):
        lift = lift_reset_to_qcfa(am_qfa)
        word = tape_word("a", am_qfa.alphabet)
        direct = overall_decision(round_table(am_qfa, word), am_qfa.initial)
        res = run_qcfa(lift, word, QcfaCaps(step_cap=150_000, tol=1e-10))
        assert res.residual <= 1e-10
        assert abs(res.P_acc - direct.P_acc) <= 1e-9

    def test_head_pushed_past_wall_raises(self):
        toy = sweep_right_toy()
        prog = dict(toy.program)
        delta = dict(toy.delta)
        delta[(0, DOLLAR, "unit")] = (0, 1)  # run off the right end
        import dataclasses
        broken = dataclasses.replace(toy, program=prog, delta=delta)
        with pytest.raises(ValueError, match="past the tape end"):
            run_qcfa(broken, tape_word("a", toy.alphabet))


class TestValidation:
    def test_toy_and_lifts_validate(self, am_qfa, bm_pair):
        assert validate_qcfa(sweep_right_toy()) == []
        assert validate_qcfa(lift_reset_to_qcfa(am_qfa)) == []
        assert validate_qcfa(lift_reset_to_qcfa(bm_pair[1])) == []

    def test_missing_program_entry(self):
        toy = sweep_right_toy()
        program = {k: v for k, v in toy.program.items() if k != (0, "a")}
        import dataclasses
        broken = dataclasses.replace(toy, program=program)
        assert any("missing" in v for v in validate_qcfa(broken))

    def test_non_orthogonal_projectors(self):
        toy = sweep_right_toy()
        p = np.eye(1, dtype=complex)
        program = dict(toy.program)
        program[(0, "a")] = Measurement((p, p), ("x", "y"))
        delta = dict(toy.delta)
        delta[(0, "a", "x")] = (0, 1)
        delta[(0, "a", "y")] = (0, 1)
        import dataclasses
        broken = dataclasses.replace(toy, program=program, delta=delta)
        assert any("orthogonal" in v or "identity" in v for v in validate_qcfa(broken))


class TestLift:
    def test_lift_shapes(self, am_qfa):
        lift = lift_reset_to_qcfa(am_qfa)
        assert lift.n_quantum == 6
        # go, measure, one walker per reset state, accept, reject
        assert lift.n_classical == 4 + len(am_qfa.roles.reset_targets)

    def test_no_reset_machine_has_no_walkers(self, bm_pair):
        base, _ = bm_pair
        lift = lift_reset_to_qcfa(base)
        assert lift.n_classical == 4
        word = tape_word("a", base.alphabet)
        direct = overall_decision(round_table(base, word), base.initial)
        assert qcfa_decision(lift, word).P_acc == pytest.approx(direct.P_acc, abs=1e-12)

    def test_acceptance_equivalence(self, am_qfa):
        lift = lift_reset_to_qcfa(am_qfa)
        for w in ("", "a", "b", "ab", "aab", "bbab"):
            word = tape_word(w, am_qfa.alphabet)
            direct = overall_decision(round_table(am_qfa, word), am_qfa.initial)
            lifted = qcfa_decision(lift, word)
            assert abs(direct.P_acc - lifted.P_acc) <= 1e-9

    def test_two_target_machine_equivalence(self, two_target_toy):
        lift = lift_reset_to_qcfa(two_target_toy)
        for w in ("", "a", "aa", "aaa"):
            word = tape_word(w, two_target_toy.alphabet)
            direct = overall_decision(round_table(two_target_toy, word),
                                      two_target_toy.initial)
            lifted = qcfa_decision(lift, word)
            assert abs(direct.P_acc - lifted.P_acc) <= 1e-9

    def test_walk_overhead_bounded(self, am_qfa):
        lift = lift_reset_to_qcfa(am_qfa)
        for w in ("a", "ab"):
            word = tape_word(w, am_qfa.alphabet)
            direct = overall_decision(round_table(am_qfa, word), am_qfa.initial)
            lifted = qcfa_decision(lift, word)
            # two engine phases per cell plus the walk home stay under 3x + fix-ups
            rounds = 1 / round_table(am_qfa, word)[0].p_halt
            assert lifted.expected_total_steps <= 3 * direct.expected_total_steps + 2 * rounds

    def test_lift_requires_one_way_quantum(self, leq_pfa):
        with pytest.raises(ValueError):
            lift_reset_to_qcfa(leq_pfa)


class TestRoundStructure:
    def test_round_masses_match_direct_engine(self, cm_pair):
        _, wrapped = cm_pair
        lift = lift_reset_to_qcfa(wrapped)
        word = tape_word("aaa", wrapped.alphabet)
        direct = round_table(wrapped, word)[wrapped.initial]
        lifted = qcfa_round(lift, word, lift.initial_quantum)
        assert lifted.p_acc == pytest.approx(direct.p_acc, abs=1e-12)
        assert lifted.p_rej == pytest.approx(direct.p_rej, abs=1e-12)
        assert lifted.p_reset_total == pytest.approx(direct.p_reset_total, abs=1e-12)
        assert lifted.residual == 0.0


class TestCodec:
    def test_roundtrip(self, am_qfa):
        lift = lift_reset_to_qcfa(am_qfa)
        doc = qcfa_to_jsonable(lift)
        import json
        back = qcfa_from_jsonable(json.loads(json.dumps(doc)))
        assert back.classical_labels == lift.classical_labels
        assert back.delta == lift.delta
        assert set(back.program) == set(lift.program)
        for key, op in lift.program.items():
            other = back.program[key]
            if isinstance(op, Unitary):
                assert np.array_equal(op.matrix, other.matrix)
            else:
                assert op.outcomes == other.outcomes
                for a, b in zip(op.projectors, other.projectors):
                    assert np.array_equal(a, b)
        word = tape_word("a", am_qfa.alphabet)
        assert qcfa_decision(back, word).P_acc == qcfa_decision(lift, word).P_acc

    def test_malformed_document(self):
        with pytest.raises(ValueError, match="malformed"):
            qcfa_from_jsonable({"quantum_states": 2})
