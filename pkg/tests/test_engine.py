import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restartfa.engine import (
    EngineCaps,
    IllFormedMachineError,
    NonterminationWarning,
    round_table,
    run_round_oneway,
    run_round_twoway,
)
from restartfa.machine import CENT, DOLLAR, MachineSpec, StateRoles, as_twoway, tape_word
from restartfa.zoo import build_am_qfa, majority_grid, restart_to_twoway

EPS = 0.25


class TestSuffixMachineRounds:
    def test_single_a(self, am_qfa):
        r = run_round_oneway(am_qfa, tape_word("a", am_qfa.alphabet))
        assert r.p_acc == EPS**4
        assert r.p_rej == EPS**7
        assert r.p_reset == {0: pytest.approx(1 - EPS**4 - EPS**7, abs=1e-14)}
        assert r.max_steps == 3

    def test_non_a_suffix_never_accepts(self, am_qfa):
        r = run_round_oneway(am_qfa, tape_word("b", am_qfa.alphabet))
        assert r.p_acc == 0.0

    def test_mass_conservation(self, am_qfa):
        for w in ("", "a", "b", "ab", "abba"):
            r = run_round_oneway(am_qfa, tape_word(w, am_qfa.alphabet))
            assert r.mass_defect() <= 1e-9

    def test_expected_steps_weighting(self, am_qfa):
        # first-round events: reject/reset at step 1, reset at step 2, accept at step 3
        r = run_round_oneway(am_qfa, tape_word("a", am_qfa.alphabet))
        step1 = EPS**7 + (1 - EPS**2 - EPS**7)
        step2 = EPS**2 * (1 - EPS**2)
        step3 = EPS**4
        assert r.expected_steps == pytest.approx(step1 + 2 * step2 + 3 * step3, abs=1e-14)


class TestThreePathRounds:
    def test_round_masses(self, leq_pfa):
        x = 0.2**2 / 2
        r = run_round_oneway(leq_pfa, tape_word("ab", leq_pfa.alphabet))
        assert r.p_acc == pytest.approx((1 / 3) * x**2, abs=1e-15)
        assert r.p_rej == pytest.approx((0.2 / 6) * 2 * x**2, abs=1e-15)

    def test_round_start_state_matters(self, leq_pfa):
        with pytest.raises(ValueError):
            run_round_oneway(leq_pfa, tape_word("ab", leq_pfa.alphabet), start=7)


class TestResidualPolicing:
    def test_mass_surviving_dollar_raises(self):
        # the $ matrix keeps everything nonhalting
        roles = StateRoles(frozenset({0}), frozenset({1}), frozenset(), {})
        mats = {CENT: np.eye(2), "a": np.eye(2), DOLLAR: np.eye(2)}
        spec = MachineSpec("probabilistic", "one-way", ("a",), ("s", "A"),
                           roles, mats, (1, 1), 0)
        with pytest.raises(IllFormedMachineError):
            run_round_oneway(spec, tape_word("a", spec.alphabet))


class TestTwoWayEngine:
    def test_recast_matches_oneway(self, am_qfa):
        tw = as_twoway(am_qfa)
        for w in ("", "a", "ab", "ba", "abab"):
            one = run_round_oneway(am_qfa, tape_word(w, am_qfa.alphabet))
            two = run_round_twoway(tw, tape_word(w, tw.alphabet))
            assert abs(one.p_acc - two.p_acc) <= 1e-12
            assert abs(one.p_rej - two.p_rej) <= 1e-12
            assert abs(one.expected_steps - two.expected_steps) <= 1e-12
            assert one.max_steps == two.max_steps == len(w) + 2

    def test_small_masses_survive_exactly(self):
        # halting masses below 1e-12 must not be truncated into the residual
        spec = build_am_qfa(2, 0.1)
        tw = as_twoway(spec)
        w = tape_word("aaaaaa", tw.alphabet)
        one = run_round_oneway(spec, tape_word("aaaaaa", spec.alphabet))
        two = run_round_twoway(tw, w)
        assert one.p_acc == pytest.approx(1e-14, rel=1e-9)
        assert abs(one.p_acc - two.p_acc) <= 1e-25

    def test_never_halting_machine(self):
        roles = StateRoles(frozenset({0}), frozenset(), frozenset(), {})
        mats = {s: np.eye(1) for s in (CENT, "a", DOLLAR)}
        spec = MachineSpec("probabilistic", "two-way", ("a",), ("s",), roles,
                           mats, (1,), 0)
        with pytest.warns(NonterminationWarning):
            r = run_round_twoway(spec, tape_word("", spec.alphabet),
                                 caps=EngineCaps(step_cap=40))
        assert r.residual == 1.0
        assert r.max_steps == 40

    def test_walking_reset_round(self, leq_pfa):
        tw = restart_to_twoway(leq_pfa)
        one = run_round_oneway(leq_pfa, tape_word("ab", leq_pfa.alphabet))
        two = run_round_twoway(tw, tape_word("ab", tw.alphabet))
        assert one.p_acc == two.p_acc
        assert one.p_rej == two.p_rej
        assert abs(one.p_reset_total - two.p_reset_total) <= 1e-12
        assert two.expected_steps <= 2 * one.expected_steps
        assert two.expected_steps > one.expected_steps

    def test_quantum_walking_reset_unsupported(self, am_qfa):
        import dataclasses
        tw = dataclasses.replace(as_twoway(am_qfa), directions=(1, 1, 1, 1, -1, 1))
        with pytest.raises(ValueError, match="walking"):
            run_round_twoway(tw, tape_word("a", tw.alphabet))


class TestRoundTable:
    def test_restart_only_single_entry(self, am_qfa):
        table = round_table(am_qfa, tape_word("a", am_qfa.alphabet))
        assert set(table) == {0}

    def test_two_target_toy(self, two_target_toy):
        table = round_table(two_target_toy, tape_word("a", two_target_toy.alphabet))
        assert set(table) == {0, 1}
        for r in table.values():
            assert r.mass_defect() <= 1e-9

    def test_amplifier_table_has_copy_starts(self, am_qfa):
        grid = majority_grid(am_qfa, 1)
        table = round_table(grid, tape_word("a", grid.alphabet))
        # 4 copies, rounds from every copy start
        assert len(table) == 4
        for r in table.values():
            assert r.mass_defect() <= 1e-9


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 6))
@settings(max_examples=80, deadline=None)
def test_mass_conservation_random_probabilistic(seed, nonhalting, word_len):
    rng = np.random.default_rng(seed)
    n = nonhalting + 3  # nonhalting block, accept, reject, restart
    labels = tuple(f"s{i}" for i in range(n))
    roles = StateRoles(
        nonhalting=frozenset(range(nonhalting)),
        accepting=frozenset({nonhalting}),
        rejecting=frozenset({nonhalting + 1}),
        reset_targets={nonhalting + 2: 0},
    )
    mats = {}
    for sym in (CENT, "a", DOLLAR):
        m = rng.random((n, n)) + 1e-6
        if sym == DOLLAR:
            m[:, :nonhalting] = 0.0  # all nonhalting mass must resolve
        m = m / m.sum(axis=1, keepdims=True)
        for q in range(nonhalting, n):
            m[q] = 0.0
            m[q, q] = 1.0
        mats[sym] = m
    spec = MachineSpec("probabilistic", "one-way", ("a",), labels, roles, mats,
                       (1,) * n, 0)
    word = tape_word("a" * word_len, spec.alphabet)
    r = run_round_oneway(spec, word)
    assert r.mass_defect() <= 1e-9
    assert r.p_acc >= -1e-12 and r.p_rej >= -1e-12
