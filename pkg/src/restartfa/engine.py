"""Exact single-round evolution for one-way and two-way machines.

A round propagates an unnormalized state (or configuration) vector,
alternating transitions with the accept/reject/continue/reset measurement.
Within a round the continuing projection of a pure state stays pure, so no
density matrices are needed; decoherence across reset outcomes is handled by
the closure module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .machine import (
    ONE_WAY,
    QUANTUM,
    TWO_WAY,
    MachineSpec,
    TapeWord,
    induced_step_operator,
)

RESIDUAL_TOL = 1e-9


class IllFormedMachineError(RuntimeError):
    """A legal machine resolves all mass at the right end-marker; this one didn't."""


class NonterminationWarning(UserWarning):
    """Two-way round hit its step cap with unresolved mass."""


@dataclass
class RoundResult:
    """Per-round accept/reject/reset probabilities and step accounting.

    ``expected_steps`` is the probability-weighted step count of this round,
    charging the k-th transition (1-based, the left end-marker is step 1) to
    every event measured after it.  ``residual`` is mass still unresolved
    when the round ended.
    """

    p_acc: float
    p_rej: float
    p_reset: dict[int, float] = field(default_factory=dict)
    expected_steps: float = 0.0
    max_steps: int = 0
    residual: float = 0.0

    @property
    def p_halt(self) -> float:
        return self.p_acc + self.p_rej

    @property
    def p_reset_total(self) -> float:
        return sum(self.p_reset.values())

    def mass_defect(self) -> float:
        """Distance of p_acc + p_rej + sum(p_reset) + residual from 1."""
        return abs(self.p_acc + self.p_rej + self.p_reset_total + self.residual - 1.0)


@dataclass(frozen=True)
class EngineCaps:
    """Step cap and residual tolerance for two-way rounds.

    The default tolerance of zero runs a round to exact extinction of the
    unresolved mass: per-step measurements write exact zeros, so rounds of
    well-formed machines terminate exactly, and any positive threshold would
    silently truncate words whose halting masses sit below it.
    """

    step_cap: int | None = None
    tol: float = 0.0

    def resolved_cap(self, spec: MachineSpec, word: TapeWord) -> int:
        if self.step_cap is not None:
            return self.step_cap
        return 10 * word.tape_length * spec.n_states


def _measure_groups(spec: MachineSpec):
    roles = spec.roles
    acc = sorted(roles.accepting)
    rej = sorted(roles.rejecting)
    resets = sorted(roles.reset_targets.items())
    return acc, rej, resets


def run_round_oneway(spec: MachineSpec, word: TapeWord, start: int | None = None) -> RoundResult:
    """One round of a one-way machine from ``start`` (default: initial state)."""
    if spec.motion != ONE_WAY:
        raise ValueError("run_round_oneway requires a one-way machine")
    start = spec.initial if start is None else start
    if start not in spec.roles.nonhalting:
        raise ValueError(f"round must start in a nonhalting state, got {start}")
    acc, rej, resets = _measure_groups(spec)
    quantum = spec.kind == QUANTUM

    n = spec.n_states
    state = np.zeros(n, dtype=complex if quantum else float)
    state[start] = 1.0

    out = RoundResult(0.0, 0.0, {}, 0.0, len(word.symbols), 0.0)
    for step, sym in enumerate(word.symbols, start=1):
        m = spec.transitions[sym]
        if quantum:
            state = m @ state
            weights = np.abs(state) ** 2
        else:
            state = state @ m
            weights = state
        halted = 0.0
        for q in acc:
            out.p_acc += weights[q]
            halted += weights[q]
        for q in rej:
            out.p_rej += weights[q]
            halted += weights[q]
        for q, target in resets:
            w = weights[q]
            if w != 0.0:
                out.p_reset[target] = out.p_reset.get(target, 0.0) + w
            halted += w
        out.expected_steps += step * halted
        for q in acc:
            state[q] = 0.0
        for q in rej:
            state[q] = 0.0
        for q, _ in resets:
            state[q] = 0.0

    residual = float(np.abs(state).sum() if not quantum else (np.abs(state) ** 2).sum())
    out.residual = residual
    if residual > RESIDUAL_TOL:
        raise IllFormedMachineError(
            f"nonhalting mass {residual:.3e} survives the right end-marker"
        )
    out.p_acc = float(out.p_acc)
    out.p_rej = float(out.p_rej)
    out.expected_steps = float(out.expected_steps)
    return out


def run_round_twoway(
    spec: MachineSpec,
    word: TapeWord,
    start: int | None = None,
    caps: EngineCaps = EngineCaps(),
) -> RoundResult:
    """One round of a two-way machine over the configuration space Q x Z_n.

    Reset states are measured at every head position, except walking resets
    (direction -1, probabilistic machines only), which keep evolving until
    they arrive on the left end-marker; there they are measured as the reset
    they implement.
    """
    if spec.motion != TWO_WAY:
        raise ValueError("run_round_twoway requires a two-way machine")
    start = spec.initial if start is None else start
    if start not in spec.roles.nonhalting:
        raise ValueError(f"round must start in a nonhalting state, got {start}")
    quantum = spec.kind == QUANTUM
    acc, rej, resets = _measure_groups(spec)
    walking = {q for q, _ in resets if spec.directions[q] == -1}
    if walking and quantum:
        raise ValueError("walking resets are not supported for quantum machines")

    n = word.tape_length
    op = induced_step_operator(spec, word)
    dim = spec.n_states * n
    state = np.zeros(dim, dtype=complex if quantum else float)
    state[start * n + 0] = 1.0

    def positions(q):
        return slice(q * n, (q + 1) * n)

    out = RoundResult(0.0, 0.0, {}, 0.0, 0, 0.0)
    step_cap = caps.resolved_cap(spec, word)
    steps = 0
    remaining = 1.0
    while steps < step_cap:
        steps += 1
        if quantum:
            state = op @ state
            weights = np.abs(state) ** 2
        else:
            state = state @ op
            weights = state
        halted = 0.0
        for q in acc:
            w = weights[positions(q)].sum()
            out.p_acc += w
            halted += w
            state[positions(q)] = 0.0
        for q in rej:
            w = weights[positions(q)].sum()
            out.p_rej += w
            halted += w
            state[positions(q)] = 0.0
        for q, target in resets:
            if q in walking:
                w = weights[q * n + 0]
                if w != 0.0:
                    out.p_reset[target] = out.p_reset.get(target, 0.0) + w
                    halted += w
                    state[q * n + 0] = 0.0
            else:
                w = weights[positions(q)].sum()
                if w != 0.0:
                    out.p_reset[target] = out.p_reset.get(target, 0.0) + w
                    halted += w
                    state[positions(q)] = 0.0
        out.expected_steps += steps * halted
        remaining = float((np.abs(state) ** 2).sum() if quantum else np.abs(state).sum())
        if remaining <= caps.tol:
            break

    out.max_steps = steps
    out.residual = remaining
    out.p_acc = float(out.p_acc)
    out.p_rej = float(out.p_rej)
    out.expected_steps = float(out.expected_steps)
    if remaining > caps.tol:
        warnings.warn(
            f"round hit step cap {step_cap} with residual {remaining:.3e}",
            NonterminationWarning,
            stacklevel=2,
        )
    return out


def run_round(spec: MachineSpec, word: TapeWord, start: int | None = None,
              caps: EngineCaps = EngineCaps()) -> RoundResult:
    if spec.motion == ONE_WAY:
        return run_round_oneway(spec, word, start)
    return run_round_twoway(spec, word, start, caps)


def round_table(spec: MachineSpec, word: TapeWord,
                caps: EngineCaps = EngineCaps()) -> dict[int, RoundResult]:
    """One RoundResult per reset target plus the initial state."""
    starts = {spec.initial} | set(spec.roles.reset_targets.values())
    return {q: run_round(spec, word, q, caps) for q in sorted(starts)}
