"""Exact mixed-state simulator for two-way automata with a constant-size
quantum register and classical head/states, and the lift that turns a
one-way quantum reset machine into one.

The simulator keeps an unnormalized density matrix per (classical state,
head position) configuration.  Rounds of restart-structured machines (every
branch eventually re-enters the initial classical state on the left
end-marker with a basis-state register) can be aggregated analytically
through the same closure solver the reset machines use.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .closure import DecisionReport, overall_decision
from .engine import NonterminationWarning, RoundResult
from .linalg import is_unitary
from .machine import CENT, DOLLAR, ONE_WAY, QUANTUM, MachineSpec, TapeWord

UNIT = "unit"
PRUNE_TRACE = 1e-30


@dataclass(frozen=True)
class Unitary:
    matrix: np.ndarray


@dataclass(frozen=True)
class Measurement:
    projectors: tuple[np.ndarray, ...]
    outcomes: tuple[str, ...]


@dataclass(frozen=True)
class QcfaSpec:
    """Program of unitaries/measurements indexed by (classical state, symbol),
    with a classical transition map routing on measurement outcomes."""

    n_quantum: int
    classical_labels: tuple[str, ...]
    initial_classical: int
    accepting: frozenset[int]
    rejecting: frozenset[int]
    alphabet: tuple[str, ...]
    program: dict[tuple[int, str], Unitary | Measurement]
    delta: dict[tuple[int, str, str], tuple[int, int]]
    initial_quantum: int = 0

    @property
    def n_classical(self) -> int:
        return len(self.classical_labels)

    @property
    def tape_symbols(self) -> tuple[str, ...]:
        return (CENT, *self.alphabet, DOLLAR)


@dataclass
class QcfaResult:
    P_acc: float
    P_rej: float
    residual: float
    expected_steps: float
    steps: int = 0


@dataclass(frozen=True)
class QcfaCaps:
    step_cap: int = 100_000
    tol: float = 1e-12


# round-based evaluation needs exact extinction, not a truncation threshold
ROUND_CAPS = QcfaCaps(tol=0.0)


def validate_qcfa(spec: QcfaSpec, tol: float = 1e-10) -> list[str]:
    """Structural validation; returns the list of violations."""
    violations = []
    nq = spec.n_quantum
    halting = spec.accepting | spec.rejecting
    if spec.initial_classical in halting:
        violations.append("initial classical state must not halt")
    if spec.accepting & spec.rejecting:
        violations.append("accepting and rejecting classical states overlap")
    for s in range(spec.n_classical):
        if s in halting:
            continue
        for sym in spec.tape_symbols:
            op = spec.program.get((s, sym))
            if op is None:
                violations.append(f"program entry missing for ({spec.classical_labels[s]}, {sym})")
                continue
            if isinstance(op, Unitary):
                if op.matrix.shape != (nq, nq):
                    violations.append(f"unitary at ({s}, {sym}) has shape {op.matrix.shape}")
                elif not is_unitary(op.matrix, tol):
                    violations.append(f"program entry at ({s}, {sym}) is not unitary")
                if (s, sym, UNIT) not in spec.delta:
                    violations.append(f"classical move missing for ({s}, {sym}, {UNIT})")
            else:
                total = np.zeros((nq, nq), dtype=complex)
                for a, pa in enumerate(op.projectors):
                    total = total + pa
                    if np.abs(pa @ pa - pa).max() > tol:
                        violations.append(f"projector {a} at ({s}, {sym}) is not idempotent")
                    for b in range(a + 1, len(op.projectors)):
                        if np.abs(pa @ op.projectors[b]).max() > tol:
                            violations.append(
                                f"projectors {a},{b} at ({s}, {sym}) are not orthogonal")
                if np.abs(total - np.eye(nq)).max() > tol:
                    violations.append(f"projectors at ({s}, {sym}) do not sum to identity")
                for out in op.outcomes:
                    if (s, sym, out) not in spec.delta:
                        violations.append(f"classical move missing for ({s}, {sym}, {out})")
    for (_, _, _), (s2, d) in spec.delta.items():
        if d not in (-1, 0, 1):
            violations.append(f"head direction {d} invalid")
        if not 0 <= s2 < spec.n_classical:
            violations.append(f"classical target {s2} out of range")
    return violations


def _route(spec: QcfaSpec, new_configs, s2, pos, d, rho, tr, n, step, acc_rej):
    if s2 in spec.accepting:
        acc_rej[0] += tr
        acc_rej[2] += step * tr
        return
    if s2 in spec.rejecting:
        acc_rej[1] += tr
        acc_rej[2] += step * tr
        return
    pos2 = pos + d
    if not 0 <= pos2 < n:
        raise ValueError(
            f"head pushed past the tape end (classical state {spec.classical_labels[s2]}, "
            f"position {pos} + {d})"
        )
    key = (s2, pos2)
    if key in new_configs:
        new_configs[key] = new_configs[key] + rho
    else:
        new_configs[key] = rho


def run_qcfa(spec: QcfaSpec, word: TapeWord, caps: QcfaCaps = QcfaCaps()) -> QcfaResult:
    """Literal stepping of the mixed-state evolution until the unresolved
    trace falls below caps.tol or the step cap is hit."""
    n = word.tape_length
    rho0 = np.zeros((spec.n_quantum, spec.n_quantum), dtype=complex)
    rho0[spec.initial_quantum, spec.initial_quantum] = 1.0
    configs = {(spec.initial_classical, 0): rho0}
    acc_rej = [0.0, 0.0, 0.0]  # P_acc, P_rej, expected_steps
    steps = 0
    residual = 1.0
    while steps < caps.step_cap and configs:
        steps += 1
        new_configs: dict = {}
        for (s, pos) in sorted(configs):
            rho = configs[(s, pos)]
            sym = word.symbols[pos]
            op = spec.program[(s, sym)]
            if isinstance(op, Unitary):
                rho2 = op.matrix @ rho @ op.matrix.conj().T
                tr = float(rho2.trace().real)
                if tr <= PRUNE_TRACE:
                    continue
                s2, d = spec.delta[(s, sym, UNIT)]
                _route(spec, new_configs, s2, pos, d, rho2, tr, n, steps, acc_rej)
            else:
                for proj, out in zip(op.projectors, op.outcomes):
                    rho2 = proj @ rho @ proj
                    tr = float(rho2.trace().real)
                    if tr <= PRUNE_TRACE:
                        continue
                    s2, d = spec.delta[(s, sym, out)]
                    _route(spec, new_configs, s2, pos, d, rho2, tr, n, steps, acc_rej)
        configs = new_configs
        residual = sum(float(r.trace().real) for r in configs.values())
        if residual <= caps.tol:
            break
    if residual > caps.tol:
        warnings.warn(
            f"mixed-state run hit step cap {caps.step_cap} with residual {residual:.3e}",
            NonterminationWarning,
            stacklevel=2,
        )
    return QcfaResult(acc_rej[0], acc_rej[1], residual, acc_rej[2], steps)


def qcfa_round(spec: QcfaSpec, word: TapeWord, start_quantum: int,
               caps: QcfaCaps = ROUND_CAPS, tol: float = 1e-10) -> RoundResult:
    """One round of a restart-structured machine from a basis register state.

    Branches re-entering the initial classical state on the left end-marker
    are absorbed as resets; the arriving density must be diagonal in the
    computational basis (it is a classical mixture of reset targets).
    """
    n = word.tape_length
    rho0 = np.zeros((spec.n_quantum, spec.n_quantum), dtype=complex)
    rho0[start_quantum, start_quantum] = 1.0
    configs = {(spec.initial_classical, 0): rho0}
    out = RoundResult(0.0, 0.0, {}, 0.0, 0, 0.0)
    renewal = (spec.initial_classical, 0)
    steps = 0
    residual = 1.0
    while steps < caps.step_cap and configs:
        steps += 1
        new_configs: dict = {}
        acc_rej = [0.0, 0.0, 0.0]
        for (s, pos) in sorted(configs):
            rho = configs[(s, pos)]
            sym = word.symbols[pos]
            op = spec.program[(s, sym)]
            branches = []
            if isinstance(op, Unitary):
                branches.append((op.matrix @ rho @ op.matrix.conj().T,
                                 spec.delta[(s, sym, UNIT)]))
            else:
                for proj, outcome in zip(op.projectors, op.outcomes):
                    branches.append((proj @ rho @ proj, spec.delta[(s, sym, outcome)]))
            for rho2, (s2, d) in branches:
                tr = float(rho2.trace().real)
                if tr <= PRUNE_TRACE:
                    continue
                pos2 = pos + d
                if (s2, pos2) == renewal and s2 not in spec.accepting | spec.rejecting:
                    off_diag = float(np.abs(rho2 - np.diag(rho2.diagonal())).max())
                    if off_diag > tol:
                        raise ValueError(
                            "machine is not restart-structured: register returns to the "
                            f"start configuration in a coherent state (off-diagonal {off_diag:.2e})"
                        )
                    for q in range(spec.n_quantum):
                        w = float(rho2[q, q].real)
                        if w > 0.0:
                            out.p_reset[q] = out.p_reset.get(q, 0.0) + w
                    out.expected_steps += steps * tr
                    continue
                _route(spec, new_configs, s2, pos, d, rho2, tr, n, steps, acc_rej)
        out.p_acc += acc_rej[0]
        out.p_rej += acc_rej[1]
        out.expected_steps += acc_rej[2]
        configs = new_configs
        residual = sum(float(r.trace().real) for r in configs.values())
        if residual <= caps.tol:
            break
    out.max_steps = steps
    out.residual = residual
    return out


def qcfa_decision(spec: QcfaSpec, word: TapeWord,
                  caps: QcfaCaps = ROUND_CAPS) -> DecisionReport:
    """Exact overall verdict for a restart-structured machine: per-round
    quantities from qcfa_round, geometric aggregation via the closure."""
    table: dict[int, RoundResult] = {}
    pending = [spec.initial_quantum]
    while pending:
        q = pending.pop()
        if q in table:
            continue
        table[q] = qcfa_round(spec, word, q, caps)
        pending.extend(t for t in table[q].p_reset if t not in table)
    return overall_decision(table, spec.initial_quantum)


def _matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_pairs(rows, n: int) -> np.ndarray:
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix is not {n}x{n}")
    return np.array([[complex(e[0], e[1]) for e in row] for row in rows])


def qcfa_to_jsonable(spec: QcfaSpec) -> dict:
    """Machine-document extension: program entries tagged unitary/measurement."""
    program = []
    for (s, sym), op in sorted(spec.program.items()):
        if isinstance(op, Unitary):
            entry = {"state": s, "symbol": sym, "type": "unitary",
                     "matrix": _matrix_to_pairs(op.matrix)}
        else:
            entry = {"state": s, "symbol": sym, "type": "measurement",
                     "projectors": [{"outcome": out, "matrix": _matrix_to_pairs(p)}
                                    for p, out in zip(op.projectors, op.outcomes)]}
        program.append(entry)
    return {
        "quantum_states": spec.n_quantum,
        "initial_quantum": spec.initial_quantum,
        "alphabet": list(spec.alphabet),
        "classical": {
            "labels": list(spec.classical_labels),
            "initial": spec.initial_classical,
            "accepting": sorted(spec.accepting),
            "rejecting": sorted(spec.rejecting),
        },
        "program": program,
        "delta": [{"state": s, "symbol": sym, "outcome": out, "next": s2, "move": d}
                  for (s, sym, out), (s2, d) in sorted(spec.delta.items())],
    }


def qcfa_from_jsonable(data: dict) -> QcfaSpec:
    try:
        nq = int(data["quantum_states"])
        classical = data["classical"]
        program: dict[tuple[int, str], Unitary | Measurement] = {}
        for entry in data["program"]:
            key = (int(entry["state"]), entry["symbol"])
            if entry["type"] == "unitary":
                program[key] = Unitary(_matrix_from_pairs(entry["matrix"], nq))
            elif entry["type"] == "measurement":
                program[key] = Measurement(
                    tuple(_matrix_from_pairs(p["matrix"], nq) for p in entry["projectors"]),
                    tuple(p["outcome"] for p in entry["projectors"]),
                )
            else:
                raise ValueError(f"unknown program entry type {entry['type']!r}")
        delta = {(int(d["state"]), d["symbol"], d["outcome"]): (int(d["next"]), int(d["move"]))
                 for d in data["delta"]}
        return QcfaSpec(
            n_quantum=nq,
            classical_labels=tuple(classical["labels"]),
            initial_classical=int(classical["initial"]),
            accepting=frozenset(classical["accepting"]),
            rejecting=frozenset(classical["rejecting"]),
            alphabet=tuple(data["alphabet"]),
            program=program,
            delta=delta,
            initial_quantum=int(data.get("initial_quantum", 0)),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValueError(f"malformed classical-head machine document: {exc}") from exc


def lift_reset_to_qcfa(spec: MachineSpec) -> QcfaSpec:
    """Lift a one-way quantum reset machine to the classical-head model.

    Each cell is handled in two phases (apply the cell unitary, then measure
    the reset-refined observable); reset outcomes collapse the register to a
    single basis state, walk the head back to the left end-marker, and apply
    the transposition carrying the reset state onto its target there.
    """
    if spec.kind != QUANTUM or spec.motion != ONE_WAY:
        raise ValueError("lift expects a one-way quantum machine")
    nq = spec.n_states
    resets = sorted(spec.roles.reset_targets)

    labels = ["go", "measure"]
    walkers = {}
    for r in resets:
        walkers[r] = len(labels)
        labels.append(f"walk_{spec.labels[r]}")
    s_acc = len(labels)
    labels.append("accept")
    s_rej = len(labels)
    labels.append("reject")
    go, meas = 0, 1

    def span_projector(states) -> np.ndarray:
        p = np.zeros((nq, nq), dtype=complex)
        for q in states:
            p[q, q] = 1.0
        return p

    projectors = [span_projector(spec.roles.nonhalting),
                  span_projector(spec.roles.accepting),
                  span_projector(spec.roles.rejecting)]
    outcomes = ["continue", "accept", "reject"]
    for r in resets:
        projectors.append(span_projector({r}))
        outcomes.append(f"reset:{spec.labels[r]}")
    observable = Measurement(tuple(projectors), tuple(outcomes))

    program: dict[tuple[int, str], Unitary | Measurement] = {}
    delta: dict[tuple[int, str, str], tuple[int, int]] = {}
    tape_symbols = (CENT, *spec.alphabet, DOLLAR)
    for sym in tape_symbols:
        program[(go, sym)] = Unitary(spec.transitions[sym])
        delta[(go, sym, UNIT)] = (meas, 0)
        program[(meas, sym)] = observable
        delta[(meas, sym, "continue")] = (go, 1)
        delta[(meas, sym, "accept")] = (s_acc, 0)
        delta[(meas, sym, "reject")] = (s_rej, 0)
        for r in resets:
            walk = walkers[r]
            delta[(meas, sym, f"reset:{spec.labels[r]}")] = (walk, 0 if sym == CENT else -1)
            if sym == CENT:
                target = spec.roles.reset_targets[r]
                fix = np.eye(nq, dtype=complex)
                fix[r, r] = fix[target, target] = 0.0
                fix[target, r] = fix[r, target] = 1.0
                program[(walk, sym)] = Unitary(fix)
                delta[(walk, sym, UNIT)] = (go, 0)
            else:
                program[(walk, sym)] = Unitary(np.eye(nq, dtype=complex))
                delta[(walk, sym, UNIT)] = (walk, -1)

    return QcfaSpec(
        n_quantum=nq,
        classical_labels=tuple(labels),
        initial_classical=go,
        accepting=frozenset({s_acc}),
        rejecting=frozenset({s_rej}),
        alphabet=spec.alphabet,
        program=program,
        delta=delta,
        initial_quantum=spec.initial,
    )
