"""Machine specification types, structural validation, the induced two-way
step operator, and the on-disk JSON codec.

Conventions
-----------
Quantum machines store column-convention transition matrices: entry [q', q]
of ``transitions[symbol]`` is the amplitude for state q to jump to q' on that
symbol.  Probabilistic machines store row-stochastic matrices: entry [q, q']
is the probability of moving from q to q'.  Head directions are per target
state.  Reset states with direction -1 on a two-way machine are "walking"
resets (they move left one square per step and complete the reset on the left
end-marker); any other direction means an immediate reset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import is_row_stochastic, is_unitary

CENT = "CENT"
DOLLAR = "DOLLAR"

QUANTUM = "quantum"
PROBABILISTIC = "probabilistic"
ONE_WAY = "one-way"
TWO_WAY = "two-way"


class MachineFormatError(ValueError):
    """Raised by the codec on malformed or inconsistent machine files."""


@dataclass(frozen=True)
class StateRoles:
    """Partition of the state set into nonhalting/accepting/rejecting/reset.

    ``reset_targets`` maps each reset state to the nonhalting state the
    machine restarts in when that reset outcome is measured.
    """

    nonhalting: frozenset[int]
    accepting: frozenset[int]
    rejecting: frozenset[int]
    reset_targets: dict[int, int] = field(default_factory=dict)

    @property
    def reset_states(self) -> frozenset[int]:
        return frozenset(self.reset_targets)

    def role_of(self, state: int) -> str:
        if state in self.nonhalting:
            return "nonhalting"
        if state in self.accepting:
            return "accepting"
        if state in self.rejecting:
            return "rejecting"
        if state in self.reset_targets:
            return "reset"
        return "unknown"


@dataclass(frozen=True)
class MachineSpec:
    """A one-way or two-way automaton with quantum or probabilistic numbers."""

    kind: str
    motion: str
    alphabet: tuple[str, ...]
    labels: tuple[str, ...]
    roles: StateRoles
    transitions: dict[str, np.ndarray]
    directions: tuple[int, ...]
    initial: int

    def __post_init__(self):
        for m in self.transitions.values():
            m.setflags(write=False)

    @property
    def n_states(self) -> int:
        return len(self.labels)

    @property
    def tape_symbols(self) -> tuple[str, ...]:
        return (CENT, *self.alphabet, DOLLAR)

    @property
    def is_restart_only(self) -> bool:
        """True when every reset targets the initial state."""
        return all(t == self.initial for t in self.roles.reset_targets.values())

    def with_roles(self, roles: StateRoles) -> "MachineSpec":
        return replace(self, roles=roles)


@dataclass(frozen=True)
class TapeWord:
    """An input word together with its end-marked tape ``CENT w DOLLAR``."""

    input: str
    symbols: tuple[str, ...]

    @property
    def tape_length(self) -> int:
        return len(self.symbols)


def tape_word(word: str, alphabet) -> TapeWord:
    bad = [c for c in word if c not in alphabet]
    if bad:
        raise ValueError(f"symbols {bad!r} not in alphabet {tuple(alphabet)!r}")
    return TapeWord(word, (CENT, *word, DOLLAR))


def validate_machine(spec: MachineSpec, tol: float = 1e-10) -> list[str]:
    """Return a list of violated invariants; an empty list means valid."""
    violations: list[str] = []
    n = spec.n_states
    roles = spec.roles

    if spec.kind not in (QUANTUM, PROBABILISTIC):
        violations.append(f"unknown kind {spec.kind!r}")
    if spec.motion not in (ONE_WAY, TWO_WAY):
        violations.append(f"unknown motion {spec.motion!r}")

    all_states = set(range(n))
    role_sets = [set(roles.nonhalting), set(roles.accepting), set(roles.rejecting),
                 set(roles.reset_targets)]
    covered = set().union(*role_sets)
    if covered != all_states or sum(len(s) for s in role_sets) != n:
        violations.append("role sets do not partition the state set")
    if roles.nonhalting and set(roles.nonhalting) != set(range(len(roles.nonhalting))):
        violations.append("nonhalting states must occupy the lowest indices")

    if spec.initial not in roles.nonhalting:
        violations.append(f"initial state {spec.initial} is not nonhalting")
    for r, t in roles.reset_targets.items():
        if t not in roles.nonhalting:
            violations.append(f"reset state {r} targets non-nonhalting state {t}")

    if len(spec.directions) != n:
        violations.append("directions must assign every state a move")
    elif any(d not in (-1, 0, 1) for d in spec.directions):
        violations.append("directions must be -1, 0, or +1")
    elif spec.motion == ONE_WAY and any(d != 1 for d in spec.directions):
        violations.append("one-way machines move right on every transition")

    expected = set(spec.tape_symbols)
    if set(spec.transitions) != expected:
        violations.append(
            f"transition symbols {sorted(spec.transitions)} != tape symbols {sorted(expected)}"
        )
    else:
        for sym, m in spec.transitions.items():
            if m.shape != (n, n):
                violations.append(f"transition matrix for {sym!r} has shape {m.shape}")
                continue
            if spec.kind == QUANTUM and not is_unitary(m, tol):
                violations.append(f"transition matrix for {sym!r} is not unitary at {tol}")
            if spec.kind == PROBABILISTIC and not is_row_stochastic(m, tol):
                violations.append(f"transition matrix for {sym!r} is not row-stochastic at {tol}")
    return violations


def induced_step_operator(spec: MachineSpec, word: TapeWord) -> np.ndarray:
    """Single-step operator on the configuration space Q x Z_n, n = |tape|.

    Configurations are indexed q * n + i.  Position arithmetic is modulo the
    tape length.  For quantum machines the result is unitary (column
    convention); for probabilistic machines it is row-stochastic.
    """
    if spec.motion != TWO_WAY:
        raise ValueError("induced step operator is defined for two-way machines")
    nq = spec.n_states
    n = word.tape_length
    dim = nq * n
    op = np.zeros((dim, dim), dtype=complex if spec.kind == QUANTUM else float)
    for i, sym in enumerate(word.symbols):
        m = spec.transitions[sym]
        for q in range(nq):
            for q2 in range(nq):
                j = (i + spec.directions[q2]) % n
                if spec.kind == QUANTUM:
                    amp = m[q2, q]
                    if amp != 0:
                        op[q2 * n + j, q * n + i] = amp
                else:
                    p = m[q, q2]
                    if p != 0:
                        op[q * n + i, q2 * n + j] = p
    if spec.kind == QUANTUM and not is_unitary(op, 1e-9):
        raise ValueError(
            "induced step operator is not unitary; per-symbol unitarity plus fixed "
            "directions should guarantee it, so the spec is broken"
        )
    return op


def as_twoway(spec: MachineSpec) -> MachineSpec:
    """Recast a one-way machine as a two-way machine with all-right moves."""
    if spec.motion != ONE_WAY:
        raise ValueError("expected a one-way machine")
    return replace(spec, motion=TWO_WAY)


# --- codec ---------------------------------------------------------------

def spec_to_jsonable(spec: MachineSpec) -> dict:
    return {
        "kind": spec.kind,
        "motion": spec.motion,
        "alphabet": list(spec.alphabet),
        "state_labels": list(spec.labels),
        "roles": {
            "nonhalting": sorted(spec.roles.nonhalting),
            "accepting": sorted(spec.roles.accepting),
            "rejecting": sorted(spec.roles.rejecting),
            "reset_targets": {str(k): v for k, v in sorted(spec.roles.reset_targets.items())},
        },
        "initial": spec.initial,
        "directions": list(spec.directions),
        "orientation": "column" if spec.kind == QUANTUM else "row",
        "transitions": {
            sym: [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]
            for sym, m in spec.transitions.items()
        },
    }


def spec_from_jsonable(data: dict) -> MachineSpec:
    try:
        kind = data["kind"]
        alphabet = tuple(data["alphabet"])
        labels = tuple(data["state_labels"])
        n = len(labels)
        roles = StateRoles(
            nonhalting=frozenset(data["roles"]["nonhalting"]),
            accepting=frozenset(data["roles"]["accepting"]),
            rejecting=frozenset(data["roles"]["rejecting"]),
            reset_targets={int(k): int(v) for k, v in data["roles"]["reset_targets"].items()},
        )
        orientation = data.get("orientation", "column" if kind == QUANTUM else "row")
        expected_orientation = "column" if kind == QUANTUM else "row"
        if orientation != expected_orientation:
            raise MachineFormatError(
                f"orientation {orientation!r} does not match kind {kind!r}"
            )
        transitions = {}
        for sym, rows in data["transitions"].items():
            if len(rows) != n or any(len(r) != n for r in rows):
                raise MachineFormatError(f"transition matrix for {sym!r} is not {n}x{n}")
            m = np.array([[complex(e[0], e[1]) for e in row] for row in rows])
            if kind == PROBABILISTIC:
                m = m.real.copy()
            transitions[sym] = m
        spec = MachineSpec(
            kind=kind,
            motion=data["motion"],
            alphabet=alphabet,
            labels=labels,
            roles=roles,
            transitions=transitions,
            directions=tuple(int(d) for d in data["directions"]),
            initial=int(data["initial"]),
        )
    except MachineFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MachineFormatError(f"malformed machine spec: {exc}") from exc
    return spec


def save_machine(spec: MachineSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_jsonable(spec), fh, indent=1)
        fh.write("\n")


def load_machine(path) -> MachineSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MachineFormatError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    return spec_from_jsonable(data)


def specs_equal(a: MachineSpec, b: MachineSpec) -> bool:
    """Exact equality of two machine specs, matrices compared bitwise."""
    if (a.kind, a.motion, a.alphabet, a.labels, a.directions, a.initial) != (
        b.kind, b.motion, b.alphabet, b.labels, b.directions, b.initial
    ):
        return False
    if (a.roles.nonhalting, a.roles.accepting, a.roles.rejecting, a.roles.reset_targets) != (
        b.roles.nonhalting, b.roles.accepting, b.roles.rejecting, b.roles.reset_targets
    ):
        return False
    if set(a.transitions) != set(b.transitions):
        return False
    return all(np.array_equal(a.transitions[s], b.transitions[s]) for s in a.transitions)
