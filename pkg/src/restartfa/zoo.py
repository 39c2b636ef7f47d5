"""Builders for the concrete machine families, the generic wrappers and
transformers, and language membership oracles.

Families
--------
- suffix family: words ending in ``a`` whose prefix has length at most m
  (6-state restart quantum machine, plus a probabilistic squared variant)
- modular length family: a^i with i = 0 mod m (rotation base + wrapper)
- exact length family: all words of length m (length-encoding base + wrapper)
- palindromes over {a, b} (two-path binary-encoding base + wrapper)
- balanced blocks a^n b^n (quantum two-path base + wrapper, and a
  three-path probabilistic restart machine)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import PartialMatrix, complete_unitary, embed_stochastic
from .machine import (
    CENT,
    DOLLAR,
    ONE_WAY,
    PROBABILISTIC,
    QUANTUM,
    TWO_WAY,
    MachineSpec,
    StateRoles,
)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GapBound:
    """Lower bound on a machine's gap function.

    ``exponential`` means gap(n) >= prefactor * base**(-n); ``constant``
    means gap(n) >= prefactor for every n with both word kinds present.
    """

    prefactor: float
    base: float
    form: str

    def __post_init__(self):
        if self.form not in ("exponential", "constant"):
            raise ValueError(f"unknown gap form {self.form!r}")
        if not 0 < self.prefactor <= 1:
            raise ValueError("prefactor must lie in (0, 1]")
        if self.form == "exponential" and self.base <= 1:
            raise ValueError("exponential gap needs base > 1")


@dataclass(frozen=True)
class LanguageId:
    family: str
    m: int | None
    alphabet: tuple[str, ...]

    def __str__(self):
        if self.m is None:
            return self.family
        return f"{self.family}[m={self.m}]"


def membership(lang: LanguageId, w: str) -> bool:
    """Textbook membership for the built-in language families."""
    if any(c not in lang.alphabet for c in w):
        raise ValueError(f"word {w!r} not over alphabet {lang.alphabet}")
    if lang.family == "suffix":
        return len(w) >= 1 and w[-1] == "a" and len(w) - 1 <= lang.m
    if lang.family == "modlen":
        return len(w) % lang.m == 0
    if lang.family == "exactlen":
        return len(w) == lang.m
    if lang.family == "palindrome":
        return w == w[::-1]
    if lang.family == "balanced":
        n2 = len(w) // 2
        return len(w) % 2 == 0 and w == "a" * n2 + "b" * n2
    raise ValueError(f"unknown language family {lang.family!r}")


def _check_eps(eps: float) -> None:
    if not 0 < eps < 0.5:
        raise ValueError(f"error bound must lie in (0, 1/2), got {eps}")


def _quantum_spec(alphabet, labels, roles, columns, initial=0, motion=ONE_WAY) -> MachineSpec:
    """Assemble a quantum machine, completing each per-symbol partial matrix."""
    n = len(labels)
    transitions = {}
    for sym in (CENT, *alphabet, DOLLAR):
        pm = PartialMatrix(n)
        for col, entries in columns.get(sym, {}).items():
            pm.set_entries(col, entries)
        transitions[sym] = complete_unitary(pm)
    return MachineSpec(
        kind=QUANTUM,
        motion=motion,
        alphabet=tuple(alphabet),
        labels=tuple(labels),
        roles=roles,
        transitions=transitions,
        directions=(1,) * n,
        initial=initial,
    )


# --- suffix family: {ua | u in Sigma*, |u| <= m} ---------------------------

def build_am_qfa(m: int, eps: float, alphabet=("a", "b")) -> MachineSpec:
    """6-state restart quantum machine for the bounded-prefix suffix family.

    On the left end-marker it rejects with probability eps**(2m+5), scans on
    with amplitude eps, and restarts with the remainder; two nonhalting
    states track whether the last symbol read was ``a``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    _check_eps(eps)
    if "a" not in alphabet:
        raise ValueError("alphabet must contain 'a'")
    q0, q1, acc, rej, i1, i2 = range(6)
    labels = ("q0", "q1", "A", "R", "I1", "I2")
    roles = StateRoles(
        nonhalting=frozenset({q0, q1}),
        accepting=frozenset({acc}),
        rejecting=frozenset({rej}),
        reset_targets={i1: q0, i2: q0},
    )
    keep = math.sqrt(0.5 - eps**2)
    columns = {
        CENT: {q0: {q1: eps, rej: eps ** ((2 * m + 5) / 2),
                    i1: math.sqrt(1 - eps**2 - eps ** (2 * m + 5))}},
        "a": {
            q0: {q0: eps, i1: keep, i2: 1 / SQRT2},
            q1: {q0: eps, i1: keep, i2: -1 / SQRT2},
        },
        DOLLAR: {q0: {acc: 1.0}, q1: {rej: 1.0}},
    }
    for sym in alphabet:
        if sym == "a":
            continue
        columns[sym] = {
            q0: {q1: eps, i1: keep, i2: 1 / SQRT2},
            q1: {q1: eps, i1: keep, i2: -1 / SQRT2},
        }
    return _quantum_spec(alphabet, labels, roles, columns)


def build_am_pfa(m: int, eps: float, alphabet=("a", "b")) -> MachineSpec:
    """Probabilistic variant: every amplitude replaced by its squared modulus."""
    qfa = build_am_qfa(m, eps, alphabet)
    transitions = {sym: np.abs(u.T) ** 2 for sym, u in qfa.transitions.items()}
    return replace(qfa, kind=PROBABILISTIC, transitions=transitions)


# --- modular length family: {a^i | i mod m = 0} ----------------------------

def build_bm(m: int, eps: float) -> tuple[MachineSpec, MachineSpec]:
    """Rotation base machine and its wrapped-and-swapped recognizer.

    The base rotates by pi/m in the plane of its two nonhalting states per
    input symbol, accepting the complement language with one-sided unbounded
    error and gap at least sin^2(pi/m).  m = 1 is rejected: the rotation by
    pi has zero gap, so the constant-gap wrapper hypothesis fails (and the
    m = 1 language is all of a* anyway).
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    _check_eps(eps)
    q0, q1, acc, rej = range(4)
    labels = ("q0", "q1", "A", "R")
    roles = StateRoles(
        nonhalting=frozenset({q0, q1}),
        accepting=frozenset({acc}),
        rejecting=frozenset({rej}),
    )
    c, s = math.cos(math.pi / m), math.sin(math.pi / m)
    columns = {
        CENT: {q0: {q0: 1.0}},
        "a": {q0: {q0: c, q1: s}, q1: {q0: -s, q1: c}},
        DOLLAR: {q0: {rej: 1.0}, q1: {acc: 1.0}},
    }
    base = _quantum_spec(("a",), labels, roles, columns)
    gap = GapBound(prefactor=s * s, base=1.0 / (s * s), form="constant")
    wrapped = swap_accept_reject(wrap_constant(base, gap, eps))
    return base, wrapped


# --- exact length family: {w | |w| = m} ------------------------------------

def build_cm(m: int, eps: float, alphabet=("a",)) -> tuple[MachineSpec, MachineSpec]:
    """Length-encoding base machine and its wrapped-and-swapped recognizer.

    The base encodes the input length in the amplitude of one state, compares
    it against the hardwired target length with the 2x2 Hadamard-form
    transform on the right end-marker, and accepts the complement language
    with one-sided unbounded error.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    _check_eps(eps)
    q0, q1, acc, rej = range(4)
    labels = ("q0", "q1", "A", "R")
    roles = StateRoles(
        nonhalting=frozenset({q0, q1}),
        accepting=frozenset({acc}),
        rejecting=frozenset({rej}),
    )
    h = 1 / SQRT2
    columns = {
        CENT: {q0: {q0: h, q1: h ** (m + 1),
                    rej: math.sqrt(0.5 - 0.5 ** (m + 1))}},
        DOLLAR: {q0: {acc: h, rej: h}, q1: {acc: -h, rej: h}},
    }
    for sym in alphabet:
        columns[sym] = {q0: {q0: h, rej: h}, q1: {q1: 1.0}}
    base = _quantum_spec(alphabet, labels, roles, columns)
    gap = GapBound(prefactor=0.5 ** (m + 6), base=2.0 ** (m + 6), form="constant")
    wrapped = swap_accept_reject(wrap_constant(base, gap, eps))
    return base, wrapped


# --- palindromes over {a, b} ------------------------------------------------

def build_pal(eps: float) -> tuple[MachineSpec, MachineSpec]:
    """Two-path base machine for non-palindromes and its wrapped recognizer.

    One path encodes the reversed input, the other the input itself, as
    binary fractions (a -> 0, b -> 1) in the amplitudes of two states; the
    right end-marker subtracts them, so palindromes reach the accept state
    with amplitude exactly zero.
    """
    _check_eps(eps)
    labels = ("q0", "p1", "p2", "q1", "q2", "q3", "A", "R1", "R2", "R3", "R4", "R5")
    q0, p1, p2, q1, q2, q3, acc, r1, r2, r3, r4, r5 = range(12)
    roles = StateRoles(
        nonhalting=frozenset(range(6)),
        accepting=frozenset({acc}),
        rejecting=frozenset({r1, r2, r3, r4, r5}),
    )
    w23 = math.sqrt(2.0 / 3.0)
    w6 = 1 / math.sqrt(6.0)
    w3 = 1 / math.sqrt(3.0)
    h = 1 / SQRT2
    columns = {
        CENT: {q0: {p1: h, q1: h}},
        "a": {
            p1: {p1: w23, r1: -w3},
            p2: {p1: w6, p2: w6, r1: w3, r2: w3},
            q1: {q1: w6, q3: w6, r3: -w3, r4: w3},
            q2: {q2: w23, r5: w3},
            q3: {q3: w23, r3: w3},
        },
        "b": {
            p1: {p1: w6, p2: w6, r1: w3, r2: w3},
            p2: {p2: w23, r1: -w3},
            q1: {q1: w6, q2: w6, r3: -w3, r4: w3},
            q2: {q2: w23, r3: w3},
            q3: {q3: w23, r5: w3},
        },
        DOLLAR: {
            p1: {r1: 1.0},
            p2: {acc: h, r2: h},
            q1: {r3: 1.0},
            q2: {acc: -h, r2: h},
            q3: {r4: 1.0},
        },
    }
    base = _quantum_spec(("a", "b"), labels, roles, columns)
    # tightest acceptance over non-palindromes is (1/16) 3**-n, reached by the
    # even-length single-middle-defect words; the wrapper's reject amplitude
    # must stay below that for the one-sided error bound to hold
    gap = GapBound(prefactor=1.0 / 16.0, base=3.0, form="exponential")
    wrapped = swap_accept_reject(wrap_exponential(base, gap, eps))
    return base, wrapped


# --- balanced blocks a^n b^n ------------------------------------------------

def build_leq_qfa(eps: float) -> tuple[MachineSpec, MachineSpec]:
    """Two-path base machine for unbalanced words and its wrapped recognizer.

    The paths damp by 1/2 per ``a`` and 1/sqrt(2) per ``b`` (and vice versa),
    so the end-marker subtraction cancels exactly when the block lengths
    match.
    """
    _check_eps(eps)
    labels = ("q0", "p0", "p1", "p2", "q1", "q2",
              "A1", "A2", "A3", "R1", "R2", "R3")
    q0, p0, p1, p2, q1, q2, a1, a2, a3, r1, r2, r3 = range(12)
    roles = StateRoles(
        nonhalting=frozenset(range(6)),
        accepting=frozenset({a1, a2, a3}),
        rejecting=frozenset({r1, r2, r3}),
    )
    h = 1 / SQRT2
    columns = {
        CENT: {q0: {p0: h, q0: h}},
        "a": {
            p0: {p1: 0.5, r1: 0.5, r2: h},
            p1: {p1: 0.5, r1: 0.5, r2: -h},
            p2: {a1: 1.0},
            q0: {q1: h, r3: h},
            q1: {q1: h, r3: -h},
            q2: {a2: 1.0},
        },
        "b": {
            p0: {a1: 1.0},
            p1: {p2: h, r1: h},
            p2: {p2: h, r1: -h},
            q0: {a2: 1.0},
            q1: {q2: 0.5, r2: 0.5, r3: h},
            q2: {q2: 0.5, r2: 0.5, r3: -h},
        },
        DOLLAR: {
            p0: {r1: 1.0},
            p1: {a1: 1.0},
            p2: {r2: h, a2: h},
            q0: {r3: 1.0},
            q1: {a3: 1.0},
            q2: {r2: h, a2: -h},
        },
    }
    base = _quantum_spec(("a", "b"), labels, roles, columns)
    gap = GapBound(prefactor=2.0 ** -5, base=2.0 * SQRT2, form="exponential")
    wrapped = swap_accept_reject(wrap_exponential(base, gap, eps))
    return base, wrapped


def build_leq_pfa(eps: float) -> MachineSpec:
    """Three-path probabilistic restart machine for balanced blocks.

    At the left end-marker the computation splits into three equiprobable
    paths; all of them reject immediately on a*b* syntax violations.  The
    first survives every symbol with probability x = eps^2/2 and accepts at
    the end-marker; the other two survive one block with probability x^2 per
    symbol and reject there with probability eps/2.
    """
    _check_eps(eps)
    x = eps**2 / 2.0
    labels = ("S", "P1a", "P1b", "P2a", "P2b", "P3a", "P3b", "ACC", "REJ", "RST")
    s, p1a, p1b, p2a, p2b, p3a, p3b, acc, rej, rst = range(10)
    roles = StateRoles(
        nonhalting=frozenset(range(7)),
        accepting=frozenset({acc}),
        rejecting=frozenset({rej}),
        reset_targets={rst: s},
    )
    n = len(labels)

    def rows(assignments: dict[int, dict[int, float]]) -> np.ndarray:
        mat = np.zeros((n, n))
        for q in range(n):
            row = assignments.get(q, {q: 1.0})
            for q2, p in row.items():
                mat[q, q2] = p
        return mat

    transitions = {
        CENT: rows({s: {p1a: 1 / 3, p2a: 1 / 3, p3a: 1 / 3}}),
        "a": rows({
            s: {rej: 1.0},
            p1a: {p1a: x, rst: 1 - x},
            p1b: {rej: 1.0},
            p2a: {p2a: x * x, rst: 1 - x * x},
            p2b: {rej: 1.0},
            p3a: {p3a: 1.0},
            p3b: {rej: 1.0},
        }),
        "b": rows({
            s: {rej: 1.0},
            p1a: {p1b: x, rst: 1 - x},
            p1b: {p1b: x, rst: 1 - x},
            p2a: {p2b: 1.0},
            p2b: {p2b: 1.0},
            p3a: {p3b: x * x, rst: 1 - x * x},
            p3b: {p3b: x * x, rst: 1 - x * x},
        }),
        DOLLAR: rows({
            s: {rej: 1.0},
            p1a: {acc: 1.0},
            p1b: {acc: 1.0},
            p2a: {rej: eps / 2, rst: 1 - eps / 2},
            p2b: {rej: eps / 2, rst: 1 - eps / 2},
            p3a: {rej: eps / 2, rst: 1 - eps / 2},
            p3b: {rej: eps / 2, rst: 1 - eps / 2},
        }),
    }
    return MachineSpec(
        kind=PROBABILISTIC,
        motion=ONE_WAY,
        alphabet=("a", "b"),
        labels=labels,
        roles=roles,
        transitions=transitions,
        directions=(1,) * n,
        initial=s,
    )


# --- wrappers and transformers ----------------------------------------------

def _copy_nonhalting_columns(pm: PartialMatrix, base: MachineSpec, sym: str,
                             index_map: dict[int, int], skip=()) -> None:
    u = base.transitions[sym]
    for q in sorted(base.roles.nonhalting):
        if q in skip:
            continue
        entries = {index_map[r]: u[r, q] for r in range(base.n_states) if u[r, q] != 0}
        pm.set_entries(index_map[q], entries)


def _wrap(base: MachineSpec, gap: GapBound, eps: float, walker: bool) -> MachineSpec:
    if base.kind != QUANTUM or base.motion != ONE_WAY:
        raise ValueError("wrapper input must be a one-way quantum machine")
    if base.roles.reset_targets:
        raise ValueError("wrapper input must have no reset states")
    _check_eps(eps)

    non = sorted(base.roles.nonhalting)
    accs = sorted(base.roles.accepting)
    rejs = sorted(base.roles.rejecting)
    k = len(non)

    index_map = {q: i for i, q in enumerate(non)}
    labels = [base.labels[q] for q in non]
    if walker:
        walker_idx = len(labels)
        labels.append("W")
    for q in accs:
        index_map[q] = len(labels)
        labels.append(base.labels[q])
    new_rej = len(labels)
    labels.append("Rw")
    for q in rejs:
        index_map[q] = len(labels)
        labels.append(base.labels[q])
    new_rst = len(labels)
    labels.append("Iw")
    n = len(labels)

    reset_targets = {index_map[q]: base.initial for q in rejs}
    reset_targets[new_rst] = base.initial
    nonhalting = set(range(k)) | ({walker_idx} if walker else set())
    roles = StateRoles(
        nonhalting=frozenset(nonhalting),
        accepting=frozenset(index_map[q] for q in accs),
        rejecting=frozenset({new_rej}),
        reset_targets=reset_targets,
    )

    u_cent = base.transitions[CENT]
    transitions = {}
    for sym in base.tape_symbols:
        pm = PartialMatrix(n)
        if sym == CENT:
            entries = {index_map[r]: u_cent[r, base.initial] / SQRT2
                       for r in range(base.n_states) if u_cent[r, base.initial] != 0}
            if walker:
                entries[walker_idx] = 1 / SQRT2
            else:
                entries[new_rej] = math.sqrt(gap.prefactor * eps / 2.0)
                entries[new_rst] = math.sqrt((1.0 - gap.prefactor * eps) / 2.0)
            pm.set_entries(index_map[base.initial], entries)
            _copy_nonhalting_columns(pm, base, sym, index_map, skip=(base.initial,))
        else:
            _copy_nonhalting_columns(pm, base, sym, index_map)
            if walker:
                if sym == DOLLAR:
                    pm.set_entries(walker_idx, {
                        new_rej: math.sqrt(gap.prefactor * eps),
                        new_rst: math.sqrt(1.0 - gap.prefactor * eps),
                    })
                else:
                    pm.set_entries(walker_idx, {
                        walker_idx: 1.0 / math.sqrt(gap.base),
                        new_rst: math.sqrt(1.0 - 1.0 / gap.base),
                    })
        transitions[sym] = complete_unitary(pm)

    return MachineSpec(
        kind=QUANTUM,
        motion=ONE_WAY,
        alphabet=base.alphabet,
        labels=tuple(labels),
        roles=roles,
        transitions=transitions,
        directions=(1,) * n,
        initial=index_map[base.initial],
    )


def wrap_exponential(base: MachineSpec, gap: GapBound, eps: float) -> MachineSpec:
    """Restart wrapper for bases whose gap decays exponentially with length.

    Adds a walker branch that survives each input symbol with amplitude
    1/sqrt(base) and rejects on the right end-marker with amplitude
    sqrt(prefactor * eps); the base's reject states become restart states.
    """
    if gap.form != "exponential":
        raise ValueError("wrap_exponential needs an exponential gap bound")
    return _wrap(base, gap, eps, walker=True)


def wrap_constant(base: MachineSpec, gap: GapBound, eps: float) -> MachineSpec:
    """Restart wrapper for bases with a constant gap lower bound.

    The second branch resolves immediately on the left end-marker, rejecting
    with amplitude sqrt(prefactor * eps), so no walker state is needed.
    """
    if gap.form != "constant":
        raise ValueError("wrap_constant needs a constant gap bound")
    return _wrap(base, gap, eps, walker=False)


def swap_accept_reject(spec: MachineSpec) -> MachineSpec:
    """Exchange the accepting and rejecting role sets."""
    roles = StateRoles(
        nonhalting=spec.roles.nonhalting,
        accepting=spec.roles.rejecting,
        rejecting=spec.roles.accepting,
        reset_targets=dict(spec.roles.reset_targets),
    )
    return spec.with_roles(roles)


def squared_error_bound(eps: float) -> float:
    """Error bound after the ratio-squaring conversion: eps^2/(1-2eps+2eps^2)."""
    return eps**2 / (1.0 - 2.0 * eps + 2.0 * eps**2)


def pfa_to_qfa_restart(pfa: MachineSpec) -> MachineSpec:
    """Convert an n-state restart probabilistic machine into a 2n+4-state
    restart quantum machine recognizing the same language.

    Halting is first deferred to the right end-marker through accumulator
    states, then every row-stochastic matrix is embedded into a unitary of
    twice the size with a common scale; squared amplitudes turn per-round
    accept/reject masses into their squares, which squares the error ratio.
    """
    if pfa.kind != PROBABILISTIC or pfa.motion != ONE_WAY:
        raise ValueError("input must be a one-way probabilistic machine")
    if not pfa.is_restart_only:
        raise ValueError("reset targets other than the initial state are unsupported")

    non = sorted(pfa.roles.nonhalting)
    accs = sorted(pfa.roles.accepting)
    rejs = sorted(pfa.roles.rejecting)
    rsts = sorted(pfa.roles.reset_targets)
    n = pfa.n_states

    # deferred-halting order: nonhalting, then accept/reject conduits,
    # then the two accumulators, then the original restart states
    order = non + accs + rejs
    perm = {old: i for i, old in enumerate(order)}
    acc_sum = len(order)
    rej_sum = acc_sum + 1
    for pos, old in enumerate(rsts):
        perm[old] = rej_sum + 1 + pos
    nd = n + 2

    deferred = {}
    for sym in pfa.tape_symbols:
        a = pfa.transitions[sym]
        out = np.zeros((nd, nd))
        for old in non:
            i = perm[old]
            for old2 in range(n):
                p = a[old, old2]
                if p == 0:
                    continue
                if sym == DOLLAR and old2 in pfa.roles.accepting:
                    out[i, acc_sum] += p
                elif sym == DOLLAR and old2 in pfa.roles.rejecting:
                    out[i, rej_sum] += p
                else:
                    out[i, perm[old2]] += p
        for old in accs:
            out[perm[old], acc_sum if sym == DOLLAR else perm[old]] = 1.0
        for old in rejs:
            out[perm[old], rej_sum if sym == DOLLAR else perm[old]] = 1.0
        out[acc_sum, acc_sum] = 1.0
        out[rej_sum, rej_sum] = 1.0
        for old in rsts:
            out[perm[old], perm[old]] = 1.0
        deferred[sym] = out

    transitions = {}
    scale = None
    for sym, a in deferred.items():
        u, scale = embed_stochastic(a)
        transitions[sym] = u.T.copy()

    labels = [pfa.labels[q] for q in order] + ["AccSum", "RejSum"]
    labels += [pfa.labels[q] for q in rsts]
    labels += [f"X{i}" for i in range(nd)]
    n_total = 2 * nd
    initial = perm[pfa.initial]
    reset_targets = {perm[q]: initial for q in rsts}
    for i in range(nd, n_total):
        reset_targets[i] = initial
    roles = StateRoles(
        nonhalting=frozenset(range(len(order))),
        accepting=frozenset({acc_sum}),
        rejecting=frozenset({rej_sum}),
        reset_targets=reset_targets,
    )
    return MachineSpec(
        kind=QUANTUM,
        motion=ONE_WAY,
        alphabet=pfa.alphabet,
        labels=tuple(labels),
        roles=roles,
        transitions=transitions,
        directions=(1,) * n_total,
        initial=initial,
    )


def embedding_scale(pfa: MachineSpec) -> float:
    """The per-step damping scale the quantum conversion of ``pfa`` uses."""
    return math.sqrt(pfa.n_states + 2)


def majority_copies(eps: float, eps_prime: float) -> int:
    """Smallest k such that a race to k+1 verdicts with per-trial error eps
    has overall error at most eps_prime (exact binomial tail)."""
    if not 0 < eps_prime < eps:
        raise ValueError("need 0 < eps_prime < eps")
    _check_eps(eps)
    k = 0
    while True:
        trials = 2 * k + 1
        tail = sum(
            math.comb(trials, j) * eps**j * (1 - eps) ** (trials - j)
            for j in range(k + 1, trials + 1)
        )
        if tail <= eps_prime:
            return k
        k += 1


def _grid_machine(spec: MachineSpec, copies: list[tuple[int, int]],
                  accept_next, reject_next) -> MachineSpec:
    """Connect copies of ``spec`` with reset moves between copy start states.

    ``accept_next(copy)`` / ``reject_next(copy)`` return the copy a verdict
    routes to, or None when the verdict becomes final.
    """
    non = sorted(spec.roles.nonhalting)
    rest = [q for q in range(spec.n_states) if q not in spec.roles.nonhalting]
    index = {}
    labels = []
    for c in copies:
        for q in non:
            index[(c, q)] = len(labels)
            labels.append(f"{spec.labels[q]}@{c[0]},{c[1]}")
    for c in copies:
        for q in rest:
            index[(c, q)] = len(labels)
            labels.append(f"{spec.labels[q]}@{c[0]},{c[1]}")

    accepting = set()
    rejecting = set()
    reset_targets = {}
    for c in copies:
        for q, t in spec.roles.reset_targets.items():
            reset_targets[index[(c, q)]] = index[(c, t)]
        for q in spec.roles.accepting:
            nxt = accept_next(c)
            if nxt is None:
                accepting.add(index[(c, q)])
            else:
                reset_targets[index[(c, q)]] = index[(nxt, spec.initial)]
        for q in spec.roles.rejecting:
            nxt = reject_next(c)
            if nxt is None:
                rejecting.add(index[(c, q)])
            else:
                reset_targets[index[(c, q)]] = index[(nxt, spec.initial)]

    n = len(labels)
    quantum = spec.kind == QUANTUM
    transitions = {}
    for sym in spec.tape_symbols:
        m = spec.transitions[sym]
        out = np.zeros((n, n), dtype=complex if quantum else float)
        for c in copies:
            for q in range(spec.n_states):
                for q2 in range(spec.n_states):
                    v = m[q, q2]
                    if v != 0:
                        out[index[(c, q)], index[(c, q2)]] = v
        transitions[sym] = out

    roles = StateRoles(
        nonhalting=frozenset(range(len(copies) * len(non))),
        accepting=frozenset(accepting),
        rejecting=frozenset(rejecting),
        reset_targets=reset_targets,
    )
    return MachineSpec(
        kind=spec.kind,
        motion=spec.motion,
        alphabet=spec.alphabet,
        labels=tuple(labels),
        roles=roles,
        transitions=transitions,
        directions=(1,) * n,
        initial=index[(copies[0], spec.initial)],
    )


def majority_grid(spec: MachineSpec, k: int) -> MachineSpec:
    """(k+1)^2 copies racing to k+1 accept or reject verdicts."""
    copies = [(i, j) for i in range(k + 1) for j in range(k + 1)]

    def accept_next(c):
        i, j = c
        return (i + 1, j) if i + 1 <= k else None

    def reject_next(c):
        i, j = c
        return (i, j + 1) if j + 1 <= k else None

    return _grid_machine(spec, copies, accept_next, reject_next)


def amplify_reset(spec: MachineSpec, eps: float, eps_prime: float) -> MachineSpec:
    """Amplify a reset machine with error <= eps down to error <= eps_prime.

    Builds the verdict-counting grid of (k+1)^2 copies connected by reset
    moves, with k chosen by exact binomial tail summation.
    """
    if spec.motion != ONE_WAY:
        raise ValueError("amplification is implemented for one-way reset machines")
    k = majority_copies(eps, eps_prime)
    return majority_grid(spec, k)


def chain_one_sided(spec: MachineSpec, copies: int) -> MachineSpec:
    """Sequentially connect copies; accept only if every copy accepts.

    Per-copy one-sided error p drops to p**copies.
    """
    if copies < 1:
        raise ValueError("need at least one copy")
    chain = [(c, 0) for c in range(copies)]

    def accept_next(c):
        i, _ = c
        return (i + 1, 0) if i + 1 < copies else None

    def reject_next(c):
        return None

    return _grid_machine(spec, chain, accept_next, reject_next)


def restart_to_twoway(pfa: MachineSpec) -> MachineSpec:
    """Replace teleporting restarts with left-walking states (probabilistic).

    Each restart state becomes a walker that moves one square left per step
    and completes its reset on the left end-marker; acceptance probabilities
    are unchanged and expected steps at most double.
    """
    if pfa.kind != PROBABILISTIC:
        raise ValueError("the walking-reset construction is probabilistic only")
    if pfa.motion != ONE_WAY:
        raise ValueError("input must be a one-way machine")
    if not pfa.is_restart_only:
        raise ValueError("input must be restart-only")
    resets = sorted(pfa.roles.reset_targets)
    transitions = {}
    for sym, a in pfa.transitions.items():
        out = a.copy()
        for r in resets:
            out[r, :] = 0.0
            out[r, r] = 1.0
        transitions[sym] = out
    directions = tuple(-1 if q in pfa.roles.reset_targets else 1
                       for q in range(pfa.n_states))
    return replace(pfa, motion=TWO_WAY, transitions=transitions, directions=directions)
