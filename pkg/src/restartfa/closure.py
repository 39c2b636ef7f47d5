"""Turn per-round quantities into overall verdicts.

The geometric series over rounds is aggregated analytically: overall
acceptance solves the linear system P_acc(q) = p_acc(q) + sum_t p_reset(q->t)
P_acc(t) over reset targets, which reduces to the closed form
p_acc / (p_acc + p_rej) in the single-restart case.  Expected total steps
solve the same system with in-round expected steps as the inhomogeneous term.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .engine import EngineCaps, RoundResult, round_table
from .machine import MachineSpec, tape_word

RESIDUAL_PRECONDITION = 1e-9


@dataclass
class DecisionReport:
    P_acc: float
    P_rej: float
    expected_total_steps: float
    lemma4_bound: float
    halts_almost_surely: bool


@dataclass
class WordVerdict:
    word: str
    member: bool
    ratio: float
    passed: bool
    strong_pass: bool
    degenerate: bool = False

    @property
    def status(self) -> str:
        if self.degenerate:
            return "degenerate"
        return "pass" if self.passed else "fail"


@dataclass
class VerdictReport:
    verdicts: list[WordVerdict]
    eps: float

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts if not v.degenerate)

    @property
    def degenerate_words(self) -> list[str]:
        return [v.word for v in self.verdicts if v.degenerate]


@dataclass
class GapProfile:
    n_max: int
    g: dict[int, float]


def expected_runtime_bound(p_halt: float, max_steps: float) -> float:
    """Worst-case expected runtime (1/p_halt) * max_steps; +inf when p_halt is 0."""
    if p_halt < 0 or p_halt > 1 + 1e-12:
        raise ValueError(f"p_halt must be a probability, got {p_halt}")
    if p_halt == 0:
        return math.inf
    return max_steps / p_halt


def overall_decision(table: dict[int, RoundResult], initial: int) -> DecisionReport:
    """Aggregate a round table into overall probabilities and expected steps.

    All reset targets appearing in the table's rounds must be keys of the
    table.  Starts from which halting is unreachable get limiting value 0 and
    force halts_almost_surely to False when reachable.
    """
    for q, r in table.items():
        if r.residual > RESIDUAL_PRECONDITION:
            raise ValueError(f"round from state {q} left residual {r.residual:.3e}")
        for t in r.p_reset:
            if t not in table:
                raise ValueError(f"reset target {t} missing from round table")
    if initial not in table:
        raise ValueError(f"initial state {initial} missing from round table")

    states = sorted(table)
    idx = {q: i for i, q in enumerate(states)}
    k = len(states)

    # Which starts can reach a round with positive halting probability?
    can_halt = {q for q in states if table[q].p_halt > 0.0}
    changed = True
    while changed:
        changed = False
        for q in states:
            if q in can_halt:
                continue
            if any(t in can_halt and p > 0.0 for t, p in table[q].p_reset.items()):
                can_halt.add(q)
                changed = True

    live = sorted(can_halt)
    if not live or initial not in can_halt:
        return DecisionReport(0.0, 0.0, math.inf, _lemma4(table, initial), False)

    lidx = {q: i for i, q in enumerate(live)}
    m = len(live)
    sys = np.zeros((m, m))
    for q in live:
        r = table[q]
        i = lidx[q]
        # assemble the diagonal as a sum of leaving masses to avoid the
        # cancellation in 1 - p_reset(q->q) when halting mass is tiny
        diag = r.p_halt + r.residual
        for t, p in r.p_reset.items():
            if t == q:
                continue
            diag += p
            if t in lidx:
                sys[i, lidx[t]] = -p
        sys[i, i] = diag

    b_acc = np.array([table[q].p_acc for q in live])
    b_rej = np.array([table[q].p_rej for q in live])
    b_steps = np.array([table[q].expected_steps for q in live])
    if m == 1:
        x_acc = b_acc / sys[0, 0]
        x_rej = b_rej / sys[0, 0]
        x_steps = b_steps / sys[0, 0]
    else:
        x_acc = np.linalg.solve(sys, b_acc)
        x_rej = np.linalg.solve(sys, b_rej)
        x_steps = np.linalg.solve(sys, b_steps)

    i0 = lidx[initial]
    p_acc = float(x_acc[i0])
    p_rej = float(x_rej[i0])
    halts = abs(p_acc + p_rej - 1.0) <= 1e-9
    steps = float(x_steps[i0]) if halts else math.inf
    return DecisionReport(p_acc, p_rej, steps, _lemma4(table, initial), halts)


def _lemma4(table: dict[int, RoundResult], initial: int) -> float:
    """Worst-case runtime bound over the starts reachable from ``initial``."""
    reachable = {initial}
    frontier = [initial]
    while frontier:
        q = frontier.pop()
        for t, p in table[q].p_reset.items():
            if p > 0.0 and t not in reachable:
                reachable.add(t)
                frontier.append(t)
    p_min = min(table[q].p_halt for q in reachable)
    s_max = max(table[q].max_steps for q in reachable)
    return expected_runtime_bound(p_min, s_max)


def decide(spec: MachineSpec, word_text: str, caps: EngineCaps = EngineCaps()) -> DecisionReport:
    """Round table plus closure for a word given as a plain string."""
    word = tape_word(word_text, spec.alphabet)
    return overall_decision(round_table(spec, word, caps), spec.initial)


def error_verdict(
    spec: MachineSpec,
    membership,
    words,
    eps: float,
    caps: EngineCaps = EngineCaps(),
) -> VerdictReport:
    """Check the error-bound criterion ratio <= eps/(1-eps) word by word.

    For members the ratio is P_rej/P_acc, for non-members P_acc/P_rej.
    A 0/0 ratio yields a flagged "degenerate" verdict instead of pass/fail.
    ``strong_pass`` reports the stronger sufficient condition ratio <= eps.
    """
    if not 0 < eps < 0.5:
        raise ValueError(f"error bound must lie in (0, 1/2), got {eps}")
    threshold = eps / (1.0 - eps)
    verdicts = []
    for w in words:
        report = decide(spec, w, caps)
        member = bool(membership(w))
        num, den = (report.P_rej, report.P_acc) if member else (report.P_acc, report.P_rej)
        if den == 0.0:
            if num == 0.0:
                verdicts.append(WordVerdict(w, member, math.nan, False, False, degenerate=True))
                continue
            ratio = math.inf
        else:
            ratio = num / den
        verdicts.append(WordVerdict(
            w, member, ratio,
            passed=ratio <= threshold + 1e-12,
            strong_pass=ratio <= eps + 1e-12,
        ))
    return VerdictReport(verdicts, eps)


def words_up_to(alphabet, n_max: int):
    """All words over ``alphabet`` of length 0..n_max, shortest first."""
    for n in range(n_max + 1):
        for tup in itertools.product(alphabet, repeat=n):
            yield "".join(tup)


def gap_profile(
    spec: MachineSpec,
    membership,
    n_max: int,
    alphabet=None,
    caps: EngineCaps = EngineCaps(),
) -> GapProfile:
    """Minimum member acceptance minus maximum non-member acceptance, by length.

    Uses single-round acceptance for machines without resets and the overall
    closure acceptance otherwise.  Lengths where either side is empty are
    left out of the profile.
    """
    alphabet = spec.alphabet if alphabet is None else tuple(alphabet)
    bare = not spec.roles.reset_targets

    def acceptance(w: str) -> float:
        word = tape_word(w, alphabet)
        if bare:
            return round_table(spec, word, caps)[spec.initial].p_acc
        return overall_decision(round_table(spec, word, caps), spec.initial).P_acc

    g: dict[int, float] = {}
    min_member = math.inf
    max_nonmember = -math.inf
    for n in range(n_max + 1):
        for tup in itertools.product(alphabet, repeat=n):
            w = "".join(tup)
            p = acceptance(w)
            if membership(w):
                min_member = min(min_member, p)
            else:
                max_nonmember = max(max_nonmember, p)
        if math.isfinite(min_member) and math.isfinite(max_nonmember):
            g[n] = min_member - max_nonmember
    return GapProfile(n_max, g)
