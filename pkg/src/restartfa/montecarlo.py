"""Trajectory sampling cross-validator.

Runs are simulated round-synchronously: all still-active runs process round r
before any run starts round r+1, and at each step within a round the
measurement outcome of every in-flight run is drawn from the exact
conditional distribution (multinomially, since runs sharing a round start
are exchangeable).  Quantum runs that keep measuring "continue" share the
same renormalized pure state, so a single unnormalized state vector per
cohort carries the exact per-step outcome probabilities.

Everything is driven by one seeded generator consumed in a fixed iteration
order, so identical (machine, word, n, seed) always give identical stats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .machine import (
    ONE_WAY,
    QUANTUM,
    TWO_WAY,
    MachineSpec,
    TapeWord,
    induced_step_operator,
)

DEFAULT_MAX_ROUNDS = 1_000_000


@dataclass
class SampleStats:
    n: int
    accepted: int
    rejected: int
    censored: int
    mean_steps: float
    stderr_acc: float
    mean_rounds: float

    @property
    def acceptance(self) -> float:
        done = self.accepted + self.rejected
        return self.accepted / done if done else float("nan")


def _multinomial(rng: np.random.Generator, count: int, probs: np.ndarray) -> np.ndarray:
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if total <= 0:
        out = np.zeros(len(probs), dtype=np.int64)
        out[-1] = count
        return out
    return rng.multinomial(count, probs / total)


def _quantum_round(spec, word, start, count, rng, stats):
    """Sample one round for ``count`` runs starting in ``start``.

    Returns {reset target: count} of runs that restart.
    """
    n = spec.n_states
    acc = sorted(spec.roles.accepting)
    rej = sorted(spec.roles.rejecting)
    resets = sorted(spec.roles.reset_targets.items())
    psi = np.zeros(n, dtype=complex)
    psi[start] = 1.0
    in_flight = count
    carried: dict[int, int] = {}
    for step, sym in enumerate(word.symbols, start=1):
        if in_flight == 0:
            break
        psi = spec.transitions[sym] @ psi
        w = np.abs(psi) ** 2
        groups = [sum(w[q] for q in acc), sum(w[q] for q in rej)]
        groups += [w[q] for q, _ in resets]
        cont = w.sum() - sum(groups)
        probs = np.array(groups + [max(cont, 0.0)])
        counts = _multinomial(rng, in_flight, probs)
        stats["accepted"] += int(counts[0])
        stats["rejected"] += int(counts[1])
        resolved = int(counts[:-1].sum())
        stats["steps"] += step * resolved
        for (q, target), c in zip(resets, counts[2:-1]):
            if c:
                carried[target] = carried.get(target, 0) + int(c)
        in_flight = int(counts[-1])
        for q in acc + rej + [q for q, _ in resets]:
            psi[q] = 0.0
    if in_flight:
        # nonhalting mass past the end-marker is a spec defect; the engines
        # raise on it, here those runs are counted as censored
        stats["stuck"] += in_flight
        stats["steps"] += len(word.symbols) * in_flight
    return carried


def _probabilistic_round(spec, word, start, count, rng, stats):
    n = spec.n_states
    acc = set(spec.roles.accepting)
    rej = set(spec.roles.rejecting)
    resets = dict(spec.roles.reset_targets)
    counts = np.zeros(n, dtype=np.int64)
    counts[start] = count
    carried: dict[int, int] = {}
    for step, sym in enumerate(word.symbols, start=1):
        if counts.sum() == 0:
            break
        m = spec.transitions[sym]
        new_counts = np.zeros(n, dtype=np.int64)
        for q in np.nonzero(counts)[0]:
            new_counts += _multinomial(rng, int(counts[q]), m[q])
        for q in np.nonzero(new_counts)[0]:
            c = int(new_counts[q])
            if q in acc:
                stats["accepted"] += c
                stats["steps"] += step * c
                new_counts[q] = 0
            elif q in rej:
                stats["rejected"] += c
                stats["steps"] += step * c
                new_counts[q] = 0
            elif q in resets:
                carried[resets[q]] = carried.get(resets[q], 0) + c
                stats["steps"] += step * c
                new_counts[q] = 0
        counts = new_counts
    leftover = int(counts.sum())
    if leftover:
        stats["stuck"] += leftover
        stats["steps"] += len(word.symbols) * leftover
    return carried


def _twoway_probabilistic_round(spec, word, start, count, rng, stats, step_cap):
    n = word.tape_length
    nq = spec.n_states
    op = induced_step_operator(spec, word)
    acc = set(spec.roles.accepting)
    rej = set(spec.roles.rejecting)
    resets = dict(spec.roles.reset_targets)
    walking = {q for q in resets if spec.directions[q] == -1}
    counts = np.zeros(nq * n, dtype=np.int64)
    counts[start * n + 0] = count
    carried: dict[int, int] = {}
    for step in range(1, step_cap + 1):
        if counts.sum() == 0:
            break
        new_counts = np.zeros(nq * n, dtype=np.int64)
        for c_idx in np.nonzero(counts)[0]:
            new_counts += _multinomial(rng, int(counts[c_idx]), op[c_idx])
        for c_idx in np.nonzero(new_counts)[0]:
            q, pos = divmod(int(c_idx), n)
            c = int(new_counts[c_idx])
            if q in acc:
                stats["accepted"] += c
            elif q in rej:
                stats["rejected"] += c
            elif q in resets and (q not in walking or pos == 0):
                carried[resets[q]] = carried.get(resets[q], 0) + c
            else:
                continue
            stats["steps"] += step * c
            new_counts[c_idx] = 0
        counts = new_counts
    leftover = int(counts.sum())
    if leftover:
        stats["stuck"] += leftover
        stats["steps"] += step_cap * leftover
    return carried


def sample_runs(
    spec: MachineSpec,
    word: TapeWord,
    n: int,
    seed: int,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    step_cap: int | None = None,
) -> SampleStats:
    """Simulate ``n`` independent runs and aggregate their verdicts.

    Runs still unresolved after ``max_rounds`` rounds are censored and
    excluded from the acceptance frequency.  ``mean_steps`` averages total
    steps over all runs, censored partial runs included.
    """
    if n < 1:
        raise ValueError("need at least one run")
    if spec.kind == QUANTUM and spec.motion == TWO_WAY:
        raise ValueError("sampling two-way quantum machines is not supported")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    stats = {"accepted": 0, "rejected": 0, "steps": 0, "stuck": 0}
    cohorts: dict[int, int] = {spec.initial: n}
    rounds_total = 0
    rounds = 0
    while cohorts and rounds < max_rounds:
        rounds += 1
        rounds_total += sum(cohorts.values())
        next_cohorts: dict[int, int] = {}
        for start in sorted(cohorts):
            count = cohorts[start]
            if spec.motion == ONE_WAY and spec.kind == QUANTUM:
                carried = _quantum_round(spec, word, start, count, rng, stats)
            elif spec.motion == ONE_WAY:
                carried = _probabilistic_round(spec, word, start, count, rng, stats)
            else:
                cap = step_cap or 10 * word.tape_length * spec.n_states
                carried = _twoway_probabilistic_round(
                    spec, word, start, count, rng, stats, cap)
            for target, c in carried.items():
                next_cohorts[target] = next_cohorts.get(target, 0) + c
        cohorts = next_cohorts
    censored = sum(cohorts.values()) + stats["stuck"]
    accepted, rejected = stats["accepted"], stats["rejected"]
    done = accepted + rejected
    if done:
        p = accepted / done
        stderr = float(np.sqrt(p * (1.0 - p) / done))
    else:
        stderr = float("nan")
    return SampleStats(
        n=n,
        accepted=accepted,
        rejected=rejected,
        censored=censored,
        mean_steps=stats["steps"] / n,
        stderr_acc=stderr,
        mean_rounds=rounds_total / n,
    )
