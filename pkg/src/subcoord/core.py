"""Ground sets, partition matroids, and set-function oracles.

The ground set at a given round is the collection of agent-action pairs
``(i, a)`` with ``i`` indexing active agents and ``a`` indexing actions in
agent ``i``'s action set.  Feasible joint selections contain at most one
pair per agent, so the feasible family is a partition matroid whose blocks
are the per-agent action sets.

A joint selection is stored as a tuple with one entry per agent: the chosen
action index, or ``None`` when the agent is idle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

# One entry per agent; None marks an idle agent.
Selection = tuple  # tuple[int | None, ...]

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class PartitionMatroid:
    """Per-agent action counts defining the feasibility family.

    ``blocks[i]`` is the number of actions available to agent ``i``.  A set
    of agent-action pairs is feasible iff it contains at most one pair per
    agent.
    """

    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise ValueError("matroid needs at least one agent block")
        if any(int(b) < 1 for b in self.blocks):
            raise ValueError("every block must have at least one action")
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))

    @property
    def n_agents(self):
        return len(self.blocks)

    @property
    def size(self):
        """Number of agent-action pairs in the ground set."""
        return sum(self.blocks)

    def offsets(self):
        """Start index of each agent's block in the flat pair layout."""
        out = np.zeros(self.n_agents + 1, dtype=int)
        np.cumsum(self.blocks, out=out[1:])
        return out

    def block_slice(self, i):
        off = self.offsets()
        return slice(int(off[i]), int(off[i + 1]))

    def pair_index(self, agent, action):
        if not (0 <= agent < self.n_agents):
            raise ValueError(f"agent index {agent} out of range")
        if not (0 <= action < self.blocks[agent]):
            raise ValueError(f"action index {action} out of range for agent {agent}")
        return int(self.offsets()[agent]) + int(action)

    def empty_selection(self):
        return (None,) * self.n_agents

    def selection_count(self, include_idle=True):
        """Number of feasible selections (with or without idle choices)."""
        n = 1
        for b in self.blocks:
            n *= b + 1 if include_idle else b
        return n


def selection_to_pairs(selection):
    """Agent-action pairs of a selection, idle agents omitted."""
    return tuple((i, a) for i, a in enumerate(selection) if a is not None)


def selection_from_pairs(pairs, matroid):
    """Build a selection tuple from agent-action pairs.

    Raises ValueError when indices are out of range or when two pairs fall
    in the same agent block.
    """
    chosen = [None] * matroid.n_agents
    for agent, action in pairs:
        matroid.pair_index(agent, action)  # bounds check
        if chosen[agent] is not None:
            raise ValueError(f"two pairs selected for agent {agent}")
        chosen[agent] = int(action)
    return tuple(chosen)


def is_feasible(pairs, matroid):
    """True iff the pair collection contains at most one pair per agent.

    Out-of-range indices raise; duplicate pairs within one block make the
    collection infeasible rather than raising.
    """
    seen = set()
    for agent, action in pairs:
        matroid.pair_index(agent, action)
        if agent in seen:
            return False
        seen.add(agent)
    return True


class SetFunction:
    """Interface for nonnegative set utilities over agent-action pairs.

    Implementations evaluate a selection under an opaque state handle and
    declare an analytic upper bound on single-pair marginal gains.  Oracles
    are immutable after construction; ``evaluate`` must be pure in
    ``(selection, state)``.
    """

    def evaluate(self, selection, state):
        raise NotImplementedError

    def marginal_bound(self, state):
        raise NotImplementedError


def marginal_gain(fn, pair, selection, state):
    """Gain of adding ``pair`` to ``selection``: F(A + e) - F(A)."""
    agent, action = pair
    if selection[agent] is not None:
        raise ValueError(f"agent {agent} already selects an action; union infeasible")
    augmented = selection[:agent] + (int(action),) + selection[agent + 1 :]
    return fn.evaluate(augmented, state) - fn.evaluate(selection, state)


def enumerate_selections(matroid, include_idle=True, cap=DEFAULT_ENUMERATION_CAP):
    """Yield feasible selections without materializing the family.

    Iteration is lexicographic with idle ordered before action 0, so the
    first maximizer encountered under strict improvement is the
    lexicographically smallest one.
    """
    if cap is not None and matroid.selection_count(include_idle) > cap:
        raise ValueError(
            f"feasible family larger than enumeration cap {cap}; "
            "reduce the instance or raise the cap"
        )
    choices = []
    for b in matroid.blocks:
        opts = list(range(b))
        if include_idle:
            opts = [None] + opts
        choices.append(opts)
    yield from itertools.product(*choices)


def brute_force_opt(fn, matroid, state, cap=DEFAULT_ENUMERATION_CAP):
    """Exact maximizer of ``fn`` over the feasible family.

    Enumerates idle choices too; for monotone utilities the maximum equals
    the maximum over full selections.  Ties go to the lexicographically
    smallest selection (idle sorts before any action).
    """
    best_sel = None
    best_val = -np.inf
    for sel in enumerate_selections(matroid, include_idle=True, cap=cap):
        val = fn.evaluate(sel, state)
        if val > best_val:
            best_val = val
            best_sel = sel
    return best_sel, float(best_val)


@dataclass
class PropertyReport:
    """Outcome of auditing a set function against the standard assumptions.

    Violation entries carry the witnessing sets/pairs together with the
    offending values; empty lists mean the audit passed.
    """

    checked: int = 0
    normalization: list = field(default_factory=list)
    monotonicity: list = field(default_factory=list)
    submodularity: list = field(default_factory=list)
    marginal_bound: list = field(default_factory=list)

    @property
    def ok(self):
        return not (
            self.normalization
            or self.monotonicity
            or self.submodularity
            or self.marginal_bound
        )

    def summary(self):
        return (
            f"checked={self.checked} norm={len(self.normalization)} "
            f"mono={len(self.monotonicity)} submod={len(self.submodularity)} "
            f"bound={len(self.marginal_bound)}"
        )


def _subsets_of(selection):
    """All selections obtained by idling a subset of the active agents."""
    active = [i for i, a in enumerate(selection) if a is not None]
    for keep_mask in itertools.product((False, True), repeat=len(active)):
        sub = list(selection)
        for flag, i in zip(keep_mask, active):
            if not flag:
                sub[i] = None
        yield tuple(sub)


def check_set_function(
    fn,
    matroid,
    state,
    mode="exhaustive",
    trials=200,
    rng=None,
    tol=1e-9,
    cap=DEFAULT_ENUMERATION_CAP,
):
    """Audit normalization, monotonicity, submodularity, and bounded gains.

    ``exhaustive`` mode walks every chain A <= B and extension e allowed by
    the matroid; ``sampled`` mode draws random nested pairs with a seeded
    generator.  Violations are returned as report data, never raised.
    """
    report = PropertyReport()
    bound = float(fn.marginal_bound(state))
    empty = matroid.empty_selection()
    v_empty = fn.evaluate(empty, state)
    report.checked += 1
    if abs(v_empty) > tol:
        report.normalization.append((empty, v_empty))

    def audit_triple(sub, sel, agent, action):
        """Check F(e | sub) >= F(e | sel) and both gains within [0, bound]."""
        gain_small = marginal_gain(fn, (agent, action), sub, state)
        gain_large = marginal_gain(fn, (agent, action), sel, state)
        report.checked += 1
        if gain_large > gain_small + tol:
            report.submodularity.append((sub, sel, (agent, action), gain_small, gain_large))
        for g, ctx in ((gain_small, sub), (gain_large, sel)):
            if g < -tol or g > bound + tol:
                report.marginal_bound.append((ctx, (agent, action), g))

    if mode == "exhaustive":
        for sel in enumerate_selections(matroid, include_idle=True, cap=cap):
            val = fn.evaluate(sel, state)
            report.checked += 1
            if val < -tol:
                report.monotonicity.append((empty, sel, v_empty, val))
            for sub in _subsets_of(sel):
                if sub == sel:
                    continue
                sub_val = fn.evaluate(sub, state)
                report.checked += 1
                if sub_val > val + tol:
                    report.monotonicity.append((sub, sel, sub_val, val))
                for agent in range(matroid.n_agents):
                    if sel[agent] is not None:
                        continue
                    for action in range(matroid.blocks[agent]):
                        audit_triple(sub, sel, agent, action)
    elif mode == "sampled":
        if rng is None:
            raise ValueError("sampled mode requires a seeded rng")
        for _ in range(trials):
            sel = tuple(
                None if rng.random() < 0.5 else int(rng.integers(b))
                for b in matroid.blocks
            )
            sub = tuple(
                a if (a is not None and rng.random() < 0.5) else None for a in sel
            )
            val = fn.evaluate(sel, state)
            sub_val = fn.evaluate(sub, state)
            report.checked += 1
            if sub_val > val + tol:
                report.monotonicity.append((sub, sel, sub_val, val))
            idle = [i for i, a in enumerate(sel) if a is None]
            if idle:
                agent = int(rng.choice(idle))
                action = int(rng.integers(matroid.blocks[agent]))
                audit_triple(sub, sel, agent, action)
    else:
        raise ValueError(f"unknown audit mode {mode!r}")
    return report
