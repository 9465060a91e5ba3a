"""Synthetic set utilities for tests, verification suites, and drills.

Weighted coverage over an abstract item universe is the workhorse: it is
normalized, monotone, and submodular, cheap to evaluate, and easy to
randomize.  Modular and deliberately supermodular variants support the
property-audit tests.
"""

from __future__ import annotations

import numpy as np

from .core import PartitionMatroid, SetFunction


class WeightedCoverage(SetFunction):
    """Union-of-items coverage with nonnegative item weights.

    ``covers[(agent, action)]`` lists item indices covered by that pair.
    The state handle is the weight vector, so one oracle serves a whole
    stream of drifting weights.
    """

    def __init__(self, matroid, covers):
        self.matroid = matroid
        self.covers = {k: tuple(v) for k, v in covers.items()}

    def evaluate(self, selection, state):
        weights = state
        items = set()
        for agent, action in enumerate(selection):
            if action is not None:
                items.update(self.covers[(agent, action)])
        return float(sum(weights[j] for j in items))

    def marginal_bound(self, state):
        return float(np.sum(state))


class Modular(SetFunction):
    """Additive utility: each pair contributes its own weight."""

    def __init__(self, matroid):
        self.matroid = matroid

    def evaluate(self, selection, state):
        weights = state
        off = self.matroid.offsets()
        total = 0.0
        for agent, action in enumerate(selection):
            if action is not None:
                total += weights[off[agent] + action]
        return float(total)

    def marginal_bound(self, state):
        return float(np.max(state))


class CardinalitySquared(SetFunction):
    """F(A) = |A|^2; supermodular on purpose, for audit-failure tests."""

    def evaluate(self, selection, state):
        k = sum(1 for a in selection if a is not None)
        return float(k * k)

    def marginal_bound(self, state):
        return 1.0


def overlap_toy():
    """Two agents, one action each, overlapping coverage.

    F({e1}) = F({e2}) = 1 and F({e1, e2}) = 1.5.
    Returns (oracle, matroid, state).
    """
    m = PartitionMatroid((1, 1))
    covers = {(0, 0): (0, 1), (1, 0): (1, 2)}
    weights = np.array([0.5, 0.5, 0.5])
    return WeightedCoverage(m, covers), m, weights


def overlap_bandit():
    """Two agents, two actions each, overlapping on a shared item.

    Both primary actions cover the shared item 0, so each agent's marginal
    contribution depends on the other's pick; the optimum (both primary,
    value 5.9) beats the mixed picks (5.0) and the double fallback (3.6).
    Agent 1 also owns a large item covered by either of its actions.  That
    item is an action-independent offset in the team utility: it cancels
    exactly in agent 0's counterfactual difference reward but inflates the
    noise of its shared-reward score estimator, which is what the reward
    ablation measures.  Returns (oracle, matroid, state).
    """
    m = PartitionMatroid((2, 2))
    covers = {
        (0, 0): (0, 1),     # shared item + private 1.2
        (0, 1): (2,),       # private 0.3
        (1, 0): (0, 3, 5),  # shared item + private 1.2 + offset item
        (1, 1): (4, 5),     # private 0.3 + offset item
    }
    weights = np.array([0.5, 1.2, 0.3, 1.2, 0.3, 3.0])
    return WeightedCoverage(m, covers), m, weights


def random_weighted_coverage(n_agents, n_actions, rng, n_items=None, items_per_pair=3):
    """Seeded random coverage instance with weights in [0.05, 1].

    Returns (oracle, matroid, state).  Every pair covers at least one item
    so marginal structure is nontrivial.
    """
    m = PartitionMatroid((n_actions,) * n_agents)
    if n_items is None:
        n_items = max(4, 2 * n_agents * n_actions // 2 + 2)
    covers = {}
    for agent in range(n_agents):
        for action in range(n_actions):
            k = 1 + int(rng.integers(items_per_pair))
            covers[(agent, action)] = tuple(
                int(j) for j in rng.choice(n_items, size=min(k, n_items), replace=False)
            )
    weights = 0.05 + 0.95 * rng.random(n_items)
    return WeightedCoverage(m, covers), m, weights


def random_modular(n_agents, n_actions, rng):
    """Seeded modular instance; returns (oracle, matroid, state)."""
    m = PartitionMatroid((n_actions,) * n_agents)
    weights = 0.05 + 0.95 * rng.random(m.size)
    return Modular(m), m, weights


def drifting_weights(n_items, horizon, rng, drift=0.01, lo=0.05, hi=1.0):
    """Weight path w_1..w_T with per-round sup-norm drift at most ``drift``.

    Each round perturbs every weight by a uniform step in [-drift, drift]
    and clips to [lo, hi].  Yields one weight vector per round.
    """
    w = lo + (hi - lo) * rng.random(n_items)
    for _ in range(horizon):
        yield w.copy()
        w = np.clip(w + drift * (2.0 * rng.random(n_items) - 1.0), lo, hi)


def jumping_weights(n_items, horizon, rng, lo=0.05, hi=1.0):
    """Adversarial weight path: fresh independent weights every round."""
    for _ in range(horizon):
        yield lo + (hi - lo) * rng.random(n_items)


class BanditEnv:
    """Single-round episode over a fixed oracle; every agent observes key 0.

    Wraps a synthetic (oracle, matroid, state) triple in the environment
    protocol used by the trainer, for repeated one-shot coordination.
    """

    def __init__(self, fn, matroid, state):
        self.oracle = fn
        self._matroid = matroid
        self._state = state
        self.horizon = 1
        self.t = 1

    def reset(self, rng):
        self.t = 1
        return self

    def done(self):
        return self.t > 1

    def matroid(self):
        return self._matroid

    def agent_slots(self):
        return tuple(range(self._matroid.n_agents))

    def snapshot(self):
        return self._state

    def observations(self):
        from .policy import Observation

        return [
            Observation(slot=i, key=0, n_actions=b)
            for i, b in enumerate(self._matroid.blocks)
        ]

    def step(self, selection):
        self.t += 1

    def digest(self):
        return "bandit"

    def target_count(self):
        return 0
