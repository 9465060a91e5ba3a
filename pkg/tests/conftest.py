"""Shared helpers: independent oracles and seeded instance factories.

The exhaustive policy expectation below is deliberately written as a plain
nested product over full joint actions, independent of the library's
recursive evaluator, so equivalence tests check two genuinely different
code paths.
"""

import itertools

import numpy as np
import pytest

from subcoord.envs import CoverageEnv, TrackingEnv, density_field
from subcoord.polytope import FaceSpec


def exhaustive_policy_expectation(fn, x, matroid, state):
    """E[F(A)] under the factorized categorical policy with marginals x.

    Enumerates every full joint action (one action per agent, no idle) and
    sums probability-weighted utilities.
    """
    off = matroid.offsets()
    total = 0.0
    for joint in itertools.product(*[range(b) for b in matroid.blocks]):
        prob = 1.0
        for i, a in enumerate(joint):
            prob *= x[off[i] + a]
        total += prob * fn.evaluate(tuple(joint), state)
    return total


def random_face_point(blocks, rng):
    """Random point with every block summing to one."""
    parts = []
    for b in blocks:
        w = rng.random(b) + 1e-9
        parts.append(w / w.sum())
    return np.concatenate(parts)


def random_polytope_point(blocks, rng):
    """Random point with block sums at most one (idle mass possible)."""
    parts = []
    for b in blocks:
        w = rng.random(b) + 1e-9
        scale = rng.random()  # leftover becomes idle mass
        parts.append(scale * w / w.sum())
    return np.concatenate(parts)


def coverage_instance(seed, max_agents=3, max_actions=3, grid=6):
    """Seeded small coverage instance: (oracle, matroid, state).

    The matroid restricts each agent to the first ``n_actions`` grid moves
    (the oracle itself accepts any subset of the native five).
    """
    from subcoord.core import PartitionMatroid

    rng = np.random.default_rng(seed)
    n_agents = 1 + seed % max_agents
    n_actions = 1 + (seed // 2) % max_actions
    env = CoverageEnv(
        density_field("bimodal", grid, grid, seed), horizon=3, n_agents=n_agents, r_cov=1
    ).reset(rng)
    return env.oracle, PartitionMatroid((n_actions,) * n_agents), env.snapshot()


def tracking_instance(seed, max_agents=3, n_actions=3, arena=20.0):
    rng = np.random.default_rng(seed)
    n_agents = 1 + seed % max_agents
    n_targets = 1 + (seed // 3) % 3
    env = TrackingEnv(
        arena=arena,
        horizon=3,
        n_agents=n_agents,
        n_targets=n_targets,
        n_actions=n_actions,
        r_sen=arena / 2.0,
    ).reset(rng)
    return env.oracle, env.matroid(), env.snapshot()
