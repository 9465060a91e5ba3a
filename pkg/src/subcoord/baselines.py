"""Reference strategies: sequential greedy, online local greedy, random.

The sequential greedy processes agents in ascending index order, each
picking the action with the best marginal gain given its predecessors.
Local sensing restricts what an agent can evaluate (tracking: targets
within its sensing radius; coverage: identical to global because the
density field is known).  The online local greedy is a per-round,
communication-limited variant that carries no learning state across
rounds; it stands in for externally defined online greedy baselines.
"""

from __future__ import annotations

import math

from .policy import train


def _global_eval(fn, state):
    return lambda agent_index, selection: fn.evaluate(selection, state)


def _local_eval(fn, state):
    """Per-agent evaluation under locally sensed information.

    Oracles exposing ``evaluate_restricted`` (tracking) are evaluated on
    the agent's sensed target subset; anything else falls back to the
    global evaluation.
    """
    if hasattr(fn, "evaluate_restricted"):
        from .envs.tracking import sensed_targets

        cache = {}

        def eval_for(agent_index, selection):
            if agent_index not in cache:
                cache[agent_index] = sensed_targets(state, agent_index)
            return fn.evaluate_restricted(selection, state, cache[agent_index])

        return eval_for
    return _global_eval(fn, state)


def _with_choice(selection, agent, action):
    return selection[:agent] + (action,) + selection[agent + 1 :]


def csg(fn, matroid, state, sensing="global"):
    """Centralized sequential greedy; returns a full feasible selection.

    Ties break toward the lowest action index, so the output is
    deterministic.
    """
    if sensing not in ("global", "local"):
        raise ValueError(f"unknown sensing mode {sensing!r}")
    value = _global_eval(fn, state) if sensing == "global" else _local_eval(fn, state)
    sel = (None,) * matroid.n_agents
    for i in range(matroid.n_agents):
        base = value(i, sel)
        best_action = 0
        best_gain = -math.inf
        for a in range(matroid.blocks[i]):
            gain = value(i, _with_choice(sel, i, a)) - base
            if gain > best_gain:
                best_gain = gain
                best_action = a
        sel = _with_choice(sel, i, best_action)
    return sel


def complete_comm(state, i, j):
    return True


def no_comm(state, i, j):
    return False


def tracking_comm(state, i, j):
    _, (xi, yi, _) = state.agents[i]
    _, (xj, yj, _) = state.agents[j]
    return math.hypot(xi - xj, yi - yj) <= state.r_com


def coverage_comm(state, i, j):
    # Chebyshev distance, consistent with the coverage disc metric
    _, (xi, yi) = state.positions[i]
    _, (xj, yj) = state.positions[j]
    return max(abs(xi - xj), abs(yi - yj)) <= state.r_com


def online_local_greedy(fn, matroid, state, comm=complete_comm, sensing="local"):
    """Per-round greedy under communication and sensing limits.

    Agent i conditions only on the picks of lower-indexed agents within
    communication range and scores candidates with its locally evaluable
    utility.  With complete communication this coincides with the local-
    sensing sequential greedy; with no communication every agent takes its
    independent local argmax.
    """
    value = _global_eval(fn, state) if sensing == "global" else _local_eval(fn, state)
    sel = (None,) * matroid.n_agents
    for i in range(matroid.n_agents):
        visible = tuple(
            a if (j < i and a is not None and comm(state, i, j)) else None
            for j, a in enumerate(sel)
        )
        base = value(i, visible)
        best_action = 0
        best_gain = -math.inf
        for a in range(matroid.blocks[i]):
            gain = value(i, _with_choice(visible, i, a)) - base
            if gain > best_gain:
                best_gain = gain
                best_action = a
        sel = _with_choice(sel, i, best_action)
    return sel


def random_policy(matroid, rng):
    """Uniform action per agent; always full and feasible."""
    return tuple(int(rng.integers(b)) for b in matroid.blocks)


def shared_reward_train(env_factory, policy, episodes, eta, rng, baseline="none", seed_stream=None):
    """Ablation trainer: every agent receives the shared team utility."""
    return train(
        env_factory,
        policy,
        episodes,
        eta,
        reward_mode="shared",
        baseline=baseline,
        rng=rng,
        seed_stream=seed_stream,
    )
