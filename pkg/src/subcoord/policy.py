"""Tabular masked-softmax policies and score-function policy gradients.

Each active agent owns a logit row per (slot, observation key); masked
softmax turns rows into categorical action distributions whose block sums
are exactly one, so every sampled joint action is feasible by
construction.  Training ascends the sampled score-function surrogate built
from per-agent counterfactual rewards: either the agent's marginal
contribution to the team utility (difference reward) or the shared team
utility itself (ablation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Observation:
    """One agent's view of a round: persistent slot, discrete key, actions."""

    slot: int
    key: int
    n_actions: int
    mask: tuple = None  # True marks feasible actions; None = all feasible

    def mask_array(self):
        if self.mask is None:
            return np.ones(self.n_actions, dtype=bool)
        return np.asarray(self.mask, dtype=bool)


def masked_softmax(logits, mask=None):
    """Softmax restricted to unmasked entries; masked entries are exactly 0."""
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    if mask is None:
        mask = np.ones(logits.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("at least one action must be feasible")
    z = logits[mask]
    z = np.exp(z - np.max(z))
    probs = np.zeros_like(logits)
    probs[mask] = z / z.sum()
    return probs


def score_row(probs, action, mask=None):
    """Gradient of log prob(action) in one softmax row: one-hot minus probs.

    Masked entries stay zero; the row sums to zero over unmasked entries.
    """
    probs = np.asarray(probs, dtype=float)
    g = -probs.copy()
    g[action] += 1.0
    if mask is not None:
        g[~np.asarray(mask, dtype=bool)] = 0.0
    return g


class TabularPolicy:
    """Logit table keyed by (agent slot, observation key).

    Rows are created lazily at zero logits, so unseen observations start
    uniform over feasible actions.
    """

    def __init__(self):
        self.logits = {}

    def row(self, slot, key, n_actions):
        r = self.logits.get((slot, key))
        if r is None:
            r = np.zeros(n_actions)
            self.logits[(slot, key)] = r
        return r

    def probs(self, obs):
        return masked_softmax(self.row(obs.slot, obs.key, obs.n_actions), obs.mask_array())

    def marginals(self, observations):
        """Induced marginal vector on the face, blocks in observation order."""
        return np.concatenate([self.probs(o) for o in observations])

    def sample(self, observations, rng):
        sel = []
        for o in observations:
            p = self.probs(o)
            sel.append(int(rng.choice(o.n_actions, p=p)))
        return tuple(sel)

    def act(self, observations):
        """Greedy execution: highest-probability action, lowest index on ties."""
        return tuple(int(np.argmax(self.probs(o))) for o in observations)

    def log_prob(self, obs, action):
        return float(np.log(self.probs(obs)[action]))

    def score(self, obs, action):
        """Score row d/dlogits log prob(action) for one observation."""
        return score_row(self.probs(obs), action, obs.mask_array())

    def apply_gradient(self, table, eta):
        for (slot, key), g in table.items():
            row = self.row(slot, key, len(g))
            row += eta * g

    def save(self, path):
        """Flat text table: slot <tab> key <tab> action <tab> logit."""
        lines = []
        for (slot, key) in sorted(self.logits):
            row = self.logits[(slot, key)]
            for a, v in enumerate(row):
                lines.append(f"{slot}\t{key}\t{a}\t{float(v)!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))

    @classmethod
    def load(cls, path):
        policy = cls()
        rows = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                slot, key, action, value = line.split("\t")
                rows.setdefault((int(slot), int(key)), {})[int(action)] = float(value)
        for (slot, key), entries in rows.items():
            row = np.zeros(max(entries) + 1)
            for a, v in entries.items():
                row[a] = v
            policy.logits[(slot, key)] = row
        return policy


@dataclass
class RoundLog:
    """One rollout round: observations, joint action, utility, rewards."""

    observations: list
    selection: tuple
    f_value: float
    counterfactuals: tuple
    rewards: tuple
    state: object = None
    digest: str = ""
    n_targets: int = 0


def difference_returns(trajectory, baseline="none", baseline_state=None):
    """Per-agent reward-to-go minus an action-independent baseline.

    Suffix sums run over the rounds where the agent's slot is active.  The
    ``ema`` baseline subtracts an exponential moving average (decay 0.99)
    of past returns per (slot, key), frozen at its pre-trajectory value so
    it stays independent of this trajectory's actions; the state is
    updated afterwards and returned for reuse across episodes.
    """
    if baseline not in ("none", "ema"):
        raise ValueError(f"unknown baseline {baseline!r}")
    if baseline_state is None:
        baseline_state = {}
    suffix = {}
    returns = [None] * len(trajectory)
    for t in range(len(trajectory) - 1, -1, -1):
        rec = trajectory[t]
        vals = []
        for obs, r in zip(rec.observations, rec.rewards):
            suffix[obs.slot] = suffix.get(obs.slot, 0.0) + r
            vals.append(suffix[obs.slot])
        returns[t] = np.array(vals)
    psi = []
    for rec, ret in zip(trajectory, returns):
        if baseline == "none":
            psi.append(ret.copy())
        else:
            b = np.array(
                [baseline_state.get((o.slot, o.key), 0.0) for o in rec.observations]
            )
            psi.append(ret - b)
    if baseline == "ema":
        decay = 0.99
        for rec, ret in zip(trajectory, returns):
            for obs, g in zip(rec.observations, ret):
                k = (obs.slot, obs.key)
                old = baseline_state.get(k)
                baseline_state[k] = g if old is None else decay * old + (1 - decay) * g
    return psi, baseline_state


def surrogate_gradient(policy, trajectory, psi):
    """Accumulate score rows weighted by returns into a logit-gradient table."""
    table = {}
    for rec, weights in zip(trajectory, psi):
        for obs, action, w in zip(rec.observations, rec.selection, weights):
            if w == 0.0:
                continue
            g = policy.score(obs, action) * w
            key = (obs.slot, obs.key)
            if key in table:
                table[key] += g
            else:
                table[key] = g
    return table


def collect_trajectory(env, policy, rng, reward_mode="difference"):
    """Roll out one episode, recording counterfactual rewards per round.

    The environment supplies centralized utility evaluations: the realized
    team utility and, for difference rewards, the utility with each agent's
    pair removed.
    """
    if reward_mode not in ("difference", "shared"):
        raise ValueError(f"unknown reward mode {reward_mode!r}")
    trajectory = []
    while not env.done():
        observations = env.observations()
        state = env.snapshot()
        selection = policy.sample(observations, rng)
        f_value = env.oracle.evaluate(selection, state)
        counterfactuals = []
        for k in range(len(selection)):
            drop = selection[:k] + (None,) + selection[k + 1 :]
            counterfactuals.append(env.oracle.evaluate(drop, state))
        if reward_mode == "difference":
            rewards = tuple(f_value - c for c in counterfactuals)
        else:
            rewards = (f_value,) * len(selection)
        trajectory.append(
            RoundLog(
                observations,
                selection,
                f_value,
                tuple(counterfactuals),
                rewards,
                state=state,
                digest=env.digest(),
                n_targets=env.target_count(),
            )
        )
        env.step(selection)
    return trajectory


def train(
    env_factory,
    policy,
    episodes,
    eta,
    reward_mode="difference",
    baseline="none",
    rng=None,
    seed_stream=None,
    on_episode=None,
):
    """Plain stochastic-gradient ascent on the sampled surrogate.

    Per episode: rollout, reward-to-go with the chosen baseline, score
    surrogate, then a constant-step logit update.  Returns the per-episode
    team-return curve (sum of realized utilities).  ``on_episode`` receives
    (episode index, trajectory) after each rollout, e.g. for logging.
    """
    if rng is None:
        raise ValueError("training requires an rng")
    curve = np.empty(episodes)
    baseline_state = {}
    for ep in range(episodes):
        env = env_factory(seed_stream(ep) if seed_stream is not None else rng)
        trajectory = collect_trajectory(env, policy, rng, reward_mode)
        psi, baseline_state = difference_returns(trajectory, baseline, baseline_state)
        table = surrogate_gradient(policy, trajectory, psi)
        policy.apply_gradient(table, eta)
        curve[ep] = sum(rec.f_value for rec in trajectory)
        if on_episode is not None:
            on_episode(ep, trajectory)
    return curve
