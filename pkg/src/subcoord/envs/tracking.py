"""Continuous multi-target tracking with unicycle agents.

Agents move at constant speed on a square arena and pick one of twelve
steering rates per round.  Each target is scored by its closest selected
agent-action pair through a clipped linear sensing kernel on the pair's
predicted next position; the stage utility averages those scores over
agents and targets, so it is normalized, monotone, and submodular with
marginal gains at most 1/(number of active agents).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from ..core import PartitionMatroid, SetFunction
from ..policy import Observation
from .schedule import OpenSchedule


def wrap_angle(h):
    """Wrap to (-pi, pi]."""
    h = (h + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if h <= -math.pi else h


def steering_actions(n=12, limit=math.pi / 6.0):
    """Uniformly spaced steering rates spanning [-limit, limit]."""
    return tuple(float(w) for w in np.linspace(-limit, limit, n))


def unicycle_step(pose, omega, v=1.0, dt=1.0, arena=None):
    """Advance one unicycle step.

    The position update uses the pre-update heading; the heading then
    turns by omega * dt and wraps.  Positions clamp to [0, arena] when an
    arena side is given (heading unchanged by clamping).
    """
    x, y, heading = pose
    nx = x + v * dt * math.cos(heading)
    ny = y + v * dt * math.sin(heading)
    if arena is not None:
        nx = min(arena, max(0.0, nx))
        ny = min(arena, max(0.0, ny))
    return (nx, ny, wrap_angle(heading + omega * dt))


@dataclass(frozen=True)
class Target:
    id: int
    pos: tuple
    angle: float
    pattern: str  # static | linear | random


def target_step(target, rng, arena, v_m=0.25, dt=1.0, redirect_prob=0.05):
    """Advance one target: static stays, linear reflects at walls, random
    resamples its direction with the redirect probability and then moves
    like linear."""
    if target.pattern == "static":
        return target
    angle = target.angle
    if target.pattern == "random" and rng.random() < redirect_prob:
        angle = wrap_angle(rng.uniform(-math.pi, math.pi))
    elif target.pattern not in ("linear", "random"):
        raise ValueError(f"unknown motion pattern {target.pattern!r}")
    x = target.pos[0] + v_m * dt * math.cos(angle)
    y = target.pos[1] + v_m * dt * math.sin(angle)
    vx, vy = math.cos(angle), math.sin(angle)
    if x < 0.0:
        x, vx = -x, -vx
    elif x > arena:
        x, vx = 2.0 * arena - x, -vx
    if y < 0.0:
        y, vy = -y, -vy
    elif y > arena:
        y, vy = 2.0 * arena - y, -vy
    return replace(target, pos=(x, y), angle=wrap_angle(math.atan2(vy, vx)))


@dataclass(frozen=True)
class TrackingState:
    """Immutable snapshot of poses, targets, and sensing geometry."""

    arena: float
    agents: tuple  # ((agent_id, (x, y, heading)), ...) sorted by id
    targets: tuple  # ((target_id, (x, y)), ...) sorted by id
    r_sen: float
    r_com: float
    v_a: float
    dt: float
    omegas: tuple

    @property
    def agent_ids(self):
        return tuple(a for a, _ in self.agents)


class TrackingOracle(SetFunction):
    """Average best clipped sensing score per target, zero on empty sets."""

    def _scores(self, selection, state, target_positions):
        n_t = len(target_positions)
        best = [0.0] * n_t
        for k, action in enumerate(selection):
            if action is None:
                continue
            _, pose = state.agents[k]
            px, py, _ = unicycle_step(pose, state.omegas[action], state.v_a, state.dt, state.arena)
            for j, (qx, qy) in enumerate(target_positions):
                d = math.hypot(px - qx, py - qy)
                w = max(0.0, (state.r_sen - d) / state.r_sen)
                if w > best[j]:
                    best[j] = w
        return best

    def evaluate(self, selection, state):
        n_a = len(state.agents)
        n_t = len(state.targets)
        if n_a == 0 or n_t == 0:
            return 0.0
        best = self._scores(selection, state, [q for _, q in state.targets])
        return float(sum(best) / (n_a * n_t))

    def evaluate_restricted(self, selection, state, target_indices):
        """Same utility restricted to a target subset (keeps the global
        normalization, so per-agent argmax comparisons are unaffected)."""
        n_a = len(state.agents)
        n_t = len(state.targets)
        if n_a == 0 or n_t == 0 or not target_indices:
            return 0.0
        pos = [state.targets[j][1] for j in target_indices]
        best = self._scores(selection, state, pos)
        return float(sum(best) / (n_a * n_t))

    def marginal_bound(self, state):
        n_a = len(state.agents)
        if n_a == 0 or len(state.targets) == 0:
            return 0.0
        return 1.0 / n_a


def sensed_targets(state, agent_index):
    """Indices of targets within sensing range of the given agent."""
    _, (x, y, _) = state.agents[agent_index]
    out = []
    for j, (_, (qx, qy)) in enumerate(state.targets):
        if math.hypot(x - qx, y - qy) <= state.r_sen:
            out.append(j)
    return tuple(out)


def comm_neighbors(state, agent_index):
    """Indices of other agents within communication range."""
    _, (x, y, _) = state.agents[agent_index]
    out = []
    for k, (_, (ax, ay, _)) in enumerate(state.agents):
        if k != agent_index and math.hypot(x - ax, y - ay) <= state.r_com:
            out.append(k)
    return tuple(out)


def observation_key(state, agent_index):
    """Coarse local code: nearest sensed target bucket plus neighbor count.

    Sensed targets map to 8 bearing sectors x 3 range rings; a separate
    code marks nothing sensed.  The neighbor count within communication
    range is bucketed 0 / 1 / 2+.
    """
    _, (x, y, heading) = state.agents[agent_index]
    nearest = None
    nearest_d = None
    for _, (qx, qy) in state.targets:
        d = math.hypot(x - qx, y - qy)
        if d <= state.r_sen and (nearest_d is None or d < nearest_d):
            nearest = (qx, qy)
            nearest_d = d
    if nearest is None:
        code = 24
    else:
        bearing = wrap_angle(math.atan2(nearest[1] - y, nearest[0] - x) - heading)
        sector = min(7, int((bearing + math.pi) / (math.pi / 4.0)))
        ring = min(2, int(3.0 * nearest_d / state.r_sen))
        code = sector * 3 + ring
    nb = min(2, len(comm_neighbors(state, agent_index)))
    return code * 3 + nb


class TrackingEnv:
    """Mutable tracking episode around the pure oracle."""

    def __init__(
        self,
        arena=100.0,
        horizon=200,
        n_agents=4,
        n_targets=4,
        r_sen=10.0,
        r_com=25.0,
        v_a=1.0,
        v_m=0.25,
        dt=1.0,
        n_actions=12,
        pattern_mix=(0.0, 1.0, 0.0),  # static : linear : random weights
        agent_schedule=None,
        target_schedule=None,
    ):
        self.arena = float(arena)
        self.horizon = int(horizon)
        self.n_agents = int(n_agents)
        self.n_targets = int(n_targets)
        self.r_sen = float(r_sen)
        self.r_com = float(r_com)
        self.v_a = float(v_a)
        self.v_m = float(v_m)
        self.dt = float(dt)
        self.omegas = steering_actions(n_actions)
        mix = np.asarray(pattern_mix, dtype=float)
        if mix.sum() <= 0:
            raise ValueError("pattern mix must have positive total weight")
        self.pattern_mix = mix / mix.sum()
        self.agent_schedule = agent_schedule
        self.target_schedule = target_schedule
        if agent_schedule is not None and agent_schedule.count != n_agents:
            raise ValueError("agent schedule must cover every agent")
        if target_schedule is not None and target_schedule.count != n_targets:
            raise ValueError("target schedule must cover every target")
        self.oracle = TrackingOracle()
        self.t = 0
        self.poses = {}
        self.targets = {}
        self._rng = None

    def reset(self, rng):
        self._rng = rng
        self.t = 1
        self.poses = {}
        self.targets = {}
        for agent_id in self._scheduled(self.agent_schedule, self.n_agents):
            self._spawn_agent(agent_id)
        for target_id in self._scheduled(self.target_schedule, self.n_targets):
            self._spawn_target(target_id)
        return self

    def _scheduled(self, schedule, count):
        if schedule is None:
            return tuple(range(count))
        return schedule.active_ids(self.t)

    def _spawn_agent(self, agent_id):
        rng = self._rng
        self.poses[agent_id] = (
            float(rng.uniform(0.0, self.arena)),
            float(rng.uniform(0.0, self.arena)),
            wrap_angle(float(rng.uniform(-math.pi, math.pi))),
        )

    def _spawn_target(self, target_id):
        rng = self._rng
        pattern = ("static", "linear", "random")[
            int(rng.choice(3, p=self.pattern_mix))
        ]
        self.targets[target_id] = Target(
            id=target_id,
            pos=(float(rng.uniform(0.0, self.arena)), float(rng.uniform(0.0, self.arena))),
            angle=wrap_angle(float(rng.uniform(-math.pi, math.pi))),
            pattern=pattern,
        )

    def done(self):
        return self.t > self.horizon

    def active_ids(self):
        return tuple(sorted(self.poses))

    def matroid(self):
        return PartitionMatroid((len(self.omegas),) * len(self.poses))

    def agent_slots(self):
        return self.active_ids()

    def snapshot(self):
        return TrackingState(
            arena=self.arena,
            agents=tuple((a, self.poses[a]) for a in self.active_ids()),
            targets=tuple((j, self.targets[j].pos) for j in sorted(self.targets)),
            r_sen=self.r_sen,
            r_com=self.r_com,
            v_a=self.v_a,
            dt=self.dt,
            omegas=self.omegas,
        )

    def observations(self):
        state = self.snapshot()
        return [
            Observation(slot=a, key=observation_key(state, k), n_actions=len(self.omegas))
            for k, a in enumerate(self.active_ids())
        ]

    def step(self, selection):
        ids = self.active_ids()
        if len(selection) != len(ids):
            raise ValueError("selection length must match the active agent count")
        for agent_id, action in zip(ids, selection):
            if action is not None:
                self.poses[agent_id] = unicycle_step(
                    self.poses[agent_id], self.omegas[action], self.v_a, self.dt, self.arena
                )
        for target_id in sorted(self.targets):
            self.targets[target_id] = target_step(
                self.targets[target_id], self._rng, self.arena, self.v_m, self.dt
            )
        self.t += 1
        if not self.done():
            if self.agent_schedule is not None:
                active = set(self.agent_schedule.active_ids(self.t))
                for a in list(self.poses):
                    if a not in active:
                        del self.poses[a]
                for a in sorted(active):
                    if a not in self.poses:
                        self._spawn_agent(a)
            if self.target_schedule is not None:
                active = set(self.target_schedule.active_ids(self.t))
                for j in list(self.targets):
                    if j not in active:
                        del self.targets[j]
                for j in sorted(active):
                    if j not in self.targets:
                        self._spawn_target(j)

    def digest(self):
        parts = [f"t={self.t}"]
        for a in self.active_ids():
            x, y, h = self.poses[a]
            parts.append(f"a{a}:{x:.9g},{y:.9g},{h:.9g}")
        for j in sorted(self.targets):
            tgt = self.targets[j]
            parts.append(f"m{j}:{tgt.pos[0]:.9g},{tgt.pos[1]:.9g}")
        return hashlib.sha1(";".join(parts).encode()).hexdigest()[:16]

    def target_count(self):
        return len(self.targets)
