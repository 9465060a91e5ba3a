"""Grid information coverage: weighted cell coverage by moving agents.

Agents occupy cells of a rectangular grid carrying a nonnegative density.
An action moves the agent one cell (stay / right / up / left / down,
clamped at the boundary) and the stage utility is the density mass of the
union of Chebyshev discs around the agents' post-move cells.  Axis
convention: x is the column increasing rightward, y is the row increasing
upward; observation keys are row-major (y * width + x).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..core import PartitionMatroid, SetFunction
from ..policy import Observation
from .schedule import OpenSchedule

ACTIONS = ("stay", "right", "up", "left", "down")
MOVES = ((0, 0), (1, 0), (0, 1), (-1, 0), (0, -1))


def move_cell(cell, action, width, height):
    """Apply one move, clamping at the grid boundary."""
    dx, dy = MOVES[action]
    x, y = cell
    return (min(width - 1, max(0, x + dx)), min(height - 1, max(0, y + dy)))


def disc_cells(cell, radius, width, height):
    """Cells within Chebyshev distance ``radius``, clipped to the grid."""
    x, y = cell
    return [
        (u, v)
        for u in range(max(0, x - radius), min(width, x + radius + 1))
        for v in range(max(0, y - radius), min(height, y + radius + 1))
    ]


def density_field(kind, width, height, seed):
    """Seeded density over the grid, indexed density[y, x].

    uniform: all ones.  bimodal: 0.01 floor plus two unit-peak isotropic
    Gaussians at random cells with sigma = side/6.  rbf: a smooth random
    surface sampled from squared-exponential random Fourier features
    (length-scale side/5), rescaled to [0.01, 1].
    """
    rng = np.random.default_rng(seed)
    side = max(width, height)
    xs, ys = np.meshgrid(np.arange(width), np.arange(height))
    if kind == "uniform":
        return np.ones((height, width))
    if kind == "bimodal":
        sigma = side / 6.0
        rho = np.full((height, width), 0.01)
        for _ in range(2):
            cx = rng.integers(width)
            cy = rng.integers(height)
            rho += np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma**2))
        return rho
    if kind == "rbf":
        m = 64
        ell = side / 5.0
        omega = rng.normal(0.0, 1.0 / ell, size=(m, 2))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=m)
        coef = rng.normal(size=m)
        z = np.zeros((height, width))
        for j in range(m):
            z += coef[j] * np.cos(omega[j, 0] * xs + omega[j, 1] * ys + phase[j])
        z *= np.sqrt(2.0 / m)
        lo, hi = z.min(), z.max()
        if hi - lo < 1e-12:
            return np.full((height, width), 0.5)
        return 0.01 + 0.99 * (z - lo) / (hi - lo)
    raise ValueError(f"unknown density kind {kind!r}")


def _max_disc_mass(density, radius):
    """Largest disc mass over all center cells, via an integral image."""
    h, w = density.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = np.cumsum(np.cumsum(density, axis=0), axis=1)
    best = 0.0
    for y in range(h):
        y0, y1 = max(0, y - radius), min(h, y + radius + 1)
        for x in range(w):
            x0, x1 = max(0, x - radius), min(w, x + radius + 1)
            mass = integral[y1, x1] - integral[y0, x1] - integral[y1, x0] + integral[y0, x0]
            best = max(best, float(mass))
    return best


@dataclass(frozen=True)
class CoverageState:
    """Immutable snapshot: grid, density, and active agent cells."""

    width: int
    height: int
    density: object  # ndarray (height, width), treated as read-only
    positions: tuple  # ((agent_id, (x, y)), ...) sorted by agent id
    r_cov: int
    r_com: int
    max_disc_mass: float

    @property
    def agent_ids(self):
        return tuple(a for a, _ in self.positions)

    def cell_of(self, agent_id):
        for a, cell in self.positions:
            if a == agent_id:
                return cell
        raise ValueError(f"agent {agent_id} inactive")


class CoverageOracle(SetFunction):
    """Post-move covered density mass; normalized, monotone, submodular."""

    def evaluate(self, selection, state):
        covered = set()
        for k, action in enumerate(selection):
            if action is None:
                continue
            _, cell = state.positions[k]
            nxt = move_cell(cell, action, state.width, state.height)
            covered.update(disc_cells(nxt, state.r_cov, state.width, state.height))
        return float(sum(state.density[y, x] for x, y in covered))

    def marginal_bound(self, state):
        return state.max_disc_mass


class CoverageEnv:
    """Mutable episode state around the pure coverage oracle.

    Agents start inside a randomly placed square start region.  With an
    open schedule, extras enter at random cells of that region on arrival
    and drop out after departure.
    """

    def __init__(
        self,
        density,
        horizon,
        n_agents,
        r_cov=1,
        r_com=2,
        start_region=5,
        start_origin=None,
        schedule=None,
    ):
        self.density = np.asarray(density, dtype=float)
        self.height, self.width = self.density.shape
        self.horizon = int(horizon)
        self.n_agents = int(n_agents)
        self.r_cov = int(r_cov)
        self.r_com = int(r_com)
        self.start_region = min(start_region, self.width, self.height)
        # None: the start region lands at a random spot each reset;
        # an (x, y) pair pins it, giving tabular learners a stationary task
        self.start_origin = start_origin
        self.schedule = schedule
        if schedule is not None and schedule.count != n_agents:
            raise ValueError("schedule must cover every agent")
        self.oracle = CoverageOracle()
        self._max_disc = _max_disc_mass(self.density, self.r_cov)
        self.t = 0
        self.positions = {}
        self._region_origin = (0, 0)
        self._rng = None

    def reset(self, rng):
        self._rng = rng
        self.t = 1
        if self.start_origin is None:
            rx = int(rng.integers(self.width - self.start_region + 1))
            ry = int(rng.integers(self.height - self.start_region + 1))
        else:
            rx, ry = self.start_origin
        self._region_origin = (rx, ry)
        self.positions = {}
        for agent_id in self._scheduled_ids(self.t):
            self._spawn(agent_id)
        return self

    def _scheduled_ids(self, t):
        if self.schedule is None:
            return tuple(range(self.n_agents))
        return self.schedule.active_ids(t)

    def _spawn(self, agent_id):
        rx, ry = self._region_origin
        x = rx + int(self._rng.integers(self.start_region))
        y = ry + int(self._rng.integers(self.start_region))
        self.positions[agent_id] = (x, y)

    def done(self):
        return self.t > self.horizon

    def active_ids(self):
        return tuple(sorted(self.positions))

    def matroid(self):
        return PartitionMatroid((len(ACTIONS),) * len(self.positions))

    def agent_slots(self):
        # closed-capacity slot = persistent entity id
        return self.active_ids()

    def snapshot(self):
        return CoverageState(
            width=self.width,
            height=self.height,
            density=self.density,
            positions=tuple((a, self.positions[a]) for a in self.active_ids()),
            r_cov=self.r_cov,
            r_com=self.r_com,
            max_disc_mass=self._max_disc,
        )

    def observations(self):
        out = []
        for a in self.active_ids():
            x, y = self.positions[a]
            out.append(Observation(slot=a, key=y * self.width + x, n_actions=len(ACTIONS)))
        return out

    def step(self, selection):
        ids = self.active_ids()
        if len(selection) != len(ids):
            raise ValueError("selection length must match the active agent count")
        for agent_id, action in zip(ids, selection):
            if action is not None:
                self.positions[agent_id] = move_cell(
                    self.positions[agent_id], action, self.width, self.height
                )
        self.t += 1
        if self.schedule is not None and not self.done():
            active = set(self._scheduled_ids(self.t))
            for agent_id in list(self.positions):
                if agent_id not in active:
                    del self.positions[agent_id]
            for agent_id in sorted(active):
                if agent_id not in self.positions:
                    self._spawn(agent_id)

    def digest(self):
        parts = [f"t={self.t}"] + [
            f"{a}:{self.positions[a][0]},{self.positions[a][1]}" for a in self.active_ids()
        ]
        return hashlib.sha1(";".join(parts).encode()).hexdigest()[:16]

    def target_count(self):
        return 0
