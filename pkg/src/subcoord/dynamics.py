"""Projected stochastic gradient dynamics and regret accounting.

Two regimes: repeated ascent on one fixed stage (many steps on a single
round's objective, with an average-iterate guarantee against half the
discrete optimum) and online tracking (one step per round while the agent
set, feasible face, and utility drift, with dynamic-regret accounting
against half the per-round optimum).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_ENUMERATION_CAP
from .extension import Tabulated
from .polytope import (
    FaceSpec,
    diameter_and_bounds,
    embed,
    face_of,
    path_length,
    project_face,
    uniform_point,
)


def step_size_stagewise(D, G, sigma, K):
    """Constant step size D / sqrt(K (G^2 + sigma^2)) for stagewise ascent."""
    if D <= 0 or K <= 0 or (G * G + sigma * sigma) <= 0:
        raise ValueError("step size needs positive D, K, and G^2 + sigma^2")
    return float(D / np.sqrt(K * (G * G + sigma * sigma)))


def step_size_dynamic(D, P_T, T, G, sigma):
    """Tuned constant step size sqrt(D (D + 2 P_T) / (T (G^2 + sigma^2)))."""
    if T < 1:
        raise ValueError("horizon must be at least 1")
    if D <= 0 or P_T < 0 or (G * G + sigma * sigma) <= 0:
        raise ValueError("step size needs positive D and G^2 + sigma^2, nonnegative P_T")
    return float(np.sqrt(D * (D + 2.0 * P_T) / (T * (G * G + sigma * sigma))))


def regret_bound(D, P_T, T, G, sigma, eta):
    """Upper bound D^2/(4 eta) + D P_T/(2 eta) + eta T (G^2 + sigma^2)/4.

    At the tuned step size this collapses to
    sqrt(D (D + 2 P_T) T (G^2 + sigma^2)) / 2.
    """
    if eta <= 0 or T < 1:
        raise ValueError("bound needs positive eta and horizon")
    return float(D * D / (4.0 * eta) + D * P_T / (2.0 * eta) + eta * T * (G * G + sigma * sigma) / 4.0)


@dataclass
class StagewiseRun:
    """Iterates and diagnostics of one fixed-stage ascent run."""

    iterates: list
    values: np.ndarray
    opt_selection: tuple
    opt_value: float
    eta: float
    D: float
    G: float
    sigma: float

    @property
    def K(self):
        return len(self.values)

    def average_value(self):
        return float(np.mean(self.values))

    def bound_rhs(self):
        """Half the optimum minus the D sqrt(G^2 + sigma^2) / (2 sqrt(K)) slack."""
        slack = self.D * np.sqrt(self.G**2 + self.sigma**2) / (2.0 * np.sqrt(self.K))
        return float(0.5 * self.opt_value - slack)


def stagewise_ascent(
    fn,
    matroid,
    state,
    K,
    eta=None,
    estimator="difference",
    rng=None,
    x0=None,
    bounds=None,
    cap=DEFAULT_ENUMERATION_CAP,
):
    """Projected (stochastic) gradient ascent on one stage objective.

    Iterates x_{k+1} = Pi_face(x_k + eta g_k) from the face barycenter by
    default.  ``estimator`` selects exact gradients or single-sample
    counterfactual gains; ``bounds`` overrides the (D, G, sigma) constants,
    which otherwise come from the oracle's declared marginal bound.
    """
    tab = Tabulated(fn, matroid, state, cap=cap)
    face = face_of(matroid)
    if bounds is None:
        bounds = diameter_and_bounds(tab.bound, matroid.n_agents, max(matroid.blocks))
    D, G, sigma = bounds
    if eta is None:
        eta = step_size_stagewise(D, G, sigma, K)
    if estimator not in ("exact", "difference"):
        raise ValueError(f"unknown estimator {estimator!r}")
    if estimator == "difference" and rng is None:
        raise ValueError("difference estimator needs an rng")
    x = uniform_point(face) if x0 is None else np.asarray(x0, dtype=float).copy()
    iterates = []
    values = np.empty(K)
    for k in range(K):
        iterates.append(x.copy())
        values[k] = tab.value(x)
        g = tab.grad(x) if estimator == "exact" else tab.diff_reward(x, rng)
        x = project_face(x + eta * g, face)
    opt_sel, opt_val = tab.opt()
    return StagewiseRun(iterates, values, opt_sel, opt_val, float(eta), D, G, sigma)


def two_step_update(x, g, eta, face_t, face_next, slots_t, slots_next):
    """Gradient step on the current face, then re-map onto the next face.

    The intermediate point is projected onto the current face; blocks of
    persisting agents (matched by slot) carry over, departing agents are
    dropped, and arriving agents start uniform.  A final projection onto
    the next face guards against layout changes.
    """
    x = np.asarray(x, dtype=float)
    mid = project_face(x + eta * np.asarray(g, dtype=float), face_t)
    if face_t.blocks == face_next.blocks and tuple(slots_t) == tuple(slots_next):
        return mid
    off_t = face_t.offsets()
    carried = {}
    for k, slot in enumerate(slots_t):
        carried[slot] = mid[off_t[k] : off_t[k + 1]]
    nxt = np.empty(face_next.size)
    off_n = face_next.offsets()
    for k, slot in enumerate(slots_next):
        block = carried.get(slot)
        b = face_next.blocks[k]
        if block is not None and len(block) == b:
            nxt[off_n[k] : off_n[k + 1]] = block
        else:
            nxt[off_n[k] : off_n[k + 1]] = 1.0 / b
    return project_face(nxt, face_next)


@dataclass
class Round:
    """One online round: utility oracle, ground set, state, slot layout."""

    fn: object
    matroid: object
    state: object
    slots: tuple = None
    n_targets: int = 0
    digest: str = ""

    def __post_init__(self):
        if self.slots is None:
            self.slots = tuple(range(self.matroid.n_agents))
        else:
            self.slots = tuple(self.slots)


class SyntheticStream:
    """Round stream with exogenous states; executed actions are ignored."""

    def __init__(self, rounds):
        self.rounds = list(rounds)
        self._pos = 0

    def reset(self):
        self._pos = 0
        return self.rounds[0] if self.rounds else None

    def step(self, selection):
        self._pos += 1
        if self._pos >= len(self.rounds):
            return None
        return self.rounds[self._pos]


class EnvStream:
    """Adapter exposing an (already reset) environment as a round stream.

    Executed selections drive the environment forward, so the realized
    state distribution is the one induced by the running marginals.
    """

    def __init__(self, env):
        self.env = env

    def _round(self):
        return Round(
            fn=self.env.oracle,
            matroid=self.env.matroid(),
            state=self.env.snapshot(),
            slots=self.env.agent_slots(),
            n_targets=self.env.target_count(),
            digest=self.env.digest(),
        )

    def reset(self):
        return None if self.env.done() else self._round()

    def step(self, selection):
        self.env.step(selection)
        return None if self.env.done() else self._round()


@dataclass
class RoundRecord:
    t: int
    value: float
    realized: float
    opt_value: float
    instant_regret: float
    cum_regret: float
    cum_utility: float
    n_agents: int
    n_targets: int
    digest: str
    selection: tuple
    diff_rewards: tuple


@dataclass
class RegretTrace:
    """Per-round records of an online run plus drift accounting."""

    rows: list = field(default_factory=list)
    optima: list = field(default_factory=list)
    eta: float = 0.0
    n_max: int = 0
    na_max: int = 0
    max_bound: float = 0.0

    @property
    def T(self):
        return len(self.rows)

    @property
    def measured_path_length(self):
        """Drift of the embedded indicator of the per-round discrete optimum.

        A diagnostic proxy for the optimal-marginals path length; never used
        inside the update.
        """
        return path_length(self.optima)

    def cumulative_regret(self):
        return self.rows[-1].cum_regret if self.rows else 0.0

    def bound_rhs(self, P_T=None):
        """Regret bound evaluated with measured constants and this run's eta."""
        D, G, sigma = diameter_and_bounds(self.max_bound, self.n_max, self.na_max)
        if P_T is None:
            P_T = self.measured_path_length
        return regret_bound(D, P_T, self.T, G, sigma, self.eta)


def run_online(
    stream,
    eta,
    estimator="difference",
    rng=None,
    n_max=None,
    na_max=None,
    cap=DEFAULT_ENUMERATION_CAP,
):
    """Two-step projected gradient tracking over a round stream.

    Per round: exact expected value of the current marginals, brute-force
    optimum, instantaneous half-regret 0.5 OPT_t - value, a gradient
    estimate, one executed sample fed back to the stream, then the
    two-step update onto the next face.
    """
    if estimator not in ("exact", "difference"):
        raise ValueError(f"unknown estimator {estimator!r}")
    if rng is None:
        raise ValueError("online runs sample executed actions; rng required")
    rnd = stream.reset()
    if rnd is None:
        return RegretTrace(eta=float(eta))
    if n_max is None:
        n_max = rnd.matroid.n_agents
    if na_max is None:
        na_max = max(rnd.matroid.blocks)
    trace = RegretTrace(eta=float(eta), n_max=int(n_max), na_max=int(na_max))
    face = face_of(rnd.matroid)
    x = uniform_point(face)
    cum_regret = 0.0
    cum_utility = 0.0
    t = 0
    while rnd is not None:
        t += 1
        m = rnd.matroid
        tab = Tabulated(rnd.fn, m, rnd.state, cap=cap)
        trace.max_bound = max(trace.max_bound, tab.bound)
        value = tab.value(x)
        opt_sel, opt_val = tab.opt()
        indicator = np.zeros(m.size)
        off = m.offsets()
        for i, a in enumerate(opt_sel):
            if a is not None:
                indicator[off[i] + a] = 1.0
        trace.optima.append(embed(indicator, m.blocks, rnd.slots, n_max, na_max))
        g = tab.grad(x) if estimator == "exact" else tab.diff_reward(x, rng)
        row = tab.sample_rows(x, 1, rng)[0]
        selection = tuple(
            None if d == 0 else int(d - 1)
            for d in ((row // tab.strides) % tab.radices)
        )
        realized = float(tab.values[row])
        diff = tab.diff_reward_rows(np.array([row]))[0]
        diff_rewards = tuple(
            float(diff[off[i] + a]) if a is not None else 0.0
            for i, a in enumerate(selection)
        )
        inst = 0.5 * opt_val - value
        cum_regret += inst
        cum_utility += realized
        trace.rows.append(
            RoundRecord(
                t=t,
                value=value,
                realized=realized,
                opt_value=opt_val,
                instant_regret=inst,
                cum_regret=cum_regret,
                cum_utility=cum_utility,
                n_agents=m.n_agents,
                n_targets=rnd.n_targets,
                digest=rnd.digest,
                selection=selection,
                diff_rewards=diff_rewards,
            )
        )
        nxt = stream.step(selection)
        if nxt is None:
            break
        face_next = face_of(nxt.matroid)
        x = two_step_update(x, g, eta, face, face_next, rnd.slots, nxt.slots)
        face = face_next
        rnd = nxt
    return trace
