"""Projections and embeddings for per-agent probability blocks.

Each agent's block lives in the simplex {x >= 0, sum x = 1} (the
sum-to-one face used by categorical policies) or the underlying corner
{x >= 0, sum x <= 1}.  Euclidean projection is blockwise sort-and-
threshold.  Time-varying agent sets are compared in a common ambient space
through a zero-padding slot embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def project_block(v, equality=True):
    """Euclidean projection of one block onto its simplex.

    ``equality=True`` targets {x >= 0, sum x = 1}; otherwise
    {x >= 0, sum x <= 1}, in which case the equality threshold is clipped
    at zero so both cases share one code path.  Exact, idempotent, and
    non-expansive.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("projection input must be finite")
    u = np.sort(v)[::-1]
    cumsum = np.cumsum(u)
    ranks = np.arange(1, v.size + 1)
    candidates = u + (1.0 - cumsum) / ranks
    rho = int(np.nonzero(candidates > 0)[0][-1])
    tau = (cumsum[rho] - 1.0) / (rho + 1)
    if not equality:
        tau = max(tau, 0.0)
    return np.maximum(v - tau, 0.0)


@dataclass(frozen=True)
class FaceSpec:
    """Block layout plus a sum-to-one flag per agent."""

    blocks: tuple
    equality: tuple = None

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if any(b < 1 for b in blocks):
            raise ValueError("block counts must be at least 1")
        eq = self.equality
        if eq is None:
            eq = (True,) * len(blocks)
        elif isinstance(eq, bool):
            eq = (eq,) * len(blocks)
        else:
            eq = tuple(bool(e) for e in eq)
            if len(eq) != len(blocks):
                raise ValueError("equality flags must match block count")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "equality", eq)

    @property
    def size(self):
        return sum(self.blocks)

    @property
    def n_agents(self):
        return len(self.blocks)

    def offsets(self):
        out = np.zeros(self.n_agents + 1, dtype=int)
        np.cumsum(self.blocks, out=out[1:])
        return out


def face_of(matroid, equality=True):
    return FaceSpec(matroid.blocks, equality)


def uniform_point(face):
    """Barycenter of the face: each agent uniform over its actions."""
    x = np.empty(face.size)
    off = face.offsets()
    for i, b in enumerate(face.blocks):
        x[off[i] : off[i + 1]] = 1.0 / b
    return x


def project_face(x, face):
    """Blockwise Euclidean projection onto the face."""
    x = np.asarray(x, dtype=float)
    if x.shape != (face.size,):
        raise ValueError(f"vector has shape {x.shape}, expected ({face.size},)")
    out = np.empty_like(x)
    off = face.offsets()
    for i in range(face.n_agents):
        out[off[i] : off[i + 1]] = project_block(x[off[i] : off[i + 1]], face.equality[i])
    return out


def embed(x, blocks, slots, n_max, na_max):
    """Zero-padding embedding into the common ambient space.

    ``slots[k]`` is the fixed slot of the k-th active agent; its block is
    copied into coordinates [slot * na_max, slot * na_max + blocks[k]).
    Preserves the l2 norm of the active support exactly.
    """
    x = np.asarray(x, dtype=float)
    blocks = tuple(int(b) for b in blocks)
    if x.shape != (sum(blocks),):
        raise ValueError("vector length does not match blocks")
    if len(slots) != len(blocks):
        raise ValueError("one slot required per active agent")
    out = np.zeros(n_max * na_max)
    off = 0
    for b, slot in zip(blocks, slots):
        if slot is None or not (0 <= slot < n_max):
            raise ValueError(f"slot {slot} outside 0..{n_max - 1}")
        if b > na_max:
            raise ValueError(f"block size {b} exceeds na_max {na_max}")
        out[slot * na_max : slot * na_max + b] = x[off : off + b]
        off += b
    return out


def path_length(points):
    """Total l2 drift of a sequence of embedded vectors."""
    pts = [np.asarray(p, dtype=float) for p in points]
    if len(pts) < 2:
        return 0.0
    dim = pts[0].shape
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if a.shape != dim or b.shape != dim:
            raise ValueError("all points must share the embedded dimension")
        total += float(np.linalg.norm(a - b))
    return total


def diameter_and_bounds(B, n_max=None, na_max=None, faces=None):
    """Closed-form (D, G, sigma) bounds from problem dimensions.

    D = sqrt(2 n_max) bounds the embedded face diameter, and
    G = sigma = B sqrt(n_max na_max) bound the gradient norm and the
    stochastic estimator's root mean squared error.  Maxima may be given
    directly or derived from a list of FaceSpec.
    """
    if faces is not None:
        n_max = max(n_max or 0, max(f.n_agents for f in faces))
        na_max = max(na_max or 0, max(max(f.blocks) for f in faces))
    if not (n_max and na_max) or n_max < 1 or na_max < 1:
        raise ValueError("positive agent and action maxima required")
    if B < 0:
        raise ValueError("marginal bound must be nonnegative")
    D = float(np.sqrt(2.0 * n_max))
    G = float(B * np.sqrt(n_max * na_max))
    return D, G, G


class SlotAllocator:
    """Stable slot assignment for arriving and departing agents.

    Arrivals take the lowest free slot; departures free theirs.  Slots of
    persisting agents never move, which keeps the embedding consistent
    across rounds.
    """

    def __init__(self, n_max):
        self.n_max = int(n_max)
        self._slots = {}

    def assign(self, agent_id):
        if agent_id in self._slots:
            return self._slots[agent_id]
        used = set(self._slots.values())
        for s in range(self.n_max):
            if s not in used:
                self._slots[agent_id] = s
                return s
        raise ValueError(f"no free slot for agent {agent_id} (n_max={self.n_max})")

    def release(self, agent_id):
        self._slots.pop(agent_id, None)

    def slot_of(self, agent_id):
        if agent_id not in self._slots:
            raise ValueError(f"agent {agent_id} has no slot")
        return self._slots[agent_id]

    def slots_for(self, agent_ids):
        return [self.slot_of(a) for a in agent_ids]

    def active(self):
        return dict(self._slots)
