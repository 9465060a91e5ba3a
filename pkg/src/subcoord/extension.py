"""Categorical extension of set utilities over a partition matroid.

A marginal vector assigns each agent-action pair a probability, with each
agent's block summing to at most one; the leftover mass is the agent's idle
probability.  Drawing one choice per agent independently (action ``a`` with
probability ``x[(i,a)]``, idle with the leftover mass) induces a product
distribution over feasible selections, and the extension value is the
expected utility under that distribution.

The extension is a multilinear polynomial, so exact coordinate gradients
are expected marginal gains over the other agents' draws, finite
differences are exact up to rounding, and mixed second differences carry
the diminishing-returns sign.
"""

from __future__ import annotations

import numpy as np

from .core import DEFAULT_ENUMERATION_CAP

POLYTOPE_TOL = 1e-12


def validate_marginals(x, matroid, face=False, tol=POLYTOPE_TOL):
    """Check membership in the matroid polytope (or its sum-to-one face).

    Raises ValueError when a coordinate leaves [0, 1] or a block sum leaves
    its bound by more than ``tol``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (matroid.size,):
        raise ValueError(f"marginal vector has shape {x.shape}, expected ({matroid.size},)")
    if np.any(x < -tol) or np.any(x > 1.0 + tol):
        raise ValueError("marginal entries must lie in [0, 1]")
    off = matroid.offsets()
    for i in range(matroid.n_agents):
        s = float(np.sum(x[off[i] : off[i + 1]]))
        if s > 1.0 + tol:
            raise ValueError(f"agent {i} block sums to {s} > 1")
        if face and abs(s - 1.0) > tol:
            raise ValueError(f"agent {i} block sums to {s}, expected 1 on the face")
    return x


def _idle_mass(x, matroid):
    off = matroid.offsets()
    return np.array(
        [max(0.0, 1.0 - float(np.sum(x[off[i] : off[i + 1]]))) for i in range(matroid.n_agents)]
    )


def _poly_value(fn, x, matroid, state):
    """Evaluate the multilinear polynomial at an arbitrary point.

    No domain check and no pruning of negative factors, so the polynomial
    continuation outside the polytope is exact; used by finite differences.
    """
    off = matroid.offsets()
    n = matroid.n_agents
    sel = [None] * n

    def rec(i, prob):
        if prob == 0.0:
            return 0.0
        if i == n:
            return prob * fn.evaluate(tuple(sel), state)
        total = 0.0
        block = x[off[i] : off[i + 1]]
        idle = 1.0 - float(np.sum(block))
        sel[i] = None
        total += rec(i + 1, prob * idle)
        for a in range(matroid.blocks[i]):
            sel[i] = a
            total += rec(i + 1, prob * float(block[a]))
        sel[i] = None
        return total

    return rec(0, 1.0)


def extension_value(fn, x, matroid, state, cap=DEFAULT_ENUMERATION_CAP):
    """Exact expected utility of the product categorical distribution.

    Recursion over agents keeps memory linear in the number of agents and
    skips zero-probability branches, so vertices cost a single oracle call.
    """
    x = validate_marginals(x, matroid)
    if cap is not None and matroid.selection_count(True) > cap:
        raise ValueError(f"enumeration larger than cap {cap}")
    off = matroid.offsets()
    n = matroid.n_agents
    sel = [None] * n

    def rec(i, prob):
        if prob <= 0.0:
            return 0.0
        if i == n:
            return prob * fn.evaluate(tuple(sel), state)
        total = 0.0
        block = x[off[i] : off[i + 1]]
        idle = max(0.0, 1.0 - float(np.sum(block)))
        if idle > 0.0:
            sel[i] = None
            total += rec(i + 1, prob * idle)
        for a in range(matroid.blocks[i]):
            p = float(block[a])
            if p > 0.0:
                sel[i] = a
                total += rec(i + 1, prob * p)
        sel[i] = None
        return total

    return float(rec(0, 1.0))


def sample_selection(x, matroid, rng):
    """Draw one feasible selection from the product distribution.

    Per-agent inverse CDF over (action 0, ..., action b-1, idle), so the
    idle outcome absorbs exactly the leftover block mass.
    """
    off = matroid.offsets()
    sel = []
    for i in range(matroid.n_agents):
        block = x[off[i] : off[i + 1]]
        u = rng.random()
        acc = 0.0
        choice = None
        for a in range(matroid.blocks[i]):
            acc += float(block[a])
            if u < acc:
                choice = a
                break
        sel.append(choice)
    return tuple(sel)


def extension_value_mc(fn, x, matroid, state, n, rng):
    """Monte-Carlo estimate of the extension value.

    Returns (mean, stderr) over ``n`` independent joint draws; the mean is
    unbiased for ``extension_value``.
    """
    x = validate_marginals(x, matroid)
    if n < 1:
        raise ValueError("sample count must be at least 1")
    vals = np.empty(n)
    for k in range(n):
        vals[k] = fn.evaluate(sample_selection(x, matroid, rng), state)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, stderr


def _others_enumeration(x, matroid, skip):
    """Yield (partial selection, weight) over agents outside ``skip``.

    Partial selections keep ``None`` at skipped agents; weights multiply
    the remaining agents' action/idle probabilities.
    """
    off = matroid.offsets()
    n = matroid.n_agents
    agents = [i for i in range(n) if i not in skip]
    sel = [None] * n

    def rec(j, prob):
        if prob <= 0.0:
            return
        if j == len(agents):
            yield tuple(sel), prob
            return
        i = agents[j]
        block = x[off[i] : off[i + 1]]
        idle = max(0.0, 1.0 - float(np.sum(block)))
        if idle > 0.0:
            sel[i] = None
            yield from rec(j + 1, prob * idle)
        for a in range(matroid.blocks[i]):
            p = float(block[a])
            if p > 0.0:
                sel[i] = a
                yield from rec(j + 1, prob * p)
        sel[i] = None

    yield from rec(0, 1.0)


def _with_choice(selection, agent, action):
    return selection[:agent] + (action,) + selection[agent + 1 :]


def extension_grad(fn, x, matroid, state, cap=DEFAULT_ENUMERATION_CAP):
    """Exact gradient: coordinate (i, a) is the expected gain of pair (i, a)
    over the other agents' product distribution."""
    x = validate_marginals(x, matroid)
    if cap is not None and matroid.selection_count(True) > cap:
        raise ValueError(f"enumeration larger than cap {cap}")
    off = matroid.offsets()
    g = np.zeros(matroid.size)
    for i in range(matroid.n_agents):
        for partial, w in _others_enumeration(x, matroid, {i}):
            base = fn.evaluate(partial, state)
            for a in range(matroid.blocks[i]):
                g[off[i] + a] += w * (fn.evaluate(_with_choice(partial, i, a), state) - base)
    return g


def extension_grad_fd(fn, x, matroid, state, h=1e-5):
    """Finite-difference gradient of the extension.

    Central differences, falling back to one-sided steps at the coordinate
    box bounds; multilinearity makes either variant exact up to rounding.
    """
    x = validate_marginals(x, matroid)
    g = np.zeros(matroid.size)
    for j in range(matroid.size):
        lo_ok = x[j] - h >= 0.0
        hi_ok = x[j] + h <= 1.0
        xp = x.copy()
        xm = x.copy()
        if lo_ok and hi_ok:
            xp[j] += h
            xm[j] -= h
            g[j] = (_poly_value(fn, xp, matroid, state) - _poly_value(fn, xm, matroid, state)) / (2 * h)
        elif hi_ok:
            xp[j] += h
            g[j] = (_poly_value(fn, xp, matroid, state) - _poly_value(fn, x, matroid, state)) / h
        else:
            xm[j] -= h
            g[j] = (_poly_value(fn, x, matroid, state) - _poly_value(fn, xm, matroid, state)) / h
    return g


def difference_reward_grad(fn, x, matroid, state, rng):
    """One-sample stochastic gradient from counterfactual marginal gains.

    Draws a single joint selection; coordinate (i, a) is the gain of pair
    (i, a) on top of the other agents' sampled choices.  Unbiased for
    ``extension_grad`` coordinate-wise, with every entry in [0, B].
    """
    x = validate_marginals(x, matroid)
    sel = sample_selection(x, matroid, rng)
    off = matroid.offsets()
    g = np.zeros(matroid.size)
    for i in range(matroid.n_agents):
        base_sel = _with_choice(sel, i, None)
        base = fn.evaluate(base_sel, state)
        for a in range(matroid.blocks[i]):
            g[off[i] + a] = fn.evaluate(_with_choice(base_sel, i, a), state) - base
    return g


def second_difference(fn, x, matroid, state, pair_ia, pair_uv, cap=DEFAULT_ENUMERATION_CAP):
    """Mixed second partial derivative of the extension.

    Same-agent pairs return exactly 0 (each block enters affinely); cross
    pairs average F(e | A + e') - F(e | A) over the remaining agents and
    are nonpositive for submodular utilities.
    """
    i, a = pair_ia
    u, v = pair_uv
    if i == u:
        return 0.0
    x = validate_marginals(x, matroid)
    total = 0.0
    for partial, w in _others_enumeration(x, matroid, {i, u}):
        with_uv = _with_choice(partial, u, v)
        d = (
            fn.evaluate(_with_choice(with_uv, i, a), state)
            - fn.evaluate(with_uv, state)
            - fn.evaluate(_with_choice(partial, i, a), state)
            + fn.evaluate(partial, state)
        )
        total += w * d
    return float(total)


class Tabulated:
    """Materialized enumeration of one (oracle, matroid, state) triple.

    Rows enumerate feasible selections in lexicographic order with idle
    before action 0 (matching ``enumerate_selections``), so argmax ties
    resolve to the lexicographically smallest selection.  Values are
    oracle outputs per row; extension values, exact gradients, sampling,
    and batched difference-reward draws reduce to vectorized gathers.
    Iterative dynamics use this fast path; tests pin it against the
    recursive evaluators.
    """

    def __init__(self, fn, matroid, state, cap=DEFAULT_ENUMERATION_CAP):
        if matroid.selection_count(True) > cap:
            raise ValueError(f"enumeration larger than cap {cap}")
        self.matroid = matroid
        n = matroid.n_agents
        radices = np.array([b + 1 for b in matroid.blocks], dtype=int)
        strides = np.ones(n, dtype=int)
        for i in range(n - 2, -1, -1):
            strides[i] = strides[i + 1] * radices[i + 1]
        self.radices = radices
        self.strides = strides
        n_rows = int(np.prod(radices))
        # digits: 0 = idle, d = action d-1
        digits = np.zeros((n_rows, n), dtype=int)
        for i in range(n):
            digits[:, i] = (np.arange(n_rows) // strides[i]) % radices[i]
        self.digits = digits
        values = np.empty(n_rows)
        for r in range(n_rows):
            sel = tuple(None if d == 0 else int(d - 1) for d in digits[r])
            values[r] = fn.evaluate(sel, state)
        self.values = values
        self.bound = float(fn.marginal_bound(state))

    def refresh_values(self, fn, state):
        """Re-evaluate the value table for a new state, same ground set."""
        for r in range(len(self.values)):
            sel = tuple(None if d == 0 else int(d - 1) for d in self.digits[r])
            self.values[r] = fn.evaluate(sel, state)
        self.bound = float(fn.marginal_bound(state))
        return self

    def _factors(self, x):
        """Per-agent probability over digits: index 0 idle, then actions."""
        m = self.matroid
        off = m.offsets()
        out = []
        for i in range(m.n_agents):
            block = np.asarray(x[off[i] : off[i + 1]], dtype=float)
            idle = max(0.0, 1.0 - float(np.sum(block)))
            out.append(np.concatenate(([idle], np.maximum(block, 0.0))))
        return out

    def row_weights(self, x):
        factors = self._factors(x)
        w = np.ones(len(self.values))
        for i, f in enumerate(factors):
            w *= f[self.digits[:, i]]
        return w

    def value(self, x):
        x = validate_marginals(x, self.matroid)
        return float(self.row_weights(x) @ self.values)

    def grad(self, x):
        x = validate_marginals(x, self.matroid)
        m = self.matroid
        off = m.offsets()
        factors = self._factors(x)
        g = np.zeros(m.size)
        for i in range(m.n_agents):
            w_minus = np.ones(len(self.values))
            for k, f in enumerate(factors):
                if k != i:
                    w_minus *= f[self.digits[:, k]]
            idle_rows = self.digits[:, i] == 0
            base = float(self.values[idle_rows] @ w_minus[idle_rows])
            for a in range(m.blocks[i]):
                rows = self.digits[:, i] == a + 1
                g[off[i] + a] = float(self.values[rows] @ w_minus[rows]) - base
        return g

    def sample_rows(self, x, n, rng):
        """Row indices of ``n`` joint draws from the product distribution."""
        x = validate_marginals(x, self.matroid)
        m = self.matroid
        off = m.offsets()
        rows = np.zeros(n, dtype=int)
        for i in range(m.n_agents):
            block = np.asarray(x[off[i] : off[i + 1]], dtype=float)
            # inverse CDF over (actions..., idle)
            cum = np.cumsum(block)
            u = rng.random(n)
            idx = np.searchsorted(cum, u, side="right")
            digit = np.where(idx < m.blocks[i], idx + 1, 0)
            rows += digit * self.strides[i]
        return rows

    def diff_reward_rows(self, rows):
        """Counterfactual-gain estimates for each sampled row.

        Returns an array of shape (len(rows), ground size): entry (s, (i,a))
        is F((i,a) | sampled others) - F(sampled others).
        """
        m = self.matroid
        off = m.offsets()
        out = np.empty((len(rows), m.size))
        for i in range(m.n_agents):
            digit = (rows // self.strides[i]) % self.radices[i]
            idle_rows = rows - digit * self.strides[i]
            base = self.values[idle_rows]
            for a in range(m.blocks[i]):
                out[:, off[i] + a] = self.values[idle_rows + (a + 1) * self.strides[i]] - base
        return out

    def diff_reward(self, x, rng):
        """Single-sample stochastic gradient (fast path)."""
        rows = self.sample_rows(x, 1, rng)
        return self.diff_reward_rows(rows)[0]

    def diff_reward_batch(self, x, n, rng):
        """Mean and per-coordinate standard error over ``n`` draws."""
        rows = self.sample_rows(x, n, rng)
        samples = self.diff_reward_rows(rows)
        mean = samples.mean(axis=0)
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
        return mean, stderr

    def opt(self):
        """Brute-force maximizer (selection, value), lex-smallest on ties."""
        r = int(np.argmax(self.values))
        sel = tuple(None if d == 0 else int(d - 1) for d in self.digits[r])
        return sel, float(self.values[r])
