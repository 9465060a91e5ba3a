"""Wall-clock timing of the core components at growing instance sizes."""

from __future__ import annotations

import time

import numpy as np

from ..extension import Tabulated, extension_grad, extension_value
from ..polytope import FaceSpec, project_face, uniform_point
from ..synthetic import BanditEnv, random_weighted_coverage
from ..policy import TabularPolicy, collect_trajectory


def _time(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_table(max_agents=4, n_actions=3):
    """Rows of (component, size label, best seconds)."""
    rows = []
    for n in range(1, max_agents + 1):
        rng = np.random.default_rng(n)
        fn, m, state = random_weighted_coverage(n, n_actions, rng)
        face = FaceSpec(m.blocks)
        x = uniform_point(face)
        rows.append((f"extension_value", f"{n}x{n_actions}", _time(lambda: extension_value(fn, x, m, state))))
        rows.append((f"extension_grad", f"{n}x{n_actions}", _time(lambda: extension_grad(fn, x, m, state))))
        tab = Tabulated(fn, m, state)
        rows.append((f"tabulated_grad", f"{n}x{n_actions}", _time(lambda: tab.grad(x))))
        v = rng.normal(size=face.size)
        rows.append((f"project_face", f"{n}x{n_actions}", _time(lambda: project_face(v, face))))
        env = BanditEnv(fn, m, state)
        policy = TabularPolicy()
        rows.append(
            (
                f"bandit_episode",
                f"{n}x{n_actions}",
                _time(lambda: collect_trajectory(env.reset(rng), policy, rng)),
            )
        )
    return rows


def format_table(rows):
    lines = [f"{'component':<18} {'size':<8} {'best_seconds':>14}"]
    for component, size, seconds in rows:
        lines.append(f"{component:<18} {size:<8} {seconds:>14.6g}")
    return "\n".join(lines) + "\n"
