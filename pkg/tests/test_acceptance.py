"""Acceptance suite: one test per shipped guarantee, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
pass lines and measured values.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import (
    coverage_instance,
    exhaustive_policy_expectation,
    random_face_point,
    tracking_instance,
)
from subcoord.baselines import csg, random_policy
from subcoord.core import brute_force_opt
from subcoord.dynamics import Round, SyntheticStream, run_online, stagewise_ascent
from subcoord.envs import CoverageEnv, density_field
from subcoord.extension import Tabulated, extension_grad, extension_grad_fd, extension_value
from subcoord.harness import config as configmod
from subcoord.harness.csvio import read_csv
from subcoord.harness.rng import stream
from subcoord.harness.runner import run as harness_run
from subcoord.polytope import diameter_and_bounds, embed
from subcoord.policy import TabularPolicy, train
from subcoord.synthetic import (
    drifting_weights,
    overlap_bandit,
    random_modular,
    random_weighted_coverage,
)


def report(criterion, detail):
    print(f"[PASS] criterion {criterion}: {detail}")


@lru_cache(maxsize=1)
def mixed_instances_100():
    """100 seeded instances, half coverage, half tracking, <= 3 x 3."""
    out = []
    for seed in range(50):
        out.append(coverage_instance(seed))
        out.append(tracking_instance(seed))
    return out


@lru_cache(maxsize=1)
def mixed_instances_20():
    return mixed_instances_100()[:20]


def policy_marginals_for(matroid, seed):
    """Marginals induced by a random tabular policy on this ground set."""
    rng = np.random.default_rng(10_000 + seed)
    policy = TabularPolicy()
    from subcoord.policy import Observation

    obs = [Observation(slot=i, key=0, n_actions=b) for i, b in enumerate(matroid.blocks)]
    for o in obs:
        policy.row(o.slot, o.key, o.n_actions)[:] = rng.normal(scale=1.5, size=o.n_actions)
    return policy.marginals(obs)


def test_criterion_01_objective_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for k, (fn, m, state) in enumerate(mixed_instances_100()):
        x = policy_marginals_for(m, k)
        lhs = extension_value(fn, x, m, state)
        rhs = exhaustive_policy_expectation(fn, x, m, state)
        worst = max(worst, abs(lhs - rhs))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12
    assert elapsed < 10.0
    report(1, f"objective equivalence on 100 instances, worst gap {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_gradient_identity():
    worst = 0.0
    for k, (fn, m, state) in enumerate(mixed_instances_100()):
        rng = np.random.default_rng(20_000 + k)
        x = random_face_point(m.blocks, rng)
        g = extension_grad(fn, x, m, state)
        g_fd = extension_grad_fd(fn, x, m, state)
        rel = np.max(np.abs(g - g_fd) / np.maximum(1.0, np.abs(g)))
        worst = max(worst, float(rel))
    assert worst <= 1e-6
    report(2, f"exact vs finite-difference gradients, worst relative error {worst:.2e}")


def test_criterion_03_unbiasedness():
    worst_z = 0.0
    for k, (fn, m, state) in enumerate(mixed_instances_20()):
        rng = np.random.default_rng(30_000 + k)
        x = random_face_point(m.blocks, rng)
        tab = Tabulated(fn, m, state)
        mean, se = tab.diff_reward_batch(x, 100_000, rng)
        target = tab.grad(x)
        z = np.abs(mean - target) / np.maximum(se, 1e-12)
        # coordinates with zero sampling variance must match exactly
        exact = se <= 1e-12
        assert np.all(np.abs(mean - target)[exact] <= 1e-9)
        if (~exact).any():
            worst_z = max(worst_z, float(np.max(z[~exact])))
    assert worst_z <= 4.0
    report(3, f"difference-reward estimator unbiased on 20 instances, worst z {worst_z:.2f}")


def test_criterion_04_norm_variance_diameter_bounds():
    violations = 0
    for k, (fn, m, state) in enumerate(mixed_instances_20()):
        rng = np.random.default_rng(40_000 + k)
        tab = Tabulated(fn, m, state)
        B = tab.bound
        n, na = m.n_agents, max(m.blocks)
        _, G, _ = diameter_and_bounds(B, n, na) if B > 0 else (0.0, 0.0, 0.0)
        for _ in range(5):
            x = random_face_point(m.blocks, rng)
            g = tab.grad(x)
            if np.linalg.norm(g) > G + 1e-9:
                violations += 1
            rows = tab.sample_rows(x, 20_000, rng)
            samples = tab.diff_reward_rows(rows)
            mse = float(np.mean(np.sum((samples - g) ** 2, axis=1)))
            if mse > n * na * B * B + 1e-9:
                violations += 1
    # embedded diameters across random faces
    rng = np.random.default_rng(44_000)
    n_max, na_max = 3, 4
    D, _, _ = diameter_and_bounds(1.0, n_max, na_max)
    for _ in range(1000):
        b1 = tuple(1 + rng.integers(na_max) for _ in range(1 + rng.integers(n_max)))
        b2 = tuple(1 + rng.integers(na_max) for _ in range(1 + rng.integers(n_max)))
        x = embed(random_face_point(b1, rng), b1, range(len(b1)), n_max, na_max)
        y = embed(random_face_point(b2, rng), b2, range(len(b2)), n_max, na_max)
        if np.linalg.norm(x - y) > D + 1e-12:
            violations += 1
    assert violations == 0
    report(4, "gradient norm, estimator variance, and embedded diameter bounds: 0 violations")


def test_criterion_05_dr_structure():
    from subcoord.extension import second_difference

    worst_second = -np.inf
    for k, (fn, m, state) in enumerate(mixed_instances_20()):
        rng = np.random.default_rng(50_000 + k)
        for x in (random_face_point(m.blocks, rng), np.zeros(m.size)):
            for i in range(m.n_agents):
                for u in range(m.n_agents):
                    for a in range(m.blocks[i]):
                        for v in range(m.blocks[u]):
                            val = second_difference(fn, x, m, state, (i, a), (u, v))
                            worst_second = max(worst_second, val)
    assert worst_second <= 1e-12
    worst_slack = np.inf
    for k, (fn, m, state) in enumerate(mixed_instances_20()[:10]):
        rng = np.random.default_rng(55_000 + k)
        tab = Tabulated(fn, m, state)
        for _ in range(1000):
            x = random_face_point(m.blocks, rng)
            y = random_face_point(m.blocks, rng)
            slack = 0.5 * float(tab.grad(x) @ (y - x)) - (0.5 * tab.value(y) - tab.value(x))
            worst_slack = min(worst_slack, slack)
    assert worst_slack >= -1e-10
    report(
        5,
        f"second differences <= {worst_second:.2e}, restricted gap slack >= {worst_slack:.2e}",
    )


def test_criterion_06_stagewise_guarantee():
    t0 = time.perf_counter()
    failures = 0
    margins = []
    for k in range(50):
        inst_rng = np.random.default_rng(60_000 + k)
        n_agents = 1 + k % 3
        n_actions = 1 + (k // 3) % 3
        fn, m, state = random_weighted_coverage(n_agents, n_actions, inst_rng)
        averages = []
        rhs = None
        for s in range(20):
            run = stagewise_ascent(
                fn, m, state, K=500, estimator="difference", rng=stream(61_000 + k, "seed", s)
            )
            averages.append(run.average_value())
            rhs = run.bound_rhs()
        lhs = float(np.mean(averages))
        margins.append(lhs - rhs)
        if lhs < rhs:
            failures += 1
    elapsed = time.perf_counter() - t0
    assert failures == 0
    report(
        6,
        f"stagewise half-OPT bound on 50 instances x 20 seeds (K=500), "
        f"min margin {min(margins):.4f}, {elapsed:.1f}s",
    )


def test_criterion_07_dynamic_regret():
    t0 = time.perf_counter()
    fn, m, _ = random_weighted_coverage(2, 2, np.random.default_rng(77), n_items=8)
    eta = 0.05

    def seed_run(seed, horizon):
        weights = drifting_weights(8, horizon, stream(seed, "drift"), drift=0.01)
        rounds = [Round(fn, m, w) for w in weights]
        return run_online(SyntheticStream(rounds), eta, rng=stream(seed, "dyn"))

    long_regret, long_bound, short_rates, long_rates = [], [], [], []
    for seed in range(10):
        tr_long = seed_run(seed, 2000)
        tr_short = seed_run(seed, 200)
        long_regret.append(tr_long.cumulative_regret())
        long_bound.append(tr_long.bound_rhs())
        long_rates.append(tr_long.cumulative_regret() / tr_long.T)
        short_rates.append(tr_short.cumulative_regret() / tr_short.T)
    elapsed = time.perf_counter() - t0
    assert float(np.mean(long_regret)) <= float(np.mean(long_bound))
    assert float(np.mean(long_rates)) < float(np.mean(short_rates))
    assert elapsed < 120.0
    report(
        7,
        f"T=2000 drift: regret {np.mean(long_regret):.2f} <= bound {np.mean(long_bound):.2f}; "
        f"regret/T {np.mean(long_rates):.4f} < {np.mean(short_rates):.4f} at T=200; {elapsed:.1f}s",
    )


def test_criterion_08_greedy_sanity():
    worst_ratio = np.inf
    for k in range(200):
        if k % 4 == 0:
            fn, m, state = coverage_instance(k // 4)
        elif k % 4 == 1:
            fn, m, state = tracking_instance(k // 4)
        else:
            fn, m, state = random_weighted_coverage(
                1 + k % 3, 1 + (k // 3) % 3, np.random.default_rng(80_000 + k)
            )
        val = fn.evaluate(csg(fn, m, state), state)
        _, opt = brute_force_opt(fn, m, state)
        assert val >= 0.5 * opt - 1e-12
        if opt > 0:
            worst_ratio = min(worst_ratio, val / opt)
    for k in range(50):
        fn, m, state = random_modular(1 + k % 3, 1 + (k // 2) % 3, np.random.default_rng(81_000 + k))
        val = fn.evaluate(csg(fn, m, state), state)
        _, opt = brute_force_opt(fn, m, state)
        assert val == pytest.approx(opt, abs=1e-12)
    report(8, f"greedy >= OPT/2 on 200 instances (worst ratio {worst_ratio:.3f}); exact on 50 modular")


def _coverage_env():
    rho = density_field("uniform", 10, 10, 0)
    return CoverageEnv(rho, horizon=25, n_agents=2, start_region=2, start_origin=(0, 0))


def _rollout_mean(actor, seed, episodes=20):
    totals = []
    for ep in range(episodes):
        env = _coverage_env()
        env.reset(stream(seed, "eval", ep))
        total = 0.0
        while not env.done():
            sel = actor(env)
            total += env.oracle.evaluate(sel, env.snapshot())
            env.step(sel)
        totals.append(total)
    return float(np.mean(totals))


def test_criterion_09_learning_at_desk_scale():
    t0 = time.perf_counter()
    # part one: single-round overlap bandit reaches 0.95 OPT
    fn, m, state = overlap_bandit()
    _, opt = brute_force_opt(fn, m, state)
    from subcoord.synthetic import BanditEnv

    env = BanditEnv(fn, m, state)
    obs = env.observations()
    finals = []
    for seed in range(10):
        policy = TabularPolicy()
        train(
            lambda r: env.reset(r),
            policy,
            5000,
            eta=0.3,
            rng=stream(seed, "policy"),
        )
        finals.append(extension_value(fn, policy.marginals(obs), m, state))
    bandit_mean = float(np.mean(finals))
    assert bandit_mean >= 0.95 * opt

    # part two: coverage training beats random by 20% and holds 0.8 of greedy
    trained_means, random_means, greedy_means = [], [], []
    for seed in range(10):
        policy = TabularPolicy()
        train(
            lambda r: _coverage_env().reset(r),
            policy,
            2000,
            eta=0.01,
            baseline="ema",
            rng=stream(seed, "policy"),
            seed_stream=lambda ep: stream(seed, "env", ep),
        )
        trained_means.append(_rollout_mean(lambda env: policy.act(env.observations()), seed))
        rand_rng = stream(seed, "rand")
        random_means.append(_rollout_mean(lambda env: random_policy(env.matroid(), rand_rng), seed))
        greedy_means.append(
            _rollout_mean(lambda env: csg(env.oracle, env.matroid(), env.snapshot()), seed)
        )
    trained = float(np.mean(trained_means))
    rand = float(np.mean(random_means))
    greedy = float(np.mean(greedy_means))
    elapsed = time.perf_counter() - t0
    assert trained >= 1.2 * rand
    assert trained >= 0.8 * greedy
    assert elapsed < 300.0
    report(
        9,
        f"bandit {bandit_mean:.4f} >= 0.95 OPT ({0.95 * opt:.4f}); coverage trained {trained:.1f} "
        f"vs 1.2 x random {1.2 * rand:.1f} and 0.8 x greedy {0.8 * greedy:.1f}; {elapsed:.0f}s",
    )


def test_criterion_10_ablation_direction():
    fn, m, state = overlap_bandit()
    _, opt = brute_force_opt(fn, m, state)
    threshold = 0.9 * opt
    from subcoord.synthetic import BanditEnv

    env = BanditEnv(fn, m, state)
    obs = env.observations()
    budget = 5000

    def episodes_to_threshold(mode, seed):
        policy = TabularPolicy()
        hit = [budget]

        def check(ep, trajectory):
            if hit[0] == budget:
                if extension_value(fn, policy.marginals(obs), m, state) >= threshold:
                    hit[0] = ep + 1

        train(
            lambda r: env.reset(r),
            policy,
            budget,
            eta=0.3,
            reward_mode=mode,
            rng=stream(seed, "policy"),
            on_episode=check,
        )
        return hit[0]

    diff = float(np.mean([episodes_to_threshold("difference", s) for s in range(10)]))
    shared = float(np.mean([episodes_to_threshold("shared", s) for s in range(10)]))
    assert diff <= shared
    report(10, f"episodes to 0.9 OPT: difference {diff:.1f} <= shared {shared:.1f}")


ACCEPTANCE_CFG = """
[experiment]
name = accept_cov
kind = coverage
method = difference_reward
seeds = 7
episodes = 10
horizon = 5
eta = 0.05
compute_opt = true

[coverage]
width = 6
height = 6
agents = 2
"""


def test_criterion_11_determinism(tmp_path):
    cfg = configmod.loads(ACCEPTANCE_CFG)
    harness_run(cfg, out_dir=str(tmp_path / "a"))
    harness_run(cfg, out_dir=str(tmp_path / "b"))
    name = "accept_cov_seed7.csv"
    a = (tmp_path / "a" / name).read_bytes()
    b = (tmp_path / "b" / name).read_bytes()
    assert a == b
    cols, rows = read_csv(tmp_path / "a" / name)
    assert len(rows) == 10 * 5
    report(11, f"rerun of {name} is byte-identical ({len(a)} bytes, {len(rows)} rows)")
