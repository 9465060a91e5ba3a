"""Seeded experiment orchestration: build, execute, and log runs.

One config drives one experiment over a list of seeds.  Each seed yields
one episode-log CSV; a run-level CSV and a plain-text summary aggregate
across seeds.  Reruns with the same config and seed are byte-identical.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..baselines import csg, online_local_greedy, random_policy, tracking_comm, coverage_comm
from ..core import PartitionMatroid
from ..dynamics import EnvStream, Round, SyntheticStream, run_online
from ..extension import Tabulated
from ..envs import CoverageEnv, TrackingEnv, density_field, open_schedule
from ..policy import TabularPolicy, train
from ..synthetic import BanditEnv, WeightedCoverage, drifting_weights, overlap_bandit, random_weighted_coverage
from . import config as configmod
from .config import Config, ConfigError, required
from .csvio import EPISODE_COLUMNS, SUMMARY_COLUMNS, write_csv
from .rng import stream

METHODS = (
    "difference_reward",
    "shared_reward",
    "tabular_eval",
    "csg_global",
    "csg_local",
    "online_local_greedy",
    "random",
    "online_gradient",
)
KINDS = ("coverage", "tracking", "bandit", "drift")

_EXPERIMENT_KEYS = {
    "name",
    "kind",
    "method",
    "seeds",
    "episodes",
    "horizon",
    "eta",
    "baseline",
    "compute_opt",
    "out",
    "policy_path",
}
_COVERAGE_KEYS = {"width", "height", "density", "density_seed", "agents", "r_cov", "r_com", "start_region"}
_TRACKING_KEYS = {
    "arena",
    "agents",
    "targets",
    "r_sen",
    "r_com",
    "v_a",
    "v_m",
    "actions",
    "static",
    "linear",
    "random",
}
_BANDIT_KEYS = {"variant", "agents", "actions", "oracle_seed"}
_DRIFT_KEYS = {"agents", "actions", "items", "drift", "oracle_seed"}
_OPEN_KEYS = {"agent_extras", "target_extras", "min_lifespan", "window"}


def validate_config(cfg):
    cfg.require_keys("experiment", _EXPERIMENT_KEYS)
    kind = required(cfg, "experiment", "kind")
    method = required(cfg, "experiment", "method")
    if kind not in KINDS:
        raise ConfigError(f"{cfg.source}: unknown kind {kind!r}; allowed: {', '.join(KINDS)}")
    if method not in METHODS:
        raise ConfigError(f"{cfg.source}: unknown method {method!r}; allowed: {', '.join(METHODS)}")
    if method == "online_gradient":
        if kind == "bandit":
            raise ConfigError(f"{cfg.source}: online_gradient needs a multi-round kind")
    elif kind == "drift":
        raise ConfigError(f"{cfg.source}: kind drift is only for online_gradient")
    if method == "tabular_eval" and not cfg.get("experiment", "policy_path"):
        raise ConfigError(f"{cfg.source}: tabular_eval requires policy_path")
    cfg.require_keys("coverage", _COVERAGE_KEYS)
    cfg.require_keys("tracking", _TRACKING_KEYS)
    cfg.require_keys("bandit", _BANDIT_KEYS)
    cfg.require_keys("drift", _DRIFT_KEYS)
    cfg.require_keys("open", _OPEN_KEYS)
    for name in cfg.sections:
        if name not in ("experiment", "coverage", "tracking", "bandit", "drift", "open"):
            raise ConfigError(f"{cfg.source}: unknown section [{name}]")
    if required(cfg, "experiment", "seeds", "get_int_list") == []:
        raise ConfigError(f"{cfg.source}: seeds must be non-empty")
    episodes = cfg.get_int("experiment", "episodes", 1)
    if episodes < 1:
        raise ConfigError(f"{cfg.source}: episodes must be at least 1")
    return cfg


def _make_env(cfg, seed):
    kind = cfg.get("experiment", "kind")
    horizon = cfg.get_int("experiment", "horizon", 25)
    if kind == "coverage":
        width = cfg.get_int("coverage", "width", 10)
        height = cfg.get_int("coverage", "height", 10)
        density = density_field(
            cfg.get("coverage", "density", "uniform"),
            width,
            height,
            cfg.get_int("coverage", "density_seed", 0),
        )
        n_agents = cfg.get_int("coverage", "agents", 2)
        schedule = _make_schedule(cfg, seed, "agent_extras", n_agents, horizon)
        n_total = n_agents + (cfg.get_int("open", "agent_extras", 0) if cfg.has("open") else 0)
        return CoverageEnv(
            density,
            horizon,
            n_total,
            r_cov=cfg.get_int("coverage", "r_cov", 1),
            r_com=cfg.get_int("coverage", "r_com", 2),
            start_region=cfg.get_int("coverage", "start_region", 5),
            schedule=schedule,
        )
    if kind == "tracking":
        n_agents = cfg.get_int("tracking", "agents", 2)
        n_targets = cfg.get_int("tracking", "targets", 2)
        agent_sched = _make_schedule(cfg, seed, "agent_extras", n_agents, horizon)
        target_sched = _make_schedule(cfg, seed, "target_extras", n_targets, horizon, tag="tsched")
        extras_a = cfg.get_int("open", "agent_extras", 0) if cfg.has("open") else 0
        extras_t = cfg.get_int("open", "target_extras", 0) if cfg.has("open") else 0
        return TrackingEnv(
            arena=cfg.get_float("tracking", "arena", 100.0),
            horizon=horizon,
            n_agents=n_agents + extras_a,
            n_targets=n_targets + extras_t,
            r_sen=cfg.get_float("tracking", "r_sen", 10.0),
            r_com=cfg.get_float("tracking", "r_com", 25.0),
            v_a=cfg.get_float("tracking", "v_a", 1.0),
            v_m=cfg.get_float("tracking", "v_m", 0.25),
            n_actions=cfg.get_int("tracking", "actions", 12),
            pattern_mix=(
                cfg.get_float("tracking", "static", 0.0),
                cfg.get_float("tracking", "linear", 1.0),
                cfg.get_float("tracking", "random", 0.0),
            ),
            agent_schedule=agent_sched,
            target_schedule=target_sched,
        )
    if kind == "bandit":
        variant = cfg.get("bandit", "variant", "overlap")
        if variant == "overlap":
            fn, m, w = overlap_bandit()
        elif variant == "random":
            rng = np.random.default_rng(cfg.get_int("bandit", "oracle_seed", 0))
            fn, m, w = random_weighted_coverage(
                cfg.get_int("bandit", "agents", 2), cfg.get_int("bandit", "actions", 2), rng
            )
        else:
            raise ConfigError(f"{cfg.source}: unknown bandit variant {variant!r}")
        return BanditEnv(fn, m, w)
    raise ConfigError(f"{cfg.source}: kind {cfg.get('experiment', 'kind')!r} has no environment")


def _make_schedule(cfg, seed, extras_key, base_count, horizon, tag="sched"):
    if not cfg.has("open"):
        return None
    extras = cfg.get_int("open", extras_key, 0)
    if extras == 0:
        return None
    return open_schedule(
        horizon,
        base_count,
        extras,
        cfg.get_int("open", "min_lifespan", max(1, horizon // 5)),
        cfg.get_float("open", "window", 0.5),
        stream(seed, tag, extras_key),
    )


def _drift_rounds(cfg, seed):
    n_agents = cfg.get_int("drift", "agents", 2)
    n_actions = cfg.get_int("drift", "actions", 2)
    n_items = cfg.get_int("drift", "items", 8)
    horizon = cfg.get_int("experiment", "horizon", 500)
    oracle_rng = np.random.default_rng(cfg.get_int("drift", "oracle_seed", 0))
    fn, m, _ = random_weighted_coverage(n_agents, n_actions, oracle_rng, n_items=n_items)
    weights = drifting_weights(
        n_items, horizon, stream(seed, "drift"), drift=cfg.get_float("drift", "drift", 0.01)
    )
    return [Round(fn, m, w) for w in weights]


def _opt_fields(compute_opt, fn, blocks, state, f_value, expected, cum_regret):
    """(opt, inst, new cum_regret) with empties when opt is disabled."""
    if not compute_opt:
        return None, None, cum_regret
    tab = Tabulated(fn, PartitionMatroid(blocks), state)
    _, opt_val = tab.opt()
    achieved = expected if expected is not None else f_value
    inst = 0.5 * opt_val - achieved
    return opt_val, inst, (0.0 if cum_regret is None else cum_regret) + inst


def _format_action(selection):
    return "|".join("-" if a is None else str(a) for a in selection)


def _run_seed(config_text, source, seed):
    """Execute one seed; returns (episode rows, summary row, policy text)."""
    cfg = validate_config(configmod.loads(config_text, source))
    name = cfg.get("experiment", "name", "run")
    method = cfg.get("experiment", "method")
    episodes = cfg.get_int("experiment", "episodes", 1)
    compute_opt = cfg.get_bool("experiment", "compute_opt", False)
    rows = []
    policy_text = None

    if method in ("difference_reward", "shared_reward"):
        eta = cfg.get_float("experiment", "eta", 0.1)
        policy = TabularPolicy()
        counters = {"cum_utility": 0.0, "cum_regret": 0.0 if compute_opt else None, "rounds": 0}
        episode_returns = []
        cell = {}

        def log_episode(ep, trajectory):
            ep_total = 0.0
            for k, rec in enumerate(trajectory):
                counters["rounds"] += 1
                ep_total += rec.f_value
                counters["cum_utility"] += rec.f_value
                blocks = tuple(o.n_actions for o in rec.observations)
                opt_val, inst, counters["cum_regret"] = _opt_fields(
                    compute_opt, cell["oracle"], blocks, rec.state, rec.f_value, None, counters["cum_regret"]
                )
                rows.append(
                    [
                        name,
                        seed,
                        ep + 1,
                        k + 1,
                        len(rec.selection),
                        rec.n_targets,
                        rec.f_value,
                        None,
                        opt_val,
                        inst,
                        counters["cum_utility"],
                        counters["cum_regret"],
                        rec.digest,
                        _format_action(rec.selection),
                        "|".join(f"{r:.12g}" for r in rec.rewards),
                    ]
                )
            episode_returns.append(ep_total)

        def factory(rng):
            env = _make_env(cfg, seed)
            env.reset(rng)
            cell["oracle"] = env.oracle
            return env

        train(
            factory,
            policy,
            episodes,
            eta,
            reward_mode="difference" if method == "difference_reward" else "shared",
            baseline=cfg.get("experiment", "baseline", "none"),
            rng=stream(seed, "policy"),
            seed_stream=lambda ep: stream(seed, "env", ep),
            on_episode=log_episode,
        )
        lines = []
        for (slot, key) in sorted(policy.logits):
            for a, v in enumerate(policy.logits[(slot, key)]):
                lines.append(f"{slot}\t{key}\t{a}\t{float(v)!r}")
        policy_text = "\n".join(lines) + ("\n" if lines else "")
        summary = _summary_row(name, seed, episodes, counters, episode_returns, rows, compute_opt)
        return rows, summary, policy_text

    if method in ("tabular_eval", "csg_global", "csg_local", "online_local_greedy", "random"):
        policy = None
        if method == "tabular_eval":
            policy = TabularPolicy.load(cfg.get("experiment", "policy_path"))
        act_rng = stream(seed, "act")
        counters = {"cum_utility": 0.0, "cum_regret": 0.0 if compute_opt else None, "rounds": 0}
        episode_returns = []
        for ep in range(episodes):
            env = _make_env(cfg, seed)
            env.reset(stream(seed, "env", ep))
            ep_total = 0.0
            k = 0
            while not env.done():
                k += 1
                state = env.snapshot()
                m = env.matroid()
                if method == "tabular_eval":
                    selection = policy.act(env.observations())
                elif method == "csg_global":
                    selection = csg(env.oracle, m, state, sensing="global")
                elif method == "csg_local":
                    selection = csg(env.oracle, m, state, sensing="local")
                elif method == "online_local_greedy":
                    comm = tracking_comm if hasattr(state, "r_sen") else coverage_comm
                    selection = online_local_greedy(env.oracle, m, state, comm=comm)
                else:
                    selection = random_policy(m, act_rng)
                f_value = env.oracle.evaluate(selection, state)
                counters["rounds"] += 1
                ep_total += f_value
                counters["cum_utility"] += f_value
                opt_val, inst, counters["cum_regret"] = _opt_fields(
                    compute_opt, env.oracle, m.blocks, state, f_value, None, counters["cum_regret"]
                )
                rows.append(
                    [
                        name,
                        seed,
                        ep + 1,
                        k,
                        m.n_agents,
                        env.target_count(),
                        f_value,
                        None,
                        opt_val,
                        inst,
                        counters["cum_utility"],
                        counters["cum_regret"],
                        env.digest(),
                        _format_action(selection),
                        None,
                    ]
                )
                env.step(selection)
            episode_returns.append(ep_total)
        summary = _summary_row(name, seed, episodes, counters, episode_returns, rows, compute_opt)
        return rows, summary, None

    if method == "online_gradient":
        kind = cfg.get("experiment", "kind")
        dyn_rng = stream(seed, "dyn")
        counters = {"cum_utility": 0.0, "cum_regret": 0.0, "rounds": 0}
        episode_returns = []
        for ep in range(episodes):
            if kind == "drift":
                rounds_stream = SyntheticStream(_drift_rounds(cfg, seed))
                first = rounds_stream.rounds[0]
                bound = first.fn.marginal_bound(first.state)
                n_max = first.matroid.n_agents
                na_max = max(first.matroid.blocks)
            else:
                env = _make_env(cfg, seed)
                env.reset(stream(seed, "env", ep))
                rounds_stream = EnvStream(env)
                bound = env.oracle.marginal_bound(env.snapshot())
                n_max = env.n_agents
                na_max = max(env.matroid().blocks)
            eta_raw = cfg.get("experiment", "eta", "auto")
            if eta_raw == "auto":
                from ..dynamics import step_size_dynamic
                from ..polytope import diameter_and_bounds

                T = cfg.get_int("experiment", "horizon", 500)
                D, G, sigma = diameter_and_bounds(bound, n_max, na_max)
                eta = step_size_dynamic(D, 0.0, T, G, sigma)
            else:
                eta = float(eta_raw)
            trace = run_online(
                rounds_stream, eta, estimator="difference", rng=dyn_rng, n_max=n_max, na_max=na_max
            )
            ep_total = 0.0
            for rec in trace.rows:
                counters["rounds"] += 1
                ep_total += rec.realized
                counters["cum_utility"] += rec.realized
                counters["cum_regret"] += rec.instant_regret
                rows.append(
                    [
                        name,
                        seed,
                        ep + 1,
                        rec.t,
                        rec.n_agents,
                        rec.n_targets,
                        rec.realized,
                        rec.value,
                        rec.opt_value,
                        rec.instant_regret,
                        counters["cum_utility"],
                        counters["cum_regret"],
                        rec.digest,
                        _format_action(rec.selection),
                        "|".join(f"{r:.12g}" for r in rec.diff_rewards),
                    ]
                )
            episode_returns.append(ep_total)
        summary = _summary_row(name, seed, episodes, counters, episode_returns, rows, True)
        return rows, summary, None

    raise ConfigError(f"{source}: method {method!r} not implemented")


def _summary_row(name, seed, episodes, counters, episode_returns, rows, compute_opt):
    total_opt = None
    if compute_opt:
        total_opt = sum(float(r[8]) for r in rows if r[8] is not None)
    return [
        name,
        seed,
        episodes,
        counters["rounds"],
        counters["cum_utility"],
        float(np.mean(episode_returns)) if episode_returns else 0.0,
        episode_returns[-1] if episode_returns else 0.0,
        counters["cum_regret"],
        total_opt,
    ]


def resolve_out_dir(cfg, cli_out=None):
    if cli_out:
        return cli_out
    if cfg.has("experiment", "out"):
        return cfg.get("experiment", "out")
    return os.environ.get("SUBCOORD_OUT", "out")


def run(cfg, out_dir=None, seeds=None, jobs=1):
    """Execute every seed of a validated config; returns written paths.

    Seeds may fan out across processes; outputs are written by the parent
    in seed order, so results are deterministic regardless of ``jobs``.
    Partially written outputs are removed on failure.
    """
    validate_config(cfg)
    name = cfg.get("experiment", "name", "run")
    seeds = seeds if seeds is not None else required(cfg, "experiment", "seeds", "get_int_list")
    out_dir = resolve_out_dir(cfg, out_dir)
    os.makedirs(out_dir, exist_ok=True)
    config_text = configmod.dumps(cfg)
    written = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(
                    pool.map(_run_seed, [config_text] * len(seeds), [cfg.source] * len(seeds), seeds)
                )
        else:
            results = [_run_seed(config_text, cfg.source, s) for s in seeds]
        summary_rows = []
        for seed, (rows, summary, policy_text) in zip(seeds, results):
            path = os.path.join(out_dir, f"{name}_seed{seed}.csv")
            write_csv(path, EPISODE_COLUMNS, rows)
            written.append(path)
            summary_rows.append(summary)
            if policy_text is not None:
                ppath = os.path.join(out_dir, f"{name}_seed{seed}_policy.tsv")
                with open(ppath, "w") as fh:
                    fh.write(policy_text)
                written.append(ppath)
        runs_path = os.path.join(out_dir, f"{name}_runs.csv")
        write_csv(runs_path, SUMMARY_COLUMNS, summary_rows)
        written.append(runs_path)
        summary_path = os.path.join(out_dir, f"{name}_summary.txt")
        with open(summary_path, "w") as fh:
            fh.write(_text_summary(name, seeds, summary_rows))
        written.append(summary_path)
        return written
    except Exception:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise


def _text_summary(name, seeds, summary_rows):
    lines = [f"experiment = {name}", f"seeds = {','.join(str(s) for s in seeds)}"]
    metrics = ("total_utility", 4), ("mean_episode_return", 5), ("final_episode_return", 6)
    for label, idx in metrics:
        vals = np.array([float(r[idx]) for r in summary_rows])
        lines.append(f"{label} = {vals.mean():.12g} +- {vals.std():.12g}")
    regrets = [r[7] for r in summary_rows if r[7] is not None]
    if regrets:
        vals = np.array([float(v) for v in regrets])
        lines.append(f"total_regret = {vals.mean():.12g} +- {vals.std():.12g}")
    return "\n".join(lines) + "\n"


def opt_dump(cfg, rounds=None):
    """Myopic-optimal reference rollout: per round, brute-force OPT executed.

    Returns CSV text with columns round, opt_value, selection.
    """
    validate_config(cfg)
    if cfg.get("experiment", "kind") == "drift":
        raise ConfigError(f"{cfg.source}: opt dump needs an environment kind")
    seed = required(cfg, "experiment", "seeds", "get_int_list")[0]
    env = _make_env(cfg, seed)
    env.reset(stream(seed, "env", 0))
    lines = ["round,opt_value,selection"]
    k = 0
    while not env.done() and (rounds is None or k < rounds):
        k += 1
        tab = Tabulated(env.oracle, env.matroid(), env.snapshot())
        sel, val = tab.opt()
        lines.append(f"{k},{val:.12g},{_format_action(sel)}")
        env.step(tuple(0 if a is None else a for a in sel))
    return "\n".join(lines) + "\n"
