"""Experiment orchestration: seeded runs, evaluation, checkpoints, exports.

A training run interleaves rollout collection and policy updates, pausing
every ``eval_interval`` updates to test the policy on every available task
(20 episodes per task by default, deterministic actions, a seed stream
disjoint from training), drive curriculum advancement, append one metrics
record and refresh the checkpoint.

The metrics stream is JSON lines with sorted keys and no timestamps, so two
runs with the same config and seed produce byte-identical files; wall-clock
progress goes to stdout only.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time

import numpy as np

from . import ltl
from .config import RunConfig, config_from_dict
from .curriculum import (CurriculumState, enumerate_tasks, make_curriculum,
                         record_eval_and_maybe_advance, sample_task)
from .envs import load_layout
from .ltl import Closure, Formula, closure, to_string
from .policy import Policy
from .product import TaskableMdp
from .scenarios import Scenario, make_scenario
from .trainer import Adam, EpisodeStats, RolloutCollector, ppo_update

CHECKPOINT_VERSION = 1


class HarnessError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Scenario/closure assembly

def build_scenario(config: RunConfig) -> Scenario:
    layout = load_layout(config.layout_file) if config.layout_file else None
    return make_scenario(config.scenario, layout)


def build_closure(scenario: Scenario, cap: int) -> Closure:
    tasks = [task for level in range(1, scenario.max_level + 1)
             for task in enumerate_tasks(scenario, level)]
    return closure(tasks, cap=cap)


# ---------------------------------------------------------------------------
# Evaluation

def evaluate_policy(policy: Policy, scenario: Scenario,
                    tasks: tuple[Formula, ...], episodes_per_task: int,
                    seed_seq: np.random.SeedSequence, greedy: bool = True):
    """Per-task success table under seeded episodes.

    Returns (per_task dict Formula -> rate, mean success, mean episode
    length).  Episode randomness (reset poses, spec draws) comes only from
    ``seed_seq``; each task's episodes run as one synchronized batch so the
    policy forward pass is amortized.
    """
    env_seed, spec_seed, act_seed = seed_seq.spawn(3)
    env_children = env_seed.spawn(episodes_per_task)
    mdps = [TaskableMdp(scenario, scenario.make_env(np.random.default_rng(s)))
            for s in env_children]
    spec_rng = np.random.default_rng(spec_seed)
    act_rng = np.random.default_rng(act_seed)
    per_task: dict[Formula, float] = {}
    total_len = 0
    total_eps = 0
    for task in tasks:
        states = []
        inputs = []
        for mdp in mdps:
            spec_set = scenario.sample_spec_set(task, spec_rng)
            ps = mdp.episode_reset(task, spec_set)
            states.append(ps)
            inputs.append(policy.step_inputs(ps))
        active = list(range(episodes_per_task))
        while active:
            obs = np.stack([mdps[i].env.observe(states[i].env_state)
                            for i in active])
            spec = np.stack([inputs[i][1] for i in active])
            task_idx = np.array([inputs[i][0] for i in active])
            result = policy.forward(obs, spec, task_idx)
            if greedy:
                actions = policy.greedy_actions(result)
            else:
                actions, _ = policy.sample_actions(result, act_rng)
            still = []
            for pos, i in enumerate(active):
                before = states[i].phi
                outcome = mdps[i].step(states[i],
                                       policy.env_action(actions[pos]))
                states[i] = outcome.next
                if outcome.terminal:
                    total_len += outcome.next.steps
                    total_eps += 1
                else:
                    if outcome.next.phi != before:
                        inputs[i] = policy.step_inputs(outcome.next)
                    still.append(i)
            active = still
        successes = sum(int(ps.phi.kind == ltl.TRUE) for ps in states)
        per_task[task] = successes / episodes_per_task
    mean = sum(per_task.values()) / len(per_task)
    return per_task, mean, total_len / max(total_eps, 1)


# ---------------------------------------------------------------------------
# Checkpoints

def save_checkpoint(path: str, policy: Policy, config: RunConfig, seed: int,
                    env_steps: int, update_index: int,
                    curriculum: CurriculumState):
    manifest = {
        "version": CHECKPOINT_VERSION,
        "config": config.to_dict(),
        "seed": seed,
        "env_steps": env_steps,
        "update_index": update_index,
        "curriculum_level": curriculum.level,
        "closure": policy.closure.to_lines(policy.scenario.symbols),
        "obs_dim": policy.obs_dim,
        "spec_dim": policy.spec_dim,
        "discrete": policy.discrete,
    }
    arrays = {f"param/{k}": v for k, v in policy.params.items()}
    np.savez(path, manifest=json.dumps(manifest, sort_keys=True), **arrays)


def load_checkpoint(path: str):
    """Rebuild (policy, config, curriculum level, manifest) from a file.

    The closure recomputed from the scenario must match the manifest's
    formula list exactly; a mismatch means the checkpoint belongs to a
    different scenario or layout.
    """
    with np.load(path, allow_pickle=False) as data:
        manifest = json.loads(str(data["manifest"]))
        params = {k[len("param/"):]: data[k] for k in data.files
                  if k.startswith("param/")}
    config = config_from_dict(manifest["config"])
    scenario = build_scenario(config)
    cl = build_closure(scenario, config.closure_cap)
    if cl.to_lines(scenario.symbols) != manifest["closure"]:
        raise HarnessError("checkpoint closure does not match the scenario "
                           "(different layout or task set)")
    policy = Policy(scenario, cl, config.conditioning, np.random.default_rng(0))
    policy.load_flat(params)
    return policy, config, manifest


# ---------------------------------------------------------------------------
# Metrics

def metrics_record(run_id: str, env_steps: int, update_index: int,
                   curriculum: CurriculumState, per_task, mean_success: float,
                   losses: dict, train_stats: EpisodeStats,
                   symbols) -> dict:
    return {
        "run_id": run_id,
        "step": env_steps,
        "update": update_index,
        "level": curriculum.level,
        "per_task_success": {to_string(t, symbols): rate
                             for t, rate in per_task.items()},
        "mean_success": mean_success,
        "losses": {k: losses.get(k, 0.0) for k in
                   ("loss", "policy_loss", "value_loss", "entropy",
                    "approx_kl", "clip_fraction", "grad_norm")},
        "train_episodes": train_stats.summary(),
    }


# ---------------------------------------------------------------------------
# Training

def train(config: RunConfig, seed: int, out_dir: str, stop_fn=None,
          quiet: bool = False) -> dict:
    """Run one seeded training run; returns a summary dict.

    Writes to ``out_dir``: resolved_config.json, metrics.jsonl (appended at
    every evaluation point, deterministic bytes), checkpoint.npz (refreshed
    at every evaluation point and at the end).  ``stop_fn``, if given, sees
    each metrics record and may end the run early.
    """
    os.makedirs(out_dir, exist_ok=True)
    t_start = time.time()
    scenario = build_scenario(config)
    cl = build_closure(scenario, config.closure_cap)
    root = np.random.SeedSequence(entropy=seed)
    init_seq, rollout_seq, shuffle_seq = root.spawn(3)
    policy = Policy(scenario, cl, config.conditioning,
                    np.random.default_rng(init_seq))
    trainer_cfg = config.trainer
    curriculum = make_curriculum(scenario, config.curriculum)
    collector = RolloutCollector(scenario, policy, trainer_cfg, curriculum,
                                 rollout_seq)
    optimizer = Adam(policy.params, trainer_cfg.learning_rate)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    run_id = f"{config.scenario}-{config.conditioning.mode}-{config.curriculum}-seed{seed}"

    with open(os.path.join(out_dir, "resolved_config.json"), "w") as fh:
        fh.write(config.to_json() + "\n")
    metrics_path = os.path.join(out_dir, "metrics.jsonl")
    ckpt_path = os.path.join(out_dir, "checkpoint.npz")
    records: list[dict] = []
    update_index = 0
    stopped = False

    with open(metrics_path, "w") as metrics_fh:
        while collector.total_env_steps < config.total_steps and not stopped:
            batch, train_stats = collector.collect()
            losses = ppo_update(policy, optimizer, trainer_cfg, batch, shuffle_rng)
            update_index += 1
            if update_index % config.eval_interval == 0:
                # fresh deterministic eval stream per evaluation point
                eval_seq = np.random.SeedSequence(
                    entropy=seed, spawn_key=(7777, update_index))
                per_task, mean_success, _mean_len = evaluate_policy(
                    policy, scenario, curriculum.available_tasks(),
                    config.eval_episodes_per_task, eval_seq)
                curriculum = record_eval_and_maybe_advance(curriculum, per_task)
                collector.set_curriculum(curriculum)
                record = metrics_record(
                    run_id, collector.total_env_steps, update_index,
                    curriculum, per_task, mean_success, losses, train_stats,
                    scenario.symbols)
                records.append(record)
                metrics_fh.write(json.dumps(record, sort_keys=True) + "\n")
                metrics_fh.flush()
                save_checkpoint(ckpt_path, policy, config, seed,
                                collector.total_env_steps, update_index,
                                curriculum)
                if not quiet:
                    print(f"[{run_id}] step={collector.total_env_steps} "
                          f"update={update_index} level={curriculum.level} "
                          f"eval_mean={mean_success:.3f} "
                          f"loss={losses['loss']:.4f} "
                          f"elapsed={time.time() - t_start:.0f}s", flush=True)
                if stop_fn is not None and stop_fn(record):
                    stopped = True

    save_checkpoint(ckpt_path, policy, config, seed,
                    collector.total_env_steps, update_index, curriculum)
    return {
        "run_id": run_id,
        "out_dir": out_dir,
        "env_steps": collector.total_env_steps,
        "updates": update_index,
        "level": curriculum.level,
        "records": records,
        "wall_clock_s": time.time() - t_start,
        "checkpoint": ckpt_path,
        "metrics": metrics_path,
    }


# ---------------------------------------------------------------------------
# Final evaluation and exports

def evaluate_checkpoint(ckpt_path: str, episodes_per_task: int, seed: int,
                        tasks: str = "all"):
    """Evaluate a checkpoint over the scenario's tasks.

    Returns (rows, mean success, mean length): rows are (level, task string,
    success rate) over all tasks (``tasks="all"``) or only those at or below
    the checkpoint's curriculum level (``tasks="available"``).
    """
    policy, config, manifest = load_checkpoint(ckpt_path)
    scenario = policy.scenario
    curriculum = make_curriculum(scenario, config.curriculum)
    level_of = {t: k + 1 for k, group in enumerate(curriculum.levels)
                for t in group}
    if tasks == "available":
        snapshot = dataclasses.replace(curriculum,
                                       level=manifest["curriculum_level"])
        chosen = [(level_of[t], t) for t in snapshot.available_tasks()]
    else:
        chosen = [(level_of[t], t) for t in curriculum.all_tasks()]
    eval_seq = np.random.SeedSequence(entropy=seed, spawn_key=(4242,))
    per_task, mean, mean_len = evaluate_policy(
        policy, scenario, tuple(t for _k, t in chosen), episodes_per_task,
        eval_seq)
    rows = [(k, to_string(t, scenario.symbols), per_task[t]) for k, t in chosen]
    return rows, mean, mean_len


def export_embeddings(ckpt_path: str, episodes: int, seed: int, out_path: str):
    """Roll out the checkpointed policy and dump per-step embeddings.

    CSV columns: episode, t, task, next_occurrence, the raw spec fields of
    the next occurrence, then the concatenated state+task embedding.
    """
    policy, config, _manifest = load_checkpoint(ckpt_path)
    scenario = policy.scenario
    curriculum = make_curriculum(scenario, config.curriculum)
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(5151,))
    task_seed, spec_seed, env_seed, act_seed = seq.spawn(4)
    task_rng = np.random.default_rng(task_seed)
    spec_rng = np.random.default_rng(spec_seed)
    act_rng = np.random.default_rng(act_seed)
    env = scenario.make_env(np.random.default_rng(env_seed))
    mdp = TaskableMdp(scenario, env)
    symbols = scenario.symbols

    spec_field_names = (["d", "theta_deg", "r_d"] if scenario.env_kind == "navgrid"
                        else ["d", "r_c", "theta_deg", "r_d"])
    emb_dim = 64 + 32
    header = (["episode", "t", "task", "next_occurrence"] + spec_field_names
              + [f"e{i:03d}" for i in range(emb_dim)])
    n_rows = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ep in range(episodes):
            task = sample_task(curriculum, task_rng)
            spec_set = scenario.sample_spec_set(task, spec_rng)
            ps = mdp.episode_reset(task, spec_set)
            t = 0
            while not ps.done:
                task_idx, spec_vec = policy.step_inputs(ps)
                obs = env.observe(ps.env_state)
                result = policy.forward(obs[None, :], spec_vec[None, :],
                                        np.array([task_idx]))
                occ = ltl.next_pending_atom(ps.phi)
                spec = ps.spec_set[occ]
                fields = ([""] * len(spec_field_names) if spec is None
                          else [repr(v) for v in spec.fields()])
                emb = np.concatenate([result["state_emb"][0],
                                      result["task_emb"][0]])
                writer.writerow([ep, t, to_string(task, symbols),
                                 symbols.name_of(occ)] + fields
                                + [repr(float(v)) for v in emb])
                n_rows += 1
                actions, _ = policy.sample_actions(result, act_rng)
                ps = mdp.step(ps, policy.env_action(actions[0])).next
                t += 1
    return {"rows": n_rows, "columns": len(header), "path": out_path}
