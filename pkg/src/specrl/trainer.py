"""Clipped policy-gradient training with GAE on parallel product MDPs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ltl
from .curriculum import CurriculumState, sample_task
from .policy import Policy
from .product import TaskableMdp
from .scenarios import Scenario


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainerConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    learning_rate: float = 3e-4
    epochs: int = 4
    minibatch_size: int = 256
    rollout_steps: int = 4096      # env steps per update across all workers
    num_envs: int = 16
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    normalize_advantages: bool = True

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if self.rollout_steps % self.num_envs != 0:
            raise ValueError("rollout_steps must be divisible by num_envs")


def compute_gae(rewards: np.ndarray, values: np.ndarray, dones: np.ndarray,
                last_values: np.ndarray, gamma: float, lam: float):
    """Generalized advantage estimation over (T, N) arrays.

    ``dones[t]`` marks transitions into a terminal state (no bootstrap
    across them; horizon hits count as terminal).  Returns (advantages,
    value targets), both (T, N).
    """
    T, N = rewards.shape
    adv = np.zeros((T, N), dtype=np.float64)
    next_adv = np.zeros(N, dtype=np.float64)
    next_values = last_values
    for t in range(T - 1, -1, -1):
        cont = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_values * cont - values[t]
        next_adv = delta + gamma * lam * cont * next_adv
        adv[t] = next_adv
        next_values = values[t]
    return adv, adv + values


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)


def clip_grads(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if max_norm > 0.0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def ppo_loss_and_grads(policy: Policy, cfg: TrainerConfig, obs, spec, task_idx,
                       actions, old_logp, advantages, returns):
    """PPO clipped-surrogate loss, value loss and entropy bonus with exact
    reverse-mode gradients for every parameter block."""
    B = obs.shape[0]
    result = policy.forward(obs, spec, task_idx, need_cache=True)
    out, value = result["out"], result["value"]
    log_std = result.get("log_std")
    logp, entropy = policy.dist_logp_entropy(out, log_std, actions)

    ratio = np.exp(logp - old_logp)
    clipped = np.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps)
    surr1 = ratio * advantages
    surr2 = clipped * advantages
    policy_loss = -np.minimum(surr1, surr2).mean()
    value_err = value - returns
    value_loss = 0.5 * float((value_err ** 2).mean())
    entropy_mean = float(entropy.mean())
    total = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy_mean
    if not np.isfinite(total):
        raise TrainingError(
            f"non-finite loss: policy={policy_loss} value={value_loss} "
            f"entropy={entropy_mean}")

    # d(total)/d(logp): only the unclipped branch propagates.
    use_unclipped = surr1 <= surr2
    d_logp = np.where(use_unclipped, -ratio * advantages / B, 0.0)
    d_entropy = np.full(B, -cfg.entropy_coef / B)
    d_out, d_log_std = policy.dist_grads(out, log_std, actions, d_logp, d_entropy)
    d_value = cfg.value_coef * value_err / B
    grads = policy.backward(result["cache"], d_out, d_value, d_log_std)

    stats = {
        "loss": float(total),
        "policy_loss": float(policy_loss),
        "value_loss": value_loss,
        "entropy": entropy_mean,
        "approx_kl": float((old_logp - logp).mean()),
        "clip_fraction": float((~use_unclipped).mean()),
    }
    return total, grads, stats


def ppo_update(policy: Policy, optimizer: Adam, cfg: TrainerConfig,
               batch: dict[str, np.ndarray], rng: np.random.Generator) -> dict:
    """Run the configured epochs of minibatch updates on one rollout batch."""
    B = batch["obs"].shape[0]
    adv = batch["advantages"]
    if cfg.normalize_advantages:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    stats_acc: dict[str, float] = {}
    n_minibatches = 0
    for _epoch in range(cfg.epochs):
        order = rng.permutation(B)
        for start in range(0, B, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            _, grads, stats = ppo_loss_and_grads(
                policy, cfg, batch["obs"][idx], batch["spec"][idx],
                batch["task_idx"][idx], batch["actions"][idx],
                batch["old_logp"][idx], adv[idx], batch["returns"][idx])
            stats["grad_norm"] = clip_grads(grads, cfg.max_grad_norm)
            optimizer.step(policy.params, grads)
            n_minibatches += 1
            for k, v in stats.items():
                stats_acc[k] = stats_acc.get(k, 0.0) + v
    return {k: v / n_minibatches for k, v in stats_acc.items()}


@dataclass
class EpisodeStats:
    count: int = 0
    successes: int = 0
    violations: int = 0
    total_return: float = 0.0
    total_length: int = 0

    def record(self, success: bool, violated: bool, ret: float, length: int):
        self.count += 1
        self.successes += int(success)
        self.violations += int(violated)
        self.total_return += ret
        self.total_length += length

    def summary(self) -> dict:
        if self.count == 0:
            return {"episodes": 0, "success_rate": 0.0,
                    "mean_return": 0.0, "mean_length": 0.0}
        return {"episodes": self.count,
                "success_rate": self.successes / self.count,
                "mean_return": self.total_return / self.count,
                "mean_length": self.total_length / self.count}


@dataclass
class _Slot:
    mdp: TaskableMdp
    ps: object = None
    task_idx: int = 0
    spec_vec: np.ndarray = field(default_factory=lambda: np.zeros(1))
    ep_return: float = 0.0


class RolloutCollector:
    """Drives num_envs product MDPs and assembles on-policy batches.

    Episodes draw a task from the curriculum snapshot and a fresh spec set at
    every reset; per-step policy inputs are refreshed whenever the task
    formula progresses.
    """

    def __init__(self, scenario: Scenario, policy: Policy, cfg: TrainerConfig,
                 curriculum: CurriculumState, seed_seq: np.random.SeedSequence):
        self.scenario = scenario
        self.policy = policy
        self.cfg = cfg
        self.curriculum = curriculum
        children = seed_seq.spawn(cfg.num_envs + 3)
        self._task_rng = np.random.default_rng(children[0])
        self._spec_rng = np.random.default_rng(children[1])
        self._action_rng = np.random.default_rng(children[2])
        self.slots = [
            _Slot(mdp=TaskableMdp(scenario,
                                  scenario.make_env(np.random.default_rng(children[3 + i]))))
            for i in range(cfg.num_envs)
        ]
        for slot in self.slots:
            self._reset_slot(slot)
        self.total_env_steps = 0

    def set_curriculum(self, curriculum: CurriculumState):
        self.curriculum = curriculum

    def _reset_slot(self, slot: _Slot):
        task = sample_task(self.curriculum, self._task_rng)
        spec_set = self.scenario.sample_spec_set(task, self._spec_rng)
        slot.ps = slot.mdp.episode_reset(task, spec_set)
        slot.task_idx, slot.spec_vec = self.policy.step_inputs(slot.ps)
        slot.ep_return = 0.0

    def collect(self) -> tuple[dict[str, np.ndarray], EpisodeStats]:
        cfg = self.cfg
        T = cfg.rollout_steps // cfg.num_envs
        N = cfg.num_envs
        policy = self.policy
        obs_dim = policy.obs_dim
        spec_dim = policy.spec_dim
        act_shape = (T, N) if policy.discrete else (T, N, policy.n_actions)

        obs_buf = np.zeros((T, N, obs_dim))
        spec_buf = np.zeros((T, N, spec_dim))
        task_buf = np.zeros((T, N), dtype=np.int64)
        act_buf = np.zeros(act_shape, dtype=np.int64 if policy.discrete else np.float64)
        logp_buf = np.zeros((T, N))
        val_buf = np.zeros((T, N))
        rew_buf = np.zeros((T, N))
        done_buf = np.zeros((T, N))
        stats = EpisodeStats()

        for t in range(T):
            obs = np.stack([slot.mdp.env.observe(slot.ps.env_state)
                            for slot in self.slots])
            spec = np.stack([slot.spec_vec for slot in self.slots])
            task_idx = np.array([slot.task_idx for slot in self.slots])
            result = policy.forward(obs, spec, task_idx)
            actions, logp = policy.sample_actions(result, self._action_rng)
            obs_buf[t], spec_buf[t], task_buf[t] = obs, spec, task_idx
            act_buf[t], logp_buf[t], val_buf[t] = actions, logp, result["value"]
            for i, slot in enumerate(self.slots):
                prev_phi = slot.ps.phi
                outcome = slot.mdp.step(slot.ps, policy.env_action(actions[i]))
                rew_buf[t, i] = outcome.reward
                done_buf[t, i] = float(outcome.terminal)
                slot.ep_return += outcome.reward
                if outcome.terminal:
                    final = outcome.next.phi
                    stats.record(final.kind == ltl.TRUE, final.kind == ltl.FALSE,
                                 slot.ep_return, outcome.next.steps)
                    self._reset_slot(slot)
                else:
                    slot.ps = outcome.next
                    if outcome.next.phi != prev_phi:
                        slot.task_idx, slot.spec_vec = policy.step_inputs(slot.ps)
            self.total_env_steps += N

        obs = np.stack([slot.mdp.env.observe(slot.ps.env_state)
                        for slot in self.slots])
        spec = np.stack([slot.spec_vec for slot in self.slots])
        task_idx = np.array([slot.task_idx for slot in self.slots])
        last_values = policy.forward(obs, spec, task_idx)["value"]
        adv, returns = compute_gae(rew_buf, val_buf, done_buf, last_values,
                                   cfg.gamma, cfg.gae_lambda)
        flat = {
            "obs": obs_buf.reshape(T * N, obs_dim),
            "spec": spec_buf.reshape(T * N, spec_dim),
            "task_idx": task_buf.reshape(T * N),
            "actions": act_buf.reshape((T * N,) if policy.discrete
                                       else (T * N, policy.n_actions)),
            "old_logp": logp_buf.reshape(T * N),
            "advantages": adv.reshape(T * N),
            "returns": returns.reshape(T * N),
        }
        return flat, stats
