"""Finite-difference verification of the analytic PPO gradients.

The loss here is the full clipped-surrogate + value + entropy objective on a
small fixed batch; every parameter block is perturbed entry by entry
(sampled entries for large matrices) and compared against central
differences at fp64.
"""

import numpy as np
import pytest

from specrl.harness import build_closure
from specrl.policy import ConditioningConfig, Policy
from specrl.scenarios import make_scenario
from specrl.trainer import TrainerConfig, ppo_loss_and_grads

REL_TOL = 1e-4
FD_EPS = 1e-6


def build(scenario_name, mode, layers, seed=0):
    scenario = make_scenario(scenario_name)
    cl = build_closure(scenario, cap=20000)
    cond = ConditioningConfig(mode=mode, layers=layers)
    return Policy(scenario, cl, cond, np.random.default_rng(seed))


def toy_batch(policy, batch_size=10, seed=3):
    """A 10-step batch with data generated from slightly perturbed params,
    so ratios are not identically 1 and both clip branches occur."""
    rng = np.random.default_rng(seed)
    obs = rng.uniform(-1, 1, size=(batch_size, policy.obs_dim))
    spec = rng.uniform(-1, 1, size=(batch_size, policy.spec_dim))
    task_idx = rng.integers(len(policy.closure), size=batch_size)
    result = policy.forward(obs, spec, task_idx)
    actions, logp = policy.sample_actions(result, rng)
    return {
        "obs": obs, "spec": spec, "task_idx": task_idx, "actions": actions,
        "old_logp": logp + rng.normal(0.0, 0.2, size=batch_size),
        "advantages": rng.normal(0.0, 1.0, size=batch_size),
        "returns": rng.normal(0.0, 1.0, size=batch_size),
    }


def loss_of(policy, cfg, batch) -> float:
    total, _grads, _stats = ppo_loss_and_grads(
        policy, cfg, batch["obs"], batch["spec"], batch["task_idx"],
        batch["actions"], batch["old_logp"], batch["advantages"],
        batch["returns"])
    return float(total)


def fd_check(policy, batch, entries_per_block=40, seed=7):
    cfg = TrainerConfig()
    _total, grads, _stats = ppo_loss_and_grads(
        policy, cfg, batch["obs"], batch["spec"], batch["task_idx"],
        batch["actions"], batch["old_logp"], batch["advantages"],
        batch["returns"])
    rng = np.random.default_rng(seed)
    worst = {}
    for name, grad in grads.items():
        param = policy.params[name]
        assert param.flags["C_CONTIGUOUS"]
        flat_g = grad.ravel()
        flat_p = param.reshape(-1)
        assert np.shares_memory(flat_p, param)
        n = flat_p.size
        if name == "task_E":
            # only rows present in the batch receive gradient
            rows = np.unique(batch["task_idx"])
            idxs = [int(r) * param.shape[1] + int(c)
                    for r in rows for c in range(param.shape[1])]
            idxs = rng.choice(idxs, size=min(entries_per_block, len(idxs)),
                              replace=False)
        elif n <= entries_per_block:
            idxs = np.arange(n)
        else:
            idxs = rng.choice(n, size=entries_per_block, replace=False)
        worst_rel = 0.0
        for idx in idxs:
            orig = flat_p[idx]
            flat_p[idx] = orig + FD_EPS
            up = loss_of(policy, cfg, batch)
            flat_p[idx] = orig - FD_EPS
            down = loss_of(policy, cfg, batch)
            flat_p[idx] = orig
            fd = (up - down) / (2.0 * FD_EPS)
            # the 1e-5 floor keeps fp64 central-difference noise (~1e-11 at
            # this loss scale) from dominating entries whose true gradient
            # is itself at the noise level
            denom = max(abs(fd) + abs(flat_g[idx]), 1e-5)
            worst_rel = max(worst_rel, abs(fd - flat_g[idx]) / denom)
        worst[name] = worst_rel
    return worst


@pytest.mark.parametrize("scenario,mode,layers", [
    ("nav_scenario1", "film", (1, 2, 3)),
    ("nav_scenario1", "film", (3,)),
    ("nav_scenario1", "naive", (3,)),
    ("inspect3d", "film", (1, 2, 3)),
    ("inspect3d", "naive", (3,)),
])
def test_every_block_matches_finite_differences(scenario, mode, layers):
    policy = build(scenario, mode, layers)
    batch = toy_batch(policy)
    worst = fd_check(policy, batch)
    bad = {k: v for k, v in worst.items() if v >= REL_TOL}
    assert not bad, f"blocks over tolerance: {bad}"


def test_both_clip_branches_present_in_toy_batch():
    policy = build("nav_scenario1", "film", (3,))
    batch = toy_batch(policy)
    cfg = TrainerConfig()
    result = policy.forward(batch["obs"], batch["spec"], batch["task_idx"])
    logp, _ = policy.dist_logp_entropy(result["out"], None, batch["actions"])
    ratio = np.exp(logp - batch["old_logp"])
    assert np.any(np.abs(ratio - 1.0) > cfg.clip_eps)
    assert np.any(np.abs(ratio - 1.0) < cfg.clip_eps)


def test_gradients_flow_through_film_generator():
    policy = build("nav_scenario1", "film", (1, 2, 3))
    batch = toy_batch(policy)
    cfg = TrainerConfig()
    _t, grads, _s = ppo_loss_and_grads(
        policy, cfg, batch["obs"], batch["spec"], batch["task_idx"],
        batch["actions"], batch["old_logp"], batch["advantages"],
        batch["returns"])
    assert np.any(grads["film_W"] != 0.0)
    assert np.any(grads["film_b"] != 0.0)
    assert np.any(grads["task_E"] != 0.0)
