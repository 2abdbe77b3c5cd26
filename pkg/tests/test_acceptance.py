"""Acceptance suite: one test per criterion, each printing a PASS line.

The training criteria (7 and 8) execute real seeded runs; the whole module
is sized for a desktop CPU (roughly 20-30 minutes end to end).  Run with
``pytest tests/test_acceptance.py -v`` for the per-criterion report.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from specrl import ltl
from specrl.config import RunConfig
from specrl.curriculum import (enumerate_tasks, make_curriculum,
                               record_eval_and_maybe_advance, sample_task)
from specrl.envs import InspectState, NavState
from specrl.fuzz import fuzz_progression
from specrl.harness import (build_closure, evaluate_checkpoint, train)
from specrl.ltl import closure_escapes
from specrl.mapping import (Cone3DSpec, Nav2DSpec, detectable_center, evaluate)
from specrl.policy import ConditioningConfig, Policy
from specrl.product import STEP_PENALTY, TaskableMdp, rollout
from specrl.scenarios import make_scenario
from specrl.scripted import (InspectWaypointPolicy, NavWaypointPolicy,
                             RandomPolicy)
from specrl.trainer import TrainerConfig

SEEDS = (0, 1, 2)
ABLATION_STEPS = 1_000_000
SMOKE_SUCCESS_BUDGET = 1_000_000
SMOKE_LEVEL_BUDGET = 3_000_000
WALL_CLOCK_LIMIT_S = 45 * 60


@pytest.fixture
def announce(capsys):
    def _print(line):
        with capsys.disabled():
            print(f"\n{line}", flush=True)
    return _print


def _run_arm(tmp_path_factory, label, conditioning, curriculum_mode):
    base = tmp_path_factory.mktemp(f"arm_{label}")
    runs = {}
    for seed in SEEDS:
        cfg = RunConfig(scenario="nav_scenario1", conditioning=conditioning,
                        curriculum=curriculum_mode, total_steps=ABLATION_STEPS)
        runs[seed] = train(cfg, seed=seed, out_dir=str(base / f"seed{seed}"),
                           quiet=True)
    return runs


@pytest.fixture(scope="session")
def film_runs(tmp_path_factory):
    return _run_arm(tmp_path_factory, "film", ConditioningConfig(mode="film"),
                    "normal")


@pytest.fixture(scope="session")
def naive_runs(tmp_path_factory):
    return _run_arm(tmp_path_factory, "naive",
                    ConditioningConfig(mode="naive"), "normal")


@pytest.fixture(scope="session")
def nocurriculum_runs(tmp_path_factory):
    return _run_arm(tmp_path_factory, "none", ConditioningConfig(mode="film"),
                    "none")


# -- criterion 1 -------------------------------------------------------------

def test_criterion_1_progression_oracle_equivalence(announce):
    t0 = time.time()
    report = fuzz_progression(count=10000, max_depth=4, max_symbols=6,
                              seed=20240808, max_trace_len=20)
    elapsed = time.time() - t0
    assert report.ok, report.mismatches[:5]
    assert elapsed < 60.0
    announce(f"ACCEPTANCE 1 PASS: progression == trace oracle on "
             f"{report.count} random cases, 0 mismatches, {elapsed:.1f}s")


# -- criterion 2 -------------------------------------------------------------

def test_criterion_2_closure_soundness(announce):
    scenario = make_scenario("nav_scenario2")
    t0 = time.time()
    cl = build_closure(scenario, cap=20000)
    build_s = time.time() - t0
    assert build_s < 10.0
    escapes = closure_escapes(cl)
    assert escapes == []
    announce(f"ACCEPTANCE 2 PASS: Scenario 2 closure has {len(cl)} formulas, "
             f"built in {build_s:.1f}s, closed under every progression")


# -- criterion 3 -------------------------------------------------------------

def test_criterion_3_reward_semantics(announce):
    checked = 0
    for scenario_name, n_random, n_scripted in (("nav_scenario1", 350, 250),
                                                ("inspect3d", 150, 250)):
        scenario = make_scenario(scenario_name)
        mdp = TaskableMdp(scenario,
                          scenario.make_env(np.random.default_rng(3)))
        scripted = (NavWaypointPolicy(scenario)
                    if scenario_name == "nav_scenario1"
                    else InspectWaypointPolicy(scenario))
        tasks = [t for k in range(1, min(scenario.max_level, 3) + 1)
                 for t in enumerate_tasks(scenario, k)]
        rng = np.random.default_rng(7)
        spec_rng = np.random.default_rng(11)
        plans = [(RandomPolicy(scenario), n_random), (scripted, n_scripted)]
        for policy, count in plans:
            for i in range(count):
                task = tasks[i % len(tasks)]
                spec_set = scenario.sample_spec_set(task, spec_rng)
                traj = rollout(mdp, policy, task, spec_set, rng)
                outcome = (1.0 if traj.success
                           else (-1.0 if traj.violated else 0.0))
                for out in traj.outcomes[:-1]:
                    assert out.reward == STEP_PENALTY
                assert traj.outcomes[-1].reward == outcome + STEP_PENALTY
                expected = outcome + STEP_PENALTY * traj.length
                assert abs(traj.undiscounted_return - expected) < 1e-9
                checked += 1
    assert checked == 1000
    announce(f"ACCEPTANCE 3 PASS: return identity (completion term - 0.01 x "
             f"length) exact on {checked} rollouts")


# -- criterion 4 -------------------------------------------------------------

def _nav_reference_verdict(letter, normal, spec, state):
    """Independent containment + heading predicate with complex arithmetic."""
    rot = complex(normal[0], normal[1]) * np.exp(1j * math.radians(spec.theta_deg))
    center = complex(letter[0], letter[1]) + spec.d * rot
    agent = complex(state.x, state.y)
    if abs(agent - center) > spec.r_d:
        return False
    to_letter = complex(letter[0], letter[1]) - agent
    if to_letter == 0:
        return True
    diff = math.degrees(math.atan2(to_letter.imag, to_letter.real)) - state.heading_deg
    return abs((diff + 180.0) % 360.0 - 180.0) <= 20.0


def _cone_reference_verdict(center3, axis3, spec, state):
    """Independent frame construction: project out the axis from a reference
    direction, then place the center with explicit vector arithmetic."""
    axis = np.asarray(axis3, dtype=float)
    axis = axis / math.sqrt(float(axis @ axis))
    ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = ref - (ref @ axis) * axis
    u = u / math.sqrt(float(u @ u))
    v = np.cross(axis, u)
    theta = math.radians(spec.theta_deg)
    target = (np.asarray(center3, dtype=float) + spec.d * axis
              + spec.r_c * (math.cos(theta) * u + math.sin(theta) * v))
    return float(np.linalg.norm(state.position - target)) <= spec.r_d


def test_criterion_4_mapping_geometry(announce):
    nav = make_scenario("nav_scenario1")
    letter_occ = nav.symbols.id_of("check_letter_left")
    letter_ev = nav.evaluators[letter_occ]
    rng = np.random.default_rng(2024)
    for _ in range(10000):
        spec = nav.spec_spaces[letter_occ].sample(rng)
        state = NavState(rng.uniform(0, 10), rng.uniform(0, 10),
                         rng.uniform(0, 360))
        got = evaluate(letter_ev, spec, state)
        want = _nav_reference_verdict(letter_ev.position,
                                      letter_ev.wall_normal, spec, state)
        assert got == want

    insp = make_scenario("inspect3d")
    obj_occs = [insp.symbols.id_of(n) for n in
                ("read_meter", "check_rust_valve", "check_leak_pipe")]
    for i in range(10000):
        occ = obj_occs[i % 3]
        ev = insp.evaluators[occ]
        spec = insp.spec_spaces[occ].sample(rng)
        state = InspectState(rng.uniform(0, 1, size=3))
        got = evaluate(ev, spec, state)
        assert got == _cone_reference_verdict(ev.center, ev.axis, spec, state)
    obj_ev = insp.evaluators[insp.symbols.id_of("check_rust_valve")]

    # closed-ball boundary behaviour at r_d +/- 1e-9
    spec = Nav2DSpec(d=2.0, theta_deg=0.0, r_d=1.0)
    assert evaluate(letter_ev, spec, NavState(3.0, 5.0, 180.0))
    assert not evaluate(letter_ev, spec, NavState(3.0 + 1e-9, 5.0, 180.0))
    assert evaluate(letter_ev, spec, NavState(3.0 - 1e-9, 5.0, 180.0))
    cone = Cone3DSpec(d=0.3, r_c=0.2, theta_deg=90.0, r_d=0.15)
    center = detectable_center(obj_ev, cone)
    for direction in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.6, 0.8])):
        assert evaluate(obj_ev, cone,
                        InspectState(center + direction * (0.15 - 1e-9)))
        assert not evaluate(obj_ev, cone,
                            InspectState(center + direction * (0.15 + 1e-9)))

    # rotational consistency under rigid rotation about the letter anchor
    letter = np.array(letter_ev.position)
    for _ in range(1000):
        spec = nav.spec_spaces[letter_occ].sample(rng)
        pos = rng.uniform(0, 10, size=2)
        heading = rng.uniform(0, 360)
        delta = rng.uniform(-150, 150)
        rad = math.radians(delta)
        rot = np.array([[math.cos(rad), -math.sin(rad)],
                        [math.sin(rad), math.cos(rad)]])
        pos2 = letter + rot @ (pos - letter)
        before = evaluate(letter_ev, spec, NavState(pos[0], pos[1], heading))
        after = evaluate(letter_ev,
                         Nav2DSpec(spec.d, spec.theta_deg + delta, spec.r_d),
                         NavState(pos2[0], pos2[1], heading + delta))
        assert before == after
    announce("ACCEPTANCE 4 PASS: 10000 spec/state pairs per environment match "
             "the closed-form predicates; boundaries at r_d +/- 1e-9 and 1000 "
             "rigid rotations verified")


# -- criterion 5 -------------------------------------------------------------

def test_criterion_5_film_identity_and_gradients(announce):
    from test_gradients import fd_check, toy_batch

    # identity: alpha=1, beta=0 reproduces the unmodulated network at fp64
    scenario = make_scenario("nav_scenario1")
    cl = build_closure(scenario, cap=20000)
    film = Policy(scenario, cl, ConditioningConfig(mode="film", layers=(1, 2, 3)),
                  np.random.default_rng(0))
    film.params["film_W"][:] = 0.0
    plain = Policy(scenario, cl, ConditioningConfig(mode="naive"),
                   np.random.default_rng(0))
    for key in plain.params:
        if key.startswith(("enc_", "task_E")):
            plain.params[key] = film.params[key].copy()
    rng = np.random.default_rng(1)
    obs = rng.uniform(-1, 1, size=(64, film.obs_dim))
    spec = rng.uniform(-1, 1, size=(64, film.spec_dim))
    task = rng.integers(len(cl), size=64)
    gap = np.max(np.abs(film.forward(obs, spec, task)["state_emb"]
                        - plain.forward(obs, spec, task)["state_emb"]))
    assert gap < 1e-12

    worst_overall = 0.0
    for scenario_name, mode, layers in (("nav_scenario1", "film", (1, 2, 3)),
                                        ("nav_scenario1", "naive", (3,)),
                                        ("inspect3d", "film", (1, 2, 3))):
        sc = make_scenario(scenario_name)
        policy = Policy(sc, build_closure(sc, cap=20000),
                        ConditioningConfig(mode=mode, layers=layers),
                        np.random.default_rng(0))
        worst = fd_check(policy, toy_batch(policy))
        for name, rel in worst.items():
            assert rel < 1e-4, (scenario_name, mode, name, rel)
            worst_overall = max(worst_overall, rel)
    announce(f"ACCEPTANCE 5 PASS: identity modulation gap {gap:.1e} < 1e-12; "
             f"finite differences agree on every parameter block "
             f"(worst rel err {worst_overall:.1e} < 1e-4)")


# -- criterion 6 -------------------------------------------------------------

def test_criterion_6_curriculum_state_machine(announce):
    scenario = make_scenario("nav_scenario1")

    cs = make_curriculum(scenario, "normal")
    cs = record_eval_and_maybe_advance(cs, {t: 0.9 for t in cs.available_tasks()})
    assert cs.level == 1  # strictly-greater rule
    cs = record_eval_and_maybe_advance(
        cs, {t: 0.9 + 1e-9 for t in cs.available_tasks()})
    assert cs.level == 2
    levels = [cs.level]
    rng = np.random.default_rng(0)
    for _ in range(40):
        rates = {t: float(rng.uniform(0.6, 1.0)) for t in cs.available_tasks()}
        cs = record_eval_and_maybe_advance(cs, rates)
        levels.append(cs.level)
    assert all(b - a in (0, 1) for a, b in zip(levels, levels[1:]))
    assert levels[-1] <= scenario.max_level

    # anti mode: level 1 makes exactly the 4-symbol tasks available
    anti = make_curriculum(scenario, "anti")
    hardest = set(anti.levels[3])
    assert set(anti.available_tasks()) == hardest
    draws = [sample_task(anti, rng) for _ in range(10000)]
    assert set(draws) <= hardest
    counts = np.zeros(len(hardest))
    index = {t: i for i, t in enumerate(anti.available_tasks())}
    for t in draws:
        counts[index[t]] += 1
    p_anti = stats.chisquare(counts).pvalue
    assert p_anti > 0.05

    # none mode: everything available from the start, uniform over the union
    none = make_curriculum(scenario, "none")
    everything = none.all_tasks()
    assert none.level == scenario.max_level
    assert set(none.available_tasks()) == set(everything)
    index = {t: i for i, t in enumerate(none.available_tasks())}
    counts = np.zeros(len(everything))
    for _ in range(10000):
        counts[index[sample_task(none, rng)]] += 1
    p_none = stats.chisquare(counts).pvalue
    assert p_none > 0.05
    announce(f"ACCEPTANCE 6 PASS: strict-0.9 advancement, monotone levels, "
             f"anti/none sampling uniform (chi-square p={p_anti:.2f}/"
             f"{p_none:.2f} > 0.05 over 10000 draws)")


# -- criterion 7 -------------------------------------------------------------

LEVEL1_TASKS = ("F reach_bluebox", "F reach_redbox", "F check_letter_left",
                "F check_letter_right")


def _level1_mean(record):
    return sum(record["per_task_success"][t] for t in LEVEL1_TASKS) / 4


def test_criterion_7_training_smoke(announce, film_runs, tmp_path_factory):
    per_seed = {}
    for seed, result in film_runs.items():
        assert result["wall_clock_s"] < WALL_CLOCK_LIMIT_S
        success_ok = any(_level1_mean(r) >= 0.8
                         for r in result["records"]
                         if r["step"] <= SMOKE_SUCCESS_BUDGET)
        level_step = next((r["step"] for r in result["records"]
                           if r["level"] >= 2), None)
        if level_step is None:
            # continue this seed on the full 3M budget before judging
            cfg = RunConfig(scenario="nav_scenario1",
                            total_steps=SMOKE_LEVEL_BUDGET)
            extra = train(cfg, seed=seed,
                          out_dir=str(tmp_path_factory.mktemp(f"cont{seed}")),
                          stop_fn=lambda rec: rec["level"] >= 2, quiet=True)
            assert extra["wall_clock_s"] < WALL_CLOCK_LIMIT_S
            level_step = next((r["step"] for r in extra["records"]
                               if r["level"] >= 2), None)
        level_ok = level_step is not None and level_step <= SMOKE_LEVEL_BUDGET
        per_seed[seed] = (success_ok, level_ok)
    good = sum(1 for s_ok, l_ok in per_seed.values() if s_ok and l_ok)
    assert good >= 2, per_seed
    announce(f"ACCEPTANCE 7 PASS: level-1 success >= 0.8 within 1M steps and "
             f"level >= 2 within 3M on {good}/3 seeds "
             f"(wall clock per seed well under 45 min)")


# -- criterion 8 -------------------------------------------------------------

def _arm_mean(runs):
    scores = []
    for seed, result in runs.items():
        _rows, mean, _len = evaluate_checkpoint(result["checkpoint"],
                                                episodes_per_task=10, seed=99)
        scores.append(mean)
    return float(np.mean(scores)), scores


def test_criterion_8_ablation_directions(announce, film_runs, naive_runs,
                                         nocurriculum_runs):
    film_mean, film_scores = _arm_mean(film_runs)
    naive_mean, naive_scores = _arm_mean(naive_runs)
    none_mean, none_scores = _arm_mean(nocurriculum_runs)
    assert film_mean >= naive_mean, (film_scores, naive_scores)
    assert none_mean < film_mean, (none_scores, film_scores)
    announce(f"ACCEPTANCE 8 PASS: at {ABLATION_STEPS} steps x 3 seeds, "
             f"film {film_mean:.3f} >= naive {naive_mean:.3f} and "
             f"no-curriculum {none_mean:.3f} < curriculum {film_mean:.3f} "
             f"(all-task mean success)")


# -- criterion 9 -------------------------------------------------------------

def test_criterion_9_byte_identical_metrics(announce, tmp_path):
    cfg = RunConfig(scenario="nav_scenario1",
                    trainer=TrainerConfig(rollout_steps=1024, num_envs=8),
                    total_steps=3072, eval_interval=1,
                    eval_episodes_per_task=2)
    blobs = []
    for name in ("one", "two"):
        out = tmp_path / name
        train(cfg, seed=123, out_dir=str(out), quiet=True)
        blobs.append((out / "metrics.jsonl").read_bytes())
    assert blobs[0] == blobs[1] and blobs[0]
    announce(f"ACCEPTANCE 9 PASS: identical config+seed reruns produce "
             f"byte-identical metrics streams ({len(blobs[0])} bytes)")
