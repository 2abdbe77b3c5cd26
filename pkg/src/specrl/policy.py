"""Actor-critic policy with specification-modulated state features.

Architecture (all float64):

* state encoder: 3 fully connected hidden layers, width 64, ReLU;
* spec encoder f_c: one affine layer mapping the normalized specification of
  the next pending occurrence to per-layer (alpha, beta) pairs, shared
  weights across the alpha/beta outputs.  In "film" mode each configured
  hidden layer's output h becomes alpha * h + beta before the next layer;
  in "naive" mode f_c emits a 32-d spec embedding that is concatenated with
  the other features instead of modulating;
* task embedding: a |closure| x 32 table indexed by the current progressed
  formula;
* actor and critic heads: 3 fully connected layers each, on the
  concatenation of the state embedding and the task embedding.

f_c is initialized so that modulation starts as the identity (alpha bias 1,
beta bias 0, small random weights).  Spec numeric fields are min-max
normalized to [-1, 1] against their sampling ranges; angles enter as
(cos, sin).  Occurrences without an adjustable spec use the zero vector.

Forward passes return a cache from which ``backward`` computes exact
reverse-mode gradients for every parameter block; tests check them against
central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ltl import Closure, next_pending_atom
from .mapping import Cone3DSpec, MappingSpec, Nav2DSpec, SpecSpace
from .scenarios import Scenario

HIDDEN = 64
TASK_DIM = 32
SPEC_EMBED_DIM = 32  # naive mode
LOG_STD_MIN, LOG_STD_MAX = -5.0, 2.0


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class ConditioningConfig:
    mode: str = "film"              # "film" | "naive"
    layers: tuple[int, ...] = (3,)  # modulated hidden layers, subset of {1,2,3}

    def __post_init__(self):
        if self.mode not in ("film", "naive"):
            raise PolicyError(f"conditioning mode must be film or naive, got {self.mode!r}")
        if self.mode == "film":
            if not self.layers:
                raise PolicyError("film mode needs a non-empty modulated layer set")
            if not set(self.layers) <= {1, 2, 3}:
                raise PolicyError("modulated layers must be a subset of {1, 2, 3}")
            object.__setattr__(self, "layers", tuple(sorted(set(self.layers))))


def _minmax(value: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return 2.0 * (value - lo) / (hi - lo) - 1.0


def encode_spec_input(spec: MappingSpec, space: SpecSpace, dim: int) -> np.ndarray:
    """Normalized fixed-length encoding of one mapping specification."""
    if spec is None:
        return np.zeros(dim, dtype=np.float64)
    theta = math.radians(spec.theta_deg)
    if isinstance(spec, Nav2DSpec):
        vec = [_minmax(spec.d, *space.d_range), math.cos(theta),
               math.sin(theta), _minmax(spec.r_d, space.r_d, space.r_d)]
    elif isinstance(spec, Cone3DSpec):
        vec = [_minmax(spec.d, *space.d_range),
               _minmax(spec.r_c, *space.r_c_range),
               math.cos(theta), math.sin(theta),
               _minmax(spec.r_d, space.r_d, space.r_d)]
    else:
        raise PolicyError(f"unknown spec {spec!r}")
    if len(vec) != dim:
        raise PolicyError(f"spec encoding dim {len(vec)} != expected {dim}")
    return np.array(vec, dtype=np.float64)


def _orthogonal(rng: np.random.Generator, rows: int, cols: int,
                gain: float) -> np.ndarray:
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols], dtype=np.float64)


class Policy:
    """Parameter container plus forward/backward passes."""

    def __init__(self, scenario: Scenario, closure: Closure,
                 conditioning: ConditioningConfig, rng: np.random.Generator):
        self.scenario = scenario
        self.closure = closure
        self.conditioning = conditioning
        self.discrete = scenario.env_kind == "navgrid"
        self.obs_dim = scenario.make_env(np.random.default_rng(0)).obs_dim
        self.spec_dim = scenario.spec_input_dim
        self.n_actions = 3  # NavGrid action count / displacement dims
        self.params: dict[str, np.ndarray] = {}
        self._init_params(rng)

    # -- initialization ----------------------------------------------------

    def _init_params(self, rng: np.random.Generator):
        p = self.params
        dims = [self.obs_dim, HIDDEN, HIDDEN, HIDDEN]
        for i in range(3):
            p[f"enc_W{i + 1}"] = _orthogonal(rng, dims[i], dims[i + 1], math.sqrt(2))
            p[f"enc_b{i + 1}"] = np.zeros(dims[i + 1])
        if self.conditioning.mode == "film":
            n_mod = len(self.conditioning.layers)
            p["film_W"] = 0.01 * rng.standard_normal((self.spec_dim, 2 * HIDDEN * n_mod))
            bias = np.zeros(2 * HIDDEN * n_mod)
            for k in range(n_mod):
                bias[2 * k * HIDDEN:(2 * k + 1) * HIDDEN] = 1.0  # alpha parts
            p["film_b"] = bias
            z_dim = HIDDEN + TASK_DIM
        else:
            p["spec_W"] = _orthogonal(rng, self.spec_dim, SPEC_EMBED_DIM, 1.0)
            p["spec_b"] = np.zeros(SPEC_EMBED_DIM)
            z_dim = HIDDEN + TASK_DIM + SPEC_EMBED_DIM
        self.z_dim = z_dim
        p["task_E"] = rng.standard_normal((len(self.closure), TASK_DIM)) / math.sqrt(TASK_DIM)
        head_out = self.n_actions
        for prefix, out_dim, out_gain in (("act", head_out, 0.01),
                                          ("crit", 1, 1.0)):
            p[f"{prefix}_W1"] = _orthogonal(rng, z_dim, HIDDEN, math.sqrt(2))
            p[f"{prefix}_b1"] = np.zeros(HIDDEN)
            p[f"{prefix}_W2"] = _orthogonal(rng, HIDDEN, HIDDEN, math.sqrt(2))
            p[f"{prefix}_b2"] = np.zeros(HIDDEN)
            p[f"{prefix}_W3"] = _orthogonal(rng, HIDDEN, out_dim, out_gain)
            p[f"{prefix}_b3"] = np.zeros(out_dim)
        if not self.discrete:
            p["log_std"] = -0.5 * np.ones(self.n_actions)

    # -- per-step inputs ---------------------------------------------------

    def step_inputs(self, ps) -> tuple[int, np.ndarray]:
        """(closure index, spec encoding of the next pending occurrence)."""
        phi = ps.phi
        task_idx = self.closure.index_of(phi)
        occ = next_pending_atom(phi)
        if occ is None:
            vec = np.zeros(self.spec_dim)
        else:
            vec = encode_spec_input(ps.spec_set[occ],
                                    self.scenario.spec_spaces[occ],
                                    self.spec_dim)
        return task_idx, vec

    # -- forward -----------------------------------------------------------

    def forward(self, obs: np.ndarray, spec: np.ndarray, task_idx: np.ndarray,
                need_cache: bool = False):
        """Batched forward pass.

        Returns a dict with "out" (logits or means), "value", "state_emb",
        "task_emb" and, when requested, the cache needed by backward().
        """
        p = self.params
        film = self.conditioning.mode == "film"
        cache: dict = {"obs": obs, "spec": spec, "task_idx": task_idx}
        if film:
            g = spec @ p["film_W"] + p["film_b"]
            cache["film_g"] = g
        h = obs
        hs, masks, alphas, pre_mods = [], [], {}, {}
        for i in range(1, 4):
            a = h @ p[f"enc_W{i}"] + p[f"enc_b{i}"]
            mask = a > 0.0
            h = a * mask
            masks.append(mask)
            if film and i in self.conditioning.layers:
                k = self.conditioning.layers.index(i)
                alpha = g[:, 2 * k * HIDDEN:(2 * k + 1) * HIDDEN]
                beta = g[:, (2 * k + 1) * HIDDEN:(2 * k + 2) * HIDDEN]
                pre_mods[i] = h
                alphas[i] = alpha
                h = alpha * h + beta
            hs.append(h)
        state_emb = h
        task_emb = p["task_E"][task_idx]
        parts = [state_emb, task_emb]
        if not film:
            spec_emb = spec @ p["spec_W"] + p["spec_b"]
            parts.append(spec_emb)
        z = np.concatenate(parts, axis=1)
        heads = {}
        for prefix in ("act", "crit"):
            u1 = z @ p[f"{prefix}_W1"] + p[f"{prefix}_b1"]
            m1 = u1 > 0.0
            h1 = u1 * m1
            u2 = h1 @ p[f"{prefix}_W2"] + p[f"{prefix}_b2"]
            m2 = u2 > 0.0
            h2 = u2 * m2
            out = h2 @ p[f"{prefix}_W3"] + p[f"{prefix}_b3"]
            heads[prefix] = (h1, m1, h2, m2, out)
        result = {
            "out": heads["act"][4],
            "value": heads["crit"][4][:, 0],
            "state_emb": state_emb,
            "task_emb": task_emb,
        }
        if not self.discrete:
            result["log_std"] = np.clip(p["log_std"], LOG_STD_MIN, LOG_STD_MAX)
        if need_cache:
            cache.update(hs=hs, masks=masks, alphas=alphas, pre_mods=pre_mods,
                         z=z, heads=heads)
            result["cache"] = cache
        return result

    # -- backward ----------------------------------------------------------

    def backward(self, cache: dict, d_out: np.ndarray, d_value: np.ndarray,
                 d_log_std: np.ndarray | None = None) -> dict[str, np.ndarray]:
        """Reverse-mode gradients of sum(loss) given upstream gradients on
        the actor output, the value and (continuous only) log_std."""
        p = self.params
        film = self.conditioning.mode == "film"
        grads = {name: np.zeros_like(arr) for name, arr in p.items()}
        z = cache["z"]
        dz = np.zeros_like(z)
        for prefix, upstream in (("act", d_out), ("crit", d_value[:, None])):
            h1, m1, h2, m2, _out = cache["heads"][prefix]
            grads[f"{prefix}_W3"] += h2.T @ upstream
            grads[f"{prefix}_b3"] += upstream.sum(axis=0)
            dh2 = (upstream @ p[f"{prefix}_W3"].T) * m2
            grads[f"{prefix}_W2"] += h1.T @ dh2
            grads[f"{prefix}_b2"] += dh2.sum(axis=0)
            dh1 = (dh2 @ p[f"{prefix}_W2"].T) * m1
            grads[f"{prefix}_W1"] += z.T @ dh1
            grads[f"{prefix}_b1"] += dh1.sum(axis=0)
            dz += dh1 @ p[f"{prefix}_W1"].T

        d_state = dz[:, :HIDDEN]
        d_task = dz[:, HIDDEN:HIDDEN + TASK_DIM]
        np.add.at(grads["task_E"], cache["task_idx"], d_task)
        if not film:
            d_spec_emb = dz[:, HIDDEN + TASK_DIM:]
            grads["spec_W"] += cache["spec"].T @ d_spec_emb
            grads["spec_b"] += d_spec_emb.sum(axis=0)

        dg = np.zeros_like(cache["film_g"]) if film else None
        dh = d_state
        hs, masks = cache["hs"], cache["masks"]
        for i in range(3, 0, -1):
            if film and i in self.conditioning.layers:
                k = self.conditioning.layers.index(i)
                alpha = cache["alphas"][i]
                pre = cache["pre_mods"][i]
                dg[:, 2 * k * HIDDEN:(2 * k + 1) * HIDDEN] += dh * pre
                dg[:, (2 * k + 1) * HIDDEN:(2 * k + 2) * HIDDEN] += dh
                dh = dh * alpha
            da = dh * masks[i - 1]
            # hs stores post-modulation outputs, i.e. exactly what fed layer i
            prev = cache["obs"] if i == 1 else hs[i - 2]
            grads[f"enc_W{i}"] += prev.T @ da
            grads[f"enc_b{i}"] += da.sum(axis=0)
            dh = da @ p[f"enc_W{i}"].T
        if film:
            grads["film_W"] += cache["spec"].T @ dg
            grads["film_b"] += dg.sum(axis=0)
        if d_log_std is not None:
            mask = ((p["log_std"] > LOG_STD_MIN) & (p["log_std"] < LOG_STD_MAX))
            grads["log_std"] += d_log_std * mask
        return grads

    # -- distributions -----------------------------------------------------

    def dist_logp_entropy(self, out: np.ndarray, log_std, actions):
        """Log-probabilities and entropies of stored actions.

        Discrete: softmax over logits.  Continuous: diagonal Gaussian over
        pre-squash actions u (the environment action is tanh(u) * max_step);
        the tanh Jacobian correction is constant w.r.t. parameters and the
        entropy is that of the base Gaussian.
        """
        if self.discrete:
            logz = _log_softmax(out)
            logp = np.take_along_axis(logz, actions[:, None], axis=1)[:, 0]
            probs = np.exp(logz)
            entropy = -(probs * logz).sum(axis=1)
            return logp, entropy
        std = np.exp(log_std)
        u = actions
        logp = (-0.5 * (((u - out) / std) ** 2).sum(axis=1)
                - log_std.sum() - 0.5 * self.n_actions * math.log(2 * math.pi))
        logp = logp - _squash_correction(u)
        entropy = np.full(out.shape[0],
                          (log_std + 0.5 * (1.0 + math.log(2 * math.pi))).sum())
        return logp, entropy

    def dist_grads(self, out: np.ndarray, log_std, actions,
                   d_logp: np.ndarray, d_entropy: np.ndarray):
        """Gradients of (sum d_logp*logp + sum d_entropy*entropy) w.r.t. the
        actor output and log_std."""
        if self.discrete:
            logz = _log_softmax(out)
            probs = np.exp(logz)
            onehot = np.zeros_like(out)
            onehot[np.arange(out.shape[0]), actions] = 1.0
            d_out = d_logp[:, None] * (onehot - probs)
            entropy = -(probs * logz).sum(axis=1)
            d_out += d_entropy[:, None] * (-probs * (logz + entropy[:, None]))
            return d_out, None
        std = np.exp(log_std)
        diff = (actions - out) / std ** 2
        d_out = d_logp[:, None] * diff
        d_log_std = (d_logp[:, None] * (((actions - out) / std) ** 2 - 1.0)).sum(axis=0)
        d_log_std += d_entropy.sum() * np.ones_like(log_std)
        return d_out, d_log_std

    def sample_actions(self, result, rng: np.random.Generator):
        """Stochastic actions plus their log-probabilities."""
        out = result["out"]
        if self.discrete:
            logz = _log_softmax(out)
            cum = np.cumsum(np.exp(logz), axis=1)
            r = rng.random((out.shape[0], 1))
            actions = (r < cum).argmax(axis=1)
            logp = np.take_along_axis(logz, actions[:, None], axis=1)[:, 0]
            return actions, logp
        std = np.exp(result["log_std"])
        u = out + std * rng.standard_normal(out.shape)
        logp, _ = self.dist_logp_entropy(out, result["log_std"], u)
        return u, logp

    def greedy_actions(self, result) -> np.ndarray:
        if self.discrete:
            return result["out"].argmax(axis=1)
        return result["out"]

    def env_action(self, action):
        """Map a stored action to the environment's action space."""
        if self.discrete:
            return int(action)
        return np.tanh(action) * self.scenario.layout.max_step

    # -- parameter plumbing -------------------------------------------------

    def flat_copy(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def load_flat(self, params: dict[str, np.ndarray]):
        for k in self.params:
            if k not in params:
                raise PolicyError(f"missing parameter block {k!r}")
            if params[k].shape != self.params[k].shape:
                raise PolicyError(f"shape mismatch for {k!r}")
            self.params[k] = params[k].astype(np.float64).copy()


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _squash_correction(u: np.ndarray) -> np.ndarray:
    # log|det d tanh(u)/du| summed over dims; constant w.r.t. parameters.
    return (2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))).sum(axis=1)
