"""Off-policy option-critic training with hidden-state-carrying replay.

Collection stores, for every transition, the recurrent states that were
current when the step was taken; updates replay one network step from those
snapshots instead of re-rolling trajectories. Four losses run per gradient
pass, in order: twin option-value regression, intra-option policy gradient,
twin auxiliary-value regression, and the termination gradient, with soft
target updates after each value step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, asdict

import numpy as np

from . import envs as envs_mod
from . import tensor as T
from .network import CradolNet, NetConfig, gaussian_sample, onehot, select_option
from .optim import Adam, clip_grad_norm, soft_update
from .tensor import Tensor

# row layout of a stored (8, belief_size) encoder-state snapshot:
# both twins' h then c, for the option-value pair then the auxiliary pair
ENC_FIELDS = ("h_qo0", "h_qo1", "c_qo0", "c_qo1", "h_qu0", "h_qu1", "c_qu0", "c_qu1")


@dataclass
class TrainerConfig:
    gamma: float = 0.95
    tau: float = 0.005
    batch_size: int = 100
    lr_q_omega: float = 3e-4
    lr_q_u: float = 3e-4
    lr_policy: float = 3e-4
    lr_termination: float = 3e-4
    entropy_weight: float = 0.005
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_frac: float = 0.2
    buffer_capacity: int = 100_000
    grad_steps_per_env_step: float = 1.0
    warmup_steps: int = 1000
    total_steps: int = 300_000
    eval_every: int = 2000
    eval_episodes: int = 10
    clip_norm: float = 1.0
    freeze_termination: bool = False  # flat baseline: the single option never ends

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("need batch_size >= 1 and capacity >= batch_size")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Transition:
    x: np.ndarray
    omega: int
    action: object
    reward: float
    x2: np.ndarray
    done: bool
    mech: np.ndarray  # (K, rnn_hidden) pre-step mechanism states
    enc: np.ndarray  # (8, belief_size) pre-step LSTM states, ENC_FIELDS order


@dataclass
class AgentState:
    """Everything the behavior policy carries between environment steps."""

    obs: np.ndarray
    omega: int
    mech: np.ndarray
    enc: np.ndarray
    # cached next-step pipeline output from the termination peek
    cached_b_flat: np.ndarray = None
    cached_mech_after: np.ndarray = None


class ReplayBuffer:
    """Fixed-capacity FIFO ring over preallocated arrays."""

    def __init__(self, capacity, obs_size, num_mechanisms, rnn_hidden, belief_size, action_size, continuous):
        self.capacity = int(capacity)
        self.continuous = continuous
        c = self.capacity
        self.x = np.zeros((c, obs_size))
        self.x2 = np.zeros((c, obs_size))
        self.omega = np.zeros(c, dtype=np.int64)
        if continuous:
            self.action = np.zeros((c, action_size))
        else:
            self.action = np.zeros(c, dtype=np.int64)
        self.reward = np.zeros(c)
        self.done = np.zeros(c)
        self.mech = np.zeros((c, num_mechanisms, rnn_hidden))
        self.enc = np.zeros((c, 8, belief_size))
        self.idx = 0
        self.size = 0

    def __len__(self):
        return self.size

    def push(self, tr: Transition):
        i = self.idx
        self.x[i] = tr.x
        self.x2[i] = tr.x2
        self.omega[i] = tr.omega
        self.action[i] = tr.action
        self.reward[i] = tr.reward
        self.done[i] = float(tr.done)
        self.mech[i] = tr.mech
        self.enc[i] = tr.enc
        self.idx = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        if self.size < 1:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "x": self.x[idx],
            "x2": self.x2[idx],
            "omega": self.omega[idx],
            "action": self.action[idx],
            "reward": self.reward[idx],
            "done": self.done[idx],
            "mech": self.mech[idx],
            "enc": self.enc[idx],
        }


@dataclass
class CurveRow:
    env_step: int
    mean_return: float
    std_return: float
    mean_option_switches: float
    mean_episode_len: float


CURVE_HEADER = ["env_step", "mean_return", "std_return", "mean_option_switches", "mean_episode_len"]


def write_curve_csv(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CURVE_HEADER)
        for r in rows:
            w.writerow(
                [r.env_step, repr(r.mean_return), repr(r.std_return), repr(r.mean_option_switches), repr(r.mean_episode_len)]
            )


def read_curve_csv(path):
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for rec in reader:
            rows.append(
                CurveRow(
                    env_step=int(rec["env_step"]),
                    mean_return=float(rec["mean_return"]),
                    std_return=float(rec["std_return"]),
                    mean_option_switches=float(rec["mean_option_switches"]),
                    mean_episode_len=float(rec["mean_episode_len"]),
                )
            )
    return rows


class Trainer:
    def __init__(self, net_config: NetConfig, config: TrainerConfig, domain=None, env=None, eval_env=None, seed=0):
        self.config = config
        self.domain = domain
        self.seed = int(seed)
        ss = np.random.SeedSequence(self.seed)
        k_init, k_collect, k_replay, k_update, k_env = ss.spawn(5)
        self.rng_collect = np.random.Generator(np.random.PCG64(k_collect))
        self.rng_replay = np.random.Generator(np.random.PCG64(k_replay))
        self.rng_update = np.random.Generator(np.random.PCG64(k_update))
        self._env_seed = int(k_env.generate_state(1)[0])

        self.env = env if env is not None else envs_mod.make(domain)
        self.eval_env = eval_env if eval_env is not None else (envs_mod.make(domain) if domain else None)

        self.net = CradolNet(net_config, np.random.Generator(np.random.PCG64(k_init)))
        self.target = self.net.clone()
        c = config
        self.opt_policy = Adam(self.net.params_policy(), lr=c.lr_policy)
        self.opt_term = Adam(self.net.params_termination(), lr=c.lr_termination)
        self.opt_q_omega = Adam(self.net.params_q_omega(), lr=c.lr_q_omega)
        self.opt_q_u = Adam(self.net.params_q_u(), lr=c.lr_q_u)

        nc = net_config
        self.buffer = ReplayBuffer(
            c.buffer_capacity, nc.obs_size, nc.num_mechanisms, nc.rnn_hidden,
            nc.belief_size, nc.action_size, nc.continuous_actions,
        )
        self.state = None
        self.env_steps = 0

    # ------------------------------------------------------------------
    # behavior policy

    def _epsilon(self):
        c = self.config
        horizon = max(1.0, c.epsilon_frac * c.total_steps)
        frac = min(1.0, self.env_steps / horizon)
        return c.epsilon_start + frac * (c.epsilon_end - c.epsilon_start)

    def _zero_state(self, obs):
        nc = self.net.config
        return AgentState(
            obs=np.asarray(obs, dtype=np.float64),
            omega=0,
            mech=np.zeros((nc.num_mechanisms, nc.rnn_hidden)),
            enc=np.zeros((8, nc.belief_size)),
        )

    def _peek_q_min(self, net, obs, enc):
        """min-twin option values after encoding obs from the given states."""
        with T.no_grad():
            b, _, _ = net.encode_q_omega(Tensor(obs[None]), Tensor(enc[0:2, None]), Tensor(enc[2:4, None]))
            q = net.q_omega(b).data  # (2, 1, num_options)
        return np.minimum(q[0, 0], q[1, 0])

    def _begin_episode(self, obs, epsilon):
        self.state = self._zero_state(obs)
        q = self._peek_q_min(self.net, self.state.obs, self.state.enc)
        self.state.omega = select_option(q, epsilon, self.rng_collect)

    def ensure_started(self):
        if self.state is None:
            obs = self.env.reset(seed=self._env_seed)
            self._begin_episode(obs, self._epsilon())

    def _sample_action(self, b_flat, omega):
        nc = self.net.config
        if nc.continuous_actions:
            mu, log_std = self.net.policy_gaussian(b_flat, [omega])
            noise = self.rng_collect.standard_normal(nc.action_size)
            return np.tanh(mu.data[0] + np.exp(log_std.data[0]) * noise)
        logits = self.net.policy_logits(b_flat, [omega]).data[0]
        z = logits - logits.max()
        p = np.exp(z)
        p /= p.sum()
        return int(self.rng_collect.choice(nc.action_size, p=p))

    def collect_step(self) -> Transition:
        """One environment step: act, advance states, store, maybe switch option."""
        self.ensure_started()
        s = self.state
        snapshot_mech = s.mech.copy()
        snapshot_enc = s.enc.copy()

        with T.no_grad():
            x = Tensor(s.obs[None])
            if s.cached_b_flat is not None:
                b_flat = Tensor(s.cached_b_flat)
                mech_after = s.cached_mech_after
            else:
                b_flat, _, new_mech = self.net.belief_pipeline(x, Tensor(s.mech[None]), [s.omega])
                mech_after = new_mech.data[0]
            action = self._sample_action(b_flat, s.omega)
            new_enc = _advance_encoders(self.net, x, s.enc)

        result = self.env.step(action)
        self.env_steps += 1
        tr = Transition(
            x=s.obs, omega=s.omega, action=action, reward=result.reward,
            x2=np.asarray(result.observation, dtype=np.float64), done=result.done,
            mech=snapshot_mech, enc=snapshot_enc,
        )
        self.buffer.push(tr)

        if result.done:
            obs0 = self.env.reset()
            self._begin_episode(obs0, self._epsilon())
            return tr

        s.obs = tr.x2
        s.mech = mech_after
        s.enc = new_enc
        s.cached_b_flat = None
        s.cached_mech_after = None
        if not self.config.freeze_termination:
            with T.no_grad():
                x2 = Tensor(s.obs[None])
                b2_flat, _, mech2 = self.net.belief_pipeline(x2, Tensor(s.mech[None]), [s.omega])
                beta = float(self.net.termination_prob(b2_flat, [s.omega]).data[0])
            if self.rng_collect.random() < beta:
                q = self._peek_q_min(self.net, s.obs, s.enc)
                s.omega = select_option(q, self._epsilon(), self.rng_collect)
            else:
                # next step reuses this forward unless the option changed
                s.cached_b_flat = b2_flat.data
                s.cached_mech_after = mech2.data[0]
        return tr

    # ------------------------------------------------------------------
    # losses

    def _encode_stored(self, net, kind, x: Tensor, enc):
        """Twin-stacked LSTM step from replayed states: enc is (B, 8, e)."""
        base = 0 if kind == "qo" else 4
        h = Tensor(np.swapaxes(enc[:, base : base + 2], 0, 1))  # (2, B, e)
        c = Tensor(np.swapaxes(enc[:, base + 2 : base + 4], 0, 1))
        if kind == "qo":
            return net.encode_q_omega(x, h, c)
        return net.encode_q_u(x, h, c)

    def _target_pack(self, batch):
        """Everything the four losses need from the frozen/target side.

        Replays the collection-time step from the stored snapshots, then
        evaluates the next observation: option beliefs through the target
        twins, the option pathway and termination through the online nets.
        """
        cfg = self.config
        om = batch["omega"]
        B = len(om)
        with T.no_grad():
            x = Tensor(batch["x"])
            x2 = Tensor(batch["x2"])
            _, _, mech_after = self.net.belief_pipeline(x, Tensor(batch["mech"]), om)
            b2_flat, _, _ = self.net.belief_pipeline(x2, mech_after, om)
            if cfg.freeze_termination:
                beta2 = np.zeros(B)
            else:
                beta2 = self.net.termination_prob(b2_flat, om).data

            _, h1, c1 = self._encode_stored(self.target, "qo", x, batch["enc"])
            b2, _, _ = self.target.encode_q_omega(x2, h1, c1)
            qbar = self.target.q_omega(b2).data  # (2, B, num_options)
            qbar_min = np.minimum(qbar[0], qbar[1])

        q_at = qbar_min[np.arange(B), om]
        v_bar = qbar_min.max(axis=1)
        u_val = (1.0 - beta2) * q_at + beta2 * v_bar
        y = batch["reward"] + cfg.gamma * (1.0 - batch["done"]) * u_val
        return {
            "y": y,
            "advantage": q_at - v_bar,
            "b2_flat": b2_flat.data,
            "u": u_val,
            "beta2": beta2,
        }

    def _loss_inter_q(self, batch, pack) -> "Tensor":
        y = Tensor(pack["y"])  # (B,), broadcasts across twins
        x = Tensor(batch["x"])
        om_hot = Tensor(onehot(batch["omega"], self.net.config.num_options))
        b, _, _ = self._encode_stored(self.net, "qo", x, batch["enc"])
        q_all = self.net.q_omega(b)  # (2, B, num_options)
        q_sel = T.sum_(T.mul(q_all, om_hot), axis=2)  # (2, B)
        d = T.add(q_sel, T.neg(y))
        return T.mul(2.0, T.mean_(T.mul(d, d)))  # sum of the two twin MSEs

    def _loss_intra_q(self, batch, pack) -> "Tensor":
        nc = self.net.config
        B = len(batch["omega"])
        y = Tensor(pack["y"])
        x = Tensor(batch["x"])
        om_hot = onehot(batch["omega"], nc.num_options)
        b, _, _ = self._encode_stored(self.net, "qu", x, batch["enc"])
        if nc.continuous_actions:
            q_sel = T.reshape(self.net.q_u(b, om_hot, Tensor(batch["action"])), (2, B))
        else:
            q_all = self.net.q_u(b, om_hot)  # (2, B, A)
            a_hot = Tensor(onehot(batch["action"], nc.action_size))
            q_sel = T.sum_(T.mul(q_all, a_hot), axis=2)
        d = T.add(q_sel, T.neg(y))
        return T.mul(2.0, T.mean_(T.mul(d, d)))

    def _loss_intra_policy(self, batch) -> "Tensor":
        nc = self.net.config
        alpha = self.config.entropy_weight
        om = batch["omega"]
        B = len(om)
        x = Tensor(batch["x"])
        om_hot = onehot(om, nc.num_options)

        if nc.continuous_actions:
            with T.no_grad():
                b_u, _, _ = self._encode_stored(self.net, "qu", x, batch["enc"])
            b_flat, _, _ = self.net.belief_pipeline(x, Tensor(batch["mech"]), om)
            mu, log_std = self.net.policy_gaussian(b_flat, om)
            a, logp = gaussian_sample(mu, log_std, self.rng_update)
            q = self.net.q_u(Tensor(b_u.data), om_hot, a, frozen=True)  # (2, B, 1)
            q0 = T.reshape(T.narrow(q, 0, 0, 1), (B,))
            q1 = T.reshape(T.narrow(q, 0, 1, 1), (B,))
            qmin = T.where_mask(q0.data <= q1.data, q0, q1)
            return T.mean_(T.add(T.mul(alpha, logp), T.neg(qmin)))

        with T.no_grad():
            b_u, _, _ = self._encode_stored(self.net, "qu", x, batch["enc"])
            qs = self.net.q_u(b_u, om_hot).data  # (2, B, A)
        q_const = Tensor(np.minimum(qs[0], qs[1]))  # (B, A)
        b_flat, _, _ = self.net.belief_pipeline(x, Tensor(batch["mech"]), om)
        logits = self.net.policy_logits(b_flat, om)
        logp = T.log_softmax_rows(logits)
        p = T.exp(logp)
        inner = T.add(q_const, T.mul(-alpha, logp))
        return T.neg(T.mean_(T.sum_(T.mul(p, inner), axis=1)))

    def _loss_termination(self, batch, pack) -> "Tensor":
        beta = self.net.termination_prob(Tensor(pack["b2_flat"]), batch["omega"])
        return T.mean_(T.mul(beta, Tensor(pack["advantage"])))

    def update_inter_q(self, batch, pack=None) -> float:
        if len(batch["omega"]) < 1:
            raise ValueError("empty batch")
        if pack is None:
            pack = self._target_pack(batch)
        loss = self._loss_inter_q(batch, pack)
        T.backward(loss)
        clip_grad_norm(self.net.params_q_omega(), self.config.clip_norm)
        self.opt_q_omega.step()
        return loss.item()

    def update_intra_q(self, batch, pack=None) -> float:
        if len(batch["omega"]) < 1:
            raise ValueError("empty batch")
        if pack is None:
            pack = self._target_pack(batch)
        loss = self._loss_intra_q(batch, pack)
        T.backward(loss)
        clip_grad_norm(self.net.params_q_u(), self.config.clip_norm)
        self.opt_q_u.step()
        return loss.item()

    def update_intra_policy(self, batch, pack=None) -> float:
        loss = self._loss_intra_policy(batch)
        T.backward(loss)
        clip_grad_norm(self.net.params_policy(), self.config.clip_norm)
        self.opt_policy.step()
        return loss.item()

    def update_termination(self, batch, pack=None) -> float:
        if self.config.freeze_termination:
            return 0.0
        if pack is None:
            pack = self._target_pack(batch)
        loss = self._loss_termination(batch, pack)
        T.backward(loss)
        clip_grad_norm(self.net.params_termination(), self.config.clip_norm)
        self.opt_term.step()
        return loss.item()

    def compute_losses(self, batch) -> dict:
        """Forward-only values of all four losses; no gradients, no updates."""
        pack = self._target_pack(batch)
        with T.no_grad():
            out = {
                "inter_q": self._loss_inter_q(batch, pack).item(),
                "policy": self._loss_intra_policy(batch).item(),
                "intra_q": self._loss_intra_q(batch, pack).item(),
                "termination": 0.0 if self.config.freeze_termination
                else self._loss_termination(batch, pack).item(),
            }
        return out

    def update(self, batch) -> dict:
        """One full gradient pass in the canonical order, sharing the target pack."""
        tau = self.config.tau
        pack = self._target_pack(batch)
        j_omega = self.update_inter_q(batch, pack)
        soft_update(self.target.params_q_omega(), self.net.params_q_omega(), tau)
        j_pi = self.update_intra_policy(batch, pack)
        j_u = self.update_intra_q(batch, pack)
        soft_update(self.target.params_q_u(), self.net.params_q_u(), tau)
        j_beta = self.update_termination(batch, pack)
        return {"inter_q": j_omega, "policy": j_pi, "intra_q": j_u, "termination": j_beta}

    # ------------------------------------------------------------------
    # evaluation and the outer loop

    def evaluate(self, episodes=None, eval_index=0) -> CurveRow:
        """Deterministic rollouts: greedy options, argmax/mean actions, beta > 0.5."""
        episodes = episodes or self.config.eval_episodes
        nc = self.net.config
        env = self.eval_env
        if env is None:
            raise ValueError("no eval environment; pass eval_env or a domain id")
        returns, lengths, switches = [], [], []
        for ep in range(episodes):
            seed = int(np.random.SeedSequence([self.seed, 7919, eval_index, ep]).generate_state(1)[0])
            obs = np.asarray(env.reset(seed=seed), dtype=np.float64)
            mech = np.zeros((nc.num_mechanisms, nc.rnn_hidden))
            enc = np.zeros((8, nc.belief_size))
            omega = int(np.argmax(self._peek_q_min(self.net, obs, enc)))
            total, length, nswitch = 0.0, 0, 0
            done = False
            while not done:
                with T.no_grad():
                    x = Tensor(obs[None])
                    b_flat, _, new_mech = self.net.belief_pipeline(x, Tensor(mech[None]), [omega])
                    if nc.continuous_actions:
                        mu, _ = self.net.policy_gaussian(b_flat, [omega])
                        action = np.tanh(mu.data[0])
                    else:
                        action = int(np.argmax(self.net.policy_logits(b_flat, [omega]).data[0]))
                    new_enc = _advance_encoders(self.net, x, enc)
                res = env.step(action)
                total += res.reward
                length += 1
                done = res.done
                obs = np.asarray(res.observation, dtype=np.float64)
                mech = new_mech.data[0]
                enc = new_enc
                if not done and not self.config.freeze_termination:
                    with T.no_grad():
                        b2, _, _ = self.net.belief_pipeline(Tensor(obs[None]), Tensor(mech[None]), [omega])
                        beta = float(self.net.termination_prob(b2, [omega]).data[0])
                    if beta > 0.5:
                        new_omega = int(np.argmax(self._peek_q_min(self.net, obs, enc)))
                        if new_omega != omega:
                            nswitch += 1
                        omega = new_omega
            returns.append(total)
            lengths.append(length)
            switches.append(nswitch)
        return CurveRow(
            env_step=self.env_steps,
            mean_return=float(np.mean(returns)),
            std_return=float(np.std(returns)),
            mean_option_switches=float(np.mean(switches)),
            mean_episode_len=float(np.mean(lengths)),
        )

    def train(self, csv_path=None, on_eval=None, stop_condition=None):
        """Run the configured number of environment steps; returns curve rows.

        Evaluates before training and at the configured cadence. stop_condition
        receives the row list after each evaluation and may end the run early.
        """
        cfg = self.config
        self.ensure_started()
        rows = [self.evaluate(eval_index=0)]
        if on_eval:
            on_eval(rows[-1])
        writer = _IncrementalCurveWriter(csv_path) if csv_path else None
        if writer:
            writer.write(rows[-1])
        if stop_condition and stop_condition(rows):
            if writer:
                writer.close()
            return rows

        acc = 0.0
        eval_index = 0
        for step in range(1, cfg.total_steps + 1):
            self.collect_step()
            if self.env_steps > cfg.warmup_steps and len(self.buffer) >= cfg.batch_size:
                acc += cfg.grad_steps_per_env_step
                while acc >= 1.0:
                    self.update(self.buffer.sample(cfg.batch_size, self.rng_replay))
                    acc -= 1.0
            if step % cfg.eval_every == 0:
                eval_index += 1
                rows.append(self.evaluate(eval_index=eval_index))
                if writer:
                    writer.write(rows[-1])
                if on_eval:
                    on_eval(rows[-1])
                if stop_condition and stop_condition(rows):
                    break
        if writer:
            writer.close()
        return rows

    def checkpoint_config(self, extra=None) -> dict:
        cfg = {
            "net": self.net.config.to_dict(),
            "trainer": self.config.to_dict(),
            "domain": self.domain,
            "seed": self.seed,
            "env_steps": self.env_steps,
        }
        if extra:
            cfg.update(extra)
        return cfg

    def save_checkpoint(self, path, extra=None) -> str:
        from .checkpoint import save_checkpoint

        return save_checkpoint(path, self.checkpoint_config(extra), self.net.named_params())


def _advance_encoders(net, x: Tensor, enc: np.ndarray) -> np.ndarray:
    """One LSTM step for all four encoders; enc/new_enc are (8, belief_size)."""
    new_enc = np.empty_like(enc)
    _, h, c = net.encode_q_omega(x, Tensor(enc[0:2, None]), Tensor(enc[2:4, None]))
    new_enc[0:2], new_enc[2:4] = h.data[:, 0], c.data[:, 0]
    _, h, c = net.encode_q_u(x, Tensor(enc[4:6, None]), Tensor(enc[6:8, None]))
    new_enc[4:6], new_enc[6:8] = h.data[:, 0], c.data[:, 0]
    return new_enc


class _IncrementalCurveWriter:
    def __init__(self, path):
        self._f = open(path, "w", newline="")
        self._w = csv.writer(self._f)
        self._w.writerow(CURVE_HEADER)

    def write(self, r: CurveRow):
        self._w.writerow(
            [r.env_step, repr(r.mean_return), repr(r.std_return), repr(r.mean_option_switches), repr(r.mean_episode_len)]
        )
        self._f.flush()

    def close(self):
        self._f.close()


def load_trainer_from_checkpoint(path, env=None, eval_env=None):
    """Rebuild a network (not the optimizer state) from a saved checkpoint."""
    from .checkpoint import load_checkpoint

    cfg, params, digest = load_checkpoint(path)
    net_config = NetConfig.from_dict(cfg["net"])
    trainer = Trainer(
        net_config,
        TrainerConfig.from_dict(cfg["trainer"]),
        domain=cfg.get("domain"),
        env=env,
        eval_env=eval_env,
        seed=cfg.get("seed", 0),
    )
    trainer.net.load_params(params)
    trainer.target = trainer.net.clone()
    return trainer
