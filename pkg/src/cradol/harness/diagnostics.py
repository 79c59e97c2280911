"""Post-training inspection of option structure.

Answers three questions about a checkpoint: which mechanisms does each
option attend to (and which survive the top-k cut), how correlated are the
options' belief representations, and which option runs when during greedy
rollouts.
"""

from __future__ import annotations

import numpy as np

from .. import envs as envs_mod
from .. import tensor as T
from ..checkpoint import load_checkpoint
from ..network import CradolNet, NetConfig
from ..tensor import Tensor


def net_from_checkpoint(path):
    cfg, params, _ = load_checkpoint(path)
    net = CradolNet(NetConfig.from_dict(cfg["net"]), np.random.default_rng(0))
    net.load_params(params)
    return net, cfg


def mechanism_map(net_or_path):
    """Attention rows and top-k active sets per option."""
    net = net_or_path if isinstance(net_or_path, CradolNet) else net_from_checkpoint(net_or_path)[0]
    attn = net.attention_weights()
    masks = net.mechanism_masks()
    active = [sorted(int(m) for m in np.flatnonzero(row)) for row in masks]
    return {"attention": attn, "active_sets": active}


def probe_observations(domain, count=32, seed_base=77000):
    """A deterministic batch of observations from fresh episode starts."""
    env = envs_mod.make(domain)
    return np.stack([np.asarray(env.reset(seed=seed_base + i)) for i in range(count)])


def option_vectors(net, obs_batch):
    """Per-option descriptor: attention row + mean belief over the probe batch.

    Beliefs are computed from zeroed mechanism states so the descriptor
    depends only on parameters and the probe inputs.
    """
    cfg = net.config
    B = obs_batch.shape[0]
    attn = net.attention_weights()
    vecs = []
    with T.no_grad():
        x = Tensor(obs_batch)
        for o in range(cfg.num_options):
            omega = np.full(B, o, dtype=np.intp)
            prev = Tensor(np.zeros((B, cfg.num_mechanisms, cfg.rnn_hidden)))
            b_flat, _, _ = net.belief_pipeline(x, prev, omega)
            vecs.append(np.concatenate([attn[o], b_flat.data.mean(axis=0)]))
    return np.stack(vecs)


def pearson(u, v) -> float:
    du = u - u.mean()
    dv = v - v.mean()
    denom = np.sqrt((du * du).sum() * (dv * dv).sum())
    if denom == 0.0:
        return float("nan")
    return float((du * dv).sum() / denom)


def option_correlation(net_or_path, probe_obs=None):
    """Pairwise Pearson correlation between option descriptor vectors.

    Zero-variance descriptors yield NaN entries (correlation undefined).
    """
    if isinstance(net_or_path, CradolNet):
        net, cfg = net_or_path, None
    else:
        net, cfg = net_from_checkpoint(net_or_path)
    if probe_obs is None:
        domain = (cfg or {}).get("domain")
        if domain is None:
            raise ValueError("need probe_obs or a checkpoint that records its domain")
        probe_obs = probe_observations(domain)
    vecs = option_vectors(net, probe_obs)
    n = vecs.shape[0]
    corr = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            corr[i, j] = corr[j, i] = pearson(vecs[i], vecs[j])
    return corr


def option_trajectories(checkpoint_path, episodes=3):
    """Greedy rollouts recording the active option at every step."""
    from ..trainer import _advance_encoders, load_trainer_from_checkpoint

    trainer = load_trainer_from_checkpoint(checkpoint_path)
    nc = trainer.net.config
    out = []
    for ep in range(episodes):
        env = trainer.eval_env
        obs = np.asarray(env.reset(seed=90000 + ep), dtype=np.float64)
        mech = np.zeros((nc.num_mechanisms, nc.rnn_hidden))
        enc = np.zeros((8, nc.belief_size))
        omega = int(np.argmax(trainer._peek_q_min(trainer.net, obs, enc)))
        seq = []
        done = False
        while not done:
            seq.append(omega)
            with T.no_grad():
                x = Tensor(obs[None])
                b_flat, _, new_mech = trainer.net.belief_pipeline(x, Tensor(mech[None]), [omega])
                if nc.continuous_actions:
                    mu, _ = trainer.net.policy_gaussian(b_flat, [omega])
                    action = np.tanh(mu.data[0])
                else:
                    action = int(np.argmax(trainer.net.policy_logits(b_flat, [omega]).data[0]))
                new_enc = _advance_encoders(trainer.net, x, enc)
            res = env.step(action)
            obs = np.asarray(res.observation, dtype=np.float64)
            mech, enc = new_mech.data[0], new_enc
            done = res.done
            if not done and not trainer.config.freeze_termination:
                with T.no_grad():
                    b2, _, _ = trainer.net.belief_pipeline(Tensor(obs[None]), Tensor(mech[None]), [omega])
                    beta = float(trainer.net.termination_prob(b2, [omega]).data[0])
                if beta > 0.5:
                    omega = int(np.argmax(trainer._peek_q_min(trainer.net, obs, enc)))
        out.append(seq)
    return out
