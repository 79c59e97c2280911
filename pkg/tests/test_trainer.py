"""Training machinery: replay, TD targets, the four losses, determinism."""

import numpy as np
import pytest

from cradol import envs
from cradol.network import NetConfig, onehot
from cradol.tensor import Tensor, no_grad
from cradol.trainer import ReplayBuffer, Trainer, TrainerConfig, read_curve_csv, write_curve_csv


def make_trainer(domain="empty6", seed=0, **cfg_kw):
    probe = envs.make(domain)
    nc_kw = {}
    for key in ("num_options", "num_mechanisms", "top_k", "value_size", "rnn_hidden", "belief_size"):
        if key in cfg_kw:
            nc_kw[key] = cfg_kw.pop(key)
    nc = NetConfig(
        obs_size=probe.observation_size,
        action_size=probe.action_size,
        continuous_actions=probe.continuous,
        **nc_kw,
    )
    defaults = dict(total_steps=0, warmup_steps=50, batch_size=16, buffer_capacity=2000, eval_episodes=2)
    defaults.update(cfg_kw)
    return Trainer(nc, TrainerConfig(**defaults), domain=domain, seed=seed)


def fill_buffer(trainer, steps):
    trainer.ensure_started()
    for _ in range(steps):
        trainer.collect_step()


# ---------------------------------------------------------------------------
# replay buffer


def test_replay_fifo_evicts_oldest():
    buf = ReplayBuffer(5, obs_size=2, num_mechanisms=1, rnn_hidden=1, belief_size=2, action_size=3, continuous=False)
    from cradol.trainer import Transition

    for k in range(6):
        buf.push(
            Transition(
                x=np.full(2, float(k)), omega=0, action=0, reward=0.0,
                x2=np.zeros(2), done=False, mech=np.zeros((1, 1)), enc=np.zeros((8, 2)),
            )
        )
    assert len(buf) == 5
    stored_firsts = {float(buf.x[i][0]) for i in range(5)}
    assert 0.0 not in stored_firsts  # the first push has been evicted
    assert stored_firsts == {1.0, 2.0, 3.0, 4.0, 5.0}


def test_replay_sampling_seeded_and_uniformish():
    buf = ReplayBuffer(100, 1, 1, 1, 1, 2, False)
    from cradol.trainer import Transition

    for k in range(100):
        buf.push(Transition(np.array([float(k)]), 0, 0, 0.0, np.zeros(1), False, np.zeros((1, 1)), np.zeros((8, 1))))
    rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
    b1, b2 = buf.sample(32, rng1), buf.sample(32, rng2)
    np.testing.assert_array_equal(b1["x"], b2["x"])
    counts = np.zeros(100)
    rng = np.random.default_rng(1)
    for _ in range(200):
        counts[buf.sample(50, rng)["x"][:, 0].astype(int)] += 1
    assert counts.min() > 0  # every slot reachable


def test_empty_buffer_sampling_rejected():
    buf = ReplayBuffer(10, 1, 1, 1, 1, 2, False)
    with pytest.raises(ValueError):
        buf.sample(4, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# collection


def test_first_snapshot_is_zero_state():
    tr = make_trainer()
    tr.ensure_started()
    t0 = tr.collect_step()
    np.testing.assert_array_equal(t0.mech, 0.0)
    np.testing.assert_array_equal(t0.enc, 0.0)


def test_snapshots_are_prestep_states():
    tr = make_trainer()
    fill_buffer(tr, 30)
    # replaying the stored step from the stored states must land on the next
    # stored snapshot whenever the episode did not reset in between
    i = 5
    x = tr.buffer.x[i][None]
    with no_grad():
        _, _, mech_after = tr.net.belief_pipeline(
            Tensor(x), Tensor(tr.buffer.mech[i][None]), np.array([tr.buffer.omega[i]])
        )
    if not tr.buffer.done[i]:
        np.testing.assert_allclose(mech_after.data[0], tr.buffer.mech[i + 1], atol=1e-12)


def test_option_constant_when_termination_forced_off():
    tr = make_trainer(seed=3)
    tr.net.params["beta.b"].data[:] = -1000.0  # beta ~ 0: options never end
    fill_buffer(tr, 300)
    omegas = tr.buffer.omega[:300]
    dones = tr.buffer.done[:300]
    for k in range(299):
        if not dones[k]:
            assert omegas[k + 1] == omegas[k]


def test_option_reselected_every_step_when_beta_forced_on():
    tr = make_trainer(seed=3, epsilon_start=1.0, epsilon_end=1.0)
    tr.net.params["beta.b"].data[:] = 1000.0  # beta ~ 1: terminate every step
    fill_buffer(tr, 300)
    omegas = tr.buffer.omega[:300]
    dones = tr.buffer.done[:300]
    changes = sum(
        1 for k in range(299) if not dones[k] and omegas[k + 1] != omegas[k]
    )
    live = sum(1 for k in range(299) if not dones[k])
    # uniform reselection over 3 options changes the option ~2/3 of the time
    assert changes > 0.4 * live


def test_collection_deterministic_across_trainers():
    t1, t2 = make_trainer(seed=11), make_trainer(seed=11)
    fill_buffer(t1, 120)
    fill_buffer(t2, 120)
    np.testing.assert_array_equal(t1.buffer.x[:120], t2.buffer.x[:120])
    np.testing.assert_array_equal(t1.buffer.action[:120], t2.buffer.action[:120])
    np.testing.assert_array_equal(t1.buffer.omega[:120], t2.buffer.omega[:120])
    np.testing.assert_array_equal(t1.buffer.reward[:120], t2.buffer.reward[:120])


def test_epsilon_schedule_linear_then_flat():
    tr = make_trainer(total_steps=1000, epsilon_start=1.0, epsilon_end=0.05, epsilon_frac=0.2)
    tr.env_steps = 0
    assert tr._epsilon() == 1.0
    tr.env_steps = 100  # halfway through the 200-step ramp
    assert tr._epsilon() == pytest.approx(0.525)
    tr.env_steps = 200
    assert tr._epsilon() == pytest.approx(0.05)
    tr.env_steps = 900
    assert tr._epsilon() == pytest.approx(0.05)


# ---------------------------------------------------------------------------
# TD target branches


def sample_batch(tr, n=12):
    return tr.buffer.sample(n, np.random.default_rng(5))


def min_twin_next_q(tr, batch):
    """Independent recomputation of the target twins' next-state values."""
    with no_grad():
        x, x2 = Tensor(batch["x"]), Tensor(batch["x2"])
        enc = batch["enc"]
        h = Tensor(np.swapaxes(enc[:, 0:2], 0, 1))
        c = Tensor(np.swapaxes(enc[:, 2:4], 0, 1))
        _, h1, c1 = tr.target.encode_q_omega(x, h, c)
        b2, _, _ = tr.target.encode_q_omega(x2, h1, c1)
        q = tr.target.q_omega(b2).data
    return np.minimum(q[0], q[1])


def test_target_gamma_zero_collapses_to_reward():
    tr = make_trainer()
    tr.config.gamma = 0.0
    fill_buffer(tr, 60)
    batch = sample_batch(tr)
    pack = tr._target_pack(batch)
    np.testing.assert_array_equal(pack["y"], batch["reward"])


def test_target_continuation_branch_beta_zero():
    tr = make_trainer()
    fill_buffer(tr, 60)
    tr.net.params["beta.b"].data[:] = -1000.0  # beta(b') == 0 exactly
    batch = sample_batch(tr)
    pack = tr._target_pack(batch)
    qmin = min_twin_next_q(tr, batch)
    q_at = qmin[np.arange(len(batch["omega"])), batch["omega"]]
    expected = batch["reward"] + tr.config.gamma * (1.0 - batch["done"]) * q_at
    np.testing.assert_allclose(pack["y"], expected, rtol=1e-12)


def test_target_switch_branch_beta_one():
    tr = make_trainer()
    fill_buffer(tr, 60)
    tr.net.params["beta.b"].data[:] = 1000.0  # beta(b') == 1 exactly
    batch = sample_batch(tr)
    pack = tr._target_pack(batch)
    vbar = min_twin_next_q(tr, batch).max(axis=1)
    expected = batch["reward"] + tr.config.gamma * (1.0 - batch["done"]) * vbar
    np.testing.assert_allclose(pack["y"], expected, rtol=1e-12)


def test_target_terminal_transition_is_reward_only():
    tr = make_trainer()
    fill_buffer(tr, 200)
    batch = sample_batch(tr, 64)
    batch["done"] = np.ones_like(batch["done"])
    pack = tr._target_pack(batch)
    np.testing.assert_array_equal(pack["y"], batch["reward"])


def test_target_arithmetic_example():
    # gamma=0.95, r=0, U=1 -> y = 0.95
    tr = make_trainer()
    fill_buffer(tr, 60)
    batch = sample_batch(tr, 4)
    pack = tr._target_pack(batch)
    u = pack["u"]
    manual = batch["reward"] + 0.95 * (1.0 - batch["done"]) * u
    np.testing.assert_allclose(pack["y"], manual, rtol=1e-12)
    fake_y = 0.0 + 0.95 * 1.0
    assert fake_y == pytest.approx(0.95)


def test_intra_q_descends_on_frozen_target():
    tr = make_trainer()
    fill_buffer(tr, 120)
    batch = sample_batch(tr, 32)
    pack = tr._target_pack(batch)
    first = tr.update_intra_q(batch, pack)
    second_loss_value = tr.compute_losses(batch)["intra_q"]
    assert second_loss_value <= first + 1e-12


# ---------------------------------------------------------------------------
# policy and termination updates


def policy_probs(tr, batch):
    with no_grad():
        b_flat, _, _ = tr.net.belief_pipeline(Tensor(batch["x"]), Tensor(batch["mech"]), batch["omega"])
        logits = tr.net.policy_logits(b_flat, batch["omega"]).data
    z = logits - logits.max(axis=1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=1, keepdims=True)


def test_policy_moves_toward_high_value_action():
    # alpha=0, value one-hot on action 2: its probability must rise
    tr = make_trainer(entropy_weight=0.0, seed=2)
    fill_buffer(tr, 80)
    batch = sample_batch(tr, 32)
    target_action = 2
    for name in ("qu.h1", "qu.b1", "qu.h2"):
        tr.net.params[name].data[:] = 0.0
    tr.net.params["qu.b2"].data[:] = 0.0
    tr.net.params["qu.b2"].data[:, :, target_action] = 5.0  # q one-hot on a*
    before = policy_probs(tr, batch)[:, target_action].mean()
    for _ in range(5):
        tr.update_intra_policy(batch)
    after = policy_probs(tr, batch)[:, target_action].mean()
    assert after > before


def test_policy_pure_entropy_pushes_toward_uniform():
    tr = make_trainer(entropy_weight=0.5, seed=2)
    fill_buffer(tr, 80)
    batch = sample_batch(tr, 32)
    for name in ("qu.h1", "qu.b1", "qu.h2", "qu.b2"):
        tr.net.params[name].data[:] = 0.0  # identical values across actions
    ent_before = -(policy_probs(tr, batch) * np.log(policy_probs(tr, batch) + 1e-12)).sum(axis=1).mean()
    for _ in range(10):
        tr.update_intra_policy(batch)
    ent_after = -(policy_probs(tr, batch) * np.log(policy_probs(tr, batch) + 1e-12)).sum(axis=1).mean()
    assert ent_after >= ent_before - 1e-9


def test_policy_gradient_matches_finite_differences():
    tr = make_trainer(num_mechanisms=2, top_k=1, value_size=4, rnn_hidden=2, belief_size=4, batch_size=4)
    fill_buffer(tr, 60)
    batch = tr.buffer.sample(4, np.random.default_rng(0))
    from cradol import tensor as T

    loss = tr._loss_intra_policy(batch)
    T.backward(loss)
    p = tr.net.params["pi.w"]
    analytic = p.grad.copy()

    def f(vals):
        orig = p.data.copy()
        p.data[:] = vals
        with no_grad():
            val = tr._loss_intra_policy(batch).item()
        p.data[:] = orig
        return val

    from test_tensor import numeric_grad, rel_err

    fd = numeric_grad(f, p.data.copy())
    assert rel_err(analytic, fd) < 1e-5


def beta_values(tr, batch, pack):
    with no_grad():
        return tr.net.termination_prob(Tensor(pack["b2_flat"]), batch["omega"]).data


def test_termination_zero_advantage_zero_gradient():
    tr = make_trainer()
    fill_buffer(tr, 60)
    batch = sample_batch(tr, 16)
    pack = tr._target_pack(batch)
    pack["advantage"] = np.zeros_like(pack["advantage"])
    before = tr.net.params["beta.w"].data.copy()
    tr.update_termination(batch, pack)
    np.testing.assert_array_equal(tr.net.params["beta.w"].data, before)


def test_termination_sign_negative_advantage_raises_beta():
    # disadvantaged option (advantage < 0): descent on mean(beta * adv) raises beta
    tr = make_trainer()
    fill_buffer(tr, 60)
    batch = sample_batch(tr, 16)
    pack = tr._target_pack(batch)
    pack["advantage"] = np.full_like(pack["advantage"], -1.0)
    before = beta_values(tr, batch, pack).mean()
    tr.update_termination(batch, pack)
    after = beta_values(tr, batch, pack).mean()
    assert after > before


def test_termination_sign_positive_advantage_lowers_beta():
    tr = make_trainer()
    fill_buffer(tr, 60)
    batch = sample_batch(tr, 16)
    pack = tr._target_pack(batch)
    pack["advantage"] = np.full_like(pack["advantage"], +1.0)
    before = beta_values(tr, batch, pack).mean()
    tr.update_termination(batch, pack)
    after = beta_values(tr, batch, pack).mean()
    assert after < before


def test_pack_advantage_never_positive():
    # advantage = min-twin Q(omega) - max over options of min-twin Q
    tr = make_trainer()
    fill_buffer(tr, 60)
    pack = tr._target_pack(sample_batch(tr, 32))
    assert (pack["advantage"] <= 1e-12).all()


# ---------------------------------------------------------------------------
# gradient isolation across the four updates


def snapshot(net):
    return {k: v.data.copy() for k, v in net.params.items()}


def changed_groups(before, after):
    groups = set()
    for k in before:
        if not np.array_equal(before[k], after[k]):
            if k.startswith(("table", "value", "mech", "comm", "pi.")):
                groups.add("policy")
            elif k.startswith("beta."):
                groups.add("termination")
            elif k.startswith("qo."):
                groups.add("q_omega")
            elif k.startswith("qu."):
                groups.add("q_u")
    return groups


@pytest.mark.parametrize(
    "method,expected",
    [
        ("update_inter_q", {"q_omega"}),
        ("update_intra_q", {"q_u"}),
        ("update_intra_policy", {"policy"}),
        ("update_termination", {"termination"}),
    ],
)
def test_each_update_touches_only_its_group(method, expected):
    tr = make_trainer(seed=4)
    fill_buffer(tr, 80)
    batch = sample_batch(tr, 16)
    before = snapshot(tr.net)
    getattr(tr, method)(batch)
    assert changed_groups(before, snapshot(tr.net)) == expected
    # and no stray gradients remain anywhere
    for name, p in tr.net.params.items():
        assert p.grad is None, f"leftover gradient on {name}"


def test_continuous_policy_update_leaves_q_u_params_untouched():
    tr = make_trainer(domain="reacher", seed=4)
    fill_buffer(tr, 80)
    batch = sample_batch(tr, 16)
    before = snapshot(tr.net)
    tr.update_intra_policy(batch)
    assert changed_groups(before, snapshot(tr.net)) == {"policy"}


def test_losses_finite_over_many_random_weight_draws():
    tr = make_trainer(seed=6)
    fill_buffer(tr, 60)
    batch = tr.buffer.sample(2, np.random.default_rng(0))
    rng = np.random.default_rng(99)
    for _ in range(10_000):
        for p in tr.net.params.values():
            p.data[:] = rng.standard_normal(p.data.shape) * rng.uniform(0.05, 3.0)
        losses = tr.compute_losses(batch)
        assert all(np.isfinite(v) for v in losses.values()), losses


# ---------------------------------------------------------------------------
# the outer loop


def test_train_zero_steps_single_eval_row():
    tr = make_trainer()
    rows = tr.train()
    assert len(rows) == 1 and rows[0].env_step == 0


def test_train_deterministic_bitwise(tmp_path):
    kw = dict(total_steps=600, warmup_steps=100, batch_size=16, eval_every=300, eval_episodes=2)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    make_trainer(seed=21, **kw).train(csv_path=p1)
    make_trainer(seed=21, **kw).train(csv_path=p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert b"env_step,mean_return,std_return,mean_option_switches,mean_episode_len" in p1.read_bytes()


def test_train_stop_condition_halts_early():
    tr = make_trainer(total_steps=2000, warmup_steps=100, eval_every=200)
    rows = tr.train(stop_condition=lambda rows: len(rows) >= 3)
    assert len(rows) == 3


def test_curve_csv_round_trip(tmp_path):
    tr = make_trainer(total_steps=300, warmup_steps=100, eval_every=150)
    rows = tr.train()
    path = tmp_path / "curve.csv"
    write_curve_csv(rows, path)
    back = read_curve_csv(path)
    assert back == rows


def test_checkpoint_written_and_reloadable(tmp_path):
    tr = make_trainer(total_steps=200, warmup_steps=100, eval_every=100)
    tr.train()
    path = tmp_path / "ck.bin"
    tr.save_checkpoint(path, extra={"algorithm": "cradol"})
    from cradol.trainer import load_trainer_from_checkpoint

    tr2 = load_trainer_from_checkpoint(path)
    for name in tr.net.params:
        np.testing.assert_array_equal(tr.net.params[name].data, tr2.net.params[name].data)
    assert tr2.domain == "empty6"


def test_soft_updates_move_targets_toward_online():
    tr = make_trainer(seed=8, tau=0.5)
    fill_buffer(tr, 120)
    target_before = {k: v.data.copy() for k, v in zip(
        [p.name for p in tr.target.params_q_omega()], tr.target.params_q_omega())}
    for _ in range(3):
        tr.update(sample_batch(tr, 16))
    online = {p.name: p.data for p in tr.net.params_q_omega()}
    for p in tr.target.params_q_omega():
        if not np.array_equal(target_before[p.name], p.data):
            break
    else:
        pytest.fail("targets never moved")
    for p in tr.target.params_q_omega():
        gap_now = np.abs(p.data - online[p.name]).sum()
        gap_before = np.abs(target_before[p.name] - online[p.name]).sum()
        assert gap_now <= gap_before + 1e-9


def test_update_returns_all_four_losses():
    tr = make_trainer(seed=9)
    fill_buffer(tr, 80)
    losses = tr.update(sample_batch(tr, 16))
    assert set(losses) == {"inter_q", "policy", "intra_q", "termination"}
    assert all(np.isfinite(v) for v in losses.values())


def test_empty_batch_rejected():
    tr = make_trainer()
    fill_buffer(tr, 60)
    batch = {k: v[:0] for k, v in sample_batch(tr, 4).items()}
    with pytest.raises(ValueError):
        tr.update_inter_q(batch)
    with pytest.raises(ValueError):
        tr.update_intra_q(batch)


def test_sac_mode_never_terminates_and_skips_termination_loss():
    tr = make_trainer(seed=10, freeze_termination=True, num_options=1)
    fill_buffer(tr, 150)
    assert (tr.buffer.omega[:150] == 0).all()
    assert tr.update_termination(sample_batch(tr, 8)) == 0.0
