"""The option-critic network with per-option mechanism selection.

Forward structure per step, for a batch of observations x and option ids w:

  1. option attention: softmax(table row of w) outer (x @ value projection),
     masked to the top-k mechanisms of that option,
  2. per-mechanism gated recurrent cells (parameters private to each
     mechanism, shared across options); inactive rows pass through,
  3. sparse communication: scaled dot-product attention where every
     mechanism is readable but only active rows take the update (residual),
  4. per-option heads on the flattened result: action policy and
     termination probability.

Two pairs of compact LSTM encoders feed twin value heads: Q over (belief,
option) for option selection, and Q over (belief, option, action) for the
intra-option policy gradient. Sharing flags swap the table, the value
projection, or the communication weights between shared and per-option
copies for ablation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import tensor as T
from .tensor import Tensor

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class NetConfig:
    """Architecture hyperparameters; defaults follow the gridworld setup."""

    obs_size: int
    action_size: int
    num_options: int = 3
    num_mechanisms: int = 4
    top_k: int = 3
    value_size: int = 32
    rnn_hidden: int = 6
    comm_key_size: int = 6
    belief_size: int = 16
    continuous_actions: bool = False
    table_shared: bool = False  # True: one table row for every option
    value_shared: bool = True  # False: per-option value projection
    comm_shared: bool = True  # False: per-option communication weights
    entropy_weight: float = 0.005

    def __post_init__(self):
        if not 1 <= self.top_k <= self.num_mechanisms:
            raise ValueError(f"need 1 <= top_k <= num_mechanisms, got {self.top_k}/{self.num_mechanisms}")
        for name in ("obs_size", "action_size", "num_options", "value_size", "rnn_hidden", "comm_key_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        # belief encoders must be a strict compression of the observation
        self.belief_size = max(2, min(self.belief_size, self.obs_size - 1))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def select_option(q_values, epsilon, rng) -> int:
    """Epsilon-greedy argmax with lowest-index tie-breaking."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    q_values = np.asarray(q_values)
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(len(q_values)))
    return int(np.argmax(q_values))


def _uniform(rng, shape, fan_in):
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, shape)


class CradolNet:
    """Parameters plus forward passes; batching is the leading axis everywhere."""

    def __init__(self, config: NetConfig, rng):
        self.config = config
        self.params = {}
        self._build(rng)

    # ------------------------------------------------------------------
    # construction

    def _add(self, name, data):
        self.params[name] = T.parameter(np.asarray(data, dtype=np.float64), name=name)

    def _build(self, rng):
        c = self.config
        n_opt, K, v, h, d, e = (
            c.num_options,
            c.num_mechanisms,
            c.value_size,
            c.rnn_hidden,
            c.comm_key_size,
            c.belief_size,
        )
        table_rows = 1 if c.table_shared else n_opt
        self._add("table", rng.uniform(-0.1, 0.1, (table_rows, K)))
        if c.value_shared:
            self._add("value", _uniform(rng, (c.obs_size, v), c.obs_size))
        else:
            self._add("value", _uniform(rng, (n_opt, c.obs_size, v), c.obs_size))
        # one gated cell per mechanism, stacked on the leading axis
        self._add("mech.wx", _uniform(rng, (K, v, 3 * h), v))
        self._add("mech.wh", _uniform(rng, (K, h, 3 * h), h))
        self._add("mech.b", np.zeros((K, 1, 3 * h)))
        comm_shape = lambda rows, cols: (rows, cols) if c.comm_shared else (n_opt, rows, cols)
        self._add("comm.q", _uniform(rng, comm_shape(h, d), h))
        self._add("comm.k", _uniform(rng, comm_shape(h, d), h))
        self._add("comm.v", _uniform(rng, comm_shape(h, h), h))

        kh = K * h
        if c.continuous_actions:
            self._add("pi.mu_w", _uniform(rng, (n_opt, kh, c.action_size), kh))
            self._add("pi.mu_b", np.zeros((n_opt, c.action_size)))
            self._add("pi.ls_w", _uniform(rng, (n_opt, kh, c.action_size), kh))
            # bias chosen so the initial policy std is 1 under the tanh bound
            ls_bias = math.atanh((0.0 - LOG_STD_MIN) / (0.5 * (LOG_STD_MAX - LOG_STD_MIN)) - 1.0)
            self._add("pi.ls_b", np.full((n_opt, c.action_size), ls_bias))
        else:
            self._add("pi.w", _uniform(rng, (n_opt, kh, c.action_size), kh))
            self._add("pi.b", np.zeros((n_opt, c.action_size)))
        self._add("beta.w", _uniform(rng, (n_opt, kh, 1), kh))
        self._add("beta.b", np.zeros(n_opt))

        # twin value heads: independent parameters stacked on a leading
        # axis of 2 so both twins evaluate in one batched pass
        qu_in = e + n_opt + (c.action_size if c.continuous_actions else 0)
        qu_out = 1 if c.continuous_actions else c.action_size
        self._add("qo.enc_wx", _uniform(rng, (2, c.obs_size, 4 * e), c.obs_size))
        self._add("qo.enc_wh", _uniform(rng, (2, e, 4 * e), e))
        self._add("qo.enc_b", np.zeros((2, 1, 4 * e)))
        self._add("qo.h1", _uniform(rng, (2, e, v), e))
        self._add("qo.b1", np.zeros((2, 1, v)))
        self._add("qo.h2", _uniform(rng, (2, v, n_opt), v))
        self._add("qo.b2", np.zeros((2, 1, n_opt)))
        self._add("qu.enc_wx", _uniform(rng, (2, c.obs_size, 4 * e), c.obs_size))
        self._add("qu.enc_wh", _uniform(rng, (2, e, 4 * e), e))
        self._add("qu.enc_b", np.zeros((2, 1, 4 * e)))
        self._add("qu.h1", _uniform(rng, (2, qu_in, v), qu_in))
        self._add("qu.b1", np.zeros((2, 1, v)))
        self._add("qu.h2", _uniform(rng, (2, v, qu_out), v))
        self._add("qu.b2", np.zeros((2, 1, qu_out)))

    # ------------------------------------------------------------------
    # parameter groups

    def _group(self, prefixes):
        return [t for n, t in self.params.items() if n.startswith(prefixes)]

    def params_policy(self):
        """Everything the intra-option policy gradient reaches."""
        return self._group(("table", "value", "mech", "comm", "pi."))

    def params_termination(self):
        return self._group(("beta.",))

    def params_q_omega(self):
        return self._group(("qo.",))

    def params_q_u(self):
        return self._group(("qu.",))

    def named_params(self):
        return {n: t.data for n, t in self.params.items()}

    def load_params(self, arrays):
        for n, t in self.params.items():
            if n not in arrays:
                raise KeyError(f"checkpoint missing parameter {n!r}")
            if arrays[n].shape != t.data.shape:
                raise ValueError(f"parameter {n!r}: shape {arrays[n].shape} != {t.data.shape}")
            np.copyto(t.data, arrays[n])

    def clone(self) -> "CradolNet":
        other = CradolNet(self.config, np.random.default_rng(0))
        other.load_params(self.named_params())
        return other

    def _p(self, name):
        return self.params[name]

    def _c(self, name):
        """Constant view of a parameter: same buffer, no gradient."""
        return Tensor(self.params[name].data)

    # ------------------------------------------------------------------
    # mechanism selection

    def attention_weights(self) -> np.ndarray:
        """softmax over each option's table row, shape (num_options, K)."""
        w = self.params["table"].data
        z = w - w.max(axis=1, keepdims=True)
        ez = np.exp(z)
        sm = ez / ez.sum(axis=1, keepdims=True)
        if self.config.table_shared:
            sm = np.repeat(sm, self.config.num_options, axis=0)
        return sm

    def mechanism_masks(self) -> np.ndarray:
        """0/1 mask of the top-k mechanisms per option, (num_options, K).

        Depends on the table alone, so a frozen table pins each option's
        active set regardless of input or time. Ties break on lowest index.
        """
        weights = self.attention_weights()
        masks = np.zeros_like(weights)
        k = self.config.top_k
        for o in range(weights.shape[0]):
            top = np.argsort(-weights[o], kind="stable")[:k]
            masks[o, top] = 1.0
        return masks

    # ------------------------------------------------------------------
    # option pipeline

    def option_attention(self, x: Tensor, omega):
        """Returns (masked attention output (B, K, v), active mask (B, K))."""
        c = self.config
        omega = np.asarray(omega, dtype=np.intp)
        B = x.shape[0]
        if omega.shape != (B,):
            raise T.ShapeError(f"omega must have shape ({B},), got {omega.shape}")
        if omega.size and (omega.min() < 0 or omega.max() >= c.num_options):
            raise ValueError(f"option id out of range [0, {c.num_options})")

        rows = np.zeros_like(omega) if c.table_shared else omega
        logits = T.row_select(self._p("table"), rows)  # (B, K)
        attn = T.softmax_rows(logits)

        if c.value_shared:
            xv = T.matmul(x, self._p("value"))  # (B, v)
        else:
            sel = T.row_select(self._p("value"), omega)  # (B, obs, v)
            xv = T.reshape(T.matmul(T.reshape(x, (B, 1, c.obs_size)), sel), (B, c.value_size))

        outer = T.mul(
            T.reshape(attn, (B, c.num_mechanisms, 1)),
            T.reshape(xv, (B, 1, c.value_size)),
        )
        mask = self.mechanism_masks()[omega]  # (B, K) constant
        h_attn = T.mul(outer, Tensor(mask[:, :, None]))
        return h_attn, mask

    def recurrent_update(self, h_attn: Tensor, prev: Tensor, mask) -> Tensor:
        """One gated-cell step per active mechanism; inactive rows untouched.

        All K cells run as one stacked batched matmul (mechanism-major
        layout internally); the blend then copies inactive rows through
        from `prev` bit-exactly.
        """
        nh = self.config.rnn_hidden
        xT = T.swap01(h_attn)  # (K, B, v)
        hT = T.swap01(prev)  # (K, B, h)
        gx = T.add(T.matmul(xT, self._p("mech.wx")), self._p("mech.b"))  # (K, B, 3h)
        gh = T.matmul(hT, self._p("mech.wh"))
        z = T.sigmoid(T.add(T.narrow(gx, 2, 0, nh), T.narrow(gh, 2, 0, nh)))
        r = T.sigmoid(T.add(T.narrow(gx, 2, nh, nh), T.narrow(gh, 2, nh, nh)))
        n = T.tanh(T.add(T.narrow(gx, 2, 2 * nh, nh), T.mul(r, T.narrow(gh, 2, 2 * nh, nh))))
        one_minus_z = T.add(1.0, T.neg(z))
        new = T.swap01(T.add(T.mul(one_minus_z, n), T.mul(z, hT)))
        return T.where_mask(np.asarray(mask)[:, :, None].astype(bool), new, prev)

    def sparse_communication(self, h_rnn: Tensor, mask, omega) -> Tensor:
        """Attention read over all mechanisms; only active rows take the update."""
        c = self.config
        B = h_rnn.shape[0]
        omega = np.asarray(omega, dtype=np.intp)
        if c.comm_shared:
            wq, wk, wv = self._p("comm.q"), self._p("comm.k"), self._p("comm.v")
        else:
            wq = T.row_select(self._p("comm.q"), omega)
            wk = T.row_select(self._p("comm.k"), omega)
            wv = T.row_select(self._p("comm.v"), omega)
        q = T.matmul(h_rnn, wq)  # (B, K, d)
        k = T.matmul(h_rnn, wk)
        v = T.matmul(h_rnn, wv)  # (B, K, h)
        scores = T.mul(T.matmul(q, T.transpose_last2(k)), 1.0 / math.sqrt(c.comm_key_size))
        upd = T.matmul(T.softmax_rows(scores), v)
        return T.where_mask(
            np.asarray(mask)[:, :, None].astype(bool), T.add(upd, h_rnn), h_rnn
        )

    def belief_pipeline(self, x: Tensor, prev_mech: Tensor, omega):
        """Full option pathway. Returns (b_flat (B, K*h), b (B, K, h), new_mech)."""
        c = self.config
        h_attn, mask = self.option_attention(x, omega)
        new_mech = self.recurrent_update(h_attn, prev_mech, mask)
        b = self.sparse_communication(new_mech, mask, omega)
        b_flat = T.reshape(b, (x.shape[0], c.num_mechanisms * c.rnn_hidden))
        return b_flat, b, new_mech

    # ------------------------------------------------------------------
    # heads

    def _option_linear(self, wname, bname, feats: Tensor, omega):
        B = feats.shape[0]
        w = T.row_select(self._p(wname), omega)  # (B, in, out)
        out = T.reshape(
            T.matmul(T.reshape(feats, (B, 1, feats.shape[1])), w), (B, w.shape[2])
        )
        return T.add(out, T.row_select(self._p(bname), omega))

    def policy_logits(self, b_flat: Tensor, omega) -> Tensor:
        if self.config.continuous_actions:
            raise ValueError("discrete head requested on a continuous-action config")
        return self._option_linear("pi.w", "pi.b", b_flat, omega)

    def policy_gaussian(self, b_flat: Tensor, omega):
        """Mean and bounded log-std for the squashed-Gaussian torque policy."""
        mu = self._option_linear("pi.mu_w", "pi.mu_b", b_flat, omega)
        raw = self._option_linear("pi.ls_w", "pi.ls_b", b_flat, omega)
        half = 0.5 * (LOG_STD_MAX - LOG_STD_MIN)
        log_std = T.add(LOG_STD_MIN + half, T.mul(half, T.tanh(raw)))
        return mu, log_std

    def termination_prob(self, b_flat: Tensor, omega) -> Tensor:
        B = b_flat.shape[0]
        w = T.row_select(self._p("beta.w"), omega)  # (B, K*h, 1)
        out = T.reshape(T.matmul(T.reshape(b_flat, (B, 1, b_flat.shape[1])), w), (B,))
        return T.sigmoid(T.add(out, T.row_select(self._p("beta.b"), omega)))

    # ------------------------------------------------------------------
    # belief encoders + twin value heads

    def _lstm_cell(self, prefix, x, h, c):
        """x: (B, in); h, c: (2, B, e). Both twins advance in one pass."""
        e = self.config.belief_size
        gates = T.add(
            T.add(T.matmul(x, self._p(f"{prefix}.enc_wx")), T.matmul(h, self._p(f"{prefix}.enc_wh"))),
            self._p(f"{prefix}.enc_b"),
        )
        i = T.sigmoid(T.narrow(gates, 2, 0, e))
        f = T.sigmoid(T.narrow(gates, 2, e, e))
        g = T.tanh(T.narrow(gates, 2, 2 * e, e))
        o = T.sigmoid(T.narrow(gates, 2, 3 * e, e))
        c_new = T.add(T.mul(f, c), T.mul(i, g))
        h_new = T.mul(o, T.tanh(c_new))
        return h_new, c_new

    def encode_q_omega(self, x: Tensor, h: Tensor, c: Tensor):
        """One twin-stacked LSTM step of the option-value encoders.

        Returns (belief, h', c'), each (2, B, belief_size).
        """
        h_new, c_new = self._lstm_cell("qo", x, h, c)
        return h_new, h_new, c_new

    def encode_q_u(self, x: Tensor, h: Tensor, c: Tensor):
        h_new, c_new = self._lstm_cell("qu", x, h, c)
        return h_new, h_new, c_new

    def q_omega(self, belief: Tensor) -> Tensor:
        """Twin option values: (2, B, num_options) from beliefs (2, B, e)."""
        hidden = T.relu(T.add(T.matmul(belief, self._p("qo.h1")), self._p("qo.b1")))
        return T.add(T.matmul(hidden, self._p("qo.h2")), self._p("qo.b2"))

    def q_u(self, belief: Tensor, omega_onehot, action: Tensor = None, frozen=False) -> Tensor:
        """Twin auxiliary values.

        Discrete: (2, B, action_size) from (belief, option). Continuous:
        (2, B, 1) from (belief, option, action). omega_onehot is a constant
        (B, num_options) array, broadcast across twins. frozen=True reads
        the parameters as constants so gradients stop at them but still
        flow through the inputs.
        """
        P = self._c if frozen else self._p
        B = belief.shape[1]
        hot2 = np.broadcast_to(np.asarray(omega_onehot), (2, B, self.config.num_options))
        parts = [belief, Tensor(hot2)]
        if self.config.continuous_actions:
            if action is None:
                raise ValueError("continuous q_u needs the action input")
            if action.ndim == 2:  # lift (B, A) into both twin rows
                action = T.add(action, Tensor(np.zeros((2, 1, 1))))
            parts.append(action)
        elif action is not None:
            raise ValueError("discrete q_u scores all actions; pass no action")
        inp = T.concat(parts, axis=2)
        hidden = T.relu(T.add(T.matmul(inp, P("qu.h1")), P("qu.b1")))
        return T.add(T.matmul(hidden, P("qu.h2")), P("qu.b2"))


def gaussian_sample(mu: Tensor, log_std: Tensor, rng):
    """Reparameterized tanh-squashed sample: (action, log-prob per row)."""
    xi = rng.standard_normal(mu.shape)
    std = T.exp(log_std)
    u = T.add(mu, T.mul(std, Tensor(xi)))
    a = T.tanh(u)
    # log N(u; mu, std) with u = mu + std*xi, minus the tanh volume correction
    base = T.add(T.mul(-0.5, Tensor(xi * xi)), T.add(T.neg(log_std), -0.5 * LOG_2PI))
    corr = T.log(T.add(1e-6, T.add(1.0, T.neg(T.mul(a, a)))))
    logp = T.sum_(T.add(base, T.neg(corr)), axis=1)
    return a, logp


def onehot(indices, width) -> np.ndarray:
    out = np.zeros((len(indices), width))
    out[np.arange(len(indices)), np.asarray(indices, dtype=np.intp)] = 1.0
    return out
