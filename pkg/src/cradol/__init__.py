"""Option-critic learning with context-specific factored belief abstraction.

A self-contained laboratory: a float64 reverse-mode autodiff core, native
sparse-reward domains, the mechanism-factored option network, its off-policy
trainer, exact problem-size arithmetic, and an experiment harness with a CLI.
"""

from . import envs, sizecalc, tensor
from .checkpoint import load_checkpoint, save_checkpoint
from .network import CradolNet, NetConfig, select_option
from .optim import Adam, clip_grad_norm, soft_update
from .tensor import Tensor, backward, forward_op, no_grad
from .trainer import ReplayBuffer, Trainer, TrainerConfig, Transition

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "CradolNet",
    "NetConfig",
    "ReplayBuffer",
    "Tensor",
    "Trainer",
    "TrainerConfig",
    "Transition",
    "backward",
    "clip_grad_norm",
    "envs",
    "forward_op",
    "load_checkpoint",
    "no_grad",
    "save_checkpoint",
    "select_option",
    "sizecalc",
    "soft_update",
    "tensor",
]
