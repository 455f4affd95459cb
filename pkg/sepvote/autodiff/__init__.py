"""Minimal reverse-mode automatic differentiation over dense numpy tensors."""

from sepvote.autodiff.gradcheck import GradCheckReport, grad_check
from sepvote.autodiff.init import constant_init, he_normal_init
from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Node, Tape, Tensor, active_tape, backward, record

__all__ = [
    "GradCheckReport",
    "Node",
    "Rng",
    "Tape",
    "Tensor",
    "active_tape",
    "backward",
    "constant_init",
    "grad_check",
    "he_normal_init",
    "record",
]
