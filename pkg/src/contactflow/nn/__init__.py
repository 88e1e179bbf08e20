from .tensor import Parameter, Tensor, concat, im2col, sigmoid, silu, softmax, tensor
from .layers import (
    AdaLayerNorm,
    Conv2d,
    FourierTimeEmbedding,
    LayerNorm,
    Linear,
    Mlp,
    Module,
    MultiHeadAttention,
    PositionalEmbedding,
)
from .optim import AdamW, NonFiniteGradError, clip_grad_norm, cosine_lr
from .checkpoint import load_arrays, load_module, save_arrays, save_module

__all__ = [
    "Tensor", "Parameter", "tensor", "concat", "sigmoid", "silu", "softmax", "im2col",
    "Module", "Linear", "Mlp", "LayerNorm", "AdaLayerNorm", "MultiHeadAttention",
    "FourierTimeEmbedding", "Conv2d", "PositionalEmbedding",
    "AdamW", "NonFiniteGradError", "clip_grad_norm", "cosine_lr",
    "save_arrays", "load_arrays", "save_module", "load_module",
]
