"""Gaussian process regression with composable kernels."""

__version__ = "0.1.0"

from .algebra import (
    HyperparameterLayout,
    KernelExpr,
    Leaf,
    Product,
    Sum,
    absexp,
    add,
    eval_expr,
    gather,
    grad_expr,
    kernel_matrix,
    matern32,
    matern52,
    multiply,
    periodic,
    powexp,
    rq,
    scatter,
    se,
)
from .data import Dataset, load_csv, split_tail
from .expr import KernelSyntaxError, format_kernel, parse_kernel
from .gp import (
    FitOptions,
    FittedGP,
    Prediction,
    condition,
    fit,
    gram,
    load_model,
    log_marginal_likelihood,
    lml_gradient,
    predict,
    save_model,
)
from .kernels import KernelFamily, LeafKernel, leaf_param_grad, leaf_value
