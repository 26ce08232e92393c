"""Composite kernels as sum/product expression trees.

Trees are immutable. Each leaf owns its hyperparameters; using the same leaf
object twice in a tree gives two independent parameter blocks, since
parameters are addressed by position, not identity.

>>> k = se(theta=0.5) * periodic(theta_l=3.0) + rq()
>>> k.n_params
8
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelFamily, LeafKernel, _as_points, _scalar_or_array


class KernelExpr:
    """Base class of kernel expression nodes."""

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return multiply(self, other)

    def leaves(self) -> list[LeafKernel]:
        """Leaf kernels in pre-order."""
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return self.leaves()[0].dim

    @property
    def n_params(self) -> int:
        return sum(leaf.n_params for leaf in self.leaves())

    def depth(self) -> int:
        raise NotImplementedError

    def __str__(self):
        from .expr import format_kernel

        return format_kernel(self)


@dataclass(frozen=True, eq=True)
class Leaf(KernelExpr):
    kernel: LeafKernel

    def leaves(self):
        return [self.kernel]

    def depth(self):
        return 0


@dataclass(frozen=True, eq=True)
class Sum(KernelExpr):
    left: KernelExpr
    right: KernelExpr

    def leaves(self):
        return self.left.leaves() + self.right.leaves()

    def depth(self):
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass(frozen=True, eq=True)
class Product(KernelExpr):
    left: KernelExpr
    right: KernelExpr

    def leaves(self):
        return self.left.leaves() + self.right.leaves()

    def depth(self):
        return 1 + max(self.left.depth(), self.right.depth())


def _node(k):
    if isinstance(k, LeafKernel):
        return Leaf(k)
    if not isinstance(k, KernelExpr):
        raise TypeError(f"expected a kernel expression, got {type(k).__name__}")
    return k


def _check_dims(a, b):
    if a.dim != b.dim:
        raise ValueError(f"cannot combine kernels of input dimension {a.dim} and {b.dim}")


def add(a, b) -> Sum:
    """Sum of two kernels (superposition of independent effects)."""
    a, b = _node(a), _node(b)
    _check_dims(a, b)
    return Sum(a, b)


def multiply(a, b) -> Product:
    """Pointwise product of two kernels (interaction of effects)."""
    a, b = _node(a), _node(b)
    _check_dims(a, b)
    return Product(a, b)


def _leaf(family, dim, amplitude, lengths, shared=None):
    lengths = np.broadcast_to(np.asarray(lengths, dtype=float), (dim,))
    params = tuple(lengths) + (() if shared is None else (shared,))
    return Leaf(LeafKernel(family, dim, amplitude, params))


def se(dim=1, theta=1.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.SquaredExponential, dim, amplitude, theta)


def absexp(dim=1, theta=1.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.AbsoluteExponential, dim, amplitude, theta)


def matern32(dim=1, theta=1.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.Matern32, dim, amplitude, theta)


def matern52(dim=1, theta=1.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.Matern52, dim, amplitude, theta)


def powexp(dim=1, theta=1.0, p=2.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.PowerExponential, dim, amplitude, theta, p)


def rq(dim=1, theta_l=1.0, theta_k=1.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.RationalQuadratic, dim, amplitude, theta_l, theta_k)


def periodic(dim=1, theta_l=1.0, theta_k=1.0, amplitude=1.0) -> Leaf:
    return _leaf(KernelFamily.Periodic, dim, amplitude, theta_l, theta_k)


# -- evaluation --------------------------------------------------------------


def evaluate(tree: KernelExpr, diff, grad=False):
    """Value and optional gradient of ``tree`` on a difference tensor (..., d).

    The gradient has shape ``(tree.n_params, ...)`` and is taken with respect
    to the raw (untransformed) hyperparameters in layout order.
    """
    if isinstance(tree, Leaf):
        return tree.kernel.evaluate(diff, grad)
    ka, ga = evaluate(tree.left, diff, grad)
    kb, gb = evaluate(tree.right, diff, grad)
    if isinstance(tree, Sum):
        return ka + kb, (np.concatenate([ga, gb]) if grad else None)
    if isinstance(tree, Product):
        return ka * kb, (np.concatenate([ga * kb, ka * gb]) if grad else None)
    raise TypeError(f"unknown node type {type(tree).__name__}")


def kernel_matrix(tree: KernelExpr, X1, X2=None, grad=False):
    """Cross-covariance ``K[i, j] = k(X1[i], X2[j])`` (and its gradient tensor)."""
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = X1 if X2 is None else np.atleast_2d(np.asarray(X2, dtype=float))
    if X1.shape[1] != tree.dim or X2.shape[1] != tree.dim:
        raise ValueError(f"inputs must have {tree.dim} columns")
    return evaluate(tree, X1[:, None, :] - X2[None, :, :], grad)


def kernel_diag(tree: KernelExpr, X) -> np.ndarray:
    """``k(x, x)`` for each row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return evaluate(tree, np.zeros_like(X))[0]


def eval_expr(tree: KernelExpr, x, x2):
    return _scalar_or_array(evaluate(tree, _as_points(x, x2, tree.dim))[0])


def grad_expr(tree: KernelExpr, x, x2) -> np.ndarray:
    return evaluate(tree, _as_points(x, x2, tree.dim), grad=True)[1]


# -- hyperparameter layout ---------------------------------------------------

DEFAULT_BOUNDS = (1e-3, 1e3)
PERIODIC_LENGTH_BOUNDS = (1e-2, 1e2)
EXPONENT_BOUNDS = (0.1, 2.0)


def default_bounds(family: KernelFamily, name: str) -> tuple[float, float]:
    if name == "p":
        return EXPONENT_BOUNDS
    if family is KernelFamily.Periodic and name.startswith("theta_l"):
        return PERIODIC_LENGTH_BOUNDS
    return DEFAULT_BOUNDS


@dataclass(frozen=True)
class HyperparameterLayout:
    """Flattened hyperparameters of a tree, in pre-order.

    ``paths`` look like ``"1.theta_l[0]"``: leaf index, then parameter name.
    ``log_scale[i]`` is True where the optimizer works on ``log(value)``.
    """

    paths: tuple
    lower: np.ndarray
    upper: np.ndarray
    log_scale: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.paths)

    @property
    def transforms(self) -> list[str]:
        return ["log" if t else "identity" for t in self.log_scale]

    def to_unconstrained(self, values=None) -> np.ndarray:
        v = self.values if values is None else np.asarray(values, dtype=float)
        return np.where(self.log_scale, np.log(v), v)

    def from_unconstrained(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.where(self.log_scale, np.exp(z), z)

    def unconstrained_bounds(self):
        return self.to_unconstrained(self.lower), self.to_unconstrained(self.upper)

    def with_values(self, values) -> "HyperparameterLayout":
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise ValueError(f"expected {len(self)} values, got shape {values.shape}")
        return HyperparameterLayout(self.paths, self.lower, self.upper, self.log_scale, values)


def gather(tree: KernelExpr, bounds: dict | None = None) -> HyperparameterLayout:
    """Flatten the hyperparameters of ``tree``.

    ``bounds`` optionally maps paths to ``(lower, upper)`` overrides.
    """
    bounds = dict(bounds or {})
    paths, lower, upper, log_scale, values = [], [], [], [], []
    for i, leaf in enumerate(tree.leaves()):
        for name, value in zip(leaf.param_names(), leaf.values()):
            path = f"{i}.{name}"
            lo, hi = bounds.pop(path, default_bounds(leaf.family, name))
            if not lo < hi:
                raise ValueError(f"empty bounds for {path}: [{lo}, {hi}]")
            paths.append(path)
            lower.append(lo)
            upper.append(hi)
            log_scale.append(name != "p")
            values.append(value)
    if bounds:
        raise ValueError(f"bounds given for unknown parameters: {sorted(bounds)}")
    log_scale = np.array(log_scale, dtype=bool)
    lower = np.array(lower, dtype=float)
    if np.any(lower[log_scale] <= 0):
        raise ValueError("lower bounds of positive parameters must be > 0")
    return HyperparameterLayout(
        tuple(paths), lower, np.array(upper, dtype=float), log_scale, np.array(values)
    )


def _scatter(tree, values, pos):
    if isinstance(tree, Leaf):
        n = tree.kernel.n_params
        return Leaf(tree.kernel.with_values(values[pos : pos + n])), pos + n
    left, pos = _scatter(tree.left, values, pos)
    right, pos = _scatter(tree.right, values, pos)
    return type(tree)(left, right), pos


def scatter(tree: KernelExpr, layout) -> KernelExpr:
    """Copy of ``tree`` with hyperparameters taken from ``layout`` (or a plain vector)."""
    if isinstance(layout, HyperparameterLayout):
        expected = gather(tree).paths
        if layout.paths != expected:
            raise ValueError("layout does not match the tree structure")
        values = layout.values
    else:
        values = np.asarray(layout, dtype=float)
        if values.shape != (tree.n_params,):
            raise ValueError(f"expected {tree.n_params} values, got shape {values.shape}")
    return _scatter(tree, values, 0)[0]
