"""Stationary base kernels with closed-form hyperparameter derivatives.

Every family here is a function of the coordinate difference ``x - x'`` only.
Length-type parameters are *inverse* length scales: larger values mean faster
decorrelation. Multi-dimensional inputs are handled as a product over
dimensions, each dimension carrying its own length parameter, while the
shape parameters of the rational quadratic, periodic and power exponential
families are shared by all dimensions.

The public ``eval_*`` functions broadcast over leading axes, so the same code
evaluates single pairs of points and full cross-covariance tensors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


class KernelFamily(str, enum.Enum):
    """Base kernel families; the value is the name used in kernel expressions."""

    SquaredExponential = "SE"
    AbsoluteExponential = "ABSEXP"
    Matern32 = "MATERN32"
    Matern52 = "MATERN52"
    PowerExponential = "POWEXP"
    RationalQuadratic = "RQ"
    Periodic = "PERIODIC"

    @classmethod
    def from_name(cls, name: str) -> "KernelFamily":
        try:
            return cls(name.upper())
        except ValueError:
            raise ValueError(f"unknown kernel family {name!r}") from None

    @property
    def per_dim_name(self) -> str:
        if self in (KernelFamily.RationalQuadratic, KernelFamily.Periodic):
            return "theta_l"
        return "theta"

    @property
    def shared_name(self) -> str | None:
        if self in (KernelFamily.RationalQuadratic, KernelFamily.Periodic):
            return "theta_k"
        if self is KernelFamily.PowerExponential:
            return "p"
        return None

    def arity(self, dim: int) -> int:
        return dim + (self.shared_name is not None)


def _as_points(x, x2, dim):
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x2.ndim == 0:
        x2 = x2[None]
    if x.shape[-1] != dim or x2.shape[-1] != dim:
        raise ValueError(
            f"point dimension mismatch: expected {dim}, got {x.shape[-1]} and {x2.shape[-1]}"
        )
    return x - x2


def _positive(name, value):
    value = np.asarray(value, dtype=float)
    if value.ndim > 1:
        raise ValueError(f"{name} must be a scalar or a vector")
    if not np.all(np.isfinite(value)) or np.any(value <= 0):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


def _theta(theta, x, x2):
    theta = np.atleast_1d(_positive("theta", theta))
    return theta, _as_points(x, x2, theta.size)


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


# -- closed forms on coordinate differences ---------------------------------
# Each ``_f_*`` takes the difference tensor ``diff`` of shape (..., d) and
# returns (k, grads) where grads has shape (n_params, ...) and follows the
# parameter order (per-dimension lengths, then the shared parameter).


def _f_se(diff, theta, grad):
    d2 = diff * diff
    k = np.exp(-np.sum(theta * d2, axis=-1))
    if not grad:
        return k, None
    return k, -np.moveaxis(d2, -1, 0) * k


def _f_powexp(diff, theta, p, grad):
    ad = np.abs(diff)
    a = ad**p
    k = np.exp(-np.sum(theta * a, axis=-1))
    if not grad:
        return k, None
    g_theta = -np.moveaxis(a, -1, 0) * k
    # |d|^p log|d| -> 0 as d -> 0
    with np.errstate(divide="ignore", invalid="ignore"):
        alog = np.where(ad > 0, a * np.log(np.where(ad > 0, ad, 1.0)), 0.0)
    g_p = -k * np.sum(theta * alog, axis=-1)
    return k, np.concatenate([g_theta, g_p[None]])


def _f_absexp(diff, theta, grad):
    ad = np.abs(diff)
    k = np.exp(-np.sum(theta * ad, axis=-1))
    if not grad:
        return k, None
    return k, -np.moveaxis(ad, -1, 0) * k


def _f_matern(diff, theta, nu, grad):
    ad = np.abs(diff)
    u = theta * ad
    if nu == 1.5:
        poly = 1.0 + SQRT3 * u
        per_dim = poly * np.exp(-SQRT3 * u)
        # d log m / du, finite at u = 0 (no 1/u term in this form)
        dlog = -3.0 * u / poly
    else:
        poly = 1.0 + SQRT5 * u + (5.0 / 3.0) * u * u
        per_dim = poly * np.exp(-SQRT5 * u)
        dlog = -(5.0 / 3.0) * u * (1.0 + SQRT5 * u) / poly
    k = np.prod(per_dim, axis=-1)
    if not grad:
        return k, None
    return k, np.moveaxis(dlog * ad, -1, 0) * k


def _f_rq(diff, theta_l, theta_k, grad):
    d2 = diff * diff
    q = 1.0 + d2 / theta_l
    logq = np.log1p(d2 / theta_l)
    k = np.exp(-theta_k * np.sum(logq, axis=-1))
    if not grad:
        return k, None
    g_l = np.moveaxis(theta_k * d2 / (theta_l * theta_l * q), -1, 0) * k
    g_k = -k * np.sum(logq, axis=-1)
    return k, np.concatenate([g_l, g_k[None]])


def _f_periodic(diff, theta_l, theta_k, grad):
    arg = diff * theta_l
    s = np.sin(arg)
    s2 = s * s
    k = np.exp(-np.sum(s2, axis=-1) / theta_k)
    if not grad:
        return k, None
    g_l = -np.moveaxis(np.sin(2.0 * arg) * diff, -1, 0) * (k / theta_k)
    g_k = k * np.sum(s2, axis=-1) / theta_k**2
    return k, np.concatenate([g_l, g_k[None]])


# -- public closed forms on point pairs -------------------------------------


def eval_se(theta, x, x2):
    """Anisotropic squared exponential ``prod_i exp(-theta_i (x_i - x2_i)^2)``."""
    theta, diff = _theta(theta, x, x2)
    return _scalar_or_array(_f_se(diff, theta, False)[0])


def eval_absexp(theta, x, x2):
    theta, diff = _theta(theta, x, x2)
    return _scalar_or_array(_f_absexp(diff, theta, False)[0])


def eval_pow_exp(theta, p, x, x2):
    """Power exponential ``prod_i exp(-theta_i |x_i - x2_i|^p)`` with ``0 < p <= 2``."""
    if not 0.0 < float(p) <= 2.0:
        raise ValueError(f"power exponential exponent must lie in (0, 2], got {p}")
    theta, diff = _theta(theta, x, x2)
    return _scalar_or_array(_f_powexp(diff, theta, float(p), False)[0])


def eval_matern(nu, theta, x, x2):
    """Matern kernel for ``nu`` in {1.5, 2.5}, as a product of 1-D Materns of ``theta_i |dx_i|``."""
    if nu not in (1.5, 2.5):
        raise ValueError(f"unsupported Matern smoothness {nu!r}; use 1.5 or 2.5")
    theta, diff = _theta(theta, x, x2)
    return _scalar_or_array(_f_matern(diff, theta, nu, False)[0])


def eval_rq(theta_l, theta_k, x, x2):
    """Rational quadratic ``prod_i (1 + (x_i - x2_i)^2 / theta_l_i)^(-theta_k)``."""
    theta_l = np.atleast_1d(_positive("theta_l", theta_l))
    theta_k = float(_positive("theta_k", theta_k))
    diff = _as_points(x, x2, theta_l.size)
    return _scalar_or_array(_f_rq(diff, theta_l, theta_k, False)[0])


def eval_periodic(theta_l, theta_k, x, x2):
    """Periodic ``prod_i exp(-sin^2((x_i - x2_i) theta_l_i) / theta_k)``.

    The period along dimension ``i`` is ``pi / theta_l_i``.
    """
    theta_l = np.atleast_1d(_positive("theta_l", theta_l))
    theta_k = float(_positive("theta_k", theta_k))
    diff = _as_points(x, x2, theta_l.size)
    return _scalar_or_array(_f_periodic(diff, theta_l, theta_k, False)[0])


# -- leaf kernels ------------------------------------------------------------


@dataclass(frozen=True)
class LeafKernel:
    """A base kernel scaled by a positive amplitude.

    Parameters
    ----------
    family : KernelFamily
    dim : int
        Input dimension.
    amplitude : float
        Value of the kernel at zero distance.
    params : tuple of float
        Per-dimension length parameters followed by the family's shared
        parameter, if any (``theta_k`` for RQ and PERIODIC, ``p`` for POWEXP).
        ``None`` selects the defaults: all ones, with ``p = 2``.
    """

    family: KernelFamily
    dim: int = 1
    amplitude: float = 1.0
    params: tuple = None

    def __post_init__(self):
        family = self.family if isinstance(self.family, KernelFamily) else KernelFamily.from_name(self.family)
        object.__setattr__(self, "family", family)
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        params = self.params
        if params is None:
            params = [1.0] * self.dim
            if family.shared_name == "p":
                params.append(2.0)
            elif family.shared_name is not None:
                params.append(1.0)
        params = tuple(float(v) for v in params)
        if len(params) != family.arity(self.dim):
            raise ValueError(
                f"{family.value} with dim={self.dim} takes {family.arity(self.dim)} "
                f"parameters, got {len(params)}"
            )
        amplitude = float(self.amplitude)
        if not np.isfinite(amplitude) or amplitude <= 0:
            raise ValueError(f"amplitude must be positive, got {amplitude}")
        for name, value in zip(self.param_names()[1:], params):
            if name == "p":
                if not 0.0 < value <= 2.0:
                    raise ValueError(f"POWEXP exponent p must lie in (0, 2], got {value}")
            elif not (np.isfinite(value) and value > 0):
                raise ValueError(f"{family.value} parameter {name} must be positive, got {value}")
        object.__setattr__(self, "amplitude", amplitude)
        object.__setattr__(self, "params", params)

    def param_names(self) -> list[str]:
        """Names of all hyperparameters, amplitude first."""
        names = ["amplitude"]
        names += [f"{self.family.per_dim_name}[{i}]" for i in range(self.dim)]
        if self.family.shared_name is not None:
            names.append(self.family.shared_name)
        return names

    @property
    def n_params(self) -> int:
        return 1 + len(self.params)

    def values(self) -> np.ndarray:
        return np.array((self.amplitude,) + self.params)

    def with_values(self, values) -> "LeafKernel":
        values = [float(v) for v in values]
        if len(values) != self.n_params:
            raise ValueError(f"expected {self.n_params} values, got {len(values)}")
        return LeafKernel(self.family, self.dim, values[0], tuple(values[1:]))

    def lengths(self) -> np.ndarray:
        return np.array(self.params[: self.dim])

    def shared(self) -> float | None:
        return self.params[self.dim] if self.family.shared_name is not None else None

    def evaluate(self, diff, grad=False):
        """Kernel value (and gradient) on a difference tensor of shape (..., dim).

        Returns ``(k, g)`` where ``g`` has shape ``(n_params, ...)`` or is None.
        """
        theta = self.lengths()
        f = self.family
        if f is KernelFamily.SquaredExponential:
            k, g = _f_se(diff, theta, grad)
        elif f is KernelFamily.AbsoluteExponential:
            k, g = _f_absexp(diff, theta, grad)
        elif f is KernelFamily.PowerExponential:
            k, g = _f_powexp(diff, theta, self.shared(), grad)
        elif f is KernelFamily.Matern32:
            k, g = _f_matern(diff, theta, 1.5, grad)
        elif f is KernelFamily.Matern52:
            k, g = _f_matern(diff, theta, 2.5, grad)
        elif f is KernelFamily.RationalQuadratic:
            k, g = _f_rq(diff, theta, self.shared(), grad)
        else:
            k, g = _f_periodic(diff, theta, self.shared(), grad)
        value = self.amplitude * k
        if not grad:
            return value, None
        return value, np.concatenate([k[None], self.amplitude * g])


def leaf_value(leaf: LeafKernel, x, x2):
    """``amplitude * k(x, x2)`` for a single pair of points (or broadcast arrays)."""
    diff = _as_points(x, x2, leaf.dim)
    return _scalar_or_array(leaf.evaluate(diff)[0])


def leaf_param_grad(leaf: LeafKernel, x, x2) -> np.ndarray:
    """Partial derivatives of ``leaf_value`` in ``leaf.param_names()`` order."""
    diff = _as_points(x, x2, leaf.dim)
    return leaf.evaluate(diff, grad=True)[1]
