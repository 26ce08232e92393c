"""Reference implementations used only by the tests.

Nothing here calls into ``kernelgp`` numerics: leaf kernels are re-derived
from their closed forms in mpmath, trees are walked by a separate
interpreter, and GP quantities use explicit inverses and determinants.
"""

import math

import mpmath as mp
import numpy as np

from kernelgp.algebra import Leaf, Product, Sum
from kernelgp.kernels import KernelFamily, LeafKernel

mp.mp.dps = 40

FAMILIES = list(KernelFamily)


def mp_leaf(family, amplitude, params, x, x2):
    """Closed-form leaf kernel in extended precision."""
    values = [mp.mpf(float(amplitude))] + [mp.mpf(float(p)) for p in params]
    return _mp_leaf(family, values, x, x2)


def _mp_leaf(family, values, x, x2):
    amp, params = values[0], values[1:]
    x = np.atleast_1d(x)
    x2 = np.atleast_1d(x2)
    d = x.size
    diffs = [mp.mpf(float(a)) - mp.mpf(float(b)) for a, b in zip(x, x2)]
    lengths = params[:d]
    value = mp.mpf(1)
    if family is KernelFamily.SquaredExponential:
        for t, r in zip(lengths, diffs):
            value *= mp.exp(-t * r**2)
    elif family is KernelFamily.AbsoluteExponential:
        for t, r in zip(lengths, diffs):
            value *= mp.exp(-t * abs(r))
    elif family is KernelFamily.PowerExponential:
        for t, r in zip(lengths, diffs):
            value *= mp.exp(-t * abs(r) ** params[d])
    elif family is KernelFamily.Matern32:
        for t, r in zip(lengths, diffs):
            u = mp.sqrt(3) * t * abs(r)
            value *= (1 + u) * mp.exp(-u)
    elif family is KernelFamily.Matern52:
        for t, r in zip(lengths, diffs):
            u = mp.sqrt(5) * t * abs(r)
            value *= (1 + u + u**2 / 3) * mp.exp(-u)
    elif family is KernelFamily.RationalQuadratic:
        for t, r in zip(lengths, diffs):
            value *= (1 + r**2 / t) ** (-params[d])
    elif family is KernelFamily.Periodic:
        for t, r in zip(lengths, diffs):
            value *= mp.exp(-mp.sin(r * t) ** 2 / params[d])
    else:
        raise AssertionError(family)
    return amp * value


def fd_leaf_grad(leaf: LeafKernel, x, x2, h=1e-6):
    """Central differences (step h) of the mpmath closed form, amplitude first."""
    base = [mp.mpf(v) for v in [leaf.amplitude, *leaf.params]]
    out = []
    for i in range(len(base)):
        up, dn = list(base), list(base)
        up[i] += mp.mpf(h)
        dn[i] -= mp.mpf(h)
        diff = _mp_leaf(leaf.family, up, x, x2) - _mp_leaf(leaf.family, dn, x, x2)
        out.append(float(diff / (2 * mp.mpf(h))))
    return np.array(out)


def ref_eval(tree, x, x2):
    """Independent tree walk over the mpmath leaf forms."""
    if isinstance(tree, Leaf):
        leaf = tree.kernel
        return float(mp_leaf(leaf.family, leaf.amplitude, leaf.params, x, x2))
    a = ref_eval(tree.left, x, x2)
    b = ref_eval(tree.right, x, x2)
    if isinstance(tree, Sum):
        return a + b
    if isinstance(tree, Product):
        return a * b
    raise AssertionError(type(tree))


def _mp_tree(tree, values, pos, x, x2):
    if isinstance(tree, Leaf):
        n = tree.kernel.n_params
        return _mp_leaf(tree.kernel.family, values[pos : pos + n], x, x2), pos + n
    a, pos = _mp_tree(tree.left, values, pos, x, x2)
    b, pos = _mp_tree(tree.right, values, pos, x, x2)
    return (a + b if isinstance(tree, Sum) else a * b), pos


def fd_tree_grad(tree, x, x2, h=1e-6):
    """Central differences of the whole tree in mpmath, in layout order."""
    base = [mp.mpf(float(v)) for leaf in tree.leaves() for v in [leaf.amplitude, *leaf.params]]
    out = []
    for i in range(len(base)):
        up, dn = list(base), list(base)
        up[i] += mp.mpf(h)
        dn[i] -= mp.mpf(h)
        diff = _mp_tree(tree, up, 0, x, x2)[0] - _mp_tree(tree, dn, 0, x, x2)[0]
        out.append(float(diff / (2 * mp.mpf(h))))
    return np.array(out)


def mp_lml(tree, values, nugget, Xs, ys, jitter=1e-10):
    """Concentrated lml in mpmath; ``values`` follow the layout order."""
    n = len(ys)
    R = mp.matrix(n, n)
    for i in range(n):
        for j in range(i + 1):
            R[i, j] = R[j, i] = _mp_tree(tree, values, 0, Xs[i], Xs[j])[0]
        R[i, i] += nugget + mp.mpf(jitter)
    y = mp.matrix([mp.mpf(float(v)) for v in ys])
    alpha = mp.lu_solve(R, y)
    sigma2 = sum(y[i] * alpha[i] for i in range(n)) / n
    return -n * mp.log(2 * mp.pi * sigma2) / 2 - mp.log(mp.det(R)) / 2 - mp.mpf(n) / 2


def mp_lml_gradient(tree, nugget, Xs, ys, jitter=1e-10, h="1e-15"):
    """Central differences of :func:`mp_lml` in the optimizer's coordinates.

    Positive parameters are stepped in log space, exponents linearly; the last
    entry is the derivative with respect to log(nugget).
    """
    from kernelgp.algebra import gather

    layout = gather(tree)
    h = mp.mpf(h)
    base = [mp.mpf(float(v)) for v in layout.values] + [mp.mpf(float(nugget))]
    out = []
    for i in range(len(base)):
        up, dn = list(base), list(base)
        if i < len(layout) and not layout.log_scale[i]:
            up[i] += h
            dn[i] -= h
        else:
            up[i] *= mp.exp(h)
            dn[i] *= mp.exp(-h)
        diff = mp_lml(tree, up[:-1], up[-1], Xs, ys, jitter) - mp_lml(tree, dn[:-1], dn[-1], Xs, ys, jitter)
        out.append(float(diff / (2 * h)))
    return np.array(out)


def ref_gram(tree, X1, X2=None):
    X2 = X1 if X2 is None else X2
    return np.array([[ref_eval(tree, a, b) for b in X2] for a in X1])


def dense_lml(K, ys, nugget, jitter):
    """Concentrated lml via an explicit inverse and determinant."""
    n = len(ys)
    R = K + (nugget + jitter) * np.eye(n)
    R_inv = np.linalg.inv(R)
    sigma2 = ys @ R_inv @ ys / n
    sign, logdet = np.linalg.slogdet(R)
    assert sign > 0
    return -0.5 * n * math.log(2 * math.pi * sigma2) - 0.5 * logdet - 0.5 * n, sigma2


def dense_predict(K, Kq, kqq, ys, nugget, jitter, y_mean, y_scale):
    """Posterior mean/variance in original units via an explicit inverse."""
    n = len(ys)
    R_inv = np.linalg.inv(K + (nugget + jitter) * np.eye(n))
    sigma2 = ys @ R_inv @ ys / n
    mean = Kq.T @ R_inv @ ys
    var = sigma2 * (kqq - np.einsum("ij,ik,kj->j", Kq, R_inv, Kq))
    return mean * y_scale + y_mean, var * y_scale**2


# -- random inputs -------------------------------------------------------------


def random_leaf(rng, dim, family=None, lo=0.2, hi=5.0):
    family = family or FAMILIES[rng.integers(len(FAMILIES))]
    params = list(np.exp(rng.uniform(np.log(lo), np.log(hi), dim)))
    if family is KernelFamily.PowerExponential:
        params.append(rng.uniform(0.3, 2.0))
    elif family.shared_name is not None:
        params.append(float(np.exp(rng.uniform(np.log(lo), np.log(hi)))))
    amplitude = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return LeafKernel(family, dim, amplitude, tuple(params))


def random_leaf_in_bounds(rng, dim, family=None):
    """Leaf with every parameter drawn log-uniformly inside its default bounds."""
    from kernelgp.algebra import default_bounds

    family = family or FAMILIES[rng.integers(len(FAMILIES))]
    proto = LeafKernel(family, dim)
    values = []
    for name in proto.param_names():
        lo, hi = default_bounds(family, name)
        values.append(rng.uniform(lo, hi) if name == "p" else np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return proto.with_values(values)


def random_tree(rng, dim, max_depth=3, leaf=random_leaf, p_leaf=0.3):
    if max_depth == 0 or rng.random() < p_leaf:
        return Leaf(leaf(rng, dim))
    left = random_tree(rng, dim, max_depth - 1, leaf, p_leaf)
    right = random_tree(rng, dim, max_depth - 1, leaf, p_leaf)
    return (Sum if rng.random() < 0.5 else Product)(left, right)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def gradient_mismatch(analytic, reference, rel=1e-6, atol=1e-9, small=1e-6):
    """Indices where analytic and reference gradients disagree.

    Components with |analytic| < small are compared absolutely (atol), the rest
    relatively (rel).
    """
    analytic = np.asarray(analytic, dtype=float)
    reference = np.asarray(reference, dtype=float)
    err = np.abs(analytic - reference)
    tiny = np.abs(analytic) < small
    bad = np.where(tiny, err > atol, err > rel * np.abs(analytic))
    return np.flatnonzero(bad)
