import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernelgp.algebra import (
    Leaf,
    Product,
    Sum,
    add,
    eval_expr,
    gather,
    grad_expr,
    kernel_diag,
    kernel_matrix,
    multiply,
    periodic,
    rq,
    scatter,
    se,
)
from kernelgp.kernels import KernelFamily

from oracles import fd_tree_grad, gradient_mismatch, random_leaf, random_tree, ref_eval, ref_gram


def test_sum_and_product_examples():
    assert eval_expr(add(se(), se()), 0.0, 1.0) == pytest.approx(2 * math.exp(-1), rel=1e-15)
    assert eval_expr(multiply(se(), se()), 0.0, 1.0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert add(se(), rq()).n_params == 5
    assert (se() * periodic() + se() + rq()).n_params == 10


def test_operators_build_nodes():
    a, b = se(), rq()
    assert isinstance(a + b, Sum)
    assert isinstance(a * b, Product)
    assert (a + b * a).right == Product(b, a)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        add(se(dim=1), se(dim=2))
    with pytest.raises(ValueError):
        multiply(se(dim=2), periodic(dim=3))
    with pytest.raises(ValueError):
        kernel_matrix(se(dim=2), np.zeros((3, 1)))


def test_gather_paths_and_transforms():
    layout = gather(se())
    assert layout.paths == ("0.amplitude", "0.theta[0]")
    assert layout.transforms == ["log", "log"]
    layout = gather(se(dim=2) * periodic(dim=2) + Leaf(random_leaf(np.random.default_rng(0), 2, KernelFamily.PowerExponential)))
    assert layout.paths == (
        "0.amplitude", "0.theta[0]", "0.theta[1]",
        "1.amplitude", "1.theta_l[0]", "1.theta_l[1]", "1.theta_k",
        "2.amplitude", "2.theta[0]", "2.theta[1]", "2.p",
    )
    assert layout.transforms[-1] == "identity"
    assert layout.lower[4] == 1e-2 and layout.upper[4] == 1e2
    assert (layout.lower[-1], layout.upper[-1]) == (0.1, 2.0)
    assert layout.lower[0] == 1e-3 and layout.upper[0] == 1e3


def test_gather_bound_overrides():
    layout = gather(se(), bounds={"0.theta[0]": (0.5, 2.0)})
    assert (layout.lower[1], layout.upper[1]) == (0.5, 2.0)
    with pytest.raises(ValueError):
        gather(se(), bounds={"3.theta[0]": (0.5, 2.0)})
    with pytest.raises(ValueError):
        gather(se(), bounds={"0.theta[0]": (2.0, 1.0)})


def test_scatter_rejects_structure_mismatch():
    with pytest.raises(ValueError):
        scatter(se() + se(), gather(se() * rq()))
    with pytest.raises(ValueError):
        scatter(se(), np.ones(3))


def test_scatter_gather_round_trip():
    rng = np.random.default_rng(10)
    for _ in range(1000):
        tree = random_tree(rng, int(rng.integers(1, 4)))
        layout = gather(tree)
        assert scatter(tree, layout) == tree
        new = layout.values * np.exp(rng.normal(scale=0.1, size=len(layout)))
        new = np.where(layout.log_scale, new, np.clip(new, 0.1, 2.0))
        moved = scatter(tree, layout.with_values(new))
        np.testing.assert_array_equal(gather(moved).values, new)
        z = layout.to_unconstrained()
        np.testing.assert_allclose(layout.from_unconstrained(z), layout.values, rtol=1e-14)


def test_tree_matches_reference_interpreter():
    rng = np.random.default_rng(11)
    for _ in range(200):
        dim = int(rng.integers(1, 4))
        tree = random_tree(rng, dim)
        x, x2 = rng.uniform(-2, 2, dim), rng.uniform(-2, 2, dim)
        expected = ref_eval(tree, x, x2)
        assert abs(eval_expr(tree, x, x2) - expected) <= 1e-12 * max(1.0, abs(expected))


def test_kernel_matrix_matches_reference_gram():
    rng = np.random.default_rng(12)
    tree = random_tree(rng, 2, max_depth=2)
    X1, X2 = rng.normal(size=(5, 2)), rng.normal(size=(4, 2))
    K, _ = kernel_matrix(tree, X1, X2)
    np.testing.assert_allclose(K, ref_gram(tree, X1, X2), rtol=1e-12)
    K, _ = kernel_matrix(tree, X1)
    np.testing.assert_allclose(np.diag(K), kernel_diag(tree, X1), rtol=1e-15)
    np.testing.assert_array_equal(K, K.T)


def test_commutativity():
    rng = np.random.default_rng(13)
    for _ in range(100):
        dim = int(rng.integers(1, 4))
        a, b = random_tree(rng, dim, 2), random_tree(rng, dim, 2)
        x, x2 = rng.normal(size=dim), rng.normal(size=dim)
        assert eval_expr(a + b, x, x2) == pytest.approx(eval_expr(b + a, x, x2), rel=1e-14)
        assert eval_expr(a * b, x, x2) == pytest.approx(eval_expr(b * a, x, x2), rel=1e-14)


def test_sum_gradient_concatenates_children():
    a, b = se(theta=0.7), rq(theta_l=2.0, theta_k=0.5)
    g = grad_expr(a + b, 0.1, 0.9)
    np.testing.assert_array_equal(g, np.r_[grad_expr(a, 0.1, 0.9), grad_expr(b, 0.1, 0.9)])


def test_product_gradient_product_rule():
    a, b = se(theta=0.7), rq(theta_l=2.0, theta_k=0.5)
    ka, kb = eval_expr(a, 0.1, 0.9), eval_expr(b, 0.1, 0.9)
    g = grad_expr(a * b, 0.1, 0.9)
    np.testing.assert_allclose(
        g, np.r_[grad_expr(a, 0.1, 0.9) * kb, ka * grad_expr(b, 0.1, 0.9)], rtol=1e-15
    )


def test_tree_gradient_matches_finite_differences():
    rng = np.random.default_rng(14)
    for _ in range(100):
        dim = int(rng.integers(1, 3))
        tree = random_tree(rng, dim, max_depth=2)
        x, x2 = rng.uniform(-2, 2, dim), rng.uniform(-2, 2, dim)
        analytic = grad_expr(tree, x, x2)
        fd = fd_tree_grad(tree, x, x2)
        assert gradient_mismatch(analytic, fd).size == 0, (str(tree), analytic, fd)


@settings(max_examples=50, deadline=None)
@given(
    theta=st.floats(1e-3, 1e3),
    amp=st.floats(1e-3, 1e3),
    x=st.floats(-50, 50),
    x2=st.floats(-50, 50),
)
def test_sum_of_leaves_bounded_by_amplitudes(theta, amp, x, x2):
    tree = se(theta=theta, amplitude=amp) + periodic(theta_l=theta, amplitude=amp)
    k = eval_expr(tree, x, x2)
    assert 0 <= k <= 2 * amp * (1 + 1e-15)
    assert eval_expr(tree, x, x) == pytest.approx(2 * amp, rel=1e-15)


def test_str_uses_canonical_grammar():
    assert str(se() * periodic() + rq()) == (
        "SE(amplitude=1, theta=1) * PERIODIC(amplitude=1, theta_l=1, theta_k=1)"
        " + RQ(amplitude=1, theta_l=1, theta_k=1)"
    )
