import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernelgp.algebra import Leaf, Product, Sum, periodic, rq, se
from kernelgp.expr import KernelSyntaxError, format_kernel, parse_kernel
from kernelgp.kernels import KernelFamily, LeafKernel

from oracles import FAMILIES, random_leaf, random_tree


def test_precedence():
    tree = parse_kernel("SE * PERIODIC + SE + RQ")
    assert tree == Sum(Sum(Product(se(), periodic()), se()), rq())
    assert tree.n_params == 10
    assert parse_kernel("SE + RQ * SE") == Sum(se(), Product(rq(), se()))
    assert parse_kernel("(SE + RQ) * SE") == Product(Sum(se(), rq()), se())
    assert parse_kernel("SE * (RQ * SE)") == Product(se(), Product(rq(), se()))


def test_left_associativity():
    assert parse_kernel("SE + RQ + SE") == Sum(Sum(se(), rq()), se())
    assert parse_kernel("SE * RQ * SE") == Product(Product(se(), rq()), se())


def test_arguments_and_defaults():
    tree = parse_kernel("RQ(theta_l=2, theta_k=0.5, amplitude=3)")
    assert tree == Leaf(LeafKernel("RQ", 1, 3.0, (2.0, 0.5)))
    assert parse_kernel("POWEXP").kernel.params == (1.0, 2.0)
    assert parse_kernel("POWEXP(p=1.5)").kernel.shared() == 1.5
    assert parse_kernel("SE(theta=1e-2)").kernel.params == (0.01,)


def test_case_insensitive_names():
    assert parse_kernel("se * Periodic") == parse_kernel("SE * PERIODIC")
    assert parse_kernel("matern52(THETA=2)") == parse_kernel("MATERN52(theta=2)")


def test_vector_arguments():
    tree = parse_kernel("SE(theta=[1, 2.5])", dim=2)
    assert tree.kernel.params == (1.0, 2.5)
    assert parse_kernel("SE(theta=3)", dim=3).kernel.params == (3.0, 3.0, 3.0)
    with pytest.raises(KernelSyntaxError) as info:
        parse_kernel("SE(theta=[1, 2])", dim=3)
    assert info.value.position == 3


def test_canonical_format():
    assert format_kernel(se()) == "SE(amplitude=1, theta=1)"
    assert format_kernel(se(dim=2, theta=[0.5, 2.0])) == "SE(amplitude=1, theta=[0.5, 2])"
    assert format_kernel(Product(se(), Sum(se(), rq()))) == (
        "SE(amplitude=1, theta=1) * (SE(amplitude=1, theta=1) + RQ(amplitude=1, theta_l=1, theta_k=1))"
    )
    assert format_kernel(Sum(se(), Sum(se(), se()))).count("(SE") == 1


@pytest.mark.parametrize(
    "source, position",
    [
        ("SE * (", 6),
        ("", 0),
        ("   ", 0),
        ("SE +", 4),
        ("SE SE", 3),
        ("FOO + SE", 0),
        ("SE + BAR", 5),
        ("SE(theta=)", 9),
        ("SE(theta=1, theta=2)", 12),
        ("SE(theta_k=1)", 3),
        ("SE(theta=-1)", 3),
        ("SE(amplitude=0)", 3),
        ("POWEXP(p=2.5)", 7),
        ("RQ(theta_k=0)", 3),
        ("SE(theta=1", 10),
        ("(SE + RQ", 8),
        ("SE $ RQ", 3),
        ("SE * )", 5),
    ],
)
def test_error_positions(source, position):
    with pytest.raises(KernelSyntaxError) as info:
        parse_kernel(source)
    err = info.value
    assert err.position == position
    assert f"column {position + 1}" in str(err)
    assert err.pretty().splitlines()[-1] == "  " + " " * position + "^"


def test_syntax_error_is_value_error():
    with pytest.raises(ValueError):
        parse_kernel("SE *")


def test_every_family_parses():
    for family in FAMILIES:
        leaf = parse_kernel(family.value, dim=2).kernel
        assert leaf == LeafKernel(family, 2)


def test_round_trip_random_trees():
    rng = np.random.default_rng(20)
    for _ in range(1000):
        dim = int(rng.integers(1, 4))
        tree = random_tree(rng, dim, max_depth=4)
        assert parse_kernel(format_kernel(tree), dim) == tree


def test_format_is_idempotent():
    rng = np.random.default_rng(21)
    for _ in range(200):
        tree = random_tree(rng, 2)
        text = format_kernel(tree)
        assert format_kernel(parse_kernel(text, 2)) == text


positive = st.floats(1e-300, 1e300, allow_nan=False, allow_infinity=False)


@st.composite
def leaves(draw, dim):
    family = draw(st.sampled_from(FAMILIES))
    amplitude = draw(positive)
    params = [draw(positive) for _ in range(dim)]
    if family is KernelFamily.PowerExponential:
        params.append(draw(st.floats(1e-6, 2.0)))
    elif family.shared_name is not None:
        params.append(draw(positive))
    return Leaf(LeafKernel(family, dim, amplitude, tuple(params)))


def trees(dim):
    return st.recursive(
        leaves(dim),
        lambda children: st.builds(Sum, children, children) | st.builds(Product, children, children),
        max_leaves=8,
    )


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(st.just(d), trees(d))))
def test_round_trip_property(case):
    dim, tree = case
    assert parse_kernel(format_kernel(tree), dim) == tree


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="SEPRIODCQ()*+=,[]0123456789.e- _thamplitudk", max_size=30))
def test_parser_never_crashes(source):
    try:
        tree = parse_kernel(source)
    except KernelSyntaxError as err:
        assert 0 <= err.position <= len(source)
    else:
        assert parse_kernel(format_kernel(tree)) == tree


def test_random_leaf_text():
    rng = np.random.default_rng(22)
    leaf = random_leaf(rng, 1, KernelFamily.RationalQuadratic)
    text = format_kernel(Leaf(leaf))
    assert text.startswith("RQ(amplitude=")
    assert parse_kernel(text).kernel == leaf
