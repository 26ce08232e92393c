"""Text form of kernel expressions.

Grammar::

    expr   := term ('+' term)*
    term   := factor ('*' factor)*
    factor := kernel | '(' expr ')'
    kernel := NAME ['(' [arg (',' arg)*] ')']
    arg    := IDENT '=' (NUMBER | '[' NUMBER (',' NUMBER)* ']')

``*`` binds tighter than ``+`` and both associate to the left. Kernel names
are case-insensitive. A scalar length argument is broadcast to every input
dimension.
"""

from __future__ import annotations

import re

from .algebra import KernelExpr, Leaf, Product, Sum
from .kernels import KernelFamily, LeafKernel


class KernelSyntaxError(ValueError):
    """Malformed kernel expression; ``position`` is a 0-based character offset."""

    def __init__(self, message, source, position):
        self.message = message
        self.source = source
        self.position = position
        super().__init__(f"{message} at column {position + 1}")

    def pretty(self) -> str:
        return f"{self}\n  {self.source}\n  {' ' * self.position}^"


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[-+*()=,\[\]])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise KernelSyntaxError(f"unexpected character {source[pos]!r}", source, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source, dim):
        self.source = source
        self.dim = dim
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, pos=None):
        raise KernelSyntaxError(message, self.source, self.tok[2] if pos is None else pos)

    def describe(self):
        kind, text, _ = self.tok
        return "end of input" if kind == "end" else repr(text)

    def accept(self, text):
        if self.tok[1] == text and self.tok[0] == "punct":
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}, found {self.describe()}")

    def parse(self):
        tree = self.expr()
        if self.tok[0] != "end":
            self.error(f"unexpected {self.describe()}")
        return tree

    def expr(self):
        node = self.term()
        while self.accept("+"):
            node = Sum(node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.accept("*"):
            node = Product(node, self.factor())
        return node

    def factor(self):
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if self.tok[0] == "ident":
            return self.kernel()
        self.error(f"expected a kernel name or '(', found {self.describe()}")

    def kernel(self):
        _, name, pos = self.tok
        try:
            family = KernelFamily.from_name(name)
        except ValueError:
            self.error(f"unknown kernel {name!r}", pos)
        self.i += 1
        args = {}
        if self.accept("("):
            if not self.accept(")"):
                while True:
                    key, value, arg_pos = self.arg()
                    if key in args:
                        self.error(f"duplicate argument {key!r}", arg_pos)
                    args[key] = (value, arg_pos)
                    if self.accept(")"):
                        break
                    self.expect(",")
        return Leaf(self.build(family, args, pos))

    def arg(self):
        kind, key, pos = self.tok
        if kind != "ident":
            self.error(f"expected an argument name, found {self.describe()}")
        self.i += 1
        self.expect("=")
        if self.accept("["):
            values = [self.number()]
            while self.accept(","):
                values.append(self.number())
            self.expect("]")
            return key.lower(), values, pos
        return key.lower(), self.number(), pos

    def number(self):
        kind, text, _ = self.tok
        if kind != "number":
            self.error(f"expected a number, found {self.describe()}")
        self.i += 1
        return float(text)

    def build(self, family, args, pos):
        lengths_name = family.per_dim_name
        shared_name = family.shared_name
        allowed = {"amplitude", lengths_name} | ({shared_name} if shared_name else set())
        for key, (_, arg_pos) in args.items():
            if key not in allowed:
                self.error(
                    f"unknown argument {key!r} for {family.value} "
                    f"(expected one of {', '.join(sorted(allowed))})",
                    arg_pos,
                )

        def scalar(key, default):
            value, arg_pos = args.get(key, (default, pos))
            if isinstance(value, list):
                self.error(f"argument {key!r} takes a single number", arg_pos)
            return value, arg_pos

        amplitude, amp_pos = scalar("amplitude", 1.0)
        if amplitude <= 0:
            self.error("amplitude must be positive", amp_pos)

        lengths, len_pos = args.get(lengths_name, (1.0, pos))
        if isinstance(lengths, list):
            if len(lengths) != self.dim:
                self.error(
                    f"{lengths_name} has {len(lengths)} entries, expected {self.dim}", len_pos
                )
        else:
            lengths = [lengths] * self.dim
        if any(v <= 0 for v in lengths):
            self.error(f"{lengths_name} must be positive", len_pos)

        params = list(lengths)
        if shared_name is not None:
            value, shared_pos = scalar(shared_name, 2.0 if shared_name == "p" else 1.0)
            if shared_name == "p" and not 0 < value <= 2:
                self.error("p must lie in (0, 2]", shared_pos)
            if value <= 0:
                self.error(f"{shared_name} must be positive", shared_pos)
            params.append(value)
        return LeafKernel(family, self.dim, amplitude, tuple(params))


def parse_kernel(source: str, dim: int = 1) -> KernelExpr:
    """Parse a kernel expression for inputs of dimension ``dim``.

    >>> parse_kernel("SE * PERIODIC + SE + RQ").n_params
    10
    """
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    if not source.strip():
        raise KernelSyntaxError("empty kernel expression", source, 0)
    return _Parser(source, int(dim)).parse()


def format_number(value: float) -> str:
    # repr is the shortest string that round-trips exactly
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _format_leaf(leaf: LeafKernel) -> str:
    lengths = leaf.params[: leaf.dim]
    if all(v == lengths[0] for v in lengths):
        length_text = format_number(lengths[0])
    else:
        length_text = "[" + ", ".join(format_number(v) for v in lengths) + "]"
    parts = [
        f"amplitude={format_number(leaf.amplitude)}",
        f"{leaf.family.per_dim_name}={length_text}",
    ]
    if leaf.family.shared_name is not None:
        parts.append(f"{leaf.family.shared_name}={format_number(leaf.shared())}")
    return f"{leaf.family.value}({', '.join(parts)})"


_PRECEDENCE = {Sum: 1, Product: 2, Leaf: 3}


def format_kernel(tree: KernelExpr) -> str:
    """Canonical text for ``tree`` with the fewest parentheses that parse back to it."""
    if isinstance(tree, Leaf):
        return _format_leaf(tree.kernel)
    prec = _PRECEDENCE[type(tree)]
    op = " + " if isinstance(tree, Sum) else " * "
    left = format_kernel(tree.left)
    right = format_kernel(tree.right)
    if _PRECEDENCE[type(tree.left)] < prec:
        left = f"({left})"
    # left associativity: a right operand of equal precedence needs parentheses
    if _PRECEDENCE[type(tree.right)] <= prec:
        right = f"({right})"
    return left + op + right
