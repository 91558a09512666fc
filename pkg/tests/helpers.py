"""Small circuit builders shared by the tests."""

from __future__ import annotations

from cmw.circuit import Builder, Circuit, x


def xor2_circuit() -> Circuit:
    b = Builder()
    a, c = b.input(x(1)), b.input(x(2))
    return b.build(b.xor_block(a, c))


def xor_chain(n: int) -> Circuit:
    """Upper-bound construction: XOR blocks folded left to right."""
    b = Builder()
    acc = b.input(x(1))
    for i in range(2, n + 1):
        acc = b.xor_block(acc, b.input(x(i)))
    return b.build(acc)
