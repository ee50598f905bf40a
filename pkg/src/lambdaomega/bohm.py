"""Bohm-tree approximants to bounded depth and eta-equality of approximants.

An approximant node is either a head node ``\\x1..xn. y C1 .. Cm`` or Bottom.
Bottom carries a flag telling whether the subterm was *certified* unsolvable
or merely ran out of fuel / depth; comparisons treat certified Bottoms
against head nodes as a genuine difference, unknown Bottoms as inconclusive,
so separation is never claimed on fuel exhaustion.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .term_core import Term, alpha_eq, fresh_name
from .reduction import (
    DEFAULT_FUEL, Solvable, Unknown, UnsolvableCertified, _spine, solvability,
)

__all__ = [
    "BTNode", "Bottom", "HeadNode",
    "bt_approx", "eta_bt_eq",
    "bt_to_sexpr", "bt_from_sexpr",
    "EQUAL", "DIFFERENT", "INCONCLUSIVE",
]

EQUAL = "equal"
DIFFERENT = "different"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Bottom:
    certified: bool  # True: certified unsolvable; False: fuel/depth unknown


@dataclass(frozen=True)
class HeadNode:
    binders: tuple
    head: str
    children: tuple


BTNode = object  # Bottom | HeadNode


def bt_approx(t: Term, depth: int, fuel: int = DEFAULT_FUEL,
              assume: Iterable[Term] = ()) -> BTNode:
    """Approximate the Bohm tree of the closed term ``t`` to ``depth``.

    Head-reduce (fuel-bounded); on reaching ``\\x1..xn. xi V1..Vm`` emit a
    head node and recurse on the arguments at depth-1; children beyond depth
    0 become unknown Bottoms.  Unsolvable terms become certified Bottoms.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if t.fv:
        raise ValueError("bt_approx is defined for closed terms")
    return _approx(t, depth, fuel, tuple(assume))


def _approx(t: Term, depth: int, fuel: int, assume) -> BTNode:
    v = solvability(t, fuel, assume)
    if type(v) is UnsolvableCertified:
        return Bottom(True)
    if type(v) is Unknown:
        return Bottom(False)
    binders, head, args = _spine(v.trace.end)
    if depth == 0:
        children = tuple(Bottom(False) for _ in args)
    else:
        children = tuple(_approx(a, depth - 1, fuel, assume) for a in args)
    return HeadNode(tuple(binders), head.name, children)


# ---------------------------------------------------------------------------
# eta-equality of approximants

def eta_bt_eq(a: BTNode, b: BTNode, depth: int) -> str:
    """'equal', 'different', or 'inconclusive' up to ``depth``.

    Binder lists are eta-aligned: the shorter side is padded with fresh
    variables whose extra trailing children must be images of those
    variables.  'different' is returned only on a disagreement that no
    eta-expansion can repair; any disagreement involving an unknown Bottom
    yields 'inconclusive'.
    """
    return _cmp(_canon(a, 0), _canon(b, 0), 0, depth)


def _canon(node: BTNode, base: int) -> BTNode:
    """Rename binders to positional names v0, v1, ... so both sides of a
    comparison use the same names at the same binder positions."""
    if type(node) is Bottom:
        return node
    renames = {}
    binders = []
    for i, name in enumerate(node.binders):
        new = f"v{base + i}"
        renames[name] = new
        binders.append(new)
    inner = base + len(binders)
    children = tuple(_canon_child(c, renames, inner) for c in node.children)
    head = renames.get(node.head, node.head)
    return HeadNode(tuple(binders), head, children)


def _canon_child(node: BTNode, renames: dict, base: int) -> BTNode:
    if type(node) is Bottom:
        return node
    local = dict(renames)
    binders = []
    for i, name in enumerate(node.binders):
        new = f"v{base + i}"
        local[name] = new
        binders.append(new)
    inner = base + len(binders)
    children = tuple(_canon_child(c, local, inner) for c in node.children)
    head = local.get(node.head, node.head)
    return HeadNode(tuple(binders), head, children)


def _eta_pad(node: HeadNode, k: int, base: int) -> HeadNode:
    """eta-expand a canonical node with k extra binders and trailing
    variable children."""
    n = len(node.binders)
    extra = [f"v{base + n + i}" for i in range(k)]
    children = node.children + tuple(HeadNode((), e, ()) for e in extra)
    return HeadNode(node.binders + tuple(extra), node.head, children)


def _cmp(a: BTNode, b: BTNode, base: int, depth: int) -> str:
    if depth < 0:
        return INCONCLUSIVE
    ta, tb = type(a), type(b)
    if ta is Bottom and tb is Bottom:
        return EQUAL if (a.certified and b.certified) else INCONCLUSIVE
    if ta is Bottom:
        return DIFFERENT if a.certified else INCONCLUSIVE
    if tb is Bottom:
        return DIFFERENT if b.certified else INCONCLUSIVE
    na, nb = len(a.binders), len(b.binders)
    if na < nb:
        a = _eta_pad(a, nb - na, base)
    elif nb < na:
        b = _eta_pad(b, na - nb, base)
    if a.head != b.head:
        return DIFFERENT
    if len(a.children) != len(b.children):
        # simultaneous eta-expansion changes both arities equally, so a
        # mismatch after binder alignment is never repairable
        return DIFFERENT
    inner = base + len(a.binders)
    verdict = EQUAL
    for ca, cb in zip(a.children, b.children):
        r = _cmp(ca, cb, inner, depth - 1)
        if r == DIFFERENT:
            return DIFFERENT
        if r == INCONCLUSIVE:
            verdict = INCONCLUSIVE
    return verdict


# ---------------------------------------------------------------------------
# serialization: (hn (x1..xn) head child*) / (bot certified|unknown)

def bt_to_sexpr(node: BTNode) -> str:
    if type(node) is Bottom:
        return f"(bot {'certified' if node.certified else 'unknown'})"
    binders = " ".join(node.binders)
    parts = [f"(hn ({binders}) {node.head}"]
    for c in node.children:
        parts.append(" " + bt_to_sexpr(c))
    parts.append(")")
    return "".join(parts)


def bt_from_sexpr(text: str) -> BTNode:
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def take(expected: Optional[str] = None) -> str:
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of s-expression")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r}, found {tok!r}")
        pos += 1
        return tok

    def node() -> BTNode:
        take("(")
        kind = take()
        if kind == "bot":
            flag = take()
            take(")")
            if flag not in ("certified", "unknown"):
                raise ValueError(f"bad bottom flag {flag!r}")
            return Bottom(flag == "certified")
        if kind != "hn":
            raise ValueError(f"unknown node kind {kind!r}")
        take("(")
        binders = []
        while toks[pos] != ")":
            binders.append(take())
        take(")")
        head = take()
        children = []
        while toks[pos] != ")":
            children.append(node())
        take(")")
        return HeadNode(tuple(binders), head, tuple(children))

    result = node()
    if pos != len(toks):
        raise ValueError("trailing tokens in s-expression")
    return result
