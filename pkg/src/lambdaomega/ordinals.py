"""Ordinal notations below epsilon-0 in Cantor normal form.

An ordinal is a sorted list of (exponent, coefficient) pairs representing
``w^a1*n1 + ... + w^ak*nk`` with strictly decreasing exponents (themselves
ordinals) and positive coefficients; the empty list is 0.  Provides the
natural (Hessenberg) sum, its n-fold iteration, base-omega exponentiation,
and the ordinal assigned to a checked proof fragment.

Textual syntax: ``0``, ``w``, ``w^<ord>*<nat>``, sums with ``+``, e.g.
``w^(w^1*2)*3 + w*1 + 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "OrdinalCNF", "ZERO", "ONE", "OMEGA_ORD",
    "cnf", "from_int", "compare", "hessenberg_sum", "hessenberg_nprod",
    "omega_pow", "parse_ordinal", "format_ordinal",
    "MissingOrdinalBound", "ord_of_proof",
]


@dataclass(frozen=True)
class OrdinalCNF:
    terms: tuple  # tuple[(OrdinalCNF, int), ...], exponents strictly decreasing

    def __repr__(self):
        return format_ordinal(self)

    def is_zero(self) -> bool:
        return not self.terms


ZERO = OrdinalCNF(())


def from_int(n: int) -> OrdinalCNF:
    if n < 0:
        raise ValueError("ordinals here are >= 0")
    if n == 0:
        return ZERO
    return OrdinalCNF(((ZERO, n),))


ONE = from_int(1)


def cnf(pairs) -> OrdinalCNF:
    """Normalize arbitrary (exponent, coefficient) pairs into CNF."""
    merged: list = []
    for e, c in pairs:
        if c < 0:
            raise ValueError("coefficients must be >= 0")
        if c == 0:
            continue
        for i, (e2, c2) in enumerate(merged):
            if compare(e, e2) == 0:
                merged[i] = (e2, c2 + c)
                break
        else:
            merged.append((e, c))
    merged.sort(key=_SortKey, reverse=True)
    return OrdinalCNF(tuple(merged))


class _SortKey:
    __slots__ = ("e",)

    def __init__(self, pair):
        self.e = pair[0]

    def __lt__(self, other):
        return compare(self.e, other.e) < 0


def compare(a: OrdinalCNF, b: OrdinalCNF) -> int:
    """-1, 0, or 1: the ordinal order, lexicographic on (exponent,
    coefficient) term lists."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c != 0:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    if len(a.terms) != len(b.terms):
        return -1 if len(a.terms) < len(b.terms) else 1
    return 0


def hessenberg_sum(a: OrdinalCNF, b: OrdinalCNF) -> OrdinalCNF:
    """Natural sum: merge like exponents, adding coefficients."""
    out = []
    i = j = 0
    ta, tb = a.terms, b.terms
    while i < len(ta) and j < len(tb):
        (ea, ca), (eb, cb) = ta[i], tb[j]
        c = compare(ea, eb)
        if c == 0:
            out.append((ea, ca + cb))
            i += 1
            j += 1
        elif c > 0:
            out.append(ta[i])
            i += 1
        else:
            out.append(tb[j])
            j += 1
    out.extend(ta[i:])
    out.extend(tb[j:])
    return OrdinalCNF(tuple(out))


def hessenberg_nprod(a: OrdinalCNF, n: int) -> OrdinalCNF:
    """The n-fold natural sum ``a (+) ... (+) a``; 0 for n = 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0 or a.is_zero():
        return ZERO
    return OrdinalCNF(tuple((e, c * n) for e, c in a.terms))


def omega_pow(a: OrdinalCNF) -> OrdinalCNF:
    """w^a as a single-term CNF."""
    return OrdinalCNF(((a, 1),))


OMEGA_ORD = omega_pow(ONE)


# ---------------------------------------------------------------------------
# textual syntax

def format_ordinal(a: OrdinalCNF) -> str:
    if a.is_zero():
        return "0"
    parts = []
    for e, c in a.terms:
        if e.is_zero():
            parts.append(str(c))
            continue
        if compare(e, ONE) == 0:
            s = "w"
        else:
            es = format_ordinal(e)
            if any(ch in es for ch in "+*^"):
                es = f"({es})"
            s = f"w^{es}"
        if c != 1:
            s += f"*{c}"
        parts.append(s)
    return " + ".join(parts)


def parse_ordinal(text: str) -> OrdinalCNF:
    toks = _ord_tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else ("eof", "")

    def take(kind=None):
        nonlocal pos
        k, v = peek()
        if kind is not None and k != kind:
            raise ValueError(f"expected {kind}, found {v!r} in ordinal {text!r}")
        pos += 1
        return v

    def parse_sum() -> OrdinalCNF:
        items = [parse_item()]
        while peek()[0] == "plus":
            take("plus")
            items.append(parse_item())
        out = ZERO
        for it in items:
            out = hessenberg_sum(out, it)
        return out

    def parse_item() -> OrdinalCNF:
        k, v = peek()
        if k == "nat":
            take("nat")
            return from_int(int(v))
        if k == "w":
            take("w")
            exp = ONE
            if peek()[0] == "caret":
                take("caret")
                exp = parse_factor()
            coeff = 1
            if peek()[0] == "star":
                take("star")
                coeff = int(take("nat"))
            return cnf([(exp, coeff)])
        if k == "lp":
            take("lp")
            inner = parse_sum()
            take("rp")
            return inner
        raise ValueError(f"unexpected {v!r} in ordinal {text!r}")

    def parse_factor() -> OrdinalCNF:
        k, v = peek()
        if k == "nat":
            take("nat")
            return from_int(int(v))
        if k == "w":
            return parse_item()
        if k == "lp":
            take("lp")
            inner = parse_sum()
            take("rp")
            return inner
        raise ValueError(f"unexpected {v!r} in ordinal exponent of {text!r}")

    result = parse_sum()
    if peek()[0] != "eof":
        raise ValueError(f"trailing input in ordinal {text!r}")
    return result


def _ord_tokens(text: str):
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "w":
            toks.append(("w", "w"))
            i += 1
        elif c == "^":
            toks.append(("caret", "^"))
            i += 1
        elif c == "*":
            toks.append(("star", "*"))
            i += 1
        elif c == "+":
            toks.append(("plus", "+"))
            i += 1
        elif c == "(":
            toks.append(("lp", "("))
            i += 1
        elif c == ")":
            toks.append(("rp", ")"))
            i += 1
        elif c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("nat", text[i:j]))
            i = j
        else:
            raise ValueError(f"bad character {c!r} in ordinal {text!r}")
    return toks


# ---------------------------------------------------------------------------
# proof ordinals

class MissingOrdinalBound(ValueError):
    """An omega-oracle node lacks its declared premise-ordinal bound."""


def ord_of_proof(p) -> OrdinalCNF:
    """The ordinal of a checked proof fragment.

    Degenerate endpieces (axioms, pure conversions) get 1; a normal-form
    endpiece with subproof ordinals a1..at gets ``1 (+) a1 (+) ... (+) at``;
    an omega-oracle node with declared bound theta gets ``w^theta``.  Raw
    Leibnitz trees must be normalized first.
    """
    from . import proofs  # late import; proofs imports this module

    ty = type(p)
    if ty is proofs.IdentityAxiom or ty is proofs.WeakConvAxiom:
        return ONE
    if ty is proofs.OmegaOracle:
        if p.declared_ordinal is None:
            raise MissingOrdinalBound(
                "omega-oracle node has no declared ordinal bound")
        return omega_pow(p.declared_ordinal)
    if ty is proofs.NormalProof:
        return endpiece_ordinal([ord_of_proof(r.oracle) for r in p.rows])
    if ty is proofs.Leibnitz:
        raise proofs.NotNormalForm(
            "ordinals are assigned to normal-form proofs; "
            "apply normalize_endpiece first")
    raise TypeError(f"not a proof node: {p!r}")


def endpiece_ordinal(sub_ordinals) -> OrdinalCNF:
    """1 for the degenerate case, else 1 (+) a1 (+) ... (+) at."""
    out = ONE
    for a in sub_ordinals:
        out = hessenberg_sum(out, a)
    return out
