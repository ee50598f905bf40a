"""Terms of the untyped lambda calculus: interned AST, grammar, substitution.

All nodes are created through the ``var``/``lam``/``app`` factories, which
intern structurally identical nodes, so syntactic identity is object
identity.  Every node caches its free-variable set and its size, which the
reduction engine relies on for closedness tests.  Terms are immutable values
and safe to share across threads and processes (modulo re-interning).

Concrete syntax::

    term ::= lam | app
    lam  ::= ("\\" | "λ") ident+ "." term
    app  ::= atom+
    atom ::= ident | "(" term ")" | "#" nat | "$" name

where ``#nat`` is a Church-numeral literal and ``$name`` one of the library
combinators ``I K K* omega Omega Theta``.  Identifiers are ASCII letters,
digits, ``_`` and ``'``, not starting with a digit.  Application associates
left, abstraction bodies extend as far right as possible.
"""
from __future__ import annotations

import hashlib
import sys
import weakref
from typing import Iterator, Optional

__all__ = [
    "Term", "Var", "Lam", "App",
    "var", "lam", "lams", "app", "apps",
    "free_vars", "is_closed", "alpha_eq", "alpha_digest",
    "substitute", "fresh_name",
    "subterm_at", "replace_at", "iter_subterms",
    "parse", "pretty", "ParseError",
    "I", "K", "K_STAR", "OMEGA_FN", "OMEGA", "THETA", "SUCC",
    "church", "church_value", "tuple_term", "omega_vector",
]

if sys.getrecursionlimit() < 20000:
    # deep substitutions / digests on construction-sized terms need headroom
    sys.setrecursionlimit(20000)

_EMPTY: frozenset = frozenset()


class Term:
    """Base class of term nodes; use the factories, never the constructors."""

    __slots__ = ("fv", "size", "__weakref__")
    fv: frozenset
    size: int

    def __repr__(self) -> str:
        return pretty(self)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.fv = frozenset((name,))
        self.size = 1


class Lam(Term):
    __slots__ = ("binder", "body")

    def __init__(self, binder: str, body: Term):
        self.binder = binder
        self.body = body
        self.fv = body.fv - {binder} if binder in body.fv else body.fv
        self.size = body.size + 1


class App(Term):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: Term, arg: Term):
        self.fn = fn
        self.arg = arg
        self.fv = fn.fv | arg.fv if (fn.fv or arg.fv) else _EMPTY
        self.size = fn.size + arg.size + 1


_VARS: "weakref.WeakValueDictionary[str, Var]" = weakref.WeakValueDictionary()
_LAMS: "weakref.WeakValueDictionary[tuple, Lam]" = weakref.WeakValueDictionary()
_APPS: "weakref.WeakValueDictionary[tuple, App]" = weakref.WeakValueDictionary()


def var(name: str) -> Var:
    t = _VARS.get(name)
    if t is None:
        t = Var(name)
        _VARS[name] = t
    return t


def lam(binder: str, body: Term) -> Lam:
    key = (binder, id(body))
    t = _LAMS.get(key)
    if t is None or t.body is not body:
        t = Lam(binder, body)
        _LAMS[key] = t
    return t


def lams(binders, body: Term) -> Term:
    for b in reversed(list(binders)):
        body = lam(b, body)
    return body


def app(fn: Term, arg: Term) -> App:
    key = (id(fn), id(arg))
    t = _APPS.get(key)
    if t is None or t.fn is not fn or t.arg is not arg:
        t = App(fn, arg)
        _APPS[key] = t
    return t


def apps(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = app(fn, a)
    return fn


def free_vars(t: Term) -> frozenset:
    """The set of free variable names of ``t``; empty iff ``t`` is closed."""
    return t.fv


def is_closed(t: Term) -> bool:
    return not t.fv


# ---------------------------------------------------------------------------
# alpha-equivalence and alpha-canonical digests

def alpha_eq(a: Term, b: Term) -> bool:
    """True iff ``a`` and ``b`` are equal up to renaming of bound variables."""
    if a is b:
        return True
    return _aeq(a, b, {}, {}, 0)


def _aeq(a: Term, b: Term, ea: dict, eb: dict, depth: int) -> bool:
    if a is b:
        # identical nodes agree iff their free variables are bound at the
        # same levels on both sides
        for v in a.fv:
            if ea.get(v) != eb.get(v):
                break
        else:
            return True
    ta = type(a)
    if ta is not type(b):
        return False
    if ta is Var:
        la, lb = ea.get(a.name), eb.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if ta is Lam:
        ea2 = dict(ea)
        eb2 = dict(eb)
        ea2[a.binder] = depth
        eb2[b.binder] = depth
        return _aeq(a.body, b.body, ea2, eb2, depth + 1)
    return _aeq(a.fn, b.fn, ea, eb, depth) and _aeq(a.arg, b.arg, ea, eb, depth)


_DIGESTS: "weakref.WeakKeyDictionary[Term, bytes]" = weakref.WeakKeyDictionary()


def alpha_digest(t: Term) -> bytes:
    """16-byte digest that is equal for alpha-equivalent terms.

    Closed subterms are memoized, so digests of large shared structures are
    cheap to recompute.
    """
    return _digest(t, {}, 0)


def _digest(t: Term, env: dict, depth: int) -> bytes:
    closed = not t.fv
    if closed:
        d = _DIGESTS.get(t)
        if d is not None:
            return d
    ty = type(t)
    h = hashlib.blake2b(digest_size=16)
    if ty is Var:
        lvl = env.get(t.name)
        if lvl is None:
            h.update(b"f")
            h.update(t.name.encode())
        else:
            h.update(b"v")
            h.update(str(depth - lvl).encode())
    elif ty is Lam:
        env2 = dict(env)
        env2[t.binder] = depth
        h.update(b"l")
        h.update(_digest(t.body, env2, depth + 1))
    else:
        h.update(b"a")
        h.update(_digest(t.fn, env, depth))
        h.update(_digest(t.arg, env, depth))
    d = h.digest()
    if closed:
        _DIGESTS[t] = d
    return d


# ---------------------------------------------------------------------------
# substitution

def fresh_name(base: str, avoid) -> str:
    """A name not in ``avoid``, derived from ``base``."""
    if base not in avoid:
        return base
    root = base.rstrip("0123456789'")
    if not root:
        root = "v"
    i = 1
    while True:
        cand = f"{root}{i}"
        if cand not in avoid:
            return cand
        i += 1


def substitute(t: Term, name: str, repl: Term) -> Term:
    """Capture-avoiding replacement of the free variable ``name`` by ``repl``.

    No free variable of ``repl`` becomes bound; binders of ``t`` are renamed
    on demand.  Subtrees without the variable are returned unchanged (shared).
    """
    if name not in t.fv:
        return t
    return _subst(t, name, repl, repl.fv)


def _subst(t: Term, name: str, repl: Term, rfv: frozenset) -> Term:
    if name not in t.fv:
        return t
    ty = type(t)
    if ty is Var:
        return repl
    if ty is App:
        return app(_subst(t.fn, name, repl, rfv), _subst(t.arg, name, repl, rfv))
    # Lam; binder != name because name is free in t
    if t.binder in rfv:
        nb = fresh_name(t.binder, rfv | t.body.fv | {name})
        body = _subst(t.body, t.binder, var(nb), frozenset((nb,)))
        return lam(nb, _subst(body, name, repl, rfv))
    return lam(t.binder, _subst(t.body, name, repl, rfv))


# ---------------------------------------------------------------------------
# positions (paths): 0 = abstraction body / application function, 1 = argument

def subterm_at(t: Term, pos) -> Term:
    for i in pos:
        ty = type(t)
        if ty is Lam and i == 0:
            t = t.body
        elif ty is App and i == 0:
            t = t.fn
        elif ty is App and i == 1:
            t = t.arg
        else:
            raise IndexError(f"no child {i} at {t!r}")
    return t


def replace_at(t: Term, pos, sub: Term) -> Term:
    if not pos:
        return sub
    i, rest = pos[0], pos[1:]
    ty = type(t)
    if ty is Lam and i == 0:
        return lam(t.binder, replace_at(t.body, rest, sub))
    if ty is App and i == 0:
        return app(replace_at(t.fn, rest, sub), t.arg)
    if ty is App and i == 1:
        return app(t.fn, replace_at(t.arg, rest, sub))
    raise IndexError(f"no child {i} at {t!r}")


def iter_subterms(t: Term) -> Iterator[tuple]:
    """Preorder (outermost first, function before argument) over (pos, node)."""
    stack = [((), t)]
    while stack:
        pos, node = stack.pop()
        yield pos, node
        ty = type(node)
        if ty is Lam:
            stack.append((pos + (0,), node.body))
        elif ty is App:
            stack.append((pos + (1,), node.arg))
            stack.append((pos + (0,), node.fn))


# ---------------------------------------------------------------------------
# concrete syntax

class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line = line
        self.col = col


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_'")
_IDENT_CHARS = _IDENT_START | set("0123456789")


def _tokenize(text: str):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        start = (line, col)
        if c in "\\λ.()":
            kind = {"\\": "lam", "λ": "lam", ".": "dot", "(": "lp", ")": "rp"}[c]
            toks.append((kind, c, start))
            i += 1
            col += 1
        elif c == "#":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError("expected digits after '#'", line, col)
            toks.append(("nat", text[i + 1:j], start))
            col += j - i
            i = j
        elif c == "$":
            j = i + 1
            while j < n and (text[j] in _IDENT_CHARS or text[j] == "*"):
                j += 1
            if j == i + 1:
                raise ParseError("expected combinator name after '$'", line, col)
            toks.append(("comb", text[i + 1:j], start))
            col += j - i
            i = j
        elif c in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            toks.append(("ident", text[i:j], start))
            col += j - i
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(("eof", "", (line, col)))
    return toks


def parse(text: str) -> Term:
    """Parse the concrete syntax above into a Term."""
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos]

    def take(kind):
        nonlocal pos
        k, v, at = toks[pos]
        if k != kind:
            raise ParseError(f"expected {kind}, found {v!r}", *at)
        pos += 1
        return v

    def parse_term() -> Term:
        k, v, at = peek()
        if k == "lam":
            take("lam")
            binders = []
            while peek()[0] == "ident":
                binders.append(take("ident"))
            if not binders:
                raise ParseError("expected binder after lambda", *peek()[2])
            take("dot")
            return lams(binders, parse_term())
        return parse_app()

    def parse_app() -> Term:
        t = parse_atom()
        while peek()[0] in ("ident", "lp", "nat", "comb", "lam"):
            # a lambda in argument position extends maximally right
            if peek()[0] == "lam":
                t = app(t, parse_term())
                break
            t = app(t, parse_atom())
        return t

    def parse_atom() -> Term:
        k, v, at = peek()
        if k == "ident":
            take("ident")
            return var(v)
        if k == "nat":
            take("nat")
            return church(int(v))
        if k == "comb":
            take("comb")
            try:
                return _LIBRARY[v]
            except KeyError:
                raise ParseError(f"unknown combinator ${v}", *at) from None
        if k == "lp":
            take("lp")
            t = parse_term()
            take("rp")
            return t
        raise ParseError(f"expected a term, found {v!r}" if v else "unexpected end of input", *at)

    t = parse_term()
    k, v, at = peek()
    if k != "eof":
        raise ParseError(f"trailing input {v!r}", *at)
    return t


def church_value(t: Term) -> Optional[int]:
    """k if ``t`` is literally a Church numeral ``\\f x. f^k x``, else None."""
    if type(t) is not Lam or type(t.body) is not Lam:
        return None
    f, x = t.binder, t.body.binder
    body = t.body.body
    k = 0
    while type(body) is App and type(body.fn) is Var and body.fn.name == f and f != x:
        body = body.arg
        k += 1
    if type(body) is Var and body.name == x:
        return k
    return None


def pretty(t: Term, sugar: bool = True) -> str:
    """Print a term; ``parse(pretty(t))`` is alpha-equivalent to ``t``.

    With ``sugar``, positive Church numerals print as ``#k``.
    """
    out = []

    def go(t: Term, ctx: str):
        # ctx: 'top' | 'fn' | 'arg'
        if sugar:
            k = church_value(t)
            if k is not None and k > 0:
                out.append(f"#{k}")
                return
        ty = type(t)
        if ty is Var:
            out.append(t.name)
            return
        if ty is Lam:
            if ctx != "top":
                out.append("(")
            binders = [t.binder]
            body = t.body
            while type(body) is Lam and not (sugar and church_value(body)):
                binders.append(body.binder)
                body = body.body
            out.append("\\" + " ".join(binders) + ". ")
            go(body, "top")
            if ctx != "top":
                out.append(")")
            return
        # App
        if ctx == "arg":
            out.append("(")
        go(t.fn, "fn")
        out.append(" ")
        go(t.arg, "arg")
        if ctx == "arg":
            out.append(")")

    go(t, "top")
    return "".join(out)


# ---------------------------------------------------------------------------
# combinator library

I = lam("a", var("a"))
K = lams(("a", "b"), var("a"))
K_STAR = lams(("a", "b"), var("b"))
OMEGA_FN = lam("x", app(var("x"), var("x")))          # \x. x x
OMEGA = app(OMEGA_FN, OMEGA_FN)                        # (\x. x x)(\x. x x)
_W = lams(("a", "b"), app(var("b"), apps(var("a"), var("a"), var("b"))))
THETA = app(_W, _W)                                    # Turing fixed point
SUCC = lams(("n", "f", "x"), app(var("f"), apps(var("n"), var("f"), var("x"))))

_LIBRARY = {
    "I": I,
    "K": K,
    "K*": K_STAR,
    "omega": OMEGA_FN,
    "Omega": OMEGA,
    "Theta": THETA,
}


def church(k: int) -> Term:
    """The k-th Church numeral ``\\f x. f^k x``."""
    if k < 0:
        raise ValueError("Church numerals are defined for k >= 0")
    body: Term = var("x")
    f = var("f")
    for _ in range(k):
        body = app(f, body)
    return lam("f", lam("x", body))


def tuple_term(items) -> Term:
    """The tuple ``[M1,...,Mn] = \\z. z M1 ... Mn`` with a fresh binder."""
    items = list(items)
    avoid = frozenset().union(*(t.fv for t in items)) if items else _EMPTY
    z = fresh_name("z", avoid)
    return lam(z, apps(var(z), *items))


def omega_vector(m: int) -> list:
    """m consecutive copies of Omega, used as an argument vector."""
    return [OMEGA] * m
