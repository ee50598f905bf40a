"""Reduction relations: beta, eta, head reduction, weak beta, Omega
contraction, and weak beta-Omega reduction with fuel-bounded strategies.

The weak rules fire only on syntactically closed redexes:

* weak beta contracts ``(\\x.M) N`` when the whole redex is closed;
* the Omega rule replaces a closed term by Omega only when the engine holds a
  certificate of unsolvability.  Unsolvability is undecidable, so the engine
  certifies it solely through an alpha-equal repeat in the head-reduction
  sequence (sound, incomplete), or through an explicit caller-supplied
  allowlist of assumed-unsolvable terms.

All functions are pure; traces are immutable values that can be replayed.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .term_core import (
    App, Lam, Term, Var, alpha_digest, alpha_eq, app, lam, parse, pretty,
    replace_at, substitute, subterm_at, var, OMEGA,
)

__all__ = [
    "RuleTag", "Step", "ReductionTrace",
    "ReductionError", "NotAWeakRedex", "NotCertifiedUnsolvable",
    "NotAnEtaRedex", "FuelExhausted",
    "Solvable", "UnsolvableCertified", "Unknown",
    "DEFAULT_FUEL", "head_redex_path", "is_hnf",
    "beta_reduce", "weak_beta_step", "eta_step", "omega_step",
    "solvability", "is_whnf", "to_whnf",
    "enumerate_reducts", "first_weak_redex", "weak_normalize",
    "join", "join_traced", "replay",
    "format_trace", "parse_trace", "concat_traces", "shift_trace",
    "empty_trace",
]

DEFAULT_FUEL = 10_000
CERT_FUEL = 60  # head-reduction budget when certifying unsolvability inline


class RuleTag(str, Enum):
    BETA = "beta"
    ETA = "eta"
    WEAK_BETA = "weak-beta"
    OMEGA = "omega"
    HEAD_BETA = "head-beta"


@dataclass(frozen=True)
class Step:
    pos: tuple
    rule: RuleTag
    redex: Term
    contractum: Term


@dataclass(frozen=True)
class ReductionTrace:
    """A replayable sequence of contractions from ``start`` to ``end``.

    ``outcome`` reports why the producing strategy stopped: ``normal`` (no
    redex left), ``hnf``, ``whnf``, ``fuel``, ``unknown``, or ``ok`` for
    hand-assembled evidence.
    """
    start: Term
    steps: tuple
    end: Term
    outcome: str = "ok"

    def __len__(self):
        return len(self.steps)


def empty_trace(t: Term, outcome: str = "ok") -> ReductionTrace:
    return ReductionTrace(t, (), t, outcome)


class ReductionError(Exception):
    pass


class NotAWeakRedex(ReductionError):
    pass


class NotCertifiedUnsolvable(ReductionError):
    pass


class NotAnEtaRedex(ReductionError):
    pass


class FuelExhausted(ReductionError):
    pass


# ---------------------------------------------------------------------------
# head structure

def head_redex_path(t: Term) -> Optional[tuple]:
    """Path of the head redex of ``t``, or None if ``t`` is in hnf.

    The head redex of ``\\x1..xn. (\\x.U) V M1 .. Mk`` is ``(\\x.U) V``.
    """
    pos = []
    while type(t) is Lam:
        pos.append(0)
        t = t.body
    nfn = 0
    while type(t) is App:
        t = t.fn
        nfn += 1
    if type(t) is not Lam or nfn == 0:
        return None
    pos.extend([0] * (nfn - 1))
    return tuple(pos)


def is_hnf(t: Term) -> bool:
    return head_redex_path(t) is None


def _spine(t: Term):
    """(binders, head, args) of ``t`` with all outer lambdas peeled."""
    binders = []
    while type(t) is Lam:
        binders.append(t.binder)
        t = t.body
    args = []
    while type(t) is App:
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return binders, t, args


def _contract(redex: App) -> Term:
    return substitute(redex.fn.body, redex.fn.binder, redex.arg)


# ---------------------------------------------------------------------------
# single steps

def weak_beta_step(t: Term, pos) -> Term:
    """Contract the weak beta-redex at ``pos``; the redex must be closed."""
    sub = subterm_at(t, pos)
    if type(sub) is not App or type(sub.fn) is not Lam:
        raise NotAWeakRedex(f"not a beta-redex: {sub!r}")
    if sub.fv:
        raise NotAWeakRedex(f"redex is open (free: {sorted(sub.fv)}): {sub!r}")
    return replace_at(t, pos, _contract(sub))


def eta_step(t: Term, pos) -> Term:
    """Contract ``\\x. M x`` with x not free in M at ``pos``."""
    sub = subterm_at(t, pos)
    if (
        type(sub) is Lam
        and type(sub.body) is App
        and type(sub.body.arg) is Var
        and sub.body.arg.name == sub.binder
        and sub.binder not in sub.body.fn.fv
    ):
        return replace_at(t, pos, sub.body.fn)
    raise NotAnEtaRedex(f"not an eta-redex: {sub!r}")


def omega_step(t: Term, pos, fuel: int = CERT_FUEL, assume: Iterable[Term] = ()) -> Term:
    """Replace the closed subterm at ``pos`` by Omega.

    Requires the subterm to be distinct from Omega and certified unsolvable
    (cycle detection within ``fuel``, or membership in ``assume``).
    """
    sub = subterm_at(t, pos)
    if sub.fv:
        raise NotCertifiedUnsolvable(f"subterm is open: {sub!r}")
    if alpha_eq(sub, OMEGA):
        raise NotCertifiedUnsolvable("subterm is already Omega")
    v = solvability(sub, fuel, assume)
    if type(v) is not UnsolvableCertified:
        raise NotCertifiedUnsolvable(
            f"solvability verdict is {type(v).__name__}, engine never guesses"
        )
    return replace_at(t, pos, OMEGA)


# ---------------------------------------------------------------------------
# solvability via head reduction

@dataclass(frozen=True)
class Solvable:
    trace: ReductionTrace  # ends in a head normal form


@dataclass(frozen=True)
class UnsolvableCertified:
    trace: ReductionTrace  # head reduction up to the repeated term
    first: int             # indices into the reduct sequence with
    second: int            # alpha-equal entries (first < second)
    assumed: bool = False


@dataclass(frozen=True)
class Unknown:
    steps: int


_VERDICTS: "weakref.WeakKeyDictionary[Term, tuple]" = weakref.WeakKeyDictionary()


def solvability(t: Term, fuel: int = DEFAULT_FUEL, assume: Iterable[Term] = ()):
    """Head-reduce up to ``fuel`` steps.

    Returns Solvable on reaching an hnf, UnsolvableCertified when a term
    alpha-equal to an earlier one reappears, Unknown otherwise.
    """
    for a in assume:
        if alpha_eq(t, a):
            return UnsolvableCertified(empty_trace(t), 0, 0, assumed=True)
    steps = []
    cur = t
    seen = {alpha_digest(t): 0}
    for i in range(fuel):
        hp = head_redex_path(cur)
        if hp is None:
            return Solvable(ReductionTrace(t, tuple(steps), cur, "hnf"))
        redex = subterm_at(cur, hp)
        contractum = _contract(redex)
        steps.append(Step(hp, RuleTag.HEAD_BETA, redex, contractum))
        cur = replace_at(cur, hp, contractum)
        d = alpha_digest(cur)
        if d in seen:
            return UnsolvableCertified(
                ReductionTrace(t, tuple(steps), cur, "cycle"), seen[d], i + 1
            )
        seen[d] = i + 1
    return Unknown(fuel)


def _solvability_kind(t: Term, fuel: int, assume: Iterable[Term] = ()) -> str:
    """'solvable' / 'unsolvable' / 'unknown', cached per interned node."""
    if not t.fv:
        # closed terms already in hnf are solvable without reduction
        cached = _VERDICTS.get(t)
        if cached is not None:
            cfuel, kind = cached
            if kind != "unknown" or cfuel >= fuel:
                return kind
    v = solvability(t, fuel, assume)
    kind = (
        "solvable" if type(v) is Solvable
        else "unsolvable" if type(v) is UnsolvableCertified
        else "unknown"
    )
    if not t.fv and not assume:
        _VERDICTS[t] = (fuel, kind)
    return kind


def verify_unsolvability_certificate(t: Term, v: UnsolvableCertified) -> bool:
    """Replay an UnsolvableCertified witness and confirm the alpha repeat."""
    if v.assumed:
        return True
    if not replay(v.trace):
        return False
    reducts = [v.trace.start]
    cur = v.trace.start
    for s in v.trace.steps:
        cur = replace_at(cur, s.pos, s.contractum)
        reducts.append(cur)
    if not (0 <= v.first < v.second < len(reducts)):
        return False
    return alpha_eq(reducts[v.first], reducts[v.second]) and alpha_eq(v.trace.start, t)


# ---------------------------------------------------------------------------
# weak beta-Omega head normal forms

def is_whnf(t: Term, fuel: int = DEFAULT_FUEL, assume: Iterable[Term] = ()) -> str:
    """'yes', 'no' or 'unknown'.

    A closed term is a weak beta-Omega head normal form iff it is Omega, or
    it is solvable and has no head redex that is a closed beta-redex.
    """
    if t.fv:
        raise ValueError("is_whnf is defined for closed terms")
    if alpha_eq(t, OMEGA):
        return "yes"
    hp = head_redex_path(t)
    if hp is not None and not subterm_at(t, hp).fv:
        return "no"  # closed head redex fires weakly regardless of solvability
    kind = _solvability_kind(t, fuel, assume)
    if kind == "solvable":
        return "yes"
    if kind == "unsolvable":
        return "no"  # unsolvable and distinct from Omega
    return "unknown"


def to_whnf(t: Term, fuel: int = DEFAULT_FUEL, assume: Iterable[Term] = ()) -> ReductionTrace:
    """Reduce a closed term to a whnf by head weak beta-steps, collapsing to
    Omega when unsolvability gets certified; outcome 'unknown' on failure."""
    if t.fv:
        raise ValueError("to_whnf is defined for closed terms")
    steps = []
    cur = t
    remaining = fuel
    seen = {alpha_digest(t)}
    while remaining > 0:
        if alpha_eq(cur, OMEGA):
            return ReductionTrace(t, tuple(steps), cur, "whnf")
        hp = head_redex_path(cur)
        if hp is None:
            return ReductionTrace(t, tuple(steps), cur, "whnf")
        redex = subterm_at(cur, hp)
        if not redex.fv:
            contractum = _contract(redex)
            nxt = replace_at(cur, hp, contractum)
            d = alpha_digest(nxt)
            if d in seen:
                # the weak head sequence cycles, so head reduction cycles:
                # certified unsolvable, collapse to Omega
                steps.append(Step((), RuleTag.OMEGA, cur, OMEGA))
                return ReductionTrace(t, tuple(steps), OMEGA, "whnf")
            seen.add(d)
            steps.append(Step(hp, RuleTag.WEAK_BETA, redex, contractum))
            cur = nxt
            remaining -= 1
            continue
        # head redex is open: whnf if solvable, else one Omega-contraction
        v = solvability(cur, remaining, assume)
        if type(v) is Solvable:
            return ReductionTrace(t, tuple(steps), cur, "whnf")
        if type(v) is UnsolvableCertified:
            steps.append(Step((), RuleTag.OMEGA, cur, OMEGA))
            return ReductionTrace(t, tuple(steps), OMEGA, "whnf")
        return ReductionTrace(t, tuple(steps), cur, "unknown")
    return ReductionTrace(t, tuple(steps), cur, "unknown")


# ---------------------------------------------------------------------------
# plain beta strategies

def beta_reduce(t: Term, strategy: str = "leftmost-outermost",
                fuel: int = DEFAULT_FUEL) -> ReductionTrace:
    """Fuel-bounded beta-reduction.

    ``leftmost-outermost`` (normal order) stops at a beta-normal form;
    ``head-only`` stops at a head normal form.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    if strategy not in ("leftmost-outermost", "head-only"):
        raise ValueError(f"unknown strategy {strategy!r}")
    head = strategy == "head-only"
    steps = []
    cur = t
    for _ in range(fuel):
        hp = head_redex_path(cur) if head else _leftmost_beta(cur)
        if hp is None:
            outcome = "hnf" if head else "normal"
            return ReductionTrace(t, tuple(steps), cur, outcome)
        redex = subterm_at(cur, hp)
        contractum = _contract(redex)
        steps.append(Step(hp, RuleTag.HEAD_BETA if head else RuleTag.BETA,
                          redex, contractum))
        cur = replace_at(cur, hp, contractum)
    return ReductionTrace(t, tuple(steps), cur, "fuel")


def _leftmost_beta(t: Term) -> Optional[tuple]:
    stack = [((), t)]
    while stack:
        pos, node = stack.pop()
        ty = type(node)
        if ty is App:
            if type(node.fn) is Lam:
                return pos
            stack.append((pos + (1,), node.arg))
            stack.append((pos + (0,), node.fn))
        elif ty is Lam:
            stack.append((pos + (0,), node.body))
    return None


# ---------------------------------------------------------------------------
# one-step weak beta-Omega reducts

def _is_omega_candidate(node: Term, cert_fuel: int, assume) -> bool:
    if node.fv or node is OMEGA:
        return False
    # quick filter: terms already in hnf are solvable
    if head_redex_path(node) is None:
        return False
    if alpha_eq(node, OMEGA):
        return False
    return _solvability_kind(node, cert_fuel, assume) == "unsolvable"


def enumerate_reducts(t: Term, cert_fuel: int = CERT_FUEL,
                      assume: Iterable[Term] = ()) -> list:
    """All one-step weak beta-Omega reducts as (pos, rule, term) triples,
    in leftmost-outermost position order."""
    out = []
    stack = [((), t)]
    while stack:
        pos, node = stack.pop()
        ty = type(node)
        if ty is Var:
            continue
        if ty is App and type(node.fn) is Lam and not node.fv:
            out.append((pos, RuleTag.WEAK_BETA, replace_at(t, pos, _contract(node))))
        if _is_omega_candidate(node, cert_fuel, assume):
            out.append((pos, RuleTag.OMEGA, replace_at(t, pos, OMEGA)))
        if ty is Lam:
            stack.append((pos + (0,), node.body))
        else:
            stack.append((pos + (1,), node.arg))
            stack.append((pos + (0,), node.fn))
    return out


def first_weak_redex(t: Term, cert_fuel: int = CERT_FUEL,
                     assume: Iterable[Term] = ()) -> Optional[tuple]:
    """Leftmost-outermost weak step: closed beta-redexes take priority over
    Omega contractions.  Returns (pos, rule, reduct) or None."""
    stack = [((), t)]
    while stack:
        pos, node = stack.pop()
        ty = type(node)
        if ty is App and type(node.fn) is Lam and not node.fv:
            return pos, RuleTag.WEAK_BETA, replace_at(t, pos, _contract(node))
        if ty is Lam:
            stack.append((pos + (0,), node.body))
        elif ty is App:
            stack.append((pos + (1,), node.arg))
            stack.append((pos + (0,), node.fn))
    stack = [((), t)]
    while stack:
        pos, node = stack.pop()
        if _is_omega_candidate(node, cert_fuel, assume):
            return pos, RuleTag.OMEGA, replace_at(t, pos, OMEGA)
        ty = type(node)
        if ty is Lam:
            stack.append((pos + (0,), node.body))
        elif ty is App:
            stack.append((pos + (1,), node.arg))
            stack.append((pos + (0,), node.fn))
    return None


def weak_normalize(t: Term, max_steps: int, cert_fuel: int = CERT_FUEL,
                   assume: Iterable[Term] = ()) -> Optional[Term]:
    """Leftmost weak beta-Omega normalization; None if no normal form is
    reached within ``max_steps``."""
    cur = t
    for _ in range(max_steps):
        nxt = first_weak_redex(cur, cert_fuel, assume)
        if nxt is None:
            return cur
        cur = nxt[2]
    if first_weak_redex(cur, cert_fuel, assume) is None:
        return cur
    return None


# ---------------------------------------------------------------------------
# confluence joining

def join(a: Term, b: Term, fuel: int = 500, cert_fuel: int = CERT_FUEL,
         assume: Iterable[Term] = ()) -> Optional[Term]:
    """A common weak beta-Omega reduct of ``a`` and ``b``, or None.

    Tries bounded leftmost normalization first, then a breadth-first
    bidirectional search over reduct sets.  ``fuel`` bounds the total number
    of one-step reducts generated by the search.
    """
    if a.fv or b.fv:
        raise ValueError("join is defined for closed terms")
    if alpha_digest(a) == alpha_digest(b):
        return a
    # fast path: both sides reach a weak normal form
    cap = min(fuel, 400)
    na = weak_normalize(a, cap, cert_fuel, assume)
    if na is not None:
        nb = weak_normalize(b, cap, cert_fuel, assume)
        if nb is not None:
            if alpha_digest(na) == alpha_digest(nb):
                return na
            return None  # distinct weak normal forms never rejoin
    seen_a = {alpha_digest(a)}
    seen_b = {alpha_digest(b)}
    front_a = [a]
    front_b = [b]
    budget = fuel
    while budget > 0 and (front_a or front_b):
        # expand the smaller live frontier
        if front_b and (not front_a or len(front_b) <= len(front_a)):
            front, seen, other = front_b, seen_b, seen_a
            which_b = True
        else:
            front, seen, other = front_a, seen_a, seen_b
            which_b = False
        nxt = []
        for term in front:
            for _, _, red in enumerate_reducts(term, cert_fuel, assume):
                budget -= 1
                d = alpha_digest(red)
                if d in other:
                    return red
                if d not in seen:
                    seen.add(d)
                    nxt.append(red)
                if budget <= 0:
                    break
            if budget <= 0:
                break
        if which_b:
            front_b = nxt
        else:
            front_a = nxt
    return None


def join_traced(a: Term, b: Term, fuel: int = 500, cert_fuel: int = CERT_FUEL,
                assume: Iterable[Term] = ()):
    """Like ``join`` but returns (common, trace_from_a, trace_from_b).

    Keeps parent pointers, so it is meant for proof-sized terms.
    """
    if a.fv or b.fv:
        raise ValueError("join_traced is defined for closed terms")

    def reconstruct(parents, d, start):
        chain = []
        while d is not None:
            term, prev, step = parents[d]
            chain.append((term, step))
            d = prev
        chain.reverse()
        steps = tuple(s for _, s in chain if s is not None)
        return ReductionTrace(start, steps, chain[-1][0], "ok")

    da, db = alpha_digest(a), alpha_digest(b)
    pa = {da: (a, None, None)}
    pb = {db: (b, None, None)}
    if da == db:
        return a, empty_trace(a), empty_trace(b)
    front_a, front_b = [da], [db]
    budget = fuel
    while budget > 0 and (front_a or front_b):
        if front_b and (not front_a or len(front_b) <= len(front_a)):
            front, parents, other, flip = front_b, pb, pa, True
        else:
            front, parents, other, flip = front_a, pa, pb, False
        nxt = []
        for d0 in front:
            term = parents[d0][0]
            for pos, rule, red in enumerate_reducts(term, cert_fuel, assume):
                budget -= 1
                d = alpha_digest(red)
                if d not in parents:
                    step = Step(pos, rule, subterm_at(term, pos),
                                subterm_at(red, pos))
                    parents[d] = (red, d0, step)
                    nxt.append(d)
                if d in other:
                    ta = reconstruct(pa, d, a)
                    tb = reconstruct(pb, d, b)
                    return red, ta, tb
                if budget <= 0:
                    break
            if budget <= 0:
                break
        if flip:
            front_b = nxt
        else:
            front_a = nxt
    return None


# ---------------------------------------------------------------------------
# replay and serialization

def replay(trace: ReductionTrace, cert_fuel: int = CERT_FUEL,
           assume: Iterable[Term] = ()) -> bool:
    """Check that a trace is well-formed: each step's redex matches its
    rule's shape, and replaying the steps from ``start`` reproduces ``end``."""
    cur = trace.start
    for s in trace.steps:
        try:
            sub = subterm_at(cur, s.pos)
        except IndexError:
            return False
        if not alpha_eq(sub, s.redex):
            return False
        rule = s.rule
        if rule in (RuleTag.BETA, RuleTag.WEAK_BETA, RuleTag.HEAD_BETA):
            if type(sub) is not App or type(sub.fn) is not Lam:
                return False
            if rule is RuleTag.WEAK_BETA and sub.fv:
                return False
            if rule is RuleTag.HEAD_BETA and s.pos != head_redex_path(cur):
                return False
            if not alpha_eq(_contract(sub), s.contractum):
                return False
        elif rule is RuleTag.OMEGA:
            if sub.fv or alpha_eq(sub, OMEGA) or not alpha_eq(s.contractum, OMEGA):
                return False
            if _solvability_kind(sub, cert_fuel, assume) != "unsolvable":
                return False
        elif rule is RuleTag.ETA:
            try:
                if not alpha_eq(subterm_at(eta_step(cur, s.pos), s.pos), s.contractum):
                    return False
            except NotAnEtaRedex:
                return False
        else:
            return False
        cur = replace_at(cur, s.pos, s.contractum)
    return alpha_eq(cur, trace.end)


def _format_pos(pos) -> str:
    return "/".join(str(i) for i in pos)


def _parse_pos(s: str) -> tuple:
    if not s:
        return ()
    return tuple(int(p) for p in s.split("/"))


def format_trace(trace: ReductionTrace) -> str:
    """Line-oriented trace text: one contraction per line, with comment
    lines for the endpoints and the outcome."""
    lines = [f"# start {pretty(trace.start)}"]
    for i, s in enumerate(trace.steps):
        lines.append(
            f"{i} {s.rule.value} @{_format_pos(s.pos)} "
            f"{pretty(s.redex)} => {pretty(s.contractum)}"
        )
    lines.append(f"# end {pretty(trace.end)}")
    lines.append(f"# outcome {trace.outcome}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> ReductionTrace:
    start = end = None
    outcome = "ok"
    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("# start "):
            start = parse(line[len("# start "):])
        elif line.startswith("# end "):
            end = parse(line[len("# end "):])
        elif line.startswith("# outcome "):
            outcome = line[len("# outcome "):].strip()
        elif line.startswith("#"):
            continue
        else:
            head, _, contractum_src = line.partition(" => ")
            if not _:
                raise ValueError(f"malformed trace line: {line!r}")
            parts = head.split(None, 3)
            if len(parts) != 4 or not parts[2].startswith("@"):
                raise ValueError(f"malformed trace line: {line!r}")
            _idx, rulename, posf, redex_src = parts
            steps.append(Step(
                _parse_pos(posf[1:]), RuleTag(rulename),
                parse(redex_src), parse(contractum_src),
            ))
    if start is None or end is None:
        raise ValueError("trace text lacks start/end markers")
    return ReductionTrace(start, tuple(steps), end, outcome)


def concat_traces(t1: ReductionTrace, t2: ReductionTrace,
                  outcome: str = "ok") -> ReductionTrace:
    if not alpha_eq(t1.end, t2.start):
        raise ValueError("traces do not chain")
    return ReductionTrace(t1.start, t1.steps + t2.steps, t2.end, outcome)


def shift_trace(trace: ReductionTrace, prefix: tuple, outer_start: Term,
                outcome: str = "ok") -> ReductionTrace:
    """Re-root a trace at ``prefix`` inside a surrounding term.

    ``subterm_at(outer_start, prefix)`` must be the trace's start.  Weak
    beta-Omega steps stay valid in any context because their redexes are
    closed.
    """
    if subterm_at(outer_start, prefix) is not trace.start and not alpha_eq(
            subterm_at(outer_start, prefix), trace.start):
        raise ValueError("trace start does not sit at the given position")
    steps = tuple(Step(prefix + s.pos, s.rule, s.redex, s.contractum)
                  for s in trace.steps)
    outer_end = replace_at(outer_start, prefix, trace.end)
    return ReductionTrace(outer_start, steps, outer_end, outcome)
