import random

import pytest
from hypothesis import given, settings, strategies as st

from lambdaomega.term_core import (
    I, K, K_STAR, OMEGA, OMEGA_FN, SUCC, THETA,
    alpha_eq, app, apps, church, lam, lams, parse, var,
)
from lambdaomega.reduction import (
    NotAWeakRedex, NotAnEtaRedex, NotCertifiedUnsolvable,
    ReductionTrace, RuleTag, Solvable, Step, Unknown, UnsolvableCertified,
    beta_reduce, concat_traces, empty_trace, enumerate_reducts, eta_step,
    first_weak_redex, format_trace, head_redex_path, is_hnf, is_whnf, join,
    join_traced, omega_step, parse_trace, replay, shift_trace, solvability,
    to_whnf, verify_unsolvability_certificate, weak_beta_step, weak_normalize,
)

GROWING = parse("(\\x. x x x)(\\x. x x x)")  # unsolvable but never repeats


# ---------------------------------------------------------------------------
# beta_reduce

def test_beta_identity_application():
    tr = beta_reduce(app(parse("\\x.x"), I), fuel=10)
    assert len(tr) == 1 and tr.end is I and tr.outcome == "normal"


def test_beta_omega_fuel_exhaustion():
    tr = beta_reduce(OMEGA, fuel=5)
    assert tr.outcome == "fuel"
    assert alpha_eq(tr.end, OMEGA)


def test_theta_fixed_point_unfolding():
    # Theta F head-reduces in 2 steps to F (Theta F) for any closed F
    for f in (I, K_STAR, parse("\\a b c. a")):
        tr = beta_reduce(app(THETA, f), strategy="head-only", fuel=2)
        two = tr.end
        assert alpha_eq(two, app(f, app(THETA, f)))


def test_beta_strategies_validate():
    with pytest.raises(ValueError):
        beta_reduce(I, strategy="innermost", fuel=5)
    with pytest.raises(ValueError):
        beta_reduce(I, fuel=0)


# ---------------------------------------------------------------------------
# weak beta steps

def test_weak_beta_at_root():
    assert weak_beta_step(app(parse("\\x.x"), I), ()) is I


def test_weak_beta_rejects_open_redex():
    t = lam("y", app(parse("\\x.x"), var("y")))
    with pytest.raises(NotAWeakRedex):
        weak_beta_step(t, (0,))


def test_weak_beta_dummy_binder_deletes_argument():
    t = app(lam("x", K_STAR), OMEGA)
    assert weak_beta_step(t, ()) is K_STAR


def test_weak_beta_rejects_non_redex():
    with pytest.raises(NotAWeakRedex):
        weak_beta_step(app(var("f"), I), ())


# ---------------------------------------------------------------------------
# solvability

def test_solvable_identity():
    v = solvability(I, 10)
    assert type(v) is Solvable and len(v.trace) == 0


def test_omega_self_loop_certified():
    v = solvability(OMEGA, 10)
    assert type(v) is UnsolvableCertified
    assert verify_unsolvability_certificate(OMEGA, v)


def test_theta_is_solvable():
    v = solvability(THETA, 50)
    assert type(v) is Solvable


def test_growing_term_unknown():
    assert type(solvability(GROWING, 100)) is Unknown


def test_omega_applied_certified():
    v = solvability(app(OMEGA, I), 20)
    assert type(v) is UnsolvableCertified


# ---------------------------------------------------------------------------
# omega_step

def test_omega_step_on_omega_i():
    t = app(OMEGA, I)
    assert omega_step(t, (), 20) is OMEGA


def test_omega_step_rejects_solvable():
    with pytest.raises(NotCertifiedUnsolvable):
        omega_step(I, (), 20)


def test_omega_step_never_guesses_growing_unsolvables():
    with pytest.raises(NotCertifiedUnsolvable):
        omega_step(GROWING, (), 100)


def test_omega_step_allowlist():
    t = omega_step(GROWING, (), 10, assume=[GROWING])
    assert t is OMEGA


def test_omega_step_rejects_omega_itself():
    with pytest.raises(NotCertifiedUnsolvable):
        omega_step(OMEGA, (), 20)


# ---------------------------------------------------------------------------
# is_whnf / to_whnf

def test_omega_is_whnf():
    assert is_whnf(OMEGA, 20) == "yes"


def test_closed_head_redex_is_not_whnf():
    assert is_whnf(app(parse("\\x.x"), parse("\\x.x")), 20) == "no"


def test_open_head_redex_is_whnf_when_solvable():
    t = lam("x", app(parse("\\y.y"), var("x")))
    assert is_whnf(t, 20) == "yes"
    with pytest.raises(NotAWeakRedex):
        weak_beta_step(t, (0,))


def test_lambda_over_omega_not_whnf():
    assert is_whnf(lam("x", OMEGA), 30) == "no"


def test_whnf_no_when_closed_head_redex_under_binder():
    # the head redex here is the closed GROWING term itself
    assert is_whnf(lam("x", app(GROWING, var("x"))), 50) == "no"


def test_whnf_unknown_on_open_growing_head():
    # open head redex, solvability not certifiable within fuel
    t = parse("\\x.(\\y. y y y x)(\\y. y y y x)")
    assert is_whnf(t, 50) == "unknown"


def test_to_whnf_kstar_i():
    tr = to_whnf(app(K_STAR, I), 10)
    assert tr.outcome == "whnf" and len(tr) == 1
    assert alpha_eq(tr.end, lam("b", var("b")))


def test_to_whnf_omega_omega():
    tr = to_whnf(app(OMEGA, OMEGA), 50)
    assert tr.outcome == "whnf" and tr.end is OMEGA
    assert tr.steps[-1].rule is RuleTag.OMEGA


def test_to_whnf_collapses_hidden_unsolvable():
    tr = to_whnf(lam("x", OMEGA), 50)
    assert tr.end is OMEGA and tr.outcome == "whnf"


def test_to_whnf_unknown_when_uncertifiable():
    tr = to_whnf(parse("\\x.(\\y. y y y x)(\\y. y y y x)"), 60)
    assert tr.outcome == "unknown"


# ---------------------------------------------------------------------------
# eta

def test_eta_examples():
    assert eta_step(lam("x", app(I, var("x"))), ()) is I
    with pytest.raises(NotAnEtaRedex):
        eta_step(OMEGA_FN, ())
    t = lam("x", app(app(K_STAR, I), var("x")))
    assert eta_step(t, ()) is app(K_STAR, I)


# ---------------------------------------------------------------------------
# join

def test_join_reduct_pair():
    assert join(app(parse("\\x.x"), I), I, 50) is I


def test_join_two_routes_through_dummy_redex():
    t = app(lam("x", K_STAR), OMEGA)
    reducts = [r for _, _, r in enumerate_reducts(t, 30)]
    assert len(reducts) >= 2  # contract, or collapse argument to... contract only
    c = join(t, K_STAR, 100)
    assert c is K_STAR


def test_join_omega_omega_with_omega():
    assert alpha_eq(join(app(OMEGA, OMEGA), OMEGA, 100), OMEGA)


def test_join_distinct_normal_forms_fail():
    assert join(I, K, 100) is None


def test_join_traced_produces_replayable_traces():
    a = app(parse("\\x. x x"), I)
    res = join_traced(a, app(I, I), 100)
    assert res is not None
    common, ta, tb = res
    assert replay(ta) and replay(tb)
    assert alpha_eq(ta.end, common) and alpha_eq(tb.end, common)


# ---------------------------------------------------------------------------
# numeral laws routed through the engine (term_core invariants)

def test_numeral_soundness():
    for k in (0, 1, 3):
        t = apps(church(k), SUCC, church(0))
        tr = beta_reduce(t, fuel=500)
        assert tr.outcome == "normal"
        assert alpha_eq(tr.end, church(k))


def test_successor_law():
    for k in (0, 2, 5):
        tr = beta_reduce(app(SUCC, church(k)), fuel=500)
        assert alpha_eq(tr.end, church(k + 1))


def test_tuple_projection_laws():
    t = parse("(\\z. z a b)")  # open tuple shape is fine for beta
    from lambdaomega.term_core import tuple_term
    pair = tuple_term([I, K_STAR])
    left = beta_reduce(app(pair, K), fuel=100).end
    right = beta_reduce(app(pair, K_STAR), fuel=100).end
    assert alpha_eq(left, I) and alpha_eq(right, K_STAR)


# ---------------------------------------------------------------------------
# traces: replay, serialization, shifting

def test_trace_serialization_roundtrip():
    tr = to_whnf(app(K_STAR, I), 10)
    text = format_trace(tr)
    back = parse_trace(text)
    assert alpha_eq(back.start, tr.start) and alpha_eq(back.end, tr.end)
    assert back.outcome == tr.outcome
    assert [s.rule for s in back.steps] == [s.rule for s in tr.steps]
    assert replay(back)


def test_replay_rejects_tampered_trace():
    tr = to_whnf(app(K_STAR, I), 10)
    bad = ReductionTrace(tr.start, tr.steps, OMEGA, tr.outcome)
    assert not replay(bad)
    bad2 = ReductionTrace(
        tr.start,
        tuple(Step(s.pos, RuleTag.OMEGA, s.redex, OMEGA) for s in tr.steps),
        OMEGA, "ok")
    assert not replay(bad2)


def test_weak_step_soundness_in_recorded_traces():
    tr = to_whnf(apps(K_STAR, I, K, I), 50)
    for s in tr.steps:
        if s.rule is RuleTag.WEAK_BETA:
            assert not s.redex.fv


def test_shift_and_concat():
    inner = to_whnf(app(K_STAR, I), 10)
    outer = lam("q", app(var("q"), app(K_STAR, I)))
    shifted = shift_trace(inner, (0, 1), outer)
    assert replay(shifted)
    assert alpha_eq(shifted.end, lam("q", app(var("q"), lam("b", var("b")))))
    two = concat_traces(empty_trace(outer), shifted)
    assert replay(two)


# ---------------------------------------------------------------------------
# properties

def _closed_terms(max_size=12, seed=0):
    rng = random.Random(seed)

    def gen(budget, depth):
        if budget <= 1:
            if depth > 0:
                return var(f"v{rng.randrange(depth)}")
            return I
        roll = rng.random()
        if depth == 0 or roll < 0.45:
            inner = gen(budget - 1, depth + 1)
            return _close(inner, depth)
        if roll < 0.8 and budget >= 3:
            k = rng.randint(1, budget - 2)
            return app(gen(k, depth), gen(budget - 1 - k, depth))
        return var(f"v{rng.randrange(depth)}")

    def _close(body, depth):
        return lam(f"v{depth}", body)

    while True:
        t = gen(rng.randint(2, max_size), 0)
        if not t.fv:
            yield t


def test_random_weak_traces_rejoin():
    # small-scale version of the confluence property
    rng = random.Random(7)
    gen = _closed_terms(10, seed=3)
    for _ in range(60):
        t = next(gen)
        ends = []
        for _ in range(2):
            cur = t
            for _ in range(5):
                reds = enumerate_reducts(cur, 40)
                if not reds:
                    break
                cur = rng.choice(reds)[2]
            ends.append(cur)
        c = join(ends[0], ends[1], 400)
        assert c is not None, (t, ends)


def test_whnf_stable_under_internal_reductions():
    # internal (non-head) weak steps keep a whnf a whnf
    samples = [
        lam("x", apps(var("x"), app(I, I), app(K_STAR, OMEGA))),
        lam("x", app(var("x"), app(OMEGA, I))),
        lams(("x", "y"), apps(var("y"), app(app(K, I), I), var("x"))),
    ]
    checked = 0
    for w in samples:
        assert is_whnf(w, 200) == "yes"
        hp = head_redex_path(w)
        for pos, rule, red in enumerate_reducts(w, 60):
            if pos == hp or pos == ():
                continue
            assert is_whnf(red, 200) == "yes", (w, pos, red)
            checked += 1
    assert checked > 0


def test_cofinality_small_sample():
    gen = _closed_terms(10, seed=5)
    for _ in range(150):
        t = next(gen)
        v = solvability(t, 150)
        if type(v) is Unknown:
            continue
        tr = to_whnf(t, 400)
        assert tr.outcome == "whnf"
        assert is_whnf(tr.end, 400) == "yes"
