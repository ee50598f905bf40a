"""Lambda-calculus workbench: weak beta-Omega reduction, Bohm-tree
approximants, Cantor-normal-form ordinals, omega-rule proof fragments, and
compilation of recursive trees to distinguishing term pairs."""

from .term_core import (
    Term, Var, Lam, App, var, lam, lams, app, apps,
    parse, pretty, ParseError, substitute, alpha_eq, free_vars, is_closed,
    church, tuple_term, omega_vector,
    I, K, K_STAR, OMEGA_FN, OMEGA, THETA, SUCC,
)

__all__ = [
    "Term", "Var", "Lam", "App", "var", "lam", "lams", "app", "apps",
    "parse", "pretty", "ParseError", "substitute", "alpha_eq", "free_vars",
    "is_closed", "church", "tuple_term", "omega_vector",
    "I", "K", "K_STAR", "OMEGA_FN", "OMEGA", "THETA", "SUCC",
]
