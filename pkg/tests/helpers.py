"""Small builders shared by the test modules."""

from nomsos.services.engine import AtomPool, derive
from nomsos.services.foundation import atom
from nomsos.services.nominal import interpret
from nomsos.services.syntax import parse_term
from nomsos.services.terms import App, AtomTm, BaseSort, TupleTm

AC = BaseSort("ac")


def state(n, text):
    """The state denoted by `text` in the rule set `n`."""
    rsig = n.signature
    return interpret(parse_term(text, rsig.signature, rsig.state_sort))


def transitions(n, text, slack=2, fuel=16):
    s = state(n, text)
    pool = AtomPool.around([s], n.signature.signature.atom_sorts.values(), slack)
    return derive(n, s, pool, fuel)


def action(head, *names):
    return App(head, TupleTm(tuple(AtomTm(atom(x)) for x in names)), AC)


def plain_residual(n, head, names, target):
    """The nominal residual (head(names), target) with the target given as text."""
    rsig = n.signature
    t = parse_term(target, rsig.signature, rsig.state_sort)
    return interpret(TupleTm((action(head, *names), t)))
