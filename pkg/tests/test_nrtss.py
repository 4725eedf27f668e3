import pytest

from nomsos.errors import InstantiationError, ParseError, RuleSpecError, SortError
from nomsos.services.foundation import Permutation, atoms
from nomsos.services.nrtss import (
    parse_ruleset,
    print_ruleset,
    rule_instantiate,
    rule_perm,
    rule_support,
    validate,
)
from nomsos.services.syntax import parse_term

a, b, c = atoms("a b c")

SIGNATURE = """
signature {
  atom ch;
  sort pr, ac;
  fun null : 1 -> pr;
  fun tau : pr -> pr;
  fun par : pr * pr -> pr;
  fun tauA : 1 -> ac;
  fun outA : ch * ch -> ac;
  state pr;
  residual ac * pr;
}
"""


@pytest.mark.parametrize("name, count", [
    ("early", 18),
    ("late", 18),
    ("early-abs", 16),
    ("late-abs", 16),
])
def test_shipped_rule_counts(request, name, count):
    b = request.getfixturevalue(name.replace("-", "_"))
    assert len(b.nrtss) == count
    assert validate(b.nrtss).ok


@pytest.mark.parametrize("name", ["early", "late", "early_abs", "late_abs", "ax_ru"])
def test_print_then_parse(request, name):
    found = request.getfixturevalue(name)
    n = getattr(found, "nrtss", found)
    again = parse_ruleset(print_ruleset(n))
    assert again.rules == n.rules
    assert print_ruleset(again) == print_ruleset(n)


def test_empty_rule_section():
    assert len(parse_ruleset(SIGNATURE)) == 0


@pytest.mark.parametrize("rule, error", [
    ("rule R { conclusion (tau $x:pr) -> (tuple (tauA) ch:0); }", RuleSpecError),
    ("rule R { conclusion (tau $x:pr) -> (tuple (tauA) $x:pr); } rule R { conclusion (tau $x:pr) -> (tuple (tauA) $x:pr); }", RuleSpecError),
    ("rule R { conclusion (par $x:pr $x:pr) -> (tuple (tauA) $x:pr); }", RuleSpecError),
    ("rule R { conclusion $x:pr -> (tuple (tauA) $x:pr); }", RuleSpecError),
    ("rule R forall a : ch { conclusion (tau $x:pr) -> (tuple (outA a c) $x:pr); }", RuleSpecError),
    ("rule R { conclusion (tau $x:pr) -> (tuple (tauA) (tauA)); }", RuleSpecError),
    ("rule R { premise $x:pr -> (tuple (tauA) $y:pr); }", RuleSpecError),
    ("rule R { conclusion (tau $x:pr) -> }", ParseError),
])
def test_malformed_rules(rule, error):
    with pytest.raises(error):
        parse_ruleset(SIGNATURE + rule)


@pytest.mark.parametrize("rules, where", [
    ("rule R { conclusion (par $x:pr $x:pr) -> (tuple (tauA) $x:pr); }\n", "at line 13, column 6"),
    (
        "rule R { conclusion (tau $x:pr) -> (tuple (tauA) $x:pr); }\n"
        "rule R { conclusion (tau $x:pr) -> (tuple (tauA) $x:pr); }\n",
        "at line 14, column 6",
    ),
])
def test_rule_errors_carry_positions(rules, where):
    with pytest.raises(RuleSpecError, match=where):
        parse_ruleset(SIGNATURE + rules)


def test_signature_errors():
    with pytest.raises(SortError):
        parse_ruleset("signature { atom ch; sort pr; fun f : pr -> nope; state pr; residual pr; }")
    with pytest.raises(RuleSpecError):
        parse_ruleset("signature { atom ch; sort pr; fun f : 1 -> pr; }")


def test_instantiate_open(early):
    inst = rule_instantiate(early.nrtss.rule("Open"), {"a": a, "b": b})
    pi = early.nrtss.signature.signature
    assert inst.conclusion.source == parse_term("(new ([b] $x:pr))", pi)
    assert inst.premises[0].target == parse_term("(tuple (outA a b) $y:pr)", pi)
    assert [str(x) for x in inst.env] == ["b # a"]


def test_instantiate_respects_forbidden_heads(early):
    pi = early.nrtss.signature.signature
    bout = parse_term("(boutA a b)", pi)
    with pytest.raises(InstantiationError):
        rule_instantiate(early.nrtss.rule("EParL"), {}, {"L": bout})
    tau = parse_term("(tauA)", pi)
    inst = rule_instantiate(early.nrtss.rule("SumL"), {}, {"L": tau})
    assert inst.conclusion.target == parse_term("(tuple (tauA) $y1:pr)", pi)


def test_instantiate_needs_every_atom(early):
    with pytest.raises(InstantiationError):
        rule_instantiate(early.nrtss.rule("Open"), {"a": a})


def test_rule_perm_and_support(early):
    n = early.nrtss
    inst = rule_instantiate(n.rule("Open"), {"a": a, "b": b})
    assert rule_perm(Permutation.identity(), inst) == inst
    assert rule_perm(Permutation.swap(a, c), inst) == rule_instantiate(n.rule("Open"), {"a": c, "b": b})
    assert rule_support(rule_instantiate(n.rule("Out"), {"a": a, "b": b})) == {a, b}


def test_ax_ru_signature(ax_ru):
    assert ax_ru.rule_ids() == ["Ax", "Ru"]
    assert not ax_ru.signature.abstraction_style
    assert ax_ru.signature.action_sort is None
