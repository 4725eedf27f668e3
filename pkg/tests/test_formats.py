from dataclasses import replace

import pytest

from nomsos.errors import FormatError, ParseError
from nomsos.services.calculi import BN_EARLY, BN_LATE, EARLY_SHAPES
from nomsos.services.formats import (
    BnSpec,
    StratSpec,
    check_acr,
    check_ba,
    check_equivariant,
    rule_cases,
    test_stratification as stratification,
)
from nomsos.services.nrtss import Nrtss
from nomsos.services.properties import universe


@pytest.mark.parametrize("text, expected", [
    ("boutA:2", BN_EARLY),
    ("boutA:2, binA:2", BN_LATE),
    ("", BnSpec()),
    ("none", BnSpec()),
])
def test_bn_parse(text, expected):
    assert BnSpec.parse(text) == expected


@pytest.mark.parametrize("text", ["boutA", "boutA:0", ":2", "boutA:x"])
def test_bn_parse_errors(text):
    with pytest.raises(ParseError):
        BnSpec.parse(text)


def test_bn_text():
    assert BN_LATE.text() == "binA:2,boutA:2"
    assert BnSpec().text() == "none"


def test_bn_validate(early):
    BN_EARLY.validate(early.nrtss.signature)
    with pytest.raises(FormatError):
        BnSpec.parse("sendA:1").validate(early.nrtss.signature)
    with pytest.raises(FormatError):
        BnSpec.parse("boutA:3").validate(early.nrtss.signature)


@pytest.mark.parametrize("name", ["early", "late", "early_abs", "late_abs"])
def test_shipped_calculi_are_equivariant(request, name):
    report = check_equivariant(request.getfixturevalue(name).nrtss)
    assert report.ok
    assert len(report.verdicts) == len(request.getfixturevalue(name).nrtss)


def test_undeclared_atom_breaks_equivariance(early):
    # concrete atoms are rejected by the parser, so drop the declaration of b instead
    open_rule = early.nrtss.rule("Open")
    leaked = replace(open_rule, atom_params=open_rule.atom_params[:1])
    report = check_equivariant(Nrtss(early.nrtss.signature, (leaked,)))
    assert not report.ok
    assert "b in freshness assertion" in report.verdicts[0].detail


@pytest.mark.parametrize("name", ["early", "late"])
def test_plain_calculi_are_acr(request, name):
    b = request.getfixturevalue(name)
    report = check_acr(b.nrtss, b.bn, b.strat, b.inert)
    assert report.ok, "\n".join(report.lines())
    assert report.obligations
    assert {o.kind for o in report.obligations} == {"i", "ii", "iii"}


def test_acr_without_candidate_filter_fails_at_restriction(early):
    report = check_acr(early.nrtss, early.bn, early.strat, early.inert, no_nf_filter=True)
    assert not report.ok
    assert any(o.rule_id == "Res" and o.kind == "i" for o in report.failures())


@pytest.mark.parametrize("name", ["early_abs", "late_abs"])
def test_abstraction_calculi_are_ba(request, name):
    b = request.getfixturevalue(name)
    report = check_ba(b.nrtss, b.strat)
    assert report.ok, "\n".join(report.lines())
    assert report.obligations


def test_missing_freshness_fails_ba(no_freshness):
    report = check_ba(no_freshness, StratSpec(frozenset({(None, "tauA")})))
    assert [(o.rule_id, o.passed) for o in report.obligations] == [("Bad", False)]
    assert "FAIL" in report.lines()[-2]


def test_close_without_freshness_fails_ba(early_abs, early_abs_unguarded_close):
    report = check_ba(early_abs_unguarded_close, early_abs.strat)
    assert not report.ok
    assert {o.rule_id for o in report.failures()} == {"AECloseL"}
    assert any(line.startswith("AECloseL case=") and line.endswith("FAIL") for line in report.lines())


def test_undefined_order_skips_obligations(no_freshness):
    assert check_ba(no_freshness, StratSpec()).ok


def test_format_style_mismatch(early, early_abs):
    with pytest.raises(FormatError):
        check_acr(early_abs.nrtss, BnSpec(), early_abs.strat, early_abs.inert)
    with pytest.raises(FormatError):
        check_ba(early.nrtss, early.strat)


def test_acr_needs_inert_terms(early):
    with pytest.raises(FormatError):
        check_acr(early.nrtss, early.bn, early.strat, {})


def test_rule_cases_split_actions(early):
    cases = rule_cases(early.nrtss.signature, early.nrtss.rule("SumL"))
    assert [case.label for case in cases] == ["binA", "boutA", "inA", "outA", "tauA"]
    forbidden = rule_cases(early.nrtss.signature, early.nrtss.rule("EParL"))
    assert "boutA" not in [case.label for case in forbidden]


@pytest.mark.parametrize("name", ["early", "late", "early_abs", "late_abs"])
def test_shipped_stratifications(request, name):
    b = request.getfixturevalue(name)
    report = stratification(b.nrtss, b.strat, universe(2), 2, bn=b.bn, samples=5, exhaustive_depth=1)
    assert report.ok, "\n".join(report.lines())
    assert report.nodes > 0


def test_flat_measure_is_not_a_stratification(early):
    flat = StratSpec(EARLY_SHAPES, lambda p, label: 0)
    report = stratification(early.nrtss, flat, universe(1), 2, bn=early.bn, samples=0)
    assert not report.ok
    assert any(line.startswith("(ii)") for line in report.violations)


def test_stratification_needs_measure(early):
    with pytest.raises(FormatError):
        stratification(early.nrtss, StratSpec(EARLY_SHAPES), universe(1), 1)
