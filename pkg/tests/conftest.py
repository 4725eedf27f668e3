import pytest

from nomsos.services.calculi import bundle
from nomsos.services.nrtss import parse_ruleset


# Two rules over f, g : [ch]ch -> b; the freshness a # b in Ru mentions no free atom.
AX_RU = """
signature {
  atom ch;
  sort b;
  fun f, g : [ch] ch -> b;
  state b;
  residual b;
}

rule Ax {
  conclusion (g $x:[ch]ch) -> (g $x:[ch]ch);
}

rule Ru forall a b : ch {
  premise (g ([a] a)) -> (g ([b] b));
  fresh a # b;
  conclusion (f ([a] a)) -> (f ([b] b));
}
"""

# ATau without its freshness side condition.
NO_FRESHNESS = """
// bn: none
signature {
  atom ch;
  sort pr, ac;
  fun null : 1 -> pr;
  fun tau : pr -> pr;
  fun out : ch * ch * pr -> pr;
  fun tauA : 1 -> ac;
  fun outA : ch * ch -> ac;
  state pr;
  residual [ch] (ac * pr);
}

rule Bad forall a : ch {
  conclusion (tau $x:pr) -> ([a] (tuple (tauA) $x:pr));
}
"""


@pytest.fixture(scope="session")
def early():
    return bundle("early")


@pytest.fixture(scope="session")
def late():
    return bundle("late")


@pytest.fixture(scope="session")
def early_abs():
    return bundle("early-abs")


@pytest.fixture(scope="session")
def late_abs():
    return bundle("late-abs")


@pytest.fixture(scope="session")
def early_abs_unguarded_close(early_abs):
    """early-abs with AECloseL missing its c # y1 side condition."""
    text = early_abs.path.read_text(encoding="utf-8")
    assert text.count("fresh c # $y1:pr;") == 1
    return parse_ruleset(text.replace("  fresh c # $y1:pr;\n", ""))


@pytest.fixture(scope="session")
def ax_ru():
    return parse_ruleset(AX_RU)


@pytest.fixture
def ax_ru_file(tmp_path):
    path = tmp_path / "ax_ru.nrtss"
    path.write_text(AX_RU, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def no_freshness():
    return parse_ruleset(NO_FRESHNESS)


@pytest.fixture
def no_freshness_file(tmp_path):
    path = tmp_path / "no_freshness.nrtss"
    path.write_text(NO_FRESHNESS, encoding="utf-8")
    return path
