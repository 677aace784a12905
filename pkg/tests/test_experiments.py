from fractions import Fraction

import pytest

from ptfree.errors import ConfigError
from ptfree.experiments import DEFAULTS, EXPERIMENTS, run


def test_registry():
    assert set(EXPERIMENTS) == {"thm16", "counterexample", "blocks", "cor26", "cor27", "diagfree"}
    assert DEFAULTS["thm16"]["d"] == 64


@pytest.mark.parametrize(
    "name, overrides",
    [
        ("thm16", dict(d=8, samples=300)),
        ("counterexample", dict(d=8, samples=300)),
        ("blocks", dict(d=8, samples=300)),
        ("cor26", {}),
        ("cor27", {}),
        ("diagfree", dict(d=6, samples=200)),
    ],
)
def test_small_runs_pass(name, overrides):
    report = run(name, **overrides)
    assert report.passed, [r.record() for r in report.rows if not r.passed]


def test_predictions_are_the_closed_forms():
    assert run("thm16", d=4, samples=20).rows[0].prediction == Fraction(7, 4)
    assert run("counterexample", d=4, samples=20).rows[0].prediction == Fraction(-1, 4)
    assert run("blocks", d=4, samples=20).rows[1].prediction == Fraction(3, 8)


def test_config_errors():
    with pytest.raises(ConfigError):
        run("bogus")
    with pytest.raises(ConfigError):
        run("cor26", d=3)
    with pytest.raises(ConfigError):
        run("counterexample", b=1)
    with pytest.raises(ConfigError):
        run("cor26", grid="8")
