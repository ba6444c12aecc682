import math

import pytest

from translab.errors import InputError
from translab.expr import number, numbers
from translab.report import CheckReport, fmt17, ratios, refinement_orders


@pytest.mark.parametrize("text, value", [("pi/2", math.pi / 2), ("ln2", math.log(2)), ("ln(8)", math.log(8)),
                                         ("-1.5e-3", -1.5e-3), ("sqrt(15)/4 - sqrt(3)/2", 0.10222043276741566),
                                         ("2*e", 2 * math.e), ("inf", math.inf)])
def test_number(text, value):
    assert number(text) == pytest.approx(value, rel=1e-16)


@pytest.mark.parametrize("text", ["__import__('os')", "1 +", "x", "ln(0)", "[1]", "(1).real"])
def test_number_rejects(text):
    with pytest.raises(InputError):
        number(text)


def test_numbers():
    assert numbers("0,1,ln2,ln4", 4) == [0.0, 1.0, math.log(2), math.log(4)]
    with pytest.raises(InputError):
        numbers("1,2", 3)


def test_report_semantics_and_round_trip():
    rep = CheckReport("demo", inputs={"n": 3})
    assert rep.passed is False  # no criteria, no pass
    rep.require("a", True)
    rep.measured = {"x": [1.0, 0.1]}
    assert rep.passed
    rep.require("b", False)
    assert not rep.passed
    again = CheckReport.from_dict(rep.to_dict())
    assert again.to_dict() == rep.to_dict()
    assert "[FAIL] demo" in rep.summary_line()


def test_orders_and_formatting():
    assert refinement_orders([4.0, 1.0, 0.25]) == [2.0, 2.0]
    assert ratios([4.0, 1.0]) == [4.0]
    assert float(fmt17(0.1)) == 0.1 and len(fmt17(1 / 3).replace(".", "").lstrip("0")) <= 18
