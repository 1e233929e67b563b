import pytest

from utils.validators import Validators


class TestRationals:
    def test_valid_list(self):
        assert Validators.validate_rationals("1, 0, -1/2", 3) == (True, None)

    @pytest.mark.parametrize("text, count", [("", None), ("1,2", 3), ("1,x,2", 3), ("1,1/0,2", 3)])
    def test_invalid_lists(self, text, count):
        valid, error = Validators.validate_rationals(text, count)
        assert not valid
        assert error


class TestGridSpec:
    def test_valid(self):
        assert Validators.validate_grid_spec("0.1,1,31,-2,2,41") == (True, None)

    @pytest.mark.parametrize(
        "text",
        ["0.1,1,31,-2,2", "0.1,1,a,-2,2,41", "1,0.1,31,-2,2,41", "0.1,1,31,2,-2,41", "0.1,1,1,-2,2,41"],
    )
    def test_invalid(self, text):
        valid, _ = Validators.validate_grid_spec(text)
        assert not valid


@pytest.mark.parametrize("value, expected", [(1e-8, True), (0.0, False), (-1.0, False), (float("inf"), False)])
def test_tolerance(value, expected):
    assert Validators.validate_tolerance(value)[0] is expected


class TestHeatLabels:
    def test_trigonometric_labels_keep_their_comma(self):
        assert Validators.split_labels("h0, trig(1,0), e(1)") == ["h0", "trig(1,0)", "e(1)"]

    def test_triple(self):
        assert Validators.validate_heat_labels("h0,h1,trig(1,1/2)") == (True, None)

    @pytest.mark.parametrize("text", ["h0,h1", "h0,,h1", "h0,h1,h2,h3"])
    def test_invalid_triples(self, text):
        assert not Validators.validate_heat_labels(text)[0]


@pytest.mark.parametrize("text, expected", [("1,7,10", True), ("0", False), ("11", False), ("1,a", False)])
def test_criteria(text, expected):
    assert Validators.validate_criteria(text)[0] is expected


def test_output_path(tmp_path):
    assert Validators.validate_output_path(str(tmp_path / "samples.csv")) == (True, None)
    assert not Validators.validate_output_path(str(tmp_path))[0]
    assert not Validators.validate_output_path("  ")[0]


def test_sanitize_expression():
    assert Validators.sanitize_expression("  x^2 \n -  2*t ") == "x^2 - 2*t"
