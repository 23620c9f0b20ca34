import itertools

import pytest

from prevfuse.errors import DataError, UsageError
from prevfuse.fusion import IndicatorVector, equal_weights, fuse, parse_indicator_spec, to_percent
from prevfuse.prevalence import WeightVector

MODES = ("cough", "breath", "fever")


def brute_force(pattern, weights):
    total = 0.0
    for label, w in zip(pattern, weights):
        total += label * w
    return total


def iv(*pattern):
    return IndicatorVector.from_pattern(MODES, pattern)


@pytest.mark.parametrize(
    "pattern, expected",
    [((1, 0, 1), 0.85), ((0, 1, 0), 0.15), ((0, 0, 1), 0.53), ((1, 1, 0), 0.47)],
)
def test_table_rows_with_rounded_weights(rounded_weights, pattern, expected):
    assert fuse(iv(*pattern), rounded_weights).score == pytest.approx(expected, abs=1e-12)


def test_endpoints(paper_weights):
    assert fuse(iv(0, 0, 0), paper_weights).score == 0.0
    assert fuse(iv(1, 1, 1), paper_weights).score == 1.0
    assert fuse(iv(1, 1, 1), paper_weights).percent == 100.0


def test_percent_is_score_times_100(paper_weights):
    r = fuse(iv(1, 0, 1), paper_weights)
    assert r.percent == r.score * 100
    assert not r.renormalized
    assert r.modes_used == MODES


def test_equal_weight_baseline():
    eq = equal_weights(MODES)
    assert eq.values() == [1 / 3] * 3
    assert round(fuse(iv(1, 0, 1), eq).score, 2) == 0.67
    assert equal_weights(["cough"]).values() == [1.0]
    assert equal_weights(["a", "b", "c", "d"]).values() == [0.25] * 4


def test_equal_weights_empty():
    with pytest.raises(UsageError):
        equal_weights([])


@pytest.mark.parametrize("score, pct", [(0.85, 85.0), (0.0, 0.0), (1.0, 100.0)])
def test_to_percent(score, pct):
    assert to_percent(score) == pct


@pytest.mark.parametrize("bad", [-0.01, 1.01])
def test_to_percent_range(bad):
    with pytest.raises(UsageError):
        to_percent(bad)


def test_missing_mode_renormalizes(rounded_weights):
    r = fuse(IndicatorVector({"cough": 1, "fever": 1}), rounded_weights)
    assert r.renormalized
    assert r.score == 1.0
    assert r.modes_used == ("cough", "fever")
    assert r.weights_used["cough"] == pytest.approx(0.32 / 0.85)


def test_missing_mode_partial(rounded_weights):
    r = fuse(IndicatorVector({"cough": 0, "fever": 1}), rounded_weights)
    assert r.score == pytest.approx(0.53 / 0.85, abs=1e-12)


def test_unknown_mode(rounded_weights):
    with pytest.raises(UsageError, match="fatigue"):
        fuse(IndicatorVector({"cough": 1, "fatigue": 1}), rounded_weights)


def test_renormalize_onto_zero_weight():
    w = WeightVector({"a": 1.0, "b": 0.0}, ("a", "b"))
    with pytest.raises(DataError):
        fuse(IndicatorVector({"b": 1}), w)


def test_empty_indicators():
    with pytest.raises(UsageError):
        IndicatorVector({})


@pytest.mark.parametrize("bad", [2, -1, 0.5, "1"])
def test_labels_binary(bad):
    with pytest.raises(DataError):
        IndicatorVector({"cough": bad})


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_brute_force_all_patterns(n):
    modes = tuple(f"m{i}" for i in range(n))
    raw = [0.37, 0.11, 0.29, 0.23][:n]
    s = sum(raw)
    w = WeightVector({m: r / s for m, r in zip(modes, raw)}, modes)
    for pattern in itertools.product((0, 1), repeat=n):
        got = fuse(IndicatorVector.from_pattern(modes, pattern), w).score
        assert got == pytest.approx(brute_force(pattern, w.values()), abs=1e-12)


class TestIndicatorSpec:
    def test_parse(self):
        v = parse_indicator_spec("cough=1, breath=0,Fever=1")
        assert dict(v.labels) == {"cough": 1, "breath": 0, "fever": 1}

    @pytest.mark.parametrize("text", ["cough=2", "cough", "cough=1,cough=0", "", "=1"])
    def test_bad(self, text):
        with pytest.raises(UsageError):
            parse_indicator_spec(text)
