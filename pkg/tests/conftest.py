import pytest

from prevfuse.data import path as data_path
from prevfuse.evaluation import parse_evaluation_csv
from prevfuse.prevalence import WeightVector, aggregate_prevalence, derive_weights, parse_prevalence_csv

MODES = ("cough", "breath", "fever")

# published cases: (pattern over cough,breath,fever), truth, occurrences
TABLE1 = [
    ((1, 0, 1), "positive", 7),
    ((0, 1, 0), "negative", 198),
    ((0, 0, 1), "positive", 105),
    ((1, 1, 0), "negative", 6),
]
TABLE1_FW = (0.85, 0.15, 0.53, 0.47)
TABLE1_FR = (0.67, 0.33, 0.33, 0.67)


@pytest.fixture
def paper_table():
    return aggregate_prevalence(parse_prevalence_csv(data_path("paper_prevalence.csv")), MODES)


@pytest.fixture
def paper_weights(paper_table):
    return derive_weights(paper_table, MODES)


@pytest.fixture
def rounded_weights():
    return WeightVector({"cough": 0.32, "breath": 0.15, "fever": 0.53}, MODES)


@pytest.fixture
def table1_samples():
    return parse_evaluation_csv(data_path("table1_cases.csv"), MODES)
