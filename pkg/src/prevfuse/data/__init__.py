"""Bundled fixtures.

paper_prevalence.csv   published per-symptom average prevalences (percent)
table1_cases.csv       316 labeled samples forming the four published cases
example_observations.csv   one subject with two audio scores and a temperature
"""

from pathlib import Path

DATA_DIR = Path(__file__).parent


def path(name: str) -> Path:
    return DATA_DIR / name
