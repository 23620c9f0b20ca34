"""Acceptance gate. Each criterion prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import itertools
import json
import random
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import pytest

from prevfuse.data import path as data_path
from prevfuse.evaluation import (
    CaseReport,
    LabeledSample,
    build_cases,
    evaluate,
    parse_evaluation_csv,
    relative_difference,
    render_report,
    signed_improvement,
    weighted_improvement,
)
from prevfuse.fusion import IndicatorVector, equal_weights, fuse
from prevfuse.prevalence import aggregate_prevalence, derive_weights, parse_prevalence_csv, weights_from_estimates
from prevfuse.rounding import fmt

MODES = ("cough", "breath", "fever")
TABLE1 = [((1, 0, 1), "positive", 7), ((0, 1, 0), "negative", 198), ((0, 0, 1), "positive", 105),
          ((1, 1, 0), "negative", 6)]
TABLE1_FW = ("0.85", "0.15", "0.53", "0.47")
TABLE1_FR = ("0.67", "0.33", "0.33", "0.67")
PUBLISHED_REL = (26.9, -54.5, 60.6, -29.9)
TRIALS = 250


def _weights():
    table = aggregate_prevalence(parse_prevalence_csv(data_path("paper_prevalence.csv")), MODES)
    return derive_weights(table, MODES)


def _samples():
    return parse_evaluation_csv(data_path("table1_cases.csv"), MODES)


def ac1_weights():
    w = _weights()
    got = (w["fever"], w["cough"], w["breath"])
    ok = all(abs(g - e) <= 1e-3 for g, e in zip(got, (0.5287, 0.3163, 0.1550)))
    ok &= w.summary() == "cough=0.32 breath=0.15 fever=0.53"
    return ok, f"fever={got[0]:.4f} cough={got[1]:.4f} breath={got[2]:.4f}; display {w.summary()}"


def ac2_table_closure():
    paper = build_cases(_samples(), _weights(), "paper_rounding")
    full = build_cases(_samples(), _weights(), "full_precision")
    rows_ok = [(c.pattern, c.truth, c.occurrences) for c in paper] == TABLE1
    fw = tuple(fmt(c.f_w, 2) for c in paper)
    fr = tuple(fmt(c.f_r, 2) for c in paper)
    full_ok = all(
        abs(c.f_w - float(a)) <= 0.01 and abs(c.f_r - float(b)) <= 0.01 for c, a, b in zip(full, TABLE1_FW, TABLE1_FR)
    )
    ok = rows_ok and fw == TABLE1_FW and fr == TABLE1_FR and full_ok
    return ok, f"f_w={fw} f_r={fr}; full-precision within 0.01: {full_ok}"


def ac3_relative_differences():
    cases = build_cases(_samples(), _weights(), "paper_rounding")
    got = [c.rel_diff_pct for c in cases]
    ok = all(abs(g - e) <= 0.1 for g, e in zip(got, PUBLISHED_REL)) and len(got) == 4
    return ok, f"rel_diff={got}"


def _table1_cells():
    cells = []
    for i, ((p, t, n), a, b) in enumerate(zip(TABLE1, TABLE1_FW, TABLE1_FR)):
        rel = relative_difference(float(a), float(b))
        cells.append(CaseReport(i + 1, MODES, p, t, n, 100 * n / 316, float(a), float(b), rel, signed_improvement(rel, t)))
    return cells


def ac4_aggregate():
    paper = evaluate(_samples(), _weights(), "paper_rounding").weighted_improvement_pct
    exact = [Fraction(18, 67), Fraction(18, 33), Fraction(20, 33), Fraction(20, 67)]
    oracle = float(100 * sum(n * r for (_, _, n), r in zip(TABLE1, exact)) / 316)
    full = weighted_improvement(_table1_cells(), "full_precision")
    ok = abs(paper - 55.4) <= 0.05 and abs(full - 55.5) <= 0.1 and abs(full - oracle) <= 1e-9
    return ok, f"paper_rounding={paper:.3f}% full_precision={full:.3f}% oracle={oracle:.3f}%"


def ac5_case2_share():
    cases = evaluate(_samples(), _weights(), "paper_rounding").cases
    case2 = next(c for c in cases if c.pattern == (0, 1, 0) and c.truth == "negative")
    table = render_report(evaluate(_samples(), _weights(), "paper_rounding"), "table")
    ok = abs(case2.share_pct - 63.0) <= 0.5 and abs(case2.share_pct - 62.7) <= 0.05 and "62.7%" in table
    return ok, f"case 2 share={case2.share_pct:.2f}% of {sum(c.occurrences for c in cases)}"


def _random_weights(rng, n):
    return weights_from_estimates({f"m{i}": rng.uniform(0.01, 100) for i in range(n)})


def ac6_properties():
    rng = random.Random(20211)
    failures = []

    def check(name, cond):
        if not cond:
            failures.append(name)

    for _ in range(TRIALS):
        n = rng.randint(1, 6)
        est = {f"m{i}": rng.uniform(0.01, 100) for i in range(n)}
        w = weights_from_estimates(est)
        check("normalization", abs(sum(w.values()) - 1) <= 1e-9)

        k = rng.uniform(1e-3, 1e3)
        wk = weights_from_estimates({m: v * k for m, v in est.items()})
        check("scale", all(abs(a - b) <= 1e-9 for a, b in zip(w.values(), wk.values())))

        perm = list(est)
        rng.shuffle(perm)
        wp = weights_from_estimates(est, perm)
        check("permutation", all(abs(w[m] - wp[m]) <= 1e-15 for m in est))

        pattern = [rng.randint(0, 1) for _ in range(n)]
        score = fuse(IndicatorVector.from_pattern(w.mode_order, pattern), w).score
        check("bounds", 0 <= score <= 1)
        check("endpoints", (score == 1.0) == all(pattern) and (score == 0.0) == (not any(pattern)))
        for i in range(n):
            if not pattern[i]:
                up = pattern[:i] + [1] + pattern[i + 1 :]
                s2 = fuse(IndicatorVector.from_pattern(w.mode_order, up), w).score
                check("monotonicity", abs((s2 - score) - w.values()[i]) <= 1e-12)

        p = rng.uniform(0.01, 100)
        weq = weights_from_estimates({m: p for m in est})
        eq = equal_weights(list(est))
        iv = IndicatorVector.from_pattern(w.mode_order, pattern)
        check("equal-baseline", abs(fuse(iv, weq).score - fuse(iv, eq).score) <= 1e-12)

        n4 = rng.randint(1, 4)
        w4 = _random_weights(rng, n4)
        for pat in itertools.product((0, 1), repeat=n4):
            expected = 0.0
            for b, wi in zip(pat, w4.values()):
                expected += b * wi
            got = fuse(IndicatorVector.from_pattern(w4.mode_order, pat), w4).score
            check("dot-product oracle", abs(got - expected) <= 1e-12)

        samples = [
            LabeledSample(f"s{j}", rng.choice(["positive", "negative"]),
                          IndicatorVector.from_pattern(w4.mode_order, [rng.randint(0, 1) for _ in range(n4)]))
            for j in range(rng.randint(1, 40))
        ]
        shuffled = samples[:]
        rng.shuffle(shuffled)
        mode = rng.choice(["full_precision", "paper_rounding"])
        a, b = evaluate(samples, w4, mode), evaluate(shuffled, w4, mode)
        check("order-independence", a.cases == b.cases and a.weighted_improvement_pct == b.weighted_improvement_pct)

    names = sorted(set(failures))
    return not failures, f"{TRIALS} trials per property; failing: {names or 'none'}"


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "prevfuse", *args], capture_output=True, text=True)


def ac7_cli():
    notes = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        w1, w2, log = tmp / "w1.json", tmp / "w2.json", tmp / "screen.jsonl"
        prev = str(data_path("paper_prevalence.csv"))
        r = _cli("weights", "--prevalence", prev, "--out", str(w1))
        notes.append(("weights exit 0", r.returncode == 0 and r.stdout.strip() == "cough=0.32 breath=0.15 fever=0.53"))
        _cli("weights", "--prevalence", prev, "--out", str(w2))
        d1 = json.loads(w1.read_text())["source_digest"]
        notes.append(("digest stable", d1 == json.loads(w2.read_text())["source_digest"]))

        runs = [
            ("--indicators", "cough=1,breath=0,fever=1"),
            ("--indicators", "cough=1,fever=1"),
            ("--observations", str(data_path("example_observations.csv"))),
        ]
        codes = [_cli("screen", "--weights", str(w1), *a, "--log", str(log)).returncode for a in runs]
        notes.append(("screen exit 0", codes == [0, 0, 0]))
        lines = log.read_text().splitlines()
        notes.append(("log one line per run", len(lines) == 3 and all(isinstance(json.loads(x), dict) for x in lines)))
        notes.append(("threshold exit 3", _cli("screen", "--weights", str(w1), "--indicators",
                                                "cough=1,breath=0,fever=1", "--threshold", "50").returncode == 3))

        r = _cli("evaluate", "--dataset", str(data_path("table1_cases.csv")), "--weights", str(w1), "--rounding", "paper")
        notes.append(("evaluate 55.4%", r.returncode == 0 and "weighted_improvement=55.4%" in r.stdout))
        notes.append(("missing file exit 2", _cli("weights", "--prevalence", str(tmp / "none.csv")).returncode == 2))
        notes.append(("usage exit 1", _cli("screen", "--weights", str(w1), "--indicators", "cough=7").returncode == 1))
        empty = tmp / "empty.csv"
        empty.write_text("subject_id,truth,cough,breath,fever\n")
        notes.append(("empty dataset exit 2",
                      _cli("evaluate", "--dataset", str(empty), "--weights", str(w1)).returncode == 2))
    failed = [n for n, ok in notes if not ok]
    return not failed, f"{len(notes) - len(failed)}/{len(notes)} checks; failing: {failed or 'none'}"


CRITERIA = [
    ("AC1 weight derivation", ac1_weights),
    ("AC2 Table I closure", ac2_table_closure),
    ("AC3 per-case relative differences", ac3_relative_differences),
    ("AC4 aggregate improvement", ac4_aggregate),
    ("AC5 case-2 share", ac5_case2_share),
    ("AC6 property suites", ac6_properties),
    ("AC7 end-to-end CLI", ac7_cli),
]


@pytest.mark.parametrize("name, check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    import logging

    # zero-baseline exclusions in the random trials are expected
    logging.getLogger("prevfuse").setLevel(logging.ERROR)
    results = []
    for name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    sys.exit(0 if all(results) else 1)
