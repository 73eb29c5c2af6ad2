"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with its measured numbers
and runtime; the lines are repeated in the pytest terminal summary.  Run
with ``pytest tests/test_acceptance.py -s`` to see them inline.
"""

import itertools
import json
import os
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from entmap import linalg
from entmap.axioms import default_measures, check_separable, check_unitary_invariance, MeasureSpec
from entmap.cli import main
from entmap.locc import trajectory
from entmap.measures import MeasureId, evaluate, is_applicable, relative_entropy_of_entanglement
from entmap.ordering import (
    Convertibility,
    Ensemble,
    Verdict,
    compare,
    convertibility_of_spectra,
    evaluate_ensemble,
    find_discordant,
)
from entmap.states import bell, load_state, random_mixed, require_valid, tiles_upb_state, werner

FIXTURES = Path(__file__).parent / "fixtures"
WORKERS = os.cpu_count() or 1

# regression constants frozen from independent oracle runs
PINNED_DISCORDANT_FRACTION = 0.0692530657748049
TILES_REALIGNMENT_NORM = 1.087412464837521

RESULTS = []


@contextmanager
def criterion(name, budget):
    """Time a criterion, record a PASS/FAIL line, re-raise on failure."""
    info = {}
    start = time.perf_counter()
    failure = None
    try:
        yield info
    except AssertionError as exc:
        failure = exc
    elapsed = time.perf_counter() - start
    over = elapsed >= budget
    ok = failure is None and not over
    detail = ", ".join(f"{k}={v}" for k, v in info.items())
    if failure is not None:
        detail = f"{detail}; assertion failed: {failure}".lstrip("; ")
    if over:
        detail = f"{detail}; runtime over budget".lstrip("; ")
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail} [{elapsed:.1f} s / {budget:g} s]"
    RESULTS.append(line)
    print(line)
    if failure is not None:
        raise failure
    assert not over, f"{name} took {elapsed:.1f} s, budget {budget:g} s"


@pytest.fixture(scope="module")
def campaign():
    return find_discordant(Ensemble(dims=(2, 2), kind="mixed", rank=(2, 3), count=300, seed=42), "Ef", "En")


def test_closed_form_anchors():
    with criterion("closed-form anchors", 10) as info:
        rho = bell(0).density()
        got = {m: evaluate(m, rho).value for m in ("En", "logEn", "C", "Ef")}
        er, _ = relative_entropy_of_entanglement(rho, restarts=5)
        worst = max(abs(got["En"] - 0.5), abs(got["logEn"] - 1), abs(got["C"] - 1), abs(got["Ef"] - 1))
        info["bell_max_dev"] = f"{worst:.1e}"
        info["bell_Er"] = f"{er.value:.6f}"
        assert worst <= 1e-9
        assert 0.99 <= er.value <= 1.01
        dev = 0.0
        for p in np.round(np.arange(11) * 0.1, 10):
            w = werner(p)
            dev = max(dev, abs(evaluate("En", w).value - max(0.0, (3 * p - 1) / 4)))
            dev = max(dev, abs(evaluate("C", w).value - max(0.0, (3 * p - 1) / 2)))
        info["werner_max_dev"] = f"{dev:.1e}"
        assert dev <= 1e-9


def test_separable_states_vanish():
    with criterion("separable mixtures", 120) as info:
        measures = default_measures() + [MeasureSpec.builtin(MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT)]
        rows = check_separable(measures, 200)
        for r in rows:
            info[r.measure] = f"{r.max_violation:.1e}"
        for r in rows:
            assert r.trials == 200
            assert r.max_violation <= (1e-3 if r.measure == "Er" else 1e-9), r


def test_local_unitary_invariance():
    with criterion("local unitary invariance", 30) as info:
        rows = check_unitary_invariance(default_measures(), 200)
        for r in rows:
            info[r.measure] = f"{r.max_violation:.1e}"
        for r in rows:
            assert r.trials == 200 and r.max_violation <= 1e-8, r


def test_local_operations(tmp_path):
    with criterion("local operations + verify-axioms", 120) as info:
        out = tmp_path / "axioms.json"
        code = main(["verify-axioms", "--dims", "2,2", "--trials", "1000", "--out", str(out)])
        info["exit"] = code
        rows = json.loads(out.read_text())["results"]
        for measure, prop in itertools.product(("En", "Ef"), ("channel-monotone", "measurement-monotone")):
            row = next(r for r in rows if r["measure"] == measure and r["property"] == prop)
            info[f"{measure}/{prop}"] = f"{row['max_violation']:.1e}"
            assert row["trials"] >= 1000
            assert row["max_violation"] <= 1e-9
        assert code == 0


def test_discordance_reproduction(campaign):
    with criterion("discordance reproduction", 60) as info:
        # the campaign itself is shared with the witness criterion; time it here
        s = find_discordant(campaign.ensemble, "Ef", "En").stats
        info["fraction"] = s["discordant_fraction"]
        info["robust"] = s["robust_discordant"]
        assert s == campaign.stats
        assert s["discordant_fraction"] > 0
        assert s["robust_discordant"] >= 1
        assert abs(s["discordant_fraction"] - PINNED_DISCORDANT_FRACTION) <= 0.5 * PINNED_DISCORDANT_FRACTION
        first = load_state(FIXTURES / "discordant_first.json")
        second = load_state(FIXTURES / "discordant_second.json")
        assert compare(first, second, "Ef", "En", tol=1e-5).verdict is Verdict.DISCORDANT


def test_pure_state_concordance():
    with criterion("pure-state concordance", 10) as info:
        ens = Ensemble(dims=(2, 2), kind="pure", count=200, seed=42)
        ids = [m for m in MeasureId if is_applicable(m, ens.state(0))]
        values = evaluate_ensemble(ens, ids, workers=WORKERS)
        worst_fraction = 0.0
        for a, b in itertools.combinations(range(len(ids)), 2):
            r = find_discordant(ens, ids[a], ids[b], values=values[:, [a, b]])
            worst_fraction = max(worst_fraction, r.stats["discordant_fraction"])
        ef = values[:, ids.index(MeasureId.ENTANGLEMENT_OF_FORMATION)]
        ent = values[:, ids.index(MeasureId.ENTROPY_OF_ENTANGLEMENT)]
        info["pairs"] = len(ids) * (len(ids) - 1) // 2
        info["max_fraction"] = worst_fraction
        info["max_Ef_minus_E"] = f"{np.max(np.abs(ef - ent)):.1e}"
        assert worst_fraction == 0.0
        assert np.max(np.abs(ef - ent)) <= 1e-8


def test_trajectories_point_lower_left():
    with criterion("trajectory monotonicity", 60) as info:
        worst = 0.0
        n, k = 0, 0
        while n < 50:
            rho = random_mixed((2, 2), (77, k), rank=1 + k % 2)
            k += 1
            if evaluate("En", rho).value <= 1e-6:
                continue
            t = trajectory(rho, 10, "En", "Ef", seed=(1000 + n))
            assert len(t.points) == 11
            worst = max(worst, t.max_increase())
            n += 1
        info["trajectories"] = n
        info["max_increase"] = f"{worst:.1e}"
        assert worst <= 1e-9


def test_bound_entanglement_exhibit():
    with criterion("bound-entanglement exhibit", 5) as info:
        rho = require_valid(tiles_upb_state())
        neg = evaluate("En", rho).value
        norm = linalg.singular_value_sum(linalg.realign(rho.mat, rho.dims))
        info["En"] = f"{neg:.1e}"
        info["realignment_norm"] = repr(norm)
        assert abs(neg) <= 1e-10
        assert norm == pytest.approx(TILES_REALIGNMENT_NORM, abs=1e-12)
        assert norm > 1


def test_incomparability_witnesses(campaign):
    with criterion("incomparability witnesses", 1) as info:
        info["records"] = len(campaign.records)
        assert campaign.records
        assert all(r.satisfies_witness() for r in campaign.records)
        verdict = convertibility_of_spectra((0.5, 0.4, 0.1), (0.6, 0.2, 0.2))
        info["majorization"] = verdict.value
        assert verdict is Convertibility.INCOMPARABLE
