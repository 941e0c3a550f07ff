import json
import math

import numpy as np
import pytest

from semidyn.dynamics import GridSpec, Semigroup, WordBudget
from semidyn.expr import Compose, parse
from semidyn.verification import (Experiment, ExperimentRefused, Region, Tolerances,
                                  check_boundary_identity, check_cofinite_stabilizer,
                                  check_fundamental_set, check_generation, check_index,
                                  check_index_equality, check_monotonicity,
                                  check_rees_equality, commutation_defect,
                                  independent_boundary, meets_expectation, run_experiment)
from semidyn.words import (Alphabet, GeneratedBy, LengthMultiple, PrefixIs, min_length,
                           whole)

ZEXP = parse("z*exp(-(z^2/2 + 3*z/2 - 1))")
ATTRACTING = (math.sqrt(17) - 3) / 2
GRID = GridSpec(0j, 8.0, 8.0, 48, 48)


@pytest.fixture
def zexp():
    return Semigroup(Alphabet(("f",), abelian=True), (ZEXP,))


def test_tolerances_validated():
    with pytest.raises(ValueError):
        Tolerances(min_jaccard_sets=1.5)
    with pytest.raises(ValueError):
        Tolerances(max_violation_fraction=-0.1)


# ---------------------------------------------------------------- monotonicity

def test_monotonicity_same_semigroup_is_exact(sincos):
    r = check_monotonicity(sincos, whole(sincos.alphabet), GRID, WordBudget(2))
    assert r.verdict == "pass"
    assert r.metrics["jaccard_I"] == r.metrics["jaccard_F"] == r.metrics["jaccard_J"] == 1.0


@pytest.mark.parametrize("oracle", [PrefixIs(0), PrefixIs(1), min_length(Alphabet(("f", "g")), 2),
                                    GeneratedBy(((0, 0), (1, 1), (0, 1), (1, 0)))])
def test_monotonicity_never_violates_escaping_inclusion(sincos, oracle):
    r = check_monotonicity(sincos, oracle, GRID, WordBudget(3))
    assert r.metrics["violations_I"] == 0


def test_monotonicity_refuses_empty_word_set(sincos):
    with pytest.raises(ExperimentRefused):
        check_monotonicity(sincos, min_length(sincos.alphabet, 4), GRID, WordBudget(3))


def test_report_json_shape(sincos):
    r = check_monotonicity(sincos, PrefixIs(0), GRID, WordBudget(2))
    d = r.to_json()
    assert set(d) == {"name", "check", "anchor", "verdict", "metrics", "truncation",
                      "config_hash"}
    assert d["truncation"]["budget"] == {"max_word_len": 2, "N": 100, "R": 1e10,
                                         "horizon": "generator"}
    json.dumps(d, allow_nan=False)


def test_rerun_reproduces_report(sincos):
    a = check_monotonicity(sincos, PrefixIs(0), GRID, WordBudget(2)).to_json()
    b = check_monotonicity(sincos, PrefixIs(0), GRID, WordBudget(2), threads=3).to_json()
    assert a == b


# ---------------------------------------------------------------- index equality

def test_index_equality_same_semigroup(zexp):
    r = check_index_equality(zexp, whole(zexp.alphabet), GRID, WordBudget(2))
    assert r.verdict == "pass" and r.metrics["jaccard_I"] == 1.0
    assert r.metrics["jaccard_J"] == 1.0 and r.metrics["jaccard_F"] == 1.0


def test_index_equality_even_powers(zexp):
    r = check_index_equality(zexp, LengthMultiple(2), GRID, WordBudget(2))
    assert r.verdict == "pass"
    assert r.metrics["finite_index"]["value"] == 2


def test_index_equality_refuses_non_abelian(sincos):
    with pytest.raises(ExperimentRefused, match="abelian"):
        check_index_equality(sincos, whole(sincos.alphabet), GRID, WordBudget(2))


def test_index_equality_refuses_non_commuting():
    ab = Alphabet(("f", "g"), abelian=True)
    sg = Semigroup(ab, (parse("sin(z)"), parse("cos(z)")))
    with pytest.raises(ExperimentRefused, match="commute"):
        check_index_equality(sg, whole(ab), GRID, WordBudget(2))


def test_commuting_pair_passes_spot_check():
    f = parse("exp(z/4)")
    sg = Semigroup(Alphabet(("f", "g"), abelian=True), (f, Compose(f, f)))
    assert commutation_defect(sg, GRID) <= 1e-9


def test_index_equality_refuses_inexact(zexp):
    with pytest.raises(ExperimentRefused, match="Exact"):
        check_index_equality(zexp, LengthMultiple(3), GRID, WordBudget(3), max_index=1)


# ---------------------------------------------------------------- Rees

def test_rees_equality_same_semigroup(sincos):
    r = check_rees_equality(sincos, whole(sincos.alphabet), GRID, WordBudget(2))
    assert r.verdict == "pass" and r.metrics["rees_index"]["value"] == 1


def test_rees_equality_refuses_unbounded(zexp):
    with pytest.raises(ExperimentRefused, match="UnboundedUpTo"):
        check_rees_equality(zexp, LengthMultiple(2), GRID, WordBudget(2))


# ---------------------------------------------------------------- boundary

@pytest.mark.parametrize("formulas", [["sin(z)", "cos(z)"], ["exp(z)"],
                                      ["z*exp(-(z^2/2 + 3*z/2 - 1))"], ["z^2 - 1"]])
def test_boundary_identity(formulas):
    ab = Alphabet(tuple("fg"[:len(formulas)]))
    sg = Semigroup(ab, tuple(parse(f) for f in formulas))
    r = check_boundary_identity(sg, GRID, WordBudget(2))
    assert r.verdict == "pass"
    assert r.metrics["boundary_mismatch"] == 0


def test_boundary_all_escaping_has_empty_julia():
    sg = Semigroup(Alphabet(("f",)), (parse("exp(z)"),))
    r = check_boundary_identity(sg, GridSpec(1 + 0j, 6.0, 6.0, 48, 48), WordBudget(2))
    assert r.verdict == "pass" and r.metrics["pixels_J"] == 0


def test_independent_boundary_matches_rectangle():
    bits = np.zeros((9, 9), dtype=bool)
    bits[3:6, 3:6] = True
    want = np.zeros_like(bits)
    want[2:7, 2:7] = True
    want[4, 4] = False
    np.testing.assert_array_equal(independent_boundary(bits), want)


# ---------------------------------------------------------------- fundamental sets

EXP_S = Semigroup(Alphabet(("f",)), (parse("exp(z)"),))
LEFT = GridSpec(-1 + 0j, 10.0, 10.0, 128, 128)


def test_fundamental_disk_for_exp():
    r = check_fundamental_set(EXP_S, Region.disk(-4, 0.2), LEFT, WordBudget(3), samples=500)
    assert r.verdict == "pass"
    assert r.metrics["phase1_returning_words"] == {}
    assert r.metrics["fraction_in_F"] >= 0.995


def test_fundamental_flag_also_checks_escaping_set():
    r = check_fundamental_set(EXP_S, Region.disk(-4, 0.2), LEFT, WordBudget(3),
                              fundamental=True)
    assert r.verdict == "pass" and r.metrics["fraction_in_I"] == 1.0
    assert r.truncation["covering_condition"] == "declared"


def test_fixed_point_is_hypothesis_failure(sincos):
    r = check_fundamental_set(sincos, Region.disk(0, 0.2), GRID, WordBudget(3))
    assert r.verdict == "hypothesis-failed"
    assert "f" in r.metrics["phase1_returning_words"]


def test_region_preconditions():
    with pytest.raises(ValueError, match="degenerate"):
        Region.disk(0, 0.0)
    with pytest.raises(ValueError, match="degenerate"):
        Region.rect(0, 0, 0, 1)
    with pytest.raises(ValueError, match="inside"):
        check_fundamental_set(EXP_S, Region.disk(20, 1), LEFT, WordBudget(1))
    with pytest.raises(ValueError, match="no pixel"):
        check_fundamental_set(EXP_S, Region.disk(-4.01, 1e-4), LEFT, WordBudget(1))


def test_rect_region_sampling():
    r = Region.rect(-1, 1, 2, 3)
    pts = r.sample(200, seed=5)
    assert r.contains(pts).all()
    np.testing.assert_array_equal(pts, r.sample(200, seed=5))


# ---------------------------------------------------------------- stabilizers

def test_stabilizer_attracting_basin(zexp):
    g = GridSpec(0j, 8.0, 8.0, 128, 128)
    r = check_cofinite_stabilizer(zexp, g, WordBudget(3), points=[ATTRACTING])
    assert r.verdict == "pass"
    (entry,) = r.metrics["components"].values()
    assert entry["status"] == "found" and entry["witnesses"] == ["id"]


def test_stabilizer_never_fails(sincos):
    r = check_cofinite_stabilizer(sincos, GRID, WordBudget(2))
    assert r.verdict in ("pass", "indeterminate")
    assert r.truncation["no_wandering"] == "not verified"


def test_stabilizer_refuses_point_outside_fatou(zexp):
    with pytest.raises(ExperimentRefused):
        check_cofinite_stabilizer(zexp, GRID, WordBudget(2), points=[100.0])


# ---------------------------------------------------------------- combinatorial checks

def test_check_index_and_reference_note(free2, even_pairs):
    r = check_index(free2, even_pairs, "finite", 6, expect_kind="Exact", expect_value=3)
    assert r.verdict == "pass" and r.metrics["verdict"]["witnesses"] == ["id", "f", "g"]
    ab = Alphabet(("f",))
    r = check_index(ab, LengthMultiple(2), "cofinite", 12, expect_value=2, reference_value=1)
    assert r.verdict == "pass" and r.notes and r.metrics["agrees_with_reference"] is False
    assert check_index(ab, LengthMultiple(2), "finite", 12, expect_value=3).verdict == "fail"
    with pytest.raises(ValueError):
        check_index(ab, LengthMultiple(2), "weird", 12)


def test_check_generation(free2):
    assert check_generation(free2, min_length(free2, 2), 8, True).verdict == "pass"
    assert check_generation(free2, PrefixIs(0), 7).verdict == "hypothesis-failed"


# ---------------------------------------------------------------- experiments

def test_experiment_validation(sincos):
    with pytest.raises(ValueError):
        Experiment("x", "nonsense", sincos)
    with pytest.raises(ValueError):
        Experiment("x", "monotonicity", sincos, grid=GRID, budget=WordBudget(2))
    with pytest.raises(ValueError):
        Experiment("x", "boundary_identity", sincos)
    with pytest.raises(ValueError):
        Experiment("x", "boundary_identity", sincos, grid=GRID, budget=WordBudget(1),
                   expect="maybe")


def test_run_experiment_records_refusal(sincos):
    e = Experiment("nonab", "index_equality", sincos, whole(sincos.alphabet), GRID,
                   WordBudget(2))
    r = run_experiment(e)
    assert r.verdict == "refused" and "abelian" in r.notes[0]
    assert not meets_expectation(r, "any")


def test_expectations():
    class R:
        verdict = "indeterminate"
    assert meets_expectation(R, "any") and meets_expectation(R, "indeterminate")
    assert not meets_expectation(R, "pass")
