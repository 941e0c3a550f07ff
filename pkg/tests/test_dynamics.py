import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semidyn.dynamics import (MAX_CUBE_ENTRIES, GridMismatchError, GridSpec, Mask,
                              ResourceError, Semigroup, WordBudget, classify_images,
                              component_image, escaping_mask, fatou_julia_masks, frame,
                              label_components, mask_compare, mask_subset_violations,
                              stabilizer_probe)
from semidyn.expr import Compose, Z, parse
from semidyn.words import IDENTITY, Alphabet, enumerate_words

EXP = parse("exp(z)")
ZEXP = parse("z*exp(-(z^2/2 + 3*z/2 - 1))")
ATTRACTING = (math.sqrt(17) - 3) / 2
EXP_WINDOW = GridSpec(1 + 0j, 6.0, 6.0, 64, 64)   # [-2, 4] x [-3, 3]


# ---------------------------------------------------------------- grid

def test_grid_pixel_centres_and_orientation():
    g = GridSpec(0j, 4.0, 2.0, 4, 2)
    assert g.point(0, 0) == complex(-1.5, 0.5)     # top-left: max imaginary part
    assert g.point(1, 3) == complex(1.5, -0.5)
    np.testing.assert_array_equal(g.points()[1, 3], g.point(1, 3))


@given(st.integers(0, 39), st.integers(0, 29))
def test_pixel_of_inverts_point(i, j):
    g = GridSpec(0.3 - 1j, 5.0, 3.0, 30, 40)
    pi, pj = g.pixel_of(g.point(i, j))
    assert (int(pi), int(pj)) == (i, j)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0j, 0.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        GridSpec(0j, 1.0, 1.0, 0, 4)
    with pytest.raises(ResourceError):
        GridSpec(0j, 1.0, 1.0, 5000, 5000)
    assert not GridSpec(0j, 1.0, 1.0, 4, 4).contains(complex(math.nan, 0))


def test_mask_shape_and_tag_checked():
    g = GridSpec(0j, 1.0, 1.0, 3, 2)
    with pytest.raises(ValueError):
        Mask(g, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        Mask(g, np.zeros((2, 3)), "nonsense")


# ---------------------------------------------------------------- escaping mask

def test_exp_positive_reals_escape():
    esc = escaping_mask([EXP], EXP_WINDOW, WordBudget(1))
    xs = EXP_WINDOW.xs()
    row = EXP_WINDOW.rows // 2
    assert esc.mask.bits[row, xs > 1].all()
    assert esc.cube.shape == (1, 64, 64) and esc.cube.dtype == np.int32


def test_exp_window_escapes_everywhere():
    # exp has no Fatou components here: every sampled orbit leaves R = 1e10
    esc = escaping_mask([EXP], EXP_WINDOW, WordBudget(3))
    assert esc.mask.bits.all()
    F, J = fatou_julia_masks(esc.mask)
    assert J.count == 0


def test_sin_fixed_point_not_escaping():
    g = GridSpec(0j, 2.0, 2.0, 3, 3)   # centre pixel sits on 0
    esc = escaping_mask([parse("sin(z)")], g, WordBudget(2))
    assert not esc.mask.bits[1, 1]


def test_powers_of_exp_give_identical_cube():
    g = GridSpec(0j, 4.0, 4.0, 32, 32)
    a = escaping_mask([EXP], g, WordBudget(1, 40), words=[(0,), (0, 0)])
    b = escaping_mask([EXP, Compose(EXP, EXP)], g, WordBudget(1, 40), words=[(0,), (1,)])
    np.testing.assert_array_equal(a.mask.bits, b.mask.bits)


def test_nonempty_julia_and_fatou_for_zexp():
    g = GridSpec(0j, 8.0, 8.0, 64, 64)
    esc = escaping_mask([ZEXP], g, WordBudget(2))
    F, J = fatou_julia_masks(esc.mask)
    assert F.count > 0 and J.count > 0


def test_budget_monotonicity(sincos, small_grid):
    masks = [escaping_mask(sincos.generators, small_grid, WordBudget(L, horizon="word"),
                           alphabet=sincos.alphabet).mask for L in (1, 2, 3)]
    for hi, lo in zip(masks[1:], masks):
        assert mask_subset_violations(hi, lo) == 0


def test_generator_inclusion(sincos, small_grid):
    full = escaping_mask(sincos.generators, small_grid, WordBudget(2), alphabet=sincos.alphabet)
    for a in range(2):
        single = full.restrict([w for w in full.words if set(w) == {a}])
        assert mask_subset_violations(full.mask, single.mask) == 0


def test_restrict_matches_fresh_computation(sincos, small_grid):
    b = WordBudget(2)
    full = escaping_mask(sincos.generators, small_grid, b, alphabet=sincos.alphabet)
    sub = [(0, 0), (1, 0)]
    fresh = escaping_mask(sincos.generators, small_grid, b, words=sub)
    np.testing.assert_array_equal(full.restrict(sub).cube, fresh.cube)
    with pytest.raises(KeyError):
        full.restrict([(0, 0, 0)])


def test_cube_cap(monkeypatch, small_grid):
    import semidyn.dynamics as d
    monkeypatch.setattr(d, "MAX_CUBE_ENTRIES", small_grid.size)
    with pytest.raises(ResourceError):
        escaping_mask([EXP], small_grid, WordBudget(2))
    assert MAX_CUBE_ENTRIES == 1 << 28


def test_budget_horizon():
    b = WordBudget(3, 100)
    assert [b.steps_for(w) for w in ((0,), (0, 0), (0, 0, 0))] == [100, 50, 34]
    assert WordBudget(3, 100, horizon="word").steps_for((0, 0, 0)) == 100
    with pytest.raises(ValueError):
        WordBudget(3, horizon="other")
    with pytest.raises(ValueError):
        WordBudget(0)
    with pytest.raises(ValueError):
        WordBudget(2, 10, 1.0)


# ---------------------------------------------------------------- morphology

def _imask(bits):
    bits = np.asarray(bits, dtype=bool)
    return Mask(GridSpec(0j, 1.0, 1.0, bits.shape[1], bits.shape[0]), bits, "I_approx")


def test_all_true_mask():
    F, J = fatou_julia_masks(_imask(np.ones((6, 7))))
    assert J.count == 0 and F.count == 4 * 5


def test_filled_rectangle_outline():
    bits = np.zeros((10, 10), dtype=bool)
    bits[3:7, 3:7] = True
    F, J = fatou_julia_masks(_imask(bits))
    want = np.zeros_like(bits)
    want[2:8, 2:8] = True
    want[4:6, 4:6] = False
    np.testing.assert_array_equal(J.bits, want)


def test_fatou_julia_requires_escaping_tag():
    with pytest.raises(ValueError):
        fatou_julia_masks(Mask(GridSpec(0j, 1.0, 1.0, 4, 4), np.zeros((4, 4)), "custom"))


bit_grids = st.integers(3, 14).flatmap(lambda r: st.integers(3, 14).flatmap(
    lambda c: st.lists(st.booleans(), min_size=r * c, max_size=r * c).map(
        lambda b: np.array(b, dtype=bool).reshape(r, c))))


@given(bit_grids)
def test_partition_and_symmetry(bits):
    I = _imask(bits)
    F, J = fatou_julia_masks(I)
    fr = frame(I.grid)
    assert not (F.bits & J.bits).any()
    np.testing.assert_array_equal(F.bits | J.bits | fr, np.ones_like(bits))
    assert not ((F.bits | J.bits) & fr).any()
    _, Jc = fatou_julia_masks(_imask(~bits))
    np.testing.assert_array_equal(J.bits, Jc.bits)


# ---------------------------------------------------------------- comparisons

def test_mask_compare_examples():
    g = GridSpec(0j, 1.0, 1.0, 2, 2)
    m = Mask(g, [[True, False], [False, True]])
    assert mask_compare(m, m) == {"jaccard": 1.0, "a_minus_b": 0, "b_minus_a": 0}
    assert mask_compare(m, ~m)["jaccard"] == 0.0
    full, half = Mask(g, np.ones((2, 2))), Mask(g, [[True, True], [False, False]])
    assert mask_compare(full, half) == {"jaccard": 0.5, "a_minus_b": 2, "b_minus_a": 0}
    empty = Mask(g, np.zeros((2, 2)))
    assert mask_compare(empty, empty)["jaccard"] == 1.0
    assert mask_subset_violations(empty, m) == 0
    with pytest.raises(GridMismatchError):
        mask_compare(m, Mask(GridSpec(1j, 1.0, 1.0, 2, 2), np.ones((2, 2))))


# ---------------------------------------------------------------- components

def _fmask(bits):
    bits = np.asarray(bits, dtype=bool)
    return Mask(GridSpec(0j, 1.0, 1.0, bits.shape[1], bits.shape[0]), bits, "F_approx")


def test_labels_partition_fatou_pixels(sincos, small_grid):
    esc = escaping_mask(sincos.generators, small_grid, WordBudget(2), alphabet=sincos.alphabet)
    F, _ = fatou_julia_masks(esc.mask)
    comps = label_components(F)
    np.testing.assert_array_equal(comps.labels > 0, F.bits)
    assert comps.sizes()[1:].sum() == F.count
    with pytest.raises(ValueError):
        label_components(esc.mask)


def test_two_rectangles_and_empty():
    bits = np.zeros((8, 8), dtype=bool)
    bits[1:3, 1:3] = True
    bits[5:7, 4:7] = True
    comps = label_components(_fmask(bits))
    assert comps.count == 2 and comps.labels[1, 1] == 1 and comps.labels[5, 4] == 2
    assert label_components(_fmask(np.zeros((4, 4)))).count == 0


@pytest.fixture(scope="module")
def zexp_components():
    g = GridSpec(0j, 8.0, 8.0, 128, 128)
    esc = escaping_mask([ZEXP], g, WordBudget(3))
    F, _ = fatou_julia_masks(esc.mask)
    return label_components(F)


def test_identity_image_is_own_label(zexp_components):
    c = zexp_components
    for label in range(1, min(c.count, 6) + 1):
        if c.sizes()[label] >= 1:
            assert component_image(label, Z, c, 16).label == label


def test_large_positive_reals_map_to_attracting_basin(zexp_components):
    c = zexp_components
    U = c.label_at(3.5)
    assert U > 0
    img = component_image(U, ZEXP, c, 64)
    assert img.kind == "label" and img.label == c.label_at(ATTRACTING)


def test_offgrid_and_escaped_images(zexp_components):
    c = zexp_components
    U = c.label_at(ATTRACTING)
    assert component_image(U, parse("z + 100"), c, 16).kind == "OffGrid"
    assert component_image(U, parse("exp(z + 800)"), c, 16).kind == "Escaped"
    with pytest.raises(ValueError):
        component_image(U, ZEXP, c, 8)


def test_split_image():
    bits = np.zeros((8, 8), dtype=bool)
    bits[1:3, 1:7] = True
    bits[5:7, 1:7] = True
    c = label_components(_fmask(bits))
    g = c.grid
    pts = np.array([g.point(1, 1)] * 10 + [g.point(5, 1)] * 10)
    assert classify_images(pts, c).kind == "Split"


def test_stabilizer_probe_sin_basin():
    # image shares sit near the 90% plurality line on coarser windows
    g = GridSpec(0j, 1.0, 1.0, 65, 65)
    sg = Semigroup(Alphabet(("f",)), (parse("sin(z)"),))
    esc = escaping_mask(sg.generators, g, WordBudget(3))
    F, _ = fatou_julia_masks(esc.mask)
    comps = label_components(F)
    probe = stabilizer_probe(comps, sg, enumerate_words(sg.alphabet, 3), include_identity=True)
    U = comps.label_at(0)
    assert U > 0
    assert probe.stabilizers[U] == [IDENTITY, (0,), (0, 0), (0, 0, 0)]
    assert probe.closure_violations[U] == []


def test_stabilizer_probe_exp_escaping_component():
    g = GridSpec(1 + 0j, 6.0, 6.0, 48, 48)
    sg = Semigroup(Alphabet(("f",)), (EXP,))
    esc = escaping_mask(sg.generators, g, WordBudget(2))
    F, _ = fatou_julia_masks(esc.mask)
    comps = label_components(F)
    probe = stabilizer_probe(comps, sg, enumerate_words(sg.alphabet, 2))
    assert all(v == [] for v in probe.stabilizers.values())


def test_stabilizer_closure_within_budget(sincos, small_grid):
    esc = escaping_mask(sincos.generators, small_grid, WordBudget(2), alphabet=sincos.alphabet)
    F, _ = fatou_julia_masks(esc.mask)
    comps = label_components(F)
    probe = stabilizer_probe(comps, sincos, enumerate_words(sincos.alphabet, 3),
                             include_identity=True, min_pixels=16)
    for label, rec in probe.stabilizers.items():
        assert IDENTITY in rec
        assert probe.closure_violations[label] == []
