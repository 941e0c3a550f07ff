"""Desk-scale experiments that compare escaping/Fatou/Julia approximations of
a semigroup and a subsemigroup, plus the combinatorial index checks.

Each check returns a :class:`TheoremReport`. Verdicts:

``pass`` / ``fail``      the stated relation held / was violated
``indeterminate``        the computation could not decide (unresolved images)
``hypothesis-failed``    the premise was not met; nothing is claimed
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .dynamics import (ComponentMap, GridSpec, Mask, Semigroup, WordBudget,
                       classify_images, escaping_mask, fatou_julia_masks, frame,
                       label_components, mask_compare, mask_subset_violations,
                       probe_labels, sample_pixels, MIN_SAMPLES)
from .words import (IDENTITY, Alphabet, NotApplicableError, Oracle,
                    check_finitely_generated_extension, cofinite_index,
                    finite_index, rees_index)


class ExperimentRefused(ValueError):
    """The experiment's preconditions do not hold; it was not run."""


@dataclass(frozen=True)
class Tolerances:
    min_jaccard_sets: float = 0.98
    min_jaccard_boundary: float = 0.95
    max_violation_fraction: float = 0.005

    def __post_init__(self):
        for v in (self.min_jaccard_sets, self.min_jaccard_boundary, self.max_violation_fraction):
            if not 0.0 <= v <= 1.0:
                raise ValueError("tolerances must lie in [0, 1]")

    def to_json(self):
        return {"min_jaccard_sets": self.min_jaccard_sets,
                "min_jaccard_boundary": self.min_jaccard_boundary,
                "max_violation_fraction": self.max_violation_fraction}


@dataclass
class TheoremReport:
    name: str
    check: str
    anchor: str
    verdict: str
    metrics: dict
    truncation: dict
    config_hash: str
    notes: list = field(default_factory=list)
    masks: dict = field(default_factory=dict, repr=False)   # not serialised

    def to_json(self) -> dict:
        out = {"name": self.name, "check": self.check, "anchor": self.anchor,
               "verdict": self.verdict, "metrics": self.metrics,
               "truncation": self.truncation, "config_hash": self.config_hash}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def config_hash(desc: dict) -> str:
    blob = json.dumps(desc, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def describe_semigroup(sg: Semigroup) -> dict:
    return {"generators": {n: g.formula() for n, g in zip(sg.alphabet.names, sg.generators)},
            "abelian": sg.alphabet.abelian}


@dataclass
class SetApprox:
    I: Mask
    F: Mask
    J: Mask
    escape: object


def approximate(sg: Semigroup, grid: GridSpec, budget: WordBudget, threads=None) -> SetApprox:
    esc = escaping_mask(sg.generators, grid, budget, alphabet=sg.alphabet, threads=threads)
    F, J = fatou_julia_masks(esc.mask)
    return SetApprox(esc.mask, F, J, esc)


def _restrict(full: SetApprox, words) -> SetApprox:
    esc = full.escape.restrict(words)
    F, J = fatou_julia_masks(esc.mask)
    return SetApprox(esc.mask, F, J, esc)


def _sub_words(sg: Semigroup, oracle: Oracle, budget: WordBudget):
    words = [w for w in budget.words(sg.alphabet) if oracle.accepts(w, sg.alphabet.abelian)]
    if not words:
        raise ExperimentRefused("the oracle accepts no word of the budget")
    return words


def _truncation(sg, grid, budget, **extra):
    out = {"budget": budget.to_json(), "grid": grid.to_json(),
           "words_in_S": len(budget.words(sg.alphabet))}
    out.update(extra)
    return out


def _equality_metrics(S: SetApprox, T: SetApprox):
    ci, cf, cj = mask_compare(S.I, T.I), mask_compare(S.F, T.F), mask_compare(S.J, T.J)
    return {"jaccard_I": ci["jaccard"], "jaccard_F": cf["jaccard"], "jaccard_J": cj["jaccard"],
            "I_S_minus_T": ci["a_minus_b"], "I_T_minus_S": ci["b_minus_a"],
            "pixels_I_S": S.I.count, "pixels_I_T": T.I.count,
            "pixels_J_S": S.J.count, "pixels_J_T": T.J.count}


def _equality_verdict(m, tol: Tolerances):
    ok = (m["jaccard_I"] >= tol.min_jaccard_sets and m["jaccard_F"] >= tol.min_jaccard_sets
          and m["jaccard_J"] >= tol.min_jaccard_boundary)
    return "pass" if ok else "fail"


# --------------------------------------------------------------------------

def check_monotonicity(sg: Semigroup, oracle: Oracle, grid: GridSpec, budget: WordBudget,
                       tol: Tolerances = Tolerances(), name="monotonicity",
                       threads=None) -> TheoremReport:
    """I(S) <= I(T), F(S) <= F(T), J(S) >= J(T) for a subsemigroup T."""
    t_words = _sub_words(sg, oracle, budget)
    S = approximate(sg, grid, budget, threads)
    T = _restrict(S, t_words)
    n = grid.size
    v_i = mask_subset_violations(S.I, T.I)
    v_f = mask_subset_violations(S.F, T.F)
    v_j = mask_subset_violations(T.J, S.J)
    limit = tol.max_violation_fraction * n
    m = {"violations_I": v_i, "violations_F": v_f, "violations_J": v_j,
         "violation_fraction_F": v_f / n, "violation_fraction_J": v_j / n,
         "pixels": n}
    m.update(_equality_metrics(S, T))
    verdict = "pass" if (v_i == 0 and v_f <= limit and v_j <= limit) else "fail"
    desc = {"check": "monotonicity", "semigroup": describe_semigroup(sg),
            "oracle": oracle.describe(sg.alphabet), "grid": grid.to_json(),
            "budget": budget.to_json(), "tolerances": tol.to_json()}
    return TheoremReport(
        name, "monotonicity", "T subsemigroup of S: I(S) in I(T), F(S) in F(T), J(S) contains J(T)",
        verdict, m, _truncation(sg, grid, budget, words_in_T=len(t_words)),
        config_hash(desc), masks=_mask_dump(S, T))


def _mask_dump(S: SetApprox, T: SetApprox | None = None):
    out = {"I_S": S.I, "F_S": S.F, "J_S": S.J}
    if T is not None:
        out.update({"I_T": T.I, "F_T": T.F, "J_T": T.J})
    return out


def commutation_defect(sg: Semigroup, grid: GridSpec, points: int = 32, seed: int = 0) -> float:
    """Largest relative mismatch of f o g against g o f over generator pairs,
    at points drawn uniformly from the grid window."""
    rng = np.random.default_rng(seed)
    x = grid.center.real + (rng.random(points) - 0.5) * grid.width
    y = grid.center.imag + (rng.random(points) - 0.5) * grid.height
    z = x + 1j * y
    worst = 0.0
    gens = sg.generators
    with np.errstate(all="ignore"):
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                fg = gens[a](gens[b](z))
                gf = gens[b](gens[a](z))
                ok = np.isfinite(fg) & np.isfinite(gf)
                if not ok.all() and not np.array_equal(np.isfinite(fg), np.isfinite(gf)):
                    return float("inf")
                scale = np.maximum(np.abs(fg[ok]), 1.0)
                if ok.any():
                    worst = max(worst, float(np.max(np.abs(fg[ok] - gf[ok]) / scale)))
    return worst


def check_index_equality(sg: Semigroup, oracle: Oracle, grid: GridSpec, budget: WordBudget,
                         index_bound: int = 8, max_index: int = 6,
                         tol: Tolerances = Tolerances(), name="index_equality",
                         threads=None) -> TheoremReport:
    """T of finite or cofinite index in an abelian S: I, J, F agree."""
    ab = sg.alphabet
    if not ab.abelian:
        raise ExperimentRefused("index equality needs an abelian semigroup (set abelian = true)")
    defect = commutation_defect(sg, grid)
    if not defect <= 1e-9:
        raise ExperimentRefused(f"generators do not commute (relative defect {defect:.3g})")
    fin = finite_index(ab, oracle, index_bound, max_index)
    cof = cofinite_index(ab, oracle, index_bound, max_index)
    if not (fin.exact or cof.exact):
        raise ExperimentRefused(
            f"neither finite ({fin.kind}) nor cofinite ({cof.kind}) index is Exact at bound {index_bound}")
    t_words = _sub_words(sg, oracle, budget)
    S = approximate(sg, grid, budget, threads)
    T = _restrict(S, t_words)
    m = _equality_metrics(S, T)
    m["finite_index"] = fin.to_json(ab)
    m["cofinite_index"] = cof.to_json(ab)
    m["commutation_defect"] = defect
    desc = {"check": "index_equality", "semigroup": describe_semigroup(sg),
            "oracle": oracle.describe(ab), "grid": grid.to_json(), "budget": budget.to_json(),
            "index_bound": index_bound, "max_index": max_index, "tolerances": tol.to_json()}
    return TheoremReport(
        name, "index_equality",
        "T of finite or cofinite index in abelian S: I(S) = I(T), J(S) = J(T), F(S) = F(T)",
        _equality_verdict(m, tol), m,
        _truncation(sg, grid, budget, words_in_T=len(t_words), index_bound=index_bound),
        config_hash(desc), masks=_mask_dump(S, T))


def check_rees_equality(sg: Semigroup, oracle: Oracle, grid: GridSpec, budget: WordBudget,
                        rees_bound: int = 8, tol: Tolerances = Tolerances(),
                        name="rees_equality", threads=None) -> TheoremReport:
    """T of finite Rees index in finitely generated S: I, J, F agree."""
    ab = sg.alphabet
    rees = rees_index(ab, oracle, rees_bound)
    if not rees.exact:
        raise ExperimentRefused(f"Rees index is {rees.kind} at bound {rees_bound}")
    t_words = _sub_words(sg, oracle, budget)
    S = approximate(sg, grid, budget, threads)
    T = _restrict(S, t_words)
    m = _equality_metrics(S, T)
    m["rees_index"] = rees.to_json(ab)
    desc = {"check": "rees_equality", "semigroup": describe_semigroup(sg),
            "oracle": oracle.describe(ab), "grid": grid.to_json(), "budget": budget.to_json(),
            "rees_bound": rees_bound, "tolerances": tol.to_json()}
    return TheoremReport(
        name, "rees_equality",
        "T of finite Rees index in finitely generated S: I(S) = I(T), J(S) = J(T), F(S) = F(T)",
        _equality_verdict(m, tol), m,
        _truncation(sg, grid, budget, words_in_T=len(t_words), rees_bound=rees_bound),
        config_hash(desc), masks=_mask_dump(S, T))


def independent_boundary(bits: np.ndarray) -> np.ndarray:
    """Non-frame pixels that are interior to neither the set nor its
    complement, via scipy erosion rather than the engine's window scan."""
    st = np.ones((3, 3), dtype=bool)
    inner = ndimage.binary_erosion(bits, structure=st, border_value=1)
    outer = ndimage.binary_erosion(~bits, structure=st, border_value=1)
    out = ~(inner | outer)
    out[frame_like(bits)] = False
    return out


def frame_like(bits):
    f = np.ones(bits.shape, dtype=bool)
    f[1:-1, 1:-1] = False
    return f


def check_boundary_identity(sg: Semigroup, grid: GridSpec, budget: WordBudget,
                            name="boundary_identity", threads=None) -> TheoremReport:
    """J_approx is exactly the boundary of I_approx and F, J partition the
    non-frame pixels."""
    S = approximate(sg, grid, budget, threads)
    fr = frame(grid)
    other = independent_boundary(S.I.bits)
    _, j_comp = fatou_julia_masks(Mask(grid, ~S.I.bits, "I_approx"))
    st = np.ones((3, 3), dtype=bool)
    int_i = ndimage.binary_erosion(S.I.bits, structure=st, border_value=1) & ~fr
    ext_i = ndimage.binary_erosion(~S.I.bits, structure=st, border_value=1) & ~fr
    m = {"boundary_mismatch": int(np.count_nonzero(S.J.bits != other)),
         "complement_boundary_mismatch": int(np.count_nonzero(S.J.bits != j_comp.bits)),
         "F_J_overlap": int(np.count_nonzero(S.F.bits & S.J.bits)),
         "uncovered": int(np.count_nonzero(~(S.F.bits | S.J.bits | fr))),
         "F_missing_interior": int(np.count_nonzero((int_i | ext_i) & ~S.F.bits)),
         "frame_classified": int(np.count_nonzero((S.F.bits | S.J.bits) & fr)),
         "pixels_I": S.I.count, "pixels_F": S.F.count, "pixels_J": S.J.count}
    ok = all(m[k] == 0 for k in ("boundary_mismatch", "complement_boundary_mismatch",
                                 "F_J_overlap", "uncovered", "F_missing_interior",
                                 "frame_classified"))
    desc = {"check": "boundary_identity", "semigroup": describe_semigroup(sg),
            "grid": grid.to_json(), "budget": budget.to_json()}
    return TheoremReport(
        name, "boundary_identity",
        "boundary of I(S) is J(S); interior and exterior of I(S) lie in F(S)",
        "pass" if ok else "fail", m, _truncation(sg, grid, budget), config_hash(desc),
        masks=_mask_dump(S))


@dataclass(frozen=True)
class Region:
    """A disk (center, radius) or an axis-aligned rectangle."""

    kind: str
    center: complex = 0j
    radius: float = 0.0
    xmin: float = 0.0
    xmax: float = 0.0
    ymin: float = 0.0
    ymax: float = 0.0

    @classmethod
    def disk(cls, center, radius):
        return cls("disk", complex(center), float(radius))

    @classmethod
    def rect(cls, xmin, xmax, ymin, ymax):
        return cls("rect", xmin=float(xmin), xmax=float(xmax), ymin=float(ymin), ymax=float(ymax))

    def __post_init__(self):
        if self.kind not in ("disk", "rect"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "disk" and not self.radius > 0:
            raise ValueError("degenerate region: disk radius must be positive")
        if self.kind == "rect" and not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("degenerate region: rectangle has zero area")

    def contains(self, z):
        z = np.asarray(z, dtype=np.complex128)
        with np.errstate(invalid="ignore"):
            if self.kind == "disk":
                return np.abs(z - self.center) < self.radius
            return (z.real > self.xmin) & (z.real < self.xmax) & (z.imag > self.ymin) & (z.imag < self.ymax)

    def bbox(self):
        if self.kind == "disk":
            c, r = self.center, self.radius
            return c.real - r, c.real + r, c.imag - r, c.imag + r
        return self.xmin, self.xmax, self.ymin, self.ymax

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        if self.kind == "disk":
            r = self.radius * np.sqrt(rng.random(n))
            t = 2 * np.pi * rng.random(n)
            return self.center + r * np.exp(1j * t)
        x = self.xmin + (self.xmax - self.xmin) * rng.random(n)
        y = self.ymin + (self.ymax - self.ymin) * rng.random(n)
        return x + 1j * y

    def to_json(self):
        if self.kind == "disk":
            return {"kind": "disk", "center": [self.center.real, self.center.imag],
                    "radius": self.radius}
        return {"kind": "rect", "x": [self.xmin, self.xmax], "y": [self.ymin, self.ymax]}


def check_fundamental_set(sg: Semigroup, region: Region, grid: GridSpec, budget: WordBudget,
                          samples: int = 500, fundamental: bool = False, seed: int = 0,
                          tol: Tolerances = Tolerances(), name="fundamental_set",
                          threads=None) -> TheoremReport:
    """Phase 1 checks that no budget word maps a sampled point of U back into
    U. Phase 2 checks U's pixels lie in F_approx (and in I_approx when the
    experiment declares U a fundamental set)."""
    x0, x1, y0, y1 = region.bbox()
    left, right = grid.center.real - grid.width / 2, grid.center.real + grid.width / 2
    bottom, top = grid.center.imag - grid.height / 2, grid.center.imag + grid.height / 2
    if not (left <= x0 and x1 <= right and bottom <= y0 and y1 <= top):
        raise ValueError("region U must lie inside the grid window")
    u_pix = region.contains(grid.points())
    if not u_pix.any():
        raise ValueError("degenerate region: U covers no pixel centre at this resolution")
    pts = region.sample(samples, seed)
    words = budget.words(sg.alphabet)
    returns = {}
    for w in words:
        hits = int(np.count_nonzero(region.contains(sg.map(w)(pts))))
        if hits:
            returns[sg.alphabet.format(w)] = hits
    desc = {"check": "fundamental_set", "semigroup": describe_semigroup(sg),
            "region": region.to_json(), "grid": grid.to_json(), "budget": budget.to_json(),
            "samples": samples, "seed": seed, "fundamental": fundamental,
            "tolerances": tol.to_json()}
    trunc = _truncation(sg, grid, budget, samples=samples,
                        covering_condition="declared" if fundamental else "not claimed")
    anchor = "U with f(U) disjoint from U for all f in S lies in F(S); in I(S) if fundamental"
    m = {"phase1_words_checked": len(words), "phase1_returning_words": returns,
         "U_pixels": int(u_pix.sum())}
    if returns:
        return TheoremReport(name, "fundamental_set", anchor, "hypothesis-failed", m, trunc,
                             config_hash(desc),
                             notes=["some budget word maps sampled points of U back into U"])
    S = approximate(sg, grid, budget, threads)
    in_f = int(np.count_nonzero(u_pix & S.F.bits))
    in_i = int(np.count_nonzero(u_pix & S.I.bits))
    m.update({"U_in_F": in_f, "U_in_I": in_i,
              "fraction_in_F": in_f / m["U_pixels"], "fraction_in_I": in_i / m["U_pixels"]})
    need = 1.0 - tol.max_violation_fraction
    ok = m["fraction_in_F"] >= need and (not fundamental or m["fraction_in_I"] >= need)
    masks = _mask_dump(S)
    masks["U"] = Mask(grid, u_pix)
    return TheoremReport(name, "fundamental_set", anchor, "pass" if ok else "fail", m, trunc,
                         config_hash(desc), masks=masks)


def _image_of(sg: Semigroup, word, pts, comps: ComponentMap):
    return classify_images(np.asarray(sg.map(word)(pts)), comps)


def check_cofinite_stabilizer(sg: Semigroup, grid: GridSpec, budget: WordBudget,
                              samples: int = 64, min_pixels: int = 16, max_components: int = 8,
                              points=None, name="cofinite_stabilizer",
                              threads=None) -> TheoremReport:
    """Search each component's forward orbit for a component W whose
    stabilizer has cofinite index within the budget. The no-wandering
    hypothesis is not checked, so a miss is reported as indeterminate.

    ``points`` restricts the probe to the components containing them;
    otherwise the ``max_components`` largest components are probed."""
    S = approximate(sg, grid, budget, threads)
    comps = label_components(S.F)
    if points:
        labels = sorted({comps.label_at(complex(z)) for z in points} - {0})
        if len(labels) < len(set(points)):
            raise ExperimentRefused("a probe point does not lie in a component of F_approx")
    else:
        labels = probe_labels(comps, min_pixels, max_components)
    if not labels:
        raise ExperimentRefused("F_approx has no component large enough to probe")
    ab = sg.alphabet
    words = budget.words(ab)
    witnesses = [IDENTITY] + list(words)
    all_pts = grid.points().ravel()
    pts_of = {}

    def pts(label):
        if label not in pts_of:
            pts_of[label] = all_pts[sample_pixels(comps, label, max(samples, MIN_SAMPLES))]
        return pts_of[label]

    per = {}
    determinate_all, found_all = True, True
    for U in labels:
        images = {w: _image_of(sg, w, pts(U), comps) for w in words}
        unresolved = sorted({str(img) for img in images.values() if img.kind != "label"})
        if unresolved:
            per[str(U)] = {"status": "indeterminate", "unresolved_images": unresolved,
                           "pixels": int(comps.sizes()[U])}
            determinate_all = False
            continue
        orbit = sorted({U} | {img.label for img in images.values()})
        hit = None
        for W in orbit:
            used = set()
            for u in words:
                for w in witnesses:
                    img = _image_of(sg, ab.compose(w, u), pts(W), comps)
                    if img.kind == "label" and img.label == W:
                        used.add(w)
                        break
                else:
                    break
            else:
                hit = (W, used)
                break
        entry = {"status": "found" if hit else "not-found", "orbit": orbit,
                 "pixels": int(comps.sizes()[U])}
        if hit:
            entry["stable_component"] = hit[0]
            entry["witnesses"] = sorted((ab.format(w) for w in hit[1]),
                                        key=lambda s: (s != "id", len(s), s))
        else:
            found_all = False
        per[str(U)] = entry
    verdict = "pass" if (determinate_all and found_all) else "indeterminate"
    m = {"components_total": comps.count, "components_probed": len(labels), "components": per}
    desc = {"check": "cofinite_stabilizer", "semigroup": describe_semigroup(sg),
            "grid": grid.to_json(), "budget": budget.to_json(), "samples": samples,
            "min_pixels": min_pixels, "max_components": max_components,
            "points": [[complex(z).real, complex(z).imag] for z in points or ()]}
    trunc = _truncation(sg, grid, budget, samples=samples, min_pixels=min_pixels,
                        max_components=max_components, no_wandering="not verified")
    masks = _mask_dump(S)
    return TheoremReport(
        name, "cofinite_stabilizer",
        "without wandering domains, the forward orbit of a Fatou component contains a "
        "component whose stabilizer has cofinite index",
        verdict, m, trunc, config_hash(desc), masks=masks)


# --------------------------------------------------------------------------
# combinatorial checks

INDEX_FUNCS = {"finite": finite_index, "cofinite": cofinite_index}


def check_index(alphabet: Alphabet, oracle: Oracle, kind: str, bound: int, max_index: int = 6,
                expect_kind: str | None = None, expect_value: int | None = None,
                reference_value: int | None = None, name="index") -> TheoremReport:
    if kind == "rees":
        verdict = rees_index(alphabet, oracle, bound)
    elif kind in INDEX_FUNCS:
        verdict = INDEX_FUNCS[kind](alphabet, oracle, bound, max_index)
    else:
        raise ValueError(f"unknown index kind {kind!r}")
    ok = ((expect_kind is None or verdict.kind == expect_kind)
          and (expect_value is None or verdict.value == expect_value))
    m = {"verdict": verdict.to_json(alphabet)}
    notes = []
    if reference_value is not None:
        m["reference_value"] = reference_value
        m["agrees_with_reference"] = verdict.value == reference_value
        if verdict.value != reference_value:
            notes.append(f"computed {verdict.kind}({verdict.value}) differs from the "
                         f"recorded reference value {reference_value}")
    desc = {"check": "index", "kind": kind, "alphabet": list(alphabet.names),
            "abelian": alphabet.abelian, "oracle": oracle.describe(alphabet), "bound": bound,
            "max_index": max_index}
    anchor = {"finite": "smallest n with S covered by n translates w o T",
              "cofinite": "smallest n with every f in S having some w_i o f in T",
              "rees": "|S - T| + 1"}[kind]
    return TheoremReport(name, f"index:{kind}", anchor, "pass" if ok else "fail", m,
                         {"bound": bound, "max_index": max_index}, config_hash(desc), notes)


def check_generation(alphabet: Alphabet, oracle: Oracle, bound: int,
                     expect_stable: bool | None = None, name="generation") -> TheoremReport:
    desc = {"check": "generation", "alphabet": list(alphabet.names),
            "abelian": alphabet.abelian, "oracle": oracle.describe(alphabet), "bound": bound}
    anchor = "T of finite Rees index: S finitely generated iff T is"
    try:
        rep = check_finitely_generated_extension(alphabet, oracle, bound)
    except NotApplicableError as exc:
        return TheoremReport(name, "generation", anchor, "hypothesis-failed", {},
                             {"bound": bound}, config_hash(desc), [str(exc)])
    ok = expect_stable is None or rep.stable == expect_stable
    return TheoremReport(name, "generation", anchor, "pass" if ok else "fail",
                         rep.to_json(alphabet), {"bound": bound}, config_hash(desc))


# --------------------------------------------------------------------------
# experiments

CHECKS = ("index", "generation", "monotonicity", "index_equality", "rees_equality",
          "boundary_identity", "fundamental_set", "cofinite_stabilizer")
VERDICTS = ("pass", "fail", "indeterminate", "hypothesis-failed", "refused")


def meets_expectation(report: TheoremReport, expect: str) -> bool:
    if expect == "any":
        return report.verdict != "refused"
    return report.verdict == expect


@dataclass
class Experiment:
    """A fully specified check; ``params`` holds the check-specific knobs."""

    name: str
    check: str
    semigroup: Semigroup
    oracle: Oracle | None = None
    grid: GridSpec | None = None
    budget: WordBudget | None = None
    params: dict = field(default_factory=dict)
    tolerances: Tolerances = Tolerances()
    expect: str = "pass"
    suites: tuple = ()

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ValueError(f"unknown check {self.check!r}; expected one of {', '.join(CHECKS)}")
        if self.expect not in VERDICTS + ("any",):
            raise ValueError(f"unknown expected verdict {self.expect!r}")
        needs_oracle = self.check in ("index", "generation", "monotonicity",
                                      "index_equality", "rees_equality")
        if needs_oracle and self.oracle is None:
            raise ValueError(f"check {self.check!r} needs an oracle")
        if self.check not in ("index", "generation") and (self.grid is None or self.budget is None):
            raise ValueError(f"check {self.check!r} needs a grid and a budget")


def run_experiment(exp: Experiment, threads=None) -> TheoremReport:
    """Run one experiment. A refused precondition becomes a ``refused``
    report rather than an exception so a suite can carry on."""
    p = dict(exp.params)
    sg, tol = exp.semigroup, exp.tolerances
    try:
        if exp.check == "index":
            return check_index(sg.alphabet, exp.oracle, p.get("kind", "finite"), p.get("bound", 6),
                               p.get("max_index", 6), p.get("expect_kind"), p.get("expect_value"),
                               p.get("reference_value"), name=exp.name)
        if exp.check == "generation":
            return check_generation(sg.alphabet, exp.oracle, p.get("bound", 8),
                                    p.get("expect_stable"), name=exp.name)
        if exp.check == "monotonicity":
            return check_monotonicity(sg, exp.oracle, exp.grid, exp.budget, tol, exp.name, threads)
        if exp.check == "index_equality":
            return check_index_equality(sg, exp.oracle, exp.grid, exp.budget,
                                        p.get("index_bound", 8), p.get("max_index", 6), tol,
                                        exp.name, threads)
        if exp.check == "rees_equality":
            return check_rees_equality(sg, exp.oracle, exp.grid, exp.budget,
                                       p.get("rees_bound", 8), tol, exp.name, threads)
        if exp.check == "boundary_identity":
            return check_boundary_identity(sg, exp.grid, exp.budget, exp.name, threads)
        if exp.check == "fundamental_set":
            return check_fundamental_set(sg, p["region"], exp.grid, exp.budget,
                                         p.get("samples", 500), p.get("fundamental", False),
                                         p.get("seed", 0), tol, exp.name, threads)
        return check_cofinite_stabilizer(sg, exp.grid, exp.budget, p.get("samples", 64),
                                         p.get("min_pixels", 16), p.get("max_components", 8),
                                         p.get("points"), exp.name, threads)
    except ExperimentRefused as exc:
        desc = {"check": exp.check, "name": exp.name, "semigroup": describe_semigroup(sg)}
        return TheoremReport(exp.name, exp.check, "", "refused", {}, {}, config_hash(desc),
                             [str(exc)])
