"""Pixel approximations of the escaping, Fatou and Julia sets of a semigroup.

I_approx is the intersection of per-word escape masks over a finite word
budget. F_approx and J_approx come from the escaping mask alone: F is the
8-neighbourhood interior of I union the interior of its complement, J is
the pixel boundary of I. The outermost ring of pixels belongs to neither.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .expr import EntireMap, pack_programs, word_map
from .orbit import DEFAULT_RADIUS, DEFAULT_STEPS
from .words import IDENTITY, Alphabet, Word, enumerate_words

MAX_PIXELS = 4096 * 4096
MAX_CUBE_ENTRIES = 1 << 28

TAGS = ("I_approx", "J_approx", "F_approx", "custom")


class ResourceError(RuntimeError):
    """A configured memory cap would be exceeded."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Rectangle of the plane sampled at pixel centres. Row 0 is the top
    (largest imaginary part); column 0 is the left edge."""

    center: complex
    width: float
    height: float
    cols: int
    rows: int
    max_pixels: int = MAX_PIXELS

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (self.width > 0 and self.height > 0):
            raise ValueError("grid width and height must be positive")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid needs at least one row and column")
        if self.cols * self.rows > self.max_pixels:
            raise ResourceError(
                f"grid {self.cols}x{self.rows} exceeds the cap of {self.max_pixels} pixels")

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def size(self):
        return self.rows * self.cols

    def xs(self):
        return self.center.real + ((np.arange(self.cols) + 0.5) / self.cols - 0.5) * self.width

    def ys(self):
        return self.center.imag - ((np.arange(self.rows) + 0.5) / self.rows - 0.5) * self.height

    def points(self) -> np.ndarray:
        return self.xs()[None, :] + 1j * self.ys()[:, None]

    def point(self, i: int, j: int) -> complex:
        x = self.center.real + ((j + 0.5) / self.cols - 0.5) * self.width
        y = self.center.imag - ((i + 0.5) / self.rows - 0.5) * self.height
        return complex(x, y)

    def pixel_of(self, z):
        """(row, col) integer arrays of the pixels containing z; off-grid
        points get indices outside [0, rows) x [0, cols)."""
        z = np.asarray(z, dtype=np.complex128)
        with np.errstate(invalid="ignore", over="ignore"):
            fj = ((z.real - self.center.real) / self.width + 0.5) * self.cols
            fi = (0.5 - (z.imag - self.center.imag) / self.height) * self.rows
            fj = np.clip(np.nan_to_num(fj, nan=-1.0), -1, self.cols)
            fi = np.clip(np.nan_to_num(fi, nan=-1.0), -1, self.rows)
        return np.floor(fi).astype(np.int64), np.floor(fj).astype(np.int64)

    def contains(self, z) -> np.ndarray:
        i, j = self.pixel_of(z)
        return (i >= 0) & (i < self.rows) & (j >= 0) & (j < self.cols)

    def to_json(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "width": self.width,
                "height": self.height, "cols": self.cols, "rows": self.rows}

    def same_as(self, other: "GridSpec") -> bool:
        return self.to_json() == other.to_json()


@dataclass(frozen=True)
class Mask:
    grid: GridSpec
    bits: np.ndarray
    tag: str = "custom"

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != self.grid.shape:
            raise ValueError(f"mask shape {bits.shape} does not match grid {self.grid.shape}")
        if self.tag not in TAGS:
            raise ValueError(f"unknown mask tag {self.tag!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def __invert__(self):
        return Mask(self.grid, ~self.bits, "custom")


@dataclass(frozen=True)
class WordBudget:
    """Truncation of S: words up to ``max_word_len`` with escape parameters.

    ``horizon="generator"`` iterates a word of length k ceil(N/k) times, so
    every word sees the same number of generator applications;
    ``horizon="word"`` iterates every word N times.
    """

    max_word_len: int
    max_steps: int = DEFAULT_STEPS
    escape_radius: float = DEFAULT_RADIUS
    horizon: str = "generator"

    def __post_init__(self):
        if self.max_word_len < 1 or self.max_steps < 1:
            raise ValueError("max_word_len and max_steps must be >= 1")
        if not self.escape_radius > 1:
            raise ValueError("escape radius must exceed 1")
        if self.horizon not in ("generator", "word"):
            raise ValueError(f"horizon must be 'generator' or 'word', got {self.horizon!r}")

    def words(self, alphabet: Alphabet) -> list:
        return enumerate_words(alphabet, self.max_word_len)

    def steps_for(self, word: Word) -> int:
        if self.horizon == "word":
            return self.max_steps
        return max(1, math.ceil(self.max_steps / len(word)))

    def to_json(self) -> dict:
        return {"max_word_len": self.max_word_len, "N": self.max_steps,
                "R": self.escape_radius, "horizon": self.horizon}


@dataclass(frozen=True)
class Semigroup:
    alphabet: Alphabet
    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(gens) != len(self.alphabet):
            raise ValueError("one generator map per alphabet symbol")
        object.__setattr__(self, "generators", gens)

    def map(self, word: Word) -> EntireMap:
        return word_map(word, self.generators)


@dataclass(frozen=True)
class EscapeResult:
    mask: Mask
    cube: np.ndarray        # int32 (n_words, rows, cols); see _kernels for encoding
    words: tuple
    steps: tuple
    radius: float

    def restrict(self, words) -> "EscapeResult":
        """The result for a sub-budget, reusing the already computed rows."""
        pos = {w: k for k, w in enumerate(self.words)}
        missing = [w for w in words if w not in pos]
        if missing:
            raise KeyError(f"words not in this cube: {missing}")
        if not words:
            raise ValueError("empty word list")
        rows = [pos[w] for w in words]
        cube = self.cube[rows]
        bits = np.all(cube != 0, axis=0)
        return EscapeResult(Mask(self.mask.grid, bits, "I_approx"), cube, tuple(words),
                            tuple(self.steps[r] for r in rows), self.radius)

    def overflow_pixels(self) -> int:
        """Pixels where some word escaped through a non-finite value."""
        return int(np.any(self.cube < 0, axis=0).sum())


def escaping_mask(generators, grid: GridSpec, budget: WordBudget, words=None,
                  alphabet: Alphabet | None = None, threads=None, backend=None) -> EscapeResult:
    """Pixel in I_approx iff every budget word escapes there."""
    generators = tuple(generators)
    if words is None:
        alphabet = alphabet or Alphabet(tuple(f"f{k}" for k in range(len(generators))))
        words = budget.words(alphabet)
    words = tuple(tuple(w) for w in words)
    if not words:
        raise ValueError("word budget is empty")
    if len(words) * grid.size > MAX_CUBE_ENTRIES:
        raise ResourceError(
            f"verdict cube {len(words)}x{grid.size} exceeds the cap of {MAX_CUBE_ENTRIES} entries")
    progs = pack_programs(generators)
    steps = tuple(budget.steps_for(w) for w in words)
    flat = _kernels.escape_cube(grid.points().ravel(), progs, words, steps,
                                [budget.escape_radius] * len(words),
                                threads=threads, backend=backend)
    cube = flat.reshape(len(words), grid.rows, grid.cols)
    bits = np.all(cube != 0, axis=0)
    return EscapeResult(Mask(grid, bits, "I_approx"), cube, words, steps, budget.escape_radius)


# --------------------------------------------------------------------------
# morphology

def frame(grid: GridSpec) -> np.ndarray:
    f = np.ones(grid.shape, dtype=bool)
    f[1:-1, 1:-1] = False
    return f


def _window_all_any(bits):
    """AND / OR over each non-frame pixel's 3x3 window."""
    r, c = bits.shape
    views = [bits[1 + di:r - 1 + di, 1 + dj:c - 1 + dj]
             for di in (-1, 0, 1) for dj in (-1, 0, 1)]
    return np.logical_and.reduce(views), np.logical_or.reduce(views)


def fatou_julia_masks(i_mask: Mask):
    if i_mask.tag != "I_approx":
        raise ValueError(f"expected an I_approx mask, got {i_mask.tag}")
    bits = i_mask.bits
    F = np.zeros_like(bits)
    J = np.zeros_like(bits)
    if min(bits.shape) >= 3:
        all_in, any_in = _window_all_any(bits)
        F[1:-1, 1:-1] = all_in | ~any_in
        J[1:-1, 1:-1] = any_in & ~all_in
    return Mask(i_mask.grid, F, "F_approx"), Mask(i_mask.grid, J, "J_approx")


def _check_same_grid(a: Mask, b: Mask):
    if not a.grid.same_as(b.grid):
        raise GridMismatchError("masks are on different grids")


def mask_compare(a: Mask, b: Mask) -> dict:
    _check_same_grid(a, b)
    inter = int(np.count_nonzero(a.bits & b.bits))
    union = int(np.count_nonzero(a.bits | b.bits))
    return {"jaccard": 1.0 if union == 0 else inter / union,
            "a_minus_b": int(np.count_nonzero(a.bits & ~b.bits)),
            "b_minus_a": int(np.count_nonzero(b.bits & ~a.bits))}


def mask_subset_violations(a: Mask, b: Mask) -> int:
    """Pixels of a outside b; 0 certifies a <= b at this resolution."""
    _check_same_grid(a, b)
    return int(np.count_nonzero(a.bits & ~b.bits))


# --------------------------------------------------------------------------
# components

@dataclass(frozen=True)
class ComponentMap:
    grid: GridSpec
    labels: np.ndarray   # int32, 0 = not in mask
    count: int

    def pixels(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels.ravel() == label)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.count + 1)

    def label_at(self, z: complex) -> int:
        i, j = self.grid.pixel_of(z)
        if not (0 <= i < self.grid.rows and 0 <= j < self.grid.cols):
            return 0
        return int(self.labels[i, j])


def label_components(f_mask: Mask, backend=None) -> ComponentMap:
    if f_mask.tag not in ("F_approx", "custom"):
        raise ValueError(f"expected an F_approx mask, got {f_mask.tag}")
    labels = _kernels.label4(f_mask.bits, backend=backend)
    return ComponentMap(f_mask.grid, labels, int(labels.max(initial=0)))


PLURALITY = 0.9
MIN_SAMPLES = 16


@dataclass(frozen=True)
class ComponentImage:
    kind: str            # "label" | "Escaped" | "Split" | "OffGrid"
    label: int | None
    finite: int
    off_grid: int
    top_share: float

    def __str__(self):
        return str(self.label) if self.kind == "label" else self.kind


def sample_pixels(components: ComponentMap, label: int, samples: int) -> np.ndarray:
    """Evenly spaced flat pixel indices of a component, row-major order."""
    pix = components.pixels(label)
    if pix.size == 0:
        raise KeyError(f"no component labelled {label}")
    if pix.size <= samples:
        return pix
    pick = np.unique(np.round(np.linspace(0, pix.size - 1, samples)).astype(np.int64))
    return pix[pick]


def classify_images(images: np.ndarray, components: ComponentMap) -> ComponentImage:
    total = images.size
    finite = np.isfinite(images.real) & np.isfinite(images.imag)
    n = int(finite.sum())
    if n < (1 - PLURALITY) * total or n == 0:
        return ComponentImage("Escaped", None, n, 0, 0.0)
    grid = components.grid
    i, j = grid.pixel_of(images[finite])
    on = (i >= 0) & (i < grid.rows) & (j >= 0) & (j < grid.cols)
    off = int((~on).sum())
    hit = components.labels[i[on], j[on]]
    hit = hit[hit > 0]
    if hit.size:
        counts = np.bincount(hit)
        top = int(counts.argmax())
        share = counts[top] / n
        if share >= PLURALITY:
            return ComponentImage("label", top, n, off, float(share))
    else:
        share = 0.0
    if off >= 0.5 * n:
        return ComponentImage("OffGrid", None, n, off, float(share))
    return ComponentImage("Split", None, n, off, float(share))


def component_image(label: int, m: EntireMap, components: ComponentMap,
                    samples: int = 64) -> ComponentImage:
    """Which component (if any) contains the image of component ``label``."""
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples per component")
    pix = sample_pixels(components, label, samples)
    pts = components.grid.points().ravel()[pix]
    return classify_images(np.asarray(m(pts)), components)


@dataclass
class StabilizerProbe:
    stabilizers: dict            # label -> list of words w with U_w = U
    images: dict                 # (label, word) -> ComponentImage
    closure_violations: dict     # label -> list of (u, v)
    labels: tuple = field(default=())


def probe_labels(components: ComponentMap, min_pixels: int = 1, max_components=None):
    sizes = components.sizes()
    labels = [k for k in range(1, components.count + 1) if sizes[k] >= min_pixels]
    if max_components is not None:
        labels = sorted(labels, key=lambda k: (-sizes[k], k))[:max_components]
        labels.sort()
    return labels


def stabilizer_probe(components: ComponentMap, semigroup: Semigroup, words,
                     include_identity: bool = False, samples: int = 64,
                     min_pixels: int = 1, max_components=None) -> StabilizerProbe:
    if components.count == 0:
        raise ValueError("component map is empty")
    words = [tuple(w) for w in words]
    if include_identity and IDENTITY not in words:
        words = [IDENTITY] + words
    labels = probe_labels(components, min_pixels, max_components)
    grid_pts = components.grid.points().ravel()
    stab, images, bad = {}, {}, {}
    for label in labels:
        pts = grid_pts[sample_pixels(components, label, max(samples, MIN_SAMPLES))]
        rec = []
        for w in words:
            img = classify_images(np.asarray(semigroup.map(w)(pts)), components)
            images[label, w] = img
            if img.kind == "label" and img.label == label:
                rec.append(w)
        stab[label] = rec
        bad[label] = _closure_gaps(rec, set(words), semigroup.alphabet)
    return StabilizerProbe(stab, images, bad, tuple(labels))


def _closure_gaps(recorded, budget_words, alphabet):
    got = set(recorded)
    gaps = []
    for u in recorded:
        for v in recorded:
            uv = alphabet.compose(u, v)
            if uv in budget_words and uv not in got:
                gaps.append((u, v))
    return gaps
