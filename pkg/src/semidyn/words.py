"""Finitely generated semigroups as words over a generator alphabet.

A word is a tuple of generator ids. ``(a1, a2, ..., ak)`` stands for the
composition ``f_a1 o f_a2 o ... o f_ak``, applied rightmost-first. The empty
tuple ``IDENTITY`` is the adjoined identity of S^1.

All index computations are semidecisions: they only look at words up to a
length bound and every verdict carries that bound.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple  # tuple[int, ...]; () is the identity

IDENTITY: Word = ()
COMPOSE_SEP = "."
IDENTITY_NAME = "id"


class OracleError(ValueError):
    """An oracle is unusable: not closed under composition, or empty."""


class NotApplicableError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    names: tuple
    abelian: bool = False

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("alphabet needs at least one generator")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        for n in names:
            if not n or COMPOSE_SEP in n or n == IDENTITY_NAME or not n.isidentifier():
                raise ValueError(f"bad generator name {n!r}")

    def __len__(self):
        return len(self.names)

    def canon(self, word: Iterable[int]) -> Word:
        word = tuple(word)
        for a in word:
            if not 0 <= a < len(self.names):
                raise ValueError(f"letter {a} not in alphabet of size {len(self.names)}")
        return tuple(sorted(word)) if self.abelian else word

    def compose(self, u: Word, v: Word) -> Word:
        """u o v, canonicalised."""
        return self.canon(u + v)

    def format(self, word: Word) -> str:
        if not word:
            return IDENTITY_NAME
        return COMPOSE_SEP.join(self.names[a] for a in word)

    def parse(self, text: str) -> Word:
        text = text.strip()
        if text == IDENTITY_NAME:
            return IDENTITY
        index = {n: i for i, n in enumerate(self.names)}
        letters = []
        for part in text.split(COMPOSE_SEP):
            part = part.strip()
            if part not in index:
                raise ValueError(f"unknown generator {part!r} in word {text!r}")
            letters.append(index[part])
        return self.canon(letters)


def enumerate_words(alphabet: Alphabet, max_len: int) -> list:
    """All canonical words of length 1..max_len, by (length, lexicographic)."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = range(len(alphabet))
    out = []
    for n in range(1, max_len + 1):
        gen = (itertools.combinations_with_replacement(ids, n) if alphabet.abelian
               else itertools.product(ids, repeat=n))
        out.extend(gen)
    return out


def word_key(word: Word):
    return (len(word), word)


# --------------------------------------------------------------------------
# subsemigroup oracles

class Oracle:
    """Membership predicate for a subsemigroup T of S."""

    def accepts(self, word: Word, abelian: bool = False) -> bool:
        raise NotImplementedError

    def describe(self, alphabet: Alphabet) -> dict:
        raise NotImplementedError


def _counts(word: Word, size: int) -> tuple:
    c = [0] * size
    for a in word:
        c[a] += 1
    return tuple(c)


@dataclass(frozen=True)
class GeneratedBy(Oracle):
    """Words that are concatenations of one or more of ``gens``."""

    gens: tuple
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        gens = tuple(tuple(g) for g in self.gens)
        if not gens or any(len(g) == 0 for g in gens):
            raise OracleError("GeneratedBy needs non-empty generator words")
        object.__setattr__(self, "gens", gens)

    def accepts(self, word, abelian=False):
        if not word:
            return False
        if abelian:
            return self._accepts_abelian(word)
        n = len(word)
        reach = [False] * (n + 1)
        reach[0] = True
        for i in range(n):
            if not reach[i]:
                continue
            for g in self.gens:
                if word[i:i + len(g)] == g:
                    reach[i + len(g)] = True
        return reach[n]

    def _accepts_abelian(self, word):
        size = max(max(word), max(max(g) for g in self.gens)) + 1
        gvecs = [_counts(g, size) for g in self.gens]
        cache = self._cache.setdefault(size, {})

        def rec(vec):
            if vec in cache:
                return cache[vec]
            ok = False
            for g in gvecs:
                rest = tuple(a - b for a, b in zip(vec, g))
                if min(rest) < 0:
                    continue
                if not any(rest) or rec(rest):
                    ok = True
                    break
            cache[vec] = ok
            return ok

        return rec(_counts(word, size))

    def describe(self, alphabet):
        return {"type": "generated_by", "words": [alphabet.format(g) for g in self.gens]}


@dataclass(frozen=True)
class LengthMultiple(Oracle):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise OracleError("LengthMultiple needs n >= 1")

    def accepts(self, word, abelian=False):
        return len(word) > 0 and len(word) % self.n == 0

    def describe(self, alphabet):
        return {"type": "length_multiple", "n": self.n}


@dataclass(frozen=True)
class PrefixIs(Oracle):
    """Words whose outermost (leftmost) letter is ``letter``.

    Commutative words have no outermost letter; there the predicate reads
    "contains ``letter``".
    """

    letter: int

    def accepts(self, word, abelian=False):
        if not word:
            return False
        return self.letter in word if abelian else word[0] == self.letter

    def describe(self, alphabet):
        return {"type": "prefix", "letter": alphabet.names[self.letter]}


@dataclass(frozen=True)
class ComplementOfFinite(Oracle):
    base: Oracle
    excluded: frozenset

    def __post_init__(self):
        object.__setattr__(self, "excluded", frozenset(tuple(w) for w in self.excluded))

    def accepts(self, word, abelian=False):
        if abelian:
            word = tuple(sorted(word))
        return word not in self.excluded and self.base.accepts(word, abelian)

    def describe(self, alphabet):
        return {"type": "complement_of_finite", "base": self.base.describe(alphabet),
                "exclude": sorted((alphabet.format(w) for w in self.excluded))}


def whole(alphabet: Alphabet) -> GeneratedBy:
    """T = S."""
    return GeneratedBy(tuple((a,) for a in range(len(alphabet))))


def min_length(alphabet: Alphabet, k: int) -> ComplementOfFinite:
    """All words of length >= k (an ideal of finite Rees index)."""
    short = enumerate_words(alphabet, k - 1) if k > 1 else []
    return ComplementOfFinite(whole(alphabet), frozenset(short))


def closure_violations(oracle: Oracle, alphabet: Alphabet, bound: int = 6) -> list:
    """Pairs (u, v) of accepted words with u o v rejected, len(u o v) <= bound."""
    members = [w for w in enumerate_words(alphabet, max(bound - 1, 1))
               if oracle.accepts(w, alphabet.abelian)]
    bad = []
    for u in members:
        for v in members:
            if len(u) + len(v) > bound:
                continue
            if not oracle.accepts(alphabet.compose(u, v), alphabet.abelian):
                bad.append((u, v))
    return bad


def validate_oracle(oracle: Oracle, alphabet: Alphabet, bound: int = 6) -> Oracle:
    bad = closure_violations(oracle, alphabet, bound)
    if bad:
        u, v = bad[0]
        raise OracleError(
            f"oracle not closed under composition: {alphabet.format(u)} and "
            f"{alphabet.format(v)} accepted but {alphabet.format(alphabet.compose(u, v))} "
            f"rejected ({len(bad)} violating pairs up to length {bound})")
    return oracle


# --------------------------------------------------------------------------
# translates and indices

@dataclass(frozen=True)
class IndexVerdict:
    kind: str  # "Exact" | "AtLeast" | "UnboundedUpTo"
    value: int | None
    bound: int
    witnesses: tuple = ()
    notes: tuple = ()

    @property
    def exact(self) -> bool:
        return self.kind == "Exact"

    def to_json(self, alphabet: Alphabet) -> dict:
        out = {"kind": self.kind, "value": self.value, "bound": self.bound,
               "witnesses": [alphabet.format(w) for w in self.witnesses]}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _split(word: Word, alphabet: Alphabet, direction: str):
    """Yield (w, t) with word == w o t (left) or t o w (right), w possibly
    the identity and t non-empty."""
    if alphabet.abelian:
        size = len(alphabet)
        counts = _counts(word, size)
        seen = set()
        for sub in itertools.product(*(range(c + 1) for c in counts)):
            w = tuple(a for a in range(size) for _ in range(sub[a]))
            t = tuple(a for a in range(size) for _ in range(counts[a] - sub[a]))
            if t and w not in seen:
                seen.add(w)
                yield w, t
        return
    for i in range(len(word)):
        if direction == "left":
            yield word[:i], word[i:]
        else:
            yield word[len(word) - i:], word[:len(word) - i]


def translate(prefix: Word, oracle: Oracle, alphabet: Alphabet, bound: int,
              direction: str = "left") -> set:
    """{prefix o t : t in T, len <= bound} (or t o prefix for direction='right')."""
    if bound < len(prefix) + 1:
        raise ValueError("bound must exceed the prefix length")
    out = set()
    for t in enumerate_words(alphabet, bound - len(prefix)):
        if oracle.accepts(t, alphabet.abelian):
            out.add(alphabet.compose(prefix, t) if direction == "left"
                    else alphabet.compose(t, prefix))
    return out


def _require_nonempty(oracle, alphabet, universe, bound):
    if not any(oracle.accepts(u, alphabet.abelian) for u in universe):
        raise OracleError(f"oracle accepts no word of length <= {bound}; index undefined")


def _min_hitting_set(options: list, max_size: int):
    """Smallest set of candidate indices meeting every option set, ties broken
    by the lexicographically least sorted index tuple. None if > max_size."""
    if any(not o for o in options):
        return None
    n = len(options)
    for k in range(1, max_size + 1):
        best = None

        def dfs(chosen: frozenset, uncovered: list, slots: int):
            nonlocal best
            if not uncovered:
                key = tuple(sorted(chosen))
                if best is None or key < best:
                    best = key
                return
            if slots == 0:
                return
            # branch on the element with the fewest remaining options
            pick = min(uncovered, key=lambda u: len(options[u]))
            for c in sorted(options[pick]):
                nxt = chosen | {c}
                if best is not None and tuple(sorted(nxt)) > best and len(nxt) == k:
                    continue
                dfs(nxt, [u for u in uncovered if c not in options[u]], slots - 1)

        dfs(frozenset(), list(range(n)), k)
        if best is not None:
            return best
    return None


def _index_search(options, candidates, bound, max_index, notes=()):
    hit = _min_hitting_set(options, max_index)
    if hit is None:
        return IndexVerdict("AtLeast", max_index + 1, bound, (), tuple(notes))
    return IndexVerdict("Exact", len(hit), bound,
                        tuple(candidates[i] for i in hit), tuple(notes))


def finite_index(alphabet: Alphabet, oracle: Oracle, bound: int, max_index: int = 6,
                 direction: str = "left") -> IndexVerdict:
    """Smallest prefix set W with every word of length <= bound in some w o T^1.

    ``w o T^1`` is ``w o T`` together with ``w`` itself, so a witness covers the
    word it spells; without that, a generator letter lies in no translate.
    """
    if bound < 2:
        raise ValueError("bound must be >= 2")
    universe = enumerate_words(alphabet, bound)
    _require_nonempty(oracle, alphabet, universe, bound)
    candidates = [IDENTITY] + universe
    pos = {w: i for i, w in enumerate(candidates)}
    options = []
    for u in universe:
        opts = {pos[u]}
        for w, t in _split(u, alphabet, direction):
            if oracle.accepts(t, alphabet.abelian):
                opts.add(pos[w])
        options.append(opts)
    notes = []
    if all(oracle.accepts(u, alphabet.abelian) for u in universe):
        notes.append("T = S up to the bound: the identity translate alone covers S")
    return _index_search(options, candidates, bound, max_index, notes)


def cofinite_index(alphabet: Alphabet, oracle: Oracle, bound: int, max_index: int = 6,
                   direction: str = "left") -> IndexVerdict:
    """Smallest W in S^1 with: for every word u of length <= bound some w in W
    has w o u in T. Membership of w o u is decided at any length."""
    if bound < 2:
        raise ValueError("bound must be >= 2")
    universe = enumerate_words(alphabet, bound)
    _require_nonempty(oracle, alphabet, universe, bound)
    candidates = [IDENTITY] + universe
    options = []
    for u in universe:
        opts = set()
        for i, w in enumerate(candidates):
            wu = alphabet.compose(w, u) if direction == "left" else alphabet.compose(u, w)
            if oracle.accepts(wu, alphabet.abelian):
                opts.add(i)
        options.append(opts)
    return _index_search(options, candidates, bound, max_index)


def complement_words(alphabet: Alphabet, oracle: Oracle, max_len: int) -> list:
    return [u for u in enumerate_words(alphabet, max_len)
            if not oracle.accepts(u, alphabet.abelian)]


def rees_index(alphabet: Alphabet, oracle: Oracle, bound: int) -> IndexVerdict:
    """|S - T| + 1, declared Exact when the complement stops growing over the
    last three lengths."""
    if bound < 3:
        raise ValueError("bound must be >= 3")
    comp = complement_words(alphabet, oracle, bound)
    sizes = [sum(1 for u in comp if len(u) <= L) for L in (bound - 2, bound - 1, bound)]
    if sizes[0] == sizes[1] == sizes[2]:
        return IndexVerdict("Exact", len(comp) + 1, bound, tuple(comp))
    return IndexVerdict("UnboundedUpTo", None, bound, (),
                        (f"complement sizes at lengths {bound - 2}..{bound}: {sizes}",))


@dataclass(frozen=True)
class GenerationReport:
    complement: tuple
    generators: tuple
    stable: bool
    bound: int

    def to_json(self, alphabet: Alphabet) -> dict:
        return {"complement": [alphabet.format(w) for w in self.complement],
                "generating_set_of_T": [alphabet.format(w) for w in self.generators],
                "stable": self.stable, "bound": self.bound}


def irreducible_members(alphabet: Alphabet, oracle: Oracle, bound: int) -> list:
    """T-words of length <= bound that are not a product of two T-words."""
    ab = alphabet.abelian
    out = []
    for u in enumerate_words(alphabet, bound):
        if not oracle.accepts(u, ab):
            continue
        splits = _split(u, alphabet, "left")
        if any(w and oracle.accepts(w, ab) and oracle.accepts(t, ab) for w, t in splits):
            continue
        out.append(u)
    return out


def check_finitely_generated_extension(alphabet: Alphabet, oracle: Oracle,
                                       bound: int) -> GenerationReport:
    verdict = rees_index(alphabet, oracle, bound)
    if not verdict.exact:
        raise NotApplicableError(
            f"Rees index is not Exact at bound {bound} ({verdict.kind}); "
            "no finite complement to extend by")
    gens = irreducible_members(alphabet, oracle, bound)
    stable = not any(len(g) >= bound - 1 for g in gens)
    return GenerationReport(verdict.witnesses, tuple(gens), stable, bound)


def format_words(alphabet: Alphabet, words: Sequence) -> list:
    return [alphabet.format(w) for w in words]
