"""TOML configuration: semigroups, grids, budgets, oracles, experiments.

A minimal file::

    [semigroups.sc]
    generators = [{name = "f", formula = "sin(z)"}, {name = "g", formula = "cos(z)"}]
    abelian = false
    grid = "g128"
    budget = "L3"

    [grids.g128]
    center = [0.0, 0.0]
    width = 8.0
    height = 8.0
    cols = 128
    rows = 128

    [budgets.L3]
    max_word_len = 3            # max_steps = 100, escape_radius = 1e10 by default

    [oracles.even]
    semigroup = "sc"
    type = "length_multiple"
    n = 2

    [experiments.mono]
    check = "monotonicity"
    suites = ["demo"]
    semigroup = "sc"
    oracle = "even"

Names given as ``@name`` resolve to the configs bundled with the package.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import tomli
import tomli_w

from .dynamics import GridSpec, Semigroup, WordBudget
from .expr import FormulaError, parse
from .verification import CHECKS, Experiment, Region, Tolerances
from .words import (Alphabet, ComplementOfFinite, GeneratedBy, LengthMultiple,
                    Oracle, PrefixIs, min_length, whole)

ORACLE_TYPES = ("generated_by", "length_multiple", "prefix", "complement_of_finite",
                "whole", "min_length")
SECTIONS = ("semigroups", "grids", "budgets", "oracles", "experiments", "output")


class ConfigError(ValueError):
    def __init__(self, msg, line=None, path=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + msg)
        self.line = line


def bundled_dir() -> Path:
    return Path(str(resources.files("semidyn") / "configs"))


def bundled_names() -> list:
    return sorted(p.stem for p in bundled_dir().glob("*.toml"))


def resolve_path(spec) -> Path:
    s = str(spec)
    if s.startswith("@"):
        p = bundled_dir() / f"{s[1:]}.toml"
        if not p.exists():
            raise ConfigError(f"no bundled config {s!r}; available: {', '.join(bundled_names())}")
        return p
    return Path(s)


def _find_line(text: str, section: str, name: str | None = None, key: str | None = None):
    """Best-effort line number of a table header (and a key inside it)."""
    lines = text.splitlines()
    head = re.escape(section) + (r"\." + r'"?' + re.escape(name) + r'"?' if name else "")
    pat = re.compile(r"^\s*\[\s*" + head + r"\s*\]")
    for i, ln in enumerate(lines):
        if pat.match(ln):
            if key is None:
                return i + 1
            kpat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
            for j in range(i + 1, len(lines)):
                if lines[j].lstrip().startswith("["):
                    break
                if kpat.match(lines[j]):
                    return j + 1
            return i + 1
    return None


@dataclass
class Config:
    """Parsed configuration. Objects are built eagerly so that every error
    surfaces at load time with a line number."""

    raw: dict
    path: str = "<string>"
    semigroups: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict)      # name -> (semigroup name, Oracle)
    experiments: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    defaults: dict = field(default_factory=dict)     # semigroup -> {"grid":, "budget":}

    def semigroup(self, name):
        return self._get(self.semigroups, "semigroup", name)

    def grid(self, name):
        return self._get(self.grids, "grid", name)

    def budget(self, name):
        return self._get(self.budgets, "budget", name)

    def oracle(self, name):
        return self._get(self.oracles, "oracle", name)

    def _get(self, table, what, name):
        if name not in table:
            raise ConfigError(f"unknown {what} {name!r}; defined: {', '.join(sorted(table)) or 'none'}")
        return table[name]

    def default_semigroup(self):
        if len(self.semigroups) == 1:
            return next(iter(self.semigroups))
        raise ConfigError("several semigroups defined; name one explicitly")

    def suite(self, name) -> list:
        names = [n for n, e in self.experiments.items() if name in e.suites]
        if not names:
            suites = sorted({s for e in self.experiments.values() for s in e.suites})
            raise ConfigError(f"no experiments in suite {name!r}; suites: {', '.join(suites) or 'none'}")
        return names

    def dumps(self) -> str:
        return tomli_w.dumps(self.raw)


def loads(text: str, path="<string>") -> Config:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(str(exc), path=path) from None
    return _build(raw, text, str(path))


def load(spec) -> Config:
    p = resolve_path(spec)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return loads(text, str(p))


def _build(raw: dict, text: str, path: str) -> Config:
    cfg = Config(raw=raw, path=path)

    def fail(msg, section, name=None, key=None):
        raise ConfigError(msg, _find_line(text, section, name, key), path)

    for key in raw:
        if key not in SECTIONS:
            raise ConfigError(f"unknown section [{key}]", _find_line(text, key), path)

    def table(section):
        t = raw.get(section, {})
        if not isinstance(t, dict):
            fail(f"[{section}] must be a table", section)
        allowed = KNOWN_KEYS.get(section)
        for name, body in t.items():
            if allowed is None:
                break
            if not isinstance(body, dict):
                fail(f"{section}.{name} must be a table", section, name)
            extra = set(body) - set(allowed)
            if extra:
                fail(f"unknown keys in {section}.{name}: {', '.join(sorted(extra))}",
                     section, name, sorted(extra)[0])
        return t

    for name, g in table("grids").items():
        try:
            c = g.get("center", [0.0, 0.0])
            cfg.grids[name] = GridSpec(complex(float(c[0]), float(c[1])), float(g["width"]),
                                       float(g["height"]), int(g["cols"]), int(g["rows"]))
        except KeyError as exc:
            fail(f"grid {name!r} is missing {exc.args[0]!r}", "grids", name)
        except (TypeError, ValueError, IndexError) as exc:
            fail(f"grid {name!r}: {exc}", "grids", name)

    for name, b in table("budgets").items():
        try:
            cfg.budgets[name] = WordBudget(int(b["max_word_len"]), int(b.get("max_steps", 100)),
                                           float(b.get("escape_radius", 1e10)),
                                           b.get("horizon", "generator"))
        except KeyError as exc:
            fail(f"budget {name!r} is missing {exc.args[0]!r}", "budgets", name)
        except (TypeError, ValueError) as exc:
            fail(f"budget {name!r}: {exc}", "budgets", name)

    for name, s in table("semigroups").items():
        gens = s.get("generators")
        if not gens or not isinstance(gens, list):
            fail(f"semigroup {name!r} needs a non-empty generators list", "semigroups", name)
        names, maps = [], []
        for g in gens:
            if not isinstance(g, dict) or "name" not in g or "formula" not in g:
                fail(f"semigroup {name!r}: each generator needs name and formula",
                     "semigroups", name, "generators")
            try:
                maps.append(parse(g["formula"]))
            except FormulaError as exc:
                fail(f"semigroup {name!r}, generator {g['name']!r}: {exc}",
                     "semigroups", name, "generators")
            names.append(g["name"])
        try:
            ab = Alphabet(tuple(names), bool(s.get("abelian", False)))
        except ValueError as exc:
            fail(f"semigroup {name!r}: {exc}", "semigroups", name)
        cfg.semigroups[name] = Semigroup(ab, tuple(maps))
        d = {}
        for k, pool in (("grid", cfg.grids), ("budget", cfg.budgets)):
            if k in s:
                if s[k] not in pool:
                    fail(f"semigroup {name!r} refers to unknown {k} {s[k]!r}", "semigroups", name, k)
                d[k] = s[k]
        cfg.defaults[name] = d

    for name, o in table("oracles").items():
        sg_name = o.get("semigroup")
        if sg_name is None and len(cfg.semigroups) == 1:
            sg_name = next(iter(cfg.semigroups))
        if sg_name not in cfg.semigroups:
            fail(f"oracle {name!r} refers to unknown semigroup {sg_name!r}", "oracles", name)
        try:
            cfg.oracles[name] = (sg_name, build_oracle(o, cfg.semigroups[sg_name].alphabet))
        except (KeyError, ValueError, TypeError) as exc:
            msg = f"missing {exc.args[0]!r}" if isinstance(exc, KeyError) else str(exc)
            fail(f"oracle {name!r}: {msg}", "oracles", name)

    for name, e in table("experiments").items():
        try:
            cfg.experiments[name] = _build_experiment(name, e, cfg)
        except ConfigError as exc:
            fail(str(exc), "experiments", name)
        except KeyError as exc:
            fail(f"experiment {name!r} is missing {exc.args[0]!r}", "experiments", name)
        except (ValueError, TypeError) as exc:
            fail(f"experiment {name!r}: {exc}", "experiments", name)

    out = table("output")
    cfg.output = {"masks": bool(out.get("masks", True)), "cube": bool(out.get("cube", False)),
                  "dir": out.get("dir")}
    return cfg


def build_oracle(o: dict, ab: Alphabet) -> Oracle:
    kind = o.get("type")
    if kind not in ORACLE_TYPES:
        raise ValueError(f"type must be one of {', '.join(ORACLE_TYPES)}, got {kind!r}")
    if kind == "generated_by":
        return GeneratedBy(tuple(ab.parse(w) for w in o["words"]))
    if kind == "length_multiple":
        return LengthMultiple(int(o["n"]))
    if kind == "prefix":
        w = ab.parse(o["letter"])
        if len(w) != 1:
            raise ValueError("prefix oracle needs a single generator name")
        return PrefixIs(w[0])
    if kind == "whole":
        return whole(ab)
    if kind == "min_length":
        return min_length(ab, int(o["k"]))
    base = build_oracle(o["base"], ab) if "base" in o else whole(ab)
    return ComplementOfFinite(base, frozenset(ab.parse(w) for w in o["exclude"]))


KNOWN_KEYS = {
    "grids": ("center", "width", "height", "cols", "rows"),
    "budgets": ("max_word_len", "max_steps", "escape_radius", "horizon"),
    "semigroups": ("generators", "abelian", "grid", "budget"),
    "oracles": ("semigroup", "type", "words", "n", "letter", "k", "base", "exclude"),
}

PARAM_KEYS = {
    "index": ("kind", "bound", "max_index", "expect_kind", "expect_value", "reference_value"),
    "generation": ("bound", "expect_stable"),
    "monotonicity": (),
    "index_equality": ("index_bound", "max_index"),
    "rees_equality": ("rees_bound",),
    "boundary_identity": (),
    "fundamental_set": ("region", "samples", "fundamental", "seed"),
    "cofinite_stabilizer": ("samples", "min_pixels", "max_components", "points"),
}
COMMON_KEYS = ("check", "suites", "semigroup", "oracle", "grid", "budget", "tolerances", "expect")


def _build_experiment(name: str, e: dict, cfg: Config) -> Experiment:
    check = e["check"]
    if check not in CHECKS:
        raise ValueError(f"unknown check {check!r}; expected one of {', '.join(CHECKS)}")
    extra = set(e) - set(COMMON_KEYS) - set(PARAM_KEYS[check])
    if extra:
        raise ValueError(f"unknown keys for check {check!r}: {', '.join(sorted(extra))}")
    oracle = None
    if "oracle" in e:
        sg_name, oracle = cfg.oracle(e["oracle"])
        if e.get("semigroup", sg_name) != sg_name:
            raise ValueError(f"oracle {e['oracle']!r} belongs to semigroup {sg_name!r}")
    else:
        sg_name = e.get("semigroup") or cfg.default_semigroup()
    sg = cfg.semigroup(sg_name)
    d = cfg.defaults.get(sg_name, {})
    grid = budget = None
    if check not in ("index", "generation"):
        g_name, b_name = e.get("grid", d.get("grid")), e.get("budget", d.get("budget"))
        if g_name is None or b_name is None:
            raise ValueError("needs a grid and a budget (set them here or on the semigroup)")
        grid, budget = cfg.grid(g_name), cfg.budget(b_name)
    params = {k: e[k] for k in PARAM_KEYS[check] if k in e}
    if "points" in params:
        params["points"] = tuple(complex(float(a), float(b)) for a, b in params["points"])
    if "region" in params:
        params["region"] = build_region(params["region"])
    tol = Tolerances(**e.get("tolerances", {}))
    suites = e.get("suites", [])
    if isinstance(suites, str):
        suites = [suites]
    return Experiment(name, check, sg, oracle, grid, budget, params, tol,
                      e.get("expect", "pass"), tuple(suites))


def build_region(r: dict) -> Region:
    kind = r.get("kind")
    if kind == "disk":
        c = r["center"]
        return Region.disk(complex(float(c[0]), float(c[1])), float(r["radius"]))
    if kind == "rect":
        x, y = r["x"], r["y"]
        return Region.rect(float(x[0]), float(x[1]), float(y[0]), float(y[1]))
    raise ValueError(f"region kind must be 'disk' or 'rect', got {kind!r}")
