"""Entire-function expression trees.

Formula grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*        # '/' only by a constant
    unary  := '-' unary | power
    power  := atom ('^' INT)?                   # non-negative integer exponent
    atom   := NUMBER ['i'] | 'i' | 'z' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'sin' | 'cos' | 'exp'

``2.5i`` is an imaginary literal and ``1+2i`` folds to a complex constant.
Composition is written by nesting, e.g. ``sin(cos(z))``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

MAX_DEPTH = 64


class FormulaError(ValueError):
    def __init__(self, msg, pos=None):
        super().__init__(msg if pos is None else f"{msg} (column {pos + 1})")
        self.pos = pos


class EntireMap:
    """Base node. Evaluate with ``m(z)`` on complex scalars or arrays."""

    def __call__(self, z):
        with np.errstate(all="ignore"):
            return self._ev(np.asarray(z, dtype=np.complex128))

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)

    def children(self):
        return ()

    def _ev(self, z):
        raise NotImplementedError

    # construction sugar
    def __add__(self, o):
        return Add(self, _lift(o))

    __radd__ = lambda self, o: Add(_lift(o), self)

    def __mul__(self, o):
        return Mul(self, _lift(o))

    __rmul__ = lambda self, o: Mul(_lift(o), self)

    def __sub__(self, o):
        return Add(self, Mul(Const(-1), _lift(o)))

    def __rsub__(self, o):
        return Add(_lift(o), Mul(Const(-1), self))

    def __neg__(self):
        return Mul(Const(-1), self)

    def __pow__(self, k):
        return Pow(self, k)

    def __str__(self):
        return self.formula()


def _lift(x):
    return x if isinstance(x, EntireMap) else Const(complex(x))


def _fmt_const(c: complex) -> str:
    re_, im = repr(c.real), repr(c.imag)
    if c.imag == 0 and not np.signbit(c.imag):
        return f"({re_})"
    return f"({re_}+{im}i)" if not im.startswith("-") else f"({re_}{im}i)"


@dataclass(frozen=True, eq=True)
class Var(EntireMap):
    def _ev(self, z):
        return z

    def formula(self):
        return "z"


@dataclass(frozen=True, eq=True)
class Const(EntireMap):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    def _ev(self, z):
        return np.full(z.shape, self.value, dtype=np.complex128) if z.ndim else np.complex128(self.value)

    def formula(self):
        return _fmt_const(self.value)


@dataclass(frozen=True, eq=True)
class Add(EntireMap):
    left: EntireMap
    right: EntireMap

    def children(self):
        return (self.left, self.right)

    def _ev(self, z):
        return self.left._ev(z) + self.right._ev(z)

    def formula(self):
        return f"({self.left.formula()} + {self.right.formula()})"


@dataclass(frozen=True, eq=True)
class Mul(EntireMap):
    left: EntireMap
    right: EntireMap

    def children(self):
        return (self.left, self.right)

    def _ev(self, z):
        return self.left._ev(z) * self.right._ev(z)

    def formula(self):
        return f"({self.left.formula()} * {self.right.formula()})"


def ipow(x, k: int):
    """x**k by binary exponentiation; the kernels use the same scheme."""
    result = np.ones_like(x) if np.ndim(x) else np.complex128(1)
    base = x
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


@dataclass(frozen=True, eq=True)
class Pow(EntireMap):
    base: EntireMap
    k: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 0:
            raise FormulaError(f"power must be a non-negative integer, got {self.k!r}")

    def children(self):
        return (self.base,)

    def _ev(self, z):
        return ipow(self.base._ev(z), int(self.k))

    def formula(self):
        return f"({self.base.formula()})^{self.k}"


@dataclass(frozen=True, eq=True)
class Sin(EntireMap):
    arg: EntireMap

    def children(self):
        return (self.arg,)

    def _ev(self, z):
        return np.sin(self.arg._ev(z))

    def formula(self):
        return f"sin({self.arg.formula()})"


@dataclass(frozen=True, eq=True)
class Cos(EntireMap):
    arg: EntireMap

    def children(self):
        return (self.arg,)

    def _ev(self, z):
        return np.cos(self.arg._ev(z))

    def formula(self):
        return f"cos({self.arg.formula()})"


@dataclass(frozen=True, eq=True)
class Exp(EntireMap):
    arg: EntireMap

    def children(self):
        return (self.arg,)

    def _ev(self, z):
        return np.exp(self.arg._ev(z))

    def formula(self):
        return f"exp({self.arg.formula()})"


@dataclass(frozen=True, eq=True)
class Compose(EntireMap):
    """outer(inner(z))."""

    outer: EntireMap
    inner: EntireMap

    def children(self):
        return (self.outer, self.inner)

    def depth(self):
        return self.outer.depth() + self.inner.depth()

    def _ev(self, z):
        return self.outer._ev(self.inner._ev(z))

    def formula(self):
        return _substitute(self.outer, self.inner.formula())


def _substitute(outer: EntireMap, inner_text: str) -> str:
    # formula() of outer with z replaced by the parenthesised inner text
    text = outer.formula()
    return re.sub(r"\bz\b", f"({inner_text})", text)


Z = Var()


def sin(x):
    return Sin(_lift(x))


def cos(x):
    return Cos(_lift(x))


def exp(x):
    return Exp(_lift(x))


def affine(a, b) -> EntireMap:
    """a*z + b."""
    return Add(Mul(Const(a), Z), Const(b))


def evaluate(m: EntireMap, z) -> complex:
    """Double-precision evaluation; overflow gives inf/nan instead of raising."""
    return complex(m(z))


def is_finite(w) -> bool:
    return bool(np.isfinite(w.real) and np.isfinite(w.imag))


def word_map(word, generators) -> EntireMap:
    """Composition tree f_{a1} o ... o f_{ak}; the rightmost letter acts first."""
    if not word:
        return Z
    for a in word:
        if not 0 <= a < len(generators):
            raise ValueError(f"word letter {a} has no generator (have {len(generators)})")
    m = generators[word[-1]]
    for a in reversed(word[:-1]):
        m = Compose(generators[a], m)
    return m


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"""
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_]+)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)

_FUNCS = {"sin": Sin, "cos": Cos, "exp": Exp}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, max_depth):
        self.toks = _tokenize(text)
        self.i = 0
        self.max_depth = max_depth

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of formula"
            raise FormulaError(f"expected {want!r}, got {got!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            raise FormulaError(f"unexpected {tok[1]!r}", tok[2])
        if node.depth() > self.max_depth:
            raise FormulaError(f"expression depth {node.depth()} exceeds limit {self.max_depth}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _fold(Add(node, rhs if op == "+" else _neg(rhs)))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "/":
                if not isinstance(rhs, Const):
                    raise FormulaError("division only by a constant", pos)
                if rhs.value == 0:
                    raise FormulaError("division by zero", pos)
                rhs = Const(1 / rhs.value)
            node = _fold(Mul(node, rhs))
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return _neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, text, pos = self.take()
            if kind != "num" or not text.isdigit():
                raise FormulaError("exponent must be a non-negative integer literal", pos)
            node = _fold(Pow(node, int(text)))
        return node

    def atom(self):
        kind, text, pos = self.peek()
        if kind == "num":
            self.take()
            if text.endswith("i"):
                return Const(complex(0, float(text[:-1])))
            return Const(float(text))
        if kind == "name":
            self.take()
            if text == "z":
                return Z
            if text == "i":
                return Const(1j)
            if text in _FUNCS:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return _fold(_FUNCS[text](arg))
            raise FormulaError(f"unknown name {text!r}", pos)
        if text == "(":
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise FormulaError(f"unexpected {text or 'end of formula'!r}", pos)


def _neg(node):
    return _fold(Mul(Const(-1), node))


def _fold(node):
    """Fold operations whose operands are all constants."""
    kids = node.children()
    if kids and all(isinstance(k, Const) for k in kids):
        return Const(complex(node(0j)))
    return node


def parse(text: str, max_depth: int = MAX_DEPTH) -> EntireMap:
    return _Parser(text, max_depth).parse()


# --------------------------------------------------------------------------
# bytecode for the kernels

OP_LOAD, OP_CONST, OP_ADD, OP_MUL, OP_POW, OP_SIN, OP_COS, OP_EXP, OP_STORE = range(9)


@dataclass(frozen=True)
class Program:
    """Postfix code: rows of (opcode, arg). Register 0 holds the input z."""

    code: np.ndarray      # int64 (n, 2)
    consts: np.ndarray    # complex128
    n_regs: int
    max_stack: int


def compile_map(m: EntireMap) -> Program:
    code, consts = [], []
    n_regs = [1]
    depth = [0, 0]  # current, max

    def push(d):
        depth[0] += d
        depth[1] = max(depth[1], depth[0])

    def emit(node, reg):
        if isinstance(node, Var):
            code.append((OP_LOAD, reg)); push(1)
        elif isinstance(node, Const):
            consts.append(node.value)
            code.append((OP_CONST, len(consts) - 1)); push(1)
        elif isinstance(node, (Add, Mul)):
            emit(node.left, reg)
            emit(node.right, reg)
            code.append((OP_ADD if isinstance(node, Add) else OP_MUL, 0)); push(-1)
        elif isinstance(node, Pow):
            emit(node.base, reg)
            code.append((OP_POW, int(node.k)))
        elif isinstance(node, (Sin, Cos, Exp)):
            emit(node.arg, reg)
            op = {Sin: OP_SIN, Cos: OP_COS, Exp: OP_EXP}[type(node)]
            code.append((op, 0))
        elif isinstance(node, Compose):
            emit(node.inner, reg)
            r = n_regs[0]
            n_regs[0] += 1
            code.append((OP_STORE, r)); push(-1)
            emit(node.outer, r)
        else:
            raise TypeError(f"cannot compile {type(node).__name__}")

    emit(m, 0)
    return Program(np.array(code, dtype=np.int64).reshape(-1, 2),
                   np.array(consts, dtype=np.complex128),
                   n_regs[0], max(depth[1], 1))


@dataclass(frozen=True)
class ProgramSet:
    """Several generator programs packed for the kernels."""

    code: np.ndarray
    consts: np.ndarray
    starts: np.ndarray
    ends: np.ndarray
    n_regs: int
    max_stack: int


def pack_programs(maps) -> ProgramSet:
    progs = [compile_map(m) for m in maps]
    code, consts, starts, ends = [], [], [], []
    offset = 0
    for p in progs:
        c = p.code.copy()
        c[c[:, 0] == OP_CONST, 1] += len(consts)
        consts.extend(p.consts.tolist())
        starts.append(offset)
        offset += len(c)
        ends.append(offset)
        code.append(c)
    return ProgramSet(np.concatenate(code).astype(np.int64),
                      np.array(consts, dtype=np.complex128).reshape(-1),
                      np.array(starts, dtype=np.int64), np.array(ends, dtype=np.int64),
                      max(p.n_regs for p in progs), max(p.max_stack for p in progs))


def run_program(prog: Program, z):
    """Vectorised reference interpreter for a single program."""
    z = np.asarray(z, dtype=np.complex128)
    regs = {0: z}
    stack = []
    with np.errstate(all="ignore"):
        for op, arg in prog.code:
            stack_op(op, arg, stack, regs, prog.consts, z.shape)
    return stack[-1]


def stack_op(op, arg, stack, regs, consts, shape):
    if op == OP_LOAD:
        stack.append(regs[arg])
    elif op == OP_CONST:
        stack.append(np.full(shape, consts[arg], dtype=np.complex128))
    elif op == OP_ADD:
        b = stack.pop(); stack.append(stack.pop() + b)
    elif op == OP_MUL:
        b = stack.pop(); stack.append(stack.pop() * b)
    elif op == OP_POW:
        stack.append(ipow(stack.pop(), int(arg)))
    elif op == OP_SIN:
        stack.append(np.sin(stack.pop()))
    elif op == OP_COS:
        stack.append(np.cos(stack.pop()))
    elif op == OP_EXP:
        stack.append(np.exp(stack.pop()))
    elif op == OP_STORE:
        regs[arg] = stack.pop()
    else:
        raise ValueError(f"bad opcode {op}")
