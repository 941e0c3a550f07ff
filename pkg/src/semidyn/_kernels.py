"""Hot loops: escape-time cube and 4-connected labeling.

Each kernel has a numba ``@njit`` version and a pure-numpy version. The
backend is picked once at import from ``SEMIDYN_BACKEND`` (``numba`` or
``numpy``); numba is the default when it imports. Both variants are always
importable by name so they can be compared directly.

Escape-cube encoding (int32, one row per word):
    0   bounded for all N steps
    s>0 first step with |z| > R
    s<0 first step -s at which z became non-finite (overflow / nan)
"""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .expr import (OP_ADD, OP_CONST, OP_COS, OP_EXP, OP_LOAD, OP_MUL, OP_POW,
                   OP_SIN, OP_STORE, ProgramSet, stack_op)

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn
        return deco

_requested = os.environ.get("SEMIDYN_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"SEMIDYN_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"

TILE = 4096  # points per work item


def default_threads() -> int:
    env = os.environ.get("SEMIDYN_THREADS")
    return max(1, int(env)) if env else 1


# --------------------------------------------------------------------------
# escape cube, numba

@njit(cache=True, nogil=True)
def _eval_prog(code, consts, start, end, z, stack, regs):
    sp = 0
    regs[0] = z
    for pc in range(start, end):
        op = code[pc, 0]
        arg = code[pc, 1]
        if op == OP_LOAD:
            stack[sp] = regs[arg]
            sp += 1
        elif op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_POW:
            base = stack[sp - 1]
            r = 1.0 + 0.0j
            k = arg
            while k:
                if k & 1:
                    r = r * base
                k >>= 1
                if k:
                    base = base * base
            stack[sp - 1] = r
        elif op == OP_SIN:
            stack[sp - 1] = cmath.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cmath.cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = cmath.exp(stack[sp - 1])
        elif op == OP_STORE:
            sp -= 1
            regs[arg] = stack[sp]
    return stack[sp - 1]


@njit(cache=True, nogil=True)
def escape_cube_numba(points, code, consts, starts, ends, letters, wstart, wend,
                      nsteps, radius, n_regs, max_stack, out):
    stack = np.empty(max_stack, dtype=np.complex128)
    regs = np.empty(n_regs, dtype=np.complex128)
    for w in range(wstart.shape[0]):
        r = radius[w]
        for p in range(points.shape[0]):
            z = points[p]
            res = 0
            for s in range(1, nsteps[w] + 1):
                for li in range(wend[w] - 1, wstart[w] - 1, -1):
                    g = letters[li]
                    z = _eval_prog(code, consts, starts[g], ends[g], z, stack, regs)
                if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                    res = -s
                    break
                if abs(z) > r:
                    res = s
                    break
            out[w, p] = res


# --------------------------------------------------------------------------
# escape cube, numpy

def _apply_numpy(code, consts, start, end, z):
    regs = {0: z}
    stack = []
    for pc in range(start, end):
        stack_op(code[pc, 0], code[pc, 1], stack, regs, consts, z.shape)
    return stack[-1]


def escape_cube_numpy(points, code, consts, starts, ends, letters, wstart, wend,
                      nsteps, radius, n_regs, max_stack, out):
    with np.errstate(all="ignore"):
        for w in range(len(wstart)):
            word = letters[wstart[w]:wend[w]]
            z = points.copy()
            alive = np.arange(points.shape[0])
            res = np.zeros(points.shape[0], dtype=np.int32)
            for s in range(1, int(nsteps[w]) + 1):
                zz = z[alive]
                for g in word[::-1]:
                    zz = _apply_numpy(code, consts, starts[g], ends[g], zz)
                bad = ~(np.isfinite(zz.real) & np.isfinite(zz.imag))
                big = ~bad & (np.abs(zz) > radius[w])
                res[alive[bad]] = -s
                res[alive[big]] = s
                keep = ~(bad | big)
                alive = alive[keep]
                z[alive] = zz[keep]
                if alive.size == 0:
                    break
            out[w, :] = res


def escape_cube(points, progs: ProgramSet, words, nsteps, radius, threads=None,
                backend=None) -> np.ndarray:
    """Escape verdicts for every (word, point); returns int32 (n_words, n_points).

    Points are cut into fixed tiles processed by a thread pool; tiles write
    disjoint slices so the result does not depend on the schedule.
    """
    backend = backend or BACKEND
    kernel = escape_cube_numba if backend == "numba" else escape_cube_numpy
    points = np.ascontiguousarray(points, dtype=np.complex128).ravel()
    letters = np.array([a for w in words for a in w], dtype=np.int64)
    lens = np.array([len(w) for w in words], dtype=np.int64)
    wend = np.cumsum(lens).astype(np.int64)
    wstart = (wend - lens).astype(np.int64)
    nsteps = np.asarray(nsteps, dtype=np.int64)
    radius = np.asarray(radius, dtype=np.float64)
    out = np.zeros((len(words), points.shape[0]), dtype=np.int32)
    threads = threads or default_threads()

    def work(lo):
        hi = min(lo + TILE, points.shape[0])
        block = np.zeros((len(words), hi - lo), dtype=np.int32)
        kernel(points[lo:hi], progs.code, progs.consts, progs.starts, progs.ends,
               letters, wstart, wend, nsteps, radius, progs.n_regs, progs.max_stack, block)
        out[:, lo:hi] = block

    tiles = range(0, points.shape[0], TILE)
    if threads == 1:
        for lo in tiles:
            work(lo)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, tiles))
    return out


# --------------------------------------------------------------------------
# 4-connected labeling; labels ordered by first pixel in row-major order

@njit(cache=True)
def label4_numba(mask):
    rows, cols = mask.shape
    labels = np.zeros((rows, cols), dtype=np.int32)
    queue = np.empty(rows * cols, dtype=np.int64)
    cur = 0
    for i0 in range(rows):
        for j0 in range(cols):
            if not mask[i0, j0] or labels[i0, j0]:
                continue
            cur += 1
            labels[i0, j0] = cur
            head = 0
            tail = 0
            queue[tail] = i0 * cols + j0
            tail += 1
            while head < tail:
                idx = queue[head]
                head += 1
                i = idx // cols
                j = idx - i * cols
                for d in range(4):
                    ni = i
                    nj = j
                    if d == 0:
                        ni = i - 1
                    elif d == 1:
                        ni = i + 1
                    elif d == 2:
                        nj = j - 1
                    else:
                        nj = j + 1
                    if 0 <= ni < rows and 0 <= nj < cols and mask[ni, nj] and not labels[ni, nj]:
                        labels[ni, nj] = cur
                        queue[tail] = ni * cols + nj
                        tail += 1
    return labels


def label4_numpy(mask):
    mask = np.asarray(mask, dtype=bool)
    rows, cols = mask.shape
    big = rows * cols + 1
    lab = np.where(mask, np.arange(1, rows * cols + 1).reshape(rows, cols), big)
    while True:
        new = lab.copy()
        np.minimum(new[1:, :], lab[:-1, :], out=new[1:, :])
        np.minimum(new[:-1, :], lab[1:, :], out=new[:-1, :])
        np.minimum(new[:, 1:], lab[:, :-1], out=new[:, 1:])
        np.minimum(new[:, :-1], lab[:, 1:], out=new[:, :-1])
        new[~mask] = big
        # pointer jumping: a label names a pixel of the same component
        flat = new.ravel()
        inside = flat < big
        flat[inside] = np.minimum(flat[inside], flat[flat[inside] - 1])
        if np.array_equal(new, lab):
            break
        lab = new
    out = np.zeros((rows, cols), dtype=np.int32)
    if mask.any():
        # minimum index + 1 is each component's first raster pixel
        uniq = np.unique(lab[mask])
        out[mask] = (np.searchsorted(uniq, lab[mask]) + 1).astype(np.int32)
    return out


def label4(mask, backend=None):
    backend = backend or BACKEND
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    return label4_numba(mask) if backend == "numba" else label4_numpy(mask)
