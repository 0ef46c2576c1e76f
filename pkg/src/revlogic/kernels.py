"""Hot simulation loops.

Circuits are lowered to four flat arrays (control mask, first target, second
target or -1, kind) and then pushed through one of two layouts:

* packed: one ``uint64`` per state holding the whole pattern index
  (width <= 64);
* sliced: one row of ``uint64`` words per line, each bit a separate sample
  (any width, 64 samples per word).

Each layout has a numba kernel and a pure-numpy kernel with identical
results. Set ``REVLOGIC_DISABLE_NUMBA=1`` to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

KIND_XOR = 0
KIND_SWAP = 1

USE_NUMBA = numba is not None and os.environ.get("REVLOGIC_DISABLE_NUMBA", "") not in ("1", "true", "yes")
MAX_PACKED_WIDTH = 64


def lower(circuit, backward: bool = False):
    """Flatten gates into kernel arrays, reversed when ``backward``."""
    gates = circuit.gates[::-1] if backward else circuit.gates
    n = len(gates)
    cmask = np.zeros(n, dtype=np.uint64)
    ctrl_ptr = np.zeros(n + 1, dtype=np.int64)
    t1 = np.zeros(n, dtype=np.int64)
    t2 = np.full(n, -1, dtype=np.int64)
    kind = np.zeros(n, dtype=np.int64)
    ctrls: list[int] = []
    for i, g in enumerate(gates):
        m = 0
        for c in g.controls:
            if c < 64:
                m |= 1 << c
        cmask[i] = m
        ctrls.extend(g.controls)
        ctrl_ptr[i + 1] = len(ctrls)
        t1[i] = g.targets[0]
        if not g.is_controlled_not:
            t2[i] = g.targets[1]
            kind[i] = KIND_SWAP
    return cmask, np.asarray(ctrls, dtype=np.int64), ctrl_ptr, t1, t2, kind


# -- packed layout ---------------------------------------------------------

def _packed_numpy(states, cmask, t1, t2, kind):
    s = states.copy()
    one = np.uint64(1)
    for i in range(cmask.shape[0]):
        m = cmask[i]
        active = (s & m) == m
        a = np.uint64(t1[i])
        if kind[i] == KIND_XOR:
            s ^= active.astype(np.uint64) << a
        else:
            b = np.uint64(t2[i])
            differ = ((s >> a) ^ (s >> b)) & one
            flip = (differ & active.astype(np.uint64)) * ((one << a) | (one << b))
            s ^= flip
    return s


def _packed_loop(states, cmask, t1, t2, kind):
    # gate-outer and branch-free so the inner loop vectorizes
    out = states.copy()
    n = out.shape[0]
    for i in range(cmask.shape[0]):
        m = cmask[i]
        a = np.uint64(t1[i])
        if kind[i] == KIND_XOR:
            for j in range(n):
                s = out[j]
                out[j] = s ^ (np.uint64((s & m) == m) << a)
        else:
            b = np.uint64(t2[i])
            for j in range(n):
                s = out[j]
                d = ((s >> a) ^ (s >> b)) & np.uint64((s & m) == m)
                out[j] = s ^ ((d << a) | (d << b))
    return out


# -- sliced layout ---------------------------------------------------------

def _sliced_numpy(rows, ctrls, ctrl_ptr, t1, t2, kind):
    r = rows.copy()
    full = np.full(r.shape[1], np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    for i in range(t1.shape[0]):
        cond = full.copy()
        for c in ctrls[ctrl_ptr[i]:ctrl_ptr[i + 1]]:
            cond &= r[c]
        if kind[i] == KIND_XOR:
            r[t1[i]] ^= cond
        else:
            d = (r[t1[i]] ^ r[t2[i]]) & cond
            r[t1[i]] ^= d
            r[t2[i]] ^= d
    return r


def _sliced_loop(rows, ctrls, ctrl_ptr, t1, t2, kind):
    r = rows.copy()
    nw = r.shape[1]
    allones = np.uint64(0xFFFFFFFFFFFFFFFF)
    for i in range(t1.shape[0]):
        a = t1[i]
        b = t2[i]
        for w in range(nw):
            cond = allones
            for p in range(ctrl_ptr[i], ctrl_ptr[i + 1]):
                cond &= r[ctrls[p], w]
            if kind[i] == KIND_XOR:
                r[a, w] ^= cond
            else:
                d = (r[a, w] ^ r[b, w]) & cond
                r[a, w] ^= d
                r[b, w] ^= d
    return r


if numba is not None:
    _packed_numba = numba.njit(cache=False)(_packed_loop)
    _sliced_numba = numba.njit(cache=False)(_sliced_loop)
else:  # pragma: no cover
    _packed_numba = _packed_loop
    _sliced_numba = _sliced_loop


def run_packed(circuit, states: np.ndarray, backward: bool = False, use_numba: bool | None = None) -> np.ndarray:
    """Simulate pattern indices (``uint64``) through a circuit of width <= 64."""
    if circuit.width > MAX_PACKED_WIDTH:
        raise ValueError(f"packed simulation supports width <= {MAX_PACKED_WIDTH}, got {circuit.width}")
    states = np.ascontiguousarray(states, dtype=np.uint64)
    cmask, _, _, t1, t2, kind = lower(circuit, backward)
    if USE_NUMBA if use_numba is None else use_numba:
        return _packed_numba(states, cmask, t1, t2, kind)
    return _packed_numpy(states, cmask, t1, t2, kind)


def run_sliced(circuit, rows: np.ndarray, backward: bool = False, use_numba: bool | None = None) -> np.ndarray:
    """Simulate bit-sliced samples: ``rows[line, word]`` bit ``k`` is sample ``64*word+k``."""
    rows = np.ascontiguousarray(rows, dtype=np.uint64)
    if rows.shape[0] != circuit.width:
        raise ValueError(f"{rows.shape[0]} rows for width {circuit.width}")
    _, ctrls, ctrl_ptr, t1, t2, kind = lower(circuit, backward)
    if USE_NUMBA if use_numba is None else use_numba:
        return _sliced_numba(rows, ctrls, ctrl_ptr, t1, t2, kind)
    return _sliced_numpy(rows, ctrls, ctrl_ptr, t1, t2, kind)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """``bool[lines, samples]`` to sliced ``uint64[lines, ceil(samples/64)]``."""
    bits = np.asarray(bits, dtype=bool)
    nlines, nsamp = bits.shape
    nwords = max(1, -(-nsamp // 64))
    padded = np.zeros((nlines, nwords * 64), dtype=bool)
    padded[:, :nsamp] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64, copy=False).reshape(nlines, nwords)


def unpack_bits(rows: np.ndarray, nsamples: int) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype="<u8")
    bytes_ = rows.view(np.uint8).reshape(rows.shape[0], -1)
    return np.unpackbits(bytes_, axis=1, bitorder="little")[:, :nsamples].astype(bool)
